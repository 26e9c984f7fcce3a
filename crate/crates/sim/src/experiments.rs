//! The replicated verification battery and the stabilization tail study.
//!
//! One battery replicate samples a configuration, runs both engines, and
//! checks everything checkable: engine agreement, disjoint interiors,
//! earlier-neighbour existence (and uniqueness for ball shapes), contact
//! time consistency, recorded stop chains, and the cluster structure (one
//! doublet per uncensored cluster, growth times increasing outward from
//! it). The battery is what `verify` runs and what most acceptance gates
//! call into.

use lilypond_core::builder::{self, GrainStatus};
use lilypond_core::{analysis, oracle};
use rayon::prelude::*;
use serde::Serialize;

use crate::sampling::{self, ScenarioSpec, ShapeLaw};
use crate::stats::ExperimentError;

/// Engine agreement tolerance on growth values.
pub const ENGINE_TOL: f64 = 1e-6;

/// Deliberate corruption for testing that the battery can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    None,
    /// Inflates one growth value by 10% after building.
    InflateGrowth,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BatteryReport {
    pub replicates: usize,
    pub degenerate_skipped: usize,
    pub ties_flagged: usize,
    pub grains_total: usize,
    pub covered_total: usize,
    pub capped_total: usize,
    pub clusters_checked: usize,
    pub censored_clusters: usize,
    pub doublets_total: usize,
    pub engine_max_delta: f64,
    pub max_penetration: f64,
    /// Penetration divided by its tolerance scale; must stay below 1e-7.
    pub max_penetration_ratio: f64,
    /// Whether the exactly-one-earlier-neighbour check applied (ball
    /// shapes) and held.
    pub exactly_one_checked: bool,
    pub failures: Vec<String>,
    pub ok: bool,
}

struct ReplicateOutcome {
    skipped: bool,
    tie: bool,
    grains: usize,
    covered: usize,
    capped: usize,
    clusters: usize,
    censored: usize,
    doublets: usize,
    engine_delta: f64,
    penetration: f64,
    penetration_ratio: f64,
    failures: Vec<String>,
}

/// Runs the full invariant battery over `m` replicates of the scenario.
pub fn run_battery(spec: &ScenarioSpec, m: usize, fault: Fault) -> Result<BatteryReport, ExperimentError> {
    let balls_only = matches!(spec.shapes, ShapeLaw::UnitBall | ShapeLaw::BallUniform { .. });
    let outcomes: Result<Vec<ReplicateOutcome>, ExperimentError> = (0..m)
        .into_par_iter()
        .map(|k| replicate(spec, k as u64, balls_only, if k == 0 { fault } else { Fault::None }))
        .collect();
    let outcomes = outcomes?;

    let mut report = BatteryReport { replicates: m, exactly_one_checked: balls_only, ..Default::default() };
    for (k, o) in outcomes.into_iter().enumerate() {
        if o.skipped {
            report.degenerate_skipped += 1;
            continue;
        }
        if o.tie {
            report.ties_flagged += 1;
        }
        report.grains_total += o.grains;
        report.covered_total += o.covered;
        report.capped_total += o.capped;
        report.clusters_checked += o.clusters;
        report.censored_clusters += o.censored;
        report.doublets_total += o.doublets;
        report.engine_max_delta = report.engine_max_delta.max(o.engine_delta);
        report.max_penetration = report.max_penetration.max(o.penetration);
        report.max_penetration_ratio = report.max_penetration_ratio.max(o.penetration_ratio);
        for f in o.failures {
            report.failures.push(format!("replicate {k}: {f}"));
        }
    }
    report.ok = report.failures.is_empty();
    Ok(report)
}

fn replicate(
    spec: &ScenarioSpec,
    rep: u64,
    balls_only: bool,
    fault: Fault,
) -> Result<ReplicateOutcome, ExperimentError> {
    let mut out = ReplicateOutcome {
        skipped: false,
        tie: false,
        grains: 0,
        covered: 0,
        capped: 0,
        clusters: 0,
        censored: 0,
        doublets: 0,
        engine_delta: 0.0,
        penetration: 0.0,
        penetration_ratio: 0.0,
        failures: Vec::new(),
    };
    let cfg = sampling::sample(spec, rep)?;
    if cfg.len() < 2 {
        out.skipped = true;
        return Ok(out);
    }
    let mut built = builder::build(&cfg)?;
    let event_built = oracle::build(&cfg)?;
    if fault == Fault::InflateGrowth {
        if let Some(g) = built.grains.iter_mut().find(|g| g.r > 0.0) {
            g.r *= 1.1;
        }
    }
    out.tie = built.tie_degenerate || event_built.tie_degenerate;
    out.grains = built.grains.len();
    out.covered = built.grains.iter().filter(|g| g.status == GrainStatus::Covered).count();
    out.capped =
        built.grains.iter().filter(|g| g.status == GrainStatus::UnstoppedCapped).count();

    // Engine agreement.
    for (a, b) in built.grains.iter().zip(event_built.grains.iter()) {
        if a.status == GrainStatus::UnstoppedCapped {
            continue;
        }
        let delta = (a.r - b.r).abs();
        out.engine_delta = out.engine_delta.max(delta);
        if delta > ENGINE_TOL {
            out.failures
                .push(format!("engine-agreement: grain {} differs by {delta}", a.grain.id));
        }
    }

    // Disjoint interiors.
    let hc = analysis::verify_hard_core(&built);
    out.penetration = hc.max_penetration;
    if let Some((a, b)) = hc.worst_pair {
        let scale = {
            let ga = built.grain_by_id(a).unwrap().body();
            let gb = built.grain_by_id(b).unwrap().body();
            1.0_f64.max(ga.circumradius()).max(gb.circumradius())
        };
        out.penetration_ratio = hc.max_penetration / scale;
    }
    if !hc.ok {
        out.failures.push(format!("hard-core: {} violating pairs", hc.violations.len()));
    }

    // Every grain is stopped by something earlier.
    let en = analysis::verify_earlier_neighbours(&built);
    if !en.ok {
        out.failures.push(format!("earlier-neighbour: {} grains without one", en.missing.len()));
    }
    if balls_only && !out.tie {
        for g in &built.grains {
            if g.r > 0.0 && g.status != GrainStatus::UnstoppedCapped {
                let count = analysis::earlier_neighbours(&built, g.grain.id)
                    .map(|v| v.len())
                    .unwrap_or(0);
                if count != 1 {
                    out.failures.push(format!(
                        "exactly-one: grain {} has {count} earlier neighbours",
                        g.grain.id
                    ));
                }
            }
        }
    }

    // Time-domain consistency.
    match analysis::verify_contact_times(&built) {
        Ok(ct) if !ct.ok => out.failures.push(format!(
            "contact-times: {} overgrown, {} detached",
            ct.overgrown.len(),
            ct.detached.len()
        )),
        Ok(_) => {}
        Err(e) => out.failures.push(format!("contact-times: {e}")),
    }
    let sc = analysis::verify_stop_chains(&built);
    if !sc.ok {
        out.failures.push(format!(
            "stop-chains: {} order violations, {} unterminated",
            sc.order_violations.len(),
            sc.unterminated.len()
        ));
    }

    // Cluster structure.
    if built.in_h && !out.tie {
        let graph = analysis::neighbour_graph(&built);
        let clusters = analysis::clusters(&built, &graph);
        out.clusters = clusters.len();
        for c in &clusters {
            let doublet_pairs: Vec<(u64, u64)> = graph
                .edges
                .iter()
                .filter(|e| e.doublet && c.ids.binary_search(&e.a).is_ok())
                .map(|e| (e.a, e.b))
                .collect();
            out.doublets += doublet_pairs.len();
            if doublet_pairs.len() > 1 {
                out.failures
                    .push(format!("doublet-structure: cluster {:?} has {} doublets", c.ids, doublet_pairs.len()));
            }
            if c.touches_boundary {
                out.censored += 1;
                continue;
            }
            if doublet_pairs.len() != 1 {
                out.failures.push(format!(
                    "doublet-structure: interior cluster {:?} has {} doublets",
                    c.ids,
                    doublet_pairs.len()
                ));
                continue;
            }
            let (da, db) = doublet_pairs[0];
            // Every member's stopper chain must descend into the doublet.
            for &id in &c.ids {
                if id == da || id == db {
                    continue;
                }
                let mut cur = built.grain_by_id(id).unwrap();
                let mut hops = 0usize;
                loop {
                    hops += 1;
                    if hops > c.ids.len() {
                        out.failures
                            .push(format!("doublet-bfs: grain {id} never reaches the doublet"));
                        break;
                    }
                    let Some(&next_id) = cur.earlier_neighbour_ids.first() else {
                        out.failures.push(format!("doublet-bfs: grain {id} chain breaks"));
                        break;
                    };
                    let next = built.grain_by_id(next_id).unwrap();
                    if next.stop_time() > cur.stop_time() + analysis::TIME_TOL {
                        out.failures.push(format!(
                            "doublet-bfs: stop times increase towards the doublet at grain {id}"
                        ));
                        break;
                    }
                    if next_id == da || next_id == db {
                        break;
                    }
                    cur = next;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct TailPoint {
    pub t: f64,
    pub tail: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailCurve {
    pub replicates: usize,
    pub truncated: usize,
    pub points: Vec<TailPoint>,
    /// Least-squares slope of ln(tail) against t over strictly interior
    /// points; markedly negative values are consistent with an
    /// exponential-type tail. Absent with fewer than two interior points.
    pub log_slope: Option<f64>,
    /// The stabilization radii behind the curve, one per replicate;
    /// infinite entries come from truncation or lone grains.
    pub radii: Vec<f64>,
}

/// Empirical tail of the stabilization radius at a grain near the window
/// center, over independent replicates.
pub fn tail_curve_u(
    spec: &ScenarioSpec,
    replicates: usize,
    thresholds: &[f64],
    chain_budget: usize,
) -> Result<TailCurve, ExperimentError> {
    let radii: Result<Vec<f64>, ExperimentError> = (0..replicates)
        .into_par_iter()
        .map(|k| {
            let cfg = sampling::sample(spec, k as u64)?;
            if cfg.is_empty() {
                return Ok(f64::INFINITY);
            }
            let center = cfg.window().center();
            let y = cfg
                .grains()
                .iter()
                .min_by(|a, b| {
                    dist2(&a.x, &center).total_cmp(&dist2(&b.x, &center))
                })
                .unwrap()
                .id;
            let record = analysis::stabilization(&cfg, None, y, chain_budget)
                .map_err(|e| ExperimentError::Regime(e.to_string()))?;
            Ok(record.radius)
        })
        .collect();
    let radii = radii?;
    let truncated = radii.iter().filter(|r| r.is_infinite()).count();
    let m = replicates as f64;
    let points: Vec<TailPoint> = thresholds
        .iter()
        .map(|&t| {
            let tail = radii.iter().filter(|&&u| u > t).count() as f64 / m;
            TailPoint { t, tail, stderr: (tail * (1.0 - tail) / m).sqrt() }
        })
        .collect();
    let interior: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.tail > 0.0 && p.tail < 1.0)
        .map(|p| (p.t, p.tail.ln()))
        .collect();
    let log_slope = (interior.len() >= 2).then(|| {
        let n = interior.len() as f64;
        let mx = interior.iter().map(|(t, _)| t).sum::<f64>() / n;
        let my = interior.iter().map(|(_, y)| y).sum::<f64>() / n;
        let num: f64 = interior.iter().map(|(t, y)| (t - mx) * (y - my)).sum();
        let den: f64 = interior.iter().map(|(t, _)| (t - mx) * (t - mx)).sum();
        num / den
    });
    Ok(TailCurve { replicates, truncated, points, log_slope, radii })
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}
