//! Functionals of a growth assignment and the Monte Carlo experiments
//! built on them: the central-limit check over growing windows, the paired
//! birth-scenario comparison, and an independent union-volume estimator.

use lilypond_core::analysis;
use lilypond_core::builder::{self, BuildError, GrainStatus, HardCoreResult};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::{self, BirthLaw, SampleError, ScenarioSpec};
use lilypond_core::model::Window;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("invalid regime: {0}")]
    Regime(String),
}

/// Weight f applied at the rescaled germ position n^{-1/d} x, a point of
/// the unit window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "weight", rename_all = "kebab-case")]
pub enum Weight {
    One,
    /// Indicator of a sub-box of the unit window.
    SubBox { lo: Vec<f64>, hi: Vec<f64> },
    /// The given coordinate of the rescaled position.
    Coordinate { axis: usize },
}

impl Weight {
    fn eval(&self, scaled: &[f64]) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::SubBox { lo, hi } => {
                let inside = scaled
                    .iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .all(|(x, (l, h))| *x >= *l && *x <= *h);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            Weight::Coordinate { axis } => scaled.get(*axis).copied().unwrap_or(0.0),
        }
    }
}

/// Mark weight h applied to the growth and shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "h", rename_all = "kebab-case")]
pub enum HVariant {
    /// h(t, K) = V_d(tK): the grain's final volume.
    Volume,
    /// h = 1: germ counting.
    Count,
    /// h(t, K) = alpha t^beta.
    Power { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSpec {
    pub h: HVariant,
    pub f: Weight,
}

impl FunctionalSpec {
    pub fn volume() -> Self {
        FunctionalSpec { h: HVariant::Volume, f: Weight::One }
    }

    pub fn count() -> Self {
        FunctionalSpec { h: HVariant::Count, f: Weight::One }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub value: f64,
    /// Capped grains that contributed; nonzero values taint the sample.
    pub capped_contributions: usize,
}

/// Sum of f(n^{-1/d} X) · h(R, K) over the grains. Zero for configurations
/// of fewer than two grains.
pub fn functional_value(
    result: &HardCoreResult,
    functional: &FunctionalSpec,
    window_n: f64,
) -> FunctionalValue {
    if result.grains.len() < 2 {
        return FunctionalValue { value: 0.0, capped_contributions: 0 };
    }
    let d = result.dimension;
    let scale = window_n.powf(1.0 / d as f64);
    let mut capped = 0usize;
    let mut terms: Vec<f64> = Vec::with_capacity(result.grains.len());
    for g in &result.grains {
        if g.status == GrainStatus::UnstoppedCapped {
            capped += 1;
        }
        let scaled: Vec<f64> = g.grain.x.iter().map(|x| x / scale).collect();
        let f = functional.f.eval(&scaled);
        let h = match &functional.h {
            HVariant::Volume => g.grain.shape.volume(d, g.r),
            HVariant::Count => 1.0,
            HVariant::Power { alpha, beta } => alpha * g.r.powf(*beta),
        };
        terms.push(f * h);
    }
    FunctionalValue { value: pairwise_sum(&terms), capped_contributions: capped }
}

/// Deterministic order-stable summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        pairwise_sum(v) / v.len() as f64
    }
}

/// Unbiased sample variance.
pub fn variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    let sq: Vec<f64> = v.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (v.len() - 1) as f64
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / core::f64::consts::SQRT_2))
}

/// Kolmogorov–Smirnov distance of a sample to the standard normal.
pub fn ks_distance_to_normal(sample: &[f64]) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, x) in sorted.iter().enumerate() {
        let cdf = normal_cdf(*x);
        d = d.max((i as f64 + 1.0) / n - cdf).max(cdf - i as f64 / n);
    }
    d
}

#[derive(Debug, Clone, Serialize)]
pub struct CltSlice {
    /// Window volume parameter n; the window is [0, n^{1/d}]^d.
    pub n: f64,
    pub mean: f64,
    pub variance: f64,
    pub variance_over_n: f64,
    /// KS distance of the standardized sample to N(0,1); absent when the
    /// sample variance vanishes.
    pub ks: Option<f64>,
    pub mean_standardized: f64,
    pub capped_contributions: usize,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CltReport {
    pub functional: FunctionalSpec,
    pub replicates: usize,
    pub slices: Vec<CltSlice>,
    /// Empirical variance-over-n at the largest window: the plug-in
    /// estimate of the limiting CLT variance.
    pub sigma_hat: f64,
}

/// Runs the growing-window experiment: for each n, M independent
/// configurations on [0, n^{1/d}]^d, built and summarized through the
/// functional. Requires the simultaneous-birth shape-bounded regime.
pub fn clt_experiment(
    spec: &ScenarioSpec,
    functional: &FunctionalSpec,
    n_list: &[f64],
    m: usize,
) -> Result<CltReport, ExperimentError> {
    if !spec.simultaneous_regime() {
        return Err(ExperimentError::Regime(
            "the growing-window experiment needs simultaneous births and bounded shapes".into(),
        ));
    }
    let d = spec.dimension;
    let mut slices = Vec::with_capacity(n_list.len());
    for (n_idx, &n) in n_list.iter().enumerate() {
        let side = n.powf(1.0 / d as f64);
        let mut slice_spec = spec.clone();
        slice_spec.window = Window::new(vec![0.0; d], vec![side; d])
            .map_err(|e| ExperimentError::Regime(format!("window for n={n}: {e}")))?;
        let results: Result<Vec<(f64, usize)>, ExperimentError> = (0..m)
            .into_par_iter()
            .map(|k| {
                let rep = (n_idx * m + k) as u64;
                let cfg = sampling::sample(&slice_spec, rep)?;
                if cfg.len() < 2 {
                    return Ok((0.0, 0));
                }
                let result = builder::build(&cfg)?;
                let fv = functional_value(&result, functional, n);
                Ok((fv.value, fv.capped_contributions))
            })
            .collect();
        let results = results?;
        let samples: Vec<f64> = results.iter().map(|(v, _)| *v).collect();
        let capped: usize = results.iter().map(|(_, c)| *c).sum();
        let mu = mean(&samples);
        let var = variance(&samples);
        let sd = var.sqrt();
        let (ks, mean_std) = if sd > 1e-12 {
            let standardized: Vec<f64> = samples.iter().map(|v| (v - mu) / sd).collect();
            (Some(ks_distance_to_normal(&standardized)), mean(&standardized))
        } else {
            (None, 0.0)
        };
        slices.push(CltSlice {
            n,
            mean: mu,
            variance: var,
            variance_over_n: var / n,
            ks,
            mean_standardized: mean_std,
            capped_contributions: capped,
            samples,
        });
    }
    let sigma_hat = slices.last().map(|s| s.variance_over_n).unwrap_or(0.0);
    Ok(CltReport { functional: functional.clone(), replicates: m, slices, sigma_hat })
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub replicates: usize,
    pub t_max: f64,
    /// Scenario A: all births zero. Scenario B: births uniform on [0, t_max].
    pub mean_r_a: f64,
    pub mean_r_b: f64,
    /// Mean fraction of germs in B that never grew.
    pub covered_fraction_b: f64,
    /// Paired per-replicate differences of mean growth, B minus A.
    pub paired_diffs: Vec<f64>,
    /// Per-replicate mean growth under each scenario, aligned with
    /// `paired_diffs`.
    pub replicate_means_a: Vec<f64>,
    pub replicate_means_b: Vec<f64>,
    /// One-sided z statistic for mean R being larger in B.
    pub z: f64,
    pub b_larger_at_99: bool,
    /// Growth quantiles (25%, 50%, 75%, 90%), covered germs excluded.
    pub quantiles_a: [f64; 4],
    pub quantiles_b: [f64; 4],
    /// (cluster size, occurrences) pooled over replicates.
    pub cluster_sizes_a: Vec<(usize, usize)>,
    pub cluster_sizes_b: Vec<(usize, usize)>,
    pub skipped_replicates: usize,
}

struct CompareSample {
    r_a: Vec<f64>,
    r_b: Vec<f64>,
    covered_b: usize,
    total_b: usize,
    sizes_a: Vec<usize>,
    sizes_b: Vec<usize>,
}

/// Builds the same germs and shapes under two birth regimes and compares
/// the growth distributions pairwise.
pub fn compare_scenarios(
    spec: &ScenarioSpec,
    t_max: f64,
    m: usize,
) -> Result<CompareReport, ExperimentError> {
    let mut spec_a = spec.clone();
    spec_a.births = BirthLaw::Constant;
    let mut spec_b = spec.clone();
    spec_b.births = BirthLaw::Uniform { t_max };

    let samples: Result<Vec<Option<CompareSample>>, ExperimentError> = (0..m)
        .into_par_iter()
        .map(|k| {
            let cfg_a = sampling::sample(&spec_a, k as u64)?;
            let cfg_b = sampling::sample(&spec_b, k as u64)?;
            if cfg_a.len() < 2 {
                return Ok(None);
            }
            let res_a = builder::build(&cfg_a)?;
            let res_b = builder::build(&cfg_b)?;
            let keep = |g: &lilypond_core::GrownGrain| {
                g.r > 0.0 && g.status != GrainStatus::UnstoppedCapped
            };
            let r_a: Vec<f64> = res_a.grains.iter().filter(|g| keep(g)).map(|g| g.r).collect();
            let r_b: Vec<f64> = res_b.grains.iter().filter(|g| keep(g)).map(|g| g.r).collect();
            let covered_b =
                res_b.grains.iter().filter(|g| g.status == GrainStatus::Covered).count();
            let sizes = |res: &HardCoreResult| {
                let graph = analysis::neighbour_graph(res);
                analysis::clusters(res, &graph).into_iter().map(|c| c.ids.len()).collect()
            };
            Ok(Some(CompareSample {
                sizes_a: sizes(&res_a),
                sizes_b: sizes(&res_b),
                covered_b,
                total_b: res_b.grains.len(),
                r_a,
                r_b,
            }))
        })
        .collect();
    let samples = samples?;

    let mut diffs = Vec::new();
    let mut means_a = Vec::new();
    let mut means_b = Vec::new();
    let mut all_a = Vec::new();
    let mut all_b = Vec::new();
    let mut covered = 0usize;
    let mut total = 0usize;
    let mut hist_a: Vec<(usize, usize)> = Vec::new();
    let mut hist_b: Vec<(usize, usize)> = Vec::new();
    let mut skipped = 0usize;
    for s in samples.into_iter() {
        let Some(s) = s else {
            skipped += 1;
            continue;
        };
        if !s.r_a.is_empty() && !s.r_b.is_empty() {
            let (ma, mb) = (mean(&s.r_a), mean(&s.r_b));
            diffs.push(mb - ma);
            means_a.push(ma);
            means_b.push(mb);
        }
        all_a.extend_from_slice(&s.r_a);
        all_b.extend_from_slice(&s.r_b);
        covered += s.covered_b;
        total += s.total_b;
        for sz in s.sizes_a {
            bump(&mut hist_a, sz);
        }
        for sz in s.sizes_b {
            bump(&mut hist_b, sz);
        }
    }
    let z = if diffs.len() >= 2 && variance(&diffs) > 0.0 {
        mean(&diffs) / (variance(&diffs) / diffs.len() as f64).sqrt()
    } else {
        0.0
    };
    Ok(CompareReport {
        replicates: m,
        t_max,
        mean_r_a: mean(&all_a),
        mean_r_b: mean(&all_b),
        covered_fraction_b: if total > 0 { covered as f64 / total as f64 } else { 0.0 },
        z,
        b_larger_at_99: z > 2.3263,
        quantiles_a: quantiles(&mut all_a),
        quantiles_b: quantiles(&mut all_b),
        cluster_sizes_a: hist_a,
        cluster_sizes_b: hist_b,
        paired_diffs: diffs,
        replicate_means_a: means_a,
        replicate_means_b: means_b,
        skipped_replicates: skipped,
    })
}

fn bump(hist: &mut Vec<(usize, usize)>, size: usize) {
    match hist.iter_mut().find(|(s, _)| *s == size) {
        Some((_, c)) => *c += 1,
        None => {
            hist.push((size, 1));
            hist.sort_unstable();
        }
    }
}

fn quantiles(v: &mut Vec<f64>) -> [f64; 4] {
    if v.is_empty() {
        return [0.0; 4];
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let at = |q: f64| v[((v.len() - 1) as f64 * q).round() as usize];
    [at(0.25), at(0.5), at(0.75), at(0.9)]
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct UnionVolume {
    pub value: f64,
    pub standard_error: f64,
    pub points: usize,
}

/// Monte Carlo estimate of the volume of the union of all grown grains,
/// independent of the disjointness the functional identity relies on. The
/// sampling box is the window inflated to contain every body.
pub fn union_volume_mc(result: &HardCoreResult, points: usize, seed: u64) -> UnionVolume {
    let bodies: Vec<_> = result
        .grains
        .iter()
        .filter(|g| g.r > 0.0 && g.status != GrainStatus::UnstoppedCapped)
        .map(|g| g.body())
        .collect();
    let d = result.dimension;
    let mut lo: Vec<f64> = result.window.lo().to_vec();
    let mut hi: Vec<f64> = result.window.hi().to_vec();
    for b in &bodies {
        for axis in 0..d {
            let (a, z) = b.extent(axis);
            lo[axis] = lo[axis].min(a);
            hi[axis] = hi[axis].max(z);
        }
    }
    let box_volume: f64 = lo.iter().zip(hi.iter()).map(|(a, z)| z - a).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    let mut p = vec![0.0; d];
    for _ in 0..points {
        for axis in 0..d {
            p[axis] = rng.random_range(lo[axis]..hi[axis]);
        }
        if bodies.iter().any(|b| b.contains(&p, 0.0)) {
            hits += 1;
        }
    }
    let frac = hits as f64 / points as f64;
    UnionVolume {
        value: frac * box_volume,
        standard_error: box_volume * (frac * (1.0 - frac) / points as f64).sqrt(),
        points,
    }
}
