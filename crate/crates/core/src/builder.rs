//! Deterministic construction of the growth-maximal hard-core assignment.
//!
//! Grains freeze in rounds. In each round the mutual nearest pairs (under
//! the first contact time) are examined against the already frozen set:
//! whichever comes first wins. A pair that meets before any frozen grain
//! interferes either stops both members simultaneously, or, when the earlier
//! member reaches the later germ before its birth, covers that germ at
//! growth zero and keeps growing itself. If some frozen grain interferes
//! first, the affected pair members freeze against it one-sidedly. A final
//! unpaired grain is stopped by the nearest frozen grain, or, when nothing
//! can stop it, is capped at twice the growth that swallows the window and
//! the result is flagged as escaping the hard-core class.
//!
//! Everything is ordered by explicit sorts on (time, id), so rebuilding the
//! same configuration reproduces the same result bit for bit.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{
    first_contact, first_contact_time, stop_time, Configuration, Grain, ModelError, Window,
    TIE_TOL,
};

#[derive(Debug, Clone, PartialEq)]
pub enum BuildError {
    /// The construction needs at least two grains.
    TooFewGrains(usize),
    Model(ModelError),
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::TooFewGrains(n) => write!(f, "need at least 2 grains, got {n}"),
            BuildError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for BuildError {}

impl From<ModelError> for BuildError {
    fn from(e: ModelError) -> Self {
        BuildError::Model(e)
    }
}

/// Terminal state of a grain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GrainStatus {
    /// Grew and was stopped by contact; growth is positive.
    #[cfg_attr(feature = "serde", serde(rename = "stopped"))]
    Stopped,
    /// Germ was swallowed before it could grow; growth is zero.
    #[cfg_attr(feature = "serde", serde(rename = "covered"))]
    Covered,
    /// Nothing could stop it; growth capped artificially, result not in the
    /// hard-core class.
    #[cfg_attr(feature = "serde", serde(rename = "unstopped-capped"))]
    UnstoppedCapped,
}

/// Which rule froze a grain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreezeRule {
    /// Mutual nearest pair stopping each other simultaneously.
    MutualPair,
    /// Germ covered by its pair partner before birth.
    CoveredPreBirth,
    /// Intercepted by an already frozen grain before the pair could meet.
    StoppedByFrozen,
    /// Last grain, stopped by the nearest frozen grain.
    LeftoverStopped,
    /// Last grain with nothing to stop it.
    LeftoverCapped,
}

/// One freezing decision, in the order they were applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub grain_id: u64,
    pub round: i32,
    pub rule: FreezeRule,
    pub r: f64,
    pub stoppers: Vec<u64>,
}

/// A grain together with its assigned growth.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrownGrain {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub grain: Grain,
    #[cfg_attr(feature = "serde", serde(rename = "R"))]
    pub r: f64,
    pub status: GrainStatus,
    /// Round index at which the grain froze; -1 for the leftover rule.
    pub round: i32,
    /// The grains recorded as stopping this one when it froze.
    pub earlier_neighbour_ids: Vec<u64>,
}

impl GrownGrain {
    /// Birth time plus growth: the moment the grain stopped.
    pub fn stop_time(&self) -> f64 {
        self.grain.t + self.r
    }

    pub fn body(&self) -> crate::geometry::PlacedBody {
        self.grain.body(self.r)
    }
}

/// Which engine produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Engine {
    Builder,
    Oracle,
}

/// The complete growth assignment for a configuration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HardCoreResult {
    pub engine: Engine,
    pub dimension: usize,
    pub window: Window,
    /// Grains in configuration order.
    pub grains: Vec<GrownGrain>,
    /// A comparison that decides the construction was closer than the tie
    /// tolerance; the result is still deterministic but the input is
    /// degenerate.
    pub tie_degenerate: bool,
    /// False when a grain had to be capped.
    pub in_h: bool,
    /// The capped growth value, when a grain could not be stopped.
    pub cap_radius: Option<f64>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub log: Vec<Assignment>,
}

impl HardCoreResult {
    pub fn grain_by_id(&self, id: u64) -> Option<&GrownGrain> {
        self.grains.iter().find(|g| g.grain.id == id)
    }
}

/// Mutual nearest pairs of a grain set under the first contact time.
/// Returns id pairs sorted by (contact time, ids) and whether any comparison
/// was within the tie tolerance.
pub fn mutual_nearest_pairs(grains: &[Grain]) -> Result<(Vec<(u64, u64)>, bool), ModelError> {
    let indices: Vec<usize> = (0..grains.len()).collect();
    let (pairs, tie) =
        mutual_pairs_with(&indices, grains, |i, j| first_contact_time(&grains[i], &grains[j]))?;
    Ok((pairs.into_iter().map(|(i, j, _)| (grains[i].id, grains[j].id)).collect(), tie))
}

/// Earliest time at which `u`, growing freely, hits any frozen grain with
/// positive growth. `f64::INFINITY` when there is none.
pub fn nearest_frozen_time<'a, I>(u: &Grain, frozen: I) -> Result<f64, ModelError>
where
    I: IntoIterator<Item = &'a GrownGrain>,
{
    let mut best = f64::INFINITY;
    for f in frozen {
        if f.r > 0.0 && f.status != GrainStatus::UnstoppedCapped {
            best = best.min(stop_time(u, &f.grain, f.r)?);
        }
    }
    Ok(best)
}

/// Runs the full construction on a validated configuration.
pub fn build(cfg: &Configuration) -> Result<HardCoreResult, BuildError> {
    let grains = cfg.grains();
    let n = grains.len();
    if n < 2 {
        return Err(BuildError::TooFewGrains(n));
    }
    let dcache = DCache::new(grains)?;
    let mut state = State::new(n);

    while state.active.len() >= 2 {
        let (pairs, tie) =
            mutual_pairs_with(&state.active, grains, |i, j| dcache.get(grains, i, j))?;
        state.tie |= tie;
        state.round += 1;
        debug_assert!(!pairs.is_empty(), "two active grains always form a pair");
        let mut freezes: Vec<Freeze> = Vec::new();
        for (i, j, d_pair) in pairs {
            let stop_i = state.frozen_stop[i].0;
            let stop_j = state.frozen_stop[j].0;
            let d_frozen = stop_i.min(stop_j);
            if d_frozen.is_finite() && (d_pair - d_frozen).abs() <= TIE_TOL {
                state.tie = true;
            }
            if d_pair <= d_frozen {
                // The pair resolves before any frozen grain interferes.
                let fc = first_contact(&grains[i], &grains[j])?;
                if let Some((coverer, covered)) = fc.covers {
                    let idx = if grains[i].id == covered { i } else { j };
                    freezes.push(Freeze { idx, r: 0.0, rule: FreezeRule::CoveredPreBirth, stoppers: vec![coverer] });
                } else {
                    freezes.push(Freeze {
                        idx: i,
                        r: d_pair - grains[i].t,
                        rule: FreezeRule::MutualPair,
                        stoppers: vec![grains[j].id],
                    });
                    freezes.push(Freeze {
                        idx: j,
                        r: d_pair - grains[j].t,
                        rule: FreezeRule::MutualPair,
                        stoppers: vec![grains[i].id],
                    });
                }
            } else {
                // A frozen grain gets there first; freeze every pair member
                // attaining the earliest interference.
                if stop_i.is_finite() && stop_j.is_finite() && (stop_i - stop_j).abs() <= TIE_TOL {
                    state.tie = true;
                }
                for idx in [i, j] {
                    let (stop, by) = state.frozen_stop[idx];
                    if stop == d_frozen {
                        let stopper = grains[by.expect("finite stop has a source")].id;
                        freezes.push(Freeze {
                            idx,
                            r: stop - grains[idx].t,
                            rule: FreezeRule::StoppedByFrozen,
                            stoppers: vec![stopper],
                        });
                    }
                }
            }
        }
        state.apply(grains, freezes)?;
    }

    if let Some(&idx) = state.active.first() {
        let u = &grains[idx];
        let (stop, by) = state.frozen_stop[idx];
        if stop.is_finite() {
            #[cfg(debug_assertions)]
            {
                // The incremental minimum must match a fresh scan.
                let fresh = fresh_frozen_stop(grains, &state, idx)?;
                debug_assert_eq!(stop.to_bits(), fresh.to_bits());
            }
            let stopper = grains[by.expect("finite stop has a source")].id;
            let f = Freeze {
                idx,
                r: stop - u.t,
                rule: FreezeRule::LeftoverStopped,
                stoppers: vec![stopper],
            };
            state.apply(grains, vec![f])?;
        } else {
            // Nothing can ever stop this grain: cap it at twice the growth
            // that swallows the whole window.
            let r = cap_growth(u, cfg.window());
            let f = Freeze { idx, r, rule: FreezeRule::LeftoverCapped, stoppers: vec![] };
            state.cap_radius = Some(r);
            state.apply(grains, vec![f])?;
        }
    }

    Ok(state.finish(cfg, grains))
}

// Twice the smallest growth at which the grain swallows every window
// corner, hence the window. Used when nothing can stop a grain.
pub(crate) fn cap_growth(u: &Grain, window: &Window) -> f64 {
    let mut cover = 0.0_f64;
    for corner in window.corners() {
        let rel: Vec<f64> = corner.iter().zip(u.x.iter()).map(|(c, x)| c - x).collect();
        cover = cover.max(u.shape.gauge(&rel));
    }
    2.0 * cover
}

struct Freeze {
    idx: usize,
    r: f64,
    rule: FreezeRule,
    stoppers: Vec<u64>,
}

struct State {
    active: Vec<usize>,
    r: Vec<f64>,
    rule: Vec<Option<FreezeRule>>,
    round_of: Vec<i32>,
    stoppers: Vec<Vec<u64>>,
    /// Earliest stop against the frozen set so far and the frozen index
    /// achieving it; kept as an incremental minimum, updated once per round.
    frozen_stop: Vec<(f64, Option<usize>)>,
    round: i32,
    tie: bool,
    cap_radius: Option<f64>,
    log: Vec<Assignment>,
}

impl State {
    fn new(n: usize) -> Self {
        State {
            active: (0..n).collect(),
            r: vec![f64::NAN; n],
            rule: vec![None; n],
            round_of: vec![0; n],
            stoppers: vec![Vec::new(); n],
            frozen_stop: vec![(f64::INFINITY, None); n],
            round: 0,
            tie: false,
            cap_radius: None,
            log: Vec::new(),
        }
    }

    fn apply(&mut self, grains: &[Grain], freezes: Vec<Freeze>) -> Result<(), ModelError> {
        debug_assert!(!freezes.is_empty(), "every round freezes at least one grain");
        let leftover = self.active.len() == 1;
        let round = if leftover { -1 } else { self.round };
        let mut newly_positive: Vec<usize> = Vec::new();
        for f in &freezes {
            debug_assert!(self.r[f.idx].is_nan(), "grain frozen twice");
            debug_assert!(f.r >= 0.0);
            self.r[f.idx] = f.r;
            self.rule[f.idx] = Some(f.rule);
            self.round_of[f.idx] = round;
            self.stoppers[f.idx] = f.stoppers.clone();
            self.log.push(Assignment {
                grain_id: grains[f.idx].id,
                round,
                rule: f.rule,
                r: f.r,
                stoppers: f.stoppers.clone(),
            });
            if f.r > 0.0 && f.rule != FreezeRule::LeftoverCapped {
                newly_positive.push(f.idx);
            }
        }
        self.active.retain(|&i| self.r[i].is_nan());
        // Fold the new frozen grains into every remaining grain's earliest
        // interference time.
        for &w in &newly_positive {
            for &u in &self.active {
                let t = stop_time(&grains[u], &grains[w], self.r[w])?;
                if t < self.frozen_stop[u].0 {
                    self.frozen_stop[u] = (t, Some(w));
                }
            }
        }
        Ok(())
    }

    fn finish(self, cfg: &Configuration, grains: &[Grain]) -> HardCoreResult {
        let mut out = Vec::with_capacity(grains.len());
        for (i, g) in grains.iter().enumerate() {
            let r = self.r[i];
            debug_assert!(r.is_finite());
            let status = match self.rule[i] {
                Some(FreezeRule::LeftoverCapped) => GrainStatus::UnstoppedCapped,
                _ if r == 0.0 => GrainStatus::Covered,
                _ => GrainStatus::Stopped,
            };
            out.push(GrownGrain {
                grain: g.clone(),
                r,
                status,
                round: self.round_of[i],
                earlier_neighbour_ids: self.stoppers[i].clone(),
            });
        }
        HardCoreResult {
            engine: Engine::Builder,
            dimension: cfg.dimension(),
            window: cfg.window().clone(),
            grains: out,
            tie_degenerate: self.tie,
            in_h: self.cap_radius.is_none(),
            cap_radius: self.cap_radius,
            log: self.log,
        }
    }
}

#[cfg(debug_assertions)]
fn fresh_frozen_stop(grains: &[Grain], state: &State, u: usize) -> Result<f64, ModelError> {
    let mut best = f64::INFINITY;
    for (w, r) in state.r.iter().enumerate() {
        if r.is_finite() && *r > 0.0 && state.rule[w] != Some(FreezeRule::LeftoverCapped) {
            best = best.min(stop_time(&grains[u], &grains[w], *r)?);
        }
    }
    Ok(best)
}

// Pairwise first contact times, precomputed when the configuration is small
// enough to afford the quadratic table.
enum DCache {
    Matrix { n: usize, t: Vec<f64> },
    OnDemand,
}

const DMATRIX_MAX: usize = 2048;

impl DCache {
    fn new(grains: &[Grain]) -> Result<Self, ModelError> {
        let n = grains.len();
        if n > DMATRIX_MAX {
            return Ok(DCache::OnDemand);
        }
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = first_contact_time(&grains[i], &grains[j])?;
                t[i * n + j] = d;
                t[j * n + i] = d;
            }
        }
        Ok(DCache::Matrix { n, t })
    }

    fn get(&self, grains: &[Grain], i: usize, j: usize) -> Result<f64, ModelError> {
        match self {
            DCache::Matrix { n, t } => Ok(t[i * n + j]),
            DCache::OnDemand => first_contact_time(&grains[i], &grains[j]),
        }
    }
}

// Mutual nearest pairs among `indices`, as (index, index, contact time)
// sorted by (time, ids). Flags comparisons within the tie tolerance.
fn mutual_pairs_with(
    indices: &[usize],
    grains: &[Grain],
    mut d: impl FnMut(usize, usize) -> Result<f64, ModelError>,
) -> Result<(Vec<(usize, usize, f64)>, bool), ModelError> {
    let m = indices.len();
    let mut tie = false;
    let mut nearest: Vec<(f64, usize)> = Vec::with_capacity(m);
    for a in 0..m {
        let mut best = (f64::INFINITY, usize::MAX);
        let mut second = f64::INFINITY;
        for b in 0..m {
            if a == b {
                continue;
            }
            let t = d(indices[a], indices[b])?;
            if t < best.0 {
                second = best.0;
                best = (t, b);
            } else if t < second {
                second = t;
            }
        }
        if best.1 != usize::MAX && second.is_finite() && second - best.0 <= TIE_TOL {
            tie = true;
        }
        nearest.push(best);
    }
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    for a in 0..m {
        let b = nearest[a].1;
        if b != usize::MAX && b > a && nearest[b].1 == a {
            pairs.push((indices[a], indices[b], nearest[a].0));
        }
    }
    pairs.sort_by(|p, q| {
        let pid = (grains[p.0].id.min(grains[p.1].id), grains[p.0].id.max(grains[p.1].id));
        let qid = (grains[q.0].id.min(grains[q.1].id), grains[q.0].id.max(grains[q.1].id));
        p.2.total_cmp(&q.2).then(pid.cmp(&qid))
    });
    if pairs.windows(2).any(|w| w[1].2 - w[0].2 <= TIE_TOL) {
        tie = true;
    }
    Ok((pairs, tie))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;
    use crate::model::Window;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn ball_grain(id: u64, x: [f64; 2], t: f64) -> Grain {
        Grain::new(id, vec![x[0], x[1]], t, Shape::ball(1.0).unwrap())
    }

    fn config(grains: Vec<Grain>) -> Configuration {
        let w = Window::new(vec![-100.0, -100.0], vec![100.0, 100.0]).unwrap();
        Configuration::new(2, w, grains).unwrap()
    }

    #[test]
    fn two_grains_stop_each_other_midway() {
        let cfg = config(vec![ball_grain(1, [0.0, 0.0], 0.0), ball_grain(2, [10.0, 0.0], 0.0)]);
        let res = build(&cfg).unwrap();
        assert!(res.in_h);
        assert!(!res.tie_degenerate);
        for g in &res.grains {
            assert!((g.r - 5.0).abs() < 1e-12);
            assert_eq!(g.status, GrainStatus::Stopped);
            assert_eq!(g.round, 1);
        }
        assert_eq!(res.grain_by_id(1).unwrap().earlier_neighbour_ids, vec![2]);
        assert_eq!(res.grain_by_id(2).unwrap().earlier_neighbour_ids, vec![1]);
    }

    #[test]
    fn collinear_triple_leaves_a_one_sided_leftover() {
        let cfg = config(vec![
            ball_grain(1, [0.0, 0.0], 0.0),
            ball_grain(2, [10.0, 0.0], 0.0),
            ball_grain(3, [24.0, 0.0], 0.0),
        ]);
        let res = build(&cfg).unwrap();
        let r: Vec<f64> = res.grains.iter().map(|g| g.r).collect();
        assert!((r[0] - 5.0).abs() < 1e-12);
        assert!((r[1] - 5.0).abs() < 1e-12);
        assert!((r[2] - 9.0).abs() < 1e-12);
        assert_eq!(res.grain_by_id(3).unwrap().round, -1);
        assert_eq!(res.grain_by_id(3).unwrap().earlier_neighbour_ids, vec![2]);
        assert!(res.in_h);
        // The freeze order is recorded.
        assert_eq!(res.log.len(), 3);
        assert_eq!(res.log[2].rule, FreezeRule::LeftoverStopped);
    }

    #[test]
    fn covered_germ_then_unstoppable_leftover_gets_capped() {
        let w = Window::new(vec![-1.0, -1.0], vec![3.0, 3.0]).unwrap();
        let cfg = Configuration::new(
            2,
            w,
            vec![ball_grain(1, [0.0, 0.0], 0.0), ball_grain(2, [2.0, 0.0], 5.0)],
        )
        .unwrap();
        let res = build(&cfg).unwrap();
        let covered = res.grain_by_id(2).unwrap();
        assert_eq!(covered.status, GrainStatus::Covered);
        assert_eq!(covered.r, 0.0);
        assert_eq!(covered.earlier_neighbour_ids, vec![1]);
        let capped = res.grain_by_id(1).unwrap();
        assert_eq!(capped.status, GrainStatus::UnstoppedCapped);
        // Farthest window corner from the origin is (3, 3); unit ball gauge
        // is the Euclidean norm, doubled.
        let expect = 2.0 * 18.0_f64.sqrt();
        assert!((capped.r - expect).abs() < 1e-12);
        assert!(!res.in_h);
        assert_eq!(res.cap_radius, Some(capped.r));
    }

    #[test]
    fn symmetric_lattice_is_flagged_tie_degenerate_but_deterministic() {
        let grains = vec![
            ball_grain(1, [-2.0, -2.0], 0.0),
            ball_grain(2, [2.0, -2.0], 0.0),
            ball_grain(3, [2.0, 2.0], 0.0),
            ball_grain(4, [-2.0, 2.0], 0.0),
        ];
        let cfg = config(grains);
        let a = build(&cfg).unwrap();
        assert!(a.tie_degenerate);
        let b = build(&cfg).unwrap();
        assert_eq!(a, b);
        for g in &a.grains {
            assert!(g.r > 0.0);
        }
    }

    #[test]
    fn rebuilds_are_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut grains = Vec::new();
        for id in 0..40u64 {
            grains.push(ball_grain(
                id,
                [rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0)],
                rng.random_range(0.0..2.0),
            ));
        }
        let cfg = config(grains);
        let a = build(&cfg).unwrap();
        let b = build(&cfg).unwrap();
        for (x, y) in a.grains.iter().zip(b.grains.iter()) {
            assert_eq!(x.r.to_bits(), y.r.to_bits());
        }
    }

    #[test]
    fn growths_are_invariant_under_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..5 {
            let mut grains = Vec::new();
            for id in 0..30u64 {
                grains.push(ball_grain(
                    id,
                    [rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)],
                    rng.random_range(0.0..1.0),
                ));
            }
            let base = Configuration::new(
                2,
                Window::new(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap(),
                grains.clone(),
            )
            .unwrap();
            let res = build(&base).unwrap();
            let dx: f64 = rng.random_range(-30.0..30.0);
            let dy: f64 = rng.random_range(-30.0..30.0);
            let moved: Vec<Grain> = grains
                .iter()
                .map(|g| Grain::new(g.id, vec![g.x[0] + dx, g.x[1] + dy], g.t, g.shape.clone()))
                .collect();
            let shifted = Configuration::new(
                2,
                Window::new(vec![dx, dy], vec![10.0 + dx, 10.0 + dy]).unwrap(),
                moved,
            )
            .unwrap();
            let res2 = build(&shifted).unwrap();
            for (a, b) in res.grains.iter().zip(res2.grains.iter()) {
                assert!((a.r - b.r).abs() <= 1e-9, "{} vs {}", a.r, b.r);
            }
        }
    }

    #[test]
    fn mutual_pair_listing() {
        let grains = vec![
            ball_grain(1, [0.0, 0.0], 0.0),
            ball_grain(2, [10.0, 0.0], 0.0),
            ball_grain(3, [24.0, 0.0], 0.0),
        ];
        let (pairs, tie) = mutual_nearest_pairs(&grains).unwrap();
        assert_eq!(pairs, vec![(1, 2)]);
        assert!(!tie);
        let (pairs, _) = mutual_nearest_pairs(&grains[..2]).unwrap();
        assert_eq!(pairs, vec![(1, 2)]);
        let (pairs, _) = mutual_nearest_pairs(&grains[..1]).unwrap();
        assert!(pairs.is_empty());
    }

    #[test]
    fn nearest_frozen_time_scans_positive_growths_only() {
        let u = ball_grain(9, [0.0, 0.0], 1.0);
        assert_eq!(nearest_frozen_time(&u, []).unwrap(), f64::INFINITY);
        let frozen = vec![
            GrownGrain {
                grain: ball_grain(1, [9.0, 0.0], 0.0),
                r: 5.0,
                status: GrainStatus::Stopped,
                round: 1,
                earlier_neighbour_ids: vec![],
            },
            GrownGrain {
                grain: ball_grain(2, [3.0, 0.0], 0.0),
                r: 0.0,
                status: GrainStatus::Covered,
                round: 1,
                earlier_neighbour_ids: vec![],
            },
        ];
        let t = nearest_frozen_time(&u, frozen.iter()).unwrap();
        // Only the positive-growth grain counts: gap 9 - 5 = 4, born at 1.
        assert!((t - 5.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_grains_is_an_error() {
        let w = Window::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let cfg = Configuration::new(2, w, vec![ball_grain(1, [0.5, 0.5], 0.0)]).unwrap();
        assert!(matches!(build(&cfg), Err(BuildError::TooFewGrains(1))));
    }

    #[test]
    fn staggered_pair_with_head_start() {
        // Births 0 and 3, distance 10: contact at 6.5, growths 6.5 and 3.5.
        let cfg = config(vec![ball_grain(1, [0.0, 0.0], 0.0), ball_grain(2, [10.0, 0.0], 3.0)]);
        let res = build(&cfg).unwrap();
        assert!((res.grain_by_id(1).unwrap().r - 6.5).abs() < 1e-9);
        assert!((res.grain_by_id(2).unwrap().r - 3.5).abs() < 1e-9);
        // Their bodies touch exactly.
        let sum: f64 = res.grains.iter().map(|g| g.r).sum();
        assert!((sum - 10.0).abs() < 1e-9);
    }
}
