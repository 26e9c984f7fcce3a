//! Event-driven cross-check engine.
//!
//! Instead of freezing grains round by round, this engine unrolls the whole
//! history chronologically: every pairwise first contact and every hit
//! against an already frozen grain is an event in a priority queue, and the
//! queue is drained in time order. An event involving a grain that has
//! already frozen is stale and discarded; freezing a grain with positive
//! growth schedules hit events for everything still active. The two engines
//! share nothing beyond the contact-time primitives, so agreement between
//! them is a meaningful check.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::builder::{
    cap_growth, Assignment, BuildError, Engine, FreezeRule, GrainStatus, GrownGrain,
    HardCoreResult,
};
use crate::model::{first_contact, stop_time, Configuration, TIE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// Two freely growing grains touch; when `covered` is set, that grain's
    /// germ is swallowed before its birth and only it freezes.
    Meet { a: usize, b: usize, covered: Option<usize> },
    /// A freely growing grain reaches a frozen one.
    Hit { mover: usize, frozen: usize },
}

#[derive(Debug)]
struct Event {
    time: f64,
    seq: u64,
    kind: Kind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.seq.cmp(&other.seq))
    }
}

/// Runs the event simulation on a validated configuration. Produces the
/// same result type as the round-based construction, tagged `oracle`; the
/// `round` field counts applied events rather than rounds, with -1 kept for
/// the final leftover grain.
pub fn build(cfg: &Configuration) -> Result<HardCoreResult, BuildError> {
    let grains = cfg.grains();
    let n = grains.len();
    if n < 2 {
        return Err(BuildError::TooFewGrains(n));
    }

    let mut heap: BinaryHeap<Reverse<Event>> = BinaryHeap::new();
    let mut seq: u64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            let fc = first_contact(&grains[i], &grains[j])?;
            let covered = fc.covers.map(|(_, covered_id)| {
                if grains[i].id == covered_id {
                    i
                } else {
                    j
                }
            });
            heap.push(Reverse(Event { time: fc.time, seq, kind: Kind::Meet { a: i, b: j, covered } }));
            seq += 1;
        }
    }

    let mut alive = vec![true; n];
    let mut alive_count = n;
    let mut r = vec![f64::NAN; n];
    let mut rule = vec![FreezeRule::MutualPair; n];
    let mut round_of = vec![0i32; n];
    let mut stoppers: Vec<Vec<u64>> = vec![Vec::new(); n];
    let mut log: Vec<Assignment> = Vec::new();
    let mut tie = false;
    let mut wave: i32 = 0;
    let mut prev_pop: Option<(f64, bool)> = None;
    let mut last_applied = f64::NEG_INFINITY;

    while let Some(Reverse(ev)) = heap.pop() {
        let valid = match ev.kind {
            Kind::Meet { a, b, .. } => alive[a] && alive[b],
            Kind::Hit { mover, .. } => alive[mover],
        };
        // Two nearly simultaneous events where at least one changes state:
        // the outcome hinges on tiebreak order, so mark the input degenerate.
        if let Some((pt, pa)) = prev_pop {
            if ev.time - pt <= TIE_TOL && (pa || valid) {
                tie = true;
            }
        }
        prev_pop = Some((ev.time, valid));
        if !valid {
            continue;
        }
        debug_assert!(ev.time >= last_applied - TIE_TOL, "events ran backwards");
        last_applied = ev.time;
        wave += 1;

        let mut frozen_now: Vec<(usize, FreezeRule, u64)> = Vec::new();
        match ev.kind {
            Kind::Meet { a, b, covered: Some(c) } => {
                let coverer = if c == a { b } else { a };
                frozen_now.push((c, FreezeRule::CoveredPreBirth, grains[coverer].id));
            }
            Kind::Meet { a, b, covered: None } => {
                frozen_now.push((a, FreezeRule::MutualPair, grains[b].id));
                frozen_now.push((b, FreezeRule::MutualPair, grains[a].id));
            }
            Kind::Hit { mover, frozen } => {
                let why = if alive_count == 1 {
                    FreezeRule::LeftoverStopped
                } else {
                    FreezeRule::StoppedByFrozen
                };
                frozen_now.push((mover, why, grains[frozen].id));
            }
        }

        // -1 mirrors the round-based engine's leftover marker.
        let round = if alive_count == 1 { -1 } else { wave };
        for &(idx, why, stopper) in &frozen_now {
            let growth = match why {
                FreezeRule::CoveredPreBirth => 0.0,
                _ => ev.time - grains[idx].t,
            };
            debug_assert!(growth >= -TIE_TOL);
            alive[idx] = false;
            alive_count -= 1;
            r[idx] = growth.max(0.0);
            rule[idx] = why;
            round_of[idx] = round;
            stoppers[idx] = vec![stopper];
            log.push(Assignment {
                grain_id: grains[idx].id,
                round,
                rule: why,
                r: r[idx],
                stoppers: stoppers[idx].clone(),
            });
        }
        // Anything frozen with positive growth becomes a wall for the rest.
        for &(idx, why, _) in &frozen_now {
            if r[idx] > 0.0 && why != FreezeRule::LeftoverCapped {
                for u in 0..n {
                    if alive[u] {
                        let t = stop_time(&grains[u], &grains[idx], r[idx])?;
                        heap.push(Reverse(Event {
                            time: t,
                            seq,
                            kind: Kind::Hit { mover: u, frozen: idx },
                        }));
                        seq += 1;
                    }
                }
            }
        }
    }

    debug_assert!(alive_count <= 1, "meet events always resolve down to one grain");
    let mut cap_radius = None;
    if let Some(idx) = (0..n).find(|&i| alive[i]) {
        // Queue drained with this grain alive: nothing ever froze with
        // positive growth while it was active, so nothing can stop it.
        let growth = cap_growth(&grains[idx], cfg.window());
        alive[idx] = false;
        r[idx] = growth;
        rule[idx] = FreezeRule::LeftoverCapped;
        round_of[idx] = -1;
        cap_radius = Some(growth);
        log.push(Assignment {
            grain_id: grains[idx].id,
            round: -1,
            rule: FreezeRule::LeftoverCapped,
            r: growth,
            stoppers: vec![],
        });
    }

    let mut out = Vec::with_capacity(n);
    for (i, g) in grains.iter().enumerate() {
        let status = match rule[i] {
            FreezeRule::LeftoverCapped => GrainStatus::UnstoppedCapped,
            _ if r[i] == 0.0 => GrainStatus::Covered,
            _ => GrainStatus::Stopped,
        };
        out.push(GrownGrain {
            grain: g.clone(),
            r: r[i],
            status,
            round: round_of[i],
            earlier_neighbour_ids: stoppers[i].clone(),
        });
    }
    Ok(HardCoreResult {
        engine: Engine::Oracle,
        dimension: cfg.dimension(),
        window: cfg.window().clone(),
        grains: out,
        tie_degenerate: tie,
        in_h: cap_radius.is_none(),
        cap_radius,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;
    use crate::model::{Grain, Window};

    fn ball_grain(id: u64, x: [f64; 2], t: f64) -> Grain {
        Grain::new(id, vec![x[0], x[1]], t, Shape::ball(1.0).unwrap())
    }

    fn config(grains: Vec<Grain>) -> Configuration {
        let w = Window::new(vec![-100.0, -100.0], vec![100.0, 100.0]).unwrap();
        Configuration::new(2, w, grains).unwrap()
    }

    #[test]
    fn doublet_splits_the_gap() {
        let cfg = config(vec![ball_grain(1, [0.0, 0.0], 0.0), ball_grain(2, [10.0, 0.0], 0.0)]);
        let res = build(&cfg).unwrap();
        assert_eq!(res.engine, Engine::Oracle);
        for g in &res.grains {
            assert!((g.r - 5.0).abs() < 1e-12);
            assert_eq!(g.status, GrainStatus::Stopped);
        }
        assert!(res.in_h);
        assert!(!res.tie_degenerate);
    }

    #[test]
    fn chain_of_three_matches_the_hand_computation() {
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
    }

    #[test]
    fn coverage_then_cap() {
        let w = Window::new(vec![-1.0, -1.0], vec![3.0, 3.0]).unwrap();
        let cfg = Configuration::new(
            2,
            w,
            vec![ball_grain(1, [0.0, 0.0], 0.0), ball_grain(2, [2.0, 0.0], 5.0)],
        )
        .unwrap();
        let res = build(&cfg).unwrap();
        assert_eq!(res.grain_by_id(2).unwrap().status, GrainStatus::Covered);
        assert_eq!(res.grain_by_id(2).unwrap().r, 0.0);
        let capped = res.grain_by_id(1).unwrap();
        assert_eq!(capped.status, GrainStatus::UnstoppedCapped);
        assert!((capped.r - 2.0 * 18.0_f64.sqrt()).abs() < 1e-12);
        assert!(!res.in_h);
    }

    #[test]
    fn symmetric_lattice_is_flagged() {
        let cfg = config(vec![
            ball_grain(1, [-2.0, -2.0], 0.0),
            ball_grain(2, [2.0, -2.0], 0.0),
            ball_grain(3, [2.0, 2.0], 0.0),
            ball_grain(4, [-2.0, 2.0], 0.0),
        ]);
        let res = build(&cfg).unwrap();
        assert!(res.tie_degenerate);
        for g in &res.grains {
            assert!((g.r - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn replays_are_bit_identical() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut grains = Vec::new();
        for id in 0..30u64 {
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
}
