//! Reproducible sampling of marked point-process configurations.
//!
//! Randomness is funneled through one 64-bit seed. Every (replicate,
//! purpose) pair gets its own counter-based substream, so replicates can be
//! generated in any order, in parallel, and coupled scenarios can share
//! germ positions while differing in births.

use lilypond_core::{Configuration, Grain, Shape, Window};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum germ separation; closer draws are rejected and resampled.
pub const MIN_GERM_DISTANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Model(#[from] lilypond_core::model::ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum GermLaw {
    /// Poisson process: count ~ Poisson(intensity × window volume).
    Poisson { intensity: f64 },
    /// Fixed number of uniform germs.
    Binomial { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum BirthLaw {
    Constant,
    Uniform { t_max: f64 },
    Exponential { rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum ShapeLaw {
    /// Unit balls: the classical model.
    UnitBall,
    /// Ball radius uniform in [1, c].
    BallUniform { c: f64 },
    /// Regular polygon with the given vertex count, scaled so the inradius
    /// is 1, rotated uniformly.
    RegularPolygon { sides: usize },
    /// One fixed polygon for every grain.
    FixedPolygon { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub dimension: usize,
    pub window: Window,
    pub germs: GermLaw,
    pub births: BirthLaw,
    pub shapes: ShapeLaw,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), SampleError> {
        match self.germs {
            GermLaw::Poisson { intensity } => {
                if !(intensity > 0.0) || !intensity.is_finite() {
                    return Err(SampleError::InvalidSpec("intensity must be positive".into()));
                }
            }
            GermLaw::Binomial { n } => {
                if n < 2 {
                    return Err(SampleError::InvalidSpec("binomial n must be at least 2".into()));
                }
            }
        }
        match self.births {
            BirthLaw::Constant => {}
            BirthLaw::Uniform { t_max } => {
                if t_max < 0.0 || !t_max.is_finite() {
                    return Err(SampleError::InvalidSpec("t_max must be nonnegative".into()));
                }
            }
            BirthLaw::Exponential { rate } => {
                if !(rate > 0.0) || !rate.is_finite() {
                    return Err(SampleError::InvalidSpec("rate must be positive".into()));
                }
            }
        }
        match &self.shapes {
            ShapeLaw::UnitBall | ShapeLaw::BallUniform { .. } => {}
            ShapeLaw::RegularPolygon { sides } => {
                if *sides < 3 {
                    return Err(SampleError::InvalidSpec("polygon needs at least 3 sides".into()));
                }
                if self.dimension != 2 {
                    return Err(SampleError::InvalidSpec("polygons are planar".into()));
                }
            }
            ShapeLaw::FixedPolygon { vertices } => {
                Shape::polygon(vertices.clone())
                    .map_err(|e| SampleError::InvalidSpec(format!("fixed polygon: {e}")))?;
                if self.dimension != 2 {
                    return Err(SampleError::InvalidSpec("polygons are planar".into()));
                }
            }
        }
        if let ShapeLaw::BallUniform { c } = self.shapes {
            if c < 1.0 || !c.is_finite() {
                return Err(SampleError::InvalidSpec("radius bound c must be at least 1".into()));
            }
        }
        if self.window.dim() != self.dimension {
            return Err(SampleError::InvalidSpec("window does not match dimension".into()));
        }
        Ok(())
    }

    /// Whether every sampled configuration satisfies the simultaneous-birth
    /// shape-bounded regime the stabilization theory needs.
    pub fn simultaneous_regime(&self) -> bool {
        let births_ok = match self.births {
            BirthLaw::Constant => true,
            BirthLaw::Uniform { t_max } => t_max == 0.0,
            BirthLaw::Exponential { .. } => false,
        };
        let shapes_ok = match &self.shapes {
            ShapeLaw::UnitBall | ShapeLaw::BallUniform { .. } | ShapeLaw::RegularPolygon { .. } => {
                true
            }
            ShapeLaw::FixedPolygon { vertices } => Shape::polygon(vertices.clone())
                .map(|s| s.inradius() >= 1.0 - 1e-12)
                .unwrap_or(false),
        };
        births_ok && shapes_ok
    }
}

// Substream purposes. Keeping count, positions, births, and shapes on
// separate streams is what makes birth-law coupling possible.
const STREAM_COUNT: u64 = 0;
const STREAM_POSITION: u64 = 1;
const STREAM_BIRTH: u64 = 2;
const STREAM_SHAPE: u64 = 3;
const STREAM_MISC: u64 = 4;

/// An independent generator for one (replicate, purpose) pair.
pub fn substream(seed: u64, replicate: u64, purpose: u64) -> ChaCha8Rng {
    debug_assert!(purpose < 16);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((replicate << 4) | purpose);
    rng
}

/// Generator for miscellaneous downstream needs (spot checks, Monte Carlo
/// integration) that must not disturb the sampling streams.
pub fn misc_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    substream(seed, replicate, STREAM_MISC)
}

/// Draws one configuration for the given replicate index.
pub fn sample(spec: &ScenarioSpec, replicate: u64) -> Result<Configuration, SampleError> {
    spec.validate()?;
    let n = match spec.germs {
        GermLaw::Poisson { intensity } => {
            let mean = intensity * spec.window.volume();
            let poi = Poisson::new(mean)
                .map_err(|e| SampleError::InvalidSpec(format!("poisson: {e}")))?;
            poi.sample(&mut substream(spec.seed, replicate, STREAM_COUNT)) as usize
        }
        GermLaw::Binomial { n } => n,
    };

    let mut pos_rng = substream(spec.seed, replicate, STREAM_POSITION);
    let mut positions: Vec<Vec<f64>> = Vec::with_capacity(n);
    while positions.len() < n {
        let p: Vec<f64> = (0..spec.dimension)
            .map(|ax| pos_rng.random_range(spec.window.lo()[ax]..spec.window.hi()[ax]))
            .collect();
        let too_close = positions.iter().any(|q| {
            let d2: f64 = p.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            d2 < MIN_GERM_DISTANCE * MIN_GERM_DISTANCE
        });
        if !too_close {
            positions.push(p);
        }
    }

    let mut birth_rng = substream(spec.seed, replicate, STREAM_BIRTH);
    let births: Vec<f64> = (0..n)
        .map(|_| match spec.births {
            BirthLaw::Constant => 0.0,
            BirthLaw::Uniform { t_max } => {
                if t_max == 0.0 {
                    0.0
                } else {
                    birth_rng.random_range(0.0..t_max)
                }
            }
            BirthLaw::Exponential { rate } => {
                let u: f64 = birth_rng.random_range(0.0..1.0);
                -(1.0 - u).ln() / rate
            }
        })
        .collect();

    let mut shape_rng = substream(spec.seed, replicate, STREAM_SHAPE);
    let shapes: Vec<Shape> = (0..n)
        .map(|_| draw_shape(&spec.shapes, &mut shape_rng))
        .collect::<Result<_, _>>()?;

    let grains: Vec<Grain> = positions
        .into_iter()
        .zip(births)
        .zip(shapes)
        .enumerate()
        .map(|(id, ((x, t), shape))| Grain::new(id as u64, x, t, shape))
        .collect();
    Ok(Configuration::new(spec.dimension, spec.window.clone(), grains)?)
}

fn draw_shape(law: &ShapeLaw, rng: &mut ChaCha8Rng) -> Result<Shape, SampleError> {
    let shape = match law {
        ShapeLaw::UnitBall => Shape::ball(1.0),
        ShapeLaw::BallUniform { c } => {
            if *c == 1.0 {
                Shape::ball(1.0)
            } else {
                Shape::ball(rng.random_range(1.0..*c))
            }
        }
        ShapeLaw::RegularPolygon { sides } => {
            let m = *sides as f64;
            // Scale so the inradius (apothem) is exactly 1.
            let circum = 1.0 / (core::f64::consts::PI / m).cos();
            let rot = rng.random_range(0.0..core::f64::consts::TAU / m);
            let verts: Vec<[f64; 2]> = (0..*sides)
                .map(|i| {
                    let a = rot + i as f64 / m * core::f64::consts::TAU;
                    [circum * a.cos(), circum * a.sin()]
                })
                .collect();
            Shape::polygon(verts)
        }
        ShapeLaw::FixedPolygon { vertices } => Shape::polygon(vertices.clone()),
    };
    shape.map_err(|e| SampleError::InvalidSpec(format!("shape law: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ScenarioSpec {
        ScenarioSpec {
            dimension: 2,
            window: Window::new(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap(),
            germs: GermLaw::Poisson { intensity: 1.0 },
            births: BirthLaw::Constant,
            shapes: ShapeLaw::UnitBall,
            seed: 42,
        }
    }

    #[test]
    fn same_seed_same_configuration() {
        let a = sample(&spec(), 3).unwrap();
        let b = sample(&spec(), 3).unwrap();
        assert_eq!(a.len(), b.len());
        for (ga, gb) in a.grains().iter().zip(b.grains().iter()) {
            assert_eq!(ga.x, gb.x);
            assert_eq!(ga.t, gb.t);
        }
        let c = sample(&spec(), 4).unwrap();
        assert!(a.len() != c.len() || a.grains()[0].x != c.grains()[0].x);
    }

    #[test]
    fn binomial_draws_exactly_n() {
        let mut s = spec();
        s.germs = GermLaw::Binomial { n: 2 };
        let cfg = sample(&s, 0).unwrap();
        assert_eq!(cfg.len(), 2);
    }

    #[test]
    fn poisson_counts_pass_a_chi_square_test() {
        // Bin counts into {below, around, above} one standard deviation of
        // the mean and compare against exact Poisson bin masses.
        let s = spec();
        let lambda = 100.0_f64;
        let sd = lambda.sqrt();
        let (lo_edge, hi_edge) = ((lambda - sd) as usize, (lambda + sd) as usize);
        let mut pmf_cum_lo = 0.0;
        let mut pmf_mid = 0.0;
        let mut p = (-lambda).exp();
        for k in 0..=400usize {
            if k < lo_edge {
                pmf_cum_lo += p;
            } else if k <= hi_edge {
                pmf_mid += p;
            }
            p *= lambda / (k + 1) as f64;
        }
        let probs = [pmf_cum_lo, pmf_mid, 1.0 - pmf_cum_lo - pmf_mid];

        let m = 1000usize;
        let mut observed = [0usize; 3];
        for rep in 0..m {
            let n = sample(&s, rep as u64).unwrap().len();
            let bin = if n < lo_edge {
                0
            } else if n <= hi_edge {
                1
            } else {
                2
            };
            observed[bin] += 1;
        }
        let chi2: f64 = (0..3)
            .map(|i| {
                let e = probs[i] * m as f64;
                let o = observed[i] as f64;
                (o - e) * (o - e) / e
            })
            .sum();
        // 99% critical value for 2 degrees of freedom.
        assert!(chi2 < 9.21, "chi-square {chi2}, observed {observed:?}");
    }

    #[test]
    fn empirical_intensity_within_three_standard_errors() {
        let s = spec();
        let m = 400usize;
        let total: usize = (0..m).map(|rep| sample(&s, rep as u64).unwrap().len()).sum();
        let mean = total as f64 / m as f64;
        let se = (100.0_f64 / m as f64).sqrt();
        assert!((mean - 100.0).abs() <= 3.0 * se, "mean {mean}");
    }

    #[test]
    fn birth_coupling_shares_positions_and_shapes() {
        let zero = spec();
        let mut staggered = spec();
        staggered.births = BirthLaw::Uniform { t_max: 10.0 };
        staggered.shapes = ShapeLaw::BallUniform { c: 2.0 };
        let mut zero_shaped = zero.clone();
        zero_shaped.shapes = ShapeLaw::BallUniform { c: 2.0 };
        let a = sample(&zero_shaped, 7).unwrap();
        let b = sample(&staggered, 7).unwrap();
        assert_eq!(a.len(), b.len());
        for (ga, gb) in a.grains().iter().zip(b.grains().iter()) {
            assert_eq!(ga.x, gb.x);
            assert_eq!(ga.shape, gb.shape);
            assert_eq!(ga.t, 0.0);
        }
        assert!(b.grains().iter().any(|g| g.t > 0.0));
    }

    #[test]
    fn regular_polygons_have_unit_inradius() {
        let mut s = spec();
        s.germs = GermLaw::Binomial { n: 4 };
        s.shapes = ShapeLaw::RegularPolygon { sides: 6 };
        let cfg = sample(&s, 0).unwrap();
        for g in cfg.grains() {
            assert!((g.shape.inradius() - 1.0).abs() < 1e-12);
            assert!(g.shape.circumradius() > 1.0);
            assert!(g.shape.circumradius() < 1.2);
        }
        assert!(s.simultaneous_regime());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = spec();
        s.germs = GermLaw::Poisson { intensity: 0.0 };
        assert!(s.validate().is_err());
        let mut s = spec();
        s.germs = GermLaw::Binomial { n: 1 };
        assert!(s.validate().is_err());
        let mut s = spec();
        s.births = BirthLaw::Exponential { rate: -1.0 };
        assert!(s.validate().is_err());
    }

    #[test]
    fn uniform_zero_births_degrade_to_constant() {
        let mut s = spec();
        s.births = BirthLaw::Uniform { t_max: 0.0 };
        let cfg = sample(&s, 0).unwrap();
        assert!(cfg.grains().iter().all(|g| g.t == 0.0));
        assert!(s.simultaneous_regime());
    }
}
