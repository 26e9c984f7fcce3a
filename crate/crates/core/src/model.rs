//! Grains, configurations and pairwise contact times.
//!
//! A grain is a germ position, a birth time and a shape; its body at growth
//! `r` is `x + r * shape`. The first contact time of two grains is the
//! earliest moment their freely growing bodies meet, where a grain born later
//! can also be swallowed before birth if the earlier one reaches its germ
//! first. Both engines and the analysis checks are built on these two
//! primitives, so they live here, decoupled from any freezing policy.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{self, contact_radius, GeometryError, PlacedBody, Shape};

/// Comparisons closer than this are reported as ties (degenerate input).
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    CoincidentPositions { a: u64, b: u64 },
    DuplicateId(u64),
    BadDimension(usize),
    BadWindow(&'static str),
    InvalidGrain { id: u64, reason: &'static str },
    NonPositiveGrowth,
    Geometry(GeometryError),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::CoincidentPositions { a, b } => {
                write!(f, "grains {a} and {b} share a germ position")
            }
            ModelError::DuplicateId(id) => write!(f, "duplicate grain id {id}"),
            ModelError::BadDimension(d) => write!(f, "dimension must be 2 or 3, got {d}"),
            ModelError::BadWindow(msg) => write!(f, "bad window: {msg}"),
            ModelError::InvalidGrain { id, reason } => write!(f, "grain {id}: {reason}"),
            ModelError::NonPositiveGrowth => write!(f, "frozen grain must have positive growth"),
            ModelError::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ModelError {}

impl From<GeometryError> for ModelError {
    fn from(e: GeometryError) -> Self {
        ModelError::Geometry(e)
    }
}

/// A germ with a birth time and a growth shape.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grain {
    pub id: u64,
    pub x: Vec<f64>,
    pub t: f64,
    pub shape: Shape,
}

impl Grain {
    pub fn new(id: u64, x: Vec<f64>, t: f64, shape: Shape) -> Self {
        Grain { id, x, t, shape }
    }

    /// The grain's body at growth `r`.
    pub fn body(&self, r: f64) -> PlacedBody {
        PlacedBody { center: self.x.clone(), scale: r, shape: self.shape.clone() }
    }

    fn germ(&self) -> PlacedBody {
        PlacedBody::point(self.x.clone())
    }
}

/// An axis-aligned observation box.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "(Vec<f64>, Vec<f64>)", into = "(Vec<f64>, Vec<f64>)"))]
pub struct Window {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Window {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, ModelError> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(ModelError::BadWindow("corner dimensions differ"));
        }
        if lo.iter().chain(hi.iter()).any(|c| !c.is_finite()) {
            return Err(ModelError::BadWindow("corners must be finite"));
        }
        if lo.iter().zip(hi.iter()).any(|(a, b)| a >= b) {
            return Err(ModelError::BadWindow("low corner must be strictly below high corner"));
        }
        Ok(Window { lo, hi })
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(self.hi.iter()).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter().zip(self.lo.iter()).all(|(x, a)| x >= a)
            && p.iter().zip(self.hi.iter()).all(|(x, b)| x <= b)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(self.hi.iter()).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn diameter(&self) -> f64 {
        geometry::dist(&self.lo, &self.hi)
    }

    /// All 2^d corner points.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out = Vec::with_capacity(1 << d);
        for mask in 0..(1u32 << d) {
            let mut c = Vec::with_capacity(d);
            for k in 0..d {
                c.push(if mask & (1 << k) != 0 { self.hi[k] } else { self.lo[k] });
            }
            out.push(c);
        }
        out
    }
}

impl TryFrom<(Vec<f64>, Vec<f64>)> for Window {
    type Error = ModelError;
    fn try_from((lo, hi): (Vec<f64>, Vec<f64>)) -> Result<Self, Self::Error> {
        Window::new(lo, hi)
    }
}

impl From<Window> for (Vec<f64>, Vec<f64>) {
    fn from(w: Window) -> Self {
        (w.lo, w.hi)
    }
}

/// A validated finite set of grains in a window.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "ConfigurationRepr", into = "ConfigurationRepr"))]
pub struct Configuration {
    dimension: usize,
    window: Window,
    grains: Vec<Grain>,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct ConfigurationRepr {
    dimension: usize,
    window: Window,
    grains: Vec<Grain>,
}

#[cfg(feature = "serde")]
impl TryFrom<ConfigurationRepr> for Configuration {
    type Error = ModelError;
    fn try_from(r: ConfigurationRepr) -> Result<Self, Self::Error> {
        Configuration::new(r.dimension, r.window, r.grains)
    }
}

#[cfg(feature = "serde")]
impl From<Configuration> for ConfigurationRepr {
    fn from(c: Configuration) -> Self {
        ConfigurationRepr { dimension: c.dimension, window: c.window, grains: c.grains }
    }
}

impl Configuration {
    pub fn new(dimension: usize, window: Window, grains: Vec<Grain>) -> Result<Self, ModelError> {
        if dimension != 2 && dimension != 3 {
            return Err(ModelError::BadDimension(dimension));
        }
        if window.dim() != dimension {
            return Err(ModelError::BadWindow("window dimension differs from configuration"));
        }
        for g in &grains {
            if g.x.len() != dimension || g.x.iter().any(|c| !c.is_finite()) {
                return Err(ModelError::InvalidGrain { id: g.id, reason: "bad germ position" });
            }
            if !g.t.is_finite() || g.t < 0.0 {
                return Err(ModelError::InvalidGrain { id: g.id, reason: "bad birth time" });
            }
            if !g.shape.dimension_ok(dimension) {
                return Err(ModelError::InvalidGrain { id: g.id, reason: "shape dimension" });
            }
            g.shape.validate().map_err(|_| ModelError::InvalidGrain { id: g.id, reason: "invalid shape" })?;
        }
        // Duplicate ids and coincident germs, by sorting index views.
        let mut by_id: Vec<usize> = (0..grains.len()).collect();
        by_id.sort_by_key(|&i| grains[i].id);
        for w in by_id.windows(2) {
            if grains[w[0]].id == grains[w[1]].id {
                return Err(ModelError::DuplicateId(grains[w[0]].id));
            }
        }
        let mut by_pos: Vec<usize> = (0..grains.len()).collect();
        by_pos.sort_by(|&i, &j| grains[i].x.partial_cmp(&grains[j].x).expect("finite positions"));
        for w in by_pos.windows(2) {
            if grains[w[0]].x == grains[w[1]].x {
                return Err(ModelError::CoincidentPositions {
                    a: grains[w[0]].id,
                    b: grains[w[1]].id,
                });
            }
        }
        Ok(Configuration { dimension, window, grains })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn grains(&self) -> &[Grain] {
        &self.grains
    }

    pub fn len(&self) -> usize {
        self.grains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grains.is_empty()
    }

    pub fn grain_by_id(&self, id: u64) -> Option<&Grain> {
        self.grains.iter().find(|g| g.id == id)
    }

    /// Scans all pairwise first contact times for near-coincidences. This is
    /// quadratic in the number of grains; the builder additionally flags the
    /// ties it actually runs into.
    pub fn tie_scan(&self) -> Result<bool, ModelError> {
        let mut times: Vec<f64> = Vec::with_capacity(self.grains.len() * (self.grains.len() - 1) / 2);
        for i in 0..self.grains.len() {
            for j in i + 1..self.grains.len() {
                times.push(first_contact_time(&self.grains[i], &self.grains[j])?);
            }
        }
        times.sort_by(f64::total_cmp);
        Ok(times.windows(2).any(|w| w[1] - w[0] <= TIE_TOL))
    }
}

/// How a first contact resolves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstContact {
    /// The first contact time of the two freely growing grains.
    pub time: f64,
    /// Set when the earlier grain reaches the later germ before its birth;
    /// carries (coverer id, covered id). Such a contact covers the germ
    /// instead of stopping both grains.
    pub covers: Option<(u64, u64)>,
}

/// First contact of two freely growing grains, with the cover decision.
pub fn first_contact(u: &Grain, v: &Grain) -> Result<FirstContact, ModelError> {
    if u.x == v.x {
        return Err(ModelError::CoincidentPositions { a: u.id, b: v.id });
    }
    // Canonical order makes the computation exactly symmetric in (u, v).
    let (a, b) = if (u.t, u.id) <= (v.t, v.id) { (u, v) } else { (v, u) };
    let reach = contact_radius(&a.germ(), Some(&a.shape), &b.germ(), None)?;
    if reach <= b.t - a.t {
        return Ok(FirstContact { time: a.t + reach, covers: Some((a.id, b.id)) });
    }
    let head_start = a.body(b.t - a.t);
    let r = contact_radius(&head_start, Some(&a.shape), &b.germ(), Some(&b.shape))?;
    Ok(FirstContact { time: b.t + r, covers: None })
}

/// The first contact time alone.
pub fn first_contact_time(u: &Grain, v: &Grain) -> Result<f64, ModelError> {
    Ok(first_contact(u, v)?.time)
}

/// Time at which `u`, growing freely from its birth, reaches the fixed body
/// of a frozen grain `v` with growth `r_v > 0`.
pub fn stop_time(u: &Grain, v: &Grain, r_v: f64) -> Result<f64, ModelError> {
    if !(r_v > 0.0) {
        return Err(ModelError::NonPositiveGrowth);
    }
    let r = contact_radius(&u.germ(), Some(&u.shape), &v.body(r_v), None)?;
    Ok(u.t + r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn ball_grain(id: u64, x: [f64; 2], t: f64) -> Grain {
        Grain::new(id, vec![x[0], x[1]], t, Shape::ball(1.0).unwrap())
    }

    #[test]
    fn staggered_births_meet_midway_after_head_start() {
        // Unit balls 10 apart, births 0 and 3: the early grain grows alone to
        // radius 3, then both close the remaining gap of 7 at rate 2.
        let u = ball_grain(1, [0.0, 0.0], 0.0);
        let v = ball_grain(2, [10.0, 0.0], 3.0);
        let c = first_contact(&u, &v).unwrap();
        assert!((c.time - 6.5).abs() < 1e-9);
        assert_eq!(c.covers, None);
    }

    #[test]
    fn late_germ_is_covered() {
        let u = ball_grain(1, [0.0, 0.0], 0.0);
        let v = ball_grain(2, [2.0, 0.0], 5.0);
        let c = first_contact(&u, &v).unwrap();
        assert!((c.time - 2.0).abs() < 1e-12);
        assert_eq!(c.covers, Some((1, 2)));
    }

    #[test]
    fn equal_births_meet_midway() {
        let u = ball_grain(1, [0.0, 0.0], 0.0);
        let v = ball_grain(2, [8.0, 0.0], 0.0);
        let c = first_contact(&u, &v).unwrap();
        assert!((c.time - 4.0).abs() < 1e-12);
        assert_eq!(c.covers, None);
    }

    #[test]
    fn first_contact_is_exactly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let square =
            Shape::polygon(vec![[1.0, -1.0], [1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0]]).unwrap();
        for k in 0..200 {
            let shape_u = if k % 2 == 0 { Shape::ball(rng.random_range(0.5..2.0)).unwrap() } else { square.clone() };
            let shape_v = if k % 3 == 0 { square.clone() } else { Shape::ball(rng.random_range(0.5..2.0)).unwrap() };
            let u = Grain::new(
                1,
                vec![rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)],
                rng.random_range(0.0..4.0),
                shape_u,
            );
            let v = Grain::new(
                2,
                vec![rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)],
                rng.random_range(0.0..4.0),
                shape_v,
            );
            if u.x == v.x {
                continue;
            }
            let a = first_contact_time(&u, &v).unwrap();
            let b = first_contact_time(&v, &u).unwrap();
            assert_eq!(a.to_bits(), b.to_bits(), "asymmetric first contact");
        }
    }

    #[test]
    fn contact_time_sandwich_for_simultaneous_births() {
        // For shapes between the unit ball and c * ball, born together:
        // |x - y| / (2c) <= contact time <= |x - y| / 2.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let c = 2.0;
        for _ in 0..100 {
            let shape_of = |rng: &mut ChaCha8Rng| {
                if rng.random_bool(0.5) {
                    Shape::ball(rng.random_range(1.0..c)).unwrap()
                } else {
                    // Square with inradius in [1, c / sqrt(2)]: stays inside c * ball.
                    let s = rng.random_range(1.0..c / 2.0_f64.sqrt());
                    Shape::polygon(vec![[s, -s], [s, s], [-s, s], [-s, -s]]).unwrap()
                }
            };
            let u = Grain::new(1, vec![rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0)], 0.0, shape_of(&mut rng));
            let v = Grain::new(2, vec![rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0)], 0.0, shape_of(&mut rng));
            if u.x == v.x {
                continue;
            }
            let gap = geometry::dist(&u.x, &v.x);
            let d = first_contact_time(&u, &v).unwrap();
            assert!(d >= gap / (2.0 * c) - 1e-9, "below sandwich: {d} vs {}", gap / (2.0 * c));
            assert!(d <= gap / 2.0 + 1e-9, "above sandwich: {d} vs {}", gap / 2.0);
        }
    }

    #[test]
    fn contact_time_dominates_births() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let u = ball_grain(1, [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)], rng.random_range(0.0..3.0));
            let v = ball_grain(2, [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)], rng.random_range(0.0..3.0));
            if u.x == v.x {
                continue;
            }
            let c = first_contact(&u, &v).unwrap();
            assert!(c.time >= u.t.min(v.t) - 1e-12);
            if c.covers.is_none() {
                assert!(c.time >= u.t.max(v.t) - 1e-12);
            }
        }
    }

    #[test]
    fn stop_time_examples() {
        // A frozen unit-ball grain of growth 5 at distance 9: reached at 4.
        let u = ball_grain(1, [0.0, 0.0], 0.0);
        let v = ball_grain(2, [9.0, 0.0], 0.0);
        assert!((stop_time(&u, &v, 5.0).unwrap() - 4.0).abs() < 1e-12);
        let late = ball_grain(3, [0.0, 0.0], 2.0);
        assert!((stop_time(&late, &v, 5.0).unwrap() - 6.0).abs() < 1e-12);
        // Germ already inside the frozen body: stopped at birth.
        let inside = ball_grain(4, [6.0, 0.0], 1.5);
        assert!((stop_time(&inside, &v, 5.0).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(stop_time(&u, &v, 0.0), Err(ModelError::NonPositiveGrowth));
    }

    #[test]
    fn configuration_validation() {
        let w = Window::new(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap();
        let g1 = ball_grain(1, [1.0, 1.0], 0.0);
        let g2 = ball_grain(2, [4.0, 4.0], 0.0);
        assert!(Configuration::new(2, w.clone(), vec![g1.clone(), g2.clone()]).is_ok());
        let dup = Configuration::new(2, w.clone(), vec![g1.clone(), ball_grain(1, [2.0, 2.0], 0.0)]);
        assert_eq!(dup.unwrap_err(), ModelError::DuplicateId(1));
        let coincident =
            Configuration::new(2, w.clone(), vec![g1.clone(), ball_grain(3, [1.0, 1.0], 0.0)]);
        assert!(matches!(coincident.unwrap_err(), ModelError::CoincidentPositions { .. }));
        let negative = Configuration::new(2, w.clone(), vec![ball_grain(1, [1.0, 1.0], -1.0)]);
        assert!(matches!(negative.unwrap_err(), ModelError::InvalidGrain { .. }));
        assert!(matches!(
            Configuration::new(4, w, vec![]).unwrap_err(),
            ModelError::BadDimension(4)
        ));
        assert!(Window::new(vec![0.0, 0.0], vec![0.0, 10.0]).is_err());
    }

    #[test]
    fn window_helpers() {
        let w = Window::new(vec![0.0, 0.0], vec![10.0, 20.0]).unwrap();
        assert_eq!(w.volume(), 200.0);
        assert!(w.contains(&[10.0, 0.0]));
        assert!(!w.contains(&[10.0, 20.5]));
        assert_eq!(w.center(), vec![5.0, 10.0]);
        assert_eq!(w.corners().len(), 4);
    }

    #[test]
    fn tie_scan_flags_symmetric_configurations() {
        let w = Window::new(vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
        // Perfect square of germs: equal contact times everywhere.
        let grains = vec![
            ball_grain(1, [-2.0, -2.0], 0.0),
            ball_grain(2, [2.0, -2.0], 0.0),
            ball_grain(3, [2.0, 2.0], 0.0),
            ball_grain(4, [-2.0, 2.0], 0.0),
        ];
        let cfg = Configuration::new(2, w.clone(), grains).unwrap();
        assert!(cfg.tie_scan().unwrap());
        let cfg = Configuration::new(
            2,
            w,
            vec![ball_grain(1, [-2.0, 0.0], 0.0), ball_grain(2, [2.3, 0.1], 0.0)],
        )
        .unwrap();
        assert!(!cfg.tie_scan().unwrap());
    }

    #[cfg(feature = "serde")]
    #[test]
    fn configuration_round_trips_through_json() {
        let w = Window::new(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap();
        let square =
            Shape::polygon(vec![[1.0, -1.0], [1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0]]).unwrap();
        let cfg = Configuration::new(
            2,
            w,
            vec![ball_grain(1, [1.0, 2.0], 0.0), Grain::new(2, vec![5.0, 5.0], 1.5, square)],
        )
        .unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"window\":[[0.0,0.0],[10.0,10.0]]"));
        assert!(json.contains("\"type\":\"ball\""));
        assert!(json.contains("\"type\":\"polygon\""));
        let back: Configuration = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        // Deserialization still validates.
        let bad = json.replace("\"dimension\":2", "\"dimension\":7");
        assert!(serde_json::from_str::<Configuration>(&bad).is_err());
    }
}
