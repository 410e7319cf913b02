//! Map selection over the fade-state plane and its analytic partition.
//!
//! For a fade state `z = gamma e^{j theta}` every difference pair `(d1, d2)`
//! scores `|d1 + z d2|`. The smallest score decides what the relay does: a pair
//! with `d2 = 0` means every exclusive-law map is equally good far out
//! (external region), `d1 = 0` the same near the origin (internal region), and
//! otherwise `-d1/d2` is the singular fade state whose removing map should be used.

mod ci;
mod region;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::psk::{difference_constellation, DifferencePoint, SchemePair, SET_TOL};
use crate::sfs::{enumerate_sfs, find_sfs, SingularFadeState};

pub use ci::{
    ci_region_spec, external_ci_spec, internal_ci_spec, restricted_external_circles, CiRegionSpec, ExternalCi,
    InternalCi,
};
pub use region::{
    boundaries_to_json, boundary_curves, classify, classify_grid, compare_with_oracle, raster_to_csv, rasterize,
    region_for_sfs, Agreement, AnalyticClassifier, Classification, Grid, Raster, Region, SfsRegion,
};

/// Scores within this margin of the running minimum do not displace it.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadeState {
    pub gamma: f64,
    /// In `[-pi, pi)`.
    pub theta: f64,
}

impl FadeState {
    pub fn new(gamma: f64, theta: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite() && theta.is_finite()) {
            return Err(Error::Parse(format!("invalid fade state ({gamma}, {theta})")));
        }
        Ok(Self { gamma, theta: crate::psk::wrap_phase(theta) })
    }

    pub fn from_complex(z: Complex64) -> Self {
        let (gamma, theta) = z.to_polar();
        Self { gamma, theta: crate::psk::wrap_phase(theta) }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.gamma, self.theta)
    }
}

/// A circle or a straight line in the fade-state plane, `(x, y) = (Re z, Im z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionCurve {
    Circle { center: Complex64, radius: f64 },
    /// `a x + b y = c` with `a^2 + b^2 = 1` and `c >= 0`.
    Line { a: f64, b: f64, c: f64 },
}

impl RegionCurve {
    /// Normalises the line so its normal is a unit vector and `c >= 0`.
    pub fn line(a: f64, b: f64, c: f64) -> Result<Self> {
        let n = a.hypot(b);
        if n.is_nan() || n <= 0.0 || !c.is_finite() {
            return Err(Error::DegenerateBoundary(format!("line {a}x + {b}y = {c}")));
        }
        let (mut a, mut b, mut c) = (a / n, b / n, c / n);
        if c.abs() < 1e-12 {
            c = 0.0;
        }
        let lead = if a.abs() > 1e-12 { a } else { b };
        let flip = c < 0.0 || (c == 0.0 && lead < 0.0);
        if flip {
            (a, b, c) = (-a, -b, -c);
        }
        Ok(RegionCurve::Line { a, b, c: c + 0.0 })
    }

    pub fn circle(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::DegenerateBoundary(format!("circle radius {radius}")));
        }
        Ok(RegionCurve::Circle { center, radius })
    }

    /// Negative inside the circle / below the line, zero on the curve.
    pub fn eval(&self, z: Complex64) -> f64 {
        match *self {
            RegionCurve::Circle { center, radius } => (z - center).norm() - radius,
            RegionCurve::Line { a, b, c } => a * z.re + b * z.im - c,
        }
    }

    /// Euclidean distance from `z` to the curve.
    pub fn distance(&self, z: Complex64) -> f64 {
        self.eval(z).abs()
    }

    pub fn approx_eq(&self, other: &RegionCurve, tol: f64) -> bool {
        match (*self, *other) {
            (RegionCurve::Circle { center: c1, radius: r1 }, RegionCurve::Circle { center: c2, radius: r2 }) => {
                (c1 - c2).norm() < tol && (r1 - r2).abs() < tol
            }
            (RegionCurve::Line { a: a1, b: b1, c: c1 }, RegionCurve::Line { a: a2, b: b2, c: c2 }) => {
                (a1 - a2).abs() < tol && (b1 - b2).abs() < tol && (c1 - c2).abs() < tol
            }
            _ => false,
        }
    }
}

/// One side of a curve, closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfRegion {
    pub curve: RegionCurve,
    /// Keep points where `curve.eval(z) <= 0` when true, `>= 0` otherwise.
    pub negative: bool,
}

impl HalfRegion {
    /// The side of `curve` containing `z`.
    pub fn containing(curve: RegionCurve, z: Complex64) -> Self {
        Self { curve, negative: curve.eval(z) <= 0.0 }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let v = self.curve.eval(z);
        if self.negative {
            v <= 0.0
        } else {
            v >= 0.0
        }
    }
}

/// `|d1 + z d2|`.
pub fn distance_metric(fs: FadeState, d1: Complex64, d2: Complex64) -> Result<f64> {
    if d1.norm() < SET_TOL && d2.norm() < SET_TOL {
        return Err(Error::ZeroPair);
    }
    Ok((d1 + fs.value() * d2).norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    ExternalCi,
    InternalCi,
    /// `index` points into [`Quantizer::sfs`].
    UseSfsMap { sfs: SingularFadeState, index: usize },
}

/// A difference pair; `None` stands for the zero difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub d1: Option<DifferencePoint>,
    pub d2: Option<DifferencePoint>,
}

impl Witness {
    pub fn d1_value(&self) -> Complex64 {
        self.d1.map_or(Complex64::new(0.0, 0.0), |p| p.value)
    }

    pub fn d2_value(&self) -> Complex64 {
        self.d2.map_or(Complex64::new(0.0, 0.0), |p| p.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSelection {
    pub verdict: Verdict,
    pub witness: Witness,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy)]
enum Target {
    External,
    Internal,
    Sfs(usize),
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    witness: Witness,
    d1: Complex64,
    d2: Complex64,
    target: Target,
}

/// Precomputed exhaustive argmin over all nonzero difference pairs.
///
/// Candidates are scanned as: `(d1, 0)` by `(n1, k1)`, then `(0, d2)` by
/// `(n2, k2)`, then `(d1, d2)` by `(n1, k1, n2, k2)`. The first candidate
/// within `1e-12` of the minimum wins.
#[derive(Debug, Clone)]
pub struct Quantizer {
    scheme: SchemePair,
    sfs: Vec<SingularFadeState>,
    entries: Vec<Entry>,
}

impl Quantizer {
    pub fn new(scheme: &SchemePair) -> Self {
        let sfs: Vec<_> = enumerate_sfs(scheme).into_iter().skip(1).collect();
        let da = difference_constellation(scheme.user_a());
        let db = difference_constellation(scheme.user_b());
        let zero = Complex64::new(0.0, 0.0);
        let mut entries = Vec::new();
        for p in da.nonzero() {
            let witness = Witness { d1: Some(*p), d2: None };
            entries.push(Entry { witness, d1: p.value, d2: zero, target: Target::External });
        }
        for q in db.nonzero() {
            let witness = Witness { d1: None, d2: Some(*q) };
            entries.push(Entry { witness, d1: zero, d2: q.value, target: Target::Internal });
        }
        for p in da.nonzero() {
            for q in db.nonzero() {
                let i = find_sfs(&sfs, -p.value / q.value).expect("ratio of differences is singular");
                let witness = Witness { d1: Some(*p), d2: Some(*q) };
                entries.push(Entry { witness, d1: p.value, d2: q.value, target: Target::Sfs(i) });
            }
        }
        Self { scheme: scheme.clone(), sfs, entries }
    }

    pub fn scheme(&self) -> &SchemePair {
        &self.scheme
    }

    /// Nonzero singular fade states in enumeration order.
    pub fn sfs(&self) -> &[SingularFadeState] {
        &self.sfs
    }

    pub fn select(&self, z: Complex64) -> MapSelection {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, e) in self.entries.iter().enumerate() {
            let d = (e.d1 + z * e.d2).norm();
            if d < best_d - TIE_TOL {
                best_d = d;
                best = i;
            }
        }
        let e = &self.entries[best];
        let verdict = match e.target {
            Target::External => Verdict::ExternalCi,
            Target::Internal => Verdict::InternalCi,
            Target::Sfs(index) => Verdict::UseSfsMap { sfs: self.sfs[index], index },
        };
        MapSelection { verdict, witness: e.witness, distance: best_d }
    }

    /// The pair realising `h` with the smallest `|d2|`, first in scan order.
    pub fn witness_for(&self, h: &SingularFadeState) -> Result<Witness> {
        if h.is_origin() {
            return Err(Error::OriginSfs("the origin has no finite witness pair".into()));
        }
        let i = find_sfs(&self.sfs, h.value)
            .ok_or_else(|| Error::Parse(format!("{h} is not a singular fade state of {}", self.scheme)))?;
        let mut best: Option<&Entry> = None;
        for e in self.entries.iter().filter(|e| matches!(e.target, Target::Sfs(j) if j == i)) {
            if best.is_none_or(|b| e.d2.norm() < b.d2.norm() - TIE_TOL) {
                best = Some(e);
            }
        }
        Ok(best.expect("every singular fade state has a witness").witness)
    }
}

pub fn select_map(fs: FadeState, scheme: &SchemePair) -> MapSelection {
    Quantizer::new(scheme).select(fs.value())
}

/// Locus where `|d1 + z d2| = |e1 + z e2|`.
///
/// Expanding both squares gives `(A - B)|z|^2 + 2 Re(w z) + |d1|^2 - |e1|^2 = 0`
/// with `A = |d2|^2`, `B = |e2|^2`, `w = conj(d1) d2 - conj(e1) e2`: a line when
/// `A = B`, a circle otherwise.
pub fn equal_distance_curve(d: (Complex64, Complex64), e: (Complex64, Complex64)) -> Result<RegionCurve> {
    let da = d.1.norm_sqr() - e.1.norm_sqr();
    let w = d.0.conj() * d.1 - e.0.conj() * e.1;
    let db = d.0.norm_sqr() - e.0.norm_sqr();
    if da.abs() < SET_TOL {
        return RegionCurve::line(2.0 * w.re, -2.0 * w.im, -db);
    }
    let center = -w.conj() / da;
    let r2 = center.norm_sqr() - db / da;
    if r2.is_nan() || r2 <= 0.0 {
        return Err(Error::DegenerateBoundary("pairs never score equally".into()));
    }
    RegionCurve::circle(center, r2.sqrt())
}

/// Transition curve between the regions of two nonzero singular fade states,
/// using each state's smallest-`|d2|` witness pair.
pub fn pairwise_boundary(h1: &SingularFadeState, h2: &SingularFadeState, scheme: &SchemePair) -> Result<RegionCurve> {
    pairwise_boundary_with(&Quantizer::new(scheme), h1, h2)
}

pub fn pairwise_boundary_with(q: &Quantizer, h1: &SingularFadeState, h2: &SingularFadeState) -> Result<RegionCurve> {
    if (h1.value - h2.value).norm() < SET_TOL {
        return Err(Error::DegenerateBoundary(format!("{h1} against itself")));
    }
    let w1 = q.witness_for(h1)?;
    let w2 = q.witness_for(h2)?;
    let curve = equal_distance_curve((w1.d1_value(), w1.d2_value()), (w2.d1_value(), w2.d2_value()))?;
    Ok(curve)
}

/// Closed form of the same curve in terms of the states themselves: with
/// `A_i = |d2(h_i)|^2`, a circle centred at `(A1 h1 - A2 h2)/(A1 - A2)` of radius
/// `sqrt(A1 A2)|h1 - h2| / |A1 - A2|`, or the line
/// `2 Re(h1 - h2) x + 2 Im(h1 - h2) y = |h1|^2 - |h2|^2` when `A1 = A2`.
pub fn pairwise_boundary_closed_form(h1: Complex64, a1: f64, h2: Complex64, a2: f64) -> Result<RegionCurve> {
    let dh = h1 - h2;
    if (a1 - a2).abs() < SET_TOL {
        return RegionCurve::line(2.0 * dh.re, 2.0 * dh.im, h1.norm_sqr() - h2.norm_sqr());
    }
    let center = (a1 * h1 - a2 * h2) / (a1 - a2);
    RegionCurve::circle(center, (a1 * a2).sqrt() * dh.norm() / (a1 - a2).abs())
}

/// Angular step between equivalent fade states.
pub(crate) fn slot(scheme: &SchemePair) -> f64 {
    2.0 * PI / scheme.m1() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sfs::sfs_at;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn qb() -> SchemePair {
        SchemePair::new(4, 2).unwrap()
    }

    #[test]
    fn metric_examples() {
        let fs = FadeState::new(1.0, FRAC_PI_4).unwrap();
        let d1 = Complex64::new(2f64.sqrt(), 2f64.sqrt());
        assert!(distance_metric(fs, d1, Complex64::new(-2.0, 0.0)).unwrap() < 1e-12);
        let fs = FadeState::new(0.7, 1.1).unwrap();
        assert_eq!(distance_metric(fs, Complex64::new(0.3, 0.4), Complex64::new(0.0, 0.0)).unwrap(), 0.5);
        let fs = FadeState::new(1.0, 0.0).unwrap();
        let j2 = Complex64::new(0.0, 2.0);
        assert!((distance_metric(fs, j2, j2).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(distance_metric(fs, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), Err(Error::ZeroPair));
    }

    #[test]
    fn selection_examples() {
        let s = qb();
        let at = |g: f64, t: f64| select_map(FadeState::new(g, t).unwrap(), &s);
        match at(1.0, FRAC_PI_4).verdict {
            Verdict::UseSfsMap { sfs, .. } => assert!((sfs.value - Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2)).norm() < 1e-9),
            v => panic!("{v:?}"),
        }
        let ext = at(10.0, 0.3);
        assert_eq!(ext.verdict, Verdict::ExternalCi);
        assert!(ext.witness.d2.is_none());
        let int = at(0.01, 1.0);
        assert_eq!(int.verdict, Verdict::InternalCi);
        assert!(int.witness.d1.is_none());
    }

    #[test]
    fn every_sfs_selects_itself_with_a_consistent_witness() {
        for (m1, m2) in [(2, 2), (4, 2), (8, 2), (8, 4), (16, 4)] {
            let s = SchemePair::new(m1, m2).unwrap();
            let q = Quantizer::new(&s);
            for h in q.sfs() {
                let sel = q.select(h.value);
                match sel.verdict {
                    Verdict::UseSfsMap { sfs, .. } => assert!((sfs.value - h.value).norm() < 1e-9, "{s} {h}"),
                    v => panic!("{s} {h}: {v:?}"),
                }
                let w = sel.witness;
                assert!((-w.d1_value() / w.d2_value() - h.value).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn example_lines() {
        let s = qb();
        let h = sfs_at(&s, 1.0, FRAC_PI_4).unwrap();
        let h2 = sfs_at(&s, FRAC_1_SQRT_2, 0.0).unwrap();
        let h3 = sfs_at(&s, FRAC_1_SQRT_2, PI / 2.0).unwrap();
        let c = 1.0 / (2.0 * 2f64.sqrt());
        match pairwise_boundary(&h, &h2, &s).unwrap() {
            RegionCurve::Line { a, b, c: cc } => {
                assert!(a.abs() < 1e-12 && (b - 1.0).abs() < 1e-12 && (cc - c).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        match pairwise_boundary(&h, &h3, &s).unwrap() {
            RegionCurve::Line { a, b, c: cc } => {
                assert!((a - 1.0).abs() < 1e-12 && b.abs() < 1e-12 && (cc - c).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        assert!(pairwise_boundary(&h, &h, &s).is_err());
    }

    #[test]
    fn binary_b_side_gives_only_lines() {
        for m1 in [2, 4, 8, 16] {
            let s = SchemePair::new(m1, 2).unwrap();
            let q = Quantizer::new(&s);
            for h1 in q.sfs() {
                for h2 in q.sfs() {
                    if h1 != h2 {
                        assert!(matches!(pairwise_boundary_with(&q, h1, h2).unwrap(), RegionCurve::Line { .. }));
                    }
                }
            }
        }
    }

    #[test]
    fn both_boundary_routes_agree_and_are_equidistant() {
        for (m1, m2) in [(4, 2), (8, 4), (16, 4), (8, 8)] {
            let s = SchemePair::new(m1, m2).unwrap();
            let q = Quantizer::new(&s);
            for (i, h1) in q.sfs().iter().enumerate().step_by(3) {
                for h2 in q.sfs().iter().skip(i + 1).step_by(5) {
                    let w1 = q.witness_for(h1).unwrap();
                    let w2 = q.witness_for(h2).unwrap();
                    let a1 = w1.d2_value().norm_sqr();
                    let a2 = w2.d2_value().norm_sqr();
                    let curve = pairwise_boundary_with(&q, h1, h2).unwrap();
                    let closed = pairwise_boundary_closed_form(h1.value, a1, h2.value, a2).unwrap();
                    assert!(curve.approx_eq(&closed, 1e-9), "{curve:?} vs {closed:?}");
                    for k in 0..100 {
                        let t = 2.0 * PI * k as f64 / 100.0;
                        let z = match curve {
                            RegionCurve::Circle { center, radius } => center + Complex64::from_polar(radius, t),
                            RegionCurve::Line { a, b, c } => {
                                Complex64::new(a * c, b * c) + Complex64::new(-b, a) * (3.0 * t.cos())
                            }
                        };
                        let d1 = (w1.d1_value() + z * w1.d2_value()).norm();
                        let d2 = (w2.d1_value() + z * w2.d2_value()).norm();
                        assert!((d1 - d2).abs() < 1e-9, "{s} {h1} {h2}");
                    }
                }
            }
        }
    }

    #[test]
    fn line_normalisation() {
        let RegionCurve::Line { a, b, c } = RegionCurve::line(0.0, -2.0, -1.0).unwrap() else { panic!() };
        assert_eq!((a, b, c), (0.0, 1.0, 0.5));
        assert!(RegionCurve::line(0.0, 0.0, 1.0).is_err());
        assert!(RegionCurve::circle(Complex64::new(0.0, 0.0), 0.0).is_err());
    }
}
