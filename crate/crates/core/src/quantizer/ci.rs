//! Clustering-independent regions: fade states where every exclusive-law map
//! has the same minimum cluster distance.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::psk::{difference_constellation, SchemePair, SET_TOL};
use crate::sfs::enumerate_sfs;

use super::{HalfRegion, RegionCurve};

/// Far region: `gamma > 1` and outside one circle per nonzero singular fade state.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalCi {
    /// Centred at each nonzero state `h`, radius `sin(pi/M1)/sin(n2*pi/M2)`.
    pub circles: Vec<RegionCurve>,
}

impl ExternalCi {
    pub fn contains(&self, z: Complex64) -> bool {
        z.norm() > 1.0 && self.circles.iter().all(|c| c.eval(z) >= 0.0)
    }

    /// Distance to the nearest curve that decides membership.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        self.circles.iter().fold((z.norm() - 1.0).abs(), |m, c| m.min(c.distance(z)))
    }
}

/// Near region: `gamma < 1` and `|d1 + z d2| >= 2 sin(pi/M2) |z|` for every nonzero pair.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalCi {
    /// Deduplicated; circle exteriors, a disc and half-planes.
    pub constraints: Vec<HalfRegion>,
}

impl InternalCi {
    pub fn contains(&self, z: Complex64) -> bool {
        z.norm() < 1.0 && self.constraints.iter().all(|h| h.contains(z))
    }

    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        self.constraints.iter().fold((z.norm() - 1.0).abs(), |m, h| m.min(h.curve.distance(z)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CiRegionSpec {
    pub external: ExternalCi,
    pub internal: InternalCi,
}

pub fn ci_region_spec(scheme: &SchemePair) -> CiRegionSpec {
    CiRegionSpec { external: external_ci_spec(scheme), internal: internal_ci_spec(scheme) }
}

pub(super) fn ext_radius(scheme: &SchemePair, n2: usize) -> f64 {
    (PI / scheme.m1() as f64).sin() / (n2 as f64 * PI / scheme.m2() as f64).sin()
}

pub fn external_ci_spec(scheme: &SchemePair) -> ExternalCi {
    let circles = enumerate_sfs(scheme)
        .iter()
        .filter_map(|h| h.ring.map(|r| RegionCurve::Circle { center: h.value, radius: ext_radius(scheme, r.n2) }))
        .collect();
    ExternalCi { circles }
}

/// The narrower circle set drawn only on rings `(n1, n2)` with `2^delta * n2 <= n1`.
/// Kept for comparison; it misses fade states that the full set excludes.
pub fn restricted_external_circles(scheme: &SchemePair) -> ExternalCi {
    let two_delta = 1usize << scheme.delta();
    let circles = enumerate_sfs(scheme)
        .iter()
        .filter_map(|h| {
            let r = h.ring?;
            (two_delta * r.n2 <= r.n1)
                .then(|| RegionCurve::Circle { center: h.value, radius: ext_radius(scheme, r.n2) })
        })
        .collect();
    ExternalCi { circles }
}

fn push_unique(out: &mut Vec<HalfRegion>, h: HalfRegion) {
    if !out.iter().any(|o| o.negative == h.negative && o.curve.approx_eq(&h.curve, SET_TOL)) {
        out.push(h);
    }
}

/// Squares `|d1 + z d2| >= 2s|z|` into
/// `(A - 4s^2)|z|^2 + 2 Re(w z) + |d1|^2 >= 0` with `A = |d2|^2`, `w = conj(d1) d2`.
pub fn internal_ci_spec(scheme: &SchemePair) -> InternalCi {
    let s = (PI / scheme.m2() as f64).sin();
    let four_s2 = 4.0 * s * s;
    let da = difference_constellation(scheme.user_a());
    let db = difference_constellation(scheme.user_b());
    let mut out = Vec::new();
    for p in da.nonzero() {
        let b1 = p.value.norm_sqr();
        // d2 = 0: |d1| >= 2s|z| is a disc
        let disc = RegionCurve::Circle { center: Complex64::new(0.0, 0.0), radius: b1.sqrt() / (2.0 * s) };
        push_unique(&mut out, HalfRegion { curve: disc, negative: true });
        for q in db.nonzero() {
            let a = q.value.norm_sqr();
            let w = p.value.conj() * q.value;
            let k = a - four_s2;
            if k > SET_TOL {
                let center = -w.conj() / k;
                let radius = 2.0 * s * b1.sqrt() / k;
                push_unique(&mut out, HalfRegion { curve: RegionCurve::Circle { center, radius }, negative: false });
            } else {
                // 2 (p x - q y) + |d1|^2 >= 0, i.e. -p x + q y <= |d1|^2 / 2
                let curve = RegionCurve::line(-w.re, w.im, b1 / 2.0).expect("nonzero normal");
                push_unique(&mut out, HalfRegion::containing(curve, Complex64::new(0.0, 0.0)));
            }
        }
    }
    InternalCi { constraints: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psk::DifferenceSet;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn direct_internal(z: Complex64, s: &SchemePair, da: &DifferenceSet, db: &DifferenceSet) -> bool {
        let rhs = 2.0 * (PI / s.m2() as f64).sin() * z.norm();
        z.norm() < 1.0
            && da.values().iter().all(|&d1| {
                db.values().iter().all(|&d2| (d1.norm() < SET_TOL && d2.norm() < SET_TOL) || (d1 + z * d2).norm() >= rhs - 1e-12)
            })
    }

    #[test]
    fn qpsk_bpsk_circles() {
        let s = SchemePair::new(4, 2).unwrap();
        let ext = external_ci_spec(&s);
        assert_eq!(ext.circles.len(), 8);
        let h = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let c = ext
            .circles
            .iter()
            .find_map(|c| match *c {
                RegionCurve::Circle { center, radius } if (center - h).norm() < 1e-12 => Some(radius),
                _ => None,
            })
            .unwrap();
        assert!((c - FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(restricted_external_circles(&s).circles.len(), 4);
    }

    #[test]
    fn far_and_near_points() {
        for (m1, m2) in [(2, 2), (4, 2), (8, 2), (8, 4), (16, 4)] {
            let s = SchemePair::new(m1, m2).unwrap();
            assert!(external_ci_spec(&s).contains(Complex64::new(100.0, 0.0)));
            assert!(internal_ci_spec(&s).contains(Complex64::new(1e-6, 0.0)));
        }
    }

    #[test]
    fn restricted_set_admits_a_selected_state() {
        // 1.2 lies inside the circle around 1/sqrt(2) and is not external
        let s = SchemePair::new(4, 2).unwrap();
        let z = Complex64::new(1.2, 0.0);
        assert!(restricted_external_circles(&s).contains(z));
        assert!(!external_ci_spec(&s).contains(z));
        let q = super::super::Quantizer::new(&s);
        assert_ne!(q.select(z).verdict, super::super::Verdict::ExternalCi);
    }

    #[test]
    fn internal_matches_direct_inequalities() {
        for (m1, m2) in [(4, 2), (8, 4), (2, 2)] {
            let s = SchemePair::new(m1, m2).unwrap();
            let da = difference_constellation(s.user_a());
            let db = difference_constellation(s.user_b());
            let spec = internal_ci_spec(&s);
            let n = 121;
            for i in 0..n {
                for j in 0..n {
                    let z = Complex64::new(-1.5 + 3.0 * (i as f64 + 0.5) / n as f64, -1.5 + 3.0 * (j as f64 + 0.5) / n as f64);
                    if spec.boundary_distance(z) < 1e-6 {
                        continue;
                    }
                    assert_eq!(spec.contains(z), direct_internal(z, &s, &da, &db), "{s} {z}");
                }
            }
        }
    }
}
