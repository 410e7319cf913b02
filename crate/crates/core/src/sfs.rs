//! Singular fade states: fade states `h` at which two distinct symbol pairs
//! land on the same noiseless relay point, i.e. `(x_A - x'_A) + h (x_B - x'_B) = 0`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::psk::{difference_constellation, wrap_phase, SchemePair, SET_TOL};

/// Closed-form provenance of a nonzero singular fade state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ring {
    /// Index distance of the A-side difference point.
    pub n1: usize,
    /// Index distance of the B-side difference point. On the unit circle
    /// several `(n1, n2)` pairs coincide; the smallest `n2` is kept.
    pub n2: usize,
    /// Phase slot: `theta = 2*l*pi/M1 + phi(n1, n2)`.
    pub l: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularFadeState {
    pub value: Complex64,
    pub gamma: f64,
    /// Phase in `[-pi, pi)`.
    pub theta: f64,
    /// `None` marks the origin, whose effect no map can remove.
    pub ring: Option<Ring>,
}

impl SingularFadeState {
    pub fn origin() -> Self {
        Self { value: Complex64::new(0.0, 0.0), gamma: 0.0, theta: 0.0, ring: None }
    }

    pub fn is_origin(&self) -> bool {
        self.ring.is_none()
    }

    /// Smallest `|d2|` over difference pairs with `-d1/d2 = h`.
    pub fn min_d2_magnitude(&self, scheme: &SchemePair) -> f64 {
        let n2 = self.ring.map_or(1, |r| r.n2);
        2.0 * (n2 as f64 * PI / scheme.m2() as f64).sin()
    }

    /// `|d1|` of the witness pair with the smallest `|d2|`.
    pub fn min_d1_magnitude(&self, scheme: &SchemePair) -> f64 {
        match self.ring {
            Some(r) => 2.0 * (r.n1 as f64 * PI / scheme.m1() as f64).sin(),
            None => 0.0,
        }
    }
}

impl fmt::Display for SingularFadeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ring {
            Some(r) => write!(f, "SFS:{},{},{}", r.n1, r.n2, r.l),
            None => write!(f, "SFS:origin"),
        }
    }
}

/// Phase offset of the `M1` points on the circle indexed by `(n1, n2)`.
pub fn phase_offset(n1: usize, n2: usize, scheme: &SchemePair) -> f64 {
    let m1 = scheme.m1() as f64;
    let two_delta = (1usize << scheme.delta()) as f64;
    match (n1 % 2 == 1, n2 % 2 == 1) {
        (true, true) => 0.0,
        (false, false) => (1.0 - two_delta) * PI / m1,
        (true, false) => -two_delta * PI / m1,
        (false, true) => PI / m1,
    }
}

fn ratio(n1: usize, n2: usize, scheme: &SchemePair) -> f64 {
    (n1 as f64 * PI / scheme.m1() as f64).sin() / (n2 as f64 * PI / scheme.m2() as f64).sin()
}

/// Distinct `(n1, n2)` circles, smallest `n2` kept for coinciding radii, sorted by radius.
fn circles(scheme: &SchemePair) -> Vec<(usize, usize, f64)> {
    let mut out: Vec<(usize, usize, f64)> = Vec::new();
    for n2 in 1..=scheme.m2() / 2 {
        for n1 in 1..=scheme.m1() / 2 {
            let r = ratio(n1, n2, scheme);
            if !out.iter().any(|&(_, _, q)| (q - r).abs() < SET_TOL) {
                out.push((n1, n2, r));
            }
        }
    }
    out.sort_by(|a, b| a.2.total_cmp(&b.2));
    out
}

/// Number of distinct nonzero radii predicted in closed form.
pub fn expected_circle_count(scheme: &SchemePair) -> usize {
    scheme.m1() * scheme.m2() / 4 - scheme.m2() / 2 + 1
}

/// Sorted distinct radii of the circles carrying nonzero singular fade states.
pub fn sfs_circle_radii(scheme: &SchemePair) -> Vec<f64> {
    circles(scheme).into_iter().map(|(_, _, r)| r).collect()
}

/// Builds the singular fade state at slot `l` of circle `(n1, n2)`.
pub fn sfs_on_ring(n1: usize, n2: usize, l: usize, scheme: &SchemePair) -> SingularFadeState {
    let m1 = scheme.m1();
    let gamma = ratio(n1, n2, scheme);
    let theta = wrap_phase(2.0 * (l % m1) as f64 * PI / m1 as f64 + phase_offset(n1, n2, scheme));
    SingularFadeState {
        value: Complex64::from_polar(gamma, theta),
        gamma,
        theta,
        ring: Some(Ring { n1, n2, l: l % m1 }),
    }
}

/// All singular fade states in closed form: the origin first, then each
/// circle (ascending radius) with its `M1` equispaced points.
pub fn enumerate_sfs(scheme: &SchemePair) -> Vec<SingularFadeState> {
    let mut out = vec![SingularFadeState::origin()];
    for (n1, n2, _) in circles(scheme) {
        out.extend((0..scheme.m1()).map(|l| sfs_on_ring(n1, n2, l, scheme)));
    }
    out
}

/// Independent oracle: `{-d1/d2}` over all nonzero difference pairs, plus zero.
pub fn brute_force_sfs(scheme: &SchemePair) -> Vec<Complex64> {
    let d1 = difference_constellation(scheme.user_a());
    let d2 = difference_constellation(scheme.user_b());
    let mut out = vec![Complex64::new(0.0, 0.0)];
    for a in d1.nonzero() {
        for b in d2.nonzero() {
            let h = -a.value / b.value;
            if !out.iter().any(|o| (o - h).norm() < SET_TOL) {
                out.push(h);
            }
        }
    }
    out
}

/// Rotates a singular fade state by `steps * 2*pi/M1`.
pub fn rotate_sfs(h: &SingularFadeState, steps: isize, scheme: &SchemePair) -> SingularFadeState {
    match h.ring {
        None => *h,
        Some(r) => {
            let m1 = scheme.m1() as isize;
            let l = (r.l as isize + steps).rem_euclid(m1) as usize;
            sfs_on_ring(r.n1, r.n2, l, scheme)
        }
    }
}

/// Locates `value` among the enumerated singular fade states.
pub fn find_sfs(all: &[SingularFadeState], value: Complex64) -> Option<usize> {
    all.iter().position(|h| (h.value - value).norm() < SET_TOL)
}

/// A symbol-index pair `(x_A, x_B)`.
pub type Cell = (usize, usize);

/// Symbol pairs that collide at a singular fade state and must share a label.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularityConstraint {
    pub sfs: SingularFadeState,
    /// Unordered pairs, each stored with the lexicographically smaller cell first.
    pub pairs: Vec<(Cell, Cell)>,
    /// Set for the origin, whose distance shortening cannot be undone.
    pub irremovable: bool,
}

/// Lists every pair with `x_A != x'_A`, `x_B != x'_B` colliding at `h`.
pub fn singularity_constraints(h: &SingularFadeState, scheme: &SchemePair) -> SingularityConstraint {
    if h.is_origin() {
        return SingularityConstraint { sfs: *h, pairs: Vec::new(), irremovable: true };
    }
    let a = scheme.user_a().points();
    let b = scheme.user_b().points();
    let mut pairs = Vec::new();
    for xa in 0..a.len() {
        for xb in 0..b.len() {
            for ya in 0..a.len() {
                for yb in 0..b.len() {
                    if ya == xa || yb == xb || (xa, xb) >= (ya, yb) {
                        continue;
                    }
                    if ((a[xa] - a[ya]) + h.value * (b[xb] - b[yb])).norm() < SET_TOL {
                        pairs.push(((xa, xb), (ya, yb)));
                    }
                }
            }
        }
    }
    SingularityConstraint { sfs: *h, pairs, irremovable: false }
}

/// Looks up a nonzero singular fade state by `(gamma, theta)`.
pub fn sfs_at(scheme: &SchemePair, gamma: f64, theta: f64) -> Result<SingularFadeState> {
    let z = Complex64::from_polar(gamma, theta);
    let all = enumerate_sfs(scheme);
    find_sfs(&all, z)
        .map(|i| all[i])
        .ok_or_else(|| Error::Parse(format!("({gamma}, {theta}) is not a singular fade state of {scheme}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn scheme(m1: usize, m2: usize) -> SchemePair {
        SchemePair::new(m1, m2).unwrap()
    }

    fn same_set(a: &[Complex64], b: &[Complex64]) -> bool {
        a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| (x - y).norm() < SET_TOL))
    }

    /// Minimum distance of the unclustered relay constellation at `h`.
    fn d_min(h: Complex64, s: &SchemePair) -> f64 {
        let a = s.user_a().points();
        let b = s.user_b().points();
        let mut best = f64::INFINITY;
        for xa in 0..a.len() {
            for xb in 0..b.len() {
                for ya in 0..a.len() {
                    for yb in 0..b.len() {
                        if (xa, xb) != (ya, yb) {
                            best = best.min(((a[xa] - a[ya]) + h * (b[xb] - b[yb])).norm());
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn qpsk_bpsk_example() {
        let s = scheme(4, 2);
        let all = enumerate_sfs(&s);
        assert_eq!(all.len(), 9);
        let r = FRAC_1_SQRT_2;
        let expect: Vec<Complex64> = [
            (0.0, 0.0), (r, 0.0), (-r, 0.0), (0.0, r), (0.0, -r),
            (r, r), (r, -r), (-r, r), (-r, -r),
        ]
        .iter()
        .map(|&(x, y)| Complex64::new(x, y))
        .collect();
        let values: Vec<_> = all.iter().map(|h| h.value).collect();
        assert!(same_set(&values, &expect));
        assert!(same_set(&brute_force_sfs(&s), &expect));
        let radii = sfs_circle_radii(&s);
        assert_eq!(radii.len(), 2);
        assert!((radii[0] - r).abs() < 1e-12 && (radii[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn counts_for_tabulated_schemes() {
        assert_eq!(enumerate_sfs(&scheme(8, 2)).len(), 33);
        assert_eq!(enumerate_sfs(&scheme(8, 4)).len(), 57);
        assert_eq!(brute_force_sfs(&scheme(8, 4)).len(), 57);
        assert_eq!(sfs_circle_radii(&scheme(8, 2)).len(), 4);
        assert_eq!(sfs_circle_radii(&scheme(8, 4)).len(), 7);
        assert_eq!(sfs_circle_radii(&scheme(2, 2)), vec![1.0]);
        let bb = brute_force_sfs(&scheme(2, 2));
        let expect = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        assert!(same_set(&bb, &expect));
    }

    #[test]
    fn closed_form_agrees_with_brute_force_everywhere() {
        for m1 in [2, 4, 8, 16] {
            for m2 in [2, 4, 8, 16] {
                if m1 < m2 {
                    continue;
                }
                let s = scheme(m1, m2);
                let all = enumerate_sfs(&s);
                let values: Vec<_> = all.iter().map(|h| h.value).collect();
                assert!(same_set(&values, &brute_force_sfs(&s)), "{s}");
                assert_eq!(all.len() - 1, m1 * expected_circle_count(&s), "{s}");
                assert_eq!(sfs_circle_radii(&s).len(), expected_circle_count(&s));
                for h in &all[1..] {
                    let r = h.ring.unwrap();
                    assert!((h.gamma - ratio(r.n1, r.n2, &s)).abs() < 1e-12);
                    assert!((h.value - Complex64::from_polar(h.gamma, h.theta)).norm() < 1e-12);
                    assert!(h.theta >= -PI && h.theta < PI);
                    let rot = h.value * Complex64::from_polar(1.0, 2.0 * PI / m1 as f64);
                    assert!(find_sfs(&all, rot).is_some());
                }
            }
        }
    }

    #[test]
    fn homogeneous_offsets_reduce_to_zero_or_half_slot() {
        for m in [2, 4, 8, 16] {
            let s = scheme(m, m);
            let step = PI / m as f64;
            assert_eq!(phase_offset(1, 1, &s), 0.0);
            assert_eq!(phase_offset(2, 2, &s), 0.0);
            assert!((phase_offset(1, 2, &s) + step).abs() < 1e-15);
            assert!((phase_offset(2, 1, &s) - step).abs() < 1e-15);
        }
    }

    #[test]
    fn constraints_collapse_distance() {
        for (m1, m2) in [(4, 2), (8, 2), (8, 4)] {
            let s = scheme(m1, m2);
            let a = s.user_a().points();
            let b = s.user_b().points();
            for h in &enumerate_sfs(&s)[1..] {
                assert!(d_min(h.value, &s) < 1e-9);
                let cons = singularity_constraints(h, &s);
                assert!(!cons.pairs.is_empty() && !cons.irremovable);
                for &((xa, xb), (ya, yb)) in &cons.pairs {
                    assert!(xa != ya && xb != yb);
                    assert!(((a[xa] - a[ya]) + h.value * (b[xb] - b[yb])).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn qpsk_bpsk_constraints_in_model_labels() {
        let s = scheme(4, 2);
        let h = sfs_at(&s, FRAC_1_SQRT_2, 0.0).unwrap();
        let cons = singularity_constraints(&h, &s);
        assert_eq!(cons.pairs, vec![((0, 1), (3, 0)), ((1, 1), (2, 0))]);
        let h = sfs_at(&s, 1.0, PI / 4.0).unwrap();
        assert_eq!(singularity_constraints(&h, &s).pairs, vec![((1, 1), (3, 0))]);
    }

    #[test]
    fn eight_psk_bpsk_outer_ring_by_exhaustive_scan() {
        let s = scheme(8, 2);
        let all = enumerate_sfs(&s);
        let h = all
            .iter()
            .filter(|h| !h.is_origin())
            .max_by(|a, b| a.gamma.total_cmp(&b.gamma).then(b.ring.unwrap().l.cmp(&a.ring.unwrap().l)))
            .unwrap();
        assert_eq!(h.ring.unwrap().l, 0);
        let cons = singularity_constraints(h, &s);
        // independent scan over S1^2 x S2^2, counted as unordered pairs
        let a = s.user_a().points();
        let b = s.user_b().points();
        let mut count = 0;
        for xa in 0..8 {
            for ya in 0..8 {
                for xb in 0..2 {
                    for yb in 0..2 {
                        if xa != ya && xb != yb && ((a[xa] - a[ya]) + h.value * (b[xb] - b[yb])).norm() < 1e-9 {
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(cons.pairs.len() * 2, count);
    }

    #[test]
    fn origin_is_irremovable() {
        let s = scheme(4, 2);
        let cons = singularity_constraints(&SingularFadeState::origin(), &s);
        assert!(cons.irremovable && cons.pairs.is_empty());
        assert_eq!(SingularFadeState::origin().to_string(), "SFS:origin");
    }

    #[test]
    fn rotation_walks_the_ring() {
        let s = scheme(8, 4);
        for h in &enumerate_sfs(&s)[1..] {
            let r = rotate_sfs(h, 1, &s);
            let expect = h.value * Complex64::from_polar(1.0, 2.0 * PI / 8.0);
            assert!((r.value - expect).norm() < 1e-12);
            assert_eq!(rotate_sfs(&r, -1, &s).ring, h.ring);
        }
    }
}
