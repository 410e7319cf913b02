//! Symmetric PSK constellations, bit labelling and difference constellations.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for set membership and deduplication of complex values.
pub const SET_TOL: f64 = 1e-9;

/// Reduces a phase to `[-pi, pi)`.
pub fn wrap_phase(theta: f64) -> f64 {
    let t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can return exactly 2*pi for tiny negative inputs
    if t >= PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Symmetric `M`-PSK signal set with points `exp(j(2k+1)pi/M)`, `k = 0..M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PskConstellation {
    order: usize,
    bits: usize,
    points: Vec<Complex64>,
}

impl PskConstellation {
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::InvalidOrder(order));
        }
        let points = (0..order)
            .map(|k| Complex64::from_polar(1.0, (2 * k + 1) as f64 * PI / order as f64))
            .collect();
        Ok(Self { order, bits: order.trailing_zeros() as usize, points })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Index of the point minimising `|y - gain * s|`; lowest index wins ties.
    pub fn detect(&self, y: Complex64, gain: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, &s) in self.points.iter().enumerate() {
            let d = (y - gain * s).norm_sqr();
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    }
}

/// Builds the symmetric `M`-PSK constellation.
pub fn make_psk(order: usize) -> Result<PskConstellation> {
    PskConstellation::new(order)
}

/// How bit tuples are assigned to symbol indices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Labeling {
    /// Bits read MSB first as a binary number give the symbol index.
    #[default]
    Natural,
    /// Symbol `k` carries the reflected Gray code of `k`.
    Gray,
}

impl Labeling {
    /// Bit pattern (as an integer, MSB first) carried by symbol `index`.
    pub fn bits_of(self, index: usize) -> usize {
        match self {
            Labeling::Natural => index,
            Labeling::Gray => index ^ (index >> 1),
        }
    }

    /// Symbol index carrying the bit pattern `value`.
    pub fn index_of(self, value: usize) -> usize {
        match self {
            Labeling::Natural => value,
            Labeling::Gray => {
                let mut n = value;
                let mut shift = value >> 1;
                while shift != 0 {
                    n ^= shift;
                    shift >>= 1;
                }
                n
            }
        }
    }
}

/// Packs a bit tuple (MSB first) into an integer.
pub fn bits_to_value(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b & 1))
}

/// Maps a `lambda`-bit tuple to a symbol with the natural binary labelling.
pub fn map_bits(bits: &[u8], c: &PskConstellation) -> Result<Complex64> {
    map_bits_with(bits, c, Labeling::Natural).map(|k| c.point(k))
}

/// Maps a bit tuple to a symbol index under the given labelling.
pub fn map_bits_with(bits: &[u8], c: &PskConstellation, labeling: Labeling) -> Result<usize> {
    if bits.len() != c.bits_per_symbol() {
        return Err(Error::BitLength { expected: c.bits_per_symbol(), got: bits.len() });
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::Parse(format!("bit tuple {bits:?} holds a non-binary digit")));
    }
    Ok(labeling.index_of(bits_to_value(bits)))
}

/// A nonzero element of a difference constellation with its `(k, n)` index.
///
/// `n` is the index distance `l - m` in `1..=M/2` and `k` the phase slot in
/// `0..M`. With `psi = 2k*pi/M` for odd `n` and `(2k+1)*pi/M` for even `n`,
/// the value is `j * 2 sin(n*pi/M) * exp(j*psi)`, which is exactly
/// `s_l - s_m`. The common factor `j` cancels in every ratio `-d1/d2` and in
/// every magnitude `|d1 + h d2|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferencePoint {
    pub value: Complex64,
    pub k: usize,
    pub n: usize,
    pub magnitude: f64,
}

impl DifferencePoint {
    pub fn new(order: usize, k: usize, n: usize) -> Self {
        let m = order as f64;
        let magnitude = 2.0 * (n as f64 * PI / m).sin();
        let psi = if n % 2 == 1 {
            2.0 * k as f64 * PI / m
        } else {
            (2 * k + 1) as f64 * PI / m
        };
        let value = Complex64::from_polar(magnitude, psi + PI / 2.0);
        Self { value, k, n, magnitude }
    }
}

/// The difference constellation `{s_l - s_m}`: zero plus `M^2/2` indexed points.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceSet {
    order: usize,
    points: Vec<DifferencePoint>,
}

impl DifferenceSet {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Nonzero points ordered by `(n, k)`.
    pub fn nonzero(&self) -> &[DifferencePoint] {
        &self.points
    }

    /// All values, zero first.
    pub fn values(&self) -> Vec<Complex64> {
        std::iter::once(Complex64::new(0.0, 0.0))
            .chain(self.points.iter().map(|p| p.value))
            .collect()
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.norm() < SET_TOL || self.points.iter().any(|p| (p.value - z).norm() < SET_TOL)
    }
}

/// Closed-form difference constellation of a symmetric PSK set.
pub fn difference_constellation(c: &PskConstellation) -> DifferenceSet {
    let m = c.order();
    let points = (1..=m / 2)
        .flat_map(|n| (0..m).map(move |k| DifferencePoint::new(m, k, n)))
        .collect();
    DifferenceSet { order: m, points }
}

/// The pair of constellations used by A (order `M1`) and B (order `M2`).
#[derive(Debug, Clone, PartialEq)]
pub struct SchemePair {
    user_a: PskConstellation,
    user_b: PskConstellation,
    delta: usize,
}

impl SchemePair {
    pub fn new(m1: usize, m2: usize) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidScheme { m1, m2, reason: reason.to_string() };
        let user_a = PskConstellation::new(m1).map_err(|_| invalid("M1 must be a power of two >= 2"))?;
        let user_b = PskConstellation::new(m2).map_err(|_| invalid("M2 must be a power of two >= 2"))?;
        if m1 < m2 {
            return Err(invalid("user A must use the larger constellation (M1 >= M2)"));
        }
        let delta = user_a.bits_per_symbol() - user_b.bits_per_symbol();
        Ok(Self { user_a, user_b, delta })
    }

    pub fn user_a(&self) -> &PskConstellation {
        &self.user_a
    }

    pub fn user_b(&self) -> &PskConstellation {
        &self.user_b
    }

    pub fn m1(&self) -> usize {
        self.user_a.order()
    }

    pub fn m2(&self) -> usize {
        self.user_b.order()
    }

    pub fn lambda1(&self) -> usize {
        self.user_a.bits_per_symbol()
    }

    pub fn lambda2(&self) -> usize {
        self.user_b.bits_per_symbol()
    }

    /// `log2(M1 / M2)`.
    pub fn delta(&self) -> usize {
        self.delta
    }
}

impl fmt::Display for SchemePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}PSK-{}PSK", self.m1(), self.m2())
    }
}

impl Serialize for SchemePair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.m1(), self.m2()].serialize(s)
    }
}

impl<'de> Deserialize<'de> for SchemePair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [m1, m2] = <[usize; 2]>::deserialize(d)?;
        SchemePair::new(m1, m2).map_err(serde::de::Error::custom)
    }
}
