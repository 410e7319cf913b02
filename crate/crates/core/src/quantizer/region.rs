//! Per-state regions, the analytic classifier and raster export.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fmt::num;
use crate::psk::{SchemePair, SET_TOL};
use crate::sfs::{rotate_sfs, Ring, SingularFadeState};

use super::ci::{ci_region_spec, ext_radius, CiRegionSpec};
use super::{pairwise_boundary_with, slot, HalfRegion, Quantizer, RegionCurve, Verdict};

/// Where the relay should stand for a fade state `h` to be the selected state.
#[derive(Debug, Clone, PartialEq)]
pub struct SfsRegion {
    pub sfs: SingularFadeState,
    /// The two rays at `arg h -+ 2*pi/(2*M1)`, each kept on `h`'s side.
    pub wedge: [HalfRegion; 2],
    /// Transition curves against states of a different radius on the three
    /// rays `arg h`, `arg h -+ pi/M1`.
    pub boundaries: Vec<(SingularFadeState, HalfRegion)>,
    /// Inside the external-region circle around `h`.
    pub envelope: HalfRegion,
}

impl SfsRegion {
    pub fn contains(&self, z: Complex64) -> bool {
        self.wedge.iter().all(|w| w.contains(z))
            && self.envelope.contains(z)
            && self.boundaries.iter().all(|(_, b)| b.contains(z))
    }

    pub fn curves(&self) -> impl Iterator<Item = &RegionCurve> {
        self.wedge
            .iter()
            .chain(std::iter::once(&self.envelope))
            .chain(self.boundaries.iter().map(|(_, b)| b))
            .map(|h| &h.curve)
    }

    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        self.curves().fold(f64::INFINITY, |m, c| m.min(c.distance(z)))
    }
}

fn same_ray(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
    d < 1e-9 || 2.0 * std::f64::consts::PI - d < 1e-9
}

fn region_with(q: &Quantizer, h: &SingularFadeState) -> Result<SfsRegion> {
    let ring = h.ring.ok_or_else(|| Error::OriginSfs("the origin has no map region".into()))?;
    let scheme = q.scheme();
    let half = slot(scheme) / 2.0;
    let a = h.theta;
    let ray = |phi: f64| {
        let curve = RegionCurve::line(-phi.sin(), phi.cos(), 0.0).expect("unit normal");
        HalfRegion::containing(curve, h.value)
    };
    let wedge = [ray(a - half), ray(a + half)];
    let mut boundaries = Vec::new();
    for other in q.sfs() {
        if (other.gamma - h.gamma).abs() < SET_TOL {
            continue;
        }
        if ![a - half, a, a + half].iter().any(|&r| same_ray(other.theta, r)) {
            continue;
        }
        let curve = pairwise_boundary_with(q, h, other)?;
        boundaries.push((*other, HalfRegion::containing(curve, h.value)));
    }
    let envelope = HalfRegion {
        curve: RegionCurve::circle(h.value, ext_radius(scheme, ring.n2))?,
        negative: true,
    };
    Ok(SfsRegion { sfs: *h, wedge, boundaries, envelope })
}

/// The analytic region of a nonzero singular fade state.
pub fn region_for_sfs(h: &SingularFadeState, scheme: &SchemePair) -> Result<SfsRegion> {
    region_with(&Quantizer::new(scheme), h)
}

/// One cell's verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    External,
    Internal,
    Sfs(Ring),
    /// The analytic description left the point uncovered.
    Unclassified,
}

impl From<Verdict> for Region {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::ExternalCi => Region::External,
            Verdict::InternalCi => Region::Internal,
            Verdict::UseSfsMap { sfs, .. } => sfs.ring.map_or(Region::Unclassified, Region::Sfs),
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::External => write!(f, "EXT"),
            Region::Internal => write!(f, "INT"),
            Region::Sfs(r) => write!(f, "SFS:{},{},{}", r.n1, r.n2, r.l),
            Region::Unclassified => write!(f, "NONE"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub region: Region,
    /// Distance to the nearest curve consulted while classifying.
    pub boundary_distance: f64,
}

/// Classifies fade states from the closed-form curves alone, using the
/// `2*pi/M1` rotational symmetry to test only a handful of regions per point.
#[derive(Debug, Clone)]
pub struct AnalyticClassifier {
    scheme: SchemePair,
    ci: CiRegionSpec,
    /// Regions of the states at phase 0.
    on_axis: Vec<SfsRegion>,
    /// Regions of the states at phase `pi/M1`.
    off_axis: Vec<SfsRegion>,
}

impl AnalyticClassifier {
    pub fn new(scheme: &SchemePair) -> Result<Self> {
        let q = Quantizer::new(scheme);
        let half = slot(scheme) / 2.0;
        let mut on_axis = Vec::new();
        let mut off_axis = Vec::new();
        for h in q.sfs() {
            if same_ray(h.theta, 0.0) {
                on_axis.push(region_with(&q, h)?);
            } else if same_ray(h.theta, half) {
                off_axis.push(region_with(&q, h)?);
            }
        }
        Ok(Self { scheme: scheme.clone(), ci: ci_region_spec(scheme), on_axis, off_axis })
    }

    pub fn ci(&self) -> &CiRegionSpec {
        &self.ci
    }

    pub fn classify(&self, z: Complex64) -> Classification {
        let step = slot(&self.scheme);
        let k = (z.arg() / step).round() as isize;
        let base = z * Complex64::from_polar(1.0, -(k as f64) * step);
        let (off_point, off_k) = if base.arg() >= 0.0 {
            (base, k)
        } else {
            (base * Complex64::from_polar(1.0, step), k - 1)
        };
        let mut dist = self.ci.internal.boundary_distance(z).min(self.ci.external.boundary_distance(z));
        for r in &self.on_axis {
            dist = dist.min(r.boundary_distance(base));
        }
        for r in &self.off_axis {
            dist = dist.min(r.boundary_distance(off_point));
        }
        let found = |regions: &[SfsRegion], p: Complex64, k: isize| {
            regions
                .iter()
                .find(|r| r.contains(p))
                .map(|r| Region::Sfs(rotate_sfs(&r.sfs, k, &self.scheme).ring.expect("nonzero")))
        };
        let region = if self.ci.internal.contains(z) {
            Region::Internal
        } else if let Some(r) = found(&self.on_axis, base, k).or_else(|| found(&self.off_axis, off_point, off_k)) {
            r
        } else if self.ci.external.contains(z) {
            Region::External
        } else {
            Region::Unclassified
        };
        Classification { region, boundary_distance: dist }
    }
}

/// One-off analytic classification.
pub fn classify(z: Complex64, scheme: &SchemePair) -> Result<Classification> {
    Ok(AnalyticClassifier::new(scheme)?.classify(z))
}

/// Cell-centred sampling of `[xmin, xmax] x [ymin, ymax]` at `n x n` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64, n: usize) -> Result<Self> {
        let finite = [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite());
        if !finite || xmin >= xmax || ymin >= ymax {
            return Err(Error::InvalidGrid(format!("bounds [{xmin}, {xmax}] x [{ymin}, {ymax}]")));
        }
        if n == 0 || n > 20_000 {
            return Err(Error::InvalidGrid(format!("resolution {n} not in 1..=20000")));
        }
        Ok(Self { xmin, xmax, ymin, ymax, n })
    }

    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, -half_width, half_width, n)
    }

    /// Centre of column `i`, row `j` (row 0 at `ymin`).
    pub fn center(&self, i: usize, j: usize) -> Complex64 {
        let n = self.n as f64;
        Complex64::new(
            self.xmin + (i as f64 + 0.5) * (self.xmax - self.xmin) / n,
            self.ymin + (j as f64 + 0.5) * (self.ymax - self.ymin) / n,
        )
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.n).flat_map(move |j| (0..self.n).map(move |i| self.center(i, j)))
    }
}

/// Row-major labels over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub grid: Grid,
    pub labels: Vec<Region>,
}

/// Brute-force selection at each cell centre.
pub fn rasterize(scheme: &SchemePair, grid: Grid) -> Raster {
    let q = Quantizer::new(scheme);
    let labels = (0..grid.n)
        .into_par_iter()
        .flat_map_iter(|j| {
            let q = &q;
            (0..grid.n).map(move |i| Region::from(q.select(grid.center(i, j)).verdict))
        })
        .collect();
    Raster { grid, labels }
}

/// Analytic classification at each cell centre.
pub fn classify_grid(scheme: &SchemePair, grid: Grid) -> Result<Vec<Classification>> {
    let c = AnalyticClassifier::new(scheme)?;
    Ok((0..grid.n)
        .into_par_iter()
        .flat_map_iter(|j| {
            let c = &c;
            (0..grid.n).map(move |i| c.classify(grid.center(i, j)))
        })
        .collect())
}

/// Cell counts of an analytic/brute-force comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Agreement {
    pub cells: usize,
    /// Within the margin of a consulted curve; not compared.
    pub excluded: usize,
    pub mismatched: usize,
    /// Compared cells the analytic description left uncovered (also counted as mismatched).
    pub unclassified: usize,
}

pub fn compare_with_oracle(scheme: &SchemePair, grid: Grid, margin: f64) -> Result<(Raster, Agreement)> {
    let raster = rasterize(scheme, grid);
    let analytic = classify_grid(scheme, grid)?;
    let mut agreement = Agreement { cells: raster.labels.len(), excluded: 0, mismatched: 0, unclassified: 0 };
    for (oracle, a) in raster.labels.iter().zip(&analytic) {
        if a.boundary_distance < margin {
            agreement.excluded += 1;
            continue;
        }
        if a.region == Region::Unclassified {
            agreement.unclassified += 1;
        }
        if a.region != *oracle {
            agreement.mismatched += 1;
        }
    }
    Ok((raster, agreement))
}

/// CSV with header `x,y,label`.
pub fn raster_to_csv(r: &Raster) -> String {
    let mut out = String::from("x,y,label\n");
    for (p, label) in r.grid.points().zip(&r.labels) {
        out.push_str(&format!("{},{},{}\n", num(p.re), num(p.im), label));
    }
    out
}

fn push_curve(out: &mut Vec<RegionCurve>, c: RegionCurve) {
    if !out.iter().any(|o| o.approx_eq(&c, 1e-9)) {
        out.push(c);
    }
}

/// Every distinct curve of the analytic partition.
pub fn boundary_curves(scheme: &SchemePair) -> Result<Vec<RegionCurve>> {
    let q = Quantizer::new(scheme);
    let ci = ci_region_spec(scheme);
    let mut out = Vec::new();
    for h in q.sfs() {
        for c in region_with(&q, h)?.curves() {
            push_curve(&mut out, *c);
        }
    }
    for h in &ci.internal.constraints {
        push_curve(&mut out, h.curve);
    }
    push_curve(&mut out, RegionCurve::Circle { center: Complex64::new(0.0, 0.0), radius: 1.0 });
    Ok(out)
}

/// JSON list of `{kind, center_re, center_im, radius}` or `{kind, a, b, c}`.
pub fn boundaries_to_json(curves: &[RegionCurve]) -> String {
    let items: Vec<_> = curves
        .iter()
        .map(|c| match *c {
            RegionCurve::Circle { center, radius } => {
                json!({"kind": "circle", "center_re": center.re, "center_im": center.im, "radius": radius})
            }
            RegionCurve::Line { a, b, c } => json!({"kind": "line", "a": a, "b": b, "c": c}),
        })
        .collect();
    serde_json::to_string_pretty(&items).expect("curves serialize")
}
