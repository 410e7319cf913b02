//! Latin-rectangle relay maps.
//!
//! A map is stored row-major by B's symbol: `cells[x_b][x_a]` is the cluster
//! label broadcast for the pair `(x_a, x_b)`.

mod builtin;
mod construct;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psk::SchemePair;
use crate::sfs::{enumerate_sfs, SingularFadeState};

pub use builtin::{builtin_library, printed_tables, to_printed_frame, PrintedTable};
pub use construct::{construct_library, construct_map, construct_map_for_sfs};

/// Minimum cluster distance above which a map counts as removing a singular fade state.
pub const REMOVAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMap {
    scheme: SchemePair,
    cells: Vec<Vec<usize>>,
    label_count: usize,
}

impl ClusterMap {
    /// Checks dimensions and that the labels are exactly `0..label_count`.
    /// The exclusive law is checked separately by [`check_exclusive_law`].
    pub fn new(scheme: SchemePair, cells: Vec<Vec<usize>>) -> Result<Self> {
        let (m1, m2) = (scheme.m1(), scheme.m2());
        if cells.len() != m2 {
            return Err(Error::InvalidMap(format!("expected {m2} rows, got {}", cells.len())));
        }
        if let Some((b, row)) = cells.iter().enumerate().find(|(_, r)| r.len() != m1) {
            return Err(Error::InvalidMap(format!("row {b} has {} cells, expected {m1}", row.len())));
        }
        let max = cells.iter().flatten().copied().max().unwrap_or(0);
        if max >= m1 * m2 {
            return Err(Error::InvalidMap(format!("label {max} exceeds {} cells", m1 * m2)));
        }
        let mut seen = vec![false; max + 1];
        for &l in cells.iter().flatten() {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidMap(format!("labels must be 0..{}, {missing} is unused", max + 1)));
        }
        Ok(Self { scheme, cells, label_count: max + 1 })
    }

    pub fn scheme(&self) -> &SchemePair {
        &self.scheme
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn label(&self, xa: usize, xb: usize) -> usize {
        self.cells[xb][xa]
    }

    /// Exclusive law plus `max(M1, M2) <= label_count <= M1*M2`.
    pub fn validate(&self) -> Result<()> {
        if !check_exclusive_law(self) {
            return Err(Error::InvalidMap("a label repeats within a row or column".into()));
        }
        let lo = self.scheme.m1().max(self.scheme.m2());
        if self.label_count < lo {
            return Err(Error::InvalidMap(format!("{} labels, need at least {lo}", self.label_count)));
        }
        Ok(())
    }

    /// Column `x_a` of row `x_b` carrying `label`, if any.
    pub fn find_in_row(&self, xb: usize, label: usize) -> Option<usize> {
        self.cells[xb].iter().position(|&l| l == label)
    }

    /// Row `x_b` of column `x_a` carrying `label`, if any.
    pub fn find_in_column(&self, xa: usize, label: usize) -> Option<usize> {
        self.cells.iter().position(|row| row[xa] == label)
    }
}

/// True iff no label repeats in any row or any column.
pub fn check_exclusive_law(m: &ClusterMap) -> bool {
    let rows_ok = m.cells.iter().all(|row| {
        let mut seen = vec![false; m.label_count];
        row.iter().all(|&l| !std::mem::replace(&mut seen[l], true))
    });
    rows_ok
        && (0..m.scheme.m1()).all(|a| {
            let mut seen = vec![false; m.label_count];
            m.cells.iter().all(|row| !std::mem::replace(&mut seen[row[a]], true))
        })
}

/// Minimum of `|(x_A - x'_A) + h (x_B - x'_B)|` over pairs in different clusters.
pub fn min_cluster_distance_at(m: &ClusterMap, h: Complex64) -> f64 {
    let a = m.scheme.user_a().points();
    let b = m.scheme.user_b().points();
    let pts: Vec<(Complex64, usize)> = m
        .cells
        .iter()
        .enumerate()
        .flat_map(|(xb, row)| row.iter().enumerate().map(move |(xa, &l)| (a[xa] + h * b[xb], l)))
        .collect();
    let mut best = f64::INFINITY;
    for (i, &(p, l)) in pts.iter().enumerate() {
        for &(q, k) in &pts[i + 1..] {
            if l != k {
                best = best.min((p - q).norm_sqr());
            }
        }
    }
    best.sqrt()
}

pub fn min_cluster_distance(m: &ClusterMap, gamma: f64, theta: f64) -> f64 {
    min_cluster_distance_at(m, Complex64::from_polar(gamma, theta))
}

/// True iff the map keeps a positive cluster distance at `h`.
pub fn removes_sfs(m: &ClusterMap, h: &SingularFadeState) -> bool {
    min_cluster_distance_at(m, h.value) > REMOVAL_TOL
}

/// Number of broadcast channel uses needed to send one label.
pub fn broadcast_length(m: &ClusterMap) -> usize {
    let bits = (usize::BITS - (m.label_count.max(2) - 1).leading_zeros()) as usize;
    bits.div_ceil(m.scheme.lambda2())
}

/// An ordered set of maps that jointly removes every nonzero singular fade state.
#[derive(Debug, Clone, PartialEq)]
pub struct MapLibrary {
    scheme: SchemePair,
    maps: Vec<ClusterMap>,
    sfs: Vec<SingularFadeState>,
    coverage: Vec<usize>,
}

impl MapLibrary {
    pub fn new(scheme: SchemePair, maps: Vec<ClusterMap>) -> Result<Self> {
        for (i, m) in maps.iter().enumerate() {
            if m.scheme != scheme {
                return Err(Error::InvalidMap(format!("map {i} is for {}, library is {scheme}", m.scheme)));
            }
            m.validate().map_err(|e| Error::InvalidMap(format!("map {i}: {e}")))?;
        }
        let sfs: Vec<_> = enumerate_sfs(&scheme).into_iter().skip(1).collect();
        let cov = coverage(&maps, &sfs);
        if let Some(i) = cov.iter().position(Option::is_none) {
            return Err(Error::InvalidMap(format!("no map removes {}", sfs[i])));
        }
        let coverage = cov.into_iter().flatten().collect();
        Ok(Self { scheme, maps, sfs, coverage })
    }

    pub fn scheme(&self) -> &SchemePair {
        &self.scheme
    }

    pub fn maps(&self) -> &[ClusterMap] {
        &self.maps
    }

    /// Nonzero singular fade states in enumeration order.
    pub fn sfs(&self) -> &[SingularFadeState] {
        &self.sfs
    }

    /// For each entry of [`MapLibrary::sfs`], the first map removing it.
    pub fn coverage(&self) -> &[usize] {
        &self.coverage
    }
}

/// First map index removing each singular fade state, if any.
pub fn coverage(maps: &[ClusterMap], sfs: &[SingularFadeState]) -> Vec<Option<usize>> {
    sfs.iter().map(|h| maps.iter().position(|m| removes_sfs(m, h))).collect()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    scheme: [usize; 2],
    cells: Vec<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LibraryFile {
    scheme: [usize; 2],
    maps: Vec<Vec<Vec<usize>>>,
}

/// Parses `{"scheme": [M1, M2], "cells": [[...], ...]}`.
pub fn map_from_json(text: &str) -> Result<ClusterMap> {
    let f: MapFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    ClusterMap::new(SchemePair::new(f.scheme[0], f.scheme[1])?, f.cells)
}

pub fn map_to_json(m: &ClusterMap) -> String {
    let f = MapFile { scheme: [m.scheme.m1(), m.scheme.m2()], cells: m.cells.clone() };
    serde_json::to_string(&f).expect("map serializes")
}

/// Parses `{"scheme": [M1, M2], "maps": [cells, ...]}` without checking coverage.
pub fn maps_from_json(text: &str) -> Result<Vec<ClusterMap>> {
    let f: LibraryFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let scheme = SchemePair::new(f.scheme[0], f.scheme[1])?;
    f.maps.into_iter().map(|cells| ClusterMap::new(scheme.clone(), cells)).collect()
}

pub fn library_to_json(lib: &MapLibrary) -> String {
    let f = LibraryFile {
        scheme: [lib.scheme.m1(), lib.scheme.m2()],
        maps: lib.maps.iter().map(|m| m.cells.clone()).collect(),
    };
    serde_json::to_string_pretty(&f).expect("library serializes")
}
