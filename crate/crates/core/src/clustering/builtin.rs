//! The tabulated QPSK-BPSK and 8PSK-BPSK map libraries.
//!
//! The tables are written against a BPSK alphabet `{+1, -1}` and an A-side
//! index that runs a quarter turn behind the constellation used everywhere
//! else in this crate. Converting a printed table means shifting A's index by
//! `M1/4` and renaming labels so that the first row stays the identity; the
//! clustering itself is unchanged by the renaming.

use crate::error::{Error, Result};
use crate::psk::SchemePair;

use super::{ClusterMap, MapLibrary};

/// A map exactly as tabulated, with the fade states it is listed as removing.
#[derive(Debug, Clone, PartialEq)]
pub struct PrintedTable {
    pub name: &'static str,
    /// Second row; the first row is `0..M1`.
    pub second_row: &'static [usize],
    /// `(gamma, theta)` in the table's frame, empty when not listed per map.
    pub removes: Vec<(f64, f64)>,
}

const QPSK_BPSK: [[usize; 4]; 3] = [[1, 0, 3, 2], [3, 2, 1, 0], [2, 3, 0, 1]];

const EIGHT_BPSK: [[usize; 8]; 8] = [
    [1, 5, 6, 7, 3, 4, 2, 0],
    [3, 0, 1, 2, 5, 6, 7, 4],
    [7, 2, 3, 4, 1, 0, 5, 6],
    [2, 7, 0, 5, 6, 3, 4, 1],
    [6, 3, 4, 1, 2, 7, 0, 5],
    [5, 4, 7, 6, 1, 0, 3, 2],
    [3, 6, 5, 0, 7, 2, 1, 4],
    [4, 5, 6, 7, 0, 1, 2, 3],
];

const NAMES: [&str; 8] = ["E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8"];

/// The tables as printed, for schemes that have one.
pub fn printed_tables(scheme: &SchemePair) -> Result<Vec<PrintedTable>> {
    use std::f64::consts::{FRAC_1_SQRT_2, PI};
    match (scheme.m1(), scheme.m2()) {
        (4, 2) => {
            let removes = [
                vec![(FRAC_1_SQRT_2, 0.0), (FRAC_1_SQRT_2, PI)],
                vec![(FRAC_1_SQRT_2, PI / 2.0), (FRAC_1_SQRT_2, 3.0 * PI / 2.0)],
                (0..4).map(|k| (1.0, (2 * k + 1) as f64 * PI / 4.0)).collect(),
            ];
            Ok(QPSK_BPSK
                .iter()
                .zip(removes)
                .enumerate()
                .map(|(i, (row, removes))| PrintedTable { name: NAMES[i], second_row: row, removes })
                .collect())
        }
        (8, 2) => Ok(EIGHT_BPSK
            .iter()
            .enumerate()
            .map(|(i, row)| PrintedTable { name: NAMES[i], second_row: row, removes: Vec::new() })
            .collect()),
        (m1, m2) => Err(Error::NoBuiltin(m1, m2)),
    }
}

fn shift(scheme: &SchemePair) -> usize {
    scheme.m1() / 4
}

/// Converts printed cells into this crate's frame.
fn from_printed(scheme: &SchemePair, printed: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let m1 = scheme.m1();
    let s = shift(scheme);
    let mut cells = vec![vec![0; m1]; printed.len()];
    for (b, row) in printed.iter().enumerate() {
        for (t, &l) in row.iter().enumerate() {
            cells[b][(t + s) % m1] = (l + s) % m1;
        }
    }
    cells
}

/// Inverse of the frame conversion applied by [`builtin_library`].
pub fn to_printed_frame(m: &ClusterMap) -> Vec<Vec<usize>> {
    let scheme = m.scheme();
    let m1 = scheme.m1();
    let s = shift(scheme);
    m.cells()
        .iter()
        .map(|row| (0..m1).map(|t| (row[(t + s) % m1] + m1 - s) % m1).collect())
        .collect()
}

/// The tabulated library for `(4, 2)` or `(8, 2)`, converted to this crate's frame.
pub fn builtin_library(scheme: &SchemePair) -> Result<MapLibrary> {
    let maps = printed_tables(scheme)?
        .iter()
        .map(|t| {
            let printed = vec![(0..scheme.m1()).collect(), t.second_row.to_vec()];
            ClusterMap::new(scheme.clone(), from_printed(scheme, &printed))
        })
        .collect::<Result<Vec<_>>>()?;
    MapLibrary::new(scheme.clone(), maps)
}
