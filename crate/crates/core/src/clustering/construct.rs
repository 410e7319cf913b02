//! Latin-rectangle completion under singularity-removal constraints.

use crate::error::{Error, Result};
use crate::psk::SchemePair;
use crate::sfs::{enumerate_sfs, singularity_constraints, Cell, SingularFadeState};

use super::{removes_sfs, ClusterMap, MapLibrary};

/// Search nodes allowed per label budget before trying one more label.
const NODE_BUDGET: usize = 50_000;

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Cells merged into groups, with the conflict graph between groups.
struct Groups {
    of_cell: Vec<usize>,
    adjacency: Vec<Vec<bool>>,
    degree: Vec<usize>,
}

fn build_groups(scheme: &SchemePair, pairs: &[(Cell, Cell)]) -> Result<Groups> {
    let (m1, m2) = (scheme.m1(), scheme.m2());
    let idx = |(a, b): Cell| b * m1 + a;
    let mut uf = UnionFind((0..m1 * m2).collect());
    for &(p, q) in pairs {
        if p.0 >= m1 || q.0 >= m1 || p.1 >= m2 || q.1 >= m2 {
            return Err(Error::Infeasible(format!("cell {p:?} or {q:?} is outside a {m2}x{m1} map")));
        }
        uf.union(idx(p), idx(q));
    }
    let mut roots: Vec<usize> = (0..m1 * m2).map(|c| uf.find(c)).collect();
    let mut ids = roots.clone();
    ids.sort_unstable();
    ids.dedup();
    for r in roots.iter_mut() {
        *r = ids.binary_search(r).expect("root present");
    }
    let n = ids.len();
    let mut adjacency = vec![vec![false; n]; n];
    for c in 0..m1 * m2 {
        for d in c + 1..m1 * m2 {
            let same_line = c % m1 == d % m1 || c / m1 == d / m1;
            if !same_line {
                continue;
            }
            let (g, h) = (roots[c], roots[d]);
            if g == h {
                return Err(Error::Infeasible(format!(
                    "cells ({}, {}) and ({}, {}) must share a label but lie in one row or column",
                    c % m1,
                    c / m1,
                    d % m1,
                    d / m1
                )));
            }
            adjacency[g][h] = true;
            adjacency[h][g] = true;
        }
    }
    let degree = adjacency.iter().map(|r| r.iter().filter(|&&x| x).count()).collect();
    Ok(Groups { of_cell: roots, adjacency, degree })
}

struct Search<'a> {
    groups: &'a Groups,
    colour: Vec<Option<usize>>,
    limit: usize,
    nodes: usize,
}

impl Search<'_> {
    fn saturation(&self, g: usize) -> usize {
        let mut seen = vec![false; self.limit];
        for (h, &adj) in self.groups.adjacency[g].iter().enumerate() {
            if let (true, Some(c)) = (adj, self.colour[h]) {
                seen[c] = true;
            }
        }
        seen.iter().filter(|&&s| s).count()
    }

    fn next_group(&self) -> Option<usize> {
        (0..self.colour.len())
            .filter(|&g| self.colour[g].is_none())
            .max_by_key(|&g| (self.saturation(g), self.groups.degree[g], std::cmp::Reverse(g)))
    }

    fn run(&mut self, used: usize) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            return None;
        }
        let Some(g) = self.next_group() else {
            return Some(true);
        };
        let top = (used + 1).min(self.limit);
        for c in 0..top {
            let clash = self.groups.adjacency[g]
                .iter()
                .enumerate()
                .any(|(h, &adj)| adj && self.colour[h] == Some(c));
            if clash {
                continue;
            }
            self.colour[g] = Some(c);
            match self.run(used.max(c + 1)) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
        }
        self.colour[g] = None;
        Some(false)
    }
}

fn colour_with(scheme: &SchemePair, groups: &Groups, limit: usize) -> Option<ClusterMap> {
    let n = groups.degree.len();
    let mut s = Search { groups, colour: vec![None; n], limit, nodes: 0 };
    if s.run(0) != Some(true) {
        return None;
    }
    let m1 = scheme.m1();
    // relabel by first appearance so that the first row reads 0..M1
    let mut rename = vec![usize::MAX; limit];
    let mut next = 0;
    let mut cells = vec![vec![0; m1]; scheme.m2()];
    for (c, &g) in groups.of_cell.iter().enumerate() {
        let col = s.colour[g].expect("coloured");
        if rename[col] == usize::MAX {
            rename[col] = next;
            next += 1;
        }
        cells[c / m1][c % m1] = rename[col];
    }
    ClusterMap::new(scheme.clone(), cells).ok()
}

/// Builds an exclusive-law map in which every listed pair shares a label,
/// trying label counts from `max(M1, M2)` up to `max_labels`.
pub fn construct_map(scheme: &SchemePair, pairs: &[(Cell, Cell)], max_labels: usize) -> Result<ClusterMap> {
    let groups = build_groups(scheme, pairs)?;
    let lo = scheme.m1().max(scheme.m2());
    let hi = max_labels.min(scheme.m1() * scheme.m2());
    for limit in lo..=hi {
        if let Some(m) = colour_with(scheme, &groups, limit) {
            return Ok(m);
        }
    }
    Err(Error::Infeasible(format!("no exclusive-law completion with at most {hi} labels")))
}

/// A map honouring every singularity-removal constraint of `h`.
pub fn construct_map_for_sfs(h: &SingularFadeState, scheme: &SchemePair) -> Result<ClusterMap> {
    if h.is_origin() {
        return Err(Error::OriginSfs("no map removes the singular fade state at zero".into()));
    }
    let c = singularity_constraints(h, scheme);
    construct_map(scheme, &c.pairs, scheme.m1() * scheme.m2())
}

/// Greedy cover: each new map starts from the first state not yet removed and
/// absorbs the constraints of further states while its label count does not grow.
pub fn construct_library(scheme: &SchemePair) -> Result<MapLibrary> {
    let sfs: Vec<_> = enumerate_sfs(scheme).into_iter().skip(1).collect();
    let mut covered = vec![false; sfs.len()];
    let mut maps: Vec<ClusterMap> = Vec::new();
    while let Some(first) = covered.iter().position(|c| !c) {
        let mut pairs = singularity_constraints(&sfs[first], scheme).pairs;
        let mut map = construct_map(scheme, &pairs, scheme.m1() * scheme.m2())?;
        let budget = map.label_count();
        for (i, h) in sfs.iter().enumerate().skip(first + 1) {
            if covered[i] || removes_sfs(&map, h) {
                continue;
            }
            let mut trial = pairs.clone();
            trial.extend(singularity_constraints(h, scheme).pairs);
            if let Ok(m) = construct_map(scheme, &trial, budget) {
                pairs = trial;
                map = m;
            }
        }
        for (i, h) in sfs.iter().enumerate() {
            if removes_sfs(&map, h) {
                covered[i] = true;
            }
        }
        if !covered[first] {
            return Err(Error::Infeasible(format!("constructed map does not remove {}", sfs[first])));
        }
        maps.push(map);
    }
    MapLibrary::new(scheme.clone(), maps)
}
