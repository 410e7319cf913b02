//! Monte-Carlo simulation of the two-phase relaying protocol.
//!
//! Noise is `CN(0, 1)` and symbols have unit energy, so a link with SNR `s` dB
//! has channel magnitude `sqrt(10^(s/10))`. The relay to A link is taken at
//! the A-R SNR and the relay to B link at the B-R SNR.

mod config;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{broadcast_length, ClusterMap, MapLibrary};
use crate::error::{Error, Result};
use crate::fmt::num;
use crate::psk::{Labeling, SchemePair};
use crate::quantizer::{Quantizer, Verdict};

pub use config::{LibrarySource, SimSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    /// Fixed magnitudes from the SNRs, B's phase uniform per block.
    Awgn,
    /// Complex Gaussian gains redrawn every block (and every broadcast use).
    Rayleigh,
}

impl ChannelKind {
    /// Default B-R SNR in dB for the kind.
    pub fn default_snr_br_db(self) -> f64 {
        match self {
            ChannelKind::Awgn => 7.0,
            ChannelKind::Rayleigh => 25.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    pub snr_ar_db: f64,
    pub snr_br_db: f64,
    /// Symbols per fade realisation.
    pub block_length: usize,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub channel: ChannelModel,
    pub library: MapLibrary,
    pub max_maps_used: usize,
    pub symbols: u64,
    pub seed: u64,
    pub labeling: Labeling,
}

impl SimConfig {
    pub fn scheme(&self) -> &SchemePair {
        self.library.scheme()
    }

    pub fn validate(&self) -> Result<()> {
        if self.symbols == 0 {
            return Err(Error::config("symbols", "must be at least 1"));
        }
        if self.channel.block_length == 0 {
            return Err(Error::config("block_length", "must be at least 1"));
        }
        let n = self.library.maps().len();
        if self.max_maps_used == 0 || self.max_maps_used > n {
            return Err(Error::config("maps_used", format!("must be in 1..={n}")));
        }
        for (field, v) in [("snr_ar_db", self.channel.snr_ar_db), ("snr_br_db", self.channel.snr_br_db)] {
            if !v.is_finite() {
                return Err(Error::config(field, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Raw tallies; every field sums across blocks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub relay_errors: u64,
    pub relay_trials: u64,
    /// Errors in A's bits as recovered by B.
    pub ab_bit_errors: u64,
    pub ab_bits: u64,
    /// Errors in B's bits as recovered by A.
    pub ba_bit_errors: u64,
    pub ba_bits: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            relay_errors: self.relay_errors + o.relay_errors,
            relay_trials: self.relay_trials + o.relay_trials,
            ab_bit_errors: self.ab_bit_errors + o.ab_bit_errors,
            ab_bits: self.ab_bits + o.ab_bits,
            ba_bit_errors: self.ba_bit_errors + o.ba_bit_errors,
            ba_bits: self.ba_bits + o.ba_bits,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimResult {
    pub rer: f64,
    pub ber_ab: f64,
    pub ber_ba: f64,
    /// `(lambda1 * ber_ab + lambda2 * ber_ba) / (lambda1 + lambda2)`.
    pub ber_avg: f64,
    pub counts: Counts,
}

impl SimResult {
    pub fn from_counts(counts: Counts, scheme: &SchemePair) -> Self {
        let ratio = |e: u64, n: u64| if n == 0 { 0.0 } else { e as f64 / n as f64 };
        let ber_ab = ratio(counts.ab_bit_errors, counts.ab_bits);
        let ber_ba = ratio(counts.ba_bit_errors, counts.ba_bits);
        let (l1, l2) = (scheme.lambda1() as f64, scheme.lambda2() as f64);
        SimResult {
            rer: ratio(counts.relay_errors, counts.relay_trials),
            ber_ab,
            ber_ba,
            ber_avg: (l1 * ber_ab + l2 * ber_ba) / (l1 + l2),
            counts,
        }
    }
}

/// Residuals closer than this to the running best count as ties.
const DECODE_TIE: f64 = 1e-12;

/// Joint ML estimate of `(x_A, x_B)`; the lowest `(a, b)` wins ties.
pub fn ma_phase_decode(y: Complex64, h_a: Complex64, h_b: Complex64, scheme: &SchemePair) -> (usize, usize) {
    let a = scheme.user_a().points();
    let b = scheme.user_b().points();
    let mut best = (0, 0);
    let mut best_d = f64::INFINITY;
    for (i, &sa) in a.iter().enumerate() {
        let r = y - h_a * sa;
        for (k, &sb) in b.iter().enumerate() {
            let d = (r - h_b * sb).norm_sqr();
            if d < best_d - DECODE_TIE {
                best_d = d;
                best = (i, k);
            }
        }
    }
    best
}

/// Relay-side map choice for a fade state.
#[derive(Debug, Clone)]
pub struct Relay {
    quantizer: Quantizer,
    library: MapLibrary,
    max_maps: usize,
}

impl Relay {
    pub fn new(library: &MapLibrary, max_maps: usize) -> Self {
        Self { quantizer: Quantizer::new(library.scheme()), library: library.clone(), max_maps }
    }

    /// Map index for fade state `z`. Clustering-independent states use the map
    /// of the nearest singular fade state; a selected map beyond `max_maps`
    /// falls back to map 0.
    pub fn map_index(&self, z: Complex64) -> usize {
        let sfs_index = match self.quantizer.select(z).verdict {
            Verdict::UseSfsMap { index, .. } => index,
            Verdict::ExternalCi | Verdict::InternalCi => {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (i, h) in self.quantizer.sfs().iter().enumerate() {
                    let d = (z - h.value).norm();
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                best
            }
        };
        let m = self.library.coverage()[sfs_index];
        if m < self.max_maps {
            m
        } else {
            0
        }
    }

    pub fn map(&self, z: Complex64) -> &ClusterMap {
        &self.library.maps()[self.map_index(z)]
    }
}

/// Label the relay broadcasts for `pair` at fade state `z`.
pub fn relay_map_apply(pair: (usize, usize), z: Complex64, library: &MapLibrary, max_maps: usize) -> usize {
    Relay::new(library, max_maps).map(z).label(pair.0, pair.1)
}

/// Splits a label into `N_t` B-constellation symbol indices, most significant first.
pub fn label_to_symbols(label: usize, m: &ClusterMap) -> Vec<usize> {
    let n = broadcast_length(m);
    let bits = m.scheme().lambda2();
    let mask = (1 << bits) - 1;
    (0..n).rev().map(|t| (label >> (t * bits)) & mask).collect()
}

pub fn symbols_to_label(symbols: &[usize], bits_per_symbol: usize) -> usize {
    symbols.iter().fold(0, |acc, &s| (acc << bits_per_symbol) | s)
}

/// Sends `label` over `N_t` uses of B's constellation and detects each use on its own.
/// `gains` and `noise` hold one entry per use.
pub fn bc_phase(label: usize, m: &ClusterMap, gains: &[Complex64], noise: &[Complex64]) -> usize {
    let c = m.scheme().user_b();
    let sent = label_to_symbols(label, m);
    let got: Vec<usize> = sent
        .iter()
        .zip(gains.iter().zip(noise))
        .map(|(&s, (&g, &n))| c.detect(g * c.point(s) + n, g))
        .collect();
    symbols_to_label(&got, m.scheme().lambda2())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum User {
    A,
    B,
}

/// The other user's symbol index given one's own symbol and the received label;
/// `None` when no cell of the map matches.
pub fn user_decode(own: usize, label: usize, m: &ClusterMap, user: User) -> Option<usize> {
    match user {
        User::A => m.find_in_column(own, label),
        User::B => m.find_in_row(own, label),
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

const TAG_MA: u64 = 0x4d41;
const TAG_BC: u64 = 0x4243;

fn block_rng(seed: u64, block: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ tag.rotate_left(32)));
    rng.set_stream(block);
    rng
}

fn cn(rng: &mut ChaCha8Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

struct Runner<'a> {
    cfg: &'a SimConfig,
    relay: Relay,
    snr_ar: f64,
    snr_br: f64,
}

impl Runner<'_> {
    fn bc_gain(&self, rng: &mut ChaCha8Rng, snr: f64, fixed: Complex64) -> Complex64 {
        match self.cfg.channel.kind {
            ChannelKind::Awgn => fixed,
            ChannelKind::Rayleigh => cn(rng, snr),
        }
    }

    fn block(&self, block: u64, len: usize) -> Counts {
        let cfg = self.cfg;
        let scheme = cfg.scheme();
        let mut ma = block_rng(cfg.seed, block, TAG_MA);
        let mut bc = block_rng(cfg.seed, block, TAG_BC);
        let (h_a, h_b, g_a, g_b) = match cfg.channel.kind {
            ChannelKind::Awgn => {
                let theta: f64 = ma.random_range(0.0..std::f64::consts::TAU);
                let ga: f64 = bc.random_range(0.0..std::f64::consts::TAU);
                let gb: f64 = bc.random_range(0.0..std::f64::consts::TAU);
                (
                    Complex64::new(self.snr_ar.sqrt(), 0.0),
                    Complex64::from_polar(self.snr_br.sqrt(), theta),
                    Complex64::from_polar(self.snr_ar.sqrt(), ga),
                    Complex64::from_polar(self.snr_br.sqrt(), gb),
                )
            }
            ChannelKind::Rayleigh => {
                let zero = Complex64::new(0.0, 0.0);
                (cn(&mut ma, self.snr_ar), cn(&mut ma, self.snr_br), zero, zero)
            }
        };
        let map = self.relay.map(h_b / h_a);
        let (l1, l2) = (scheme.lambda1(), scheme.lambda2());
        let n_t = broadcast_length(map);
        let c_a = scheme.user_a();
        let c_b = scheme.user_b();
        let mut counts = Counts::default();
        for _ in 0..len {
            let bits_a = ma.random_range(0..c_a.order());
            let bits_b = ma.random_range(0..c_b.order());
            let xa = cfg.labeling.index_of(bits_a);
            let xb = cfg.labeling.index_of(bits_b);
            let y = h_a * c_a.point(xa) + h_b * c_b.point(xb) + cn(&mut ma, 1.0);
            let (ea, eb) = ma_phase_decode(y, h_a, h_b, scheme);
            let sent = map.label(ea, eb);
            counts.relay_trials += 1;
            counts.relay_errors += u64::from(sent != map.label(xa, xb));

            let mut to_a = Vec::with_capacity(n_t);
            let mut to_b = Vec::with_capacity(n_t);
            let mut noise_a = Vec::with_capacity(n_t);
            let mut noise_b = Vec::with_capacity(n_t);
            for _ in 0..n_t {
                to_a.push(self.bc_gain(&mut bc, self.snr_ar, g_a));
                to_b.push(self.bc_gain(&mut bc, self.snr_br, g_b));
                noise_a.push(cn(&mut bc, 1.0));
                noise_b.push(cn(&mut bc, 1.0));
            }
            let at_a = bc_phase(sent, map, &to_a, &noise_a);
            let at_b = bc_phase(sent, map, &to_b, &noise_b);

            counts.ba_bits += l2 as u64;
            counts.ba_bit_errors += match user_decode(xa, at_a, map, User::A) {
                Some(b) => (cfg.labeling.bits_of(b) ^ bits_b).count_ones() as u64,
                None => l2 as u64,
            };
            counts.ab_bits += l1 as u64;
            counts.ab_bit_errors += match user_decode(xb, at_b, map, User::B) {
                Some(a) => (cfg.labeling.bits_of(a) ^ bits_a).count_ones() as u64,
                None => l1 as u64,
            };
        }
        counts
    }
}

const BLOCKS_PER_TASK: u64 = 1024;

/// Runs the full protocol; identical configs give identical results on any thread count.
pub fn simulate(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let runner = Runner {
        cfg,
        relay: Relay::new(&cfg.library, cfg.max_maps_used),
        snr_ar: db_to_power(cfg.channel.snr_ar_db),
        snr_br: db_to_power(cfg.channel.snr_br_db),
    };
    let bl = cfg.channel.block_length as u64;
    let blocks = cfg.symbols.div_ceil(bl);
    let tasks = blocks.div_ceil(BLOCKS_PER_TASK);
    let counts = (0..tasks)
        .into_par_iter()
        .map(|t| {
            let lo = t * BLOCKS_PER_TASK;
            let hi = (lo + BLOCKS_PER_TASK).min(blocks);
            (lo..hi).fold(Counts::default(), |acc, b| {
                let len = bl.min(cfg.symbols - b * bl) as usize;
                acc + runner.block(b, len)
            })
        })
        .reduce(Counts::default, |a, b| a + b);
    Ok(SimResult::from_counts(counts, cfg.scheme()))
}

/// One [`simulate`] per SNR; point `i` uses seed `seed + i`.
pub fn sweep(template: &SimConfig, snr_ar_db: &[f64]) -> Result<Vec<(f64, SimResult)>> {
    if snr_ar_db.is_empty() {
        return Err(Error::config("snr_ar_db", "needs at least one value"));
    }
    snr_ar_db
        .iter()
        .enumerate()
        .map(|(i, &snr)| {
            let mut cfg = template.clone();
            cfg.channel.snr_ar_db = snr;
            cfg.seed = template.seed.wrapping_add(i as u64);
            simulate(&cfg).map(|r| (snr, r))
        })
        .collect()
}

/// CSV with header `snr_ar_db,rer,ber_ab,ber_ba,ber_avg,symbols`.
pub fn sweep_to_csv(rows: &[(f64, SimResult)]) -> String {
    let mut out = String::from("snr_ar_db,rer,ber_ab,ber_ba,ber_avg,symbols\n");
    for (snr, r) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            num(*snr),
            num(r.rer),
            num(r.ber_ab),
            num(r.ber_ba),
            num(r.ber_avg),
            r.counts.relay_trials
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::builtin_library;
    use crate::sfs::enumerate_sfs;

    fn lib(m1: usize, m2: usize) -> MapLibrary {
        builtin_library(&SchemePair::new(m1, m2).unwrap()).unwrap()
    }

    fn config(library: MapLibrary, snr_ar: f64, maps: usize, symbols: u64) -> SimConfig {
        SimConfig {
            channel: ChannelModel { kind: ChannelKind::Awgn, snr_ar_db: snr_ar, snr_br_db: 7.0, block_length: 1 },
            max_maps_used: maps,
            library,
            symbols,
            seed: 11,
            labeling: Labeling::Natural,
        }
    }

    #[test]
    fn noiseless_decode_is_exact_away_from_singular_states() {
        let s = SchemePair::new(8, 4).unwrap();
        let h_a = Complex64::new(1.3, 0.2);
        let h_b = h_a * Complex64::from_polar(0.83, 0.37);
        for a in 0..8 {
            for b in 0..4 {
                let y = h_a * s.user_a().point(a) + h_b * s.user_b().point(b);
                assert_eq!(ma_phase_decode(y, h_a, h_b, &s), (a, b));
            }
        }
    }

    #[test]
    fn noiseless_decode_at_singular_state_returns_a_colliding_pair() {
        let s = SchemePair::new(4, 2).unwrap();
        let h = enumerate_sfs(&s)[1];
        let cons = crate::sfs::singularity_constraints(&h, &s);
        let ((a, b), (c, d)) = cons.pairs[0];
        let y = s.user_a().point(c) + h.value * s.user_b().point(d);
        let got = ma_phase_decode(y, Complex64::new(1.0, 0.0), h.value, &s);
        assert!(got == (a, b) || got == (c, d));
        assert_eq!(got, (a, b).min((c, d)));
    }

    #[test]
    fn label_serialisation() {
        let s = SchemePair::new(8, 2).unwrap();
        let m = lib(8, 2).maps()[0].clone();
        assert_eq!(label_to_symbols(5, &m), vec![1, 0, 1]);
        assert_eq!(symbols_to_label(&[1, 0, 1], 1), 5);
        let g = vec![Complex64::new(2.0, 1.0); 3];
        let zero = vec![Complex64::new(0.0, 0.0); 3];
        for l in 0..8 {
            assert_eq!(bc_phase(l, &m, &g, &zero), l);
        }
        // a large push on the middle use flips only that chunk
        let hit = vec![zero[0], Complex64::new(0.0, -20.0) * g[1], zero[2]];
        let got = bc_phase(5, &m, &g, &hit);
        assert_eq!(got, 0b111);
        assert_eq!(s.lambda2(), 1);
    }

    #[test]
    fn user_decode_examples() {
        let s = SchemePair::new(4, 2).unwrap();
        let m = ClusterMap::new(s, vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2]]).unwrap();
        assert_eq!(user_decode(1, 3, &m, User::B), Some(2));
        assert_eq!(user_decode(0, 1, &m, User::A), Some(1));
        let s = SchemePair::new(4, 2).unwrap();
        let wide = ClusterMap::new(s, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]).unwrap();
        assert_eq!(user_decode(0, 5, &wide, User::B), None);
        assert_eq!(user_decode(1, 0, &wide, User::A), None);
    }

    #[test]
    fn relay_uses_removing_map_and_falls_back() {
        let l = lib(4, 2);
        let q = Quantizer::new(l.scheme());
        let z = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4) * 1.02;
        let Verdict::UseSfsMap { index, .. } = q.select(z).verdict else { panic!() };
        let want = l.coverage()[index];
        assert_eq!(want, 2);
        assert_eq!(Relay::new(&l, 3).map_index(z), 2);
        assert_eq!(Relay::new(&l, 2).map_index(z), 0);
        // far out: nearest singular state decides
        assert_eq!(Relay::new(&l, 3).map_index(Complex64::new(10.0, 10.0)), 2);
        let label = relay_map_apply((1, 1), z, &l, 3);
        assert_eq!(label, l.maps()[2].label(1, 1));
    }

    #[test]
    fn noiseless_limit_is_error_free() {
        let mut cfg = config(lib(4, 2), 200.0, 3, 2000);
        cfg.channel.snr_br_db = 200.0;
        let r = simulate(&cfg).unwrap();
        assert_eq!(r.counts.relay_errors, 0);
        assert_eq!(r.ber_ab, 0.0);
        assert_eq!(r.ber_ba, 0.0);
    }

    #[test]
    fn deterministic_and_weighted() {
        let cfg = config(lib(8, 2), 10.0, 8, 20_000);
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a, b);
        assert!((a.ber_avg - (3.0 * a.ber_ab + a.ber_ba) / 4.0).abs() < 1e-15);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| simulate(&cfg).unwrap());
        assert_eq!(a, c);
        let single = sweep(&cfg, &[10.0]).unwrap();
        assert_eq!(single[0].1, a);
    }

    #[test]
    fn block_length_and_rayleigh_run() {
        let mut cfg = config(lib(4, 2), 15.0, 3, 10_001);
        cfg.channel.kind = ChannelKind::Rayleigh;
        cfg.channel.snr_br_db = 25.0;
        cfg.channel.block_length = 7;
        let r = simulate(&cfg).unwrap();
        assert_eq!(r.counts.relay_trials, 10_001);
        assert_eq!(r.counts.ab_bits, 20_002);
        assert!(r.rer > 0.0 && r.rer < 0.5);
    }

    #[test]
    fn pure_noise_gives_chance_level_errors() {
        let mut cfg = config(lib(4, 2), -60.0, 3, 40_000);
        cfg.channel.snr_br_db = -60.0;
        let r = simulate(&cfg).unwrap();
        // four equiprobable labels per row: a random guess is wrong 3/4 of the time
        assert!((r.rer - 0.75).abs() < 0.02, "{}", r.rer);
        assert!((r.ber_ab - 0.5).abs() < 0.02, "{}", r.ber_ab);
        // columns hold two of the four labels; a missing label costs both of A's guesses
        assert!((r.ber_ba - 0.75).abs() < 0.02, "{}", r.ber_ba);
    }

    #[test]
    fn invalid_configs() {
        assert!(simulate(&config(lib(4, 2), 10.0, 3, 0)).is_err());
        assert!(simulate(&config(lib(4, 2), 10.0, 4, 10)).is_err());
        assert!(simulate(&config(lib(4, 2), 10.0, 0, 10)).is_err());
        assert!(sweep(&config(lib(4, 2), 10.0, 3, 10), &[]).is_err());
    }

    #[test]
    fn csv_header() {
        let rows = sweep(&config(lib(4, 2), 10.0, 3, 100), &[0.0, 5.0]).unwrap();
        let csv = sweep_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("snr_ar_db,rer,ber_ab,ber_ba,ber_avg,symbols"));
        assert!(lines.next().unwrap().starts_with("0,"));
        assert!(lines.next().unwrap().ends_with(",100"));
    }
}
