//! TOML simulation config.
//!
//! ```toml
//! scheme = [4, 2]
//! channel = "awgn"          # or "rayleigh"
//! snr_ar_db = [0, 5, 10, 15, 20, 25, 30]
//! snr_br_db = 7             # default 7 (awgn) / 25 (rayleigh)
//! symbols = 1000000
//! seed = 1
//! maps_used = 3             # default: whole library
//! block_length = 1
//! labeling = "natural"      # or "gray"
//! library = "auto"          # "builtin", "constructed"
//! ```

use serde::Deserialize;

use crate::clustering::{builtin_library, construct_library, MapLibrary};
use crate::error::{Error, Result};
use crate::psk::{Labeling, SchemePair};

use super::{ChannelKind, ChannelModel, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LibrarySource {
    /// The tabulated library when one exists, otherwise a constructed one.
    #[default]
    Auto,
    Builtin,
    Constructed,
}

impl LibrarySource {
    pub fn load(self, scheme: &SchemePair) -> Result<MapLibrary> {
        match self {
            LibrarySource::Builtin => builtin_library(scheme),
            LibrarySource::Constructed => construct_library(scheme),
            LibrarySource::Auto => builtin_library(scheme).or_else(|_| construct_library(scheme)),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    scheme: Option<[usize; 2]>,
    channel: Option<ChannelKind>,
    snr_ar_db: Option<Vec<f64>>,
    snr_br_db: Option<f64>,
    symbols: Option<u64>,
    seed: Option<u64>,
    maps_used: Option<usize>,
    block_length: Option<usize>,
    labeling: Option<Labeling>,
    library: Option<LibrarySource>,
}

/// A validated sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub scheme: SchemePair,
    pub channel: ChannelKind,
    pub snr_ar_db: Vec<f64>,
    pub snr_br_db: f64,
    pub symbols: u64,
    pub seed: u64,
    pub maps_used: Option<usize>,
    pub block_length: usize,
    pub labeling: Labeling,
    pub library: LibrarySource,
}

fn required<T>(v: Option<T>, field: &str) -> Result<T> {
    v.ok_or_else(|| Error::config(field, "is required"))
}

impl SimSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))?;
        let [m1, m2] = required(raw.scheme, "scheme")?;
        let scheme = SchemePair::new(m1, m2).map_err(|e| Error::config("scheme", e.to_string()))?;
        let channel = required(raw.channel, "channel")?;
        let snr_ar_db = required(raw.snr_ar_db, "snr_ar_db")?;
        if snr_ar_db.is_empty() {
            return Err(Error::config("snr_ar_db", "needs at least one value"));
        }
        if snr_ar_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("snr_ar_db", "values must be finite"));
        }
        let snr_br_db = raw.snr_br_db.unwrap_or(channel.default_snr_br_db());
        if !snr_br_db.is_finite() {
            return Err(Error::config("snr_br_db", "must be finite"));
        }
        let symbols = required(raw.symbols, "symbols")?;
        if symbols == 0 {
            return Err(Error::config("symbols", "must be at least 1"));
        }
        let seed = required(raw.seed, "seed")?;
        if raw.maps_used == Some(0) {
            return Err(Error::config("maps_used", "must be at least 1"));
        }
        let block_length = raw.block_length.unwrap_or(1);
        if block_length == 0 {
            return Err(Error::config("block_length", "must be at least 1"));
        }
        Ok(Self {
            scheme,
            channel,
            snr_ar_db,
            snr_br_db,
            symbols,
            seed,
            maps_used: raw.maps_used,
            block_length,
            labeling: raw.labeling.unwrap_or_default(),
            library: raw.library.unwrap_or_default(),
        })
    }

    /// Loads the library and builds the config for the first SNR point.
    pub fn template(&self) -> Result<SimConfig> {
        let library = self.library.load(&self.scheme).map_err(|e| Error::config("library", e.to_string()))?;
        let n = library.maps().len();
        let max_maps_used = self.maps_used.unwrap_or(n);
        if max_maps_used > n {
            return Err(Error::config("maps_used", format!("library has only {n} maps")));
        }
        let cfg = SimConfig {
            channel: ChannelModel {
                kind: self.channel,
                snr_ar_db: self.snr_ar_db[0],
                snr_br_db: self.snr_br_db,
                block_length: self.block_length,
            },
            library,
            max_maps_used,
            symbols: self.symbols,
            seed: self.seed,
            labeling: self.labeling,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
