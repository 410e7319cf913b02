//! Command-line front end.
//!
//! ```text
//! hepnc sfs 4 2 [--out sfs.csv]
//! hepnc maps --scheme 8 2 [--out lib.json]
//! hepnc regions 4 2 --out regions.csv [--grid -1.6 1.6 -1.6 1.6 600]
//! hepnc simulate --config sweep.toml [--out sweep.csv] [--seed 7] [--maps-used 2]
//! hepnc verify 4 2 [--maps lib.json] [--seed 1]
//! ```
//!
//! Data goes to `--out` or standard output; reports go to the log stream.
//! Exit status: 0 all good, 1 a check failed, 2 bad input or I/O failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clustering::{
    builtin_library, check_exclusive_law, construct_library, coverage, library_to_json, map_from_json,
    maps_from_json, min_cluster_distance, printed_tables, removes_sfs, ClusterMap, MapLibrary,
};
use crate::error::{Error, Result};
use crate::fmt::num;
use crate::psk::{SchemePair, SET_TOL};
use crate::quantizer::{
    boundaries_to_json, boundary_curves, compare_with_oracle, external_ci_spec, raster_to_csv,
    restricted_external_circles, Grid,
};
use crate::sfs::{brute_force_sfs, enumerate_sfs, expected_circle_count, sfs_at, sfs_circle_radii};
use crate::sim::{ma_phase_decode, sweep, sweep_to_csv, user_decode, SimSpec, User};

#[derive(Debug, Parser)]
#[command(name = "hepnc", version, about = "Heterogeneous-PSK network coding toolkit")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// List singular fade states as CSV.
    Sfs {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Emit the map library as JSON with a verification report.
    Maps {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Rasterize the fade-plane partition and check it against brute force.
    Regions {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Raster CSV; boundaries go to `<stem>.boundaries.json` next to it.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(
            long,
            num_args = 5,
            value_names = ["XMIN", "XMAX", "YMIN", "YMAX", "N"],
            allow_negative_numbers = true
        )]
        grid: Option<Vec<String>>,
    },
    /// Run an SNR sweep from a TOML config.
    Simulate {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "U64")]
        seed: Option<u64>,
        #[arg(long = "maps-used", value_name = "K")]
        maps_used: Option<usize>,
    },
    /// Run the self-test suite for a scheme.
    Verify {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// External map or library JSON to check instead of the default library.
        #[arg(long, value_name = "PATH")]
        maps: Option<PathBuf>,
        #[arg(long, value_name = "U64", default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct SchemeArgs {
    #[arg(num_args = 2, value_names = ["M1", "M2"])]
    orders: Option<Vec<usize>>,
    #[arg(long = "scheme", num_args = 2, value_names = ["M1", "M2"], conflicts_with = "orders")]
    scheme: Option<Vec<usize>>,
}

impl SchemeArgs {
    fn resolve(&self) -> Result<SchemePair> {
        match self.orders.as_deref().or(self.scheme.as_deref()) {
            Some(&[m1, m2]) => SchemePair::new(m1, m2),
            _ => Err(Error::config("scheme", "give M1 M2 or --scheme M1 M2")),
        }
    }
}

/// A fully validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Sfs { scheme: SchemePair, out: Option<PathBuf> },
    Maps { scheme: SchemePair, out: Option<PathBuf> },
    Regions { scheme: SchemePair, grid: Grid, out: PathBuf },
    Simulate { config: PathBuf, out: Option<PathBuf>, seed: Option<u64>, maps_used: Option<usize> },
    Verify { scheme: SchemePair, maps: Option<PathBuf>, seed: u64 },
}

fn parse_grid(raw: Option<&[String]>) -> Result<Grid> {
    let Some(raw) = raw else {
        return Grid::new(-1.6, 1.6, -1.6, 1.6, 600);
    };
    let mut b = [0.0; 4];
    for (slot, s) in b.iter_mut().zip(raw) {
        *slot = s.parse().map_err(|_| Error::config("grid", format!("`{s}` is not a number")))?;
    }
    let n = raw[4].parse().map_err(|_| Error::config("grid", format!("`{}` is not a cell count", raw[4])))?;
    Grid::new(b[0], b[1], b[2], b[3], n)
}

/// Parses and validates arguments (the first is the program name).
/// The outer error is clap's own outcome, help and version requests included;
/// the inner one is a validation failure.
pub fn parse<I, T>(args: I) -> std::result::Result<Result<Command>, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    Ok(match cli.verb {
        Verb::Sfs { scheme, out } => scheme.resolve().map(|scheme| Command::Sfs { scheme, out }),
        Verb::Maps { scheme, out } => scheme.resolve().map(|scheme| Command::Maps { scheme, out }),
        Verb::Regions { scheme, out, grid } => scheme
            .resolve()
            .and_then(|scheme| Ok(Command::Regions { scheme, grid: parse_grid(grid.as_deref())?, out })),
        Verb::Simulate { config, out, seed, maps_used } => {
            if maps_used == Some(0) {
                Err(Error::config("maps_used", "must be at least 1"))
            } else {
                Ok(Command::Simulate { config, out, seed, maps_used })
            }
        }
        Verb::Verify { scheme, maps, seed } => scheme.resolve().map(|scheme| Command::Verify { scheme, maps, seed }),
    })
}

/// Entry point used by the binary; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, log: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cmd = match parse(args) {
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(log, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
        Ok(Err(e)) => {
            let _ = writeln!(log, "error: {e}");
            return 2;
        }
        Ok(Ok(cmd)) => cmd,
    };
    match execute(&cmd, out, log) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            2
        }
    }
}

/// Runs a validated command. `Ok(false)` means outputs were written but a check failed.
pub fn execute(cmd: &Command, out: &mut dyn Write, log: &mut dyn Write) -> Result<bool> {
    match cmd {
        Command::Sfs { scheme, out: path } => run_sfs(scheme, path.as_deref(), out, log),
        Command::Maps { scheme, out: path } => run_maps(scheme, path.as_deref(), out, log),
        Command::Regions { scheme, grid, out: path } => run_regions(scheme, *grid, path, log),
        Command::Simulate { config, out: path, seed, maps_used } => {
            run_simulate(config, path.as_deref(), *seed, *maps_used, out, log)
        }
        Command::Verify { scheme, maps, seed } => run_verify(scheme, maps.as_deref(), *seed, out),
    }
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => out.write_all(text.as_bytes()).map_err(|e| Error::io(Path::new("<stdout>"), e)),
    }
}

fn say(log: &mut dyn Write, line: impl std::fmt::Display) -> Result<()> {
    writeln!(log, "{line}").map_err(|e| Error::io(Path::new("<log>"), e))
}

/// The tabulated library when there is one, otherwise a constructed one.
pub fn default_library(scheme: &SchemePair) -> Result<MapLibrary> {
    match builtin_library(scheme) {
        Err(Error::NoBuiltin(..)) => construct_library(scheme),
        other => other,
    }
}

/// CSV `gamma,theta,re,im,n1,n2,l,agrees`; `agrees` marks a brute-force match.
pub fn sfs_csv(scheme: &SchemePair) -> (String, bool) {
    let all = enumerate_sfs(scheme);
    let brute = brute_force_sfs(scheme);
    let hit = |z: Complex64, set: &[Complex64]| set.iter().any(|b| (b - z).norm() < SET_TOL);
    let mut csv = String::from("gamma,theta,re,im,n1,n2,l,agrees\n");
    let mut ok = all.len() == brute.len();
    let values: Vec<_> = all.iter().map(|h| h.value).collect();
    ok &= brute.iter().all(|&b| hit(b, &values));
    for h in &all {
        let agrees = hit(h.value, &brute);
        ok &= agrees;
        let (n1, n2, l) = h.ring.map_or((String::new(), String::new(), String::new()), |r| {
            (r.n1.to_string(), r.n2.to_string(), r.l.to_string())
        });
        csv.push_str(&format!(
            "{},{},{},{},{n1},{n2},{l},{}\n",
            num(h.gamma),
            num(h.theta),
            num(h.value.re),
            num(h.value.im),
            u8::from(agrees)
        ));
    }
    (csv, ok)
}

fn run_sfs(scheme: &SchemePair, path: Option<&Path>, out: &mut dyn Write, log: &mut dyn Write) -> Result<bool> {
    let (csv, ok) = sfs_csv(scheme);
    emit(path, &csv, out)?;
    say(log, format!("{scheme}: {} singular fade states, brute-force agreement {}", csv.lines().count() - 1, ok))?;
    Ok(ok)
}

fn run_maps(scheme: &SchemePair, path: Option<&Path>, out: &mut dyn Write, log: &mut dyn Write) -> Result<bool> {
    let lib = default_library(scheme)?;
    emit(path, &library_to_json(&lib), out)?;
    let mut ok = true;
    for (i, m) in lib.maps().iter().enumerate() {
        let exclusive = check_exclusive_law(m);
        ok &= exclusive;
        let removed: Vec<String> =
            lib.sfs().iter().filter(|h| removes_sfs(m, h)).map(|h| h.to_string()).collect();
        say(log, format!("map {i}: exclusive law {}, removes {}", pass(exclusive), removed.join(" ")))?;
    }
    say(log, format!("{scheme}: {} maps cover all {} nonzero singular fade states", lib.maps().len(), lib.sfs().len()))?;
    Ok(ok)
}

fn boundaries_path(raster: &Path) -> PathBuf {
    raster.with_extension("boundaries.json")
}

fn run_regions(scheme: &SchemePair, grid: Grid, path: &Path, log: &mut dyn Write) -> Result<bool> {
    let (raster, agreement) = compare_with_oracle(scheme, grid, 1e-3)?;
    std::fs::write(path, raster_to_csv(&raster)).map_err(|e| Error::io(path, e))?;
    let bpath = boundaries_path(path);
    let curves = boundary_curves(scheme)?;
    std::fs::write(&bpath, boundaries_to_json(&curves)).map_err(|e| Error::io(&bpath, e))?;
    say(
        log,
        format!(
            "{scheme}: {} cells, {} near a boundary, {} mismatched ({} unclassified); {} curves",
            agreement.cells,
            agreement.excluded,
            agreement.mismatched,
            agreement.unclassified,
            curves.len()
        ),
    )?;
    Ok(agreement.mismatched == 0)
}

fn run_simulate(
    config: &Path,
    path: Option<&Path>,
    seed: Option<u64>,
    maps_used: Option<usize>,
    out: &mut dyn Write,
    log: &mut dyn Write,
) -> Result<bool> {
    let text = std::fs::read_to_string(config).map_err(|e| Error::io(config, e))?;
    let mut spec = SimSpec::from_toml(&text)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    if maps_used.is_some() {
        spec.maps_used = maps_used;
    }
    let template = spec.template()?;
    let start = Instant::now();
    let rows = sweep(&template, &spec.snr_ar_db)?;
    emit(path, &sweep_to_csv(&rows), out)?;
    let total: u64 = rows.iter().map(|(_, r)| r.counts.relay_trials).sum();
    say(
        log,
        format!(
            "{}: {} points, {total} symbols, {} maps used, {:.2} s",
            spec.scheme,
            rows.len(),
            template.max_maps_used,
            start.elapsed().as_secs_f64()
        ),
    )?;
    Ok(true)
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
    /// Reported but not counted towards the exit status.
    pub informational: bool,
}

impl Check {
    fn new(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), ok, detail: detail.into(), informational: false }
    }
}

fn load_maps(scheme: &SchemePair, path: &Path) -> Result<Vec<ClusterMap>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let maps = maps_from_json(&text).or_else(|_| map_from_json(&text).map(|m| vec![m]))?;
    if let Some(m) = maps.iter().find(|m| m.scheme() != scheme) {
        return Err(Error::InvalidMap(format!("file holds {} maps, expected {scheme}", m.scheme())));
    }
    Ok(maps)
}

fn table_check(scheme: &SchemePair, lib: &MapLibrary) -> Option<Check> {
    let tables = printed_tables(scheme).ok()?;
    let mut bad = Vec::new();
    for (i, (t, m)) in tables.iter().zip(lib.maps()).enumerate() {
        if t.removes.is_empty() {
            continue;
        }
        let listed: Vec<_> = t.removes.iter().filter_map(|&(g, th)| sfs_at(scheme, g, th).ok()).collect();
        let removed: Vec<_> = lib.sfs().iter().filter(|h| removes_sfs(m, h)).collect();
        let same = listed.len() == t.removes.len()
            && listed.len() == removed.len()
            && listed.iter().all(|h| removed.iter().any(|r| (r.value - h.value).norm() < SET_TOL));
        if !same {
            bad.push(format!("map {i}"));
        }
    }
    Some(Check::new(
        "tabulated removal sets",
        bad.is_empty(),
        if bad.is_empty() { "every listed set matches".to_string() } else { bad.join(", ") },
    ))
}

fn roundtrip_check(maps: &[ClusterMap], scheme: &SchemePair) -> Check {
    // a fade state well away from every singular one
    let z = Complex64::from_polar(0.83, 0.37);
    let (a, b) = (scheme.user_a(), scheme.user_b());
    let one = Complex64::new(1.0, 0.0);
    let mut failures = 0;
    for m in maps {
        for xa in 0..a.order() {
            for xb in 0..b.order() {
                let y = a.point(xa) + z * b.point(xb);
                let (ea, eb) = ma_phase_decode(y, one, z, scheme);
                let label = m.label(ea, eb);
                let ok = (ea, eb) == (xa, xb)
                    && user_decode(xa, label, m, User::A) == Some(xb)
                    && user_decode(xb, label, m, User::B) == Some(xa);
                failures += usize::from(!ok);
            }
        }
    }
    Check::new("noiseless round trip", failures == 0, format!("{failures} failing pairs"))
}

fn bound_check(maps: &[ClusterMap], scheme: &SchemePair, seed: u64) -> Check {
    use std::f64::consts::{PI, TAU};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (s1, s2) = ((PI / scheme.m1() as f64).sin(), (PI / scheme.m2() as f64).sin());
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let gamma: f64 = rng.random_range(0.0..3.0);
        let theta: f64 = rng.random_range(0.0..TAU);
        let bound = (2.0 * s1).min(2.0 * gamma * s2);
        for m in maps {
            worst = worst.max(min_cluster_distance(m, gamma, theta) - bound);
        }
    }
    Check::new("distance upper bound", worst <= 1e-9, format!("largest excess {}", num(worst)))
}

/// Fade states that only the narrower external circle set would call external.
fn restricted_circle_check(scheme: &SchemePair) -> Result<Check> {
    let grid = Grid::square(1.6, 200)?;
    let full = external_ci_spec(scheme);
    let narrow = restricted_external_circles(scheme);
    let extra = grid.points().filter(|&z| narrow.contains(z) && !full.contains(z)).count();
    Ok(Check {
        name: "narrow external circle set".to_string(),
        ok: extra == 0,
        detail: format!("{extra} grid cells admitted only by the narrow set"),
        informational: true,
    })
}

/// Runs every check for `scheme`, on the maps in `maps` when given.
pub fn verify_checks(scheme: &SchemePair, maps: Option<&Path>, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let (_, sfs_ok) = sfs_csv(scheme);
    let circles = sfs_circle_radii(scheme).len();
    checks.push(Check::new("singular fade states vs brute force", sfs_ok, format!("{} states", enumerate_sfs(scheme).len())));
    checks.push(Check::new(
        "circle count",
        circles == expected_circle_count(scheme),
        format!("{circles} circles, {} predicted", expected_circle_count(scheme)),
    ));

    let (lib_maps, lib) = match maps {
        Some(p) => {
            let m = load_maps(scheme, p)?;
            (m.clone(), MapLibrary::new(scheme.clone(), m).ok())
        }
        None => {
            let lib = default_library(scheme)?;
            (lib.maps().to_vec(), Some(lib))
        }
    };
    let bad: Vec<String> =
        lib_maps.iter().enumerate().filter(|(_, m)| m.validate().is_err()).map(|(i, _)| format!("map {i}")).collect();
    checks.push(Check::new(
        "exclusive law",
        bad.is_empty(),
        if bad.is_empty() { format!("{} maps", lib_maps.len()) } else { bad.join(", ") },
    ));
    let nonzero: Vec<_> = enumerate_sfs(scheme).into_iter().skip(1).collect();
    let cov = coverage(&lib_maps, &nonzero);
    let missing = cov.iter().filter(|c| c.is_none()).count();
    checks.push(Check::new(
        "singular fade state coverage",
        missing == 0,
        format!("{} of {} removed", nonzero.len() - missing, nonzero.len()),
    ));
    if maps.is_none() {
        if let Some(c) = lib.as_ref().and_then(|l| table_check(scheme, l)) {
            checks.push(c);
        }
    }
    checks.push(roundtrip_check(&lib_maps, scheme));
    checks.push(bound_check(&lib_maps, scheme, seed));

    let (_, agreement) = compare_with_oracle(scheme, Grid::square(1.6, 200)?, 1e-3)?;
    checks.push(Check::new(
        "analytic regions vs brute force",
        agreement.mismatched == 0,
        format!("{} mismatched of {} compared", agreement.mismatched, agreement.cells - agreement.excluded),
    ));
    checks.push(restricted_circle_check(scheme)?);
    Ok(checks)
}

fn run_verify(scheme: &SchemePair, maps: Option<&Path>, seed: u64, out: &mut dyn Write) -> Result<bool> {
    let checks = verify_checks(scheme, maps, seed)?;
    let mut all = true;
    for c in &checks {
        let status = if c.informational { "INFO" } else { pass(c.ok) };
        all &= c.ok || c.informational;
        say(out, format!("{status} {}: {}", c.name, c.detail))?;
    }
    say(out, format!("{scheme}: {}", if all { "all checks pass" } else { "some checks failed" }))?;
    Ok(all)
}
