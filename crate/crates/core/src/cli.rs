//! Campaign runner behind the `gnair` binary.
//!
//! A GN campaign writes one η table per band choice (`eta_<label>.csv`) and
//! `report.csv` with one row per (NLC width, format, shaping, channel). An
//! SSFM campaign writes `ssfm_verification.csv`. Every run also writes
//! `metadata.json`. Floats in CSV files are printed in shortest round-trip
//! form, so each row can be recomputed bit-for-bit from its stored inputs.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::amplification::SpanPowerProfile;
use crate::error::{Error, Result};
use crate::gn::{BandChoice, EtaEntry, EtaEstimate, GnEngine, NonlinearCoefficientTable, QmcSettings};
use crate::infotheory::{
    air_and_code_rate, build_constellation, mi_gauss_hermite, optimize_zeta, Shaping,
};
use crate::performance::{launch_powers, link_budget, ChannelSnr, LinkBudget};
use crate::ssfm::{run_verification_campaign, Profile};
use crate::system::{load_config_file, ShapingMode, SystemConfig};
use crate::units::watt_to_dbm;

/// Version of the CSV and JSON layouts written by [`run`].
pub const OUTPUT_FORMAT_VERSION: u32 = 1;
/// Directory for cached η tables. Caching is off when unset.
pub const CACHE_DIR_ENV: &str = "GNAIR_CACHE_DIR";
const CACHE_FORMAT: &str = "gnair-eta-cache-v1";

pub const REPORT_HEADER: &str = "channel_index,center_frequency_THz,nlc_bandwidth_GHz,modulation_format,shaping,zeta,\
eta_full_inv_W2,eta_nlc_inv_W2,delta_eta_inv_W2,launch_power_W,launch_power_dBm,optimum_power_dBm,\
ase_total_W,snr_linear,snr_dB,mi_bits,air_Gbps,se_bit_per_s_Hz,code_rate,overhead_percent";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Gn,
    Ssfm,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileArg {
    Desk,
    Paper,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Desk => Profile::Desk,
            ProfileArg::Paper => Profile::Paper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapingArg {
    Uniform,
    Mb,
    Both,
}

impl From<ShapingArg> for ShapingMode {
    fn from(s: ShapingArg) -> Self {
        match s {
            ShapingArg::Uniform => ShapingMode::Uniform,
            ShapingArg::Mb => ShapingMode::MaxwellBoltzmann,
            ShapingArg::Both => ShapingMode::Both,
        }
    }
}

/// GN-model SNR, information-rate and split-step verification campaigns.
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "gnair", version)]
pub struct Args {
    /// System configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Gn)]
    pub mode: Mode,
    /// Split-step problem size.
    #[arg(long, value_enum, default_value_t = ProfileArg::Desk)]
    pub profile: ProfileArg,
    /// Overrides the configured RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the configured QMC sample budget per channel.
    #[arg(long)]
    pub qmc_samples: Option<u64>,
    /// Output directory; defaults to the configured one, then `gnair-out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated square QAM orders.
    #[arg(long, value_delimiter = ',')]
    pub formats: Option<Vec<u32>>,
    #[arg(long, value_enum)]
    pub shaping: Option<ShapingArg>,
    /// NLC bandwidth in GHz (repeatable); 0 means EDC only.
    #[arg(long = "nlc")]
    pub nlc_ghz: Vec<f64>,
}

/// Paths written and timings of one [`run`].
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub timings_s: BTreeMap<String, f64>,
    pub cache_hits: usize,
    pub cache_misses: usize,
}

/// Parses `argv` and runs the campaign, returning the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&args) {
        Ok(s) => {
            for f in &s.files {
                println!("{}", s.out_dir.join(f).display());
            }
            0
        }
        Err(e) => {
            eprintln!("gnair: {e}");
            e.exit_code()
        }
    }
}

/// Loads the configuration and applies command-line overrides.
pub fn resolve_config(args: &Args) -> Result<SystemConfig> {
    let mut cfg = load_config_file(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.campaign.rng_seed = seed;
    }
    if let Some(n) = args.qmc_samples {
        if n == 0 {
            return Err(Error::config("--qmc-samples", "must be positive"));
        }
        cfg.campaign.qmc_samples = n;
    }
    if let Some(f) = &args.formats {
        if f.is_empty() {
            return Err(Error::config("--formats", "at least one format is required"));
        }
        cfg.campaign.modulation_formats = f.clone();
    }
    if let Some(s) = args.shaping {
        cfg.campaign.shaping = s.into();
    }
    for &m in &cfg.campaign.modulation_formats {
        if !crate::system::is_square_qam(m) {
            return Err(Error::config("modulation_formats", format!("{m} is not a square QAM order")));
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn nlc_widths(args: &Args, cfg: &SystemConfig) -> Result<Vec<f64>> {
    if args.nlc_ghz.is_empty() {
        return Ok(vec![cfg.nlc.bandwidth]);
    }
    let mut out: Vec<f64> = Vec::new();
    for &g in &args.nlc_ghz {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::config("--nlc", format!("bandwidth must be >= 0 GHz, got {g}")));
        }
        let w = g * 1e9;
        if !out.contains(&w) {
            out.push(w);
        }
    }
    Ok(out)
}

fn output_dir(args: &Args, cfg: &SystemConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| cfg.campaign.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("gnair-out"))
}

fn create_file(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_with<F>(dir: &Path, name: &str, files: &mut Vec<String>, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
{
    let path = dir.join(name);
    let mut w = create_file(&path)?;
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))?;
    files.push(name.to_owned());
    Ok(())
}

/// Runs the campaign selected by `args` and writes its outputs, caching η
/// tables under `$GNAIR_CACHE_DIR` when it is set.
pub fn run(args: &Args) -> Result<RunSummary> {
    let cache = std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from).map(EtaCache::new);
    run_with_cache(args, cache)
}

pub fn run_with_cache(args: &Args, cache: Option<EtaCache>) -> Result<RunSummary> {
    let start = Instant::now();
    let cfg = resolve_config(args)?;
    let widths = nlc_widths(args, &cfg)?;
    let out = output_dir(args, &cfg);
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let qmc = QmcSettings::from_total(cfg.campaign.qmc_samples, cfg.campaign.rng_seed);

    let mut summary = RunSummary {
        out_dir: out.clone(),
        files: Vec::new(),
        timings_s: BTreeMap::new(),
        cache_hits: 0,
        cache_misses: 0,
    };
    summary.timings_s.insert("config_s".into(), start.elapsed().as_secs_f64());

    if matches!(args.mode, Mode::Gn | Mode::Both) {
        let t = Instant::now();
        let gn = gn_campaign(&cfg, qmc, &widths, cache.as_ref())?;
        summary.timings_s.insert("gn_eta_s".into(), gn.eta_seconds);
        summary.cache_hits += gn.cache_hits;
        summary.cache_misses += gn.cache_misses;
        for table in &gn.tables {
            write_with(&out, &format!("eta_{}.csv", table.label), &mut summary.files, |w| {
                table.write_csv(w)
            })?;
        }
        let t_report = Instant::now();
        let rows = report_rows(&cfg, &gn, &widths)?;
        summary.timings_s.insert("gn_report_s".into(), t_report.elapsed().as_secs_f64());
        write_with(&out, "report.csv", &mut summary.files, |w| write_report(w, &rows))?;
        summary.timings_s.insert("gn_total_s".into(), t.elapsed().as_secs_f64());
    }

    if matches!(args.mode, Mode::Ssfm | Mode::Both) {
        let t = Instant::now();
        let sim = Profile::from(args.profile).simulation(&cfg);
        let report = run_verification_campaign(&cfg, &sim, qmc)?;
        write_with(&out, "ssfm_verification.csv", &mut summary.files, |w| report.write_csv(w))?;
        summary.timings_s.insert("ssfm_s".into(), t.elapsed().as_secs_f64());
    }

    summary.timings_s.insert("total_s".into(), start.elapsed().as_secs_f64());
    let meta = serde_json::json!({
        "output_format_version": OUTPUT_FORMAT_VERSION,
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "args": args,
        "seed": cfg.campaign.rng_seed,
        "qmc": {
            "replicates": qmc.replicates,
            "points_per_replicate": qmc.points_per_replicate,
            "total": qmc.total(),
        },
        "nlc_bandwidths_hz": widths,
        "config": cfg,
        "files": summary.files,
        "cache": {
            "dir": cache.as_ref().map(|c| c.dir.display().to_string()),
            "hits": summary.cache_hits,
            "misses": summary.cache_misses,
        },
        "timings_s": summary.timings_s,
    });
    let mut files = summary.files.clone();
    write_with(&out, "metadata.json", &mut files, |w| {
        serde_json::to_writer_pretty(&mut *w, &meta)?;
        writeln!(w)
    })?;
    summary.files = files;
    Ok(summary)
}

/// η tables and link budget of a GN campaign.
pub struct GnCampaign {
    pub budget: LinkBudget,
    /// Full band first, then one table per distinct NLC width.
    pub tables: Vec<NonlinearCoefficientTable>,
    pub eta_seconds: f64,
    pub cache_hits: usize,
    pub cache_misses: usize,
}

fn band_choices(widths: &[f64]) -> Vec<BandChoice> {
    let mut c = vec![BandChoice::Full];
    c.extend(widths.iter().map(|&w| BandChoice::Nlc(w)));
    c
}

fn delta_eta(full: &NonlinearCoefficientTable, nlc: &NonlinearCoefficientTable) -> Vec<f64> {
    full.entries
        .iter()
        .zip(&nlc.entries)
        .map(|(a, b)| (a.estimate.eta - b.estimate.eta).max(0.0))
        .collect()
}

/// Computes (or loads) the η tables. With a nonzero gain slope the SRS tilt
/// is evaluated at the launch powers the first NLC width yields without
/// tilt, and the tables are recomputed with per-channel span profiles.
pub fn gn_campaign(
    cfg: &SystemConfig,
    qmc: QmcSettings,
    widths: &[f64],
    cache: Option<&EtaCache>,
) -> Result<GnCampaign> {
    let t = Instant::now();
    let choices = band_choices(widths);
    let mut budget = link_budget(cfg, None)?;
    let engine = GnEngine::new(cfg, &budget.baseline, qmc);
    let mut hits = 0;
    let mut misses = 0;
    let mut load = |profiles: &[SpanPowerProfile], per_channel: bool| -> Result<Vec<NonlinearCoefficientTable>> {
        let (tables, h, m) = cached_tables(cfg, &engine, &choices, profiles, per_channel, cache)?;
        hits += h;
        misses += m;
        Ok(tables)
    };
    let mut tables = load(std::slice::from_ref(&budget.baseline), false)?;
    if cfg.fiber.gain_slope != 0.0 {
        let powers = launch_powers(
            cfg.campaign.power_policy,
            cfg.campaign.launch_power,
            &budget.ase_total,
            &delta_eta(&tables[0], &tables[1]),
        )?;
        budget = link_budget(cfg, Some(&powers))?;
        if let Some(p) = &budget.channel_profiles {
            tables = load(p, true)?;
        }
    }
    Ok(GnCampaign {
        budget,
        tables,
        eta_seconds: t.elapsed().as_secs_f64(),
        cache_hits: hits,
        cache_misses: misses,
    })
}

/// One line of `report.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub channel: i32,
    pub center_frequency_thz: f64,
    pub nlc_bandwidth_ghz: f64,
    pub format: u32,
    pub shaping: String,
    pub zeta: f64,
    pub eta_full: f64,
    pub eta_nlc: f64,
    pub snr: ChannelSnr,
    pub mi: f64,
    pub air_gbps: f64,
    pub spectral_efficiency: f64,
    pub code_rate: f64,
    pub overhead_percent: f64,
}

fn shapings(mode: ShapingMode) -> Vec<bool> {
    match mode {
        ShapingMode::Uniform => vec![false],
        ShapingMode::MaxwellBoltzmann => vec![true],
        ShapingMode::Both => vec![false, true],
    }
}

/// Report rows in output order: NLC width, format, shaping, channel.
pub fn report_rows(cfg: &SystemConfig, gn: &GnCampaign, widths: &[f64]) -> Result<Vec<ReportRow>> {
    let full = &gn.tables[0];
    let mut snr_sets = Vec::with_capacity(widths.len());
    for (i, &w) in widths.iter().enumerate() {
        let nlc = &gn.tables[i + 1];
        let snr = crate::performance::per_channel_report(cfg, &gn.budget.ase_total, full, nlc)?;
        snr_sets.push((w, nlc, snr));
    }
    let mut items = Vec::new();
    for (wi, _) in widths.iter().enumerate() {
        for &m in &cfg.campaign.modulation_formats {
            for shaped in shapings(cfg.campaign.shaping) {
                for ci in 0..full.entries.len() {
                    items.push((wi, m, shaped, ci));
                }
            }
        }
    }
    let grid = &cfg.grid;
    items
        .par_iter()
        .map(|&(wi, m, shaped, ci)| {
            let (w, nlc, snrs) = &snr_sets[wi];
            let s = snrs[ci];
            let (shaping, mi) = if shaped {
                let opt = optimize_zeta(m, s.snr_linear)?;
                (Shaping::MaxwellBoltzmann { zeta: opt.zeta }, opt.mi)
            } else {
                let c = build_constellation(m, Shaping::Uniform)?;
                (Shaping::Uniform, mi_gauss_hermite(&c, s.snr_linear)?.mi)
            };
            let rates = air_and_code_rate(mi, grid.symbol_rate, m, grid.channel_spacing)?;
            Ok(ReportRow {
                channel: s.channel,
                center_frequency_thz: full.entries[ci].center_frequency / 1e12,
                nlc_bandwidth_ghz: w / 1e9,
                format: m,
                shaping: shaping.tag().to_owned(),
                zeta: shaping.zeta(),
                eta_full: full.entries[ci].estimate.eta,
                eta_nlc: nlc.entries[ci].estimate.eta,
                snr: s,
                mi,
                air_gbps: rates.air / 1e9,
                spectral_efficiency: rates.spectral_efficiency,
                code_rate: rates.code_rate,
                overhead_percent: rates.overhead_percent,
            })
        })
        .collect()
}

pub fn write_report<W: Write>(mut w: W, rows: &[ReportRow]) -> std::io::Result<()> {
    writeln!(w, "{REPORT_HEADER}")?;
    for r in rows {
        let s = &r.snr;
        let opt = s
            .optimum_power
            .map(|p| format!("{:e}", watt_to_dbm(p)))
            .unwrap_or_default();
        writeln!(
            w,
            "{},{:e},{:e},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.channel,
            r.center_frequency_thz,
            r.nlc_bandwidth_ghz,
            r.format,
            r.shaping,
            r.zeta,
            r.eta_full,
            r.eta_nlc,
            s.delta_eta,
            s.launch_power,
            watt_to_dbm(s.launch_power),
            opt,
            s.ase_total,
            s.snr_linear,
            s.snr_db,
            r.mi,
            r.air_gbps,
            r.spectral_efficiency,
            r.code_rate,
            r.overhead_percent,
        )?;
    }
    Ok(())
}

/// On-disk η table store keyed by a SHA-256 digest of everything the
/// estimate depends on. Floats are stored as IEEE-754 bit patterns, so a
/// cached table reads back bit-identical to the computed one.
#[derive(Debug, Clone)]
pub struct EtaCache {
    pub dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct CachedEntry {
    channel: i32,
    center_frequency: u64,
    eta: u64,
    stderr: u64,
    samples: u64,
}

#[derive(Serialize, Deserialize)]
struct CachedTable {
    format: String,
    key: String,
    label: String,
    bandwidth: u64,
    entries: Vec<CachedEntry>,
}

impl EtaCache {
    pub fn new(dir: PathBuf) -> Self {
        EtaCache { dir }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A missing, unreadable or mismatched file is a miss.
    pub fn load(&self, key: &str) -> Option<NonlinearCoefficientTable> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let t: CachedTable = serde_json::from_str(&text).ok()?;
        if t.format != CACHE_FORMAT || t.key != key {
            return None;
        }
        Some(NonlinearCoefficientTable {
            label: t.label,
            bandwidth: f64::from_bits(t.bandwidth),
            entries: t
                .entries
                .into_iter()
                .map(|e| EtaEntry {
                    channel: e.channel,
                    center_frequency: f64::from_bits(e.center_frequency),
                    estimate: EtaEstimate {
                        eta: f64::from_bits(e.eta),
                        stderr: f64::from_bits(e.stderr),
                        samples: e.samples,
                    },
                })
                .collect(),
        })
    }

    pub fn store(&self, key: &str, table: &NonlinearCoefficientTable) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let t = CachedTable {
            format: CACHE_FORMAT.to_owned(),
            key: key.to_owned(),
            label: table.label.clone(),
            bandwidth: table.bandwidth.to_bits(),
            entries: table
                .entries
                .iter()
                .map(|e| CachedEntry {
                    channel: e.channel,
                    center_frequency: e.center_frequency.to_bits(),
                    eta: e.estimate.eta.to_bits(),
                    stderr: e.estimate.stderr.to_bits(),
                    samples: e.estimate.samples,
                })
                .collect(),
        };
        // Write then rename so a concurrent reader never sees a partial file.
        let path = self.path(key);
        let tmp = self.dir.join(format!("{key}.tmp{}", std::process::id()));
        fs::write(&tmp, serde_json::to_vec(&t)?).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }
}

/// Cache key of one η table: fiber, grid, QMC settings, band choice and the
/// span power profile(s) driving the FWM kernel.
pub fn physics_hash(
    cfg: &SystemConfig,
    qmc: &QmcSettings,
    choice: BandChoice,
    profiles: &[SpanPowerProfile],
    per_channel: bool,
) -> Result<String> {
    let mut h = Sha256::new();
    h.update(CACHE_FORMAT.as_bytes());
    h.update(serde_json::to_vec(&cfg.fiber)?);
    h.update(serde_json::to_vec(&cfg.grid)?);
    h.update(serde_json::to_vec(qmc)?);
    h.update(serde_json::to_vec(&choice)?);
    h.update([per_channel as u8]);
    for p in profiles {
        h.update((p.z.len() as u64).to_le_bytes());
        for v in p.z.iter().chain(&p.power) {
            h.update(v.to_bits().to_le_bytes());
        }
        h.update(serde_json::to_vec(&p.kind)?);
    }
    Ok(hex::encode(h.finalize()))
}

/// Tables for `choices`, computing only those missing from the cache. Each
/// band's estimate is independent of which other bands share the pass, so
/// partial recomputation reproduces the cached values exactly.
fn cached_tables(
    cfg: &SystemConfig,
    engine: &GnEngine,
    choices: &[BandChoice],
    profiles: &[SpanPowerProfile],
    per_channel: bool,
    cache: Option<&EtaCache>,
) -> Result<(Vec<NonlinearCoefficientTable>, usize, usize)> {
    let keys: Vec<String> = choices
        .iter()
        .map(|&c| physics_hash(cfg, engine.qmc(), c, profiles, per_channel))
        .collect::<Result<_>>()?;
    let mut found: Vec<Option<NonlinearCoefficientTable>> =
        keys.iter().map(|k| cache.and_then(|c| c.load(k))).collect();
    let missing: Vec<usize> = (0..choices.len()).filter(|&i| found[i].is_none()).collect();
    let hits = choices.len() - missing.len();
    if !missing.is_empty() {
        let todo: Vec<BandChoice> = missing.iter().map(|&i| choices[i]).collect();
        let computed = if per_channel {
            engine.tables_with_profiles(&todo, Some(profiles))?
        } else {
            engine.tables(&todo)?
        };
        for (&i, t) in missing.iter().zip(computed) {
            if let Some(c) = cache {
                c.store(&keys[i], &t)?;
            }
            found[i] = Some(t);
        }
    }
    Ok((found.into_iter().map(Option::unwrap).collect(), hits, missing.len()))
}
