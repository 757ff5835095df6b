//! GN-model nonlinear interference with third-order dispersion.
//!
//! The per-channel coefficient eta_k is a triple integral over the frequency
//! under test `f` (within channel k) and two pump frequencies `f1`, `f2`
//! (over the WDM band), with the third frequency `f1 + f2 - f` constrained to
//! the band. It is estimated with randomized quasi-Monte Carlo: independent
//! Owen-scrambled Sobol replicates give the mean and its standard error.
//!
//! The kernel concentrates along the lines `f1 = f` and `f2 = f`, where the
//! phase mismatch vanishes. Pump frequencies are therefore drawn through a
//! logarithmic map centered on `f` (density ~ 1/(|f1 - f| + w)), and each
//! sample carries the inverse density as its weight. The box is always the
//! full transmitted band; narrower bands (NLC) only enter through the
//! indicator, so nested bands are estimated from identical points and the
//! nesting `eta(B_NLC) <= eta(B)` holds replicate by replicate.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplification::{ProfileKind, SpanPowerProfile};
use crate::error::{Error, Result};
use crate::qmc::ScrambledSobol;
use crate::system::{FiberParams, SystemConfig, WdmGrid};

/// Independent scramblings used for the standard error.
pub const REPLICATES: usize = 16;
/// Exponential segments used to represent sampled (non-EDFA) profiles.
pub const KERNEL_SEGMENTS: usize = 200;
/// Below this |sin(x/2)| the phased-array factor uses the explicit sum.
const PHASED_ARRAY_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMismatchParams {
    /// s^2/m
    pub beta2: f64,
    /// s^3/m
    pub beta3: f64,
}

impl From<&FiberParams> for PhaseMismatchParams {
    fn from(f: &FiberParams) -> Self {
        PhaseMismatchParams {
            beta2: f.beta2,
            beta3: f.beta3,
        }
    }
}

/// FWM phase mismatch (rad/m) of the triple (f, f1, f2), frequencies in Hz.
#[inline]
pub fn phase_mismatch(f: f64, f1: f64, f2: f64, p: &PhaseMismatchParams) -> f64 {
    4.0 * PI * PI * (p.beta2 + PI * (f1 + f2) * p.beta3) * (f1 - f) * (f2 - f)
}

/// Coherent multi-span accumulation `sum_{m=0}^{N-1} exp(i dbeta L m)`.
pub fn phased_array_factor(dbeta: f64, span_count: usize, span_length: f64) -> Complex64 {
    let n = span_count as f64;
    let x = dbeta * span_length;
    let half = 0.5 * x;
    if half.sin().abs() < PHASED_ARRAY_GUARD {
        return (0..span_count)
            .map(|m| Complex64::from_polar(1.0, x * m as f64))
            .sum();
    }
    Complex64::from_polar((0.5 * n * x).sin() / half.sin(), 0.5 * (n - 1.0) * x)
}

/// |phased_array_factor|^2 without forming the complex value.
#[inline]
pub fn phased_array_gain(dbeta: f64, span_count: usize, span_length: f64) -> f64 {
    let n = span_count as f64;
    let half = 0.5 * dbeta * span_length;
    let s = half.sin();
    if s.abs() < PHASED_ARRAY_GUARD {
        return n * n;
    }
    let r = (n * half).sin() / s;
    r * r
}

/// Precomputed representation of a span profile for fast evaluation of
/// `rho(dbeta) = int_0^L exp(i dbeta z) P(z) dz`.
#[derive(Debug, Clone)]
pub enum FwmKernel {
    Exponential {
        alpha: f64,
        length: f64,
        end: f64,
    },
    /// Piecewise-exponential fit on a uniform grid; exact for each segment.
    Segments {
        step: f64,
        power: Vec<f64>,
        /// ln(P_{j+1}/P_j) / step
        slope: Vec<f64>,
    },
}

impl FwmKernel {
    pub fn from_profile(profile: &SpanPowerProfile, segments: usize) -> Self {
        if let ProfileKind::Exponential { alpha } = profile.kind {
            let length = profile.span_length();
            return FwmKernel::Exponential {
                alpha,
                length,
                end: (-alpha * length).exp(),
            };
        }
        let length = profile.span_length();
        let segments = segments.max(1);
        let step = length / segments as f64;
        let power: Vec<f64> = (0..=segments)
            .map(|j| log_interp(&profile.z, &profile.power, step * j as f64))
            .collect();
        let slope = power.windows(2).map(|w| (w[1] / w[0]).ln() / step).collect();
        FwmKernel::Segments { step, power, slope }
    }

    /// Complex FWM efficiency, m.
    pub fn rho(&self, dbeta: f64) -> Complex64 {
        match *self {
            FwmKernel::Exponential { alpha, length, end } => {
                let num = Complex64::new(1.0, 0.0) - Complex64::from_polar(end, dbeta * length);
                num / Complex64::new(alpha, -dbeta)
            }
            FwmKernel::Segments {
                step,
                ref power,
                ref slope,
            } => {
                let w = Complex64::from_polar(1.0, dbeta * step);
                let mut rot = Complex64::new(1.0, 0.0);
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &s) in slope.iter().enumerate() {
                    let q = Complex64::new(s, dbeta);
                    let term = if q.norm_sqr() * step * step < 1e-12 {
                        power[j] * step * (Complex64::new(1.0, 0.0) + 0.5 * q * step)
                    } else {
                        (power[j + 1] * w - power[j]) * q.conj() / q.norm_sqr()
                    };
                    acc += rot * term;
                    rot *= w;
                }
                acc
            }
        }
    }

    /// |rho|^2, m^2.
    #[inline]
    pub fn rho_norm_sqr(&self, dbeta: f64) -> f64 {
        match *self {
            FwmKernel::Exponential { alpha, length, end } => {
                (1.0 - 2.0 * end * (dbeta * length).cos() + end * end)
                    / (alpha * alpha + dbeta * dbeta)
            }
            FwmKernel::Segments { .. } => self.rho(dbeta).norm_sqr(),
        }
    }
}

fn log_interp(x: &[f64], y: &[f64], at: f64) -> f64 {
    let i = match x.binary_search_by(|v| v.partial_cmp(&at).unwrap()) {
        Ok(i) => return y[i],
        Err(i) => i.clamp(1, x.len() - 1),
    };
    let t = (at - x[i - 1]) / (x[i] - x[i - 1]);
    (y[i - 1].ln() * (1.0 - t) + y[i].ln() * t).exp()
}

/// FWM efficiency factor: analytic for exponential profiles, segment-wise
/// exponential quadrature over every profile sample otherwise.
pub fn fwm_efficiency(dbeta: f64, profile: &SpanPowerProfile) -> Complex64 {
    FwmKernel::from_profile(profile, profile.z.len() - 1).rho(dbeta)
}

/// Closed frequency interval [lo, hi], Hz (baseband).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBand {
    pub lo: f64,
    pub hi: f64,
}

impl SpectralBand {
    pub fn centered(width: f64) -> Self {
        SpectralBand {
            lo: -0.5 * width,
            hi: 0.5 * width,
        }
    }

    #[inline]
    pub fn contains(&self, f: f64) -> bool {
        f >= self.lo && f <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaEstimate {
    /// 1/W^2
    pub eta: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl EtaEstimate {
    pub const ZERO: EtaEstimate = EtaEstimate {
        eta: 0.0,
        stderr: 0.0,
        samples: 0,
    };

    fn from_replicates(means: &[f64], samples: u64) -> Self {
        let r = means.len() as f64;
        let mean = means.iter().sum::<f64>() / r;
        let var = if means.len() > 1 {
            means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (r - 1.0)
        } else {
            0.0
        };
        EtaEstimate {
            eta: mean,
            stderr: (var / r).sqrt(),
            samples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QmcSettings {
    pub replicates: usize,
    /// Points per replicate (power of two).
    pub points_per_replicate: u32,
    pub seed: u64,
}

impl QmcSettings {
    /// Split a total budget over [`REPLICATES`] scramblings, rounding each
    /// replicate up to a power of two.
    pub fn from_total(total: u64, seed: u64) -> Self {
        let per = total.div_ceil(REPLICATES as u64).max(16);
        let per = per.next_power_of_two().min(1 << 31) as u32;
        QmcSettings {
            replicates: REPLICATES,
            points_per_replicate: per,
            seed,
        }
    }

    pub fn total(&self) -> u64 {
        self.replicates as u64 * self.points_per_replicate as u64
    }
}

/// Inverse-CDF map with density proportional to 1/(|x - center| + width)
/// on [lo, hi]. Returns (x, 1/density).
#[derive(Debug, Clone, Copy)]
struct LogMap {
    lo: f64,
    hi: f64,
    width: f64,
}

impl LogMap {
    #[inline]
    fn sample(&self, center: f64, t: f64) -> (f64, f64) {
        let w = self.width;
        let ml = ((center - self.lo + w) / w).ln();
        let mr = ((self.hi - center + w) / w).ln();
        let z = ml + mr;
        let s = t * z;
        let d = if s < ml {
            -(w * ((ml - s).exp() - 1.0))
        } else {
            w * ((s - ml).exp() - 1.0)
        };
        let x = (center + d).clamp(self.lo, self.hi);
        (x, z * (d.abs() + w))
    }
}

fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^= x >> 31;
    x
}

/// Per-channel nonlinear coefficients for one band choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearCoefficientTable {
    /// Label of the band choice, e.g. "full" or "nlc-250GHz".
    pub label: String,
    /// Nominal bandwidth used (B or B_NLC), Hz.
    pub bandwidth: f64,
    pub entries: Vec<EtaEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaEntry {
    pub channel: i32,
    /// Absolute optical frequency, Hz.
    pub center_frequency: f64,
    pub estimate: EtaEstimate,
}

impl NonlinearCoefficientTable {
    pub fn get(&self, k: i32) -> Option<&EtaEntry> {
        self.entries.iter().find(|e| e.channel == k)
    }

    pub fn channels(&self) -> Vec<i32> {
        self.entries.iter().map(|e| e.channel).collect()
    }

    /// CSV with columns
    /// `channel_index,center_frequency_THz,eta_inv_W2,stderr,samples`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "channel_index,center_frequency_THz,eta_inv_W2,stderr,samples")?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{:e},{:e},{}",
                e.channel,
                e.center_frequency / 1e12,
                e.estimate.eta,
                e.estimate.stderr,
                e.estimate.samples
            )?;
        }
        Ok(())
    }
}

/// Which compensation band a table is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BandChoice {
    /// The whole transmitted band.
    Full,
    /// NLC band of the given width (Hz), centered on each channel and
    /// clipped to the transmitted band. Zero width means EDC (eta = 0);
    /// widths of at least B mean full-field compensation.
    Nlc(f64),
}

impl BandChoice {
    pub fn label(&self) -> String {
        match *self {
            BandChoice::Full => "full".to_owned(),
            BandChoice::Nlc(b) => format!("nlc-{}GHz", b / 1e9),
        }
    }
}

/// Evaluates eta_k for one physical configuration.
#[derive(Debug, Clone)]
pub struct GnEngine {
    grid: WdmGrid,
    span_count: usize,
    span_length: f64,
    pm: PhaseMismatchParams,
    kernel: FwmKernel,
    prefactor: f64,
    map_width: f64,
    qmc: QmcSettings,
}

impl GnEngine {
    pub fn new(cfg: &SystemConfig, profile: &SpanPowerProfile, qmc: QmcSettings) -> Self {
        Self::from_parts(&cfg.fiber, &cfg.grid, profile, qmc)
    }

    pub fn from_parts(
        fiber: &FiberParams,
        grid: &WdmGrid,
        profile: &SpanPowerProfile,
        qmc: QmcSettings,
    ) -> Self {
        let b = grid.total_bandwidth();
        let rs = grid.symbol_rate;
        // Width where the phase mismatch across the band reaches the
        // attenuation rate; below it the kernel is flat.
        let disp = 4.0 * PI * PI * (fiber.beta2.abs() + PI * b * fiber.beta3.abs());
        let map_width = if disp > 0.0 {
            (fiber.alpha / (disp * b)).clamp(b * 1e-9, b)
        } else {
            b
        };
        GnEngine {
            grid: grid.clone(),
            span_count: fiber.span_count,
            span_length: fiber.span_length,
            pm: PhaseMismatchParams::from(fiber),
            kernel: FwmKernel::from_profile(profile, KERNEL_SEGMENTS),
            prefactor: 16.0 / 27.0 * fiber.gamma * fiber.gamma / (rs * rs),
            map_width,
            qmc,
        }
    }

    pub fn grid(&self) -> &WdmGrid {
        &self.grid
    }

    pub fn qmc(&self) -> &QmcSettings {
        &self.qmc
    }

    pub fn full_band(&self) -> SpectralBand {
        SpectralBand::centered(self.grid.total_bandwidth())
    }

    /// Band seen by the compensator of channel `k`, `None` for EDC.
    pub fn band_for(&self, k: i32, choice: BandChoice) -> Option<SpectralBand> {
        let full = self.full_band();
        match choice {
            BandChoice::Full => Some(full),
            BandChoice::Nlc(w) => {
                if w <= 0.0 {
                    None
                } else if w >= full.width() * (1.0 - 1e-12) {
                    Some(full)
                } else {
                    let c = self.grid.center_offset(k);
                    Some(SpectralBand {
                        lo: (c - 0.5 * w).max(full.lo),
                        hi: (c + 0.5 * w).min(full.hi),
                    })
                }
            }
        }
    }

    /// |mu|^2 = |rho|^2 |phi|^2 at one frequency triple.
    #[inline]
    pub fn kernel(&self, f: f64, f1: f64, f2: f64) -> f64 {
        let db = phase_mismatch(f, f1, f2, &self.pm);
        self.kernel.rho_norm_sqr(db) * phased_array_gain(db, self.span_count, self.span_length)
    }

    fn log_map(&self) -> LogMap {
        let full = self.full_band();
        LogMap {
            lo: full.lo,
            hi: full.hi,
            width: self.map_width,
        }
    }

    /// Accumulates one replicate for several bands at once.
    fn replicate<F>(&self, seed: u64, dims: usize, bands: &[SpectralBand], mut freq: F) -> Vec<f64>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let seq = ScrambledSobol::new(dims, seed);
        let map = self.log_map();
        let n = self.qmc.points_per_replicate;
        let mut acc = vec![0.0; bands.len()];
        let mut u = [0.0; 3];
        for i in 0..n {
            seq.point(i, &mut u[..dims]);
            let f = freq(&u[..dims]);
            let (f1, w1) = map.sample(f, u[0]);
            let (f2, w2) = map.sample(f, u[1]);
            let f3 = f1 + f2 - f;
            let mut value = None;
            for (b, a) in bands.iter().zip(acc.iter_mut()) {
                if b.contains(f) && b.contains(f1) && b.contains(f2) && b.contains(f3) {
                    let v = *value.get_or_insert_with(|| w1 * w2 * self.kernel(f, f1, f2));
                    *a += v;
                }
            }
        }
        acc.iter().map(|a| self.prefactor * a / n as f64).collect()
    }

    fn seed_for(&self, tag: u64, replicate: usize) -> u64 {
        mix64(self.qmc.seed ^ mix64(tag) ^ mix64(0x5851_f42d_4c95_7f2d ^ replicate as u64))
    }

    /// NLI power spectral density factor S(f), so that the NLI PSD for a
    /// per-channel power P is S(f) P^3 / R_S. Restricted to `band`.
    pub fn nli_psd(&self, f: f64, band: SpectralBand) -> Result<EtaEstimate> {
        if self.qmc.points_per_replicate == 0 || self.qmc.replicates == 0 {
            return Err(Error::Domain("zero QMC samples".into()));
        }
        let full = self.full_band();
        if !full.contains(f) {
            return Err(Error::Domain(format!("|f| = {} Hz outside B/2", f.abs())));
        }
        let tag = f.to_bits() ^ 0xa5a5_a5a5_0000_0000;
        let means: Vec<f64> = (0..self.qmc.replicates)
            .map(|r| self.replicate(self.seed_for(tag, r), 2, &[band], |_| f)[0])
            .collect();
        Ok(EtaEstimate::from_replicates(&means, self.qmc.total()))
    }

    /// eta_k for each band in `bands`, all from the same sample points.
    pub fn eta_channel_bands(&self, k: i32, bands: &[SpectralBand]) -> Result<Vec<EtaEstimate>> {
        if !self.grid.contains(k) {
            return Err(Error::Domain(format!("channel {k} outside the grid")));
        }
        if self.qmc.points_per_replicate == 0 || self.qmc.replicates == 0 {
            return Err(Error::Domain("zero QMC samples".into()));
        }
        let df = self.grid.channel_spacing;
        let lo = self.grid.center_offset(k) - 0.5 * df;
        let mut per_band = vec![Vec::with_capacity(self.qmc.replicates); bands.len()];
        for r in 0..self.qmc.replicates {
            let means = self.replicate(self.seed_for(k as i64 as u64, r), 3, bands, |u| lo + df * u[2]);
            for (b, m) in means.into_iter().enumerate() {
                per_band[b].push(m);
            }
        }
        Ok(per_band
            .iter()
            .map(|m| EtaEstimate::from_replicates(m, self.qmc.total()))
            .collect())
    }

    pub fn eta_channel(&self, k: i32, band: SpectralBand) -> Result<EtaEstimate> {
        Ok(self.eta_channel_bands(k, &[band])?[0])
    }

    /// Same engine with the FWM kernel built from another span profile.
    pub fn with_profile(&self, profile: &SpanPowerProfile) -> GnEngine {
        GnEngine {
            kernel: FwmKernel::from_profile(profile, KERNEL_SEGMENTS),
            ..self.clone()
        }
    }

    fn channel_row(&self, k: i32, choices: &[BandChoice]) -> Result<Vec<EtaEstimate>> {
        let bands: Vec<Option<SpectralBand>> = choices.iter().map(|c| self.band_for(k, *c)).collect();
        // Identical bands share one estimate.
        let mut unique: Vec<SpectralBand> = Vec::new();
        for b in bands.iter().flatten() {
            if !unique.contains(b) {
                unique.push(*b);
            }
        }
        let est = if unique.is_empty() {
            Vec::new()
        } else {
            self.eta_channel_bands(k, &unique)?
        };
        Ok(bands
            .iter()
            .map(|b| match b {
                None => EtaEstimate::ZERO,
                Some(b) => est[unique.iter().position(|u| u == b).unwrap()],
            })
            .collect())
    }

    /// Tables for several band choices over every channel. Channels run in
    /// parallel; the result does not depend on the worker count.
    pub fn tables(&self, choices: &[BandChoice]) -> Result<Vec<NonlinearCoefficientTable>> {
        self.tables_with_profiles(choices, None)
    }

    /// As [`GnEngine::tables`], with one span profile per channel (index
    /// order) driving that channel's FWM kernel.
    pub fn tables_with_profiles(
        &self,
        choices: &[BandChoice],
        profiles: Option<&[SpanPowerProfile]>,
    ) -> Result<Vec<NonlinearCoefficientTable>> {
        let channels: Vec<i32> = self.grid.indices().collect();
        if let Some(p) = profiles {
            if p.len() != channels.len() {
                return Err(Error::config(
                    "grid",
                    format!("{} profiles for {} channels", p.len(), channels.len()),
                ));
            }
        }
        let rows: Vec<Vec<EtaEstimate>> = channels
            .par_iter()
            .enumerate()
            .map(|(i, &k)| match profiles {
                Some(p) => self.with_profile(&p[i]).channel_row(k, choices),
                None => self.channel_row(k, choices),
            })
            .collect::<Result<_>>()?;
        Ok(choices
            .iter()
            .enumerate()
            .map(|(ci, c)| NonlinearCoefficientTable {
                label: c.label(),
                bandwidth: match *c {
                    BandChoice::Full => self.grid.total_bandwidth(),
                    BandChoice::Nlc(w) => w,
                },
                entries: channels
                    .iter()
                    .zip(&rows)
                    .map(|(&k, row)| EtaEntry {
                        channel: k,
                        center_frequency: self.grid.center_frequency(k),
                        estimate: row[ci],
                    })
                    .collect(),
            })
            .collect())
    }

    pub fn table(&self, choice: BandChoice) -> Result<NonlinearCoefficientTable> {
        Ok(self.tables(&[choice])?.remove(0))
    }
}
