//! Link description: fiber, WDM grid, amplifier, NLC and campaign settings.
//!
//! A [`SystemConfig`] is built from a strict JSON document written in
//! engineering units (dB/km, ps/nm/km, GHz, ...). After ingestion every
//! quantity is held in SI units and the structure is immutable.

use std::f64::consts::PI;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::*;

/// Relative tolerance for the (D, S) <-> (beta2, beta3) consistency check.
pub const DISPERSION_CONSISTENCY_TOL: f64 = 5e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberParams {
    /// Signal power attenuation, 1/m.
    pub alpha: f64,
    /// Raman pump power attenuation, 1/m.
    pub pump_alpha: f64,
    /// Dispersion parameter D, s/m^2.
    pub dispersion: f64,
    /// Dispersion slope S, s/m^3.
    pub dispersion_slope: f64,
    /// Group-velocity dispersion, s^2/m.
    pub beta2: f64,
    /// Third-order dispersion, s^3/m.
    pub beta3: f64,
    /// Kerr coefficient, 1/(W m).
    pub gamma: f64,
    /// Raman gain slope of the triangular approximation, 1/(W m Hz).
    pub gain_slope: f64,
    /// Span length, m.
    pub span_length: f64,
    pub span_count: usize,
}

impl FiberParams {
    /// Effective length (1 - e^{-aL})/a of one span.
    pub fn effective_length(&self) -> f64 {
        -(-self.alpha * self.span_length).exp_m1() / self.alpha
    }

    /// Span loss e^{aL} (linear).
    pub fn span_loss(&self) -> f64 {
        (self.alpha * self.span_length).exp()
    }

    pub fn total_length(&self) -> f64 {
        self.span_length * self.span_count as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::invariant("attenuation > 0", format!("alpha = {}", self.alpha)));
        }
        if !(self.pump_alpha > 0.0) {
            return Err(Error::invariant(
                "pump attenuation > 0",
                format!("pump alpha = {}", self.pump_alpha),
            ));
        }
        if !(self.span_length > 0.0) {
            return Err(Error::invariant(
                "span length > 0",
                format!("span length = {} m", self.span_length),
            ));
        }
        if self.span_count < 1 {
            return Err(Error::invariant("span count >= 1", "span count = 0"));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::invariant("gamma >= 0", format!("gamma = {}", self.gamma)));
        }
        if !(self.gain_slope >= 0.0) {
            return Err(Error::invariant(
                "gain slope >= 0",
                format!("gain slope = {}", self.gain_slope),
            ));
        }
        if !(self.beta2.is_finite() && self.beta3.is_finite()) {
            return Err(Error::invariant("finite dispersion", "beta2/beta3 not finite"));
        }
        Ok(())
    }
}

/// Nyquist WDM grid. Channel `k` sits at baseband offset `k * spacing`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WdmGrid {
    /// Carrier wavelength, m.
    pub carrier_wavelength: f64,
    /// Channel spacing, Hz.
    pub channel_spacing: f64,
    /// Symbol rate, Bd.
    pub symbol_rate: f64,
    /// Odd number of channels.
    pub channel_count: usize,
}

impl WdmGrid {
    pub fn new(
        carrier_wavelength: f64,
        channel_spacing: f64,
        symbol_rate: f64,
        channel_count: usize,
    ) -> Result<Self> {
        let grid = WdmGrid {
            carrier_wavelength,
            channel_spacing,
            symbol_rate,
            channel_count,
        };
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<()> {
        if self.channel_count == 0 || self.channel_count % 2 == 0 {
            return Err(Error::invariant(
                "channel count odd",
                format!("channel_count = {}", self.channel_count),
            ));
        }
        if !(self.carrier_wavelength > 0.0) {
            return Err(Error::invariant(
                "carrier wavelength > 0",
                format!("{}", self.carrier_wavelength),
            ));
        }
        if !(self.symbol_rate > 0.0) {
            return Err(Error::invariant("symbol rate > 0", format!("{}", self.symbol_rate)));
        }
        if ((self.channel_spacing - self.symbol_rate) / self.symbol_rate).abs() > 1e-9 {
            return Err(Error::invariant(
                "Nyquist spacing (channel spacing == symbol rate)",
                format!(
                    "spacing {} Hz vs symbol rate {} Bd",
                    self.channel_spacing, self.symbol_rate
                ),
            ));
        }
        Ok(())
    }

    /// Total transmitted bandwidth `N_ch * spacing`, Hz.
    pub fn total_bandwidth(&self) -> f64 {
        self.channel_count as f64 * self.channel_spacing
    }

    /// Optical carrier frequency of the central channel, Hz.
    pub fn carrier_frequency(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_wavelength
    }

    pub fn max_index(&self) -> i32 {
        ((self.channel_count - 1) / 2) as i32
    }

    pub fn indices(&self) -> RangeInclusive<i32> {
        -self.max_index()..=self.max_index()
    }

    pub fn contains(&self, k: i32) -> bool {
        k.abs() <= self.max_index()
    }

    /// Baseband center frequency of channel `k`, Hz.
    pub fn center_offset(&self, k: i32) -> f64 {
        k as f64 * self.channel_spacing
    }

    /// Absolute optical frequency of channel `k`, Hz.
    pub fn center_frequency(&self, k: i32) -> f64 {
        self.carrier_frequency() + self.center_offset(k)
    }

    /// Same grid with a different channel count.
    pub fn with_channel_count(&self, channel_count: usize) -> Result<Self> {
        WdmGrid::new(
            self.carrier_wavelength,
            self.channel_spacing,
            self.symbol_rate,
            channel_count,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RamanSpec {
    pub temperature: f64,
    /// Pump-signal frequency offset, Hz.
    pub pump_offset: f64,
    /// Starting pump power for transparency calibration, W.
    pub pump_power: f64,
    /// Raman gain efficiency g_R / A_eff, 1/(W m).
    pub gain_coefficient: f64,
    /// Total signal power coupled back into the pump equation, W.
    /// Zero reproduces the undepleted-pump regime.
    pub depletion_signal_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AmplifierSpec {
    Edfa { noise_figure_db: f64 },
    Raman(RamanSpec),
}

impl AmplifierSpec {
    pub fn scheme_name(&self) -> &'static str {
        match self {
            AmplifierSpec::Edfa { .. } => "edfa",
            AmplifierSpec::Raman(_) => "raman",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            AmplifierSpec::Edfa { noise_figure_db } => {
                // n_sp = NF/2 must be at least one.
                if !(*noise_figure_db >= linear_to_db(2.0) - 1e-12) {
                    return Err(Error::invariant(
                        "NF >= 3 dB (n_sp >= 1)",
                        format!("noise figure {noise_figure_db} dB"),
                    ));
                }
            }
            AmplifierSpec::Raman(r) => {
                if !(r.temperature >= 0.0) {
                    return Err(Error::invariant("temperature >= 0", format!("{}", r.temperature)));
                }
                if !(r.pump_offset > 0.0) {
                    return Err(Error::invariant(
                        "pump offset > 0",
                        format!("{}", r.pump_offset),
                    ));
                }
                if !(r.pump_power > 0.0) {
                    return Err(Error::invariant("pump power > 0", format!("{}", r.pump_power)));
                }
                if !(r.gain_coefficient >= 0.0) {
                    return Err(Error::invariant(
                        "Raman gain coefficient >= 0",
                        format!("{}", r.gain_coefficient),
                    ));
                }
                if !(r.depletion_signal_power >= 0.0) {
                    return Err(Error::invariant(
                        "depletion signal power >= 0",
                        format!("{}", r.depletion_signal_power),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NlcConfig {
    /// Compensated bandwidth, Hz. Zero means EDC only.
    pub bandwidth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapingMode {
    Uniform,
    MaxwellBoltzmann,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerPolicy {
    /// Every channel at its own optimum.
    PerChannelOptimum,
    /// All channels at the central channel's optimum.
    CentralOptimum,
    /// All channels at `launch_power_dbm`.
    Fixed,
}

/// Split-step simulation controls as they appear in a config document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub channel_count: Option<usize>,
    pub symbols: Option<usize>,
    pub samples_per_symbol: Option<usize>,
    pub roll_off: Option<f64>,
    pub steps_per_span: Option<usize>,
    pub modulation_format: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignConfig {
    pub modulation_formats: Vec<u32>,
    pub shaping: ShapingMode,
    pub qmc_samples: u64,
    pub rng_seed: u64,
    pub power_policy: PowerPolicy,
    /// Fixed per-channel launch power, W.
    pub launch_power: Option<f64>,
    pub output_dir: Option<String>,
    pub simulation: Option<SimulationSection>,
}

pub const DEFAULT_QMC_SAMPLES: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    pub fiber: FiberParams,
    pub grid: WdmGrid,
    pub amplifier: AmplifierSpec,
    pub nlc: NlcConfig,
    pub campaign: CampaignConfig,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        self.fiber.validate()?;
        self.grid.validate()?;
        self.amplifier.validate()?;
        let b = self.grid.total_bandwidth();
        if !(self.nlc.bandwidth >= 0.0 && self.nlc.bandwidth <= b * (1.0 + 1e-12)) {
            return Err(Error::invariant(
                "0 <= B_NLC <= B",
                format!("B_NLC = {} Hz, B = {} Hz", self.nlc.bandwidth, b),
            ));
        }
        for &m in &self.campaign.modulation_formats {
            if !is_square_qam(m) {
                return Err(Error::invariant(
                    "square QAM order (even power of 2)",
                    format!("M = {m}"),
                ));
            }
        }
        if self.campaign.qmc_samples == 0 {
            return Err(Error::invariant("qmc samples > 0", "qmc_samples = 0"));
        }
        if self.campaign.power_policy == PowerPolicy::Fixed && self.campaign.launch_power.is_none() {
            return Err(Error::config(
                "campaign.launch_power_dbm",
                "required by power_policy = fixed",
            ));
        }
        Ok(())
    }

    pub fn with_grid(&self, grid: WdmGrid) -> Self {
        SystemConfig {
            grid,
            ..self.clone()
        }
    }
}

pub fn is_square_qam(m: u32) -> bool {
    m >= 4 && m.is_power_of_two() && m.trailing_zeros() % 2 == 0
}

/// Taylor coefficients (beta2 in ps^2/km, beta3 in ps^3/km) from the
/// dispersion parameter D (ps/nm/km), slope S (ps/nm^2/km) and carrier
/// wavelength (nm).
pub fn dispersion_coeffs(d: f64, s: f64, wavelength_nm: f64) -> (f64, f64) {
    let (b2, b3) = betas_si(d * PS_PER_NM_KM, s * PS_PER_NM2_KM, wavelength_nm * NM);
    (b2 / PS2_PER_KM, b3 / PS3_PER_KM)
}

/// Inverse of [`dispersion_coeffs`]: (D, S) in ps/nm/km and ps/nm^2/km.
pub fn dispersion_from_betas(beta2: f64, beta3: f64, wavelength_nm: f64) -> (f64, f64) {
    let lambda = wavelength_nm * NM;
    let c = lambda * lambda / (2.0 * PI * SPEED_OF_LIGHT);
    let d = -beta2 * PS2_PER_KM / c;
    let s = beta3 * PS3_PER_KM / (c * c) - 2.0 * d / lambda;
    (d / PS_PER_NM_KM, s / PS_PER_NM2_KM)
}

fn betas_si(d: f64, s: f64, lambda: f64) -> (f64, f64) {
    let c = lambda * lambda / (2.0 * PI * SPEED_OF_LIGHT);
    (-d * c, c * c * (s + 2.0 * d / lambda))
}

// ---------------------------------------------------------------------------
// Config document (engineering units)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub fiber: FiberSection,
    pub grid: GridSection,
    pub amplifier: AmplifierSection,
    #[serde(default)]
    pub nlc: NlcSection,
    #[serde(default)]
    pub campaign: CampaignSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSection {
    pub attenuation_db_per_km: f64,
    #[serde(default = "default_pump_attenuation")]
    pub pump_attenuation_db_per_km: f64,
    pub dispersion_ps_per_nm_km: f64,
    pub dispersion_slope_ps_per_nm2_km: f64,
    #[serde(default)]
    pub beta2_ps2_per_km: Option<f64>,
    #[serde(default)]
    pub beta3_ps3_per_km: Option<f64>,
    pub gamma_per_w_km: f64,
    #[serde(default)]
    pub gain_slope_per_w_km_thz: f64,
    pub span_length_km: f64,
    pub span_count: usize,
}

fn default_pump_attenuation() -> f64 {
    0.25
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub carrier_wavelength_nm: f64,
    pub channel_spacing_ghz: f64,
    pub symbol_rate_gbd: f64,
    pub channel_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AmplifierSection {
    Edfa {
        noise_figure_db: f64,
    },
    Raman {
        temperature_k: f64,
        pump_frequency_offset_thz: f64,
        pump_power_w: f64,
        raman_gain_per_w_km: f64,
        #[serde(default)]
        depletion_signal_power_w: f64,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlcSection {
    #[serde(default)]
    pub bandwidth_ghz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSection {
    #[serde(default = "default_formats")]
    pub modulation_formats: Vec<u32>,
    #[serde(default = "default_shaping")]
    pub shaping: ShapingMode,
    #[serde(default = "default_qmc_samples")]
    pub qmc_samples: u64,
    #[serde(default = "default_seed")]
    pub rng_seed: u64,
    #[serde(default = "default_power_policy")]
    pub power_policy: PowerPolicy,
    #[serde(default)]
    pub launch_power_dbm: Option<f64>,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub simulation: Option<SimulationSection>,
}

impl Default for CampaignSection {
    fn default() -> Self {
        CampaignSection {
            modulation_formats: default_formats(),
            shaping: default_shaping(),
            qmc_samples: default_qmc_samples(),
            rng_seed: default_seed(),
            power_policy: default_power_policy(),
            launch_power_dbm: None,
            output_dir: None,
            simulation: None,
        }
    }
}

fn default_formats() -> Vec<u32> {
    vec![64, 256, 1024]
}
fn default_shaping() -> ShapingMode {
    ShapingMode::Uniform
}
fn default_qmc_samples() -> u64 {
    DEFAULT_QMC_SAMPLES
}
fn default_seed() -> u64 {
    1
}
fn default_power_policy() -> PowerPolicy {
    PowerPolicy::PerChannelOptimum
}

impl ConfigDocument {
    pub fn into_config(self) -> Result<SystemConfig> {
        let f = &self.fiber;
        let wl_nm = self.grid.carrier_wavelength_nm;
        if !(wl_nm > 0.0) {
            return Err(Error::invariant(
                "carrier wavelength > 0",
                format!("{wl_nm} nm"),
            ));
        }
        let (b2_derived, b3_derived) =
            dispersion_coeffs(f.dispersion_ps_per_nm_km, f.dispersion_slope_ps_per_nm2_km, wl_nm);
        let beta2 = check_consistent("fiber.beta2_ps2_per_km", f.beta2_ps2_per_km, b2_derived)?;
        let beta3 = check_consistent("fiber.beta3_ps3_per_km", f.beta3_ps3_per_km, b3_derived)?;

        let fiber = FiberParams {
            alpha: db_per_km_to_per_m(f.attenuation_db_per_km),
            pump_alpha: db_per_km_to_per_m(f.pump_attenuation_db_per_km),
            dispersion: f.dispersion_ps_per_nm_km * PS_PER_NM_KM,
            dispersion_slope: f.dispersion_slope_ps_per_nm2_km * PS_PER_NM2_KM,
            beta2: beta2 * PS2_PER_KM,
            beta3: beta3 * PS3_PER_KM,
            gamma: f.gamma_per_w_km * PER_W_KM,
            gain_slope: f.gain_slope_per_w_km_thz * PER_W_KM_THZ,
            span_length: f.span_length_km * KM,
            span_count: f.span_count,
        };
        let grid = WdmGrid {
            carrier_wavelength: wl_nm * NM,
            channel_spacing: self.grid.channel_spacing_ghz * GHZ,
            symbol_rate: self.grid.symbol_rate_gbd * GHZ,
            channel_count: self.grid.channel_count,
        };
        let amplifier = match self.amplifier {
            AmplifierSection::Edfa { noise_figure_db } => AmplifierSpec::Edfa { noise_figure_db },
            AmplifierSection::Raman {
                temperature_k,
                pump_frequency_offset_thz,
                pump_power_w,
                raman_gain_per_w_km,
                depletion_signal_power_w,
            } => AmplifierSpec::Raman(RamanSpec {
                temperature: temperature_k,
                pump_offset: pump_frequency_offset_thz * THZ,
                pump_power: pump_power_w,
                gain_coefficient: raman_gain_per_w_km * PER_W_KM,
                depletion_signal_power: depletion_signal_power_w,
            }),
        };
        let c = self.campaign;
        let campaign = CampaignConfig {
            modulation_formats: c.modulation_formats,
            shaping: c.shaping,
            qmc_samples: c.qmc_samples,
            rng_seed: c.rng_seed,
            power_policy: c.power_policy,
            launch_power: c.launch_power_dbm.map(dbm_to_watt),
            output_dir: c.output_dir,
            simulation: c.simulation,
        };
        let cfg = SystemConfig {
            fiber,
            grid,
            amplifier,
            nlc: NlcConfig {
                bandwidth: self.nlc.bandwidth_ghz * GHZ,
            },
            campaign,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn check_consistent(field: &str, given: Option<f64>, derived: f64) -> Result<f64> {
    match given {
        None => Ok(derived),
        Some(v) => {
            let scale = v.abs().max(derived.abs());
            if scale > 0.0 && (v - derived).abs() > DISPERSION_CONSISTENCY_TOL * scale {
                return Err(Error::invariant(
                    "(beta2, beta3) consistent with (D, S) within 0.5%",
                    format!("{field} = {v}, derived from D/S = {derived}"),
                ));
            }
            Ok(v)
        }
    }
}

/// Parse and validate a JSON config document.
pub fn load_config(document: &str) -> Result<SystemConfig> {
    let doc: ConfigDocument = serde_json::from_str(document).map_err(schema_error)?;
    doc.into_config()
}

pub fn load_config_file(path: impl AsRef<Path>) -> Result<SystemConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_config(&text)
}

fn schema_error(e: serde_json::Error) -> Error {
    let msg = e.to_string();
    // serde reports "unknown field `x`" / "missing field `x`"; surface the name.
    let field = msg
        .split('`')
        .nth(1)
        .map(str::to_owned)
        .unwrap_or_else(|| "<document>".to_owned());
    Error::config(field, msg)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const TABLE1_EDFA: &str = r#"{
        "fiber": {
            "attenuation_db_per_km": 0.2,
            "pump_attenuation_db_per_km": 0.25,
            "dispersion_ps_per_nm_km": 17.0,
            "dispersion_slope_ps_per_nm2_km": 0.067,
            "beta2_ps2_per_km": -21.67,
            "beta3_ps3_per_km": 0.145,
            "gamma_per_w_km": 1.2,
            "span_length_km": 80.0,
            "span_count": 25
        },
        "grid": {
            "carrier_wavelength_nm": 1550.0,
            "channel_spacing_ghz": 32.0,
            "symbol_rate_gbd": 32.0,
            "channel_count": 157
        },
        "amplifier": { "scheme": "edfa", "noise_figure_db": 4.5 }
    }"#;

    #[test]
    fn table1_dispersion_pair() {
        let (b2, b3) = dispersion_coeffs(17.0, 0.067, 1550.0);
        assert!(((b2 + 21.67) / 21.67).abs() < 5e-3, "beta2 = {b2}");
        assert!(((b3 - 0.145) / 0.145).abs() < 5e-3, "beta3 = {b3}");
    }

    #[test]
    fn zero_dispersion_fiber() {
        assert_eq!(dispersion_coeffs(0.0, 0.0, 1550.0), (0.0, 0.0));
    }

    #[test]
    fn nzdsf_pair() {
        // Independent evaluation in engineering units:
        // lambda^2/(2 pi c) = 1.27541e-21 s m; beta2 = -4.5e-6 * that.
        let (b2, b3) = dispersion_coeffs(4.5, 0.05, 1550.0);
        assert!((b2 + 5.739).abs() < 5e-3, "beta2 = {b2}");
        assert!((b3 - 0.0908).abs() < 5e-4, "beta3 = {b3}");
    }

    #[test]
    fn dispersion_round_trip() {
        for &(d, s) in &[(17.0, 0.067), (4.5, 0.05), (-3.0, 0.1), (20.0, 0.0)] {
            let (b2, b3) = dispersion_coeffs(d, s, 1550.0);
            let (d2, s2) = dispersion_from_betas(b2, b3, 1550.0);
            assert!(((d2 - d) / d).abs() < 1e-9);
            if s != 0.0 {
                assert!(((s2 - s) / s).abs() < 1e-9);
            } else {
                assert!(s2.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn table1_document_loads() {
        let cfg = load_config(TABLE1_EDFA).unwrap();
        let b = cfg.grid.total_bandwidth();
        assert!((b - 157.0 * 32e9).abs() < 1.0);
        assert!((b / 1e12 - 5.024).abs() < 1e-9);
        assert_eq!(cfg.fiber.span_count, 25);
        assert!((cfg.fiber.span_length - 80e3).abs() < 1e-9);
        assert_eq!(cfg.campaign.modulation_formats, vec![64, 256, 1024]);
        let idx: Vec<i32> = cfg.grid.indices().collect();
        assert_eq!(idx.len(), 157);
        assert!(idx.iter().all(|k| idx.contains(&-k)));
    }

    #[test]
    fn even_channel_count_rejected() {
        let doc = TABLE1_EDFA.replace("\"channel_count\": 157", "\"channel_count\": 156");
        match load_config(&doc) {
            Err(Error::Invariant { invariant, .. }) => assert!(invariant.contains("odd")),
            other => panic!("expected invariant error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let doc = TABLE1_EDFA.replace("\"span_count\": 25", "\"span_count\": 25, \"colour\": 3");
        match load_config(&doc) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "colour"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn missing_key_named() {
        let doc = TABLE1_EDFA.replace("\"gamma_per_w_km\": 1.2,", "");
        match load_config(&doc) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "gamma_per_w_km"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn inconsistent_beta_rejected() {
        let doc = TABLE1_EDFA.replace("-21.67", "-25.0");
        assert!(matches!(load_config(&doc), Err(Error::Invariant { .. })));
    }

    #[test]
    fn non_nyquist_grid_rejected() {
        let doc = TABLE1_EDFA.replace("\"channel_spacing_ghz\": 32.0", "\"channel_spacing_ghz\": 37.5");
        assert!(matches!(load_config(&doc), Err(Error::Invariant { .. })));
    }

    #[test]
    fn non_square_format_rejected() {
        let doc = TABLE1_EDFA.replace(
            "\"amplifier\"",
            "\"campaign\": {\"modulation_formats\": [32]}, \"amplifier\"",
        );
        assert!(matches!(load_config(&doc), Err(Error::Invariant { .. })));
    }

    #[test]
    fn table2_ssmf_launch_power() {
        let doc = r#"{
            "fiber": {
                "attenuation_db_per_km": 0.2,
                "dispersion_ps_per_nm_km": 17.0,
                "dispersion_slope_ps_per_nm2_km": 0.067,
                "gamma_per_w_km": 1.2,
                "gain_slope_per_w_km_thz": 0.028,
                "span_length_km": 80.0,
                "span_count": 15
            },
            "grid": {"carrier_wavelength_nm": 1550.0, "channel_spacing_ghz": 32.0,
                     "symbol_rate_gbd": 32.0, "channel_count": 81},
            "amplifier": {"scheme": "edfa", "noise_figure_db": 4.5},
            "campaign": {"power_policy": "fixed", "launch_power_dbm": -2.76}
        }"#;
        let cfg = load_config(doc).unwrap();
        let p = cfg.campaign.launch_power.unwrap();
        assert!((watt_to_dbm(p) + 2.76).abs() < 1e-12);
        assert!((cfg.fiber.gain_slope - 0.028e-15).abs() < 1e-30);
    }

    #[test]
    fn raman_section_parses() {
        let doc = TABLE1_EDFA.replace(
            r#"{ "scheme": "edfa", "noise_figure_db": 4.5 }"#,
            r#"{ "scheme": "raman", "temperature_k": 300, "pump_frequency_offset_thz": 13.2,
                 "pump_power_w": 0.5, "raman_gain_per_w_km": 0.4 }"#,
        );
        let cfg = load_config(&doc).unwrap();
        match cfg.amplifier {
            AmplifierSpec::Raman(r) => {
                assert_eq!(r.depletion_signal_power, 0.0);
                assert!((r.pump_offset - 13.2e12).abs() < 1.0);
            }
            _ => panic!("expected raman"),
        }
    }

    #[test]
    fn nlc_wider_than_band_rejected() {
        let doc = TABLE1_EDFA.replace("\"amplifier\"", "\"nlc\": {\"bandwidth_ghz\": 6000}, \"amplifier\"");
        assert!(matches!(load_config(&doc), Err(Error::Invariant { .. })));
    }
}
