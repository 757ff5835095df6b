use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::propagate::Propagator;
use super::receiver::{receive_all, ChannelEstimate};
use super::signal::{generate_wdm_signal, stream_seed, SimulationConfig};
use crate::amplification::{edfa_ase_variance, SpanPowerProfile};
use crate::error::{Error, Result};
use crate::gn::{BandChoice, GnEngine, QmcSettings};
use crate::infotheory::{build_constellation, Shaping};
use crate::performance::{effective_snr, optimum_launch_power};
use crate::system::{AmplifierSpec, SystemConfig};
use crate::units::linear_to_db;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// 9 channels, 2^16 symbols, 32 samples/symbol, 200 steps/span unless
    /// the configuration overrides them.
    Desk,
    /// 81 channels, 2^18 symbols, 162 samples/symbol, 2000 steps/span.
    Paper,
}

impl Profile {
    pub fn simulation(&self, cfg: &SystemConfig) -> SimulationConfig {
        let base = match self {
            Profile::Desk => SimulationConfig::default(),
            Profile::Paper => SimulationConfig {
                channel_count: 81,
                symbols: 1 << 18,
                samples_per_symbol: 162,
                steps_per_span: 2000,
                ..SimulationConfig::default()
            },
        };
        let mut sim = SimulationConfig {
            seed: cfg.campaign.rng_seed,
            launch_power: cfg.campaign.launch_power,
            modulation_format: cfg.campaign.modulation_formats.first().copied().unwrap_or(256),
            ..base
        };
        if let (Profile::Desk, Some(s)) = (self, &cfg.campaign.simulation) {
            sim.channel_count = s.channel_count.unwrap_or(sim.channel_count);
            sim.symbols = s.symbols.unwrap_or(sim.symbols);
            sim.samples_per_symbol = s.samples_per_symbol.unwrap_or(sim.samples_per_symbol);
            sim.roll_off = s.roll_off.unwrap_or(sim.roll_off);
            sim.steps_per_span = s.steps_per_span.unwrap_or(sim.steps_per_span);
            sim.modulation_format = s.modulation_format.unwrap_or(sim.modulation_format);
        } else if let Some(m) = cfg.campaign.simulation.as_ref().and_then(|s| s.modulation_format) {
            sim.modulation_format = m;
        }
        sim
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationRow {
    pub channel: i32,
    pub frequency_thz: f64,
    pub snr_sim_db: f64,
    pub snr_model_db: f64,
    /// simulated minus modeled, dB
    pub difference_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub simulation: SimulationConfig,
    pub launch_power_w: f64,
    pub rows: Vec<VerificationRow>,
    /// Mean SNR of the low-frequency half minus the high-frequency half, dB.
    pub asymmetry_sim_db: f64,
    pub asymmetry_model_db: f64,
    /// Model asymmetry of the same system with the dispersion slope removed.
    pub asymmetry_model_no_slope_db: f64,
}

impl VerificationReport {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "channel_index,center_frequency_THz,snr_sim_dB,snr_model_dB,difference_dB")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{:e}",
                r.channel, r.frequency_thz, r.snr_sim_db, r.snr_model_db, r.difference_db
            )?;
        }
        Ok(())
    }
}

pub(crate) fn asymmetry_db(channels: &[i32], snr_db: &[f64]) -> f64 {
    let mean = |pred: fn(i32) -> bool| {
        let v: Vec<f64> = channels
            .iter()
            .zip(snr_db)
            .filter(|(k, _)| pred(**k))
            .map(|(_, s)| *s)
            .collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    };
    mean(|k| k < 0) - mean(|k| k > 0)
}

fn edfa_noise_figure(cfg: &SystemConfig) -> Result<f64> {
    match cfg.amplifier {
        AmplifierSpec::Edfa { noise_figure_db } => Ok(noise_figure_db),
        AmplifierSpec::Raman(_) => Err(Error::Unsupported(
            "split-step verification models lumped EDFA links only".into(),
        )),
    }
}

/// Runs the split-step link and returns per-channel SNR estimates.
pub fn simulate(cfg: &SystemConfig, sim: &SimulationConfig, launch_power: f64) -> Result<Vec<ChannelEstimate>> {
    let grid = cfg.grid.with_channel_count(sim.channel_count)?;
    let nf = edfa_noise_figure(cfg)?;
    let shaping = Shaping::Uniform;
    let constellation = build_constellation(sim.modulation_format, shaping)?;
    let (mut field, tx) = generate_wdm_signal(&grid, sim, &constellation, launch_power)?;
    let fiber = &cfg.fiber;
    let mut prop = Propagator::new(fiber, field.len(), field.sample_rate, sim.steps_per_span);
    let gain = (0.5 * fiber.alpha * fiber.span_length).exp();
    let ase = edfa_ase_variance(
        fiber.alpha,
        fiber.span_length,
        nf,
        grid.carrier_frequency(),
        grid.channel_spacing,
    )?;
    // Per-sample variance per polarization; half of it per quadrature.
    let sigma = (0.5 * ase * field.sample_rate / (2.0 * grid.channel_spacing)).sqrt();
    for span in 0..fiber.span_count {
        prop.span(&mut field);
        for (pol, buf) in [&mut field.x, &mut field.y].into_iter().enumerate() {
            buf.iter_mut().for_each(|v| *v *= gain);
            if sim.ase {
                let mut rng = ChaCha20Rng::seed_from_u64(stream_seed(sim.seed, span as u64, pol as u64, 2));
                for v in buf.iter_mut() {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    *v += Complex64::new(re, im) * sigma;
                }
            }
        }
    }
    receive_all(&field, &grid, sim.roll_off, &tx, &mut prop, fiber.total_length())
}

/// GN prediction of the simulated system (EDC, no SRS).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnPrediction {
    /// Common launch power, W.
    pub launch_power: f64,
    pub snr_db: Vec<f64>,
    /// Same system with the dispersion slope removed.
    pub snr_no_slope_db: Vec<f64>,
}

/// GN prediction at the simulation's launch power, or at the central-channel
/// optimum when none is set.
pub fn gn_prediction(cfg: &SystemConfig, sim: &SimulationConfig, qmc: QmcSettings) -> Result<GnPrediction> {
    let grid = cfg.grid.with_channel_count(sim.channel_count)?;
    let nf = edfa_noise_figure(cfg)?;
    let mut fiber = cfg.fiber.clone();
    fiber.gain_slope = 0.0;
    let ase = fiber.span_count as f64
        * edfa_ase_variance(fiber.alpha, fiber.span_length, nf, grid.carrier_frequency(), grid.channel_spacing)?;
    let profile = SpanPowerProfile::edfa(&fiber);
    let eta = |fiber: &crate::system::FiberParams| -> Result<Vec<f64>> {
        let e = GnEngine::from_parts(fiber, &grid, &profile, qmc);
        Ok(e.table(BandChoice::Full)?.entries.iter().map(|x| x.estimate.eta).collect())
    };
    let with_slope = eta(&fiber)?;
    let mut flat = fiber.clone();
    flat.beta3 = 0.0;
    let without = eta(&flat)?;
    let power = match sim.launch_power {
        Some(p) => p,
        None => optimum_launch_power(ase, with_slope[with_slope.len() / 2])?,
    };
    let snr = |etas: &[f64]| -> Result<Vec<f64>> {
        etas.iter().map(|&e| effective_snr(power, ase, e).map(linear_to_db)).collect()
    };
    Ok(GnPrediction {
        launch_power: power,
        snr_db: snr(&with_slope)?,
        snr_no_slope_db: snr(&without)?,
    })
}

/// Split-step simulation paired with the GN prediction of the same system.
pub fn run_verification_campaign(
    cfg: &SystemConfig,
    sim: &SimulationConfig,
    qmc: QmcSettings,
) -> Result<VerificationReport> {
    let grid = cfg.grid.with_channel_count(sim.channel_count)?;
    sim.validate(&grid)?;
    let GnPrediction {
        launch_power: power,
        snr_db: model_db,
        snr_no_slope_db: model_flat_db,
    } = gn_prediction(cfg, sim, qmc)?;
    let est = simulate(cfg, sim, power)?;
    let channels: Vec<i32> = grid.indices().collect();
    let rows: Vec<VerificationRow> = est
        .iter()
        .zip(&model_db)
        .map(|(e, &m)| VerificationRow {
            channel: e.channel,
            frequency_thz: grid.center_frequency(e.channel) / 1e12,
            snr_sim_db: e.snr_db,
            snr_model_db: m,
            difference_db: e.snr_db - m,
        })
        .collect();
    let sim_db: Vec<f64> = rows.iter().map(|r| r.snr_sim_db).collect();
    Ok(VerificationReport {
        simulation: SimulationConfig {
            launch_power: Some(power),
            ..sim.clone()
        },
        launch_power_w: power,
        asymmetry_sim_db: asymmetry_db(&channels, &sim_db),
        asymmetry_model_db: asymmetry_db(&channels, &model_db),
        asymmetry_model_no_slope_db: asymmetry_db(&channels, &model_flat_db),
        rows,
    })
}
