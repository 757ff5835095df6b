use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::ConstellationSpec;
use crate::system::WdmGrid;

/// Simulation controls. The grid (spacing, symbol rate) comes from the
/// system configuration; `channel_count` overrides its channel count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub channel_count: usize,
    pub symbols: usize,
    pub samples_per_symbol: usize,
    pub roll_off: f64,
    pub steps_per_span: usize,
    pub seed: u64,
    /// Per-channel launch power, W. `None` uses the GN central-channel
    /// optimum of the simulated system.
    pub launch_power: Option<f64>,
    pub modulation_format: u32,
    /// Inject ASE at every amplifier.
    pub ase: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            channel_count: 9,
            symbols: 1 << 16,
            samples_per_symbol: 32,
            roll_off: 1e-4,
            steps_per_span: 200,
            seed: 1,
            launch_power: None,
            modulation_format: 256,
            ase: true,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self, grid: &WdmGrid) -> Result<()> {
        if self.channel_count % 2 == 0 || self.channel_count == 0 {
            return Err(Error::config("simulation.channel_count", "must be odd"));
        }
        if self.symbols < 1 << 12 || !self.symbols.is_power_of_two() {
            return Err(Error::config(
                "simulation.symbols",
                format!("need a power of two >= 4096, got {}", self.symbols),
            ));
        }
        if !(0.0..=1.0).contains(&self.roll_off) {
            return Err(Error::config("simulation.roll_off", "must lie in [0, 1]"));
        }
        if self.steps_per_span == 0 {
            return Err(Error::config("simulation.steps_per_span", "must be >= 1"));
        }
        let fs = self.sample_rate(grid);
        let occupied = self.channel_count as f64 * grid.channel_spacing + grid.symbol_rate * self.roll_off;
        if fs < occupied {
            return Err(Error::config(
                "simulation.samples_per_symbol",
                format!(
                    "sample rate {:.1} GHz below the occupied bandwidth {:.1} GHz",
                    fs / 1e9,
                    occupied / 1e9
                ),
            ));
        }
        if let Some(p) = self.launch_power {
            if !(p > 0.0) {
                return Err(Error::config("simulation.launch_power", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn sample_rate(&self, grid: &WdmGrid) -> f64 {
        self.samples_per_symbol as f64 * grid.symbol_rate
    }

    pub fn samples(&self) -> usize {
        self.symbols * self.samples_per_symbol
    }
}

/// Two polarization components of the complex baseband field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldBuffer {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    /// Hz
    pub sample_rate: f64,
}

impl FieldBuffer {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Mean total power over both polarizations, W.
    pub fn power(&self) -> f64 {
        let e: f64 = self.x.iter().chain(&self.y).map(|v| v.norm_sqr()).sum();
        e / self.x.len() as f64
    }

    /// Frequency (Hz) of FFT bin `i`.
    pub fn bin_frequency(&self, i: usize) -> f64 {
        bin_frequency(i, self.len(), self.sample_rate)
    }
}

pub(crate) fn bin_frequency(i: usize, n: usize, fs: f64) -> f64 {
    let s = if i < n.div_ceil(2) { i as f64 } else { i as f64 - n as f64 };
    s * fs / n as f64
}

/// Transmitted symbols, `symbols[channel position][polarization]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TxRecord {
    pub channels: Vec<i32>,
    pub symbols: Vec<[Vec<Complex64>; 2]>,
    pub launch_power: f64,
}

/// Root-raised-cosine amplitude response at baseband frequency `f`.
pub fn rrc_response(f: f64, symbol_rate: f64, roll_off: f64) -> f64 {
    let a = f.abs();
    let lo = 0.5 * (1.0 - roll_off) * symbol_rate;
    let hi = 0.5 * (1.0 + roll_off) * symbol_rate;
    if a <= lo {
        1.0
    } else if a > hi {
        0.0
    } else {
        let t = std::f64::consts::PI / (roll_off * symbol_rate) * (a - lo);
        (0.5 * (1.0 + t.cos())).sqrt()
    }
}

pub(crate) fn stream_seed(seed: u64, a: u64, b: u64, tag: u64) -> u64 {
    let mut x = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for v in [a, b] {
        x ^= v.wrapping_add(0x632b_e59b_d9b4_e019);
        x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x ^= x >> 29;
    }
    x
}

/// Builds the multiplexed transmit field. Each channel/polarization carries
/// independent symbols drawn from the constellation PMF, RRC-shaped on a
/// periodic frame and scaled to exactly half the launch power.
pub fn generate_wdm_signal(
    grid: &WdmGrid,
    sim: &SimulationConfig,
    constellation: &ConstellationSpec,
    launch_power: f64,
) -> Result<(FieldBuffer, TxRecord)> {
    sim.validate(grid)?;
    if (grid.channel_spacing - grid.symbol_rate).abs() > 1e-9 * grid.symbol_rate {
        return Err(Error::config("grid", "simulation requires Nyquist spacing"));
    }
    let ns = sim.symbols;
    let n = sim.samples();
    let fs = sim.sample_rate(grid);
    let half = (sim.channel_count / 2) as i32;
    let pick = WeightedIndex::new(&constellation.pmf).map_err(|e| Error::Domain(e.to_string()))?;
    let mut planner = FftPlanner::<f64>::new();
    let sym_fft = planner.plan_fft_forward(ns);
    let inv = planner.plan_fft_inverse(n);

    let mut spectra = [vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]];
    let mut record = TxRecord {
        channels: (-half..=half).collect(),
        symbols: Vec::with_capacity(sim.channel_count),
        launch_power,
    };
    let support = ((ns as f64) * 0.5 * (1.0 + sim.roll_off)).ceil() as i64 + 1;
    for &k in &record.channels {
        let mut pair: [Vec<Complex64>; 2] = [Vec::new(), Vec::new()];
        for (pol, spectrum) in spectra.iter_mut().enumerate() {
            let mut rng = ChaCha20Rng::seed_from_u64(stream_seed(sim.seed, k as i64 as u64, pol as u64, 1));
            let syms: Vec<Complex64> = (0..ns).map(|_| constellation.points[pick.sample(&mut rng)]).collect();
            let mut a = syms.clone();
            sym_fft.process(&mut a);
            // Channel k sits k * ns bins from the center.
            let center = k as i64 * ns as i64;
            let mut shaped = Vec::with_capacity(2 * support as usize + 1);
            let mut energy = 0.0;
            for off in -support..=support {
                let f = off as f64 * grid.symbol_rate / ns as f64;
                let h = rrc_response(f, grid.symbol_rate, sim.roll_off);
                if h == 0.0 {
                    continue;
                }
                let v = a[off.rem_euclid(ns as i64) as usize] * h;
                energy += v.norm_sqr();
                shaped.push(((center + off).rem_euclid(n as i64) as usize, v));
            }
            // Parseval: mean |x|^2 = sum |X|^2 / n^2 with x = ifft(X) / n.
            let scale = (0.5 * launch_power / (energy / (n as f64 * n as f64))).sqrt();
            for (bin, v) in shaped {
                spectrum[bin] += v * scale;
            }
            pair[pol] = syms;
        }
        record.symbols.push(pair);
    }
    let [mut x, mut y] = spectra;
    let norm = 1.0 / n as f64;
    for buf in [&mut x, &mut y] {
        inv.process(buf);
        buf.iter_mut().for_each(|v| *v *= norm);
    }
    Ok((FieldBuffer { x, y, sample_rate: fs }, record))
}
