use num_complex::Complex64;
use rustfft::FftPlanner;

use super::propagate::Propagator;
use super::signal::{rrc_response, FieldBuffer, TxRecord};
use crate::error::{Error, Result};
use crate::system::WdmGrid;
use crate::units::linear_to_db;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelEstimate {
    pub channel: i32,
    pub snr_linear: f64,
    pub snr_db: f64,
    /// Least-squares channel gain per polarization.
    pub gain: [Complex64; 2],
}

/// Data-aided SNR of channel `k` from a field already transformed to the
/// frequency domain and dispersion-compensated.
fn estimate_from_spectrum(
    spectrum: &FieldBuffer,
    k: i32,
    grid: &WdmGrid,
    roll_off: f64,
    tx: &TxRecord,
) -> Result<ChannelEstimate> {
    let pos = tx
        .channels
        .iter()
        .position(|&c| c == k)
        .ok_or_else(|| Error::Domain(format!("channel {k} was not transmitted")))?;
    let n = spectrum.len();
    let ns = tx.symbols[pos][0].len();
    let center = k as i64 * ns as i64;
    let support = ((ns as f64) * 0.5 * (1.0 + roll_off)).ceil() as i64 + 1;
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(ns);
    let mut signal = 0.0;
    let mut noise = 0.0;
    let mut gain = [Complex64::new(0.0, 0.0); 2];
    for (pol, buf) in [&spectrum.x, &spectrum.y].into_iter().enumerate() {
        // Matched filter and symbol-rate sampling: fold the filtered band
        // onto ns bins around the channel center.
        let mut z = vec![Complex64::new(0.0, 0.0); ns];
        for off in -support..=support {
            let h = rrc_response(off as f64 * grid.symbol_rate / ns as f64, grid.symbol_rate, roll_off);
            if h == 0.0 {
                continue;
            }
            let bin = (center + off).rem_euclid(n as i64) as usize;
            z[off.rem_euclid(ns as i64) as usize] += buf[bin] * h;
        }
        ifft.process(&mut z);
        let a = &tx.symbols[pos][pol];
        let cross: Complex64 = z.iter().zip(a).map(|(r, s)| r * s.conj()).sum();
        let ea: f64 = a.iter().map(|s| s.norm_sqr()).sum();
        let h = cross / ea;
        let var: f64 = z.iter().zip(a).map(|(r, s)| (r - h * s).norm_sqr()).sum();
        signal += h.norm_sqr() * ea;
        noise += var;
        gain[pol] = h;
    }
    let snr = signal / noise;
    Ok(ChannelEstimate {
        channel: k,
        snr_linear: snr,
        snr_db: linear_to_db(snr),
        gain,
    })
}

/// Ideal coherent receiver for channel `k`: full-field dispersion
/// compensation over `total_length` metres, matched RRC filter, symbol-rate
/// sampling and least-squares scaling against the transmitted symbols.
pub fn receive_channel(
    field: &FieldBuffer,
    k: i32,
    grid: &WdmGrid,
    roll_off: f64,
    tx: &TxRecord,
    propagator: &mut Propagator,
    total_length: f64,
) -> Result<ChannelEstimate> {
    let mut spectrum = field.clone();
    propagator.forward(&mut spectrum);
    propagator.linear_spectrum(&mut spectrum, -total_length, false);
    estimate_from_spectrum(&spectrum, k, grid, roll_off, tx)
}

/// All transmitted channels from one compensated spectrum.
pub fn receive_all(
    field: &FieldBuffer,
    grid: &WdmGrid,
    roll_off: f64,
    tx: &TxRecord,
    propagator: &mut Propagator,
    total_length: f64,
) -> Result<Vec<ChannelEstimate>> {
    let mut spectrum = field.clone();
    propagator.forward(&mut spectrum);
    propagator.linear_spectrum(&mut spectrum, -total_length, false);
    tx.channels
        .iter()
        .map(|&k| estimate_from_spectrum(&spectrum, k, grid, roll_off, tx))
        .collect()
}
