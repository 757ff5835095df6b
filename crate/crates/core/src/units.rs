//! Physical constants and engineering-unit conversions.
//!
//! Everything inside the engine runs in SI base units (W, m, s, Hz). The
//! helpers here are the only place where dB, dBm, ps/nm/km and friends are
//! turned into SI values.

use std::f64::consts::LN_10;

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    1e-3 * db_to_linear(dbm)
}

pub fn watt_to_dbm(w: f64) -> f64 {
    linear_to_db(w / 1e-3)
}

/// Power attenuation in dB/km to the natural-log coefficient in 1/m.
pub fn db_per_km_to_per_m(db_per_km: f64) -> f64 {
    db_per_km * LN_10 / 10.0 / 1e3
}

pub fn per_m_to_db_per_km(alpha: f64) -> f64 {
    alpha * 1e3 * 10.0 / LN_10
}

// Dispersion family: engineering unit -> SI multiplier.
pub const PS_PER_NM_KM: f64 = 1e-6; // s/m^2
pub const PS_PER_NM2_KM: f64 = 1e3; // s/m^3
pub const PS2_PER_KM: f64 = 1e-27; // s^2/m
pub const PS3_PER_KM: f64 = 1e-39; // s^3/m
pub const PER_W_KM: f64 = 1e-3; // 1/(W m)
pub const PER_W_KM_THZ: f64 = 1e-15; // 1/(W m Hz)

pub const GHZ: f64 = 1e9;
pub const THZ: f64 = 1e12;
pub const KM: f64 = 1e3;
pub const NM: f64 = 1e-9;
