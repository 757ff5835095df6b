use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateMetrics {
    /// Dual-polarization achievable information rate, bit/s.
    pub air: f64,
    /// bit/s/Hz
    pub spectral_efficiency: f64,
    /// Ideal code rate MI / log2 M.
    pub code_rate: f64,
    /// FEC overhead (1/R - 1) * 100, percent.
    pub overhead_percent: f64,
}

/// AIR = 2 R_S MI, SE = AIR / spacing, R = MI / log2 M.
pub fn air_and_code_rate(mi: f64, symbol_rate: f64, order: u32, channel_spacing: f64) -> Result<RateMetrics> {
    let bits = (order as f64).log2();
    if !(mi >= 0.0) || mi > bits * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("MI {mi} outside [0, {bits}]")));
    }
    let mi = mi.min(bits);
    let air = 2.0 * symbol_rate * mi;
    let code_rate = mi / bits;
    Ok(RateMetrics {
        air,
        spectral_efficiency: air / channel_spacing,
        code_rate,
        overhead_percent: (1.0 / code_rate - 1.0) * 100.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_rate() {
        let r = air_and_code_rate(6.0, 32e9, 64, 32e9).unwrap();
        assert_eq!(r.air, 384e9);
        assert_eq!(r.spectral_efficiency, 12.0);
        assert_eq!(r.code_rate, 1.0);
        assert_eq!(r.overhead_percent, 0.0);
    }

    #[test]
    fn five_of_six() {
        let r = air_and_code_rate(5.0, 32e9, 64, 32e9).unwrap();
        assert!((r.code_rate - 5.0 / 6.0).abs() < 1e-15);
        assert!((r.overhead_percent - 20.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range() {
        assert!(air_and_code_rate(-0.1, 32e9, 64, 32e9).is_err());
        assert!(air_and_code_rate(6.1, 32e9, 64, 32e9).is_err());
    }
}
