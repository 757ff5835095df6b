use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::is_square_qam;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Shaping {
    Uniform,
    /// p(x) ~ exp(-zeta |x|^2) on the unit-energy uniform grid.
    MaxwellBoltzmann { zeta: f64 },
}

impl Shaping {
    pub fn tag(&self) -> &'static str {
        match self {
            Shaping::Uniform => "uniform",
            Shaping::MaxwellBoltzmann { .. } => "mb",
        }
    }

    pub fn zeta(&self) -> f64 {
        match *self {
            Shaping::Uniform => 0.0,
            Shaping::MaxwellBoltzmann { zeta } => zeta,
        }
    }
}

/// One quadrature of a square QAM: sqrt(M) levels and their PMF, scaled so
/// the energy per real dimension is 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct Pam {
    pub levels: Vec<f64>,
    pub pmf: Vec<f64>,
}

impl Pam {
    pub fn energy(&self) -> f64 {
        self.levels.iter().zip(&self.pmf).map(|(a, p)| p * a * a).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationSpec {
    pub order: u32,
    pub points: Vec<Complex64>,
    pub pmf: Vec<f64>,
    /// Gray bit labels, one per point.
    pub labels: Vec<u32>,
    pub shaping: Shaping,
    /// The constituent one-dimensional PMF; points are `re = pam[i / m]`,
    /// `im = pam[i % m]`.
    pub pam: Pam,
}

impl ConstellationSpec {
    pub fn energy(&self) -> f64 {
        self.points.iter().zip(&self.pmf).map(|(x, p)| p * x.norm_sqr()).sum()
    }

    /// PMF entropy in bits.
    pub fn entropy(&self) -> f64 {
        2.0 * entropy_bits(&self.pam.pmf)
    }

    pub fn bits(&self) -> f64 {
        (self.order as f64).log2()
    }
}

pub(crate) fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter().filter(|&&p| p > 0.0).map(|p| p * p.log2()).sum::<f64>()
}

/// Binary-reflected Gray code.
pub fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

fn pam(side: usize, zeta: f64) -> Pam {
    // Uniform grid with unit 2-D energy: E_1D = (m^2 - 1)/3 per dimension.
    let scale = (2.0 * ((side * side) as f64 - 1.0) / 3.0).sqrt().recip();
    let grid: Vec<f64> = (0..side)
        .map(|i| (2.0 * i as f64 - (side as f64 - 1.0)) * scale)
        .collect();
    let mut pmf: Vec<f64> = if zeta == 0.0 {
        vec![1.0 / side as f64; side]
    } else {
        // Shift the exponent so the largest weight is 1.
        let emin = grid.iter().map(|a| a * a).fold(f64::INFINITY, f64::min);
        grid.iter().map(|a| (-zeta * (a * a - emin)).exp()).collect()
    };
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|p| *p /= total);
    let mut out = Pam { levels: grid, pmf };
    let e = out.energy();
    let rescale = (0.5 / e).sqrt();
    out.levels.iter_mut().for_each(|a| *a *= rescale);
    out
}

/// Gray-labelled square QAM with unit average energy under its PMF.
pub fn build_constellation(order: u32, shaping: Shaping) -> Result<ConstellationSpec> {
    if !is_square_qam(order) {
        return Err(Error::Unsupported(format!("{order}-QAM is not a square constellation")));
    }
    let zeta = shaping.zeta();
    if !(zeta >= 0.0) || !zeta.is_finite() {
        return Err(Error::Domain(format!("zeta must be finite and >= 0, got {zeta}")));
    }
    let side = (order as f64).sqrt().round() as usize;
    let bits = side.trailing_zeros();
    let pam = pam(side, zeta);
    let mut points = Vec::with_capacity(order as usize);
    let mut pmf = Vec::with_capacity(order as usize);
    let mut labels = Vec::with_capacity(order as usize);
    for i in 0..side {
        for q in 0..side {
            points.push(Complex64::new(pam.levels[i], pam.levels[q]));
            pmf.push(pam.pmf[i] * pam.pmf[q]);
            labels.push((gray(i as u32) << bits) | gray(q as u32));
        }
    }
    Ok(ConstellationSpec {
        order,
        points,
        pmf,
        labels,
        shaping,
        pam,
    })
}
