use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::constellation::{build_constellation, ConstellationSpec, Shaping};
use crate::error::{Error, Result};
use crate::optim::{bisect_increasing, golden_section_max};
use crate::units::{db_to_linear, linear_to_db};

pub const HERMITE_START_ORDER: usize = 16;
pub const HERMITE_MAX_ORDER: usize = 256;
/// Successive-order agreement (bits) that stops the order doubling.
pub const HERMITE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum MiMethod {
    GaussHermite { order: usize },
    MonteCarlo { samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiResult {
    /// bit/symbol (both quadratures, one polarization)
    pub mi: f64,
    pub method: MiMethod,
    pub snr: f64,
}

fn nodes(order: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<BTreeMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let mut map = CACHE.get_or_init(Default::default).lock().unwrap();
    map.entry(order)
        .or_insert_with(|| Arc::new(super::hermite::gauss_hermite(order)))
        .clone()
}

fn check_snr(snr: f64) -> Result<f64> {
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(Error::Domain(format!("SNR must be positive and finite, got {snr}")));
    }
    Ok((1.0 / snr).sqrt())
}

/// log2 sum_j p_j exp(-e_j) without overflow.
#[inline]
fn log2_sum_exp(terms: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let m = terms
        .clone()
        .map(|(p, e)| p.ln() - e)
        .fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = terms.map(|(p, e)| (p.ln() - e - m).exp()).sum();
    (m + s.ln()) / std::f64::consts::LN_2
}

/// One-dimensional MI with real noise of variance sigma^2/2.
fn mi_1d(levels: &[f64], pmf: &[f64], sigma: f64, order: usize) -> f64 {
    let table = nodes(order);
    let (xi, w) = (&table.0, &table.1);
    let s2 = sigma * sigma;
    let norm = std::f64::consts::PI.sqrt().recip();
    let mut total = 0.0;
    for (i, &ai) in levels.iter().enumerate() {
        let mut inner = 0.0;
        for (&x, &wk) in xi.iter().zip(w) {
            let n = sigma * x;
            let terms = levels
                .iter()
                .zip(pmf)
                .map(move |(&aj, &pj)| {
                    let d = ai - aj;
                    (pj, (d * d + 2.0 * d * n) / s2)
                });
            inner += wk * log2_sum_exp(terms);
        }
        total -= pmf[i] * norm * inner;
    }
    total
}

/// MI at a fixed Hermite order using the separable form: for a square QAM
/// with product PMF and circular noise, the 2-D MI is twice the MI of each
/// quadrature.
pub fn mi_gauss_hermite_order(c: &ConstellationSpec, snr: f64, order: usize) -> Result<MiResult> {
    let sigma = check_snr(snr)?;
    if order < 8 {
        return Err(Error::Domain(format!("Hermite order {order} below 8")));
    }
    let mi = 2.0 * mi_1d(&c.pam.levels, &c.pam.pmf, sigma, order);
    Ok(MiResult {
        mi: mi.clamp(0.0, c.bits()),
        method: MiMethod::GaussHermite { order },
        snr,
    })
}

/// MI with the Hermite order doubled from 16 until successive values agree
/// to [`HERMITE_TOL`] bits (at most order 256).
pub fn mi_gauss_hermite(c: &ConstellationSpec, snr: f64) -> Result<MiResult> {
    let mut order = HERMITE_START_ORDER;
    let mut prev = mi_gauss_hermite_order(c, snr, order)?;
    while order < HERMITE_MAX_ORDER {
        order *= 2;
        let next = mi_gauss_hermite_order(c, snr, order)?;
        let done = (next.mi - prev.mi).abs() < HERMITE_TOL;
        prev = next;
        if done {
            break;
        }
    }
    Ok(prev)
}

/// Direct two-dimensional tensor Gauss-Hermite evaluation over all point
/// pairs. Cost grows as M^2 L^2; used to validate the separable form.
pub fn mi_gauss_hermite_2d(c: &ConstellationSpec, snr: f64, order: usize) -> Result<MiResult> {
    let sigma = check_snr(snr)?;
    let table = nodes(order);
    let (xi, w) = (&table.0, &table.1);
    let s2 = sigma * sigma;
    let mut total = 0.0;
    for (i, &xi_pt) in c.points.iter().enumerate() {
        let mut inner = 0.0;
        for (&a, &wa) in xi.iter().zip(w) {
            for (&b, &wb) in xi.iter().zip(w) {
                let n = sigma * Complex64::new(a, b);
                let terms = c.points.iter().zip(&c.pmf).map(move |(&xj, &pj)| {
                    let d = xi_pt - xj;
                    (pj, (d.norm_sqr() + 2.0 * (d * n.conj()).re) / s2)
                });
                inner += wa * wb * log2_sum_exp(terms);
            }
        }
        total -= c.pmf[i] * inner / std::f64::consts::PI;
    }
    Ok(MiResult {
        mi: total,
        method: MiMethod::GaussHermite { order },
        snr,
    })
}

/// Monte Carlo estimate of the MI with `samples` joint (symbol, noise) draws.
pub fn mi_monte_carlo(c: &ConstellationSpec, snr: f64, samples: usize, seed: u64) -> Result<MiResult> {
    let sigma = check_snr(snr)?;
    if samples == 0 {
        return Err(Error::Domain("zero Monte Carlo samples".into()));
    }
    let s2 = sigma * sigma;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let pick = WeightedIndex::new(&c.pmf).map_err(|e| Error::Domain(e.to_string()))?;
    let scale = sigma * std::f64::consts::FRAC_1_SQRT_2;
    let mut acc = 0.0;
    for _ in 0..samples {
        let i = pick.sample(&mut rng);
        let nr: f64 = rng.sample(StandardNormal);
        let ni: f64 = rng.sample(StandardNormal);
        let n = Complex64::new(nr, ni) * scale;
        let y = c.points[i] + n;
        let terms = c
            .points
            .iter()
            .zip(&c.pmf)
            .map(|(&xj, &pj)| (pj, ((y - xj).norm_sqr() - n.norm_sqr()) / s2));
        acc -= log2_sum_exp(terms);
    }
    Ok(MiResult {
        mi: acc / samples as f64,
        method: MiMethod::MonteCarlo { samples },
        snr,
    })
}


#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaOptimum {
    pub zeta: f64,
    pub mi: f64,
    pub mi_uniform: f64,
}

fn mi_at(order: u32, zeta: f64, snr: f64) -> Result<f64> {
    let c = build_constellation(order, Shaping::MaxwellBoltzmann { zeta })?;
    Ok(mi_gauss_hermite(&c, snr)?.mi)
}

/// Maxwell-Boltzmann parameter maximizing the MI at `snr`.
///
/// Any zeta whose PMF entropy falls below the uniform MI cannot beat the
/// uniform input (MI <= H(X)), so the golden-section bracket ends where the
/// entropy reaches that level (or 2 bits plus a margin, the large-zeta limit).
pub fn optimize_zeta(order: u32, snr: f64) -> Result<ZetaOptimum> {
    let uniform = build_constellation(order, Shaping::Uniform)?;
    let mi_uniform = mi_gauss_hermite(&uniform, snr)?.mi;
    let floor = mi_uniform.max(2.01);
    let entropy = |z: f64| -> Result<f64> {
        Ok(build_constellation(order, Shaping::MaxwellBoltzmann { zeta: z })?.entropy())
    };
    let mut hi = 1.0;
    while entropy(hi)? > floor && hi < 1e9 {
        hi *= 2.0;
    }
    let mut err = None;
    let (zeta, mi) = golden_section_max(
        |z| match mi_at(order, z, snr) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        0.0,
        hi,
        1e-5 * hi,
    );
    if let Some(e) = err {
        return Err(e);
    }
    if mi > mi_uniform {
        Ok(ZetaOptimum {
            zeta,
            mi,
            mi_uniform,
        })
    } else {
        Ok(ZetaOptimum {
            zeta: 0.0,
            mi: mi_uniform,
            mi_uniform,
        })
    }
}

/// Extra SNR (dB) a uniform input needs to reach `target_mi` bits, relative
/// to `snr`. Searched up to 10 dB.
pub fn shaping_gain_db(order: u32, snr: f64, target_mi: f64) -> Result<f64> {
    let uniform = build_constellation(order, Shaping::Uniform)?;
    let base = linear_to_db(snr);
    let mi = |db: f64| mi_gauss_hermite(&uniform, db_to_linear(db)).map(|r| r.mi).unwrap_or(f64::NAN);
    if mi(base) >= target_mi {
        return Ok(0.0);
    }
    if mi(base + 10.0) < target_mi {
        return Ok(10.0);
    }
    Ok(bisect_increasing(mi, target_mi, base, base + 10.0, 1e-6) - base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_limit() {
        let c = build_constellation(64, Shaping::Uniform).unwrap();
        let r = mi_gauss_hermite(&c, 1e6).unwrap();
        assert!((r.mi - 6.0).abs() < 1e-3, "{}", r.mi);
    }

    #[test]
    fn zero_information_limit() {
        let c = build_constellation(64, Shaping::Uniform).unwrap();
        assert!(mi_gauss_hermite(&c, 1e-6).unwrap().mi < 1e-3);
    }

    #[test]
    fn separable_matches_direct_2d() {
        for (m, shaping) in [
            (16, Shaping::Uniform),
            (64, Shaping::Uniform),
            (64, Shaping::MaxwellBoltzmann { zeta: 1.3 }),
        ] {
            let c = build_constellation(m, shaping).unwrap();
            for snr_db in [3.0, 12.0, 20.0] {
                let snr = db_to_linear(snr_db);
                let a = mi_gauss_hermite_order(&c, snr, 16).unwrap().mi;
                let b = mi_gauss_hermite_2d(&c, snr, 16).unwrap().mi;
                assert!((a - b).abs() < 1e-12, "M={m} {snr_db} dB: {a} vs {b}");
            }
        }
    }

    #[test]
    fn uniform_reduces_to_equiprobable_formula() {
        // log2 M - (1/(M pi)) sum_i sum_kl w_k w_l log2 sum_j exp(...)
        let c = build_constellation(16, Shaping::Uniform).unwrap();
        let snr = db_to_linear(8.0);
        let sigma = (1.0 / snr).sqrt();
        let table = nodes(16);
        let (xi, w) = (&table.0, &table.1);
        let mut s = 0.0;
        for &x in &c.points {
            for (&a, &wa) in xi.iter().zip(w) {
                for (&b, &wb) in xi.iter().zip(w) {
                    let n = sigma * Complex64::new(a, b);
                    let inner: f64 = c
                        .points
                        .iter()
                        .map(|&xj| {
                            let d = x - xj;
                            (-(d.norm_sqr() + 2.0 * (d * n.conj()).re) / (sigma * sigma)).exp()
                        })
                        .sum();
                    s += wa * wb * inner.log2();
                }
            }
        }
        let expected = 4.0 - s / (16.0 * std::f64::consts::PI);
        let got = mi_gauss_hermite_order(&c, snr, 16).unwrap().mi;
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_snr() {
        let c = build_constellation(256, Shaping::Uniform).unwrap();
        let mut last = 0.0;
        for k in 0..30 {
            let mi = mi_gauss_hermite(&c, db_to_linear(k as f64)).unwrap().mi;
            assert!(mi >= last - 1e-9);
            last = mi;
        }
    }

    #[test]
    fn adaptive_order_matches_high_order_reference() {
        for m in [64, 256, 1024] {
            let c = build_constellation(m, Shaping::Uniform).unwrap();
            for db in (0..=30).step_by(3) {
                let snr = db_to_linear(db as f64);
                let adaptive = mi_gauss_hermite(&c, snr).unwrap().mi;
                let reference = mi_gauss_hermite_order(&c, snr, 256).unwrap().mi;
                assert!((adaptive - reference).abs() < 1e-4, "M={m} {db} dB");
            }
        }
    }

    #[test]
    fn fixed_order_convergence_below_waterfall() {
        // L = 16 already agrees with L = 32 until the SNR approaches the
        // point where MI saturates; beyond it the adaptive order takes over.
        for (m, top) in [(64, 12), (256, 20), (1024, 26)] {
            let c = build_constellation(m, Shaping::Uniform).unwrap();
            for db in 5..=top {
                let s = db_to_linear(db as f64);
                let a = mi_gauss_hermite_order(&c, s, 16).unwrap().mi;
                let b = mi_gauss_hermite_order(&c, s, 32).unwrap().mi;
                assert!((a - b).abs() < 1e-4, "M={m} {db} dB: {}", (a - b).abs());
            }
        }
    }

    #[test]
    fn rotation_and_scaling_invariance() {
        let c = build_constellation(64, Shaping::MaxwellBoltzmann { zeta: 0.8 }).unwrap();
        let snr = db_to_linear(4.0);
        let base = mi_gauss_hermite_2d(&c, snr, 32).unwrap().mi;
        let mut rot = c.clone();
        let r = Complex64::from_polar(1.0, 0.7);
        rot.points.iter_mut().for_each(|x| *x *= r);
        let rotated = mi_gauss_hermite_2d(&rot, snr, 32).unwrap().mi;
        assert!((rotated - base).abs() < 1e-9, "{}", rotated - base);
        // Doubling amplitudes quadruples energy; the same SNR needs the same
        // relative noise, which the unit-energy model expresses as snr * 4.
        let mut big = c.clone();
        big.points.iter_mut().for_each(|x| *x *= 2.0);
        assert!((mi_gauss_hermite_2d(&big, snr / 4.0, 32).unwrap().mi - base).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_agrees() {
        let c = build_constellation(16, Shaping::Uniform).unwrap();
        let snr = db_to_linear(10.0);
        let gh = mi_gauss_hermite(&c, snr).unwrap().mi;
        let mc = mi_monte_carlo(&c, snr, 200_000, 3).unwrap().mi;
        assert!((gh - mc).abs() < 0.01, "{gh} vs {mc}");
    }

    #[test]
    fn shaping_never_loses() {
        for db in [5.0, 12.0, 20.0] {
            let opt = optimize_zeta(256, db_to_linear(db)).unwrap();
            assert!(opt.mi >= opt.mi_uniform - 1e-9);
            let c = build_constellation(256, Shaping::MaxwellBoltzmann { zeta: opt.zeta }).unwrap();
            assert!((mi_gauss_hermite(&c, db_to_linear(db)).unwrap().mi - opt.mi).abs() < 1e-12);
        }
    }

    #[test]
    fn shaping_fades_at_saturation() {
        let opt = optimize_zeta(64, db_to_linear(45.0)).unwrap();
        assert!(opt.mi - opt.mi_uniform < 1e-6);
        assert!(opt.zeta < 0.05, "zeta = {}", opt.zeta);
    }

    #[test]
    fn shaping_gain_bounded() {
        let snr = db_to_linear(18.0);
        let opt = optimize_zeta(1024, snr).unwrap();
        let g = shaping_gain_db(1024, snr, opt.mi).unwrap();
        assert!(g > 0.0 && g <= 1.53, "gain = {g}");
    }

    #[test]
    fn rejects_bad_snr() {
        let c = build_constellation(16, Shaping::Uniform).unwrap();
        assert!(mi_gauss_hermite(&c, 0.0).is_err());
        assert!(mi_gauss_hermite(&c, f64::NAN).is_err());
    }
}
