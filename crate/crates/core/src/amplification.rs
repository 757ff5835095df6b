//! Span power profiles and ASE noise for lumped EDFA and backward-pumped
//! distributed Raman amplification, plus the first-order SRS power tilt.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::system::{FiberParams, RamanSpec, WdmGrid};
use crate::units::{db_to_linear, BOLTZMANN, PLANCK};

/// Integration steps per span for the Raman boundary value problem.
pub const RAMAN_STEPS: usize = 2000;
/// Samples used for exponential (EDFA) profiles.
pub const PROFILE_SAMPLES: usize = 2000;
/// Representative pump-signal offset at the Raman gain peak, Hz.
pub const RAMAN_PEAK_OFFSET: f64 = 13.2e12;

const SHOOT_TOL: f64 = 1e-13;
const SHOOT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ProfileKind {
    /// P(z) = exp(-alpha z) exactly.
    Exponential { alpha: f64 },
    /// Backward-pumped Raman solution.
    RamanPumped,
    /// Baseline profile modified by inter-channel SRS.
    SrsTilted,
}

/// Normalized signal power along one span, P(0) = 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanPowerProfile {
    /// Positions, m. Ascending from 0 to the span length.
    pub z: Vec<f64>,
    pub power: Vec<f64>,
    pub kind: ProfileKind,
    /// Pump power along the span (Raman only), W.
    pub pump: Option<Vec<f64>>,
}

impl SpanPowerProfile {
    pub fn exponential(alpha: f64, span_length: f64, samples: usize) -> Self {
        let n = samples.max(2);
        let z: Vec<f64> = (0..n)
            .map(|i| span_length * i as f64 / (n - 1) as f64)
            .collect();
        let power = z.iter().map(|&z| (-alpha * z).exp()).collect();
        SpanPowerProfile {
            z,
            power,
            kind: ProfileKind::Exponential { alpha },
            pump: None,
        }
    }

    pub fn edfa(fiber: &FiberParams) -> Self {
        Self::exponential(fiber.alpha, fiber.span_length, PROFILE_SAMPLES)
    }

    pub fn span_length(&self) -> f64 {
        *self.z.last().unwrap()
    }

    /// Power at the span end, i.e. the net span gain when P(0) = 1.
    pub fn end_power(&self) -> f64 {
        *self.power.last().unwrap()
    }

    pub fn min_power(&self) -> f64 {
        self.power.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Integral of P(z) over the span (the effective length).
    pub fn area(&self) -> f64 {
        match self.kind {
            ProfileKind::Exponential { alpha } => -(-alpha * self.span_length()).exp_m1() / alpha,
            _ => cumulative_trapezoid(&self.z, &self.power)
                .last()
                .copied()
                .unwrap_or(0.0),
        }
    }

    /// Running integral of P from 0 to each sample.
    pub fn cumulative_area(&self) -> Vec<f64> {
        match self.kind {
            ProfileKind::Exponential { alpha } => self
                .z
                .iter()
                .map(|&z| -(-alpha * z).exp_m1() / alpha)
                .collect(),
            _ => cumulative_trapezoid(&self.z, &self.power),
        }
    }

    /// Two-column CSV, `z_km,power`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "z_km,power")?;
        for (z, p) in self.z.iter().zip(&self.power) {
            writeln!(w, "{},{}", z / 1e3, p)?;
        }
        Ok(())
    }
}

fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        out.push(acc);
    }
    out
}

/// ASE budget of one span.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AseSpec {
    /// Dual-polarization ASE power in one channel bandwidth, W.
    pub variance_per_span: f64,
    pub scheme: &'static str,
    /// n_sp for EDFA, kappa_T for Raman.
    pub occupancy: f64,
    /// (G - 1) for EDFA, N_phot for Raman.
    pub photon_factor: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Spontaneous-emission factor from the EDFA noise figure (NF ~ 2 n_sp).
pub fn spontaneous_emission_factor(noise_figure_db: f64) -> f64 {
    db_to_linear(noise_figure_db) / 2.0
}

/// EDFA ASE variance per span with gain set to the span loss.
///
/// `alpha` in 1/m, `span_length` in m, `f0` and `delta_f` in Hz. The
/// NF ~ 2 n_sp relation only holds for gains above ~10 dB.
pub fn edfa_ase_variance(
    alpha: f64,
    span_length: f64,
    noise_figure_db: f64,
    f0: f64,
    delta_f: f64,
) -> Result<f64> {
    let gain = (alpha * span_length).exp();
    if gain < 10.0 {
        eprintln!(
            "warning: EDFA gain {:.2} dB below 10 dB; NF = 2 n_sp approximation is loose",
            10.0 * gain.log10()
        );
    }
    edfa_ase_for_gain(gain, noise_figure_db, f0, delta_f).map(|a| a.variance_per_span)
}

/// EDFA ASE for an arbitrary linear gain `gain`.
pub fn edfa_ase_for_gain(gain: f64, noise_figure_db: f64, f0: f64, delta_f: f64) -> Result<AseSpec> {
    check_positive("f0", f0)?;
    check_positive("delta_f", delta_f)?;
    if !(gain >= 1.0) {
        return Err(Error::Domain(format!("EDFA gain must be >= 1, got {gain}")));
    }
    let n_sp = spontaneous_emission_factor(noise_figure_db);
    let gm1 = gain - 1.0;
    Ok(AseSpec {
        variance_per_span: 2.0 * gm1 * n_sp * PLANCK * f0 * delta_f,
        scheme: "edfa",
        occupancy: n_sp,
        photon_factor: gm1,
    })
}

/// Bose-Einstein phonon occupancy 1/(exp(h dnu / kT) - 1).
pub fn phonon_occupancy(temperature: f64, offset: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (PLANCK * offset / (BOLTZMANN * temperature)).exp_m1()
}

#[derive(Clone, Copy)]
struct RamanOde {
    alpha_s: f64,
    alpha_p: f64,
    g: f64,
    /// (nu_p / nu_s) * g * signal power scale.
    depletion: f64,
}

impl RamanOde {
    // state = (signal normalized, pump W); the pump travels towards -z.
    fn rhs(&self, s: [f64; 2]) -> [f64; 2] {
        [
            (-self.alpha_s + self.g * s[1]) * s[0],
            (self.alpha_p + self.depletion * s[0]) * s[1],
        ]
    }

    fn rk4_step(&self, s: [f64; 2], h: f64) -> [f64; 2] {
        let k1 = self.rhs(s);
        let k2 = self.rhs([s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]]);
        let k3 = self.rhs([s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]]);
        let k4 = self.rhs([s[0] + h * k3[0], s[1] + h * k3[1]]);
        [
            s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }

    /// Integrate from z = 0 with signal 1 and pump `pump0`.
    fn integrate(&self, pump0: f64, length: f64, steps: usize) -> (Vec<f64>, Vec<f64>) {
        let h = length / steps as f64;
        let mut sig = Vec::with_capacity(steps + 1);
        let mut pump = Vec::with_capacity(steps + 1);
        let mut s = [1.0, pump0];
        sig.push(s[0]);
        pump.push(s[1]);
        for _ in 0..steps {
            s = self.rk4_step(s, h);
            sig.push(s[0]);
            pump.push(s[1]);
        }
        (sig, pump)
    }

    fn end_state(&self, pump0: f64, length: f64, steps: usize) -> [f64; 2] {
        let h = length / steps as f64;
        let mut s = [1.0, pump0];
        for _ in 0..steps {
            s = self.rk4_step(s, h);
        }
        s
    }
}

/// Root of an increasing function on a bracket `[lo, hi]` by secant steps
/// safeguarded with bisection. Returns the root and final |f|.
fn bracketed_root<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    solver: &'static str,
) -> Result<(f64, f64)> {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::Convergence {
            solver,
            iterations: 0,
            residual: f_lo.abs().min(f_hi.abs()),
        });
    }
    let mut best = (lo, f_lo.abs());
    for it in 0..SHOOT_MAX_ITER {
        let mut x = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        let width = hi - lo;
        // Fall back to bisection when the secant hugs one end.
        if !x.is_finite() || x <= lo + 0.01 * width || x >= hi - 0.01 * width || it % 4 == 3 {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx.abs() < best.1 {
            best = (x, fx.abs());
        }
        if fx.abs() <= tol || width <= f64::EPSILON * hi.abs() {
            return Ok((x, fx.abs()));
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
    }
    if best.1 <= tol * 1e3 {
        return Ok(best);
    }
    Err(Error::Convergence {
        solver,
        iterations: SHOOT_MAX_ITER,
        residual: best.1,
    })
}

/// Solved backward-pumped Raman span, calibrated to transparency.
#[derive(Debug, Clone)]
pub struct RamanSolution {
    pub profile: SpanPowerProfile,
    /// Pump power launched at z = L, W.
    pub pump_launch: f64,
    /// Relative pump boundary mismatch after shooting.
    pub boundary_residual: f64,
}

fn raman_ode(fiber: &FiberParams, raman: &RamanSpec, carrier_frequency: f64) -> RamanOde {
    let ratio = (carrier_frequency + raman.pump_offset) / carrier_frequency;
    RamanOde {
        alpha_s: fiber.alpha,
        alpha_p: fiber.pump_alpha,
        g: raman.gain_coefficient,
        depletion: ratio * raman.gain_coefficient * raman.depletion_signal_power,
    }
}

/// Pump value at z = 0 that delivers `pump_launch` at z = L.
fn shoot_pump(ode: &RamanOde, pump_launch: f64, length: f64, steps: usize) -> Result<(f64, f64)> {
    // Moving towards +z the pump only grows, so Pp(0) lies in [0, launch].
    let (x, res) = bracketed_root(
        |x| ode.end_state(x, length, steps)[1] / pump_launch - 1.0,
        0.0,
        pump_launch,
        SHOOT_TOL,
        "Raman pump shooting",
    )?;
    Ok((x, res))
}

/// Raman span profile with the pump launch calibrated so the net span gain
/// is unity. With zero gain coefficient the signal is pure attenuation.
pub fn raman_power_profile(
    fiber: &FiberParams,
    raman: &RamanSpec,
    carrier_frequency: f64,
) -> Result<RamanSolution> {
    raman_power_profile_with_steps(fiber, raman, carrier_frequency, RAMAN_STEPS)
}

pub fn raman_power_profile_with_steps(
    fiber: &FiberParams,
    raman: &RamanSpec,
    carrier_frequency: f64,
    steps: usize,
) -> Result<RamanSolution> {
    check_positive("pump power", raman.pump_power)?;
    let length = fiber.span_length;
    let ode = raman_ode(fiber, raman, carrier_frequency);
    let z: Vec<f64> = (0..=steps).map(|i| length * i as f64 / steps as f64).collect();

    if raman.gain_coefficient == 0.0 {
        let (p0, res) = shoot_pump(&ode, raman.pump_power, length, steps)?;
        let (_, pump) = ode.integrate(p0, length, steps);
        let power = z.iter().map(|&z| (-fiber.alpha * z).exp()).collect();
        return Ok(RamanSolution {
            profile: SpanPowerProfile {
                z,
                power,
                kind: ProfileKind::RamanPumped,
                pump: Some(pump),
            },
            pump_launch: raman.pump_power,
            boundary_residual: res,
        });
    }

    let log_gain = |launch: f64| -> Result<f64> {
        let (p0, _) = shoot_pump(&ode, launch, length, steps)?;
        Ok(ode.end_state(p0, length, steps)[0].ln())
    };

    let mut hi = raman.pump_power;
    let mut doublings = 0;
    while log_gain(hi)? < 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::Convergence {
                solver: "Raman transparency bracket",
                iterations: doublings,
                residual: log_gain(hi)?.abs(),
            });
        }
    }
    let mut lo = 0.0;
    if doublings == 0 {
        // Shrink from the initial guess so the bracket stays tight.
        lo = hi;
        while lo > 0.0 && log_gain(lo)? > 0.0 {
            lo *= 0.5;
            if lo < 1e-12 {
                lo = 0.0;
            }
        }
    }

    let mut inner_err: Option<Error> = None;
    let (launch, _) = bracketed_root(
        |p| {
            if p == 0.0 {
                return -fiber.alpha * length;
            }
            match log_gain(p) {
                Ok(v) => v,
                Err(e) => {
                    inner_err = Some(e);
                    f64::NAN
                }
            }
        },
        lo,
        hi,
        1e-14,
        "Raman transparency calibration",
    )?;
    if let Some(e) = inner_err {
        return Err(e);
    }

    let (p0, residual) = shoot_pump(&ode, launch, length, steps)?;
    let (power, pump) = ode.integrate(p0, length, steps);
    Ok(RamanSolution {
        profile: SpanPowerProfile {
            z,
            power,
            kind: ProfileKind::RamanPumped,
            pump: Some(pump),
        },
        pump_launch: launch,
        boundary_residual: residual,
    })
}

/// Spontaneous photon number of one span referred to the span output,
/// `P(L) * int_0^L g P_p(z) / P(z) dz`.
///
/// The local emission rate g P_p(z) is carried to the span end by the net
/// signal gain P(L)/P(z); the thermal excess (kappa_T) is applied outside.
pub fn raman_photon_number(profile: &SpanPowerProfile, raman: &RamanSpec) -> Result<f64> {
    let pump = profile
        .pump
        .as_ref()
        .ok_or_else(|| Error::config("amplifier", "profile carries no pump solution"))?;
    let integrand: Vec<f64> = pump
        .iter()
        .zip(&profile.power)
        .map(|(pp, ps)| raman.gain_coefficient * pp / ps)
        .collect();
    let integral = *cumulative_trapezoid(&profile.z, &integrand).last().unwrap();
    Ok(profile.end_power() * integral)
}

/// Raman ASE per span: 2 (kappa_T + 1) N_phot h f0 delta_f.
pub fn raman_ase(
    profile: &SpanPowerProfile,
    raman: &RamanSpec,
    f0: f64,
    delta_f: f64,
) -> Result<AseSpec> {
    check_positive("f0", f0)?;
    check_positive("delta_f", delta_f)?;
    let kappa = phonon_occupancy(raman.temperature, raman.pump_offset);
    let n_phot = raman_photon_number(profile, raman)?;
    Ok(AseSpec {
        variance_per_span: 2.0 * (kappa + 1.0) * n_phot * PLANCK * f0 * delta_f,
        scheme: "raman",
        occupancy: kappa,
        photon_factor: n_phot,
    })
}

pub fn raman_ase_variance(
    profile: &SpanPowerProfile,
    raman: &RamanSpec,
    f0: f64,
    delta_f: f64,
) -> Result<f64> {
    raman_ase(profile, raman, f0, delta_f).map(|a| a.variance_per_span)
}

/// Per-channel power profiles under the triangular-gain SRS approximation.
///
/// Channel i evolves as
/// `P_i(z) = P_base(z) * P_tot exp(-C P_tot L(z) f_i) / sum_j P_j exp(-C P_tot L(z) f_j)`
/// with `L(z)` the running integral of the baseline profile and `C` the gain
/// slope. `powers` are launch powers in W, one per grid channel in index
/// order. Valid for total bandwidths up to roughly 15 THz.
pub fn srs_tilt_profiles(
    grid: &WdmGrid,
    fiber: &FiberParams,
    baseline: &SpanPowerProfile,
    powers: &[f64],
) -> Vec<SpanPowerProfile> {
    assert_eq!(powers.len(), grid.channel_count, "one launch power per channel");
    if fiber.gain_slope == 0.0 {
        return vec![baseline.clone(); grid.channel_count];
    }
    let total: f64 = powers.iter().sum();
    let freqs: Vec<f64> = grid.indices().map(|k| grid.center_offset(k)).collect();
    let leff = baseline.cumulative_area();
    let c = fiber.gain_slope * total;

    let mut out: Vec<SpanPowerProfile> = (0..grid.channel_count)
        .map(|_| SpanPowerProfile {
            z: baseline.z.clone(),
            power: Vec::with_capacity(baseline.z.len()),
            kind: ProfileKind::SrsTilted,
            pump: baseline.pump.clone(),
        })
        .collect();
    for (zi, &l) in leff.iter().enumerate() {
        let denom: f64 = powers
            .iter()
            .zip(&freqs)
            .map(|(p, f)| p * (-c * l * f).exp())
            .sum();
        for (ch, f) in freqs.iter().enumerate() {
            let tilt = total * (-c * l * f).exp() / denom;
            out[ch].power.push(baseline.power[zi] * tilt);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{db_per_km_to_per_m, linear_to_db};

    fn table1_fiber() -> FiberParams {
        FiberParams {
            alpha: db_per_km_to_per_m(0.2),
            pump_alpha: db_per_km_to_per_m(0.25),
            dispersion: 17e-6,
            dispersion_slope: 67.0,
            beta2: -21.67e-27,
            beta3: 0.145e-39,
            gamma: 1.2e-3,
            gain_slope: 0.0,
            span_length: 80e3,
            span_count: 25,
        }
    }

    fn raman_spec() -> RamanSpec {
        RamanSpec {
            temperature: 300.0,
            pump_offset: 13.2e12,
            pump_power: 0.5,
            gain_coefficient: 0.4e-3,
            depletion_signal_power: 0.0,
        }
    }

    const F0: f64 = 193.414e12;

    #[test]
    fn edfa_ase_table1_value() {
        // G = 10^1.6, n_sp = 10^0.45 / 2, evaluated by hand: 4.485e-7 W.
        let g = 10f64.powf(1.6);
        let nsp = 10f64.powf(0.45) / 2.0;
        let expected = 2.0 * (g - 1.0) * nsp * PLANCK * 193.41e12 * 32e9;
        let v = edfa_ase_variance(db_per_km_to_per_m(0.2), 80e3, 4.5, 193.41e12, 32e9).unwrap();
        assert!(((v - expected) / expected).abs() < 1e-12);
        assert!((v - 4.49e-7).abs() < 0.01e-7);
        assert!((linear_to_db(v / 1e-3) + 33.5).abs() < 0.05);
    }

    #[test]
    fn edfa_ase_linear_in_bandwidth() {
        let a = edfa_ase_variance(4.6e-5, 80e3, 4.5, F0, 32e9).unwrap();
        let b = edfa_ase_variance(4.6e-5, 80e3, 4.5, F0, 64e9).unwrap();
        assert_eq!(b, 2.0 * a);
    }

    #[test]
    fn edfa_ase_vanishes_with_span() {
        let v = edfa_ase_variance(4.6e-5, 1e-3, 4.5, F0, 32e9).unwrap();
        assert!(v < 1e-14);
        assert!(edfa_ase_variance(4.6e-5, 80e3, 4.5, F0, 0.0).is_err());
        assert!(edfa_ase_variance(4.6e-5, 80e3, 4.5, -1.0, 32e9).is_err());
    }

    #[test]
    fn edfa_profile_closed_form() {
        let f = table1_fiber();
        let p = SpanPowerProfile::edfa(&f);
        assert_eq!(p.power[0], 1.0);
        for (z, pw) in p.z.iter().zip(&p.power) {
            assert_eq!(*pw, (-f.alpha * z).exp());
        }
    }

    #[test]
    fn phonon_occupancy_values() {
        let k = phonon_occupancy(300.0, 13.2e12);
        assert!((k - 0.138).abs() < 5e-4, "kappa = {k}");
        assert_eq!(phonon_occupancy(0.0, 13.2e12), 0.0);
        assert!(phonon_occupancy(1.0, 13.2e12) < 1e-200);
    }

    #[test]
    fn raman_zero_gain_is_pure_attenuation() {
        let f = table1_fiber();
        let r = RamanSpec {
            gain_coefficient: 0.0,
            ..raman_spec()
        };
        let sol = raman_power_profile(&f, &r, F0).unwrap();
        for (z, p) in sol.profile.z.iter().zip(&sol.profile.power) {
            assert!((p - (-f.alpha * z).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn raman_transparency_and_sag() {
        let f = table1_fiber();
        let sol = raman_power_profile(&f, &raman_spec(), F0).unwrap();
        let p = &sol.profile;
        assert!((p.end_power() - 1.0).abs() < 1e-6);
        assert!(p.min_power() < 1.0);
        assert!(p.power.iter().all(|&x| x > 0.0));
        // sag then recovery: decreasing up to the minimum, increasing after
        let imin = p
            .power
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(p.power[..=imin].windows(2).all(|w| w[1] <= w[0]));
        assert!(p.power[imin..].windows(2).all(|w| w[1] >= w[0]));
        assert!(sol.boundary_residual < 1e-8);
        let pump = p.pump.as_ref().unwrap();
        assert!((pump.last().unwrap() / sol.pump_launch - 1.0).abs() < 1e-8);
    }

    #[test]
    fn raman_area_exceeds_edfa_effective_length() {
        let f = table1_fiber();
        let sol = raman_power_profile(&f, &raman_spec(), F0).unwrap();
        assert!(sol.profile.area() > f.effective_length());
    }

    #[test]
    fn raman_ase_properties() {
        let f = table1_fiber();
        let r = raman_spec();
        let sol = raman_power_profile(&f, &r, F0).unwrap();
        let a = raman_ase_variance(&sol.profile, &r, F0, 32e9).unwrap();
        let b = raman_ase_variance(&sol.profile, &r, F0, 64e9).unwrap();
        assert!(a > 0.0);
        assert_eq!(b, 2.0 * a);
        // distributed gain is quieter than a lumped amplifier at the same NF
        let edfa = edfa_ase_variance(f.alpha, f.span_length, 4.5, F0, 32e9).unwrap();
        assert!(a < edfa);
        let cold = RamanSpec {
            temperature: 0.0,
            ..r.clone()
        };
        let ac = raman_ase(&sol.profile, &cold, F0, 32e9).unwrap();
        assert_eq!(ac.occupancy, 0.0);
        assert!(ac.variance_per_span < a);
    }

    #[test]
    fn raman_ase_requires_pump_solution() {
        let f = table1_fiber();
        let p = SpanPowerProfile::edfa(&f);
        assert!(matches!(
            raman_ase_variance(&p, &raman_spec(), F0, 32e9),
            Err(Error::Config { .. })
        ));
    }

    fn grid(n: usize) -> WdmGrid {
        WdmGrid::new(1550e-9, 32e9, 32e9, n).unwrap()
    }

    #[test]
    fn srs_off_returns_baseline_bitwise() {
        let f = table1_fiber();
        let base = SpanPowerProfile::edfa(&f);
        let g = grid(5);
        let profiles = srs_tilt_profiles(&g, &f, &base, &[1e-3; 5]);
        assert!(profiles.iter().all(|p| *p == base));
    }

    #[test]
    fn srs_moves_power_to_low_frequencies() {
        let mut f = table1_fiber();
        f.gain_slope = 0.028e-15;
        let base = SpanPowerProfile::edfa(&f);
        let g = grid(3);
        let profiles = srs_tilt_profiles(&g, &f, &base, &[0.1, 0.1, 0.1]);
        let low = profiles[0].end_power();
        let mid = profiles[1].end_power();
        let high = profiles[2].end_power();
        assert!(low > mid && mid > high);
        // total power follows the baseline
        let tot = 0.1 * (low + mid + high);
        assert!((tot / (0.3 * base.end_power()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn srs_two_channel_sign() {
        let mut f = table1_fiber();
        f.gain_slope = 0.028e-15;
        let base = SpanPowerProfile::edfa(&f);
        let g = WdmGrid::new(1550e-9, 32e9, 32e9, 1).unwrap();
        // two channels expressed on a 3-channel grid with an empty middle slot
        let g3 = g.with_channel_count(3).unwrap();
        let profiles = srs_tilt_profiles(&g3, &f, &base, &[0.05, 0.0, 0.05]);
        assert!(profiles[0].end_power() > base.end_power());
        assert!(profiles[2].end_power() < base.end_power());
    }

    #[test]
    fn profile_csv_export() {
        let f = table1_fiber();
        let p = SpanPowerProfile::exponential(f.alpha, f.span_length, 3);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "z_km,power");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("80,"));
    }
}
