//! Effective SNR, optimum launch power and the per-channel link budget.

use serde::{Deserialize, Serialize};

use crate::amplification::{
    edfa_ase_for_gain, raman_ase, raman_power_profile, srs_tilt_profiles, SpanPowerProfile,
};
use crate::error::{Error, Result};
use crate::gn::NonlinearCoefficientTable;
use crate::system::{AmplifierSpec, PowerPolicy, SystemConfig};
use crate::units::linear_to_db;

/// SNR = P / (ase_total + delta_eta P^3).
pub fn effective_snr(power: f64, ase_total: f64, delta_eta: f64) -> Result<f64> {
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::Domain(format!("launch power must be positive, got {power}")));
    }
    if !(ase_total > 0.0) {
        return Err(Error::Domain(format!("ASE power must be positive, got {ase_total}")));
    }
    if !(delta_eta >= 0.0) {
        return Err(Error::Domain(format!("delta eta must be >= 0, got {delta_eta}")));
    }
    Ok(power / (ase_total + delta_eta * power * power * power))
}

/// Maximizer of [`effective_snr`]: (ase_total / (2 delta_eta))^(1/3).
pub fn optimum_launch_power(ase_total: f64, delta_eta: f64) -> Result<f64> {
    if !(ase_total > 0.0) {
        return Err(Error::Domain(format!("ASE power must be positive, got {ase_total}")));
    }
    if delta_eta == 0.0 {
        return Err(Error::Domain(
            "delta eta is zero: SNR grows without bound in launch power".into(),
        ));
    }
    if !(delta_eta > 0.0) {
        return Err(Error::Domain(format!("delta eta must be > 0, got {delta_eta}")));
    }
    Ok((ase_total / (2.0 * delta_eta)).cbrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSnr {
    pub channel: i32,
    /// W
    pub launch_power: f64,
    /// N_s sigma^2_ASE, W
    pub ase_total: f64,
    /// 1/W^2
    pub delta_eta: f64,
    pub snr_linear: f64,
    pub snr_db: f64,
    /// W; `None` when delta_eta is zero.
    pub optimum_power: Option<f64>,
}

impl ChannelSnr {
    pub fn new(channel: i32, launch_power: f64, ase_total: f64, delta_eta: f64) -> Result<Self> {
        let snr = effective_snr(launch_power, ase_total, delta_eta)?;
        Ok(ChannelSnr {
            channel,
            launch_power,
            ase_total,
            delta_eta,
            snr_linear: snr,
            snr_db: linear_to_db(snr),
            optimum_power: optimum_launch_power(ase_total, delta_eta).ok(),
        })
    }
}

/// Span profiles and accumulated ASE for every channel of a link.
#[derive(Debug, Clone)]
pub struct LinkBudget {
    /// Profile without inter-channel power transfer.
    pub baseline: SpanPowerProfile,
    /// Per-channel profiles in index order when SRS tilt is active.
    pub channel_profiles: Option<Vec<SpanPowerProfile>>,
    /// N_s sigma^2_ASE per channel in index order, W.
    pub ase_total: Vec<f64>,
    /// Launch powers the SRS tilt was evaluated at, W.
    pub srs_powers: Option<Vec<f64>>,
}

impl LinkBudget {
    pub fn profile(&self, position: usize) -> &SpanPowerProfile {
        match &self.channel_profiles {
            Some(p) => &p[position],
            None => &self.baseline,
        }
    }
}

fn baseline_profile(cfg: &SystemConfig) -> Result<SpanPowerProfile> {
    match &cfg.amplifier {
        AmplifierSpec::Edfa { .. } => Ok(SpanPowerProfile::edfa(&cfg.fiber)),
        AmplifierSpec::Raman(r) => {
            Ok(raman_power_profile(&cfg.fiber, r, cfg.grid.carrier_frequency())?.profile)
        }
    }
}

/// ASE of one span for a given (possibly tilted) channel profile. Lumped
/// amplifiers restore each channel to its launch power.
fn span_ase(cfg: &SystemConfig, profile: &SpanPowerProfile) -> Result<f64> {
    let f0 = cfg.grid.carrier_frequency();
    let df = cfg.grid.channel_spacing;
    match &cfg.amplifier {
        AmplifierSpec::Edfa { noise_figure_db } => {
            let gain = 1.0 / profile.end_power();
            Ok(edfa_ase_for_gain(gain, *noise_figure_db, f0, df)?.variance_per_span)
        }
        AmplifierSpec::Raman(r) => Ok(raman_ase(profile, r, f0, df)?.variance_per_span),
    }
}

/// Builds the link budget. `srs_powers` (W, one per channel) sets the
/// operating point of the SRS tilt; it is ignored when the gain slope is zero.
pub fn link_budget(cfg: &SystemConfig, srs_powers: Option<&[f64]>) -> Result<LinkBudget> {
    let baseline = baseline_profile(cfg)?;
    let n = cfg.grid.channel_count;
    let spans = cfg.fiber.span_count as f64;
    let tilted = match srs_powers {
        Some(p) if cfg.fiber.gain_slope != 0.0 => {
            if p.len() != n {
                return Err(Error::config(
                    "launch_power",
                    format!("{} SRS powers for {} channels", p.len(), n),
                ));
            }
            Some(srs_tilt_profiles(&cfg.grid, &cfg.fiber, &baseline, p))
        }
        _ => None,
    };
    let ase_total = match &tilted {
        Some(profiles) => profiles
            .iter()
            .map(|p| span_ase(cfg, p).map(|a| spans * a))
            .collect::<Result<Vec<_>>>()?,
        None => {
            let a = match &cfg.amplifier {
                AmplifierSpec::Edfa { noise_figure_db } => crate::amplification::edfa_ase_variance(
                    cfg.fiber.alpha,
                    cfg.fiber.span_length,
                    *noise_figure_db,
                    cfg.grid.carrier_frequency(),
                    cfg.grid.channel_spacing,
                )?,
                AmplifierSpec::Raman(_) => span_ase(cfg, &baseline)?,
            };
            vec![spans * a; n]
        }
    };
    Ok(LinkBudget {
        baseline,
        srs_powers: tilted.as_ref().map(|_| srs_powers.unwrap().to_vec()),
        channel_profiles: tilted,
        ase_total,
    })
}

fn check_tables(full: &NonlinearCoefficientTable, nlc: &NonlinearCoefficientTable) -> Result<()> {
    if full.channels() != nlc.channels() {
        return Err(Error::config("nlc", "full-band and NLC tables cover different channels"));
    }
    Ok(())
}

/// Launch powers per channel under `policy`. `fixed` is required for
/// [`PowerPolicy::Fixed`] and used as the fallback when delta eta vanishes.
pub fn launch_powers(
    policy: PowerPolicy,
    fixed: Option<f64>,
    ase_total: &[f64],
    delta_eta: &[f64],
) -> Result<Vec<f64>> {
    let optimum = |i: usize| -> Result<f64> {
        match optimum_launch_power(ase_total[i], delta_eta[i]) {
            Ok(p) => Ok(p),
            Err(e) => fixed.ok_or(e),
        }
    };
    match policy {
        PowerPolicy::PerChannelOptimum => (0..ase_total.len()).map(optimum).collect(),
        PowerPolicy::CentralOptimum => {
            let p = optimum(ase_total.len() / 2)?;
            Ok(vec![p; ase_total.len()])
        }
        PowerPolicy::Fixed => {
            let p = fixed.ok_or_else(|| {
                Error::config("launch_power_dbm", "required by the fixed power policy")
            })?;
            Ok(vec![p; ase_total.len()])
        }
    }
}

/// One [`ChannelSnr`] per channel from full-band and NLC eta tables.
pub fn per_channel_report(
    cfg: &SystemConfig,
    ase_total: &[f64],
    full: &NonlinearCoefficientTable,
    nlc: &NonlinearCoefficientTable,
) -> Result<Vec<ChannelSnr>> {
    check_tables(full, nlc)?;
    if full.entries.len() != ase_total.len() {
        return Err(Error::config(
            "grid",
            format!("{} eta entries for {} channels", full.entries.len(), ase_total.len()),
        ));
    }
    let delta: Vec<f64> = full
        .entries
        .iter()
        .zip(&nlc.entries)
        .map(|(a, b)| (a.estimate.eta - b.estimate.eta).max(0.0))
        .collect();
    let powers = launch_powers(
        cfg.campaign.power_policy,
        cfg.campaign.launch_power,
        ase_total,
        &delta,
    )?;
    full.entries
        .iter()
        .enumerate()
        .map(|(i, e)| ChannelSnr::new(e.channel, powers[i], ase_total[i], delta[i]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gn::{EtaEntry, EtaEstimate};
    use crate::optim::golden_section_max;

    #[test]
    fn snr_arithmetic() {
        assert_eq!(effective_snr(1.0, 2.0, 1.0).unwrap(), 1.0 / 3.0);
        assert_eq!(effective_snr(1e-3, 1e-5, 0.0).unwrap(), 100.0);
        assert!(effective_snr(1e6, 1e-5, 1e3).unwrap() < 1e-14);
        assert!(matches!(effective_snr(0.0, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(effective_snr(-1.0, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn optimum_closed_form() {
        assert_eq!(optimum_launch_power(2.0, 1.0).unwrap(), 1.0);
        let p = optimum_launch_power(3e-5, 4e3).unwrap();
        let p8 = optimum_launch_power(8.0 * 3e-5, 4e3).unwrap();
        assert!((p8 / p - 2.0).abs() < 1e-14);
        assert!(optimum_launch_power(1.0, 0.0).is_err());
    }

    #[test]
    fn optimum_snr_identity() {
        let (ase, de) = (4.2e-5, 3.3e4);
        let p = optimum_launch_power(ase, de).unwrap();
        let snr = effective_snr(p, ase, de).unwrap();
        assert!((snr - p / (1.5 * ase)).abs() < 1e-12 * snr);
        assert!((ase - 2.0 * de * p.powi(3)).abs() < 1e-9 * ase);
    }

    #[test]
    fn optimum_is_global_maximum() {
        let (ase, de) = (1.1e-4, 2.0e4);
        let p = optimum_launch_power(ase, de).unwrap();
        let best = effective_snr(p, ase, de).unwrap();
        for eps in [0.01, 0.1, 0.5] {
            for s in [1.0 + eps, 1.0 - eps] {
                assert!(effective_snr(p * s, ase, de).unwrap() <= best);
            }
        }
    }

    #[test]
    fn golden_search_agrees() {
        let (ase, de) = (7.0e-5, 1.5e4);
        let (x, _) = golden_section_max(
            |x| {
                let p = x.exp();
                p.ln() - (ase + de * p * p * p).ln()
            },
            (1e-9f64).ln(),
            (10.0f64).ln(),
            1e-12,
        );
        let p = optimum_launch_power(ase, de).unwrap();
        assert!((x.exp() / p - 1.0).abs() < 1e-6);
    }

    #[test]
    fn halving_delta_eta_gains_one_db() {
        let ase = 5e-5;
        let s1 = ChannelSnr::new(0, optimum_launch_power(ase, 2e4).unwrap(), ase, 2e4).unwrap();
        let s2 = ChannelSnr::new(0, optimum_launch_power(ase, 1e4).unwrap(), ase, 1e4).unwrap();
        let gain = s2.snr_db - s1.snr_db;
        assert!((gain - 10.0 * 2f64.log10() / 3.0).abs() < 1e-12);
    }

    fn table(etas: &[f64]) -> NonlinearCoefficientTable {
        let m = (etas.len() / 2) as i32;
        NonlinearCoefficientTable {
            label: "t".into(),
            bandwidth: 1.0,
            entries: etas
                .iter()
                .enumerate()
                .map(|(i, &eta)| EtaEntry {
                    channel: i as i32 - m,
                    center_frequency: 0.0,
                    estimate: EtaEstimate {
                        eta,
                        stderr: 0.0,
                        samples: 1,
                    },
                })
                .collect(),
        }
    }

    fn config(policy: PowerPolicy, launch: Option<f64>) -> SystemConfig {
        let mut cfg = crate::system::load_config(crate::system::tests::TABLE1_EDFA).unwrap();
        cfg.grid = cfg.grid.with_channel_count(3).unwrap();
        cfg.campaign.power_policy = policy;
        cfg.campaign.launch_power = launch;
        cfg
    }

    #[test]
    fn report_policies() {
        let full = table(&[2e4, 3e4, 2.5e4]);
        let edc = table(&[0.0, 0.0, 0.0]);
        let ase = [1e-5; 3];
        let cfg = config(PowerPolicy::PerChannelOptimum, None);
        let r = per_channel_report(&cfg, &ase, &full, &edc).unwrap();
        assert_eq!(r.len(), 3);
        for c in &r {
            assert_eq!(Some(c.launch_power), c.optimum_power);
            assert_eq!(c.snr_db, linear_to_db(c.snr_linear));
        }
        assert!(r[0].snr_linear > r[2].snr_linear);

        let cfg = config(PowerPolicy::CentralOptimum, None);
        let r = per_channel_report(&cfg, &ase, &full, &edc).unwrap();
        assert!(r.iter().all(|c| c.launch_power == r[1].optimum_power.unwrap()));

        let cfg = config(PowerPolicy::Fixed, Some(1e-3));
        let r = per_channel_report(&cfg, &ase, &full, &edc).unwrap();
        assert!(r.iter().all(|c| c.launch_power == 1e-3));

        let cfg = config(PowerPolicy::Fixed, None);
        assert!(matches!(per_channel_report(&cfg, &ase, &full, &edc), Err(Error::Config { .. })));
    }

    #[test]
    fn report_rejects_mismatched_tables() {
        let cfg = config(PowerPolicy::PerChannelOptimum, None);
        let full = table(&[2e4, 3e4, 2.5e4]);
        let short = table(&[0.0]);
        assert!(matches!(
            per_channel_report(&cfg, &[1e-5; 3], &full, &short),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn full_field_compensation_needs_fallback_power() {
        let full = table(&[2e4, 3e4, 2.5e4]);
        let cfg = config(PowerPolicy::PerChannelOptimum, None);
        assert!(per_channel_report(&cfg, &[1e-5; 3], &full, &full).is_err());
        let cfg = config(PowerPolicy::PerChannelOptimum, Some(2e-3));
        let r = per_channel_report(&cfg, &[1e-5; 3], &full, &full).unwrap();
        assert!(r.iter().all(|c| c.delta_eta == 0.0 && c.optimum_power.is_none()));
    }

    #[test]
    fn edfa_budget_is_flat_without_srs() {
        let cfg = config(PowerPolicy::PerChannelOptimum, None);
        let b = link_budget(&cfg, Some(&[1e-3; 3])).unwrap();
        assert!(b.channel_profiles.is_none());
        assert!(b.ase_total.iter().all(|&a| a == b.ase_total[0]));
        // 25 spans of -33.5 dBm each
        let dbm = linear_to_db(b.ase_total[0] / 25.0 / 1e-3);
        assert!((dbm + 33.48).abs() < 0.05, "{dbm}");
    }

    #[test]
    fn srs_budget_penalizes_high_frequencies() {
        let mut cfg = config(PowerPolicy::PerChannelOptimum, None);
        cfg.grid = cfg.grid.with_channel_count(81).unwrap();
        cfg.fiber.gain_slope = 0.028e-15;
        let b = link_budget(&cfg, Some(&[0.53e-3; 81])).unwrap();
        assert!(b.channel_profiles.is_some());
        // High-frequency channels lose power to low-frequency ones, so
        // their amplifiers need more gain.
        assert!(b.ase_total[80] > b.ase_total[0]);
    }
}
