use std::path::PathBuf;

use gnair_core::amplification::edfa_ase_variance;
use gnair_core::gn::QmcSettings;
use gnair_core::ssfm::{gn_prediction, simulate, SimulationConfig};
use gnair_core::system::{load_config_file, AmplifierSpec, SystemConfig};
use gnair_core::units::{dbm_to_watt, linear_to_db};

fn ssmf() -> SystemConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/table2_ssmf.json");
    load_config_file(path).unwrap()
}

fn small(symbols: usize, ase: bool) -> SimulationConfig {
    SimulationConfig {
        channel_count: 3,
        symbols,
        samples_per_symbol: 8,
        steps_per_span: 20,
        seed: 5,
        ase,
        ..SimulationConfig::default()
    }
}

#[test]
fn linear_noiseless_link_is_transparent() {
    let mut cfg = ssmf();
    cfg.fiber.gamma = 0.0;
    let single = SimulationConfig {
        channel_count: 1,
        ..small(1 << 16, false)
    };
    let est = simulate(&cfg, &single, dbm_to_watt(0.0)).unwrap();
    assert!(est[0].snr_db > 50.0, "{:.1} dB", est[0].snr_db);
    // With neighbours the roll-off bands of adjacent channels overlap, which
    // sets a crosstalk floor a little below 50 dB for the paper's roll-off.
    let est = simulate(&cfg, &small(1 << 16, false), dbm_to_watt(0.0)).unwrap();
    for e in &est {
        assert!(e.snr_db > 45.0, "channel {}: {:.1} dB", e.channel, e.snr_db);
    }
}

#[test]
fn ase_only_snr_matches_analytic() {
    let mut cfg = ssmf();
    cfg.fiber.gamma = 0.0;
    let nf = match cfg.amplifier {
        AmplifierSpec::Edfa { noise_figure_db } => noise_figure_db,
        _ => unreachable!(),
    };
    let power = dbm_to_watt(-2.0);
    let ase = cfg.fiber.span_count as f64
        * edfa_ase_variance(
            cfg.fiber.alpha,
            cfg.fiber.span_length,
            nf,
            cfg.grid.carrier_frequency(),
            cfg.grid.channel_spacing,
        )
        .unwrap();
    let expected = linear_to_db(power / ase);
    let est = simulate(&cfg, &small(1 << 14, true), power).unwrap();
    for e in &est {
        assert!(
            (e.snr_db - expected).abs() < 0.1,
            "channel {}: {:.3} dB vs {expected:.3} dB",
            e.channel,
            e.snr_db
        );
    }
}

#[test]
fn halving_the_step_changes_snr_by_less_than_005_db() {
    let mut cfg = ssmf();
    cfg.fiber.span_count = 3;
    let sim = SimulationConfig {
        samples_per_symbol: 16,
        steps_per_span: 50,
        ..small(1 << 12, false)
    };
    let power = dbm_to_watt(3.0);
    let coarse = simulate(&cfg, &sim, power).unwrap();
    let fine = simulate(
        &cfg,
        &SimulationConfig {
            steps_per_span: 100,
            ..sim
        },
        power,
    )
    .unwrap();
    for (a, b) in coarse.iter().zip(&fine) {
        assert!(a.snr_db < 40.0, "nonlinearity too weak to test: {:.1} dB", a.snr_db);
        assert!(
            (a.snr_db - b.snr_db).abs() < 0.05,
            "channel {}: {:.3} vs {:.3} dB",
            a.channel,
            a.snr_db,
            b.snr_db
        );
    }
}

#[test]
fn nonlinear_snr_falls_6_db_per_3_db_of_power() {
    // Without ASE the SNR is P / (eta P^3), so +3 dB of launch power costs
    // 6 dB of SNR.
    let mut cfg = ssmf();
    cfg.fiber.span_count = 3;
    let sim = SimulationConfig {
        samples_per_symbol: 16,
        steps_per_span: 50,
        ..small(1 << 12, false)
    };
    let lo = simulate(&cfg, &sim, dbm_to_watt(0.0)).unwrap();
    let hi = simulate(&cfg, &sim, dbm_to_watt(3.0)).unwrap();
    for (a, b) in lo.iter().zip(&hi) {
        let slope = a.snr_db - b.snr_db;
        assert!((slope - 6.0).abs() < 0.3, "channel {}: {slope:.3} dB", a.channel);
    }
}

fn low_minus_high(db: &[f64]) -> f64 {
    let h = db.len() / 2;
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    mean(&db[..h]) - mean(&db[h + 1..])
}

#[test]
fn nzdsf_model_is_more_asymmetric_than_ssmf() {
    let nz = load_config_file(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/table2_nzdsf.json")).unwrap();
    let sim = SimulationConfig {
        launch_power: Some(dbm_to_watt(-4.0)),
        ..SimulationConfig::default()
    };
    let q = QmcSettings::from_total(1 << 20, 1);
    let a = gn_prediction(&ssmf(), &sim, q).unwrap();
    let b = gn_prediction(&nz, &sim, q).unwrap();
    let (sa, sb) = (low_minus_high(&a.snr_db), low_minus_high(&b.snr_db));
    assert!(sa > 0.0 && sb > sa, "SSMF {sa:.4} dB, NZDSF {sb:.4} dB");
    // Without the slope both are symmetric up to QMC noise.
    assert!(low_minus_high(&a.snr_no_slope_db).abs() < 0.25 * sa);
    assert!(low_minus_high(&b.snr_no_slope_db).abs() < 0.25 * sb);
}
