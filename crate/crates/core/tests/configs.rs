use std::path::PathBuf;

use gnair_core::system::{load_config_file, ShapingMode};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn every_shipped_config_loads() {
    let mut n = 0;
    for entry in std::fs::read_dir(dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let cfg = load_config_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.validate().unwrap();
            n += 1;
        }
    }
    assert!(n >= 6);
}

#[test]
fn campaign_grids() {
    let full = load_config_file(dir().join("table1_edfa.json")).unwrap();
    assert_eq!(full.grid.channel_count, 157);
    assert_eq!(full.campaign.modulation_formats, vec![64, 256, 1024]);
    assert_eq!(full.campaign.shaping, ShapingMode::Both);
    let raman = load_config_file(dir().join("table1_raman.json")).unwrap();
    assert_eq!(raman.grid.channel_count, 391);
    assert!((raman.grid.total_bandwidth() - 12.512e12).abs() < 1.0);
    let nz = load_config_file(dir().join("table2_nzdsf.json")).unwrap();
    assert!((nz.fiber.gamma - 1.3e-3).abs() < 1e-12);
}
