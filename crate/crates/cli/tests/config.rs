use hpscatter_cli::commands::fit_slope;
use hpscatter_cli::config::{Overrides, RunConfig, SCHEMA_VERSION};
use hpscatter_cli::output::{read_grid_header, GRID_HEADER_LEN};
use hpscatter_cli::CliError;

#[test]
fn empty_file_is_the_default_run() {
    let cfg = RunConfig::from_toml("").unwrap();
    assert_eq!(cfg, RunConfig::default());
    assert_eq!(cfg.schema_version, SCHEMA_VERSION);
    assert_eq!(cfg.potential.name, "bump1");
    cfg.validate().unwrap();
}

#[test]
fn resolved_config_round_trips() {
    let text = r#"
        kappa = 25.5
        directions = [[0.0, 1.0], [0.6, -0.8]]
        [potential]
        name = "random_bumps"
        seed = 11
        [grid]
        nx = 7
        ny = 5
    "#;
    let cfg = RunConfig::from_toml(text).unwrap();
    assert_eq!(cfg.grid.unwrap().nx, 7);
    assert!(cfg.grid.unwrap().binary);
    let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(matches!(RunConfig::from_toml("kapa = 3.0"), Err(CliError::Config(_))));
    assert!(RunConfig::from_toml("[potential]\nname = \"lens\"\nsede = 1").is_err());
}

#[test]
fn validation_catches_bad_values() {
    let bad = |edit: fn(&mut RunConfig)| {
        let mut c = RunConfig::default();
        edit(&mut c);
        let e = c.validate().unwrap_err();
        assert_eq!(e.exit_code(), 2, "{e}");
    };
    bad(|c| c.kappa = -1.0);
    bad(|c| c.kappa = f64::NAN);
    bad(|c| c.schema_version = 2);
    bad(|c| c.directions = vec![[1.0, 1.0]]);
    bad(|c| c.directions.clear());
    bad(|c| c.nc = c.ng);
    bad(|c| c.levels = 7);
    bad(|c| c.convergence_levels = vec![3, 2]);
}

#[test]
fn large_runs_need_the_flag() {
    let mut c = RunConfig::default();
    c.apply(&Overrides { levels: vec![7], ..Default::default() });
    assert!(c.validate().is_err());
    c.apply(&Overrides { large: true, ..Default::default() });
    c.validate().unwrap();
}

#[test]
fn level_list_override_sets_the_sweeps() {
    let mut c = RunConfig::default();
    c.apply(&Overrides { levels: vec![2, 4], kappa: Some(12.0), seed: Some(3), ..Default::default() });
    assert_eq!((c.levels, c.kappa, c.potential.seed), (4, 12.0, Some(3)));
    assert_eq!(c.convergence_levels, vec![2, 4]);
    assert_eq!(c.timing_levels, vec![2, 4]);
    c.apply(&Overrides { levels: vec![3], ..Default::default() });
    assert_eq!((c.levels, c.convergence_levels.clone()), (3, vec![2, 4]));
}

#[test]
fn unknown_potential_is_a_configuration_error() {
    let mut c = RunConfig::default();
    c.potential.name = "sphere".into();
    assert_eq!(c.potential().unwrap_err().exit_code(), 2);
}

#[test]
fn slope_of_a_power_law() {
    let n = [10.0, 40.0, 160.0, 640.0];
    let t: Vec<f64> = n.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
    assert!((fit_slope(&n, &t) - 1.5).abs() < 1e-12);
}

#[test]
fn raster_header_rejects_foreign_bytes() {
    assert!(read_grid_header(&[0u8; GRID_HEADER_LEN]).is_none());
    assert!(read_grid_header(b"HPSGRID1").is_none());
}
