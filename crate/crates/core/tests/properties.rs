use hpscatter::bie::far_field;
use hpscatter::hps::Retain;
use hpscatter::potentials::{builtin_with, GaussianBump, PotentialParams, ScatteringPotential};
use hpscatter::radial::scattering_phases;
use hpscatter::scene::{Scene, SceneConfig};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

const KAPPA: f64 = 15.0;

/// Two off-centre bumps, one attracting and one repelling, so the medium
/// has no symmetry the reciprocity check could lean on.
fn medium() -> ScatteringPotential {
    let params = PotentialParams {
        bumps: vec![
            GaussianBump { center: [0.1, -0.05], amplitude: -1.2, exponent: 300.0 },
            GaussianBump { center: [-0.15, 0.12], amplitude: 0.6, exponent: 300.0 },
        ],
        ..Default::default()
    };
    builtin_with("custom_gaussian_sum", &params).unwrap()
}

fn scene() -> &'static Scene {
    static SCENE: OnceLock<Scene> = OnceLock::new();
    SCENE.get_or_init(|| Scene::build(&SceneConfig::new(KAPPA, 3), &medium()).unwrap())
}

fn unit(t: f64) -> [f64; 2] {
    [t.cos(), t.sin()]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    // F(x; w) = F(-w; -x) for a reciprocal medium.
    #[test]
    fn far_field_is_reciprocal(a in 0.0..2.0 * PI, b in 0.0..2.0 * PI) {
        let s = scene();
        let mesh = &s.system.mesh;
        let fa = s.system.solve_boundary(hpscatter::bie::PlaneWave::new(KAPPA, unit(a)));
        let fb = s.system.solve_boundary(hpscatter::bie::PlaneWave::new(KAPPA, unit(b + PI)));
        let x = far_field(mesh, KAPPA, &fa.us, &fa.us_n, &[b])[0];
        let y = far_field(mesh, KAPPA, &fb.us, &fb.us_n, &[a + PI])[0];
        // relative to the peak of the pattern, not the value at a lobe minimum
        let angles: Vec<f64> = (0..64).map(|k| k as f64 * PI / 32.0).collect();
        let peak = far_field(mesh, KAPPA, &fa.us, &fa.us_n, &angles).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!((x - y).norm() <= 1e-7 * peak, "{x} vs {y}, peak {peak}");
    }

    // Interior (leaf interpolation) and exterior (layer potentials) agree
    // across the boundary.
    #[test]
    fn total_field_is_continuous_across_the_boundary(t in -0.45f64..0.45, side in 0usize..4) {
        let s = scene();
        let sol = s.solve_direction(unit(0.7)).unwrap();
        let (on, off) = match side {
            0 => ([0.5, t], [0.5 + 1e-9, t]),
            1 => ([t, 0.5], [t, 0.5 + 1e-9]),
            2 => ([-0.5, t], [-0.5 - 1e-9, t]),
            _ => ([t, -0.5], [t, -0.5 - 1e-9]),
        };
        let u = s.total_field(&sol, &[on, off]).unwrap();
        prop_assert!((u[0] - u[1]).norm() <= 1e-7, "{:e}", (u[0] - u[1]).norm());
    }

    #[test]
    fn radial_phases_are_unimodular(amp in -2.0f64..0.5, exponent in 140.0f64..300.0, kappa in 5.0f64..30.0) {
        let params = PotentialParams {
            bumps: vec![GaussianBump { center: [0.0, 0.0], amplitude: amp, exponent }],
            ..Default::default()
        };
        let pot = builtin_with("custom_gaussian_sum", &params).unwrap();
        let ph = scattering_phases(&pot.radial().unwrap(), kappa, 0.5, 25).unwrap();
        prop_assert!(ph.max_unit_deviation() <= 1e-12);
    }
}

#[test]
fn retained_leaves_match_the_full_sweep_through_the_scene() {
    let pts = [[0.3, -0.2], [-0.41, 0.07]];
    let s = scene();
    let full = s.total_field(&s.solve_direction([0.0, 1.0]).unwrap(), &pts).unwrap();
    let pot = medium();
    let cfg = SceneConfig::new(KAPPA, 3).retain_for(&pts).unwrap();
    assert!(matches!(cfg.retain, Retain::Leaves(ref l) if l.len() == 2));
    let part = Scene::build(&cfg, &pot).unwrap();
    let got = part.total_field(&part.solve_direction([0.0, 1.0]).unwrap(), &pts).unwrap();
    assert_eq!(got, full);
}
