//! Far-field pattern and the optical theorem.
//!
//! With `u^s ~ F(θ) e^{iκr} / sqrt(r)`, the Green representation gives
//! `F(x̂) = e^{iπ/4} / sqrt(8πκ) ∫ [(-iκ x̂·n) u^s - u^s_n] e^{-iκ x̂·y} ds`.
//! For a lossless medium and incidence `w`,
//! `∫ |F|² dθ = -2 sqrt(2π/κ) Re(e^{iπ/4} F(w))`.

use super::mesh::BoundaryMesh;
use faer::c64;
use std::f64::consts::PI;

/// Far-field pattern at angles `theta`.
pub fn far_field(mesh: &BoundaryMesh, kappa: f64, us: &[c64], us_n: &[c64], theta: &[f64]) -> Vec<c64> {
    let pre = c64::from_polar(1.0 / (8.0 * PI * kappa).sqrt(), PI / 4.0);
    theta
        .iter()
        .map(|&t| {
            let xh = [t.cos(), t.sin()];
            let mut acc = c64::new(0.0, 0.0);
            for j in 0..mesh.len() {
                let y = mesh.nodes[j];
                let n = mesh.normals[j];
                let e = c64::from_polar(1.0, -kappa * (xh[0] * y[0] + xh[1] * y[1]));
                let dn = c64::new(0.0, -kappa * (xh[0] * n[0] + xh[1] * n[1]));
                acc += (dn * us[j] - us_n[j]) * e * mesh.weights[j];
            }
            pre * acc
        })
        .collect()
}

/// Both sides of the optical theorem, `(∫|F|² dθ, -2 sqrt(2π/κ) Re(e^{iπ/4} F(w)))`,
/// with the angular integral by the trapezoid rule on `n_angles` points.
pub fn optical_theorem(mesh: &BoundaryMesh, kappa: f64, us: &[c64], us_n: &[c64], direction: [f64; 2], n_angles: usize) -> (f64, f64) {
    let theta: Vec<f64> = (0..n_angles).map(|k| 2.0 * PI * k as f64 / n_angles as f64).collect();
    let f = far_field(mesh, kappa, us, us_n, &theta);
    let lhs = f.iter().map(|z| z.norm_sqr()).sum::<f64>() * 2.0 * PI / n_angles as f64;
    let fw = far_field(mesh, kappa, us, us_n, &[direction[1].atan2(direction[0])])[0];
    let rhs = -2.0 * (2.0 * PI / kappa).sqrt() * (c64::from_polar(1.0, PI / 4.0) * fw).re;
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::builtin;
    use crate::radial::scattering_phases;
    use crate::scene::{Scene, SceneConfig};

    #[test]
    fn far_field_matches_partial_wave_pattern_and_optical_theorem() {
        let k = 40.0;
        let pot = builtin("bump1").unwrap();
        let scene = Scene::build(&SceneConfig::new(k, 3), &pot).unwrap();
        let sol = scene.system.solve_boundary(crate::bie::PlaneWave::new(k, [1.0, 0.0]));
        let mesh = &scene.system.mesh;
        // F(θ) = sqrt(2/(πκ)) e^{-iπ/4} Σ ε_l (a_l - 1)/2 cos(lθ)
        let ph = scattering_phases(&pot.radial().unwrap(), k, 0.5, 30).unwrap();
        let thetas = [0.0, 0.4, 1.3, 2.2, PI];
        let got = far_field(mesh, k, &sol.us, &sol.us_n, &thetas);
        let pre = c64::from_polar((2.0 / (PI * k)).sqrt(), -PI / 4.0);
        for (t, g) in thetas.iter().zip(got) {
            let s: c64 = ph
                .phases
                .iter()
                .enumerate()
                .map(|(l, a)| (a - 1.0) * 0.5 * if l == 0 { 1.0 } else { 2.0 * (l as f64 * t).cos() })
                .sum();
            let want = pre * s;
            assert!((g - want).norm() <= 1e-6 * want.norm().max(1.0), "θ={t}: {g} vs {want}");
        }
        let (lhs, rhs) = optical_theorem(mesh, k, &sol.us, &sol.us_n, [1.0, 0.0], 256);
        assert!((lhs - rhs).abs() <= 1e-6 * lhs, "{lhs} {rhs}");
    }
}
