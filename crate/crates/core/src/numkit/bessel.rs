//! Bessel and Hankel functions of integer order and positive real argument.
//!
//! Three regimes, split at `x = 2` and `x = 25`:
//!
//! * `x < 2`: ascending power series for `J_l`, `Y_0`, `Y_1`.
//! * `2 <= x < 25`: Miller's downward recurrence for `J_l`, normalised by
//!   `J_0 + 2 sum J_2k = 1`; `Y_0` and `Y_1` from the Neumann series in the
//!   even/odd `J_k`.
//! * `x >= 25`: Hankel asymptotic expansions for orders 0 and 1, with the
//!   phase `cos(x - c)` expanded so that `x` never gets rounded; higher `J_l`
//!   by Miller's recurrence scaled to the asymptotic `J_0` or `J_1`.
//!
//! `Y_l` for `l >= 2` always comes from upward recurrence, which is stable.
//! The crossovers were picked by comparing against integral representations:
//! at `x = 25` the smallest asymptotic term is below `1e-21`.

use crate::error::{Error, Result};
use faer::c64;
use std::f64::consts::{FRAC_2_PI, PI};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_MAX: f64 = 2.0;
const ASYMPTOTIC_MIN: f64 = 25.0;

/// `J_0 .. J_{l_max}` by the ascending series.
fn j_series(l_max: usize, x: f64) -> Vec<f64> {
    let h = 0.5 * x;
    let q = -h * h;
    let mut out = Vec::with_capacity(l_max + 1);
    let mut lead = 1.0; // (x/2)^l / l!
    for l in 0..=l_max {
        if l > 0 {
            lead *= h / l as f64;
        }
        let mut term = lead;
        let mut sum = lead;
        for k in 1..200 {
            term *= q / (k as f64 * (k + l) as f64);
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        out.push(sum);
    }
    out
}

/// `Y_0`, `Y_1` by the ascending series, given accurate `J_0`, `J_1`.
fn y01_series(x: f64, j0: f64, j1: f64) -> (f64, f64) {
    let h = 0.5 * x;
    let q = -h * h;
    let lg = (h).ln() + EULER_GAMMA;

    // sum_{k>=1} (-1)^{k+1} H_k (x/2)^{2k} / (k!)^2
    let mut s0 = 0.0;
    let mut t = 1.0;
    let mut hk = 0.0;
    // sum_{k>=0} (-1)^k (H_k + H_{k+1}) (x/2)^{2k+1} / (k! (k+1)!)
    let mut s1 = 0.0;
    let mut u = h;
    for k in 0..200 {
        let kf = k as f64;
        let hk1 = hk + 1.0 / (kf + 1.0);
        if k > 0 {
            t *= q / (kf * kf);
            s0 -= hk * t;
        }
        if k > 0 {
            u *= q / (kf * (kf + 1.0));
        }
        s1 += (hk + hk1) * u;
        if k > 2 && t.abs() * hk1 < 1e-18 && u.abs() * hk1 < 1e-18 {
            break;
        }
        hk = hk1;
    }
    let y0 = FRAC_2_PI * (lg * j0 + s0);
    let y1 = -FRAC_2_PI / x + FRAC_2_PI * lg * j1 - s1 / PI;
    (y0, y1)
}

/// Unnormalised Miller recurrence. Returns `j[0..=n]` proportional to
/// `J_0 .. J_n` for a starting index `n` large enough for orders up to
/// `l_max` at argument `x`.
fn miller_raw(l_max: usize, x: f64) -> Vec<f64> {
    let m = (l_max as f64).max(x);
    let mut n = (m + 20.0 + (40.0 * m).sqrt()).ceil() as usize;
    n += n % 2;
    let mut j = vec![0.0; n + 2];
    j[n] = 1e-280;
    for k in (1..=n).rev() {
        let v = (2.0 * k as f64 / x) * j[k] - j[k + 1];
        j[k - 1] = v;
        if v.abs() > 1e250 {
            for e in j[k - 1..].iter_mut() {
                *e *= 1e-250;
            }
        }
    }
    j.truncate(n + 1);
    j
}

/// Orders 0 and 1 on `[2, 25)` via Miller plus the Neumann series.
fn jy01_miller(x: f64) -> (f64, f64, f64, f64) {
    let raw = miller_raw(1, x);
    let mut norm = raw[0];
    for k in (2..raw.len()).step_by(2) {
        norm += 2.0 * raw[k];
    }
    let j: Vec<f64> = raw.iter().map(|v| v / norm).collect();
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut sign = -1.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let kf = k as f64;
        s0 += sign * j[2 * k] / kf;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / kf;
        sign = -sign;
        k += 1;
    }
    let y0 = FRAC_2_PI * lg * j[0] - 2.0 * FRAC_2_PI * s0;
    let y1 = FRAC_2_PI * (lg * j[1] - j[0] / x) + FRAC_2_PI * s1;
    (j[0], j[1], y0, y1)
}

/// Hankel asymptotic expansion for order `nu` in {0, 1}: `(J_nu, Y_nu)`.
fn asymptotic(nu: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (nu * nu) as f64;
    let inv8x = 1.0 / (8.0 * x);
    let mut p = 1.0;
    let mut q = 0.0;
    // a_k = prod_{i=1..k} (mu - (2i-1)^2) / (k! (8x)^k)
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..120 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) * inv8x / k as f64;
        if a.abs() > prev && k > 2 {
            break;
        }
        prev = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-18 {
            break;
        }
    }
    // chi = x - c, c = (nu/2 + 1/4) pi; expand to avoid rounding x - c
    let (sx, cx) = x.sin_cos();
    let (sc, cc) = match nu {
        0 => (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
        _ => (std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2),
    };
    let cos_chi = cx * cc + sx * sc;
    let sin_chi = sx * cc - cx * sc;
    let amp = (FRAC_2_PI / x).sqrt();
    (amp * (p * cos_chi - q * sin_chi), amp * (p * sin_chi + q * cos_chi))
}

/// `(J_0, J_1, Y_0, Y_1)` for `x > 0`.
fn jy01(x: f64) -> (f64, f64, f64, f64) {
    if x < SERIES_MAX {
        let j = j_series(1, x);
        let (y0, y1) = y01_series(x, j[0], j[1]);
        (j[0], j[1], y0, y1)
    } else if x < ASYMPTOTIC_MIN {
        jy01_miller(x)
    } else {
        let (j0, y0) = asymptotic(0, x);
        let (j1, y1) = asymptotic(1, x);
        (j0, j1, y0, y1)
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Bessel argument must be positive and finite, got {x}")))
    }
}

/// `J_0 .. J_{l_max}` for `x >= 0`.
pub fn bessel_j_orders(l_max: usize, x: f64) -> Result<Vec<f64>> {
    if x == 0.0 {
        let mut v = vec![0.0; l_max + 1];
        v[0] = 1.0;
        return Ok(v);
    }
    check_positive(x)?;
    if x < SERIES_MAX {
        return Ok(j_series(l_max, x));
    }
    let raw = miller_raw(l_max.max(1), x);
    let scale = if x < ASYMPTOTIC_MIN {
        let mut norm = raw[0];
        for k in (2..raw.len()).step_by(2) {
            norm += 2.0 * raw[k];
        }
        1.0 / norm
    } else {
        let (j0, _) = asymptotic(0, x);
        let (j1, _) = asymptotic(1, x);
        if j0.abs() >= j1.abs() {
            j0 / raw[0]
        } else {
            j1 / raw[1]
        }
    };
    Ok(raw[..=l_max].iter().map(|v| v * scale).collect())
}

/// `J_l(x)` for `x >= 0`.
pub fn bessel_j(l: usize, x: f64) -> Result<f64> {
    Ok(bessel_j_orders(l, x)?[l])
}

/// `(J_0 .. J_{l_max}, Y_0 .. Y_{l_max})` for `x > 0`.
pub fn bessel_jy_orders(l_max: usize, x: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_positive(x)?;
    let mut j = bessel_j_orders(l_max, x)?;
    let (j0, j1, y0, y1) = jy01(x);
    j[0] = j0;
    if l_max >= 1 {
        j[1] = j1;
    }
    let mut y = Vec::with_capacity(l_max + 1);
    y.push(y0);
    if l_max >= 1 {
        y.push(y1);
    }
    for l in 1..l_max {
        let next = (2.0 * l as f64 / x) * y[l] - y[l - 1];
        y.push(next);
    }
    Ok((j, y))
}

/// `H^(1)_0 .. H^(1)_{l_max}` for `x > 0`.
pub fn hankel1_orders(l_max: usize, x: f64) -> Result<Vec<c64>> {
    let (j, y) = bessel_jy_orders(l_max, x)?;
    Ok(j.into_iter().zip(y).map(|(a, b)| c64::new(a, b)).collect())
}

/// `H^(1)_l(x)`.
pub fn bessel_h1(l: usize, x: f64) -> Result<c64> {
    Ok(hankel1_orders(l, x)?[l])
}

/// `d/dx H^(1)_l(x)`, from `H_l' = H_{l-1} - (l/x) H_l` and `H_0' = -H_1`.
pub fn bessel_h1_deriv(l: usize, x: f64) -> Result<c64> {
    let h = hankel1_orders(l + 1, x)?;
    Ok(if l == 0 {
        -h[1]
    } else {
        h[l - 1] - h[l] * (l as f64 / x)
    })
}

/// `(H^(1)_0(x), H^(1)_1(x))` without allocation, for kernel evaluation.
/// `x` must be positive.
#[inline]
pub fn hankel01(x: f64) -> (c64, c64) {
    debug_assert!(x > 0.0);
    let (j0, j1, y0, y1) = jy01(x);
    (c64::new(j0, y0), c64::new(j1, y1))
}

/// `(J_0(x), J_1(x))` for `x >= 0`.
#[inline]
pub fn bessel_j01(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (1.0, 0.0);
    }
    if x < SERIES_MAX {
        let j = j_series(1, x);
        (j[0], j[1])
    } else {
        let (j0, j1, _, _) = jy01(x);
        (j0, j1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::gauss_legendre;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Composite Gauss–Legendre on `[a, b]` with `panels` panels.
    fn composite(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let g = gauss_legendre(20);
        let h = (b - a) / panels as f64;
        let mut s = 0.0;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (t, w) in g.nodes.iter().zip(&g.weights) {
                s += 0.5 * h * w * f(lo + 0.5 * h * (t + 1.0));
            }
        }
        s
    }

    /// Integral representations:
    /// `J_l = (1/pi) int_0^pi cos(l t - x sin t) dt`,
    /// `Y_l = (1/pi) int_0^pi sin(x sin t - l t) dt
    ///        - (1/pi) int_0^inf (e^{lt} + (-1)^l e^{-lt}) e^{-x sinh t} dt`.
    fn oracle(l: usize, x: f64) -> (f64, f64) {
        let lf = l as f64;
        let panels = 40 + (x + lf) as usize;
        let j = composite(|t| (lf * t - x * t.sin()).cos(), 0.0, PI, panels) / PI;
        let y1 = composite(|t| (x * t.sin() - lf * t).sin(), 0.0, PI, panels) / PI;
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        // integrand is negligible once x sinh t - l t > 750
        let mut tmax = 1.0;
        while x * f64::sinh(tmax) - lf * tmax < 750.0 {
            tmax += 0.25;
        }
        let y2 = composite(
            |t| (lf * t - x * t.sinh()).exp() + sign * (-lf * t - x * t.sinh()).exp(),
            0.0,
            tmax,
            400,
        ) / PI;
        (j, y1 - y2)
    }

    #[test]
    fn j0_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(3, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j01(0.0), (1.0, 0.0));
    }

    #[test]
    fn known_values() {
        // reference values to 16 digits
        let (j0, j1, y0, y1) = jy01(1.0);
        assert!((j0 - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j1 - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((y0 - 0.088_256_964_215_676_96).abs() < 1e-15);
        assert!((y1 + 0.781_212_821_300_288_7).abs() < 1e-15);
        let (j0, _, y0, _) = jy01(10.0);
        assert!((j0 + 0.245_935_764_451_348_3).abs() < 1e-15);
        assert!((y0 - 0.055_671_167_283_599_39).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(bessel_h1(0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_h1(2, -1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_h1_deriv(2, f64::NAN), Err(Error::Domain(_))));
        assert!(bessel_j(0, -1.0).is_err());
    }

    #[test]
    fn wronskian() {
        for &x in &[1.0, 10.0, 100.0] {
            for &l in &[0usize, 5, 30] {
                let (j, y) = bessel_jy_orders(l + 1, x).unwrap();
                let lf = l as f64;
                let (jd, yd) = if l == 0 {
                    (-j[1], -y[1])
                } else {
                    (j[l - 1] - lf / x * j[l], y[l - 1] - lf / x * y[l])
                };
                let w = j[l] * yd - jd * y[l];
                let exact = 2.0 / (PI * x);
                assert!(((w - exact) / exact).abs() <= 1e-12, "x={x} l={l}: {w} vs {exact}");
            }
        }
    }

    #[test]
    fn against_integral_representation() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let l = rng.gen_range(0..=30usize);
            let x = 10f64.powf(rng.gen_range(-0.3..2.3));
            let h = bessel_h1(l, x).unwrap();
            let (j, y) = oracle(l, x);
            let err = (h - c64::new(j, y)).norm() / h.norm();
            assert!(err <= 1e-12, "l={l} x={x}: rel err {err:.2e}");
        }
    }

    #[test]
    fn regime_boundaries() {
        for &x in &[1.999_999, 2.0, 2.000_001, 24.999_99, 25.0, 25.000_01, 0.001, 3000.0] {
            for &l in &[0usize, 1, 2, 7, 45, 60] {
                if x < 1.0 && l > 40 {
                    continue;
                }
                let h = bessel_h1(l, x).unwrap();
                let (j, y) = oracle(l, x);
                let err = (h - c64::new(j, y)).norm() / h.norm();
                assert!(err <= 1e-12, "l={l} x={x}: rel err {err:.2e}");
            }
        }
    }

    #[test]
    fn fast_path_matches() {
        for &x in &[0.01, 0.5, 1.9, 2.1, 13.0, 24.9, 25.1, 400.0] {
            let (h0, h1) = hankel01(x);
            let v = hankel1_orders(1, x).unwrap();
            assert!((h0 - v[0]).norm() <= 1e-15 * h0.norm());
            assert!((h1 - v[1]).norm() <= 1e-15 * h1.norm());
            let (j0, j1) = bessel_j01(x);
            assert!((j0 - h0.re).abs() <= 1e-15 && (j1 - h1.re).abs() <= 1e-15);
        }
    }

    #[test]
    fn derivative_matches_difference() {
        for &(l, x) in &[(0usize, 3.0), (4, 7.5), (30, 40.0)] {
            let d = bessel_h1_deriv(l, x).unwrap();
            let e = 1e-5;
            let fd = (bessel_h1(l, x + e).unwrap() - bessel_h1(l, x - e).unwrap()) / (2.0 * e);
            assert!((d - fd).norm() <= 1e-8 * d.norm().max(1.0));
        }
    }
}
