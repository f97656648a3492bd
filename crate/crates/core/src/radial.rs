//! Partial-wave reference solution for radially symmetric potentials.
//!
//! Each angular mode solves `u'' + u'/r + (κ²(1 - b(r)) - l²/r²) u = 0`,
//! integrated in `t = ln r` (where it reads `u_tt = (l² - κ²(1 - b) r²) u`)
//! from a small radius out to the matching radius `R`. Matching the
//! logarithmic derivative `β_l = u_l'(R)/u_l(R)` to
//! `(H2_l + a_l H1_l)(κr)` outside gives the scattering phases
//! `a_l = -conj(α_l)/α_l` with `α_l = κ H1_l'(κR) - β_l H1_l(κR)`.

use crate::error::{Error, Result};
use crate::numkit::{bessel_j_orders, hankel1_orders};
use crate::potentials::RadialPotential;
use faer::c64;
use ode_solvers::{Dopri5, OutputType, System, Vector2};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug)]
pub struct RadialOptions {
    /// Starting radius as a fraction of the matching radius.
    pub r0_fraction: f64,
    /// Absolute and relative ODE tolerance.
    pub tol: f64,
    /// Largest `|b|` accepted at the matching radius.
    pub b_tolerance: f64,
}

impl Default for RadialOptions {
    fn default() -> Self {
        RadialOptions { r0_fraction: 1e-4, tol: 1e-13, b_tolerance: 1e-14 }
    }
}

/// One mode sampled at the integrator's accepted steps, scaled so that
/// `u(R)² + (R u'(R) / κR)² = 1`.
#[derive(Clone, Debug)]
struct Profile {
    l: usize,
    /// Even-power series coefficients of `u / r^l` near the origin.
    series: Vec<f64>,
    t: Vec<f64>,
    u: Vec<f64>,
    ut: Vec<f64>,
    utt: Vec<f64>,
}

impl Profile {
    /// Value at radius `r`: quintic Hermite interpolation in `t = ln r`, and
    /// the regular series below the first sample.
    fn eval(&self, r: f64) -> f64 {
        let n = self.t.len();
        let r_first = self.t[0].exp();
        if r <= r_first {
            let s = |x: f64| series_sum(&self.series, x);
            return self.u[0] * (r / r_first).powi(self.l as i32) * s(r) / s(r_first);
        }
        let t = r.ln();
        let k = self.t.partition_point(|&s| s <= t).clamp(1, n - 1);
        let (t0, t1) = (self.t[k - 1], self.t[k]);
        let h = t1 - t0;
        let x = (t - t0) / h;
        let (x3, x4, x5) = (x * x * x, x * x * x * x, x * x * x * x * x);
        // quintic Hermite basis from value, first and second derivative
        let h0 = 1.0 - 10.0 * x3 + 15.0 * x4 - 6.0 * x5;
        let h1 = x - 6.0 * x3 + 8.0 * x4 - 3.0 * x5;
        let h2 = 0.5 * x * x - 1.5 * x3 + 1.5 * x4 - 0.5 * x5;
        let h3 = 0.5 * x3 - x4 + 0.5 * x5;
        let h4 = -4.0 * x3 + 7.0 * x4 - 3.0 * x5;
        let h5 = 10.0 * x3 - 15.0 * x4 + 6.0 * x5;
        h0 * self.u[k - 1]
            + h1 * h * self.ut[k - 1]
            + h2 * h * h * self.utt[k - 1]
            + h3 * h * h * self.utt[k]
            + h4 * h * self.ut[k]
            + h5 * self.u[k]
    }
}

#[derive(Clone, Debug)]
pub struct RadialPhases {
    pub kappa: f64,
    pub l_max: usize,
    pub r_match: f64,
    /// `a_0 ..= a_L`.
    pub phases: Vec<c64>,
    /// Robin constants `β_l = u_l'(R)/u_l(R)`.
    pub robin: Vec<f64>,
    profiles: Vec<Profile>,
}

/// Reference values with an estimate of the neglected modes.
#[derive(Clone, Debug)]
pub struct ReferenceField {
    pub values: Vec<c64>,
    /// Largest magnitude of the last retained scattered term over the points.
    pub tail: f64,
}

struct RadialOde<'a> {
    b: &'a RadialPotential,
    k2: f64,
    l2: f64,
}

impl System<f64, Vector2<f64>> for RadialOde<'_> {
    fn system(&self, t: f64, y: &Vector2<f64>, dy: &mut Vector2<f64>) {
        let r = t.exp();
        dy[0] = y[1];
        dy[1] = (self.l2 - self.k2 * (1.0 - self.b.eval(r)) * r * r) * y[0];
    }
}

const TERMS: usize = 12;

fn series_sum(c: &[f64], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * r * r + ck)
}

/// Regular solution near the origin, `u = r^l Σ c_m r^{2m}`: the
/// coefficients, and `(u / r^l, r u' / r^l)` at `r0`.
fn frobenius(b: &RadialPotential, kappa: f64, l: usize, r0: f64) -> (Vec<f64>, f64, f64) {
    // 1 - b(r) = Σ q_j r^{2j}
    let mut q = vec![0.0; TERMS];
    q[0] = 1.0 - b.terms.iter().map(|&(a, _)| a).sum::<f64>();
    let mut fact = 1.0;
    for j in 1..TERMS {
        fact *= j as f64;
        q[j] = -b.terms.iter().map(|&(a, e)| a * (-e).powi(j as i32)).sum::<f64>() / fact;
    }
    let lf = l as f64;
    let mut c = vec![0.0; TERMS];
    c[0] = 1.0;
    let (mut u, mut ut) = (1.0, lf);
    let r2 = r0 * r0;
    let mut pow = 1.0;
    for m in 1..TERMS {
        let k = 2.0 * m as f64;
        let s: f64 = (0..m).map(|j| q[j] * c[m - 1 - j]).sum();
        c[m] = -kappa * kappa * s / (k * (k + 2.0 * lf));
        pow *= r2;
        u += c[m] * pow;
        ut += (k + lf) * c[m] * pow;
    }
    (c, u, ut)
}

fn integrate_mode(b: &RadialPotential, kappa: f64, l: usize, r_match: f64, opts: &RadialOptions, amplitude: f64) -> Result<Profile> {
    let r0 = opts.r0_fraction * r_match;
    let (t0, t1) = (r0.ln(), r_match.ln());
    let (series, u0, ut0) = frobenius(b, kappa, l, r0);
    // unit-magnitude start; only the logarithmic derivative is used
    let (u0, ut0) = (u0 * amplitude, ut0 * amplitude);
    let scale0 = 1.0 / u0.hypot(ut0);
    let (u0, ut0) = (u0 * scale0, ut0 * scale0);
    let ode = RadialOde { b, k2: kappa * kappa, l2: (l * l) as f64 };
    let rhs = |t: f64, u: f64| {
        let r = t.exp();
        ((l * l) as f64 - kappa * kappa * (1.0 - b.eval(r)) * r * r) * u
    };
    let mut solver = Dopri5::from_param(
        ode,
        t0,
        t1,
        0.0,
        Vector2::new(u0, ut0),
        opts.tol,
        opts.tol,
        0.9,
        0.04,
        0.2,
        10.0,
        t1 - t0,
        0.0,
        10_000_000,
        // the growing mode is not stiff; the heuristic misfires at large l
        u32::MAX,
        OutputType::Sparse,
    );
    solver
        .integrate()
        .map_err(|e| Error::Integration(format!("mode {l}: {e}")))?;
    let (ts, ys) = solver.results().get();
    let last = ys.last().expect("integrator records the end point");
    if (ts.last().copied().unwrap_or(t0) - t1).abs() > 1e-12 * t1.abs().max(1.0) || last[0] == 0.0 || !last[0].is_finite() {
        return Err(Error::Integration(format!("mode {l} did not reach the matching radius cleanly")));
    }
    // u(R) itself may sit near a zero, so normalize the (value, slope) pair
    let scale = 1.0 / last[0].hypot(last[1] / (kappa * r_match));
    Ok(Profile {
        l,
        series,
        t: ts.clone(),
        u: ys.iter().map(|y| y[0] * scale).collect(),
        ut: ys.iter().map(|y| y[1] * scale).collect(),
        utt: ts.iter().zip(ys).map(|(&t, y)| rhs(t, y[0] * scale)).collect(),
    })
}

pub fn scattering_phases(b: &RadialPotential, kappa: f64, r_match: f64, l_max: usize) -> Result<RadialPhases> {
    scattering_phases_with(b, kappa, r_match, l_max, &RadialOptions::default())
}

pub fn scattering_phases_with(
    b: &RadialPotential,
    kappa: f64,
    r_match: f64,
    l_max: usize,
    opts: &RadialOptions,
) -> Result<RadialPhases> {
    if !(kappa > 0.0 && r_match > 0.0) {
        return Err(Error::Config(format!("need kappa > 0 and R > 0, got {kappa}, {r_match}")));
    }
    if (l_max as f64) < kappa * r_match {
        return Err(Error::Config(format!("L = {l_max} is below κR = {:.2}", kappa * r_match)));
    }
    let tail_b = b.eval(r_match).abs();
    if tail_b > opts.b_tolerance {
        return Err(Error::Config(format!("|b(R)| = {tail_b:.2e} is not negligible at R = {r_match}")));
    }
    let profiles = (0..=l_max)
        .into_par_iter()
        .map(|l| integrate_mode(b, kappa, l, r_match, opts, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let x = kappa * r_match;
    let h = hankel1_orders(l_max + 1, x)?;
    let mut robin = Vec::with_capacity(l_max + 1);
    let mut phases = Vec::with_capacity(l_max + 1);
    for (l, p) in profiles.iter().enumerate() {
        let beta = p.ut.last().unwrap() / (p.u.last().unwrap() * r_match);
        let dh = if l == 0 { -h[1] } else { h[l - 1] - h[l] * (l as f64 / x) };
        let alpha = dh * kappa - h[l] * beta;
        robin.push(beta);
        phases.push(-alpha.conj() / alpha);
    }
    Ok(RadialPhases { kappa, l_max, r_match, phases, robin, profiles })
}

impl RadialPhases {
    /// Number of stored radial samples per mode.
    pub fn sample_counts(&self) -> Vec<usize> {
        self.profiles.iter().map(|p| p.t.len()).collect()
    }

    /// `c` with `c u_l = J_l + (a_l - 1)/2 H1_l` in value and slope at `R`,
    /// combined so that a zero of `u_l(R)` does no harm.
    fn interior_coefficient(&self, l: usize, jr: &[f64], hr: &[c64]) -> c64 {
        let x = self.kappa * self.r_match;
        let d = |v: &dyn Fn(usize) -> c64| if l == 0 { -v(1) } else { v(l - 1) - v(l) * (l as f64 / x) };
        let half = (self.phases[l] - 1.0) * 0.5;
        let psi = half * hr[l] + jr[l];
        // x ψ'(x), matching r u' at R
        let psi_t = (half * d(&|m| hr[m]) + d(&|m| c64::new(jr[m], 0.0))) * x;
        let p = &self.profiles[l];
        let (u, ut) = (*p.u.last().unwrap(), *p.ut.last().unwrap());
        (psi * u + psi_t * ut / (x * x)) / (u * u + ut * ut / (x * x))
    }

    /// `max | |a_l| - 1 |`.
    pub fn max_unit_deviation(&self) -> f64 {
        self.phases.iter().map(|a| (a.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Total field for the incident plane wave `exp(iκ w·x)`. The incident
    /// wave is summed in closed form; only the scattered part uses the
    /// truncated mode sum.
    pub fn reference_field(&self, points: &[[f64; 2]], direction: [f64; 2]) -> Result<ReferenceField> {
        let k = self.kappa;
        let nw = direction[0].hypot(direction[1]);
        let w = [direction[0] / nw, direction[1] / nw];
        let lm = self.l_max;
        let hr = hankel1_orders(lm, k * self.r_match)?;
        let jr = bessel_j_orders(lm, k * self.r_match)?;
        let mut values = Vec::with_capacity(points.len());
        let mut tail = 0.0f64;
        for &p in points {
            let r = p[0].hypot(p[1]);
            let cos_t = if r > 0.0 { ((p[0] * w[0] + p[1] * w[1]) / r).clamp(-1.0, 1.0) } else { 1.0 };
            let theta = cos_t.acos();
            let incident = c64::new(0.0, k * (p[0] * w[0] + p[1] * w[1])).exp();
            let mut us = c64::new(0.0, 0.0);
            let mut last = 0.0;
            if r >= self.r_match {
                let h = hankel1_orders(lm, k * r)?;
                for l in 0..=lm {
                    let term = i_pow(l) * (self.phases[l] - 1.0) * 0.5 * h[l] * mode_weight(l, theta);
                    us += term;
                    last = term.norm();
                }
            } else {
                let j = bessel_j_orders(lm, k * r)?;
                for l in 0..=lm {
                    let c = self.interior_coefficient(l, &jr, &hr);
                    let term = i_pow(l) * (c * self.profiles[l].eval(r) - j[l]) * mode_weight(l, theta);
                    us += term;
                    last = term.norm();
                }
            }
            tail = tail.max(last);
            values.push(incident + us);
        }
        Ok(ReferenceField { values, tail })
    }

}

fn i_pow(l: usize) -> c64 {
    [c64::new(1.0, 0.0), c64::new(0.0, 1.0), c64::new(-1.0, 0.0), c64::new(0.0, -1.0)][l % 4]
}

/// `ε_l cos(lθ)` with `ε_0 = 1`, `ε_l = 2` otherwise.
fn mode_weight(l: usize, theta: f64) -> f64 {
    if l == 0 {
        1.0
    } else {
        2.0 * (l as f64 * theta).cos()
    }
}
