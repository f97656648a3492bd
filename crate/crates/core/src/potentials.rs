//! Scattering potentials `b(x)`, where `sqrt(1 - b)` is the refractive index.
//!
//! Every built-in potential is a closed-form smooth function that vanishes
//! (to rounding) on and outside the boundary of `(-0.5, 0.5)^2`.

use crate::error::{Error, Result};
use crate::numkit::{erf, erfc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] =
    &["zero", "bump1", "bump2", "lens", "random_bumps", "crystal", "custom_gaussian_sum"];

/// `amplitude * exp(-exponent * |x - center|^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianBump {
    pub center: [f64; 2],
    pub amplitude: f64,
    pub exponent: f64,
}

impl GaussianBump {
    #[inline]
    fn eval(&self, x: [f64; 2]) -> f64 {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        self.amplitude * (-self.exponent * (dx * dx + dy * dy)).exp()
    }
}

/// Product of `erfc(steepness (|x_k| - edge)) / 2` over both coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rolloff {
    pub edge: f64,
    pub steepness: f64,
}

impl Rolloff {
    #[inline]
    fn factor(&self, x: [f64; 2]) -> f64 {
        0.25 * erfc(self.steepness * (x[0].abs() - self.edge))
            * erfc(self.steepness * (x[1].abs() - self.edge))
    }
}

/// Optional parameters for [`builtin_with`]. Unused fields are ignored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PotentialParams {
    /// Required by `random_bumps`.
    pub seed: Option<u64>,
    /// Number of random bumps (default 200).
    pub count: Option<usize>,
    /// Crystal lattice size per side (default 20).
    pub lattice: Option<usize>,
    /// Crystal bump standard deviation as a fraction of the lattice spacing
    /// (default 0.12), or the random-bump Gaussian exponent (default 100).
    pub width: Option<f64>,
    /// Terms of `custom_gaussian_sum`.
    pub bumps: Vec<GaussianBump>,
    /// Rolloff applied to `custom_gaussian_sum`.
    pub rolloff: Option<Rolloff>,
}

#[derive(Clone, Debug, PartialEq)]
enum Profile {
    Zero,
    Lens,
    GaussianSum {
        bumps: Vec<GaussianBump>,
        rolloff: Option<Rolloff>,
        /// squared distance beyond which a unit-amplitude term is below 1e-18
        cutoff2: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringPotential {
    name: String,
    params: PotentialParams,
    support: [f64; 4],
    profile: Profile,
}

impl ScatteringPotential {
    fn gaussian_sum(
        name: &str,
        params: PotentialParams,
        bumps: Vec<GaussianBump>,
        rolloff: Option<Rolloff>,
    ) -> Self {
        let cutoff2 = bumps
            .iter()
            .map(|b| {
                let a = b.amplitude.abs();
                if a == 0.0 {
                    0.0
                } else {
                    (a / 1e-18).ln().max(0.0) / b.exponent
                }
            })
            .collect();
        ScatteringPotential {
            name: name.to_string(),
            params,
            support: [-0.5, 0.5, -0.5, 0.5],
            profile: Profile::GaussianSum { bumps, rolloff, cutoff2 },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &PotentialParams {
        &self.params
    }

    /// `[xmin, xmax, ymin, ymax]` outside of which `b` is treated as zero.
    pub fn support(&self) -> [f64; 4] {
        self.support
    }

    #[inline]
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match &self.profile {
            Profile::Zero => 0.0,
            Profile::Lens => {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                4.0 * (x[1] - 0.2) * (1.0 - erf(25.0 * (r - 0.3)))
            }
            Profile::GaussianSum { bumps, rolloff, cutoff2 } => {
                let mut s = 0.0;
                for (b, &c2) in bumps.iter().zip(cutoff2) {
                    let dx = x[0] - b.center[0];
                    let dy = x[1] - b.center[1];
                    let d2 = dx * dx + dy * dy;
                    if d2 < c2 {
                        s += b.eval(x);
                    }
                }
                match rolloff {
                    Some(r) => s * r.factor(x),
                    None => s,
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.profile, Profile::Zero)
    }

    /// Gaussian terms of a gaussian-sum potential (empty otherwise).
    pub fn bumps(&self) -> &[GaussianBump] {
        match &self.profile {
            Profile::GaussianSum { bumps, .. } => bumps,
            _ => &[],
        }
    }

    /// Radial profile `b(r)` when the potential is rotationally symmetric
    /// about the origin.
    pub fn radial(&self) -> Option<RadialPotential> {
        match &self.profile {
            Profile::Zero => Some(RadialPotential { terms: Vec::new() }),
            Profile::GaussianSum { bumps, rolloff: None, .. }
                if bumps.iter().all(|b| b.center == [0.0, 0.0]) =>
            {
                Some(RadialPotential { terms: bumps.iter().map(|b| (b.amplitude, b.exponent)).collect() })
            }
            _ => None,
        }
    }

    /// Largest `sqrt(1 - b)` over an `n x n` grid covering the support.
    pub fn max_refractive_index(&self, n: usize) -> f64 {
        let [x0, x1, y0, y1] = self.support;
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            let x = x0 + (x1 - x0) * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let y = y0 + (y1 - y0) * j as f64 / (n - 1) as f64;
                best = best.max(1.0 - self.eval([x, y]));
            }
        }
        best.max(0.0).sqrt()
    }

    /// Largest `|b|` over `samples` points along the support boundary and
    /// on the square rings at the given offsets outside it.
    pub fn max_abs_outside(&self, samples: usize, offsets: &[f64]) -> f64 {
        let [x0, x1, y0, y1] = self.support;
        let mut m = 0.0f64;
        for &o in std::iter::once(&0.0).chain(offsets) {
            for k in 0..samples {
                let t = k as f64 / (samples - 1) as f64;
                let x = x0 - o + (x1 - x0 + 2.0 * o) * t;
                let y = y0 - o + (y1 - y0 + 2.0 * o) * t;
                for p in [[x, y0 - o], [x, y1 + o], [x0 - o, y], [x1 + o, y]] {
                    m = m.max(self.eval(p).abs());
                }
            }
        }
        m
    }
}

/// `b(r) = sum a_k exp(-e_k r^2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialPotential {
    pub terms: Vec<(f64, f64)>,
}

impl RadialPotential {
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        self.terms.iter().map(|&(a, e)| a * (-e * r * r).exp()).sum()
    }
}

/// Vectorised evaluation of `b`.
pub fn eval_b(pot: &ScatteringPotential, points: &[[f64; 2]]) -> Vec<f64> {
    points.iter().map(|&p| pot.eval(p)).collect()
}

/// Built-in potential with default parameters. `random_bumps` uses seed 0.
pub fn builtin(name: &str) -> Result<ScatteringPotential> {
    let params = match name {
        "random_bumps" => PotentialParams { seed: Some(0), ..Default::default() },
        _ => PotentialParams::default(),
    };
    builtin_with(name, &params)
}

pub fn builtin_with(name: &str, params: &PotentialParams) -> Result<ScatteringPotential> {
    let single = |a: f64| vec![GaussianBump { center: [0.0, 0.0], amplitude: a, exponent: 160.0 }];
    match name {
        "zero" => Ok(ScatteringPotential {
            name: name.into(),
            params: params.clone(),
            support: [-0.5, 0.5, -0.5, 0.5],
            profile: Profile::Zero,
        }),
        "bump1" => Ok(ScatteringPotential::gaussian_sum(name, params.clone(), single(-1.5), None)),
        "bump2" => Ok(ScatteringPotential::gaussian_sum(name, params.clone(), single(1.5), None)),
        "lens" => Ok(ScatteringPotential {
            name: name.into(),
            params: params.clone(),
            support: [-0.5, 0.5, -0.5, 0.5],
            profile: Profile::Lens,
        }),
        "random_bumps" => random_bumps(params),
        "crystal" => crystal(params),
        "custom_gaussian_sum" => {
            if params.bumps.is_empty() {
                return Err(Error::Config("custom_gaussian_sum needs at least one bump".into()));
            }
            for b in &params.bumps {
                if !(b.exponent > 0.0) || !b.amplitude.is_finite() {
                    return Err(Error::Config(format!("invalid Gaussian bump {b:?}")));
                }
            }
            let pot = ScatteringPotential::gaussian_sum(
                name,
                params.clone(),
                params.bumps.clone(),
                params.rolloff,
            );
            let leak = pot.max_abs_outside(401, &[0.05, 0.25]);
            if leak > 1e-12 {
                return Err(Error::Config(format!(
                    "custom_gaussian_sum does not vanish on the domain boundary (max |b| = {leak:.2e}); \
                     add a rolloff or move the bumps inward"
                )));
            }
            Ok(pot)
        }
        other => Err(Error::UnknownPotential(other.to_string())),
    }
}

/// Peak refractive index targeted by the random-bumps calibration.
pub const RANDOM_BUMPS_PEAK_INDEX: f64 = 4.3;
/// Peak refractive index of the crystal bumps.
pub const CRYSTAL_PEAK_INDEX: f64 = 6.7;

fn random_bumps(params: &PotentialParams) -> Result<ScatteringPotential> {
    let seed = params
        .seed
        .ok_or_else(|| Error::Config("random_bumps requires a seed".into()))?;
    let count = params.count.unwrap_or(200);
    let exponent = params.width.unwrap_or(100.0);
    if count == 0 || !(exponent > 0.0) {
        return Err(Error::Config("random_bumps needs count > 0 and width > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<GaussianBump> = (0..count)
        .map(|_| GaussianBump {
            center: [rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)],
            amplitude: -rng.gen_range(0.0..1.0),
            exponent,
        })
        .collect();
    let rolloff = Some(Rolloff { edge: 0.44, steepness: 100.0 });
    let unscaled = ScatteringPotential::gaussian_sum("random_bumps", params.clone(), raw.clone(), rolloff);

    // Scale so that min b = 1 - peak^2: coarse grid search, then a local refinement.
    let target = 1.0 - RANDOM_BUMPS_PEAK_INDEX * RANDOM_BUMPS_PEAK_INDEX;
    let n = 161;
    let mut best = ([0.0, 0.0], f64::INFINITY);
    for i in 0..n {
        for j in 0..n {
            let p = [-0.5 + i as f64 / (n - 1) as f64, -0.5 + j as f64 / (n - 1) as f64];
            let v = unscaled.eval(p);
            if v < best.1 {
                best = (p, v);
            }
        }
    }
    let mut h = 1.0 / (n - 1) as f64;
    while h > 1e-7 {
        let (p, v) = best;
        let mut moved = false;
        for d in [[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]] {
            let q = [p[0] + d[0], p[1] + d[1]];
            let w = unscaled.eval(q);
            if w < best.1 {
                best = (q, w);
                moved = true;
            }
        }
        if !moved || best.1 >= v {
            h *= 0.5;
        }
    }
    if !(best.1 < 0.0) {
        return Err(Error::Config("random_bumps calibration found no negative minimum".into()));
    }
    let scale = target / best.1;
    let bumps = raw
        .into_iter()
        .map(|b| GaussianBump { amplitude: b.amplitude * scale, ..b })
        .collect();
    Ok(ScatteringPotential::gaussian_sum("random_bumps", params.clone(), bumps, rolloff))
}

/// Lattice cells `(i, j)` (x index, y index) left empty to form the channel:
/// the middle row from the west edge to the centre, then the middle column
/// up to the north edge.
pub fn crystal_channel(n: usize) -> Vec<(usize, usize)> {
    let c = n / 2;
    let mut cells: Vec<(usize, usize)> = (0..=c).map(|i| (i, c)).collect();
    cells.extend((c + 1..n).map(|j| (c, j)));
    cells
}

fn crystal(params: &PotentialParams) -> Result<ScatteringPotential> {
    let n = params.lattice.unwrap_or(20);
    let frac = params.width.unwrap_or(0.12);
    if n < 2 || !(frac > 0.0 && frac < 0.5) {
        return Err(Error::Config("crystal needs lattice >= 2 and 0 < width < 0.5".into()));
    }
    let half = 0.45;
    let spacing = 2.0 * half / n as f64;
    let sigma = frac * spacing;
    let amplitude = -(CRYSTAL_PEAK_INDEX * CRYSTAL_PEAK_INDEX - 1.0);
    let channel = crystal_channel(n);
    let mut bumps = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if channel.contains(&(i, j)) {
                continue;
            }
            bumps.push(GaussianBump {
                center: [-half + spacing * (i as f64 + 0.5), -half + spacing * (j as f64 + 0.5)],
                amplitude,
                exponent: 1.0 / (2.0 * sigma * sigma),
            });
        }
    }
    let rolloff = Some(Rolloff { edge: 0.45, steepness: 120.0 });
    Ok(ScatteringPotential::gaussian_sum("crystal", params.clone(), bumps, rolloff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        let b1 = builtin("bump1").unwrap();
        assert_eq!(b1.eval([0.0, 0.0]), -1.5);
        let lens = builtin("lens").unwrap();
        assert_eq!(lens.eval([0.0, 0.2]), 0.0);
        let b2 = builtin("bump2").unwrap();
        let want = 1.5 * (-40.0f64).exp();
        assert!((b2.eval([0.5, 0.0]) - want).abs() <= 1e-15 * want);
        assert_eq!(eval_b(&builtin("zero").unwrap(), &[[0.1, 0.2]]), vec![0.0]);
    }

    #[test]
    fn bump1_peak_index() {
        let b1 = builtin("bump1").unwrap();
        let peak = b1.max_refractive_index(101);
        assert!((peak - 2.5f64.sqrt()).abs() < 1e-12);
        assert!((peak - 1.58).abs() < 0.01);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(builtin("prism"), Err(Error::UnknownPotential(_))));
    }

    #[test]
    fn random_bumps_requires_seed() {
        let r = builtin_with("random_bumps", &PotentialParams::default());
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn random_bumps_deterministic() {
        let p = PotentialParams { seed: Some(42), ..Default::default() };
        let a = builtin_with("random_bumps", &p).unwrap();
        let b = builtin_with("random_bumps", &p).unwrap();
        let pts = [[0.1, -0.2], [0.33, 0.07], [-0.41, 0.4]];
        assert_eq!(eval_b(&a, &pts), eval_b(&b, &pts));
        let c = builtin_with("random_bumps", &PotentialParams { seed: Some(43), ..Default::default() }).unwrap();
        assert_ne!(eval_b(&a, &pts), eval_b(&c, &pts));
        assert_eq!(a.bumps().len(), 200);
    }

    #[test]
    fn random_bumps_peak_index() {
        let p = builtin("random_bumps").unwrap();
        let peak = p.max_refractive_index(801);
        assert!((peak - RANDOM_BUMPS_PEAK_INDEX).abs() <= 0.05 * RANDOM_BUMPS_PEAK_INDEX, "{peak}");
    }

    #[test]
    fn lens_and_crystal_peak_index() {
        let lens = builtin("lens").unwrap().max_refractive_index(2000);
        assert!((lens - 2.1).abs() <= 0.05 * 2.1, "{lens}");
        let crystal = builtin("crystal").unwrap().max_refractive_index(2000);
        assert!((crystal - CRYSTAL_PEAK_INDEX).abs() <= 0.05 * CRYSTAL_PEAK_INDEX, "{crystal}");
    }

    #[test]
    fn crystal_layout() {
        let c = builtin("crystal").unwrap();
        let chan = crystal_channel(20);
        assert_eq!(chan.len(), 11 + 9);
        assert_eq!(c.bumps().len(), 400 - chan.len());
        // channel cell centre is empty, neighbouring lattice cell is a bump
        let sp = 0.045;
        let cell = |i: usize, j: usize| [-0.45 + sp * (i as f64 + 0.5), -0.45 + sp * (j as f64 + 0.5)];
        assert!(c.eval(cell(3, 10)).abs() < 1e-6);
        assert!((c.eval(cell(3, 9)) + 43.89).abs() < 1e-6);
        assert!(c.eval(cell(10, 15)).abs() < 1e-6);
    }

    #[test]
    fn support_containment() {
        for name in ["zero", "bump1", "bump2", "random_bumps", "crystal"] {
            let p = builtin(name).unwrap();
            let m = p.max_abs_outside(2001, &[0.01, 0.05, 0.2]);
            assert!(m <= 1e-14, "{name}: {m:e}");
        }
        let reduced = builtin_with("crystal", &PotentialParams { lattice: Some(8), ..Default::default() }).unwrap();
        assert!(reduced.max_abs_outside(2001, &[0.01, 0.05]) <= 1e-14);
    }

    /// `1 - erf(5)` times `4 (x2 - 0.2)` leaves about 4.3e-12 on the boundary.
    #[test]
    fn lens_boundary_residual() {
        let lens = builtin("lens").unwrap();
        let m = lens.max_abs_outside(2001, &[0.05]);
        let expected = 4.0 * 0.7 * erfc(5.0);
        assert!((m - expected).abs() <= 1e-3 * expected, "{m:e} vs {expected:e}");
    }

    #[test]
    fn custom_gaussian_sum() {
        let p = PotentialParams {
            bumps: vec![
                GaussianBump { center: [0.1, 0.0], amplitude: -2.0, exponent: 200.0 },
                GaussianBump { center: [-0.1, 0.1], amplitude: 1.0, exponent: 300.0 },
            ],
            ..Default::default()
        };
        let pot = builtin_with("custom_gaussian_sum", &p).unwrap();
        let want = -2.0 + (-300.0f64 * 0.05).exp();
        assert!((pot.eval([0.1, 0.0]) - want).abs() < 1e-15);
        assert!(pot.radial().is_none());

        let leaky = PotentialParams {
            bumps: vec![GaussianBump { center: [0.45, 0.0], amplitude: 1.0, exponent: 50.0 }],
            ..Default::default()
        };
        assert!(builtin_with("custom_gaussian_sum", &leaky).is_err());
        assert!(builtin_with("custom_gaussian_sum", &PotentialParams::default()).is_err());
    }

    #[test]
    fn radial_profiles() {
        let r = builtin("bump2").unwrap().radial().unwrap();
        assert!((r.eval(0.1) - 1.5 * (-1.6f64).exp()).abs() < 1e-15);
        assert!(builtin("zero").unwrap().radial().unwrap().terms.is_empty());
        assert!(builtin("lens").unwrap().radial().is_none());
    }

    proptest! {
        #[test]
        fn bump_is_radial(theta in 0.0f64..6.3, r in 0.0f64..0.5) {
            let b1 = builtin("bump1").unwrap();
            let rad = b1.radial().unwrap();
            let v = b1.eval([r * theta.cos(), r * theta.sin()]);
            prop_assert!((v - rad.eval(r)).abs() <= 1e-15);
        }
    }
}
