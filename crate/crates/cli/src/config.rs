//! Run configuration, read from TOML.
//!
//! Every field has a default, so an empty file is a valid bump1 run. The
//! fully resolved configuration is written next to each command's outputs.

use crate::CliError;
use hpscatter::fields::GridSpec;
use hpscatter::potentials::{builtin_with, GaussianBump, PotentialParams, Rolloff, ScatteringPotential};
use hpscatter::scene::SceneConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// Levels from which a run counts as large and needs `--large`.
pub const LARGE_LEVELS: usize = 7;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialConfig {
    pub name: String,
    pub seed: Option<u64>,
    pub count: Option<usize>,
    pub lattice: Option<usize>,
    pub width: Option<f64>,
    pub bumps: Vec<BumpConfig>,
    pub rolloff: Option<RolloffConfig>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig { name: "bump1".into(), seed: None, count: None, lattice: None, width: None, bumps: Vec::new(), rolloff: None }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BumpConfig {
    pub center: [f64; 2],
    pub amplitude: f64,
    pub exponent: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RolloffConfig {
    pub edge: f64,
    pub steepness: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// `[xmin, xmax, ymin, ymax]`.
    pub bounds: [f64; 4],
    pub nx: usize,
    pub ny: usize,
    pub csv: bool,
    pub binary: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { bounds: [-1.0, 1.0, -1.0, 1.0], nx: 200, ny: 200, csv: true, binary: true }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,
    pub potential: PotentialConfig,
    pub kappa: f64,
    /// Unit incident directions; each is solved against the same factorization.
    pub directions: Vec<[f64; 2]>,
    pub levels: usize,
    pub ng: usize,
    pub nc: usize,
    pub eta: Option<f64>,
    /// Largest accepted condition estimate of `R - I` at the root.
    pub dtn_threshold: f64,
    pub merge_threshold: f64,
    pub out_dir: PathBuf,
    pub probes: Vec<[f64; 2]>,
    pub grid: Option<GridConfig>,
    pub convergence_levels: Vec<usize>,
    pub timing_levels: Vec<usize>,
    /// Matching radius of the radial reference.
    pub r_match: f64,
    /// Highest angular mode of the radial reference.
    pub l_max: usize,
    pub large: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            potential: PotentialConfig::default(),
            kappa: 40.0,
            directions: vec![[1.0, 0.0]],
            levels: 3,
            ng: 14,
            nc: 16,
            eta: None,
            dtn_threshold: hpscatter::hps::DEFAULT_DTN_THRESHOLD,
            merge_threshold: hpscatter::hps::DEFAULT_MERGE_THRESHOLD,
            out_dir: PathBuf::from("out"),
            probes: vec![[0.5, 0.0], [1.0, 0.5], [0.25, 0.0]],
            grid: None,
            convergence_levels: vec![2, 3, 4, 5],
            timing_levels: vec![2, 3, 4, 5],
            r_match: 0.5,
            l_max: 30,
            large: false,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub kappa: Option<f64>,
    pub levels: Vec<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub large: bool,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Applies overrides. A single `--levels` value sets `levels`; a list
    /// also replaces the convergence and timing sweeps.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(k) = o.kappa {
            self.kappa = k;
        }
        match o.levels.as_slice() {
            [] => {}
            [m] => self.levels = *m,
            list => {
                self.levels = *list.iter().max().unwrap();
                self.convergence_levels = list.to_vec();
                self.timing_levels = list.to_vec();
            }
        }
        if let Some(s) = o.seed {
            self.potential.seed = Some(s);
        }
        if let Some(out) = &o.out {
            self.out_dir = out.clone();
        }
        self.large |= o.large;
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be positive, got {}", self.kappa));
        }
        if self.nc <= self.ng + 1 {
            return bad(format!("nc = {} must exceed ng + 1 = {}", self.nc, self.ng + 1));
        }
        if self.directions.is_empty() {
            return bad("at least one incident direction is required".into());
        }
        for w in &self.directions {
            if (w[0].hypot(w[1]) - 1.0).abs() > 1e-12 {
                return bad(format!("incident direction {w:?} is not a unit vector"));
            }
        }
        let mut all_levels = vec![self.levels];
        all_levels.extend(&self.convergence_levels);
        all_levels.extend(&self.timing_levels);
        if !self.large {
            if let Some(m) = all_levels.iter().find(|&&m| m >= LARGE_LEVELS) {
                return bad(format!("M = {m} is a large run; pass --large to allow it"));
            }
        }
        for list in [&self.convergence_levels, &self.timing_levels] {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("level lists must be strictly ascending, got {list:?}"));
            }
        }
        if let Some(g) = &self.grid {
            if g.nx == 0 || g.ny == 0 || !(g.bounds[0] < g.bounds[1] && g.bounds[2] < g.bounds[3]) {
                return bad(format!("invalid grid {g:?}"));
            }
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<ScatteringPotential, CliError> {
        let p = &self.potential;
        let params = PotentialParams {
            seed: p.seed,
            count: p.count,
            lattice: p.lattice,
            width: p.width,
            bumps: p.bumps.iter().map(|b| GaussianBump { center: b.center, amplitude: b.amplitude, exponent: b.exponent }).collect(),
            rolloff: p.rolloff.map(|r| Rolloff { edge: r.edge, steepness: r.steepness }),
        };
        Ok(builtin_with(&p.name, &params)?)
    }

    pub fn scene(&self, levels: usize) -> SceneConfig {
        let mut c = SceneConfig::new(self.kappa, levels);
        c.ng = self.ng;
        c.nc = self.nc;
        c.eta = self.eta;
        c.dtn_threshold = self.dtn_threshold;
        c.merge_threshold = self.merge_threshold;
        c
    }

    pub fn grid_spec(&self) -> Option<GridSpec> {
        self.grid.map(|g| GridSpec { bounds: g.bounds, nx: g.nx, ny: g.ny })
    }
}
