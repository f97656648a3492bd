use crate::config::RunConfig;
use crate::output::{num, write_grid_binary, write_grid_csv, Table};
use crate::CliError;
use hpscatter::c64;
use hpscatter::fields::eval_total_grid;
use hpscatter::potentials::ScatteringPotential;
use hpscatter::radial::{scattering_phases, RadialPhases};
use hpscatter::scene::{Scene, SceneConfig};

/// Largest boundary system the spectrum command will diagonalize.
pub const SPECTRUM_MAX_NODES: usize = 2000;

fn oracle(cfg: &RunConfig, pot: &ScatteringPotential) -> Result<Option<RadialPhases>, CliError> {
    match pot.radial() {
        Some(b) => Ok(Some(scattering_phases(&b, cfg.kappa, cfg.r_match, cfg.l_max)?)),
        None => Ok(None),
    }
}

fn build(cfg: &RunConfig, pot: &ScatteringPotential, levels: usize, full: bool) -> Result<Scene, CliError> {
    let sc: SceneConfig = cfg.scene(levels);
    let sc = if full { sc } else { sc.retain_for(&cfg.probes)? };
    Ok(Scene::build(&sc, pot)?)
}

pub fn solve(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let pot = cfg.potential()?;
    let grid = cfg.grid_spec();
    let scene = build(cfg, &pot, cfg.levels, grid.is_some())?;
    let phases = oracle(cfg, &pot)?;
    let out = &cfg.out_dir;
    let mut lines = Vec::new();

    let t = &scene.timings;
    let mut tb = Table::create(
        &out.join("build.csv"),
        &["levels", "N", "n", "t_build", "t_bie", "operator_bytes", "boundary_bytes", "max_merge_condition", "dtn_condition"],
    )?;
    let dtn_cond = scene.solver.dtn.as_ref().map_or(f64::NAN, |d| d.condition);
    tb.row([
        cfg.levels.to_string(),
        scene.config.total_points().to_string(),
        scene.system.len().to_string(),
        num(t.sweep),
        num(t.boundary),
        scene.solver.operator_bytes().to_string(),
        scene.system.operator_bytes().to_string(),
        num(scene.solver.max_merge_condition),
        num(dtn_cond),
    ])?;
    tb.finish()?;
    lines.push(format!(
        "M={} N={} n={}: T_build {:.3}s, T_bie {:.3}s, operators {:.1} MB",
        cfg.levels,
        scene.config.total_points(),
        scene.system.len(),
        t.sweep,
        t.boundary,
        scene.solver.operator_bytes() as f64 / 1e6
    ));

    let mut probes = Table::create(
        &out.join("probes.csv"),
        &["direction", "wx", "wy", "x", "y", "re_u", "im_u", "re_oracle", "im_oracle", "abs_error"],
    )?;
    let mut solves = Table::create(&out.join("solves.csv"), &["direction", "wx", "wy", "t_solve", "t_apply", "max_abs_us_boundary"])?;
    let mut bnd = Table::create(
        &out.join("boundary.csv"),
        &["direction", "node", "x", "y", "re_us", "im_us", "re_us_n", "im_us_n"],
    )?;
    for (d, &w) in cfg.directions.iter().enumerate() {
        let sol = scene.solve_direction(w)?;
        let us_max = sol.boundary.us.iter().map(|z| z.norm()).fold(0.0, f64::max);
        solves.row([d.to_string(), num(w[0]), num(w[1]), num(sol.solve_time), num(sol.apply_time), num(us_max)])?;
        lines.push(format!(
            "direction {d} ({:.4}, {:.4}): T_solve {:.4}s, T_apply {:.4}s, max |u^s| on boundary {us_max:.3e}",
            w[0], w[1], sol.solve_time, sol.apply_time
        ));
        let b = &sol.boundary;
        for (i, x) in scene.system.mesh.nodes.iter().enumerate() {
            bnd.row([d.to_string(), i.to_string(), num(x[0]), num(x[1]), num(b.us[i].re), num(b.us[i].im), num(b.us_n[i].re), num(b.us_n[i].im)])?;
        }
        let vals = scene.total_field(&sol, &cfg.probes)?;
        let refs = match &phases {
            Some(ph) => Some(ph.reference_field(&cfg.probes, w)?.values),
            None => None,
        };
        for (k, (p, u)) in cfg.probes.iter().zip(&vals).enumerate() {
            let (ro, io, err) = match &refs {
                Some(r) => (num(r[k].re), num(r[k].im), num((u - r[k]).norm())),
                None => (String::new(), String::new(), String::new()),
            };
            probes.row([d.to_string(), num(w[0]), num(w[1]), num(p[0]), num(p[1]), num(u.re), num(u.im), ro, io, err.clone()])?;
            let tail = if err.is_empty() { String::new() } else { format!(", |u - u_ref| = {:.3e}", (u - refs.as_ref().unwrap()[k]).norm()) };
            lines.push(format!("  u({}, {}) = {:.15} {:+.15}i{tail}", p[0], p[1], u.re, u.im));
        }
        if let Some(spec) = grid {
            let g = eval_total_grid(&scene, &sol, spec)?;
            let gc = cfg.grid.unwrap();
            if gc.csv {
                write_grid_csv(&out.join(format!("grid_{d}.csv")), &g)?;
            }
            if gc.binary {
                write_grid_binary(&out.join(format!("grid_{d}.bin")), &g)?;
            }
        }
    }
    probes.finish()?;
    solves.finish()?;
    bnd.finish()?;
    Ok(lines)
}

/// One row of a convergence study.
#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub levels: usize,
    pub total_points: usize,
    pub boundary_nodes: usize,
    pub build_time: f64,
    pub values: Vec<c64>,
    /// `|u - u_ref|` per probe when a reference exists.
    pub oracle_errors: Option<Vec<f64>>,
    /// `|u_M - u_{M+1}|` per probe; absent on the last row.
    pub next_differences: Option<Vec<f64>>,
}

pub fn convergence_rows(cfg: &RunConfig) -> Result<Vec<ConvergenceRow>, CliError> {
    let pot = cfg.potential()?;
    let phases = oracle(cfg, &pot)?;
    let w = cfg.directions[0];
    let refs = match &phases {
        Some(ph) => Some(ph.reference_field(&cfg.probes, w)?.values),
        None => None,
    };
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &m in &cfg.convergence_levels {
        let scene = build(cfg, &pot, m, false)?;
        let sol = scene.solve_direction(w)?;
        let values = scene.total_field(&sol, &cfg.probes)?;
        let oracle_errors = refs.as_ref().map(|r| values.iter().zip(r).map(|(u, v)| (u - v).norm()).collect());
        if let Some(prev) = rows.last_mut() {
            prev.next_differences = Some(prev.values.iter().zip(&values).map(|(a, b)| (a - b).norm()).collect());
        }
        rows.push(ConvergenceRow {
            levels: m,
            total_points: scene.config.total_points(),
            boundary_nodes: scene.system.len(),
            build_time: scene.timings.total(),
            values,
            oracle_errors,
            next_differences: None,
        });
    }
    Ok(rows)
}

pub fn convergence(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let rows = convergence_rows(cfg)?;
    let mut header: Vec<String> = ["levels", "N", "n", "t_build"].iter().map(|s| s.to_string()).collect();
    for k in 0..cfg.probes.len() {
        for col in ["re", "im", "err_oracle", "diff_next"] {
            header.push(format!("p{k}_{col}"));
        }
    }
    let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut t = Table::create(&cfg.out_dir.join("convergence.csv"), &h)?;
    let mut lines = vec![format!(
        "probes: {}",
        cfg.probes.iter().enumerate().map(|(k, p)| format!("p{k}=({}, {})", p[0], p[1])).collect::<Vec<_>>().join(" ")
    )];
    for r in &rows {
        let mut rec = vec![r.levels.to_string(), r.total_points.to_string(), r.boundary_nodes.to_string(), num(r.build_time)];
        let mut line = format!("M={} N={} n={}", r.levels, r.total_points, r.boundary_nodes);
        for k in 0..cfg.probes.len() {
            let opt = |v: &Option<Vec<f64>>| v.as_ref().map_or(String::new(), |e| num(e[k]));
            rec.extend([num(r.values[k].re), num(r.values[k].im), opt(&r.oracle_errors), opt(&r.next_differences)]);
            if let Some(e) = &r.oracle_errors {
                line.push_str(&format!(" e{k}={:.2e}", e[k]));
            }
            if let Some(d) = &r.next_differences {
                line.push_str(&format!(" d{k}={:.2e}", d[k]));
            }
        }
        t.row(rec)?;
        lines.push(line);
    }
    t.finish()?;
    Ok(lines)
}

pub fn spectrum(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let pot = cfg.potential()?;
    let sc = SceneConfig { retain: hpscatter::hps::Retain::None, ..cfg.scene(cfg.levels) };
    let tree = hpscatter::quadtree::build_tree(hpscatter::scene::DOMAIN, cfg.levels, cfg.ng)?;
    let n = hpscatter::bie::build_boundary_mesh(&tree).len();
    if n > SPECTRUM_MAX_NODES {
        return Err(CliError::Config(format!("spectrum needs n <= {SPECTRUM_MAX_NODES} boundary nodes, M = {} gives {n}", cfg.levels)));
    }
    let scene = Scene::build(&sc, &pot)?;
    let rep = scene.system.spectrum()?;
    let out = &cfg.out_dir;
    let mut summary = Table::create(&out.join("spectrum_summary.csv"), &["operator", "n", "max_abs", "cluster_radius", "condition"])?;
    let mut lines = Vec::new();
    for (name, eig, cond) in [
        ("regularized", &rep.eigenvalues, rep.condition),
        ("unregularized", &rep.unregularized_eigenvalues, rep.unregularized_condition),
    ] {
        let mut t = Table::create(&out.join(format!("spectrum_{name}.csv")), &["re", "im", "abs"])?;
        for z in eig {
            t.row([num(z.re), num(z.im), num(z.norm())])?;
        }
        t.finish()?;
        let max_abs = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let radius = eig.iter().map(|z| (z - 1.0).norm()).fold(0.0, f64::max);
        summary.row([name.to_string(), eig.len().to_string(), num(max_abs), num(radius), num(cond)])?;
        lines.push(format!("{name}: max |λ| = {max_abs:.4e}, max |λ - 1| = {radius:.4e}, cond = {cond:.4e}"));
    }
    summary.finish()?;
    Ok(lines)
}

pub fn reference(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let pot = cfg.potential()?;
    let ph = oracle(cfg, &pot)?.ok_or_else(|| CliError::Config(format!("potential `{}` is not radially symmetric", pot.name())))?;
    let out = &cfg.out_dir;
    let mut t = Table::create(&out.join("phases.csv"), &["l", "re_a", "im_a", "abs_a", "beta"])?;
    for (l, (a, b)) in ph.phases.iter().zip(&ph.robin).enumerate() {
        t.row([l.to_string(), num(a.re), num(a.im), num(a.norm()), num(*b)])?;
    }
    t.finish()?;
    let mut lines = vec![format!(
        "kappa={} R={} L={}: max ||a_l| - 1| = {:.3e}",
        ph.kappa,
        ph.r_match,
        ph.l_max,
        ph.max_unit_deviation()
    )];
    let mut r = Table::create(&out.join("reference.csv"), &["direction", "x", "y", "re_u", "im_u", "tail"])?;
    for (d, &w) in cfg.directions.iter().enumerate() {
        let f = ph.reference_field(&cfg.probes, w)?;
        for (p, u) in cfg.probes.iter().zip(&f.values) {
            r.row([d.to_string(), num(p[0]), num(p[1]), num(u.re), num(u.im), num(f.tail)])?;
            lines.push(format!("  u_ref({}, {}) = {:.15} {:+.15}i", p[0], p[1], u.re, u.im));
        }
        lines.push(format!("  last retained term {:.2e}", f.tail));
    }
    r.finish()?;
    Ok(lines)
}

/// Timings at one tree depth.
#[derive(Clone, Copy, Debug)]
pub struct TimingRow {
    pub levels: usize,
    pub total_points: usize,
    pub boundary_nodes: usize,
    pub t_build: f64,
    pub t_bie: f64,
    pub t_solve: f64,
    pub t_apply: f64,
    /// Boundary solve plus downward sweep for a second direction.
    pub t_second: f64,
}

/// Least-squares slope of `log t` against `log n`.
pub fn fit_slope(n: &[f64], t: &[f64]) -> f64 {
    let x: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let k = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / k, y.iter().sum::<f64>() / k);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn timing_rows(cfg: &RunConfig) -> Result<Vec<TimingRow>, CliError> {
    let pot = cfg.potential()?;
    let w = cfg.directions[0];
    let w2 = cfg.directions.get(1).copied().unwrap_or([-w[1], w[0]]);
    let mut rows = Vec::new();
    for &m in &cfg.timing_levels {
        let scene = build(cfg, &pot, m, true)?;
        let a = scene.solve_direction(w)?;
        let b = scene.solve_direction(w2)?;
        rows.push(TimingRow {
            levels: m,
            total_points: scene.config.total_points(),
            boundary_nodes: scene.system.len(),
            t_build: scene.timings.sweep,
            t_bie: scene.timings.boundary,
            t_solve: a.solve_time,
            t_apply: a.apply_time,
            t_second: b.solve_time + b.apply_time,
        });
    }
    Ok(rows)
}

pub fn timing(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let rows = timing_rows(cfg)?;
    let mut t = Table::create(
        &cfg.out_dir.join("timing.csv"),
        &["levels", "N", "n", "t_build", "t_bie", "t_solve", "t_apply", "t_second_direction", "build_ratio", "n32_ratio"],
    )?;
    let mut lines = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let (ratio, n32) = if i == 0 {
            (String::new(), String::new())
        } else {
            let p = &rows[i - 1];
            (num(r.t_build / p.t_build), num((r.total_points as f64 / p.total_points as f64).powf(1.5)))
        };
        t.row([
            r.levels.to_string(),
            r.total_points.to_string(),
            r.boundary_nodes.to_string(),
            num(r.t_build),
            num(r.t_bie),
            num(r.t_solve),
            num(r.t_apply),
            num(r.t_second),
            ratio,
            n32,
        ])?;
        lines.push(format!(
            "M={} N={}: T_build {:.3}s T_bie {:.3}s T_solve {:.4}s T_apply {:.4}s second direction {:.4}s",
            r.levels, r.total_points, r.t_build, r.t_bie, r.t_solve, r.t_apply, r.t_second
        ));
    }
    t.finish()?;
    if rows.len() >= 2 {
        let n: Vec<f64> = rows.iter().map(|r| r.total_points as f64).collect();
        let sb = fit_slope(&n, &rows.iter().map(|r| r.t_build).collect::<Vec<_>>());
        let sa = fit_slope(&n, &rows.iter().map(|r| r.t_apply).collect::<Vec<_>>());
        let frac = rows.iter().map(|r| r.t_second / (r.t_build + r.t_bie)).fold(0.0, f64::max);
        let mut s = Table::create(&cfg.out_dir.join("timing_summary.csv"), &["build_slope", "apply_slope", "max_second_direction_fraction"])?;
        s.row([num(sb), num(sa), num(frac)])?;
        s.finish()?;
        lines.push(format!("fitted exponents vs N: build {sb:.3}, apply {sa:.3}; second direction costs at most {:.2}% of the build", 100.0 * frac));
    }
    Ok(lines)
}
