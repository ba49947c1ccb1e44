//! The CLI subcommands as library functions.

use std::path::{Path, PathBuf};

use eompc_core::collocation::{axis_energy, solve_horizontal, solve_six_dof, HorizontalOcp};
use eompc_core::cruise::{optimal_cruise_speed, transport_cost};
use eompc_core::vehicle::buoyancy_holding_power;

use crate::config::{ConfigError, LoadedConfig, Method, SuiteConfig};
use crate::harness::{preflight, run_suite, summarize, Shares, SuiteRow};
use crate::output::{
    mesh_samples, prepare_dir, provenance_markdown, summary_markdown, write_diagnostics, write_plots, write_summary_csv,
    write_text, write_trajectory, Provenance, Quadrature, PLOT_FILES,
};
use crate::Error;

fn run_files(scenario: &str, method: Method) -> Vec<PathBuf> {
    let dir = Path::new(scenario).join(method.as_str());
    let mut f = vec![dir.join("trajectory.csv"), dir.join("diagnostics.csv")];
    f.extend(PLOT_FILES.iter().map(|p| dir.join(p)));
    f
}

/// What a suite run wrote and how it went.
#[derive(Debug)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
    pub markdown: String,
}

impl SuiteReport {
    /// Runs that could not start or whose controller or model failed.
    pub fn failures(&self) -> Vec<String> {
        self.rows
            .iter()
            .filter_map(|r| match &r.result {
                Err(e) => Some(e.to_string()),
                Ok(res) if res.failed() => Some(format!("scenario `{}`, {}: {:?}", r.scenario, r.method, res.sim.outcome)),
                Ok(_) => None,
            })
            .collect()
    }
}

/// Runs every scenario of `loaded` and writes the summary and per-run files
/// under `out`.
pub fn suite(loaded: &LoadedConfig, out: &Path, jobs: Option<usize>, force: bool) -> Result<SuiteReport, Error> {
    let cfg = &loaded.config;
    let mut files = vec![PathBuf::from("summary.csv"), PathBuf::from("summary.md")];
    for sc in &cfg.scenarios {
        for m in &sc.methods {
            files.extend(run_files(&sc.id, *m));
        }
    }
    check(cfg)?;
    prepare_dir(out, &files, force)?;

    let rows = run_suite(cfg, jobs);
    for r in &rows {
        if let Ok(res) = &r.result {
            let dir = out.join(&r.scenario).join(r.method.as_str());
            write_trajectory(&dir.join("trajectory.csv"), &res.sim.trajectory.samples, Quadrature::Hold)?;
            write_diagnostics(&dir.join("diagnostics.csv"), &res.diagnostics)?;
            write_plots(&dir, &res.sim.trajectory.samples)?;
        }
    }
    let table = summarize(&rows);
    write_summary_csv(&out.join("summary.csv"), &table)?;
    let mut report = SuiteReport { rows, markdown: String::new() };
    let prov =
        Provenance { config: Some(loaded.source.clone()), overrides: loaded.overrides.clone(), failures: report.failures() };
    report.markdown = summary_markdown(&table, &prov);
    write_text(&out.join("summary.md"), &report.markdown)?;
    Ok(report)
}

/// Narrows the suite to one scenario (required when there are several) and
/// optionally to a subset of its methods.
pub fn select(loaded: &LoadedConfig, scenario: Option<&str>, methods: &[Method]) -> Result<LoadedConfig, Error> {
    let cfg = &loaded.config;
    let sc = match scenario {
        Some(id) => cfg.scenario(id).ok_or_else(|| ConfigError::Invalid {
            key: "--scenario".into(),
            message: format!("no scenario `{id}` in {}", loaded.source.display()),
        })?,
        None if cfg.scenarios.len() == 1 => &cfg.scenarios[0],
        None => {
            return Err(ConfigError::Invalid {
                key: "--scenario".into(),
                message: format!("{} scenarios defined; pick one", cfg.scenarios.len()),
            }
            .into())
        }
    };
    let mut sc = sc.clone();
    if !methods.is_empty() {
        sc.methods = methods.to_vec();
    }
    let mut narrowed = loaded.clone();
    narrowed.config = SuiteConfig { scenarios: vec![sc], ..cfg.clone() };
    Ok(narrowed)
}

/// Result of a standalone collocation solve.
#[derive(Debug, Clone)]
pub struct DcReport {
    pub energy: f64,
    pub duration: f64,
    pub solve_time: f64,
    pub shares: Shares,
    /// Full 6-DOF solve, when requested.
    pub full: Option<(f64, Shares)>,
    pub markdown: String,
}

/// Solves the horizontal energy-optimal transfer for one scenario (terminal
/// disc = arrival radius) and optionally the full 6-DOF problem seeded with
/// it. Plot files come from the most detailed solution.
pub fn dc_solve(loaded: &LoadedConfig, scenario: Option<&str>, full: bool, out: &Path, force: bool) -> Result<DcReport, Error> {
    let narrowed = select(loaded, scenario, &[])?;
    let cfg = &narrowed.config;
    let sc = &cfg.scenarios[0];
    let mut files = vec![PathBuf::from("trajectory.csv"), PathBuf::from("summary.md")];
    files.extend(PLOT_FILES.iter().map(PathBuf::from));
    prepare_dir(out, &files, force)?;

    let p = cfg.params();
    let dc = &cfg.controllers.dc;
    let goal = (sc.goal[0], sc.goal[1]);
    let ocp = HorizontalOcp {
        params: p,
        start: cfg.initial_state(sc),
        goal,
        radius: sc.arrival_radius,
        intervals: dc.intervals,
        cruise_speed: cfg.cruise_speed(),
        time_bounds: None,
    };
    let fail = |e: eompc_core::collocation::OcpError| Error::Failed(format!("scenario `{}`: collocation failed: {e}", sc.id));
    let sol = solve_horizontal(&ocp, &dc.solver_options()).map_err(fail)?;
    let shares = Shares::of(&axis_energy(&p, &sol.best.mesh));
    let mut mesh = sol.best.mesh.clone();
    let mut full_result = None;
    if full {
        let ocp6 = HorizontalOcp { intervals: dc.full_model_intervals, ..ocp.clone() };
        let guess = sol.best.mesh.resample(dc.full_model_intervals);
        let s6 = solve_six_dof(&ocp6, &guess, &dc.solver_options()).map_err(fail)?;
        let axes = axis_energy(&p, &s6.mesh);
        full_result = Some((axes.total(), Shares::of(&axes)));
        mesh = s6.mesh;
    }
    let samples = mesh_samples(&p, &mesh, goal);
    write_trajectory(&out.join("trajectory.csv"), &samples, Quadrature::Trapezoid)?;
    write_plots(out, &samples)?;

    let mut md = format!("# Direct collocation: scenario `{}`\n\n", sc.id);
    md.push_str("| Model | Intervals | Energy (J) | Travel time (s) | Surge (%) | Yaw (%) | Heave (%) | Pitch (%) |\n");
    md.push_str("|---|---:|---:|---:|---:|---:|---:|---:|\n");
    let line = |name: &str, n: usize, e: f64, t: f64, s: &Shares| {
        format!("| {name} | {n} | {e:.3} | {t:.2} | {:.2} | {:.2} | {:.2} | {:.2} |\n", s.surge, s.yaw, s.heave, s.pitch)
    };
    let energy = sol.exact_energy(&p);
    md.push_str(&line("horizontal", dc.intervals, energy, sol.duration(), &shares));
    if let Some((e, s)) = &full_result {
        md.push_str(&line("6-DOF", dc.full_model_intervals, *e, mesh.final_time, s));
    }
    md.push_str(&format!("\nHorizontal solve time: {:.2} s.\n", sol.solve_time));
    let prov = Provenance { config: Some(loaded.source.clone()), overrides: loaded.overrides.clone(), failures: vec![] };
    md.push('\n');
    md.push_str(&provenance_markdown(&prov));
    write_text(&out.join("summary.md"), &md)?;
    Ok(DcReport { energy, duration: sol.duration(), solve_time: sol.solve_time, shares, full: full_result, markdown: md })
}

/// Energy-optimal cruise speed and the transport cost there.
pub fn cruise_speed(cfg: &SuiteConfig) -> String {
    let p = cfg.params();
    let u = optimal_cruise_speed(&p);
    format!(
        "optimal cruise speed: {u:.6} m/s\ntransport cost: {:.6} J/m\nbuoyancy-holding power: {:.6} W\n",
        transport_cost(&p, u),
        buoyancy_holding_power(&p)
    )
}

/// Builds every controller of the suite without running anything.
pub fn check(cfg: &SuiteConfig) -> Result<(), Error> {
    for sc in &cfg.scenarios {
        for m in &sc.methods {
            preflight(cfg, sc, *m)?;
        }
    }
    Ok(())
}

/// Full validation, as done before a suite run; returns a one-line
/// description.
pub fn validate(loaded: &LoadedConfig) -> Result<String, Error> {
    let cfg = &loaded.config;
    check(cfg)?;
    let runs: usize = cfg.scenarios.iter().map(|s| s.methods.len()).sum();
    Ok(format!("{}: valid, {} scenario(s), {runs} run(s)", loaded.source.display(), cfg.scenarios.len()))
}
