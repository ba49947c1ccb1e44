//! CSV and Markdown artifacts.
//!
//! Every CSV starts with a `# columns:` comment describing the columns and
//! units, followed by a header row. Floats are written with nine significant
//! digits in scientific notation.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use eompc_core::closed_loop::Sample;
use eompc_core::collocation::{lift_to_six_dof, MeshTrajectory};
use eompc_core::empc::heading_error;
use eompc_core::vehicle::axis_power;
use eompc_core::{ThrustCommand, VehicleParams, VehicleState};
use thiserror::Error;

use crate::config::Override;
use crate::harness::{Diagnostic, SummaryRow};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{} already exists; pass --force to overwrite", path.display())]
    Exists { path: PathBuf },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> OutputError + '_ {
    move |source| OutputError::Csv { path: path.to_path_buf(), source }
}

pub fn num(x: f64) -> String {
    format!("{x:.8e}")
}

/// How cumulative energy is accumulated between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    /// Each sample's power held until the next sample (closed loop, where
    /// commands are held).
    Hold,
    /// Trapezoid rule (collocation meshes).
    Trapezoid,
}

/// Creates the output directory. Without `force`, refuses when any of
/// `files` (relative to `dir`) already exists.
pub fn prepare_dir(dir: &Path, files: &[PathBuf], force: bool) -> Result<(), OutputError> {
    if !force {
        if let Some(f) = files.iter().map(|f| dir.join(f)).find(|f| f.exists()) {
            return Err(OutputError::Exists { path: f });
        }
    }
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Writes a table with a `# columns:` comment line.
fn write_table(
    path: &Path,
    description: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), OutputError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut buf = BufWriter::new(file);
    writeln!(buf, "# columns: {description}").map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// A numeric table read back from one of the CSV files.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Reads a numeric CSV written by this module (comment lines skipped).
pub fn read_table(path: &Path) -> Result<Table, OutputError> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).map_err(csv_err(path))?;
    let columns: Vec<String> = r.headers().map_err(csv_err(path))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|e| OutputError::Format { path: path.to_path_buf(), message: format!("`{f}`: {e}") })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

pub const TRAJECTORY_COLUMNS: [&str; 19] =
    ["t", "u", "v", "w", "p", "q", "r", "x", "y", "z", "phi", "theta", "psi", "T_l", "T_r", "T_f", "T_a", "power", "energy"];

/// Time, the 12 states, the four thrusts, total power and cumulative energy.
pub fn write_trajectory(path: &Path, samples: &[Sample], quadrature: Quadrature) -> Result<(), OutputError> {
    let mut energy = 0.0;
    let mut prev: Option<&Sample> = None;
    let rows = samples.iter().map(|s| {
        if let Some(a) = prev {
            let h = s.t - a.t;
            energy += match quadrature {
                Quadrature::Hold => a.power.total() * h,
                Quadrature::Trapezoid => 0.5 * (a.power.total() + s.power.total()) * h,
            };
        }
        prev = Some(s);
        let mut row = vec![num(s.t)];
        row.extend(s.state.to_array().iter().map(|x| num(*x)));
        row.extend(s.command.to_array().iter().map(|x| num(*x)));
        row.push(num(s.power.total()));
        row.push(num(energy));
        row
    });
    write_table(
        path,
        "t (s); u v w (m/s); p q r (rad/s); x y z (m); phi theta psi (rad); T_l T_r T_f T_a (N); power (W); energy (J, cumulative)",
        &TRAJECTORY_COLUMNS,
        rows.collect::<Vec<_>>(),
    )
}

/// File names written by [`write_plots`].
pub const PLOT_FILES: [&str; 4] = ["plot_xy.csv", "plot_thrust.csv", "plot_power.csv", "plot_velocity.csv"];

/// One CSV per figure family: planar path, thrusts with heading error,
/// per-axis power and body velocities.
pub fn write_plots(dir: &Path, samples: &[Sample]) -> Result<Vec<PathBuf>, OutputError> {
    let paths: Vec<PathBuf> = PLOT_FILES.iter().map(|f| dir.join(f)).collect();
    write_table(
        &paths[0],
        "t (s); x y (m); psi (rad)",
        &["t", "x", "y", "psi"],
        samples.iter().map(|s| vec![num(s.t), num(s.state.eta[0]), num(s.state.eta[1]), num(s.state.eta[5])]),
    )?;
    write_table(
        &paths[1],
        "t (s); T_l T_r T_f T_a (N); heading_error (rad)",
        &["t", "T_l", "T_r", "T_f", "T_a", "heading_error"],
        samples.iter().map(|s| {
            let c = s.command;
            vec![num(s.t), num(c.left), num(c.right), num(c.fore), num(c.aft), num(s.heading_error)]
        }),
    )?;
    write_table(
        &paths[2],
        "t (s); surge yaw heave pitch total (W)",
        &["t", "surge", "yaw", "heave", "pitch", "total"],
        samples.iter().map(|s| {
            let p = s.power;
            vec![num(s.t), num(p.surge), num(p.yaw), num(p.heave), num(p.pitch), num(p.total())]
        }),
    )?;
    write_table(
        &paths[3],
        "t (s); u v w (m/s); p q r (rad/s)",
        &["t", "u", "v", "w", "p", "q", "r"],
        samples.iter().map(|s| {
            let mut row = vec![num(s.t)];
            row.extend(s.state.nu.iter().map(|x| num(*x)));
            row
        }),
    )?;
    Ok(paths)
}

pub fn write_diagnostics(path: &Path, rows: &[Diagnostic]) -> Result<(), OutputError> {
    write_table(
        path,
        "t (s); heading_error (rad); solve_time (s, wall clock); converged (0/1); t_d (s); dynamic_cost static_cost terminal_cost stage_energy (J); EMPC-only columns are NaN for other controllers",
        &["t", "heading_error", "solve_time", "converged", "t_d", "dynamic_cost", "static_cost", "terminal_cost", "stage_energy"],
        rows.iter().map(|d| {
            vec![
                num(d.t),
                num(d.heading_error),
                num(d.solve_time),
                u8::from(d.converged).to_string(),
                num(d.t_d),
                num(d.dynamic_cost),
                num(d.static_cost),
                num(d.terminal_cost),
                num(d.stage_energy),
            ]
        }),
    )
}

/// Node-by-node samples of a collocation mesh (horizontal meshes are lifted
/// to level trim with the vertical pair holding the net buoyancy).
pub fn mesh_samples(params: &VehicleParams, mesh: &MeshTrajectory, goal: (f64, f64)) -> Vec<Sample> {
    let full = if mesh.states.first().is_some_and(|s| s.len() == 6) { lift_to_six_dof(params, mesh) } else { mesh.clone() };
    full.times()
        .into_iter()
        .zip(full.states.iter().zip(&full.controls))
        .map(|(t, (x, u))| {
            let mut a = [0.0; 12];
            a.copy_from_slice(&x[..12]);
            let state = VehicleState::from_array(&a);
            let command = ThrustCommand::from_array(u);
            Sample {
                t,
                state,
                command,
                power: axis_power(params, &command),
                heading_error: heading_error(&state.horizontal(), goal).unwrap_or(0.0),
            }
        })
        .collect()
}

pub const SUMMARY_COLUMNS: [&str; 15] = [
    "scenario",
    "method",
    "outcome",
    "reached",
    "travel_time_s",
    "energy_j",
    "reduction_vs_los_pct",
    "surge_pct",
    "yaw_pct",
    "heave_pct",
    "pitch_pct",
    "compute_time_s",
    "controller_steps",
    "unconverged_steps",
    "final_distance_m",
];

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<(), OutputError> {
    write_table(
        path,
        "scenario; method; outcome; reached (0/1); travel_time (s); energy (J); reduction_vs_los (%, empty without a LOS-MPC run); surge yaw heave pitch (% of energy); compute_time (s, wall clock); controller_steps; unconverged_steps; final_distance (m)",
        &SUMMARY_COLUMNS,
        rows.iter().map(|r| {
            vec![
                r.scenario.clone(),
                r.method.to_string(),
                r.outcome.clone(),
                u8::from(r.reached).to_string(),
                num(r.travel_time),
                num(r.energy),
                r.reduction_vs_los.map(num).unwrap_or_default(),
                num(r.shares.surge),
                num(r.shares.yaw),
                num(r.shares.heave),
                num(r.shares.pitch),
                num(r.compute_time),
                r.controller_steps.to_string(),
                r.unconverged_steps.to_string(),
                num(r.final_distance),
            ]
        }),
    )
}

/// Provenance echoed at the bottom of the Markdown summary.
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    pub config: Option<PathBuf>,
    pub overrides: Vec<Override>,
    pub failures: Vec<String>,
}

/// Markdown performance table (time, energy, CPU time per run),
/// followed by the energy breakdown.
pub fn summary_markdown(rows: &[SummaryRow], prov: &Provenance) -> String {
    let mut s = String::from("# Performance comparison\n\n");
    s.push_str("| Scenario | Method | Travel time (s) | Energy (J) | Energy vs LOS-MPC (%) | CPU time (s) | Outcome |\n");
    s.push_str("|---|---|---:|---:|---:|---:|---|\n");
    for r in rows {
        let red = r.reduction_vs_los.map_or_else(|| "n/a".to_string(), |x| format!("{x:.2}"));
        s.push_str(&format!(
            "| {} | {} | {:.2} | {:.2} | {} | {:.2} | {} |\n",
            r.scenario,
            r.method.label(),
            r.travel_time,
            r.energy,
            red,
            r.compute_time,
            r.outcome
        ));
    }
    s.push_str(
        "\n## Energy breakdown (%)\n\n| Scenario | Method | Surge | Yaw | Heave | Pitch |\n|---|---|---:|---:|---:|---:|\n",
    );
    for r in rows {
        let sh = r.shares;
        s.push_str(&format!(
            "| {} | {} | {:.2} | {:.2} | {:.2} | {:.2} |\n",
            r.scenario,
            r.method.label(),
            sh.surge,
            sh.yaw,
            sh.heave,
            sh.pitch
        ));
    }
    if !prov.failures.is_empty() {
        s.push_str("\n## Failed runs\n\n");
        for f in &prov.failures {
            s.push_str(&format!("- {f}\n"));
        }
    }
    s.push('\n');
    s.push_str(&provenance_markdown(prov));
    s
}

/// The `## Provenance` section: config file and overrides.
pub fn provenance_markdown(prov: &Provenance) -> String {
    let mut s = String::from("## Provenance\n\n");
    if let Some(c) = &prov.config {
        s.push_str(&format!("- config: `{}`\n", c.display()));
    }
    if prov.overrides.is_empty() {
        s.push_str("- overrides: none\n");
    } else {
        for o in &prov.overrides {
            s.push_str(&format!("- override: `{}`\n", o.raw));
        }
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), OutputError> {
    std::fs::write(path, text).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use eompc_core::vehicle::AxisPower;

    fn sample(t: f64, power: f64) -> Sample {
        Sample {
            t,
            state: VehicleState::default(),
            command: ThrustCommand::default(),
            power: AxisPower { surge: power, ..Default::default() },
            heading_error: 0.0,
        }
    }

    #[test]
    fn cumulative_energy_follows_the_quadrature() {
        let dir = tempfile::tempdir().unwrap();
        let s = [sample(0.0, 1.0), sample(1.0, 3.0), sample(3.0, 0.0)];
        let path = dir.path().join("t.csv");
        write_trajectory(&path, &s, Quadrature::Hold).unwrap();
        assert_eq!(read_table(&path).unwrap().column("energy").unwrap(), vec![0.0, 1.0, 7.0]);
        write_trajectory(&path, &s, Quadrature::Trapezoid).unwrap();
        assert_eq!(read_table(&path).unwrap().column("energy").unwrap(), vec![0.0, 2.0, 5.0]);
    }

    #[test]
    fn prepare_dir_refuses_to_clobber() {
        let dir = tempfile::tempdir().unwrap();
        let files = [PathBuf::from("a.csv")];
        prepare_dir(dir.path(), &files, false).unwrap();
        std::fs::write(dir.path().join("a.csv"), "x").unwrap();
        assert!(matches!(prepare_dir(dir.path(), &files, false), Err(OutputError::Exists { .. })));
        prepare_dir(dir.path(), &files, true).unwrap();
    }

    #[test]
    fn numbers_keep_nine_significant_digits() {
        assert_eq!(num(0.1), "1.00000000e-1");
        assert_eq!(num(-1234.5678912), "-1.23456789e3");
    }
}
