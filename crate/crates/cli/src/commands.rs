//! Pipeline commands. Every command reads its inputs, computes, and writes
//! all result files at the end.

use std::path::{Path, PathBuf};

use flexlife::config::RunConfig;
use flexlife::design::{pareto_front, run_sweep, CriteriaPoint, ParetoFront, Study, SweepOutcome};
use flexlife::dynamics::{simulate, Robot};
use flexlife::fatigue::{critical_plane_lifetime, DamageReport, FatigueMaterial, FatigueSettings};
use flexlife::rainflow::{bin_cycles, count_cycles_with, extract_extrema, total_weight};
use flexlife::stress::{tresca_history, StressHistory};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::{num, opt_num, output_path, read_config, read_json, write_csv, write_json, Table};

fn out_dir(flag: Option<&Path>, cfg: Option<&RunConfig>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.and_then(|c| c.output_dir.as_ref().map(PathBuf::from)))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[derive(Serialize)]
struct SimulationSummary {
    t_task: f64,
    t_settle: f64,
    samples: usize,
    j_vib: f64,
    max_abs_sigma_xx: [f64; 2],
    accepted_steps: usize,
    rejected_steps: usize,
}

/// Writes `history.csv`, `stress_link1.csv`, `stress_link2.csv` and `summary.json`.
pub fn simulate_cmd(config: &Path, out: Option<&Path>) -> CliResult<()> {
    let cfg = read_config(config)?;
    let dir = out_dir(out, Some(&cfg));
    let robot = Robot::new(&cfg.robot)?;
    let plan = cfg.trajectory.plan()?;
    let r = simulate(&robot, &plan, &cfg.controller, &cfg.simulation)?;
    if r.t_task == 0.0 {
        eprintln!("note: pick and place poses coincide, t_task = 0, settling-only run");
    }

    let ne = [robot.n_elastic(0), robot.n_elastic(1)];
    let mut header = strings(&["t", "qM1", "qM2", "qM3", "qL1", "qL2", "qL3"]);
    for (link, &n) in ne.iter().enumerate() {
        header.extend((1..=n).map(|k| format!("qe{}_{k}", link + 1)));
    }
    for link in 1..=2 {
        header.extend(["v", "w", "twist"].iter().map(|c| format!("kappa{link}_{c}")));
    }
    header.extend(strings(&["drEE_x", "drEE_y", "drEE_z"]));
    let rows = (0..r.len()).map(|k| {
        let mut row = vec![num(r.time[k])];
        row.extend(r.q[k].iter().map(|&x| num(x)));
        for link in 0..2 {
            let c = r.curvature[link][k];
            row.extend([num(c.v), num(c.w), num(c.twist)]);
        }
        row.extend(r.tool_deviation[k].iter().map(|&x| num(x)));
        row
    });
    write_csv(&output_path(&dir, "history.csv")?, &header, rows)?;

    let mut peaks = [0.0; 2];
    for link in 0..2 {
        let h = r.stress_history(&robot, link)?;
        peaks[link] = h.max_abs_sigma_xx();
        write_stress(&output_path(&dir, &format!("stress_link{}.csv", link + 1))?, &h)?;
    }
    let summary = SimulationSummary {
        t_task: r.t_task,
        t_settle: r.t_settle,
        samples: r.len(),
        j_vib: flexlife::design::vibration_criterion(&r, None)?,
        max_abs_sigma_xx: peaks,
        accepted_steps: r.stats.accepted,
        rejected_steps: r.stats.rejected,
    };
    write_json(&output_path(&dir, "summary.json")?, &summary)
}

fn write_stress(path: &Path, h: &StressHistory) -> CliResult<()> {
    let rows = (0..h.len()).map(|k| vec![num(h.time[k]), num(h.sigma_xx[k]), num(h.sigma_xy[k])]);
    write_csv(path, &strings(&["t", "sigma_xx", "sigma_xy"]), rows)
}

fn fatigue_settings(config: Option<&Path>) -> CliResult<FatigueSettings> {
    match config {
        Some(p) => Ok(read_config(p)?.fatigue.settings),
        None => Ok(FatigueSettings::default()),
    }
}

#[derive(Serialize)]
struct FatigueOutput {
    #[serde(flatten)]
    report: DamageReport,
    /// Counted cycle weight on the critical plane.
    critical_plane_cycles: f64,
}

/// Writes `damage_report.json` for a `t,sigma_xx,sigma_xy` stress file.
pub fn fatigue_cmd(
    stress: &Path,
    material: &Path,
    t_task: Option<f64>,
    config: Option<&Path>,
    out: Option<&Path>,
) -> CliResult<()> {
    let table = Table::read(stress)?;
    table.expect_header(&["t", "sigma_xx", "sigma_xy"])?;
    let history = StressHistory::new(table.column("t")?, table.column("sigma_xx")?, table.column("sigma_xy")?)?;
    let mat: FatigueMaterial = read_json(material)?;
    let mat = mat.normalized().map_err(|e| CliError::input(format!("{}: {e}", material.display())))?;
    let settings = fatigue_settings(config)?;
    let span = history.time[history.len() - 1] - history.time[0];
    let t_task = t_task.unwrap_or(span);
    let report = critical_plane_lifetime(&history, &settings.angles(), &mat, t_task, &settings)?;
    let series = extract_extrema(&history.time, &tresca_history(&history, report.critical_angle), settings.hysteresis_gate)?;
    let cycles = count_cycles_with(&series, settings.half_cycles)?;
    let output = FatigueOutput { critical_plane_cycles: total_weight(&cycles), report };
    let dir = out_dir(out, None);
    write_json(&output_path(&dir, "damage_report.json")?, &output)
}

/// Writes `rainflow_matrix.csv` and `cycles.csv` for a `t,sigma` file.
pub fn rainflow_cmd(input: &Path, config: Option<&Path>, out: Option<&Path>) -> CliResult<()> {
    let table = Table::read(input)?;
    table.expect_header(&["t", "sigma"])?;
    let settings = fatigue_settings(config)?;
    let series = extract_extrema(&table.column("t")?, &table.column("sigma")?, settings.hysteresis_gate)?;
    let cycles = count_cycles_with(&series, settings.half_cycles)?;
    let matrix = bin_cycles(&cycles, &settings.binning)?;
    let dir = out_dir(out, None);
    let rows = matrix.bins().into_iter().map(|b| vec![num(b.mean), num(b.amplitude), num(b.count)]);
    write_csv(&output_path(&dir, "rainflow_matrix.csv")?, &strings(&["sigma_m_center", "sigma_a_center", "count"]), rows)?;
    let rows = cycles.iter().map(|c| vec![num(c.mean), num(c.amplitude), num(c.weight)]);
    write_csv(&output_path(&dir, "cycles.csv")?, &strings(&["sigma_m", "sigma_a", "weight"]), rows)
}

#[derive(Serialize)]
struct PointOut {
    config: usize,
    #[serde(rename = "Jm_percent")]
    jm_percent: f64,
    #[serde(rename = "Jvib_m")]
    jvib_m: f64,
}

#[derive(Serialize)]
struct Failure {
    config: usize,
    error: String,
}

#[derive(Serialize)]
struct ParetoJson {
    front: Vec<usize>,
    points: Vec<PointOut>,
    partial: bool,
    failures: Vec<Failure>,
}

fn write_front(dir: &Path, all: &[CriteriaPoint], front: &ParetoFront, failures: Vec<Failure>) -> CliResult<()> {
    let json = ParetoJson {
        front: front.configs.clone(),
        points: front.points.iter().map(|p| PointOut { config: p.config, jm_percent: 100.0 * p.j_m, jvib_m: p.j_vib }).collect(),
        partial: !failures.is_empty(),
        failures,
    };
    write_json(&output_path(dir, "pareto.json")?, &json)?;
    let rows = all.iter().map(|p| {
        vec![p.config.to_string(), num(100.0 * p.j_m), num(p.j_vib), u8::from(front.contains(p.config)).to_string()]
    });
    write_csv(&output_path(dir, "pareto_points.csv")?, &strings(&["config", "Jm_percent", "Jvib_m", "on_front"]), rows)
}

/// Full design study; writes `sweep_results.csv`, `pareto.json`,
/// `pareto_points.csv` and `lifetime_points.csv`.
pub fn sweep_cmd(config: &Path, out: Option<&Path>, only_pareto_fatigue: bool, plot_cap_hours: f64) -> CliResult<()> {
    if !(plot_cap_hours > 0.0) {
        return Err(CliError::input("--plot-cap-hours must be positive"));
    }
    let cfg = read_config(config)?;
    let dir = out_dir(out, Some(&cfg));
    let plan = cfg.trajectory.plan()?;
    let study = Study {
        base: &cfg.robot,
        plan: &plan,
        gains: &cfg.controller,
        sim: &cfg.simulation,
        material: &cfg.fatigue.material,
        fatigue: &cfg.fatigue.settings,
    };
    let mut options = cfg.sweep.options();
    options.only_pareto_fatigue |= only_pareto_fatigue;
    let outcome = run_sweep(&cfg.sweep.grid, &study, &options)?;
    write_sweep(&dir, &outcome, plot_cap_hours)?;
    let failed = outcome.candidates.iter().filter(|c| c.error.is_some()).count();
    for c in outcome.candidates.iter().filter(|c| c.error.is_some()) {
        eprintln!("config {}: {}", c.config, c.error.as_deref().unwrap_or_default());
    }
    if failed == outcome.candidates.len() {
        return Err(CliError::Numerical("every candidate failed".into()));
    }
    Ok(())
}

fn write_sweep(dir: &Path, outcome: &SweepOutcome, cap: f64) -> CliResult<()> {
    let header = strings(&["config", "t1_mm", "t2_mm", "Jm_percent", "Jvib_m", "Dmax", "lifetime_h"]);
    let rows = outcome.candidates.iter().map(|c| {
        vec![
            c.config.to_string(),
            num(c.t1 * 1e3),
            num(c.t2 * 1e3),
            num(100.0 * c.j_m),
            opt_num(c.j_vib),
            opt_num(c.fatigue.map(|f| f.d_max)),
            opt_num(c.fatigue.map(|f| f.lifetime_hours())),
        ]
    });
    write_csv(&output_path(dir, "sweep_results.csv")?, &header, rows)?;

    let points: Vec<CriteriaPoint> = outcome.candidates.iter().filter_map(|c| c.point()).collect();
    let failures: Vec<Failure> = outcome
        .candidates
        .iter()
        .filter_map(|c| c.error.as_ref().map(|e| Failure { config: c.config, error: e.clone() }))
        .collect();
    if let Some(front) = &outcome.front {
        write_front(dir, &points, front, failures)?;
    }

    let rows = outcome.candidates.iter().filter_map(|c| c.fatigue.map(|f| (c.config, f))).map(|(config, f)| {
        vec![config.to_string(), num(f.lifetime_hours().min(cap)), u8::from(f.finite_life()).to_string()]
    });
    write_csv(&output_path(dir, "lifetime_points.csv")?, &strings(&["config", "lifetime_h_plot", "finite_life"]), rows)
}

/// Pareto front of a criteria table with columns `config`, `Jm_percent`,
/// `Jvib_m`; rows with an empty criterion are skipped.
pub fn pareto_cmd(input: &Path, out: Option<&Path>) -> CliResult<()> {
    let table = Table::read(input)?;
    let (kc, km, kv) = (table.column_index("config")?, table.column_index("Jm_percent")?, table.column_index("Jvib_m")?);
    let mut points = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        let cell = |k: usize| row.get(k).copied().flatten();
        let config = cell(kc).ok_or_else(|| CliError::input(format!("{}: line {}: missing config", input.display(), r + 2)))?;
        if !(config >= 1.0 && config.fract() == 0.0) {
            return Err(CliError::input(format!("{}: line {}: config must be a positive integer", input.display(), r + 2)));
        }
        if let (Some(jm), Some(jv)) = (cell(km), cell(kv)) {
            points.push(CriteriaPoint { config: config as usize, j_m: jm / 100.0, j_vib: jv });
        }
    }
    let front = pareto_front(&points)?;
    write_front(&out_dir(out, None), &points, &front, Vec::new())
}
