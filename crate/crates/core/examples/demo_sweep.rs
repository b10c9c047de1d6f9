//! Runs the demo wall-thickness sweep and prints one line per candidate.

use flexlife::config::RunConfig;
use flexlife::design::{run_sweep, Study};

fn main() -> flexlife::Result<()> {
    let cfg = RunConfig::demo();
    let plan = cfg.trajectory.plan()?;
    let study = Study {
        base: &cfg.robot,
        plan: &plan,
        gains: &cfg.controller,
        sim: &cfg.simulation,
        material: &cfg.fatigue.material,
        fatigue: &cfg.fatigue.settings,
    };
    let out = run_sweep(&cfg.sweep.grid, &study, &cfg.sweep.options())?;
    let front = out.front.as_ref().map(|f| f.configs.clone()).unwrap_or_default();
    println!("config  t1/t2 (mm)   J_m (%)   J_vib (mm)   lifetime (h)");
    for c in &out.candidates {
        let life = match c.fatigue {
            Some(f) if f.finite_life() => format!("{:.1}", f.lifetime_hours()),
            Some(_) => "inf".to_string(),
            None => "-".to_string(),
        };
        let mark = if front.contains(&c.config) { "*" } else { " " };
        println!(
            "{:>5}{mark}  {:>4.0}/{:<4.0}  {:>9.3}  {:>10.3}  {:>12}",
            c.config,
            c.t1 * 1e3,
            c.t2 * 1e3,
            100.0 * c.j_m,
            c.j_vib.map_or(f64::NAN, |v| v * 1e3),
            life
        );
    }
    println!("Pareto front: {front:?}");
    Ok(())
}
