//! Closed-loop load-case simulation of the arm along a planned trajectory.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::controller::{control, feedforward_torque, ControllerGains};
use super::model::Robot;
use super::radau::{integrate, OdeSystem, RadauOptions, RadauStats};
use crate::beam::Curvature;
use crate::error::{Error, Result};
use crate::stress::{stresses_from_curvature, StressHistory};
use crate::trajectory::{JointSample, TrajectoryPlan};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    /// Observation time after the motion ends (s); default is twice the
    /// slowest elastic period at the place pose, at least [`MIN_SETTLE`].
    #[serde(default)]
    pub t_settle: Option<f64>,
    /// Output sampling rate (Hz).
    #[serde(default = "default_rate")]
    pub sample_rate: f64,
    #[serde(default = "default_max_step")]
    pub max_step: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

/// Lower bound of the default observation time (s).
pub const MIN_SETTLE: f64 = 0.1;

fn default_rtol() -> f64 {
    1e-6
}
fn default_atol() -> f64 {
    1e-9
}
fn default_rate() -> f64 {
    1000.0
}
fn default_max_step() -> f64 {
    0.01
}
fn default_max_steps() -> usize {
    2_000_000
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            rtol: default_rtol(),
            atol: default_atol(),
            t_settle: None,
            sample_rate: default_rate(),
            max_step: default_max_step(),
            max_steps: default_max_steps(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !(pos(self.rtol) && pos(self.atol) && pos(self.sample_rate) && pos(self.max_step)) {
            return Err(Error::invalid("tolerances, sample rate and max step must be positive"));
        }
        if let Some(ts) = self.t_settle {
            if !(ts >= 0.0 && ts.is_finite()) {
                return Err(Error::invalid("settling time must be non-negative"));
            }
        }
        Ok(())
    }

    fn radau(&self) -> RadauOptions {
        RadauOptions { rtol: self.rtol, atol: self.atol, max_step: self.max_step, max_steps: self.max_steps, ..RadauOptions::default() }
    }
}

/// Sampled closed-loop response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub time: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub qd: Vec<Vec<f64>>,
    /// Curvature at the critical station of link 1 and link 2.
    pub curvature: [Vec<Curvature>; 2],
    /// End-effector deviation due to link elasticity (m).
    pub tool_deviation: Vec<[f64; 3]>,
    pub motor_torque: Vec<[f64; 3]>,
    pub t_task: f64,
    pub t_settle: f64,
    pub stats: RadauStats,
}

impl SimulationResult {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Stress history at the material point of `link`.
    pub fn stress_history(&self, robot: &Robot, link: usize) -> Result<StressHistory> {
        stresses_from_curvature(&self.time, &self.curvature[link], robot.material_point(link), &robot.design().material)
    }

    /// Largest end-effector deviation over samples with `t0 <= t <= t1`.
    pub fn max_deviation(&self, t0: f64, t1: f64) -> Result<f64> {
        let tol = 1e-9;
        let mut it = self
            .time
            .iter()
            .zip(&self.tool_deviation)
            .filter(|(&t, _)| t >= t0 - tol && t <= t1 + tol)
            .map(|(_, d)| (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt())
            .peekable();
        if it.peek().is_none() {
            return Err(Error::invalid(format!("no samples in window [{t0}, {t1}]")));
        }
        Ok(it.fold(0.0, f64::max))
    }
}

/// Closed-loop system with state `(q, q̇, z)`.
struct ClosedLoop<'a> {
    robot: &'a Robot,
    plan: Option<&'a TrajectoryPlan>,
    gains: &'a ControllerGains,
    /// Last feedforward evaluation, reused across the Jacobian columns.
    cached: Option<(f64, JointSample, [f64; 3])>,
}

impl ClosedLoop<'_> {
    fn reference(&mut self, t: f64) -> (JointSample, [f64; 3]) {
        if let Some((tc, s, ff)) = &self.cached {
            if *tc == t {
                return (s.clone(), *ff);
            }
        }
        let plan = self.plan.expect("reference requested without a plan");
        let s = plan.sample(t);
        let ff = if self.gains.feedforward { feedforward_torque(self.robot, &s) } else { [0.0; 3] };
        self.cached = Some((t, s.clone(), ff));
        (s, ff)
    }

    fn torque(&mut self, t: f64, q: &[f64], qd: &[f64], z: &[f64]) -> ([f64; 3], [f64; 3]) {
        if self.plan.is_none() {
            return ([0.0; 3], [0.0; 3]);
        }
        let (s, ff) = self.reference(t);
        let out = control(self.robot, self.gains, &q[..3], &qd[..3], z, &s, ff);
        (out.torque, out.integrator_rate)
    }
}

fn accelerations(robot: &Robot, q: &[f64], qd: &[f64], torque: &[f64; 3], t: f64) -> Result<DVector<f64>> {
    let eom = robot.eom(q, qd)?;
    let mut rhs = -(eom.velocity_forces + eom.potential_forces + robot.damping_forces(qd)?);
    for i in 0..3 {
        rhs[i] += torque[i];
    }
    let chol = eom.mass.cholesky().ok_or(Error::SingularMassMatrix)?;
    let a = chol.solve(&rhs);
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Integration { t, reason: "non-finite acceleration".into() });
    }
    Ok(a)
}

impl OdeSystem for ClosedLoop<'_> {
    fn dim(&self) -> usize {
        2 * self.robot.dof() + 3
    }

    fn rhs(&mut self, t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) -> Result<()> {
        let n = self.robot.dof();
        let (q, rest) = y.as_slice().split_at(n);
        let (qd, z) = rest.split_at(n);
        let (torque, zdot) = self.torque(t, q, qd, z);
        let a = accelerations(self.robot, q, qd, &torque, t)?;
        dy.rows_mut(0, n).copy_from_slice(qd);
        dy.rows_mut(n, n).copy_from(&a);
        dy.rows_mut(2 * n, 3).copy_from_slice(&zdot);
        Ok(())
    }
}

/// Uniform grid `k / rate` covering `[0, t_end]`.
pub fn sample_grid(t_end: f64, rate: f64) -> Vec<f64> {
    let n = (t_end * rate + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 / rate).collect()
}

/// Rest state holding `q_link` under gravity: motors at the commanded
/// angles, links and beams in static equilibrium, integrators preloaded
/// with the holding torque.
pub fn initial_state(robot: &Robot, gains: &ControllerGains, q_link: &[f64]) -> Result<DVector<f64>> {
    let n = robot.dof();
    let drives = &robot.design().drives;
    let q_m: [f64; 3] = std::array::from_fn(|i| drives[i].gear_ratio * q_link[i]);
    let q = robot.static_equilibrium(&q_m)?;
    let zero = vec![0.0; n];
    let hold = robot.eom(&q, &zero)?.potential_forces;
    let rest = JointSample { q: q_link.to_vec(), qd: vec![0.0; 3], qdd: vec![0.0; 3] };
    let ff = if gains.feedforward { feedforward_torque(robot, &rest) } else { [0.0; 3] };
    let mut y = DVector::zeros(2 * n + 3);
    y.rows_mut(0, n).copy_from_slice(&q);
    for i in 0..3 {
        if gains.ki_vel[i] > 0.0 {
            y[2 * n + i] = (hold[i] - ff[i]) / gains.ki_vel[i];
        }
    }
    Ok(y)
}

/// Simulates the closed loop along `plan` from rest at the pick pose over
/// `[0, t_task + t_settle]`.
pub fn simulate(robot: &Robot, plan: &TrajectoryPlan, gains: &ControllerGains, cfg: &SimConfig) -> Result<SimulationResult> {
    cfg.validate()?;
    gains.validate()?;
    if plan.dof() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: plan.dof() });
    }
    let n = robot.dof();
    let t_task = plan.duration();
    let t_settle = match cfg.t_settle {
        Some(t) => t,
        None => {
            let mut q = vec![0.0; n];
            q[3..6].copy_from_slice(plan.q_place());
            (2.0 * robot.slowest_period(&q)?).max(MIN_SETTLE)
        }
    };
    let t_end = t_task + t_settle;
    let y0 = initial_state(robot, gains, plan.q_pick())?;
    let grid = sample_grid(t_end, cfg.sample_rate);
    let mut sys = ClosedLoop { robot, plan: Some(plan), gains, cached: None };
    let (states, stats) = integrate(&mut sys, 0.0, y0, t_end, &grid, &cfg.radau())?;

    let mut out = SimulationResult {
        time: grid.clone(),
        q: Vec::with_capacity(grid.len()),
        qd: Vec::with_capacity(grid.len()),
        curvature: [Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len())],
        tool_deviation: Vec::with_capacity(grid.len()),
        motor_torque: Vec::with_capacity(grid.len()),
        t_task,
        t_settle,
        stats,
    };
    for (&t, y) in grid.iter().zip(&states) {
        let (q, rest) = y.as_slice().split_at(n);
        let (qd, z) = rest.split_at(n);
        let (torque, _) = sys.torque(t, q, qd, z);
        let dev = robot.tool_deviation(q)?;
        if dev.iter().any(|x| !x.is_finite()) {
            return Err(Error::Integration { t, reason: "non-finite end-effector deviation".into() });
        }
        out.curvature[0].push(robot.curvature(0, q)?);
        out.curvature[1].push(robot.curvature(1, q)?);
        out.tool_deviation.push(dev);
        out.motor_torque.push(torque);
        out.q.push(q.to_vec());
        out.qd.push(qd.to_vec());
    }
    Ok(out)
}

/// Uncontrolled motion (zero motor torque) from `(q0, qd0)`, sampled at `times`.
pub fn simulate_free(
    robot: &Robot,
    q0: &[f64],
    qd0: &[f64],
    times: &[f64],
    cfg: &SimConfig,
) -> Result<(Vec<(Vec<f64>, Vec<f64>)>, RadauStats)> {
    cfg.validate()?;
    let n = robot.dof();
    if q0.len() != n || qd0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: q0.len().min(qd0.len()) });
    }
    let t_end = times.last().copied().unwrap_or(0.0);
    let gains = ControllerGains::demo();
    let mut sys = ClosedLoop { robot, plan: None, gains: &gains, cached: None };
    let mut y0 = DVector::zeros(2 * n + 3);
    y0.rows_mut(0, n).copy_from_slice(q0);
    y0.rows_mut(n, n).copy_from_slice(qd0);
    let (states, stats) = integrate(&mut sys, 0.0, y0, t_end, times, &cfg.radau())?;
    let states = states.iter().map(|y| (y.as_slice()[..n].to_vec(), y.as_slice()[n..2 * n].to_vec())).collect();
    Ok((states, stats))
}
