//! Rest-to-rest joint trajectories with trapezoidal acceleration
//! (seven-segment constant-jerk) profiles.
//!
//! Every joint is planned at its own limits; afterwards all joints are
//! stretched in time to the duration of the slowest one so that they start
//! and stop together.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Displacements below this are treated as no motion.
pub const ZERO_MOVE: f64 = 1e-12;

/// Kinematic limits of one joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointLimits {
    /// Velocity limit (rad/s).
    pub v_max: f64,
    /// Acceleration limit (rad/s^2).
    pub a_max: f64,
    /// Jerk limit (rad/s^3).
    pub j_max: f64,
}

impl JointLimits {
    pub fn new(v_max: f64, a_max: f64, j_max: f64) -> Result<Self> {
        let l = Self { v_max, a_max, j_max };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("v_max", self.v_max), ("a_max", self.a_max), ("j_max", self.j_max)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("joint limit {name} = {v} must be positive and finite")));
            }
        }
        Ok(())
    }
}

/// Timing of a symmetric seven-segment profile over a positive distance.
///
/// Phases: jerk up `tj`, constant acceleration, jerk down `tj` (together
/// `ta`), cruise `tv`, then the mirror image for deceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SCurve {
    distance: f64,
    jerk: f64,
    tj: f64,
    ta: f64,
    tv: f64,
}

impl SCurve {
    fn plan(distance: f64, lim: &JointLimits) -> Self {
        let (v, a, j) = (lim.v_max, lim.a_max, lim.j_max);
        // acceleration phase duration needed to reach velocity `vp` from rest
        let accel_time = |vp: f64| -> (f64, f64) {
            if vp * j >= a * a {
                (a / j, a / j + vp / a)
            } else {
                let tj = (vp / j).sqrt();
                (tj, 2.0 * tj)
            }
        };
        let (tj, ta) = accel_time(v);
        let tv = distance / v - ta;
        if tv >= 0.0 {
            return Self { distance, jerk: j, tj, ta, tv };
        }
        // peak velocity not reached: solve distance = vp * ta(vp)
        let vp_sat = 0.5 * (-a * a / j + ((a * a / j).powi(2) + 4.0 * distance * a).sqrt());
        let vp = if vp_sat * j >= a * a {
            vp_sat
        } else {
            (distance * j.sqrt() / 2.0).powf(2.0 / 3.0)
        };
        let (tj, ta) = accel_time(vp);
        Self { distance, jerk: j, tj, ta, tv: 0.0 }
    }

    fn duration(&self) -> f64 {
        2.0 * self.ta + self.tv
    }

    /// State during the acceleration half, `t` in `[0, ta]`.
    fn accel_state(&self, t: f64) -> (f64, f64, f64) {
        let j = self.jerk;
        let tj = self.tj;
        if t <= tj {
            return (j * t.powi(3) / 6.0, j * t * t / 2.0, j * t);
        }
        let ap = j * tj;
        let t2 = self.ta - tj;
        // end of jerk-up phase
        let (p1, v1) = (j * tj.powi(3) / 6.0, j * tj * tj / 2.0);
        if t <= t2 {
            let s = t - tj;
            return (p1 + v1 * s + ap * s * s / 2.0, v1 + ap * s, ap);
        }
        let s2 = t2 - tj;
        let (p2, v2) = (p1 + v1 * s2 + ap * s2 * s2 / 2.0, v1 + ap * s2);
        let s = t - t2;
        (
            p2 + v2 * s + ap * s * s / 2.0 - j * s.powi(3) / 6.0,
            v2 + ap * s - j * s * s / 2.0,
            ap - j * s,
        )
    }

    fn peak_velocity(&self) -> f64 {
        self.accel_state(self.ta).1
    }

    /// (position, velocity, acceleration) at `t`, clamped to `[0, T]`.
    fn state(&self, t: f64) -> (f64, f64, f64) {
        let total = self.duration();
        let t = t.clamp(0.0, total);
        let half = 0.5 * total;
        if t <= half {
            if t <= self.ta {
                self.accel_state(t)
            } else {
                let (p, v, _) = self.accel_state(self.ta);
                let vp = v;
                (p + vp * (t - self.ta), vp, 0.0)
            }
        } else {
            // mirror of the first half keeps the profile exactly symmetric
            let (p, v, a) = self.state(total - t);
            (self.distance - p, v, -a)
        }
    }
}

/// Motion of a single joint inside a synchronized plan.
#[derive(Debug, Clone, PartialEq)]
struct JointMotion {
    start: f64,
    direction: f64,
    profile: Option<SCurve>,
    /// own duration / synchronized duration (<= 1)
    time_scale: f64,
}

/// A synchronized rest-to-rest plan for all joints.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPlan {
    q_pick: Vec<f64>,
    q_place: Vec<f64>,
    duration: f64,
    joints: Vec<JointMotion>,
}

/// Desired joint positions, velocities and accelerations at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSample {
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
    pub qdd: Vec<f64>,
}

/// Plans a synchronized move from `q_pick` to `q_place`.
pub fn plan_joint_move(q_pick: &[f64], q_place: &[f64], limits: &[JointLimits]) -> Result<TrajectoryPlan> {
    if q_pick.is_empty() {
        return Err(Error::invalid("trajectory needs at least one joint"));
    }
    if q_place.len() != q_pick.len() {
        return Err(Error::DimensionMismatch { expected: q_pick.len(), got: q_place.len() });
    }
    if limits.len() != q_pick.len() {
        return Err(Error::DimensionMismatch { expected: q_pick.len(), got: limits.len() });
    }
    if q_pick.iter().chain(q_place).any(|q| !q.is_finite()) {
        return Err(Error::invalid("joint targets must be finite"));
    }
    for l in limits {
        l.validate()?;
    }

    let mut joints: Vec<JointMotion> = q_pick
        .iter()
        .zip(q_place)
        .zip(limits)
        .map(|((&a, &b), lim)| {
            let dq = b - a;
            let profile = (dq.abs() >= ZERO_MOVE).then(|| SCurve::plan(dq.abs(), lim));
            JointMotion { start: a, direction: dq.signum(), profile, time_scale: 1.0 }
        })
        .collect();

    let duration = joints
        .iter()
        .filter_map(|j| j.profile.as_ref().map(SCurve::duration))
        .fold(0.0, f64::max);
    for j in &mut joints {
        if let Some(p) = &j.profile {
            j.time_scale = p.duration() / duration;
        }
    }

    Ok(TrajectoryPlan { q_pick: q_pick.to_vec(), q_place: q_place.to_vec(), duration, joints })
}

impl TrajectoryPlan {
    /// A plan that holds `q` forever (zero duration).
    pub fn hold(q: &[f64]) -> Self {
        Self {
            q_pick: q.to_vec(),
            q_place: q.to_vec(),
            duration: 0.0,
            joints: q
                .iter()
                .map(|&s| JointMotion { start: s, direction: 0.0, profile: None, time_scale: 1.0 })
                .collect(),
        }
    }

    /// Task duration `t_task` in seconds.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn dof(&self) -> usize {
        self.q_pick.len()
    }

    pub fn q_pick(&self) -> &[f64] {
        &self.q_pick
    }

    pub fn q_place(&self) -> &[f64] {
        &self.q_place
    }

    /// Peak velocity of every joint after synchronization.
    pub fn peak_velocities(&self) -> Vec<f64> {
        self.joints
            .iter()
            .map(|j| j.profile.as_ref().map_or(0.0, |p| p.peak_velocity() * j.time_scale))
            .collect()
    }

    /// Desired state at time `t`; times outside `[0, t_task]` clamp to the endpoints.
    pub fn sample(&self, t: f64) -> JointSample {
        let n = self.dof();
        let mut out = JointSample { q: vec![0.0; n], qd: vec![0.0; n], qdd: vec![0.0; n] };
        let t = t.clamp(0.0, self.duration);
        for (i, j) in self.joints.iter().enumerate() {
            match &j.profile {
                None => out.q[i] = j.start,
                Some(_) if t >= self.duration => out.q[i] = self.q_place[i],
                Some(p) => {
                    let s = j.time_scale;
                    let (pos, vel, acc) = p.state(t * s);
                    out.q[i] = j.start + j.direction * pos;
                    out.qd[i] = j.direction * vel * s;
                    out.qdd[i] = j.direction * acc * s * s;
                }
            }
        }
        out
    }

    /// Piecewise-constant jerk of joint `i` at `t` (for re-integration checks).
    pub fn jerk(&self, i: usize, t: f64) -> f64 {
        let j = &self.joints[i];
        let Some(p) = &j.profile else { return 0.0 };
        let s = j.time_scale;
        let total = p.duration();
        let tau = (t * s).clamp(0.0, total);
        // the second half mirrors the first: a(t) = -a(T - t), so j(t) = j(T - t)
        let tau = if tau <= 0.5 * total { tau } else { total - tau };
        let jerk = if tau < p.tj {
            p.jerk
        } else if tau < p.ta - p.tj {
            0.0
        } else if tau < p.ta {
            -p.jerk
        } else {
            0.0
        };
        j.direction * jerk * s * s * s
    }

    /// Segment boundary times of joint `i` in plan time.
    pub fn breakpoints(&self, i: usize) -> Vec<f64> {
        let j = &self.joints[i];
        let Some(p) = &j.profile else { return vec![0.0, self.duration] };
        let local = [
            0.0,
            p.tj,
            p.ta - p.tj,
            p.ta,
            p.ta + p.tv,
            p.ta + p.tv + p.tj,
            2.0 * p.ta + p.tv - p.tj,
            2.0 * p.ta + p.tv,
        ];
        local.iter().map(|&x| x / j.time_scale).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lim(v: f64, a: f64, j: f64) -> JointLimits {
        JointLimits::new(v, a, j).unwrap()
    }

    #[test]
    fn zero_move_has_zero_duration() {
        let plan = plan_joint_move(&[0.3, -0.2, 1.0], &[0.3, -0.2, 1.0], &[lim(1.0, 1.0, 1.0); 3]).unwrap();
        assert_eq!(plan.duration(), 0.0);
        let s = plan.sample(0.7);
        assert_eq!(s.q, vec![0.3, -0.2, 1.0]);
        assert!(s.qd.iter().chain(&s.qdd).all(|&x| x == 0.0));
    }

    #[test]
    fn jerk_unconstrained_limit_is_classic_trapezoid() {
        let plan = plan_joint_move(&[0.0], &[1.0], &[lim(1.0, 2.0, 1e12)]).unwrap();
        assert!((plan.duration() - 1.5).abs() < 1e-9, "{}", plan.duration());
    }

    #[test]
    fn endpoints_are_at_rest() {
        let plan = plan_joint_move(&[0.0, 1.0], &[1.0, -0.5], &[lim(10.0, 10.0, 10.0); 2]).unwrap();
        let s0 = plan.sample(0.0);
        let s1 = plan.sample(plan.duration());
        assert_eq!(s0.q, vec![0.0, 1.0]);
        assert_eq!(s1.q, vec![1.0, -0.5]);
        for s in [&s0, &s1] {
            assert!(s.qd.iter().chain(&s.qdd).all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn midpoint_is_mean() {
        let plan = plan_joint_move(&[-0.4], &[1.2], &[lim(0.8, 3.0, 20.0)]).unwrap();
        let s = plan.sample(plan.duration() / 2.0);
        assert!((s.q[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn triangular_regimes() {
        // velocity limit unreachable, acceleration limit reached
        let p = SCurve::plan(0.1, &lim(10.0, 1.0, 100.0));
        assert_eq!(p.tv, 0.0);
        assert!((p.state(p.duration()).0 - 0.1).abs() < 1e-12);
        // neither velocity nor acceleration limit reached
        let p = SCurve::plan(1e-4, &lim(10.0, 10.0, 1.0));
        assert!((p.ta - 2.0 * p.tj).abs() < 1e-15);
        assert!(p.jerk * p.tj < 10.0);
        let (_, v, _) = p.state(p.duration() / 2.0);
        assert!(v < 10.0);
        assert!((p.state(p.duration()).0 - 1e-4).abs() < 1e-16);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(plan_joint_move(&[], &[], &[]).is_err());
        assert!(plan_joint_move(&[0.0], &[f64::NAN], &[lim(1.0, 1.0, 1.0)]).is_err());
        assert!(plan_joint_move(&[0.0, 1.0], &[1.0], &[lim(1.0, 1.0, 1.0)]).is_err());
        assert!(JointLimits::new(0.0, 1.0, 1.0).is_err());
        assert!(JointLimits::new(1.0, f64::INFINITY, 1.0).is_err());
    }
}
