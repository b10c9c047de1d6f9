//! Per-joint cascade on the motor side: proportional position loop, PI
//! velocity loop, optional rigid-body torque feedforward, torque saturation.

use serde::{Deserialize, Serialize};

use super::model::Robot;
use crate::error::{Error, Result};
use crate::trajectory::JointSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerGains {
    /// Position loop gain (1/s).
    pub kp_pos: [f64; 3],
    /// Velocity loop gain (N·m·s/rad, motor side).
    pub kp_vel: [f64; 3],
    /// Velocity loop integral gain (N·m/rad, motor side).
    pub ki_vel: [f64; 3],
    /// Add the torque of the rigid arm along the reference motion.
    #[serde(default = "yes")]
    pub feedforward: bool,
}

fn yes() -> bool {
    true
}

impl ControllerGains {
    /// Gains matched to [`RobotDesign::demo`](super::RobotDesign::demo).
    pub fn demo() -> Self {
        Self { kp_pos: [40.0; 3], kp_vel: [0.4, 0.4, 0.1], ki_vel: [16.0, 16.0, 4.0], feedforward: true }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: &[f64; 3]| v.iter().all(|&x| x > 0.0 && x.is_finite());
        if !(ok(&self.kp_pos) && ok(&self.kp_vel)) || !self.ki_vel.iter().all(|&x| x >= 0.0 && x.is_finite()) {
            return Err(Error::invalid("controller gains must be positive"));
        }
        Ok(())
    }
}

/// Motor torque and the rate of the velocity-error integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub torque: [f64; 3],
    pub integrator_rate: [f64; 3],
}

/// Motor torque `Q_M` of the feedforward path: rigid link torques reflected
/// through the gears plus rotor inertia along the reference.
pub fn feedforward_torque(robot: &Robot, reference: &JointSample) -> [f64; 3] {
    let q: [f64; 3] = [reference.q[0], reference.q[1], reference.q[2]];
    let qd = [reference.qd[0], reference.qd[1], reference.qd[2]];
    let qdd = [reference.qdd[0], reference.qdd[1], reference.qdd[2]];
    let tau = robot.rigid_inverse_dynamics(&q, &qd, &qdd);
    let drives = &robot.design().drives;
    std::array::from_fn(|i| tau[i] / drives[i].gear_ratio + drives[i].motor_inertia * drives[i].gear_ratio * qdd[i])
}

/// Cascade law for motor angles `q_m`, rates `qd_m` and integrator states `z`,
/// given the link-side reference and a precomputed feedforward torque.
pub fn control(
    robot: &Robot,
    gains: &ControllerGains,
    q_m: &[f64],
    qd_m: &[f64],
    z: &[f64],
    reference: &JointSample,
    feedforward: [f64; 3],
) -> ControlOutput {
    let drives = &robot.design().drives;
    let mut torque = [0.0; 3];
    let mut integrator_rate = [0.0; 3];
    for i in 0..3 {
        let r = drives[i].gear_ratio;
        let v_ref = gains.kp_pos[i] * (r * reference.q[i] - q_m[i]) + r * reference.qd[i];
        let e_v = v_ref - qd_m[i];
        let raw = gains.kp_vel[i] * e_v + gains.ki_vel[i] * z[i] + feedforward[i];
        let limit = drives[i].torque_limit;
        torque[i] = raw.clamp(-limit, limit);
        integrator_rate[i] = e_v;
    }
    ControlOutput { torque, integrator_rate }
}
