//! Run configuration shared by the command-line front-end and the tests.
//! Every section except the trajectory falls back to the demo arm.

use serde::{Deserialize, Serialize};

use crate::design::{CandidateGrid, SweepOptions};
use crate::dynamics::{ControllerGains, RobotDesign, SimConfig};
use crate::error::{Error, Result};
use crate::fatigue::{FatigueMaterial, FatigueSettings};
use crate::trajectory::{plan_joint_move, JointLimits, TrajectoryPlan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub q_pick: [f64; 3],
    pub q_place: [f64; 3],
    pub limits: [JointLimits; 3],
}

impl TrajectoryConfig {
    /// Pick-and-place move of the demo arm.
    pub fn demo() -> Self {
        let lim = JointLimits { v_max: 2.0, a_max: 8.0, j_max: 60.0 };
        Self { q_pick: [0.0, 0.3, -0.6], q_place: [1.5, -0.2, 0.4], limits: [lim; 3] }
    }

    pub fn plan(&self) -> Result<TrajectoryPlan> {
        plan_joint_move(&self.q_pick, &self.q_place, &self.limits)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FatigueConfig {
    #[serde(default = "FatigueMaterial::demo")]
    pub material: FatigueMaterial,
    #[serde(default)]
    pub settings: FatigueSettings,
}

impl Default for FatigueConfig {
    fn default() -> Self {
        Self { material: FatigueMaterial::demo(), settings: FatigueSettings::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub grid: CandidateGrid,
    #[serde(default = "default_reference")]
    pub reference_config: usize,
    #[serde(default)]
    pub only_pareto_fatigue: bool,
}

fn default_reference() -> usize {
    SweepOptions::default().reference_config
}

impl Default for SweepConfig {
    fn default() -> Self {
        let o = SweepOptions::default();
        Self { grid: CandidateGrid::default(), reference_config: o.reference_config, only_pareto_fatigue: o.only_pareto_fatigue }
    }
}

impl SweepConfig {
    pub fn options(&self) -> SweepOptions {
        SweepOptions { reference_config: self.reference_config, only_pareto_fatigue: self.only_pareto_fatigue }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "RobotDesign::demo")]
    pub robot: RobotDesign,
    #[serde(default = "ControllerGains::demo")]
    pub controller: ControllerGains,
    pub trajectory: TrajectoryConfig,
    #[serde(default)]
    pub simulation: SimConfig,
    #[serde(default)]
    pub fatigue: FatigueConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    /// Directory for result files; the command line may override it.
    #[serde(default)]
    pub output_dir: Option<String>,
}

impl RunConfig {
    pub fn demo() -> Self {
        Self {
            robot: RobotDesign::demo(),
            controller: ControllerGains::demo(),
            trajectory: TrajectoryConfig::demo(),
            simulation: SimConfig::default(),
            fatigue: FatigueConfig::default(),
            sweep: SweepConfig::default(),
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.robot.validate()?;
        self.controller.validate()?;
        for l in &self.trajectory.limits {
            l.validate()?;
        }
        if !self.trajectory.q_pick.iter().chain(&self.trajectory.q_place).all(|x| x.is_finite()) {
            return Err(Error::invalid("trajectory end points must be finite"));
        }
        self.simulation.validate()?;
        self.fatigue.material.validate()?;
        if self.fatigue.settings.n_angles == 0 {
            return Err(Error::invalid("fatigue.settings.n_angles must be at least 1"));
        }
        self.sweep.grid.validate()?;
        if self.sweep.grid.candidate(self.sweep.reference_config).is_none() {
            return Err(Error::invalid(format!(
                "sweep.reference_config {} is not in the {}-candidate grid",
                self.sweep.reference_config,
                self.sweep.grid.len()
            )));
        }
        Ok(())
    }
}
