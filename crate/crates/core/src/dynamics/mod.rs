//! Equations of motion, drive control and time integration of the arm.

pub mod controller;
pub mod kinematics;
pub mod model;
pub mod radau;
pub mod simulate;

pub use controller::{control, feedforward_torque, ControlOutput, ControllerGains};
pub use model::{Drive, Energy, Eom, Robot, RobotDesign, ShapeCounts};
pub use radau::{RadauOptions, RadauStats};
pub use simulate::{initial_state, sample_grid, simulate, simulate_free, SimConfig, SimulationResult};
