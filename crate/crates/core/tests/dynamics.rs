use flexlife::dynamics::{sample_grid, simulate, simulate_free, ControllerGains, Robot, RobotDesign, SimConfig};
use flexlife::trajectory::{plan_joint_move, JointLimits, TrajectoryPlan};

fn conservative_design() -> RobotDesign {
    let mut d = RobotDesign::demo();
    for drive in &mut d.drives {
        drive.damping = 0.0;
    }
    d.beam_damping = 0.0;
    d
}

fn demo_plan() -> TrajectoryPlan {
    let lim = JointLimits::new(2.0, 8.0, 60.0).unwrap();
    plan_joint_move(&[0.0, 0.3, -0.6], &[1.5, -0.2, 0.4], &[lim; 3]).unwrap()
}

fn raised_pose(robot: &Robot) -> Vec<f64> {
    let d = robot.design();
    let mut q = vec![0.0; robot.dof()];
    let ql = [0.4, 0.5, 0.3];
    for i in 0..3 {
        q[3 + i] = ql[i];
        q[i] = ql[i] * d.drives[i].gear_ratio;
    }
    q
}

#[test]
fn free_swing_conserves_energy() {
    let robot = Robot::new(&conservative_design()).unwrap();
    let q0 = raised_pose(&robot);
    let qd0 = vec![0.0; robot.dof()];
    let e0 = robot.energy(&q0, &qd0).unwrap().total();
    assert!(e0 > 0.0);
    let times = sample_grid(1.0, 100.0);
    let cfg = SimConfig { rtol: 1e-6, atol: 1e-9, ..SimConfig::default() };
    let (states, _) = simulate_free(&robot, &q0, &qd0, &times, &cfg).unwrap();
    let drift = states
        .iter()
        .map(|(q, qd)| (robot.energy(q, qd).unwrap().total() - e0).abs() / e0)
        .fold(0.0, f64::max);
    assert!(drift < 1e-6, "relative energy drift {drift:e}");
    // the arm actually moved
    assert!((states.last().unwrap().0[4] - q0[4]).abs() > 1e-2);
}

#[test]
fn equilibrium_persists_without_motion_or_gravity() {
    let mut d = RobotDesign::demo();
    d.gravity = [0.0; 3];
    let robot = Robot::new(&d).unwrap();
    let plan = TrajectoryPlan::hold(&[0.2, 0.1, -0.3]);
    let cfg = SimConfig { t_settle: Some(0.2), ..SimConfig::default() };
    let r = simulate(&robot, &plan, &ControllerGains::demo(), &cfg).unwrap();
    assert_eq!(r.t_task, 0.0);
    for (q, dev) in r.q.iter().zip(&r.tool_deviation) {
        assert!(q[6..].iter().all(|&x| x.abs() < 1e-15));
        assert!(dev.iter().all(|&x| x.abs() < 1e-15));
    }
}

#[test]
fn stiff_links_remove_the_deviation() {
    let plan = demo_plan();
    let cfg = SimConfig::default();
    let nominal = Robot::new(&RobotDesign::demo()).unwrap();
    let mut stiff = RobotDesign::demo();
    stiff.material.youngs_modulus *= 1e6;
    let stiff = Robot::new(&stiff).unwrap();
    let max_dev = |r: &flexlife::dynamics::SimulationResult| {
        r.tool_deviation.iter().map(|d| (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()).fold(0.0, f64::max)
    };
    let a = simulate(&nominal, &plan, &ControllerGains::demo(), &cfg).unwrap();
    let b = simulate(&stiff, &plan, &ControllerGains::demo(), &SimConfig { t_settle: Some(a.t_settle), ..cfg }).unwrap();
    let (da, db) = (max_dev(&a), max_dev(&b));
    assert!(db * 100.0 <= da, "nominal {da:e}, stiff {db:e}");
}

#[test]
fn tolerance_halving_converges() {
    let robot = Robot::new(&RobotDesign::demo()).unwrap();
    let lim = JointLimits::new(2.0, 8.0, 60.0).unwrap();
    let plan = plan_joint_move(&[0.0, 0.3, -0.6], &[0.5, 0.1, -0.2], &[lim; 3]).unwrap();
    let loose = SimConfig { rtol: 1e-5, atol: 1e-8, t_settle: Some(0.2), ..SimConfig::default() };
    let tight = SimConfig { rtol: 5e-6, atol: 5e-9, ..loose };
    let a = simulate(&robot, &plan, &ControllerGains::demo(), &loose).unwrap();
    let b = simulate(&robot, &plan, &ControllerGains::demo(), &tight).unwrap();
    let (qa, qb) = (a.q.last().unwrap(), b.q.last().unwrap());
    for (x, y) in qa.iter().zip(qb) {
        let bound = 10.0 * (loose.rtol * x.abs() + loose.atol);
        assert!((x - y).abs() <= bound, "{x} vs {y}");
    }
}

#[test]
fn rigidized_arm_settles_on_target() {
    let mut d = RobotDesign::demo();
    d.material.youngs_modulus *= 1e3;
    let robot = Robot::new(&d).unwrap();
    let lim = JointLimits::new(1.0, 5.0, 50.0).unwrap();
    let plan = plan_joint_move(&[0.0, 0.0, 0.0], &[0.1, 0.1, 0.1], &[lim; 3]).unwrap();
    let cfg = SimConfig { t_settle: Some(0.5), ..SimConfig::default() };
    let r = simulate(&robot, &plan, &ControllerGains::demo(), &cfg).unwrap();
    let last = r.q.last().unwrap();
    let tail = r.time.iter().position(|&t| t >= r.time.last().unwrap() - 0.1).unwrap();
    for i in 0..3 {
        let ratio = d.drives[i].gear_ratio;
        assert!((last[i] / ratio - 0.1).abs() < 1e-4, "motor {i}: {}", last[i] / ratio);
        let peak = r.qd.iter().map(|v| v[3 + i].abs()).fold(0.0, f64::max);
        let residual = r.qd[tail..].iter().map(|v| v[3 + i].abs()).fold(0.0, f64::max);
        assert!(residual < 0.05 * peak, "joint {i}: residual rate {residual}, peak {peak}");
    }
}

#[test]
fn heavier_payload_lowers_the_fundamental() {
    let light = Robot::new(&RobotDesign::demo()).unwrap();
    let mut heavy = RobotDesign::demo();
    heavy.payload_mass *= 2.0;
    let heavy = Robot::new(&heavy).unwrap();
    let q = raised_pose(&light);
    assert!(heavy.slowest_period(&q).unwrap() >= light.slowest_period(&q).unwrap());
}

#[test]
fn small_deflections_respond_linearly() {
    let mut d = RobotDesign::demo();
    d.gravity = [0.0; 3];
    let robot = Robot::new(&d).unwrap();
    let times = sample_grid(0.2, 1000.0);
    let run = |scale: f64| {
        let mut q0 = raised_pose(&robot);
        let r = robot.elastic_range(0);
        q0[r.start] = 1e-4 * scale;
        let (states, _) = simulate_free(&robot, &q0, &vec![0.0; robot.dof()], &times, &SimConfig::default()).unwrap();
        states.iter().map(|(q, _)| q[r.start].abs()).fold(0.0, f64::max)
    };
    let (a, b) = (run(1.0), run(3.0));
    assert!((b / a / 3.0 - 1.0).abs() < 0.05, "{a} {b}");
}

#[test]
fn history_is_sampled_uniformly() {
    let robot = Robot::new(&RobotDesign::demo()).unwrap();
    let lim = JointLimits::new(2.0, 8.0, 60.0).unwrap();
    let plan = plan_joint_move(&[0.0, 0.0, 0.0], &[0.2, 0.0, 0.0], &[lim; 3]).unwrap();
    let r = simulate(&robot, &plan, &ControllerGains::demo(), &SimConfig::default()).unwrap();
    assert!(r.t_settle > 0.0);
    for w in r.time.windows(2) {
        assert!((w[1] - w[0] - 1e-3).abs() < 1e-12);
    }
    assert_eq!(r.q.len(), r.time.len());
    assert_eq!(r.curvature[0].len(), r.time.len());
    assert!(*r.time.last().unwrap() <= r.t_task + r.t_settle + 1e-12);
}
