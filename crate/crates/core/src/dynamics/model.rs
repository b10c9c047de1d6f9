//! Robot description and the equations of motion
//! `M(q) q̈ + h(q, q̇) + g(q) = B Q_M − Q_d(q̇)`.
//!
//! Generalized coordinates are `q = (q_M, q_L, q_e1, q_e2)`: three motor
//! angles, three link-side joint angles and the Ritz coordinates of both
//! links. The yaw joint turns about the vertical axis, the shoulder and
//! elbow joints about horizontal axes. Each link is sliced at Gauss points
//! into rigid elements whose offset from the link frame is linear in `q_e`
//! and whose orientation follows the local slopes and twist. Mass matrix and
//! velocity terms are projected from the Newton–Euler equations of these
//! elements through exact Jacobians.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kinematics::{mat_vec, mul_transpose, part, vee_skew, Chain, Dual, Jet, LinkShapes, Mat3, Pose, Vec3};
use crate::beam::{
    generalized_eigenvalues, section_properties, stiffness_matrix, BeamSpec, CrossSection, Curvature, CurvatureOperator,
    Material, RitzBasis,
};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::stress::MaterialPoint;

/// Motor, gearbox and torque limit of one joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Drive {
    /// Motor angle per link angle.
    pub gear_ratio: f64,
    /// Rotor inertia on the motor side (kg·m²).
    pub motor_inertia: f64,
    /// Gear stiffness on the link side (N·m/rad).
    pub stiffness: f64,
    /// Gear damping on the link side (N·m·s/rad).
    pub damping: f64,
    /// Motor torque limit (N·m).
    pub torque_limit: f64,
}

/// Number of Ritz shapes per deflection direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeCounts {
    pub n_v: usize,
    pub n_w: usize,
    pub n_theta: usize,
}

impl Default for ShapeCounts {
    fn default() -> Self {
        Self { n_v: 4, n_w: 4, n_theta: 1 }
    }
}

/// Fixed robot data plus the wall thicknesses that are varied in a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotDesign {
    /// Lengths of link 1 and link 2 (m).
    pub link_lengths: [f64; 2],
    /// Outer edge of the square tube sections (m).
    pub edge: f64,
    /// Wall thickness of link 1 and link 2 (m).
    pub thickness: [f64; 2],
    pub material: Material,
    /// Point mass at the elbow, e.g. the elbow drive (kg).
    pub elbow_mass: f64,
    /// Point mass at the end effector (kg).
    pub payload_mass: f64,
    pub drives: [Drive; 3],
    #[serde(default = "default_gravity")]
    pub gravity: [f64; 3],
    #[serde(default)]
    pub shapes: ShapeCounts,
    /// Stiffness-proportional beam damping coefficient (s).
    #[serde(default)]
    pub beam_damping: f64,
    /// Rigid slices per link used for the inertia integrals.
    #[serde(default = "default_slices")]
    pub slices: usize,
    /// Axial station of the stress evaluation on each link (m).
    #[serde(default)]
    pub critical_station: [f64; 2],
    /// Material point `(y, z)` on the wall midline per link; `None` is the top face.
    #[serde(default)]
    pub material_point: [Option<[f64; 2]>; 2],
}

fn default_gravity() -> [f64; 3] {
    [0.0, 0.0, -9.81]
}

fn default_slices() -> usize {
    12
}

impl RobotDesign {
    /// Steel arm with two 0.8 m links of 35 mm square tube and a 5 kg
    /// payload, used in examples and tests.
    pub fn demo() -> Self {
        let drive = |ratio: f64, inertia: f64, stiffness: f64, limit: f64| Drive {
            gear_ratio: ratio,
            motor_inertia: inertia,
            stiffness,
            damping: 0.002 * stiffness,
            torque_limit: limit,
        };
        Self {
            link_lengths: [0.8, 0.8],
            edge: 0.035,
            thickness: [0.004, 0.004],
            material: Material::steel(),
            elbow_mass: 3.0,
            payload_mass: 5.0,
            drives: [drive(100.0, 3.0e-4, 1.0e5, 20.0), drive(100.0, 3.0e-4, 1.0e5, 20.0), drive(80.0, 1.5e-4, 4.0e4, 10.0)],
            gravity: default_gravity(),
            shapes: ShapeCounts::default(),
            beam_damping: 2e-4,
            slices: default_slices(),
            critical_station: [0.0, 0.0],
            material_point: [None, None],
        }
    }

    pub fn with_thickness(&self, t1: f64, t2: f64) -> Self {
        Self { thickness: [t1, t2], ..self.clone() }
    }

    pub fn sections(&self) -> Result<[CrossSection; 2]> {
        Ok([section_properties(self.edge, self.thickness[0])?, section_properties(self.edge, self.thickness[1])?])
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !self.link_lengths.iter().all(|&l| positive(l)) {
            return Err(Error::invalid("link lengths must be positive"));
        }
        self.sections()?;
        self.material.validate()?;
        if !(self.elbow_mass >= 0.0 && self.payload_mass >= 0.0) {
            return Err(Error::invalid("point masses must be non-negative"));
        }
        for (i, d) in self.drives.iter().enumerate() {
            if !(positive(d.gear_ratio) && positive(d.motor_inertia) && positive(d.stiffness) && positive(d.torque_limit))
                || !(d.damping >= 0.0)
            {
                return Err(Error::invalid(format!("drive {} has non-positive parameters", i + 1)));
            }
        }
        if !self.gravity.iter().all(|g| g.is_finite()) {
            return Err(Error::invalid("gravity must be finite"));
        }
        let s = self.shapes;
        if s.n_v == 0 || s.n_w == 0 || s.n_theta == 0 {
            return Err(Error::invalid("each deflection direction needs at least one shape"));
        }
        if 3 + 2 * (s.n_v + s.n_w + s.n_theta) > MAX_COORDS {
            return Err(Error::invalid(format!("at most {MAX_COORDS} link-side coordinates are supported")));
        }
        if self.slices == 0 {
            return Err(Error::invalid("at least one slice per link is required"));
        }
        if !(self.beam_damping >= 0.0) {
            return Err(Error::invalid("beam damping must be non-negative"));
        }
        for k in 0..2 {
            let xi = self.critical_station[k];
            if !(0.0..=self.link_lengths[k]).contains(&xi) {
                return Err(Error::StationOutOfRange { xi, length: self.link_lengths[k] });
            }
        }
        Ok(())
    }
}

/// Equations of motion at one state.
#[derive(Debug, Clone)]
pub struct Eom {
    pub mass: DMatrix<f64>,
    /// Coriolis and centrifugal forces `h(q, q̇)`.
    pub velocity_forces: DVector<f64>,
    /// Gradient of the potential energy (gravity, beam strain, gear springs).
    pub potential_forces: DVector<f64>,
}

/// Kinetic and potential energy (J).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub kinetic: f64,
    pub potential: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential
    }
}

/// A robot design prepared for simulation.
#[derive(Debug, Clone)]
pub struct Robot {
    design: RobotDesign,
    beams: [BeamSpec; 2],
    stiffness: [DMatrix<f64>; 2],
    chain: Chain,
    slice_inertia: [Vec<(f64, [f64; 3])>; 2],
    curvature_ops: [CurvatureOperator; 2],
    points: [MaterialPoint; 2],
}

/// Upper bound on the number of link-side coordinates.
const MAX_COORDS: usize = 64;

struct Jacobians {
    jv: Vec<Vec<[f64; 3]>>,
    jw: Vec<Vec<[f64; 3]>>,
    rot: Vec<Mat3<f64>>,
}

fn link_shapes(spec: &BeamSpec, basis: &impl RitzBasis, stations: &[f64]) -> LinkShapes {
    let nb = spec.n_v.max(spec.n_w);
    let bend = |xi: f64| (0..nb).map(|k| {
        let b = basis.bending(k, xi);
        [b[0], b[1]]
    }).collect::<Vec<_>>();
    let tors = |xi: f64| (0..spec.n_theta).map(|k| basis.torsion(k, xi)[0]).collect::<Vec<_>>();
    LinkShapes {
        length: spec.length,
        n_v: spec.n_v,
        n_w: spec.n_w,
        n_theta: spec.n_theta,
        stations: stations.to_vec(),
        bending: stations.iter().map(|&x| bend(x)).collect(),
        torsion: stations.iter().map(|&x| tors(x)).collect(),
        tip_bending: bend(spec.length),
        tip_torsion: tors(spec.length),
    }
}

impl Robot {
    pub fn new(design: &RobotDesign) -> Result<Self> {
        design.validate()?;
        let sections = design.sections()?;
        let s = design.shapes;
        let beam = |k: usize| BeamSpec::new(design.link_lengths[k], sections[k], design.material, s.n_v, s.n_w, s.n_theta);
        let beams = [beam(0)?, beam(1)?];
        let mut shapes = Vec::with_capacity(2);
        let mut inertia = Vec::with_capacity(2);
        let mut ops = Vec::with_capacity(2);
        let mut points = Vec::with_capacity(2);
        for (k, spec) in beams.iter().enumerate() {
            let basis = spec.basis();
            let gl = GaussLegendre::new(design.slices, 0.0, spec.length);
            shapes.push(link_shapes(spec, &basis, &gl.nodes));
            let rho = spec.material.density;
            let sec = &spec.section;
            inertia.push(
                gl.weights
                    .iter()
                    .map(|&w| (rho * sec.area * w, [rho * sec.i_d * w, rho * sec.i_y * w, rho * sec.i_z * w]))
                    .collect::<Vec<_>>(),
            );
            let xi = design.critical_station[k];
            ops.push(CurvatureOperator::new(spec, &basis, xi)?);
            points.push(match design.material_point[k] {
                None => MaterialPoint::top_face(sec, xi),
                Some([y, z]) => MaterialPoint::on_section(sec, xi, y, z)?,
            });
        }
        let [s1, s2]: [LinkShapes; 2] = shapes.try_into().unwrap();
        let [i1, i2]: [Vec<_>; 2] = inertia.try_into().unwrap();
        let [o1, o2]: [CurvatureOperator; 2] = ops.try_into().unwrap();
        let [p1, p2]: [MaterialPoint; 2] = points.try_into().unwrap();
        Ok(Self {
            design: design.clone(),
            stiffness: [stiffness_matrix(&beams[0]), stiffness_matrix(&beams[1])],
            beams,
            chain: Chain { links: [s1, s2] },
            slice_inertia: [i1, i2],
            curvature_ops: [o1, o2],
            points: [p1, p2],
        })
    }

    pub fn design(&self) -> &RobotDesign {
        &self.design
    }

    pub fn beam(&self, link: usize) -> &BeamSpec {
        &self.beams[link]
    }

    pub fn elastic_stiffness(&self, link: usize) -> &DMatrix<f64> {
        &self.stiffness[link]
    }

    pub fn material_point(&self, link: usize) -> &MaterialPoint {
        &self.points[link]
    }

    pub fn n_elastic(&self, link: usize) -> usize {
        self.beams[link].n_elastic()
    }

    /// Number of generalized coordinates.
    pub fn dof(&self) -> usize {
        6 + self.n_elastic(0) + self.n_elastic(1)
    }

    /// Index range of the elastic coordinates of `link` inside `q`.
    pub fn elastic_range(&self, link: usize) -> std::ops::Range<usize> {
        let start = 6 + if link == 0 { 0 } else { self.n_elastic(0) };
        start..start + self.n_elastic(link)
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dof() {
            return Err(Error::DimensionMismatch { expected: self.dof(), got: v.len() });
        }
        Ok(())
    }

    /// Curvature at the critical station of `link`.
    pub fn curvature(&self, link: usize, q: &[f64]) -> Result<Curvature> {
        self.check(q)?;
        self.curvature_ops[link].apply(&q[self.elastic_range(link)])
    }

    fn link_angles(q: &[f64]) -> [f64; 3] {
        [q[3], q[4], q[5]]
    }

    pub fn tool_position(&self, q: &[f64]) -> Result<[f64; 3]> {
        self.check(q)?;
        Ok(self.chain.tool_position(&Self::link_angles(q), [&q[self.elastic_range(0)], &q[self.elastic_range(1)]]))
    }

    /// End-effector position of the rigid arm at the same link angles.
    pub fn rigid_tool_position(&self, q_link: &[f64; 3]) -> [f64; 3] {
        let z1 = vec![0.0; self.n_elastic(0)];
        let z2 = vec![0.0; self.n_elastic(1)];
        self.chain.tool_position(q_link, [&z1, &z2])
    }

    /// End-effector deviation caused by link elasticity,
    /// `r_EE(q_L, q_e) − r_EE(q_L, 0)`.
    pub fn tool_deviation(&self, q: &[f64]) -> Result<[f64; 3]> {
        let e = self.tool_position(q)?;
        let r = self.rigid_tool_position(&Self::link_angles(q));
        Ok([e[0] - r[0], e[1] - r[1], e[2] - r[2]])
    }

    /// Point masses and slices with their inertia, in the order of [`Pose`] traversal.
    fn bodies(&self) -> Vec<(f64, [f64; 3])> {
        let mut b: Vec<(f64, [f64; 3])> = self.slice_inertia[0].clone();
        b.extend_from_slice(&self.slice_inertia[1]);
        b.push((self.design.elbow_mass, [0.0; 3]));
        b.push((self.design.payload_mass, [0.0; 3]));
        b
    }

    fn pose_jet(&self, ql: &[f64], qe: &[f64], dir: &[f64]) -> Pose<Jet> {
        let jets: Vec<Jet> = ql.iter().chain(qe).zip(dir).map(|(&v, &d)| Jet::new(v, d)).collect();
        let (l, e) = jets.split_at(3);
        let n1 = self.n_elastic(0);
        self.chain.pose(&[l[0], l[1], l[2]], [&e[..n1], &e[n1..]])
    }

    /// Translational and angular Jacobian columns of every body for the
    /// first `n_dir` link-side coordinates, plus the body rotations.
    fn jacobians<const N: usize>(&self, ql: &[f64], qe: &[f64], n_dir: usize) -> Jacobians {
        let duals: Vec<Dual<N>> =
            ql.iter().chain(qe).enumerate().map(|(k, &v)| Dual::seeded(v, if k < n_dir { k } else { N })).collect();
        let (l, e) = duals.split_at(3);
        let n1 = self.n_elastic(0);
        let pose = self.chain.pose(&[l[0], l[1], l[2]], [&e[..n1], &e[n1..]]);
        let nb = pose.slices[0].len() + pose.slices[1].len() + 2;
        let mut jac = Jacobians { jv: Vec::with_capacity(nb), jw: Vec::with_capacity(nb), rot: Vec::with_capacity(nb) };
        let push_point = |p: &Vec3<Dual<N>>, jac: &mut Jacobians| {
            jac.jv.push((0..n_dir).map(|k| [p[0].d[k], p[1].d[k], p[2].d[k]]).collect());
        };
        for f in pose.slices.iter().flatten() {
            push_point(&f.p, &mut jac);
            let rv: Mat3<f64> = f.r.map(|row| row.map(|x| x.v));
            jac.jw.push(
                (0..n_dir)
                    .map(|k| vee_skew(&mul_transpose(&f.r.map(|row| row.map(|x| x.d[k])), &rv)))
                    .collect(),
            );
            jac.rot.push(rv);
        }
        push_point(&pose.elbow, &mut jac);
        push_point(&pose.tool, &mut jac);
        jac
    }

    fn jacobians_dispatch(&self, ql: &[f64], qe: &[f64], n_dir: usize) -> Jacobians {
        match n_dir {
            0..=4 => self.jacobians::<4>(ql, qe, n_dir),
            5..=8 => self.jacobians::<8>(ql, qe, n_dir),
            9..=16 => self.jacobians::<16>(ql, qe, n_dir),
            17..=24 => self.jacobians::<24>(ql, qe, n_dir),
            25..=32 => self.jacobians::<32>(ql, qe, n_dir),
            _ => self.jacobians::<MAX_COORDS>(ql, qe, n_dir),
        }
    }

    /// Link-side inertial terms: mass matrix, velocity forces and the
    /// gravity gradient over the first `n_dir` link-side coordinates
    /// `(q_L, q_e1, q_e2)`. With `n_dir = 3` and zero elastic rates this is
    /// the rigid-arm model.
    fn link_side(&self, ql: &[f64], qe: &[f64], qld: &[f64], n_dir: usize) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
        let nc = ql.len() + qe.len();
        let bodies = self.bodies();
        let Jacobians { jv, jw, rot } = self.jacobians_dispatch(ql, qe, n_dir);
        let mut dir = vec![0.0; nc];
        let collect = |pose: &Pose<Jet>| {
            let mut frames: Vec<(Vec3<Jet>, Option<Mat3<Jet>>)> = Vec::with_capacity(bodies.len());
            for s in pose.slices.iter().flatten() {
                frames.push((s.p, Some(s.r)));
            }
            frames.push((pose.elbow, None));
            frames.push((pose.tool, None));
            frames
        };
        // bias accelerations along the current velocity
        dir[..qld.len()].copy_from_slice(qld);
        let pose = self.pose_jet(ql, qe, &dir);
        let frames = collect(&pose);

        let grav = self.design.gravity;
        let mut m = DMatrix::zeros(n_dir, n_dir);
        let mut h = DVector::zeros(n_dir);
        let mut g = DVector::zeros(n_dir);
        for (b, &(mass, rotary)) in bodies.iter().enumerate() {
            let (p, r) = &frames[b];
            let a = p.map(|x| x.dd);
            let force = [mass * a[0], mass * a[1], mass * a[2]];
            for i in 0..n_dir {
                let vi = jv[b][i];
                h[i] += vi[0] * force[0] + vi[1] * force[1] + vi[2] * force[2];
                g[i] -= mass * (vi[0] * grav[0] + vi[1] * grav[1] + vi[2] * grav[2]);
                for k in 0..=i {
                    let vk = jv[b][k];
                    m[(i, k)] += mass * (vi[0] * vk[0] + vi[1] * vk[1] + vi[2] * vk[2]);
                }
            }
            if let Some(r) = r {
                let rv = rot[b];
                let iw = world_inertia(&rv, &rotary);
                let omega = vee_skew(&mul_transpose(&part(r, |x| x.d), &rv));
                let alpha = vee_skew(&mul_transpose(&part(r, |x| x.dd), &rv));
                let iw_omega = mat_vec(&iw, &omega);
                let ia = mat_vec(&iw, &alpha);
                let gyro = cross(&omega, &iw_omega);
                let moment = [ia[0] + gyro[0], ia[1] + gyro[1], ia[2] + gyro[2]];
                let iw_j: Vec<[f64; 3]> = jw[b].iter().map(|c| mat_vec(&iw, c)).collect();
                for i in 0..n_dir {
                    let wi = jw[b][i];
                    h[i] += wi[0] * moment[0] + wi[1] * moment[1] + wi[2] * moment[2];
                    for k in 0..=i {
                        let c = iw_j[k];
                        m[(i, k)] += wi[0] * c[0] + wi[1] * c[1] + wi[2] * c[2];
                    }
                }
            }
        }
        for i in 0..n_dir {
            for k in 0..i {
                m[(k, i)] = m[(i, k)];
            }
        }
        (m, h, g)
    }

    /// Assembles `M`, `h` and the potential gradient `g` at `(q, q̇)`.
    pub fn eom(&self, q: &[f64], qd: &[f64]) -> Result<Eom> {
        self.check(q)?;
        self.check(qd)?;
        let n = self.dof();
        let nc = n - 3;
        let (mc, hc, gc) = self.link_side(&q[3..6], &q[6..], &qd[3..], nc);
        let mut mass = DMatrix::zeros(n, n);
        mass.view_mut((3, 3), (nc, nc)).copy_from(&mc);
        let mut velocity_forces = DVector::zeros(n);
        velocity_forces.rows_mut(3, nc).copy_from(&hc);
        let mut potential_forces = DVector::zeros(n);
        potential_forces.rows_mut(3, nc).copy_from(&gc);
        for (i, d) in self.design.drives.iter().enumerate() {
            mass[(i, i)] = d.motor_inertia;
            let spring = d.stiffness * (q[i] / d.gear_ratio - q[3 + i]);
            potential_forces[i] += spring / d.gear_ratio;
            potential_forces[3 + i] -= spring;
        }
        for link in 0..2 {
            let r = self.elastic_range(link);
            let f = &self.stiffness[link] * DVector::from_column_slice(&q[r.clone()]);
            let mut seg = potential_forces.rows_mut(r.start, r.len());
            seg += f;
        }
        Ok(Eom { mass, velocity_forces, potential_forces })
    }

    /// Gear and beam damping forces `Q_d(q̇)` (acting with a minus sign).
    pub fn damping_forces(&self, qd: &[f64]) -> Result<DVector<f64>> {
        self.check(qd)?;
        let mut d = DVector::zeros(self.dof());
        for (i, drive) in self.design.drives.iter().enumerate() {
            let f = drive.damping * (qd[i] / drive.gear_ratio - qd[3 + i]);
            d[i] += f / drive.gear_ratio;
            d[3 + i] -= f;
        }
        let beta = self.design.beam_damping;
        if beta > 0.0 {
            for link in 0..2 {
                let r = self.elastic_range(link);
                let f = &self.stiffness[link] * DVector::from_column_slice(&qd[r.clone()]) * beta;
                let mut seg = d.rows_mut(r.start, r.len());
                seg += f;
            }
        }
        Ok(d)
    }

    /// Link torques of the rigid arm (`q_e ≡ 0`) for the motion `(q, q̇, q̈)`
    /// of the link-side joints, including gravity.
    pub fn rigid_inverse_dynamics(&self, q: &[f64; 3], qd: &[f64; 3], qdd: &[f64; 3]) -> [f64; 3] {
        let ne = self.n_elastic(0) + self.n_elastic(1);
        let qe = vec![0.0; ne];
        let (m, h, g) = self.link_side(q, &qe, qd, 3);
        let acc = m * DVector::from_column_slice(qdd) + h + g;
        [acc[0], acc[1], acc[2]]
    }

    /// Kinetic and potential energy. Gravity potential is zero with every
    /// mass at the height of the shoulder joint.
    pub fn energy(&self, q: &[f64], qd: &[f64]) -> Result<Energy> {
        let eom = self.eom(q, qd)?;
        let v = DVector::from_column_slice(qd);
        let kinetic = 0.5 * v.dot(&(&eom.mass * &v));
        let pose = self.chain.pose(&Self::link_angles(q), [&q[self.elastic_range(0)], &q[self.elastic_range(1)]]);
        let bodies = self.bodies();
        let positions = pose.slices.iter().flatten().map(|f| f.p).chain([pose.elbow, pose.tool]);
        let g = self.design.gravity;
        let mut potential: f64 = bodies
            .iter()
            .zip(positions)
            .map(|(&(m, _), p)| -m * (g[0] * p[0] + g[1] * p[1] + g[2] * p[2]))
            .sum();
        for (i, d) in self.design.drives.iter().enumerate() {
            potential += 0.5 * d.stiffness * (q[i] / d.gear_ratio - q[3 + i]).powi(2);
        }
        for link in 0..2 {
            let qe = DVector::from_column_slice(&q[self.elastic_range(link)]);
            potential += 0.5 * qe.dot(&(&self.stiffness[link] * &qe));
        }
        Ok(Energy { kinetic, potential })
    }

    /// Link-side state at rest under gravity for fixed motor angles `q_m`:
    /// solves `g_L(q) = 0`, `g_e(q) = 0` by Newton iteration.
    pub fn static_equilibrium(&self, q_m: &[f64; 3]) -> Result<Vec<f64>> {
        let n = self.dof();
        let mut q = vec![0.0; n];
        q[..3].copy_from_slice(q_m);
        for i in 0..3 {
            q[3 + i] = q_m[i] / self.design.drives[i].gear_ratio;
        }
        let zero = vec![0.0; n];
        let residual = |q: &[f64]| -> Result<DVector<f64>> {
            let g = self.eom(q, &zero)?.potential_forces;
            Ok(g.rows(3, n - 3).into_owned())
        };
        for _ in 0..50 {
            let r = residual(&q)?;
            let mut jac = DMatrix::zeros(n - 3, n - 3);
            for j in 0..n - 3 {
                let h = 1e-7 * q[3 + j].abs().max(1e-3);
                let mut qp = q.clone();
                qp[3 + j] += h;
                let rp = residual(&qp)?;
                jac.set_column(j, &((rp - &r) / h));
            }
            let dx = jac.lu().solve(&(-&r)).ok_or(Error::SingularMassMatrix)?;
            for j in 0..n - 3 {
                q[3 + j] += dx[j];
            }
            if dx.amax() < 1e-13 {
                return Ok(q);
            }
        }
        Err(Error::Integration { t: 0.0, reason: "static equilibrium did not converge".into() })
    }

    /// Slowest natural period (s) of the link-side subsystem with locked
    /// motors and without gravity stiffening, at the configuration `q`.
    pub fn slowest_period(&self, q: &[f64]) -> Result<f64> {
        let n = self.dof();
        let eom = self.eom(q, &vec![0.0; n])?;
        let nc = n - 3;
        let m = eom.mass.view((3, 3), (nc, nc)).into_owned();
        let mut k = DMatrix::zeros(nc, nc);
        for (i, d) in self.design.drives.iter().enumerate() {
            k[(i, i)] = d.stiffness;
        }
        for link in 0..2 {
            let r = self.elastic_range(link);
            k.view_mut((r.start - 3, r.start - 3), (r.len(), r.len())).copy_from(&self.stiffness[link]);
        }
        let lambda = generalized_eigenvalues(&k, &m)?;
        let w = lambda[0].max(0.0).sqrt();
        if w > 0.0 {
            Ok(2.0 * std::f64::consts::PI / w)
        } else {
            Err(Error::SingularMassMatrix)
        }
    }
}

fn world_inertia(r: &Mat3<f64>, diag: &[f64; 3]) -> Mat3<f64> {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| r[i][k] * diag[k] * r[j][k]).sum();
        }
    }
    out
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
