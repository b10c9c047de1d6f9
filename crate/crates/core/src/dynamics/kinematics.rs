//! Forward kinematics of the arm, generic over the scalar type so the same
//! code yields positions (`f64`) and exact first/second directional
//! derivatives (`Jet`) for the Jacobians and bias accelerations.

use std::ops::{Add, Mul, Neg, Sub};

pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn cst(x: f64) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn scale(self, k: f64) -> Self;
}

impl Scalar for f64 {
    fn cst(x: f64) -> Self {
        x
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

/// Second-order Taylor coefficients along one direction: `f(x + εd) = v + d ε + dd ε²/2 + …`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: f64,
    pub dd: f64,
}

impl Jet {
    pub fn new(v: f64, d: f64) -> Self {
        Self { v, d, dd: 0.0 }
    }
}

impl Add for Jet {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, d: self.d + o.d, dd: self.dd + o.dd }
    }
}

impl Sub for Jet {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { v: self.v - o.v, d: self.d - o.d, dd: self.dd - o.dd }
    }
}

impl Mul for Jet {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self { v: self.v * o.v, d: self.d * o.v + self.v * o.d, dd: self.dd * o.v + 2.0 * self.d * o.d + self.v * o.dd }
    }
}

impl Neg for Jet {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, d: -self.d, dd: -self.dd }
    }
}

impl Scalar for Jet {
    fn cst(x: f64) -> Self {
        Self { v: x, d: 0.0, dd: 0.0 }
    }
    fn sin_cos(self) -> (Self, Self) {
        let (s, c) = self.v.sin_cos();
        let d2 = self.d * self.d;
        (
            Self { v: s, d: c * self.d, dd: -s * d2 + c * self.dd },
            Self { v: c, d: -s * self.d, dd: -c * d2 - s * self.dd },
        )
    }
    fn scale(self, k: f64) -> Self {
        Self { v: self.v * k, d: self.d * k, dd: self.dd * k }
    }
}

/// Value plus first derivatives along `N` directions at once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<const N: usize> {
    pub v: f64,
    pub d: [f64; N],
}

impl<const N: usize> Dual<N> {
    /// Variable `v` seeded with a unit derivative in direction `k` (none if `k >= N`).
    pub fn seeded(v: f64, k: usize) -> Self {
        let mut d = [0.0; N];
        if k < N {
            d[k] = 1.0;
        }
        Self { v, d }
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for (a, b) in self.d.iter_mut().zip(&o.d) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        self.v -= o.v;
        for (a, b) in self.d.iter_mut().zip(&o.d) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut d = [0.0; N];
        for k in 0..N {
            d[k] = self.d[k] * o.v + self.v * o.d[k];
        }
        Self { v: self.v * o.v, d }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, d: self.d.map(|x| -x) }
    }
}

impl<const N: usize> Scalar for Dual<N> {
    fn cst(x: f64) -> Self {
        Self { v: x, d: [0.0; N] }
    }
    fn sin_cos(self) -> (Self, Self) {
        let (s, c) = self.v.sin_cos();
        (Self { v: s, d: self.d.map(|x| c * x) }, Self { v: c, d: self.d.map(|x| -s * x) })
    }
    fn scale(self, k: f64) -> Self {
        Self { v: self.v * k, d: self.d.map(|x| x * k) }
    }
}

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];

pub fn mat_mul<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut c = [[T::cst(0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    c
}

pub fn mat_vec<T: Scalar>(a: &Mat3<T>, x: &Vec3<T>) -> Vec3<T> {
    [
        a[0][0] * x[0] + a[0][1] * x[1] + a[0][2] * x[2],
        a[1][0] * x[0] + a[1][1] * x[1] + a[1][2] * x[2],
        a[2][0] * x[0] + a[2][1] * x[1] + a[2][2] * x[2],
    ]
}

fn add3<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn rot_x<T: Scalar>(a: T) -> Mat3<T> {
    let (s, c) = a.sin_cos();
    let (o, l) = (T::cst(0.0), T::cst(1.0));
    [[l, o, o], [o, c, -s], [o, s, c]]
}

pub fn rot_y<T: Scalar>(a: T) -> Mat3<T> {
    let (s, c) = a.sin_cos();
    let (o, l) = (T::cst(0.0), T::cst(1.0));
    [[c, o, s], [o, l, o], [-s, o, c]]
}

pub fn rot_z<T: Scalar>(a: T) -> Mat3<T> {
    let (s, c) = a.sin_cos();
    let (o, l) = (T::cst(0.0), T::cst(1.0));
    [[c, -s, o], [s, c, o], [o, o, l]]
}

/// Position and orientation (body to world) of a rigid element.
#[derive(Debug, Clone, Copy)]
pub struct Frame<T> {
    pub p: Vec3<T>,
    pub r: Mat3<T>,
}

/// Shape function samples of one link at its slice stations and its tip.
#[derive(Debug, Clone)]
pub struct LinkShapes {
    pub length: f64,
    pub n_v: usize,
    pub n_w: usize,
    pub n_theta: usize,
    /// Axial stations of the slices.
    pub stations: Vec<f64>,
    /// Per station: bending `(φ_k, φ_k')` for every bending shape.
    pub bending: Vec<Vec<[f64; 2]>>,
    /// Per station: torsion shape values `ψ_k`.
    pub torsion: Vec<Vec<f64>>,
    pub tip_bending: Vec<[f64; 2]>,
    pub tip_torsion: Vec<f64>,
}

impl LinkShapes {
    pub fn n_elastic(&self) -> usize {
        self.n_v + self.n_w + self.n_theta
    }

    /// Frame of the cross-section described by the given samples, relative to the link root.
    fn section<T: Scalar>(&self, xi: f64, bend: &[[f64; 2]], tors: &[f64], qe: &[T]) -> (Vec3<T>, Mat3<T>) {
        let (qv, rest) = qe.split_at(self.n_v);
        let (qw, qt) = rest.split_at(self.n_w);
        let zero = T::cst(0.0);
        let (mut v, mut dv, mut w, mut dw, mut th) = (zero, zero, zero, zero, zero);
        for (k, q) in qv.iter().enumerate() {
            v = v + q.scale(bend[k][0]);
            dv = dv + q.scale(bend[k][1]);
        }
        for (k, q) in qw.iter().enumerate() {
            w = w + q.scale(bend[k][0]);
            dw = dw + q.scale(bend[k][1]);
        }
        for (k, q) in qt.iter().enumerate() {
            th = th + q.scale(tors[k]);
        }
        let r = mat_mul(&mat_mul(&rot_z(dv), &rot_y(-dw)), &rot_x(th));
        ([T::cst(xi), v, w], r)
    }
}

/// Geometry needed to place every mass element of the arm.
#[derive(Debug, Clone)]
pub struct Chain {
    pub links: [LinkShapes; 2],
}

/// Frames of all mass elements in a fixed order: slices of link 1, slices
/// of link 2, the elbow, the end effector.
pub struct Pose<T> {
    pub slices: [Vec<Frame<T>>; 2],
    pub elbow: Vec3<T>,
    pub tool: Vec3<T>,
}

fn const_mat<T: Scalar>(m: [[f64; 3]; 3]) -> Mat3<T> {
    m.map(|row| row.map(T::cst))
}

/// Fixed turn that makes the link-frame `y` axis vertical after the yaw joint.
const UPRIGHT: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]];

impl Chain {
    /// Evaluates the pose for link-side joint angles `ql` and elastic coordinates of both links.
    pub fn pose<T: Scalar>(&self, ql: &[T; 3], qe: [&[T]; 2]) -> Pose<T> {
        let base = mat_mul(&mat_mul(&rot_z(ql[0]), &const_mat(UPRIGHT)), &rot_z(ql[1]));
        let origin = [T::cst(0.0); 3];
        let (slices1, tip_p, tip_r) = self.link(0, origin, base, qe[0]);
        let elbow_r = mat_mul(&tip_r, &rot_z(ql[2]));
        let (slices2, tool, _) = self.link(1, tip_p, elbow_r, qe[1]);
        Pose { slices: [slices1, slices2], elbow: tip_p, tool }
    }

    fn link<T: Scalar>(&self, k: usize, p0: Vec3<T>, r0: Mat3<T>, qe: &[T]) -> (Vec<Frame<T>>, Vec3<T>, Mat3<T>) {
        let shapes = &self.links[k];
        let place = |xi: f64, bend: &[[f64; 2]], tors: &[f64]| {
            let (d, r) = shapes.section(xi, bend, tors, qe);
            Frame { p: add3(&p0, &mat_vec(&r0, &d)), r: mat_mul(&r0, &r) }
        };
        let slices = shapes
            .stations
            .iter()
            .enumerate()
            .map(|(s, &xi)| place(xi, &shapes.bending[s], &shapes.torsion[s]))
            .collect();
        let tip = place(shapes.length, &shapes.tip_bending, &shapes.tip_torsion);
        (slices, tip.p, tip.r)
    }

    /// End-effector position only.
    pub fn tool_position(&self, ql: &[f64; 3], qe: [&[f64]; 2]) -> [f64; 3] {
        let base = mat_mul(&mat_mul(&rot_z(ql[0]), &UPRIGHT), &rot_z(ql[1]));
        let s1 = &self.links[0];
        let (d1, r1) = s1.section(s1.length, &s1.tip_bending, &s1.tip_torsion, qe[0]);
        let p1 = mat_vec(&base, &d1);
        let r_elbow = mat_mul(&mat_mul(&base, &r1), &rot_z(ql[2]));
        let s2 = &self.links[1];
        let (d2, _) = s2.section(s2.length, &s2.tip_bending, &s2.tip_torsion, qe[1]);
        add3(&p1, &mat_vec(&r_elbow, &d2))
    }
}

/// `vee` of the skew-symmetric part of `m`.
pub fn vee_skew(m: &Mat3<f64>) -> [f64; 3] {
    [0.5 * (m[2][1] - m[1][2]), 0.5 * (m[0][2] - m[2][0]), 0.5 * (m[1][0] - m[0][1])]
}

/// `a bᵀ` for the value/derivative parts of a jet matrix.
pub fn mul_transpose(a: &Mat3<f64>, b: &Mat3<f64>) -> Mat3<f64> {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[j][0] + a[i][1] * b[j][1] + a[i][2] * b[j][2];
        }
    }
    c
}

pub fn part(m: &Mat3<Jet>, f: fn(&Jet) -> f64) -> Mat3<f64> {
    m.map(|row| row.map(|x| f(&x)))
}
