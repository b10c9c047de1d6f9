//! Euler–Bernoulli beam discretized with the Ritz method.
//!
//! Each elastic link is a clamped-free beam along its local x axis. Lateral
//! deflections `v` (along y) and `w` (along z) and the torsion angle `ϑ` are
//! expanded in fixed shape functions times elastic coordinates. Elastic
//! coordinates are ordered `(q_v, q_w, q_ϑ)` throughout the crate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Closed square tube: outer edge length `a`, wall thickness `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossSection {
    pub edge: f64,
    pub thickness: f64,
    /// Area `A_B` (m^2).
    pub area: f64,
    /// Second moment about y (m^4).
    pub i_y: f64,
    /// Second moment about z (m^4).
    pub i_z: f64,
    /// Torsion constant `I_D` (m^4).
    pub i_d: f64,
}

/// Section properties of a square tube. `I_D` uses the thin-walled closed
/// section formula `t (a - t)^3`.
pub fn section_properties(edge: f64, thickness: f64) -> Result<CrossSection> {
    if !(edge.is_finite() && thickness.is_finite() && thickness > 0.0 && 2.0 * thickness < edge) {
        return Err(Error::InvalidSection { edge, thickness });
    }
    let inner = edge - 2.0 * thickness;
    let area = edge * edge - inner * inner;
    let i = (edge.powi(4) - inner.powi(4)) / 12.0;
    let i_d = thickness * (edge - thickness).powi(3);
    Ok(CrossSection { edge, thickness, area, i_y: i, i_z: i, i_d })
}

/// Isotropic linear-elastic material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    /// Density (kg/m^3).
    pub density: f64,
    /// Young's modulus (Pa).
    pub youngs_modulus: f64,
    /// Poisson ratio.
    pub poisson_ratio: f64,
}

impl Material {
    pub fn new(density: f64, youngs_modulus: f64, poisson_ratio: f64) -> Result<Self> {
        let m = Self { density, youngs_modulus, poisson_ratio };
        m.validate()?;
        Ok(m)
    }

    pub fn steel() -> Self {
        Self { density: 7850.0, youngs_modulus: 210e9, poisson_ratio: 0.3 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(Error::invalid("density must be positive"));
        }
        if !(self.youngs_modulus > 0.0 && self.youngs_modulus.is_finite()) {
            return Err(Error::invalid("Young's modulus must be positive"));
        }
        if !(0.0..0.5).contains(&self.poisson_ratio) {
            return Err(Error::invalid("Poisson ratio must lie in [0, 0.5)"));
        }
        Ok(())
    }

    /// `G = E / (2 (1 + ν))`.
    pub fn shear_modulus(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }
}

/// A uniform elastic link.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSpec {
    pub length: f64,
    pub section: CrossSection,
    pub material: Material,
    pub n_v: usize,
    pub n_w: usize,
    pub n_theta: usize,
}

impl BeamSpec {
    pub fn new(length: f64, section: CrossSection, material: Material, n_v: usize, n_w: usize, n_theta: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid("beam length must be positive"));
        }
        if n_v == 0 || n_w == 0 || n_theta == 0 {
            return Err(Error::invalid("each deflection direction needs at least one shape function"));
        }
        material.validate()?;
        Ok(Self { length, section, material, n_v, n_w, n_theta })
    }

    /// Number of elastic coordinates.
    pub fn n_elastic(&self) -> usize {
        self.n_v + self.n_w + self.n_theta
    }

    pub fn mass(&self) -> f64 {
        self.material.density * self.section.area * self.length
    }

    pub fn basis(&self) -> ShapeBasis {
        ShapeBasis::new(self)
    }
}

/// Value, first and second derivative of one shape function at a station.
pub type ShapeValue = [f64; 3];

/// A set of Ritz shape functions for one beam.
pub trait RitzBasis {
    fn length(&self) -> f64;
    fn n_bending(&self) -> usize;
    fn n_torsion(&self) -> usize;
    /// Bending shape `k` (shared by `v` and `w`) at `xi`.
    fn bending(&self, k: usize, xi: f64) -> ShapeValue;
    /// Torsion shape `k` at `xi`.
    fn torsion(&self, k: usize, xi: f64) -> ShapeValue;
}

/// Clamped-free eigenfunctions: Euler–Bernoulli bending modes and the
/// quarter-wave sine modes of Saint-Venant torsion.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeBasis {
    length: f64,
    beta: Vec<f64>,
    sigma: Vec<f64>,
    gamma: Vec<f64>,
}

/// Roots of `cos x cosh x = -1`, the clamped-free frequency equation.
pub fn clamped_free_roots(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            let mut x = if k == 1 { 1.875 } else { (2.0 * k as f64 - 1.0) * PI / 2.0 };
            for _ in 0..50 {
                // f = cos x + sech x, scaled form of cos x cosh x + 1 = 0
                let f = x.cos() + 1.0 / x.cosh();
                let df = -x.sin() - x.tanh() / x.cosh();
                let dx = f / df;
                x -= dx;
                if dx.abs() < 1e-15 * x {
                    break;
                }
            }
            x
        })
        .collect()
}

impl ShapeBasis {
    pub fn new(spec: &BeamSpec) -> Self {
        Self::with_counts(spec.length, spec.n_v.max(spec.n_w), spec.n_theta)
    }

    pub fn with_counts(length: f64, n_bending: usize, n_torsion: usize) -> Self {
        let roots = clamped_free_roots(n_bending);
        let beta = roots.iter().map(|r| r / length).collect();
        let sigma = roots
            .iter()
            .map(|&b| (b.cosh() + b.cos()) / (b.sinh() + b.sin()))
            .collect();
        let gamma = (1..=n_torsion).map(|k| (2.0 * k as f64 - 1.0) * PI / (2.0 * length)).collect();
        Self { length, beta, sigma, gamma }
    }

    /// Wavenumber `β_k` of bending mode `k` (1/m).
    pub fn beta(&self, k: usize) -> f64 {
        self.beta[k]
    }
}

impl RitzBasis for ShapeBasis {
    fn length(&self) -> f64 {
        self.length
    }

    fn n_bending(&self) -> usize {
        self.beta.len()
    }

    fn n_torsion(&self) -> usize {
        self.gamma.len()
    }

    fn bending(&self, k: usize, xi: f64) -> ShapeValue {
        let b = self.beta[k];
        let s = self.sigma[k];
        let bl = b * self.length;
        let x = b * xi;
        // cosh x - s sinh x and sinh x - s cosh x without cancellation:
        // e^x (1 - s) is rewritten with 1 - s = (sin bl - cos bl - e^-bl) / (sinh bl + sin bl)
        let em = (-x).exp();
        let denom = 0.5 * ((bl - x).exp() - (-bl - x).exp()) + bl.sin() * em;
        let grow = (bl.sin() - bl.cos() - (-bl).exp()) / denom;
        let decay = em * (1.0 + s);
        let ch = 0.5 * (grow + decay);
        let sh = 0.5 * (grow - decay);
        let (sx, cx) = x.sin_cos();
        [ch - cx + s * sx, b * (sh + sx + s * cx), b * b * (ch + cx - s * sx)]
    }

    fn torsion(&self, k: usize, xi: f64) -> ShapeValue {
        let g = self.gamma[k];
        let (s, c) = (g * xi).sin_cos();
        [s, g * c, -g * g * s]
    }
}

/// Monomial basis `ξ^(k+2)` for bending and `ξ^(k+1)` for torsion. Used as
/// an independent check on the assembly routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialBasis {
    pub length: f64,
    pub n_bending: usize,
    pub n_torsion: usize,
}

impl RitzBasis for PolynomialBasis {
    fn length(&self) -> f64 {
        self.length
    }
    fn n_bending(&self) -> usize {
        self.n_bending
    }
    fn n_torsion(&self) -> usize {
        self.n_torsion
    }
    fn bending(&self, k: usize, xi: f64) -> ShapeValue {
        let p = (k + 2) as i32;
        let pf = p as f64;
        [xi.powi(p), pf * xi.powi(p - 1), pf * (pf - 1.0) * xi.powi(p - 2)]
    }
    fn torsion(&self, k: usize, xi: f64) -> ShapeValue {
        let p = (k + 1) as i32;
        let pf = p as f64;
        let d2 = if p >= 2 { pf * (pf - 1.0) * xi.powi(p - 2) } else { 0.0 };
        [xi.powi(p), pf * xi.powi(p - 1), d2]
    }
}

/// Quadrature order used for stiffness and mass integrals.
const ASSEMBLY_POINTS: usize = 64;

/// Elastic stiffness `K_el`, block diagonal in `(v, w, ϑ)`.
///
/// Bending blocks are `∫ EI v'' v''ᵀ dξ`; the torsion block is
/// `∫ G I_D ϑ' ϑ'ᵀ dξ` (Saint-Venant torsion energy is quadratic in the
/// twist rate).
pub fn stiffness_matrix(spec: &BeamSpec) -> DMatrix<f64> {
    stiffness_matrix_with(spec, &spec.basis())
}

pub fn stiffness_matrix_with(spec: &BeamSpec, basis: &impl RitzBasis) -> DMatrix<f64> {
    let n = spec.n_elastic();
    let (nv, nw) = (spec.n_v, spec.n_w);
    let e = spec.material.youngs_modulus;
    let g = spec.material.shear_modulus();
    let ei_z = e * spec.section.i_z;
    let ei_y = e * spec.section.i_y;
    let gi_d = g * spec.section.i_d;
    let quad = GaussLegendre::new(ASSEMBLY_POINTS, 0.0, spec.length);
    let mut k = DMatrix::zeros(n, n);
    for (&xi, &w) in quad.nodes.iter().zip(&quad.weights) {
        let bend: Vec<f64> = (0..nv.max(nw)).map(|i| basis.bending(i, xi)[2]).collect();
        let tors: Vec<f64> = (0..spec.n_theta).map(|i| basis.torsion(i, xi)[1]).collect();
        for i in 0..nv {
            for j in 0..nv {
                k[(i, j)] += w * ei_z * bend[i] * bend[j];
            }
        }
        for i in 0..nw {
            for j in 0..nw {
                k[(nv + i, nv + j)] += w * ei_y * bend[i] * bend[j];
            }
        }
        let o = nv + nw;
        for i in 0..spec.n_theta {
            for j in 0..spec.n_theta {
                k[(o + i, o + j)] += w * gi_d * tors[i] * tors[j];
            }
        }
    }
    k.fill_upper_triangle_with_lower_triangle();
    k
}

/// Mass matrix of the clamped beam alone (no rigid-body motion), ordered
/// like [`stiffness_matrix`]: `∫ ρA v vᵀ`, `∫ ρA w wᵀ`, `∫ ρ I_D ϑ ϑᵀ`.
pub fn mass_matrix(spec: &BeamSpec) -> DMatrix<f64> {
    mass_matrix_with(spec, &spec.basis())
}

pub fn mass_matrix_with(spec: &BeamSpec, basis: &impl RitzBasis) -> DMatrix<f64> {
    let n = spec.n_elastic();
    let (nv, nw) = (spec.n_v, spec.n_w);
    let (dm, dj) = unit_inertia(spec);
    let quad = GaussLegendre::new(ASSEMBLY_POINTS, 0.0, spec.length);
    let mut m = DMatrix::zeros(n, n);
    for (&xi, &w) in quad.nodes.iter().zip(&quad.weights) {
        let bend: Vec<f64> = (0..nv.max(nw)).map(|i| basis.bending(i, xi)[0]).collect();
        let tors: Vec<f64> = (0..spec.n_theta).map(|i| basis.torsion(i, xi)[0]).collect();
        for i in 0..nv {
            for j in 0..nv {
                m[(i, j)] += w * dm * bend[i] * bend[j];
            }
        }
        for i in 0..nw {
            for j in 0..nw {
                m[(nv + i, nv + j)] += w * dm * bend[i] * bend[j];
            }
        }
        let o = nv + nw;
        for i in 0..spec.n_theta {
            for j in 0..spec.n_theta {
                m[(o + i, o + j)] += w * dj[0] * tors[i] * tors[j];
            }
        }
    }
    m.fill_upper_triangle_with_lower_triangle();
    m
}

fn unit_inertia(spec: &BeamSpec) -> (f64, [f64; 3]) {
    let rho = spec.material.density;
    let s = &spec.section;
    (rho * s.area, [rho * s.i_d, rho * s.i_y, rho * s.i_z])
}

/// Mass per unit length `ρ A_B` and rotary inertia per unit length
/// `diag(ρ I_D, ρ I_y, ρ I_z)` at station `xi`.
pub fn element_inertia(spec: &BeamSpec, xi: f64) -> Result<(f64, [f64; 3])> {
    if !(0.0..=spec.length).contains(&xi) {
        return Err(Error::StationOutOfRange { xi, length: spec.length });
    }
    Ok(unit_inertia(spec))
}

/// Twist rate and bending curvatures `κ = (ϑ', v'', w'')` at one station.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Curvature {
    pub twist: f64,
    pub v: f64,
    pub w: f64,
}

impl Curvature {
    pub fn scale(&self, s: f64) -> Self {
        Self { twist: self.twist * s, v: self.v * s, w: self.w * s }
    }
}

/// Linear map from elastic coordinates to curvature at a fixed station.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureOperator {
    twist: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
    n_v: usize,
    n_w: usize,
}

impl CurvatureOperator {
    pub fn new(spec: &BeamSpec, basis: &impl RitzBasis, xi: f64) -> Result<Self> {
        if !(0.0..=spec.length).contains(&xi) {
            return Err(Error::StationOutOfRange { xi, length: spec.length });
        }
        Ok(Self {
            twist: (0..spec.n_theta).map(|k| basis.torsion(k, xi)[1]).collect(),
            v: (0..spec.n_v).map(|k| basis.bending(k, xi)[2]).collect(),
            w: (0..spec.n_w).map(|k| basis.bending(k, xi)[2]).collect(),
            n_v: spec.n_v,
            n_w: spec.n_w,
        })
    }

    pub fn n_elastic(&self) -> usize {
        self.n_v + self.n_w + self.twist.len()
    }

    pub fn apply(&self, q_e: &[f64]) -> Result<Curvature> {
        if q_e.len() != self.n_elastic() {
            return Err(Error::DimensionMismatch { expected: self.n_elastic(), got: q_e.len() });
        }
        let (qv, rest) = q_e.split_at(self.n_v);
        let (qw, qt) = rest.split_at(self.n_w);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        Ok(Curvature { twist: dot(&self.twist, qt), v: dot(&self.v, qv), w: dot(&self.w, qw) })
    }
}

/// Curvature at station `xi` for elastic coordinates `q_e = (q_v, q_w, q_ϑ)`.
pub fn curvature_at(spec: &BeamSpec, xi: f64, q_e: &[f64]) -> Result<Curvature> {
    CurvatureOperator::new(spec, &spec.basis(), xi)?.apply(q_e)
}

/// Generalized eigenvalues of `K x = λ M x` in ascending order, for
/// symmetric `K` and symmetric positive definite `M`.
pub fn generalized_eigenvalues(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = m.clone().cholesky().ok_or(Error::SingularMassMatrix)?;
    let l = chol.l();
    let l_inv = l.clone().try_inverse().ok_or(Error::SingularMassMatrix)?;
    let a = &l_inv * k * l_inv.transpose();
    let a = 0.5 * (&a + a.transpose());
    let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

/// Natural bending frequencies (rad/s) of the clamped-free beam in the `v` direction.
pub fn bending_frequencies(spec: &BeamSpec) -> Result<Vec<f64>> {
    let k = stiffness_matrix(spec);
    let m = mass_matrix(spec);
    let idx: Vec<usize> = (0..spec.n_v).collect();
    let kv = k.select_rows(&idx).select_columns(&idx);
    let mv = m.select_rows(&idx).select_columns(&idx);
    Ok(generalized_eigenvalues(&kv, &mv)?.into_iter().map(|l| l.max(0.0).sqrt()).collect())
}

/// Restoring generalized force `Q_el = -K_el q_e`.
pub fn restoring_force(k_el: &DMatrix<f64>, q_e: &[f64]) -> DVector<f64> {
    -(k_el * DVector::from_column_slice(q_e))
}
