//! Plane-stress state at a material point of a thin-walled link and its
//! projection onto cutting planes.

use serde::Serialize;

use crate::beam::{CrossSection, Curvature, Material};
use crate::error::{Error, Result};

/// A point on the wall midline of a square tube at axial station `xi`.
///
/// `tangent` is the unit wall direction in the `(y, z)` plane, oriented
/// counterclockwise around the section (from +y towards +z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaterialPoint {
    pub xi: f64,
    pub y: f64,
    pub z: f64,
    pub tangent: [f64; 2],
}

const MIDLINE_TOL: f64 = 1e-9;

impl MaterialPoint {
    /// Point `(y, z)` on the wall midline of `section`; the tangent follows the face it lies on.
    pub fn on_section(section: &CrossSection, xi: f64, y: f64, z: f64) -> Result<Self> {
        let h = 0.5 * (section.edge - section.thickness);
        let tol = MIDLINE_TOL * section.edge;
        let within = |c: f64| c.abs() <= h + tol;
        if !(within(y) && within(z)) {
            return Err(Error::invalid(format!("point ({y}, {z}) lies outside the wall midline")));
        }
        let tangent = if (y - h).abs() <= tol {
            [0.0, 1.0]
        } else if (z - h).abs() <= tol {
            [-1.0, 0.0]
        } else if (y + h).abs() <= tol {
            [0.0, -1.0]
        } else if (z + h).abs() <= tol {
            [1.0, 0.0]
        } else {
            return Err(Error::invalid(format!("point ({y}, {z}) is not on the wall midline")));
        };
        Ok(Self { xi, y, z, tangent })
    }

    /// Mid-wall point of the top face (`+y`), where bending in `v` is largest.
    pub fn top_face(section: &CrossSection, xi: f64) -> Self {
        let h = 0.5 * (section.edge - section.thickness);
        Self { xi, y: h, z: 0.0, tangent: [0.0, 1.0] }
    }

    /// Arbitrary point with an explicit wall direction (normalized here).
    pub fn with_tangent(xi: f64, y: f64, z: f64, tangent: [f64; 2]) -> Result<Self> {
        let n = tangent[0].hypot(tangent[1]);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::invalid("tangent must be a non-zero finite vector"));
        }
        Ok(Self { xi, y, z, tangent: [tangent[0] / n, tangent[1] / n] })
    }
}

/// Sampled normal and in-plane shear stress at one material point.
/// `σ_yy` is zero (free surface) and is not stored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StressHistory {
    pub time: Vec<f64>,
    pub sigma_xx: Vec<f64>,
    pub sigma_xy: Vec<f64>,
}

impl StressHistory {
    pub fn new(time: Vec<f64>, sigma_xx: Vec<f64>, sigma_xy: Vec<f64>) -> Result<Self> {
        if sigma_xx.len() != time.len() {
            return Err(Error::DimensionMismatch { expected: time.len(), got: sigma_xx.len() });
        }
        if sigma_xy.len() != time.len() {
            return Err(Error::DimensionMismatch { expected: time.len(), got: sigma_xy.len() });
        }
        if sigma_xx.iter().chain(&sigma_xy).chain(&time).any(|x| !x.is_finite()) {
            return Err(Error::invalid("stress history contains non-finite values"));
        }
        Ok(Self { time, sigma_xx, sigma_xy })
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Every stress component multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            time: self.time.clone(),
            sigma_xx: self.sigma_xx.iter().map(|s| s * factor).collect(),
            sigma_xy: self.sigma_xy.iter().map(|s| s * factor).collect(),
        }
    }

    pub fn max_abs_sigma_xx(&self) -> f64 {
        self.sigma_xx.iter().fold(0.0, |m, s| m.max(s.abs()))
    }
}

/// Stress at `point` for a single curvature sample.
///
/// `σ_xx = E (-v'' y - w'' z)`; the Saint-Venant shear `(-G ϑ' z, G ϑ' y)`
/// is projected onto the wall tangent, the wall-normal part vanishes at
/// the free surface.
pub fn stress_from_curvature(k: &Curvature, point: &MaterialPoint, material: &Material) -> (f64, f64) {
    let e = material.youngs_modulus;
    let g = material.shear_modulus();
    let sxx = e * (-k.v * point.y - k.w * point.z);
    let raw = [-g * k.twist * point.z, g * k.twist * point.y];
    let sxy = raw[0] * point.tangent[0] + raw[1] * point.tangent[1];
    (sxx, sxy)
}

pub fn stresses_from_curvature(
    time: &[f64],
    curvature: &[Curvature],
    point: &MaterialPoint,
    material: &Material,
) -> Result<StressHistory> {
    if curvature.len() != time.len() {
        return Err(Error::DimensionMismatch { expected: time.len(), got: curvature.len() });
    }
    let (sxx, sxy) = curvature.iter().map(|k| stress_from_curvature(k, point, material)).unzip();
    StressHistory::new(time.to_vec(), sxx, sxy)
}

/// Normal and shear component `(σ_nn, σ_nm)` of the stress vector on the
/// cutting plane rotated by `phi`.
pub fn cutting_plane_stress(sxx: f64, syy: f64, sxy: f64, phi: f64) -> (f64, f64) {
    let (s2, c2) = (2.0 * phi).sin_cos();
    let mean = 0.5 * (sxx + syy);
    let half_diff = 0.5 * (sxx - syy);
    (mean + half_diff * c2 + sxy * s2, -half_diff * s2 + sxy * c2)
}

/// Shear stress history `τ_φ(t)` on the plane at angle `phi` (with `σ_yy = 0`).
pub fn tau_phi(history: &StressHistory, phi: f64) -> Vec<f64> {
    let (s2, c2) = (2.0 * phi).sin_cos();
    history
        .sigma_xx
        .iter()
        .zip(&history.sigma_xy)
        .map(|(&sxx, &sxy)| -0.5 * sxx * s2 + sxy * c2)
        .collect()
}

/// Tresca equivalent stress `2 τ_φ(t)`.
pub fn tresca_history(history: &StressHistory, phi: f64) -> Vec<f64> {
    tau_phi(history, phi).into_iter().map(|t| 2.0 * t).collect()
}
