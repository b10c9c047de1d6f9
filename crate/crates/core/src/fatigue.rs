//! Damage and lifetime estimation: Haigh diagram, synthetic Wöhler line,
//! Palmgren–Miner accumulation and the critical cutting plane search.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::par;
use crate::rainflow::{bin_cycles, count_cycles_with, extract_extrema, Binning, HalfCycles, RainflowMatrix};
use crate::stress::{tresca_history, StressHistory};

/// Low-cycle anchor of the Wöhler line (cycles at `σ_a = R_e`).
pub const N_LCF: f64 = 2e4;
/// High-cycle anchor of the Wöhler line (cycles at the fatigue strength).
pub const N_HCF: f64 = 2e6;

pub const SECONDS_PER_HOUR: f64 = 3600.0;

/// Fatigue data of the link material. Deserialized values are normalized
/// and validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MaterialFile")]
pub struct FatigueMaterial {
    /// Yield strength `R_e` (Pa).
    pub yield_strength: f64,
    /// Fully reversed fatigue strength `σ_w` (Pa).
    pub fatigue_strength: f64,
    /// Haigh polyline `(σ_m, allowable σ_a)` from `(0, σ_w)` to `(R_e, 0)`.
    /// Empty means the straight line between those endpoints.
    pub haigh: Vec<[f64; 2]>,
    pub n_lcf: f64,
    pub n_hcf: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialFile {
    yield_strength: f64,
    fatigue_strength: f64,
    #[serde(default)]
    haigh: Vec<[f64; 2]>,
    #[serde(default = "default_n_lcf")]
    n_lcf: f64,
    #[serde(default = "default_n_hcf")]
    n_hcf: f64,
}

impl TryFrom<MaterialFile> for FatigueMaterial {
    type Error = Error;

    fn try_from(f: MaterialFile) -> Result<Self> {
        let m = Self {
            yield_strength: f.yield_strength,
            fatigue_strength: f.fatigue_strength,
            haigh: f.haigh,
            n_lcf: f.n_lcf,
            n_hcf: f.n_hcf,
        };
        m.normalized()
    }
}

fn default_n_lcf() -> f64 {
    N_LCF
}

fn default_n_hcf() -> f64 {
    N_HCF
}

impl FatigueMaterial {
    /// Material with a straight Haigh line.
    pub fn linear(yield_strength: f64, fatigue_strength: f64) -> Result<Self> {
        Self::with_haigh(yield_strength, fatigue_strength, vec![[0.0, fatigue_strength], [yield_strength, 0.0]])
    }

    pub fn with_haigh(yield_strength: f64, fatigue_strength: f64, haigh: Vec<[f64; 2]>) -> Result<Self> {
        let m = Self { yield_strength, fatigue_strength, haigh, n_lcf: N_LCF, n_hcf: N_HCF };
        m.validate()?;
        Ok(m)
    }

    /// Structural steel with the reduced fatigue strength of a welded link
    /// root, used with the demo arm.
    pub fn demo() -> Self {
        Self::linear(235e6, 20e6).expect("demo material is valid")
    }

    /// Fills in the default polyline and checks all invariants.
    pub fn normalized(mut self) -> Result<Self> {
        if self.haigh.is_empty() {
            self.haigh = vec![[0.0, self.fatigue_strength], [self.yield_strength, 0.0]];
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let (re, sw) = (self.yield_strength, self.fatigue_strength);
        if !(sw > 0.0 && re > sw && re.is_finite()) {
            return Err(Error::DegenerateMaterial(format!("need 0 < σ_w ({sw}) < R_e ({re})")));
        }
        if !(self.n_lcf > 0.0 && self.n_hcf > self.n_lcf) {
            return Err(Error::DegenerateMaterial("Wöhler anchors must satisfy 0 < N_LCF < N_HCF".into()));
        }
        let h = &self.haigh;
        if h.len() < 2 {
            return Err(Error::DegenerateMaterial("Haigh polyline needs at least two points".into()));
        }
        if h[0] != [0.0, sw] || h[h.len() - 1] != [re, 0.0] {
            return Err(Error::DegenerateMaterial("Haigh polyline must run from (0, σ_w) to (R_e, 0)".into()));
        }
        for w in h.windows(2) {
            if !(w[1][0] > w[0][0]) || w[1][1] > w[0][1] {
                return Err(Error::DegenerateMaterial(
                    "Haigh polyline must have increasing mean and non-increasing amplitude".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Allowable amplitude `σ*_{D,a}` at mean stress `mean` from the Haigh diagram.
///
/// Compressive means use the `σ_m = 0` value; means at or beyond `R_e`
/// return zero (the material yields).
pub fn haigh_fatigue_strength(mat: &FatigueMaterial, mean: f64) -> f64 {
    let m = mean.max(0.0);
    if m >= mat.yield_strength {
        return 0.0;
    }
    for w in mat.haigh.windows(2) {
        let ([x0, y0], [x1, y1]) = (w[0], w[1]);
        if m <= x1 {
            return y0 + (y1 - y0) * (m - x0) / (x1 - x0);
        }
    }
    0.0
}

/// Cycles to failure at amplitude `amplitude` on the synthetic Wöhler line
/// through `(N_LCF, R_e)` and `(N_HCF, σ*_{D,a})`. Amplitudes below the
/// fatigue strength never fail (`f64::INFINITY`).
pub fn woehler_cycles(mat: &FatigueMaterial, amplitude: f64, strength: f64) -> Result<f64> {
    if !(strength > 0.0) {
        return Err(Error::DegenerateMaterial(format!("fatigue strength {strength} must be positive")));
    }
    if !(amplitude >= 0.0) {
        return Err(Error::invalid(format!("amplitude {amplitude} must be non-negative")));
    }
    if amplitude < strength {
        return Ok(f64::INFINITY);
    }
    let re = mat.yield_strength;
    if amplitude >= re {
        return Ok(mat.n_lcf);
    }
    let r = (re / amplitude).ln() / (re / strength).ln();
    Ok(mat.n_lcf * (mat.n_hcf / mat.n_lcf).powf(r))
}

/// Miner quotient `counted / allowed`; zero for infinite life.
pub fn damage_increment(counted: f64, allowed: f64) -> f64 {
    if counted <= 0.0 || allowed.is_infinite() {
        0.0
    } else {
        counted / allowed
    }
}

/// Cycles to failure for a bin center `(mean, amplitude)`.
pub fn allowed_cycles(mat: &FatigueMaterial, mean: f64, amplitude: f64) -> f64 {
    if amplitude <= 0.0 {
        return f64::INFINITY;
    }
    let strength = haigh_fatigue_strength(mat, mean);
    if strength <= 0.0 {
        // mean stress beyond yield: every cycle counts as low-cycle
        return mat.n_lcf;
    }
    woehler_cycles(mat, amplitude, strength).unwrap_or(mat.n_lcf)
}

/// Linear damage sum over all bins of a rainflow matrix, evaluated at the bin centers.
pub fn accumulate(matrix: &RainflowMatrix, mat: &FatigueMaterial) -> f64 {
    matrix
        .bins()
        .iter()
        .filter(|b| b.count > 0.0)
        .fold(0.0, |acc, b| acc + damage_increment(b.count, allowed_cycles(mat, b.mean, b.amplitude)))
}

/// Settings for the rainflow stage of the lifetime estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FatigueSettings {
    /// Number of cutting angles, uniformly spaced over `[0, π]`; the default
    /// 73 gives a 2.5° spacing.
    #[serde(default = "default_angles")]
    pub n_angles: usize,
    #[serde(default)]
    pub binning: Binning,
    /// Reversals smaller than this (Pa) are ignored.
    #[serde(default)]
    pub hysteresis_gate: f64,
    #[serde(default)]
    pub half_cycles: HalfCycles,
}

fn default_angles() -> usize {
    73
}

impl Default for FatigueSettings {
    fn default() -> Self {
        Self { n_angles: default_angles(), binning: Binning::default(), hysteresis_gate: 0.0, half_cycles: HalfCycles::Half }
    }
}

impl FatigueSettings {
    pub fn angles(&self) -> Vec<f64> {
        angle_grid(self.n_angles)
    }
}

/// `n` cutting angles `kπ/(n-1)`, `k = 0..n`, covering `[0, π]`. The
/// plane at π repeats the one at 0, which leaves the maximum unchanged.
pub fn angle_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| k as f64 * PI / (n - 1) as f64).collect(),
    }
}

/// Damage of one scalar equivalent-stress history per task execution.
pub fn scalar_damage(times: &[f64], values: &[f64], mat: &FatigueMaterial, settings: &FatigueSettings) -> Result<f64> {
    let matrix = scalar_matrix(times, values, settings)?;
    Ok(accumulate(&matrix, mat))
}

fn scalar_matrix(times: &[f64], values: &[f64], settings: &FatigueSettings) -> Result<RainflowMatrix> {
    let series = extract_extrema(times, values, settings.hysteresis_gate)?;
    let cycles = count_cycles_with(&series, settings.half_cycles)?;
    bin_cycles(&cycles, &settings.binning)
}

/// Damage on the cutting plane at angle `phi`.
pub fn plane_damage(history: &StressHistory, phi: f64, mat: &FatigueMaterial, settings: &FatigueSettings) -> Result<f64> {
    scalar_damage(&history.time, &tresca_history(history, phi), mat, settings)
}

/// Result of the critical cutting plane search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DamageReport {
    pub angles: Vec<f64>,
    /// Damage per task execution on every plane.
    pub damage: Vec<f64>,
    pub d_max: f64,
    pub critical_angle: f64,
    pub t_task: f64,
    pub finite_life: bool,
    /// `None` encodes an infinite lifetime.
    pub lifetime_s: Option<f64>,
    pub lifetime_h: Option<f64>,
}

impl DamageReport {
    pub fn from_damage(angles: Vec<f64>, damage: Vec<f64>, t_task: f64) -> Self {
        let (k, d_max) = damage
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bk, bd), (k, &d)| if d > bd { (k, d) } else { (bk, bd) });
        let finite_life = d_max > 0.0;
        let lifetime_s = finite_life.then(|| t_task / d_max);
        Self {
            critical_angle: angles.get(k).copied().unwrap_or(0.0),
            angles,
            damage,
            d_max,
            t_task,
            finite_life,
            lifetime_s,
            lifetime_h: lifetime_s.map(|s| s / SECONDS_PER_HOUR),
        }
    }

    /// Lifetime in seconds, `f64::INFINITY` when no damage occurs.
    pub fn lifetime_seconds(&self) -> f64 {
        self.lifetime_s.unwrap_or(f64::INFINITY)
    }

    pub fn lifetime_hours(&self) -> f64 {
        self.lifetime_seconds() / SECONDS_PER_HOUR
    }
}

/// Lifetime of a material point: damage on every plane in `angles`, the
/// worst plane governs, `t_life = t_task / D_max`.
pub fn critical_plane_lifetime(
    history: &StressHistory,
    angles: &[f64],
    mat: &FatigueMaterial,
    t_task: f64,
    settings: &FatigueSettings,
) -> Result<DamageReport> {
    if angles.is_empty() {
        return Err(Error::invalid("at least one cutting angle is required"));
    }
    if !(t_task > 0.0 && t_task.is_finite()) {
        return Err(Error::invalid(format!("task duration {t_task} must be positive")));
    }
    if history.is_empty() {
        return Err(Error::invalid("stress history is empty"));
    }
    mat.validate()?;
    let damage = par::map(angles, |&phi| plane_damage(history, phi, mat, settings))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(DamageReport::from_damage(angles.to_vec(), damage, t_task))
}

/// Sequential reference of [`critical_plane_lifetime`].
pub fn critical_plane_lifetime_sequential(
    history: &StressHistory,
    angles: &[f64],
    mat: &FatigueMaterial,
    t_task: f64,
    settings: &FatigueSettings,
) -> Result<DamageReport> {
    if angles.is_empty() || !(t_task > 0.0) {
        return Err(Error::invalid("need angles and a positive task duration"));
    }
    let damage = par::map_sequential(angles, |&phi| plane_damage(history, phi, mat, settings))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(DamageReport::from_damage(angles.to_vec(), damage, t_task))
}
