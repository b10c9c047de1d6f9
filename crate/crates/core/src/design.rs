//! Wall-thickness design study: candidate grid, mass and vibration criteria,
//! Pareto front and the per-candidate simulate → stress → fatigue pipeline.

use serde::{Deserialize, Serialize};

use crate::beam::section_properties;
use crate::dynamics::{simulate, ControllerGains, Robot, RobotDesign, SimConfig, SimulationResult};
use crate::error::{Error, Result};
use crate::fatigue::{critical_plane_lifetime, DamageReport, FatigueMaterial, FatigueSettings, SECONDS_PER_HOUR};
use crate::par;
use crate::stress::StressHistory;
use crate::trajectory::TrajectoryPlan;

/// Wall thickness values per link. Configuration ids run
/// `c(i, j) = (j - 1) n + i` over the link-1 index `i` and link-2 index `j`
/// (both 1-based, `n` link-1 values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateGrid {
    /// Link-1 wall thicknesses (m).
    pub t1: Vec<f64>,
    /// Link-2 wall thicknesses (m).
    pub t2: Vec<f64>,
}

/// One cell of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub config: usize,
    pub t1: f64,
    pub t2: f64,
}

impl Default for CandidateGrid {
    /// 1 to 6 mm on both links, 36 candidates.
    fn default() -> Self {
        let t: Vec<f64> = (1..=6).map(|k| k as f64 * 1e-3).collect();
        Self { t1: t.clone(), t2: t }
    }
}

impl CandidateGrid {
    pub fn new(t1: Vec<f64>, t2: Vec<f64>) -> Result<Self> {
        let g = Self { t1, t2 };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t1.is_empty() || self.t2.is_empty() {
            return Err(Error::invalid("candidate grid is empty"));
        }
        if !self.t1.iter().chain(&self.t2).all(|&t| t > 0.0 && t.is_finite()) {
            return Err(Error::invalid("wall thicknesses must be positive"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.t1.len() * self.t2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Configuration id of the 1-based cell `(i, j)`.
    pub fn config_id(&self, i: usize, j: usize) -> usize {
        (j - 1) * self.t1.len() + i
    }

    /// 1-based cell `(i, j)` of a configuration id.
    pub fn cell(&self, config: usize) -> Option<(usize, usize)> {
        if config == 0 || config > self.len() {
            return None;
        }
        let n = self.t1.len();
        Some(((config - 1) % n + 1, (config - 1) / n + 1))
    }

    pub fn candidate(&self, config: usize) -> Option<Candidate> {
        self.cell(config).map(|(i, j)| Candidate { config, t1: self.t1[i - 1], t2: self.t2[j - 1] })
    }

    /// All candidates in ascending configuration order.
    pub fn candidates(&self) -> Vec<Candidate> {
        (1..=self.len()).filter_map(|c| self.candidate(c)).collect()
    }
}

/// Relative change of the total beam mass against `reference`,
/// `(A(t1) L1 + A(t2) L2) / (A(t1_ref) L1 + A(t2_ref) L2) - 1`.
pub fn mass_criterion(design: &RobotDesign, reference: &RobotDesign) -> Result<f64> {
    if design.link_lengths != reference.link_lengths || design.edge != reference.edge {
        return Err(Error::invalid("mass criterion needs equal link lengths and edge lengths"));
    }
    let beam_area_length = |d: &RobotDesign| -> Result<f64> {
        let mut sum = 0.0;
        for k in 0..2 {
            sum += section_properties(d.edge, d.thickness[k])?.area * d.link_lengths[k];
        }
        Ok(sum)
    };
    Ok(beam_area_length(design)? / beam_area_length(reference)? - 1.0)
}

/// Largest end-effector deviation norm over `window`, by default the
/// settling phase `[t_task, t_task + t_settle]`.
pub fn vibration_criterion(result: &SimulationResult, window: Option<(f64, f64)>) -> Result<f64> {
    let (t0, t1) = window.unwrap_or((result.t_task, result.t_task + result.t_settle));
    if t0 > t1 {
        return Err(Error::invalid(format!("observation window [{t0}, {t1}] is reversed")));
    }
    result.max_deviation(t0, t1)
}

/// Position of a candidate in the criteria space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriteriaPoint {
    pub config: usize,
    /// Relative mass change (fraction).
    pub j_m: f64,
    /// Largest end-effector deviation (m).
    pub j_vib: f64,
}

/// Non-dominated configurations in ascending id order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub configs: Vec<usize>,
    pub points: Vec<CriteriaPoint>,
}

impl ParetoFront {
    pub fn contains(&self, config: usize) -> bool {
        self.configs.binary_search(&config).is_ok()
    }
}

/// `a` dominates `b`: no worse in both criteria and better in one.
pub fn dominates(a: &CriteriaPoint, b: &CriteriaPoint) -> bool {
    a.j_m <= b.j_m && a.j_vib <= b.j_vib && (a.j_m < b.j_m || a.j_vib < b.j_vib)
}

/// Pareto front under minimization of both criteria. Points with identical
/// criteria are all kept.
pub fn pareto_front(points: &[CriteriaPoint]) -> Result<ParetoFront> {
    if points.is_empty() {
        return Err(Error::invalid("Pareto front of an empty candidate set"));
    }
    if points.iter().any(|p| !(p.j_m.is_finite() && p.j_vib.is_finite())) {
        return Err(Error::invalid("criteria must be finite"));
    }
    let mut order: Vec<&CriteriaPoint> = points.iter().collect();
    order.sort_by(|a, b| a.j_m.total_cmp(&b.j_m).then(a.j_vib.total_cmp(&b.j_vib)));
    // sweep by increasing mass; a point survives if its vibration is below
    // every earlier point of strictly smaller mass, or ties one on the front
    let mut front: Vec<CriteriaPoint> = Vec::new();
    let mut best = f64::INFINITY;
    let mut k = 0;
    while k < order.len() {
        let mut end = k;
        while end < order.len() && order[end].j_m == order[k].j_m {
            end += 1;
        }
        // within equal mass the smallest vibration (and its ties) survives
        let group_min = order[k].j_vib;
        if group_min < best {
            front.extend(order[k..end].iter().filter(|p| p.j_vib == group_min).map(|p| **p));
            best = group_min;
        }
        k = end;
    }
    front.sort_by_key(|p| p.config);
    Ok(ParetoFront { configs: front.iter().map(|p| p.config).collect(), points: front })
}

/// Options of the design study beyond the robot, plan and grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOptions {
    /// Configuration id of the reference design for the mass criterion.
    #[serde(default = "default_reference")]
    pub reference_config: usize,
    /// Run the fatigue stage only for members of the Pareto front.
    #[serde(default)]
    pub only_pareto_fatigue: bool,
}

fn default_reference() -> usize {
    22
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { reference_config: default_reference(), only_pareto_fatigue: false }
    }
}

/// Everything a candidate evaluation needs apart from the thicknesses.
#[derive(Debug, Clone)]
pub struct Study<'a> {
    pub base: &'a RobotDesign,
    pub plan: &'a TrajectoryPlan,
    pub gains: &'a ControllerGains,
    pub sim: &'a SimConfig,
    pub material: &'a FatigueMaterial,
    pub fatigue: &'a FatigueSettings,
}

/// Worst link of a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FatigueOutcome {
    /// Link (0 or 1) with the larger damage.
    pub link: usize,
    pub d_max: f64,
    pub critical_angle: f64,
    /// `None` for an infinite lifetime.
    pub lifetime_s: Option<f64>,
}

impl FatigueOutcome {
    pub fn finite_life(&self) -> bool {
        self.lifetime_s.is_some()
    }

    pub fn lifetime_seconds(&self) -> f64 {
        self.lifetime_s.unwrap_or(f64::INFINITY)
    }

    pub fn lifetime_hours(&self) -> f64 {
        self.lifetime_seconds() / SECONDS_PER_HOUR
    }
}

/// Critical-plane lifetime of both link roots; the link with the larger
/// damage governs.
pub fn link_fatigue(
    histories: &[StressHistory; 2],
    material: &FatigueMaterial,
    settings: &FatigueSettings,
    t_task: f64,
) -> Result<(FatigueOutcome, [DamageReport; 2])> {
    let angles = settings.angles();
    let a = critical_plane_lifetime(&histories[0], &angles, material, t_task, settings)?;
    let b = critical_plane_lifetime(&histories[1], &angles, material, t_task, settings)?;
    let link = if b.d_max > a.d_max { 1 } else { 0 };
    let worst = if link == 0 { &a } else { &b };
    let outcome =
        FatigueOutcome { link, d_max: worst.d_max, critical_angle: worst.critical_angle, lifetime_s: worst.lifetime_s };
    Ok((outcome, [a, b]))
}

/// Criteria and lifetime of one candidate. `error` is set when the
/// candidate could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub config: usize,
    pub t1: f64,
    pub t2: f64,
    pub j_m: f64,
    pub j_vib: Option<f64>,
    pub fatigue: Option<FatigueOutcome>,
    pub t_task: f64,
    pub error: Option<String>,
}

impl CandidateResult {
    pub fn point(&self) -> Option<CriteriaPoint> {
        self.j_vib.map(|j_vib| CriteriaPoint { config: self.config, j_m: self.j_m, j_vib })
    }
}

/// Results of a sweep in configuration order. `histories` holds the root
/// stress histories of both links for every simulated candidate.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub candidates: Vec<CandidateResult>,
    pub front: Option<ParetoFront>,
    pub histories: Vec<Option<[StressHistory; 2]>>,
}

impl SweepOutcome {
    /// True when any candidate failed.
    pub fn is_partial(&self) -> bool {
        self.candidates.iter().any(|c| c.error.is_some())
    }
}

struct Simulated {
    j_vib: f64,
    histories: [StressHistory; 2],
}

fn simulate_candidate(study: &Study, c: &Candidate) -> Result<Simulated> {
    let design = study.base.with_thickness(c.t1, c.t2);
    let robot = Robot::new(&design)?;
    let result = simulate(&robot, study.plan, study.gains, study.sim)?;
    let j_vib = vibration_criterion(&result, None)?;
    let histories = [result.stress_history(&robot, 0)?, result.stress_history(&robot, 1)?];
    Ok(Simulated { j_vib, histories })
}

/// Runs the design study over `grid`. Candidates are evaluated
/// independently, so the results do not depend on the number of workers.
/// Failures are recorded per candidate and the sweep continues.
pub fn run_sweep(grid: &CandidateGrid, study: &Study, options: &SweepOptions) -> Result<SweepOutcome> {
    grid.validate()?;
    study.base.validate()?;
    study.sim.validate()?;
    study.gains.validate()?;
    study.material.validate()?;
    let reference = grid
        .candidate(options.reference_config)
        .ok_or_else(|| Error::invalid(format!("reference configuration {} is not in the grid", options.reference_config)))?;
    let reference = study.base.with_thickness(reference.t1, reference.t2);
    reference.sections()?;
    let t_task = study.plan.duration();

    let candidates = grid.candidates();
    let simulated = par::map(&candidates, |c| {
        let j_m = mass_criterion(&study.base.with_thickness(c.t1, c.t2), &reference);
        (j_m.clone(), j_m.and_then(|_| simulate_candidate(study, c)))
    });

    let mut results = Vec::with_capacity(candidates.len());
    let mut histories = Vec::with_capacity(candidates.len());
    for (c, (j_m, sim)) in candidates.iter().zip(simulated) {
        let mut r = CandidateResult {
            config: c.config,
            t1: c.t1,
            t2: c.t2,
            j_m: *j_m.as_ref().unwrap_or(&f64::NAN),
            j_vib: None,
            fatigue: None,
            t_task,
            error: None,
        };
        match sim {
            Ok(s) => {
                r.j_vib = Some(s.j_vib);
                histories.push(Some(s.histories));
            }
            Err(e) => {
                r.error = Some(e.to_string());
                histories.push(None);
            }
        }
        results.push(r);
    }

    let points: Vec<CriteriaPoint> = results.iter().filter_map(|r| r.point()).collect();
    let front = if points.is_empty() { None } else { Some(pareto_front(&points)?) };

    let selected: Vec<usize> = (0..results.len())
        .filter(|&k| histories[k].is_some())
        .filter(|&k| !options.only_pareto_fatigue || front.as_ref().is_some_and(|f| f.contains(results[k].config)))
        .collect();
    let fatigue = par::map(&selected, |&k| {
        link_fatigue(histories[k].as_ref().expect("selected candidates are simulated"), study.material, study.fatigue, t_task)
    });
    for (&k, f) in selected.iter().zip(fatigue) {
        match f {
            Ok((outcome, _)) => results[k].fatigue = Some(outcome),
            Err(e) => results[k].error = Some(e.to_string()),
        }
    }
    Ok(SweepOutcome { candidates: results, front, histories })
}
