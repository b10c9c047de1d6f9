//! Rainflow cycle counting (ASTM E1049 rainflow counting with residue
//! accounting) and binning into a rainflow matrix over mean and amplitude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Alternating peaks and valleys of a load history with their time stamps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremaSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ExtremaSeries {
    /// Wraps an already reduced series without time information.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let s = Self { times: (0..values.len()).map(|i| i as f64).collect(), values };
        s.check_alternating()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check_alternating(&self) -> Result<()> {
        let v = &self.values;
        for i in 1..v.len() {
            if v[i] == v[i - 1] || !v[i].is_finite() {
                return Err(Error::NotAlternating(i));
            }
            if i >= 2 && (v[i] - v[i - 1]) * (v[i - 1] - v[i - 2]) > 0.0 {
                return Err(Error::NotAlternating(i));
            }
        }
        Ok(())
    }
}

/// Reduces a sampled history to its turning points.
///
/// Both endpoints are kept. A turning point is only accepted once the signal
/// has moved away from it by at least `gate` (and by a non-zero amount), so
/// reversals smaller than the gate disappear. Equal neighbouring values keep
/// the first occurrence.
pub fn extract_extrema(times: &[f64], values: &[f64], gate: f64) -> Result<ExtremaSeries> {
    if values.is_empty() {
        return Err(Error::invalid("cannot extract extrema from an empty history"));
    }
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: values.len(), got: times.len() });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("history contains non-finite values"));
    }
    let gate = gate.max(0.0);
    let mut out_t = vec![times[0]];
    let mut out_v = vec![values[0]];
    let mut dir = 0.0f64;
    let (mut cand_t, mut cand_v) = (times[0], values[0]);

    for (&t, &x) in times.iter().zip(values).skip(1) {
        if dir == 0.0 {
            let d = x - out_v[0];
            if d != 0.0 && d.abs() >= gate {
                dir = d.signum();
                cand_t = t;
                cand_v = x;
            }
            continue;
        }
        let ahead = (x - cand_v) * dir;
        if ahead > 0.0 {
            cand_t = t;
            cand_v = x;
        } else if -ahead > 0.0 && -ahead >= gate {
            out_t.push(cand_t);
            out_v.push(cand_v);
            dir = -dir;
            cand_t = t;
            cand_v = x;
        }
    }
    if dir != 0.0 {
        out_t.push(cand_t);
        out_v.push(cand_v);
    }
    let (&t_end, &v_end) = (times.last().unwrap(), values.last().unwrap());
    if *out_v.last().unwrap() != v_end {
        out_t.push(t_end);
        out_v.push(v_end);
    }
    Ok(ExtremaSeries { times: out_t, values: out_v })
}

/// One counted range: mean, amplitude and weight (1 for a closed cycle,
/// 0.5 for a half cycle).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub mean: f64,
    pub amplitude: f64,
    pub weight: f64,
}

impl Cycle {
    fn between(a: f64, b: f64, weight: f64) -> Self {
        Self { mean: 0.5 * (a + b), amplitude: 0.5 * (a - b).abs(), weight }
    }

    pub fn range(&self) -> f64 {
        2.0 * self.amplitude
    }
}

pub type CycleSet = Vec<Cycle>;

/// Treatment of ranges that never close into a full cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfCycles {
    /// Count them with weight 0.5.
    #[default]
    Half,
    /// Drop them.
    Discard,
}

/// ASTM E1049 rainflow counting with half cycles kept at weight 0.5.
pub fn count_cycles(series: &ExtremaSeries) -> Result<CycleSet> {
    count_cycles_with(series, HalfCycles::Half)
}

pub fn count_cycles_with(series: &ExtremaSeries, half: HalfCycles) -> Result<CycleSet> {
    series.check_alternating()?;
    let mut cycles = Vec::new();
    let mut stack: Vec<f64> = Vec::with_capacity(series.len());
    let keep_half = half == HalfCycles::Half;

    for &p in &series.values {
        stack.push(p);
        while stack.len() >= 3 {
            let n = stack.len();
            let x = (stack[n - 1] - stack[n - 2]).abs();
            let y = (stack[n - 2] - stack[n - 3]).abs();
            if x < y {
                break;
            }
            if n == 3 {
                // Y contains the starting point: half cycle, move the start on
                if keep_half {
                    cycles.push(Cycle::between(stack[0], stack[1], 0.5));
                }
                stack.remove(0);
            } else {
                cycles.push(Cycle::between(stack[n - 3], stack[n - 2], 1.0));
                stack.drain(n - 3..n - 1);
            }
        }
    }
    if keep_half {
        cycles.extend(stack.windows(2).map(|w| Cycle::between(w[0], w[1], 0.5)));
    }
    Ok(cycles)
}

/// Total weight of a cycle set.
pub fn total_weight(cycles: &[Cycle]) -> f64 {
    cycles.iter().fold(0.0, |acc, c| acc + c.weight)
}

/// Grid layout of a rainflow matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Binning {
    pub n_mean: usize,
    pub n_amplitude: usize,
    /// Fixed mean range; `None` uses the observed range.
    #[serde(default)]
    pub mean_range: Option<[f64; 2]>,
    /// Fixed amplitude range; `None` uses the observed range.
    #[serde(default)]
    pub amplitude_range: Option<[f64; 2]>,
    /// Grow fixed ranges to cover every cycle instead of failing.
    #[serde(default = "yes")]
    pub auto_expand: bool,
}

fn yes() -> bool {
    true
}

impl Default for Binning {
    fn default() -> Self {
        Self { n_mean: 32, n_amplitude: 32, mean_range: None, amplitude_range: None, auto_expand: true }
    }
}

/// Histogram of cycle weights over `(σ_m, σ_a)` bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RainflowMatrix {
    pub mean_edges: Vec<f64>,
    pub amplitude_edges: Vec<f64>,
    /// Row-major `[mean_bin][amplitude_bin]`.
    pub counts: Vec<f64>,
}

/// One populated bin: center mean, center amplitude and count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bin {
    pub mean: f64,
    pub amplitude: f64,
    pub count: f64,
}

impl RainflowMatrix {
    pub fn n_mean(&self) -> usize {
        self.mean_edges.len() - 1
    }

    pub fn n_amplitude(&self) -> usize {
        self.amplitude_edges.len() - 1
    }

    pub fn count(&self, i_mean: usize, i_amp: usize) -> f64 {
        self.counts[i_mean * self.n_amplitude() + i_amp]
    }

    pub fn mean_centers(&self) -> Vec<f64> {
        centers(&self.mean_edges)
    }

    pub fn amplitude_centers(&self) -> Vec<f64> {
        centers(&self.amplitude_edges)
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().fold(0.0, |acc, c| acc + c)
    }

    /// All bins in row-major order, including empty ones.
    pub fn bins(&self) -> Vec<Bin> {
        let mc = self.mean_centers();
        let ac = self.amplitude_centers();
        let na = ac.len();
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &count)| Bin { mean: mc[k / na], amplitude: ac[k % na], count })
            .collect()
    }
}

fn centers(edges: &[f64]) -> Vec<f64> {
    edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

fn edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        // a single value: give the bins a small width and center the middle bin on it
        let w = (lo.abs() * 1e-6).max(1e-9) / n as f64;
        let start = lo - (((n / 2) as f64) + 0.5) * w;
        (start, start + n as f64 * w)
    };
    let w = (hi - lo) / n as f64;
    (0..=n).map(|i| if i == n { hi } else { lo + w * i as f64 }).collect()
}

fn bin_index(edges: &[f64], x: f64) -> usize {
    let n = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[n]);
    let idx = ((x - lo) / (hi - lo) * n as f64).floor();
    (idx.max(0.0) as usize).min(n - 1)
}

/// Bins counted cycles into an `n_mean × n_amplitude` rainflow matrix.
pub fn bin_cycles(cycles: &[Cycle], binning: &Binning) -> Result<RainflowMatrix> {
    if binning.n_mean == 0 || binning.n_amplitude == 0 {
        return Err(Error::invalid("rainflow matrix needs at least one bin per axis"));
    }
    let observed = |f: fn(&Cycle) -> f64| -> Option<[f64; 2]> {
        cycles
            .iter()
            .map(f)
            .fold(None, |acc: Option<[f64; 2]>, x| Some(acc.map_or([x, x], |[a, b]| [a.min(x), b.max(x)])))
    };
    let resolve = |fixed: Option<[f64; 2]>, seen: Option<[f64; 2]>, is_mean: bool| -> Result<[f64; 2]> {
        match (fixed, seen) {
            (None, Some(r)) => Ok(r),
            (None, None) => Ok([0.0, 0.0]),
            (Some([a, b]), _) if !(a.is_finite() && b.is_finite() && b > a) => {
                Err(Error::invalid(format!("binning range [{a}, {b}] is degenerate")))
            }
            (Some(r), None) => Ok(r),
            (Some([a, b]), Some([lo, hi])) => {
                if lo >= a && hi <= b {
                    Ok([a, b])
                } else if binning.auto_expand {
                    Ok([a.min(lo), b.max(hi)])
                } else {
                    let bad = cycles
                        .iter()
                        .find(|c| {
                            let x = if is_mean { c.mean } else { c.amplitude };
                            x < a || x > b
                        })
                        .unwrap();
                    Err(Error::OutOfRange { mean: bad.mean, amplitude: bad.amplitude })
                }
            }
        }
    };
    let [m0, m1] = resolve(binning.mean_range, observed(|c| c.mean), true)?;
    let [a0, a1] = resolve(binning.amplitude_range, observed(|c| c.amplitude), false)?;
    let mean_edges = edges(m0, m1, binning.n_mean);
    let amplitude_edges = edges(a0, a1, binning.n_amplitude);
    let mut counts = vec![0.0; binning.n_mean * binning.n_amplitude];
    for c in cycles {
        let i = bin_index(&mean_edges, c.mean);
        let j = bin_index(&amplitude_edges, c.amplitude);
        counts[i * binning.n_amplitude + j] += c.weight;
    }
    Ok(RainflowMatrix { mean_edges, amplitude_edges, counts })
}

/// Extracts, counts and bins a scalar history in one go.
pub fn rainflow_matrix(times: &[f64], values: &[f64], gate: f64, half: HalfCycles, binning: &Binning) -> Result<RainflowMatrix> {
    let series = extract_extrema(times, values, gate)?;
    let cycles = count_cycles_with(&series, half)?;
    bin_cycles(&cycles, binning)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: [f64; 9] = [-2.0, 1.0, -3.0, 5.0, -1.0, 3.0, -4.0, 4.0, -2.0];

    fn idx(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64).collect()
    }

    #[test]
    fn monotone_ramp_keeps_endpoints() {
        let v: Vec<f64> = (0..50).map(|i| i as f64 * 0.3).collect();
        let e = extract_extrema(&idx(50), &v, 0.0).unwrap();
        assert_eq!(e.values, vec![0.0, 49.0 * 0.3]);
    }

    #[test]
    fn fine_sine_extrema() {
        let n = 401;
        let v: Vec<f64> = (0..n).map(|i| 2.5 * (i as f64 * std::f64::consts::PI / 50.0).sin()).collect();
        let e = extract_extrema(&idx(n), &v, 0.0).unwrap();
        // 0, then 8 alternating extrema, then the final zero crossing
        assert_eq!(e.len(), 10);
        for (k, x) in e.values[1..9].iter().enumerate() {
            let expect = if k % 2 == 0 { 2.5 } else { -2.5 };
            assert!((x - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn example_history_reduces_to_its_extrema() {
        // piecewise-linear history through the turning points, with interior samples
        let mut t = vec![];
        let mut v = vec![];
        for w in EXAMPLE.windows(2) {
            for k in 0..10 {
                t.push(t.len() as f64);
                v.push(w[0] + (w[1] - w[0]) * k as f64 / 10.0);
            }
        }
        t.push(t.len() as f64);
        v.push(*EXAMPLE.last().unwrap());
        let e = extract_extrema(&t, &v, 0.0).unwrap();
        assert_eq!(e.values, EXAMPLE.to_vec());
    }

    #[test]
    fn hysteresis_gate_removes_small_reversals() {
        let v = [0.0, 5.0, 4.8, 5.2, -3.0, -2.9, -3.5, 1.0];
        let e = extract_extrema(&idx(v.len()), &v, 0.5).unwrap();
        assert_eq!(e.values, vec![0.0, 5.2, -3.5, 1.0]);
        let again = extract_extrema(&e.times, &e.values, 0.5).unwrap();
        assert_eq!(again, e);
    }

    #[test]
    fn plateaus_keep_first_occurrence() {
        let v = [0.0, 2.0, 2.0, 2.0, 1.0];
        let e = extract_extrema(&idx(5), &v, 0.0).unwrap();
        assert_eq!(e.values, vec![0.0, 2.0, 1.0]);
        assert_eq!(e.times, vec![0.0, 1.0, 4.0]);
    }

    #[test]
    fn example_cycle_set() {
        let s = ExtremaSeries::from_values(EXAMPLE.to_vec()).unwrap();
        let c = count_cycles(&s).unwrap();
        let mut halves: Vec<f64> = c.iter().filter(|c| c.weight == 0.5).map(Cycle::range).collect();
        let fulls: Vec<f64> = c.iter().filter(|c| c.weight == 1.0).map(Cycle::range).collect();
        halves.sort_by(f64::total_cmp);
        assert_eq!(halves, vec![3.0, 4.0, 6.0, 8.0, 8.0, 9.0]);
        assert_eq!(fulls, vec![4.0]);
        let full = c.iter().find(|c| c.weight == 1.0).unwrap();
        assert_eq!(full.mean, 1.0);
        assert_eq!(total_weight(&c), 4.0);
    }

    #[test]
    fn single_period_is_two_half_cycles() {
        let s = ExtremaSeries::from_values(vec![-1.5, 1.5, -1.5]).unwrap();
        let c = count_cycles(&s).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|c| c.weight == 0.5 && c.amplitude == 1.5 && c.mean == 0.0));
    }

    #[test]
    fn constant_signal_has_no_cycles() {
        let e = extract_extrema(&idx(20), &[3.0; 20], 0.0).unwrap();
        assert_eq!(e.values, vec![3.0]);
        assert!(count_cycles(&e).unwrap().is_empty());
    }

    #[test]
    fn discard_policy_drops_half_cycles() {
        let s = ExtremaSeries::from_values(EXAMPLE.to_vec()).unwrap();
        let c = count_cycles_with(&s, HalfCycles::Discard).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].weight, 1.0);
    }

    #[test]
    fn non_alternating_rejected() {
        assert!(ExtremaSeries::from_values(vec![0.0, 1.0, 2.0]).is_err());
        let s = ExtremaSeries { times: idx(3), values: vec![0.0, 1.0, 1.0] };
        assert!(matches!(count_cycles(&s), Err(Error::NotAlternating(2))));
        assert!(extract_extrema(&[], &[], 0.0).is_err());
    }

    #[test]
    fn binning_examples() {
        let one = [Cycle { mean: 1.0, amplitude: 2.0, weight: 1.0 }];
        let m = bin_cycles(&one, &Binning { n_mean: 1, n_amplitude: 1, ..Binning::default() }).unwrap();
        assert_eq!(m.counts, vec![1.0]);
        let two = [one[0], one[0]];
        let m = bin_cycles(&two, &Binning::default()).unwrap();
        assert_eq!(m.total(), 2.0);
        assert_eq!(m.counts.iter().filter(|&&c| c > 0.0).count(), 1);
        let b = m.bins().into_iter().find(|b| b.count > 0.0).unwrap();
        assert!((b.mean - 1.0).abs() < 1e-12 && (b.amplitude - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_range_without_expansion_rejects_outliers() {
        let c = [Cycle { mean: 5.0, amplitude: 1.0, weight: 0.5 }];
        let fixed = Binning { mean_range: Some([-1.0, 1.0]), auto_expand: false, ..Binning::default() };
        assert!(matches!(bin_cycles(&c, &fixed), Err(Error::OutOfRange { .. })));
        let grow = Binning { auto_expand: true, ..fixed };
        let m = bin_cycles(&c, &grow).unwrap();
        assert_eq!(*m.mean_edges.last().unwrap(), 5.0);
        assert_eq!(m.total(), 0.5);
    }

    #[test]
    fn centers_are_edge_midpoints() {
        let c = [Cycle { mean: -3.0, amplitude: 0.5, weight: 1.0 }, Cycle { mean: 7.0, amplitude: 4.5, weight: 0.5 }];
        let m = bin_cycles(&c, &Binning { n_mean: 5, n_amplitude: 4, ..Binning::default() }).unwrap();
        for (k, c) in m.mean_centers().iter().enumerate() {
            assert_eq!(*c, 0.5 * (m.mean_edges[k] + m.mean_edges[k + 1]));
        }
        assert_eq!(m.count(0, 0), 1.0);
        assert_eq!(m.count(4, 3), 0.5);
    }
}
