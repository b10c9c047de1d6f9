//! Three-stage Radau IIA (order 5) with adaptive steps, simplified Newton
//! iterations on the full stage system and a finite-difference Jacobian.
//! The step-size control and error estimate follow Hairer & Wanner's RADAU5.

use nalgebra::{DMatrix, DVector, LU, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQ6: f64 = 2.449_489_742_783_178;
const C: [f64; 3] = [(4.0 - SQ6) / 10.0, (4.0 + SQ6) / 10.0, 1.0];
const A: [[f64; 3]; 3] = [
    [(88.0 - 7.0 * SQ6) / 360.0, (296.0 - 169.0 * SQ6) / 1800.0, (-2.0 + 3.0 * SQ6) / 225.0],
    [(296.0 + 169.0 * SQ6) / 1800.0, (88.0 + 7.0 * SQ6) / 360.0, (-2.0 - 3.0 * SQ6) / 225.0],
    [(16.0 - SQ6) / 36.0, (16.0 + SQ6) / 36.0, 1.0 / 9.0],
];
const DD: [f64; 3] = [-(13.0 + 7.0 * SQ6) / 3.0, (-13.0 + 7.0 * SQ6) / 3.0, -1.0 / 3.0];

const MAX_NEWTON: usize = 7;
const SAFE: f64 = 0.9;
const UROUND: f64 = 1e-16;
/// Skip the Jacobian update while Newton contracts faster than this.
const THET: f64 = 0.1;

/// Real eigenvalue of the inverse Radau matrix, `1/γ`.
fn u1() -> f64 {
    let cbrt81 = 81f64.cbrt();
    let cbrt9 = 9f64.cbrt();
    30.0 / (6.0 + cbrt81 - cbrt9)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadauOptions {
    pub rtol: f64,
    pub atol: f64,
    #[serde(default = "default_h0")]
    pub initial_step: f64,
    #[serde(default = "default_h_max")]
    pub max_step: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_h0() -> f64 {
    1e-6
}
fn default_h_max() -> f64 {
    f64::INFINITY
}
fn default_max_steps() -> usize {
    500_000
}

impl Default for RadauOptions {
    fn default() -> Self {
        Self { rtol: 1e-6, atol: 1e-9, initial_step: default_h0(), max_step: default_h_max(), max_steps: default_max_steps() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RadauStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub jacobians: usize,
    pub factorizations: usize,
}

/// Right-hand side `f(t, y) -> dy` of `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&mut self, t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) -> Result<()>;
}

impl<F> OdeSystem for (usize, F)
where
    F: FnMut(f64, &DVector<f64>, &mut DVector<f64>) -> Result<()>,
{
    fn dim(&self) -> usize {
        self.0
    }
    fn rhs(&mut self, t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) -> Result<()> {
        (self.1)(t, y, dy)
    }
}

/// Lagrange weights of the collocation polynomial on the nodes `{0, c1, c2, 1}`
/// for the three non-zero nodes, evaluated at `s`.
fn collocation_weights(s: f64) -> [f64; 3] {
    let nodes = [0.0, C[0], C[1], C[2]];
    let mut w = [0.0; 3];
    for (k, wk) in w.iter_mut().enumerate() {
        let xk = nodes[k + 1];
        let mut l = 1.0;
        for (m, &xm) in nodes.iter().enumerate() {
            if m != k + 1 {
                l *= (s - xm) / (xk - xm);
            }
        }
        *wk = l;
    }
    w
}

struct Workspace {
    n: usize,
    scale: DVector<f64>,
}

impl Workspace {
    fn set_scale(&mut self, y: &DVector<f64>, atol: f64, rtol: f64) {
        for i in 0..self.n {
            self.scale[i] = atol + rtol * y[i].abs();
        }
    }

    fn norm(&self, v: &[f64]) -> f64 {
        let n = self.n;
        let sum: f64 = v.iter().enumerate().map(|(i, x)| (x / self.scale[i % n]).powi(2)).sum();
        (sum / v.len() as f64).sqrt()
    }
}

fn jacobian(sys: &mut impl OdeSystem, t: f64, y: &DVector<f64>, f0: &DVector<f64>, stats: &mut RadauStats) -> Result<DMatrix<f64>> {
    let n = y.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut yp = y.clone();
    let mut fp = DVector::zeros(n);
    for j in 0..n {
        let saved = yp[j];
        let delta = (UROUND * 1e-5f64.max(saved.abs())).sqrt();
        yp[j] = saved + delta;
        sys.rhs(t, &yp, &mut fp)?;
        stats.rhs_evals += 1;
        for i in 0..n {
            jac[(i, j)] = (fp[i] - f0[i]) / delta;
        }
        yp[j] = saved;
    }
    stats.jacobians += 1;
    Ok(jac)
}

fn stage_matrix(jac: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let n = jac.nrows();
    let mut e = DMatrix::zeros(3 * n, 3 * n);
    for bi in 0..3 {
        for bj in 0..3 {
            let a = h * A[bi][bj];
            for i in 0..n {
                for j in 0..n {
                    e[(bi * n + i, bj * n + j)] = -a * jac[(i, j)];
                }
            }
        }
        for i in 0..n {
            e[(bi * n + i, bi * n + i)] += 1.0;
        }
    }
    e
}

fn check_finite(t: f64, y: &DVector<f64>) -> Result<()> {
    if y.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Integration { t, reason: "non-finite state".into() })
    }
}

/// Integrates from `t0` to `t_end` and returns the dense-output solution at
/// every entry of `sample_times` (which must be sorted and lie in `[t0, t_end]`).
pub fn integrate(
    sys: &mut impl OdeSystem,
    t0: f64,
    y0: DVector<f64>,
    t_end: f64,
    sample_times: &[f64],
    opts: &RadauOptions,
) -> Result<(Vec<DVector<f64>>, RadauStats)> {
    let n = sys.dim();
    if y0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y0.len() });
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0 && opts.initial_step > 0.0 && opts.max_step > 0.0) {
        return Err(Error::invalid("tolerances and step sizes must be positive"));
    }
    if !(t_end >= t0) {
        return Err(Error::invalid(format!("end time {t_end} before start time {t0}")));
    }
    if sample_times.windows(2).any(|w| w[1] < w[0])
        || sample_times.first().is_some_and(|&s| s < t0)
        || sample_times.last().is_some_and(|&s| s > t_end)
    {
        return Err(Error::invalid("sample times must be sorted and inside the integration span"));
    }
    check_finite(t0, &y0)?;

    // the tolerances bound the embedded local error estimate directly
    let (rtol, atol) = (opts.rtol, opts.atol);
    let fnewt = (10.0 * UROUND / rtol).max(0.03f64.min(rtol.sqrt()));
    let u1 = u1();

    let mut stats = RadauStats::default();
    let mut ws = Workspace { n, scale: DVector::zeros(n) };
    let mut out = Vec::with_capacity(sample_times.len());
    let mut next_sample = 0;
    while next_sample < sample_times.len() && sample_times[next_sample] <= t0 {
        out.push(y0.clone());
        next_sample += 1;
    }

    let mut t = t0;
    let mut y = y0;
    let mut f0 = DVector::zeros(n);
    sys.rhs(t, &y, &mut f0)?;
    stats.rhs_evals += 1;
    let mut h = opts.initial_step.min(opts.max_step).min((t_end - t0).max(f64::MIN_POSITIVE));
    let mut jac = jacobian(sys, t, &y, &f0, &mut stats)?;
    let mut jac_fresh = true;
    let mut first = true;
    let mut last_rejected = false;
    let mut faccon = 1.0f64;
    let mut theta;
    let mut z = vec![DVector::<f64>::zeros(n); 3];
    let mut prev: Option<(f64, Vec<DVector<f64>>)> = None; // (h, Z) of the last accepted step
    let mut fz = vec![DVector::<f64>::zeros(n); 3];
    let mut ystage = DVector::zeros(n);

    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Integration { t, reason: format!("step limit {} reached", opts.max_steps) });
        }
        if t + 1.0001 * h >= t_end {
            h = t_end - t;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integration { t, reason: format!("step size underflow (h = {h:e})") });
        }
        ws.set_scale(&y, atol, rtol);

        let e = stage_matrix(&jac, h);
        let lu = LU::<f64, Dyn, Dyn>::new(e);
        stats.factorizations += 1;

        // starting values from the previous collocation polynomial
        match &prev {
            Some((hp, zp)) if !first => {
                for i in 0..3 {
                    let w = collocation_weights(1.0 + C[i] * h / hp);
                    z[i] = &zp[0] * w[0] + &zp[1] * w[1] + &zp[2] * w[2] - &zp[2];
                }
            }
            _ => z.iter_mut().for_each(|zi| zi.fill(0.0)),
        }

        faccon = faccon.max(UROUND).powf(0.8);
        theta = THET.abs();
        let mut converged = false;
        let mut newt = 0;
        let mut dyn_old = 0.0f64;
        let mut thq_old = 0.0f64;
        let mut shrink: Option<f64> = None;
        while newt < MAX_NEWTON {
            for i in 0..3 {
                ystage.copy_from(&y);
                ystage += &z[i];
                sys.rhs(t + C[i] * h, &ystage, &mut fz[i])?;
                stats.rhs_evals += 1;
            }
            if fz.iter().any(|f| f.iter().any(|x| !x.is_finite())) {
                shrink = Some(0.5);
                break;
            }
            let mut rhs = DVector::zeros(3 * n);
            for i in 0..3 {
                for k in 0..n {
                    let hf = h * (A[i][0] * fz[0][k] + A[i][1] * fz[1][k] + A[i][2] * fz[2][k]);
                    rhs[i * n + k] = hf - z[i][k];
                }
            }
            let dz = match lu.solve(&rhs) {
                Some(d) => d,
                None => {
                    shrink = Some(0.5);
                    break;
                }
            };
            let dyno = ws.norm(dz.as_slice());
            if newt >= 1 {
                let thq = dyno / dyn_old;
                theta = if newt == 1 { thq } else { (thq * thq_old).sqrt() };
                thq_old = thq;
                if theta < 0.99 {
                    faccon = theta / (1.0 - theta);
                    let remaining = (MAX_NEWTON - 1 - newt) as i32;
                    let dyth = faccon * dyno * theta.powi(remaining) / fnewt;
                    if dyth >= 1.0 {
                        let qnewt = dyth.clamp(1e-4, 20.0);
                        shrink = Some(0.8 * qnewt.powf(-1.0 / (4.0 + remaining as f64)));
                        break;
                    }
                } else {
                    shrink = Some(0.5);
                    break;
                }
            }
            dyn_old = dyno.max(UROUND);
            for i in 0..3 {
                for k in 0..n {
                    z[i][k] += dz[i * n + k];
                }
            }
            newt += 1;
            if faccon * dyno <= fnewt {
                converged = true;
                break;
            }
        }
        if !converged {
            h *= shrink.unwrap_or(0.5);
            last_rejected = true;
            stats.rejected += 1;
            if !jac_fresh {
                jac = jacobian(sys, t, &y, &f0, &mut stats)?;
                jac_fresh = true;
            }
            continue;
        }

        // error estimate
        let fac1 = u1 / h;
        let mut e1 = -jac.clone();
        for i in 0..n {
            e1[(i, i)] += fac1;
        }
        let lu1 = LU::<f64, Dyn, Dyn>::new(e1);
        let f2 = (&z[0] * DD[0] + &z[1] * DD[1] + &z[2] * DD[2]) / h;
        let mut err = lu1.solve(&(&f2 + &f0)).ok_or(Error::Integration { t, reason: "singular error matrix".into() })?;
        let mut err_norm = ws.norm(err.as_slice()).max(1e-10);
        if err_norm >= 1.0 && (first || last_rejected) {
            ystage.copy_from(&y);
            ystage += &err;
            let mut fe = DVector::zeros(n);
            sys.rhs(t, &ystage, &mut fe)?;
            stats.rhs_evals += 1;
            err = lu1.solve(&(fe + &f2)).ok_or(Error::Integration { t, reason: "singular error matrix".into() })?;
            err_norm = ws.norm(err.as_slice()).max(1e-10);
        }

        let fac = SAFE.min(SAFE * (1.0 + 2.0 * MAX_NEWTON as f64) / (newt as f64 + 2.0 * MAX_NEWTON as f64));
        let quot = (err_norm.powf(0.25) / fac).clamp(0.125, 5.0);
        let mut h_new = h / quot;

        if err_norm < 1.0 {
            let t_new = t + h;
            let y_new = &y + &z[2];
            check_finite(t_new, &y_new)?;
            while next_sample < sample_times.len() && sample_times[next_sample] <= t_new {
                let s = (sample_times[next_sample] - t) / h;
                let w = collocation_weights(s);
                out.push(&y + &z[0] * w[0] + &z[1] * w[1] + &z[2] * w[2]);
                next_sample += 1;
            }
            prev = Some((h, z.clone()));
            t = if t_end - t_new <= 1e-12 * t_end.abs().max(1.0) { t_end } else { t_new };
            y = y_new;
            stats.accepted += 1;
            first = false;
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new.min(opts.max_step);
            if t >= t_end {
                break;
            }
            sys.rhs(t, &y, &mut f0)?;
            stats.rhs_evals += 1;
            if theta > THET {
                jac = jacobian(sys, t, &y, &f0, &mut stats)?;
                jac_fresh = true;
            } else {
                jac_fresh = false;
            }
        } else {
            stats.rejected += 1;
            h = if first { 0.1 * h } else { h_new };
            last_rejected = true;
        }
    }
    while next_sample < sample_times.len() {
        out.push(y.clone());
        next_sample += 1;
    }
    Ok((out, stats))
}
