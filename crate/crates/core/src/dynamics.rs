//! Implicit-midpoint integration of Hamilton's equations with monitoring of
//! the Hamiltonian and every listed integral.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::catalog::CatalogEntry;
use crate::error::{Error, Result};
use crate::expr::{Compiled, Expr, ParamSet, PhasePoint};

/// `(dq/dt, dp/dt) = (dH/dp, -dH/dq)`.
pub fn hamiltons_rhs(h: &Expr, x: &PhasePoint, params: &ParamSet) -> Result<(Vec<f64>, Vec<f64>)> {
    rhs(&Compiled::new(h, params)?, x)
}

fn rhs(h: &Compiled, x: &PhasePoint) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = x.n();
    let g = h.jet1(x).map_err(|e| e.at_point(&x.q, &x.p))?.g;
    Ok((g[n..].to_vec(), g[..n].iter().map(|v| -v).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOptions {
    /// Stop iterating once successive iterates differ by at most this
    /// (scaled by `1 + |x|`).
    pub fp_tol: f64,
    pub max_iter: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions { fp_tol: 1e-12, max_iter: 50 }
    }
}

/// One implicit-midpoint step `x1 = x0 + h J grad H((x0 + x1)/2)`, solved by
/// fixed-point iteration with a Newton fallback when that stalls. A negative
/// `h` steps backwards in time.
pub fn implicit_midpoint_step(h: &Compiled, x: &PhasePoint, step: f64, opts: StepOptions) -> Result<PhasePoint> {
    if step == 0.0 || !step.is_finite() {
        return Err(Error::BadStep(step));
    }
    let n = x.n();
    let (dq, dp) = rhs(h, x)?;
    let mut next = PhasePoint {
        q: (0..n).map(|i| x.q[i] + step * dq[i]).collect(),
        p: (0..n).map(|i| x.p[i] + step * dp[i]).collect(),
    };
    for _ in 0..opts.max_iter {
        let mid = PhasePoint {
            q: (0..n).map(|i| 0.5 * (x.q[i] + next.q[i])).collect(),
            p: (0..n).map(|i| 0.5 * (x.p[i] + next.p[i])).collect(),
        };
        let (dq, dp) = rhs(h, &mid)?;
        let cand = PhasePoint {
            q: (0..n).map(|i| x.q[i] + step * dq[i]).collect(),
            p: (0..n).map(|i| x.p[i] + step * dp[i]).collect(),
        };
        let scale = 1.0 + cand.q.iter().chain(&cand.p).fold(0.0f64, |m, v| m.max(v.abs()));
        let change = cand
            .q
            .iter()
            .zip(&next.q)
            .chain(cand.p.iter().zip(&next.p))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / scale;
        next = cand;
        if !change.is_finite() {
            break;
        }
        if change <= opts.fp_tol {
            return Ok(next);
        }
    }
    // stiff region: fall back to Newton on the midpoint equations
    newton_refine(h, x, step, next, opts)
}

fn newton_refine(h: &Compiled, x: &PhasePoint, step: f64, start: PhasePoint, opts: StepOptions) -> Result<PhasePoint> {
    let n = x.n();
    let y0 = x.coords();
    let mut y = start.coords();
    if y.iter().any(|v| !v.is_finite()) {
        y = y0.clone();
    }
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let mid = PhasePoint::from_coords(&y.iter().zip(&y0).map(|(a, b)| 0.5 * (a + b)).collect::<Vec<_>>())?;
        let j = h.jet2(&mid).map_err(|e| e.at_point(&mid.q, &mid.p))?;
        let d = 2 * n;
        let flow = |i: usize| if i < n { j.g[n + i] } else { -j.g[i - n] };
        let dflow = |i: usize, k: usize| if i < n { j.h[(n + i) * d + k] } else { -j.h[(i - n) * d + k] };
        let resid = DVector::from_fn(d, |i, _| y[i] - y0[i] - step * flow(i));
        let jac = DMatrix::from_fn(d, d, |i, k| if i == k { 1.0 } else { 0.0 } - 0.5 * step * dflow(i, k));
        let delta = jac
            .lu()
            .solve(&resid)
            .ok_or(Error::NoConvergence { iterations: opts.max_iter, residual: change })?;
        for i in 0..d {
            y[i] -= delta[i];
        }
        let scale = 1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        change = delta.amax() / scale;
        if !change.is_finite() {
            break;
        }
        if change <= opts.fp_tol {
            return PhasePoint::from_coords(&y);
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: change })
}

/// One monitored function along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monitor {
    pub name: String,
    pub values: Vec<f64>,
    /// `max_t |v(t) - v(0)| / (|v(0)| + 1)`.
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub step: f64,
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub monitors: Vec<Monitor>,
    /// Why integration stopped early, if it did.
    pub truncated: Option<String>,
}

impl Trajectory {
    pub fn monitor(&self, name: &str) -> Option<&Monitor> {
        self.monitors.iter().find(|m| m.name == name)
    }

    pub fn max_drift(&self) -> f64 {
        self.monitors.iter().map(|m| m.drift).fold(0.0, f64::max)
    }

    /// CSV with header `t, q1..qN, p1..pN` followed by one column per monitor.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.states.first().map_or(0, |s| s.n());
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("q{i}")));
        header.extend((1..=n).map(|i| format!("p{i}")));
        header.extend(self.monitors.iter().map(|m| m.name.clone()));
        writeln!(w, "{}", header.join(","))?;
        for (k, (t, x)) in self.times.iter().zip(&self.states).enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(x.q.iter().chain(&x.p).map(|v| v.to_string()));
            row.extend(self.monitors.iter().map(|m| m.values[k].to_string()));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Guard functions are considered hit within this distance of zero.
pub const GUARD_MARGIN: f64 = 1e-6;

/// Hamiltonian and integrals of an entry, in report order.
pub fn default_monitors(entry: &CatalogEntry) -> Vec<(String, Expr)> {
    let mut m = vec![("H".to_string(), entry.hamiltonian.clone())];
    m.extend(entry.integrals());
    m
}

/// Integrate `steps` implicit-midpoint steps from `x0`. Errors at the start
/// point are returned; failures later on truncate the trajectory at the
/// last valid state and record the reason.
pub fn integrate(
    entry: &CatalogEntry,
    x0: &PhasePoint,
    step: f64,
    steps: usize,
    monitors: &[(String, Expr)],
    opts: StepOptions,
) -> Result<Trajectory> {
    if x0.n() != entry.n {
        return Err(Error::InvalidPoint(format!("start point has {} degrees of freedom, entry has {}", x0.n(), entry.n)));
    }
    let params = &entry.params;
    let h = Compiled::new(&entry.hamiltonian, params)?;
    let mons: Vec<Compiled> = monitors.iter().map(|(_, e)| Compiled::new(e, params)).collect::<Result<_>>()?;
    let guards: Vec<Compiled> = entry.guards.iter().map(|g| Compiled::new(g, params)).collect::<Result<_>>()?;

    let eval_all = |cs: &[Compiled], x: &PhasePoint| -> Result<Vec<f64>> {
        cs.iter().map(|c| c.value(x).map_err(|e| e.at_point(&x.q, &x.p))).collect()
    };
    let guard_check = |vals: &[f64], prev: Option<&[f64]>| -> Option<String> {
        for (k, v) in vals.iter().enumerate() {
            if !v.is_finite() || v.abs() < GUARD_MARGIN {
                return Some(format!("guard {} = {v:e} is within {GUARD_MARGIN:e} of zero", entry.guards[k]));
            }
            if let Some(p) = prev {
                if p[k].signum() != v.signum() {
                    return Some(format!("guard {} changed sign", entry.guards[k]));
                }
            }
        }
        None
    };

    let mut values: Vec<Vec<f64>> = eval_all(&mons, x0)?.into_iter().map(|v| vec![v]).collect();
    let mut gprev = eval_all(&guards, x0)?;
    if let Some(msg) = guard_check(&gprev, None) {
        return Err(Error::Singular(format!("start point: {msg}")));
    }
    let mut times = vec![0.0];
    let mut states = vec![x0.clone()];
    let mut truncated = None;
    let mut x = x0.clone();
    for k in 1..=steps {
        let next = match implicit_midpoint_step(&h, &x, step, opts) {
            Ok(v) => v,
            Err(e) => {
                truncated = Some(format!("step {k}: {e}"));
                break;
            }
        };
        let reading = eval_all(&guards, &next).and_then(|g| Ok((g, eval_all(&mons, &next)?)));
        let (g, m) = match reading {
            Ok(v) => v,
            Err(e) => {
                truncated = Some(format!("step {k}: {e}"));
                break;
            }
        };
        if let Some(msg) = guard_check(&g, Some(&gprev)) {
            truncated = Some(format!("step {k}: {msg}"));
            break;
        }
        gprev = g;
        for (series, v) in values.iter_mut().zip(m) {
            series.push(v);
        }
        times.push(k as f64 * step);
        states.push(next.clone());
        x = next;
    }
    let monitors = monitors
        .iter()
        .zip(values)
        .map(|((name, _), vals)| {
            let v0 = vals[0];
            let drift = vals.iter().map(|v| (v - v0).abs()).fold(0.0, f64::max) / (v0.abs() + 1.0);
            Monitor { name: name.clone(), values: vals, drift }
        })
        .collect();
    Ok(Trajectory { step, times, states, monitors, truncated })
}

/// Ratio of the Hamiltonian drift at step `h` over `T = h * steps` to the
/// drift at `h/2` over the same time. Close to 4 for a second-order method.
pub fn step_halving_ratio(entry: &CatalogEntry, x0: &PhasePoint, step: f64, steps: usize) -> Result<f64> {
    let mon = [("H".to_string(), entry.hamiltonian.clone())];
    let opts = StepOptions::default();
    let coarse = integrate(entry, x0, step, steps, &mon, opts)?;
    let fine = integrate(entry, x0, step / 2.0, 2 * steps, &mon, opts)?;
    if let Some(r) = coarse.truncated.as_ref().or(fine.truncated.as_ref()) {
        return Err(Error::Singular(r.clone()));
    }
    Ok(coarse.monitors[0].drift / fine.monitors[0].drift)
}

/// Integrate `steps` forward, then `steps` backward, and return the max-norm
/// distance to the start point.
pub fn reversibility_error(entry: &CatalogEntry, x0: &PhasePoint, step: f64, steps: usize) -> Result<f64> {
    let opts = StepOptions::default();
    let fwd = integrate(entry, x0, step, steps, &[], opts)?;
    let end = fwd.states.last().expect("start point is always recorded");
    let back = integrate(entry, end, -step, steps, &[], opts)?;
    if let Some(r) = fwd.truncated.as_ref().or(back.truncated.as_ref()) {
        return Err(Error::Singular(r.clone()));
    }
    let last = back.states.last().expect("start point is always recorded");
    Ok(last.q.iter().zip(&x0.q).chain(last.p.iter().zip(&x0.p)).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::build::{p_squared, q_squared};

    fn oscillator() -> CatalogEntry {
        let h = 0.5 * (p_squared(1) + q_squared(1));
        CatalogEntry::new("osc", "oscillator", 1, h, ParamSet::new())
    }

    #[test]
    fn rhs_of_oscillator() {
        let x = PhasePoint::new(vec![1.0], vec![0.0]).unwrap();
        let (dq, dp) = hamiltons_rhs(&oscillator().hamiltonian, &x, &ParamSet::new()).unwrap();
        assert_eq!(dq, vec![0.0]);
        assert_eq!(dp, vec![-1.0]);
    }

    #[test]
    fn midpoint_conserves_quadratic_energy() {
        let e = oscillator();
        let x0 = PhasePoint::new(vec![1.0], vec![0.0]).unwrap();
        let t = integrate(&e, &x0, 0.01, 10_000, &default_monitors(&e), StepOptions::default()).unwrap();
        assert!(t.truncated.is_none());
        assert!(t.monitors[0].drift <= 1e-10, "{}", t.monitors[0].drift);
        // the midpoint rule rotates by 2 atan(h/2) per step
        let phase = 10_000.0 * 2.0 * (0.005f64).atan();
        let last = t.states.last().unwrap();
        assert!((last.q[0] - phase.cos()).abs() < 1e-9);
    }

    #[test]
    fn zero_step_is_rejected() {
        let e = oscillator();
        let c = Compiled::new(&e.hamiltonian, &e.params).unwrap();
        let x0 = PhasePoint::new(vec![1.0], vec![0.0]).unwrap();
        assert!(matches!(implicit_midpoint_step(&c, &x0, 0.0, StepOptions::default()), Err(Error::BadStep(_))));
    }

    #[test]
    fn csv_header_and_rows() {
        let e = oscillator();
        let x0 = PhasePoint::new(vec![1.0], vec![0.0]).unwrap();
        let t = integrate(&e, &x0, 0.1, 3, &default_monitors(&e), StepOptions::default()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "t,q1,p1,H");
        assert_eq!(lines.len(), 5);
    }
}
