//! Time integration: adaptive Dormand–Prince 5(4) with dense output, and a
//! fixed-step classical Runge–Kutta scheme.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct IntegratorConfig<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
    /// Smallest admissible step; `None` means `1e-12 · |t_end − t_start|`.
    pub min_step: Option<T>,
    /// First trial step; `None` selects it automatically.
    pub initial_step: Option<T>,
}

impl<T: Scalar> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            rtol: T::of(1e-6),
            atol: T::of(1e-8),
            max_steps: 500_000,
            min_step: None,
            initial_step: None,
        }
    }
}

impl<T: Scalar> IntegratorConfig<T> {
    pub fn with_tolerances(rtol: T, atol: T) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > T::zero() && self.atol > T::zero()) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if let Some(h) = self.min_step {
            if !(h > T::zero()) {
                return Err(Error::InvalidArgument("min_step must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status<T> {
    Completed,
    Breakdown { t: T, reason: String },
}

impl<T: Copy> Status<T> {
    pub fn is_completed(&self) -> bool {
        matches!(self, Status::Completed)
    }

    pub fn breakdown_time(&self) -> Option<T> {
        match self {
            Status::Completed => None,
            Status::Breakdown { t, .. } => Some(*t),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Accepted nodes of an integration with a piecewise polynomial interpolant.
///
/// Only the first `stored` components are kept per node; the full final
/// state is always available through [`DenseTrajectory::final_state`].
#[derive(Clone, Debug)]
pub struct DenseTrajectory<T> {
    stored: usize,
    times: Vec<T>,
    states: Vec<Vec<T>>,
    // per interval: y(θ) = y_i + θ(c1 + (1−θ)(c2 + θ(c3 + (1−θ)c4)))
    segments: Vec<[Vec<T>; 4]>,
    final_state: Vec<T>,
    status: Status<T>,
    stats: Stats,
}

impl<T: Scalar> DenseTrajectory<T> {
    /// Piecewise cubic Hermite interpolant through nodes with known
    /// derivatives.
    pub fn from_hermite(times: Vec<T>, states: Vec<Vec<T>>, derivs: &[Vec<T>], status: Status<T>) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() || derivs.len() != states.len() {
            return Err(Error::LengthMismatch {
                expected: times.len(),
                got: states.len().min(derivs.len()),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        let dim = states[0].len();
        let mut segments = Vec::with_capacity(times.len() - 1);
        for i in 0..times.len() - 1 {
            let h = times[i + 1] - times[i];
            let mut c1 = vec![T::zero(); dim];
            let mut c2 = vec![T::zero(); dim];
            let mut c3 = vec![T::zero(); dim];
            for q in 0..dim {
                c1[q] = states[i + 1][q] - states[i][q];
                c2[q] = h * derivs[i][q] - c1[q];
                c3[q] = c1[q] - h * derivs[i + 1][q] - c2[q];
            }
            segments.push([c1, c2, c3, vec![T::zero(); dim]]);
        }
        Ok(Self {
            stored: dim,
            final_state: states.last().cloned().unwrap_or_default(),
            times,
            states,
            segments,
            status,
            stats: Stats::default(),
        })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    /// Stored (possibly truncated) state at each accepted node.
    pub fn states(&self) -> &[Vec<T>] {
        &self.states
    }

    pub fn stored_components(&self) -> usize {
        self.stored
    }

    pub fn final_state(&self) -> &[T] {
        &self.final_state
    }

    pub fn status(&self) -> &Status<T> {
        &self.status
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn start(&self) -> T {
        self.times[0]
    }

    pub fn end(&self) -> T {
        *self.times.last().expect("trajectory has at least one node")
    }

    pub fn covers(&self, t: T) -> bool {
        t >= self.start() && t <= self.end()
    }

    /// Evaluates the interpolant at `t` inside the covered span.
    pub fn eval(&self, t: T) -> Result<Vec<T>> {
        if !self.covers(t) {
            return Err(Error::OutOfSpan {
                t: t.as_f64(),
                start: self.start().as_f64(),
                end: self.end().as_f64(),
            });
        }
        let i = match self
            .times
            .binary_search_by(|s| s.partial_cmp(&t).expect("finite times"))
        {
            Ok(i) => return Ok(self.states[i].clone()),
            Err(i) => i - 1,
        };
        let h = self.times[i + 1] - self.times[i];
        let th = (t - self.times[i]) / h;
        let th1 = T::one() - th;
        let [c1, c2, c3, c4] = &self.segments[i];
        Ok((0..self.stored)
            .map(|q| self.states[i][q] + th * (c1[q] + th1 * (c2[q] + th * (c3[q] + th1 * c4[q]))))
            .collect())
    }
}

// Dormand–Prince 5(4) tableau
const C2: f64 = 0.2;
const C3: f64 = 0.3;
const C4: f64 = 0.8;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Adaptive Dormand–Prince integration keeping every component.
pub fn rk45_adaptive<T, F>(rhs: F, v0: &[T], span: (T, T), cfg: &IntegratorConfig<T>) -> DenseTrajectory<T>
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]) -> Result<()>,
{
    rk45_adaptive_with(rhs, v0, span, cfg, v0.len(), |_, _| Ok(()))
}

/// Adaptive Dormand–Prince integration.
///
/// `keep` leading components are stored for dense output. `on_step` sees the
/// full state after every accepted step; an error from it ends the
/// integration with a breakdown at that time. Failures of `rhs` during a
/// trial step cause the step to be retried with a smaller size; breakdown is
/// reported once the step size falls below the configured floor.
pub fn rk45_adaptive_with<T, F, O>(
    mut rhs: F,
    v0: &[T],
    span: (T, T),
    cfg: &IntegratorConfig<T>,
    keep: usize,
    mut on_step: O,
) -> DenseTrajectory<T>
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]) -> Result<()>,
    O: FnMut(T, &[T]) -> Result<()>,
{
    let dim = v0.len();
    let keep = keep.min(dim);
    let (t0, tend) = span;
    let c = T::of;
    let mut traj = DenseTrajectory {
        stored: keep,
        times: vec![t0],
        states: vec![v0[..keep].to_vec()],
        segments: Vec::new(),
        final_state: v0.to_vec(),
        status: Status::Completed,
        stats: Stats::default(),
    };
    let fail = |traj: &mut DenseTrajectory<T>, t: T, reason: String| {
        traj.status = Status::Breakdown { t, reason };
    };
    if let Err(e) = cfg.validate() {
        fail(&mut traj, t0, e.to_string());
        return traj;
    }
    let length = tend - t0;
    if !(length > T::zero()) {
        if length < T::zero() {
            fail(&mut traj, t0, "integration span must be increasing".into());
        }
        return traj;
    }
    let min_step = cfg.min_step.unwrap_or(c(1e-12) * length);
    let sk = |a: T, b: T| cfg.atol + cfg.rtol * a.abs().max(b.abs());

    let mut y = v0.to_vec();
    let mut k1 = vec![T::zero(); dim];
    let mut k2 = vec![T::zero(); dim];
    let mut k3 = vec![T::zero(); dim];
    let mut k4 = vec![T::zero(); dim];
    let mut k5 = vec![T::zero(); dim];
    let mut k6 = vec![T::zero(); dim];
    let mut k7 = vec![T::zero(); dim];
    let mut y1 = vec![T::zero(); dim];
    let mut ys = vec![T::zero(); dim];

    if let Err(e) = on_step(t0, &y) {
        fail(&mut traj, t0, e.to_string());
        return traj;
    }
    traj.stats.rhs_evals += 1;
    if let Err(e) = rhs(t0, &y, &mut k1) {
        fail(&mut traj, t0, e.to_string());
        return traj;
    }

    let mut h = match cfg.initial_step {
        Some(h) => h.min(length),
        None => {
            let (dnf, dny) = y.iter().zip(&k1).fold((T::zero(), T::zero()), |(a, b), (&yi, &fi)| {
                let s = sk(yi, yi);
                (a + (fi / s) * (fi / s), b + (yi / s) * (yi / s))
            });
            let mut h = if dnf <= c(1e-10) || dny <= c(1e-10) {
                c(1e-6)
            } else {
                (dny / dnf).sqrt() * c(0.01)
            };
            h = h.min(length);
            for q in 0..dim {
                y1[q] = y[q] + h * k1[q];
            }
            traj.stats.rhs_evals += 1;
            let h1 = match rhs(t0 + h, &y1, &mut k2) {
                Ok(()) => {
                    let der2 = (y
                        .iter()
                        .zip(k1.iter().zip(&k2))
                        .map(|(&yi, (&a, &b))| {
                            let s = sk(yi, yi);
                            ((b - a) / s) * ((b - a) / s)
                        })
                        .sum::<T>()
                        / T::of_usize(dim.max(1)))
                    .sqrt()
                        / h;
                    let der12 = der2.max((dnf / T::of_usize(dim.max(1))).sqrt());
                    if der12 <= c(1e-15) {
                        c(1e-6).max(h * c(1e-3))
                    } else {
                        (c(0.01) / der12).powf(c(0.2))
                    }
                }
                Err(_) => h * c(0.1),
            };
            (h * c(100.0)).min(h1).min(length)
        }
    };
    h = h.max(min_step);

    let expo1 = c(0.2 - BETA * 0.75);
    let mut facold = c(1e-4);
    let mut reject = false;
    let mut t = t0;

    loop {
        if traj.stats.accepted + traj.stats.rejected >= cfg.max_steps {
            fail(&mut traj, t, format!("step limit {} reached", cfg.max_steps));
            break;
        }
        if h < min_step {
            fail(&mut traj, t, format!("step size underflow (h = {:e})", h.as_f64()));
            break;
        }
        let mut last = false;
        if (t + h * c(1.01) - tend) >= T::zero() {
            h = tend - t;
            last = true;
        }

        let stage = (|| -> Result<()> {
            for q in 0..dim {
                ys[q] = y[q] + h * c(A21) * k1[q];
            }
            rhs(t + c(C2) * h, &ys, &mut k2)?;
            for q in 0..dim {
                ys[q] = y[q] + h * (c(A31) * k1[q] + c(A32) * k2[q]);
            }
            rhs(t + c(C3) * h, &ys, &mut k3)?;
            for q in 0..dim {
                ys[q] = y[q] + h * (c(A41) * k1[q] + c(A42) * k2[q] + c(A43) * k3[q]);
            }
            rhs(t + c(C4) * h, &ys, &mut k4)?;
            for q in 0..dim {
                ys[q] = y[q] + h * (c(A51) * k1[q] + c(A52) * k2[q] + c(A53) * k3[q] + c(A54) * k4[q]);
            }
            rhs(t + c(C5) * h, &ys, &mut k5)?;
            for q in 0..dim {
                ys[q] = y[q] + h * (c(A61) * k1[q] + c(A62) * k2[q] + c(A63) * k3[q] + c(A64) * k4[q] + c(A65) * k5[q]);
            }
            rhs(t + h, &ys, &mut k6)?;
            for q in 0..dim {
                y1[q] = y[q] + h * (c(A71) * k1[q] + c(A73) * k3[q] + c(A74) * k4[q] + c(A75) * k5[q] + c(A76) * k6[q]);
            }
            rhs(t + h, &y1, &mut k7)?;
            Ok(())
        })();
        traj.stats.rhs_evals += 6;

        let err = match stage {
            Ok(()) => {
                let mut acc = T::zero();
                for q in 0..dim {
                    let e = h
                        * (c(E1) * k1[q]
                            + c(E3) * k3[q]
                            + c(E4) * k4[q]
                            + c(E5) * k5[q]
                            + c(E6) * k6[q]
                            + c(E7) * k7[q]);
                    let r = e / sk(y[q], y1[q]);
                    acc += r * r;
                }
                (acc / T::of_usize(dim.max(1))).sqrt()
            }
            Err(_) => T::infinity(),
        };

        if !err.is_finite() {
            traj.stats.rejected += 1;
            h *= c(0.25);
            reject = true;
            if h < min_step {
                let reason = match stage {
                    Err(e) => e.to_string(),
                    Ok(()) => "non-finite error estimate".to_string(),
                };
                fail(&mut traj, t, format!("step size underflow: {reason}"));
                break;
            }
            continue;
        }

        let fac11 = err.powf(expo1);
        let fac = (fac11 / facold.powf(c(BETA)))
            .min(c(1.0 / FAC_MIN))
            .max(c(1.0 / FAC_MAX))
            / c(SAFETY);
        let fac = fac.min(c(1.0 / FAC_MIN)).max(c(1.0 / FAC_MAX));
        let mut hnew = h / fac;

        if err <= T::one() {
            facold = err.max(c(1e-4));
            traj.stats.accepted += 1;
            let mut seg = [
                vec![T::zero(); keep],
                vec![T::zero(); keep],
                vec![T::zero(); keep],
                vec![T::zero(); keep],
            ];
            for q in 0..keep {
                let ydiff = y1[q] - y[q];
                let bspl = h * k1[q] - ydiff;
                seg[0][q] = ydiff;
                seg[1][q] = bspl;
                seg[2][q] = ydiff - h * k7[q] - bspl;
                seg[3][q] =
                    h * (c(D1) * k1[q] + c(D3) * k3[q] + c(D4) * k4[q] + c(D5) * k5[q] + c(D6) * k6[q] + c(D7) * k7[q]);
            }
            t = if last { tend } else { t + h };
            std::mem::swap(&mut y, &mut y1);
            std::mem::swap(&mut k1, &mut k7);
            traj.times.push(t);
            traj.states.push(y[..keep].to_vec());
            traj.segments.push(seg);
            traj.final_state.copy_from_slice(&y);
            if let Err(e) = on_step(t, &y) {
                fail(&mut traj, t, e.to_string());
                break;
            }
            if last {
                break;
            }
            if reject {
                hnew = hnew.min(h);
                reject = false;
            }
        } else {
            hnew = h / c(1.0 / FAC_MIN).min(fac11 / c(SAFETY));
            reject = true;
            traj.stats.rejected += 1;
        }
        h = hnew;
    }
    traj
}

/// Error of a fixed-step run: the node at which the state became invalid.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedStepBreakdown {
    pub node: usize,
    pub reason: Error,
}

/// Classical four-stage Runge–Kutta on a uniform grid (increasing or
/// decreasing). Returns the state at every grid node.
pub fn rk4_fixed<T, F>(mut rhs: F, v0: &[T], grid: &[T]) -> std::result::Result<Vec<Vec<T>>, FixedStepBreakdown>
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]) -> Result<()>,
{
    let bad = |node, reason| FixedStepBreakdown { node, reason };
    if grid.len() < 2 {
        return Err(bad(0, Error::InvalidArgument("grid needs at least two nodes".into())));
    }
    let h = (grid[grid.len() - 1] - grid[0]) / T::of_usize(grid.len() - 1);
    let tol = T::of(1e-9) * h.abs() + T::epsilon() * T::of(16.0) * grid[0].abs().max(T::one());
    if grid.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > tol) {
        return Err(bad(0, Error::InvalidArgument("grid must be uniform".into())));
    }
    let dim = v0.len();
    let (mut k1, mut k2, mut k3, mut k4) = (
        vec![T::zero(); dim],
        vec![T::zero(); dim],
        vec![T::zero(); dim],
        vec![T::zero(); dim],
    );
    let mut tmp = vec![T::zero(); dim];
    let half = T::of(0.5);
    let sixth = T::one() / T::of(6.0);
    let mut out = Vec::with_capacity(grid.len());
    out.push(v0.to_vec());
    for i in 0..grid.len() - 1 {
        let t = grid[i];
        let h = grid[i + 1] - t;
        let y = &out[i];
        rhs(t, y, &mut k1).map_err(|e| bad(i, e))?;
        for q in 0..dim {
            tmp[q] = y[q] + half * h * k1[q];
        }
        rhs(t + half * h, &tmp, &mut k2).map_err(|e| bad(i, e))?;
        for q in 0..dim {
            tmp[q] = y[q] + half * h * k2[q];
        }
        rhs(t + half * h, &tmp, &mut k3).map_err(|e| bad(i, e))?;
        for q in 0..dim {
            tmp[q] = y[q] + h * k3[q];
        }
        rhs(t + h, &tmp, &mut k4).map_err(|e| bad(i, e))?;
        let next: Vec<T> = (0..dim)
            .map(|q| y[q] + h * sixth * (k1[q] + T::of(2.0) * (k2[q] + k3[q]) + k4[q]))
            .collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(bad(i + 1, Error::NonFinite(format!("state at node {}", i + 1))));
        }
        out.push(next);
    }
    Ok(out)
}

/// `n` uniform nodes spanning `[a, b]`.
pub fn uniform_grid<T: Scalar>(a: T, b: T, n: usize) -> Vec<T> {
    assert!(n >= 2, "grid needs at least two nodes");
    let h = (b - a) / T::of_usize(n - 1);
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + h * T::of_usize(i) })
        .collect()
}
