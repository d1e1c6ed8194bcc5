//! Reference Mortensen observer: value function evaluations through the
//! backwards-running open-loop control problem.
//!
//! Sign convention: the adjoint `p` solves `ṗ = −𝒥_fᵀp − 𝒥_hᵀQ(y − h(x))`
//! with `p(0) = Γ(x(0) − x₀)`, so that `p(t) = ∇_ξ𝒱(t, ξ)` and the reduced
//! gradient reads `Rv − Gᵀp`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::hoekf::{ObserverKind, ObserverTrajectory};
use crate::model::{Signal, SystemModel, Weights};
use crate::ode::{rk4_fixed, uniform_grid, DenseTrajectory, Status};
use crate::scalar::{dot, norm2, Scalar};
use crate::tensor::{SpdFactor, Tensor};

/// Gradient descent settings of the open-loop solves.
#[derive(Clone, Debug, PartialEq)]
pub struct GdConfig<T> {
    /// Relative gradient-norm tolerance of plain value evaluations.
    pub rel_tol: T,
    /// Tolerance of solves that feed finite differences or minimization.
    pub fine_rel_tol: T,
    /// Absolute floor added to the gradient-norm test.
    pub abs_tol: T,
    pub max_iters: usize,
    pub inner_grid_points: usize,
    /// Hessian differencing step, scaled by `1 + ‖ξ‖`.
    pub fd_step: T,
    /// Step length of the first descent iteration.
    pub first_step: T,
}

impl<T: Scalar> Default for GdConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::of(1e-6),
            fine_rel_tol: T::of(1e-8),
            abs_tol: T::of(1e-12),
            max_iters: 5000,
            inner_grid_points: 501,
            fd_step: T::of(1e-4),
            first_step: T::of(1e-4),
        }
    }
}

impl<T: Scalar> GdConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("rel_tol", self.rel_tol),
            ("fine_rel_tol", self.fine_rel_tol),
            ("abs_tol", self.abs_tol),
            ("fd_step", self.fd_step),
            ("first_step", self.first_step),
        ];
        for (name, v) in pos {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be positive".into()));
        }
        if self.inner_grid_points < 2 {
            return Err(Error::InvalidArgument("inner_grid_points must be at least 2".into()));
        }
        Ok(())
    }
}

/// Optimal (or best found) open-loop control for `𝒥(t, ξ; ·)`.
#[derive(Clone, Debug)]
pub struct OpenLoopSolution<T> {
    pub t: T,
    pub xi: Vec<T>,
    pub value: T,
    pub grid: Vec<T>,
    /// `v(s)` per grid node.
    pub control: Vec<Vec<T>>,
    /// `x(s)` per grid node, `x(t) = ξ`.
    pub state: Vec<Vec<T>>,
    /// `p(s)` per grid node.
    pub adjoint: Vec<Vec<T>>,
    pub iterations: usize,
    pub converged: bool,
    /// L²-norm of the reduced gradient at the returned iterate.
    pub grad_norm: T,
    /// Last Barzilai–Borwein step; the first trial step of warm starts.
    pub step: T,
}

impl<T: Scalar> OpenLoopSolution<T> {
    /// `∇_ξ𝒱(t, ξ) = p(t)`.
    pub fn gradient(&self) -> &[T] {
        self.adjoint.last().expect("adjoint has at least one node")
    }

    /// Control at `s ∈ [0, t]`, linear between nodes and held constant
    /// beyond `t`.
    pub fn control_at(&self, s: T) -> Vec<T> {
        let n = self.grid.len();
        if n < 2 || s <= T::zero() {
            return self.control[0].clone();
        }
        if s >= self.t {
            return self.control[n - 1].clone();
        }
        let h = self.t / T::of_usize(n - 1);
        let u = s / h;
        let i = u.floor().to_usize().unwrap_or(0).min(n - 2);
        let th = u - T::of_usize(i);
        self.control[i]
            .iter()
            .zip(&self.control[i + 1])
            .map(|(&a, &b)| a + th * (b - a))
            .collect()
    }
}

/// Symmetrized finite-difference Hessian of the value function.
#[derive(Clone, Debug)]
pub struct HessianEval<T> {
    pub hessian: Tensor<T>,
    /// `max|H − Hᵀ| / max|H|` before symmetrization.
    pub raw_asymmetry: T,
    pub spd: bool,
    pub converged: bool,
    /// Gradient-descent iterations of every inner solve.
    pub iterations: Vec<usize>,
}

/// Warm-start slots for the `2n` perturbed solves of a Hessian evaluation.
#[derive(Clone, Debug, Default)]
pub struct WarmStarts<T> {
    slots: Vec<Option<OpenLoopSolution<T>>>,
}

impl<T: Scalar> WarmStarts<T> {
    pub fn new() -> Self {
        Self { slots: Vec::new() }
    }

    fn slot(&mut self, i: usize) -> &mut Option<OpenLoopSolution<T>> {
        if self.slots.len() <= i {
            self.slots.resize(i + 1, None);
        }
        &mut self.slots[i]
    }
}

#[derive(Clone, Debug)]
pub struct MinimizeResult<T> {
    pub x: Vec<T>,
    pub value: T,
    pub grad_norm: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Mortensen trajectory with per-solve diagnostics.
#[derive(Clone, Debug)]
pub struct MortensenRun<T> {
    pub trajectory: ObserverTrajectory<T>,
    /// Iterations of every inner open-loop solve, in call order.
    pub solve_iterations: Vec<usize>,
}

/// Oracle for one model, weight set, measurement record and prior mean.
pub struct Oracle<'a, T: Scalar> {
    model: &'a dyn SystemModel<T>,
    weights: &'a Weights<T>,
    y: &'a Signal<T>,
    x0: Vec<T>,
    cfg: GdConfig<T>,
}

impl<'a, T: Scalar> Oracle<'a, T> {
    pub fn new(
        model: &'a dyn SystemModel<T>,
        weights: &'a Weights<T>,
        x0: &[T],
        y: &'a Signal<T>,
        cfg: GdConfig<T>,
    ) -> Result<Self> {
        cfg.validate()?;
        let (n, m, p) = (model.state_dim(), model.disturbance_dim(), model.output_dim());
        weights.check_dims(n, m, p)?;
        if x0.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: x0.len(),
            });
        }
        if y.dim() != p {
            return Err(Error::DimensionMismatch(format!(
                "measurement has dimension {}, model output {p}",
                y.dim()
            )));
        }
        if model.max_order() < 1 {
            return Err(Error::MissingDerivative {
                requested: 1,
                available: 0,
            });
        }
        Ok(Self {
            model,
            weights,
            y,
            x0: x0.to_vec(),
            cfg,
        })
    }

    pub fn config(&self) -> &GdConfig<T> {
        &self.cfg
    }

    /// `𝒱(0, ξ) = ½‖ξ − x₀‖²_Γ`.
    pub fn initial_value(&self, xi: &[T]) -> Result<T> {
        let d = self.offset(xi)?;
        Ok(T::of(0.5) * dot(&d, &self.weights.gamma.matvec(&d)?))
    }

    fn offset(&self, xi: &[T]) -> Result<Vec<T>> {
        if xi.len() != self.x0.len() {
            return Err(Error::LengthMismatch {
                expected: self.x0.len(),
                got: xi.len(),
            });
        }
        Ok(xi.iter().zip(&self.x0).map(|(&a, &b)| a - b).collect())
    }

    /// Minimizes `𝒥(t, ξ; ·)` at the default tolerance.
    pub fn solve_open_loop(&self, t: T, xi: &[T], warm: Option<&OpenLoopSolution<T>>) -> Result<OpenLoopSolution<T>> {
        self.solve_with_tol(t, xi, warm, self.cfg.rel_tol)
    }

    /// Minimizes `𝒥(t, ξ; ·)` until `‖∇_v𝒥‖ ≤ tol·max(‖Rv‖, ‖Gᵀp‖) + abs_tol`.
    pub fn solve_with_tol(
        &self,
        t: T,
        xi: &[T],
        warm: Option<&OpenLoopSolution<T>>,
        tol: T,
    ) -> Result<OpenLoopSolution<T>> {
        let horizon = self.y.horizon();
        if !(t >= T::zero()) || t > horizon {
            return Err(Error::OutOfSpan {
                t: t.as_f64(),
                start: 0.0,
                end: horizon.as_f64(),
            });
        }
        let m = self.model.disturbance_dim();
        if t == T::zero() {
            let d = self.offset(xi)?;
            return Ok(OpenLoopSolution {
                t,
                xi: xi.to_vec(),
                value: self.initial_value(xi)?,
                grid: vec![T::zero()],
                control: vec![vec![T::zero(); m]],
                state: vec![xi.to_vec()],
                adjoint: vec![self.weights.gamma.matvec(&d)?],
                iterations: 0,
                converged: true,
                grad_norm: T::zero(),
                step: self.cfg.first_step,
            });
        }
        self.offset(xi)?;
        let prob = Discretization::new(self, t, xi)?;
        let mut alpha = self.cfg.first_step;
        let v0: Vec<T> = match warm {
            Some(w) if w.control.first().is_some_and(|c| c.len() == m) => {
                alpha = w.step;
                prob.grid.iter().flat_map(|&s| w.control_at(s)).collect()
            }
            _ => vec![T::zero(); prob.grid.len() * m],
        };
        let mut cur = prob.evaluate(&v0)?;
        let mut recent: VecDeque<T> = VecDeque::from([cur.cost]);
        let mut iterations = 0;
        let mut converged = false;
        let mut gnorm;
        loop {
            gnorm = prob.norm(&cur.g);
            if gnorm <= tol * cur.scale + self.cfg.abs_tol {
                converged = true;
                break;
            }
            if iterations >= self.cfg.max_iters {
                break;
            }
            let jmax = recent.iter().copied().fold(T::neg_infinity(), T::max);
            // the adjoint gradient is consistent with the discrete cost only
            // up to discretization error; tiny increases are tolerated
            let slack = T::of(1e-9) * (T::one() + jmax.abs());
            let mut step = alpha;
            let mut next = None;
            for _ in 0..50 {
                let trial: Vec<T> = cur.v.iter().zip(&cur.g).map(|(&v, &g)| v - step * g).collect();
                if let Ok(e) = prob.evaluate(&trial) {
                    if e.cost <= jmax - T::of(1e-4) * step * gnorm * gnorm + slack {
                        next = Some(e);
                        break;
                    }
                }
                step *= T::of(0.5);
            }
            let Some(next) = next else { break };
            let s: Vec<T> = next.v.iter().zip(&cur.v).map(|(&a, &b)| a - b).collect();
            let dg: Vec<T> = next.g.iter().zip(&cur.g).map(|(&a, &b)| a - b).collect();
            let sy = prob.inner(&s, &dg);
            let ss = prob.inner(&s, &s);
            alpha = if sy > T::zero() { ss / sy } else { step * T::of(2.0) };
            alpha = alpha.max(T::of(1e-12)).min(T::of(1e12));
            cur = next;
            iterations += 1;
            recent.push_back(cur.cost);
            if recent.len() > 10 {
                recent.pop_front();
            }
        }
        let control = cur.v.chunks(m.max(1)).map(<[T]>::to_vec).collect();
        Ok(OpenLoopSolution {
            t,
            xi: xi.to_vec(),
            value: cur.cost,
            grid: prob.grid,
            control,
            state: cur.x,
            adjoint: cur.p,
            iterations,
            converged,
            grad_norm: gnorm,
            step: alpha,
        })
    }

    /// `∇_ξ𝒱(t, ξ)` with the solution it was read from.
    pub fn value_grad(
        &self,
        t: T,
        xi: &[T],
        warm: Option<&OpenLoopSolution<T>>,
    ) -> Result<(Vec<T>, OpenLoopSolution<T>)> {
        let sol = self.solve_open_loop(t, xi, warm)?;
        Ok((sol.gradient().to_vec(), sol))
    }

    /// Central differences of `value_grad` with step `fd_step·(1 + ‖ξ‖)`.
    pub fn value_hessian(&self, t: T, xi: &[T], warm: &mut WarmStarts<T>) -> Result<HessianEval<T>> {
        let n = self.x0.len();
        self.offset(xi)?;
        if t == T::zero() {
            let g = self.weights.gamma.clone();
            return Ok(HessianEval {
                spd: true,
                hessian: g,
                raw_asymmetry: T::zero(),
                converged: true,
                iterations: Vec::new(),
            });
        }
        let h = self.cfg.fd_step * (T::one() + norm2(xi));
        let mut raw = Tensor::zeros(&[n, n]);
        let mut converged = true;
        let mut iterations = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut grads = Vec::with_capacity(2);
            for (k, sign) in [T::one(), -T::one()].into_iter().enumerate() {
                let mut x = xi.to_vec();
                x[i] += sign * h;
                let slot = warm.slot(2 * i + k);
                let sol = self.solve_with_tol(t, &x, slot.as_ref(), self.cfg.fine_rel_tol)?;
                converged &= sol.converged;
                iterations.push(sol.iterations);
                grads.push(sol.gradient().to_vec());
                *slot = Some(sol);
            }
            for r in 0..n {
                raw.set(&[r, i], (grads[0][r] - grads[1][r]) / (T::of(2.0) * h));
            }
        }
        let mut asym = T::zero();
        let mut sym = raw.clone();
        for r in 0..n {
            for c in 0..n {
                asym = asym.max((raw.at(r, c) - raw.at(c, r)).abs());
                sym.set(&[r, c], T::of(0.5) * (raw.at(r, c) + raw.at(c, r)));
            }
        }
        let scale = raw.norm_max();
        Ok(HessianEval {
            spd: SpdFactor::new(&sym).is_ok(),
            hessian: sym,
            raw_asymmetry: if scale > T::zero() { asym / scale } else { asym },
            converged,
            iterations,
        })
    }

    /// Barzilai–Borwein descent on `ξ ↦ 𝒱(t, ξ)` from `x_init`.
    pub fn minimize_value(&self, t: T, x_init: &[T]) -> Result<MinimizeResult<T>> {
        self.offset(x_init)?;
        if t == T::zero() {
            return Ok(MinimizeResult {
                x: self.x0.clone(),
                value: T::zero(),
                grad_norm: T::zero(),
                iterations: 0,
                converged: true,
            });
        }
        let tol = self.cfg.fine_rel_tol;
        let mut sol = self.solve_with_tol(t, x_init, None, tol)?;
        let mut x = x_init.to_vec();
        let mut g = sol.gradient().to_vec();
        let g0 = norm2(&g);
        let target = self.cfg.rel_tol * g0.max(T::one());
        let mut alpha = T::one() / self.weights.gamma.norm_max().max(T::one());
        let mut iterations = 0;
        let mut converged = sol.converged;
        while norm2(&g) > target {
            if iterations >= self.cfg.max_iters {
                converged = false;
                break;
            }
            let gg = dot(&g, &g);
            let mut step = alpha;
            let mut next = None;
            for _ in 0..50 {
                let trial: Vec<T> = x.iter().zip(&g).map(|(&a, &b)| a - step * b).collect();
                let s = self.solve_with_tol(t, &trial, Some(&sol), tol)?;
                let slack = T::epsilon() * T::of(100.0) * (T::one() + sol.value.abs());
                if s.value <= sol.value - T::of(1e-4) * step * gg + slack {
                    next = Some((trial, s));
                    break;
                }
                step *= T::of(0.5);
            }
            let Some((xn, sn)) = next else {
                converged = false;
                break;
            };
            let gn = sn.gradient().to_vec();
            let s: Vec<T> = xn.iter().zip(&x).map(|(&a, &b)| a - b).collect();
            let dg: Vec<T> = gn.iter().zip(&g).map(|(&a, &b)| a - b).collect();
            let sy = dot(&s, &dg);
            alpha = if sy > T::zero() {
                dot(&s, &s) / sy
            } else {
                step * T::of(2.0)
            };
            converged &= sn.converged;
            x = xn;
            g = gn;
            sol = sn;
            iterations += 1;
        }
        Ok(MinimizeResult {
            grad_norm: norm2(&g),
            value: sol.value,
            x,
            iterations,
            converged,
        })
    }

    /// Fixed-step RK4 on `ẋ = f(x) + (∇²𝒱)⁻¹𝒥_hᵀQ(y − h(x))` from `x₀` over
    /// `[0, horizon]`. Stops early once an inner solve fails to converge.
    pub fn integrate_mortensen(&self, horizon: T, steps: usize) -> Result<MortensenRun<T>> {
        if steps == 0 {
            return Err(Error::InvalidArgument("need at least one step".into()));
        }
        let n = self.x0.len();
        if n > 4 {
            return Err(Error::InvalidArgument(format!(
                "observer integration is limited to n ≤ 4, got {n}"
            )));
        }
        if horizon > self.y.horizon() || !(horizon > T::zero()) {
            return Err(Error::OutOfSpan {
                t: horizon.as_f64(),
                start: 0.0,
                end: self.y.horizon().as_f64(),
            });
        }
        let grid = uniform_grid(T::zero(), horizon, steps + 1);
        let mut warm = WarmStarts::new();
        let mut iters = Vec::new();
        let mut field = |s: T, x: &[T]| -> Result<(Vec<T>, T)> {
            let he = self.value_hessian(s, x, &mut warm)?;
            iters.extend_from_slice(&he.iterations);
            if !he.converged {
                return Err(Error::Breakdown {
                    t: s.as_f64(),
                    reason: "open-loop solve did not converge".into(),
                });
            }
            let fac = SpdFactor::new(&he.hessian)?;
            let resid: Vec<T> = self
                .y
                .eval(s)?
                .iter()
                .zip(self.model.h(x))
                .map(|(&a, b)| a - b)
                .collect();
            let jh = self.model.h_derivative(1, x)?;
            let b = jh.transpose()?.matvec(&self.weights.q.matvec(&resid)?)?;
            let gain = fac.solve_slice(&b)?;
            let mut dx = self.model.f(x);
            for (d, g) in dx.iter_mut().zip(gain) {
                *d += g;
            }
            Ok((dx, fac.min_pivot()))
        };
        let mut xs = vec![self.x0.clone()];
        let mut ds = Vec::new();
        let mut min_eig = Vec::new();
        let mut status = Status::Completed;
        let half = T::of(0.5);
        for i in 0..=steps {
            let (s, x) = (grid[i], xs[i].clone());
            let k1 = match field(s, &x) {
                Ok((k, e)) => {
                    min_eig.push(e);
                    k
                }
                Err(e) => {
                    status = breakdown(s, e);
                    xs.truncate(i);
                    break;
                }
            };
            ds.push(k1.clone());
            if i == steps {
                break;
            }
            let h = grid[i + 1] - s;
            let shift = |k: &[T], c: T| -> Vec<T> { x.iter().zip(k).map(|(&a, &b)| a + c * b).collect() };
            let stages = (|| -> Result<Vec<T>> {
                let k2 = field(s + half * h, &shift(&k1, half * h))?.0;
                let k3 = field(s + half * h, &shift(&k2, half * h))?.0;
                let k4 = field(s + h, &shift(&k3, h))?.0;
                Ok((0..n)
                    .map(|q| x[q] + h / T::of(6.0) * (k1[q] + T::of(2.0) * (k2[q] + k3[q]) + k4[q]))
                    .collect())
            })();
            match stages {
                Ok(next) if next.iter().all(|v| v.is_finite()) => xs.push(next),
                Ok(_) => {
                    status = breakdown(s, Error::NonFinite(format!("observer state after t = {s}")));
                    break;
                }
                Err(e) => {
                    status = breakdown(s, e);
                    break;
                }
            }
        }
        if xs.is_empty() {
            return Err(Error::Breakdown {
                t: 0.0,
                reason: "observer field unavailable at the initial time".into(),
            });
        }
        let times = grid[..xs.len()].to_vec();
        let traj = DenseTrajectory::from_hermite(times, xs, &ds, status)?;
        Ok(MortensenRun {
            trajectory: ObserverTrajectory::from_parts(ObserverKind::Mortensen, n, traj, min_eig, Vec::new()),
            solve_iterations: iters,
        })
    }
}

fn breakdown<T: Scalar>(t: T, e: Error) -> Status<T> {
    let reason = match e {
        Error::Breakdown { reason, .. } => reason,
        other => other.to_string(),
    };
    Status::Breakdown { t, reason }
}

/// Uniform control grid on `[0, t]` with the measurement sampled at nodes
/// and midpoints.
struct Discretization<'o, 'a, T: Scalar> {
    oracle: &'o Oracle<'a, T>,
    xi: Vec<T>,
    grid: Vec<T>,
    h: T,
    quad: Vec<T>,
    y_node: Vec<Vec<T>>,
    y_mid: Vec<Vec<T>>,
}

struct Iterate<T> {
    v: Vec<T>,
    g: Vec<T>,
    x: Vec<Vec<T>>,
    p: Vec<Vec<T>>,
    cost: T,
    /// `max(‖Rv‖, ‖Gᵀp‖)`.
    scale: T,
}

impl<'o, 'a, T: Scalar> Discretization<'o, 'a, T> {
    fn new(oracle: &'o Oracle<'a, T>, t: T, xi: &[T]) -> Result<Self> {
        let npts = oracle.cfg.inner_grid_points;
        let grid = uniform_grid(T::zero(), t, npts);
        let h = t / T::of_usize(npts - 1);
        let mut quad = vec![h; npts];
        quad[0] = h * T::of(0.5);
        quad[npts - 1] = h * T::of(0.5);
        let y_node = grid.iter().map(|&s| oracle.y.eval(s)).collect::<Result<Vec<_>>>()?;
        let y_mid = grid
            .windows(2)
            .map(|w| oracle.y.eval(w[0] + T::of(0.5) * (w[1] - w[0])))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            oracle,
            xi: xi.to_vec(),
            grid,
            h,
            quad,
            y_node,
            y_mid,
        })
    }

    fn m(&self) -> usize {
        self.oracle.model.disturbance_dim()
    }

    fn inner(&self, a: &[T], b: &[T]) -> T {
        let m = self.m();
        a.chunks(m)
            .zip(b.chunks(m))
            .zip(&self.quad)
            .map(|((x, y), &w)| w * dot(x, y))
            .sum()
    }

    fn norm(&self, a: &[T]) -> T {
        self.inner(a, a).sqrt()
    }

    fn evaluate(&self, v: &[T]) -> Result<Iterate<T>> {
        let or = self.oracle;
        let model = or.model;
        let (n, m, pdim) = (model.state_dim(), self.m(), model.output_dim());
        let npts = self.grid.len();
        let g = model.input_map().as_slice();
        // ẋ = f(x) + G v(s), v linear between nodes
        let drift = |s: T, x: &[T], out: &mut [T]| {
            model.f_into(x, out);
            let u = (s / self.h).max(T::zero());
            let i = u.floor().to_usize().unwrap_or(0).min(npts - 2);
            let th = u - T::of_usize(i);
            for c in 0..m {
                let vc = v[i * m + c] + th * (v[(i + 1) * m + c] - v[i * m + c]);
                for (r, o) in out.iter_mut().enumerate() {
                    *o += g[r + n * c] * vc;
                }
            }
        };
        let rev: Vec<T> = self.grid.iter().rev().copied().collect();
        let mut x = rk4_fixed(
            |s, x, out| {
                drift(s, x, out);
                Ok(())
            },
            &self.xi,
            &rev,
        )
        .map_err(|b| b.reason)?;
        x.reverse();
        let half = T::of(0.5);
        let h = self.h;
        // adjoint field ṗ = −𝒥_fᵀp − b at nodes (even slots) and midpoints
        let q = or.weights.q.as_slice();
        let slots = 2 * npts - 1;
        let mut jac = vec![T::zero(); slots * n * n];
        let mut bvec = vec![T::zero(); slots * n];
        let mut running = T::zero();
        let (mut hx, mut r, mut qr) = (vec![T::zero(); pdim], vec![T::zero(); pdim], vec![T::zero(); pdim]);
        let (mut xd0, mut xd1, mut xm) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
        for slot in 0..slots {
            let i = slot / 2;
            let (xs, ys): (&[T], &[T]) = if slot % 2 == 0 {
                (&x[i], &self.y_node[i])
            } else {
                drift(self.grid[i], &x[i], &mut xd0);
                drift(self.grid[i + 1], &x[i + 1], &mut xd1);
                for k in 0..n {
                    xm[k] = half * (x[i][k] + x[i + 1][k]) + h / T::of(8.0) * (xd0[k] - xd1[k]);
                }
                (&xm, &self.y_mid[i])
            };
            let jf = model.f_derivative(1, xs)?;
            let jh = model.h_derivative(1, xs)?;
            model.h_into(xs, &mut hx);
            for k in 0..pdim {
                r[k] = ys[k] - hx[k];
            }
            for a in 0..pdim {
                qr[a] = (0..pdim).map(|b| q[a + pdim * b] * r[b]).sum();
            }
            let (jfs, jhs) = (jf.as_slice(), jh.as_slice());
            for j in 0..n {
                bvec[slot * n + j] = (0..pdim).map(|a| jhs[a + pdim * j] * qr[a]).sum();
                for i2 in 0..n {
                    jac[slot * n * n + i2 + n * j] = jfs[i2 + n * j];
                }
            }
            if slot % 2 == 0 {
                running += self.quad[i] * dot(&r, &qr);
            }
        }
        let field = |slot: usize, p: &[T], out: &mut [T]| {
            let jb = &jac[slot * n * n..(slot + 1) * n * n];
            for j in 0..n {
                let mut acc = bvec[slot * n + j];
                for i in 0..n {
                    acc += jb[i + n * j] * p[i];
                }
                out[j] = -acc;
            }
        };
        let mut p = Vec::with_capacity(npts);
        let d0: Vec<T> = x[0].iter().zip(&or.x0).map(|(&a, &b)| a - b).collect();
        let gd0 = or.weights.gamma.matvec(&d0)?;
        let mut cost = half * dot(&d0, &gd0);
        p.push(gd0);
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
            vec![T::zero(); n],
            vec![T::zero(); n],
            vec![T::zero(); n],
            vec![T::zero(); n],
            vec![T::zero(); n],
        );
        for i in 0..npts - 1 {
            let pi = &p[i];
            field(2 * i, pi, &mut k1);
            for k in 0..n {
                tmp[k] = pi[k] + half * h * k1[k];
            }
            field(2 * i + 1, &tmp, &mut k2);
            for k in 0..n {
                tmp[k] = pi[k] + half * h * k2[k];
            }
            field(2 * i + 1, &tmp, &mut k3);
            for k in 0..n {
                tmp[k] = pi[k] + h * k3[k];
            }
            field(2 * i + 2, &tmp, &mut k4);
            let pn: Vec<T> = (0..n)
                .map(|k| pi[k] + h / T::of(6.0) * (k1[k] + T::of(2.0) * (k2[k] + k3[k]) + k4[k]))
                .collect();
            p.push(pn);
        }
        let rm = or.weights.r.as_slice();
        let mut grad = vec![T::zero(); npts * m];
        let (mut rv2, mut gp2) = (T::zero(), T::zero());
        for i in 0..npts {
            let vi = &v[i * m..(i + 1) * m];
            for c in 0..m {
                let rv: T = (0..m).map(|d| rm[c + m * d] * vi[d]).sum();
                let gtp: T = (0..n).map(|k| g[k + n * c] * p[i][k]).sum();
                running += self.quad[i] * vi[c] * rv;
                grad[i * m + c] = rv - gtp;
                rv2 += self.quad[i] * rv * rv;
                gp2 += self.quad[i] * gtp * gtp;
            }
        }
        cost += half * running;
        if !cost.is_finite() || grad.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("open-loop iterate".into()));
        }
        Ok(Iterate {
            v: v.to_vec(),
            g: grad,
            x,
            p,
            cost,
            scale: rv2.sqrt().max(gp2.sqrt()),
        })
    }
}

#[cfg(test)]
mod tests;
