//! System descriptions, weights, disturbances and truth generation.

mod duffing;
mod polynomial;
mod wave;

pub use duffing::{duffing_disturbances, duffing_model, DuffingParams};
pub use polynomial::{linear_model, Monomial, PolynomialModel};
pub use wave::{equidistant_sensors, wave_disturbances, wave_model, WaveDiscretization, WaveNonlinearity};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ode::{rk45_adaptive, DenseTrajectory, IntegratorConfig, Status};
use crate::scalar::Scalar;
use crate::tensor::{SpdFactor, Tensor};

/// Dynamics `ẋ = f(x) + G v`, output `y = h(x) + μ`, with derivative
/// tensors following `D^k g[i, j₁…j_k] = ∂_{j_k…j₁} g_i`.
pub trait SystemModel<T: Scalar>: Send + Sync {
    fn state_dim(&self) -> usize;
    fn disturbance_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    /// `G ∈ ℝ^{n×m}`.
    fn input_map(&self) -> &Tensor<T>;
    /// Largest derivative order supplied; `usize::MAX` when unlimited.
    fn max_order(&self) -> usize;

    /// Polynomial degree of `f` when known; derivatives beyond it vanish.
    fn f_degree(&self) -> Option<usize> {
        None
    }

    fn h_degree(&self) -> Option<usize> {
        None
    }

    fn f_into(&self, x: &[T], out: &mut [T]);
    fn h_into(&self, x: &[T], out: &mut [T]);

    /// `D^order f(x)`, order `order + 1`, first mode the output index.
    fn f_derivative(&self, order: usize, x: &[T]) -> Result<Tensor<T>>;
    /// `D^order h(x) ∈ ℝ^{p,n,…,n}`.
    fn h_derivative(&self, order: usize, x: &[T]) -> Result<Tensor<T>>;

    fn f(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.state_dim()];
        self.f_into(x, &mut out);
        out
    }

    fn h(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.output_dim()];
        self.h_into(x, &mut out);
        out
    }

    /// True when `D^order f` is identically zero.
    fn f_vanishes(&self, order: usize) -> bool {
        self.f_degree().is_some_and(|d| order > d)
    }

    fn h_vanishes(&self, order: usize) -> bool {
        self.h_degree().is_some_and(|d| order > d)
    }
}

pub(crate) fn check_order(order: usize, max: usize) -> Result<()> {
    if order == 0 || order > max {
        return Err(Error::MissingDerivative {
            requested: order,
            available: max,
        });
    }
    Ok(())
}

/// Weighting matrices Γ (initial state), R (process disturbance) and Q
/// (output residual).
#[derive(Clone, Debug, PartialEq)]
pub struct Weights<T> {
    pub gamma: Tensor<T>,
    pub r: Tensor<T>,
    pub q: Tensor<T>,
}

impl<T: Scalar> Weights<T> {
    pub fn new(gamma: Tensor<T>, r: Tensor<T>, q: Tensor<T>) -> Result<Self> {
        for (name, m) in [("Gamma", &gamma), ("R", &r), ("Q", &q)] {
            check_spd(name, m)?;
        }
        Ok(Self { gamma, r, q })
    }

    pub fn identity(n: usize, m: usize, p: usize) -> Self {
        Self {
            gamma: Tensor::identity(n),
            r: Tensor::identity(m),
            q: Tensor::identity(p),
        }
    }

    /// Γ = I, R = I, Q = q·I.
    pub fn scaled_output(n: usize, m: usize, p: usize, q: T) -> Result<Self> {
        Self::new(Tensor::identity(n), Tensor::identity(m), Tensor::identity(p).scale(q))
    }

    pub fn check_dims(&self, n: usize, m: usize, p: usize) -> Result<()> {
        for (name, mat, d) in [("Gamma", &self.gamma, n), ("R", &self.r, m), ("Q", &self.q, p)] {
            if mat.dims() != [d, d] {
                return Err(Error::DimensionMismatch(format!(
                    "{name} has dims {:?}, expected [{d}, {d}]",
                    mat.dims()
                )));
            }
        }
        Ok(())
    }
}

fn check_spd<T: Scalar>(name: &str, m: &Tensor<T>) -> Result<()> {
    if m.order() != 2 || m.rows() != m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{name} must be square, got {:?}",
            m.dims()
        )));
    }
    let n = m.rows();
    let tol = T::of(1e-12).max(T::epsilon() * T::of(8.0)) * (T::one() + m.norm_max());
    for i in 0..n {
        for j in 0..i {
            if (m.at(i, j) - m.at(j, i)).abs() > tol {
                return Err(Error::NotSymmetric((m.at(i, j) - m.at(j, i)).abs().as_f64()));
            }
        }
    }
    SpdFactor::new(m).map(|_| ())
}

pub type TimeFn<T> = Arc<dyn Fn(T) -> Vec<T> + Send + Sync>;

/// Initial-state offset η, process disturbance v(t), measurement noise μ(t)
/// and the modeled initial state x₀.
#[derive(Clone)]
pub struct DisturbanceSpec<T> {
    pub x0: Vec<T>,
    pub eta: Vec<T>,
    pub v: TimeFn<T>,
    pub mu: TimeFn<T>,
}

impl<T: Scalar> DisturbanceSpec<T> {
    pub fn new(
        x0: Vec<T>,
        eta: Vec<T>,
        v: impl Fn(T) -> Vec<T> + Send + Sync + 'static,
        mu: impl Fn(T) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            x0,
            eta,
            v: Arc::new(v),
            mu: Arc::new(mu),
        }
    }

    /// No disturbances at all; the truth starts at `x0`.
    pub fn zero(x0: Vec<T>, m: usize, p: usize) -> Self {
        let n = x0.len();
        Self::new(
            x0,
            vec![T::zero(); n],
            move |_| vec![T::zero(); m],
            move |_| vec![T::zero(); p],
        )
    }

    pub fn true_initial_state(&self) -> Vec<T> {
        self.x0.iter().zip(&self.eta).map(|(&a, &b)| a + b).collect()
    }
}

impl<T> fmt::Debug for DisturbanceSpec<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DisturbanceSpec")
            .field("x0", &self.x0)
            .field("eta", &self.eta)
            .finish_non_exhaustive()
    }
}

/// Time-continuous vector signal realized by cubic Hermite interpolation.
#[derive(Clone, Debug)]
pub struct Signal<T> {
    traj: DenseTrajectory<T>,
    derivs: Vec<Vec<T>>,
}

impl<T: Scalar> Signal<T> {
    pub fn new(grid: Vec<T>, values: Vec<Vec<T>>, derivs: Vec<Vec<T>>) -> Result<Self> {
        let dim = values.first().map_or(0, Vec::len);
        if values.iter().chain(&derivs).any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch("signal samples of unequal length".into()));
        }
        let traj = DenseTrajectory::from_hermite(grid, values, &derivs, Status::Completed)?;
        Ok(Self { traj, derivs })
    }

    pub fn dim(&self) -> usize {
        self.traj.stored_components()
    }

    pub fn start(&self) -> T {
        self.traj.start()
    }

    pub fn horizon(&self) -> T {
        self.traj.end()
    }

    pub fn grid(&self) -> &[T] {
        self.traj.times()
    }

    pub fn values(&self) -> &[Vec<T>] {
        self.traj.states()
    }

    pub fn derivatives(&self) -> &[Vec<T>] {
        &self.derivs
    }

    pub fn eval(&self, t: T) -> Result<Vec<T>> {
        self.traj.eval(t)
    }
}

/// True state and measurement signals.
#[derive(Clone, Debug)]
pub struct Truth<T> {
    pub state: Signal<T>,
    pub output: Signal<T>,
}

/// Observer default tolerances tightened by one decade.
pub fn truth_config<T: Scalar>() -> IntegratorConfig<T> {
    IntegratorConfig::with_tolerances(T::of(1e-7), T::of(1e-9))
}

/// Integrates `ẋ = f(x) + G v(t)` from `x₀ + η` and samples state and
/// output `y = h(x) + μ(t)` on `grid_points` uniform nodes over `[0, horizon]`.
pub fn simulate_truth<T: Scalar>(
    model: &dyn SystemModel<T>,
    dist: &DisturbanceSpec<T>,
    horizon: T,
    grid_points: usize,
    cfg: &IntegratorConfig<T>,
) -> Result<Truth<T>> {
    let (n, m, p) = (model.state_dim(), model.disturbance_dim(), model.output_dim());
    if grid_points < 2 {
        return Err(Error::InvalidArgument("truth grid needs at least two nodes".into()));
    }
    if dist.x0.len() != n || dist.eta.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: dist.x0.len().min(dist.eta.len()),
        });
    }
    let g = model.input_map();
    let drift = |t: T, x: &[T], out: &mut [T]| -> Result<()> {
        model.f_into(x, out);
        let v = (dist.v)(t);
        if v.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                got: v.len(),
            });
        }
        for (j, &vj) in v.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += g.at(i, j) * vj;
            }
        }
        Ok(())
    };
    let x_init = dist.true_initial_state();
    let traj = rk45_adaptive(drift, &x_init, (T::zero(), horizon), cfg);
    if let Status::Breakdown { t, reason } = traj.status() {
        return Err(Error::Breakdown {
            t: t.as_f64(),
            reason: reason.clone(),
        });
    }
    let grid = crate::ode::uniform_grid(T::zero(), horizon, grid_points);
    let fd = T::of(1e-6);
    let mut xs = Vec::with_capacity(grid_points);
    let mut dxs = Vec::with_capacity(grid_points);
    let mut ys = Vec::with_capacity(grid_points);
    let mut dys = Vec::with_capacity(grid_points);
    let mut dx = vec![T::zero(); n];
    for &t in &grid {
        let x = traj.eval(t)?;
        drift(t, &x, &mut dx)?;
        let mut y = model.h(&x);
        let mu = (dist.mu)(t);
        if mu.len() != p {
            return Err(Error::LengthMismatch {
                expected: p,
                got: mu.len(),
            });
        }
        let jh = model.h_derivative(1, &x)?;
        let mut dy = jh.matvec(&dx)?;
        let (mu_p, mu_m) = ((dist.mu)(t + fd), (dist.mu)(t - fd));
        for i in 0..p {
            y[i] += mu[i];
            dy[i] += (mu_p[i] - mu_m[i]) / (fd + fd);
        }
        xs.push(x);
        dxs.push(dx.clone());
        ys.push(y);
        dys.push(dy);
    }
    Ok(Truth {
        state: Signal::new(grid.clone(), xs, dxs)?,
        output: Signal::new(grid, ys, dys)?,
    })
}
