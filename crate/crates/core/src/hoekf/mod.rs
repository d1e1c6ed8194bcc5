//! Higher order extended Kalman filters: the coupled system for the
//! estimate `x̂` and the value function derivatives `P₂, …, P_k` along it.

mod kalman;
mod metrics;
mod trajectory;

pub use kalman::{run_ekf, run_kf};
pub use metrics::relative_distance;
pub use trajectory::{ObserverKind, ObserverTrajectory};

use crate::error::{Error, Result};
use crate::model::{Signal, SystemModel, Weights};
use crate::ode::{rk45_adaptive_with, IntegratorConfig};
use crate::scalar::Scalar;
use crate::tensor::{sym_shuffle, SpdFactor, Symmetrizer, Tensor};

/// Estimate and value function derivatives `P_j`, `j = 2..=k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObserverState<T> {
    pub x: Vec<T>,
    /// `p[j - 2]` is `P_j`.
    pub p: Vec<Tensor<T>>,
}

impl<T: Scalar> ObserverState<T> {
    /// `x̂(0) = x₀`, `P₂(0) = Γ`, `P_j(0) = 0`.
    pub fn initial(k: usize, x0: &[T], gamma: &Tensor<T>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("observer order {k} < 2")));
        }
        let n = x0.len();
        if gamma.dims() != [n, n] {
            return Err(Error::DimensionMismatch(format!(
                "Gamma {:?} for state dimension {n}",
                gamma.dims()
            )));
        }
        SpdFactor::new(gamma)?;
        let mut p = vec![gamma.clone()];
        p.extend((3..=k).map(|j| Tensor::cube(n, j)));
        Ok(Self { x: x0.to_vec(), p })
    }

    pub fn order(&self) -> usize {
        self.p.len() + 1
    }

    pub fn state_dim(&self) -> usize {
        self.x.len()
    }

    /// `P_j` for `2 ≤ j ≤ k`.
    pub fn p(&self, j: usize) -> &Tensor<T> {
        &self.p[j - 2]
    }

    /// Layout `[x | vec(P₂) | … | vec(P_k)]`.
    pub fn flatten(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(flat_len(self.state_dim(), self.order()));
        v.extend_from_slice(&self.x);
        for p in &self.p {
            v.extend_from_slice(p.as_slice());
        }
        v
    }

    pub fn unflatten(v: &[T], n: usize, k: usize) -> Result<Self> {
        let len = flat_len(n, k);
        if v.len() != len || k < 2 {
            return Err(Error::LengthMismatch {
                expected: len,
                got: v.len(),
            });
        }
        let mut off = n;
        let mut p = Vec::with_capacity(k - 1);
        for j in 2..=k {
            let size = n.pow(j as u32);
            p.push(Tensor::from_vec(&vec![n; j], v[off..off + size].to_vec())?);
            off += size;
        }
        Ok(Self { x: v[..n].to_vec(), p })
    }
}

/// `n + Σ_{j=2}^{k} n^j`.
pub fn flat_len(n: usize, k: usize) -> usize {
    n + (2..=k).map(|j| n.pow(j as u32)).sum::<usize>()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CouplingSign {
    /// `+P_{j+1} *_{1,1} P₂⁻¹𝒥_hᵀQ(y − h)`, as obtained from the chain rule.
    #[default]
    Derived,
    /// Opposite sign, for comparison.
    Negated,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InnovationArgument {
    /// `Q(y − h(x̂))` in the `D^ℓh` source term.
    #[default]
    Output,
    /// `Q(y − x̂)`; needs `p = n`.
    StateResidual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HoekfOptions {
    pub coupling: CouplingSign,
    /// Include `Q` in the gain `P₂⁻¹𝒥_hᵀQ(y − h)`.
    pub gain_with_q: bool,
    pub innovation: InnovationArgument,
    /// Project every `Ṗ_j` onto symmetric tensors.
    pub symmetrize: bool,
    /// Keep all `P_j` in the dense output (otherwise only `x̂` and `P₂`).
    pub store_tensors: bool,
}

impl Default for HoekfOptions {
    fn default() -> Self {
        Self {
            coupling: CouplingSign::Derived,
            gain_with_q: true,
            innovation: InnovationArgument::Output,
            symmetrize: true,
            store_tensors: false,
        }
    }
}

/// Model quantities at the current estimate, shared by all `R_ℓ`.
struct Local<T> {
    jf: Tensor<T>,
    fx: Vec<T>,
    /// `df[j]` = `D^j f` for `2 ≤ j`, `None` if it vanishes or is unused.
    df: Vec<Option<Tensor<T>>>,
    /// `dh[j]` = `D^j h` for `1 ≤ j ≤ k`.
    dh: Vec<Option<Tensor<T>>>,
    /// `qdh[j]` = `Q *_{2,1} D^j h`.
    qdh: Vec<Option<Tensor<T>>>,
    /// `Q(y − h(x̂))`, or `Q(y − x̂)`, for the `D^ℓh` term.
    iota: Vec<T>,
    /// `𝒥_hᵀQ(y − h(x̂))` (or without `Q`).
    gain_dir: Vec<T>,
}

/// Right-hand side of the order-`k` system for a fixed model and weights.
pub struct Hoekf<'a, T: Scalar> {
    model: &'a dyn SystemModel<T>,
    weights: &'a Weights<T>,
    k: usize,
    opts: HoekfOptions,
    /// `G R⁻¹ Gᵀ`.
    w: Tensor<T>,
    sym: Vec<Symmetrizer>,
}

impl<'a, T: Scalar> Hoekf<'a, T> {
    pub fn new(model: &'a dyn SystemModel<T>, weights: &'a Weights<T>, k: usize, opts: HoekfOptions) -> Result<Self> {
        let (n, m, p) = (model.state_dim(), model.disturbance_dim(), model.output_dim());
        if k < 2 {
            return Err(Error::InvalidArgument(format!("observer order {k} < 2")));
        }
        if model.max_order() < k {
            return Err(Error::MissingDerivative {
                requested: k,
                available: model.max_order(),
            });
        }
        weights.check_dims(n, m, p)?;
        if opts.innovation == InnovationArgument::StateResidual && p != n {
            return Err(Error::InvalidArgument(
                "state-residual innovation y − x̂ needs output dimension equal to state dimension".into(),
            ));
        }
        let w = gramian(model.input_map(), &weights.r)?;
        let sym = (0..=k).map(|j| Symmetrizer::new(n, j.max(1))).collect();
        Ok(Self {
            model,
            weights,
            k,
            opts,
            w,
            sym,
        })
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn options(&self) -> &HoekfOptions {
        &self.opts
    }

    /// `G R⁻¹ Gᵀ`.
    pub fn input_gramian(&self) -> &Tensor<T> {
        &self.w
    }

    fn check_state(&self, s: &ObserverState<T>) -> Result<()> {
        let n = self.model.state_dim();
        if s.x.len() != n || s.order() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "observer state of order {} and dimension {} for a {n}-dimensional order-{} filter",
                s.order(),
                s.x.len(),
                self.k
            )));
        }
        Ok(())
    }

    fn local(&self, x: &[T], y_t: &[T]) -> Result<Local<T>> {
        let model = self.model;
        let p = model.output_dim();
        if y_t.len() != p {
            return Err(Error::LengthMismatch {
                expected: p,
                got: y_t.len(),
            });
        }
        let k = self.k;
        let jf = model.f_derivative(1, x)?;
        let fx = model.f(x);
        let mut df = vec![None; k + 1];
        for (j, slot) in df.iter_mut().enumerate().take(k).skip(2) {
            if !model.f_vanishes(j) {
                *slot = Some(model.f_derivative(j, x)?);
            }
        }
        let mut dh = vec![None; k + 1];
        let mut qdh = vec![None; k + 1];
        for j in 1..=k {
            if !model.h_vanishes(j) {
                let d = model.h_derivative(j, x)?;
                qdh[j] = Some(self.weights.q.contract(2, &d, 1)?);
                dh[j] = Some(d);
            }
        }
        let resid: Vec<T> = model.h(x).iter().zip(y_t).map(|(&h, &y)| y - h).collect();
        let qr = self.weights.q.matvec(&resid)?;
        let jh = dh[1].as_ref().cloned().unwrap_or_else(|| Tensor::zeros(&[p, x.len()]));
        let gain_dir = jh
            .transpose()?
            .matvec(if self.opts.gain_with_q { &qr } else { &resid })?;
        let iota = match self.opts.innovation {
            InnovationArgument::Output => qr,
            InnovationArgument::StateResidual => {
                let lit: Vec<T> = y_t.iter().zip(x).map(|(&y, &xi)| y - xi).collect();
                self.weights.q.matvec(&lit)?
            }
        };
        Ok(Local {
            jf,
            fx,
            df,
            dh,
            qdh,
            iota,
            gain_dir,
        })
    }

    /// Source term `R_ℓ` at the state `s` and output sample `y_t`.
    pub fn compute_r(&self, ell: usize, s: &ObserverState<T>, y_t: &[T]) -> Result<Tensor<T>> {
        self.check_state(s)?;
        if !(2..=self.k).contains(&ell) {
            return Err(Error::InvalidArgument(format!("R_{ell} outside 2..={}", self.k)));
        }
        let local = self.local(&s.x, y_t)?;
        self.r_term(ell, s, &local)
    }

    fn r_term(&self, ell: usize, s: &ObserverState<T>, local: &Local<T>) -> Result<Tensor<T>> {
        let n = s.state_dim();
        let half = T::of(0.5);
        let mut r = Tensor::cube(n, ell);
        for i in 1..=ell.saturating_sub(2) {
            let pi = s.p(i + 1);
            if let (Some(d), false) = (&local.df[ell - i], pi.is_zero()) {
                let c = pi.contract(1, d, 1)?;
                r.axpy(T::one(), &sym_shuffle(&c, i, ell - i)?)?;
            }
        }
        for i in 2..=ell.saturating_sub(2) {
            let (pa, pb) = (s.p(i + 1), s.p(ell - i + 1));
            if pa.is_zero() || pb.is_zero() {
                continue;
            }
            let c = pa.contract(1, &self.w.contract(2, pb, 1)?, 1)?;
            r.axpy(half, &sym_shuffle(&c, i, ell - i)?)?;
        }
        if let Some(d) = &local.dh[ell] {
            let c = d.contract(1, &Tensor::vector(&local.iota), 1)?;
            r.axpy(T::one(), &c)?;
        }
        for i in 1..ell {
            if let (Some(a), Some(b)) = (&local.dh[i], &local.qdh[ell - i]) {
                let c = a.contract(1, b, 1)?;
                r.axpy(-half, &sym_shuffle(&c, i, ell - i)?)?;
            }
        }
        Ok(r)
    }

    /// Time derivative of the observer state. Fails with
    /// [`Error::NotPositiveDefinite`] when `P₂` has lost definiteness.
    pub fn rhs(&self, s: &ObserverState<T>, y_t: &[T]) -> Result<ObserverState<T>> {
        self.rhs_impl(s, y_t, self.opts.symmetrize)
    }

    /// As [`Hoekf::rhs`] but never projecting onto symmetric tensors.
    pub fn rhs_unprojected(&self, s: &ObserverState<T>, y_t: &[T]) -> Result<ObserverState<T>> {
        self.rhs_impl(s, y_t, false)
    }

    fn rhs_impl(&self, s: &ObserverState<T>, y_t: &[T], symmetrize: bool) -> Result<ObserverState<T>> {
        self.check_state(s)?;
        let k = self.k;
        let local = self.local(&s.x, y_t)?;
        let p2 = s.p(2);
        let g2 = SpdFactor::new(p2)?.solve_slice(&local.gain_dir)?;
        let g2t = Tensor::vector(&g2);
        let x_dot: Vec<T> = local.fx.iter().zip(&g2).map(|(&a, &b)| a + b).collect();
        let wp2 = self.w.matmul(p2)?;
        let closed = local.jf.add(&wp2)?;
        let coupling_sign = match self.opts.coupling {
            CouplingSign::Derived => T::one(),
            CouplingSign::Negated => -T::one(),
        };
        let mut out = Vec::with_capacity(k - 1);
        for j in 2..=k {
            let pj = s.p(j);
            let mut d = if j == 2 {
                // −𝒥_fᵀP₂ − P₂𝒥_f − P₂WP₂
                let mut d = pj.mode_mul(1, &local.jf)?;
                d.axpy(T::one(), &pj.mode_mul(2, &local.jf)?)?;
                d.axpy(T::one(), &p2.matmul(&wp2)?)?;
                d.scale(-T::one())
            } else {
                let mut d = Tensor::cube(pj.dims()[0], j);
                if !pj.is_zero() {
                    for mode in 1..=j {
                        d.axpy(-T::one(), &pj.mode_mul(mode, &closed)?)?;
                    }
                }
                d
            };
            d.axpy(-T::one(), &self.r_term(j, s, &local)?)?;
            if j < k {
                let next = s.p(j + 1);
                if !next.is_zero() {
                    let c = next.contract(1, &g2t, 1)?;
                    d.axpy(coupling_sign, &c)?;
                }
            }
            if symmetrize {
                self.sym[j].apply_in_place(&mut d)?;
            }
            out.push(d);
        }
        Ok(ObserverState { x: x_dot, p: out })
    }
}

/// `G R⁻¹ Gᵀ`.
pub(crate) fn gramian<T: Scalar>(g: &Tensor<T>, r: &Tensor<T>) -> Result<Tensor<T>> {
    let (n, m) = (g.rows(), g.cols());
    let fac = SpdFactor::new(r)?;
    let mut rinv_gt = Tensor::zeros(&[m, n]);
    for i in 0..n {
        let row: Vec<T> = (0..m).map(|j| g.at(i, j)).collect();
        let col = fac.solve_slice(&row)?;
        for j in 0..m {
            rinv_gt.set(&[j, i], col[j]);
        }
    }
    let mut w = g.matmul(&rinv_gt)?;
    crate::tensor::Symmetrizer::new(n, 2).apply_in_place(&mut w)?;
    Ok(w)
}

/// Integrates the order-`k` observer over `[0, horizon]` from
/// `x̂(0) = x0`, `P₂(0) = Γ`, `P_j(0) = 0`.
///
/// Loss of definiteness of `P₂` or step size underflow ends the run with a
/// breakdown status; only inconsistent inputs are reported as errors.
#[allow(clippy::too_many_arguments)]
pub fn run_hoekf<T: Scalar>(
    k: usize,
    model: &dyn SystemModel<T>,
    weights: &Weights<T>,
    x0: &[T],
    y: &Signal<T>,
    horizon: T,
    cfg: &IntegratorConfig<T>,
    opts: &HoekfOptions,
) -> Result<ObserverTrajectory<T>> {
    let filter = Hoekf::new(model, weights, k, *opts)?;
    let n = model.state_dim();
    if x0.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    check_signal(y, model.output_dim(), horizon)?;
    let init = ObserverState::initial(k, x0, &weights.gamma)?;
    let keep = if opts.store_tensors { flat_len(n, k) } else { n + n * n };
    let rhs = |t: T, v: &[T], out: &mut [T]| -> Result<()> {
        let s = ObserverState::unflatten(v, n, k)?;
        let yt = y.eval(t)?;
        let d = filter.rhs(&s, &yt)?.flatten();
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("observer derivative at t = {t}")));
        }
        out.copy_from_slice(&d);
        Ok(())
    };
    let mut min_eig = Vec::new();
    let mut tensor_max = vec![T::zero(); k - 1];
    let traj = rk45_adaptive_with(rhs, &init.flatten(), (T::zero(), horizon), cfg, keep, |_, v| {
        let p2 = Tensor::from_vec(&[n, n], v[n..n + n * n].to_vec())?;
        let fac = SpdFactor::new(&p2)?;
        min_eig.push(fac.min_pivot());
        let mut off = n;
        for (j, m) in tensor_max.iter_mut().enumerate() {
            let size = n.pow(j as u32 + 2);
            let block = &v[off..off + size];
            if block.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("observer tensors".into()));
            }
            *m = block.iter().fold(*m, |acc, &x| acc.max(x.abs()));
            off += size;
        }
        Ok(())
    });
    Ok(ObserverTrajectory::from_parts(
        ObserverKind::Hoekf(k),
        n,
        traj,
        min_eig,
        tensor_max,
    ))
}

pub(crate) fn check_signal<T: Scalar>(y: &Signal<T>, p: usize, horizon: T) -> Result<()> {
    if y.dim() != p {
        return Err(Error::LengthMismatch {
            expected: p,
            got: y.dim(),
        });
    }
    if y.start() > T::zero() || y.horizon() < horizon {
        return Err(Error::OutOfSpan {
            t: horizon.as_f64(),
            start: y.start().as_f64(),
            end: y.horizon().as_f64(),
        });
    }
    Ok(())
}
