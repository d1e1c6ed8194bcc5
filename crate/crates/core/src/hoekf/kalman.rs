use super::{check_signal, gramian, ObserverKind, ObserverTrajectory};
use crate::error::{Error, Result};
use crate::model::{linear_model, Signal, SystemModel, Weights};
use crate::ode::{rk45_adaptive_with, IntegratorConfig};
use crate::scalar::Scalar;
use crate::tensor::{SpdFactor, Tensor};

/// Extended Kalman filter in covariance form:
/// `ẋ = f + Σ𝒥_hᵀQ(y − h)`, `Σ̇ = 𝒥_fΣ + Σ𝒥_fᵀ − Σ𝒥_hᵀQ𝒥_hΣ + GR⁻¹Gᵀ`,
/// `Σ(0) = Γ⁻¹`.
pub fn run_ekf<T: Scalar>(
    model: &dyn SystemModel<T>,
    weights: &Weights<T>,
    x0: &[T],
    y: &Signal<T>,
    horizon: T,
    cfg: &IntegratorConfig<T>,
) -> Result<ObserverTrajectory<T>> {
    covariance_filter(ObserverKind::Ekf, model, weights, x0, y, horizon, cfg)
}

/// Linear Kalman filter for `f = Aξ`, `h = Cξ`.
#[allow(clippy::too_many_arguments)]
pub fn run_kf<T: Scalar>(
    a: &Tensor<T>,
    c: &Tensor<T>,
    g: &Tensor<T>,
    weights: &Weights<T>,
    x0: &[T],
    y: &Signal<T>,
    horizon: T,
    cfg: &IntegratorConfig<T>,
) -> Result<ObserverTrajectory<T>> {
    let model = linear_model(a.clone(), c.clone(), g.clone())?;
    covariance_filter(ObserverKind::Kalman, &model, weights, x0, y, horizon, cfg)
}

fn covariance_filter<T: Scalar>(
    kind: ObserverKind,
    model: &dyn SystemModel<T>,
    weights: &Weights<T>,
    x0: &[T],
    y: &Signal<T>,
    horizon: T,
    cfg: &IntegratorConfig<T>,
) -> Result<ObserverTrajectory<T>> {
    let (n, m, p) = (model.state_dim(), model.disturbance_dim(), model.output_dim());
    weights.check_dims(n, m, p)?;
    if x0.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    check_signal(y, p, horizon)?;
    let w = gramian(model.input_map(), &weights.r)?;
    let sigma0 = SpdFactor::new(&weights.gamma)?.inverse();
    let mut v0 = x0.to_vec();
    v0.extend_from_slice(sigma0.as_slice());
    let q = &weights.q;
    let rhs = |t: T, v: &[T], out: &mut [T]| -> Result<()> {
        let x = &v[..n];
        let sigma = Tensor::from_vec(&[n, n], v[n..].to_vec())?;
        let jf = model.f_derivative(1, x)?;
        let jh = model.h_derivative(1, x)?;
        let yt = y.eval(t)?;
        let resid: Vec<T> = model.h(x).iter().zip(&yt).map(|(&h, &yv)| yv - h).collect();
        let jht = jh.transpose()?;
        let gain = sigma.matvec(&jht.matvec(&q.matvec(&resid)?)?)?;
        let fx = model.f(x);
        for i in 0..n {
            out[i] = fx[i] + gain[i];
        }
        let js = jf.matmul(&sigma)?;
        // Σ𝒥_hᵀQ𝒥_hΣ
        let hs = jh.matmul(&sigma)?;
        let info = hs.transpose()?.matmul(&q.matmul(&hs)?)?;
        for j in 0..n {
            for i in 0..n {
                let d = js.at(i, j) + js.at(j, i) - info.at(i, j) + w.at(i, j);
                let e = js.at(j, i) + js.at(i, j) - info.at(j, i) + w.at(j, i);
                out[n + i + n * j] = (d + e) * T::of(0.5);
            }
        }
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("filter derivative at t = {t}")));
        }
        Ok(())
    };
    let mut min_eig = Vec::new();
    let traj = rk45_adaptive_with(rhs, &v0, (T::zero(), horizon), cfg, n + n * n, |_, v| {
        let sigma = Tensor::from_vec(&[n, n], v[n..].to_vec())?;
        min_eig.push(SpdFactor::new(&sigma)?.min_pivot());
        Ok(())
    });
    Ok(ObserverTrajectory::from_parts(kind, n, traj, min_eig, Vec::new()))
}
