use crate::error::{Error, Result};
use crate::ode::{DenseTrajectory, Status};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObserverKind {
    /// HOEKF of the given order, information form `(x, P₂, …, P_k)`.
    Hoekf(usize),
    /// Extended Kalman filter, covariance form `(x, Σ)`.
    Ekf,
    /// Linear Kalman filter, covariance form `(x, Σ)`.
    Kalman,
    /// Mortensen reference, state only.
    Mortensen,
}

impl ObserverKind {
    pub fn label(&self) -> String {
        match self {
            ObserverKind::Hoekf(k) => format!("hoekf{k}"),
            ObserverKind::Ekf => "ekf".into(),
            ObserverKind::Kalman => "kf".into(),
            ObserverKind::Mortensen => "mortensen".into(),
        }
    }
}

/// Estimate trajectory with per-step diagnostics.
#[derive(Clone, Debug)]
pub struct ObserverTrajectory<T> {
    kind: ObserverKind,
    n: usize,
    traj: DenseTrajectory<T>,
    min_eig: Vec<T>,
    tensor_max: Vec<T>,
}

impl<T: Scalar> ObserverTrajectory<T> {
    /// `min_eig` holds one eigenvalue proxy per accepted node; `tensor_max`
    /// the running maxima of `‖P_j‖_max` for `j = 2, 3, …`.
    pub fn from_parts(
        kind: ObserverKind,
        n: usize,
        traj: DenseTrajectory<T>,
        min_eig: Vec<T>,
        tensor_max: Vec<T>,
    ) -> Self {
        Self {
            kind,
            n,
            traj,
            min_eig,
            tensor_max,
        }
    }

    pub fn kind(&self) -> ObserverKind {
        self.kind
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn times(&self) -> &[T] {
        self.traj.times()
    }

    pub fn dense(&self) -> &DenseTrajectory<T> {
        &self.traj
    }

    pub fn status(&self) -> &Status<T> {
        self.traj.status()
    }

    pub fn completed(&self) -> bool {
        self.traj.status().is_completed()
    }

    pub fn breakdown_time(&self) -> Option<T> {
        self.traj.status().breakdown_time()
    }

    pub fn end(&self) -> T {
        self.traj.end()
    }

    /// Estimate at an accepted node.
    pub fn x_node(&self, i: usize) -> &[T] {
        &self.traj.states()[i][..self.n]
    }

    /// Estimate at any time in the covered span.
    pub fn x_at(&self, t: T) -> Result<Vec<T>> {
        let mut v = self.traj.eval(t)?;
        v.truncate(self.n);
        Ok(v)
    }

    /// `P₂` (information form) or `Σ` (covariance form) at time `t`.
    pub fn matrix_at(&self, t: T) -> Result<Tensor<T>> {
        let n = self.n;
        if self.traj.stored_components() < n + n * n {
            return Err(Error::InvalidArgument("matrix block was not stored".into()));
        }
        let v = self.traj.eval(t)?;
        Tensor::from_vec(&[n, n], v[n..n + n * n].to_vec())
    }

    /// Smallest-pivot proxy of the `P₂`/`Σ` factorization at every node.
    pub fn min_eig_proxy(&self) -> &[T] {
        &self.min_eig
    }

    /// `max_t ‖P_j(t)‖_max` over accepted nodes.
    pub fn tensor_max(&self, j: usize) -> Option<T> {
        j.checked_sub(2).and_then(|q| self.tensor_max.get(q)).copied()
    }

    /// Full flattened state at the last accepted node.
    pub fn final_flat(&self) -> &[T] {
        self.traj.final_state()
    }
}
