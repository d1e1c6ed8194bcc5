//! Symmetric positive definite solves via diagonally pivoted Cholesky.

use super::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pivoted Cholesky factorization `Πᵀ M Π = L Lᵀ` of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SpdFactor<T> {
    n: usize,
    /// lower factor, column-major
    l: Vec<T>,
    perm: Vec<usize>,
    min_pivot: T,
}

impl<T: Scalar> SpdFactor<T> {
    /// Factors `m`. Pivots at or below `1e-12 · trace(m)/n` are reported as
    /// [`Error::NotPositiveDefinite`].
    pub fn new(m: &Tensor<T>) -> Result<Self> {
        if m.order() != 2 || m.rows() != m.cols() {
            return Err(Error::DimensionMismatch(format!("SPD factorization of {:?}", m.dims())));
        }
        let n = m.rows();
        let scale = m.norm_max();
        let sym_tol = T::of(1e-8).max(T::epsilon() * T::of(100.0));
        let mut asym = T::zero();
        for i in 0..n {
            for j in 0..i {
                asym = asym.max((m.at(i, j) - m.at(j, i)).abs());
            }
        }
        if asym > sym_tol * scale {
            return Err(Error::NotSymmetric(
                (asym / scale.max(T::min_positive_value())).as_f64(),
            ));
        }
        if !m.all_finite() {
            return Err(Error::NonFinite("matrix passed to SPD factorization".into()));
        }
        let trace: T = (0..n).map(|i| m.at(i, i)).sum();
        let threshold = T::of(1e-12) * trace / T::of_usize(n.max(1));
        let mut a = m.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = T::infinity();
        for j in 0..n {
            // largest remaining diagonal entry
            let mut p = j;
            for i in j + 1..n {
                if a[i + n * i] > a[p + n * p] {
                    p = i;
                }
            }
            if p != j {
                for k in 0..n {
                    a.swap(j + n * k, p + n * k);
                }
                for k in 0..n {
                    a.swap(k + n * j, k + n * p);
                }
                perm.swap(j, p);
            }
            let pivot = a[j + n * j];
            min_pivot = min_pivot.min(pivot);
            if !(pivot > threshold) || trace <= T::zero() {
                return Err(Error::NotPositiveDefinite {
                    pivot: pivot.as_f64(),
                    step: j + 1,
                });
            }
            let d = pivot.sqrt();
            a[j + n * j] = d;
            for i in j + 1..n {
                a[i + n * j] /= d;
            }
            for k in j + 1..n {
                let lkj = a[k + n * j];
                for i in j + 1..n {
                    let v = a[i + n * j] * lkj;
                    a[i + n * k] -= v;
                }
            }
        }
        // keep only the lower triangle
        for j in 0..n {
            for i in 0..j {
                a[i + n * j] = T::zero();
            }
        }
        Ok(Self {
            n,
            l: a,
            perm,
            min_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Smallest pivot encountered; a cheap lower-eigenvalue proxy.
    pub fn min_pivot(&self) -> T {
        self.min_pivot
    }

    pub fn solve_slice(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let mut z: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            z[j] /= self.l[j + n * j];
            let zj = z[j];
            for i in j + 1..n {
                z[i] -= self.l[i + n * j] * zj;
            }
        }
        for j in (0..n).rev() {
            let mut s = z[j];
            for i in j + 1..n {
                s -= self.l[i + n * j] * z[i];
            }
            z[j] = s / self.l[j + n * j];
        }
        let mut x = vec![T::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        Ok(x)
    }

    pub fn solve(&self, b: &Tensor<T>) -> Result<Tensor<T>> {
        if b.order() != 1 {
            return Err(Error::DimensionMismatch("right-hand side must be a vector".into()));
        }
        Ok(Tensor::vector(&self.solve_slice(b.as_slice())?))
    }

    /// Explicit inverse, for diagnostics and tests.
    pub fn inverse(&self) -> Tensor<T> {
        let n = self.n;
        let mut out = Tensor::zeros(&[n, n]);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = T::zero());
            e[j] = T::one();
            let col = self.solve_slice(&e).expect("length checked");
            out.as_mut_slice()[n * j..n * (j + 1)].copy_from_slice(&col);
        }
        out
    }
}

/// Solves `M x = b` for symmetric positive definite `M`; returns `x` and the
/// smallest pivot of the factorization.
pub fn spd_solve<T: Scalar>(m: &Tensor<T>, b: &Tensor<T>) -> Result<(Tensor<T>, T)> {
    let f = SpdFactor::new(m)?;
    if b.order() != 1 || b.len() != f.dim() {
        return Err(Error::DimensionMismatch(format!(
            "solve with {:?} and right-hand side {:?}",
            m.dims(),
            b.dims()
        )));
    }
    Ok((f.solve(b)?, f.min_pivot()))
}
