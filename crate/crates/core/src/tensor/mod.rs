//! Dense tensors with first-index-fastest storage.
//!
//! Mode numbers in the public API are one-based (`mode = 1` is the first
//! index), matching the usual mathematical notation for contractions
//! `A *_{μ,ν} B` and mode products `A ×_μ C`. Storage indices are zero-based.

mod solve;
mod sym;

pub use solve::{spd_solve, SpdFactor};
pub use sym::{is_symmetric, shuffle_set, sym_shuffle, symmetrize_full, Symmetrizer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A dense real tensor of order `dims.len()`.
///
/// Entry `[i₁, …, i_d]` lives at linear position `i₁ + n₁·(i₂ + n₂·(…))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    dims: Vec<usize>,
    data: Vec<T>,
}

/// A permutation of `1..=d` stored by its image `(σ(1), …, σ(d))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let d = image.len();
        let mut seen = vec![false; d];
        for &s in &image {
            if s == 0 || s > d || seen[s - 1] {
                return Err(Error::InvalidPermutation(image));
            }
            seen[s - 1] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            image: (1..=d).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// One-based image `(σ(1), …, σ(d))`.
    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (q, &s) in self.image.iter().enumerate() {
            inv[s - 1] = q + 1;
        }
        Self { image: inv }
    }

    /// `(self ∘ other)(q) = self(other(q))`.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "composing permutations of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Self {
            image: other.image.iter().map(|&q| self.image[q - 1]).collect(),
        })
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = Vec::with_capacity(dims.len());
    let mut acc = 1;
    for &d in dims {
        s.push(acc);
        acc *= d;
    }
    s
}

/// Advances a multi-index odometer (first index fastest). Returns `false`
/// after the last index has been visited.
fn advance(idx: &mut [usize], dims: &[usize]) -> bool {
    for (i, d) in idx.iter_mut().zip(dims) {
        *i += 1;
        if *i < *d {
            return true;
        }
        *i = 0;
    }
    false
}

/// Linear offsets of all multi-indices over `dims`, where position `q`
/// contributes `index * stride[q]`.
fn offsets(dims: &[usize], stride: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let mut out = Vec::with_capacity(total);
    if total == 0 {
        return out;
    }
    let mut idx = vec![0; dims.len()];
    let mut off = 0usize;
    loop {
        out.push(off);
        // manual odometer that keeps `off` in sync
        let mut q = 0;
        loop {
            if q == dims.len() {
                return out;
            }
            idx[q] += 1;
            off += stride[q];
            if idx[q] < dims[q] {
                break;
            }
            off -= stride[q] * idx[q];
            idx[q] = 0;
            q += 1;
        }
    }
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(dims: &[usize]) -> Self {
        assert!(!dims.is_empty(), "tensor order must be at least one");
        let len = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            data: vec![T::zero(); len],
        }
    }

    pub fn from_vec(dims: &[usize], data: Vec<T>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument("tensor order must be at least one".into()));
        }
        let expected: usize = dims.iter().product();
        if data.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            dims: dims.to_vec(),
            data,
        })
    }

    pub fn vector(v: &[T]) -> Self {
        Self {
            dims: vec![v.len()],
            data: v.to_vec(),
        }
    }

    /// Builds a matrix from row slices.
    pub fn from_rows(rows: &[&[T]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let mut t = Self::zeros(&[r, c]);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                t.data[i + r * j] = v;
            }
        }
        Ok(t)
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(&[n, n]);
        for i in 0..n {
            t.data[i + n * i] = T::one();
        }
        t
    }

    pub fn diag(d: &[T]) -> Self {
        let n = d.len();
        let mut t = Self::zeros(&[n, n]);
        for (i, &v) in d.iter().enumerate() {
            t.data[i + n * i] = v;
        }
        t
    }

    /// Tensor of order `order` with every mode of size `n`.
    pub fn cube(n: usize, order: usize) -> Self {
        Self::zeros(&vec![n; order])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Linear position of a zero-based multi-index.
    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut off = 0;
        let mut stride = 1;
        for (&i, &d) in idx.iter().zip(&self.dims) {
            debug_assert!(i < d);
            off += i * stride;
            stride *= d;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> T {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: T) {
        let off = self.offset(idx);
        self.data[off] = v;
    }

    /// `true` if all modes have the same size.
    pub fn is_cubical(&self) -> bool {
        self.dims.windows(2).all(|w| w[0] == w[1])
    }

    pub(crate) fn require_cubical(&self, what: &str) -> Result<()> {
        if self.is_cubical() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{what} requires equal mode sizes, got {:?}",
                self.dims
            )))
        }
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode == 0 || mode > self.order() {
            Err(Error::ModeOutOfRange {
                mode,
                order: self.order(),
            })
        } else {
            Ok(())
        }
    }

    fn require_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(())
    }

    /// Contraction `self *_{μ,ν} other` of mode `mu` of `self` with mode
    /// `nu` of `other`.
    ///
    /// The result keeps the remaining modes of `self` followed by the
    /// remaining modes of `other`. When both operands are vectors the
    /// result is a one-entry tensor of order 1 holding the inner product.
    pub fn contract(&self, mu: usize, other: &Self, nu: usize) -> Result<Self> {
        self.check_mode(mu)?;
        other.check_mode(nu)?;
        let k = self.dims[mu - 1];
        if k != other.dims[nu - 1] {
            return Err(Error::DimensionMismatch(format!(
                "contracting mode {mu} of {:?} with mode {nu} of {:?}",
                self.dims, other.dims
            )));
        }
        let sa = strides(&self.dims);
        let sb = strides(&other.dims);
        let mut rest_a = Vec::new();
        let mut rest_sa = Vec::new();
        for q in 0..self.order() {
            if q != mu - 1 {
                rest_a.push(self.dims[q]);
                rest_sa.push(sa[q]);
            }
        }
        let mut rest_b = Vec::new();
        let mut rest_sb = Vec::new();
        for q in 0..other.order() {
            if q != nu - 1 {
                rest_b.push(other.dims[q]);
                rest_sb.push(sb[q]);
            }
        }
        let off_a = offsets(&rest_a, &rest_sa);
        let off_b = offsets(&rest_b, &rest_sb);
        let (ka, kb) = (sa[mu - 1], sb[nu - 1]);
        let na = off_a.len();
        let mut dims: Vec<usize> = rest_a.into_iter().chain(rest_b).collect();
        if dims.is_empty() {
            dims.push(1);
        }
        let mut out = vec![T::zero(); na * off_b.len()];
        for (jb, &ob) in off_b.iter().enumerate() {
            let block = &mut out[jb * na..(jb + 1) * na];
            for kk in 0..k {
                let b = other.data[ob + kk * kb];
                if b == T::zero() {
                    continue;
                }
                let base = kk * ka;
                for (o, &oa) in block.iter_mut().zip(&off_a) {
                    *o += self.data[oa + base] * b;
                }
            }
        }
        Ok(Self { dims, data: out })
    }

    /// Tensor (outer) product; dims are `dims(self) ++ dims(other)`.
    pub fn outer(&self, other: &Self) -> Self {
        let mut data = Vec::with_capacity(self.len() * other.len());
        for &b in &other.data {
            data.extend(self.data.iter().map(|&a| a * b));
        }
        Self {
            dims: self.dims.iter().chain(&other.dims).copied().collect(),
            data,
        }
    }

    /// Reshape `A^σ` with `A^σ[i₁,…,i_d] = A[i_{σ(1)},…,i_{σ(d)}]`.
    ///
    /// Mode `σ(q)` of the result therefore has the size of mode `q` of `A`.
    pub fn reshape_perm(&self, sigma: &Permutation) -> Result<Self> {
        if sigma.len() != self.order() {
            return Err(Error::InvalidPermutation(sigma.image().to_vec()));
        }
        let d = self.order();
        let sa = strides(&self.dims);
        let mut rdims = vec![0; d];
        let mut rstride = vec![0; d];
        for q in 0..d {
            let p = sigma.image[q] - 1;
            rdims[p] = self.dims[q];
            rstride[p] = sa[q];
        }
        let src = offsets(&rdims, &rstride);
        let data = src.into_iter().map(|o| self.data[o]).collect();
        Ok(Self { dims: rdims, data })
    }

    /// Mode product `A ×_μ C` with `(A ×_μ C)[…, i_μ, …] = Σ_k A[…, k, …] C[k, i_μ]`.
    pub fn mode_mul(&self, mu: usize, c: &Self) -> Result<Self> {
        self.check_mode(mu)?;
        if c.order() != 2 || c.dims[0] != self.dims[mu - 1] {
            return Err(Error::DimensionMismatch(format!(
                "mode {mu} product of {:?} with {:?}",
                self.dims, c.dims
            )));
        }
        let nmu = self.dims[mu - 1];
        let m = c.dims[1];
        let lo: usize = self.dims[..mu - 1].iter().product();
        let hi: usize = self.dims[mu..].iter().product();
        let mut dims = self.dims.clone();
        dims[mu - 1] = m;
        let mut out = vec![T::zero(); lo * m * hi];
        for h in 0..hi {
            for col in 0..m {
                let dst = &mut out[lo * (col + m * h)..lo * (col + m * h + 1)];
                for k in 0..nmu {
                    let ck = c.data[k + nmu * col];
                    if ck == T::zero() {
                        continue;
                    }
                    let src = &self.data[lo * (k + nmu * h)..lo * (k + nmu * h + 1)];
                    for (o, &a) in dst.iter_mut().zip(src) {
                        *o += a * ck;
                    }
                }
            }
        }
        Ok(Self { dims, data: out })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.require_same_dims(other)?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.require_same_dims(other)?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: T, other: &Self) -> Result<()> {
        self.require_same_dims(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&self, alpha: T) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|&a| a * alpha).collect(),
        }
    }

    pub fn scale_mut(&mut self, alpha: T) {
        for a in &mut self.data {
            *a *= alpha;
        }
    }

    fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn norm_max(&self) -> T {
        crate::scalar::norm_inf(&self.data)
    }

    pub fn norm_frobenius(&self) -> T {
        crate::scalar::norm2(&self.data)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&a| a == T::zero())
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }

    /// Matrix entry `[i, j]` of an order-2 tensor.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i + self.dims[0] * j]
    }

    pub fn rows(&self) -> usize {
        self.dims[0]
    }

    pub fn cols(&self) -> usize {
        self.dims[1]
    }

    /// Ordinary matrix product of two order-2 tensors.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.order() != 2 || other.order() != 2 {
            return Err(Error::DimensionMismatch("matmul needs two matrices".into()));
        }
        // A·B = A *_{2,1} B
        self.contract(2, other, 1)
    }

    /// Matrix-vector product for an order-2 tensor.
    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>> {
        if self.order() != 2 || self.dims[1] != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "matvec of {:?} with vector of length {}",
                self.dims,
                v.len()
            )));
        }
        let r = self.dims[0];
        let mut out = vec![T::zero(); r];
        for (j, &vj) in v.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.data[i + r * j] * vj;
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Result<Self> {
        if self.order() != 2 {
            return Err(Error::DimensionMismatch("transpose needs a matrix".into()));
        }
        self.reshape_perm(&Permutation { image: vec![2, 1] })
    }

    /// Contracts the last mode with a vector: `Σ_k T[…, k] v[k]`.
    pub fn contract_last(&self, v: &[T]) -> Result<Self> {
        let d = self.order();
        if self.dims[d - 1] != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "last mode of {:?} with vector of length {}",
                self.dims,
                v.len()
            )));
        }
        let lo = self.len() / v.len();
        let mut out = vec![T::zero(); lo];
        for (k, &vk) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(&self.data[k * lo..(k + 1) * lo]) {
                *o += a * vk;
            }
        }
        let dims = if d == 1 { vec![1] } else { self.dims[..d - 1].to_vec() };
        Ok(Self { dims, data: out })
    }
}

/// Iterates over all zero-based multi-indices of `dims`, first index fastest.
pub fn for_each_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    if dims.contains(&0) {
        return;
    }
    let mut idx = vec![0; dims.len()];
    loop {
        f(&idx);
        if !advance(&mut idx, dims) {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(dims: &[usize], rng: &mut ChaCha8Rng) -> Tensor<f64> {
        let len = dims.iter().product();
        Tensor::from_vec(dims, (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn identity_contraction() {
        let a = Tensor::<f64>::identity(2);
        let b = Tensor::vector(&[3.0, 5.0]);
        let c = a.contract(2, &b, 1).unwrap();
        assert_eq!(c.dims(), &[2]);
        assert_eq!(c.as_slice(), &[3.0, 5.0]);
    }

    #[test]
    fn constant_slices_contract_to_sum() {
        let a = Tensor::from_vec(&[2, 2, 2], vec![1.0; 8]).unwrap();
        let b = Tensor::vector(&[1.0, 2.0]);
        let c = a.contract(1, &b, 1).unwrap();
        assert_eq!(c.dims(), &[2, 2]);
        assert!(c.as_slice().iter().all(|&x| x == 3.0));
    }

    #[test]
    fn contraction_matches_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random(&[3, 4, 2], &mut rng);
        let b = random(&[5, 4], &mut rng);
        let c = a.contract(2, &b, 2).unwrap();
        assert_eq!(c.dims(), &[3, 2, 5]);
        for i1 in 0..3 {
            for i3 in 0..2 {
                for j1 in 0..5 {
                    let mut s = 0.0;
                    for k in 0..4 {
                        s += a.get(&[i1, k, i3]) * b.get(&[j1, k]);
                    }
                    assert!((c.get(&[i1, i3, j1]) - s).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn contraction_errors() {
        let a = Tensor::<f64>::zeros(&[2, 3]);
        let b = Tensor::<f64>::zeros(&[4]);
        assert!(matches!(a.contract(2, &b, 1), Err(Error::DimensionMismatch(_))));
        assert!(matches!(
            a.contract(3, &b, 1),
            Err(Error::ModeOutOfRange { mode: 3, order: 2 })
        ));
        assert!(matches!(a.contract(0, &b, 1), Err(Error::ModeOutOfRange { .. })));
    }

    #[test]
    fn outer_products() {
        let a = Tensor::vector(&[1.0, 2.0]);
        let b = Tensor::vector(&[3.0, 4.0]);
        let m = a.outer(&b);
        assert_eq!(m, Tensor::from_rows(&[&[3.0, 4.0], &[6.0, 8.0]]).unwrap());

        let c = Tensor::vector(&[2.5]);
        let s = c.outer(&m);
        assert_eq!(s.dims(), &[1, 2, 2]);
        assert_eq!(s.as_slice(), m.scale(2.5).as_slice());

        let a = Tensor::vector(&[1.0, -2.0, 0.5]);
        let b = Tensor::vector(&[0.3, 0.7, -1.1]);
        let r = a.outer(&b).contract(1, &a, 1).unwrap();
        let ata: f64 = 1.0 + 4.0 + 0.25;
        for (x, y) in r.as_slice().iter().zip(b.as_slice()) {
            assert!((x - ata * y).abs() < 1e-14);
        }
    }

    #[test]
    fn reshape_identity_and_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random(&[2, 3], &mut rng);
        assert_eq!(a.reshape_perm(&Permutation::identity(2)).unwrap(), a);
        let t = a.reshape_perm(&Permutation::new(vec![2, 1]).unwrap()).unwrap();
        assert_eq!(t.dims(), &[3, 2]);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(t.get(&[j, i]), a.get(&[i, j]));
            }
        }
    }

    #[test]
    fn reshape_entry_formula_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random(&[2, 3, 4], &mut rng);
        let sigma = Permutation::new(vec![3, 1, 2]).unwrap();
        let r = a.reshape_perm(&sigma).unwrap();
        // r[i1,i2,i3] = a[i3,i1,i2]
        assert_eq!(r.dims(), &[3, 4, 2]);
        for_each_index(r.dims(), |i| {
            assert_eq!(r.get(i), a.get(&[i[2], i[0], i[1]]));
        });
        let back = r.reshape_perm(&sigma.inverse()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn invalid_permutations_rejected() {
        assert!(Permutation::new(vec![1, 1]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::new(vec![1, 3]).is_err());
        let a = Tensor::<f64>::zeros(&[2, 2]);
        assert!(a.reshape_perm(&Permutation::identity(3)).is_err());
    }

    #[test]
    fn mode_product_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(&[2, 3, 2], &mut rng);
        assert_eq!(a.mode_mul(2, &Tensor::identity(3)).unwrap(), a);

        let m = random(&[2, 3], &mut rng);
        let c = random(&[3, 4], &mut rng);
        let mc = m.mode_mul(2, &c).unwrap();
        let prod = m.matmul(&c).unwrap();
        assert!(mc.sub(&prod).unwrap().norm_max() < 1e-14);

        let a = random(&[2, 2, 2], &mut rng);
        let c = random(&[2, 3], &mut rng);
        let r = a.mode_mul(1, &c).unwrap();
        assert_eq!(r.dims(), &[3, 2, 2]);
        for_each_index(r.dims(), |i| {
            let s: f64 = (0..2).map(|k| a.get(&[k, i[1], i[2]]) * c.get(&[k, i[0]])).sum();
            assert!((r.get(i) - s).abs() < 1e-14);
        });
        assert!(a.mode_mul(1, &random(&[3, 3], &mut rng)).is_err());
    }

    #[test]
    fn mode_product_equals_contraction_then_reshape() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random(&[2, 3, 4], &mut rng);
        let c = random(&[3, 5], &mut rng);
        let via = a
            .contract(2, &c, 1)
            .unwrap()
            .reshape_perm(&Permutation::new(vec![1, 3, 2]).unwrap())
            .unwrap();
        let direct = a.mode_mul(2, &c).unwrap();
        assert_eq!(via.dims(), direct.dims());
        assert!(via.sub(&direct).unwrap().norm_max() < 1e-14);
    }

    #[test]
    fn elementwise_and_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random(&[3, 2], &mut rng);
        assert!(a.sub(&a).unwrap().is_zero());
        assert_eq!(Tensor::<f64>::zeros(&[4]).norm_max(), 0.0);
        assert_eq!(Tensor::vector(&[3.0, 4.0]).norm_frobenius(), 5.0);
        let mut b = a.clone();
        b.axpy(-1.0, &a).unwrap();
        assert!(b.is_zero());
        assert!(a.add(&Tensor::zeros(&[2, 3])).is_err());
    }

    #[test]
    fn contraction_associativity_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random(&[2, 3, 2], &mut rng);
        let b = random(&[4, 3, 2], &mut rng);
        let c = random(&[3, 4, 2], &mut rng);
        let lhs = a.contract(2, &b.contract(1, &c, 2).unwrap(), 1).unwrap();
        let rhs = a.contract(2, &b, 2).unwrap().contract(3, &c, 2).unwrap();
        assert_eq!(lhs.dims(), rhs.dims());
        assert!(lhs.sub(&rhs).unwrap().norm_max() < 1e-12);
        let _ = rng.gen::<f64>();
    }
}
