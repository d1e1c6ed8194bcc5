//! Shuffle permutations and symmetrization.

use super::{for_each_index, Permutation, Tensor};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// All permutations of `1..=i+j` that increase on the first `i` and on the
/// last `j` positions.
///
/// The first block runs through the `i`-subsets of `1..=i+j` in
/// lexicographic order, so the output order is deterministic.
pub fn shuffle_set(i: usize, j: usize) -> Vec<Permutation> {
    let d = i + j;
    let mut out = Vec::new();
    let mut comb: Vec<usize> = (1..=i).collect();
    loop {
        let mut image = comb.clone();
        image.extend((1..=d).filter(|x| !comb.contains(x)));
        out.push(Permutation { image });
        // next combination in lexicographic order
        let mut pos = i;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if comb[pos] < d - (i - 1 - pos) {
                comb[pos] += 1;
                for q in pos + 1..i {
                    comb[q] = comb[q - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Unscaled shuffle sum `Σ_{σ ∈ S_{i,j}} T^σ`.
pub fn sym_shuffle<T: Scalar>(t: &Tensor<T>, i: usize, j: usize) -> Result<Tensor<T>> {
    if t.order() != i + j {
        return Err(Error::DimensionMismatch(format!(
            "Sym_{{{i},{j}}} applied to a tensor of order {}",
            t.order()
        )));
    }
    t.require_cubical("Sym")?;
    if i == 0 || j == 0 {
        return Ok(t.clone());
    }
    let mut acc = Tensor::zeros(t.dims());
    for sigma in shuffle_set(i, j) {
        let r = t.reshape_perm(&sigma)?;
        for (a, &b) in acc.data.iter_mut().zip(&r.data) {
            *a += b;
        }
    }
    Ok(acc)
}

/// Projection onto fully symmetric tensors, `(1/d!) Σ_{σ ∈ S_d} T^σ`.
///
/// Computed by averaging over each orbit of multi-indices (entries sharing
/// the same sorted index), which equals the permutation average.
pub fn symmetrize_full<T: Scalar>(t: &Tensor<T>) -> Result<Tensor<T>> {
    t.require_cubical("symmetrize_full")?;
    let d = t.order();
    if d <= 2 {
        let mut out = t.clone();
        symmetrize_small(&mut out);
        return Ok(out);
    }
    Symmetrizer::new(t.dims[0], d).apply(t)
}

fn symmetrize_small<T: Scalar>(t: &mut Tensor<T>) {
    if t.order() != 2 {
        return;
    }
    let n = t.dims[0];
    let half = T::of(0.5);
    for i in 0..n {
        for j in i + 1..n {
            let v = (t.data[i + n * j] + t.data[j + n * i]) * half;
            t.data[i + n * j] = v;
            t.data[j + n * i] = v;
        }
    }
}

/// Full symmetrization for a fixed shape `⊗^d ℝⁿ` with the orbit table
/// computed once.
#[derive(Clone, Debug)]
pub struct Symmetrizer {
    n: usize,
    d: usize,
    // offset of the sorted representative of every entry
    canon: Vec<usize>,
    counts: Vec<usize>,
}

impl Symmetrizer {
    pub fn new(n: usize, d: usize) -> Self {
        let dims = vec![n; d];
        let len = n.pow(d as u32);
        let mut canon = Vec::with_capacity(len);
        let mut counts = vec![0usize; len];
        let mut sorted = vec![0usize; d];
        for_each_index(&dims, |idx| {
            sorted.copy_from_slice(idx);
            sorted.sort_unstable();
            let off = sorted.iter().rev().fold(0, |acc, &i| acc * n + i);
            canon.push(off);
            counts[off] += 1;
        });
        Self { n, d, canon, counts }
    }

    pub fn apply<T: Scalar>(&self, t: &Tensor<T>) -> Result<Tensor<T>> {
        let mut out = t.clone();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    pub fn apply_in_place<T: Scalar>(&self, t: &mut Tensor<T>) -> Result<()> {
        if t.order() != self.d || t.dims.iter().any(|&m| m != self.n) {
            return Err(Error::DimensionMismatch(format!(
                "symmetrizer for ⊗^{} ℝ^{} applied to {:?}",
                self.d, self.n, t.dims
            )));
        }
        if self.d <= 2 {
            symmetrize_small(t);
            return Ok(());
        }
        let mut sums = vec![T::zero(); t.len()];
        for (k, &c) in self.canon.iter().enumerate() {
            sums[c] += t.data[k];
        }
        for (k, &c) in self.canon.iter().enumerate() {
            t.data[k] = sums[c] / T::of_usize(self.counts[c]);
        }
        Ok(())
    }
}

/// `‖T − symmetrize_full(T)‖_max ≤ tol · (1 + ‖T‖_max)`.
pub fn is_symmetric<T: Scalar>(t: &Tensor<T>, tol: T) -> bool {
    match symmetrize_full(t) {
        Ok(s) => {
            let diff = t
                .data
                .iter()
                .zip(&s.data)
                .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
            diff <= tol * (T::one() + t.norm_max())
        }
        Err(_) => false,
    }
}
