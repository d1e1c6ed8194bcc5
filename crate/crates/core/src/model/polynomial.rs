use super::{check_order, SystemModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// `coeff · Π_{v ∈ vars} x_v` contributing to output component `output`.
///
/// `vars` is kept sorted; repeated entries encode powers.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial<T> {
    pub output: usize,
    pub coeff: T,
    vars: Vec<usize>,
    // (variable, multiplicity)
    powers: Vec<(usize, usize)>,
}

impl<T: Scalar> Monomial<T> {
    pub fn new(output: usize, coeff: T, mut vars: Vec<usize>) -> Self {
        vars.sort_unstable();
        let mut powers: Vec<(usize, usize)> = Vec::new();
        for &v in &vars {
            match powers.last_mut() {
                Some((w, c)) if *w == v => *c += 1,
                _ => powers.push((v, 1)),
            }
        }
        Self {
            output,
            coeff,
            vars,
            powers,
        }
    }

    pub fn degree(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    fn eval(&self, x: &[T]) -> T {
        self.vars.iter().fold(self.coeff, |acc, &v| acc * x[v])
    }

    /// Adds `D^j` of this monomial into `out` (dims `[rows, n, …, n]`).
    fn add_derivative(&self, j: usize, x: &[T], out: &mut Tensor<T>) {
        if j > self.degree() {
            return;
        }
        if j == 1 {
            let rows = out.rows();
            for (k, &(v, a)) in self.powers.iter().enumerate() {
                let mut val = self.coeff * T::of_usize(a);
                for (l, &(w, b)) in self.powers.iter().enumerate() {
                    let e = if l == k { b - 1 } else { b };
                    for _ in 0..e {
                        val *= x[w];
                    }
                }
                out.as_mut_slice()[self.output + rows * v] += val;
            }
            return;
        }
        let mut take = vec![0usize; self.powers.len()];
        let mut beta = Vec::with_capacity(j);
        let mut idx = vec![0usize; j + 1];
        idx[0] = self.output;
        self.visit_submultisets(0, j, &mut take, &mut |take| {
            // α!/(α−β)! · x^{α−β}
            let mut val = self.coeff;
            for (&(v, a), &b) in self.powers.iter().zip(take.iter()) {
                for q in 0..b {
                    val *= T::of_usize(a - q);
                }
                for _ in 0..a - b {
                    val *= x[v];
                }
            }
            if val == T::zero() {
                return;
            }
            beta.clear();
            for (&(v, _), &b) in self.powers.iter().zip(take.iter()) {
                beta.extend(std::iter::repeat_n(v, b));
            }
            loop {
                idx[1..].copy_from_slice(&beta);
                let off = out.offset(&idx);
                out.as_mut_slice()[off] += val;
                if !next_permutation(&mut beta) {
                    break;
                }
            }
        });
    }

    fn visit_submultisets(&self, pos: usize, left: usize, take: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if pos == self.powers.len() {
            if left == 0 {
                f(take);
            }
            return;
        }
        let max = self.powers[pos].1.min(left);
        for b in 0..=max {
            take[pos] = b;
            self.visit_submultisets(pos + 1, left - b, take, f);
        }
        take[pos] = 0;
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `f(x) = A x + Σ monomials`, `h(x) = C x + Σ monomials`.
///
/// All derivative orders are available; derivatives above the polynomial
/// degree are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialModel<T> {
    n: usize,
    m: usize,
    p: usize,
    a: Tensor<T>,
    c: Tensor<T>,
    g: Tensor<T>,
    f_terms: Vec<Monomial<T>>,
    h_terms: Vec<Monomial<T>>,
}

impl<T: Scalar> PolynomialModel<T> {
    pub fn new(
        a: Tensor<T>,
        c: Tensor<T>,
        g: Tensor<T>,
        f_terms: Vec<Monomial<T>>,
        h_terms: Vec<Monomial<T>>,
    ) -> Result<Self> {
        if a.order() != 2 || a.rows() != a.cols() {
            return Err(Error::DimensionMismatch(format!(
                "A must be square, got {:?}",
                a.dims()
            )));
        }
        let n = a.rows();
        if c.order() != 2 || c.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "C has dims {:?}, state dim {n}",
                c.dims()
            )));
        }
        if g.order() != 2 || g.rows() != n {
            return Err(Error::DimensionMismatch(format!(
                "G has dims {:?}, state dim {n}",
                g.dims()
            )));
        }
        let p = c.rows();
        let check =
            |terms: &[Monomial<T>], rows: usize| terms.iter().all(|t| t.output < rows && t.vars.iter().all(|&v| v < n));
        if !check(&f_terms, n) || !check(&h_terms, p) {
            return Err(Error::InvalidArgument("monomial index out of range".into()));
        }
        Ok(Self {
            n,
            m: g.cols(),
            p,
            a,
            c,
            g,
            f_terms,
            h_terms,
        })
    }

    pub fn a(&self) -> &Tensor<T> {
        &self.a
    }

    pub fn c(&self) -> &Tensor<T> {
        &self.c
    }

    pub fn f_terms(&self) -> &[Monomial<T>] {
        &self.f_terms
    }

    pub fn h_terms(&self) -> &[Monomial<T>] {
        &self.h_terms
    }

    pub fn is_linear(&self) -> bool {
        self.f_terms.iter().chain(&self.h_terms).all(|t| t.degree() <= 1)
    }

    fn degree(lin: &Tensor<T>, terms: &[Monomial<T>]) -> usize {
        let base = usize::from(!lin.is_zero());
        terms.iter().map(Monomial::degree).fold(base, usize::max)
    }

    fn eval(lin: &Tensor<T>, terms: &[Monomial<T>], x: &[T], out: &mut [T]) {
        let rows = lin.rows();
        out.iter_mut().for_each(|o| *o = T::zero());
        let data = lin.as_slice();
        for (j, &xj) in x.iter().enumerate() {
            if xj == T::zero() {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += data[i + rows * j] * xj;
            }
        }
        for t in terms {
            out[t.output] += t.eval(x);
        }
    }

    fn derivative(&self, lin: &Tensor<T>, terms: &[Monomial<T>], order: usize, x: &[T]) -> Result<Tensor<T>> {
        check_order(order, usize::MAX)?;
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut dims = vec![self.n; order + 1];
        dims[0] = lin.rows();
        let mut out = if order == 1 { lin.clone() } else { Tensor::zeros(&dims) };
        for t in terms {
            t.add_derivative(order, x, &mut out);
        }
        Ok(out)
    }
}

impl<T: Scalar> SystemModel<T> for PolynomialModel<T> {
    fn state_dim(&self) -> usize {
        self.n
    }

    fn disturbance_dim(&self) -> usize {
        self.m
    }

    fn output_dim(&self) -> usize {
        self.p
    }

    fn input_map(&self) -> &Tensor<T> {
        &self.g
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn f_degree(&self) -> Option<usize> {
        Some(Self::degree(&self.a, &self.f_terms))
    }

    fn h_degree(&self) -> Option<usize> {
        Some(Self::degree(&self.c, &self.h_terms))
    }

    fn f_into(&self, x: &[T], out: &mut [T]) {
        Self::eval(&self.a, &self.f_terms, x, out);
    }

    fn h_into(&self, x: &[T], out: &mut [T]) {
        Self::eval(&self.c, &self.h_terms, x, out);
    }

    fn f_derivative(&self, order: usize, x: &[T]) -> Result<Tensor<T>> {
        self.derivative(&self.a, &self.f_terms, order, x)
    }

    fn h_derivative(&self, order: usize, x: &[T]) -> Result<Tensor<T>> {
        self.derivative(&self.c, &self.h_terms, order, x)
    }
}

/// `f(ξ) = Aξ`, `h(ξ) = Cξ`, input map `G`.
pub fn linear_model<T: Scalar>(a: Tensor<T>, c: Tensor<T>, g: Tensor<T>) -> Result<PolynomialModel<T>> {
    PolynomialModel::new(a, c, g, Vec::new(), Vec::new())
}
