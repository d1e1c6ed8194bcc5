//! Randomized property checks shared by the `selftest` command and the
//! acceptance suite. Every check reports its worst observed error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hoekf::{Hoekf, HoekfOptions, ObserverState};
use crate::model::{linear_model, Monomial, PolynomialModel, SystemModel, Weights};
use crate::ode::{rk45_adaptive, rk4_fixed, uniform_grid, IntegratorConfig};
use crate::tensor::{is_symmetric, shuffle_set, sym_shuffle, symmetrize_full, Permutation, Tensor};

/// Result of one property check over many random instances.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub instances: usize,
    /// Largest error seen (meaning depends on the check).
    pub worst: f64,
    pub tol: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(name: &str, instances: usize, worst: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            instances,
            worst,
            tol,
            passed: worst <= tol,
        }
    }
}

fn random(dims: &[usize], rng: &mut ChaCha8Rng) -> Tensor<f64> {
    let len = dims.iter().product();
    Tensor::from_vec(dims, (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).expect("dims match data")
}

fn random_sym(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Tensor<f64> {
    symmetrize_full(&random(&vec![n; d], rng)).expect("cubical")
}

fn rel_diff(a: &Tensor<f64>, b: &Tensor<f64>) -> f64 {
    let scale = 1.0 + a.norm_max().max(b.norm_max());
    a.sub(b).map_or(f64::INFINITY, |d| d.norm_max() / scale)
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Tensor identities: product rule, symmetry exchange, mode sum, shuffle
/// cardinalities, contraction associativity, reshape isometry.
pub fn tensor_suite(seed: u64, instances: usize) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (fd, exact) = product_rule(&mut rng, instances);
    vec![
        fd,
        exact,
        symmetry_exchange(&mut rng, instances),
        mode_sum(&mut rng, instances),
        shuffle_cardinality(),
        contraction_associativity(&mut rng, instances),
        reshape_isometry(&mut rng, instances),
    ]
}

/// Polynomial map `ℝⁿ → ℝᵐ` of degree ≤ 3 realized as the output of a
/// model with trivial dynamics.
fn random_poly_map(n: usize, m: usize, rng: &mut ChaCha8Rng) -> PolynomialModel<f64> {
    let c = random(&[m, n], rng);
    let mut terms = Vec::new();
    for _ in 0..3 {
        let deg = rng.gen_range(2..=3);
        let vars = (0..deg).map(|_| rng.gen_range(0..n)).collect();
        terms.push(Monomial::new(rng.gen_range(0..m), rng.gen_range(-1.0..1.0), vars));
    }
    PolynomialModel::new(Tensor::zeros(&[n, n]), c, Tensor::zeros(&[n, 1]), Vec::new(), terms).expect("consistent dims")
}

/// `uᵀg` expanded into scalar monomials.
fn product_poly(u: &PolynomialModel<f64>, g: &PolynomialModel<f64>, n: usize, m: usize) -> PolynomialModel<f64> {
    let expand = |p: &PolynomialModel<f64>| -> Vec<Vec<(f64, Vec<usize>)>> {
        let mut rows = vec![Vec::new(); m];
        for (a, row) in rows.iter_mut().enumerate() {
            for j in 0..n {
                row.push((p.c().at(a, j), vec![j]));
            }
        }
        for t in p.h_terms() {
            rows[t.output].push((t.coeff, t.vars().to_vec()));
        }
        rows
    };
    let (eu, eg) = (expand(u), expand(g));
    let mut terms = Vec::new();
    for a in 0..m {
        for (cu, vu) in &eu[a] {
            for (cg, vg) in &eg[a] {
                let vars = vu.iter().chain(vg).copied().collect();
                terms.push(Monomial::new(0, cu * cg, vars));
            }
        }
    }
    PolynomialModel::new(
        Tensor::zeros(&[n, n]),
        Tensor::zeros(&[1, n]),
        Tensor::zeros(&[n, 1]),
        Vec::new(),
        terms,
    )
    .expect("consistent dims")
}

/// `D^i` of the output map, with `D⁰` the value as an order-1 tensor.
fn deriv(p: &PolynomialModel<f64>, i: usize, x: &[f64]) -> Tensor<f64> {
    if i == 0 {
        Tensor::vector(&p.h(x))
    } else {
        p.h_derivative(i, x).expect("all orders available")
    }
}

/// `D^k(uᵀg) = Σ_i Sym_{i,k−i}(D^i u *_{1,1} D^{k−i} g)` against central
/// differences of `D^{k−1}(uᵀg)` and against the expanded product.
fn product_rule(rng: &mut ChaCha8Rng, instances: usize) -> (CheckOutcome, CheckOutcome) {
    let (mut worst_fd, mut worst_exact): (f64, f64) = (0.0, 0.0);
    for trial in 0..instances {
        let n = 1 + trial % 3;
        let m = 1 + (trial / 3) % 3;
        let k = 1 + (trial / 9) % 3;
        let u = random_poly_map(n, m, rng);
        let g = random_poly_map(n, m, rng);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut lhs = Tensor::zeros(&vec![n; k]);
        for i in 0..=k {
            let c = deriv(&u, i, &x)
                .contract(1, &deriv(&g, k - i, &x), 1)
                .expect("matching m");
            lhs.axpy(1.0, &sym_shuffle(&c, i, k - i).expect("order k"))
                .expect("dims");
        }
        let phi = product_poly(&u, &g, n, m);
        let eps = 1e-5;
        let mut fd = Tensor::zeros(&vec![n; k]);
        for q in 0..n {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[q] += eps;
            xm[q] -= eps;
            // D^{k−1}φ is [1, n^{k−1}] (or the scalar value when k = 1)
            let dp = deriv(&phi, k - 1, &xp);
            let dm = deriv(&phi, k - 1, &xm);
            let cols = dp.len();
            for r in 0..cols {
                // new differentiation index is the last mode
                fd.as_mut_slice()[r + cols * q] = (dp.as_slice()[r] - dm.as_slice()[r]) / (2.0 * eps);
            }
        }
        let exact = deriv(&phi, k, &x);
        let exact = Tensor::from_vec(&vec![n; k], exact.into_vec()).expect("same length");
        worst_fd = worst_fd.max(lhs.sub(&fd).expect("dims").norm_max() / (1.0 + fd.norm_max()));
        worst_exact = worst_exact.max(rel_diff(&lhs, &exact));
    }
    (
        CheckOutcome::new("product rule vs finite differences", instances, worst_fd, 1e-5),
        CheckOutcome::new("product rule vs expanded polynomial", instances, worst_exact, 1e-12),
    )
}

/// `Sym_{j,ℓ}(A *_{1,1}(Γ *_{2,1} B)) = Sym_{ℓ,j}(B *_{1,1}(Γ *_{2,1} A))`.
fn symmetry_exchange(rng: &mut ChaCha8Rng, instances: usize) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for trial in 0..instances {
        let n = 2 + trial % 2;
        let j = 1 + (trial / 2) % 3;
        let l = 1 + (trial / 6) % 3;
        let a = random_sym(n, j + 1, rng);
        let b = random_sym(n, l + 1, rng);
        let gamma = random_sym(n, 2, rng);
        let left = a
            .contract(1, &gamma.contract(2, &b, 1).expect("dims"), 1)
            .expect("dims");
        let right = b
            .contract(1, &gamma.contract(2, &a, 1).expect("dims"), 1)
            .expect("dims");
        let left = sym_shuffle(&left, j, l).expect("order");
        let right = sym_shuffle(&right, l, j).expect("order");
        worst = worst.max(rel_diff(&left, &right));
    }
    CheckOutcome::new("symmetry exchange identity", instances, worst, 1e-12)
}

/// `Sym_{ℓ−1,1}(A *_{1,1} B) = Σ_j A ×_j B` for symmetric `A`.
fn mode_sum(rng: &mut ChaCha8Rng, instances: usize) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for trial in 0..instances {
        let l = 2 + trial % 3;
        let n = 2 + (trial / 3) % 2;
        let a = random_sym(n, l, rng);
        let b = random(&[n, n], rng);
        let left = sym_shuffle(&a.contract(1, &b, 1).expect("dims"), l - 1, 1).expect("order");
        let mut right = Tensor::zeros(&vec![n; l]);
        for mode in 1..=l {
            right.axpy(1.0, &a.mode_mul(mode, &b).expect("dims")).expect("dims");
        }
        worst = worst.max(rel_diff(&left, &right));
    }
    CheckOutcome::new("mode-sum identity", instances, worst, 1e-12)
}

fn shuffle_cardinality() -> CheckOutcome {
    let mut bad = 0usize;
    let mut count = 0;
    for i in 0..=8 {
        for j in 0..=8 - i {
            if i + j == 0 {
                continue;
            }
            count += 1;
            let set = shuffle_set(i, j);
            let mut distinct = set.clone();
            distinct.sort_by(|a, b| a.image().cmp(b.image()));
            distinct.dedup();
            if set.len() != binom(i + j, i) || distinct.len() != set.len() {
                bad += 1;
            }
        }
    }
    CheckOutcome::new("|S_{i,j}| = binomial(i+j, i)", count, bad as f64, 0.0)
}

/// `A *_{2,1}(B *_{1,2} C) = (A *_{2,2} B) *_{3,2} C`.
fn contraction_associativity(rng: &mut ChaCha8Rng, instances: usize) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let d: Vec<usize> = (0..6).map(|_| rng.gen_range(1..=3)).collect();
        let (n1, n2, n3, m1, m2, m3) = (d[0], d[1], d[2], d[3], d[4], d[5]);
        let p = rng.gen_range(1..=3);
        let a = random(&[n1, n2, n3], rng);
        let b = random(&[m2, n2, p], rng);
        let c = random(&[m1, m2, m3], rng);
        let left = a.contract(2, &b.contract(1, &c, 2).expect("dims"), 1).expect("dims");
        let right = a.contract(2, &b, 2).expect("dims").contract(3, &c, 2).expect("dims");
        worst = worst.max(rel_diff(&left, &right));
    }
    CheckOutcome::new("contraction associativity", instances, worst, 1e-12)
}

fn reshape_isometry(rng: &mut ChaCha8Rng, instances: usize) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let d = rng.gen_range(2..=4);
        let dims: Vec<usize> = (0..d).map(|_| rng.gen_range(1..=3)).collect();
        let a = random(&dims, rng);
        let mut image: Vec<usize> = (1..=d).collect();
        for q in (1..d).rev() {
            image.swap(q, rng.gen_range(0..=q));
        }
        let sigma = Permutation::new(image).expect("valid permutation");
        let r = a.reshape_perm(&sigma).expect("order matches");
        let back = r.reshape_perm(&sigma.inverse()).expect("order matches");
        let norms = (r.norm_max() - a.norm_max()).abs() + (r.norm_frobenius() - a.norm_frobenius()).abs();
        let trip = if back == a { 0.0 } else { f64::INFINITY };
        worst = worst.max(norms / (1.0 + a.norm_frobenius())).max(trip);
    }
    CheckOutcome::new("reshape isometry and exact round trip", instances, worst, 1e-14)
}

fn random_state(n: usize, k: usize, rng: &mut ChaCha8Rng) -> ObserverState<f64> {
    let x = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let l = random(&[n, n], rng).scale(0.5);
    let p2 = l
        .matmul(&l.transpose().expect("matrix"))
        .expect("dims")
        .add(&Tensor::identity(n))
        .expect("dims");
    let mut p = vec![p2];
    p.extend((3..=k).map(|j| random_sym(n, j, rng).scale(0.5)));
    ObserverState { x, p }
}

fn cubic_model(n: usize, rng: &mut ChaCha8Rng) -> PolynomialModel<f64> {
    let mut f_terms = Vec::new();
    let mut h_terms = Vec::new();
    for _ in 0..3 {
        let deg = rng.gen_range(2..=3);
        f_terms.push(Monomial::new(
            rng.gen_range(0..n),
            rng.gen_range(-1.0..1.0),
            (0..deg).map(|_| rng.gen_range(0..n)).collect(),
        ));
    }
    h_terms.push(Monomial::new(0, rng.gen_range(-0.5..0.5), vec![0, n - 1]));
    PolynomialModel::new(
        random(&[n, n], rng),
        random(&[2, n], rng),
        random(&[n, 2], rng),
        f_terms,
        h_terms,
    )
    .expect("consistent dims")
}

/// Observer and integrator invariants: linear-manifold invariance,
/// symmetry before projection, flatten round trip, integrator orders.
pub fn observer_suite(seed: u64, instances: usize) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        linear_invariance(&mut rng, instances),
        rhs_symmetry(&mut rng, instances),
        flatten_round_trip(&mut rng, instances),
        rk4_order(),
        dopri_tolerance_response(),
    ]
}

fn linear_invariance(rng: &mut ChaCha8Rng, instances: usize) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for trial in 0..instances {
        let n = 2 + trial % 2;
        let k = 3 + trial % 3;
        let model =
            linear_model(random(&[n, n], rng), random(&[1, n], rng), random(&[n, 1], rng)).expect("consistent dims");
        let w = Weights::identity(n, 1, 1);
        let f = Hoekf::new(&model, &w, k, HoekfOptions::default()).expect("valid order");
        let mut s = random_state(n, k, rng);
        for j in 3..=k {
            s.p[j - 2] = Tensor::cube(n, j);
        }
        let d = f.rhs(&s, &[rng.gen_range(-1.0..1.0)]).map_or(f64::INFINITY, |d| {
            (3..=k).map(|j| d.p(j).norm_max()).fold(0.0, f64::max)
        });
        worst = worst.max(d);
    }
    CheckOutcome::new("linear manifold invariance (exact)", instances, worst, 0.0)
}

fn rhs_symmetry(rng: &mut ChaCha8Rng, instances: usize) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for trial in 0..instances {
        let n = 2 + trial % 2;
        let k = 2 + trial % 4;
        let model = cubic_model(n, rng);
        let w = Weights::identity(n, 2, 2);
        let f = Hoekf::new(&model, &w, k, HoekfOptions::default()).expect("valid order");
        let s = random_state(n, k, rng);
        let y = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let e = match f.rhs_unprojected(&s, &y) {
            Ok(d) => (2..=k)
                .map(|j| {
                    let p = d.p(j);
                    let sym = symmetrize_full(p).expect("cubical");
                    p.sub(&sym).expect("dims").norm_max() / (1.0 + p.norm_max())
                })
                .fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(e);
    }
    CheckOutcome::new(
        "observer derivative symmetric before projection",
        instances,
        worst,
        1e-9,
    )
}

fn flatten_round_trip(rng: &mut ChaCha8Rng, instances: usize) -> CheckOutcome {
    let mut bad = 0usize;
    for trial in 0..instances {
        let n = 1 + trial % 3;
        let k = 2 + trial % 4;
        let s = random_state(n, k, rng);
        let ok = ObserverState::unflatten(&s.flatten(), n, k).is_ok_and(|r| r == s);
        bad += usize::from(!ok || !is_symmetric(s.p(2), 1e-12));
    }
    CheckOutcome::new("flatten/unflatten round trip (exact)", instances, bad as f64, 0.0)
}

/// Observed order of the fixed-step scheme on `ẏ = t y`.
fn rk4_order() -> CheckOutcome {
    let exact = |t: f64| (0.5 * t * t).exp();
    let rhs = |t: f64, y: &[f64], o: &mut [f64]| {
        o[0] = t * y[0];
        Ok(())
    };
    let err = |steps: usize| {
        let grid = uniform_grid(0.0, 1.5, steps + 1);
        let ys = rk4_fixed(rhs, &[1.0], &grid).expect("smooth problem");
        (ys[steps][0] - exact(1.5)).abs()
    };
    let orders: Vec<f64> = [10, 20, 40].iter().map(|&s| (err(s) / err(2 * s)).log2()).collect();
    let worst = orders.iter().map(|o| (3.8 - o).max(0.0)).fold(0.0, f64::max);
    CheckOutcome::new("rk4 observed order ≥ 3.8", orders.len(), worst, 0.0)
}

/// Tightening `rtol` tenfold reduces the adaptive error at least fivefold.
fn dopri_tolerance_response() -> CheckOutcome {
    let run = |rtol: f64| {
        let cfg = IntegratorConfig::with_tolerances(rtol, rtol * 1e-2);
        let tr = rk45_adaptive(
            |_, y: &[f64], o: &mut [f64]| {
                o[0] = -y[0];
                Ok(())
            },
            &[1.0],
            (0.0, 5.0),
            &cfg,
        );
        (tr.final_state()[0] - (-5.0f64).exp()).abs()
    };
    let rtols = [1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
    let errs: Vec<f64> = rtols.iter().map(|&r| run(r)).collect();
    let worst = errs
        .windows(2)
        .map(|w| if w[1] * 5.0 <= w[0] { 0.0 } else { w[1] / w[0] })
        .fold(0.0, f64::max);
    CheckOutcome::new(
        "rk45 tolerance response (factor ≥ 5 per decade)",
        errs.len() - 1,
        worst,
        0.0,
    )
}
