use hoekf_core::hoekf::ObserverState;
use hoekf_core::io::fmt_num;
use hoekf_core::tensor::{is_symmetric, shuffle_set, sym_shuffle, symmetrize_full, SpdFactor};
use hoekf_core::{Permutation, Tensor};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(dims: &[usize], seed: u64) -> Tensor<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = dims.iter().product();
    Tensor::from_vec(dims, (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// Multi-index of a linear offset, first index fastest.
fn unravel(mut lin: usize, dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .map(|&d| {
            let i = lin % d;
            lin /= d;
            i
        })
        .collect()
}

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 1..=3)
}

fn perm_strategy(d: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((1..=d).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #[test]
    fn contraction_matches_index_loop(
        da in dims_strategy(),
        db in dims_strategy(),
        mu_seed in 0usize..8,
        nu_seed in 0usize..8,
        seed in any::<u64>(),
    ) {
        let mu = 1 + mu_seed % da.len();
        let nu = 1 + nu_seed % db.len();
        let mut db = db;
        db[nu - 1] = da[mu - 1];
        let a = random(&da, seed);
        let b = random(&db, seed.wrapping_add(1));
        let c = a.contract(mu, &b, nu).unwrap();
        let ra: Vec<usize> = da.iter().enumerate().filter(|&(q, _)| q != mu - 1).map(|(_, &d)| d).collect();
        let rb: Vec<usize> = db.iter().enumerate().filter(|&(q, _)| q != nu - 1).map(|(_, &d)| d).collect();
        let mut expected = vec![0.0; c.len()];
        for (lin, e) in expected.iter_mut().enumerate() {
            let idx = unravel(lin, &ra.iter().chain(&rb).copied().collect::<Vec<_>>());
            let (ia, ib) = idx.split_at(ra.len());
            for k in 0..da[mu - 1] {
                let mut full_a = ia.to_vec();
                full_a.insert(mu - 1, k);
                let mut full_b = ib.to_vec();
                full_b.insert(nu - 1, k);
                *e += a.get(&full_a) * b.get(&full_b);
            }
        }
        for (x, y) in c.as_slice().iter().zip(&expected) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn reshape_follows_entry_formula_and_inverts(
        (dims, sigma) in dims_strategy().prop_flat_map(|d| { let n = d.len(); (Just(d), perm_strategy(n)) }),
        seed in any::<u64>(),
    ) {
        let a = random(&dims, seed);
        let s = Permutation::new(sigma.clone()).unwrap();
        let r = a.reshape_perm(&s).unwrap();
        for lin in 0..r.len() {
            let idx = unravel(lin, r.dims());
            let src: Vec<usize> = sigma.iter().map(|&p| idx[p - 1]).collect();
            prop_assert_eq!(r.get(&idx), a.get(&src));
        }
        let back = r.reshape_perm(&s.inverse()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn shuffle_sum_preserves_total_mass(i in 1usize..=3, j in 1usize..=3, n in 1usize..=3, seed in any::<u64>()) {
        let t = random(&vec![n; i + j], seed);
        let s = sym_shuffle(&t, i, j).unwrap();
        let count = shuffle_set(i, j).len() as f64;
        let total: f64 = t.as_slice().iter().sum();
        let sum: f64 = s.as_slice().iter().sum();
        prop_assert!((sum - count * total).abs() < 1e-10 * (1.0 + count * total.abs()));
    }

    #[test]
    fn shuffle_of_block_symmetric_is_symmetric(i in 1usize..=3, j in 1usize..=3, n in 1usize..=3, seed in any::<u64>()) {
        let a = symmetrize_full(&random(&vec![n; i], seed)).unwrap();
        let b = symmetrize_full(&random(&vec![n; j], seed ^ 0x55)).unwrap();
        let s = sym_shuffle(&a.outer(&b), i, j).unwrap();
        prop_assert!(is_symmetric(&s, 1e-12));
    }

    #[test]
    fn symmetrization_is_idempotent(d in 1usize..=4, n in 1usize..=3, seed in any::<u64>()) {
        let s = symmetrize_full(&random(&vec![n; d], seed)).unwrap();
        prop_assert!(is_symmetric(&s, 1e-14));
        let s2 = symmetrize_full(&s).unwrap();
        prop_assert!(s2.sub(&s).unwrap().norm_max() < 1e-14);
    }

    #[test]
    fn spd_solve_residual(n in 1usize..=6, seed in any::<u64>()) {
        let b = random(&[n, n], seed);
        let m = b.matmul(&b.transpose().unwrap()).unwrap().add(&Tensor::identity(n)).unwrap();
        let rhs = random(&[n], seed ^ 7);
        let x = SpdFactor::new(&m).unwrap().solve_slice(rhs.as_slice()).unwrap();
        let mx = m.matvec(&x).unwrap();
        let res = mx.iter().zip(rhs.as_slice()).fold(0.0f64, |r, (a, b)| r.max((a - b).abs()));
        prop_assert!(res < 1e-10);
    }

    #[test]
    fn observer_state_round_trip(n in 1usize..=3, k in 2usize..=5, seed in any::<u64>()) {
        let len = hoekf_core::hoekf::flat_len(n, k);
        let v = random(&[len], seed).into_vec();
        let s = ObserverState::unflatten(&v, n, k).unwrap();
        prop_assert_eq!(s.order(), k);
        prop_assert_eq!(s.flatten(), v);
    }

    #[test]
    fn number_text_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let back: f64 = fmt_num(x).parse().unwrap();
        prop_assert!(back == x || (x == 0.0 && back == 0.0));
    }
}
