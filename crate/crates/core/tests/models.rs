use hoekf_core::model::{
    duffing_model, equidistant_sensors, wave_model, DuffingParams, Monomial, PolynomialModel, SystemModel,
    WaveNonlinearity,
};
use hoekf_core::ode::{rk45_adaptive, IntegratorConfig};
use hoekf_core::scalar::norm2;
use hoekf_core::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gauss–Legendre nodes and weights on `[0, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (x + 1.0), 0.5 * w));
    }
    out
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    let q = gauss_legendre(64);
    let s: f64 = q.iter().map(|&(x, w)| w * x.powi(9)).sum();
    assert!((s - 0.1).abs() < 1e-14);
}

#[test]
fn quadruple_integrals_match_quadrature() {
    let (_, d) = wave_model(4, &equidistant_sensors::<f64>(4), 0.01, WaveNonlinearity::Derived).unwrap();
    let q = gauss_legendre(64);
    let pi = std::f64::consts::PI;
    let one_d = |f: [usize; 4]| -> f64 {
        q.iter()
            .map(|&(x, w)| w * f.iter().map(|&a| (pi * a as f64 * x).sin()).product::<f64>())
            .sum()
    };
    let nb = d.basis_count();
    let mut worst: f64 = 0.0;
    for a in 0..nb {
        for b in 0..nb {
            for c in 0..nb {
                for e in 0..nb {
                    let idx = [a, b, c, e];
                    let fx = idx.map(|i| d.basis[i].0);
                    let fy = idx.map(|i| d.basis[i].1);
                    worst = worst.max((one_d(fx) * one_d(fy) - d.t4.get(&idx)).abs());
                }
            }
        }
    }
    assert!(worst <= 1e-10, "{worst:e}");
}

fn tight() -> IntegratorConfig<f64> {
    IntegratorConfig::with_tolerances(1e-11, 1e-13)
}

#[test]
fn linear_wave_preserves_norm() {
    let (m, d) = wave_model(4, &equidistant_sensors::<f64>(4), 0.01, WaveNonlinearity::Off).unwrap();
    let nb = d.basis_count();
    let z0: Vec<f64> = (0..2 * nb).map(|i| 1.0 / (1.0 + i as f64)).collect();
    let tr = rk45_adaptive(
        |_, z: &[f64], o: &mut [f64]| {
            m.f_into(z, o);
            Ok(())
        },
        &z0,
        (0.0, 2.0),
        &tight(),
    );
    assert!(tr.status().is_completed());
    let e0 = norm2(&z0);
    for z in tr.states() {
        assert!((norm2(z) - e0).abs() <= 1e-6 * e0);
    }
}

#[test]
fn cubic_wave_conserves_energy() {
    // E = ½‖z‖² + ¼ ∫ w⁴ with w = S^{-1/2} z₁
    let (m, d) = wave_model(3, &equidistant_sensors::<f64>(2), 0.01, WaveNonlinearity::Derived).unwrap();
    let nb = d.basis_count();
    let energy = |z: &[f64]| {
        let w: Vec<f64> = (0..nb).map(|i| z[i] / d.stiffness[i].sqrt()).collect();
        let mut quartic = 0.0;
        for a in 0..nb {
            for b in 0..nb {
                for c in 0..nb {
                    for e in 0..nb {
                        quartic += d.t4.get(&[a, b, c, e]) * w[a] * w[b] * w[c] * w[e];
                    }
                }
            }
        }
        0.5 * z.iter().map(|v| v * v).sum::<f64>() + 0.25 * quartic
    };
    let z0 = vec![30.0, -10.0, 5.0, 3.0, 0.0, -2.0];
    assert_eq!(z0.len(), 2 * nb);
    let tr = rk45_adaptive(
        |_, z: &[f64], o: &mut [f64]| {
            m.f_into(z, o);
            Ok(())
        },
        &z0,
        (0.0, 2.0),
        &tight(),
    );
    assert!(tr.status().is_completed());
    let e0 = energy(&z0);
    assert!(e0 - 0.5 * norm2(&z0).powi(2) > 1e-3 * e0, "quartic part must matter");
    for z in tr.states() {
        assert!((energy(z) - e0).abs() <= 1e-7 * e0);
    }
}

/// Central differences of `D^{j−1}` against `D^j`, new index in the last mode.
fn fd_consistency(model: &dyn SystemModel<f64>, x: &[f64], max_j: usize) -> f64 {
    let n = x.len();
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    let lower = |j: usize, x: &[f64], h: bool| -> Tensor<f64> {
        match (j, h) {
            (0, false) => Tensor::vector(&model.f(x)),
            (0, true) => Tensor::vector(&model.h(x)),
            (_, false) => model.f_derivative(j, x).unwrap(),
            (_, true) => model.h_derivative(j, x).unwrap(),
        }
    };
    for h in [false, true] {
        for j in 1..=max_j {
            let exact = lower(j, x, h);
            let cols = exact.len() / n;
            for q in 0..n {
                let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
                xp[q] += eps;
                xm[q] -= eps;
                let (dp, dm) = (lower(j - 1, &xp, h), lower(j - 1, &xm, h));
                for r in 0..cols {
                    let fd = (dp.as_slice()[r] - dm.as_slice()[r]) / (2.0 * eps);
                    let e = (fd - exact.as_slice()[r + cols * q]).abs() / (1.0 + exact.norm_max());
                    worst = worst.max(e);
                }
            }
        }
    }
    worst
}

#[test]
fn derivatives_match_finite_differences() {
    let duffing = duffing_model(DuffingParams::<f64>::standard());
    assert!(fd_consistency(&duffing, &[0.7, -0.3], 4) < 1e-7);
    let (wave, _) = wave_model(3, &equidistant_sensors::<f64>(2), 0.01, WaveNonlinearity::Derived).unwrap();
    assert!(fd_consistency(&wave, &[1.0, -2.0, 0.5, 0.3, 0.1, -0.4], 4) < 1e-7);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let n = 3;
        let rand_t = |dims: &[usize], rng: &mut ChaCha8Rng| {
            let len = dims.iter().product();
            Tensor::from_vec(dims, (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
        };
        let mono = |rows: usize, rng: &mut ChaCha8Rng| -> Vec<Monomial<f64>> {
            (0..4)
                .map(|_| {
                    let deg = rng.gen_range(2..=4);
                    let vars = (0..deg).map(|_| rng.gen_range(0..n)).collect();
                    Monomial::new(rng.gen_range(0..rows), rng.gen_range(-1.0..1.0), vars)
                })
                .collect()
        };
        let f_terms = mono(n, &mut rng);
        let h_terms = mono(2, &mut rng);
        let model = PolynomialModel::new(
            rand_t(&[n, n], &mut rng),
            rand_t(&[2, n], &mut rng),
            rand_t(&[n, 1], &mut rng),
            f_terms,
            h_terms,
        )
        .unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(fd_consistency(&model, &x, 4) < 1e-7);
    }
}
