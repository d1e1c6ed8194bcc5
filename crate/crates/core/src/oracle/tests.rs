use super::*;
use crate::hoekf::{run_ekf, run_kf};
use crate::model::{
    duffing_disturbances, duffing_model, linear_model, simulate_truth, truth_config, DuffingParams, PolynomialModel,
};
use crate::ode::IntegratorConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn duffing(beta: f64, q: f64, horizon: f64) -> (PolynomialModel<f64>, Weights<f64>, Signal<f64>, Vec<f64>) {
    let model = duffing_model(DuffingParams {
        beta,
        ..DuffingParams::standard()
    });
    let dist = duffing_disturbances();
    let nodes = (horizon * 1000.0) as usize + 1;
    let truth = simulate_truth(&model, &dist, horizon, nodes, &truth_config()).unwrap();
    let w = Weights::scaled_output(2, 1, 1, q).unwrap();
    (model, w, truth.output, dist.x0)
}

fn tight() -> IntegratorConfig<f64> {
    IntegratorConfig::with_tolerances(1e-10, 1e-12)
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&d) / norm2(b).max(1e-300)
}

#[test]
fn initial_time_is_the_prior() {
    let (model, w, y, x0) = duffing(1.0, 2.0, 1.0);
    let gamma = Tensor::from_rows(&[&[2.0, 0.5], &[0.5, 1.0]]).unwrap();
    let w = Weights::new(gamma.clone(), w.r.clone(), w.q.clone()).unwrap();
    let or = Oracle::new(&model, &w, &x0, &y, GdConfig::default()).unwrap();
    let xi = [0.7, -1.1];
    let d = [xi[0] - x0[0], xi[1] - x0[1]];
    let gd = [2.0 * d[0] + 0.5 * d[1], 0.5 * d[0] + d[1]];
    let sol = or.solve_open_loop(0.0, &xi, None).unwrap();
    assert_eq!(sol.value, 0.5 * (d[0] * gd[0] + d[1] * gd[1]));
    assert_eq!(sol.gradient(), &gd);
    assert!(sol.converged);
    let he = or.value_hessian(0.0, &xi, &mut WarmStarts::new()).unwrap();
    assert_eq!(he.hessian, gamma);
    let mr = or.minimize_value(0.0, &xi).unwrap();
    assert_eq!(mr.x, x0);
}

#[test]
fn rejects_times_outside_the_record() {
    let (model, w, y, x0) = duffing(1.0, 2.0, 1.0);
    let or = Oracle::new(&model, &w, &x0, &y, GdConfig::default()).unwrap();
    assert!(matches!(
        or.solve_open_loop(1.5, &x0, None),
        Err(Error::OutOfSpan { .. })
    ));
    assert!(matches!(
        or.solve_open_loop(-0.1, &x0, None),
        Err(Error::OutOfSpan { .. })
    ));
    assert!(or.solve_open_loop(0.5, &[1.0], None).is_err());
}

#[test]
fn config_validation() {
    let bad = GdConfig::<f64> {
        rel_tol: 0.0,
        ..GdConfig::default()
    };
    assert!(bad.validate().is_err());
    let bad = GdConfig::<f64> {
        inner_grid_points: 1,
        ..GdConfig::default()
    };
    assert!(bad.validate().is_err());
    assert!(GdConfig::<f64>::default().validate().is_ok());
}

#[test]
fn solution_satisfies_dynamics_and_cost() {
    let (model, w, y, x0) = duffing(1.0, 2.0, 1.0);
    let or = Oracle::new(&model, &w, &x0, &y, GdConfig::default()).unwrap();
    let t = 0.8;
    let xi = [-0.4, 0.3];
    let sol = or.solve_open_loop(t, &xi, None).unwrap();
    assert!(sol.converged);
    assert_eq!(sol.state.last().unwrap().as_slice(), &xi);
    // forward re-simulation from x(0) with the returned control, fine RK4
    let sub = 8;
    let steps = (sol.grid.len() - 1) * sub;
    let h = t / steps as f64;
    let mut x = sol.state[0].clone();
    let rhs = |s: f64, x: &[f64]| -> Vec<f64> {
        let v = sol.control_at(s)[0];
        let mut d = model.f(x);
        d[1] += v;
        d
    };
    for i in 0..steps {
        let s = i as f64 * h;
        let k1 = rhs(s, &x);
        let x2: Vec<f64> = (0..2).map(|q| x[q] + 0.5 * h * k1[q]).collect();
        let k2 = rhs(s + 0.5 * h, &x2);
        let x3: Vec<f64> = (0..2).map(|q| x[q] + 0.5 * h * k2[q]).collect();
        let k3 = rhs(s + 0.5 * h, &x3);
        let x4: Vec<f64> = (0..2).map(|q| x[q] + h * k3[q]).collect();
        let k4 = rhs(s + h, &x4);
        x = (0..2)
            .map(|q| x[q] + h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]))
            .collect();
    }
    assert!(rel(&x, &xi) < 1e-8, "{x:?} vs {xi:?}");
    // cost by trapezoid over the stored nodes
    let n = sol.grid.len();
    let hq = t / (n - 1) as f64;
    let mut run = 0.0;
    for i in 0..n {
        let yv = y.eval(sol.grid[i]).unwrap()[0];
        let r = yv - sol.state[i][0];
        let c = sol.control[i][0].powi(2) + 2.0 * r * r;
        run += if i == 0 || i == n - 1 { 0.5 * hq * c } else { hq * c };
    }
    let d0 = [sol.state[0][0] - x0[0], sol.state[0][1] - x0[1]];
    let cost = 0.5 * (d0[0] * d0[0] + d0[1] * d0[1]) + 0.5 * run;
    assert!((cost - sol.value).abs() < 1e-12 * (1.0 + cost));
    // optimality: v = Gᵀp
    for (v, p) in sol.control.iter().zip(&sol.adjoint) {
        assert!((v[0] - p[1]).abs() < 1e-4 * (1.0 + p[1].abs()));
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let (model, w, y, x0) = duffing(1.0, 2.0, 1.0);
    let or = Oracle::new(&model, &w, &x0, &y, GdConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..4 {
        let xi = [rng.gen_range(-1.5..0.5), rng.gen_range(-1.0..1.0)];
        let t = 0.5;
        let (g, sol) = or.value_grad(t, &xi, None).unwrap();
        let eps = 1e-4;
        let mut fd = [0.0; 2];
        for i in 0..2 {
            let mut a = xi;
            let mut b = xi;
            a[i] += eps;
            b[i] -= eps;
            let va = or.solve_with_tol(t, &a, Some(&sol), 1e-9).unwrap().value;
            let vb = or.solve_with_tol(t, &b, Some(&sol), 1e-9).unwrap().value;
            fd[i] = (va - vb) / (2.0 * eps);
        }
        assert!(rel(&g, &fd) < 1e-3, "{g:?} vs {fd:?}");
    }
}

#[test]
fn linear_value_matches_kalman_duality() {
    let (model, w, y, x0) = duffing(0.0, 2.0, 1.0);
    let lin = model.clone();
    let kf = run_kf(lin.a(), lin.c(), lin.input_map(), &w, &x0, &y, 1.0, &tight()).unwrap();
    let or = Oracle::new(&model, &w, &x0, &y, GdConfig::default()).unwrap();
    for t in [0.4, 1.0] {
        let xk = kf.x_at(t).unwrap();
        let sigma = kf.matrix_at(t).unwrap();
        let he = or.value_hessian(t, &xk, &mut WarmStarts::new()).unwrap();
        assert!(he.spd && he.converged);
        let inv = SpdFactor::new(&sigma).unwrap().inverse();
        let err = he.hessian.sub(&inv).unwrap().norm_max() / inv.norm_max();
        assert!(err < 1e-3, "t {t}: hessian error {err:e}");
        // gradient vanishes at the Kalman estimate
        let g = or.solve_with_tol(t, &xk, None, 1e-9).unwrap();
        assert!(norm2(g.gradient()) < 1e-4);
        let mr = or.minimize_value(t, &[xk[0] + 0.3, xk[1] - 0.2]).unwrap();
        assert!(mr.converged);
        assert!(rel(&mr.x, &xk) < 1e-4 || norm2(&xk) < 1e-12);
        // second differences of the value against Σ⁻¹
        let e = 0.05;
        let v = |dx: f64, dy: f64| {
            or.solve_with_tol(t, &[xk[0] + dx, xk[1] + dy], None, 1e-9)
                .unwrap()
                .value
        };
        let v0 = v(0.0, 0.0);
        let d11 = (v(e, 0.0) - 2.0 * v0 + v(-e, 0.0)) / (e * e);
        let d22 = (v(0.0, e) - 2.0 * v0 + v(0.0, -e)) / (e * e);
        assert!((d11 - inv.at(0, 0)).abs() < 1e-3 * inv.norm_max());
        assert!((d22 - inv.at(1, 1)).abs() < 1e-3 * inv.norm_max());
    }
}

#[test]
fn linear_observer_integration_matches_kalman() {
    let (model, w, y, x0) = duffing(0.0, 0.5, 1.0);
    let lin = linear_model(model.a().clone(), model.c().clone(), model.input_map().clone()).unwrap();
    let kf = run_ekf(&lin, &w, &x0, &y, 1.0, &tight()).unwrap();
    let or = Oracle::new(&model, &w, &x0, &y, GdConfig::default()).unwrap();
    let run = or.integrate_mortensen(1.0, 50).unwrap();
    assert!(run.trajectory.completed());
    assert_eq!(run.trajectory.x_node(0), x0.as_slice());
    for &t in run.trajectory.times() {
        let a = run.trajectory.x_at(t).unwrap();
        let b = kf.x_at(t).unwrap();
        assert!(norm2(&[a[0] - b[0], a[1] - b[1]]) < 1e-3, "t {t}");
    }
}

#[test]
fn hessian_is_nearly_symmetric() {
    let (model, w, y, x0) = duffing(1.0, 2.0, 1.0);
    let or = Oracle::new(&model, &w, &x0, &y, GdConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..3 {
        let xi = [rng.gen_range(-1.0..0.5), rng.gen_range(-1.0..1.0)];
        let he = or.value_hessian(0.7, &xi, &mut WarmStarts::new()).unwrap();
        assert!(he.converged);
        assert!(he.raw_asymmetry < 1e-6, "{:e}", he.raw_asymmetry);
        assert!(is_sym(&he.hessian));
    }
}

fn is_sym(m: &Tensor<f64>) -> bool {
    m.at(0, 1) == m.at(1, 0)
}

#[test]
fn warm_start_reuses_the_control() {
    let (model, w, y, x0) = duffing(1.0, 2.0, 1.0);
    let or = Oracle::new(&model, &w, &x0, &y, GdConfig::default()).unwrap();
    let xi = [-0.5, 0.2];
    let cold = or.solve_open_loop(0.9, &xi, None).unwrap();
    let warm = or.solve_open_loop(0.9, &xi, Some(&cold)).unwrap();
    assert!(warm.iterations <= 1);
    assert!((warm.value - cold.value).abs() < 1e-10);
    let shifted = or.solve_open_loop(0.91, &[-0.49, 0.2], Some(&cold)).unwrap();
    let fresh = or.solve_open_loop(0.91, &[-0.49, 0.2], None).unwrap();
    assert!(shifted.iterations < fresh.iterations);
}
