//! Duffing, wave and linear experiments, the oracle probe and the self-test.
//!
//! Each experiment writes CSV tables and SVG charts into an output directory
//! and returns human-readable summary lines.

use std::fs;
use std::path::{Path, PathBuf};

use hoekf_core::checks::{observer_suite, tensor_suite, CheckOutcome};
use hoekf_core::hoekf::{relative_distance, run_ekf, run_hoekf, run_kf, HoekfOptions, ObserverTrajectory};
use hoekf_core::io::{fmt_num, signal_header, write_oracle, write_signal, write_table, write_trajectory, OracleRecord};
use hoekf_core::model::{
    duffing_model, equidistant_sensors, simulate_truth, truth_config, wave_disturbances, wave_model, DisturbanceSpec,
    DuffingParams, PolynomialModel, Signal, SystemModel, WaveNonlinearity, Weights,
};
use hoekf_core::ode::{uniform_grid, IntegratorConfig};
use hoekf_core::oracle::{Oracle, WarmStarts};
use hoekf_core::scalar::norm2;
use hoekf_core::Tensor;
use rayon::prelude::*;

use crate::config::{Config, Nonlinearity, WAVE_MAX_ORDER};
use crate::svg::{emit_plot, PlotStyle, Series};
use crate::CliError;

type Meta = Vec<(String, String)>;

/// CSV bytes, plot series and per-observer mean lines.
type DistanceTable = (Vec<u8>, Vec<Series>, Vec<String>);

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| fmt_num(x)).collect();
    format!("[{}]", parts.join(";"))
}

fn orders_text(orders: &[usize]) -> String {
    let parts: Vec<String> = orders.iter().map(|k| k.to_string()).collect();
    parts.join(";")
}

/// Output directory; every artifact goes through it.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    fn svg(&mut self, name: &str, series: &[Series], style: &PlotStyle) -> Result<(), CliError> {
        let s = emit_plot(series, style)?;
        self.put(name, s.as_bytes())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

fn weights(n: usize, m: usize, p: usize, gamma: f64, r: f64, q: f64) -> Result<Weights<f64>, CliError> {
    Ok(Weights::new(
        Tensor::identity(n).scale(gamma),
        Tensor::identity(m).scale(r),
        Tensor::identity(p).scale(q),
    )?)
}

fn options(cfg: &Config) -> HoekfOptions {
    HoekfOptions {
        store_tensors: cfg.run.tensors,
        ..HoekfOptions::default()
    }
}

/// HOEKF runs for all orders on the rayon pool, returned in order.
#[allow(clippy::too_many_arguments)]
fn run_orders(
    orders: &[usize],
    model: &PolynomialModel<f64>,
    w: &Weights<f64>,
    x0: &[f64],
    y: &Signal<f64>,
    horizon: f64,
    icfg: &IntegratorConfig<f64>,
    opts: &HoekfOptions,
) -> Result<Vec<ObserverTrajectory<f64>>, CliError> {
    let runs: Vec<_> = orders
        .par_iter()
        .map(|&k| run_hoekf(k, model, w, x0, y, horizon, icfg, opts))
        .collect();
    runs.into_iter().map(|r| r.map_err(CliError::from)).collect()
}

fn trajectory_csv(traj: &ObserverTrajectory<f64>, tensors: bool, meta: &Meta) -> Result<Vec<u8>, CliError> {
    let mut meta = meta.clone();
    meta.push(kv("observer", traj.kind().label()));
    Ok(write_trajectory(Vec::new(), traj, tensors, &meta)?)
}

fn status_line(prefix: &str, traj: &ObserverTrajectory<f64>) -> String {
    match traj.breakdown_time() {
        Some(t) => format!("{prefix} {}: breakdown at t={}", traj.kind().label(), fmt_num(t)),
        None => format!(
            "{prefix} {}: completed to t={}",
            traj.kind().label(),
            fmt_num(traj.end())
        ),
    }
}

/// `(t, x_i(t))` on `points` uniform nodes clipped to the trajectory span.
fn component(traj: &ObserverTrajectory<f64>, i: usize, horizon: f64, points: usize) -> Vec<(f64, f64)> {
    uniform_grid(0.0, horizon, points)
        .into_iter()
        .filter(|&t| t <= traj.end())
        .filter_map(|t| traj.x_at(t).ok().map(|x| (t, x[i])))
        .collect()
}

fn signal_component(sig: &Signal<f64>, i: usize) -> Vec<(f64, f64)> {
    sig.grid().iter().zip(sig.values()).map(|(&t, v)| (t, v[i])).collect()
}

fn state_csv(truth: &Signal<f64>, meta: &Meta) -> Result<Vec<u8>, CliError> {
    let rows = truth
        .grid()
        .iter()
        .zip(truth.values())
        .map(|(&t, v)| std::iter::once(t).chain(v.iter().copied()).map(fmt_num).collect());
    Ok(write_table(
        Vec::new(),
        meta,
        &signal_header("x", truth.dim()),
        rows,
        &[],
    )?)
}

fn duffing_disturbances(cfg: &Config) -> DisturbanceSpec<f64> {
    let d = &cfg.duffing;
    let (va, vf, ma, mf) = (d.v_amplitude, d.v_frequency, d.mu_amplitude, d.mu_frequency);
    DisturbanceSpec::new(
        d.x0.clone(),
        d.eta.clone(),
        move |t| vec![va * (vf * t).cos()],
        move |t| vec![ma * (mf * t).sin()],
    )
}

fn duffing_params(cfg: &Config, beta: f64) -> DuffingParams<f64> {
    DuffingParams {
        lambda: cfg.duffing.lambda,
        beta,
        delta: cfg.duffing.delta,
    }
}

fn duffing_meta(cfg: &Config, beta: f64) -> Meta {
    let d = &cfg.duffing;
    vec![
        kv("generator", concat!("hoekf ", env!("CARGO_PKG_VERSION"))),
        kv("lambda", fmt_num(d.lambda)),
        kv("beta", fmt_num(beta)),
        kv("delta", fmt_num(d.delta)),
        kv("x0", list(&d.x0)),
        kv("eta", list(&d.eta)),
    ]
}

/// Duffing oscillator: truth, HOEKF-k per order, EKF and optionally the
/// Mortensen reference with relative distances, once per output weight.
pub fn run_duffing(cfg: &Config, out: &mut Outputs) -> Result<Vec<String>, CliError> {
    let orders = cfg.orders(&[2, 3, 4, 5, 6, 7, 8])?;
    let d = &cfg.duffing;
    let model = duffing_model(duffing_params(cfg, d.beta));
    let dist = duffing_disturbances(cfg);
    let truth = simulate_truth(&model, &dist, d.horizon, d.truth_points, &truth_config())?;
    let mut meta = duffing_meta(cfg, d.beta);
    meta.push(kv("experiment", "duffing"));
    meta.push(kv("orders", orders_text(&orders)));
    meta.push(kv("horizon", fmt_num(d.horizon)));
    out.put("duffing_truth.csv", &state_csv(&truth.state, &meta)?)?;
    out.put("duffing_output.csv", &write_signal(Vec::new(), &truth.output, &meta)?)?;

    let icfg = cfg.integrator.config(false);
    let opts = options(cfg);
    let mut summary = Vec::new();
    for &q in &d.q {
        let w = weights(2, 1, 1, d.gamma, d.r, q)?;
        let tag = format!("duffing_q{}", fmt_num(q));
        let mut qmeta = meta.clone();
        qmeta.extend([
            kv("q", fmt_num(q)),
            kv("gamma", fmt_num(d.gamma)),
            kv("r", fmt_num(d.r)),
            kv("rtol", fmt_num(icfg.rtol)),
            kv("atol", fmt_num(icfg.atol)),
        ]);
        let mut observers = run_orders(&orders, &model, &w, &dist.x0, &truth.output, d.horizon, &icfg, &opts)?;
        observers.push(run_ekf(&model, &w, &dist.x0, &truth.output, d.horizon, &icfg)?);
        for tr in &observers {
            let name = format!("{tag}_{}.csv", tr.kind().label());
            out.put(&name, &trajectory_csv(tr, cfg.run.tensors, &qmeta)?)?;
            summary.push(status_line(&format!("q={}", fmt_num(q)), tr));
        }

        let mut panels: Vec<(String, Vec<Series>, bool)> = Vec::new();
        for (i, what) in [(0, "positions"), (1, "velocities")] {
            let mut series = vec![Series::new("truth", signal_component(&truth.state, i))];
            series.extend(
                observers
                    .iter()
                    .map(|tr| Series::new(tr.kind().label(), component(tr, i, d.horizon, d.plot_points))),
            );
            panels.push((what.to_string(), series, false));
        }

        if cfg.run.with_oracle {
            let oracle = Oracle::new(&model, &w, &dist.x0, &truth.output, cfg.oracle.gd_config())?;
            let mort = oracle
                .integrate_mortensen(d.mortensen_horizon, d.mortensen_steps)?
                .trajectory;
            let mut mmeta = qmeta.clone();
            mmeta.push(kv("steps", d.mortensen_steps));
            out.put(&format!("{tag}_mortensen.csv"), &trajectory_csv(&mort, false, &mmeta)?)?;
            summary.push(status_line(&format!("q={}", fmt_num(q)), &mort));
            let grid = uniform_grid(0.0, d.mortensen_horizon, d.distance_points);
            let (csv, series, means) = distance_table(&observers, &mort, &grid, &mmeta)?;
            out.put(&format!("{tag}_distance.csv"), &csv)?;
            summary.extend(means.into_iter().map(|m| format!("q={} {m}", fmt_num(q))));
            panels.push(("distance".to_string(), series, true));
        }

        for (what, series, log) in panels {
            let (title, ylabel) = match what.as_str() {
                "positions" => ("Positions", "x_1"),
                "velocities" => ("Velocities", "x_2"),
                _ => ("Relative distance to Mortensen", "d"),
            };
            let mut style = PlotStyle::new(format!("{title}, Q = {}", fmt_num(q)), "t", ylabel);
            style.log_y = log;
            out.svg(&format!("{tag}_{what}.svg"), &series, &style)?;
        }
    }
    Ok(summary)
}

/// Relative distances of every observer to the reference on `grid`; nodes
/// outside a common span or with a vanishing reference stay empty.
fn distance_table(
    observers: &[ObserverTrajectory<f64>],
    reference: &ObserverTrajectory<f64>,
    grid: &[f64],
    meta: &Meta,
) -> Result<DistanceTable, CliError> {
    let mut cols = Vec::with_capacity(observers.len());
    let mut series = Vec::new();
    let mut trailer = Vec::new();
    for tr in observers {
        let d = relative_distance(tr, reference, grid)?;
        let mut col = vec![None; grid.len()];
        if let Some(&(t0, _)) = d.first() {
            let start = grid
                .iter()
                .position(|&g| g == t0)
                .expect("distance nodes come from the grid");
            for (i, &(_, v)) in d.iter().enumerate() {
                col[start + i] = v;
            }
        }
        let defined: Vec<f64> = col.iter().flatten().copied().collect();
        let mean = if defined.is_empty() {
            "none".to_string()
        } else {
            fmt_num(defined.iter().sum::<f64>() / defined.len() as f64)
        };
        trailer.push(format!("mean d_{}={mean} nodes={}", tr.kind().label(), defined.len()));
        series.push(Series::new(
            tr.kind().label(),
            grid.iter()
                .zip(&col)
                .map(|(&t, v)| (t, v.unwrap_or(f64::NAN)))
                .collect(),
        ));
        cols.push(col);
    }
    let mut header = vec!["t".to_string()];
    header.extend(observers.iter().map(|tr| format!("d_{}", tr.kind().label())));
    let rows = grid.iter().enumerate().map(|(i, &t)| {
        let mut r = vec![fmt_num(t)];
        r.extend(cols.iter().map(|c| c[i].map_or_else(String::new, fmt_num)));
        r
    });
    let csv = write_table(Vec::new(), meta, &header, rows, &trailer)?;
    Ok((csv, series, trailer))
}

fn nonlinearity(n: Nonlinearity) -> WaveNonlinearity {
    match n {
        Nonlinearity::Derived => WaveNonlinearity::Derived,
        Nonlinearity::MassScaled => WaveNonlinearity::MassScaled,
        Nonlinearity::Off => WaveNonlinearity::Off,
    }
}

/// Orders of the wave experiment, with the memory guard applied.
pub fn wave_orders(cfg: &Config) -> Result<Vec<usize>, CliError> {
    let orders = cfg.orders(&[2, 3, 4, 5])?;
    if let Some(&k) = orders.iter().find(|&&k| k > WAVE_MAX_ORDER) {
        return Err(CliError::Config(format!(
            "order {k} exceeds the wave memory guard: orders up to {WAVE_MAX_ORDER} are supported"
        )));
    }
    Ok(orders)
}

/// Cubic wave equation: HOEKF-k per order, value and gradient norm of the
/// value function along each estimate, and the initial displacement field.
pub fn run_wave(cfg: &Config, out: &mut Outputs) -> Result<Vec<String>, CliError> {
    let orders = wave_orders(cfg)?;
    let wc = &cfg.wave;
    let sensors = equidistant_sensors::<f64>(wc.sensors_per_side);
    let (model, disc) = wave_model(wc.truncation, &sensors, wc.ell, nonlinearity(wc.nonlinearity))?;
    let (n, m, p) = (model.state_dim(), model.disturbance_dim(), model.output_dim());
    let dist = wave_disturbances(&disc);
    let truth = simulate_truth(&model, &dist, wc.horizon, wc.truth_points, &truth_config())?;
    let w = weights(n, m, p, wc.gamma, wc.r, wc.q)?;
    let icfg = cfg.integrator.config(false);
    let meta: Meta = vec![
        kv("generator", concat!("hoekf ", env!("CARGO_PKG_VERSION"))),
        kv("experiment", "wave"),
        kv("orders", orders_text(&orders)),
        kv("truncation", wc.truncation),
        kv("state_dim", n),
        kv("sensors", p),
        kv("ell", fmt_num(wc.ell)),
        kv("nonlinearity", wc.nonlinearity.name()),
        kv("horizon", fmt_num(wc.horizon)),
        kv("gamma", fmt_num(wc.gamma)),
        kv("r", fmt_num(wc.r)),
        kv("q", fmt_num(wc.q)),
        kv("rtol", fmt_num(icfg.rtol)),
        kv("atol", fmt_num(icfg.atol)),
    ];
    out.put("wave_output.csv", &write_signal(Vec::new(), &truth.output, &meta)?)?;

    let observers = run_orders(
        &orders,
        &model,
        &w,
        &dist.x0,
        &truth.output,
        wc.horizon,
        &icfg,
        &options(cfg),
    )?;
    let mut summary = Vec::new();
    for tr in &observers {
        out.put(
            &format!("wave_{}.csv", tr.kind().label()),
            &trajectory_csv(tr, cfg.run.tensors, &meta)?,
        )?;
        summary.push(status_line("wave", tr));
    }

    // value and gradient norm along each estimate
    let oracle = Oracle::new(&model, &w, &dist.x0, &truth.output, cfg.oracle.gd_config())?;
    let evals: Vec<Vec<Option<(f64, f64, bool)>>> = observers
        .par_iter()
        .map(|tr| {
            wc.sample_times
                .iter()
                .map(|&t| {
                    if t > tr.end() {
                        return Ok(None);
                    }
                    let sol = oracle.solve_open_loop(t, &tr.x_at(t)?, None)?;
                    Ok(Some((sol.value, norm2(sol.gradient()), sol.converged)))
                })
                .collect::<hoekf_core::Result<Vec<_>>>()
        })
        .collect::<hoekf_core::Result<Vec<_>>>()?;
    let mut header = vec!["t".to_string()];
    header.extend(observers.iter().map(|tr| tr.kind().label()));
    let mut trailer = Vec::new();
    for (tr, ev) in observers.iter().zip(&evals) {
        for (&t, e) in wc.sample_times.iter().zip(ev) {
            if let Some((_, _, false)) = e {
                trailer.push(format!("unconverged {} t={}", tr.kind().label(), fmt_num(t)));
            }
        }
    }
    for (name, pick, title) in [
        ("wave_energy", 0usize, "Energy along the estimators"),
        ("wave_gradient_norm", 1, "Gradient norms of the value function"),
    ] {
        let cell = |e: &Option<(f64, f64, bool)>| e.map(|(v, g, _)| if pick == 0 { v } else { g });
        let rows = wc.sample_times.iter().enumerate().map(|(i, &t)| {
            let mut r = vec![fmt_num(t)];
            r.extend(evals.iter().map(|ev| cell(&ev[i]).map_or_else(String::new, fmt_num)));
            r
        });
        out.put(
            &format!("{name}.csv"),
            &write_table(Vec::new(), &meta, &header, rows, &trailer)?,
        )?;
        let series: Vec<Series> = observers
            .iter()
            .zip(&evals)
            .map(|(tr, ev)| {
                let pts = wc
                    .sample_times
                    .iter()
                    .zip(ev)
                    .map(|(&t, e)| (t, cell(e).unwrap_or(f64::NAN)));
                Series::new(tr.kind().label(), pts.collect())
            })
            .collect();
        let ylabel = if pick == 0 { "V(t, x)" } else { "|grad V(t, x)|" };
        out.svg(
            &format!("{name}.svg"),
            &series,
            &PlotStyle::new(title, "t", ylabel).log(),
        )?;
        for (tr, ev) in observers.iter().zip(&evals) {
            let vals: Vec<String> = ev
                .iter()
                .map(|e| cell(e).map_or_else(|| "-".into(), |v| format!("{v:.3e}")))
                .collect();
            summary.push(format!(
                "wave {} {}: {}",
                tr.kind().label(),
                name.trim_start_matches("wave_"),
                vals.join(" ")
            ));
        }
    }

    // initial displacement, true and modeled
    let z_true = dist.true_initial_state();
    let axis = uniform_grid(0.0, 1.0, wc.field_points);
    let rows = axis.iter().flat_map(|&y| {
        let (z_true, disc, x0) = (&z_true, &disc, &dist.x0);
        axis.iter().map(move |&x| {
            vec![
                fmt_num(x),
                fmt_num(y),
                fmt_num(disc.displacement(z_true, x, y)),
                fmt_num(disc.displacement(x0, x, y)),
            ]
        })
    });
    let header: Vec<String> = ["x", "y", "true", "modeled"].iter().map(|s| s.to_string()).collect();
    out.put(
        "wave_displacement.csv",
        &write_table(Vec::new(), &meta, &header, rows, &[])?,
    )?;
    Ok(summary)
}

/// Linear Duffing system (β = 0): Kalman filter, EKF and HOEKF-k, with the
/// largest deviation from the Kalman estimate and the largest `‖P_j‖_max`,
/// `j ≥ 3`, per order.
pub fn run_linear(cfg: &Config, out: &mut Outputs) -> Result<Vec<String>, CliError> {
    let orders = cfg.orders(&[2, 3, 4, 5])?;
    let l = &cfg.linear;
    let model = duffing_model(duffing_params(cfg, 0.0));
    let dist = duffing_disturbances(cfg);
    let truth = simulate_truth(&model, &dist, l.horizon, cfg.duffing.truth_points, &truth_config())?;
    let w = weights(2, 1, 1, l.gamma, l.r, l.q)?;
    let icfg = cfg.integrator.config(true);
    let mut meta = duffing_meta(cfg, 0.0);
    meta.extend([
        kv("experiment", "linear"),
        kv("orders", orders_text(&orders)),
        kv("horizon", fmt_num(l.horizon)),
        kv("q", fmt_num(l.q)),
        kv("gamma", fmt_num(l.gamma)),
        kv("r", fmt_num(l.r)),
        kv("rtol", fmt_num(icfg.rtol)),
        kv("atol", fmt_num(icfg.atol)),
    ]);
    let (x0, y) = (&dist.x0, &truth.output);
    let kf = run_kf(model.a(), model.c(), model.input_map(), &w, x0, y, l.horizon, &icfg)?;
    let ekf = run_ekf(&model, &w, x0, y, l.horizon, &icfg)?;
    let hoekf = run_orders(&orders, &model, &w, x0, y, l.horizon, &icfg, &options(cfg))?;
    let mut summary = Vec::new();
    for tr in std::iter::once(&kf).chain(std::iter::once(&ekf)).chain(&hoekf) {
        out.put(
            &format!("linear_{}.csv", tr.kind().label()),
            &trajectory_csv(tr, cfg.run.tensors, &meta)?,
        )?;
        summary.push(status_line("linear", tr));
    }

    let deviation = |tr: &ObserverTrajectory<f64>| -> Result<f64, CliError> {
        let end = tr.end().min(kf.end());
        let mut worst: f64 = 0.0;
        for t in uniform_grid(0.0, end, l.compare_points) {
            let (a, b) = (tr.x_at(t)?, kf.x_at(t)?);
            worst = a.iter().zip(&b).fold(worst, |m, (p, q)| m.max((p - q).abs()));
        }
        Ok(worst)
    };
    let max_k = orders.iter().copied().max().expect("orders are non-empty");
    let mut header = vec!["quantity".to_string()];
    header.extend(hoekf.iter().map(|tr| tr.kind().label()));
    let mut dev_row = vec!["max_deviation".to_string()];
    for tr in &hoekf {
        let dv = deviation(tr)?;
        summary.push(format!("linear {}: max deviation from kf {dv:.3e}", tr.kind().label()));
        dev_row.push(fmt_num(dv));
    }
    let mut rows = vec![dev_row];
    for j in 3..=max_k {
        let mut r = vec![format!("max_norm_P{j}")];
        r.extend(
            hoekf
                .iter()
                .map(|tr| tr.tensor_max(j).map_or_else(String::new, fmt_num)),
        );
        rows.push(r);
    }
    let mut dmeta = meta.clone();
    dmeta.push(kv("reference", "kf"));
    dmeta.push(kv("ekf_max_deviation", fmt_num(deviation(&ekf)?)));
    out.put(
        "linear_deviation.csv",
        &write_table(Vec::new(), &dmeta, &header, rows, &[])?,
    )?;
    Ok(summary)
}

/// Value, gradient norm and optionally the Hessian of the Duffing value
/// function at `(t, ξ)`, as a one-row oracle table.
pub fn probe_oracle(cfg: &Config, t: f64, xi: &[f64], q: f64, hessian: bool) -> Result<Vec<u8>, CliError> {
    let d = &cfg.duffing;
    if xi.len() != 2 {
        return Err(CliError::Config(format!("--xi needs 2 components, got {}", xi.len())));
    }
    if !(0.0..=d.horizon).contains(&t) {
        return Err(CliError::Config(format!("--t {t} outside [0, {}]", fmt_num(d.horizon))));
    }
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Config("--xi must be finite".into()));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(CliError::Config(format!("--q must be positive, got {q}")));
    }
    let model = duffing_model(duffing_params(cfg, d.beta));
    let dist = duffing_disturbances(cfg);
    let truth = simulate_truth(&model, &dist, d.horizon, d.truth_points, &truth_config())?;
    let w = weights(2, 1, 1, d.gamma, d.r, q)?;
    let oracle = Oracle::new(&model, &w, &dist.x0, &truth.output, cfg.oracle.gd_config())?;
    let sol = oracle.solve_open_loop(t, xi, None)?;
    let h = if hessian {
        Some(oracle.value_hessian(t, xi, &mut WarmStarts::new())?.hessian)
    } else {
        None
    };
    let mut meta = duffing_meta(cfg, d.beta);
    meta.extend([kv("experiment", "oracle-probe"), kv("q", fmt_num(q))]);
    Ok(write_oracle(
        Vec::new(),
        &[OracleRecord::from_solution(&sol, h)],
        &meta,
    )?)
}

/// Tensor and observer property suites.
pub fn selftest(cfg: &Config) -> Vec<CheckOutcome> {
    let mut all = tensor_suite(cfg.run.seed, cfg.run.instances);
    all.extend(observer_suite(cfg.run.seed, cfg.run.instances));
    all
}
