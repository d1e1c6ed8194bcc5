//! Experiment configuration: flat `section.name = value` keys parsed as TOML.
//!
//! Every key is optional; missing keys take the values of the Duffing and
//! wave experiments in the reference setup. Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

use crate::CliError;

/// Orders whose tensors `P_j` fit the memory of the wave experiment (n = 12).
pub const WAVE_MAX_ORDER: usize = 5;
pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 8;

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub run: RunSection,
    pub duffing: DuffingSection,
    pub wave: WaveSection,
    pub linear: LinearSection,
    pub integrator: IntegratorSection,
    pub oracle: OracleSection,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Observer orders; each experiment has its own default when absent.
    pub orders: Option<Vec<usize>>,
    /// Write the stored `vec(P_j)` blocks into trajectory CSVs.
    pub tensors: bool,
    /// Run the Mortensen reference in the Duffing experiment.
    pub with_oracle: bool,
    /// Seed of the randomized property suites.
    pub seed: u64,
    /// Random instances per property check.
    pub instances: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            orders: None,
            tensors: false,
            with_oracle: false,
            seed: 1,
            instances: 200,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DuffingSection {
    pub lambda: f64,
    pub beta: f64,
    pub delta: f64,
    pub x0: Vec<f64>,
    pub eta: Vec<f64>,
    /// `v(t) = v_amplitude · cos(v_frequency · t)`.
    pub v_amplitude: f64,
    pub v_frequency: f64,
    /// `μ(t) = mu_amplitude · sin(mu_frequency · t)`.
    pub mu_amplitude: f64,
    pub mu_frequency: f64,
    pub horizon: f64,
    pub truth_points: usize,
    /// Output weights; one run per value.
    pub q: Vec<f64>,
    /// `Γ = gamma · I`.
    pub gamma: f64,
    /// `R = r · I`.
    pub r: f64,
    pub mortensen_horizon: f64,
    pub mortensen_steps: usize,
    /// Nodes of the relative-distance grid over the Mortensen horizon.
    pub distance_points: usize,
    /// Nodes of the plotted trajectories.
    pub plot_points: usize,
}

impl Default for DuffingSection {
    fn default() -> Self {
        Self {
            lambda: -1.0,
            beta: 1.0,
            delta: 0.3,
            x0: vec![0.0, 0.0],
            eta: vec![-1.216, 0.493],
            v_amplitude: 0.5,
            v_frequency: 1.2,
            mu_amplitude: 0.05,
            mu_frequency: 2.0 * std::f64::consts::PI,
            horizon: 10.0,
            truth_points: 10_001,
            q: vec![0.5, 2.0],
            gamma: 1.0,
            r: 1.0,
            mortensen_horizon: 6.0,
            mortensen_steps: 600,
            distance_points: 601,
            plot_points: 1001,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Nonlinearity {
    #[default]
    Derived,
    MassScaled,
    Off,
}

impl Nonlinearity {
    pub fn name(&self) -> &'static str {
        match self {
            Nonlinearity::Derived => "derived",
            Nonlinearity::MassScaled => "mass-scaled",
            Nonlinearity::Off => "off",
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct WaveSection {
    /// Galerkin truncation: basis `φ_ij` with `i + j ≤ truncation`.
    pub truncation: usize,
    pub sensors_per_side: usize,
    /// Half-width of the square sensor footprint.
    pub ell: f64,
    pub nonlinearity: Nonlinearity,
    pub horizon: f64,
    pub truth_points: usize,
    pub sample_times: Vec<f64>,
    pub gamma: f64,
    pub r: f64,
    pub q: f64,
    /// Grid points per side of the displacement-field dump.
    pub field_points: usize,
}

impl Default for WaveSection {
    fn default() -> Self {
        Self {
            truncation: 4,
            sensors_per_side: 4,
            ell: 0.01,
            nonlinearity: Nonlinearity::Derived,
            horizon: 2.0,
            truth_points: 2001,
            sample_times: vec![0.5, 1.0, 1.5, 2.0],
            gamma: 1.0,
            r: 1.0,
            q: 1.0,
            field_points: 41,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LinearSection {
    pub horizon: f64,
    pub q: f64,
    pub gamma: f64,
    pub r: f64,
    /// Nodes on which deviations are measured.
    pub compare_points: usize,
}

impl Default for LinearSection {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            q: 2.0,
            gamma: 1.0,
            r: 1.0,
            compare_points: 2001,
        }
    }
}

/// Tolerances of the adaptive integrator. Absent values fall back to
/// 1e-6/1e-8, or 1e-10/1e-12 for the linear comparison.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_steps: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub rel_tol: f64,
    pub fine_rel_tol: f64,
    pub abs_tol: f64,
    pub max_iters: usize,
    pub inner_grid_points: usize,
    pub fd_step: f64,
    pub first_step: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        let d = hoekf_core::oracle::GdConfig::<f64>::default();
        Self {
            rel_tol: d.rel_tol,
            fine_rel_tol: d.fine_rel_tol,
            abs_tol: d.abs_tol,
            max_iters: d.max_iters,
            inner_grid_points: d.inner_grid_points,
            fd_step: d.fd_step,
            first_step: d.first_step,
        }
    }
}

impl OracleSection {
    pub fn gd_config(&self) -> hoekf_core::oracle::GdConfig<f64> {
        hoekf_core::oracle::GdConfig {
            rel_tol: self.rel_tol,
            fine_rel_tol: self.fine_rel_tol,
            abs_tol: self.abs_tol,
            max_iters: self.max_iters,
            inner_grid_points: self.inner_grid_points,
            fd_step: self.fd_step,
            first_step: self.first_step,
        }
    }
}

impl IntegratorSection {
    pub fn config(&self, tight: bool) -> hoekf_core::ode::IntegratorConfig<f64> {
        let (rtol, atol) = if tight { (1e-10, 1e-12) } else { (1e-6, 1e-8) };
        let mut c =
            hoekf_core::ode::IntegratorConfig::with_tolerances(self.rtol.unwrap_or(rtol), self.atol.unwrap_or(atol));
        if let Some(m) = self.max_steps {
            c.max_steps = m;
        }
        c
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive and finite, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<(), CliError> {
    if v >= min {
        Ok(())
    } else {
        Err(bad(format!("{name} must be at least {min}, got {v}")))
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Config = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Orders for an experiment, checked against `{2, …, 8}`.
    pub fn orders(&self, default: &[usize]) -> Result<Vec<usize>, CliError> {
        let orders = self.run.orders.clone().unwrap_or_else(|| default.to_vec());
        check_orders(&orders)?;
        Ok(orders)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(o) = &self.run.orders {
            check_orders(o)?;
        }
        at_least("run.instances", self.run.instances, 1)?;
        let d = &self.duffing;
        for (name, v) in [("duffing.x0", &d.x0), ("duffing.eta", &d.eta)] {
            if v.len() != 2 {
                return Err(bad(format!("{name} needs 2 components, got {}", v.len())));
            }
        }
        let finite = [
            d.lambda,
            d.beta,
            d.delta,
            d.v_amplitude,
            d.v_frequency,
            d.mu_amplitude,
            d.mu_frequency,
        ];
        if finite.iter().chain(&d.x0).chain(&d.eta).any(|v| !v.is_finite()) {
            return Err(bad("duffing parameters must be finite"));
        }
        positive("duffing.horizon", d.horizon)?;
        positive("duffing.gamma", d.gamma)?;
        positive("duffing.r", d.r)?;
        if d.q.is_empty() {
            return Err(bad("duffing.q needs at least one value"));
        }
        for &q in &d.q {
            positive("duffing.q", q)?;
        }
        at_least("duffing.truth_points", d.truth_points, 2)?;
        positive("duffing.mortensen_horizon", d.mortensen_horizon)?;
        if self.run.with_oracle && d.mortensen_horizon > d.horizon {
            return Err(bad("duffing.mortensen_horizon exceeds duffing.horizon"));
        }
        at_least("duffing.mortensen_steps", d.mortensen_steps, 1)?;
        at_least("duffing.distance_points", d.distance_points, 2)?;
        at_least("duffing.plot_points", d.plot_points, 2)?;

        let w = &self.wave;
        at_least("wave.truncation", w.truncation, 2)?;
        at_least("wave.sensors_per_side", w.sensors_per_side, 1)?;
        positive("wave.ell", w.ell)?;
        if 2.0 * w.ell >= 1.0 / (w.sensors_per_side as f64 + 1.0) {
            return Err(bad("wave.ell: neighbouring sensor squares overlap"));
        }
        positive("wave.horizon", w.horizon)?;
        at_least("wave.truth_points", w.truth_points, 2)?;
        for &t in &w.sample_times {
            if !(0.0..=w.horizon).contains(&t) {
                return Err(bad(format!("wave.sample_times: {t} outside [0, {}]", w.horizon)));
            }
        }
        positive("wave.gamma", w.gamma)?;
        positive("wave.r", w.r)?;
        positive("wave.q", w.q)?;
        at_least("wave.field_points", w.field_points, 2)?;

        let l = &self.linear;
        positive("linear.horizon", l.horizon)?;
        positive("linear.q", l.q)?;
        positive("linear.gamma", l.gamma)?;
        positive("linear.r", l.r)?;
        at_least("linear.compare_points", l.compare_points, 2)?;

        if let Some(v) = self.integrator.rtol {
            positive("integrator.rtol", v)?;
        }
        if let Some(v) = self.integrator.atol {
            positive("integrator.atol", v)?;
        }
        self.oracle
            .gd_config()
            .validate()
            .map_err(|e| bad(format!("oracle: {e}")))?;
        Ok(())
    }
}

pub fn check_orders(orders: &[usize]) -> Result<(), CliError> {
    if orders.is_empty() {
        return Err(bad("at least one order is required"));
    }
    if let Some(&k) = orders.iter().find(|&&k| !(MIN_ORDER..=MAX_ORDER).contains(&k)) {
        return Err(bad(format!("order {k} outside {{{MIN_ORDER}, …, {MAX_ORDER}}}")));
    }
    Ok(())
}

/// Parses `2,3,5` into orders.
pub fn parse_orders(s: &str) -> Result<Vec<usize>, CliError> {
    let orders = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| bad(format!("invalid order {p:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    check_orders(&orders)?;
    Ok(orders)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_reference_setup() {
        let c = Config::parse("").unwrap();
        assert_eq!(c.duffing.eta, vec![-1.216, 0.493]);
        assert_eq!(c.duffing.q, vec![0.5, 2.0]);
        assert_eq!(c.wave.truncation, 4);
        assert_eq!(c.wave.sample_times, vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(c.orders(&[2, 3]).unwrap(), vec![2, 3]);
    }

    #[test]
    fn flat_keys() {
        let c =
            Config::parse("run.orders = [2, 4]\nduffing.beta = 0.0\nwave.nonlinearity = \"mass-scaled\"\n").unwrap();
        assert_eq!(c.run.orders, Some(vec![2, 4]));
        assert_eq!(c.duffing.beta, 0.0);
        assert_eq!(c.wave.nonlinearity, Nonlinearity::MassScaled);
    }

    #[test]
    fn rejections() {
        for text in [
            "duffing.betta = 1.0",
            "run.orders = [1, 2]",
            "run.orders = [9]",
            "duffing.eta = [1.0]",
            "duffing.q = [0.0]",
            "integrator.rtol = -1.0",
            "wave.sample_times = [3.0]",
            "oracle.inner_grid_points = 1",
            "nonsense",
        ] {
            assert!(matches!(Config::parse(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn documented_schema_lists_the_defaults() {
        let readme = include_str!("../../../README.md");
        let block = readme.split("```toml\n").nth(1).unwrap().split("```").next().unwrap();
        let mut c = Config::parse(block).unwrap();
        assert_eq!(c.run.orders.take(), Some(vec![2, 3, 4]));
        assert_eq!(c.integrator.rtol.take(), Some(1e-6));
        assert_eq!(c.integrator.atol.take(), Some(1e-8));
        assert_eq!(c.integrator.max_steps.take(), Some(500_000));
        assert_eq!(c, Config::default());
    }

    #[test]
    fn order_lists() {
        assert_eq!(parse_orders("2, 3,8").unwrap(), vec![2, 3, 8]);
        assert!(parse_orders("2,x").is_err());
        assert!(parse_orders("2,9").is_err());
    }
}
