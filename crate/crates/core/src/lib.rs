//! Higher-order extended Kalman filtering for polynomial-type systems.
//!
//! The crate is generic over the scalar type through [`Scalar`]; the
//! aliases below fix it to `f64` or `f32`.
//!
//! ```
//! use hoekf_core::hoekf::{run_hoekf, HoekfOptions};
//! use hoekf_core::model::{duffing_disturbances, duffing_model, simulate_truth, truth_config, DuffingParams, Weights};
//! use hoekf_core::ode::IntegratorConfig;
//!
//! let model = duffing_model(DuffingParams::<f64>::standard());
//! let dist = duffing_disturbances();
//! let truth = simulate_truth(&model, &dist, 10.0, 10_001, &truth_config())?;
//! let w = Weights::scaled_output(2, 1, 1, 2.0)?;
//! let cfg = IntegratorConfig::default();
//! let traj = run_hoekf(4, &model, &w, &dist.x0, &truth.output, 10.0, &cfg, &HoekfOptions::default())?;
//! assert!(traj.completed());
//! println!("{:?}", traj.x_at(5.0)?);
//! # Ok::<(), hoekf_core::Error>(())
//! ```

// `!(x > 0)` rejects NaN on purpose; index loops mirror the tensor formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod checks;
pub mod error;
pub mod hoekf;
pub mod io;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tensor::{Permutation, Tensor};

pub type Tensor64 = Tensor<f64>;
pub type Tensor32 = Tensor<f32>;
