//! CSV export for signals, observer trajectories, oracle evaluations and
//! plain tables.
//!
//! Files start with `# key=value` metadata lines followed by a header row.
//! Numbers use the shortest representation that round-trips, switching to
//! exponent notation outside `[1e-4, 1e15)`.

use std::io::Write;

use crate::error::Result;
use crate::hoekf::{ObserverKind, ObserverTrajectory};
use crate::model::Signal;
use crate::oracle::OpenLoopSolution;
use crate::scalar::{norm2, Scalar};
use crate::tensor::Tensor;

/// Deterministic text form of a number.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if a == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn write_meta<W: Write>(w: &mut W, meta: &[(String, String)]) -> Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

/// Writes metadata, header and rows; `trailer` lines are appended as `#`
/// comments after the data.
pub fn write_table<W: Write>(
    w: W,
    meta: &[(String, String)],
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
    trailer: &[String],
) -> Result<W> {
    let mut w = w;
    write_meta(&mut w, meta)?;
    let mut csv = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    csv.write_record(header)?;
    for r in rows {
        csv.write_record(&r)?;
    }
    let mut w = csv.into_inner().map_err(|e| crate::Error::Io(e.to_string()))?;
    for line in trailer {
        writeln!(w, "# {line}")?;
    }
    w.flush()?;
    Ok(w)
}

/// `t, <prefix>_1, …, <prefix>_d`.
pub fn signal_header(prefix: &str, dim: usize) -> Vec<String> {
    std::iter::once("t".to_string())
        .chain((1..=dim).map(|i| format!("{prefix}_{i}")))
        .collect()
}

/// Columns `t, y_1, …, y_p` at the grid nodes.
pub fn write_signal<T: Scalar, W: Write>(w: W, y: &Signal<T>, meta: &[(String, String)]) -> Result<W> {
    let rows = y.grid().iter().zip(y.values()).map(|(&t, v)| {
        std::iter::once(t)
            .chain(v.iter().copied())
            .map(|x| fmt_num(x.as_f64()))
            .collect()
    });
    write_table(w, meta, &signal_header("y", y.dim()), rows, &[])
}

/// One-based multi-index names `prefix_i_j_…` in storage order.
fn block_names(prefix: &str, n: usize, order: usize) -> Vec<String> {
    let total = n.pow(order as u32);
    (0..total)
        .map(|mut lin| {
            let mut name = prefix.to_string();
            for _ in 0..order {
                name.push_str(&format!("_{}", lin % n + 1));
                lin /= n;
            }
            name
        })
        .collect()
}

/// Names of the stored components beyond `x̂`: `P2_i_j, P3_i_j_k, …` for
/// the HOEKF, `Sigma_i_j` for covariance-form filters.
fn tensor_columns(kind: ObserverKind, n: usize, stored: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut left = stored.saturating_sub(n);
    let mut j = 2;
    while left >= n.pow(j as u32) && left > 0 {
        let prefix = match kind {
            ObserverKind::Ekf | ObserverKind::Kalman => "Sigma".to_string(),
            _ => format!("P{j}"),
        };
        out.extend(block_names(&prefix, n, j));
        left -= n.pow(j as u32);
        j += 1;
    }
    out
}

/// Header of [`write_trajectory`].
pub fn trajectory_header<T: Scalar>(traj: &ObserverTrajectory<T>, tensors: bool) -> Vec<String> {
    let n = traj.state_dim();
    let mut h = signal_header("x", n);
    h.push("min_eig_proxy".into());
    if tensors {
        h.extend(tensor_columns(traj.kind(), n, traj.dense().stored_components()));
    }
    h
}

/// Columns `t, x_1..x_n, min_eig_proxy` at the accepted nodes, optionally
/// followed by the stored `vec(P_j)` blocks. A run that ended early gets a
/// trailing `# breakdown t=<value>` line.
pub fn write_trajectory<T: Scalar, W: Write>(
    w: W,
    traj: &ObserverTrajectory<T>,
    tensors: bool,
    meta: &[(String, String)],
) -> Result<W> {
    let header = trajectory_header(traj, tensors);
    let width = header.len() - 2;
    let n = traj.state_dim();
    let eig = traj.min_eig_proxy();
    let rows = traj.times().iter().enumerate().map(|(i, &t)| {
        let state = &traj.dense().states()[i];
        let mut r = vec![fmt_num(t.as_f64())];
        r.extend(state[..n].iter().map(|x| fmt_num(x.as_f64())));
        r.push(eig.get(i).map_or_else(String::new, |x| fmt_num(x.as_f64())));
        if tensors {
            r.extend(state[n..width].iter().map(|x| fmt_num(x.as_f64())));
        }
        r
    });
    let trailer: Vec<String> = traj
        .breakdown_time()
        .map(|t| format!("breakdown t={}", fmt_num(t.as_f64())))
        .into_iter()
        .collect();
    write_table(w, meta, &header, rows, &trailer)
}

/// One oracle evaluation as exported.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleRecord<T> {
    pub t: T,
    pub xi: Vec<T>,
    pub value: T,
    /// `‖∇_ξ V(t, ξ)‖₂`.
    pub grad_norm: T,
    pub hessian: Option<Tensor<T>>,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Scalar> OracleRecord<T> {
    pub fn from_solution(sol: &OpenLoopSolution<T>, hessian: Option<Tensor<T>>) -> Self {
        Self {
            t: sol.t,
            xi: sol.xi.clone(),
            value: sol.value,
            grad_norm: norm2(sol.gradient()),
            hessian,
            iterations: sol.iterations,
            converged: sol.converged,
        }
    }
}

/// `t, xi_1..xi_n, value, grad_norm, H_i_j…, iterations, converged`.
pub fn oracle_header(n: usize) -> Vec<String> {
    let mut h = signal_header("xi", n);
    h.push("value".into());
    h.push("grad_norm".into());
    h.extend(block_names("H", n, 2));
    h.push("iterations".into());
    h.push("converged".into());
    h
}

/// Oracle evaluations; Hessian cells stay empty when not computed.
pub fn write_oracle<T: Scalar, W: Write>(w: W, records: &[OracleRecord<T>], meta: &[(String, String)]) -> Result<W> {
    let n = records.first().map_or(0, |r| r.xi.len());
    let rows = records.iter().map(|r| {
        let mut row = vec![fmt_num(r.t.as_f64())];
        row.extend(r.xi.iter().map(|x| fmt_num(x.as_f64())));
        row.push(fmt_num(r.value.as_f64()));
        row.push(fmt_num(r.grad_norm.as_f64()));
        match &r.hessian {
            Some(h) => row.extend(h.as_slice().iter().map(|x| fmt_num(x.as_f64()))),
            None => row.extend(std::iter::repeat_n(String::new(), n * n)),
        }
        row.push(r.iterations.to_string());
        row.push(r.converged.to_string());
        row
    });
    write_table(w, meta, &oracle_header(n), rows, &[])
}
