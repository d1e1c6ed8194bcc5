use super::ObserverTrajectory;
use crate::error::Result;
use crate::scalar::{norm2, Scalar};

/// `d(t) = ‖x̂(t) − x̂_ref(t)‖ / ‖x̂_ref(t)‖` at the grid nodes inside the
/// common span of both trajectories.
///
/// Nodes where the reference estimate vanishes yield `None`.
pub fn relative_distance<T: Scalar>(
    traj: &ObserverTrajectory<T>,
    reference: &ObserverTrajectory<T>,
    grid: &[T],
) -> Result<Vec<(T, Option<T>)>> {
    let start = traj.times()[0].max(reference.times()[0]);
    let end = traj.end().min(reference.end());
    let mut out = Vec::new();
    for &t in grid.iter().filter(|&&t| t >= start && t <= end) {
        let x = traj.x_at(t)?;
        let r = reference.x_at(t)?;
        let denom = norm2(&r);
        let diff: Vec<T> = x.iter().zip(&r).map(|(&a, &b)| a - b).collect();
        let d = (denom > T::zero()).then(|| norm2(&diff) / denom);
        out.push((t, d));
    }
    Ok(out)
}
