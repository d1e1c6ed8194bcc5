use super::{linear_model, DisturbanceSpec, Monomial, PolynomialModel};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Parameters of `ẍ = −δẋ − λx − βx³ + v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DuffingParams<T> {
    pub lambda: T,
    pub beta: T,
    pub delta: T,
}

impl<T: Scalar> DuffingParams<T> {
    /// λ = −1, β = 1, δ = 0.3.
    pub fn standard() -> Self {
        Self {
            lambda: T::of(-1.0),
            beta: T::one(),
            delta: T::of(0.3),
        }
    }
}

/// Duffing oscillator with `G = (0, 1)ᵀ` and position output `C = (1, 0)`.
pub fn duffing_model<T: Scalar>(params: DuffingParams<T>) -> PolynomialModel<T> {
    let z = T::zero();
    let a = Tensor::from_rows(&[&[z, T::one()], &[-params.lambda, -params.delta]]).expect("2×2 literal");
    let c = Tensor::from_rows(&[&[T::one(), z]]).expect("1×2 literal");
    let g = Tensor::from_rows(&[&[z], &[T::one()]]).expect("2×1 literal");
    if params.beta == z {
        return linear_model(a, c, g).expect("consistent dimensions");
    }
    let cubic = Monomial::new(1, -params.beta, vec![0, 0, 0]);
    PolynomialModel::new(a, c, g, vec![cubic], Vec::new()).expect("consistent dimensions")
}

/// x₀ = 0, η = (−1.216, 0.493), v = ½cos(1.2t), μ = sin(2πt)/20.
pub fn duffing_disturbances<T: Scalar>() -> DisturbanceSpec<T> {
    DisturbanceSpec::new(
        vec![T::zero(), T::zero()],
        vec![T::of(-1.216), T::of(0.493)],
        |t: T| vec![T::of(0.5) * (T::of(1.2) * t).cos()],
        |t: T| vec![(T::of(2.0 * std::f64::consts::PI) * t).sin() / T::of(20.0)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemModel;

    #[test]
    fn standard_values() {
        let m = duffing_model(DuffingParams::<f64>::standard());
        assert_eq!(m.a(), &Tensor::from_rows(&[&[0.0, 1.0], &[1.0, -0.3]]).unwrap());
        assert_eq!(m.f(&[2.0, 0.0]), vec![0.0, -6.0]);
        let x = [1.0, 0.7];
        assert_eq!(m.f_derivative(2, &x).unwrap().get(&[1, 0, 0]), -6.0);
        let d3 = m.f_derivative(3, &x).unwrap();
        assert_eq!(d3.get(&[1, 0, 0, 0]), -6.0);
        assert_eq!(d3.as_slice().iter().filter(|v| **v != 0.0).count(), 1);
        assert!(m.f_vanishes(4));
        let j = m.f_derivative(1, &[2.0, 0.0]).unwrap();
        assert_eq!(j.at(1, 0), 1.0 - 12.0);
    }
}
