//! Sine-basis Galerkin truncation of the defocusing cubic wave equation on
//! the unit square.

use super::{DisturbanceSpec, Monomial, PolynomialModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Form of the cubic term in the transformed coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WaveNonlinearity {
    /// `ż₂ ∋ −M^{-1/2} g(S^{-1/2} z₁)`.
    #[default]
    Derived,
    /// `ż₂ ∋ +M^{-1/2} g(M^{-1/2} z₁)`: mass scaling inside, positive sign.
    MassScaled,
    /// Linear wave equation.
    Off,
}

/// Matrices and basis data of the truncated system.
#[derive(Clone, Debug)]
pub struct WaveDiscretization<T> {
    pub k: usize,
    /// Basis index pairs `(i, j)` with `i + j ≤ K`, `i` ascending then `j`.
    pub basis: Vec<(usize, usize)>,
    /// Diagonal of the mass matrix.
    pub mass: Vec<T>,
    /// Diagonal of the stiffness matrix.
    pub stiffness: Vec<T>,
    /// `diag(S^{1/2}, M^{1/2})`.
    pub ttrafo: Tensor<T>,
    pub a: Tensor<T>,
    pub b: Tensor<T>,
    pub c: Tensor<T>,
    pub c_tilde1: Tensor<T>,
    /// Quadruple integrals `∫ φ_a φ_b φ_c φ_d`.
    pub t4: Tensor<T>,
    pub sensors: Vec<(T, T)>,
    pub ell: T,
}

impl<T: Scalar> WaveDiscretization<T> {
    pub fn basis_count(&self) -> usize {
        self.basis.len()
    }

    pub fn state_dim(&self) -> usize {
        2 * self.basis.len()
    }

    pub fn mass_matrix(&self) -> Tensor<T> {
        Tensor::diag(&self.mass)
    }

    pub fn stiffness_matrix(&self) -> Tensor<T> {
        Tensor::diag(&self.stiffness)
    }

    /// Maps basis coordinates `(w₁, w₂)` to model coordinates `𝒯 (w₁, w₂)`.
    pub fn to_model_coordinates(&self, w1: &[T], w2: &[T]) -> Vec<T> {
        let nb = self.basis.len();
        (0..nb)
            .map(|i| self.stiffness[i].sqrt() * w1.get(i).copied().unwrap_or_else(T::zero))
            .chain((0..nb).map(|i| self.mass[i].sqrt() * w2.get(i).copied().unwrap_or_else(T::zero)))
            .collect()
    }

    /// Displacement `w₁(x, y)` represented by the model state `z`.
    pub fn displacement(&self, z: &[T], x: T, y: T) -> T {
        let pi = T::of(std::f64::consts::PI);
        self.basis
            .iter()
            .enumerate()
            .map(|(q, &(i, j))| {
                z[q] / self.stiffness[q].sqrt() * (pi * T::of_usize(i) * x).sin() * (pi * T::of_usize(j) * y).sin()
            })
            .sum()
    }

    /// Coordinates of a function given as `Σ c_{ij} φ_{ij}`; pairs outside
    /// the truncated basis are dropped.
    pub fn coefficients(&self, terms: &[((usize, usize), T)]) -> Vec<T> {
        self.basis
            .iter()
            .map(|b| terms.iter().filter(|(ij, _)| ij == b).map(|(_, c)| *c).sum())
            .collect()
    }
}

/// `∫₀¹ Π_r sin(π a_r x) dx` for four positive integer frequencies.
///
/// Expanding every sine into exponentials leaves `(1/16) Σ_s (Π s)` over
/// the sign vectors whose frequencies cancel.
pub(crate) fn sine_quadruple(a: [usize; 4]) -> f64 {
    let mut acc = 0i64;
    for mask in 0..16u32 {
        let mut k = 0i64;
        let mut sign = 1i64;
        for (r, &ar) in a.iter().enumerate() {
            if mask & (1 << r) != 0 {
                k -= ar as i64;
                sign = -sign;
            } else {
                k += ar as i64;
            }
        }
        if k == 0 {
            acc += sign;
        }
    }
    acc as f64 / 16.0
}

fn sine_interval<T: Scalar>(a: usize, center: T, ell: T) -> T {
    let w = T::of(std::f64::consts::PI) * T::of_usize(a);
    ((w * (center - ell)).cos() - (w * (center + ell)).cos()) / w
}

/// `per_side²` centers on the interior grid `(i/(per_side+1), j/(per_side+1))`.
pub fn equidistant_sensors<T: Scalar>(per_side: usize) -> Vec<(T, T)> {
    let h = T::one() / T::of_usize(per_side + 1);
    let mut out = Vec::with_capacity(per_side * per_side);
    for i in 1..=per_side {
        for j in 1..=per_side {
            out.push((h * T::of_usize(i), h * T::of_usize(j)));
        }
    }
    out
}

/// Assembles the transformed semi-discrete system of dimension `2N`,
/// `N = K(K−1)/2`, with square-averaging sensors of half-width `ell`.
pub fn wave_model<T: Scalar>(
    k: usize,
    sensors: &[(T, T)],
    ell: T,
    nonlinearity: WaveNonlinearity,
) -> Result<(PolynomialModel<T>, WaveDiscretization<T>)> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("truncation K = {k} must be at least 2")));
    }
    if !(ell > T::zero()) {
        return Err(Error::InvalidArgument("sensor half-width must be positive".into()));
    }
    for &(x, y) in sensors {
        if !(x - ell > T::zero() && x + ell < T::one() && y - ell > T::zero() && y + ell < T::one()) {
            return Err(Error::InvalidArgument(format!(
                "sensor square around ({x}, {y}) leaves the unit square"
            )));
        }
    }
    let basis: Vec<(usize, usize)> = (1..k).flat_map(|i| (1..=k - i).map(move |j| (i, j))).collect();
    let nb = basis.len();
    let n = 2 * nb;
    let quarter = T::of(0.25);
    let pi2 = T::of(std::f64::consts::PI * std::f64::consts::PI);
    let mass = vec![quarter; nb];
    let stiffness: Vec<T> = basis
        .iter()
        .map(|&(i, j)| pi2 * T::of_usize(i * i + j * j) * quarter)
        .collect();

    let mut ttrafo = Tensor::zeros(&[n, n]);
    let mut a = Tensor::zeros(&[n, n]);
    let mut b = Tensor::zeros(&[n, nb]);
    for q in 0..nb {
        ttrafo.set(&[q, q], stiffness[q].sqrt());
        ttrafo.set(&[nb + q, nb + q], mass[q].sqrt());
        let w = stiffness[q].sqrt() / mass[q].sqrt();
        a.set(&[q, nb + q], w);
        a.set(&[nb + q, q], -w);
        b.set(&[nb + q, q], T::one());
    }

    let p = sensors.len();
    let mut c_tilde1 = Tensor::zeros(&[p, nb]);
    let mut c = Tensor::zeros(&[p, n]);
    let scale = T::one() / (T::of(4.0) * ell * ell);
    for (s, &(x, y)) in sensors.iter().enumerate() {
        for (q, &(i, j)) in basis.iter().enumerate() {
            let v = scale * sine_interval(i, x, ell) * sine_interval(j, y, ell);
            c_tilde1.set(&[s, q], v);
            c.set(&[s, q], v / stiffness[q].sqrt());
        }
    }

    let mut t4 = Tensor::zeros(&[nb; 4]);
    crate::tensor::for_each_index(&[nb; 4], |idx| {
        let xi = [basis[idx[0]].0, basis[idx[1]].0, basis[idx[2]].0, basis[idx[3]].0];
        let yi = [basis[idx[0]].1, basis[idx[1]].1, basis[idx[2]].1, basis[idx[3]].1];
        let v = sine_quadruple(xi) * sine_quadruple(yi);
        if v != 0.0 {
            t4.set(idx, T::of(v));
        }
    });

    let mut terms = Vec::new();
    if nonlinearity != WaveNonlinearity::Off {
        let (sign, arg_scale): (T, &[T]) = match nonlinearity {
            WaveNonlinearity::Derived => (-T::one(), &stiffness),
            _ => (T::one(), &mass),
        };
        for i in 0..nb {
            for a1 in 0..nb {
                for a2 in a1..nb {
                    for a3 in a2..nb {
                        let v = t4.get(&[i, a1, a2, a3]);
                        if v == T::zero() {
                            continue;
                        }
                        let mult = if a1 == a3 {
                            1
                        } else if a1 == a2 || a2 == a3 {
                            3
                        } else {
                            6
                        };
                        let coeff = sign * T::of_usize(mult) * v
                            / (mass[i].sqrt() * arg_scale[a1].sqrt() * arg_scale[a2].sqrt() * arg_scale[a3].sqrt());
                        terms.push(Monomial::new(nb + i, coeff, vec![a1, a2, a3]));
                    }
                }
            }
        }
    }
    let model = PolynomialModel::new(a.clone(), c.clone(), b.clone(), terms, Vec::new())?;
    let disc = WaveDiscretization {
        k,
        basis,
        mass,
        stiffness,
        ttrafo,
        a,
        b,
        c,
        c_tilde1,
        t4,
        sensors: sensors.to_vec(),
        ell,
    };
    Ok((model, disc))
}

/// Modeled initial displacement `8φ₁₁ + 4φ₁₂ + 2φ₁₃ + 2φ₂₁ + φ₃₁`, offset
/// `η = −φ₁₁`, process disturbance `0.1|sin(πt/2)| φ₁₂` and sensor noise
/// `μ_k = (−2 + 4(k−1)/(p−1)) sin(5πt)/20`, all in model coordinates.
pub fn wave_disturbances<T: Scalar>(disc: &WaveDiscretization<T>) -> DisturbanceSpec<T> {
    let o = |v: f64| T::of(v);
    let w0 = disc.coefficients(&[
        ((1, 1), o(8.0)),
        ((1, 2), o(4.0)),
        ((1, 3), o(2.0)),
        ((2, 1), o(2.0)),
        ((3, 1), o(1.0)),
    ]);
    let eta1 = disc.coefficients(&[((1, 1), o(-1.0))]);
    let v_dir = disc.coefficients(&[((1, 2), o(1.0))]);
    let x0 = disc.to_model_coordinates(&w0, &[]);
    let eta = disc.to_model_coordinates(&eta1, &[]);
    let p = disc.sensors.len();
    let denom = T::of_usize(p.max(2) - 1);
    let amps: Vec<T> = (0..p)
        .map(|k| (o(-2.0) + o(4.0) * T::of_usize(k) / denom) / o(20.0))
        .collect();
    let pi = o(std::f64::consts::PI);
    DisturbanceSpec::new(
        x0,
        eta,
        move |t: T| {
            let s = o(0.1) * (pi * t / o(2.0)).sin().abs();
            v_dir.iter().map(|&d| d * s).collect()
        },
        move |t: T| {
            let s = (o(5.0) * pi * t).sin();
            amps.iter().map(|&a| a * s).collect()
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemModel;

    fn default_wave() -> (PolynomialModel<f64>, WaveDiscretization<f64>) {
        wave_model(4, &equidistant_sensors(4), 0.01, WaveNonlinearity::Derived).unwrap()
    }

    #[test]
    fn dimensions_and_mass() {
        let (m, d) = default_wave();
        assert_eq!(d.basis, vec![(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1)]);
        assert_eq!(m.state_dim(), 12);
        assert_eq!(m.disturbance_dim(), 6);
        assert_eq!(m.output_dim(), 16);
        assert!(d.mass.iter().all(|&v| v == 0.25));
        let skew = d.a.add(&d.a.transpose().unwrap()).unwrap();
        assert!(skew.is_zero());
        assert_eq!(d.sensors[5], (0.4, 0.4));
    }

    #[test]
    fn quadruple_integrals() {
        assert_eq!(sine_quadruple([1, 1, 1, 1]), 3.0 / 8.0);
        let (_, d) = default_wave();
        assert_eq!(d.t4.get(&[0, 0, 0, 0]), 9.0 / 64.0);
        // ∫ sin²(πx) sin²(2πx) = 1/4
        assert_eq!(sine_quadruple([1, 1, 2, 2]), 0.25);
        assert_eq!(sine_quadruple([1, 1, 1, 2]), 0.0);
    }

    #[test]
    fn sensor_rows_average_basis_functions() {
        let (_, d) = default_wave();
        // a tiny square averages to nearly the point value
        for (s, &(x, y)) in d.sensors.iter().enumerate() {
            for (q, &(i, j)) in d.basis.iter().enumerate() {
                let point = (std::f64::consts::PI * i as f64 * x).sin() * (std::f64::consts::PI * j as f64 * y).sin();
                assert!((d.c_tilde1.at(s, q) - point).abs() < 2e-3);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(wave_model(1, &equidistant_sensors::<f64>(2), 0.01, WaveNonlinearity::Derived).is_err());
        assert!(wave_model(3, &[(0.005, 0.5)], 0.01, WaveNonlinearity::Derived).is_err());
        assert!(wave_model(3, &[(0.5, 0.5)], 0.0, WaveNonlinearity::Derived).is_err());
    }

    #[test]
    fn initial_data_in_model_coordinates() {
        let (_, d) = default_wave();
        let dist = wave_disturbances(&d);
        let s = &d.stiffness;
        let expect = [8.0, 4.0, 2.0, 2.0, 0.0, 1.0];
        for q in 0..6 {
            assert!((dist.x0[q] - expect[q] * s[q].sqrt()).abs() < 1e-12);
            assert_eq!(dist.x0[6 + q], 0.0);
        }
        assert!((dist.eta[0] + s[0].sqrt()).abs() < 1e-12);
        assert!((d.displacement(&dist.x0, 0.5, 0.5) - (8.0 - 2.0 - 1.0)).abs() < 1e-12);
        let mu = (dist.mu)(0.1);
        assert!((mu[0] + 0.1).abs() < 1e-12 && (mu[15] - 0.1).abs() < 1e-12);
        assert_eq!((dist.v)(1.0)[1], 0.1 * (std::f64::consts::FRAC_PI_2).sin());
    }

    #[test]
    fn nonlinearity_variants() {
        let sensors = equidistant_sensors(2);
        let (d, _) = wave_model(3, &sensors, 0.01, WaveNonlinearity::Derived).unwrap();
        let (v, _) = wave_model(3, &sensors, 0.01, WaveNonlinearity::MassScaled).unwrap();
        let (o, _) = wave_model(3, &sensors, 0.01, WaveNonlinearity::Off).unwrap();
        let z = [0.3, -0.2, 0.1, 0.5, -0.4, 0.2];
        let fo = o.f(&z);
        let fd = d.f(&z);
        let fv = v.f(&z);
        // derived cubic term points against the displacement for a single mode
        let single = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(d.f(&single)[3] < o.f(&single)[3]);
        assert!(v.f(&single)[3] > o.f(&single)[3]);
        assert_ne!(fd, fo);
        assert_ne!(fv, fo);
        assert_eq!(o.f_degree(), Some(1));
        assert_eq!(d.f_degree(), Some(3));
    }
}
