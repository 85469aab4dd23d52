use super::ss::StateSpaceModel;
use crate::{Complex, Error, Result};
use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

/// Rational SISO transfer function, coefficients in descending powers of s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferFunction {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl TransferFunction {
    /// Builds `num(s)/den(s)`. Leading zeros are stripped. Allows one excess
    /// numerator degree so lead factors can be formed before taming.
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if num.iter().chain(den.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let num = strip_leading_zeros(num);
        let den = strip_leading_zeros(den);
        if den.is_empty() {
            return Err(Error::InvalidModel("denominator is identically zero".into()));
        }
        let num = if num.is_empty() { vec![0.0] } else { num };
        if num.len() > den.len() + 1 {
            return Err(Error::Improper {
                num: num.len() - 1,
                den: den.len() - 1,
            });
        }
        Ok(Self { num, den })
    }

    pub fn constant(k: f64) -> Self {
        Self {
            num: vec![k],
            den: vec![1.0],
        }
    }

    /// `1/s`
    pub fn integrator() -> Self {
        Self {
            num: vec![1.0],
            den: vec![1.0, 0.0],
        }
    }

    /// `1/(m s^2)`
    pub fn mass(m: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![m, 0.0, 0.0])
    }

    /// PI factor `1 + w_i/s`.
    pub fn pi(omega_i: f64) -> Result<Self> {
        Self::new(vec![1.0, omega_i], vec![1.0, 0.0])
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    pub fn num_degree(&self) -> usize {
        self.num.len() - 1
    }

    pub fn den_degree(&self) -> usize {
        self.den.len() - 1
    }

    pub fn is_proper(&self) -> bool {
        self.num_degree() <= self.den_degree()
    }

    pub fn eval(&self, s: Complex<f64>) -> Complex<f64> {
        polyval(&self.num, s) / polyval(&self.den, s)
    }

    pub fn freq_response(&self, omega: f64) -> Result<Complex<f64>> {
        let s = Complex::new(0.0, omega);
        let d = polyval(&self.den, s);
        let scale =
            self.den.iter().map(|c| c.abs()).fold(0.0, f64::max) * (1.0 + omega.abs()).powi(self.den_degree() as i32);
        if d.norm() <= 1e-14 * scale {
            return Err(Error::SingularResolvent { omega });
        }
        Ok(polyval(&self.num, s) / d)
    }

    /// Cascade `self` then `other`; the response is the product.
    pub fn series(&self, other: &TransferFunction) -> TransferFunction {
        TransferFunction {
            num: polymul(&self.num, &other.num),
            den: polymul(&self.den, &other.den),
        }
    }

    /// Controllable canonical realization.
    pub fn to_ss(&self) -> Result<StateSpaceModel> {
        if !self.is_proper() {
            return Err(Error::Improper {
                num: self.num_degree(),
                den: self.den_degree(),
            });
        }
        let lead = self.den[0];
        let den: Vec<f64> = self.den.iter().map(|c| c / lead).collect();
        let n = den.len() - 1;
        let mut num = vec![0.0; n + 1 - self.num.len()];
        num.extend(self.num.iter().map(|c| c / lead));
        let d = num[0];
        if n == 0 {
            return Ok(StateSpaceModel::static_gain(d));
        }
        let mut a = DMatrix::zeros(n, n);
        for j in 0..n {
            a[(0, j)] = -den[j + 1];
        }
        for i in 1..n {
            a[(i, i - 1)] = 1.0;
        }
        let mut b = DVector::zeros(n);
        b[0] = 1.0;
        let c = RowDVector::from_iterator(n, (1..=n).map(|i| num[i] - d * den[i]));
        StateSpaceModel::new(a, b, c, d)
    }
}

fn strip_leading_zeros(mut p: Vec<f64>) -> Vec<f64> {
    let first = p.iter().position(|c| *c != 0.0).unwrap_or(p.len());
    p.drain(..first);
    p
}

pub(crate) fn polyval(p: &[f64], s: Complex<f64>) -> Complex<f64> {
    p.iter().fold(Complex::new(0.0, 0.0), |acc, c| acc * s + c)
}

pub(crate) fn polymul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_order_realization() {
        let tf = TransferFunction::new(vec![1.0], vec![1.0, 1.0]).unwrap();
        let ss = tf.to_ss().unwrap();
        assert_eq!(ss.order(), 1);
        assert_eq!(ss.a()[(0, 0)], -1.0);
        assert_eq!(ss.b()[0], 1.0);
        assert_eq!(ss.c()[0], 1.0);
        assert_eq!(ss.d(), 0.0);
    }

    #[test]
    fn constant_gain_has_no_state() {
        let ss = TransferFunction::constant(3.5).to_ss().unwrap();
        assert_eq!(ss.order(), 0);
        assert_eq!(ss.d(), 3.5);
        assert_relative_eq!(ss.freq_response(10.0).unwrap().re, 3.5);
    }

    #[test]
    fn stage_plant_dc_gain() {
        let tf = TransferFunction::new(vec![8695.0], vec![1.0, 4.36, 7627.3]).unwrap();
        let ss = tf.to_ss().unwrap();
        assert_eq!(ss.order(), 2);
        let g = ss.freq_response(1e-6).unwrap();
        assert_relative_eq!(g.re, 8695.0 / 7627.3, max_relative = 1e-9);
        assert_relative_eq!(8695.0 / 7627.3, 1.1399, epsilon = 1e-4);
    }

    #[test]
    fn improper_is_rejected() {
        let tf = TransferFunction::new(vec![1.0, 1.0], vec![1.0]).unwrap();
        assert!(matches!(tf.to_ss(), Err(Error::Improper { num: 1, den: 0 })));
        assert!(TransferFunction::new(vec![1.0, 0.0, 0.0], vec![1.0]).is_err());
    }

    #[test]
    fn integrator_and_corner() {
        let g = TransferFunction::integrator().freq_response(1.0).unwrap();
        assert_relative_eq!(g.re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(g.im, -1.0);
        let g = TransferFunction::new(vec![1.0], vec![1.0, 1.0])
            .unwrap()
            .freq_response(1.0)
            .unwrap();
        assert_relative_eq!(g.re, 0.5);
        assert_relative_eq!(g.im, -0.5);
        assert_relative_eq!(g.norm(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(crate::phase_deg(g), -45.0, epsilon = 1e-12);
    }

    #[test]
    fn undamped_pole_is_reported() {
        let tf = TransferFunction::new(vec![1.0], vec![1.0, 0.0, 4.0]).unwrap();
        assert!(matches!(tf.freq_response(2.0), Err(Error::SingularResolvent { .. })));
        assert!(matches!(
            tf.to_ss().unwrap().freq_response(2.0),
            Err(Error::SingularResolvent { .. })
        ));
    }

    #[test]
    fn series_gain_and_cancellation() {
        let k = TransferFunction::constant(4.0);
        let kint = k.series(&TransferFunction::integrator());
        assert_eq!(kint.num(), &[4.0]);
        assert_eq!(kint.den(), &[1.0, 0.0]);

        let a = TransferFunction::new(vec![1.0, 1.0], vec![1.0, 10.0]).unwrap();
        let b = TransferFunction::new(vec![1.0, 10.0], vec![1.0, 100.0]).unwrap();
        let reduced = TransferFunction::new(vec![1.0, 1.0], vec![1.0, 100.0]).unwrap();
        let ab = a.series(&b);
        for w in crate::log_space(0.01, 1e4, 25) {
            let x = ab.freq_response(w).unwrap();
            let y = reduced.freq_response(w).unwrap();
            assert!((x - y).norm() <= 1e-9 * y.norm());
        }
    }

    #[test]
    fn pi_times_mass_phase() {
        let wi = 10.0;
        let l = TransferFunction::pi(wi)
            .unwrap()
            .series(&TransferFunction::mass(1.0).unwrap());
        let w = 10.0 * wi;
        let direct =
            (Complex::new(1.0, 0.0) + wi / Complex::new(0.0, w)) / (Complex::new(0.0, w) * Complex::new(0.0, w));
        let got = l.freq_response(w).unwrap();
        assert!((got - direct).norm() < 1e-12 * direct.norm());
        // -180 deg from the double integrator, -atan(1/10) from the PI
        assert_relative_eq!(
            crate::phase_deg(got),
            180.0 - (0.1f64).atan().to_degrees(),
            epsilon = 1e-9
        );
    }
}
