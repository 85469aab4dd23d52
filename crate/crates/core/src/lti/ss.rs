use super::{solve_complex, to_complex};
use crate::{Complex, Error, Result};
use nalgebra::{DMatrix, DVector, RowDVector};
use std::fmt;

/// Whether a model lives in continuous time or is sampled with period `Ts`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleTime {
    Continuous,
    Discrete(f64),
}

/// SISO state-space model
///
/// continuous: x' = A x + B u,  y = C x + D u
/// discrete:   x[k+1] = A x[k] + B u[k],  y[k] = C x[k] + D u[k]
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpaceModel {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: RowDVector<f64>,
    d: f64,
    sample: SampleTime,
}

impl fmt::Display for StateSpaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A: {} B: {} C: {} D: {}", self.a, self.b, self.c, self.d)
    }
}

impl StateSpaceModel {
    /// Continuous-time model; checks dimensions and finiteness.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: RowDVector<f64>, d: f64) -> Result<Self> {
        Self::with_sample_time(a, b, c, d, SampleTime::Continuous)
    }

    pub fn with_sample_time(
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: RowDVector<f64>,
        d: f64,
        sample: SampleTime,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || c.len() != n {
            return Err(Error::InvalidModel(format!(
                "dimension mismatch: A {}x{}, B {}, C {}",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        if a.iter().chain(b.iter()).chain(c.iter()).any(|v| !v.is_finite()) || !d.is_finite() {
            return Err(Error::NonFinite);
        }
        if let SampleTime::Discrete(ts) = sample {
            if !(ts > 0.0 && ts.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "sample time must be positive, got {ts}"
                )));
            }
        }
        Ok(Self { a, b, c, d, sample })
    }

    /// Static gain, no state.
    pub fn static_gain(k: f64) -> Self {
        Self {
            a: DMatrix::zeros(0, 0),
            b: DVector::zeros(0),
            c: RowDVector::zeros(0),
            d: k,
            sample: SampleTime::Continuous,
        }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }
    pub fn c(&self) -> &RowDVector<f64> {
        &self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn sample_time(&self) -> SampleTime {
        self.sample
    }
    pub fn order(&self) -> usize {
        self.a.nrows()
    }
    pub fn is_continuous(&self) -> bool {
        self.sample == SampleTime::Continuous
    }

    /// `C (zI - A)^-1 B + D` at a complex point `z` (s for continuous models).
    pub fn eval(&self, z: Complex<f64>) -> Option<Complex<f64>> {
        let n = self.order();
        if n == 0 {
            return Some(Complex::new(self.d, 0.0));
        }
        let m = DMatrix::from_diagonal_element(n, n, z) - to_complex(&self.a);
        let rhs = self.b.map(|v| Complex::new(v, 0.0));
        let x = solve_complex(m, &rhs)?;
        let y = (0..n).fold(Complex::new(self.d, 0.0), |acc, i| acc + x[i] * self.c[i]);
        Some(y)
    }

    /// Frequency response; discrete models are evaluated at `z = e^{jωTs}`.
    pub fn freq_response(&self, omega: f64) -> Result<Complex<f64>> {
        let z = match self.sample {
            SampleTime::Continuous => Complex::new(0.0, omega),
            SampleTime::Discrete(ts) => Complex::from_polar(1.0, omega * ts),
        };
        self.eval(z).ok_or(Error::SingularResolvent { omega })
    }

    /// Cascade: output of `self` drives `next`.
    pub fn series(&self, next: &StateSpaceModel) -> Result<StateSpaceModel> {
        if self.sample != next.sample {
            return Err(Error::InvalidArgument(
                "series of models with different sample times".into(),
            ));
        }
        let (n1, n2) = (self.order(), next.order());
        let n = n1 + n2;
        let mut a = DMatrix::zeros(n, n);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((n1, n1), (n2, n2)).copy_from(&next.a);
        a.view_mut((n1, 0), (n2, n1)).copy_from(&(&next.b * &self.c));
        let mut b = DVector::zeros(n);
        b.rows_mut(0, n1).copy_from(&self.b);
        b.rows_mut(n1, n2).copy_from(&(&next.b * self.d));
        let mut c = RowDVector::zeros(n);
        c.columns_mut(0, n1).copy_from(&(&self.c * next.d));
        c.columns_mut(n1, n2).copy_from(&next.c);
        Self::with_sample_time(a, b, c, next.d * self.d, self.sample)
    }

    /// Scales the output by `k`.
    pub fn scaled(&self, k: f64) -> StateSpaceModel {
        StateSpaceModel {
            c: &self.c * k,
            d: self.d * k,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::TransferFunction;

    #[test]
    fn dimension_mismatch_is_rejected() {
        let r = StateSpaceModel::new(DMatrix::zeros(2, 2), DVector::zeros(1), RowDVector::zeros(2), 0.0);
        assert!(matches!(r, Err(Error::InvalidModel(_))));
    }

    #[test]
    fn series_matches_product() {
        let a = TransferFunction::new(vec![2.0, 1.0], vec![1.0, 3.0, 2.0])
            .unwrap()
            .to_ss()
            .unwrap();
        let b = TransferFunction::new(vec![1.0, 5.0], vec![1.0, 0.5])
            .unwrap()
            .to_ss()
            .unwrap();
        let ab = a.series(&b).unwrap();
        for w in [0.1, 1.0, 7.0, 100.0] {
            let p = a.freq_response(w).unwrap() * b.freq_response(w).unwrap();
            assert!((ab.freq_response(w).unwrap() - p).norm() < 1e-12 * p.norm());
        }
    }
}
