//! Minimal SISO LTI layer: transfer functions, state-space models, matrix
//! exponential and discretization.

mod discretize;
mod expm;
mod ss;
mod tf;

pub use discretize::{tustin_discretize, zoh_discretize};
pub use expm::matrix_exponential;
pub use ss::{SampleTime, StateSpaceModel};
pub use tf::TransferFunction;

use crate::{Complex, Result};
use nalgebra::{DMatrix, DVector};

/// Anything with a complex SISO frequency response.
pub trait FrequencyResponse {
    /// Complex gain at angular frequency `omega` (rad/s).
    fn freq_response(&self, omega: f64) -> Result<Complex<f64>>;
}

impl FrequencyResponse for TransferFunction {
    fn freq_response(&self, omega: f64) -> Result<Complex<f64>> {
        TransferFunction::freq_response(self, omega)
    }
}

impl FrequencyResponse for StateSpaceModel {
    fn freq_response(&self, omega: f64) -> Result<Complex<f64>> {
        StateSpaceModel::freq_response(self, omega)
    }
}

/// Free-function form of [`FrequencyResponse::freq_response`].
pub fn freq_response<M: FrequencyResponse + ?Sized>(model: &M, omega: f64) -> Result<Complex<f64>> {
    model.freq_response(omega)
}

/// Relative pivot threshold below which a matrix is treated as singular.
pub(crate) const PIVOT_TOL: f64 = 1e-13;

/// Solves `m x = rhs` for small complex systems; `None` when `m` is
/// numerically singular.
pub(crate) fn solve_complex(m: DMatrix<Complex<f64>>, rhs: &DVector<Complex<f64>>) -> Option<DVector<Complex<f64>>> {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let lu = m.lu();
    let u = lu.u();
    let min_pivot = (0..u.nrows()).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if min_pivot <= PIVOT_TOL * scale {
        return None;
    }
    lu.solve(rhs)
}

/// Real counterpart of [`solve_complex`] for a matrix right-hand side.
pub(crate) fn solve_real(m: DMatrix<f64>, rhs: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let scale = m.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let lu = m.lu();
    let u = lu.u();
    let min_pivot = (0..u.nrows()).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if min_pivot <= PIVOT_TOL * scale {
        return None;
    }
    lu.solve(rhs)
}

pub(crate) fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex<f64>> {
    m.map(|v| Complex::new(v, 0.0))
}
