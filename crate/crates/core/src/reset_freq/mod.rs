//! Frequency-domain description of reset systems.
//!
//! A reset system is a linear base `(A, B, C, D)` whose state jumps to
//! `A_rho x` whenever its input crosses zero. Under a sinusoidal input
//! `sin(wt)` its output contains the input frequency and its odd multiples;
//! [`describing_function`] gives the first harmonic and [`hosidf`] the n-th.

mod describing;
mod oracle;
mod peak;

pub use describing::{describing_function, hosidf, theta_d};
pub use oracle::{fft_harmonic_oracle, OracleSettings};
pub use peak::{harmonic_peak, harmonic_peak_default, HarmonicPeak, PEAK_GRID_PER_DECADE};

use crate::lti::StateSpaceModel;
use crate::{Complex, Error, Result};
use nalgebra::{DMatrix, DVector, RowDVector};

/// Linear base system plus reset matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ResetSystem {
    base: StateSpaceModel,
    reset: DMatrix<f64>,
}

impl ResetSystem {
    pub fn new(base: StateSpaceModel, reset: DMatrix<f64>) -> Result<Self> {
        if !base.is_continuous() {
            return Err(Error::InvalidModel("reset system base must be continuous".into()));
        }
        let n = base.order();
        if reset.nrows() != n || reset.ncols() != n {
            return Err(Error::InvalidModel(format!(
                "reset matrix is {}x{}, base has {n} states",
                reset.nrows(),
                reset.ncols()
            )));
        }
        if reset.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { base, reset })
    }

    /// Reset matrix `gamma * I`; gamma must lie in [-1, 1].
    pub fn with_gamma(base: StateSpaceModel, gamma: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidArgument(format!(
                "reset value gamma = {gamma} outside [-1, 1]"
            )));
        }
        let n = base.order();
        Self::new(base, DMatrix::from_diagonal_element(n, n, gamma))
    }

    /// Clegg integrator: 1/s whose state resets to zero.
    pub fn clegg_integrator() -> Self {
        let base = StateSpaceModel::new(
            DMatrix::zeros(1, 1),
            DVector::from_element(1, 1.0),
            RowDVector::from_element(1, 1.0),
            0.0,
        )
        .expect("scalar integrator is well formed");
        Self {
            base,
            reset: DMatrix::zeros(1, 1),
        }
    }

    pub fn base(&self) -> &StateSpaceModel {
        &self.base
    }

    pub fn reset_matrix(&self) -> &DMatrix<f64> {
        &self.reset
    }

    pub fn order(&self) -> usize {
        self.base.order()
    }

    /// `Some(gamma)` when the reset matrix is `gamma * I`.
    pub fn uniform_gamma(&self) -> Option<f64> {
        let n = self.order();
        let g = if n == 0 { return None } else { self.reset[(0, 0)] };
        (self.reset == DMatrix::from_diagonal_element(n, n, g)).then_some(g)
    }

    /// Geometric-mean pole magnitude `|det A|^(1/n)`, the corner frequency
    /// of GFORE/GSORE elements. `None` for integrating bases.
    pub fn corner_frequency(&self) -> Option<f64> {
        let n = self.order();
        if n == 0 {
            return None;
        }
        let det = self.base.a().determinant().abs();
        (det > 0.0).then(|| det.powf(1.0 / n as f64))
    }
}

/// Complex gain of the n-th output harmonic per unit input amplitude at `omega`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicResponse {
    pub omega: f64,
    pub order: u32,
    pub value: Complex<f64>,
}

impl HarmonicResponse {
    pub fn magnitude_db(&self) -> f64 {
        crate::db(self.value.norm())
    }

    pub fn phase_deg(&self) -> f64 {
        crate::phase_deg(self.value)
    }
}

/// Evaluates [`hosidf`] and wraps the result.
pub fn harmonic(rs: &ResetSystem, omega: f64, order: u32) -> Result<HarmonicResponse> {
    Ok(HarmonicResponse {
        omega,
        order,
        value: hosidf(rs, omega, order)?,
    })
}
