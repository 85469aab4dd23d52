use crate::{Error, Result};
use nalgebra::DMatrix;

const PADE_DEGREE: usize = 6;
/// Scaled argument bound for the [6/6] Padé approximant (backward error at
/// roundoff level for ||X||_1 <= 0.5).
const THETA: f64 = 0.5;

/// Matrix exponential by scaling and squaring with a diagonal [6/6] Padé
/// approximant.
pub fn matrix_exponential(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidArgument(
            "matrix exponential of a non-square matrix".into(),
        ));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let norm = one_norm(m);
    let squarings = if norm > THETA {
        (norm / THETA).log2().ceil() as i32
    } else {
        0
    };
    let x = m / 2f64.powi(squarings);

    // c_k = c_{k-1} (p - k + 1) / (k (2p - k + 1))
    let mut coeffs = [0.0; PADE_DEGREE + 1];
    coeffs[0] = 1.0;
    for k in 1..=PADE_DEGREE {
        let p = PADE_DEGREE as f64;
        let kf = k as f64;
        coeffs[k] = coeffs[k - 1] * (p - kf + 1.0) / (kf * (2.0 * p - kf + 1.0));
    }

    // Split into even (v) and odd (u) parts: N = v + u, D = v - u.
    let ident = DMatrix::<f64>::identity(n, n);
    let mut power = ident.clone();
    let mut even = ident.clone() * coeffs[0];
    let mut odd = DMatrix::zeros(n, n);
    for (k, c) in coeffs.iter().enumerate().skip(1) {
        power = &power * &x;
        if k % 2 == 0 {
            even += &power * *c;
        } else {
            odd += &power * *c;
        }
    }
    let numer = &even + &odd;
    let denom = &even - &odd;
    let mut result = super::solve_real(denom, &numer).ok_or(Error::Singular("Padé denominator"))?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
