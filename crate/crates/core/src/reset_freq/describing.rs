use super::ResetSystem;
use crate::lti::{matrix_exponential, solve_complex, solve_real, to_complex};
use crate::{Complex, Error, Result};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// The real matrix that carries the reset contribution to every harmonic:
///
/// ```text
/// Θ(ω) = -(2ω²/π) (I + E) [ (I + A_ρ E)^-1 A_ρ (I + E) - I ] (ω²I + A²)^-1,
/// E = exp(π A / ω)
/// ```
///
/// Computed in real arithmetic; `j` only enters in the harmonic formulas.
pub fn theta_d(rs: &ResetSystem, omega: f64) -> Result<DMatrix<f64>> {
    check_omega(omega)?;
    let a = rs.base().a();
    let n = rs.order();
    let ident = DMatrix::<f64>::identity(n, n);
    let reset = rs.reset_matrix();
    if *reset == ident {
        // no jump, no reset contribution
        return Ok(DMatrix::zeros(n, n));
    }
    let e = matrix_exponential(&(a * (PI / omega)))?;
    let i_plus_e = &ident + &e;
    let jump = solve_real(&ident + reset * &e, &(reset * &i_plus_e)).ok_or(Error::ResetSingularity { omega })?;
    let w = &ident * (omega * omega) + a * a;
    let w_inv = solve_real(w, &ident).ok_or(Error::Singular("ω²I + A²"))?;
    Ok(i_plus_e * (jump - &ident) * w_inv * (-2.0 * omega * omega / PI))
}

/// First-harmonic complex gain `C (jωI - A)^-1 (I + jΘ(ω)) B + D`.
pub fn describing_function(rs: &ResetSystem, omega: f64) -> Result<Complex<f64>> {
    let theta = theta_d(rs, omega)?;
    let b = rs.base().b();
    let v = DVector::from_iterator(
        b.len(),
        b.iter().zip((&theta * b).iter()).map(|(re, im)| Complex::new(*re, *im)),
    );
    Ok(resolvent_output(rs, omega, &v)? + rs.base().d())
}

/// n-th harmonic gain. `n = 1` is the describing function; even `n` gives
/// exactly zero; odd `n >= 3` gives `C (jnωI - A)^-1 jΘ(ω) B`.
pub fn hosidf(rs: &ResetSystem, omega: f64, n: u32) -> Result<Complex<f64>> {
    match n {
        0 => Err(Error::InvalidArgument("harmonic order must be >= 1".into())),
        1 => describing_function(rs, omega),
        _ if n.is_multiple_of(2) => {
            check_omega(omega)?;
            Ok(Complex::new(0.0, 0.0))
        }
        _ => {
            let theta = theta_d(rs, omega)?;
            let tb = &theta * rs.base().b();
            let v = tb.map(|x| Complex::new(0.0, x));
            resolvent_output(rs, n as f64 * omega, &v)
        }
    }
}

/// `C (jωI - A)^-1 v`
fn resolvent_output(rs: &ResetSystem, omega: f64, v: &DVector<Complex<f64>>) -> Result<Complex<f64>> {
    let base = rs.base();
    let n = base.order();
    let m = DMatrix::from_diagonal_element(n, n, Complex::new(0.0, omega)) - to_complex(base.a());
    let x = solve_complex(m, v).ok_or(Error::SingularResolvent { omega })?;
    Ok((0..n).fold(Complex::new(0.0, 0.0), |acc, i| acc + x[i] * base.c()[i]))
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "frequency must be positive, got {omega}"
        )))
    }
}
