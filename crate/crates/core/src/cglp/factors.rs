use super::{make_gfore, make_gsore};
use crate::optimize::{golden_section_min, nelder_mead};
use crate::reset_freq::describing_function;
use crate::{Complex, Error, Result};
use std::sync::OnceLock;

/// Lowest γ of the correction-factor grid.
pub const GAMMA_MIN: f64 = -0.9;
/// Grid spacing of cached correction factors.
pub const GAMMA_STEP: f64 = 0.1;
const GRID_LEN: usize = 20; // -0.9, -0.8, ..., 1.0

/// Band of the flatness objective, relative to ω_r.
pub const FLAT_BAND: (f64, f64) = (0.1, 100.0);
const FLAT_POINTS: usize = 60;

/// Published second-order factors (α₁, α₂) for γ = -0.9, -0.8, ..., 0.9;
/// used to start the simplex search.
pub const SECOND_ORDER_TABLE: [(f64, f64); 19] = [
    (30.09, 3.28),
    (14.11, 3.20),
    (8.66, 3.01),
    (5.89, 2.76),
    (4.23, 2.49),
    (3.11, 2.21),
    (2.43, 2.10),
    (1.92, 1.91),
    (1.52, 1.63),
    (1.23, 1.36),
    (1.03, 1.14),
    (0.93, 1.02),
    (0.89, 1.00),
    (0.90, 1.03),
    (0.92, 1.06),
    (0.94, 1.07),
    (0.96, 1.07),
    (0.98, 1.05),
    (0.99, 1.03),
];

static FIRST: [OnceLock<std::result::Result<f64, Error>>; GRID_LEN] = [const { OnceLock::new() }; GRID_LEN];
static SECOND: [OnceLock<std::result::Result<(f64, f64), Error>>; GRID_LEN] = [const { OnceLock::new() }; GRID_LEN];

fn band() -> Vec<f64> {
    crate::log_space(FLAT_BAND.0, FLAT_BAND.1, FLAT_POINTS)
}

/// Worst-case |dB| of the untamed first-order CgLp with ω_r = 1.
pub fn flatness_first(alpha: f64, gamma: f64) -> Result<f64> {
    let rs = make_gfore(1.0 / alpha, gamma)?;
    band().into_iter().try_fold(0.0f64, |worst, w| {
        let z = describing_function(&rs, w)? * Complex::new(1.0, w);
        Ok(worst.max(crate::db(z.norm()).abs()))
    })
}

/// Worst-case |dB| of the untamed second-order CgLp with ω_r = 1, β_rα = 1.
pub fn flatness_second(alpha1: f64, alpha2: f64, gamma: f64) -> Result<f64> {
    let rs = make_gsore(1.0 / alpha1, 1.0, gamma)?;
    band().into_iter().try_fold(0.0f64, |worst, w| {
        let lead = Complex::new(1.0 - w * w, 2.0 * alpha2 * w);
        let z = describing_function(&rs, w)? * lead;
        Ok(worst.max(crate::db(z.norm()).abs()))
    })
}

fn check_gamma(gamma: f64) -> Result<()> {
    if (GAMMA_MIN - 1e-9..=1.0 + 1e-9).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("gamma = {gamma} outside [-0.9, 1]")))
    }
}

/// Grid index for γ, or the bracketing pair and weight of the upper one.
fn locate(gamma: f64) -> (usize, usize, f64) {
    let pos = ((gamma - GAMMA_MIN) / GAMMA_STEP).clamp(0.0, (GRID_LEN - 1) as f64);
    let nearest = pos.round();
    if (pos - nearest).abs() < 1e-9 {
        let i = nearest as usize;
        return (i, i, 0.0);
    }
    let lo = pos.floor() as usize;
    (lo, lo + 1, pos - lo as f64)
}

fn grid_gamma(i: usize) -> f64 {
    // rounded so that the grid point for 0 is exactly 0
    ((GAMMA_MIN + GAMMA_STEP * i as f64) * 10.0).round() / 10.0
}

fn fit_first(gamma: f64) -> Result<f64> {
    if gamma >= 1.0 {
        return Ok(1.0);
    }
    // coarse scan in log α, then golden-section around the best sample
    let grid = crate::log_space(0.5, 40.0, 81);
    let mut best = (0, f64::INFINITY);
    for (i, &a) in grid.iter().enumerate() {
        let v = flatness_first(a, gamma)?;
        if v < best.1 {
            best = (i, v);
        }
    }
    let lo = grid[best.0.saturating_sub(1)].ln();
    let hi = grid[(best.0 + 1).min(grid.len() - 1)].ln();
    let mut failure = None;
    let (x, _) = golden_section_min(
        |la| {
            flatness_first(la.exp(), gamma).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::INFINITY
            })
        },
        lo,
        hi,
        1e-8,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(x.exp()),
    }
}

fn fit_second(gamma: f64, index: usize) -> Result<(f64, f64)> {
    if gamma >= 1.0 {
        return Ok((1.0, 1.0));
    }
    let start = SECOND_ORDER_TABLE[index];
    let r = nelder_mead(
        |p| {
            if p[0] <= 0.0 || p[1] <= 0.0 {
                return f64::INFINITY;
            }
            flatness_second(p[0], p[1], gamma).unwrap_or(f64::INFINITY)
        },
        &[start.0, start.1],
        0.05,
        1e-6,
        1e-8,
        2000,
    );
    if !r.converged || !r.value.is_finite() {
        return Err(Error::NoConvergence(format!(
            "second-order correction factors for gamma = {gamma}: simplex stopped at {:?} after {} iterations",
            r.x, r.iterations
        )));
    }
    Ok((r.x[0], r.x[1]))
}

fn first_at(i: usize) -> Result<f64> {
    FIRST[i].get_or_init(|| fit_first(grid_gamma(i))).clone()
}

fn second_at(i: usize) -> Result<(f64, f64)> {
    SECOND[i].get_or_init(|| fit_second(grid_gamma(i), i)).clone()
}

/// First-order correction factor α: shifts the GFORE corner to ω_r/α so the
/// CgLp's first-harmonic gain is as flat as possible.
///
/// Exact grid values (step 0.1 on [-0.9, 1]) are computed once and cached;
/// other γ are linearly interpolated.
pub fn correction_factor_first(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let (lo, hi, t) = locate(gamma);
    if lo == hi {
        return first_at(lo);
    }
    Ok((1.0 - t) * first_at(lo)? + t * first_at(hi)?)
}

/// Second-order correction factors (α₁, α₂): GSORE corner ω_r/α₁ and lead
/// damping α₂·β_rα. Cached and interpolated like [`correction_factor_first`].
pub fn correction_factors_second(gamma: f64) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    let (lo, hi, t) = locate(gamma);
    if lo == hi {
        return second_at(lo);
    }
    let (a, b) = (second_at(lo)?, second_at(hi)?);
    Ok(((1.0 - t) * a.0 + t * b.0, (1.0 - t) * a.1 + t * b.1))
}
