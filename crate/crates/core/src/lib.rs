//! Frequency-domain analysis, closed-loop simulation and tuning of reset
//! controllers.
//!
//! The crate is organised bottom-up:
//!
//! - [`lti`]: transfer functions, state-space models, matrix exponential and
//!   discretization (Tustin, ZOH).
//! - [`reset_freq`]: describing function (first harmonic) and higher-order
//!   sinusoidal input describing functions of reset systems, harmonic peak
//!   search and a time-domain oracle that checks them.
//! - [`cglp`]: GFORE/GSORE reset elements and the "constant in gain, lead in
//!   phase" compensators built from them.
//! - [`sim`]: fixed-step hybrid simulation of the closed loop, pseudo-sensitivity
//!   and noise metrics.
//! - [`tuner`]: candidate enumeration and the ω_p / M_p selection rules.
//! - [`config`]: flat key-value project files used by the CLI.
//!
//! All frequencies are in rad/s unless a name says otherwise (`*_hz`).

pub mod cglp;
pub mod config;
mod error;
pub mod lti;
pub mod optimize;
pub mod reset_freq;
pub mod sim;
pub mod tuner;

pub use error::{Error, Result};

pub use nalgebra::Complex;

/// 20·log10 of a magnitude.
pub fn db(magnitude: f64) -> f64 {
    20.0 * magnitude.log10()
}

/// Phase of a complex number in degrees.
pub fn phase_deg(z: Complex<f64>) -> f64 {
    z.arg().to_degrees()
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            let step = (b - a) / (points - 1) as f64;
            (0..points).map(|i| 10f64.powf(a + step * i as f64)).collect()
        }
    }
}

/// Log grid with a given density in points per decade (at least two points).
pub fn log_grid_per_decade(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let points = ((decades * per_decade as f64).ceil() as usize + 1).max(2);
    log_space(lo, hi, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_space_endpoints() {
        let w = log_space(0.1, 1000.0, 5);
        assert_eq!(w.len(), 5);
        assert!((w[0] - 0.1).abs() < 1e-15);
        assert!((w[4] - 1000.0).abs() < 1e-9);
        assert!((w[2] - 10.0).abs() < 1e-12);
        assert!(log_space(1.0, 2.0, 0).is_empty());
    }
}
