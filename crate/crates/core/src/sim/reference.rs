use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One sinusoid of a multisine, `a sin(2π f t + φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SineComponent {
    pub amplitude: f64,
    pub freq_hz: f64,
    /// radians
    pub phase: f64,
}

/// Reference signal generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Reference {
    Zero,
    /// `amplitude sin(omega t)`, omega in rad/s
    Sine {
        amplitude: f64,
        omega: f64,
    },
    Multisine(Vec<SineComponent>),
}

impl Reference {
    pub fn sine(amplitude: f64, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite() && amplitude.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bad sine reference ({amplitude}, {omega} rad/s)"
            )));
        }
        Ok(Reference::Sine { amplitude, omega })
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Reference::Zero => 0.0,
            Reference::Sine { amplitude, omega } => amplitude * (omega * t).sin(),
            Reference::Multisine(parts) => parts
                .iter()
                .map(|c| c.amplitude * (2.0 * PI * c.freq_hz * t + c.phase).sin())
                .sum(),
        }
    }

    /// Upper bound on |r(t)|.
    pub fn bound(&self) -> f64 {
        match self {
            Reference::Zero => 0.0,
            Reference::Sine { amplitude, .. } => amplitude.abs(),
            Reference::Multisine(parts) => parts.iter().map(|c| c.amplitude.abs()).sum(),
        }
    }

    /// Period of a single sinusoid; `None` otherwise.
    pub fn period(&self) -> Option<f64> {
        match self {
            Reference::Sine { omega, .. } => Some(2.0 * PI / omega),
            _ => None,
        }
    }
}

/// `r(t) = Σ aᵢ sin(2π fᵢ t + φᵢ)`.
pub fn multisine_reference(components: &[SineComponent]) -> Result<Reference> {
    if let Some(c) = components
        .iter()
        .find(|c| !(c.freq_hz > 0.0 && c.freq_hz.is_finite() && c.amplitude.is_finite() && c.phase.is_finite()))
    {
        return Err(Error::InvalidArgument(format!("bad multisine component {c:?}")));
    }
    Ok(Reference::Multisine(components.to_vec()))
}

/// Stand-in smooth trajectory: 0.6 @ 1 Hz + 0.3 @ 2 Hz + 0.1 @ 5 Hz.
pub fn default_trajectory() -> Reference {
    Reference::Multisine(
        [(0.6, 1.0), (0.3, 2.0), (0.1, 5.0)]
            .iter()
            .map(|&(amplitude, freq_hz)| SineComponent {
                amplitude,
                freq_hz,
                phase: 0.0,
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_component_is_a_sinusoid() {
        let r = multisine_reference(&[SineComponent {
            amplitude: 2.0,
            freq_hz: 3.0,
            phase: 0.0,
        }])
        .unwrap();
        for t in [0.0, 0.01, 0.123] {
            assert!((r.value(t) - 2.0 * (2.0 * PI * 3.0 * t).sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn value_at_zero_is_sum_of_phase_sines() {
        let r = multisine_reference(&[
            SineComponent {
                amplitude: 1.0,
                freq_hz: 4.0,
                phase: 0.3,
            },
            SineComponent {
                amplitude: 1.0,
                freq_hz: 8.0,
                phase: -1.1,
            },
        ])
        .unwrap();
        assert!((r.value(0.0) - (0.3f64.sin() + (-1.1f64).sin())).abs() < 1e-15);
        assert_eq!(r.bound(), 2.0);
    }

    #[test]
    fn default_trajectory_preset() {
        let r = default_trajectory();
        assert!((r.bound() - 1.0).abs() < 1e-15);
        assert_eq!(r.period(), None);
        assert_eq!(r.value(0.0), 0.0);
    }

    #[test]
    fn rejects_nonpositive_frequency() {
        let bad = SineComponent {
            amplitude: 1.0,
            freq_hz: 0.0,
            phase: 0.0,
        };
        assert!(multisine_reference(&[bad]).is_err());
        assert!(Reference::sine(1.0, -2.0).is_err());
    }
}
