use super::ResetSystem;
use crate::lti::solve_real;
use crate::{Complex, Error, Result};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// Time-domain harmonic estimator settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleSettings {
    /// Samples per input period; must be a multiple of 2 so both zero
    /// crossings of the sine land on samples.
    pub samples_per_period: usize,
    /// Steady-state periods averaged in the Fourier sums.
    pub analysis_periods: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            samples_per_period: 8000,
            analysis_periods: 5,
        }
    }
}

/// Harmonic gains `G(jω, n)`, `n = 1..=n_max`, estimated from a simulated
/// steady-state response to `sin(ωt)`.
///
/// The base system is integrated with the trapezoidal rule and reset exactly
/// at the input zero crossings. The periodic orbit is found by solving the
/// affine one-period map for its fixed point, then re-simulated and
/// Fourier-analysed. Independent of the closed-form [`super::hosidf`].
pub fn fft_harmonic_oracle(
    rs: &ResetSystem,
    omega: f64,
    n_max: u32,
    settings: OracleSettings,
) -> Result<Vec<Complex<f64>>> {
    let spp = settings.samples_per_period;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "frequency must be positive, got {omega}"
        )));
    }
    if spp < 16 || !spp.is_multiple_of(2) || settings.analysis_periods == 0 {
        return Err(Error::InvalidArgument(
            "oracle needs an even sample count >= 16 and one period".into(),
        ));
    }
    let stepper = Stepper::new(rs, omega, spp)?;
    let n = rs.order();

    // one period is x_end = Φ x_0 + c
    let c = stepper.period(&DVector::zeros(n), None);
    let mut phi = DMatrix::zeros(n, n);
    for i in 0..n {
        let col = stepper.period(&DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 }), None) - &c;
        phi.set_column(i, &col);
    }
    let ident = DMatrix::<f64>::identity(n, n);
    let x0 = solve_real(ident - phi, &DMatrix::from_column_slice(n, 1, c.as_slice()))
        .ok_or_else(|| Error::NoConvergence("reset orbit has no unique periodic solution".into()))?;
    let mut x = DVector::from_column_slice(x0.as_slice());

    let mut outputs = Vec::with_capacity(spp * settings.analysis_periods);
    for _ in 0..settings.analysis_periods {
        x = stepper.period(&x, Some(&mut outputs));
    }
    let drift = (&x - DVector::from_column_slice(x0.as_slice())).amax();
    if drift > 1e-8 * (1.0 + x.amax()) {
        return Err(Error::NoConvergence(format!("periodic orbit drifted by {drift:e}")));
    }

    let total = outputs.len() as f64;
    Ok((1..=n_max)
        .map(|h| {
            let sum = outputs.iter().enumerate().fold(Complex::new(0.0, 0.0), |acc, (i, &y)| {
                let ang = -(h as f64) * 2.0 * PI * (i % spp) as f64 / spp as f64;
                acc + Complex::new(0.0, ang).exp() * y
            });
            // y = Im(G e^{jnθ}) gives c_n = -jG
            Complex::new(0.0, 1.0) * sum * (2.0 / total)
        })
        .collect())
}

struct Stepper<'a> {
    rs: &'a ResetSystem,
    ad: DMatrix<f64>,
    bd: DVector<f64>,
    inputs: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(rs: &'a ResetSystem, omega: f64, spp: usize) -> Result<Self> {
        let n = rs.order();
        let h = 2.0 * PI / (omega * spp as f64);
        let ident = DMatrix::<f64>::identity(n, n);
        let half = rs.base().a() * (h / 2.0);
        let m = solve_real(&ident - &half, &ident).ok_or(Error::Singular("I - A h/2"))?;
        let ad = &m * (&ident + &half);
        let bd = &m * rs.base().b() * (h / 2.0);
        let inputs = (0..=spp)
            .map(|i| {
                if i % (spp / 2) == 0 {
                    0.0
                } else {
                    (2.0 * PI * i as f64 / spp as f64).sin()
                }
            })
            .collect();
        Ok(Self { rs, ad, bd, inputs })
    }

    fn output(&self, x: &DVector<f64>, u: f64) -> f64 {
        (self.rs.base().c() * x)[0] + self.rs.base().d() * u
    }

    /// Advances one period from `x`; pushes samples `0..spp` of the output.
    fn period(&self, x: &DVector<f64>, mut out: Option<&mut Vec<f64>>) -> DVector<f64> {
        let spp = self.inputs.len() - 1;
        let mut x = x.clone();
        for i in 0..spp {
            let u = self.inputs[i];
            if let Some(o) = out.as_deref_mut() {
                o.push(if i % (spp / 2) == 0 {
                    // the input is zero here: average the pre- and post-reset values
                    0.5 * (self.output(&x, u) + self.output(&(self.rs.reset_matrix() * &x), u))
                } else {
                    self.output(&x, u)
                });
            }
            if i % (spp / 2) == 0 {
                x = self.rs.reset_matrix() * &x;
            }
            x = &self.ad * &x + &self.bd * (u + self.inputs[i + 1]);
        }
        // the sample at the end of the period is the next crossing; its reset
        // belongs to the next period's first sample
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cglp::make_gfore;
    use crate::reset_freq::hosidf;

    #[test]
    fn clegg_matches_closed_form() {
        let rs = ResetSystem::clegg_integrator();
        let g = fft_harmonic_oracle(&rs, 1.0, 3, OracleSettings::default()).unwrap();
        assert!((g[0] - Complex::new(4.0 / PI, -1.0)).norm() < 1e-5, "{:?}", g[0]);
        assert!(g[1].norm() < 1e-6);
        assert!((g[2].norm() - 4.0 / (3.0 * PI)).abs() < 1e-5);
    }

    #[test]
    fn gfore_matches_closed_form() {
        let rs = make_gfore(1.0, -0.3).unwrap();
        for w in [0.3, 1.3, 7.0] {
            let g = fft_harmonic_oracle(&rs, w, 5, OracleSettings::default()).unwrap();
            for (k, gk) in g.iter().enumerate() {
                let want = hosidf(&rs, w, k as u32 + 1).unwrap();
                assert!((gk - want).norm() < 1e-5, "w={w} n={} {gk} vs {want}", k + 1);
            }
        }
    }

    #[test]
    fn rejects_odd_sample_count() {
        let rs = ResetSystem::clegg_integrator();
        let s = OracleSettings {
            samples_per_period: 101,
            analysis_periods: 1,
        };
        assert!(fft_harmonic_oracle(&rs, 1.0, 1, s).is_err());
    }
}
