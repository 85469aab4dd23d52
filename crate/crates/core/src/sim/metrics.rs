use super::{simulate, Block, LoopSpec, Reference, SimResult};
use crate::lti::FrequencyResponse;
use crate::reset_freq::describing_function;
use crate::{Complex, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Pseudo-sensitivity `max_{t >= t_ss} |r - y| / r₀` at one frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoSensitivityPoint {
    /// rad/s
    pub omega: f64,
    pub magnitude: f64,
}

impl PseudoSensitivityPoint {
    pub fn magnitude_db(&self) -> f64 {
        crate::db(self.magnitude)
    }
}

/// Statistics of the tracking error `r - y` over `t >= t_ss`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub max_abs_e: f64,
    pub rms_e: f64,
    /// s
    pub t_ss: f64,
}

impl SimResult {
    pub fn error_metrics(&self) -> ErrorMetrics {
        let (mut max, mut sq, mut count) = (0.0f64, 0.0, 0usize);
        for e in self.tracking_error().skip(self.steady_start()) {
            max = max.max(e.abs());
            sq += e * e;
            count += 1;
        }
        ErrorMetrics {
            max_abs_e: max,
            rms_e: if count > 0 { (sq / count as f64).sqrt() } else { 0.0 },
            t_ss: self.t_ss,
        }
    }
}

/// `S = 1/(1 + G C)` at `omega`.
pub fn linear_sensitivity<P, F>(plant: &P, controller: F, omega: f64) -> Result<Complex<f64>>
where
    P: FrequencyResponse + ?Sized,
    F: Fn(f64) -> Result<Complex<f64>>,
{
    sensitivity_from_loop_gain(plant.freq_response(omega)? * controller(omega)?)
}

fn sensitivity_from_loop_gain(l: Complex<f64>) -> Result<Complex<f64>> {
    let den = Complex::new(1.0, 0.0) + l;
    if den.norm() <= 1e-12 * (1.0 + l.norm()) {
        return Err(Error::Singular("1 + G C"));
    }
    Ok(den.inv())
}

impl LoopSpec {
    /// Chain gain at `omega`, reset blocks replaced by their describing function.
    pub fn chain_df(&self, omega: f64) -> Result<Complex<f64>> {
        self.chain.iter().try_fold(Complex::new(1.0, 0.0), |acc, b| {
            Ok(acc
                * match b {
                    Block::Linear(m) => m.freq_response(omega)?,
                    Block::Reset(rs) => describing_function(rs, omega)?,
                })
        })
    }

    /// Open-loop gain `k_p · chain DF · plant`.
    pub fn loop_gain(&self, omega: f64) -> Result<Complex<f64>> {
        Ok(self.chain_df(omega)? * self.plant.freq_response(omega)? * self.kp)
    }

    /// `1/(1 + L(jω))` from the describing-function loop gain; exact for
    /// all-linear loops.
    pub fn analytic_sensitivity(&self, omega: f64) -> Result<Complex<f64>> {
        sensitivity_from_loop_gain(self.loop_gain(omega)?)
    }
}

/// Gain that puts the describing-function crossover at `omega_c`.
/// The `kp` already in `spec` is ignored.
pub fn tune_kp(spec: &LoopSpec, omega_c: f64) -> Result<f64> {
    let g = (spec.chain_df(omega_c)? * spec.plant.freq_response(omega_c)?).norm();
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "loop has no usable gain at {omega_c} rad/s"
        )));
    }
    Ok(1.0 / g)
}

/// Minimum simulated time for a sinusoidal run: 20 periods or 0.5 s.
pub fn sine_duration(omega: f64) -> f64 {
    (20.0 * 2.0 * PI / omega).max(0.5)
}

/// Runs `spec` with `r = r₀ sin(ωt)` and no noise and reports the peak
/// steady-state tracking error. An unsettled run is repeated once with
/// twice the duration.
pub fn pseudo_sensitivity(spec: &LoopSpec, omega: f64, r0: f64) -> Result<PseudoSensitivityPoint> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "reference amplitude must be positive, got {r0}"
        )));
    }
    let run = spec.clone().with_reference(Reference::sine(r0, omega)?).with_noise(0.0);
    let mut duration = sine_duration(omega);
    for attempt in 0..2 {
        let res = simulate(&run, duration, 0)?;
        if res.settled {
            let start = res.steady_start();
            let peak = res.tracking_error().skip(start).fold(0.0f64, |m, v| m.max(v.abs()));
            return Ok(PseudoSensitivityPoint {
                omega,
                magnitude: peak / r0,
            });
        }
        if attempt == 0 {
            duration *= 2.0;
        }
    }
    Err(Error::NoSteadyState(format!(
        "error peaks at {:.4} Hz still changing after {duration} s",
        omega / (2.0 * PI)
    )))
}

/// [`pseudo_sensitivity`] at every frequency, in parallel; results keep the
/// input order.
pub fn sensitivity_sweep(spec: &LoopSpec, omegas: &[f64], r0: f64) -> Vec<Result<PseudoSensitivityPoint>> {
    omegas.par_iter().map(|&w| pseudo_sensitivity(spec, w, r0)).collect()
}

/// Zero reference, uniform noise on `[-amplitude, amplitude]` in the
/// feedback path; max and RMS of `r - y` over the last 80% of the run.
pub fn noise_metrics(spec: &LoopSpec, amplitude: f64, duration: f64, seed: u64) -> Result<ErrorMetrics> {
    let run = spec.clone().with_reference(Reference::Zero).with_noise(amplitude);
    Ok(simulate(&run, duration, seed)?.error_metrics())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cglp::make_gfore;
    use crate::lti::TransferFunction;
    use crate::sim::controller_chain;

    /// Reset element with A_rho = I, a 3x lead around crossover and a PI.
    fn linear_loop(mass: f64) -> LoopSpec {
        let wc = 2.0 * PI * 100.0;
        let mut chain = vec![Block::Reset(make_gfore(5.0 * wc, 1.0).unwrap())];
        let lead = TransferFunction::new(vec![3.0 / wc, 1.0], vec![1.0 / (3.0 * wc), 1.0]).unwrap();
        chain.push(Block::Linear(lead.to_ss().unwrap()));
        chain.extend(controller_chain(None, Some(wc / 10.0)).unwrap());
        let plant = TransferFunction::mass(mass).unwrap().to_ss().unwrap();
        let mut spec = LoopSpec::new(plant, chain, 1.0);
        spec.kp = tune_kp(&spec, wc).unwrap();
        spec
    }

    #[test]
    fn sensitivity_arithmetic() {
        let one = |_w: f64| Ok(Complex::new(1.0, 0.0));
        let g = TransferFunction::constant(-0.5);
        assert!((linear_sensitivity(&g, one, 1.0).unwrap() - Complex::new(2.0, 0.0)).norm() < 1e-15);
        let g = TransferFunction::constant(0.0);
        assert_eq!(linear_sensitivity(&g, one, 1.0).unwrap(), Complex::new(1.0, 0.0));
        let g = TransferFunction::constant(1e9);
        assert!(linear_sensitivity(&g, one, 1.0).unwrap().norm() < 1.1e-9);
        let g = TransferFunction::constant(-1.0);
        assert!(linear_sensitivity(&g, one, 1.0).is_err());
    }

    #[test]
    fn kp_for_pure_mass() {
        let wc = 2.0 * PI * 100.0;
        for m in [1.0, 3.5] {
            let spec = LoopSpec::new(TransferFunction::mass(m).unwrap().to_ss().unwrap(), vec![], 1.0);
            let kp = tune_kp(&spec, wc).unwrap();
            assert!((kp / (m * wc * wc) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kp_with_pi_and_flat_cglp() {
        let wc = 2.0 * PI * 100.0;
        let plant = TransferFunction::mass(1.0).unwrap().to_ss().unwrap();
        let spec = LoopSpec::new(plant, controller_chain(None, Some(wc / 10.0)).unwrap(), 1.0);
        let kp = tune_kp(&spec, wc).unwrap();
        assert!((kp - wc * wc / 1.00499).abs() / kp < 1e-5);
        let mut tuned = spec.clone();
        tuned.kp = kp;
        assert!((tuned.loop_gain(wc).unwrap().norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn linear_loop_matches_analytic_sensitivity() {
        let spec = linear_loop(1.0);
        for f in [5.0, 40.0] {
            let w = 2.0 * PI * f;
            let p = pseudo_sensitivity(&spec, w, 1.0).unwrap();
            let s = spec.analytic_sensitivity(w).unwrap().norm();
            assert!((p.magnitude / s - 1.0).abs() < 0.02, "{f} Hz: {} vs {s}", p.magnitude);
        }
    }

    #[test]
    fn integral_action_at_low_frequency() {
        let spec = linear_loop(1.0);
        let w = 0.01 * 2.0 * PI * 100.0;
        assert!(pseudo_sensitivity(&spec, w, 1.0).unwrap().magnitude < 0.01);
    }

    #[test]
    fn results_do_not_depend_on_mass() {
        let w = 2.0 * PI * 10.0;
        let a = pseudo_sensitivity(&linear_loop(1.0), w, 1.0).unwrap().magnitude;
        let b = pseudo_sensitivity(&linear_loop(4.0), w, 1.0).unwrap().magnitude;
        assert!((a / b - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sweep_keeps_order() {
        let spec = linear_loop(1.0);
        let ws = [2.0 * PI * 30.0];
        let out = sensitivity_sweep(&spec, &ws, 1.0);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].as_ref().unwrap().omega, ws[0]);
        assert!(sensitivity_sweep(&spec, &[], 1.0).is_empty());
    }

    #[test]
    fn zero_noise_gives_zero_metrics() {
        let m = noise_metrics(&linear_loop(1.0), 0.0, 0.1, 3).unwrap();
        assert_eq!((m.max_abs_e, m.rms_e), (0.0, 0.0));
        let m = noise_metrics(&linear_loop(1.0), 1e-3, 0.2, 3).unwrap();
        assert!(m.rms_e > 0.0 && m.max_abs_e >= m.rms_e);
    }
}
