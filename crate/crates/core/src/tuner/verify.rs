use super::TuningReport;
use crate::cglp::build_cglp;
use crate::lti::TransferFunction;
use crate::sim::{controller_chain, sensitivity_sweep, tune_kp, LoopSpec, DEFAULT_TS};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Settings of the simulated ranking.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    /// frequency band, Hz
    pub band_hz: (f64, f64),
    /// log-spaced points in the band
    pub points: usize,
    /// reference amplitude
    pub r0: f64,
    /// PI corner as a fraction of ω_c; `None` for no PI
    pub omega_i_ratio: Option<f64>,
    /// sample time, s
    pub ts: f64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            band_hz: (1.0, 40.0),
            points: 20,
            r0: 1.0,
            omega_i_ratio: Some(0.1),
            ts: DEFAULT_TS,
        }
    }
}

/// Simulated pseudo-sensitivity summary of one candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationRow {
    pub gamma: f64,
    /// mean of S∞ in dB over the log grid; `None` when the run failed
    pub mean_s_inf_db: Option<f64>,
    /// per-frequency S∞ in dB
    pub s_inf_db: Vec<f64>,
    pub stable: bool,
    /// 1-based position in the simulated ranking
    pub rank: Option<usize>,
    pub note: Option<String>,
}

/// Simulated ranking of a design group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub frequencies_hz: Vec<f64>,
    pub rows: Vec<VerificationRow>,
    pub simulated_best: Option<f64>,
    pub omega_p_best: Option<f64>,
    pub agree: bool,
}

impl VerificationReport {
    pub fn row(&self, gamma: f64) -> Option<&VerificationRow> {
        self.rows.iter().find(|r| (r.gamma - gamma).abs() < 1e-9)
    }
}

/// Closed loop of a feasible candidate: CgLp · PI on `plant`, k_p set for
/// crossover at the report's ω_c.
pub fn candidate_loop(
    report: &TuningReport,
    gamma: f64,
    plant: &TransferFunction,
    settings: &VerifySettings,
) -> Result<LoopSpec> {
    let cfg = report
        .candidate(gamma)
        .and_then(|c| c.config.clone())
        .ok_or_else(|| Error::InvalidArgument(format!("gamma = {gamma} is not a feasible candidate")))?;
    let real = build_cglp(&cfg)?;
    let chain = controller_chain(Some(&real), settings.omega_i_ratio.map(|r| r * report.omega_c))?;
    let mut spec = LoopSpec::new(plant.to_ss()?, chain, 1.0).with_ts(settings.ts);
    spec.kp = tune_kp(&spec, report.omega_c)?;
    Ok(spec)
}

/// Ranks the feasible candidates by their mean simulated S∞ (dB, log-uniform
/// weights) over the band. Unstable or unsettled candidates are flagged and
/// left out of the ranking.
pub fn verify_by_simulation(
    report: &TuningReport,
    plant: &TransferFunction,
    settings: &VerifySettings,
) -> Result<VerificationReport> {
    let (lo, hi) = settings.band_hz;
    if !(lo > 0.0 && hi >= lo) || settings.points == 0 {
        return Err(Error::InvalidArgument(format!(
            "bad band [{lo}, {hi}] Hz / {} points",
            settings.points
        )));
    }
    let freqs = crate::log_space(lo, hi, settings.points);
    let omegas: Vec<f64> = freqs.iter().map(|f| 2.0 * PI * f).collect();

    let mut rows = Vec::new();
    for c in report.candidates.iter().filter(|c| c.feasible) {
        let spec = candidate_loop(report, c.gamma, plant, settings)?;
        let results = sensitivity_sweep(&spec, &omegas, settings.r0);
        let mut row = VerificationRow {
            gamma: c.gamma,
            mean_s_inf_db: None,
            s_inf_db: Vec::new(),
            stable: true,
            rank: None,
            note: None,
        };
        for r in results {
            match r {
                Ok(p) => row.s_inf_db.push(p.magnitude_db()),
                Err(e) => {
                    row.stable = !matches!(e, Error::Unstable { .. });
                    row.note = Some(e.to_string());
                    row.s_inf_db.clear();
                    break;
                }
            }
        }
        if row.note.is_none() {
            row.mean_s_inf_db = Some(row.s_inf_db.iter().sum::<f64>() / row.s_inf_db.len() as f64);
        }
        rows.push(row);
    }

    let mut order: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].mean_s_inf_db.is_some()).collect();
    order.sort_by(|&a, &b| {
        rows[a]
            .mean_s_inf_db
            .unwrap()
            .total_cmp(&rows[b].mean_s_inf_db.unwrap())
    });
    for (rank, &i) in order.iter().enumerate() {
        rows[i].rank = Some(rank + 1);
    }
    let simulated_best = order.first().map(|&i| rows[i].gamma);
    let omega_p_best = report.recommendation_tracking;
    Ok(VerificationReport {
        frequencies_hz: freqs,
        agree: simulated_best.is_some() && simulated_best == omega_p_best,
        rows,
        simulated_best,
        omega_p_best,
    })
}
