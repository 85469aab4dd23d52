//! CgLp tuning: enumerate one candidate per γ for a phase target, annotate
//! each with the 3rd-harmonic peak (ω_p, M_p) of its reset element, and pick
//! the largest ω_p for tracking or the smallest M_p for noise.
//!
//! ω_p and M_p are taken from the GFORE/GSORE alone, not the whole CgLp.

mod verify;

pub use verify::{candidate_loop, verify_by_simulation, VerificationReport, VerificationRow, VerifySettings};

use crate::cglp::{build_cglp, cglp_df, default_taming, make_gfore, make_gsore, solve_b, CgLpConfig, Order};
use crate::reset_freq::{harmonic_peak_default, hosidf, ResetSystem};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Relative ω_p difference treated as a tie.
pub const OMEGA_P_TIE: f64 = 0.01;
/// M_p difference (dB) treated as a tie.
pub const M_P_TIE_DB: f64 = 0.01;

/// The γ grid -0.9, -0.8, ..., 0.9.
pub fn gamma_grid() -> Vec<f64> {
    (-9..=9).map(|i| i as f64 / 10.0).collect()
}

/// Selection objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// largest ω_p
    Tracking,
    /// smallest M_p
    Noise,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tracking" => Ok(Objective::Tracking),
            "noise" => Ok(Objective::Noise),
            _ => Err(Error::InvalidArgument(format!(
                "objective must be tracking or noise, got '{s}'"
            ))),
        }
    }
}

/// One γ of a design group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuningCandidate {
    pub gamma: f64,
    /// phase target of the group, degrees
    pub theta_deg: f64,
    /// ω_c/ω_r; `None` when infeasible
    pub b: Option<f64>,
    /// 3rd-harmonic peak frequency of the reset element, rad/s
    pub omega_p: Option<f64>,
    /// 3rd-harmonic peak magnitude, dB (depends on γ only)
    #[serde(rename = "M_p_db")]
    pub m_p_db: f64,
    /// ω_c/ω_p
    pub ratio: Option<f64>,
    pub feasible: bool,
    /// DF phase of the CgLp at ω_c, degrees
    pub phase_deg: Option<f64>,
    /// |G(jω, 3)| of the reset element at ω_c/10, dB
    pub g3_low_db: Option<f64>,
    #[serde(skip)]
    pub config: Option<CgLpConfig>,
}

/// Candidates of one design group plus both recommendations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub order: Order,
    pub theta_deg: f64,
    /// rad/s
    pub omega_c: f64,
    /// rad/s
    pub omega_t: f64,
    pub candidates: Vec<TuningCandidate>,
    pub recommendation_tracking: Option<f64>,
    pub recommendation_noise: Option<f64>,
    pub infeasible: Vec<f64>,
}

impl TuningReport {
    pub fn candidate(&self, gamma: f64) -> Option<&TuningCandidate> {
        self.candidates.iter().find(|c| (c.gamma - gamma).abs() < 1e-9)
    }

    pub fn recommended(&self, objective: Objective) -> Option<&TuningCandidate> {
        let g = match objective {
            Objective::Tracking => self.recommendation_tracking,
            Objective::Noise => self.recommendation_noise,
        }?;
        self.candidate(g)
    }

    /// Fixed-width text table for terminals.
    pub fn to_table(&self) -> String {
        let mut s = format!(
            "order {}  theta {:.1} deg  w_c {:.4} rad/s  w_t {:.4} rad/s\n",
            self.order, self.theta_deg, self.omega_c, self.omega_t
        );
        s.push_str(&format!(
            "{:>6} {:>8} {:>12} {:>9} {:>10} {:>10}\n",
            "gamma", "b", "w_p", "w_c/w_p", "M_p dB", "G3 low dB"
        ));
        let opt = |v: Option<f64>, w: usize, p: usize| match v {
            Some(x) => format!("{x:>w$.p$}"),
            None => format!("{:>w$}", "-"),
        };
        for c in &self.candidates {
            s.push_str(&format!(
                "{:>6.1} {} {} {} {:>10.2} {}\n",
                c.gamma,
                opt(c.b, 8, 3),
                opt(c.omega_p, 12, 3),
                opt(c.ratio, 9, 3),
                c.m_p_db,
                opt(c.g3_low_db, 10, 2)
            ));
        }
        let pick = |g: Option<f64>| g.map_or("none".to_string(), |g| format!("{g:.1}"));
        s.push_str(&format!(
            "tracking: gamma = {}\nnoise:    gamma = {}\n",
            pick(self.recommendation_tracking),
            pick(self.recommendation_noise)
        ));
        s
    }
}

fn reset_element(order: Order, omega_ra: f64, gamma: f64) -> Result<ResetSystem> {
    match order {
        Order::First => make_gfore(omega_ra, gamma),
        Order::Second => make_gsore(omega_ra, 1.0, gamma),
    }
}

fn candidate(order: Order, gamma: f64, theta_deg: f64, omega_c: f64, omega_t: f64) -> Result<TuningCandidate> {
    // M_p depends only on γ: evaluate at unit corner
    let m_p_db = harmonic_peak_default(&reset_element(order, 1.0, gamma)?, 3)?.m_p_db;
    let b = match solve_b(order, gamma, theta_deg, omega_c, omega_t) {
        Ok(b) => b,
        Err(Error::Infeasible { .. }) => {
            return Ok(TuningCandidate {
                gamma,
                theta_deg,
                b: None,
                omega_p: None,
                m_p_db,
                ratio: None,
                feasible: false,
                phase_deg: None,
                g3_low_db: None,
                config: None,
            })
        }
        Err(e) => return Err(e),
    };
    let cfg = CgLpConfig::new(order, gamma, omega_c / b, omega_t)?;
    let real = build_cglp(&cfg)?;
    let peak = harmonic_peak_default(&real.reset_part, 3)?;
    let g3 = hosidf(&real.reset_part, omega_c / 10.0, 3)?.norm();
    Ok(TuningCandidate {
        gamma,
        theta_deg,
        b: Some(b),
        omega_p: Some(peak.omega_p),
        m_p_db,
        ratio: Some(omega_c / peak.omega_p),
        feasible: true,
        phase_deg: Some(crate::phase_deg(cglp_df(&cfg, omega_c)?)),
        g3_low_db: Some(crate::db(g3)),
        config: Some(cfg),
    })
}

/// One candidate per γ in [`gamma_grid`]; infeasible γ are kept and flagged.
/// `omega_t = None` uses [`default_taming`].
pub fn enumerate_candidates(
    order: Order,
    theta_deg: f64,
    omega_c: f64,
    omega_t: Option<f64>,
) -> Result<Vec<TuningCandidate>> {
    if !(theta_deg > 0.0 && theta_deg < 180.0) {
        return Err(Error::InvalidArgument(format!(
            "phase target {theta_deg} deg outside (0, 180)"
        )));
    }
    let omega_t = omega_t.unwrap_or_else(|| default_taming(order, omega_c));
    gamma_grid()
        .par_iter()
        .map(|&g| candidate(order, g, theta_deg, omega_c, omega_t))
        .collect()
}

/// Tracking: largest ω_p. Noise: smallest M_p. Values within
/// [`OMEGA_P_TIE`] / [`M_P_TIE_DB`] of the best tie, and ties go to the
/// larger γ.
pub fn recommend(candidates: &[TuningCandidate], objective: Objective) -> Result<TuningCandidate> {
    let feasible: Vec<&TuningCandidate> = candidates.iter().filter(|c| c.feasible).collect();
    let none = || Error::NoFeasibleCandidate {
        theta_deg: candidates.first().map_or(f64::NAN, |c| c.theta_deg),
    };
    let tied: Vec<&&TuningCandidate> = match objective {
        Objective::Tracking => {
            let best = feasible
                .iter()
                .filter_map(|c| c.omega_p)
                .fold(f64::NEG_INFINITY, f64::max);
            feasible
                .iter()
                .filter(|c| c.omega_p.is_some_and(|w| w >= best * (1.0 - OMEGA_P_TIE)))
                .collect()
        }
        Objective::Noise => {
            let best = feasible.iter().map(|c| c.m_p_db).fold(f64::INFINITY, f64::min);
            feasible.iter().filter(|c| c.m_p_db <= best + M_P_TIE_DB).collect()
        }
    };
    tied.into_iter()
        .max_by(|a, b| a.gamma.total_cmp(&b.gamma))
        .map(|c| (*c).clone())
        .ok_or_else(none)
}

/// Enumerates the group and fills in both recommendations.
pub fn build_report(order: Order, theta_deg: f64, omega_c: f64, omega_t: Option<f64>) -> Result<TuningReport> {
    let omega_t = omega_t.unwrap_or_else(|| default_taming(order, omega_c));
    let candidates = enumerate_candidates(order, theta_deg, omega_c, Some(omega_t))?;
    let pick = |o| recommend(&candidates, o).ok().map(|c| c.gamma);
    Ok(TuningReport {
        order,
        theta_deg,
        omega_c,
        omega_t,
        recommendation_tracking: pick(Objective::Tracking),
        recommendation_noise: pick(Objective::Noise),
        infeasible: candidates.iter().filter(|c| !c.feasible).map(|c| c.gamma).collect(),
        candidates,
    })
}

/// Like [`build_report`] but fails when no γ reaches θ.
pub fn tune(order: Order, theta_deg: f64, omega_c: f64, omega_t: Option<f64>) -> Result<TuningReport> {
    let report = build_report(order, theta_deg, omega_c, omega_t)?;
    if report.recommendation_tracking.is_none() {
        return Err(Error::NoFeasibleCandidate { theta_deg });
    }
    Ok(report)
}
