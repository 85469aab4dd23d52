use super::{hosidf, ResetSystem};
use crate::optimize::golden_section_max;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Grid density of the coarse scan before golden-section refinement.
pub const PEAK_GRID_PER_DECADE: usize = 400;

/// Location and height of a harmonic's magnitude peak.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicPeak {
    /// argmax of |G(jω, n)| in rad/s
    pub omega_p: f64,
    /// peak magnitude in dB
    pub m_p_db: f64,
}

/// Peak of |G(jω, n)| over `[lo, hi]`.
///
/// The bracket is scanned on a log grid and the best sample is refined by
/// golden section in log ω. If the maximum sits on an edge the bracket is
/// widened by two decades on that side once; a second edge hit is an error.
pub fn harmonic_peak(rs: &ResetSystem, n: u32, lo: f64, hi: f64) -> Result<HarmonicPeak> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("bad peak bracket [{lo}, {hi}]")));
    }
    let mag = |w: f64| hosidf(rs, w, n).map(|g| g.norm());

    let mut bracket = (lo, hi);
    for attempt in 0..2 {
        let grid = crate::log_grid_per_decade(bracket.0, bracket.1, PEAK_GRID_PER_DECADE);
        let values = grid.iter().map(|&w| mag(w)).collect::<Result<Vec<f64>>>()?;
        let (best, _) = values.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
        );
        let last = grid.len() - 1;
        if best == 0 || best == last {
            if attempt == 0 {
                bracket = if best == 0 {
                    (bracket.0 / 100.0, bracket.1)
                } else {
                    (bracket.0, bracket.1 * 100.0)
                };
                continue;
            }
            return Err(Error::PeakOnBoundary { omega: grid[best] });
        }

        let (l, h) = (grid[best - 1].ln(), grid[best + 1].ln());
        let mut failure = None;
        let (x, v) = golden_section_max(
            |lw| match mag(lw.exp()) {
                Ok(m) => m,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NEG_INFINITY
                }
            },
            l,
            h,
            1e-9,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let (omega_p, peak) = if v >= values[best] {
            (x.exp(), v)
        } else {
            (grid[best], values[best])
        };
        return Ok(HarmonicPeak {
            omega_p,
            m_p_db: crate::db(peak),
        });
    }
    unreachable!("peak search makes at most two passes")
}

/// [`harmonic_peak`] over four decades centred on the element's corner frequency.
pub fn harmonic_peak_default(rs: &ResetSystem, n: u32) -> Result<HarmonicPeak> {
    let corner = rs.corner_frequency().ok_or_else(|| {
        Error::InvalidArgument("base system has no corner frequency; give an explicit bracket".into())
    })?;
    harmonic_peak(rs, n, corner / 100.0, corner * 100.0)
}
