//! GFORE/GSORE reset elements and CgLp ("constant in gain, lead in phase")
//! compensators: a reset lag whose first harmonic cancels the gain of a
//! linear lead filter while keeping most of its phase lead.

mod factors;

pub use factors::{
    correction_factor_first, correction_factors_second, flatness_first, flatness_second, FLAT_BAND, GAMMA_MIN,
    GAMMA_STEP, SECOND_ORDER_TABLE,
};

use crate::lti::{StateSpaceModel, TransferFunction};
use crate::reset_freq::{describing_function, hosidf, ResetSystem};
use crate::{Complex, Error, Result};
use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

/// Generalized first-order reset element `1/(s/ω_rα + 1)` with `A_ρ = γ`.
pub fn make_gfore(omega_ra: f64, gamma: f64) -> Result<ResetSystem> {
    check_positive("omega_ra", omega_ra)?;
    let base = StateSpaceModel::new(
        DMatrix::from_element(1, 1, -omega_ra),
        DVector::from_element(1, omega_ra),
        RowDVector::from_element(1, 1.0),
        0.0,
    )?;
    ResetSystem::with_gamma(base, gamma)
}

/// Generalized second-order reset element
/// `1/((s/ω_rα)² + 2β_rα s/ω_rα + 1)` with `A_ρ = γI`.
pub fn make_gsore(omega_ra: f64, beta_ra: f64, gamma: f64) -> Result<ResetSystem> {
    check_positive("omega_ra", omega_ra)?;
    check_positive("beta_ra", beta_ra)?;
    let w2 = omega_ra * omega_ra;
    let base = StateSpaceModel::new(
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -w2, -2.0 * beta_ra * omega_ra]),
        DVector::from_column_slice(&[0.0, w2]),
        RowDVector::from_row_slice(&[1.0, 0.0]),
        0.0,
    )?;
    ResetSystem::with_gamma(base, gamma)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

/// CgLp order: GFORE + first-order lead, or GSORE + second-order lead.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn as_u8(self) -> u8 {
        match self {
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

impl TryFrom<u8> for Order {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            _ => Err(Error::InvalidArgument(format!("CgLp order must be 1 or 2, got {v}"))),
        }
    }
}

impl From<Order> for u8 {
    fn from(o: Order) -> u8 {
        o.as_u8()
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Resolved correction factors of a CgLp.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorrectionFactors {
    First { alpha: f64 },
    Second { alpha1: f64, alpha2: f64 },
}

impl CorrectionFactors {
    pub fn for_gamma(order: Order, gamma: f64) -> Result<Self> {
        Ok(match order {
            Order::First => CorrectionFactors::First {
                alpha: correction_factor_first(gamma)?,
            },
            Order::Second => {
                let (alpha1, alpha2) = correction_factors_second(gamma)?;
                CorrectionFactors::Second { alpha1, alpha2 }
            }
        })
    }

    /// Divisor of ω_r giving the reset element's corner (α or α₁).
    pub fn corner_divisor(&self) -> f64 {
        match *self {
            CorrectionFactors::First { alpha } => alpha,
            CorrectionFactors::Second { alpha1, .. } => alpha1,
        }
    }
}

/// Taming frequency used when none is given.
///
/// The taming pole(s) are placed so that together they cost 10° of phase at
/// ω_c: one pole at `ω_c / tan 10°` for order 1, a double pole at
/// `ω_c / tan 5°` for order 2.
pub fn default_taming(order: Order, omega_c: f64) -> f64 {
    let per_pole = match order {
        Order::First => 10f64,
        Order::Second => 5f64,
    };
    omega_c / per_pole.to_radians().tan()
}

/// Parameters of a CgLp compensator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CgLpConfig {
    pub order: Order,
    pub gamma: f64,
    /// lead start frequency, rad/s
    pub omega_r: f64,
    /// taming frequency, rad/s
    pub omega_t: f64,
    /// damping of the second-order reset element
    pub beta_ra: f64,
    pub factors: CorrectionFactors,
}

impl CgLpConfig {
    /// Builds a config and resolves its correction factors. `β_rα = 1`.
    pub fn new(order: Order, gamma: f64, omega_r: f64, omega_t: f64) -> Result<Self> {
        Self::with_beta(order, gamma, omega_r, omega_t, 1.0)
    }

    pub fn with_beta(order: Order, gamma: f64, omega_r: f64, omega_t: f64, beta_ra: f64) -> Result<Self> {
        check_positive("omega_r", omega_r)?;
        check_positive("omega_t", omega_t)?;
        check_positive("beta_ra", beta_ra)?;
        if omega_r >= omega_t {
            return Err(Error::InvalidArgument(format!(
                "lead start omega_r = {omega_r} must be below taming omega_t = {omega_t}"
            )));
        }
        let factors = CorrectionFactors::for_gamma(order, gamma)?;
        Ok(Self {
            order,
            gamma,
            omega_r,
            omega_t,
            beta_ra,
            factors,
        })
    }

    /// Corner frequency of the reset element, `ω_r/α` or `ω_r/α₁`.
    pub fn omega_ra(&self) -> f64 {
        self.omega_r / self.factors.corner_divisor()
    }

    /// Damping of the lead numerator, `β_r = α₂ β_rα` (order 2 only).
    pub fn beta_r(&self) -> Option<f64> {
        match self.factors {
            CorrectionFactors::Second { alpha2, .. } => Some(alpha2 * self.beta_ra),
            CorrectionFactors::First { .. } => None,
        }
    }
}

/// Reset part and linear lead part of a CgLp.
#[derive(Clone, Debug, PartialEq)]
pub struct CgLpRealization {
    pub reset_part: ResetSystem,
    pub lead_part: TransferFunction,
}

/// Assembles the reset element and the tamed lead filter of `cfg`.
pub fn build_cglp(cfg: &CgLpConfig) -> Result<CgLpRealization> {
    let (wr, wt) = (cfg.omega_r, cfg.omega_t);
    let (reset_part, lead_part) = match cfg.order {
        Order::First => (
            make_gfore(cfg.omega_ra(), cfg.gamma)?,
            TransferFunction::new(vec![1.0 / wr, 1.0], vec![1.0 / wt, 1.0])?,
        ),
        Order::Second => {
            let br = cfg.beta_r().expect("second-order factors");
            (
                make_gsore(cfg.omega_ra(), cfg.beta_ra, cfg.gamma)?,
                TransferFunction::new(
                    vec![1.0 / (wr * wr), 2.0 * br / wr, 1.0],
                    vec![1.0 / (wt * wt), 2.0 / wt, 1.0],
                )?,
            )
        }
    };
    Ok(CgLpRealization { reset_part, lead_part })
}

impl CgLpRealization {
    /// First-harmonic gain of the whole compensator.
    pub fn df(&self, omega: f64) -> Result<Complex<f64>> {
        Ok(describing_function(&self.reset_part, omega)? * self.lead_part.freq_response(omega)?)
    }

    /// n-th output harmonic per unit input: the lead filter is linear and
    /// follows the reset element, so it acts at `nω`.
    pub fn harmonic(&self, omega: f64, n: u32) -> Result<Complex<f64>> {
        Ok(hosidf(&self.reset_part, omega, n)? * self.lead_part.freq_response(n as f64 * omega)?)
    }
}

/// First-harmonic gain of the CgLp described by `cfg`.
pub fn cglp_df(cfg: &CgLpConfig, omega: f64) -> Result<Complex<f64>> {
    build_cglp(cfg)?.df(omega)
}

/// Bracket searched for `b = ω_c/ω_r`.
pub const B_RANGE: (f64, f64) = (0.05, 100.0);
const B_SCAN_POINTS: usize = 200;

/// Solves for `b = ω_c/ω_r` such that the CgLp's DF phase at ω_c equals
/// `theta_deg`. β_rα = 1.
///
/// The bracket [`B_RANGE`] is scanned on a log grid and the first upward
/// crossing is refined by bisection. If no b reaches θ the combination is
/// infeasible and the best phase found is reported.
pub fn solve_b(order: Order, gamma: f64, theta_deg: f64, omega_c: f64, omega_t: f64) -> Result<f64> {
    check_positive("omega_c", omega_c)?;
    check_positive("omega_t", omega_t)?;
    if !(theta_deg > 0.0 && theta_deg < 180.0) {
        return Err(Error::InvalidArgument(format!(
            "phase target {theta_deg} deg outside (0, 180)"
        )));
    }
    let factors = CorrectionFactors::for_gamma(order, gamma)?;
    let phase = |b: f64| -> Result<f64> {
        let cfg = CgLpConfig {
            order,
            gamma,
            omega_r: omega_c / b,
            omega_t,
            beta_ra: 1.0,
            factors,
        };
        Ok(crate::phase_deg(cglp_df(&cfg, omega_c)?) - theta_deg)
    };

    let grid = crate::log_space(B_RANGE.0, B_RANGE.1, B_SCAN_POINTS);
    let mut prev: Option<(f64, f64)> = None;
    let mut best = f64::NEG_INFINITY;
    for &b in &grid {
        // ω_r must stay below ω_t
        if omega_c / b >= omega_t {
            continue;
        }
        let p = phase(b)?;
        best = best.max(p);
        if let Some((b0, p0)) = prev {
            if p0 < 0.0 && p >= 0.0 {
                return bisect(&phase, b0, b);
            }
        }
        prev = Some((b, p));
    }
    Err(Error::Infeasible {
        order: order.as_u8(),
        gamma,
        theta_deg,
        max_phase_deg: best + theta_deg,
    })
}

fn bisect(f: &dyn Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-12 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reset_freq::hosidf;

    #[test]
    fn gfore_linear_and_reset_phase() {
        let lin = make_gfore(1.0, 1.0).unwrap();
        assert!((crate::phase_deg(describing_function(&lin, 1.0).unwrap()) + 45.0).abs() < 1e-12);
        let rs = make_gfore(1.0, 0.0).unwrap();
        assert!((crate::phase_deg(describing_function(&rs, 1.0).unwrap()) + 26.63).abs() < 0.01);
        let rs10 = make_gfore(10.0, 0.0).unwrap();
        for w in [0.1, 1.0, 10.0] {
            let a = describing_function(&rs, w).unwrap();
            let b = describing_function(&rs10, 10.0 * w).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn gsore_linear_gain_at_corner() {
        let rs = make_gsore(1.0, 1.0, 1.0).unwrap();
        let g = describing_function(&rs, 1.0).unwrap();
        assert!((g.norm() - 0.5).abs() < 1e-12);
        assert!((crate::db(g.norm()) + 6.02).abs() < 0.01);
    }

    #[test]
    fn gsore_reset_harmonics() {
        let rs = make_gsore(1.0, 1.0, 0.0).unwrap();
        assert!(hosidf(&rs, 1.0, 3).unwrap().norm() > 1e-3);
        assert_eq!(hosidf(&rs, 1.0, 4).unwrap(), Complex::new(0.0, 0.0));
    }

    #[test]
    fn element_constructors_validate() {
        assert!(make_gfore(0.0, 0.0).is_err());
        assert!(make_gsore(1.0, -1.0, 0.0).is_err());
        assert!(make_gfore(1.0, 1.5).is_err());
    }

    #[test]
    fn order_serde_round_trip() {
        assert_eq!(serde_json::to_string(&Order::Second).unwrap(), "2");
        assert_eq!(serde_json::from_str::<Order>("1").unwrap(), Order::First);
        assert!(serde_json::from_str::<Order>("3").is_err());
    }

    #[test]
    fn default_taming_costs_ten_degrees() {
        for order in [Order::First, Order::Second] {
            let wt = default_taming(order, 1.0);
            let poles = if order == Order::First { 1.0 } else { 2.0 };
            assert!((poles * (1.0 / wt).atan().to_degrees() - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_cglp_is_lead_lag() {
        let cfg = CgLpConfig::new(Order::First, 1.0, 100.0, 500.0).unwrap();
        for w in crate::log_space(1.0, 100.0, 20) {
            let z = cglp_df(&cfg, w).unwrap();
            let want = 1.0 / Complex::new(1.0, w / 500.0);
            assert!((z - want).norm() < 1e-12);
            assert!(crate::phase_deg(z) >= -11.31);
        }
    }

    #[test]
    fn dc_gain_is_unity() {
        for (order, g) in [(Order::First, -0.4), (Order::Second, 0.2)] {
            let cfg = CgLpConfig::new(order, g, 100.0, 3000.0).unwrap();
            let z = cglp_df(&cfg, 1e-4).unwrap();
            assert!((z.norm() - 1.0).abs() < 1e-6, "{z}");
        }
    }

    #[test]
    fn config_rejects_inverted_band() {
        assert!(CgLpConfig::new(Order::First, 0.0, 100.0, 50.0).is_err());
    }

    #[test]
    fn table_row_phase_first_order() {
        let wc = 2.0 * std::f64::consts::PI * 100.0;
        let cfg = CgLpConfig::new(Order::First, -0.3, wc / 1.34, default_taming(Order::First, wc)).unwrap();
        let ph = crate::phase_deg(cglp_df(&cfg, wc).unwrap());
        assert!((ph - 20.0).abs() < 0.5, "{ph}");
    }

    #[test]
    fn table_row_phase_second_order() {
        let wc = 2.0 * std::f64::consts::PI * 100.0;
        let cfg = CgLpConfig::new(Order::Second, 0.2, wc / 1.0, default_taming(Order::Second, wc)).unwrap();
        let ph = crate::phase_deg(cglp_df(&cfg, wc).unwrap());
        assert!((ph - 30.0).abs() < 1.0, "{ph}");
    }

    #[test]
    fn solved_b_hits_the_phase() {
        let wc = 628.3;
        for (order, g, th, b_ref) in [
            (Order::First, -0.3, 20.0, 1.34),
            (Order::First, -0.4, 30.0, 1.71),
            (Order::Second, 0.2, 40.0, 1.35),
        ] {
            let wt = default_taming(order, wc);
            let b = solve_b(order, g, th, wc, wt).unwrap();
            assert!((b / b_ref - 1.0).abs() < 0.05, "{order} {g} {th}: {b}");
            let cfg = CgLpConfig::new(order, g, wc / b, wt).unwrap();
            assert!((crate::phase_deg(cglp_df(&cfg, wc).unwrap()) - th).abs() < 0.05);
        }
    }

    #[test]
    fn infeasible_combination_reports_best_phase() {
        let wc = 628.3;
        match solve_b(Order::First, 0.5, 50.0, wc, default_taming(Order::First, wc)) {
            Err(Error::Infeasible { max_phase_deg, .. }) => assert!(max_phase_deg < 50.0),
            other => panic!("{other:?}"),
        }
        assert!(solve_b(Order::First, 0.0, 85.0, wc, 5.0 * wc).is_err());
    }
}
