//! Project files: flat TOML key-value documents describing a plant, a
//! controller, a simulation and where to write results.
//!
//! User-facing frequencies are in Hz (keys ending in `_hz`); [`Project`]
//! holds the resolved values in rad/s.
//!
//! ```toml
//! plant = "mass"            # or plant_num / plant_den
//! element = "cglp"          # cglp | reset | clegg
//! order = 1
//! gamma = -0.4
//! theta_deg = 30            # or omega_r_hz
//! omega_c_hz = 100
//! omega_i_hz = 10           # 0 disables the PI factor
//! ts = 1e-4
//! reference_hz = 5
//! seed = 1
//! out = "run.csv"
//! ```

use crate::cglp::{build_cglp, default_taming, solve_b, CgLpConfig, CgLpRealization, Order};
use crate::lti::TransferFunction;
use crate::reset_freq::{hosidf, ResetSystem};
use crate::sim::{tune_kp, Block, LoopSpec, PlantPreset, DEFAULT_TS};
use crate::{Complex, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// Crossover used when a file gives none, Hz.
pub const DEFAULT_OMEGA_C_HZ: f64 = 100.0;

/// What the controller's nonlinear part is.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Element {
    /// reset element plus lead filter
    #[default]
    Cglp,
    /// the CgLp's reset element alone
    Reset,
    /// `1/s` with full reset
    Clegg,
}

/// Raw contents of a project file. Every key is optional; unknown keys are
/// rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    /// preset name: "mass" or "stage-eq10"
    pub plant: Option<String>,
    pub plant_num: Option<Vec<f64>>,
    pub plant_den: Option<Vec<f64>>,

    pub element: Option<Element>,
    pub order: Option<u8>,
    pub gamma: Option<f64>,
    /// DF phase target at the crossover, degrees
    pub theta_deg: Option<f64>,
    pub omega_r_hz: Option<f64>,
    pub omega_t_hz: Option<f64>,
    pub omega_i_hz: Option<f64>,
    pub omega_c_hz: Option<f64>,
    pub beta_ra: Option<f64>,
    pub kp: Option<f64>,

    /// sample time, s
    pub ts: Option<f64>,
    /// s
    pub duration: Option<f64>,
    pub r0: Option<f64>,
    pub reference_hz: Option<f64>,
    pub noise: Option<f64>,
    pub seed: Option<u64>,

    /// `[lo, hi]` of a log sweep
    pub sweep_hz: Option<[f64; 2]>,
    pub points: Option<usize>,
    /// explicit sweep points; overrides `sweep_hz`
    pub frequencies_hz: Option<Vec<f64>>,
    pub harmonics: Option<Vec<u32>>,

    pub out: Option<PathBuf>,
    pub metrics_out: Option<PathBuf>,
}

/// How the lead filter's start frequency is fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LeadTarget {
    /// solve for the phase at ω_c, degrees
    Theta(f64),
    /// given directly, rad/s
    OmegaR(f64),
}

/// PI factor `1 + ω_i/s` of the loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PiCorner {
    /// ω_i as a fraction of ω_c
    Ratio(f64),
    /// rad/s
    Fixed(f64),
    Off,
}

/// Sweep request, rad/s.
#[derive(Clone, Debug, PartialEq)]
pub enum Sweep {
    Range { lo: f64, hi: f64, points: usize },
    List(Vec<f64>),
}

impl Sweep {
    pub fn omegas(&self) -> Vec<f64> {
        match self {
            Sweep::Range { lo, hi, points } => crate::log_space(*lo, *hi, *points),
            Sweep::List(v) => v.clone(),
        }
    }
}

/// A validated project with frequencies in rad/s.
#[derive(Clone, Debug, PartialEq)]
pub struct Project {
    pub plant: TransferFunction,
    pub element: Element,
    pub order: Option<Order>,
    pub gamma: Option<f64>,
    pub lead: Option<LeadTarget>,
    pub omega_c: f64,
    /// `None` uses the default taming
    pub omega_t: Option<f64>,
    pub pi: PiCorner,
    pub beta_ra: f64,
    /// `None` places the DF crossover at ω_c
    pub kp: Option<f64>,
    pub ts: f64,
    pub duration: Option<f64>,
    pub r0: f64,
    pub reference_omega: Option<f64>,
    pub noise: f64,
    pub seed: u64,
    pub sweep: Option<Sweep>,
    pub harmonics: Vec<u32>,
    pub out: Option<PathBuf>,
    pub metrics_out: Option<PathBuf>,
}

impl Default for Project {
    fn default() -> Self {
        Self {
            plant: PlantPreset::Mass.transfer_function(),
            element: Element::Cglp,
            order: None,
            gamma: None,
            lead: None,
            omega_c: 2.0 * PI * DEFAULT_OMEGA_C_HZ,
            omega_t: None,
            pi: PiCorner::Ratio(0.1),
            beta_ra: 1.0,
            kp: None,
            ts: DEFAULT_TS,
            duration: None,
            r0: 1.0,
            reference_omega: None,
            noise: 0.0,
            seed: 0,
            sweep: None,
            harmonics: vec![1, 3, 5],
            out: None,
            metrics_out: None,
        }
    }
}

/// Line (1-based) where `key` is assigned, if any.
fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

impl ProjectConfig {
    /// Parses and validates a project file. Errors name the offending line.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ProjectConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            let msg = e.message().trim().to_string();
            Error::Config(match line {
                Some(l) => format!("line {l}: {msg}"),
                None => msg,
            })
        })?;
        cfg.validate(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn validate(&self, text: &str) -> Result<()> {
        let fail = |key: &str, msg: String| {
            Err(Error::Config(match line_of(text, key) {
                Some(l) => format!("line {l}: {key}: {msg}"),
                None => format!("{key}: {msg}"),
            }))
        };
        let positive = [
            ("omega_r_hz", self.omega_r_hz),
            ("omega_t_hz", self.omega_t_hz),
            ("omega_c_hz", self.omega_c_hz),
            ("beta_ra", self.beta_ra),
            ("ts", self.ts),
            ("duration", self.duration),
            ("r0", self.r0),
            ("reference_hz", self.reference_hz),
        ];
        for (key, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return fail(key, format!("must be positive, got {v}"));
                }
            }
        }
        for (key, v) in [("omega_i_hz", self.omega_i_hz), ("noise", self.noise)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return fail(key, format!("must be non-negative, got {v}"));
                }
            }
        }
        if let Some(k) = self.kp {
            if !(k.is_finite() && k != 0.0) {
                return fail("kp", format!("must be finite and nonzero, got {k}"));
            }
        }
        if let Some(p) = &self.plant {
            if self.plant_num.is_some() || self.plant_den.is_some() {
                return fail("plant", "give either a preset or plant_num/plant_den, not both".into());
            }
            if let Err(e) = p.parse::<PlantPreset>() {
                return fail("plant", e.to_string());
            }
        }
        match (&self.plant_num, &self.plant_den) {
            (Some(_), None) => return fail("plant_num", "plant_den is missing".into()),
            (None, Some(_)) => return fail("plant_den", "plant_num is missing".into()),
            (Some(n), Some(d)) => {
                if let Err(e) = TransferFunction::new(n.clone(), d.clone()) {
                    return fail("plant_den", e.to_string());
                }
            }
            (None, None) => {}
        }
        if let Some(o) = self.order {
            if let Err(e) = Order::try_from(o) {
                return fail("order", e.to_string());
            }
        }
        if let Some(g) = self.gamma {
            if !(g > -1.0 && g <= 1.0) {
                return fail("gamma", format!("must lie in (-1, 1], got {g}"));
            }
        }
        if let Some(t) = self.theta_deg {
            if self.omega_r_hz.is_some() {
                return fail("theta_deg", "give either theta_deg or omega_r_hz, not both".into());
            }
            if !(t > 0.0 && t < 180.0) {
                return fail("theta_deg", format!("must lie in (0, 180), got {t}"));
            }
        }
        if let Some([lo, hi]) = self.sweep_hz {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return fail("sweep_hz", format!("need 0 < lo <= hi, got [{lo}, {hi}]"));
            }
        }
        if self.points == Some(0) {
            return fail("points", "must be at least 1".into());
        }
        if let Some(f) = &self.frequencies_hz {
            if let Some(bad) = f.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return fail("frequencies_hz", format!("entries must be positive, got {bad}"));
            }
        }
        if let Some(h) = &self.harmonics {
            if h.contains(&0) {
                return fail("harmonics", "orders start at 1".into());
            }
        }
        Ok(())
    }

    /// Converts to rad/s and fills defaults.
    pub fn resolve(&self) -> Result<Project> {
        let hz = |v: f64| 2.0 * PI * v;
        let d = Project::default();
        let plant = match (&self.plant, &self.plant_num, &self.plant_den) {
            (Some(p), _, _) => p.parse::<PlantPreset>()?.transfer_function(),
            (None, Some(n), Some(den)) => TransferFunction::new(n.clone(), den.clone())?,
            _ => d.plant,
        };
        let omega_c = self.omega_c_hz.map_or(d.omega_c, hz);
        let lead = match (self.theta_deg, self.omega_r_hz) {
            (Some(t), _) => Some(LeadTarget::Theta(t)),
            (None, Some(w)) => Some(LeadTarget::OmegaR(hz(w))),
            (None, None) => None,
        };
        let sweep = match (&self.frequencies_hz, self.sweep_hz) {
            (Some(f), _) => Some(Sweep::List(f.iter().map(|&v| hz(v)).collect())),
            (None, Some([lo, hi])) => Some(Sweep::Range {
                lo: hz(lo),
                hi: hz(hi),
                points: self.points.unwrap_or(100),
            }),
            (None, None) => None,
        };
        Ok(Project {
            plant,
            element: self.element.unwrap_or_default(),
            order: self.order.map(Order::try_from).transpose()?,
            gamma: self.gamma,
            lead,
            omega_c,
            omega_t: self.omega_t_hz.map(hz),
            pi: match self.omega_i_hz {
                Some(0.0) => PiCorner::Off,
                Some(w) => PiCorner::Fixed(hz(w)),
                None => d.pi,
            },
            beta_ra: self.beta_ra.unwrap_or(1.0),
            kp: self.kp,
            ts: self.ts.unwrap_or(d.ts),
            duration: self.duration,
            r0: self.r0.unwrap_or(d.r0),
            reference_omega: self.reference_hz.map(hz),
            noise: self.noise.unwrap_or(0.0),
            seed: self.seed.unwrap_or(0),
            sweep,
            harmonics: self.harmonics.clone().unwrap_or(d.harmonics),
            out: self.out.clone(),
            metrics_out: self.metrics_out.clone(),
        })
    }
}

/// The element analysed by the frequency-domain commands.
#[derive(Clone, Debug, PartialEq)]
pub enum AnalysisElement {
    Cglp(CgLpRealization),
    Reset(ResetSystem),
}

impl AnalysisElement {
    /// n-th harmonic gain per unit input (n = 1 is the DF).
    pub fn harmonic(&self, omega: f64, n: u32) -> Result<Complex<f64>> {
        match self {
            AnalysisElement::Cglp(c) => c.harmonic(omega, n),
            AnalysisElement::Reset(rs) => hosidf(rs, omega, n),
        }
    }

    fn blocks(&self) -> Result<Vec<Block>> {
        Ok(match self {
            AnalysisElement::Cglp(c) => vec![Block::Reset(c.reset_part.clone()), Block::Linear(c.lead_part.to_ss()?)],
            AnalysisElement::Reset(rs) => vec![Block::Reset(rs.clone())],
        })
    }
}

impl Project {
    fn missing(key: &str, why: &str) -> Error {
        Error::Config(format!("{key} is required {why}"))
    }

    /// PI corner in rad/s, if the loop has one.
    pub fn omega_i(&self) -> Option<f64> {
        match self.pi {
            PiCorner::Ratio(r) => Some(r * self.omega_c),
            PiCorner::Fixed(w) => Some(w),
            PiCorner::Off => None,
        }
    }

    pub fn omega_t(&self, order: Order) -> f64 {
        self.omega_t.unwrap_or_else(|| default_taming(order, self.omega_c))
    }

    /// CgLp parameters; θ targets are solved for ω_r (may be infeasible).
    pub fn cglp_config(&self) -> Result<CgLpConfig> {
        let order = self.order.ok_or_else(|| Self::missing("order", "for a CgLp"))?;
        let gamma = self.gamma.ok_or_else(|| Self::missing("gamma", "for a CgLp"))?;
        let omega_t = self.omega_t(order);
        let omega_r = match self.lead {
            Some(LeadTarget::OmegaR(w)) => w,
            Some(LeadTarget::Theta(t)) => {
                if self.beta_ra != 1.0 {
                    return Err(Error::Config("theta_deg targets assume beta_ra = 1".into()));
                }
                self.omega_c / solve_b(order, gamma, t, self.omega_c, omega_t)?
            }
            None => return Err(Self::missing("theta_deg or omega_r_hz", "for a CgLp")),
        };
        CgLpConfig::with_beta(order, gamma, omega_r, omega_t, self.beta_ra)
    }

    pub fn analysis_element(&self) -> Result<AnalysisElement> {
        Ok(match self.element {
            Element::Cglp => AnalysisElement::Cglp(build_cglp(&self.cglp_config()?)?),
            Element::Reset => AnalysisElement::Reset(build_cglp(&self.cglp_config()?)?.reset_part),
            Element::Clegg => AnalysisElement::Reset(ResetSystem::clegg_integrator()),
        })
    }

    /// Closed loop: element, optional PI, gain from `kp` or tuned for
    /// crossover at ω_c. Reference and noise are left at rest.
    pub fn loop_spec(&self) -> Result<LoopSpec> {
        let mut chain = self.analysis_element()?.blocks()?;
        if let Some(wi) = self.omega_i() {
            chain.push(Block::Linear(TransferFunction::pi(wi)?.to_ss()?));
        }
        let mut spec = LoopSpec::new(self.plant.to_ss()?, chain, 1.0).with_ts(self.ts);
        spec.kp = match self.kp {
            Some(k) => k,
            None => tune_kp(&spec, self.omega_c)?,
        };
        Ok(spec)
    }
}
