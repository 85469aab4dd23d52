use log::{info, warn};
use resetkit::config::{LeadTarget, Project, Sweep};
use resetkit::reset_freq::harmonic_peak_default;
use resetkit::sim::{
    default_trajectory, multisine_reference, sensitivity_sweep, simulate, sine_duration, Reference, SineComponent,
};
use resetkit::tuner::{build_report, Objective};
use resetkit::{cglp::build_cglp, db, phase_deg, Error, Result};
use serde::Serialize;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// Reference frequency of track mode when none is given, Hz.
const TRACK_DEFAULT_HZ: f64 = 5.0;
/// Default noise-run length, s.
const NOISE_DURATION: f64 = 5.0;
/// Multisine runs cover this many periods of the slowest component.
const TRAJECTORY_PERIODS: f64 = 20.0;

fn io_err(path: Option<&Path>, e: io::Error) -> Error {
    let what = path.map_or("stdout".to_string(), |p| p.display().to_string());
    Error::Io(format!("cannot write {what}: {e}"))
}

/// Runs `body` against the file at `path`, or stdout.
fn with_output<F>(path: Option<&Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let result = match path {
        Some(p) => File::create(p).and_then(|f| {
            let mut w = BufWriter::new(f);
            body(&mut w)?;
            w.flush()
        }),
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            body(&mut w).and_then(|_| w.flush())
        }
    };
    result.map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("plain data serializes");
    with_output(path, |w| writeln!(w, "{text}"))
}

fn sweep(p: &Project) -> Vec<f64> {
    p.sweep.as_ref().map(Sweep::omegas).unwrap_or_default()
}

pub fn df(p: &Project) -> Result<()> {
    let element = p.analysis_element()?;
    let rows = sweep(p)
        .into_iter()
        .map(|w| element.harmonic(w, 1).map(|g| (w, g)))
        .collect::<Result<Vec<_>>>()?;
    with_output(p.out.as_deref(), |w| {
        writeln!(w, "omega,magnitude,mag_db,phase_deg")?;
        for (omega, g) in &rows {
            writeln!(w, "{omega},{},{},{}", g.norm(), db(g.norm()), phase_deg(*g))?;
        }
        Ok(())
    })
}

pub fn hosidf(p: &Project) -> Result<()> {
    let element = p.analysis_element()?;
    let mut rows = Vec::new();
    for w in sweep(p) {
        for &n in &p.harmonics {
            rows.push((w, n, element.harmonic(w, n)?));
        }
    }
    with_output(p.out.as_deref(), |w| {
        writeln!(w, "omega,n,magnitude,mag_db,phase_deg")?;
        for (omega, n, g) in &rows {
            // a zero harmonic has no phase; report 0
            let phase = if g.norm() == 0.0 { 0.0 } else { phase_deg(*g) };
            writeln!(w, "{omega},{n},{},{},{phase}", g.norm(), db(g.norm()))?;
        }
        Ok(())
    })
}

#[derive(Serialize)]
struct GainPhase {
    magnitude: f64,
    mag_db: f64,
    phase_deg: f64,
}

#[derive(Serialize)]
struct LeadFilter {
    num: Vec<f64>,
    den: Vec<f64>,
}

#[derive(Serialize)]
struct DesignReport {
    config: resetkit::cglp::CgLpConfig,
    omega_c: f64,
    b: f64,
    omega_ra: f64,
    df_at_omega_c: GainPhase,
    omega_p: f64,
    #[serde(rename = "M_p_db")]
    m_p_db: f64,
    lead: LeadFilter,
    kp: f64,
}

pub fn design(p: &Project) -> Result<()> {
    let cfg = p.cglp_config()?;
    let real = build_cglp(&cfg)?;
    let g = real.df(p.omega_c)?;
    let peak = harmonic_peak_default(&real.reset_part, 3)?;
    let report = DesignReport {
        omega_c: p.omega_c,
        b: p.omega_c / cfg.omega_r,
        omega_ra: cfg.omega_ra(),
        df_at_omega_c: GainPhase {
            magnitude: g.norm(),
            mag_db: db(g.norm()),
            phase_deg: phase_deg(g),
        },
        omega_p: peak.omega_p,
        m_p_db: peak.m_p_db,
        lead: LeadFilter {
            num: real.lead_part.num().to_vec(),
            den: real.lead_part.den().to_vec(),
        },
        kp: p.loop_spec()?.kp,
        config: cfg,
    };
    write_json(p.out.as_deref(), &report)
}

pub fn tune(p: &Project, objective: Objective) -> Result<()> {
    let order = p.order.ok_or_else(|| Error::Config("tune needs --order".into()))?;
    let theta = match p.lead {
        Some(LeadTarget::Theta(t)) => t,
        _ => return Err(Error::Config("tune needs --theta".into())),
    };
    let report = build_report(order, theta, p.omega_c, p.omega_t)?;
    let Some(best) = report.recommended(objective) else {
        return Err(Error::NoFeasibleCandidate { theta_deg: theta });
    };
    info!("recommended gamma = {} for {objective:?}", best.gamma);
    let table = format!(
        "{}recommended ({}): gamma = {:.1}, b = {:.3}\n",
        report.to_table(),
        match objective {
            Objective::Tracking => "tracking",
            Objective::Noise => "noise",
        },
        best.gamma,
        best.b.unwrap_or(f64::NAN)
    );
    match p.out.as_deref() {
        Some(path) => {
            write_json(Some(path), &report)?;
            with_output(None, |w| write!(w, "{table}"))
        }
        None => {
            // keep stdout machine-readable; the table goes to stderr
            eprint!("{table}");
            write_json(None, &report)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Track,
    Noise,
    Trajectory,
}

#[derive(Serialize)]
struct SimMetrics {
    mode: Mode,
    max_e: f64,
    rms_e: f64,
    t_ss: f64,
    settled: bool,
    /// `max_e / r0` in dB (track mode)
    #[serde(skip_serializing_if = "Option::is_none")]
    s_inf_db: Option<f64>,
    kp: f64,
    resets: usize,
    samples: usize,
    seed: u64,
}

pub fn sim(p: &Project, mode: Mode) -> Result<()> {
    let Some(csv_path) = p.out.as_deref() else {
        return Err(Error::Config(
            "sim needs an output path (--out or `out` in the project file)".into(),
        ));
    };
    let base = p.loop_spec()?;
    let (spec, duration) = match mode {
        Mode::Track => {
            let w = p.reference_omega.unwrap_or(2.0 * PI * TRACK_DEFAULT_HZ);
            let d = p.duration.unwrap_or_else(|| sine_duration(w));
            (base.with_reference(Reference::sine(p.r0, w)?).with_noise(p.noise), d)
        }
        Mode::Noise => (
            base.with_reference(Reference::Zero).with_noise(p.noise),
            p.duration.unwrap_or(NOISE_DURATION),
        ),
        Mode::Trajectory => {
            let Reference::Multisine(parts) = default_trajectory() else {
                unreachable!("default trajectory is a multisine")
            };
            let scaled: Vec<SineComponent> = parts
                .iter()
                .map(|c| SineComponent {
                    amplitude: c.amplitude * p.r0,
                    ..*c
                })
                .collect();
            let slowest = scaled.iter().map(|c| c.freq_hz).fold(f64::INFINITY, f64::min);
            (
                base.with_reference(multisine_reference(&scaled)?).with_noise(p.noise),
                p.duration.unwrap_or(TRAJECTORY_PERIODS / slowest),
            )
        }
    };
    let res = simulate(&spec, duration, p.seed)?;
    if !res.settled {
        warn!("no steady state detected; statistics start at t = {} s", res.t_ss);
    }
    let m = res.error_metrics();
    let metrics = SimMetrics {
        mode,
        max_e: m.max_abs_e,
        rms_e: m.rms_e,
        t_ss: m.t_ss,
        settled: res.settled,
        s_inf_db: (mode == Mode::Track).then(|| db(m.max_abs_e / p.r0)),
        kp: spec.kp,
        resets: res.resets.len(),
        samples: res.len(),
        seed: p.seed,
    };
    with_output(Some(csv_path), |w| res.write_csv(w))?;
    write_json(p.metrics_out.as_deref(), &metrics)
}

pub fn sensitivity(p: &Project) -> Result<()> {
    let spec = p.loop_spec()?;
    let omegas = match &p.sweep {
        Some(s) => s.omegas(),
        None => resetkit::log_space(2.0 * PI, 2.0 * PI * 40.0, 20),
    };
    let points = sensitivity_sweep(&spec, &omegas, p.r0)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    with_output(p.out.as_deref(), |w| {
        writeln!(w, "f_hz,s_inf_db")?;
        for pt in &points {
            writeln!(w, "{},{}", pt.omega / (2.0 * PI), pt.magnitude_db())?;
        }
        Ok(())
    })
}
