//! Master equation in a truncated basis, integrated with fixed-step RK4.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ops::{axpy, CMatrix};
use super::state::{FockDensityMatrix, Monitors, DEFAULT_TAIL_THRESHOLD};
use crate::error::{Error, Result};
use crate::propagator::{BathParams, DriveSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Entries larger than this abort the integration.
pub const BLOW_UP_LIMIT: f64 = 1e6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Lab,
    #[default]
    Rotating,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameDirection {
    /// `ρ → e^{iΩt n} ρ e^{−iΩt n}`
    ToRotating,
    ToLab,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_times: Vec<f64>,
    pub frame: Frame,
    pub tail_threshold: f64,
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64, mut record_times: Vec<f64>, frame: Frame) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::NegativeTime(t_end));
        }
        if t_end > 0.0 && dt > t_end {
            return Err(Error::InvalidParameter(format!("dt = {dt} exceeds t_end = {t_end}")));
        }
        if record_times.iter().any(|&t| !(0.0..=t_end).contains(&t)) {
            return Err(Error::InvalidParameter("record times must lie in [0, t_end]".into()));
        }
        record_times.sort_by(|a, b| a.total_cmp(b));
        record_times.dedup();
        if record_times.is_empty() {
            record_times.push(t_end);
        }
        Ok(Self { dt, t_end, record_times, frame, tail_threshold: DEFAULT_TAIL_THRESHOLD })
    }

    /// `min(1e-3, 0.05/Ω, 0.05/(κ(2n̄+1)))`.
    pub fn default_dt(bath: &BathParams) -> f64 {
        let mut dt = 1e-3f64;
        if bath.omega != 0.0 {
            dt = dt.min(0.05 / bath.omega.abs());
        }
        dt.min(0.05 / (bath.kappa * (2.0 * bath.nbar + 1.0)))
    }
}

/// Coefficients of the generator at one instant: `H = ω n + c_a a + c_ad a†`, squeezing `m`.
#[derive(Clone, Copy, Debug)]
struct Generator {
    omega: f64,
    c_a: Complex64,
    c_ad: Complex64,
    kappa: f64,
    nbar: f64,
    m: Complex64,
}

impl Generator {
    fn at(frame: Frame, bath: &BathParams, drive: &DriveSpec, t: f64) -> Self {
        let f = drive.value(t);
        match frame {
            Frame::Lab => Self { omega: bath.omega, c_a: f.into(), c_ad: f.into(), kappa: bath.kappa, nbar: bath.nbar, m: bath.m },
            Frame::Rotating => {
                let ph = Complex64::from_polar(1.0, bath.omega * t);
                Self {
                    omega: 0.0,
                    c_a: f * ph.conj(),
                    c_ad: f * ph,
                    kappa: bath.kappa,
                    nbar: bath.nbar,
                    m: bath.m * ph * ph,
                }
            }
        }
    }
}

/// Right-hand side, element by element, reproducing the truncated matrix products exactly.
fn rhs_into(rho: &CMatrix, out: &mut CMatrix, g: &Generator, s: &[f64]) {
    let n = rho.nrows();
    let r = rho.as_slice();
    let at = |i: isize, j: isize| -> Complex64 {
        if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
            Complex64::new(0.0, 0.0)
        } else {
            r[i as usize + j as usize * n]
        }
    };
    // s[k] = √k, padded with zeros above n − 1.
    let sq = |k: isize| if k < 0 { 0.0 } else { s[k as usize] };
    // Diagonal of the truncated a a†.
    let aad = |k: usize| if k + 1 < n { (k + 1) as f64 } else { 0.0 };
    let kd = g.kappa * (g.nbar + 1.0);
    let ku = g.kappa * g.nbar;
    let km = g.kappa * g.m;
    let kmc = g.kappa * g.m.conj();
    let o = out.as_mut_slice();
    for j in 0..n {
        let jj = j as isize;
        for i in 0..n {
            let ii = i as isize;
            let p = r[i + j * n];
            let h_rho = g.omega * i as f64 * p + g.c_a * sq(ii + 1) * at(ii + 1, jj) + g.c_ad * sq(ii) * at(ii - 1, jj);
            let rho_h = g.omega * j as f64 * p + g.c_a * at(ii, jj - 1) * sq(jj) + g.c_ad * at(ii, jj + 1) * sq(jj + 1);
            let mut v = -I * (h_rho - rho_h);
            v += kd * (2.0 * sq(ii + 1) * sq(jj + 1) * at(ii + 1, jj + 1) - (i + j) as f64 * p);
            v += ku * (2.0 * sq(ii) * sq(jj) * at(ii - 1, jj - 1) - (aad(i) + aad(j)) * p);
            v += km
                * (2.0 * sq(ii) * sq(jj + 1) * at(ii - 1, jj + 1)
                    - sq(ii) * sq(ii - 1) * at(ii - 2, jj)
                    - at(ii, jj + 2) * sq(jj + 1) * sq(jj + 2));
            v += kmc
                * (2.0 * sq(ii + 1) * sq(jj) * at(ii + 1, jj - 1)
                    - sq(ii + 1) * sq(ii + 2) * at(ii + 2, jj)
                    - at(ii, jj - 2) * sq(jj - 1) * sq(jj));
            o[i + j * n] = v;
        }
    }
}

fn sqrt_table(n: usize) -> Vec<f64> {
    (0..n + 3).map(|k| if k < n { (k as f64).sqrt() } else { 0.0 }).collect()
}

/// `dρ/dt` in the laboratory frame.
pub fn lindblad_rhs(rho: &FockDensityMatrix, t: f64, bath: &BathParams, drive: &DriveSpec) -> CMatrix {
    lindblad_rhs_in(Frame::Lab, rho, t, bath, drive)
}

/// `dρ/dt` in either frame.
pub fn lindblad_rhs_in(frame: Frame, rho: &FockDensityMatrix, t: f64, bath: &BathParams, drive: &DriveSpec) -> CMatrix {
    let n = rho.dim();
    let mut out = CMatrix::zeros(n, n);
    rhs_into(&rho.rho, &mut out, &Generator::at(frame, bath, drive, t), &sqrt_table(n));
    out
}

/// Conjugation by `e^{±iΩt n}`.
pub fn rotate_frame(rho: &FockDensityMatrix, omega: f64, t: f64, direction: FrameDirection) -> FockDensityMatrix {
    let sign = match direction {
        FrameDirection::ToRotating => 1.0,
        FrameDirection::ToLab => -1.0,
    };
    let n = rho.dim();
    let mut out = rho.rho.clone();
    for j in 0..n {
        for i in 0..n {
            out[(i, j)] *= Complex64::from_polar(1.0, sign * omega * t * (i as f64 - j as f64));
        }
    }
    FockDensityMatrix { rho: out }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub state: FockDensityMatrix,
    pub monitors: Monitors,
    pub truncation_warning: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub frame: Frame,
    pub records: Vec<TrajectoryRecord>,
}

impl Trajectory {
    pub fn at(&self, t: f64) -> Option<&TrajectoryRecord> {
        self.records.iter().find(|r| (r.t - t).abs() <= 1e-12 * t.abs().max(1.0))
    }

    pub fn last(&self) -> &TrajectoryRecord {
        self.records.last().expect("trajectory has at least one record")
    }

    /// One JSON object per record: `{t, trace, herm_drift, min_eig, tail, moments}`.
    pub fn write_jsonl<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for r in &self.records {
            let mut moments = serde_json::Map::new();
            for (m, n) in [(0, 1), (1, 0), (1, 1), (0, 2), (2, 0)] {
                let v = r.state.moment(m, n);
                moments.insert(format!("m{m}n{n}"), serde_json::json!([v.re, v.im]));
            }
            let line = serde_json::json!({
                "t": r.t,
                "trace": r.monitors.trace,
                "herm_drift": r.monitors.herm_drift,
                "min_eig": r.monitors.min_eig,
                "tail": r.monitors.tail,
                "truncation_warning": r.truncation_warning,
                "moments": moments,
            });
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Fixed-step RK4 from `t = 0`. Steps are shortened to land on record times.
pub fn integrate(rho0: &FockDensityMatrix, bath: &BathParams, drive: &DriveSpec, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let n = rho0.dim();
    let s = sqrt_table(n);
    let mut rho = rho0.rho.clone();
    let mut k1 = CMatrix::zeros(n, n);
    let mut k2 = CMatrix::zeros(n, n);
    let mut k3 = CMatrix::zeros(n, n);
    let mut k4 = CMatrix::zeros(n, n);
    let mut tmp = CMatrix::zeros(n, n);
    let gen = |t: f64| Generator::at(cfg.frame, bath, drive, t);
    let mut t = 0.0;
    let mut records = Vec::with_capacity(cfg.record_times.len());
    for &target in &cfg.record_times {
        let mut steps = 0u64;
        let start = t;
        // Steps of exactly dt measured from the previous record; the last one is shortened.
        loop {
            let next = start + (steps + 1) as f64 * cfg.dt;
            let t_next = if next >= target - 1e-12 * target.max(1.0) { target } else { next };
            if t >= target {
                break;
            }
            let h = t_next - t;
            rhs_into(&rho, &mut k1, &gen(t), &s);
            tmp.copy_from(&rho);
            axpy(&mut tmp, Complex64::new(0.5 * h, 0.0), &k1);
            rhs_into(&tmp, &mut k2, &gen(t + 0.5 * h), &s);
            tmp.copy_from(&rho);
            axpy(&mut tmp, Complex64::new(0.5 * h, 0.0), &k2);
            rhs_into(&tmp, &mut k3, &gen(t + 0.5 * h), &s);
            tmp.copy_from(&rho);
            axpy(&mut tmp, Complex64::new(h, 0.0), &k3);
            rhs_into(&tmp, &mut k4, &gen(t + h), &s);
            k2 += &k3;
            k1 += &k4;
            axpy(&mut k1, Complex64::new(2.0, 0.0), &k2);
            axpy(&mut rho, Complex64::new(h / 6.0, 0.0), &k1);
            t = t_next;
            steps += 1;
            let max_entry = rho.iter().fold(0.0f64, |m, v| if v.re.is_finite() && v.im.is_finite() { m.max(v.norm()) } else { f64::INFINITY });
            if max_entry > BLOW_UP_LIMIT {
                return Err(Error::BlowUp { t, max_entry });
            }
        }
        let state = FockDensityMatrix { rho: rho.clone() };
        let monitors = state.monitors();
        let truncation_warning = monitors.truncated(cfg.tail_threshold);
        if truncation_warning {
            log::warn!("tail population {:.3e} at t = {target} exceeds {:.1e}", monitors.tail, cfg.tail_threshold);
        }
        records.push(TrajectoryRecord { t: target, state, monitors, truncation_warning });
    }
    Ok(Trajectory { frame: cfg.frame, records })
}

/// Convergence of the end state under step halving, against a `dt/16` reference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrderCheck {
    pub dt: f64,
    pub t_end: f64,
    /// Frobenius distance to the reference at `dt` and `dt/2`.
    pub err_dt: f64,
    pub err_half: f64,
    /// `err_dt / err_half`, 16 for a fourth-order method.
    pub ratio: f64,
}

pub fn order_check(
    rho0: &FockDensityMatrix,
    bath: &BathParams,
    drive: &DriveSpec,
    t_end: f64,
    dt: f64,
    frame: Frame,
) -> Result<OrderCheck> {
    let end = |h: f64| -> Result<FockDensityMatrix> {
        let cfg = IntegratorConfig::new(h, t_end, vec![t_end], frame)?;
        Ok(integrate(rho0, bath, drive, &cfg)?.last().state.clone())
    };
    let reference = end(dt / 16.0)?;
    let err_dt = end(dt)?.frobenius_distance(&reference)?;
    let err_half = end(dt / 2.0)?.frobenius_distance(&reference)?;
    Ok(OrderCheck { dt, t_end, err_dt, err_half, ratio: err_dt / err_half })
}
