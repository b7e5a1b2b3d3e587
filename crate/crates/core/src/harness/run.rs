use std::path::PathBuf;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use super::{time_tag, write_atomic, write_json, RunOptions, Scenario};
use crate::error::{Error, Result};
use crate::fock::lindblad::TrajectoryRecord;
use crate::fock::{integrate, order_check, rotate_frame, wigner_grid, FockDensityMatrix, Frame, FrameDirection, IntegratorConfig};
use crate::grid::{sample_function, GridSpec, PhaseSpaceGrid};
use crate::kernel::{GaussianPhaseFunction, OrderingVector};
use crate::propagator::{evolution_kernel, kernel_discriminant, propagate_gaussian, propagate_grid, PropagatorCoefficients};
use crate::quasidist::{
    completeness_report, ordered_product, quasi_distribution, reconstruct_rho, spot_check, verify_ordered_product,
    OrderedProductSpec, VERIFY_POINTS,
};

/// `(m, n)` of the compared moments `⟨a†^m a^n⟩`.
pub const MOMENT_ORDERS: [(usize, usize); 5] = [(0, 1), (1, 0), (1, 1), (0, 2), (2, 0)];

/// Mass deviation tolerated by `--verify` on emitted grids.
const MASS_TOL: f64 = 1e-4;
/// Normalization deviation tolerated by `--verify` on sampled kernels.
const KERNEL_MASS_TOL: f64 = 1e-8;
/// Kernel widths covered by an emitted kernel grid.
const KERNEL_WIDTHS: f64 = 8.0;
/// The order check uses at most `t_end / ORDER_CHECK_STEPS` as its step.
/// Finer steps put the end-state error on the roundoff floor.
pub const ORDER_CHECK_STEPS: f64 = 40.0;

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Rotating-frame solution of the phase-space propagator at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticState {
    pub t: f64,
    /// Present when the initial state is in the Gaussian class.
    pub gaussian: Option<GaussianPhaseFunction>,
    pub grid: PhaseSpaceGrid,
}

/// Normal-ordered moments `⟨a†^m a^n⟩` for [`MOMENT_ORDERS`] of a Gaussian Wigner function.
pub fn gaussian_moments(f: &GaussianPhaseFunction) -> [Complex64; 5] {
    let mom = f.ordering.moments();
    let (mu, s) = (f.mean, f.scale);
    let mean = mu / s;
    let sq = (mom.sq + mu * mu) / (s * s);
    let conj_sq = (mom.conj_sq + mu.conj() * mu.conj()) / (s * s);
    let abs2 = (mom.abs2 + mu.norm_sqr()) / (s * s);
    [mean, mean.conj(), abs2 - 0.5, sq, conj_sq]
}

/// Moments of a sampled Wigner function, by quadrature.
pub fn grid_moments(w: &PhaseSpaceGrid) -> [Complex64; 5] {
    let s = &w.spec;
    let mut acc = [Complex64::new(0.0, 0.0); 6];
    for ix in 0..s.nx {
        for iy in 0..s.ny {
            let a = s.point(ix, iy);
            let v = w.get(ix, iy);
            let terms = [v, v * a, v * a.conj(), v * a.norm_sqr(), v * a * a, v * a.conj() * a.conj()];
            acc.iter_mut().zip(terms).for_each(|(x, t)| *x += t);
        }
    }
    let m = acc[0];
    [acc[1] / m, acc[2] / m, acc[3] / m - 0.5, acc[4] / m, acc[5] / m]
}

fn oracle_moments(rho: &FockDensityMatrix) -> [Complex64; 5] {
    MOMENT_ORDERS.map(|(m, n)| rho.moment(m, n))
}

/// The propagator's prediction at every scenario time (rotating frame, scenario grid).
pub fn analytic_states(sc: &Scenario) -> Result<Vec<AnalyticState>> {
    let sc = sc.absolute();
    let spec = sc.grid.spec();
    match sc.initial.gaussian()? {
        Some(f0) => sc
            .times
            .iter()
            .map(|&t| {
                let f = propagate_gaussian(&f0, &sc.bath, &sc.drive, t)?;
                Ok(AnalyticState { t, gaussian: Some(f), grid: sample_function(&f, &spec)? })
            })
            .collect(),
        None => {
            let w0 = wigner_grid(&sc.initial.density_matrix(sc.oracle.levels)?, &spec);
            sc.times
                .iter()
                .map(|&t| Ok(AnalyticState { t, gaussian: None, grid: propagate_grid(&w0, &sc.bath, &sc.drive, t, &spec)? }))
                .collect()
        }
    }
}

fn oracle_records(sc: &Scenario) -> Result<Vec<TrajectoryRecord>> {
    let sc = sc.absolute();
    let rho0 = sc.initial.density_matrix(sc.oracle.levels)?;
    let t_end = sc.times.last().copied().unwrap_or(0.0);
    let dt = if t_end > 0.0 { sc.oracle.dt.min(t_end) } else { sc.oracle.dt };
    let cfg = IntegratorConfig::new(dt, t_end, sc.times.clone(), Frame::Rotating)?;
    let traj = integrate(&rho0, &sc.bath, &sc.drive, &cfg)?;
    Ok(traj.records)
}

/// Rotating-frame grid shown in the requested frame: `W_lab(α) = W_rot(e^{iΩt} α)`.
fn display_grid(state: &AnalyticState, sc: &Scenario, frame: Frame) -> Result<PhaseSpaceGrid> {
    if frame == Frame::Rotating {
        return Ok(state.grid.clone());
    }
    let theta = sc.bath.omega * state.t;
    match &state.gaussian {
        Some(f) => sample_function(&f.in_rotated_coordinates(theta), &state.grid.spec),
        None => {
            let rot = Complex64::from_polar(1.0, theta);
            Ok(PhaseSpaceGrid::from_fn(state.grid.spec, |a| state.grid.interpolate(rot * a).unwrap_or_default()))
        }
    }
}

fn grid_bytes(g: &PhaseSpaceGrid) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    g.write_csv(&mut buf)?;
    Ok(buf)
}

/// Coefficient JSON and sampled evolution kernel for each of `times`.
pub fn run_kernel(sc: &Scenario, times: &[f64], opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let abs = sc.absolute();
    let dir = opts.scenario_dir(&sc.name)?;
    let scale = if sc.units == super::Units::Omega { 1.0 / sc.bath.omega } else { 1.0 };
    let mut written = Vec::new();
    for &t_in in times {
        let t = t_in * scale;
        let coeffs = PropagatorCoefficients::compute(&abs.bath, &abs.drive, t)?;
        let mut doc = coeffs.to_json();
        doc["discriminant"] = json!(kernel_discriminant(&abs.bath, t)?);
        let tag = time_tag(t_in);
        if coeffs.ordering.is_zero() {
            doc["kernel"] = json!("delta");
        } else {
            let kernel = evolution_kernel(&abs.bath, t)?;
            let spec = GridSpec::covering(&kernel, sc.grid.n, KERNEL_WIDTHS)?;
            let g = sample_function(&kernel, &spec)?;
            let mass = g.integral();
            doc["kernel"] = json!("sampled");
            doc["grid_integral"] = json!(pair(mass));
            if opts.verify && (mass - 1.0).norm() > KERNEL_MASS_TOL {
                return Err(Error::VerificationFailed(format!("kernel at t = {t} integrates to {mass}")));
            }
            let path = dir.join(format!("kernel_{tag}.csv"));
            write_atomic(&path, &grid_bytes(&g)?)?;
            written.push(path);
        }
        let path = dir.join(format!("kernel_{tag}.json"));
        write_json(&path, &doc)?;
        written.push(path);
    }
    Ok(written)
}

/// Per-time Wigner grids from the phase-space propagator, plus a JSON summary.
pub fn run_propagate(sc: &Scenario, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let abs = sc.absolute();
    let dir = opts.scenario_dir(&sc.name)?;
    let states = analytic_states(sc)?;
    let mut written = Vec::new();
    let mut records = Vec::new();
    for (state, &t_in) in states.iter().zip(&sc.times) {
        let mass = state.grid.integral();
        if opts.verify && (mass - 1.0).norm() > MASS_TOL {
            return Err(Error::VerificationFailed(format!("grid at t = {} carries mass {mass}", state.t)));
        }
        let shown = display_grid(state, &abs, opts.frame)?;
        let path = dir.join(format!("wigner_analytic_{}.csv", time_tag(t_in)));
        write_atomic(&path, &grid_bytes(&shown)?)?;
        written.push(path);
        let coeffs = PropagatorCoefficients::compute(&abs.bath, &abs.drive, state.t)?;
        records.push(json!({
            "t": t_in,
            "coefficients": coeffs.to_json(),
            "gaussian": state.gaussian,
            "mass": pair(mass),
        }));
    }
    let path = dir.join("propagate.json");
    write_json(
        &path,
        &json!({
            "scenario": sc.name,
            "path": if states.first().is_none_or(|s| s.gaussian.is_some()) { "gaussian" } else { "grid" },
            "frame": opts.frame,
            "records": records,
        }),
    )?;
    written.push(path);
    Ok(written)
}

/// Master-equation trajectory (JSON lines) and oracle Wigner grids.
pub fn run_oracle(sc: &Scenario, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let abs = sc.absolute();
    let dir = opts.scenario_dir(&sc.name)?;
    let records = oracle_records(sc)?;
    let spec = sc.grid.spec();
    let mut written = Vec::new();

    let mut lines = Vec::new();
    let traj = crate::fock::Trajectory { frame: Frame::Rotating, records: records.clone() };
    traj.write_jsonl(&mut lines)?;
    let path = dir.join("trajectory.jsonl");
    write_atomic(&path, &lines)?;
    written.push(path);

    for (rec, &t_in) in records.iter().zip(&sc.times) {
        let state = match opts.frame {
            Frame::Rotating => rec.state.clone(),
            Frame::Lab => rotate_frame(&rec.state, abs.bath.omega, rec.t, FrameDirection::ToLab),
        };
        let path = dir.join(format!("wigner_oracle_{}.csv", time_tag(t_in)));
        write_atomic(&path, &grid_bytes(&wigner_grid(&state, &spec))?)?;
        written.push(path);
    }

    if opts.order_check {
        let t_end = abs.times.last().copied().unwrap_or(0.0);
        if t_end > 0.0 {
            let rho0 = abs.initial.density_matrix(abs.oracle.levels)?;
            let oc = order_check(&rho0, &abs.bath, &abs.drive, t_end, abs.oracle.dt.max(t_end / ORDER_CHECK_STEPS).min(t_end), Frame::Rotating)?;
            let path = dir.join("order_check.json");
            write_json(&path, &serde_json::to_value(oc)?)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentError {
    pub m: usize,
    pub n: usize,
    pub analytic: [f64; 2],
    pub oracle: [f64; 2],
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRecord {
    pub t: f64,
    pub linf_wigner: f64,
    pub l2_wigner: f64,
    pub moment_errors: Vec<MomentError>,
    pub trace_drift: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub scenario: String,
    /// `"gaussian"` or `"grid"`.
    pub path: String,
    pub records: Vec<ComparisonRecord>,
    pub pass: bool,
}

/// Rotating-frame comparison of the propagator against the oracle at every scenario time.
pub fn compare(sc: &Scenario) -> Result<ComparisonReport> {
    let states = analytic_states(sc)?;
    let oracle = oracle_records(sc)?;
    let spec = sc.grid.spec();
    let tol = &sc.tolerances;
    let mut records = Vec::with_capacity(states.len());
    for (state, (rec, &t_in)) in states.iter().zip(oracle.iter().zip(&sc.times)) {
        let w_oracle = wigner_grid(&rec.state, &spec);
        let linf = state.grid.max_abs_diff(&w_oracle)?;
        let l2 = state.grid.l2_diff(&w_oracle)?;
        let predicted = match &state.gaussian {
            Some(f) => gaussian_moments(f),
            None => grid_moments(&state.grid),
        };
        let observed = oracle_moments(&rec.state);
        let moment_errors: Vec<MomentError> = MOMENT_ORDERS
            .iter()
            .zip(predicted.iter().zip(&observed))
            .map(|(&(m, n), (p, o))| MomentError { m, n, analytic: pair(*p), oracle: pair(*o), error: (p - o).norm() })
            .collect();
        let trace_drift = (rec.state.trace() - 1.0).norm();
        let worst_moment = moment_errors.iter().map(|e| e.error).fold(0.0, f64::max);
        let pass = linf <= tol.linf
            && tol.l2.is_none_or(|l| l2 <= l)
            && worst_moment <= tol.moment
            && trace_drift <= tol.trace;
        records.push(ComparisonRecord { t: t_in, linf_wigner: linf, l2_wigner: l2, moment_errors, trace_drift, pass });
    }
    let pass = records.iter().all(|r| r.pass);
    let path = if states.first().is_none_or(|s| s.gaussian.is_some()) { "gaussian" } else { "grid" };
    Ok(ComparisonReport { scenario: sc.name.clone(), path: path.into(), records, pass })
}

/// [`compare`], with the report written to `compare.json`.
pub fn run_compare(sc: &Scenario, opts: &RunOptions) -> Result<ComparisonReport> {
    let report = compare(sc)?;
    let dir = opts.scenario_dir(&sc.name)?;
    write_json(&dir.join("compare.json"), &serde_json::to_value(&report)?)?;
    Ok(report)
}

/// Quasi-distribution of the initial state for ordering `r`, with the
/// reconstruction, completeness and ordered-product checks of the toolkit.
pub fn run_quasidist(sc: &Scenario, r: &OrderingVector, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let dir = opts.scenario_dir(&sc.name)?;
    let n = sc.oracle.levels;
    let rho = sc.initial.density_matrix(n)?;
    let spec = sc.grid.spec();
    let w = quasi_distribution(&rho, r, &spec)?;
    let mut written = Vec::new();
    let path = dir.join("quasi.csv");
    write_atomic(&path, &grid_bytes(&w)?)?;
    written.push(path);

    let spot = spot_check(&rho, r, &w)?;
    let reconstruction = match reconstruct_rho(&w, r, n) {
        Ok(back) => json!({ "frobenius": back.frobenius_distance(&rho)?, "trace": pair(back.trace()) }),
        Err(e) => {
            log::warn!("{}: reconstruction skipped: {e}", sc.name);
            json!({ "error": e.to_string() })
        }
    };
    let completeness = completeness_report(r, n, &spec)?;
    let mut products = Vec::new();
    for (m, k) in [(0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (2, 0)] {
        let ps = OrderedProductSpec::new(m, k, *r)?;
        let op = ordered_product(&ps, n)?;
        let residual = verify_ordered_product(&ps, &op, &VERIFY_POINTS)?;
        let mut buf = Vec::new();
        ps.write_csv(&op, &mut buf)?;
        let path = dir.join(format!("ordered_m{m}_n{k}.csv"));
        write_atomic(&path, &buf)?;
        written.push(path);
        products.push(json!({ "m": m, "n": k, "residual": residual }));
    }
    let path = dir.join("quasidist.json");
    write_json(
        &path,
        &json!({
            "ordering": r,
            "N": n,
            "integral": pair(w.integral()),
            "spot_check": spot,
            "reconstruction": reconstruction,
            "completeness": completeness,
            "ordered_products": products,
        }),
    )?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::ComplexPoint;

    #[test]
    fn gaussian_moments_of_coherent_state() {
        let a0 = ComplexPoint::new(0.7, -0.2);
        let m = gaussian_moments(&GaussianPhaseFunction::coherent(a0));
        assert!((m[0] - a0).norm() < 1e-15);
        assert!((m[2] - a0.norm_sqr()).norm() < 1e-15);
        assert!((m[3] - a0 * a0).norm() < 1e-15);
    }

    #[test]
    fn grid_and_gaussian_moments_agree() {
        let f = GaussianPhaseFunction::new(ComplexPoint::new(0.3, 0.4), OrderingVector::physical(0.3, -0.2, 1.5), 1.0, 1.0).unwrap();
        let g = sample_function(&f, &GridSpec::square(128, 7.0)).unwrap();
        let (a, b) = (gaussian_moments(&f), grid_moments(&g));
        for k in 0..5 {
            assert!((a[k] - b[k]).norm() < 1e-9, "{k}: {} vs {}", a[k], b[k]);
        }
    }
}
