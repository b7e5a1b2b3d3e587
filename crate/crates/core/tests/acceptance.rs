//! Acceptance run: one PASS/FAIL line per criterion, then a summary.
//!
//! Each criterion reports its measured value, tolerance and wall time against
//! the runtime budget. A criterion passes only if both are met.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sqw::fock::{integrate, order_check, series_propagate, FockDensityMatrix, Frame, IntegratorConfig, SeriesTruncation};
use sqw::grid::{convolve_grids, sample_function};
use sqw::harness::{self, GridConfig, InitialState, OracleConfig, Scenario, Tolerances, Units};
use sqw::propagator::{evolution_kernel, kernel_consistency, mean_trajectory, BathParams, DriveSpec};
use sqw::quasidist::{
    completeness_check, ordered_product, quasi_distribution, reconstruct_rho, verify_ordered_product,
    OrderedProductSpec, VERIFY_POINTS,
};
use sqw::{GaussianPhaseFunction, GridSpec, OrderingVector, Result};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Outcome {
    value: f64,
    tol: f64,
    pass: bool,
    detail: String,
}

impl Outcome {
    fn at_most(value: f64, tol: f64) -> Self {
        Self { value, tol, pass: value <= tol, detail: String::new() }
    }

    fn with(mut self, detail: String) -> Self {
        self.detail = detail;
        self
    }
}

fn benchmark_bath() -> BathParams {
    BathParams::new(0.1, 0.5, c(0.4, 0.0), 1.0).unwrap()
}

fn benchmark_drive() -> DriveSpec {
    DriveSpec::Cosine { f0: 0.2, omega: 1.0, phase: 0.0 }
}

fn kernel_reparameterization() -> Result<Outcome> {
    let bath = BathParams::new(0.1, 0.5, c(0.3, 0.2), 1.0)?;
    let spec = GridSpec::square(64, 3.0);
    let mut worst = 0.0f64;
    for t in [0.2, 1.0, 3.0] {
        worst = worst.max(kernel_consistency(&bath, t, &spec)?);
    }
    Ok(Outcome::at_most(worst, 1e-12))
}

fn kernel_normalization() -> Result<Outcome> {
    let sweep = [
        (0.05, c(0.0, 0.0)),
        (0.1, c(0.4, 0.0)),
        (0.2, c(0.3, 0.2)),
        (0.35, c(-0.5, 0.3)),
        (0.5, c(0.0, 0.6)),
        (0.8, c(0.7, -0.2)),
        (1.0, c(-0.2, -0.7)),
        (1.5, c(0.8, 0.1)),
        (2.0, c(0.5, 0.5)),
        (3.0, c(-0.85, 0.0)),
    ];
    let mut worst = 0.0f64;
    for (kt, m) in sweep {
        let bath = BathParams::new(0.1, 0.5, m, 1.0)?;
        let kernel = evolution_kernel(&bath, kt / bath.kappa)?;
        let g = sample_function(&kernel, &GridSpec::covering(&kernel, 256, 10.0)?)?;
        worst = worst.max((g.integral() - 1.0).norm());
    }
    Ok(Outcome::at_most(worst, 1e-8))
}

fn group_law() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(harness::DEFAULT_SEED);
    let mut draw = || {
        let c3 = rng.gen_range(0.5..2.0);
        let rho = 0.8 * c3 * rng.gen_range(0.0f64..1.0).sqrt();
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        OrderingVector::physical(rho * phi.cos(), rho * phi.sin(), c3)
    };
    let spec = GridSpec::square(256, 6.0);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let (r, s) = (draw(), draw());
        let a = sample_function(&GaussianPhaseFunction::kernel(r), &spec)?;
        let b = sample_function(&GaussianPhaseFunction::kernel(s), &spec)?;
        let conv = convolve_grids(&a, &b)?;
        let want = sample_function(&GaussianPhaseFunction::kernel(r + s), &conv.spec)?;
        worst = worst.max(conv.max_abs_diff(&want)?);
    }
    Ok(Outcome::at_most(worst, 5e-4))
}

fn end_to_end() -> Result<Outcome> {
    let report = harness::compare(&harness::benchmark())?;
    let linf = report.records.iter().map(|r| r.linf_wigner).fold(0.0, f64::max);
    let l2 = report.records.iter().map(|r| r.l2_wigner).fold(0.0, f64::max);
    let pass = linf <= 2e-3 && l2 <= 1e-3;
    Ok(Outcome { value: linf, tol: 2e-3, pass, detail: format!("L∞ {linf:.2e} (≤ 2e-3), L2 {l2:.2e} (≤ 1e-3)") })
}

fn first_moment() -> Result<Outcome> {
    let (bath, drive) = (benchmark_bath(), benchmark_drive());
    let alpha0 = c(1.0, 0.5);
    let rho0 = FockDensityMatrix::coherent(alpha0, 50)?;
    let times: Vec<f64> = (1..=10).map(|k| 0.3 * k as f64).collect();
    let cfg = IntegratorConfig::new(1e-3, 3.0, times.clone(), Frame::Rotating)?;
    let traj = integrate(&rho0, &bath, &drive, &cfg)?;
    let mut worst = 0.0f64;
    for rec in &traj.records {
        let want = mean_trajectory(alpha0, &bath, &drive, rec.t)?;
        worst = worst.max((rec.state.moment(0, 1) - want).norm());
    }
    Ok(Outcome::at_most(worst, 1e-4))
}

fn steady_state() -> Result<Outcome> {
    let sc = Scenario {
        name: "steady_state".into(),
        units: Units::Absolute,
        bath: benchmark_bath(),
        drive: DriveSpec::None,
        initial: InitialState::Coherent { alpha0: c(1.0, 0.5) },
        times: vec![50.0],
        grid: GridConfig { n: 96, half_extent: 5.0, center: c(0.0, 0.0) },
        oracle: OracleConfig { levels: 40, dt: 5e-3 },
        tolerances: Tolerances { linf: 1e-3, l2: None, moment: 1e-3, trace: 1e-6 },
    };
    let report = harness::compare(&sc)?;
    let rec = &report.records[0];
    let number = rec.moment_errors.iter().find(|e| (e.m, e.n) == (1, 1)).map(|e| e.oracle[0]).unwrap_or(f64::NAN);
    let dn = (number - sc.bath.nbar).abs();
    let pass = dn <= 1e-3 && rec.linf_wigner <= 1e-3;
    Ok(Outcome { value: dn, tol: 1e-3, pass, detail: format!("|<n> - nbar| {dn:.2e}, L∞ {:.2e} (≤ 1e-3)", rec.linf_wigner) })
}

fn series_solution() -> Result<Outcome> {
    let bath = BathParams::new(0.1, 0.3, c(0.2, 0.0), 1.0)?;
    let rho0 = FockDensityMatrix::coherent(c(1.0, 0.5), 30)?;
    let t = 0.5;
    let trunc = SeriesTruncation { mn_max: 12, pq_max: 30, ..SeriesTruncation::default() };
    let series = series_propagate(&rho0, &bath, &DriveSpec::None, t, &trunc)?;
    let cfg = IntegratorConfig::new(1e-3, t, vec![t], Frame::Rotating)?;
    let ode = integrate(&rho0, &bath, &DriveSpec::None, &cfg)?;
    let dist = series.state.trace_distance(&ode.last().state)?;
    let dtr = (series.trace - 1.0).abs();
    let pass = dist <= 1e-4 && dtr <= 1e-4;
    Ok(Outcome { value: dist, tol: 1e-4, pass, detail: format!("trace distance {dist:.2e}, |Tr - 1| {dtr:.2e} (≤ 1e-4)") })
}

fn quasi_round_trip() -> Result<Outcome> {
    let rho = FockDensityMatrix::thermal(0.4, 12)?;
    let r = OrderingVector::isotropic(0.5);
    let w = quasi_distribution(&rho, &r, &GridSpec::square(128, 6.0))?;
    let back = reconstruct_rho(&w, &r, 12)?;
    Ok(Outcome::at_most(back.frobenius_distance(&rho)?, 1e-3))
}

fn ordering_rule() -> Result<Outcome> {
    let orderings = [
        OrderingVector::zero(),
        OrderingVector::isotropic(1.0),
        OrderingVector::physical(0.4, 0.4, 1.0),
    ];
    let mut worst = 0.0f64;
    for r in orderings {
        for (m, n) in [(0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (2, 0)] {
            let spec = OrderedProductSpec::new(m, n, r)?;
            let op = ordered_product(&spec, 16)?;
            worst = worst.max(verify_ordered_product(&spec, &op, &VERIFY_POINTS)?);
        }
    }
    Ok(Outcome::at_most(worst, 1e-3))
}

fn completeness() -> Result<Outcome> {
    let spec = GridSpec::square(100, 5.0);
    let a = completeness_check(&OrderingVector::zero(), 16, &spec)?;
    let b = completeness_check(&OrderingVector::isotropic(1.0), 16, &spec)?;
    Ok(Outcome::at_most(a.max(b), 1e-3).with(format!("r=0 {a:.2e}, r=(0,0,1) {b:.2e}")))
}

fn rk4_order() -> Result<Outcome> {
    let rho0 = FockDensityMatrix::coherent(c(1.0, 0.5), 50)?;
    let oc = order_check(&rho0, &benchmark_bath(), &benchmark_drive(), 2.0, 0.05, Frame::Rotating)?;
    let dev = (oc.ratio / 16.0 - 1.0).abs();
    Ok(Outcome::at_most(dev, 0.2).with(format!("ratio {:.3} at dt {} (errors {:.2e}, {:.2e})", oc.ratio, oc.dt, oc.err_dt, oc.err_half)))
}

type Criterion = (&'static str, u64, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 11] = [
        ("kernel reparameterization", 1, kernel_reparameterization),
        ("kernel normalization", 5, kernel_normalization),
        ("convolution group law", 30, group_law),
        ("end-to-end equivalence", 120, end_to_end),
        ("first-moment law", 60, first_moment),
        ("steady state", 60, steady_state),
        ("series solution", 60, series_solution),
        ("quasi-distribution round trip", 120, quasi_round_trip),
        ("ordering rule", 120, ordering_rule),
        ("completeness", 60, completeness),
        ("RK4 order", 120, rk4_order),
    ];
    let mut failed = Vec::new();
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let line = match result {
            Ok(o) => {
                let pass = o.pass && in_time;
                if !pass {
                    failed.push(k + 1);
                }
                let detail = if o.detail.is_empty() { format!("{:.3e} (tol {:.0e})", o.value, o.tol) } else { o.detail };
                format!("{} #{:<2} {name}: {detail}; {:.2}s of {budget}s", if pass { "PASS" } else { "FAIL" }, k + 1, elapsed.as_secs_f64())
            }
            Err(e) => {
                failed.push(k + 1);
                format!("FAIL #{:<2} {name}: error: {e}", k + 1)
            }
        };
        println!("{line}");
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        println!("failing: {failed:?}");
        std::process::exit(1);
    }
}
