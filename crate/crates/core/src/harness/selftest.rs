use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{lindblad_rhs, order_check, CMatrix, FockDensityMatrix, Frame};
use crate::grid::{convolve_grids, sample_function, GridSpec, PhaseSpaceGrid};
use crate::kernel::{gaussian_integral, GaussianIntegralParams, GaussianPhaseFunction, OrderingVector};
use crate::propagator::{kernel_consistency, BathParams, DriveSpec};
use crate::quasidist::{ordered_product, verify_ordered_product, OrderedProductSpec, VERIFY_POINTS};

/// Checks run by [`run_selftest`], in order.
pub const CHECK_NAMES: [&str; 6] =
    ["kernel_consistency", "group_law", "gaussian_integral", "rk4_order", "ordering_rule", "rhs_structure"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestRow {
    pub name: &'static str,
    /// Error measure; the check passes when `value <= tol`.
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub rows: Vec<SelftestRow>,
}

impl SelftestReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Plain-text table, one row per check.
    pub fn table(&self) -> String {
        let mut s = format!("{:<20} {:>12} {:>10}  result\n", "check", "value", "tol");
        for r in &self.rows {
            s += &format!("{:<20} {:>12.3e} {:>10.1e}  {}\n", r.name, r.value, r.tol, if r.pass { "PASS" } else { "FAIL" });
        }
        s
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_kernel_consistency() -> Result<f64> {
    let bath = BathParams::new(0.1, 0.5, c(0.3, 0.2), 1.0)?;
    let spec = GridSpec::square(32, 3.0);
    [0.2, 1.0, 3.0].iter().try_fold(0.0f64, |m, &t| Ok(m.max(kernel_consistency(&bath, t, &spec)?)))
}

fn check_group_law() -> Result<f64> {
    let r = OrderingVector::new(c(0.2, 0.1), c(-0.1, 0.15), c(1.0, 0.0));
    let s = OrderingVector::new(c(-0.1, 0.0), c(0.2, -0.05), c(0.8, 0.0));
    let spec = GridSpec::square(64, 5.0);
    let a = sample_function(&GaussianPhaseFunction::kernel(r), &spec)?;
    let b = sample_function(&GaussianPhaseFunction::kernel(s), &spec)?;
    let conv = convolve_grids(&a, &b)?;
    let want = sample_function(&GaussianPhaseFunction::kernel(r + s), &conv.spec)?;
    conv.max_abs_diff(&want)
}

fn check_gaussian_integral() -> Result<f64> {
    let p = GaussianIntegralParams {
        varsigma: c(-1.0, 0.2),
        xi: c(0.3, 0.1),
        eta: c(-0.2, 0.2),
        f: c(0.2, 0.0),
        g: c(0.0, 0.1),
    };
    let exact = gaussian_integral(&p)?;
    let integrand = |z: Complex64| (p.varsigma * z.norm_sqr() + p.xi * z + p.eta * z.conj() + p.f * z * z + p.g * z.conj() * z.conj()).exp();
    let numeric = PhaseSpaceGrid::from_fn(GridSpec::square(160, 9.0), integrand).integral();
    Ok((numeric - exact).norm() / exact.norm())
}

/// `|ratio/16 − 1|` for the end-state error under step halving.
fn check_rk4_order() -> Result<f64> {
    let bath = BathParams::new(0.1, 0.5, c(0.4, 0.0), 1.0)?;
    let drive = DriveSpec::Cosine { f0: 0.2, omega: 1.0, phase: 0.0 };
    let rho0 = FockDensityMatrix::coherent(c(1.0, 0.5), 20)?;
    let oc = order_check(&rho0, &bath, &drive, 1.0, 0.1, Frame::Rotating)?;
    Ok((oc.ratio / 16.0 - 1.0).abs())
}

fn check_ordering_rule() -> Result<f64> {
    let r = OrderingVector::isotropic(1.0);
    let spec = OrderedProductSpec::new(1, 1, r)?;
    let op = ordered_product(&spec, 16)?;
    verify_ordered_product(&spec, &op, &VERIFY_POINTS)
}

/// Worst of `|Tr L[ρ]|` and `‖L[ρ] − L[ρ]†‖` over seeded random states.
fn check_rhs_structure(seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bath = BathParams::new(0.13, 0.4, c(0.2, -0.15), 0.9)?;
    let drive = DriveSpec::Cosine { f0: 0.3, omega: 1.1, phase: 0.2 };
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let n = rng.gen_range(4..16);
        let g = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let rho = &g * g.adjoint();
        let tr = rho.trace();
        let rho = FockDensityMatrix::new(rho / tr)?;
        let t = rng.gen_range(0.0..5.0);
        let d = lindblad_rhs(&rho, t, &bath, &drive);
        worst = worst.max(d.trace().norm()).max((&d - d.adjoint()).camax());
    }
    Ok(worst)
}

type Check = (&'static str, f64, Box<dyn Fn() -> Result<f64>>);

/// Runs the embedded invariant suite. `corrupt` names a check whose measured
/// value is pushed past its tolerance, to exercise the failure path.
pub fn run_selftest(seed: u64, corrupt: Option<&str>) -> Result<SelftestReport> {
    if let Some(name) = corrupt {
        if !CHECK_NAMES.contains(&name) {
            return Err(Error::InvalidParameter(format!("unknown self-test check {name:?}")));
        }
    }
    let checks: [Check; 6] = [
        ("kernel_consistency", 1e-12, Box::new(check_kernel_consistency)),
        ("group_law", 5e-4, Box::new(check_group_law)),
        ("gaussian_integral", 1e-8, Box::new(check_gaussian_integral)),
        ("rk4_order", 0.2, Box::new(check_rk4_order)),
        ("ordering_rule", 1e-3, Box::new(check_ordering_rule)),
        ("rhs_structure", 1e-12, Box::new(move || check_rhs_structure(seed))),
    ];
    let mut rows = Vec::with_capacity(checks.len());
    for (name, tol, f) in checks {
        let mut value = f()?;
        if corrupt == Some(name) {
            value += 1.0 + tol;
        }
        log::debug!("self-test {name}: {value:e} (tol {tol:e})");
        rows.push(SelftestRow { name, value, tol, pass: value <= tol });
    }
    Ok(SelftestReport { seed, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes_and_repeats_exactly() {
        let a = run_selftest(0xC0FFEE, None).unwrap();
        assert!(a.pass(), "{}", a.table());
        let names: Vec<_> = a.rows.iter().map(|r| r.name).collect();
        assert_eq!(names, CHECK_NAMES);
        assert_eq!(run_selftest(0xC0FFEE, None).unwrap(), a);
    }

    #[test]
    fn corruption_hits_only_its_target() {
        let r = run_selftest(7, Some("group_law")).unwrap();
        for row in &r.rows {
            assert_eq!(row.pass, row.name != "group_law", "{}", row.name);
        }
        assert!(run_selftest(7, Some("nonsense")).is_err());
    }
}
