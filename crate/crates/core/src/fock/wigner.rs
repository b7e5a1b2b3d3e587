//! Displaced parity, Wigner extraction and Weyl quantization.

use num_complex::Complex64;
use rayon::prelude::*;

use super::ops::{axpy, displacement, displacement_into, ln_factorials, CMatrix};
use super::state::FockDensityMatrix;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, PhaseSpaceGrid};
use crate::kernel::{ComplexPoint, GaussianPhaseFunction};

/// Element size below which the displacement block counts as negligible.
pub const REACH_TOL: f64 = 1e-14;
/// Boundary-to-peak ratio tolerated for operator-valued quadrature.
pub const TAIL_RATIO: f64 = 1e-10;
/// Trapezoid step as a fraction of the aliasing limit.
const STEP_SAFETY: f64 = 0.9;

/// `T0(α) = 2 D(α) Π D†(α) = 2 D(2α) Π`, exact on the first `n` levels.
pub fn transition_t0(alpha: ComplexPoint, n: usize) -> CMatrix {
    let mut d = displacement(2.0 * alpha, n);
    apply_parity(&mut d);
    d
}

fn apply_parity(d: &mut CMatrix) {
    for (k, mut col) in d.column_iter_mut().enumerate() {
        let s = if k % 2 == 0 { 2.0 } else { -2.0 };
        col.iter_mut().for_each(|v| *v *= s);
    }
}

/// Smallest `|β|` beyond which every element of the `n`-level block of `D(β)` stays below `tol`.
pub fn displacement_reach(n: usize, tol: f64) -> f64 {
    // |⟨m|D(β)|k⟩| depends on |β| only.
    let lnf = ln_factorials(n);
    let mut d = CMatrix::zeros(n, n);
    let mut r = (n as f64).sqrt();
    loop {
        displacement_into(Complex64::new(r, 0.0), &lnf, &mut d);
        if d.camax() < tol {
            return r;
        }
        r += 0.05;
    }
}

/// Radius beyond which the `n`-level block of `T0(γ)` is negligible.
pub fn t0_reach(n: usize) -> f64 {
    0.5 * displacement_reach(n, 0.5 * REACH_TOL)
}

/// Largest angular frequency present in the elements of `T0(γ)` as functions of `γ`.
pub fn t0_bandwidth(n: usize) -> f64 {
    2.0 * displacement_reach(n, REACH_TOL)
}

/// Wigner value `Tr[ρ T0(α)]` (real part).
pub fn wigner_point(rho: &FockDensityMatrix, alpha: ComplexPoint) -> f64 {
    let n = rho.dim();
    if alpha.norm_sqr() > n as f64 / 4.0 {
        log::warn!("|alpha|^2 = {:.3} exceeds N/4 = {:.3}; Wigner value may be unreliable", alpha.norm_sqr(), n as f64 / 4.0);
    }
    let lnf = ln_factorials(n);
    let mut d = CMatrix::zeros(n, n);
    wigner_value(rho, alpha, &lnf, &mut d).re
}

fn wigner_value(rho: &FockDensityMatrix, alpha: ComplexPoint, lnf: &[f64], d: &mut CMatrix) -> Complex64 {
    displacement_into(2.0 * alpha, lnf, d);
    let n = rho.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let s = if k % 2 == 0 { 2.0 } else { -2.0 };
        let mut col = Complex64::new(0.0, 0.0);
        for m in 0..n {
            col += rho.rho[(k, m)] * d[(m, k)];
        }
        acc += s * col;
    }
    acc
}

/// `Tr[ρ T0(α)]` on every grid point (complex; the imaginary part measures non-Hermiticity).
pub fn wigner_grid(rho: &FockDensityMatrix, spec: &GridSpec) -> PhaseSpaceGrid {
    let n = rho.dim();
    let (hx, hy) = spec.sample_half_extent();
    let far = (spec.center.re.abs() + hx).powi(2) + (spec.center.im.abs() + hy).powi(2);
    if far > n as f64 / 4.0 {
        log::debug!("wigner grid reaches |alpha|^2 = {far:.2} beyond N/4 = {:.2}", n as f64 / 4.0);
    }
    let lnf = ln_factorials(n);
    let mut values = vec![Complex64::new(0.0, 0.0); spec.len()];
    values.par_chunks_mut(spec.ny).enumerate().for_each_init(
        || CMatrix::zeros(n, n),
        |d, (ix, row)| {
            for (iy, v) in row.iter_mut().enumerate() {
                *v = wigner_value(rho, spec.point(ix, iy), &lnf, d);
            }
        },
    );
    PhaseSpaceGrid { spec: *spec, values }
}

/// Trapezoid grid covering the box `[lo, hi]` with step at most `h`.
pub(crate) fn box_spec(lo: ComplexPoint, hi: ComplexPoint, h: f64) -> Result<GridSpec> {
    let (wx, wy) = (hi.re - lo.re, hi.im - lo.im);
    if !(wx > 0.0 && wy > 0.0) {
        return Err(Error::InvalidParameter("empty quadrature box".into()));
    }
    let nx = (wx / h).ceil().max(1.0) as usize + 1;
    let ny = (wy / h).ceil().max(1.0) as usize + 1;
    // Samples sit on both box edges.
    GridSpec::new(nx, ny, 0.5 * (lo + hi), wx / (nx - 1) as f64, wy / (ny - 1) as f64)
}

/// Quadrature grid for `∫ d²γ/π p(γ) T0(γ)`, given the symbol's own bandwidth
/// and the box outside which it is negligible (`None`: only `T0` confines).
pub fn weyl_grid(n: usize, symbol_bandwidth: f64, symbol_box: Option<(ComplexPoint, ComplexPoint)>) -> Result<GridSpec> {
    let reach = t0_reach(n) + 0.25;
    let mut lo = ComplexPoint::new(-reach, -reach);
    let mut hi = ComplexPoint::new(reach, reach);
    if let Some((a, b)) = symbol_box {
        lo = ComplexPoint::new(lo.re.max(a.re), lo.im.max(a.im));
        hi = ComplexPoint::new(hi.re.min(b.re), hi.im.min(b.im));
    }
    let h = STEP_SAFETY * 2.0 * std::f64::consts::PI / (t0_bandwidth(n) + symbol_bandwidth);
    box_spec(lo, hi, h)
}

/// `∫ d²γ/π p(γ) T0(γ)` by the trapezoid rule on `spec`.
///
/// Fails with `TailDivergence` when `|p|·max|T0|` on the boundary exceeds
/// `TAIL_RATIO` times its peak.
pub fn weyl_quantize<F>(symbol: F, n: usize, spec: &GridSpec) -> Result<CMatrix>
where
    F: Fn(ComplexPoint) -> Complex64 + Sync,
{
    let s = t0_sum(symbol, n, spec, true);
    if s.peak > 0.0 && s.edge > TAIL_RATIO * s.peak {
        return Err(Error::TailDivergence { ratio: s.edge / s.peak });
    }
    Ok(s.sum)
}

pub(crate) struct T0Sum {
    pub sum: CMatrix,
    /// Largest `|p|·max|T0|` over the grid and over its boundary.
    pub peak: f64,
    pub edge: f64,
}

/// `Σ w_ij p(γ_ij) T0(γ_ij) dx dy/π`; `w` halves boundary samples when `trapezoid` is set, else is 1.
pub(crate) fn t0_sum<F>(symbol: F, n: usize, spec: &GridSpec, trapezoid: bool) -> T0Sum
where
    F: Fn(ComplexPoint) -> Complex64 + Sync,
{
    let lnf = ln_factorials(n);
    let on_edge = |ix: usize, iy: usize| ix == 0 || iy == 0 || ix + 1 == spec.nx || iy + 1 == spec.ny;
    let weight = |ix: usize, iy: usize| {
        if !trapezoid {
            return 1.0;
        }
        let wx = if ix == 0 || ix + 1 == spec.nx { 0.5 } else { 1.0 };
        let wy = if iy == 0 || iy + 1 == spec.ny { 0.5 } else { 1.0 };
        wx * wy
    };
    let rows: Vec<(CMatrix, f64, f64)> = (0..spec.nx)
        .into_par_iter()
        .map_init(
            || CMatrix::zeros(n, n),
            |d, ix| {
                let mut acc = CMatrix::zeros(n, n);
                let (mut peak, mut edge) = (0.0f64, 0.0f64);
                for iy in 0..spec.ny {
                    let g = spec.point(ix, iy);
                    let p = symbol(g);
                    if p == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    displacement_into(2.0 * g, &lnf, d);
                    apply_parity(d);
                    let mag = p.norm() * d.camax();
                    peak = peak.max(mag);
                    if on_edge(ix, iy) {
                        edge = edge.max(mag);
                    }
                    axpy(&mut acc, p * weight(ix, iy), d);
                }
                (acc, peak, edge)
            },
        )
        .collect();
    let mut sum = CMatrix::zeros(n, n);
    let (mut peak, mut edge) = (0.0f64, 0.0f64);
    for (m, p, e) in rows {
        sum += m;
        peak = peak.max(p);
        edge = edge.max(e);
    }
    T0Sum { sum: sum * Complex64::new(spec.cell_weight(), 0.0), peak, edge }
}

/// Density matrix whose Wigner function is the Gaussian `f`.
pub fn quantize_gaussian(f: &GaussianPhaseFunction, n: usize) -> Result<CMatrix> {
    let lam = 1.0 / (2.0 * f.min_width()?.powi(2));
    let half = 7.5 * f.max_width()?;
    let c = f.center();
    let bx = (c - ComplexPoint::new(half, half), c + ComplexPoint::new(half, half));
    let spec = weyl_grid(n, 12.0 * lam.sqrt(), Some(bx))?;
    weyl_quantize(|g| f.eval(g).unwrap_or_default(), n, &spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::OrderingVector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parity_at_origin() {
        let t = transition_t0(c(0.0, 0.0), 5);
        for k in 0..5 {
            assert_eq!(t[(k, k)], c(if k % 2 == 0 { 2.0 } else { -2.0 }, 0.0));
        }
    }

    #[test]
    fn t0_is_hermitian() {
        let t = transition_t0(c(0.7, -1.1), 20);
        assert!((&t - t.adjoint()).camax() < 1e-13);
    }

    #[test]
    fn wigner_reference_values() {
        let vac = FockDensityMatrix::vacuum(30).unwrap();
        assert!((wigner_point(&vac, c(0.0, 0.0)) - 2.0).abs() < 1e-15);
        assert!((wigner_point(&vac, Complex64::from_polar(1.0, 0.4)) - 2.0 * (-2f64).exp()).abs() < 1e-14);
        let one = FockDensityMatrix::fock(1, 8).unwrap();
        assert!((wigner_point(&one, c(0.0, 0.0)) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_wigner_grid_matches_gaussian() {
        let a0 = c(1.0, 0.0);
        let rho = FockDensityMatrix::coherent(a0, 40).unwrap();
        let spec = GridSpec::square(32, 3.0);
        let w = wigner_grid(&rho, &spec);
        let want = crate::grid::sample_function(&GaussianPhaseFunction::coherent(a0), &spec).unwrap();
        assert!(w.max_abs_diff(&want).unwrap() < 1e-6);
        assert!(w.max_imag_abs() < 1e-10);
    }

    #[test]
    fn vacuum_grid_integrates_to_trace() {
        let w = wigner_grid(&FockDensityMatrix::vacuum(20).unwrap(), &GridSpec::square(128, 4.0));
        assert!((w.integral() - 1.0).norm() < 1e-3);
    }

    #[test]
    fn quantized_coherent_gaussian_is_the_coherent_state() {
        let n = 30;
        let a0 = c(0.8, -0.5);
        let q = FockDensityMatrix::gaussian(&GaussianPhaseFunction::coherent(a0), n).unwrap();
        let direct = FockDensityMatrix::coherent(a0, n).unwrap();
        assert!((&q.rho - &direct.rho).camax() < 1e-9);
    }

    #[test]
    fn quantized_thermal_gaussian_is_thermal() {
        let n = 40;
        let q = FockDensityMatrix::gaussian(&GaussianPhaseFunction::kernel(OrderingVector::isotropic(1.8)), n).unwrap();
        let th = FockDensityMatrix::thermal(0.4, 200).unwrap();
        for k in 0..n {
            assert!((q.rho[(k, k)] - th.rho[(k, k)]).norm() < 1e-9, "level {k}");
        }
    }

    #[test]
    fn constant_symbol_quantizes_to_identity() {
        let n = 12;
        let spec = weyl_grid(n, 0.0, None).unwrap();
        let id = weyl_quantize(|_| c(1.0, 0.0), n, &spec).unwrap();
        assert!((&id - CMatrix::identity(n, n)).camax() < 1e-9);
    }
}
