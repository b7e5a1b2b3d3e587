//! Transition operators of the Gaussian class and the quasi-distributions they generate.
//!
//! `T_r(α) = ∫ d²β/π g_r(β) T0(α − β)` with `T0(α) = 2 D(α) Π D†(α)`, so that
//! `W_r(α) = Tr[ρ T_r(α)] = (g_r * W0)(α)`. All operators are represented by
//! their exact matrix elements on the first `N` levels.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::ops::{axpy, displacement_into, ln_factorials, CMatrix};
use crate::fock::state::{write_matrix_csv, FockDensityMatrix};
use crate::fock::wigner::{box_spec, displacement_reach, t0_bandwidth, t0_reach, t0_sum, weyl_grid, weyl_quantize, wigner_grid, REACH_TOL, TAIL_RATIO};
use crate::grid::{convolve_with_ordering, GridSpec, PhaseSpaceGrid};
use crate::kernel::{factorial, quadratic_real_form, sym2_eigenvalues, ComplexPoint, OrderingVector};

pub use crate::fock::wigner::transition_t0;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative kernel size treated as zero when sizing quadrature boxes.
const KERNEL_TAIL: f64 = 1e-16;
/// Largest odd refinement applied to a caller's grid before convolving.
const MAX_REFINE: usize = 15;
/// Integrand noise (amplified roundoff) tolerated in a reconstruction.
const NOISE_LIMIT: f64 = 1e-6;
/// Near-diagonal size at the truncation edge below which `Tr[T_r(α) R]` is summed directly.
const PROBE_TAIL: f64 = 1e-4;
/// Highest total order `m + n` of a supported ordered product.
pub const MAX_ORDER: usize = 4;

fn check_levels(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need N >= 2 levels, got {n}")));
    }
    Ok(())
}

/// `g_r` with the normalization and exponent coefficients precomputed.
#[derive(Clone, Copy, Debug)]
struct KernelEval {
    pref: Complex64,
    a: Complex64,
    b: Complex64,
    c: Complex64,
}

impl KernelEval {
    fn new(r: &OrderingVector) -> Result<Self> {
        let (a, b, c) = r.exponent_coefficients()?;
        Ok(Self { pref: 2.0 / r.quadratic_norm().sqrt(), a, b, c })
    }

    fn eval(&self, z: ComplexPoint) -> Complex64 {
        self.pref * (self.a * z * z + self.b * z.conj() * z.conj() + self.c * z.norm_sqr()).exp()
    }
}

/// Angular frequency beyond which the spectrum of `g_r`, restricted to a disc of
/// radius `radius`, is below about `1e−16` of its peak.
fn kernel_bandwidth(r: &OrderingVector, radius: f64) -> Result<f64> {
    let (a, b, c) = r.exponent_coefficients()?;
    let (lo, _) = sym2_eigenvalues(quadratic_real_form(a, b, c));
    let (ilo, ihi) = sym2_eigenvalues(quadratic_real_form(-I * a, -I * b, -I * c));
    Ok(12.0 * lo.abs().sqrt() + 2.0 * ilo.abs().max(ihi.abs()) * radius)
}

fn require_decaying(r: &OrderingVector) -> Result<()> {
    if r.is_zero() || r.is_decaying() {
        Ok(())
    } else {
        Err(Error::DivergentKernel)
    }
}

/// `T_r(α)` by trapezoid quadrature of the defining convolution.
pub fn transition_tr(alpha: ComplexPoint, r: &OrderingVector, n: usize) -> Result<CMatrix> {
    check_levels(n)?;
    if r.is_zero() {
        return Ok(transition_t0(alpha, n));
    }
    require_decaying(r)?;
    let radius = r.decay_radius(KERNEL_TAIL)?;
    let reach = t0_reach(n) + 0.25;
    if alpha.re.abs() >= reach + radius || alpha.im.abs() >= reach + radius {
        return Ok(CMatrix::zeros(n, n));
    }
    let bw = kernel_bandwidth(r, radius)?;
    let bx = (alpha - ComplexPoint::new(radius, radius), alpha + ComplexPoint::new(radius, radius));
    let spec = weyl_grid(n, bw, Some(bx))?;
    let g = KernelEval::new(r)?;
    weyl_quantize(|gamma| g.eval(alpha - gamma), n, &spec)
}

/// `W_r = g_r * W0` sampled on `spec`.
///
/// The Wigner function is evaluated on a grid refined below the Nyquist
/// spacing of the `N`-level block and widened by the kernel reach; the
/// convolution is spectral and the result is read back at the nodes of `spec`.
pub fn quasi_distribution(rho: &FockDensityMatrix, r: &OrderingVector, spec: &GridSpec) -> Result<PhaseSpaceGrid> {
    require_decaying(r)?;
    if r.is_zero() {
        return Ok(wigner_grid(rho, spec));
    }
    let nyquist = 0.9 * PI / t0_bandwidth(rho.dim());
    let mut q = (spec.dx.max(spec.dy) / nyquist).ceil().max(1.0) as usize;
    if q.is_multiple_of(2) {
        q += 1;
    }
    if q > MAX_REFINE {
        log::warn!("grid spacing {:.3} is coarse for N = {}; refinement capped at {MAX_REFINE}", spec.dx.max(spec.dy), rho.dim());
        q = MAX_REFINE;
    }
    let fine = spec.refined(q);
    let radius = r.decay_radius(KERNEL_TAIL)?;
    let (cx, cy) = ((radius / fine.dx).ceil() as usize, (radius / fine.dy).ceil() as usize);
    let w0 = wigner_grid(rho, &fine.grown(cx, cy));
    let (edge, peak) = (w0.edge_max_abs(), w0.max_abs());
    if edge > 1e-8 * peak {
        log::warn!("Wigner function not contained in the widened grid (edge/peak = {:.2e})", edge / peak);
    }
    convolve_with_ordering(&w0, r, cx, cy).restrict_to(spec)
}

/// Largest deviation between `w` and `Tr[ρ T_r(α)]` over five fixed nodes of `w`.
pub fn spot_check(rho: &FockDensityMatrix, r: &OrderingVector, w: &PhaseSpaceGrid) -> Result<f64> {
    let s = &w.spec;
    let nodes = [
        (s.nx / 2, s.ny / 2),
        (s.nx / 4, s.ny / 3),
        (3 * s.nx / 4, s.ny / 4),
        (s.nx / 3, 3 * s.ny / 4),
        (2 * s.nx / 3, 2 * s.ny / 3),
    ];
    let mut worst = 0.0f64;
    for (ix, iy) in nodes {
        let t = transition_tr(s.point(ix, iy), r, rho.dim())?;
        let direct = (&rho.rho * t).trace();
        worst = worst.max((direct - w.get(ix, iy)).norm());
    }
    Ok(worst)
}

/// `ρ = ∫ d²α/π W_r(α) T_{−r}(α)`, evaluated through characteristic functions:
///
/// ```text
/// χ_r(ξ) = ∫ d²α/π W_r(α) e^{ξα* − ξ*α},   ρ = ∫ d²ξ/π χ_r(ξ) g̃_{−r}(ξ) D(−ξ)
/// ```
///
/// `g̃_{−r} = 1/g̃_r` may grow; the growth is tolerated as long as the
/// amplified roundoff of `χ_r` stays small and the integrand decays at the
/// edge of the `ξ` box, otherwise `TailDivergence`.
pub fn reconstruct_rho(w: &PhaseSpaceGrid, r: &OrderingVector, n: usize) -> Result<FockDensityMatrix> {
    check_levels(n)?;
    let s = &w.spec;
    let reach = displacement_reach(n, REACH_TOL);
    if reach > 0.9 * PI / (2.0 * s.dx.max(s.dy)) {
        return Err(Error::InvalidParameter(format!(
            "grid spacing {:.3} cannot resolve the characteristic function of {n} levels",
            s.dx.max(s.dy)
        )));
    }
    let xs: Vec<f64> = (0..s.nx).map(|i| s.x(i)).collect();
    let ys: Vec<f64> = (0..s.ny).map(|j| s.y(j)).collect();
    let extent = xs.iter().chain(&ys).fold(0.0f64, |m, v| m.max(v.abs()));
    let h = 0.9 * 2.0 * PI / (2.0 * extent + 2.0 * reach);
    let xi = box_spec(ComplexPoint::new(-reach, -reach), ComplexPoint::new(reach, reach), h)?;

    // χ[k, l] at ξ = u_k + i v_l, by separable sums over y then x.
    let ey = CMatrix::from_fn(xi.nx, s.ny, |k, j| Complex64::from_polar(1.0, -2.0 * xi.x(k) * ys[j]));
    let ex = CMatrix::from_fn(xi.ny, s.nx, |l, i| Complex64::from_polar(1.0, 2.0 * xi.y(l) * xs[i]));
    let wm = CMatrix::from_fn(s.nx, s.ny, |i, j| w.values[i * s.ny + j]);
    let chi = ey * wm.transpose() * ex.transpose() * Complex64::new(s.cell_weight(), 0.0);
    let noise_floor = 8.0 * f64::EPSILON * w.values.iter().map(|v| v.norm()).sum::<f64>() * s.cell_weight();

    let inverse = -*r;
    let lnf = ln_factorials(n);
    let edge_weight = |i: usize, len: usize| if i == 0 || i + 1 == len { 0.5 } else { 1.0 };
    let rows: Vec<(CMatrix, f64, f64, f64)> = (0..xi.nx)
        .into_par_iter()
        .map_init(
            || CMatrix::zeros(n, n),
            |d, k| {
                let mut acc = CMatrix::zeros(n, n);
                let (mut peak, mut edge, mut noise) = (0.0f64, 0.0f64, 0.0f64);
                for l in 0..xi.ny {
                    let z = xi.point(k, l);
                    let amp = inverse.characteristic(z);
                    let c = chi[(k, l)] * amp;
                    displacement_into(-z, &lnf, d);
                    let dmax = d.camax();
                    let wt = edge_weight(k, xi.nx) * edge_weight(l, xi.ny);
                    let mag = c.norm() * dmax;
                    peak = peak.max(mag);
                    if k == 0 || l == 0 || k + 1 == xi.nx || l + 1 == xi.ny {
                        edge = edge.max(mag);
                    }
                    noise += wt * noise_floor * amp.norm() * dmax;
                    axpy(&mut acc, c * wt, d);
                }
                (acc, peak, edge, noise)
            },
        )
        .collect();
    let mut rho = CMatrix::zeros(n, n);
    let (mut peak, mut edge, mut noise) = (0.0f64, 0.0f64, 0.0f64);
    for (m, p, e, q) in rows {
        rho += m;
        peak = peak.max(p);
        edge = edge.max(e);
        noise += q;
    }
    noise *= xi.cell_weight();
    if peak > 0.0 && edge > TAIL_RATIO * peak {
        return Err(Error::TailDivergence { ratio: edge / peak });
    }
    if noise > NOISE_LIMIT {
        return Err(Error::TailDivergence { ratio: noise });
    }
    FockDensityMatrix::new(rho * Complex64::new(xi.cell_weight(), 0.0))
}

/// Deviation of `Σ_α T_r(α) dx dy/π` over the nodes of a grid from the identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompletenessReport {
    /// Spectral norm of the deviation on the top-left `N/2` block.
    pub deviation: f64,
    pub block: usize,
    /// `profile[k−1]`: spectral norm of the deviation on the top-left `k × k` block.
    pub profile: Vec<f64>,
}

/// The quadrature sum of `T_r` over `spec`.
///
/// For `r ≠ 0` the sum is exchanged with the convolution:
/// `Σ_α T_r(α) = ∫ d²γ/π G(γ) T0(γ)` with `G(γ) = Σ_α g_r(α − γ) dx dy/π`.
pub fn completeness_sum(r: &OrderingVector, n: usize, spec: &GridSpec) -> Result<CMatrix> {
    check_levels(n)?;
    if r.is_zero() {
        return Ok(t0_sum(|_| Complex64::new(1.0, 0.0), n, spec, false).sum);
    }
    require_decaying(r)?;
    let radius = r.decay_radius(KERNEL_TAIL)?;
    let (hx, hy) = spec.sample_half_extent();
    let half = ComplexPoint::new(hx + radius, hy + radius);
    let quad = weyl_grid(n, kernel_bandwidth(r, radius)?, Some((spec.center - half, spec.center + half)))?;
    let g = KernelEval::new(r)?;
    let nodes: Vec<ComplexPoint> = (0..spec.nx).flat_map(|ix| (0..spec.ny).map(move |iy| spec.point(ix, iy))).collect();
    let cw = spec.cell_weight();
    let r2 = radius * radius;
    let density = |gamma: ComplexPoint| {
        nodes.iter().filter(|a| (*a - gamma).norm_sqr() < r2).map(|a| g.eval(a - gamma)).sum::<Complex64>() * cw
    };
    Ok(t0_sum(density, n, &quad, true).sum)
}

pub fn completeness_report(r: &OrderingVector, n: usize, spec: &GridSpec) -> Result<CompletenessReport> {
    let dev = completeness_sum(r, n, spec)? - CMatrix::identity(n, n);
    let block_norm = |k: usize| dev.view((0, 0), (k, k)).clone_owned().singular_values().max();
    let profile: Vec<f64> = (1..=n).map(block_norm).collect();
    let block = n / 2;
    Ok(CompletenessReport { deviation: profile[block.max(1) - 1], block, profile })
}

/// Spectral norm of `Σ_α T_r(α) dx dy/π − 1` on the top-left `N/2` block.
pub fn completeness_check(r: &OrderingVector, n: usize, spec: &GridSpec) -> Result<f64> {
    Ok(completeness_report(r, n, spec)?.deviation)
}

/// The operator `{a†^m a^n}` in the ordering whose transition operators are `T_{−r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderedProductSpec {
    pub m: usize,
    pub n: usize,
    pub ordering: OrderingVector,
}

impl OrderedProductSpec {
    pub fn new(m: usize, n: usize, ordering: OrderingVector) -> Result<Self> {
        let s = Self { m, n, ordering };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m + self.n > MAX_ORDER {
            return Err(Error::InvalidParameter(format!(
                "ordered products are supported up to m + n = {MAX_ORDER}, got {}",
                self.m + self.n
            )));
        }
        Ok(())
    }

    /// `α*^m α^n`.
    pub fn monomial(&self, alpha: ComplexPoint) -> Complex64 {
        alpha.conj().powu(self.m as u32) * alpha.powu(self.n as u32)
    }

    /// Weyl symbol `E[(γ + β)*^m (γ + β)^n]` with `β` distributed as `g_{−r}`.
    pub fn weyl_symbol(&self) -> impl Fn(ComplexPoint) -> Complex64 + Sync {
        let mom = (-self.ordering).moments();
        let (m, n) = (self.m, self.n);
        let binom = |a: usize, b: usize| factorial(a) / (factorial(b) * factorial(a - b));
        let mut terms = Vec::new();
        for j in 0..=m {
            for k in 0..=n {
                let coeff = binom(m, j) * binom(n, k) * mom.mixed(j, k);
                if coeff != Complex64::new(0.0, 0.0) {
                    terms.push((m - j, n - k, coeff));
                }
            }
        }
        move |g: ComplexPoint| terms.iter().map(|&(p, q, c)| c * g.conj().powu(p as u32) * g.powu(q as u32)).sum()
    }

    /// CSV dump with `m`, `n`, `r` and `N` in the metadata header.
    pub fn write_csv<W: std::io::Write>(&self, op: &CMatrix, w: &mut W) -> Result<()> {
        let r = &self.ordering;
        let fmt = |z: Complex64| format!("{:e}{:+e}i", z.re, z.im);
        let meta = [
            ("m", self.m.to_string()),
            ("n", self.n.to_string()),
            ("r", format!("{};{};{}", fmt(r.r1), fmt(r.r2), fmt(r.r3))),
            ("N", op.nrows().to_string()),
        ];
        write_matrix_csv(op, &meta, w)
    }
}

/// `∫ d²α/π α*^m α^n T_{−r}(α)` as a Weyl quantization, on the first `levels` levels.
pub fn ordered_product(spec: &OrderedProductSpec, levels: usize) -> Result<CMatrix> {
    spec.validate()?;
    check_levels(levels)?;
    let grid = weyl_grid(levels, 0.0, None)?;
    weyl_quantize(spec.weyl_symbol(), levels, &grid)
}

/// Evaluates `Tr[T_r(α) R]` for truncated operators `R`.
///
/// When `T_r(α)` is still sizeable at the truncation edge (e.g. `T0`, whose
/// diagonal does not decay), the trace is taken at three isotropic shifts
/// `r + (0, 0, ε)` with decaying transition operators and extrapolated to
/// `ε = 0`. For `R` with a polynomial ordered symbol of degree ≤ 4 the traced
/// quantity is a polynomial of degree ≤ 2 in `ε`, so the extrapolation is exact.
#[derive(Clone, Debug)]
pub struct TraceProbe {
    nodes: Vec<(f64, CMatrix)>,
}

fn edge_band(t: &CMatrix) -> f64 {
    let n = t.nrows();
    let mut m = 0.0f64;
    for k in n.saturating_sub(MAX_ORDER + 1)..n {
        m = m.max(t[(n - 1, k)].norm()).max(t[(k, n - 1)].norm());
    }
    m
}

impl TraceProbe {
    pub fn new(alpha: ComplexPoint, r: &OrderingVector, n: usize) -> Result<Self> {
        let direct = transition_tr(alpha, r, n);
        if let Ok(t) = &direct {
            if edge_band(t) <= PROBE_TAIL {
                return Ok(Self { nodes: vec![(0.0, direct?)] });
            }
        }
        let mut best: Option<(f64, Vec<(f64, CMatrix)>)> = None;
        for c in [1.0, 1.5, 2.0, 3.0] {
            let mut nodes = Vec::with_capacity(3);
            for eps in [c - 0.4, c, c + 0.4] {
                let shifted = *r + OrderingVector::isotropic(eps);
                match transition_tr(alpha, &shifted, n) {
                    Ok(t) => nodes.push((eps, t)),
                    Err(_) => break,
                }
            }
            if nodes.len() < 3 {
                continue;
            }
            let tail = nodes.iter().map(|(_, t)| edge_band(t)).fold(0.0, f64::max);
            if tail <= PROBE_TAIL {
                return Ok(Self { nodes });
            }
            if best.as_ref().is_none_or(|(b, _)| tail < *b) {
                best = Some((tail, nodes));
            }
        }
        match best {
            Some((tail, nodes)) => {
                log::warn!("transition operators at alpha = {alpha} reach the truncation edge ({tail:.1e})");
                Ok(Self { nodes })
            }
            None => direct.map(|t| Self { nodes: vec![(0.0, t)] }),
        }
    }

    pub fn is_extrapolated(&self) -> bool {
        self.nodes.len() > 1
    }

    pub fn trace(&self, op: &CMatrix) -> Complex64 {
        let values: Vec<Complex64> = self.nodes.iter().map(|(_, t)| (t * op).trace()).collect();
        if values.len() == 1 {
            return values[0];
        }
        let eps: Vec<f64> = self.nodes.iter().map(|(e, _)| *e).collect();
        (0..eps.len())
            .map(|i| {
                let li: f64 = (0..eps.len()).filter(|&j| j != i).map(|j| eps[j] / (eps[j] - eps[i])).product();
                values[i] * li
            })
            .sum()
    }
}

/// Sample points used to re-verify ordered products, all with `|α| ≤ 1.5`.
pub const VERIFY_POINTS: [ComplexPoint; 5] = [
    ComplexPoint::new(0.0, 0.0),
    ComplexPoint::new(0.7, 0.0),
    ComplexPoint::new(-0.5, 0.9),
    ComplexPoint::new(1.1, -0.6),
    ComplexPoint::new(-1.2, -0.8),
];

/// Largest `|Tr[T_r(α) R] − α*^m α^n|` over `points`.
pub fn verify_ordered_product(spec: &OrderedProductSpec, op: &CMatrix, points: &[ComplexPoint]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &alpha in points {
        let probe = TraceProbe::new(alpha, &spec.ordering, op.nrows())?;
        worst = worst.max((probe.trace(op) - spec.monomial(alpha)).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ops::ladder_operators;
    use crate::grid::sample_function;
    use crate::kernel::GaussianPhaseFunction;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn narrow_kernel_approaches_t0_linearly() {
        let alpha = c(0.4, -0.3);
        let t0 = transition_t0(alpha, 8);
        let err = |tau: f64| {
            let t = transition_tr(alpha, &OrderingVector::isotropic(tau), 8).unwrap();
            let vac = 2.0 / (1.0 + tau) * (-2.0 * alpha.norm_sqr() / (1.0 + tau)).exp();
            assert!((t[(0, 0)] - vac).norm() < 1e-12);
            (&t - &t0).camax()
        };
        let (e1, e2) = (err(1e-3), err(5e-4));
        assert!(e1 < 0.05);
        assert!((e1 / e2 - 2.0).abs() < 0.05, "{e1:e} {e2:e}");
    }

    #[test]
    fn husimi_operator_is_coherent_projector() {
        let alpha = c(0.6, 0.2);
        let n = 30;
        let t = transition_tr(alpha, &OrderingVector::isotropic(1.0), n).unwrap();
        let proj = FockDensityMatrix::coherent(alpha, n).unwrap();
        assert!((&t - &proj.rho).camax() < 1e-9);
        let a0 = c(-0.3, 0.5);
        let rho = FockDensityMatrix::coherent(a0, n).unwrap();
        let q = (&rho.rho * &t).trace();
        assert!((q - (-(alpha - a0).norm_sqr()).exp()).norm() < 1e-9);
    }

    #[test]
    fn physical_class_is_hermitian() {
        let t = transition_tr(c(0.3, 0.8), &OrderingVector::physical(0.4, 0.4, 1.0), 16).unwrap();
        assert!((&t - t.adjoint()).camax() < 1e-12);
    }

    #[test]
    fn non_decaying_kernel_is_rejected() {
        assert!(matches!(transition_tr(c(0.0, 0.0), &OrderingVector::isotropic(-1.0), 4), Err(Error::DivergentKernel)));
    }

    #[test]
    fn quasi_distribution_of_coherent_state() {
        let a0 = c(0.5, -0.4);
        let rho = FockDensityMatrix::coherent(a0, 30).unwrap();
        let spec = GridSpec::square(64, 4.0);
        let w = quasi_distribution(&rho, &OrderingVector::isotropic(1.0), &spec).unwrap();
        let want = sample_function(&GaussianPhaseFunction { mean: a0, ..GaussianPhaseFunction::kernel(OrderingVector::isotropic(2.0)) }, &spec).unwrap();
        assert!(w.max_abs_diff(&want).unwrap() < 1e-9);
        assert!((w.integral() - 1.0).norm() < 1e-4);
        assert!(spot_check(&rho, &OrderingVector::isotropic(1.0), &w).unwrap() < 1e-9);
    }

    #[test]
    fn vacuum_wigner_reconstructs_vacuum() {
        let spec = GridSpec::square(96, 5.0);
        let w = wigner_grid(&FockDensityMatrix::vacuum(10).unwrap(), &spec);
        let rho = reconstruct_rho(&w, &OrderingVector::zero(), 10).unwrap();
        assert!(rho.frobenius_distance(&FockDensityMatrix::vacuum(10).unwrap()).unwrap() < 1e-4);
    }

    #[test]
    fn completeness_profile_grows_toward_the_corner() {
        let rep = completeness_report(&OrderingVector::zero(), 16, &GridSpec::square(100, 3.0)).unwrap();
        assert!(rep.profile.windows(2).all(|w| w[1] >= w[0]));
        assert!(rep.profile[15] > 10.0 * rep.profile[7]);
    }

    #[test]
    fn weyl_symmetric_number_operator() {
        let n = 16;
        let op = ordered_product(&OrderedProductSpec::new(1, 1, OrderingVector::zero()).unwrap(), n).unwrap();
        let (a, ad) = ladder_operators(n + 1);
        let sym = (&ad * &a + &a * &ad) * c(0.5, 0.0);
        let want = sym.view((0, 0), (n, n));
        assert!((&op - want).camax() < 1e-9);
    }

    #[test]
    fn order_cap() {
        assert!(OrderedProductSpec::new(3, 2, OrderingVector::zero()).is_err());
    }

    #[test]
    fn trace_of_t0_by_extrapolation() {
        let probe = TraceProbe::new(c(0.3, 0.2), &OrderingVector::zero(), 16).unwrap();
        assert!(probe.is_extrapolated());
        assert!((probe.trace(&CMatrix::identity(16, 16)) - 1.0).norm() < 1e-6);
    }
}
