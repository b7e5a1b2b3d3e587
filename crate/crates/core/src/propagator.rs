//! Closed-form evolution in a squeezed thermal bath.
//!
//! All outputs live in the frame rotating at the oscillator frequency. The
//! Wigner function evolves as `W(α,t) = e^{2κt} C(e^{κt}α − λ1)` with
//! `C = g_{r(t)} * W(·,0)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{convolve_with_ordering_refined, GridSpec, PhaseSpaceGrid, DEFAULT_WIDTHS};
use crate::kernel::{eval_kernel, ComplexPoint, GaussianPhaseFunction, OrderingVector};
use crate::quadrature::adaptive_simpson;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative tolerance for tabulated-drive quadrature.
pub const TABULATED_REL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub kappa: f64,
    pub nbar: f64,
    #[serde(rename = "M")]
    pub m: Complex64,
    #[serde(rename = "Omega")]
    pub omega: f64,
}

impl BathParams {
    pub fn new(kappa: f64, nbar: f64, m: Complex64, omega: f64) -> Result<Self> {
        let b = Self { kappa, nbar, m, omega };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.nbar >= 0.0 && self.nbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("nbar must be nonnegative, got {}", self.nbar)));
        }
        if !(self.m.re.is_finite() && self.m.im.is_finite() && self.omega.is_finite()) {
            return Err(Error::InvalidParameter("M and Omega must be finite".into()));
        }
        if !self.is_physical() {
            log::warn!(
                "|M|^2 = {:.4} exceeds nbar(nbar+1) = {:.4}; the evolution may not preserve positivity",
                self.m.norm_sqr(),
                self.nbar * (self.nbar + 1.0)
            );
        }
        Ok(())
    }

    /// `|M|² ≤ n̄(n̄+1)`.
    pub fn is_physical(&self) -> bool {
        self.m.norm_sqr() <= self.nbar * (self.nbar + 1.0)
    }
}

/// Classical force `f(t)` on the oscillator.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriveSpec {
    #[default]
    None,
    Constant { f0: f64 },
    /// `f0 cos(omega t + phase)`
    Cosine {
        f0: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Piecewise-linear through `(t, f)` samples.
    Tabulated { samples: Vec<(f64, f64)> },
}

impl DriveSpec {
    pub fn validate(&self) -> Result<()> {
        if let DriveSpec::Tabulated { samples } = self {
            if samples.len() < 2 {
                return Err(Error::InvalidParameter("tabulated drive needs at least two samples".into()));
            }
            if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                return Err(Error::InvalidParameter("tabulated drive times must be strictly increasing".into()));
            }
            if samples.iter().any(|(t, f)| !t.is_finite() || !f.is_finite()) {
                return Err(Error::InvalidParameter("tabulated drive samples must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            DriveSpec::None => 0.0,
            DriveSpec::Constant { f0 } => *f0,
            DriveSpec::Cosine { f0, omega, phase } => f0 * (omega * t + phase).cos(),
            DriveSpec::Tabulated { samples } => interpolate_linear(samples, t),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, DriveSpec::None)
    }
}

fn interpolate_linear(samples: &[(f64, f64)], t: f64) -> f64 {
    let k = samples.partition_point(|(ts, _)| *ts <= t);
    if k == 0 {
        return samples[0].1;
    }
    if k == samples.len() {
        return samples[k - 1].1;
    }
    let (t0, f0) = samples[k - 1];
    let (t1, f1) = samples[k];
    f0 + (f1 - f0) * (t - t0) / (t1 - t0)
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// `e^z − 1` without cancellation for small `|z|`.
pub(crate) fn cexpm1(z: Complex64) -> Complex64 {
    let s = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * z.im.cos() - 2.0 * s * s, z.re.exp() * z.im.sin())
}

/// `∫_0^t e^{z t'} dt' = (e^{zt} − 1)/z`, continuous through `z = 0`.
pub(crate) fn phi(z: Complex64, t: f64) -> Complex64 {
    let zt = z * t;
    if zt.norm() < 1e-6 {
        return t * (1.0 + zt / 2.0 + zt * zt / 6.0 + zt * zt * zt / 24.0);
    }
    cexpm1(zt) / z
}

/// `T(t) = 1 − e^{−2κt}`.
pub fn coeff_t(bath: &BathParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(-(-2.0 * bath.kappa * t).exp_m1())
}

/// `A(t)` from `A sinh κt = 1/(coth κt + 2n̄ + 1)`, i.e. `A = 1/(cosh κt + (2n̄+1) sinh κt)`.
pub fn coeff_a(bath: &BathParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let x = bath.kappa * t;
    // cosh and sinh scaled by e^{−x} to stay finite for large κt.
    let e2 = (-2.0 * x).exp();
    let cosh_s = 0.5 * (1.0 + e2);
    let sinh_s = -0.5 * (-2.0 * x).exp_m1();
    Ok((-x).exp() / (cosh_s + (2.0 * bath.nbar + 1.0) * sinh_s))
}

/// `λ1(t) = −i ∫_0^t f(t') e^{(κ + iΩ)t'} dt'`.
pub fn coeff_lambda1(drive: &DriveSpec, bath: &BathParams, t: f64) -> Result<Complex64> {
    check_time(t)?;
    let z = Complex64::new(bath.kappa, bath.omega);
    Ok(match drive {
        DriveSpec::None => Complex64::new(0.0, 0.0),
        DriveSpec::Constant { f0 } => -I * *f0 * phi(z, t),
        DriveSpec::Cosine { f0, omega, phase } => {
            let up = Complex64::from_polar(1.0, *phase) * phi(z + I * *omega, t);
            let down = Complex64::from_polar(1.0, -*phase) * phi(z - I * *omega, t);
            -I * 0.5 * *f0 * (up + down)
        }
        DriveSpec::Tabulated { samples } => {
            drive.validate()?;
            let (start, end) = (samples[0].0, samples[samples.len() - 1].0);
            if start > 0.0 || end < t {
                return Err(Error::DriveDomain { t, start, end });
            }
            // Piecewise between samples so the kinks of the interpolant sit on panel edges.
            let mut edges: Vec<f64> = vec![0.0];
            edges.extend(samples.iter().map(|s| s.0).filter(|&s| s > 0.0 && s < t));
            edges.push(t);
            let mut acc = Complex64::new(0.0, 0.0);
            for w in edges.windows(2) {
                acc += adaptive_simpson(|s| drive.value(s) * (z * s).exp(), w[0], w[1], TABULATED_REL_TOL);
            }
            -I * acc
        }
    })
}

/// `λ2(t) = −κM ∫_0^t e^{2(κ + iΩ)t'} dt'`.
pub fn coeff_lambda2(bath: &BathParams, t: f64) -> Result<Complex64> {
    check_time(t)?;
    Ok(-bath.kappa * bath.m * phi(2.0 * Complex64::new(bath.kappa, bath.omega), t))
}

/// `r(t) = (4i Im λ2, 4i Re λ2, (2n̄+1)(e^{2κt} − 1))`.
pub fn ordering_vector(bath: &BathParams, t: f64) -> Result<OrderingVector> {
    let l2 = coeff_lambda2(bath, t)?;
    let r3 = (2.0 * bath.nbar + 1.0) * (2.0 * bath.kappa * t).exp_m1();
    Ok(OrderingVector::physical(4.0 * l2.im, 4.0 * l2.re, r3))
}

/// `(2n̄+1)² e^{4κt} T² − 16|λ2|²`, the quantity under the kernel's square root.
pub fn kernel_discriminant(bath: &BathParams, t: f64) -> Result<f64> {
    let l2 = coeff_lambda2(bath, t)?;
    let r3 = (2.0 * bath.nbar + 1.0) * (2.0 * bath.kappa * t).exp_m1();
    Ok(r3 * r3 - 16.0 * l2.norm_sqr())
}

fn check_normalizable(bath: &BathParams, t: f64) -> Result<()> {
    let d = kernel_discriminant(bath, t)?;
    if !(d > 0.0) {
        return Err(Error::KernelNotNormalizable { t, m_abs: bath.m.norm(), nbar: bath.nbar, discriminant: d });
    }
    Ok(())
}

/// Evolution kernel `g(β,t)` written in terms of `λ2`, `T` and `n̄`.
pub fn eval_evolution_kernel_direct(bath: &BathParams, t: f64, beta: ComplexPoint) -> Result<Complex64> {
    check_normalizable(bath, t)?;
    let l2 = coeff_lambda2(bath, t)?;
    let tt = coeff_t(bath, t)?;
    let c = (2.0 * bath.nbar + 1.0) * (2.0 * bath.kappa * t).exp() * tt;
    let d = c * c - (4.0 * l2).norm_sqr();
    let num = 2.0 * c * beta.norm_sqr() - 4.0 * l2.conj() * beta * beta - 4.0 * l2 * beta.conj() * beta.conj();
    Ok(2.0 / d.sqrt() * (-num / d).exp())
}

pub fn evolution_kernel(bath: &BathParams, t: f64) -> Result<GaussianPhaseFunction> {
    check_normalizable(bath, t)?;
    Ok(GaussianPhaseFunction::kernel(ordering_vector(bath, t)?))
}

/// `max |g_direct − g_{r(t)}|` over the points of `spec`.
pub fn kernel_consistency(bath: &BathParams, t: f64, spec: &GridSpec) -> Result<f64> {
    let r = ordering_vector(bath, t)?;
    let diffs = PhaseSpaceGrid::try_from_fn(*spec, |b| Ok(eval_evolution_kernel_direct(bath, t, b)? - eval_kernel(&r, b)?))?;
    Ok(diffs.max_abs())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorCoefficients {
    pub t: f64,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub big_t: f64,
    pub a: f64,
    pub ordering: OrderingVector,
}

impl PropagatorCoefficients {
    pub fn compute(bath: &BathParams, drive: &DriveSpec, t: f64) -> Result<Self> {
        Ok(Self {
            t,
            lambda1: coeff_lambda1(drive, bath, t)?,
            lambda2: coeff_lambda2(bath, t)?,
            big_t: coeff_t(bath, t)?,
            a: coeff_a(bath, t)?,
            ordering: ordering_vector(bath, t)?,
        })
    }

    /// `{t, lambda1:[re,im], lambda2:[re,im], T, A, r:[[re,im],[re,im],[re,im]]}`
    pub fn to_json(&self) -> serde_json::Value {
        let c = |z: Complex64| serde_json::json!([z.re, z.im]);
        serde_json::json!({
            "t": self.t,
            "lambda1": c(self.lambda1),
            "lambda2": c(self.lambda2),
            "T": self.big_t,
            "A": self.a,
            "r": [c(self.ordering.r1), c(self.ordering.r2), c(self.ordering.r3)],
        })
    }
}

/// Exact evolution of a Gaussian-class Wigner function `w·g_s(σα − μ)`:
/// ordering `s + σ²r(t)`, mean `μ + σλ1`, scale `σe^{κt}`, weight `w e^{2κt}`.
pub fn propagate_gaussian(
    initial: &GaussianPhaseFunction,
    bath: &BathParams,
    drive: &DriveSpec,
    t: f64,
) -> Result<GaussianPhaseFunction> {
    check_time(t)?;
    if t > 0.0 {
        check_normalizable(bath, t)?;
    }
    let c = PropagatorCoefficients::compute(bath, drive, t)?;
    let s = initial.scale;
    let growth = (bath.kappa * t).exp();
    Ok(GaussianPhaseFunction {
        mean: initial.mean + s * c.lambda1,
        ordering: initial.ordering + c.ordering.scaled(s * s),
        weight: initial.weight * growth * growth,
        scale: s * growth,
    })
}

/// Rotating-frame mean `e^{−κt}(α0 + λ1)`.
pub fn mean_trajectory(alpha0: ComplexPoint, bath: &BathParams, drive: &DriveSpec, t: f64) -> Result<ComplexPoint> {
    Ok((-bath.kappa * t).exp() * (alpha0 + coeff_lambda1(drive, bath, t)?))
}

/// Options for [`propagate_grid_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPropagation {
    /// Spectral refinement of the convolved grid before interpolation.
    pub refine: usize,
    /// Kernel widths of zero padding around the input.
    pub kernel_widths: f64,
    /// Largest allowed padded size, as a multiple of the input size per axis.
    pub max_growth: usize,
}

impl Default for GridPropagation {
    fn default() -> Self {
        Self { refine: 2, kernel_widths: DEFAULT_WIDTHS + 2.0, max_growth: 8 }
    }
}

pub fn propagate_grid(
    w0: &PhaseSpaceGrid,
    bath: &BathParams,
    drive: &DriveSpec,
    t: f64,
    out: &GridSpec,
) -> Result<PhaseSpaceGrid> {
    propagate_grid_with(w0, bath, drive, t, out, &GridPropagation::default())
}

/// Grid evolution: spectral convolution with the evolution kernel, then
/// bicubic interpolation at the mapped points `e^{κt}α − λ1`.
pub fn propagate_grid_with(
    w0: &PhaseSpaceGrid,
    bath: &BathParams,
    drive: &DriveSpec,
    t: f64,
    out: &GridSpec,
    opts: &GridPropagation,
) -> Result<PhaseSpaceGrid> {
    check_time(t)?;
    let r = if t > 0.0 {
        check_normalizable(bath, t)?;
        ordering_vector(bath, t)?
    } else {
        OrderingVector::zero()
    };
    let lambda1 = coeff_lambda1(drive, bath, t)?;
    let growth = (bath.kappa * t).exp();
    let s = &w0.spec;

    // Padding: kernel reach plus whatever the mapped output region needs.
    let reach = if r.is_zero() { 0.0 } else { opts.kernel_widths * r.max_width().unwrap_or(0.0) };
    let (ohx, ohy) = out.sample_half_extent();
    let (ihx, ihy) = s.sample_half_extent();
    let mapped_center = growth * out.center - lambda1;
    let need_x = (mapped_center.re - s.center.re).abs() + growth * ohx - ihx;
    let need_y = (mapped_center.im - s.center.im).abs() + growth * ohy - ihy;
    let cells = |len: f64, d: f64| (len.max(0.0) / d).ceil() as usize + 4;
    let pad_x = cells(reach.max(need_x), s.dx);
    let pad_y = cells(reach.max(need_y), s.dy);
    let limit = opts.max_growth * s.nx.max(s.ny);
    if s.nx + 2 * pad_x > limit || s.ny + 2 * pad_y > limit {
        return Err(Error::ExtentTooSmall {
            needed: growth * ohx.max(ohy) + lambda1.norm(),
            available: (limit as f64 / 2.0) * s.dx.min(s.dy),
        });
    }
    let conv = convolve_with_ordering_refined(w0, &r, pad_x, pad_y, opts.refine.max(1));
    let weight = growth * growth;
    let (chx, chy) = conv.spec.sample_half_extent();
    let rows: Result<Vec<Vec<Complex64>>> = (0..out.nx)
        .map(|ix| {
            (0..out.ny)
                .map(|iy| {
                    let p = growth * out.point(ix, iy) - lambda1;
                    conv.interpolate(p).map(|v| weight * v).ok_or(Error::ExtentTooSmall {
                        needed: (p - conv.spec.center).re.abs().max((p - conv.spec.center).im.abs()),
                        available: chx.min(chy),
                    })
                })
                .collect()
        })
        .collect();
    Ok(PhaseSpaceGrid { spec: *out, values: rows?.concat() })
}

/// Slow verification path: evaluates the convolution integral directly at
/// every mapped output point with the kernel sampled on the input grid.
pub fn propagate_grid_direct(
    w0: &PhaseSpaceGrid,
    bath: &BathParams,
    drive: &DriveSpec,
    t: f64,
    out: &GridSpec,
) -> Result<PhaseSpaceGrid> {
    check_time(t)?;
    check_normalizable(bath, t)?;
    let r = ordering_vector(bath, t)?;
    let lambda1 = coeff_lambda1(drive, bath, t)?;
    let growth = (bath.kappa * t).exp();
    let s = w0.spec;
    PhaseSpaceGrid::try_from_fn(*out, |alpha| {
        let p = growth * alpha - lambda1;
        let mut acc = Complex64::new(0.0, 0.0);
        for ix in 0..s.nx {
            let mut row = Complex64::new(0.0, 0.0);
            for iy in 0..s.ny {
                row += w0.get(ix, iy) * eval_kernel(&r, p - s.point(ix, iy))?;
            }
            acc += row;
        }
        Ok(growth * growth * s.cell_weight() * acc)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample_function;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bath() -> BathParams {
        BathParams::new(0.1, 0.5, c(0.3, 0.2), 1.0).unwrap()
    }

    #[test]
    fn big_t_values() {
        let b = BathParams::new(0.1, 0.0, c(0.0, 0.0), 1.0).unwrap();
        assert_eq!(coeff_t(&b, 0.0).unwrap(), 0.0);
        assert!((coeff_t(&b, 5.0).unwrap() - (1.0 - (-1f64).exp())).abs() < 1e-16);
        assert!((coeff_t(&b, 200.0).unwrap() - 1.0).abs() <= 1e-15);
        assert!(matches!(coeff_t(&b, -1.0), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn a_identities_on_log_sweep() {
        let b = bath();
        for k in 0..40 {
            let t = 10f64.powf(-4.0 + 0.15 * k as f64);
            let a = coeff_a(&b, t).unwrap();
            let tt = coeff_t(&b, t).unwrap();
            let x = b.kappa * t;
            assert!((a * x.exp() * (b.nbar * tt + 1.0) - 1.0).abs() < 1e-12);
            assert!((2.0 * a * x.sinh() * (b.nbar * tt + 1.0) - tt).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda1_closed_forms() {
        let b = BathParams::new(0.1, 0.0, c(0.0, 0.0), 1.0).unwrap();
        assert_eq!(coeff_lambda1(&DriveSpec::None, &b, 3.0).unwrap(), c(0.0, 0.0));
        let z = c(0.1, 1.0);
        let want = -I * 0.7 * ((z * 2.5).exp() - 1.0) / z;
        let got = coeff_lambda1(&DriveSpec::Constant { f0: 0.7 }, &b, 2.5).unwrap();
        assert!((got - want).norm() < 1e-14);
        let tiny = BathParams { kappa: 1e-12, omega: 0.0, ..b };
        let got = coeff_lambda1(&DriveSpec::Constant { f0: 0.7 }, &tiny, 2.0).unwrap();
        assert!((got - c(0.0, -1.4)).norm() < 1e-10);
    }

    #[test]
    fn lambda1_matches_quadrature_for_cosine() {
        let b = bath();
        let d = DriveSpec::Cosine { f0: 0.2, omega: 1.0, phase: 0.3 };
        for &t in &[0.5, 2.0, 7.0] {
            let want = -I * adaptive_simpson(|s| d.value(s) * (c(b.kappa, b.omega) * s).exp(), 0.0, t, 1e-13);
            assert!((coeff_lambda1(&d, &b, t).unwrap() - want).norm() < 1e-11);
        }
    }

    #[test]
    fn tabulated_drive() {
        let b = bath();
        let samples: Vec<(f64, f64)> = (0..=40).map(|k| (0.1 * k as f64, 0.5)).collect();
        let d = DriveSpec::Tabulated { samples };
        let got = coeff_lambda1(&d, &b, 3.3).unwrap();
        let want = coeff_lambda1(&DriveSpec::Constant { f0: 0.5 }, &b, 3.3).unwrap();
        assert!((got - want).norm() < 1e-10 * want.norm());
        assert!(matches!(coeff_lambda1(&d, &b, 5.0), Err(Error::DriveDomain { .. })));
        let bad = DriveSpec::Tabulated { samples: vec![(0.0, 1.0), (0.0, 2.0)] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn lambda2_limits() {
        let b = BathParams::new(0.2, 0.1, c(0.3, -0.1), 0.0).unwrap();
        assert_eq!(coeff_lambda2(&b, 0.0).unwrap(), c(0.0, 0.0));
        let want = -(b.m / 2.0) * ((2.0 * 0.2 * 1.7f64).exp() - 1.0);
        assert!((coeff_lambda2(&b, 1.7).unwrap() - want).norm() < 1e-14);
        let b0 = BathParams { m: c(0.0, 0.0), ..bath() };
        assert_eq!(coeff_lambda2(&b0, 2.0).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn ordering_vector_shape() {
        assert!(ordering_vector(&bath(), 0.0).unwrap().is_zero());
        let b0 = BathParams { m: c(0.0, 0.0), ..bath() };
        let r = ordering_vector(&b0, 1.0).unwrap();
        assert_eq!(r.r1, c(0.0, 0.0));
        assert_eq!(r.r2, c(0.0, 0.0));
        assert!((r.r3.re - 2.0 * (0.2f64.exp() - 1.0)).abs() < 1e-15);
        let r = ordering_vector(&bath(), 1.3).unwrap();
        assert!(r.is_real_class(0.0));
    }

    #[test]
    fn direct_kernel_agrees_with_ordering_form() {
        let s = GridSpec::square(64, 3.0);
        for &t in &[0.2, 1.0, 3.0] {
            assert!(kernel_consistency(&bath(), t, &s).unwrap() < 1e-12);
        }
        let b0 = BathParams { m: c(0.0, 0.0), ..bath() };
        assert!(kernel_consistency(&b0, 1.0, &s).unwrap() < 1e-12);
    }

    #[test]
    fn unphysical_squeezing_is_not_normalizable() {
        let b = BathParams { m: c(2.0, 0.0), ..bath() };
        assert!(matches!(evolution_kernel(&b, 1.0), Err(Error::KernelNotNormalizable { .. })));
    }

    #[test]
    fn gaussian_propagation_at_zero_time_is_identity() {
        let w = GaussianPhaseFunction::coherent(c(1.0, 0.5));
        let d = DriveSpec::Cosine { f0: 0.2, omega: 1.0, phase: 0.0 };
        assert_eq!(propagate_gaussian(&w, &bath(), &d, 0.0).unwrap(), w);
    }

    #[test]
    fn long_time_limit_is_thermal() {
        let b = BathParams::new(0.1, 0.5, c(0.0, 0.0), 1.0).unwrap();
        let th = GaussianPhaseFunction::thermal(0.5);
        // Vacuum at κt = 10; a displaced start keeps an e^{−κt}|α0| offset, so it is checked at κt = 20.
        for (alpha0, t) in [(c(0.0, 0.0), 100.0), (c(1.0, 0.5), 200.0)] {
            let w = propagate_gaussian(&GaussianPhaseFunction::coherent(alpha0), &b, &DriveSpec::None, t).unwrap();
            for &a in &[c(0.0, 0.0), c(0.5, -0.3), c(1.2, 0.4)] {
                let (x, y) = (w.eval(a).unwrap(), th.eval(a).unwrap());
                assert!((x - y).norm() < 1e-6, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn grid_propagation_matches_analytic() {
        let b = bath();
        let d = DriveSpec::Cosine { f0: 0.2, omega: 1.0, phase: 0.0 };
        let w0f = GaussianPhaseFunction::coherent(c(1.0, 0.5));
        let s = GridSpec::square(128, 5.0);
        let w0 = sample_function(&w0f, &s).unwrap();
        for &t in &[1e-9, 0.5, 2.0] {
            let got = propagate_grid(&w0, &b, &d, t, &s).unwrap();
            let want = sample_function(&propagate_gaussian(&w0f, &b, &d, t).unwrap(), &s).unwrap();
            let err = got.max_abs_diff(&want).unwrap();
            assert!(err < 1e-3, "t={t}: {err}");
            assert!((got.integral() - w0.integral()).norm() < 1e-4);
        }
    }

    #[test]
    fn direct_grid_path_agrees_with_spectral_path() {
        let b = bath();
        let d = DriveSpec::Constant { f0: 0.1 };
        let s = GridSpec::square(48, 4.5);
        let w0 = sample_function(&GaussianPhaseFunction::coherent(c(0.3, -0.2)), &s).unwrap();
        let out = GridSpec::square(12, 2.0);
        let fast = propagate_grid(&w0, &b, &d, 1.5, &out).unwrap();
        let slow = propagate_grid_direct(&w0, &b, &d, 1.5, &out).unwrap();
        assert!(fast.max_abs_diff(&slow).unwrap() < 1e-3);
    }

    #[test]
    fn mean_law_limits() {
        let b = bath();
        assert_eq!(mean_trajectory(c(1.0, 0.5), &b, &DriveSpec::None, 0.0).unwrap(), c(1.0, 0.5));
        let m = mean_trajectory(c(1.0, 0.5), &b, &DriveSpec::None, 2.0).unwrap();
        assert!((m - (-0.2f64).exp() * c(1.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn coefficient_json_shape() {
        let c0 = PropagatorCoefficients::compute(&bath(), &DriveSpec::None, 1.0).unwrap();
        let v = c0.to_json();
        assert_eq!(v["r"].as_array().unwrap().len(), 3);
        assert!(v["T"].as_f64().unwrap() > 0.0);
        assert_eq!(v["lambda1"][0].as_f64().unwrap(), 0.0);
    }

    #[test]
    fn drive_spec_json() {
        let d: DriveSpec = serde_json::from_str(r#"{"kind":"cosine","f0":0.2,"omega":1.0,"phase":0.0}"#).unwrap();
        assert_eq!(d, DriveSpec::Cosine { f0: 0.2, omega: 1.0, phase: 0.0 });
        let b: BathParams = serde_json::from_str(r#"{"kappa":0.1,"nbar":0.5,"M":[0.4,0.0],"Omega":1.0}"#).unwrap();
        assert_eq!(b.m, c(0.4, 0.0));
    }
}
