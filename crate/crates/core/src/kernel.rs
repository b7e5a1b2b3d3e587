//! The Gaussian class of normalized phase-space kernels.
//!
//! A kernel is labelled by an [`OrderingVector`] `r = (r1, r2, r3) ∈ ℂ³` and
//! evaluates to
//!
//! ```text
//! g_r(α) = 2/√(rr) · exp[−(1/rr){r1(α² − α*²) + i r2(α² + α*²) + 2 r3 |α|²}],   rr = r·r
//! ```
//!
//! normalized against the `d²α/π` measure. Convolution of two kernels adds
//! their ordering vectors, so the class forms a commutative group with the
//! zero vector (the delta function) as identity.

use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the complex phase plane.
pub type ComplexPoint = Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A quadratic form counts as negative definite when both eigenvalues lie below this.
pub const DECAY_THRESHOLD: f64 = -1e-12;

/// Default lower bound on `|rr|` accepted by [`eval_kernel`].
pub const DEFAULT_NORM_EPS: f64 = 1e-300;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OrderingVector {
    pub r1: Complex64,
    pub r2: Complex64,
    pub r3: Complex64,
}

/// Second moments of a kernel, `⟨|β|²⟩`, `⟨β²⟩`, `⟨β*²⟩`.
///
/// For complex ordering vectors `conj_sq` is not the conjugate of `sq`; both
/// are the analytic continuation of the real-kernel moments and stay
/// meaningful for non-decaying vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelMoments {
    pub abs2: Complex64,
    pub sq: Complex64,
    pub conj_sq: Complex64,
}

impl KernelMoments {
    /// `E[β*^j β^k]`, from the generating function `exp(½ conj_sq u² + abs2 uv + ½ sq v²)`.
    pub fn mixed(&self, j: usize, k: usize) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        let mut b = j.min(k);
        loop {
            if (j - b).is_multiple_of(2) && (k - b).is_multiple_of(2) {
                let a = (j - b) / 2;
                let c = (k - b) / 2;
                let term = (self.conj_sq * 0.5).powu(a as u32) / factorial(a)
                    * self.abs2.powu(b as u32)
                    / factorial(b)
                    * (self.sq * 0.5).powu(c as u32)
                    / factorial(c);
                total += term;
            }
            if b == 0 {
                break;
            }
            b -= 1;
        }
        total * factorial(j) * factorial(k)
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

impl OrderingVector {
    pub const fn new(r1: Complex64, r2: Complex64, r3: Complex64) -> Self {
        Self { r1, r2, r3 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `(0, 0, tau)`: the rotationally symmetric kernel `(2/τ) exp(−2|α|²/τ)`.
    pub fn isotropic(tau: f64) -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), tau.into())
    }

    /// `(i a, i b, c)`, the real-valued family produced by bath evolution.
    pub fn physical(a: f64, b: f64, c: f64) -> Self {
        Self::new(Complex64::new(0.0, a), Complex64::new(0.0, b), c.into())
    }

    pub fn quadratic_norm(&self) -> Complex64 {
        quadratic_norm(self)
    }

    pub fn is_zero(&self) -> bool {
        self.r1 == Complex64::default() && self.r2 == Complex64::default() && self.r3 == Complex64::default()
    }

    pub fn scaled(self, k: f64) -> Self {
        Self::new(self.r1 * k, self.r2 * k, self.r3 * k)
    }

    /// True when r1, r2 are purely imaginary and r3 is real, i.e. the kernel is real-valued.
    pub fn is_real_class(&self, tol: f64) -> bool {
        self.r1.re.abs() <= tol && self.r2.re.abs() <= tol && self.r3.im.abs() <= tol
    }

    /// Coefficients `(A, B, C)` of the kernel exponent `A α² + B α*² + C |α|²`.
    pub fn exponent_coefficients(&self) -> Result<(Complex64, Complex64, Complex64)> {
        let rr = self.quadratic_norm();
        if rr.norm() < DEFAULT_NORM_EPS {
            return Err(Error::ZeroQuadraticNorm { norm: rr.norm() });
        }
        let a = -(self.r1 + I * self.r2) / rr;
        let b = (self.r1 - I * self.r2) / rr;
        let c = -2.0 * self.r3 / rr;
        Ok((a, b, c))
    }

    /// Real part of the exponent as the symmetric form `[x y] Q [x y]ᵀ` with `α = x + iy`.
    pub fn real_form(&self) -> Result<[[f64; 2]; 2]> {
        let (a, b, c) = self.exponent_coefficients()?;
        Ok(quadratic_real_form(a, b, c))
    }

    /// Negative-definiteness of the real quadratic form of the exponent.
    pub fn is_decaying(&self) -> bool {
        self.real_form()
            .map(|q| {
                let (lo, hi) = sym2_eigenvalues(q);
                lo < DECAY_THRESHOLD && hi < DECAY_THRESHOLD
            })
            .unwrap_or(false)
    }

    pub fn moments(&self) -> KernelMoments {
        KernelMoments {
            abs2: self.r3 * 0.5,
            sq: (self.r1 - I * self.r2) * 0.5,
            conj_sq: -(self.r1 + I * self.r2) * 0.5,
        }
    }

    /// `∫ d²β/π g_r(β) exp(β*ξ − βξ*)`. Linear in `r` inside the exponential,
    /// so it is defined for every vector and `char_{r+s} = char_r · char_s`.
    pub fn characteristic(&self, xi: Complex64) -> Complex64 {
        let m = self.moments();
        (0.5 * m.conj_sq * xi * xi - m.abs2 * xi.norm_sqr() + 0.5 * m.sq * xi.conj() * xi.conj()).exp()
    }

    /// Vector `r'` with `g_r'(y) = g_r(e^{iθ} y)`.
    pub fn rotated(&self, theta: f64) -> Self {
        let plus = (self.r1 + I * self.r2) * Complex64::from_polar(1.0, 2.0 * theta);
        let minus = (self.r1 - I * self.r2) * Complex64::from_polar(1.0, -2.0 * theta);
        Self::new((plus + minus) * 0.5, (plus - minus) / (2.0 * I), self.r3)
    }

    /// Radius beyond which `|g_r|` stays below `rel` times its peak value.
    pub fn decay_radius(&self, rel: f64) -> Result<f64> {
        let (_, hi) = self.decaying_eigenvalues()?;
        Ok(((1.0 / rel).ln() / hi.abs()).sqrt())
    }

    /// Standard deviation along the narrowest principal axis.
    pub fn min_width(&self) -> Result<f64> {
        let (lo, _) = self.decaying_eigenvalues()?;
        Ok(1.0 / (2.0 * lo.abs()).sqrt())
    }

    /// Standard deviation along the widest principal axis.
    pub fn max_width(&self) -> Result<f64> {
        let (_, hi) = self.decaying_eigenvalues()?;
        Ok(1.0 / (2.0 * hi.abs()).sqrt())
    }

    fn decaying_eigenvalues(&self) -> Result<(f64, f64)> {
        let q = self.real_form()?;
        let (lo, hi) = sym2_eigenvalues(q);
        if !(lo < DECAY_THRESHOLD && hi < DECAY_THRESHOLD) {
            return Err(Error::DivergentKernel);
        }
        Ok((lo, hi))
    }
}

impl Add for OrderingVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        convolve_orderings(&self, &rhs)
    }
}

impl Sub for OrderingVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for OrderingVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.r1, -self.r2, -self.r3)
    }
}

pub fn quadratic_norm(r: &OrderingVector) -> Complex64 {
    r.r1 * r.r1 + r.r2 * r.r2 + r.r3 * r.r3
}

/// Composition law of the class: `g_r * g_s = g_{r+s}`.
pub fn convolve_orderings(r: &OrderingVector, s: &OrderingVector) -> OrderingVector {
    OrderingVector::new(r.r1 + s.r1, r.r2 + s.r2, r.r3 + s.r3)
}

pub fn eval_kernel(r: &OrderingVector, alpha: ComplexPoint) -> Result<Complex64> {
    eval_kernel_with_eps(r, alpha, DEFAULT_NORM_EPS)
}

pub fn eval_kernel_with_eps(r: &OrderingVector, alpha: ComplexPoint, eps: f64) -> Result<Complex64> {
    let rr = r.quadratic_norm();
    if rr.norm() < eps {
        return Err(Error::ZeroQuadraticNorm { norm: rr.norm() });
    }
    let a2 = alpha * alpha;
    let c2 = alpha.conj() * alpha.conj();
    let bracket = r.r1 * (a2 - c2) + I * r.r2 * (a2 + c2) + 2.0 * r.r3 * alpha.norm_sqr();
    Ok(2.0 / rr.sqrt() * (-bracket / rr).exp())
}

/// Real part of `A α² + B α*² + C|α|²` as a symmetric 2×2 form in `(x, y)`.
pub(crate) fn quadratic_real_form(a: Complex64, b: Complex64, c: Complex64) -> [[f64; 2]; 2] {
    let xx = (a + b + c).re;
    let yy = (c - a - b).re;
    let xy = (I * (a - b)).re;
    [[xx, xy], [xy, yy]]
}

pub(crate) fn sym2_eigenvalues(q: [[f64; 2]; 2]) -> (f64, f64) {
    let mean = 0.5 * (q[0][0] + q[1][1]);
    let half = 0.5 * (q[0][0] - q[1][1]);
    let rad = (half * half + q[0][1] * q[0][1]).sqrt();
    (mean - rad, mean + rad)
}

/// A scaled and shifted kernel, `weight · g_ordering(scale·α − mean)`.
///
/// Every analytic solution of the evolution law for Gaussian initial states
/// has this form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianPhaseFunction {
    pub mean: ComplexPoint,
    pub ordering: OrderingVector,
    pub weight: f64,
    pub scale: f64,
}

impl GaussianPhaseFunction {
    pub fn new(mean: ComplexPoint, ordering: OrderingVector, weight: f64, scale: f64) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidParameter(format!("weight must be positive, got {weight}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
        }
        Ok(Self { mean, ordering, weight, scale })
    }

    /// Bare kernel `g_r(α)`.
    pub fn kernel(ordering: OrderingVector) -> Self {
        Self { mean: ComplexPoint::new(0.0, 0.0), ordering, weight: 1.0, scale: 1.0 }
    }

    /// Wigner function of the coherent state `|α0⟩`.
    pub fn coherent(alpha0: ComplexPoint) -> Self {
        Self { mean: alpha0, ordering: OrderingVector::isotropic(1.0), weight: 1.0, scale: 1.0 }
    }

    /// Wigner function of a thermal state with mean occupation `nbar`.
    pub fn thermal(nbar: f64) -> Self {
        Self::kernel(OrderingVector::isotropic(2.0 * nbar + 1.0))
    }

    pub fn eval(&self, alpha: ComplexPoint) -> Result<Complex64> {
        Ok(self.weight * eval_kernel(&self.ordering, self.scale * alpha - self.mean)?)
    }

    /// `∫ d²α/π` of the function (valid for decaying orderings).
    pub fn mass(&self) -> f64 {
        self.weight / (self.scale * self.scale)
    }

    /// Phase-space point where the function is centred.
    pub fn center(&self) -> ComplexPoint {
        self.mean / self.scale
    }

    /// The same function expressed in coordinates rotated by `theta`:
    /// returns `h` with `h(α) = self(e^{iθ} α)`.
    pub fn in_rotated_coordinates(&self, theta: f64) -> Self {
        Self {
            mean: self.mean * Complex64::from_polar(1.0, -theta),
            ordering: self.ordering.rotated(theta),
            weight: self.weight,
            scale: self.scale,
        }
    }

    /// Largest standard width in the `α` coordinate.
    pub fn max_width(&self) -> Result<f64> {
        Ok(self.ordering.max_width()? / self.scale)
    }

    pub fn min_width(&self) -> Result<f64> {
        Ok(self.ordering.min_width()? / self.scale)
    }
}

/// Parameters of `∫ d²z/π exp{ς|z|² + ξz + ηz* + f z² + g z*²}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianIntegralParams {
    pub varsigma: Complex64,
    pub xi: Complex64,
    pub eta: Complex64,
    pub f: Complex64,
    pub g: Complex64,
}

impl GaussianIntegralParams {
    /// The integrand's quadratic part as a complex symmetric 2×2 matrix `K`, exponent `vᵀKv`.
    fn quadratic_matrix(&self) -> [[Complex64; 2]; 2] {
        let off = I * (self.f - self.g);
        [[self.varsigma + self.f + self.g, off], [off, self.varsigma - self.f - self.g]]
    }

    pub fn is_convergent(&self) -> bool {
        let k = self.quadratic_matrix();
        let q = [[k[0][0].re, k[0][1].re], [k[1][0].re, k[1][1].re]];
        let (lo, hi) = sym2_eigenvalues(q);
        lo < DECAY_THRESHOLD && hi < DECAY_THRESHOLD
    }
}

/// Closed form of the complex Gaussian integral.
///
/// The square root of `ς² − 4fg` is taken as `√μ1·√μ2` over the eigenvalues
/// of `−K`, which all have positive real part on the convergent domain. This
/// is the branch connected to `1/(−ς)` at `f = g = 0`.
pub fn gaussian_integral(p: &GaussianIntegralParams) -> Result<Complex64> {
    if !p.is_convergent() {
        return Err(Error::DivergentIntegral);
    }
    let k = p.quadratic_matrix();
    let tr = -(k[0][0] + k[1][1]);
    let det = p.varsigma * p.varsigma - 4.0 * p.f * p.g;
    let disc = (0.25 * tr * tr - det).sqrt();
    let mu1 = 0.5 * tr + disc;
    let mu2 = 0.5 * tr - disc;
    let root = mu1.sqrt() * mu2.sqrt();
    let exponent = (-p.varsigma * p.xi * p.eta + p.xi * p.xi * p.g + p.eta * p.eta * p.f) / det;
    Ok(exponent.exp() / root)
}
