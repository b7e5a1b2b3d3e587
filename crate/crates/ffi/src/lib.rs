//! C ABI over the `sqw` library.
//!
//! Every function returns an [`SqwStatus`]; results come back through out
//! pointers. On failure the message is kept per thread and read with
//! [`sqw_last_error_message`]. Grids and density matrices are opaque handles
//! released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use sqw::fock::{integrate, wigner_point, FockDensityMatrix, Frame, IntegratorConfig};
use sqw::grid::sample_function;
use sqw::kernel::eval_kernel;
use sqw::propagator::{propagate_gaussian, propagate_grid, BathParams, DriveSpec, PropagatorCoefficients};
use sqw::{ComplexPoint, Error, GaussianPhaseFunction, GridSpec, OrderingVector, PhaseSpaceGrid};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SqwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    KernelNotNormalizable = 3,
    /// Any other numerical failure (divergence, blow-up, non-convergence).
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SqwComplex {
    pub re: f64,
    pub im: f64,
}

impl From<SqwComplex> for ComplexPoint {
    fn from(z: SqwComplex) -> Self {
        ComplexPoint::new(z.re, z.im)
    }
}

impl From<ComplexPoint> for SqwComplex {
    fn from(z: ComplexPoint) -> Self {
        SqwComplex { re: z.re, im: z.im }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqwBath {
    pub kappa: f64,
    pub nbar: f64,
    pub m: SqwComplex,
    pub omega: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SqwDriveKind {
    None = 0,
    Constant = 1,
    Cosine = 2,
}

/// `f(t) = f0` or `f0 cos(omega t + phase)`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqwDrive {
    pub kind: SqwDriveKind,
    pub f0: f64,
    pub omega: f64,
    pub phase: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SqwOrdering {
    pub r1: SqwComplex,
    pub r2: SqwComplex,
    pub r3: SqwComplex,
}

/// `weight · g_ordering(scale·α − mean)`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqwGaussian {
    pub mean: SqwComplex,
    pub ordering: SqwOrdering,
    pub weight: f64,
    pub scale: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SqwCoefficients {
    pub t: f64,
    pub lambda1: SqwComplex,
    pub lambda2: SqwComplex,
    pub big_t: f64,
    pub a: f64,
    pub ordering: SqwOrdering,
}

/// Sampled phase-space function.
pub struct SqwGrid(PhaseSpaceGrid);

/// Truncated-Fock density matrix.
pub struct SqwDensity(FockDensityMatrix);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> SqwStatus {
    match err {
        Error::KernelNotNormalizable { .. } => SqwStatus::KernelNotNormalizable,
        e if e.is_numerical() => SqwStatus::Numerical,
        _ => SqwStatus::InvalidParameter,
    }
}

enum Failure {
    Null(&'static str),
    Short { needed: usize },
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> SqwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            SqwStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is null"));
            SqwStatus::NullPointer
        }
        Ok(Err(Failure::Short { needed })) => {
            set_error(format!("buffer too small, need {needed} elements"));
            SqwStatus::BufferTooSmall
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            SqwStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or valid for reads.
unsafe fn read<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

/// # Safety
/// `p` is null or valid for writes.
unsafe fn write<T>(p: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    p.write(value);
    Ok(())
}

fn bath(b: &SqwBath) -> Result<BathParams, Failure> {
    Ok(BathParams::new(b.kappa, b.nbar, b.m.into(), b.omega)?)
}

/// A null drive pointer means no drive.
unsafe fn drive(d: *const SqwDrive) -> Result<DriveSpec, Failure> {
    let spec = match d.as_ref() {
        None => DriveSpec::None,
        Some(d) => match d.kind {
            SqwDriveKind::None => DriveSpec::None,
            SqwDriveKind::Constant => DriveSpec::Constant { f0: d.f0 },
            SqwDriveKind::Cosine => DriveSpec::Cosine { f0: d.f0, omega: d.omega, phase: d.phase },
        },
    };
    spec.validate()?;
    Ok(spec)
}

fn ordering(r: &SqwOrdering) -> OrderingVector {
    OrderingVector::new(r.r1.into(), r.r2.into(), r.r3.into())
}

fn c_ordering(r: &OrderingVector) -> SqwOrdering {
    SqwOrdering { r1: r.r1.into(), r2: r.r2.into(), r3: r.r3.into() }
}

fn gaussian(g: &SqwGaussian) -> Result<GaussianPhaseFunction, Failure> {
    Ok(GaussianPhaseFunction::new(g.mean.into(), ordering(&g.ordering), g.weight, g.scale)?)
}

fn c_gaussian(g: &GaussianPhaseFunction) -> SqwGaussian {
    SqwGaussian { mean: g.mean.into(), ordering: c_ordering(&g.ordering), weight: g.weight, scale: g.scale }
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sqw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sqw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Kernel value `g_r(α)`.
///
/// # Safety
/// `r` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sqw_kernel_eval(r: *const SqwOrdering, alpha: SqwComplex, out: *mut SqwComplex) -> SqwStatus {
    guard(|| {
        let v = eval_kernel(&ordering(read(r, "r")?), alpha.into())?;
        write(out, v.into(), "out")
    })
}

/// Propagator coefficients at time `t`. `drive` may be null.
///
/// # Safety
/// `bath` and `out` must be valid; `drive` null or valid.
#[no_mangle]
pub unsafe extern "C" fn sqw_coefficients(
    bath_params: *const SqwBath,
    drive_spec: *const SqwDrive,
    t: f64,
    out: *mut SqwCoefficients,
) -> SqwStatus {
    guard(|| {
        let c = PropagatorCoefficients::compute(&bath(read(bath_params, "bath")?)?, &drive(drive_spec)?, t)?;
        let v = SqwCoefficients {
            t: c.t,
            lambda1: c.lambda1.into(),
            lambda2: c.lambda2.into(),
            big_t: c.big_t,
            a: c.a,
            ordering: c_ordering(&c.ordering),
        };
        write(out, v, "out")
    })
}

/// Rotating-frame evolution of a Gaussian Wigner function.
///
/// # Safety
/// `initial`, `bath` and `out` must be valid; `drive` null or valid.
#[no_mangle]
pub unsafe extern "C" fn sqw_propagate_gaussian(
    initial: *const SqwGaussian,
    bath_params: *const SqwBath,
    drive_spec: *const SqwDrive,
    t: f64,
    out: *mut SqwGaussian,
) -> SqwStatus {
    guard(|| {
        let f0 = gaussian(read(initial, "initial")?)?;
        let f = propagate_gaussian(&f0, &bath(read(bath_params, "bath")?)?, &drive(drive_spec)?, t)?;
        write(out, c_gaussian(&f), "out")
    })
}

/// # Safety
/// `f` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sqw_gaussian_eval(f: *const SqwGaussian, alpha: SqwComplex, out: *mut SqwComplex) -> SqwStatus {
    guard(|| {
        let v = gaussian(read(f, "f")?)?.eval(alpha.into())?;
        write(out, v.into(), "out")
    })
}

/// Samples `f` on an `n × n` grid over `[-half, half]²` around `center`.
///
/// # Safety
/// `f` and `out` must be valid. The handle written to `out` is freed with [`sqw_grid_free`].
#[no_mangle]
pub unsafe extern "C" fn sqw_grid_sample(
    f: *const SqwGaussian,
    n: usize,
    half: f64,
    center: SqwComplex,
    out: *mut *mut SqwGrid,
) -> SqwStatus {
    guard(|| {
        let g = gaussian(read(f, "f")?)?;
        if n < 2 || !(half > 0.0 && half.is_finite()) {
            return Err(Error::InvalidParameter("grid needs n >= 2 and half > 0".into()).into());
        }
        let grid = sample_function(&g, &GridSpec::square_at(n, half, center.into()))?;
        write(out, boxed(SqwGrid(grid)), "out")
    })
}

/// Evolves a sampled Wigner function to time `t`, resampled on the input grid.
///
/// # Safety
/// `grid`, `bath` and `out` must be valid; `drive` null or valid.
#[no_mangle]
pub unsafe extern "C" fn sqw_grid_propagate(
    grid: *const SqwGrid,
    bath_params: *const SqwBath,
    drive_spec: *const SqwDrive,
    t: f64,
    out: *mut *mut SqwGrid,
) -> SqwStatus {
    guard(|| {
        let w0 = &read(grid, "grid")?.0;
        let w = propagate_grid(w0, &bath(read(bath_params, "bath")?)?, &drive(drive_spec)?, t, &w0.spec)?;
        write(out, boxed(SqwGrid(w)), "out")
    })
}

/// Number of nodes along each axis.
///
/// # Safety
/// `grid`, `nx` and `ny` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sqw_grid_dims(grid: *const SqwGrid, nx: *mut usize, ny: *mut usize) -> SqwStatus {
    guard(|| {
        let s = read(grid, "grid")?.0.spec;
        write(nx, s.nx, "nx")?;
        write(ny, s.ny, "ny")
    })
}

/// Copies the node values, x-major (`values[ix * ny + iy]`), into `buf`.
///
/// # Safety
/// `grid` must be valid; `buf` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn sqw_grid_values(grid: *const SqwGrid, buf: *mut SqwComplex, len: usize) -> SqwStatus {
    guard(|| {
        let g = &read(grid, "grid")?.0;
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        if len < g.values.len() {
            return Err(Failure::Short { needed: g.values.len() });
        }
        for (k, v) in g.values.iter().enumerate() {
            buf.add(k).write((*v).into());
        }
        Ok(())
    })
}

/// `∫ d²α/π` by the grid quadrature.
///
/// # Safety
/// `grid` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sqw_grid_integral(grid: *const SqwGrid, out: *mut SqwComplex) -> SqwStatus {
    guard(|| write(out, read(grid, "grid")?.0.integral().into(), "out"))
}

/// # Safety
/// `grid` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sqw_grid_free(grid: *mut SqwGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Coherent state `|α0⟩` on `n` Fock levels.
///
/// # Safety
/// `out` must be valid. The handle is freed with [`sqw_density_free`].
#[no_mangle]
pub unsafe extern "C" fn sqw_density_coherent(alpha0: SqwComplex, n: usize, out: *mut *mut SqwDensity) -> SqwStatus {
    guard(|| write(out, boxed(SqwDensity(FockDensityMatrix::coherent(alpha0.into(), n)?)), "out"))
}

/// Thermal state with mean occupation `nbar` on `n` Fock levels.
///
/// # Safety
/// `out` must be valid. The handle is freed with [`sqw_density_free`].
#[no_mangle]
pub unsafe extern "C" fn sqw_density_thermal(nbar: f64, n: usize, out: *mut *mut SqwDensity) -> SqwStatus {
    guard(|| write(out, boxed(SqwDensity(FockDensityMatrix::thermal(nbar, n)?)), "out"))
}

/// Master-equation evolution to time `t` in the rotating frame, RK4 with step `dt`.
///
/// # Safety
/// `rho`, `bath` and `out` must be valid; `drive` null or valid.
#[no_mangle]
pub unsafe extern "C" fn sqw_density_evolve(
    rho: *const SqwDensity,
    bath_params: *const SqwBath,
    drive_spec: *const SqwDrive,
    t: f64,
    dt: f64,
    out: *mut *mut SqwDensity,
) -> SqwStatus {
    guard(|| {
        let rho0 = &read(rho, "rho")?.0;
        let step = if t > 0.0 { dt.min(t) } else { dt };
        let cfg = IntegratorConfig::new(step, t, vec![t], Frame::Rotating)?;
        let traj = integrate(rho0, &bath(read(bath_params, "bath")?)?, &drive(drive_spec)?, &cfg)?;
        write(out, boxed(SqwDensity(traj.last().state.clone())), "out")
    })
}

/// `⟨a†^m a^n⟩`.
///
/// # Safety
/// `rho` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sqw_density_moment(rho: *const SqwDensity, m: usize, n: usize, out: *mut SqwComplex) -> SqwStatus {
    guard(|| write(out, read(rho, "rho")?.0.moment(m, n).into(), "out"))
}

/// Wigner function at one point.
///
/// # Safety
/// `rho` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sqw_density_wigner(rho: *const SqwDensity, alpha: SqwComplex, out: *mut f64) -> SqwStatus {
    guard(|| write(out, wigner_point(&read(rho, "rho")?.0, alpha.into()), "out"))
}

/// # Safety
/// `rho` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sqw_density_free(rho: *mut SqwDensity) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;
    use std::ptr;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(sqw_last_error_message()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn null_out_pointer_is_reported() {
        let r = SqwOrdering { r3: SqwComplex { re: 1.0, im: 0.0 }, ..Default::default() };
        let s = unsafe { sqw_kernel_eval(&r, SqwComplex::default(), ptr::null_mut()) };
        assert_eq!(s, SqwStatus::NullPointer);
        assert_eq!(last_error(), "out is null");
    }

    #[test]
    fn isotropic_kernel_at_origin() {
        let r = SqwOrdering { r3: SqwComplex { re: 1.0, im: 0.0 }, ..Default::default() };
        let mut v = SqwComplex::default();
        assert_eq!(unsafe { sqw_kernel_eval(&r, SqwComplex::default(), &mut v) }, SqwStatus::Ok);
        assert!((v.re - 2.0).abs() < 1e-15 && v.im == 0.0);
        assert_eq!(last_error(), "");
    }

    #[test]
    fn zero_ordering_is_invalid() {
        let mut v = SqwComplex::default();
        let s = unsafe { sqw_kernel_eval(&SqwOrdering::default(), SqwComplex::default(), &mut v) };
        assert_eq!(s, SqwStatus::Numerical);
        assert!(!last_error().is_empty());
    }
}
