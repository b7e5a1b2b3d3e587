use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use sqw_ffi::*;

fn cx(re: f64, im: f64) -> SqwComplex {
    SqwComplex { re, im }
}

fn bath() -> SqwBath {
    SqwBath { kappa: 0.1, nbar: 0.5, m: cx(0.4, 0.0), omega: 1.0 }
}

fn error() -> String {
    unsafe { CStr::from_ptr(sqw_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn coherent_mean_matches_the_oracle() {
    let drive = SqwDrive { kind: SqwDriveKind::Cosine, f0: 0.2, omega: 1.0, phase: 0.0 };
    let initial = SqwGaussian {
        mean: cx(1.0, 0.5),
        ordering: SqwOrdering { r3: cx(1.0, 0.0), ..Default::default() },
        weight: 1.0,
        scale: 1.0,
    };
    let t = 1.0;
    unsafe {
        let mut f = initial;
        assert_eq!(sqw_propagate_gaussian(&initial, &bath(), &drive, t, &mut f), SqwStatus::Ok);
        let (mut rho0, mut rho) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(sqw_density_coherent(cx(1.0, 0.5), 30, &mut rho0), SqwStatus::Ok);
        assert_eq!(sqw_density_evolve(rho0, &bath(), &drive, t, 1e-3, &mut rho), SqwStatus::Ok);
        let mut a = SqwComplex::default();
        assert_eq!(sqw_density_moment(rho, 0, 1, &mut a), SqwStatus::Ok);
        let centre = (f.mean.re / f.scale, f.mean.im / f.scale);
        assert!((a.re - centre.0).abs() < 1e-9 && (a.im - centre.1).abs() < 1e-9);

        let (mut wa, mut wo) = (SqwComplex::default(), 0.0);
        let p = cx(0.6, 0.2);
        assert_eq!(sqw_gaussian_eval(&f, p, &mut wa), SqwStatus::Ok);
        assert_eq!(sqw_density_wigner(rho, p, &mut wo), SqwStatus::Ok);
        assert!((wa.re - wo).abs() < 1e-8);
        sqw_density_free(rho0);
        sqw_density_free(rho);
        sqw_density_free(ptr::null_mut());
    }
}

#[test]
fn grid_handles_round_trip() {
    let f = SqwGaussian {
        mean: cx(0.5, 0.0),
        ordering: SqwOrdering { r3: cx(1.0, 0.0), ..Default::default() },
        weight: 1.0,
        scale: 1.0,
    };
    unsafe {
        let (mut g, mut h) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(sqw_grid_sample(&f, 64, 5.0, SqwComplex::default(), &mut g), SqwStatus::Ok);
        assert_eq!(sqw_grid_propagate(g, &bath(), ptr::null(), 0.5, &mut h), SqwStatus::Ok);
        let (mut nx, mut ny) = (0usize, 0usize);
        assert_eq!(sqw_grid_dims(h, &mut nx, &mut ny), SqwStatus::Ok);
        assert_eq!((nx, ny), (64, 64));
        let mut mass = SqwComplex::default();
        assert_eq!(sqw_grid_integral(h, &mut mass), SqwStatus::Ok);
        assert!((mass.re - 1.0).abs() < 1e-4, "{mass:?}");
        let mut small = vec![SqwComplex::default(); 10];
        assert_eq!(sqw_grid_values(h, small.as_mut_ptr(), small.len()), SqwStatus::BufferTooSmall);
        assert!(error().contains("4096"));
        let mut buf = vec![SqwComplex::default(); nx * ny];
        assert_eq!(sqw_grid_values(h, buf.as_mut_ptr(), buf.len()), SqwStatus::Ok);
        assert!(buf.iter().all(|v| v.re.is_finite()));
        sqw_grid_free(g);
        sqw_grid_free(h);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let squeezed = SqwBath { kappa: 0.1, nbar: 0.0, m: cx(3.0, 0.0), omega: 1.0 };
    let f = SqwGaussian { mean: cx(0.0, 0.0), ordering: SqwOrdering { r3: cx(1.0, 0.0), ..Default::default() }, weight: 1.0, scale: 1.0 };
    let mut out = f;
    unsafe {
        assert_eq!(sqw_propagate_gaussian(&f, &squeezed, ptr::null(), 5.0, &mut out), SqwStatus::KernelNotNormalizable);
        assert!(error().contains("not normalizable"));
        let bad = SqwBath { kappa: -1.0, ..bath() };
        let mut c = SqwCoefficients::default();
        assert_eq!(sqw_coefficients(&bad, ptr::null(), 1.0, &mut c), SqwStatus::InvalidParameter);
        assert_eq!(sqw_coefficients(ptr::null(), ptr::null(), 1.0, &mut c), SqwStatus::NullPointer);
        assert_eq!(sqw_coefficients(&bath(), ptr::null(), 0.0, &mut c), SqwStatus::Ok);
        assert_eq!(c.a, 1.0);
        assert_eq!(error(), "");
    }
    let v = unsafe { CStr::from_ptr(sqw_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// The generated header compiles as C together with a caller.
#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "sqw.h"
int probe(void) {
    SqwOrdering r = {{0, 0}, {0, 0}, {1, 0}};
    SqwComplex out;
    SqwGrid *g = NULL;
    sqw_grid_free(g);
    return sqw_kernel_eval(&r, (SqwComplex){0, 0}, &out) == SQW_STATUS_OK;
}
"#,
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = Command::new(cc).args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include]).arg(&src).status().unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok()).ok_or(())
}
