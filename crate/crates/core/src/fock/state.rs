use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::ops::{ladder_operators, ln_factorials, CMatrix};
use crate::error::{Error, Result};
use crate::kernel::{ComplexPoint, GaussianPhaseFunction};

/// Tail population above which a state is flagged as truncated.
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-8;

/// Truncated density matrix on levels `0..N`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockDensityMatrix {
    pub rho: CMatrix,
}

/// Health indicators of a state. Nothing is corrected, only measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Monitors {
    pub trace: f64,
    pub herm_drift: f64,
    pub min_eig: f64,
    pub tail: f64,
}

impl Monitors {
    pub fn truncated(&self, threshold: f64) -> bool {
        self.tail > threshold
    }
}

impl FockDensityMatrix {
    pub fn new(rho: CMatrix) -> Result<Self> {
        if rho.nrows() != rho.ncols() || rho.nrows() < 2 {
            return Err(Error::InvalidParameter(format!(
                "density matrix must be square with N >= 2, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(Self { rho })
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        Self::fock(0, n)
    }

    pub fn fock(k: usize, n: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidParameter(format!("level {k} outside cutoff {n}")));
        }
        let mut rho = CMatrix::zeros(n, n);
        rho[(k, k)] = Complex64::new(1.0, 0.0);
        Self::new(rho)
    }

    /// `|α0⟩⟨α0|` projected on `N` levels and renormalized to unit trace.
    pub fn coherent(alpha0: ComplexPoint, n: usize) -> Result<Self> {
        let lnf = ln_factorials(n);
        let x = alpha0.norm_sqr();
        let amps = DVector::from_fn(n, |k, _| {
            if x == 0.0 {
                return Complex64::new(if k == 0 { 1.0 } else { 0.0 }, 0.0);
            }
            let mag = (0.5 * k as f64 * x.ln() - 0.5 * lnf[k] - 0.5 * x).exp();
            Complex64::from_polar(mag, k as f64 * alpha0.arg())
        });
        let norm = amps.norm_squared();
        Self::new(&amps * amps.adjoint() / Complex64::new(norm, 0.0))
    }

    /// Thermal state with mean occupation `nbar`, truncated and renormalized.
    pub fn thermal(nbar: f64, n: usize) -> Result<Self> {
        if !(nbar >= 0.0) {
            return Err(Error::InvalidParameter(format!("nbar must be nonnegative, got {nbar}")));
        }
        let q = nbar / (nbar + 1.0);
        let p: Vec<f64> = (0..n).map(|k| q.powi(k as i32)).collect();
        let z: f64 = p.iter().sum();
        let rho = CMatrix::from_diagonal(&DVector::from_fn(n, |k, _| Complex64::new(p[k] / z, 0.0)));
        Self::new(rho)
    }

    /// State whose Wigner function is the Gaussian `f`, by Weyl quantization.
    pub fn gaussian(f: &GaussianPhaseFunction, n: usize) -> Result<Self> {
        Self::new(super::wigner::quantize_gaussian(f, n)?)
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// `max |ρ − ρ†|`.
    pub fn herm_drift(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).camax()
    }

    fn hermitian_part(&self) -> CMatrix {
        (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.hermitian_part().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Population of the top level.
    pub fn tail(&self) -> f64 {
        let n = self.dim();
        self.rho[(n - 1, n - 1)].re
    }

    pub fn monitors(&self) -> Monitors {
        Monitors { trace: self.trace().re, herm_drift: self.herm_drift(), min_eig: self.min_eigenvalue(), tail: self.tail() }
    }

    /// `Tr[ρ a†^m a^n]`.
    pub fn moment(&self, m: usize, n: usize) -> Complex64 {
        let dim = self.dim();
        let (a, ad) = ladder_operators(dim);
        let mut op = CMatrix::identity(dim, dim);
        for _ in 0..n {
            op = &a * op;
        }
        for _ in 0..m {
            op = &ad * op;
        }
        (&self.rho * op).trace()
    }

    /// Half the sum of absolute eigenvalues of the (Hermitian part of the) difference.
    pub fn trace_distance(&self, other: &FockDensityMatrix) -> Result<f64> {
        self.check_dim(other)?;
        let d = (&self.rho - &other.rho + (&self.rho - &other.rho).adjoint()) * Complex64::new(0.5, 0.0);
        Ok(0.5 * d.symmetric_eigenvalues().iter().map(|v| v.abs()).sum::<f64>())
    }

    pub fn frobenius_distance(&self, other: &FockDensityMatrix) -> Result<f64> {
        self.check_dim(other)?;
        Ok((&self.rho - &other.rho).norm())
    }

    fn check_dim(&self, other: &FockDensityMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidParameter(format!("dimension mismatch {} vs {}", self.dim(), other.dim())));
        }
        Ok(())
    }

    /// CSV rows `row,col,re,im`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        write_matrix_csv(&self.rho, &[], &mut w)
    }
}

/// Matrix as `row,col,re,im` CSV, preceded by `# key=value` metadata lines.
pub fn write_matrix_csv<W: std::io::Write>(m: &CMatrix, meta: &[(&str, String)], w: &mut W) -> Result<()> {
    use std::fmt::Write as _;
    let mut out = String::new();
    for (k, v) in meta {
        writeln!(out, "# {k}={v}").unwrap();
    }
    out.push_str("row,col,re,im\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            writeln!(out, "{i},{j},{:e},{:e}", v.re, v.im).unwrap();
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}
