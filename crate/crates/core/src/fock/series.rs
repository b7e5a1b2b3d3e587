//! Closed-form operator series for `ρ(t)` (rotating frame).
//!
//! ```text
//! R = Σ_{m,n} (−2λ2)^m (−2λ2*)^n / (m! n!) D(λ1) a†^m e^{λ2 a†²} a^n e^{λ2* a²} ρ0 e^{λ2* a²} a^n e^{λ2 a†²} a†^m D†(λ1)
//! ρ = 1/(n̄T+1) Σ_{p,q} u^p v^q / (p! q!) a†^p A^n a^q R a†^q A^n a^p
//! u = n̄T/(n̄T+1),  v = (n̄+1)T/(n̄T+1)
//! ```
//!
//! Both double sums factor into nested single sums, each stopped on a
//! Frobenius term-norm floor.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ops::{axpy, displacement_expm, ladder_operators, CMatrix};
use super::state::FockDensityMatrix;
use crate::error::{Error, Result};
use crate::propagator::{BathParams, DriveSpec, PropagatorCoefficients};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesTruncation {
    pub mn_max: usize,
    pub pq_max: usize,
    pub term_norm_floor: f64,
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        Self { mn_max: 12, pq_max: 30, term_norm_floor: 1e-14 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesResult {
    /// Not renormalized.
    pub state: FockDensityMatrix,
    pub trace: f64,
    /// Terms used in the `n`, `m`, `q`, `p` sums.
    pub terms: [usize; 4],
}

/// `exp(X)` for nilpotent `X` (e.g. truncated `a²`), summed to exhaustion.
fn nilpotent_exp(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    let mut out = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=n {
        term = &term * x / Complex64::new(k as f64, 0.0);
        if term.camax() == 0.0 {
            break;
        }
        out += &term;
    }
    out
}

/// `Σ_k w^k/k! · L^k X R^k`, stopping once a term's norm drops below `floor`.
fn weighted_chain(x: &CMatrix, left: &CMatrix, right: &CMatrix, w: Complex64, cap: usize, floor: f64) -> Result<(CMatrix, usize)> {
    let mut sum = x.clone();
    let mut chain = x.clone();
    let mut coeff = Complex64::new(1.0, 0.0);
    for k in 1..=cap {
        chain = left * &chain * right;
        coeff *= w / k as f64;
        let norm = chain.norm() * coeff.norm();
        if !norm.is_finite() {
            return Err(Error::NonConvergence { last_term_norm: norm, floor });
        }
        if norm < floor || chain.camax() == 0.0 {
            return Ok((sum, k));
        }
        axpy(&mut sum, coeff, &chain);
        if k == cap {
            return Err(Error::NonConvergence { last_term_norm: norm, floor });
        }
    }
    Ok((sum, cap))
}

pub fn series_propagate(
    rho0: &FockDensityMatrix,
    bath: &BathParams,
    drive: &DriveSpec,
    t: f64,
    trunc: &SeriesTruncation,
) -> Result<SeriesResult> {
    if trunc.mn_max == 0 || trunc.pq_max == 0 || !(trunc.term_norm_floor > 0.0) {
        return Err(Error::InvalidParameter("series truncation limits must be positive".into()));
    }
    let c = PropagatorCoefficients::compute(bath, drive, t)?;
    let n = rho0.dim();
    let (a, ad) = ladder_operators(n);
    let a2 = &a * &a;
    let ad2 = &ad * &ad;
    let e2c = nilpotent_exp(&(&a2 * c.lambda2.conj()));
    let e2 = nilpotent_exp(&(&ad2 * c.lambda2));
    let floor = trunc.term_norm_floor;

    let y = &e2c * &rho0.rho * &e2c;
    let (s, n_terms) = weighted_chain(&y, &a, &a, -2.0 * c.lambda2.conj(), trunc.mn_max, floor)?;
    let inner = &e2 * s * &e2;
    let (r, m_terms) = weighted_chain(&inner, &ad, &ad, -2.0 * c.lambda2, trunc.mn_max, floor)?;
    let d1 = displacement_expm(c.lambda1, n);
    let r = &d1 * r * d1.adjoint();

    let nt = bath.nbar * c.big_t;
    let u = nt / (nt + 1.0);
    let v = (bath.nbar + 1.0) * c.big_t / (nt + 1.0);
    let (q_sum, q_terms) = weighted_chain(&r, &a, &ad, v.into(), trunc.pq_max, floor)?;
    let scale = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |k, _| Complex64::new(c.a.powi(k as i32), 0.0)));
    let z = &scale * q_sum * &scale;
    let (p_sum, p_terms) = weighted_chain(&z, &ad, &a, u.into(), trunc.pq_max, floor)?;
    let rho = p_sum / Complex64::new(nt + 1.0, 0.0);
    let trace = rho.trace().re;
    Ok(SeriesResult { state: FockDensityMatrix { rho }, trace, terms: [n_terms, m_terms, q_terms, p_terms] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::lindblad::{integrate, Frame, IntegratorConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_time_is_identity() {
        let bath = BathParams::new(0.1, 0.3, c(0.2, 0.0), 1.0).unwrap();
        let rho0 = FockDensityMatrix::coherent(c(0.5, 0.5), 15).unwrap();
        let r = series_propagate(&rho0, &bath, &DriveSpec::None, 0.0, &SeriesTruncation::default()).unwrap();
        assert!((&r.state.rho - &rho0.rho).camax() < 1e-15);
    }

    #[test]
    fn vacuum_stays_vacuum_without_noise() {
        let bath = BathParams::new(0.1, 0.0, c(0.0, 0.0), 1.0).unwrap();
        let rho0 = FockDensityMatrix::vacuum(10).unwrap();
        let r = series_propagate(&rho0, &bath, &DriveSpec::None, 2.0, &SeriesTruncation::default()).unwrap();
        assert!((&r.state.rho - &rho0.rho).camax() < 1e-15);
    }

    #[test]
    fn agrees_with_rk4_on_thermal_bath() {
        let bath = BathParams::new(0.2, 0.4, c(0.0, 0.0), 1.0).unwrap();
        let rho0 = FockDensityMatrix::coherent(c(0.6, -0.3), 25).unwrap();
        let t = 1.0;
        let series = series_propagate(&rho0, &bath, &DriveSpec::None, t, &SeriesTruncation::default()).unwrap();
        let cfg = IntegratorConfig::new(1e-3, t, vec![t], Frame::Rotating).unwrap();
        let ode = integrate(&rho0, &bath, &DriveSpec::None, &cfg).unwrap();
        assert!(series.state.trace_distance(&ode.last().state).unwrap() < 1e-6);
    }

    #[test]
    fn cap_reached_is_non_convergence() {
        let bath = BathParams::new(0.5, 2.0, c(0.0, 0.0), 1.0).unwrap();
        let rho0 = FockDensityMatrix::coherent(c(1.0, 0.0), 20).unwrap();
        let trunc = SeriesTruncation { mn_max: 12, pq_max: 2, term_norm_floor: 1e-14 };
        let r = series_propagate(&rho0, &bath, &DriveSpec::None, 3.0, &trunc);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }
}
