//! Ladder and displacement operators in a truncated Fock basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::kernel::ComplexPoint;

pub type CMatrix = DMatrix<Complex64>;

/// `(a, a†)` with `a_{k−1,k} = √k`.
pub fn ladder_operators(n: usize) -> (CMatrix, CMatrix) {
    let mut lower = CMatrix::zeros(n, n);
    for k in 1..n {
        lower[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    let raise = lower.adjoint();
    (lower, raise)
}

pub fn number_operator(n: usize) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |k, _| Complex64::new(k as f64, 0.0)))
}

/// `y += a·x`, element-wise.
pub(crate) fn axpy(y: &mut CMatrix, a: Complex64, x: &CMatrix) {
    y.as_mut_slice().iter_mut().zip(x.as_slice()).for_each(|(y, x)| *y += a * x);
}

/// `ln k!` for `k = 0..n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Projection of `D(β)` onto the first `n` levels, from the Laguerre closed form
/// `⟨m|D(β)|k⟩ = √(k!/m!) β^{m−k} e^{−|β|²/2} L_k^{(m−k)}(|β|²)` for `m ≥ k`.
///
/// Unlike the exponential of a truncated generator, these are the exact
/// matrix elements of the infinite-dimensional operator.
pub fn displacement(beta: ComplexPoint, n: usize) -> CMatrix {
    let mut d = CMatrix::zeros(n, n);
    let lnf = ln_factorials(n);
    displacement_into(beta, &lnf, &mut d);
    d
}

/// As [`displacement`], writing into `out` (size taken from `out`) with a precomputed `ln k!` table.
pub fn displacement_into(beta: ComplexPoint, lnf: &[f64], out: &mut CMatrix) {
    let n = out.nrows();
    out.fill(Complex64::new(0.0, 0.0));
    let x = beta.norm_sqr();
    if x == 0.0 {
        out.fill_diagonal(Complex64::new(1.0, 0.0));
        return;
    }
    let ln_abs = 0.5 * x.ln();
    let theta = beta.arg();
    let mut lag = vec![0.0; n];
    for d in 0..n {
        let len = n - d;
        laguerre_column(d as f64, x, &mut lag[..len]);
        let phase_lower = Complex64::from_polar(1.0, d as f64 * theta);
        let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
        let phase_upper = Complex64::from_polar(sign, -(d as f64) * theta);
        for k in 0..len {
            let mag = (0.5 * (lnf[k] - lnf[k + d]) + d as f64 * ln_abs - 0.5 * x).exp() * lag[k];
            out[(k + d, k)] = phase_lower * mag;
            if d > 0 {
                out[(k, k + d)] = phase_upper * mag;
            }
        }
    }
}

/// `L_k^{(a)}(x)` for `k = 0..out.len()` by the three-term recurrence.
fn laguerre_column(a: f64, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = 1.0 + a - x;
    }
    for k in 1..out.len() - 1 {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0 + a - x) * out[k] - (kf + a) * out[k - 1]) / (kf + 1.0);
    }
}

/// `exp(β a† − β* a)` of the truncated generator (scaling and squaring).
pub fn displacement_expm(beta: ComplexPoint, n: usize) -> CMatrix {
    let (a, ad) = ladder_operators(n);
    (ad * beta - a * beta.conj()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ladder_examples() {
        let (a2, ad2) = ladder_operators(2);
        assert_eq!(a2[(0, 1)], c(1.0, 0.0));
        assert_eq!(a2.iter().filter(|v| v.norm() > 0.0).count(), 1);
        assert_eq!(ad2, a2.adjoint());
        let n = 6;
        let (a, ad6) = ladder_operators(n);
        let comm = &a * &ad6 - &ad6 * &a;
        for i in 0..n {
            for j in 0..n {
                let want = if i != j {
                    0.0
                } else if i == n - 1 {
                    -(n as f64 - 1.0)
                } else {
                    1.0
                };
                assert!((comm[(i, j)] - want).norm() < 1e-14);
            }
        }
        assert!((&ad6 * &a - number_operator(n)).camax() < 1e-14);
    }

    #[test]
    fn displacement_on_vacuum_is_coherent() {
        let beta = c(0.8, -0.6);
        let n = 20;
        let d = displacement(beta, n);
        let lnf = ln_factorials(n);
        for m in 0..n {
            let want = (-0.5 * beta.norm_sqr()).exp() * beta.powu(m as u32) / (0.5 * lnf[m]).exp();
            assert!((d[(m, 0)] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn displacement_is_unitary_inside_the_block() {
        let n = 90;
        let d = displacement(c(1.7, 2.2), n);
        let prod = &d * d.adjoint();
        for i in 0..20 {
            for j in 0..20 {
                let want = if i == j { 1.0 } else { 0.0 };
                let err = (prod[(i, j)] - want).norm();
                assert!(err < 1e-10, "({i},{j}) {err:e}");
            }
        }
    }

    #[test]
    fn displacement_composition_and_inverse() {
        let n = 80;
        let b = c(0.6, 0.3);
        let d = displacement(b, n);
        let dm = displacement(-b, n);
        assert!((&d.adjoint() - &dm).camax() < 1e-13);
        let d2 = displacement(2.0 * b, n);
        let dd = &d * &d;
        for i in 0..30 {
            for j in 0..30 {
                assert!((dd[(i, j)] - d2[(i, j)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn exact_and_truncated_exponential_agree_at_low_levels() {
        let b = c(0.5, -0.4);
        let exact = displacement(b, 60);
        let trunc = displacement_expm(b, 60);
        for i in 0..15 {
            for j in 0..15 {
                assert!((exact[(i, j)] - trunc[(i, j)]).norm() < 1e-10);
            }
        }
    }
}
