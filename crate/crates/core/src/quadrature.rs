//! Adaptive Simpson quadrature for complex-valued integrands on an interval.

use num_complex::Complex64;

const MAX_DEPTH: u32 = 50;

/// `∫_a^b f` to relative tolerance `rel_tol` (absolute floor `1e-300`).
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_tol: f64) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    if a == b {
        return Complex64::new(0.0, 0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // A coarse estimate of the magnitude sets the absolute target.
    let scale = {
        let n = 64;
        let h = (b - a) / n as f64;
        (0..=n).map(|k| f(a + k as f64 * h).norm()).sum::<f64>() * h.abs()
    };
    let tol = (rel_tol * scale).max(1e-300);
    recurse(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(f: &F, a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64, whole: Complex64, tol: f64, depth: u32) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_exponential() {
        let v = adaptive_simpson(|x| Complex64::new(x * x * x, 0.0), 0.0, 2.0, 1e-12);
        assert!((v.re - 4.0).abs() < 1e-12);
        let v = adaptive_simpson(|x| Complex64::new(0.0, x).exp(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-10);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = adaptive_simpson(|x| Complex64::new(x.exp(), 0.0), 1.0, 0.0, 1e-12);
        assert!((v.re + (1f64.exp() - 1.0)).abs() < 1e-10);
    }
}
