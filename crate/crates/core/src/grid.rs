//! Uniform phase-space grids under the `d²α/π` measure.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{angular_frequency, fft2, next_fast_len, Direction};
use crate::kernel::{ComplexPoint, GaussianPhaseFunction, OrderingVector};

pub const DEFAULT_GRID_SIZE: usize = 256;
pub const DEFAULT_WIDTHS: f64 = 6.0;

/// Cell-centred layout: `x_i = center.re + (i − (nx−1)/2)·dx`, likewise for `y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub center: ComplexPoint,
    pub dx: f64,
    pub dy: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, center: ComplexPoint, dx: f64, dy: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter("grid sizes must be positive".into()));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid spacings must be positive, got {dx}, {dy}")));
        }
        Ok(Self { nx, ny, center, dx, dy })
    }

    /// `n × n` cells tiling `[−half, half]²` around the origin.
    pub fn square(n: usize, half: f64) -> Self {
        Self::square_at(n, half, ComplexPoint::new(0.0, 0.0))
    }

    pub fn square_at(n: usize, half: f64, center: ComplexPoint) -> Self {
        let d = 2.0 * half / n as f64;
        Self { nx: n, ny: n, center, dx: d, dy: d }
    }

    /// Square grid wide enough for `widths` standard widths of `f` around its centre.
    pub fn covering(f: &GaussianPhaseFunction, n: usize, widths: f64) -> Result<Self> {
        let half = widths * f.max_width()?;
        Ok(Self::square_at(n, half, f.center()))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.center.re + (ix as f64 - 0.5 * (self.nx as f64 - 1.0)) * self.dx
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.center.im + (iy as f64 - 0.5 * (self.ny as f64 - 1.0)) * self.dy
    }

    pub fn point(&self, ix: usize, iy: usize) -> ComplexPoint {
        ComplexPoint::new(self.x(ix), self.y(iy))
    }

    /// Distance from the centre to the outermost sample along x and y.
    pub fn sample_half_extent(&self) -> (f64, f64) {
        (0.5 * (self.nx as f64 - 1.0) * self.dx, 0.5 * (self.ny as f64 - 1.0) * self.dy)
    }

    pub fn cell_weight(&self) -> f64 {
        self.dx * self.dy / std::f64::consts::PI
    }

    /// Continuous index coordinates of `alpha`.
    pub fn fractional_index(&self, alpha: ComplexPoint) -> (f64, f64) {
        (
            (alpha.re - self.center.re) / self.dx + 0.5 * (self.nx as f64 - 1.0),
            (alpha.im - self.center.im) / self.dy + 0.5 * (self.ny as f64 - 1.0),
        )
    }

    /// Same spacing and centre, `cx`, `cy` extra cells on each side.
    pub fn grown(&self, cx: usize, cy: usize) -> Self {
        Self { nx: self.nx + 2 * cx, ny: self.ny + 2 * cy, ..*self }
    }

    /// Spacing divided by the odd factor `q`; every original node stays a node.
    pub fn refined(&self, q: usize) -> Self {
        assert!(q % 2 == 1, "refinement factor must be odd");
        Self { nx: q * self.nx, ny: q * self.ny, center: self.center, dx: self.dx / q as f64, dy: self.dy / q as f64 }
    }

    fn same_spacing(&self, other: &GridSpec) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        close(self.dx, other.dx) && close(self.dy, other.dy)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceGrid {
    pub spec: GridSpec,
    /// `values[ix * ny + iy]`
    pub values: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridWarning {
    /// Spacing exceeds half the narrowest kernel width.
    GridTooCoarse { spacing: f64, min_width: f64 },
    /// Extent covers fewer than the requested number of widths.
    ExtentTooNarrow { covered_widths: f64, requested: f64 },
}

impl PhaseSpaceGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        Self { spec, values: vec![Complex64::new(0.0, 0.0); spec.len()] }
    }

    /// Pointwise evaluation, parallel over rows.
    pub fn from_fn<F>(spec: GridSpec, f: F) -> Self
    where
        F: Fn(ComplexPoint) -> Complex64 + Sync,
    {
        let mut values = vec![Complex64::new(0.0, 0.0); spec.len()];
        values.par_chunks_mut(spec.ny).enumerate().for_each(|(ix, row)| {
            for (iy, v) in row.iter_mut().enumerate() {
                *v = f(spec.point(ix, iy));
            }
        });
        Self { spec, values }
    }

    pub fn try_from_fn<F>(spec: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(ComplexPoint) -> Result<Complex64> + Sync,
    {
        let rows: Result<Vec<Vec<Complex64>>> = (0..spec.nx)
            .into_par_iter()
            .map(|ix| (0..spec.ny).map(|iy| f(spec.point(ix, iy))).collect())
            .collect();
        Ok(Self { spec, values: rows?.concat() })
    }

    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[ix * self.spec.ny + iy]
    }

    pub fn integral(&self) -> Complex64 {
        grid_integral(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_imag_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    /// Index of the largest `|value|` (first in row-major order on ties).
    pub fn argmax_abs(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if v.norm() > self.values[best].norm() {
                best = k;
            }
        }
        (best / self.spec.ny, best % self.spec.ny)
    }

    pub fn scaled(mut self, k: Complex64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= k);
        self
    }

    pub fn max_abs_diff(&self, other: &PhaseSpaceGrid) -> Result<f64> {
        self.check_same_layout(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    /// `sqrt(Σ |a − b|² dx dy / π)`.
    pub fn l2_diff(&self, other: &PhaseSpaceGrid) -> Result<f64> {
        self.check_same_layout(other)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((s * self.spec.cell_weight()).sqrt())
    }

    fn check_same_layout(&self, other: &PhaseSpaceGrid) -> Result<()> {
        let (a, b) = (&self.spec, &other.spec);
        if a.nx != b.nx || a.ny != b.ny || !a.same_spacing(b) || (a.center - b.center).norm() > 1e-12 * (1.0 + a.center.norm())
        {
            return Err(Error::MismatchedGrids(format!("{a:?} vs {b:?}")));
        }
        Ok(())
    }

    /// Values at the nodes of `target`, each of which must coincide with a node of `self`.
    pub fn restrict_to(&self, target: &GridSpec) -> Result<PhaseSpaceGrid> {
        let s = &self.spec;
        let locate = |f: f64, n: usize| -> Option<usize> {
            let i = f.round();
            ((f - i).abs() < 1e-6 && i >= 0.0 && (i as usize) < n).then_some(i as usize)
        };
        let mut values = Vec::with_capacity(target.len());
        for ix in 0..target.nx {
            for iy in 0..target.ny {
                let (fx, fy) = s.fractional_index(target.point(ix, iy));
                match (locate(fx, s.nx), locate(fy, s.ny)) {
                    (Some(i), Some(j)) => values.push(self.values[i * s.ny + j]),
                    _ => {
                        return Err(Error::MismatchedGrids(format!(
                            "target node ({ix}, {iy}) is not a node of the source grid"
                        )))
                    }
                }
            }
        }
        Ok(PhaseSpaceGrid { spec: *target, values })
    }

    /// Largest `|value|` on the outermost ring of cells.
    pub fn edge_max_abs(&self) -> f64 {
        let s = &self.spec;
        let mut m = 0.0f64;
        for ix in 0..s.nx {
            for iy in 0..s.ny {
                if ix == 0 || iy == 0 || ix + 1 == s.nx || iy + 1 == s.ny {
                    m = m.max(self.get(ix, iy).norm());
                }
            }
        }
        m
    }

    /// Bicubic (Keys, a = −1/2) interpolation; `None` outside the interior stencil range.
    pub fn interpolate(&self, alpha: ComplexPoint) -> Option<Complex64> {
        let (fx, fy) = self.spec.fractional_index(alpha);
        let ix = fx.floor();
        let iy = fy.floor();
        if !(ix >= 1.0 && iy >= 1.0 && ix + 2.0 <= self.spec.nx as f64 - 1.0 && iy + 2.0 <= self.spec.ny as f64 - 1.0) {
            return None;
        }
        let wx = keys_weights(fx - ix);
        let wy = keys_weights(fy - iy);
        let (ix, iy) = (ix as usize - 1, iy as usize - 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, wa) in wx.iter().enumerate() {
            let mut row = Complex64::new(0.0, 0.0);
            for (b, wb) in wy.iter().enumerate() {
                row += self.get(ix + a, iy + b) * *wb;
            }
            acc += row * *wa;
        }
        Some(acc)
    }

    /// CSV with `#` metadata lines, then `ix,iy,re_alpha,im_alpha,re_value,im_value` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let s = &self.spec;
        let mut out = String::with_capacity(64 * s.len());
        writeln!(out, "# nx={}", s.nx).unwrap();
        writeln!(out, "# ny={}", s.ny).unwrap();
        writeln!(out, "# center={:e},{:e}", s.center.re, s.center.im).unwrap();
        writeln!(out, "# dx={:e}", s.dx).unwrap();
        writeln!(out, "# dy={:e}", s.dy).unwrap();
        out.push_str("ix,iy,re_alpha,im_alpha,re_value,im_value\n");
        for ix in 0..s.nx {
            for iy in 0..s.ny {
                let p = s.point(ix, iy);
                let v = self.get(ix, iy);
                writeln!(out, "{ix},{iy},{:e},{:e},{:e},{:e}", p.re, p.im, v.re, v.im).unwrap();
            }
        }
        w.write_all(out.as_bytes())?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut nx = None;
        let mut ny = None;
        let mut center = None;
        let mut dx = None;
        let mut dy = None;
        let mut rows = Vec::new();
        let bad = |msg: String| Error::Parse(msg);
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let (key, val) = meta.trim().split_once('=').ok_or_else(|| bad(format!("bad header line `{line}`")))?;
                let pf = |v: &str| v.trim().parse::<f64>().map_err(|e| bad(format!("{key}: {e}")));
                match key.trim() {
                    "nx" => nx = Some(val.trim().parse::<usize>().map_err(|e| bad(format!("nx: {e}")))?),
                    "ny" => ny = Some(val.trim().parse::<usize>().map_err(|e| bad(format!("ny: {e}")))?),
                    "center" => {
                        let (a, b) = val.split_once(',').ok_or_else(|| bad("center needs two components".into()))?;
                        center = Some(ComplexPoint::new(pf(a)?, pf(b)?));
                    }
                    "dx" => dx = Some(pf(val)?),
                    "dy" => dy = Some(pf(val)?),
                    _ => {}
                }
                continue;
            }
            if line.starts_with("ix") {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad(format!("expected 6 fields, got {}", f.len())));
            }
            let ix: usize = f[0].parse().map_err(|e| bad(format!("ix: {e}")))?;
            let iy: usize = f[1].parse().map_err(|e| bad(format!("iy: {e}")))?;
            let re: f64 = f[4].parse().map_err(|e| bad(format!("re_value: {e}")))?;
            let im: f64 = f[5].parse().map_err(|e| bad(format!("im_value: {e}")))?;
            rows.push((ix, iy, Complex64::new(re, im)));
        }
        let missing = |k: &str| bad(format!("missing header `{k}`"));
        let spec = GridSpec::new(
            nx.ok_or_else(|| missing("nx"))?,
            ny.ok_or_else(|| missing("ny"))?,
            center.ok_or_else(|| missing("center"))?,
            dx.ok_or_else(|| missing("dx"))?,
            dy.ok_or_else(|| missing("dy"))?,
        )?;
        let mut grid = Self::zeros(spec);
        for (ix, iy, v) in rows {
            if ix >= spec.nx || iy >= spec.ny {
                return Err(bad(format!("index ({ix},{iy}) outside {}x{}", spec.nx, spec.ny)));
            }
            grid.values[ix * spec.ny + iy] = v;
        }
        Ok(grid)
    }
}

fn keys_weights(t: f64) -> [f64; 4] {
    const A: f64 = -0.5;
    let k = |x: f64| {
        let x = x.abs();
        if x <= 1.0 {
            ((A + 2.0) * x - (A + 3.0)) * x * x + 1.0
        } else if x < 2.0 {
            ((A * x - 5.0 * A) * x + 8.0 * A) * x - 4.0 * A
        } else {
            0.0
        }
    };
    [k(1.0 + t), k(t), k(1.0 - t), k(2.0 - t)]
}

/// Sampling warnings for `f` on `spec`, judged against `widths` standard widths.
pub fn sampling_warnings(f: &GaussianPhaseFunction, spec: &GridSpec, widths: f64) -> Vec<GridWarning> {
    let mut out = Vec::new();
    if let (Ok(min_w), Ok(max_w)) = (f.min_width(), f.max_width()) {
        let spacing = spec.dx.max(spec.dy);
        if spacing > 0.5 * min_w {
            out.push(GridWarning::GridTooCoarse { spacing, min_width: min_w });
        }
        let (hx, hy) = spec.sample_half_extent();
        let c = f.center() - spec.center;
        let reach = (hx - c.re.abs()).min(hy - c.im.abs());
        let covered = reach / max_w;
        if covered < widths {
            out.push(GridWarning::ExtentTooNarrow { covered_widths: covered, requested: widths });
        }
    }
    out
}

pub fn sample_function(f: &GaussianPhaseFunction, spec: &GridSpec) -> Result<PhaseSpaceGrid> {
    for w in sampling_warnings(f, spec, DEFAULT_WIDTHS) {
        log::warn!("sampling: {w:?}");
    }
    PhaseSpaceGrid::try_from_fn(*spec, |a| f.eval(a))
}

pub fn grid_integral(a: &PhaseSpaceGrid) -> Complex64 {
    let row_sums: Vec<Complex64> = a.values.par_chunks(a.spec.ny).map(|row| row.iter().sum()).collect();
    row_sums.iter().sum::<Complex64>() * a.spec.cell_weight()
}

/// Linear convolution `∫ d²β/π a(β) b(α − β)` of two sampled grids.
///
/// The result has `na + nb − 1` cells per axis and is centred at
/// `a.center + b.center`.
pub fn convolve_grids(a: &PhaseSpaceGrid, b: &PhaseSpaceGrid) -> Result<PhaseSpaceGrid> {
    if !a.spec.same_spacing(&b.spec) {
        return Err(Error::MismatchedGrids(format!(
            "spacings ({}, {}) vs ({}, {})",
            a.spec.dx, a.spec.dy, b.spec.dx, b.spec.dy
        )));
    }
    let nx = a.spec.nx + b.spec.nx - 1;
    let ny = a.spec.ny + b.spec.ny - 1;
    let (px, py) = (next_fast_len(nx), next_fast_len(ny));
    let embed = |g: &PhaseSpaceGrid| {
        let mut buf = vec![Complex64::new(0.0, 0.0); px * py];
        for ix in 0..g.spec.nx {
            buf[ix * py..ix * py + g.spec.ny].copy_from_slice(&g.values[ix * g.spec.ny..(ix + 1) * g.spec.ny]);
        }
        fft2(&mut buf, px, py, Direction::Forward);
        buf
    };
    let fa = embed(a);
    let mut fb = embed(b);
    fb.par_iter_mut().zip(fa.par_iter()).for_each(|(x, y)| *x *= y);
    fft2(&mut fb, px, py, Direction::Inverse);
    let w = a.spec.cell_weight();
    let mut values = Vec::with_capacity(nx * ny);
    for ix in 0..nx {
        values.extend(fb[ix * py..ix * py + ny].iter().map(|v| v * w));
    }
    let spec = GridSpec { nx, ny, center: a.spec.center + b.spec.center, dx: a.spec.dx, dy: a.spec.dy };
    Ok(PhaseSpaceGrid { spec, values })
}

/// `∫ d²β/π g_r(β) w(α − β)` computed by multiplying the spectrum of `w` with
/// the kernel's characteristic function.
///
/// `w` is zero padded by at least `pad_x`, `pad_y` cells per side and the padded
/// grid (same spacing) is returned. Works for arbitrarily narrow kernels since
/// the kernel is never sampled in real space.
pub fn convolve_with_ordering(w: &PhaseSpaceGrid, r: &OrderingVector, pad_x: usize, pad_y: usize) -> PhaseSpaceGrid {
    convolve_with_ordering_refined(w, r, pad_x, pad_y, 1)
}

/// As [`convolve_with_ordering`], returning the result trigonometrically
/// interpolated onto a grid `refine` times finer along each axis.
pub fn convolve_with_ordering_refined(
    w: &PhaseSpaceGrid,
    r: &OrderingVector,
    pad_x: usize,
    pad_y: usize,
    refine: usize,
) -> PhaseSpaceGrid {
    let s = &w.spec;
    let nx = next_fast_len(s.nx + 2 * pad_x);
    let ny = next_fast_len(s.ny + 2 * pad_y);
    let (ox, oy) = ((nx - s.nx) / 2, (ny - s.ny) / 2);
    let mut buf = vec![Complex64::new(0.0, 0.0); nx * ny];
    for ix in 0..s.nx {
        let dst = (ix + ox) * ny + oy;
        buf[dst..dst + s.ny].copy_from_slice(&w.values[ix * s.ny..(ix + 1) * s.ny]);
    }
    fft2(&mut buf, nx, ny, Direction::Forward);
    buf.par_chunks_mut(ny).enumerate().for_each(|(mx, row)| {
        let kx = angular_frequency(mx, nx, s.dx);
        for (my, v) in row.iter_mut().enumerate() {
            let ky = angular_frequency(my, ny, s.dy);
            *v *= r.characteristic(Complex64::new(0.5 * ky, -0.5 * kx));
        }
    });
    let (fx, fy) = (refine * nx, refine * ny);
    let mut fine = if refine == 1 {
        buf
    } else {
        let mut fine = vec![Complex64::new(0.0, 0.0); fx * fy];
        let gain = (refine * refine) as f64;
        let tx: Vec<Vec<(usize, f64)>> = (0..nx).map(|m| spectral_targets(m, nx, fx)).collect();
        let ty: Vec<Vec<(usize, f64)>> = (0..ny).map(|m| spectral_targets(m, ny, fy)).collect();
        for mx in 0..nx {
            for &(jx, wx) in &tx[mx] {
                for my in 0..ny {
                    for &(jy, wy) in &ty[my] {
                        fine[jx * fy + jy] += buf[mx * ny + my] * (gain * wx * wy);
                    }
                }
            }
        }
        fine
    };
    fft2(&mut fine, fx, fy, Direction::Inverse);
    let (dx, dy) = (s.dx / refine as f64, s.dy / refine as f64);
    let x0 = s.x(0) - ox as f64 * s.dx;
    let y0 = s.y(0) - oy as f64 * s.dy;
    let center = ComplexPoint::new(x0 + 0.5 * (fx as f64 - 1.0) * dx, y0 + 0.5 * (fy as f64 - 1.0) * dy);
    PhaseSpaceGrid { spec: GridSpec { nx: fx, ny: fy, center, dx, dy }, values: fine }
}

/// Where coarse bin `m` of an `n`-point spectrum lands in an `nf`-point one.
/// An even-length Nyquist bin is split evenly between `±n/2`.
fn spectral_targets(m: usize, n: usize, nf: usize) -> Vec<(usize, f64)> {
    if n.is_multiple_of(2) && m == n / 2 {
        return vec![(n / 2, 0.5), (nf - n / 2, 0.5)];
    }
    if m < n.div_ceil(2) {
        vec![(m, 1.0)]
    } else {
        vec![(nf - (n - m), 1.0)]
    }
}
