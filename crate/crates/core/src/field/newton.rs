//! Logarithmic potential of piecewise-constant densities on a uniform grid.
//!
//! The density is constant on each grid cell; the potential at cell centers is
//! `-(1/2π) Σ_cells ρ_cell ∫_cell log|x - y| dy`. The cell integrals are exact
//! (closed form) for cells within two cells of the target and use the
//! midpoint rule further away. Two evaluation paths share the same kernel: a
//! direct sum (reference) and a zero-padded FFT convolution.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Offsets (in cells) up to this distance use the exact cell integral.
const EXACT_RADIUS: i64 = 2;

/// Antiderivative of `log(x² + y²)` in both variables.
fn log_antiderivative(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let mut g = 0.0;
    if x != 0.0 && y != 0.0 {
        g += x * y * (r2.ln() - 3.0);
    }
    if x != 0.0 {
        g += x * x * (y / x).atan();
    }
    if y != 0.0 {
        g += y * y * (x / y).atan();
    }
    g
}

/// `∫_{[x0,x1]×[y0,y1]} log|y| dy` in closed form.
pub fn rectangle_log_integral(x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    0.5 * (log_antiderivative(x1, y1) - log_antiderivative(x0, y1) - log_antiderivative(x1, y0)
        + log_antiderivative(x0, y0))
}

/// Integral of `log|y|` over the cell of side `h` centered at `(di h, dj h)`.
pub fn cell_weight(di: i64, dj: i64, h: f64) -> f64 {
    if di.abs() <= EXACT_RADIUS && dj.abs() <= EXACT_RADIUS {
        let (x, y) = (di as f64 * h, dj as f64 * h);
        rectangle_log_integral(x - 0.5 * h, x + 0.5 * h, y - 0.5 * h, y + 0.5 * h)
    } else {
        h * h * (h * ((di * di + dj * dj) as f64).sqrt()).ln()
    }
}

/// Potential `-(1/2π) ∫ ρ log|x-y|` at every cell center, by direct summation.
/// `density` is row-major with `x` fastest.
pub fn newtonian_direct(nx: usize, ny: usize, h: f64, density: &[f64]) -> Vec<f64> {
    assert_eq!(density.len(), nx * ny);
    let sources: Vec<(i64, i64, f64)> = density
        .iter()
        .enumerate()
        .filter(|(_, &d)| d != 0.0)
        .map(|(k, &d)| ((k % nx) as i64, (k / nx) as i64, d))
        .collect();
    (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let (i, j) = ((k % nx) as i64, (k / nx) as i64);
            let s: f64 = sources.iter().map(|&(si, sj, d)| d * cell_weight(i - si, j - sj, h)).sum();
            -s / (2.0 * PI)
        })
        .collect()
}

/// Smallest integer `>= n` whose prime factors are all in {2, 3, 5, 7}.
pub fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5, 7] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

struct Fft2 {
    lx: usize,
    ly: usize,
    row_fwd: std::sync::Arc<dyn Fft<f64>>,
    col_fwd: std::sync::Arc<dyn Fft<f64>>,
    row_inv: std::sync::Arc<dyn Fft<f64>>,
    col_inv: std::sync::Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(lx: usize, ly: usize) -> Self {
        let mut p = FftPlanner::new();
        Self {
            lx,
            ly,
            row_fwd: p.plan_fft_forward(lx),
            col_fwd: p.plan_fft_forward(ly),
            row_inv: p.plan_fft_inverse(lx),
            col_inv: p.plan_fft_inverse(ly),
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let (row, col) = if inverse { (&self.row_inv, &self.col_inv) } else { (&self.row_fwd, &self.col_fwd) };
        data.par_chunks_mut(self.lx).for_each(|r| row.process(r));
        // columns are processed in blocks so each pass over memory touches whole cache lines
        const BLOCK: usize = 16;
        let ly = self.ly;
        let lx = self.lx;
        let mut buf = vec![Complex64::new(0.0, 0.0); ly * BLOCK];
        let mut scratch = vec![Complex64::new(0.0, 0.0); col.get_inplace_scratch_len()];
        let mut i0 = 0;
        while i0 < lx {
            let w = BLOCK.min(lx - i0);
            for j in 0..ly {
                for b in 0..w {
                    buf[b * ly + j] = data[j * lx + i0 + b];
                }
            }
            for b in 0..w {
                col.process_with_scratch(&mut buf[b * ly..(b + 1) * ly], &mut scratch);
            }
            for j in 0..ly {
                for b in 0..w {
                    data[j * lx + i0 + b] = buf[b * ly + j];
                }
            }
            i0 += w;
        }
    }
}

/// Same result as [`newtonian_direct`] computed by FFT convolution.
pub fn newtonian_fft(nx: usize, ny: usize, h: f64, density: &[f64]) -> Vec<f64> {
    assert_eq!(density.len(), nx * ny);
    let mut out = vec![0.0; nx * ny];
    let nz = |k: &usize| density[*k] != 0.0;
    let (mut imin, mut imax, mut jmin, mut jmax) = (usize::MAX, 0, usize::MAX, 0);
    for k in (0..nx * ny).filter(nz) {
        let (i, j) = (k % nx, k / nx);
        imin = imin.min(i);
        imax = imax.max(i);
        jmin = jmin.min(j);
        jmax = jmax.max(j);
    }
    if imin == usize::MAX {
        return out;
    }
    let (sx, sy) = (imax - imin + 1, jmax - jmin + 1);
    let lx = smooth_size(nx + sx - 1);
    let ly = smooth_size(ny + sy - 1);
    let fft = Fft2::new(lx, ly);

    let mut a = vec![Complex64::new(0.0, 0.0); lx * ly];
    for j in 0..sy {
        for i in 0..sx {
            a[j * lx + i] = Complex64::new(density[(jmin + j) * nx + imin + i], 0.0);
        }
    }
    // kernel offsets (i - imin) - k' range over [-(imin + sx - 1), nx - 1 - imin]
    let mut b = vec![Complex64::new(0.0, 0.0); lx * ly];
    let dx_lo = -((imin + sx) as i64 - 1);
    let dx_hi = (nx - 1 - imin) as i64;
    let dy_lo = -((jmin + sy) as i64 - 1);
    let dy_hi = (ny - 1 - jmin) as i64;
    b.par_chunks_mut(lx).enumerate().for_each(|(row, chunk)| {
        let dj = wrap_offset(row, ly, dy_lo, dy_hi);
        if let Some(dj) = dj {
            for (col, v) in chunk.iter_mut().enumerate() {
                if let Some(di) = wrap_offset(col, lx, dx_lo, dx_hi) {
                    *v = Complex64::new(cell_weight(di, dj, h), 0.0);
                }
            }
        }
    });
    fft.transform(&mut a, false);
    fft.transform(&mut b, false);
    a.par_iter_mut().zip(b.par_iter()).for_each(|(x, y)| *x *= y);
    drop(b);
    fft.transform(&mut a, true);
    let scale = -1.0 / (2.0 * PI * (lx * ly) as f64);
    out.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        let jj = (j as i64 - jmin as i64).rem_euclid(ly as i64) as usize;
        for (i, v) in row.iter_mut().enumerate() {
            let ii = (i as i64 - imin as i64).rem_euclid(lx as i64) as usize;
            *v = a[jj * lx + ii].re * scale;
        }
    });
    out
}

/// Offset represented by circular index `idx`, if it lies in `[lo, hi]`.
fn wrap_offset(idx: usize, len: usize, lo: i64, hi: i64) -> Option<i64> {
    let d = idx as i64;
    if d <= hi {
        return Some(d);
    }
    let neg = d - len as i64;
    (neg >= lo).then_some(neg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_cell_integral_matches_fine_midpoint() {
        let h = 0.1;
        for (di, dj) in [(1, 0), (2, 1), (1, 1), (2, 2)] {
            let m = 400;
            let hh = h / m as f64;
            let mut s = 0.0;
            for a in 0..m {
                for b in 0..m {
                    let x = (di as f64 - 0.5) * h + (a as f64 + 0.5) * hh;
                    let y = (dj as f64 - 0.5) * h + (b as f64 + 0.5) * hh;
                    s += x.hypot(y).ln() * hh * hh;
                }
            }
            assert_relative_eq!(cell_weight(di, dj, h), s, max_relative = 1e-6);
        }
    }

    #[test]
    fn self_cell_closed_form() {
        let h: f64 = 0.37;
        let expect = h * h * (h.ln() - 0.5 * 2f64.ln() - 1.5 + PI / 4.0);
        assert_relative_eq!(cell_weight(0, 0, h), expect, max_relative = 1e-13);
    }

    #[test]
    fn fft_matches_direct_sum() {
        let (nx, ny) = (23, 17);
        let h = 0.13;
        let density: Vec<f64> = (0..nx * ny)
            .map(|k| {
                let (i, j) = (k % nx, k / nx);
                if (5..14).contains(&i) && (3..9).contains(&j) {
                    1.0 + 0.1 * (i as f64) - 0.3 * (j as f64).sin()
                } else {
                    0.0
                }
            })
            .collect();
        let a = newtonian_direct(nx, ny, h, &density);
        let b = newtonian_fft(nx, ny, h, &density);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-13, "{x} vs {y}");
        }
    }

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_size(11), 12);
        assert_eq!(smooth_size(4111), 4116);
        assert_eq!(smooth_size(1), 1);
    }
}
