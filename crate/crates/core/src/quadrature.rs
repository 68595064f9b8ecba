//! Small quadrature helpers shared by the analysis modules.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("at least one node");
    GaussLegendre::new(n).into_node_weight_pairs().into_vec()
}

/// Composite Gauss-Legendre nodes on `[a, b]` with `panels` equal panels.
pub fn composite_gauss(a: f64, b: f64, panels: usize, per_panel: usize) -> Vec<(f64, f64)> {
    let base = gauss_legendre(per_panel);
    let w = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * per_panel);
    for p in 0..panels {
        let lo = a + p as f64 * w;
        for &(x, wt) in &base {
            out.push((lo + 0.5 * w * (x + 1.0), 0.5 * w * wt));
        }
    }
    out
}

/// Equispaced angles `2πj/n`.
pub fn circle_angles(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| 2.0 * PI * j as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_rule_integrates_polynomials() {
        let q = composite_gauss(0.5, 2.0, 3, 4);
        let s: f64 = q.iter().map(|(x, w)| w * x.powi(7)).sum();
        assert!((s - (2f64.powi(8) - 0.5f64.powi(8)) / 8.0).abs() < 1e-12);
    }
}
