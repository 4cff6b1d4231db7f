//! Cumulative quadrature on uniform grids.

use crate::error::{Error, Result};

/// Running integral ∫_{x₀}^{x_i} f on a uniform grid with spacing `h`.
///
/// Interior panels use the four-point cubic rule
/// h/24 (−f₋₁ + 13f₀ + 13f₁ − f₂) and the two end panels its one-sided
/// variant, so the global error is O(h⁴), the same order as composite
/// Simpson, but every node gets a value.
pub fn cumulative(values: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 4 {
        return Err(Error::Grid(format!(
            "cumulative quadrature needs at least 4 nodes (got {n})"
        )));
    }
    let f = values;
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let panel = if i == 0 {
            9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]
        } else if i == n - 2 {
            9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4]
        } else {
            -f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]
        };
        acc += h / 24.0 * panel;
        out.push(acc);
    }
    Ok(out)
}

/// Spacing of a uniform grid, or an error if the grid is not uniform to
/// within `1e-9` relative.
pub fn uniform_spacing(grid: &[f64]) -> Result<f64> {
    let n = grid.len();
    if n < 2 {
        return Err(Error::Grid("grid needs at least two points".into()));
    }
    let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::Grid("grid must be strictly increasing".into()));
    }
    let scale = grid[0].abs().max(grid[n - 1].abs());
    for (i, w) in grid.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1e-6 * scale) {
            return Err(Error::Grid(format!("grid is not uniform near index {i}")));
        }
    }
    Ok(h)
}
