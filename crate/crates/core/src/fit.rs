//! Small dense least-squares problems and an independent frequency
//! estimator for uniformly sampled sinusoids.

use std::f64::consts::{FRAC_PI_2, TAU};

use crate::error::{Error, Result};

/// Coefficients of a two-column least-squares fit and its residual.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoColumnFit {
    pub coef: [f64; 2],
    pub residual: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimises ‖c₀ x + c₁ y − target‖₂ by modified Gram–Schmidt with one
/// reorthogonalisation pass.
pub fn least_squares_2(x: &[f64], y: &[f64], target: &[f64]) -> Result<TwoColumnFit> {
    let n = target.len();
    if x.len() != n || y.len() != n || n < 2 {
        return Err(Error::Grid("least squares needs two columns of equal length >= 2".into()));
    }
    let nx = dot(x, x).sqrt();
    if nx == 0.0 {
        return Err(Error::Grid("least squares: first column is zero".into()));
    }
    let q0: Vec<f64> = x.iter().map(|v| v / nx).collect();
    let mut w = y.to_vec();
    let mut r01 = 0.0;
    for _ in 0..2 {
        let p = dot(&q0, &w);
        r01 += p;
        w.iter_mut().zip(&q0).for_each(|(wi, qi)| *wi -= p * qi);
    }
    let r11 = dot(&w, &w).sqrt();
    if r11 <= 1e-14 * dot(y, y).sqrt() {
        return Err(Error::Grid("least squares: columns are linearly dependent".into()));
    }
    let q1: Vec<f64> = w.iter().map(|v| v / r11).collect();
    let b0 = dot(&q0, target);
    let b1 = dot(&q1, target);
    let c1 = b1 / r11;
    let c0 = (b0 - r01 * c1) / nx;
    let residual = target
        .iter()
        .zip(x.iter().zip(y))
        .map(|(t, (xi, yi))| t - (c0 * xi + c1 * yi))
        .collect();
    Ok(TwoColumnFit {
        coef: [c0, c1],
        residual,
    })
}

pub fn rms(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (dot(v, v) / v.len() as f64).sqrt()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Least-squares fit to A cos ωη + B sin ωη, or A + Bη when ω = 0.
pub fn harmonic_fit(grid: &[f64], values: &[f64], omega: f64) -> Result<TwoColumnFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = if omega == 0.0 {
        grid.iter().map(|&e| (1.0, e)).unzip()
    } else {
        grid.iter().map(|&e| ((omega * e).cos(), (omega * e).sin())).unzip()
    };
    least_squares_2(&x, &y, values)
}

/// Lag-m linear-prediction estimate of cos(ω m h):
/// f(η + mh) + f(η − mh) = 2 cos(ω m h) f(η) holds exactly for any sinusoid.
fn lag_cosine(values: &[f64], lag: usize) -> Option<f64> {
    let n = values.len();
    if 2 * lag >= n {
        return None;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in lag..n - lag {
        num += values[i] * (values[i + lag] + values[i - lag]);
        den += values[i] * values[i];
    }
    if den == 0.0 {
        return None;
    }
    Some((num / (2.0 * den)).clamp(-1.0, 1.0))
}

/// Recovers the angular frequency of a uniformly sampled sinusoid from the
/// samples alone.
///
/// A single-lag pass gives a coarse value; the lag is then lengthened until
/// ω·lag·h sits near π/2, where the recovered cosine is most sensitive to ω,
/// and the coarse value keeps the arccos branch unambiguous.
pub fn estimate_frequency(grid: &[f64], values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 8 || grid.len() != n {
        return None;
    }
    let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    let mut lag = 1;
    let mut omega = lag_cosine(values, lag)?.acos() / (lag as f64 * h);
    let max_lag = (n - 1) / 3;
    for _ in 0..4 {
        if omega == 0.0 {
            break;
        }
        let target = (FRAC_PI_2 / (omega * h)).round() as usize;
        let new_lag = target.clamp(1, max_lag.max(1));
        if new_lag == lag {
            break;
        }
        let c = lag_cosine(values, new_lag)?;
        let phase = omega * new_lag as f64 * h;
        // arccos only gives the phase modulo 2π and its sign; pick the
        // branch closest to the coarse phase
        let base = c.acos();
        let turns = (phase / TAU).round();
        let best = [turns - 1.0, turns, turns + 1.0]
            .into_iter()
            .flat_map(|t| [t * TAU + base, t * TAU - base])
            .min_by(|a, b| (a - phase).abs().total_cmp(&(b - phase).abs()))
            .unwrap();
        omega = best / (new_lag as f64 * h);
        lag = new_lag;
    }
    Some(omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fit_recovers_coefficients() {
        let grid: Vec<f64> = (0..100).map(|i| 0.1 + 0.05 * i as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|e| 1.5 * (0.7 * e).cos() - 0.25 * (0.7 * e).sin()).collect();
        let f = harmonic_fit(&grid, &vals, 0.7).unwrap();
        assert!((f.coef[0] - 1.5).abs() < 1e-12 && (f.coef[1] + 0.25).abs() < 1e-12);
        assert!(max_abs(&f.residual) < 1e-12);
    }

    #[test]
    fn linear_basis_for_zero_frequency() {
        let grid: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|e| 2.0 + 3.0 * e).collect();
        let f = harmonic_fit(&grid, &vals, 0.0).unwrap();
        assert!((f.coef[0] - 2.0).abs() < 1e-12 && (f.coef[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn dependent_columns_rejected() {
        let x = [1.0, 2.0, 3.0];
        assert!(least_squares_2(&x, &x, &x).is_err());
        assert!(least_squares_2(&[0.0; 3], &x, &x).is_err());
    }

    #[test]
    fn frequency_estimator_short_and_long_windows() {
        for (omega, lo, hi, n) in [
            (1.0, 0.1, 1.2, 2000),
            (4.0, 0.1, 1.2, 2000),
            (2.886_751_345_948_129, 0.1, 10.0, 2000),
            (0.3, 0.1, 10.0, 500),
        ] {
            let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
            let vals: Vec<f64> = grid.iter().map(|e| 0.4 * (omega * e).cos() + 1.1 * (omega * e).sin()).collect();
            let est = estimate_frequency(&grid, &vals).unwrap();
            assert!((est - omega).abs() / omega < 1e-8, "{omega}: {est}");
        }
    }

    #[test]
    fn frequency_of_a_line_is_zero() {
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let vals: Vec<f64> = grid.iter().map(|e| 1.0 + e).collect();
        let est = estimate_frequency(&grid, &vals).unwrap();
        assert!(est.abs() < 1e-5, "{est}");
    }
}
