//! Dormand–Prince 5(4) embedded Runge–Kutta integrator with the
//! fourth-order continuous extension of Hairer, Nørsett & Wanner.

use crate::error::{Error, Result};

/// A first-order system y′ = f(t, y) of fixed dimension.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> Result<[f64; N]>;

    /// Multiplier on the absolute tolerance of component `i` at time `t`.
    /// Systems whose observable amplifies some components override this.
    fn atol_scale(&self, _t: f64, _i: usize) -> f64 {
        1.0
    }
}

impl<const N: usize, F> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    fn rhs(&self, t: f64, y: &[f64; N]) -> Result<[f64; N]> {
        self(t, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Result<Self> {
        if !(rtol > 0.0 && atol > 0.0 && rtol.is_finite() && atol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerances must be positive (rtol = {rtol}, atol = {atol})"
            )));
        }
        Ok(Self { rtol, atol })
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

/// Counters collected during one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const MAX_STEPS: usize = 1_000_000;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// Result of one Dormand–Prince step: new value, error estimate, the
/// last stage (FSAL) and the dense-output coefficients.
struct Step<const N: usize> {
    y_new: [f64; N],
    k7: [f64; N],
    err: [f64; N],
    cont: [[f64; N]; 5],
}

fn dopri_step<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> Result<Step<N>> {
    let k2 = sys.rhs(t + C2 * h, &axpy(y, h, &[(A21, k1)]))?;
    let k3 = sys.rhs(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = sys.rhs(
        t + C4 * h,
        &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
    )?;
    let k5 = sys.rhs(
        t + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = sys.rhs(
        t + h,
        &axpy(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    )?;
    let y_new = axpy(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = sys.rhs(t + h, &y_new)?;

    let mut err = [0.0; N];
    let mut cont = [[0.0; N]; 5];
    for i in 0..N {
        err[i] = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let ydiff = y_new[i] - y[i];
        let bspl = h * k1[i] - ydiff;
        cont[0][i] = y[i];
        cont[1][i] = ydiff;
        cont[2][i] = bspl;
        cont[3][i] = ydiff - h * k7[i] - bspl;
        cont[4][i] = h
            * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Ok(Step {
        y_new,
        k7,
        err,
        cont,
    })
}

fn dense<const N: usize>(cont: &[[f64; N]; 5], theta: f64) -> [f64; N] {
    let theta1 = 1.0 - theta;
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = cont[0][i]
            + theta
                * (cont[1][i]
                    + theta1 * (cont[2][i] + theta * (cont[3][i] + theta1 * cont[4][i])));
    }
    out
}

fn error_norm<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t: f64,
    err: &[f64; N],
    y0: &[f64; N],
    y1: &[f64; N],
    tol: Tolerances,
) -> f64 {
    let mut sum = 0.0;
    for i in 0..N {
        let sc = tol.atol * sys.atol_scale(t, i) + tol.rtol * y0[i].abs().max(y1[i].abs());
        sum += (err[i] / sc).powi(2);
    }
    (sum / N as f64).sqrt()
}

fn initial_step<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    span: f64,
    tol: Tolerances,
) -> Result<f64> {
    let scale = |y: &[f64; N], i: usize| tol.atol * sys.atol_scale(t0, i) + tol.rtol * y[i].abs();
    let norm = |v: &[f64; N]| {
        (v.iter()
            .enumerate()
            .map(|(i, x)| (x / scale(y0, i)).powi(2))
            .sum::<f64>()
            / N as f64)
            .sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span);
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = sys.rhs(t0 + h0, &y1)?;
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Integrates from `grid[0]` to `grid[last]` and returns the solution at
/// every point of the strictly increasing `grid`. Points strictly inside
/// the range are filled by dense output; the endpoint is hit exactly.
pub fn solve_dense<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    y0: [f64; N],
    grid: &[f64],
    tol: Tolerances,
) -> Result<(Vec<[f64; N]>, Stats)> {
    if grid.len() < 2 {
        return Err(Error::Grid("at least two output points required".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Grid("output grid must be strictly increasing".into()));
    }
    let t0 = grid[0];
    let t_end = *grid.last().unwrap();
    let span = t_end - t0;

    let mut stats = Stats::default();
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0);
    let mut next_out = 1;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = sys.rhs(t, &y)?;
    stats.evaluations += 1;
    let mut h = initial_step(sys, t, &y, &k1, span, tol)?;
    stats.evaluations += 1;
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;

    while next_out < grid.len() {
        if stats.accepted + stats.rejected >= MAX_STEPS {
            return Err(Error::TooManySteps { last_eta: t });
        }
        if h.abs() <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { last_eta: t });
        }
        let last = t + h >= t_end || (t_end - (t + h)) <= 1e-12 * span;
        if last {
            h = t_end - t;
        }
        let step = match dopri_step(sys, t, &y, &k1, h) {
            Ok(s) => s,
            // A trial stage can leave the domain near a boundary; shrink and retry.
            Err(Error::Domain { .. }) | Err(Error::SingularPoint { .. }) => {
                stats.rejected += 1;
                h *= 0.25;
                last_rejected = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        stats.evaluations += 6;
        let err = error_norm(sys, t + h, &step.err, &y, &step.y_new, tol);
        if !err.is_finite() {
            stats.rejected += 1;
            h *= 0.25;
            last_rejected = true;
            continue;
        }

        let fac11 = err.powf(0.2 - BETA * 0.75);
        let mut fac = fac11 / fac_old.powf(BETA);
        fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        let h_new = h / fac;

        if err <= 1.0 {
            stats.accepted += 1;
            fac_old = err.max(1e-4);
            let t_new = if last { t_end } else { t + h };
            while next_out < grid.len() && grid[next_out] <= t_new {
                if grid[next_out] == t_end && last {
                    out.push(step.y_new);
                } else {
                    let theta = (grid[next_out] - t) / h;
                    out.push(dense(&step.cont, theta));
                }
                next_out += 1;
            }
            t = t_new;
            y = step.y_new;
            k1 = step.k7;
            h = if last_rejected { h_new.min(h) } else { h_new };
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    }
    Ok((out, stats))
}

/// Fixed-step integration with the fifth-order solution of the pair.
/// Used to measure the convergence order of the scheme.
pub fn solve_fixed<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    y0: [f64; N],
    t0: f64,
    t_end: f64,
    steps: usize,
) -> Result<[f64; N]> {
    let h = (t_end - t0) / steps as f64;
    let mut y = y0;
    let mut k1 = sys.rhs(t0, &y)?;
    for i in 0..steps {
        let t = t0 + h * i as f64;
        let step = dopri_step(sys, t, &y, &k1, h)?;
        y = step.y_new;
        k1 = step.k7;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_t: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        Ok([y[1], -y[0]])
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let tol = Tolerances::new(1e-10, 1e-12).unwrap();
        let (ys, stats) = solve_dense(&oscillator, [1.0, 0.0], &grid, tol).unwrap();
        assert_eq!(ys.len(), grid.len());
        for (t, y) in grid.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-8, "t = {t}");
            assert!((y[1] + t.sin()).abs() < 1e-8);
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn fixed_step_order_is_five() {
        let exact = 2f64.cos();
        let err = |n| (solve_fixed(&oscillator, [1.0, 0.0], 0.0, 2.0, n).unwrap()[0] - exact).abs();
        let order = (err(40) / err(80)).log2();
        assert!(order > 4.5, "observed order {order}");
    }

    #[test]
    fn rejects_bad_grid() {
        let tol = Tolerances::default();
        assert!(solve_dense(&oscillator, [1.0, 0.0], &[0.0], tol).is_err());
        assert!(solve_dense(&oscillator, [1.0, 0.0], &[0.0, 0.0], tol).is_err());
        assert!(Tolerances::new(0.0, 1e-12).is_err());
    }

    #[test]
    fn blow_up_reports_last_valid_point() {
        // y' = y², y(0) = 1 explodes at t = 1.
        let sys = |_t: f64, y: &[f64; 1]| Ok([y[0] * y[0]]);
        let r = solve_dense(&sys, [1.0], &[0.0, 2.0], Tolerances::default());
        match r {
            Err(Error::StepSizeUnderflow { last_eta }) | Err(Error::TooManySteps { last_eta }) => {
                assert!(last_eta < 1.0 && last_eta > 0.9, "{last_eta}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
