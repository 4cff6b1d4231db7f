//! Independent checks of derived quantities against finite differences and
//! closed forms that the library does not use internally.

use frw_acoustic::background::{self, Curvature, EtaRange};
use frw_acoustic::mode_dynamics::{density_contrast, density_contrast_derivs, integrate, ModeParams};
use frw_acoustic::ode::Tolerances;
use frw_acoustic::transform::{gauge_modes, psi_value, synchronous_gauge_state};
use frw_acoustic::verifier::{self, seeded_state, InitialData, TheoremCheck};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cases() -> [(Curvature, f64); 3] {
    [(Curvature::Flat, 1.0), (Curvature::Open, 2.0), (Curvature::Closed, 3.0)]
}

/// Richardson-extrapolated central differences of δ along a fine trajectory.
#[test]
fn contrast_derivatives_match_richardson_differences() {
    for (k, wn) in cases() {
        let p = ModeParams::new(k, wn).unwrap();
        let r = if k == Curvature::Closed { EtaRange::new(0.2, 1.3) } else { EtaRange::new(0.2, 3.0) };
        let n = 4097;
        let tol = Tolerances::new(1e-13, 1e-15).unwrap();
        let traj = integrate(seeded_state(9), &p, r, tol, n).unwrap();
        let h = traj.grid[1] - traj.grid[0];
        let delta = traj.density_contrast().unwrap();
        let step = (n - 1) / 24;
        for j in 2..22 {
            let i = j * step;
            let (_, d1, d2) = traj.density_contrast_derivs(i).unwrap();
            let c1 = |m: usize| (delta[i + m] - delta[i - m]) / (2.0 * m as f64 * h);
            let c2 = |m: usize| (delta[i + m] - 2.0 * delta[i] + delta[i - m]) / ((m as f64 * h).powi(2));
            let fd1 = (4.0 * c1(1) - c1(2)) / 3.0;
            let fd2 = (4.0 * c2(1) - c2(2)) / 3.0;
            let scale = delta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!((d1 - fd1).abs() < 1e-6 * scale.max(d1.abs()), "{k} eta={}: {d1} vs {fd1}", traj.grid[i]);
            assert!((d2 - fd2).abs() < 1e-5 * scale.max(d2.abs()), "{k} eta={}: {d2} vs {fd2}", traj.grid[i]);
        }
    }
}

#[test]
fn gauge_kernel_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for k in Curvature::ALL {
        let pair = gauge_modes(k);
        for _ in 0..50 {
            let eta = if k == Curvature::Closed { rng.gen_range(0.05..1.5) } else { rng.gen_range(0.05..10.0) };
            if k == Curvature::Closed && (eta - std::f64::consts::FRAC_PI_2).abs() < 1e-3 {
                continue;
            }
            let a = background::scale_factor(eta, k).unwrap();
            let h = background::conformal_expansion_rate(eta, k).unwrap();
            for (d, d1, d2) in [pair.first(eta).unwrap(), pair.second(eta).unwrap()] {
                let psi = psi_value(d, d1, d2, eta, k).unwrap();
                let scale = d2.abs() + (2.0 * h * d1).abs() + ((2.0 / (a * a) + k.as_f64()) * d).abs();
                assert!(psi.abs() < 1e-10 * scale, "{k} eta={eta}: {psi}");
            }
        }
    }
}

/// The temporal gauge state is an exact solution: integrating it forward
/// must stay on the closed form.
#[test]
fn gauge_state_is_preserved_by_integration() {
    for (k, wn) in cases() {
        let p = ModeParams::new(k, wn).unwrap();
        let r = if k == Curvature::Closed { EtaRange::new(0.3, 1.2) } else { EtaRange::new(0.3, 4.0) };
        let s0 = synchronous_gauge_state(&p, r.min, 1.0, 0.5).unwrap();
        let traj = integrate(s0, &p, r, Tolerances::default(), 50).unwrap();
        for (eta, s) in traj.grid.iter().zip(&traj.states) {
            let exact = synchronous_gauge_state(&p, *eta, 1.0, 0.5).unwrap();
            let d = density_contrast(s, *eta, &p).unwrap();
            let de = density_contrast(&exact, *eta, &p).unwrap();
            let g2 = gauge_modes(k).g2(*eta).unwrap();
            assert!((de + 4.0 * g2).abs() < 1e-9 * g2.abs(), "{k} {eta}");
            assert!((d - de).abs() < 1e-7 * de.abs(), "{k} {eta}: {d} vs {de}");
            let (_, d1, _) = density_contrast_derivs(s, *eta, &p).unwrap();
            assert!(d1.is_finite());
        }
    }
}

/// Tightening rtol by a factor of ten never makes the verdict worse.
#[test]
fn tighter_tolerance_does_not_degrade_residual() {
    for &(c, wn) in verifier::DEFAULT_CASES.iter() {
        let p = ModeParams::new(Curvature::try_from(c).unwrap(), wn).unwrap();
        let mut check = TheoremCheck::new(p, InitialData::Seed(4));
        let base = verifier::run_theorem_check(&check).unwrap();
        check.tolerances = Tolerances::new(1e-11, 1e-13).unwrap();
        let tight = verifier::run_theorem_check(&check).unwrap();
        assert!(base.pass && tight.pass, "{base:?} {tight:?}");
        assert!(tight.rms_residual < 1e-6);
        assert!(tight.rms_residual <= base.rms_residual.max(1e-9), "K={c} k={wn}");
    }
}

/// Seeded data spread over many seeds: every default case passes.
#[test]
fn default_suite_passes_for_many_seeds() {
    for seed in 0..20 {
        let r = verifier::run_suite(&verifier::SuiteConfig::default_suite(seed)).unwrap();
        assert!(r.pass, "seed {seed}: {:?}", r.cases.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }
}
