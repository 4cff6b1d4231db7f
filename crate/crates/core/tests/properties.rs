use frw_acoustic::background::{Curvature, EtaRange};
use frw_acoustic::mode_dynamics::{integrate, ModeParams, PerturbationState};
use frw_acoustic::ode::Tolerances;
use frw_acoustic::transform::psi_trajectory;
use frw_acoustic::wavefield::{group_velocity, omega};
use proptest::prelude::*;

fn curvature() -> impl Strategy<Value = Curvature> {
    prop_oneof![Just(Curvature::Open), Just(Curvature::Flat), Just(Curvature::Closed)]
}

fn state() -> impl Strategy<Value = PerturbationState> {
    prop::array::uniform4(-1.0..1.0f64).prop_map(PerturbationState::from_array)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dispersion_relation(k in 1.01f64..50.0, c in curvature()) {
        let w = omega(k, c).unwrap();
        let lhs = 3.0 * w * w + c.as_f64();
        prop_assert!((lhs - k * k).abs() <= 1e-12 * k * k);
        let vg = group_velocity(k, c).unwrap();
        prop_assert!((vg * w - k / 3.0).abs() <= 1e-13 * k);
    }

    #[test]
    fn group_velocity_monotone(k in 1.01f64..50.0, dk in 1e-3f64..1.0) {
        let open = (group_velocity(k, Curvature::Open).unwrap(), group_velocity(k + dk, Curvature::Open).unwrap());
        let closed = (group_velocity(k, Curvature::Closed).unwrap(), group_velocity(k + dk, Curvature::Closed).unwrap());
        prop_assert!(open.0 < open.1);
        prop_assert!(closed.0 > closed.1);
        prop_assert!(open.1 < 1.0 / 3f64.sqrt() && closed.1 > 1.0 / 3f64.sqrt());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn psi_is_linear_in_initial_data(x in state(), y in state(), s in -2.0f64..2.0, wn in 1.0f64..4.0) {
        let p = ModeParams::new(Curvature::Flat, wn).unwrap();
        let r = EtaRange::new(0.2, 4.0);
        let tol = Tolerances::new(1e-12, 1e-14).unwrap();
        let run = |st: PerturbationState| psi_trajectory(&integrate(st, &p, r, tol, 200).unwrap()).unwrap().values;
        let (px, py, pz) = (run(x), run(y), run(x + s * y));
        let scale = px.iter().chain(&py).fold(1e-300f64, |m, v| m.max(v.abs())) * (1.0 + s.abs());
        for i in 0..px.len() {
            prop_assert!((pz[i] - px[i] - s * py[i]).abs() < 1e-7 * scale);
        }
    }
}
