use cavity_blockade::basis::Level;
use cavity_blockade::config::RunConfig;
use cavity_blockade::darkstate::{
    build_dark_system, closure_terms, dark_state_connection_check, row_residual, solve_dark_space, verify_closure,
};
use cavity_blockade::dynamics::{Model, RunOptions};
use cavity_blockade::hamiltonian::PulseSchedule;
use nalgebra::DVector;
use proptest::prelude::*;

fn dark_model(beta: f64) -> (Model, RunOptions) {
    let cfg = RunConfig::preset("dark_n5").unwrap();
    let params = cfg.params().unwrap();
    let model = Model::new(params, PulseSchedule::adiabatic_passage(beta, params.omega_max)).unwrap();
    (model, cfg.run_options().unwrap())
}

#[test]
fn preset_closure() {
    let w = RunConfig::preset("dark_n5").unwrap().params().unwrap().omega_max;
    let sys = build_dark_system(5, w, w, w).unwrap();
    let space = solve_dark_space(&sys).unwrap();
    assert_eq!(space.dim(), 2);
    assert!(row_residual(&space, &sys) < 1e-14);
    for c in space.vectors() {
        assert!(verify_closure(&c, &sys) < 1e-10);
    }
}

#[test]
fn only_allowed_states_carry_amplitude() {
    let sys = build_dark_system(5, 1.3, 0.7, 2.1).unwrap();
    assert_eq!(sys.matrix.shape(), (9, 11));
    for occ in &sys.unknowns {
        assert_eq!(occ.count(Level::E), 0);
        assert!(occ.count(Level::R) == 0 || occ.count(Level::V) == 0);
    }
}

#[test]
fn without_ge_the_rydberg_endpoints_balance() {
    let n = 4;
    let sys = build_dark_system(n, 0.0, 1.7, 0.6).unwrap();
    let space = solve_dark_space(&sys).unwrap();
    for c in space.vectors() {
        let [ground, r, v] = closure_terms(&c, &sys);
        assert_eq!(ground, 0.0);
        assert!((r + v).abs() < 1e-12);
    }
}

#[test]
fn ground_state_is_dark_before_the_ground_pulse() {
    let (model, opts) = dark_model(4.5);
    let report = dark_state_connection_check(&model, &RunOptions { samples: 200, ..opts }).unwrap();
    let first = report.series.first().unwrap();
    assert_eq!(model.schedule.amplitudes(first.t)[0], 0.0);
    assert!((first.projection - 1.0).abs() < 1e-12);
}

#[test]
fn adiabatic_following_of_the_reference_run() {
    let (model, opts) = dark_model(4.5);
    let report = dark_state_connection_check(&model, &opts).unwrap();
    assert!(report.min_projection > 0.9, "minimum projection {} at t = {}", report.min_projection, report.t_at_min);
}

#[test]
fn faster_pulses_follow_worse() {
    let (slow, opts) = dark_model(4.5);
    let (fast, _) = dark_model(4.5 / 8.0);
    let a = dark_state_connection_check(&slow, &opts).unwrap().min_projection;
    let b = dark_state_connection_check(&fast, &opts).unwrap().min_projection;
    assert!(b < a, "β/8 gives {b}, β gives {a}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_holds_for_every_dark_state(
        n in 1u32..=8,
        ge in 0.1f64..1.0,
        er in 0.1f64..1.0,
        ev in 0.1f64..1.0,
        a in -1.0f64..1.0,
        b in -1.0f64..1.0,
    ) {
        let sys = build_dark_system(n, ge, er, ev).unwrap();
        let space = solve_dark_space(&sys).unwrap();
        prop_assert_eq!(space.dim(), 2);
        let c: DVector<f64> = space.basis.column(0) * a + space.basis.column(1) * b;
        prop_assume!(c.norm() > 1e-3);
        prop_assert!(verify_closure(&c, &sys) < 1e-10);
    }

    #[test]
    fn rows_are_not_dark(n in 2u32..=8, ge in 0.1f64..1.0, er in 0.1f64..1.0, ev in 0.1f64..1.0) {
        let sys = build_dark_system(n, ge, er, ev).unwrap();
        let row = sys.matrix.row(0).transpose();
        prop_assert!(verify_closure(&row, &sys) > 1e-3);
    }
}
