//! Hand-derived reference values, checked through the public API.

use approx::assert_relative_eq;
use trackback_core::control::stock_controls;
use trackback_core::{
    case1, case2, compute_metrics, cruise_force, lateral_subsystem_matrix, simulate, steering,
    tractive_force, CaseId, ControlInput, Controls, Model, SimConfig, Thresholds, VehicleParams,
    VehicleState, VX_FLOOR,
};

fn car() -> VehicleParams {
    VehicleParams::passenger_car()
}

fn cruising(vy: f64) -> VehicleState {
    VehicleState {
        vx: 30.0,
        vy,
        ..Default::default()
    }
}

#[test]
fn passenger_car_constants() {
    let p = car();
    assert_eq!(p.mass, 1750.0);
    assert_eq!(p.yaw_inertia, 2350.0);
    assert_eq!(p.mu0, 0.015);
    assert_eq!(p.mu1, 7.0e-6);
    assert_eq!(p.gravity, 9.8);
    assert_eq!(p.cornering_front, 120_000.0);
    assert_eq!(p.cornering_rear, 120_000.0);
    assert_eq!(p.drag_lumped, 0.98);
    assert_eq!((p.dist_front, p.dist_rear), (1.2, 1.6));
}

#[test]
fn collision_cases() {
    let (c1, c2) = (case1(), case2());
    assert_eq!((c1.vx0, c1.vy0, c1.wz0), (30.0, 20.0, 0.0));
    assert_eq!((c2.vx0, c2.vy0, c2.wz0), (30.0, 10.0, 0.35));
    assert_eq!(CaseId::Case2.spec(), c2);
}

#[test]
fn stock_control_tables() {
    // (case, model, second amplitude, force amplitude, direction gain, end of first window)
    let rows = [
        (CaseId::Case1, Model::Generalized, -1.91, 900.0, -0.2, 3.0),
        (CaseId::Case1, Model::Reference, -1.818, 1500.0, -0.2, 3.0),
        (
            CaseId::Case2,
            Model::Generalized,
            -1.4665,
            900.0,
            -0.5,
            5.195,
        ),
        (CaseId::Case2, Model::Reference, -1.353, 1550.0, -0.5, 5.195),
    ];
    for (case, model, a2, a_c, k_dir, tau1) in rows {
        let c = stock_controls(case, model, 441.0);
        let s = c.steering;
        assert_eq!((s.a1, s.a2, s.k_dir), (0.175, a2, k_dir));
        assert_eq!((s.tau0, s.tau1, s.tau2, s.tau3), (1.0, tau1, 10.0, 11.0));
        let f = c.force;
        assert_eq!(
            (f.f_initial, f.a_c, f.tau_c1, f.tau_c2),
            (441.0, a_c, 5.443, 10.0)
        );
        c.validate().unwrap();
    }
}

#[test]
fn cruise_force_balances_drag() {
    for model in Model::ALL {
        assert_eq!(cruise_force(30.0, &car(), model).unwrap(), 441.0);
        assert_relative_eq!(
            cruise_force(VX_FLOOR, &car(), model).unwrap(),
            0.1225,
            max_relative = 1e-15
        );
    }
}

#[test]
fn straight_cruise_is_an_equilibrium() {
    for model in Model::ALL {
        let d = model
            .rhs(&cruising(0.0), &ControlInput::new(0.0, 441.0), &car())
            .unwrap();
        assert_eq!(d.to_array(), [0.0, 0.0, 0.0, 30.0, 0.0, 0.0], "{model}");
    }
}

#[test]
fn lateral_kick_without_steering() {
    // Both axles see slip -vy/vx = -2/3, so each lateral force is -160 kN.
    let axle = -2.0 * 120_000.0 * (20.0 / 30.0);
    let dvy = 2.0 * axle / 1750.0;
    let dwz = (1.2 * axle - 1.6 * axle) / 2350.0;
    for model in Model::ALL {
        let d = model
            .rhs(&cruising(20.0), &ControlInput::new(0.0, 441.0), &car())
            .unwrap();
        assert_eq!(d.dvx, 0.0, "{model}");
        assert!(d.dvy < 0.0);
        assert_relative_eq!(d.dvy, dvy, max_relative = 1e-12);
        assert_relative_eq!(d.dwz, dwz, max_relative = 1e-12);
        assert_relative_eq!(d.dy, 20.0, max_relative = 1e-15);
    }
}

#[test]
fn symmetric_vehicle_decouples_yaw_from_sideslip() {
    let p = VehicleParams {
        dist_front: 1.4,
        dist_rear: 1.4,
        ..car()
    };
    let a = lateral_subsystem_matrix(30.0, &p).unwrap();
    assert_eq!(a[1][0], 0.0);
}

#[test]
fn control_law_midpoints() {
    let c = stock_controls(CaseId::Case1, Model::Generalized, 441.0);
    assert_relative_eq!(steering(2.0, &c.steering), -0.035, max_relative = 1e-15);
    assert_relative_eq!(
        tractive_force(7.7215, &c.force),
        1341.0,
        max_relative = 1e-15
    );
    // The second pulse peaks at 10.5 s with k_dir * a2 = 0.382 rad.
    assert_relative_eq!(steering(10.5, &c.steering), 0.382, max_relative = 1e-12);
}

#[test]
fn uncontrolled_case1_drifts_parallel_to_the_path() {
    for model in Model::ALL {
        let trace = simulate(
            &case1(),
            &SimConfig::new(model),
            &Controls::uncontrolled(441.0),
            &car(),
        );
        assert!(!trace.failed());
        let end = trace.last().unwrap();
        assert_eq!(end.t, 20.0);
        assert_relative_eq!(end.state.y, 104.4, max_relative = 1e-3);
        assert!(end.state.vy.abs() < 1e-6 && end.state.wz.abs() < 1e-6);
        let m = compute_metrics(&trace, &Thresholds::DEFAULT).unwrap();
        assert!(!m.recovered);
        assert!(m.final_lateral_error > Thresholds::DEFAULT.y_tol);
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let final_state = |dt: f64| {
        let sim = SimConfig {
            dt,
            horizon: 2.0,
            model: Model::Generalized,
            record_stride: 1,
        };
        let c = stock_controls(CaseId::Case1, Model::Generalized, 441.0);
        simulate(&case1(), &sim, &c, &car())
            .last()
            .unwrap()
            .state
            .to_array()
    };
    let reference = final_state(2.5e-4);
    let err = |dt| {
        final_state(dt)
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let order = (err(4e-3) / err(2e-3)).log2();
    assert!((3.7..=4.3).contains(&order), "order {order}");
}
