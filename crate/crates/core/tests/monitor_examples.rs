//! Worked examples of the energy, entropy, damage, mass and positivity monitors.

use thermophase::io::{preset, RunSetup};
use thermophase::monitors::*;
use thermophase::stepper::*;

fn equilibrium() -> RunSetup {
    let mut cfg = preset("equilibrium").unwrap();
    cfg.domain.cells = vec![6, 6];
    cfg.setup().unwrap()
}

fn initial(setup: &RunSetup) -> State {
    init_states(&setup.problem, &setup.initial).unwrap().0
}

/// `levels + 1` copies of `s` at the grid times.
fn constant_trajectory(s: &State, tau: f64, levels: usize) -> Trajectory {
    let states = (0..=levels).map(|k| State { k, t: k as f64 * tau, ..s.clone() }).collect();
    Trajectory { tau, states, reports: vec![StepReport::default(); levels] }
}

#[test]
fn energy_of_the_rest_state() {
    // phi_omega(0) = 1/4 on the unit square plus the thermal part 1
    let setup = equilibrium();
    let e = total_energy(&setup.problem, &initial(&setup)).unwrap();
    assert!((e.total - 1.25).abs() < 1e-14);
    assert_eq!(e.kinetic, 0.0);
    let parts = e.grad_c + e.grad_z + e.elastic + e.phi + e.sigma + e.thermal + e.kinetic;
    assert_eq!(parts, e.total);
}

#[test]
fn thermal_energy_is_linear_in_theta() {
    let setup = equilibrium();
    let s = initial(&setup);
    let hot = State { theta: s.theta.iter().map(|t| 2.0 * t).collect(), ..s.clone() };
    let e0 = total_energy(&setup.problem, &s).unwrap().total;
    let e1 = total_energy(&setup.problem, &hot).unwrap().total;
    assert!((e1 - e0 - 1.0).abs() < 1e-13);
}

#[test]
fn equilibrium_trajectory_balances_energy() {
    let mut setup = equilibrium();
    setup.horizon = 5.0 * setup.problem.params.tau;
    let traj = run(&setup.problem, &setup.initial, setup.horizon).unwrap();
    for (s, t) in all_windows(&traj) {
        let r = check_total_energy_inequality(&setup.problem, &traj, s, t).unwrap();
        assert!(r.residual.abs() <= 1e-12 * r.scale(), "({s},{t}) {}", r.residual);
    }
}

#[test]
fn pure_heating_step_balances_energy() {
    let mut cfg = preset("equilibrium").unwrap();
    cfg.domain.cells = vec![4, 4];
    cfg.data.g = ScalarData::constant(1.0);
    let setup = cfg.setup().unwrap();
    let tau = setup.problem.params.tau;
    let traj = run(&setup.problem, &setup.initial, tau).unwrap();
    let r = check_total_energy_inequality(&setup.problem, &traj, 0, 1).unwrap();
    assert!(r.residual.abs() <= 1e-9, "residual {}", r.residual);
    let e0 = total_energy(&setup.problem, &traj.states[0]).unwrap();
    let e1 = total_energy(&setup.problem, &traj.states[1]).unwrap();
    assert!((e1.thermal - e0.thermal - tau).abs() <= 1e-9);

    let rows = apriori_norm_tracker(&setup.problem, &traj, 0.5);
    assert!((rows[1].sum_dtheta_l1 - tau).abs() <= 1e-9);
}

#[test]
fn misaligned_window_is_rejected() {
    let setup = equilibrium();
    let traj = constant_trajectory(&initial(&setup), setup.problem.params.tau, 2);
    let err = check_total_energy_inequality(&setup.problem, &traj, 2, 1).unwrap_err();
    assert_eq!(err.kind(), "window-misaligned");
    assert!(check_total_energy_inequality(&setup.problem, &traj, 0, 3).is_err());
}

#[test]
fn zero_test_field_gives_zero_entropy_residual() {
    let setup = equilibrium();
    let mut traj = constant_trajectory(&initial(&setup), setup.problem.params.tau, 2);
    traj.states[1].theta.iter_mut().for_each(|t| *t = 1.7);
    let n = setup.problem.mesh.n_nodes;
    let zero = TestField { id: 9, name: "zero".into(), base: vec![0.0; n], rate: 0.0 };
    let r = check_entropy_inequality(&setup.problem, &traj, 0, 2, &zero).unwrap();
    assert_eq!((r.lhs, r.rhs, r.residual), (0.0, 0.0, 0.0));
}

#[test]
fn negative_test_field_is_rejected() {
    let setup = equilibrium();
    let traj = constant_trajectory(&initial(&setup), setup.problem.params.tau, 1);
    let n = setup.problem.mesh.n_nodes;
    let mut base = vec![1.0; n];
    base[3] = -0.1;
    let f = TestField { id: 0, name: "bad".into(), base, rate: 0.0 };
    let err = check_entropy_inequality(&setup.problem, &traj, 0, 1, &f).unwrap_err();
    assert_eq!(err.kind(), "negative-test-function");
}

#[test]
fn constant_trajectory_is_self_consistent() {
    let setup = equilibrium();
    let p = &setup.problem;
    let traj = constant_trajectory(&initial(&setup), p.params.tau, 3);
    let tight = |r: &InequalityReport| r.residual.abs() <= 1e-12 * r.scale();
    assert!(check_total_energy_all(p, &traj).unwrap().iter().all(tight));
    let fields = canonical_test_fields(&p.mesh);
    assert_eq!(fields.len(), 6);
    assert!(check_entropy_all(p, &traj, &fields).unwrap().iter().all(tight));
    let (ed, vi) = check_damage_all(p, &traj).unwrap();
    assert!(ed.iter().all(tight) && vi.iter().all(tight));
    let lines = check_trajectory(p, &traj, Windows::All).unwrap();
    assert!(lines.iter().all(|l| l.pass), "{lines:?}");
}

#[test]
fn damage_vi_at_the_solution_is_zero() {
    let setup = preset("damage-loading").unwrap().setup().unwrap();
    let p = &setup.problem;
    let s0 = initial(&setup);
    let (s1, _) = step(p, &s0).unwrap();
    assert_eq!(damage_vi_value(p, &s0, &s1, &s1.z).unwrap(), 0.0);
    for zeta in damage_vi_fields(&s0.z, &s1.z) {
        let v = damage_vi_value(p, &s0, &s1, &zeta).unwrap();
        assert!(v >= -1e-6 * (1.0 + v.abs()), "{v}");
    }
    let mut bad = s1.z.clone();
    bad[0] = s0.z[0] + 0.1;
    let err = damage_vi_value(p, &s0, &s1, &bad).unwrap_err();
    assert_eq!(err.kind(), "inadmissible-test-field");
}

#[test]
fn mass_defect_of_a_manufactured_violation() {
    let setup = equilibrium();
    let mesh = &setup.problem.mesh;
    let mut traj = constant_trajectory(&initial(&setup), setup.problem.params.tau, 1);
    let i = 8;
    traj.states[1].c[i] += 1.0;
    let d = mass_defect(mesh, &traj);
    assert_eq!(d[0], 0.0);
    assert!((d[1] - mesh.lumped[i]).abs() < 1e-15);
}

#[test]
fn temperature_floor() {
    assert_eq!(theta_floor(1.0, 1.0, 1.0), 0.5);
    assert_eq!(theta_floor(0.3, 0.0, 7.0), 0.3);
}

#[test]
fn positivity_report_flags_nonpositive_levels() {
    let setup = equilibrium();
    let mut traj = constant_trajectory(&initial(&setup), setup.problem.params.tau, 2);
    traj.states[1].theta[0] = 0.25;
    let ok = positivity_report(&traj);
    assert!(ok.pass());
    assert_eq!(ok.minima, vec![1.0, 0.25, 1.0]);
    traj.states[2].theta[1] = -1e-3;
    let bad = positivity_report(&traj);
    assert_eq!(bad.violations, vec![2]);
    assert_eq!(bad.global_min, -1e-3);
}

#[test]
fn apriori_sums_vanish_at_rest_and_never_decrease() {
    let mut setup = equilibrium();
    setup.horizon = 4.0 * setup.problem.params.tau;
    let traj = run(&setup.problem, &setup.initial, setup.horizon).unwrap();
    let rows = apriori_norm_tracker(&setup.problem, &traj, 0.5);
    assert_eq!(rows.len(), 5);
    let last = rows.last().unwrap();
    assert!(last.sum_dc_l2 <= 1e-20 && last.sum_dz_l2 <= 1e-20 && last.sum_dtheta_l1 <= 1e-12);

    let mut cfg = preset("spinodal-decomposition").unwrap();
    cfg.time.horizon = 0.06;
    let s = cfg.setup().unwrap();
    let traj = run(&s.problem, &s.initial, s.horizon).unwrap();
    let rows = apriori_norm_tracker(&s.problem, &traj, 0.5);
    for w in rows.windows(2) {
        assert!(w[1].sup_c_w1p >= w[0].sup_c_w1p && w[1].sum_dc_l2 >= w[0].sum_dc_l2);
        assert!(w[1].sum_mu_h1 >= w[0].sum_mu_h1 && w[1].sum_theta_h1 >= w[0].sum_theta_h1);
    }
}

#[test]
fn grid_search_solves_a_convex_quadratic() {
    // f = x^2 + x y + y^2 - x: minimizer (2/3, -1/3)
    let f = |x: &[f64]| x[0] * x[0] + x[0] * x[1] + x[1] * x[1] - x[0];
    let bx = SearchBox::free(vec![-2.0, -2.0], vec![2.0, 2.0]);
    let x = brute_force_minimize(f, &bx, 41, 4).unwrap();
    assert!((x[0] - 2.0 / 3.0).abs() < 1e-4 && (x[1] + 1.0 / 3.0).abs() < 1e-4, "{x:?}");

    let small = SearchBox::free(vec![-0.2, -0.2], vec![0.2, 0.2]);
    let err = brute_force_minimize(f, &small, 21, 2).unwrap_err();
    assert_eq!(err.kind(), "search-box-too-small");
    let bounded = SearchBox { constrained: vec![true, false], ..small };
    let x = brute_force_minimize(f, &bounded, 21, 3).unwrap();
    assert_eq!(x[0], 0.2);
}
