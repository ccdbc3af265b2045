//! Block solves on five-node fixtures against exhaustive minimization of their incremental functionals.

mod support;

use support::*;

#[test]
fn damage_block_matches_grid_search() {
    let (sol, oracle) = mixed_damage_case();
    let e = inf_err(&sol.z, &oracle);
    assert!(e <= 1e-4, "pdas {:?} oracle {oracle:?} err {e:e}", sol.z);
    // both bounds and the free set are exercised
    assert!(sol.active_upper > 0 && sol.active_lower > 0 && sol.active_upper + sol.active_lower < 5, "{:?}", sol.z);
}

#[test]
fn cycling_active_sets_still_reach_the_minimizer() {
    let (sol, oracle) = cycling_damage_case();
    let e = inf_err(&sol.z, &oracle);
    assert!(e <= 1e-4, "pdas {:?} oracle {oracle:?} err {e:e}", sol.z);
    assert!(sol.gap <= 1e-10 && sol.sign_violation <= 1e-10);
}

#[test]
fn ch_block_matches_grid_search() {
    let (c, oracle, c_old) = ch_case();
    let e = inf_err(&c, &oracle);
    assert!(e <= 1e-4, "newton {c:?} oracle {oracle:?} err {e:e}");
    assert!(inf_err(&c, &c_old) > 1e-2);
}
