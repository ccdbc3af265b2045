//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod support;

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermophase::convergence::{study, Case};
use thermophase::grid::{heat_diffusion_residual, Mesh, MeshSpec, PLaplacian};
use thermophase::io::{preset, RunSetup};
use thermophase::material::{ElasticModel, HeatModel, MaterialModel, Sym};
use thermophase::monitors::*;
use thermophase::stepper::*;

type Outcome = Result<(bool, String), String>;

struct Suite {
    failures: usize,
}

impl Suite {
    /// Run one criterion; exceeding `limit` seconds counts as a failure.
    fn criterion(&mut self, id: usize, name: &str, limit: Option<f64>, f: impl FnOnce() -> Outcome) {
        let t0 = Instant::now();
        let out = f();
        let secs = t0.elapsed().as_secs_f64();
        let in_time = limit.map_or(true, |l| secs <= l);
        let (pass, detail) = match out {
            Ok((pass, detail)) => (pass && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget = limit.map(|l| format!(" / {l:.0} s")).unwrap_or_default();
        println!("{} {id:>2} {name}: {detail} [{secs:.2} s{budget}]", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures += 1;
        }
    }
}

#[derive(Clone)]
struct Run {
    name: &'static str,
    setup: RunSetup,
    traj: Trajectory,
}

fn simulate(name: &'static str) -> Result<Run, String> {
    let setup = preset(name).ok_or("unknown preset")?.setup().map_err(|e| e.to_string())?;
    let traj = run(&setup.problem, &setup.initial, setup.horizon).map_err(|e| e.to_string())?;
    Ok(Run { name, setup, traj })
}

fn worst(reports: &[InequalityReport]) -> f64 {
    reports.iter().map(|r| r.relative()).fold(f64::INFINITY, f64::min)
}

fn all_pass(reports: &[InequalityReport]) -> bool {
    !reports.is_empty() && reports.iter().all(|r| r.residual >= -INEQUALITY_TOL * r.scale())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    max_abs(&diff) / (1e-12 + max_abs(a).max(max_abs(b)))
}

fn random_sym(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Sym {
    let mut g = [[0.0; 3]; 3];
    for row in g.iter_mut() {
        for x in row.iter_mut() {
            *x = rng.gen_range(-scale..scale);
        }
    }
    Sym::sym_grad(d, &g)
}

fn equilibrium_preservation(r: &Run) -> Outcome {
    let p = &r.setup.problem;
    let s0 = &r.traj.states[0];
    let drift = r.traj.states.iter().map(|s| s.max_diff(s0)).fold(0.0, f64::max);
    let energies: Vec<f64> =
        r.traj.states.iter().map(|s| total_energy(p, s).map(|e| e.total)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let rise = energies.windows(2).map(|w| (w[1] - w[0]) / w[0].abs()).fold(f64::NEG_INFINITY, f64::max);
    let pass = r.traj.steps() == 50 && drift <= 1e-7 && rise <= 1e-10;
    Ok((pass, format!("{} steps, drift {drift:.2e}, max relative energy rise {rise:.2e}", r.traj.steps())))
}

fn constraints(runs: &[Run]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in runs {
        let p = &r.setup.problem;
        let s0 = &r.traj.states[0];
        let start = s0.z.iter().all(|z| (0.0..=1.0).contains(z)) && s0.theta.iter().all(|&t| t > 0.0);
        let steps = r.traj.states.windows(2).all(|w| check_constraints(p, &w[0], &w[1]).all());
        let defects = relative_mass_defect(&p.mesh, &r.traj);
        let per_step = r.traj.states.windows(2).map(|w| (p.mesh.integrate(&w[1].c) - p.mesh.integrate(&w[0].c)).abs());
        let scale = p.mesh.volume().max(p.mesh.integrate(&s0.c).abs());
        let mass = per_step.map(|d| d / scale).chain(defects).fold(0.0, f64::max);
        let theta_min = positivity_report(&r.traj).global_min;
        pass &= start && steps && mass <= MASS_TOL;
        parts.push(format!("{} mass {mass:.1e} min theta {theta_min:.3}", r.name));
    }
    Ok((pass, parts.join("; ")))
}

fn splitting(runs: &[Run], loading: &MaterialModel) -> Outcome {
    let mut on_traj = f64::INFINITY;
    for r in runs {
        on_traj = on_traj.min(trajectory_splitting_margin(&r.setup.problem, &r.traj).map_err(|e| e.to_string())?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let materials = [loading.clone(), MaterialModel::default()];
    let mut off = f64::INFINITY;
    let samples = 10_000;
    for i in 0..samples {
        let d = 1 + i % 3;
        let material = &materials[i % 2];
        let params = SchemeParams::for_dim(d);
        let unit = |rng: &mut ChaCha8Rng| {
            let e = random_sym(rng, d, 1.0);
            let n = e.norm();
            if n > 1.0 {
                (1.0 / n) * e
            } else {
                e
            }
        };
        let grad = |rng: &mut ChaCha8Rng| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let (za, zb) = (rng.gen_range(0.0..1.0f64), rng.gen_range(0.0..1.0f64));
        let s = SplittingSample {
            c_old: rng.gen_range(-1.0..1.0),
            c_new: rng.gen_range(-1.0..1.0),
            z_old: za.max(zb),
            z_new: za.min(zb),
            eps_old: unit(&mut rng),
            eps_new: unit(&mut rng),
            grad_c_old: grad(&mut rng),
            grad_c_new: grad(&mut rng),
            grad_z_old: grad(&mut rng),
            grad_z_new: grad(&mut rng),
            u: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
        };
        let m = splitting_margins(material, &params.regularization, &params, &s).map_err(|e| e.to_string())?;
        off = m.iter().cloned().fold(off, f64::min);
    }
    let pass = on_traj >= -INEQUALITY_TOL && off >= -INEQUALITY_TOL;
    Ok((pass, format!("worst margin on trajectories {on_traj:.2e}, on {samples} random samples {off:.2e}")))
}

fn derivatives() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-5;
    let tol = 1e-5;

    // elastic density table
    let model = ElasticModel { lame_lambda: 0.7, lame_mu: 1.2, eigenstrain: 0.3, ..Default::default() };
    let mut w_err: f64 = 0.0;
    let w_states = 300;
    for i in 0..w_states {
        let d = 1 + i % 3;
        let (c, z) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0));
        let e = random_sym(&mut rng, d, 1.0);
        let dir = random_sym(&mut rng, d, 1.0);
        let g = model.derivatives(c, &e, z);
        let fd = |f: &dyn Fn(f64) -> f64| (f(h) - f(-h)) / (2.0 * h);
        let pairs = [
            (g.w_c, fd(&|t| model.w(c + t, &e, z))),
            (g.w_z, fd(&|t| model.w(c, &e, z + t))),
            (g.w_eps.ddot(&dir), fd(&|t| model.w(c, &(e + t * dir), z))),
            (g.w_cc, fd(&|t| model.derivatives(c + t, &e, z).w_c)),
            (g.w_zz, fd(&|t| model.derivatives(c, &e, z + t).w_z)),
            (g.w_eps_c.ddot(&dir), fd(&|t| model.derivatives(c + t, &e, z).w_eps.ddot(&dir))),
            (g.w_eps_z.ddot(&dir), fd(&|t| model.derivatives(c, &e, z + t).w_eps.ddot(&dir))),
        ];
        for (a, b) in pairs {
            w_err = w_err.max((a - b).abs() / (1.0 + a.abs().max(b.abs())));
        }
    }

    let directional = |r: &dyn Fn(&[f64]) -> Vec<f64>, jd: &[f64], v: &[f64], dir: &[f64]| {
        let step = 1e-6;
        let plus: Vec<f64> = v.iter().zip(dir).map(|(a, b)| a + step * b).collect();
        let minus: Vec<f64> = v.iter().zip(dir).map(|(a, b)| a - step * b).collect();
        let fd: Vec<f64> = r(&plus).iter().zip(r(&minus)).map(|(a, b)| (a - b) / (2.0 * step)).collect();
        rel_err(jd, &fd)
    };
    let pl = PLaplacian { p: 3.0, eps: 1e-8 };
    let heat = HeatModel::default();
    let (mut pl_err, mut heat_err): (f64, f64) = (0.0, 0.0);
    let field_states = 120;
    for i in 0..field_states {
        let d = 1 + i % 2;
        let mesh = Mesh::new(&MeshSpec { dim: d, extents: vec![1.0; d], cells: vec![5; d] }).map_err(|e| e.to_string())?;
        let n = mesh.n_nodes;
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let jd = pl.jacobian_matrix(&mesh, &v).matvec(&dir);
        pl_err = pl_err.max(directional(&|x| pl.residual(&mesh, x), &jd, &v, &dir));

        let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..3.0)).collect();
        let hload = vec![0.0; n];
        let (_, j) = heat_diffusion_residual(&mesh, &theta, &heat, &hload).map_err(|e| e.to_string())?;
        let r = |x: &[f64]| heat_diffusion_residual(&mesh, x, &heat, &hload).map(|r| r.0).unwrap_or_default();
        heat_err = heat_err.max(directional(&r, &j.matvec(&dir), &theta, &dir));
    }
    let pass = w_err <= tol && pl_err <= tol && heat_err <= tol;
    Ok((
        pass,
        format!(
            "W table {w_err:.1e} over {w_states} states, p-Laplacian {pl_err:.1e} and heat {heat_err:.1e} over {field_states} states"
        ),
    ))
}

fn oracles() -> Outcome {
    let (mixed, oracle_mixed) = support::mixed_damage_case();
    let (cycling, oracle_cycling) = support::cycling_damage_case();
    let (c, oracle_c, _) = support::ch_case();
    let errs = [
        support::inf_err(&mixed.z, &oracle_mixed),
        support::inf_err(&cycling.z, &oracle_cycling),
        support::inf_err(&c, &oracle_c),
    ];
    let pass = errs.iter().all(|&e| e <= 1e-4);
    Ok((pass, format!("damage {:.1e} and {:.1e}, phase {:.1e}", errs[0], errs[1], errs[2])))
}

fn convergence() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for case in [Case::Heat, Case::Elasticity] {
        let s = study(case, 3).map_err(|e| e.to_string())?;
        pass &= s.within(0.2);
        let fmt = |v: &[f64]| v.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>().join(",");
        parts.push(format!("{case} space [{}] time [{}]", fmt(&s.spatial_orders), fmt(&s.temporal_orders)));
    }
    Ok((pass, parts.join("; ")))
}

fn continuation(spinodal: &Run) -> Outcome {
    let p = &spinodal.setup.problem;
    let plain = &spinodal.traj;
    let mut bitwise = true;
    for s in &plain.states[..plain.states.len() - 1] {
        let (a, _) = step(p, s).map_err(|e| e.to_string())?;
        let (b, _) = regularized_step(p, s, &[Regularization::OFF]).map_err(|e| e.to_string())?;
        bitwise &= a.bitwise_eq(&b);
    }
    let schedule = p.params.continuation.schedule();
    let mut s = plain.states[0].clone();
    for _ in 0..plain.steps() {
        s = regularized_step(p, &s, &schedule).map_err(|e| e.to_string())?.0;
    }
    let diff = s.max_diff(plain.states.last().unwrap());
    let bound = 10.0 * p.params.solver.newton_tol;
    Ok((
        bitwise && diff <= bound,
        format!("bitwise {bitwise} over {} steps, scheduled run differs by {diff:.1e} (bound {bound:.0e})", plain.steps()),
    ))
}

fn main() -> ExitCode {
    let mut suite = Suite { failures: 0 };
    let mut runs: Vec<Run> = Vec::new();
    let mut keep = |r: &Run| runs.push(r.clone());

    suite.criterion(1, "equilibrium preservation", Some(10.0), || {
        let r = simulate("equilibrium")?;
        keep(&r);
        equilibrium_preservation(&r)
    });

    suite.criterion(2, "total energy inequality", Some(60.0), || {
        let r = simulate("damage-loading")?;
        keep(&r);
        let reports = check_total_energy_all(&r.setup.problem, &r.traj).map_err(|e| e.to_string())?;
        let pass = all_pass(&reports) && r.traj.steps() == 50;
        Ok((pass, format!("{} windows, worst {:.2e}", reports.len(), worst(&reports))))
    });
    let find = |runs: &[Run], name: &str| runs.iter().find(|r| r.name == name).cloned().ok_or(format!("{name} run failed"));

    suite.criterion(3, "entropy inequality", None, || {
        let r = find(&runs, "damage-loading")?;
        let fields = canonical_test_fields(&r.setup.problem.mesh);
        let reports = check_entropy_all(&r.setup.problem, &r.traj, &fields).map_err(|e| e.to_string())?;
        let pass = fields.len() == 6 && all_pass(&reports);
        Ok((pass, format!("{} fields x {} windows, worst {:.2e}", fields.len(), reports.len() / 6, worst(&reports))))
    });

    suite.criterion(4, "damage inequalities", None, || {
        let r = find(&runs, "damage-loading")?;
        let (ed, vi) = check_damage_all(&r.setup.problem, &r.traj).map_err(|e| e.to_string())?;
        let gap = r.traj.reports.iter().map(|s| s.complementarity_gap).fold(0.0, f64::max);
        let pass = all_pass(&ed) && all_pass(&vi) && gap <= 1e-10;
        Ok((pass, format!("energy-dissipation worst {:.2e}, one-sided worst {:.2e}, gap {gap:.1e}", worst(&ed), worst(&vi))))
    });

    suite.criterion(5, "constraints", None, || {
        for name in ["spinodal-decomposition", "thermal-pulse"] {
            runs.push(simulate(name)?);
        }
        if runs.len() != 4 {
            return Err(format!("only {} of 4 runs completed", runs.len()));
        }
        constraints(&runs)
    });
    suite.criterion(6, "splitting estimates", None, || {
        let loading = find(&runs, "damage-loading")?;
        splitting(&runs, &loading.setup.problem.material)
    });
    suite.criterion(7, "derivative consistency", Some(30.0), derivatives);
    suite.criterion(8, "oracle equivalence", Some(60.0), oracles);
    suite.criterion(9, "manufactured-solution convergence", Some(120.0), convergence);
    suite.criterion(10, "continuation consistency", None, || continuation(&find(&runs, "spinodal-decomposition")?));

    println!("{} of 10 criteria failed", suite.failures);
    if suite.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
