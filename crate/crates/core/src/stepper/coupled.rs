//! Block Gauss-Seidel sweep, fallback chain and time loop.

use super::blocks::{
    ch_residual, damage_consistency, momentum_residual, solve_ch_block, solve_damage_block,
    solve_momentum_block, solve_temperature_block, BlockContext,
};
use super::newton::scaled_norm;
use super::{
    d_tau, init_states, BlockReport, InitialFields, Lagged, Problem, Regularization, State, StepData,
    StepReport, Trajectory,
};
use crate::error::Error;

/// Which safeguards `step` may use when the plain solve fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub continuation: bool,
    pub substeps: bool,
}

impl StepOptions {
    pub fn from_problem(problem: &Problem) -> Self {
        StepOptions { continuation: problem.params.continuation.auto, substeps: true }
    }

    /// Plain solve only.
    pub const STRICT: StepOptions = StepOptions { continuation: false, substeps: false };
}

/// Result of one converged sweep.
#[derive(Debug, Clone)]
pub(crate) struct Sweep {
    pub state: State,
    pub report: StepReport,
}

/// Largest scaled residual of the CH, damage and momentum equations at `theta`.
fn consolidated_residual(ctx: &BlockContext, s: &State) -> Result<f64, Error> {
    let mesh = &ctx.problem.mesh;
    let d = mesh.dim;
    let ch = ch_residual(ctx, &s.theta, &s.c, &s.mu)?;
    let w2: Vec<f64> = mesh.lumped.iter().flat_map(|&m| [m, m]).collect();
    let (free, _, sign, _) = damage_consistency(ctx, &s.c, &s.theta, &s.z);
    let mut mom = momentum_residual(ctx, &s.c, &s.z, &s.theta, &s.u);
    for i in mesh.boundary_nodes() {
        for k in 0..d {
            mom[d * i + k] = 0.0;
        }
    }
    Ok(scaled_norm(&ch, &w2).max(free).max(sign).max(scaled_norm(&mom, &ctx.momentum_weights())))
}

/// Solve the coupled system over `(data.t0, data.t1]` at a fixed regularization.
pub(crate) fn solve_coupled_at(
    problem: &Problem,
    prev: &State,
    guess: &State,
    data: &StepData,
    reg: Regularization,
) -> Result<Sweep, Error> {
    let tau = data.t1 - data.t0;
    let lagged = Lagged::new(problem, prev);
    let ctx = BlockContext::new(problem, prev, &lagged, data, tau, reg);
    let s = &problem.params.solver;
    let mut theta_g = guess.theta.clone();
    let mut cur = guess.clone();
    cur.k = prev.k + 1;
    cur.t = data.t1;
    let mut omega = s.damping;
    let mut last = f64::INFINITY;
    let mut report = StepReport { k: cur.k, t: cur.t, ..Default::default() };
    for sweep in 1..=s.max_sweeps {
        let (c, mu, st) = solve_ch_block(&ctx, &theta_g, &cur.c, &cur.mu)?;
        report.ch = BlockReport { iterations: report.ch.iterations + st.iterations, residual: st.residual };
        let dz = solve_damage_block(&ctx, &c, &theta_g, &cur.z)?;
        report.damage = BlockReport { iterations: report.damage.iterations + dz.iterations, residual: dz.residual };
        report.active_upper = dz.active_upper;
        report.active_lower = dz.active_lower;
        let (u, v, st) = solve_momentum_block(&ctx, &c, &dz.z, &theta_g, &cur.u)?;
        report.momentum =
            BlockReport { iterations: report.momentum.iterations + st.iterations, residual: st.residual };
        let (theta, st) = solve_temperature_block(&ctx, &c, &mu, &dz.z, &v, &theta_g)?;
        report.temperature =
            BlockReport { iterations: report.temperature.iterations + st.iterations, residual: st.residual };
        cur = State { k: cur.k, t: cur.t, c, mu, z: dz.z, theta, u, v };
        let res = consolidated_residual(&ctx, &cur)?;
        report.sweeps = sweep;
        if res <= s.sweep_tol {
            let (_, gap, _, _) = damage_consistency(&ctx, &cur.c, &cur.theta, &cur.z);
            report.complementarity_gap = gap;
            return Ok(Sweep { state: cur, report });
        }
        if res > last {
            omega *= 0.5;
        }
        last = res;
        for (g, n) in theta_g.iter_mut().zip(&cur.theta) {
            *g += omega * (n - *g);
        }
    }
    Err(Error::StepDivergence {
        step: prev.k + 1,
        reason: format!("block sweep did not converge in {} sweeps (residual {last:.3e})", s.max_sweeps),
    })
}

/// One coupled solve with the unregularized scheme, no safeguards.
pub fn solve_coupled(problem: &Problem, prev: &State) -> Result<(State, StepReport), Error> {
    step_with(problem, prev, StepOptions::STRICT)
}

fn finish(problem: &Problem, prev: &State, data: &StepData, mut sw: Sweep) -> Result<(State, StepReport), Error> {
    let mesh = &problem.mesh;
    let s = &sw.state;
    let r = &mut sw.report;
    r.theta_min = s.theta.iter().cloned().fold(f64::INFINITY, f64::min);
    r.theta_max = s.theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let m0 = mesh.integrate(&prev.c);
    r.mass_defect = (mesh.integrate(&s.c) - m0).abs() / mesh.volume().max(m0.abs());
    r.energy_residual = crate::monitors::step_energy_residual(problem, prev, s, data)?;
    Ok((sw.state, sw.report))
}

/// Solve the stages of a continuation schedule in order, warm-starting each from the last.
fn solve_schedule(
    problem: &Problem,
    prev: &State,
    data: &StepData,
    schedule: &[Regularization],
) -> Result<Sweep, Error> {
    let mut guess = prev.clone();
    let mut out = None;
    let mut total = StepReport::default();
    for (n, reg) in schedule.iter().enumerate() {
        let sw = solve_coupled_at(problem, prev, &guess, data, *reg)?;
        total.sweeps += sw.report.sweeps;
        guess = sw.state.clone();
        let mut report = sw.report.clone();
        report.sweeps = total.sweeps;
        report.continuation_stages = if schedule.len() == 1 && reg.is_off() { 0 } else { n + 1 };
        out = Some(Sweep { state: sw.state, report });
    }
    out.ok_or_else(|| Error::StepDivergence { step: prev.k + 1, reason: "empty continuation schedule".into() })
}

/// Solve over `[prev.t, t1]`, falling back to continuation and then to halving.
fn solve_interval(problem: &Problem, prev: &State, t1: f64, opts: StepOptions, depth: usize) -> Result<Sweep, Error> {
    let data = problem.step_data(prev.t, t1)?;
    let plain = solve_schedule(problem, prev, &data, &[Regularization::OFF]);
    let first_err = match plain {
        Ok(sw) => return Ok(sw),
        Err(e) => e,
    };
    if opts.continuation {
        if let Ok(sw) = solve_schedule(problem, prev, &data, &problem.params.continuation.schedule()) {
            return Ok(sw);
        }
    }
    if opts.substeps && depth < problem.params.solver.max_substep_depth {
        let tm = prev.t + 0.5 * (t1 - prev.t);
        let a = solve_interval(problem, prev, tm, opts, depth + 1)?;
        let mut mid = a.state.clone();
        mid.k = prev.k;
        let b = solve_interval(problem, &mid, t1, opts, depth + 1)?;
        let mut state = b.state;
        state.k = prev.k + 1;
        state.v = d_tau(&state.u, &prev.u, t1 - prev.t);
        let mut report = b.report;
        report.k = state.k;
        report.t = state.t;
        report.sweeps += a.report.sweeps;
        report.substeps = a.report.substeps.max(1) + report.substeps.max(1);
        report.continuation_stages = report.continuation_stages.max(a.report.continuation_stages);
        return Ok(Sweep { state, report });
    }
    Err(match first_err {
        e @ Error::StepDivergence { .. } => e,
        e => Error::StepDivergence { step: prev.k + 1, reason: e.to_string() },
    })
}

/// `t^{k+1} = (k+1) tau`.
fn next_time(problem: &Problem, prev: &State) -> f64 {
    (prev.k + 1) as f64 * problem.params.tau
}

/// One step of the scheme from `prev`, with the default safeguards of the problem.
pub fn step(problem: &Problem, prev: &State) -> Result<(State, StepReport), Error> {
    step_with(problem, prev, StepOptions::from_problem(problem))
}

pub fn step_with(problem: &Problem, prev: &State, opts: StepOptions) -> Result<(State, StepReport), Error> {
    let t1 = next_time(problem, prev);
    let sw = solve_interval(problem, prev, t1, opts, 0)?;
    let data = problem.step_data(prev.t, t1)?;
    finish(problem, prev, &data, sw)
}

/// One step through an explicit `(nu, M)` schedule, each stage warm-started from the previous one.
///
/// A schedule consisting of [`Regularization::OFF`] alone reproduces [`solve_coupled`] bit for bit.
pub fn regularized_step(
    problem: &Problem,
    prev: &State,
    schedule: &[Regularization],
) -> Result<(State, StepReport), Error> {
    let data = problem.step_data(prev.t, next_time(problem, prev))?;
    let sw = solve_schedule(problem, prev, &data, schedule)
        .map_err(|e| match e {
            e @ Error::StepDivergence { .. } => e,
            e => Error::StepDivergence { step: prev.k + 1, reason: e.to_string() },
        })?;
    finish(problem, prev, &data, sw)
}

/// Number of steps covering `[0, horizon]`.
pub fn step_count(horizon: f64, tau: f64) -> usize {
    if horizon <= 0.0 {
        0
    } else {
        (horizon / tau - 1e-9).ceil() as usize
    }
}

/// Run the scheme up to `horizon`.
pub fn run(problem: &Problem, init: &InitialFields, horizon: f64) -> Result<Trajectory, Error> {
    run_with(problem, init, horizon, StepOptions::from_problem(problem), |_, _| {})
}

/// As [`run`], calling `observe` after every accepted step.
pub fn run_with(
    problem: &Problem,
    init: &InitialFields,
    horizon: f64,
    opts: StepOptions,
    mut observe: impl FnMut(&State, &StepReport),
) -> Result<Trajectory, Error> {
    let (s0, _ghost) = init_states(problem, init)?;
    let tau = problem.params.tau;
    let n = step_count(horizon, tau);
    let mut states = Vec::with_capacity(n + 1);
    let mut reports = Vec::with_capacity(n);
    states.push(s0);
    for k in 1..=n {
        let prev = states.last().unwrap();
        let (s, r) = step_with(problem, prev, opts).map_err(|e| match e {
            Error::StepDivergence { reason, .. } => Error::StepDivergence { step: k, reason },
            e => Error::StepDivergence { step: k, reason: e.to_string() },
        })?;
        observe(&s, &r);
        states.push(s);
        reports.push(r);
    }
    Ok(Trajectory { tau, states, reports })
}
