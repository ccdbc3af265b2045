use serde::{Deserialize, Serialize};

use super::{
    canonical_test_fields, check_damage_all, check_entropy_all, check_total_energy_all, positivity_report,
    relative_mass_defect, trajectory_splitting_margin, InequalityReport, INEQUALITY_TOL,
};
use crate::error::Error;
use crate::stepper::{Problem, Trajectory};

/// Relative mass defect allowed per step.
pub const MASS_TOL: f64 = 1e-10;

/// Which windows `(s, t)` the window-based inequalities are evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Windows {
    /// Single steps `(k-1, k)` and the whole run `(0, K)`.
    #[default]
    Steps,
    /// Every pair `0 <= s < t <= K`.
    All,
}

impl Windows {
    fn keeps(self, r: &InequalityReport, steps: usize) -> bool {
        self == Windows::All || r.t == r.s + 1 || (r.s == 0 && r.t == steps)
    }
}

/// Outcome of one monitor over a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    /// Number of evaluated instances.
    pub count: usize,
    /// Worst relative margin (negative means violated); `None` for exact checks.
    pub worst: Option<f64>,
}

impl CheckLine {
    fn from_reports(name: &str, reports: &[InequalityReport]) -> CheckLine {
        CheckLine {
            name: name.into(),
            pass: reports.iter().all(|r| r.pass),
            count: reports.len(),
            worst: reports.iter().map(|r| r.relative()).reduce(f64::min),
        }
    }

    fn exact(name: &str, count: usize, pass: bool) -> CheckLine {
        CheckLine { name: name.into(), pass, count, worst: None }
    }
}

/// Run every monitor that only needs the stored time levels.
pub fn check_trajectory(problem: &Problem, traj: &Trajectory, windows: Windows) -> Result<Vec<CheckLine>, Error> {
    let n = traj.steps();
    let keep = |v: Vec<InequalityReport>| -> Vec<InequalityReport> { v.into_iter().filter(|r| windows.keeps(r, n)).collect() };
    let mut out = Vec::new();
    out.push(CheckLine::from_reports("total-energy", &keep(check_total_energy_all(problem, traj)?)));
    let fields = canonical_test_fields(&problem.mesh);
    out.push(CheckLine::from_reports("entropy", &keep(check_entropy_all(problem, traj, &fields)?)));
    let (ed, vi) = check_damage_all(problem, traj)?;
    out.push(CheckLine::from_reports("damage-energy", &keep(ed)));
    out.push(CheckLine::from_reports("damage-vi", &vi));

    let pairs = || traj.states.windows(2);
    let cons: Vec<_> = pairs().map(|p| super::check_constraints(problem, &p[0], &p[1])).collect();
    out.push(CheckLine::exact("damage-bounds", n, cons.iter().all(|c| c.damage_bounds)));
    out.push(CheckLine::exact("damage-monotone", n, cons.iter().all(|c| c.damage_monotone)));
    out.push(CheckLine::exact("dirichlet-trace", n, cons.iter().all(|c| c.dirichlet_exact)));
    let pos = positivity_report(traj);
    out.push(CheckLine { name: "temperature-positive".into(), pass: pos.pass(), count: n + 1, worst: Some(pos.global_min) });
    let mass = relative_mass_defect(&problem.mesh, traj);
    // measured against level 0, so drift over the whole run counts
    let worst_mass = mass.iter().cloned().fold(0.0, f64::max);
    out.push(CheckLine { name: "mass".into(), pass: worst_mass <= MASS_TOL, count: n, worst: Some(worst_mass) });
    let split = trajectory_splitting_margin(problem, traj)?;
    out.push(CheckLine { name: "splitting".into(), pass: split >= -INEQUALITY_TOL, count: n, worst: Some(split) });
    Ok(out)
}
