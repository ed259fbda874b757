//! Exact solving: a bounded-variable simplex and branch-and-bound on top,
//! plus the file-based bridge to external MILP solvers.

pub mod bnb;
pub mod external;
pub mod simplex;

pub use bnb::{solve_milp, BranchingRule, MilpSolution, MilpStatus, SolveError, SolveParams};
pub use external::{parse_external_solution, ExternalError, ExternalSolver, EXTERNAL_CMD_ENV};

use crate::model::MilpModel;
use simplex::{LpError, LpStatus, StandardForm, Tableau};

/// Where a model gets solved.
#[derive(Debug, Clone)]
pub enum Backend {
    Builtin(SolveParams),
    External(ExternalSolver),
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Builtin(_) => "builtin",
            Backend::External(_) => "external",
        }
    }

    /// Solves `model`; `initial` is a warm start that only the built-in
    /// solver uses.
    pub fn solve(&self, model: &MilpModel, initial: Option<Vec<f64>>) -> Result<MilpSolution, SolveError> {
        match self {
            Backend::Builtin(params) => {
                let mut params = params.clone();
                if initial.is_some() {
                    params.initial_solution = initial;
                }
                solve_milp(model, &params)
            }
            Backend::External(ext) => Ok(ext.solve(model)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    /// Structural columns in the final basis.
    pub basic_columns: usize,
    pub pivots: usize,
}

/// Solves the relaxation of the active objective with binaries in `[0, 1]`
/// intersected with `extra_bounds`.
pub fn solve_lp_relaxation(model: &MilpModel, extra_bounds: &[(usize, f64, f64)]) -> Result<LpResult, LpError> {
    let mut lp = model.to_lp();
    for &(j, lo, hi) in extra_bounds {
        lp.lower[j] = lp.lower[j].max(lo);
        lp.upper[j] = lp.upper[j].min(hi);
        if lp.lower[j] > lp.upper[j] + simplex::FEAS_TOL {
            return Err(LpError::InconsistentBounds(j));
        }
    }
    let sf = StandardForm::new(&lp);
    let n = sf.n;
    let finish = |status: LpStatus, tab: Option<&Tableau>| match (status, tab) {
        (LpStatus::Optimal, Some(t)) => LpResult {
            status,
            objective: t.objective(),
            values: t.values(),
            basic_columns: t.snapshot().structural_basic_count(n),
            pivots: t.pivots,
        },
        _ => LpResult { status, objective: f64::NAN, values: Vec::new(), basic_columns: 0, pivots: 0 },
    };
    // Every model column is boxed, so the slack basis is dual feasible.
    let mut tab = Tableau::slack_basis(&sf);
    match tab.reoptimize() {
        Ok(status) => Ok(finish(status, Some(&tab))),
        Err(LpError::Numerical(_)) => {
            let (status, tab) = simplex::solve_primal(&sf)?;
            Ok(finish(status, tab.as_ref()))
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::instance::{MachineSpec, Part, PenaltyCoefficients, ProblemInstance};
    use crate::model::{build_model, BuildOptions, Objective};

    fn one_part() -> ProblemInstance {
        ProblemInstance::new(
            vec![Part::new("1", 10.0, 10.0, 10.0, 1.0)],
            vec![MachineSpec::new("1", 250.0, 250.0, 200.0, 0.00006, 0.000003)],
            PenaltyCoefficients::default(),
            1,
        )
        .unwrap()
    }

    #[test]
    fn one_part_relaxation_is_zero() {
        let model = build_model(&one_part(), BuildOptions::default()).unwrap();
        let r = solve_lp_relaxation(&model, &[]).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!(r.objective.abs() < 1e-9);
        assert!(model.to_lp().max_violation(&r.values) < 1e-7);
    }

    #[test]
    fn negative_epsilon_infeasible() {
        let model = build_model(&datasets::table2(), BuildOptions::default()).unwrap().inject_epsilon(-1.0);
        assert_eq!(solve_lp_relaxation(&model, &[]).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn all_assignments_off_infeasible() {
        let model = build_model(&one_part(), BuildOptions::default()).unwrap();
        let x = model.registry.x(0, 0, 0);
        assert_eq!(solve_lp_relaxation(&model, &[(x, 0.0, 0.0)]).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn relaxation_bounds_integral_optimum_from_below() {
        let model = build_model(&datasets::table2(), BuildOptions { objective: Objective::Zz, ..Default::default() })
            .unwrap();
        let r = solve_lp_relaxation(&model, &[]).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!(model.to_lp().max_violation(&r.values) < 1e-7);
        // one full plate is the least any integral layout can open
        assert!(r.objective <= 62500.0 - 2512.54 + 1e-6);
    }

    #[test]
    fn inconsistent_extra_bounds_rejected() {
        let model = build_model(&one_part(), BuildOptions::default()).unwrap();
        let x = model.registry.x(0, 0, 0);
        assert_eq!(solve_lp_relaxation(&model, &[(x, 1.0, 0.0)]), Err(LpError::InconsistentBounds(x)));
    }
}
