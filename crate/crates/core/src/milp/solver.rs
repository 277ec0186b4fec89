use std::time::{Duration, Instant};

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, SolveOptions, SolveOutcome};

use crate::budget::Budget;
use crate::error::{Error, Result};

use super::model::{Cmp, MilpModel, VarKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    ProvenOptimal,
    FeasibleIncumbent,
    NoSolution,
    Infeasible,
    /// The model exceeded the configured size cap and was not solved.
    Skipped,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::ProvenOptimal | SolveStatus::FeasibleIncumbent)
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Incumbent, integral variables rounded; present iff the status has a
    /// solution.
    pub values: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub wall_time: Duration,
}

impl SolveResult {
    pub(crate) fn skipped() -> Self {
        Self {
            status: SolveStatus::Skipped,
            values: None,
            objective: None,
            wall_time: Duration::ZERO,
        }
    }
}

/// A mixed-integer solver. Under [`Budget::Ops`] the unit is one
/// branch-and-bound node.
pub trait MilpBackend: Send + Sync {
    fn name(&self) -> &'static str;

    /// Raw solve; the caller re-checks the incumbent.
    fn solve_raw(&self, model: &MilpModel, budget: Budget) -> Result<SolveResult>;
}

/// Built-in branch-and-bound backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinBackend;

pub const BUILTIN_BACKEND: &str = "builtin";

/// Resolves a backend by configuration key.
pub fn backend(key: &str) -> Result<Box<dyn MilpBackend>> {
    match key {
        BUILTIN_BACKEND | "microlp" => Ok(Box::new(BuiltinBackend)),
        other => Err(Error::BackendUnavailable(format!(
            "'{other}' (available: {BUILTIN_BACKEND})"
        ))),
    }
}

impl MilpBackend for BuiltinBackend {
    fn name(&self) -> &'static str {
        BUILTIN_BACKEND
    }

    fn solve_raw(&self, model: &MilpModel, budget: Budget) -> Result<SolveResult> {
        let start = Instant::now();
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<microlp::Variable> = model
            .vars()
            .iter()
            .map(|v| match v.kind {
                VarKind::Binary if (v.lo, v.hi) == (0, 1) => problem.add_binary_var(v.obj as f64),
                VarKind::Binary | VarKind::Integer => {
                    problem.add_integer_var(v.obj as f64, (v.lo as i32, v.hi as i32))
                }
                VarKind::Continuous => problem.add_var(v.obj as f64, (v.lo as f64, v.hi as f64)),
            })
            .collect();
        for c in model.constraints() {
            let mut expr = LinearExpr::empty();
            for &(v, a) in &c.terms {
                expr.add(vars[v.index()], a as f64);
            }
            let op = match c.cmp {
                Cmp::Le => ComparisonOp::Le,
                Cmp::Ge => ComparisonOp::Ge,
                Cmp::Eq => ComparisonOp::Eq,
            };
            problem.add_constraint(expr, op, c.rhs as f64);
        }

        let mut options = SolveOptions::default();
        options.time_limit = budget.time_limit();
        options.node_limit = budget.op_limit();
        options.warm_start = model
            .warm_start()
            .map(|w| vars.iter().copied().zip(w.iter().copied()).collect());

        let outcome = problem.solve_with(options);
        let wall_time = start.elapsed();
        if let Ok(o) = &outcome {
            let st = o.stats();
            log::debug!(
                "milp: {} vars, {} rows, {} nodes, {} pivots, {:?}",
                model.num_vars(),
                model.num_constraints(),
                st.nodes_solved,
                st.lp_iterations,
                wall_time
            );
        }
        let empty = |status| SolveResult {
            status,
            values: None,
            objective: None,
            wall_time,
        };
        match outcome {
            Ok(SolveOutcome::Solution(sol)) => {
                let status = match sol.status() {
                    microlp::SolutionStatus::Optimal => SolveStatus::ProvenOptimal,
                    _ => SolveStatus::FeasibleIncumbent,
                };
                let values: Vec<f64> = vars.iter().map(|&v| sol.var_value_raw(v)).collect();
                Ok(SolveResult {
                    status,
                    objective: Some(model.objective_value(&values)),
                    values: Some(values),
                    wall_time,
                })
            }
            Ok(SolveOutcome::Interrupted(_)) => Ok(empty(SolveStatus::NoSolution)),
            Err(microlp::Error::Infeasible) => Ok(empty(SolveStatus::Infeasible)),
            Err(microlp::Error::Unbounded) => Err(Error::MalformedModel("objective is unbounded".into())),
            Err(e) => Err(Error::MalformedModel(format!("solver rejected the model: {e}"))),
        }
    }
}

/// Solves with the built-in backend.
pub fn solve_model(model: &MilpModel, budget: Budget) -> Result<SolveResult> {
    solve_model_with(&BuiltinBackend, model, budget)
}

/// Solves `model` and re-checks the result independently of the backend.
///
/// A backend incumbent that fails the check is discarded. If the model
/// carries a complete, feasible warm start, the returned incumbent is never
/// worse than it.
pub fn solve_model_with(backend: &dyn MilpBackend, model: &MilpModel, budget: Budget) -> Result<SolveResult> {
    model.validate()?;
    let start = Instant::now();
    let mut result = if model.num_vars() == 0 {
        let feasible = model.check(&[]).is_ok();
        SolveResult {
            status: if feasible { SolveStatus::ProvenOptimal } else { SolveStatus::Infeasible },
            values: feasible.then(Vec::new),
            objective: feasible.then(|| model.objective_constant() as f64),
            wall_time: Duration::ZERO,
        }
    } else {
        backend.solve_raw(model, budget)?
    };

    if let Some(values) = result.values.as_mut() {
        model.round_integral(values);
        if let Err(why) = model.check(values) {
            log::warn!("{} incumbent failed the feasibility re-check: {why}", backend.name());
            result.values = None;
            result.objective = None;
            result.status = SolveStatus::NoSolution;
        } else {
            result.objective = Some(model.objective_value(values));
        }
    }

    if let Some(ws) = model.warm_start() {
        let mut ws = ws.to_vec();
        model.round_integral(&mut ws);
        if model.check(&ws).is_ok() {
            let ws_obj = model.objective_value(&ws);
            let worse = match result.objective {
                Some(obj) => obj > ws_obj + 1e-6 * (1.0 + ws_obj.abs()),
                None => true,
            };
            if worse {
                result.status = SolveStatus::FeasibleIncumbent;
                result.values = Some(ws);
                result.objective = Some(ws_obj);
            }
        }
    }
    result.wall_time = start.elapsed();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::model::VarKind;

    #[test]
    fn pinned_model_is_optimal() {
        let mut m = MilpModel::new();
        let x = m.add_binary("x", 4);
        let y = m.add_var("y", VarKind::Integer, 0, 10, 1);
        m.fix(x, 1);
        m.fix(y, 3);
        m.add_constraint(vec![(x, 1), (y, 1)], Cmp::Le, 5);
        let r = solve_model(&m, Budget::Unlimited).unwrap();
        assert_eq!(r.status, SolveStatus::ProvenOptimal);
        assert_eq!(r.objective, Some(7.0));
    }

    #[test]
    fn conflicting_pins_are_infeasible() {
        let mut m = MilpModel::new();
        let x = m.add_binary("x", 1);
        let y = m.add_binary("y", 1);
        m.fix(x, 1);
        m.fix(y, 1);
        m.add_constraint(vec![(x, 1), (y, 1)], Cmp::Le, 1);
        let r = solve_model(&m, Budget::Unlimited).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.values.is_none());
    }

    #[test]
    fn knapsack_optimum() {
        // maximize 5a + 4b + 3c subject to 2a + 3b + c <= 4
        let mut m = MilpModel::new();
        let a = m.add_binary("a", -5);
        let b = m.add_binary("b", -4);
        let c = m.add_binary("c", -3);
        m.add_constraint(vec![(a, 2), (b, 3), (c, 1)], Cmp::Le, 4);
        let r = solve_model(&m, Budget::Unlimited).unwrap();
        assert_eq!(r.status, SolveStatus::ProvenOptimal);
        assert_eq!(r.objective, Some(-8.0));
    }

    #[test]
    fn warm_start_bounds_incumbent() {
        let mut m = MilpModel::new();
        let xs: Vec<_> = (0..12).map(|i| m.add_binary(format!("x{i}"), -(i as i64 % 5) - 1)).collect();
        m.add_constraint(xs.iter().map(|&x| (x, 3)).collect(), Cmp::Le, 17);
        let mut ws = vec![0.0; 12];
        ws[4] = 1.0;
        m.set_warm_start(ws);
        let r = solve_model(&m, Budget::Ops(0)).unwrap();
        assert!(r.status.has_solution());
        assert!(r.objective.unwrap() <= -5.0);
    }

    #[test]
    fn unknown_backend_key() {
        assert!(matches!(backend("cbc"), Err(Error::BackendUnavailable(_))));
        assert_eq!(backend("builtin").unwrap().name(), "builtin");
    }

    #[test]
    fn empty_model() {
        let mut m = MilpModel::new();
        m.add_objective_constant(9);
        let r = solve_model(&m, Budget::Unlimited).unwrap();
        assert_eq!(r.objective, Some(9.0));
    }
}
