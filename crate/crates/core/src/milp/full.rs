use crate::cost::scaled_cost;
use crate::dag::ComputationalDag;
use crate::error::{Error, Result};
use crate::machine::MachineParams;
use crate::schedule::{check_schedule, BspSchedule, CommStep};

use super::model::{Cmp, MilpModel, VarId};
use super::solver::SolveStatus;
use super::IlpOptions;
use super::IlpOutcome;

/// Models whose estimate reaches this many variables are refused.
pub const FULL_VARIABLE_LIMIT: usize = 20_000;

/// Size estimate `n * S * P^2` of the whole-problem model.
pub fn full_estimate(n: usize, supersteps: usize, p: usize) -> usize {
    n * supersteps * p * p
}

/// Exact number of variables [`ilp_full`] creates: the estimate plus
/// `n * S * P` assignment variables and three per-superstep auxiliaries
/// (work maximum, h-relation maximum, superstep-in-use flag).
pub fn full_variable_count(n: usize, supersteps: usize, p: usize) -> usize {
    full_estimate(n, supersteps, p) + n * supersteps * p + 3 * supersteps
}

pub(crate) struct FullModel {
    pub model: MilpModel,
    n: usize,
    p: usize,
    s: usize,
    comp: Vec<VarId>,
    // comm[v][p1][p2][s]; the diagonal p1 == p2 marks presence
    comm: Vec<VarId>,
}

impl FullModel {
    fn comp(&self, v: usize, p: usize, s: usize) -> VarId {
        self.comp[(v * self.p + p) * self.s + s]
    }

    fn comm(&self, v: usize, p1: usize, p2: usize, s: usize) -> VarId {
        self.comm[((v * self.p + p1) * self.p + p2) * self.s + s]
    }

    pub fn build(dag: &ComputationalDag, machine: &MachineParams, supersteps: usize) -> Self {
        let n = dag.num_nodes();
        let p = machine.num_processors();
        let s_count = supersteps.max(1);
        let d = machine.denom() as i64;
        let g = machine.g() as i64;
        let l = machine.latency() as i64;
        let mut model = MilpModel::new();

        let mut comp = Vec::with_capacity(n * p * s_count);
        for v in 0..n {
            for q in 0..p {
                for s in 0..s_count {
                    comp.push(model.add_binary(format!("comp[{v},{q},{s}]"), 0));
                }
            }
        }
        let mut comm = Vec::with_capacity(n * p * p * s_count);
        for v in 0..n {
            for p1 in 0..p {
                for p2 in 0..p {
                    for s in 0..s_count {
                        let x = model.add_binary(format!("comm[{v},{p1},{p2},{s}]"), 0);
                        if p1 != p2 && s + 1 == s_count {
                            // nothing can use a value sent in the last phase
                            model.fix(x, 0);
                        }
                        comm.push(x);
                    }
                }
            }
        }
        let total_work: i64 = dag.total_work() as i64;
        let max_h: i64 = (0..p)
            .flat_map(|a| (0..p).map(move |b| (a, b)))
            .map(|(a, b)| machine.scaled_lambda(a, b))
            .max()
            .unwrap_or(0) as i64
            * dag.total_comm() as i64
            * p as i64;
        let work_max: Vec<VarId> = (0..s_count)
            .map(|s| model.add_continuous(format!("work[{s}]"), 0, total_work, d))
            .collect();
        let h_max: Vec<VarId> = (0..s_count)
            .map(|s| model.add_continuous(format!("h[{s}]"), 0, max_h, g))
            .collect();
        let used: Vec<VarId> = (0..s_count)
            .map(|s| model.add_binary(format!("used[{s}]"), d * l))
            .collect();

        let mut fm = FullModel {
            model,
            n,
            p,
            s: s_count,
            comp,
            comm,
        };

        for v in 0..n {
            let mut row = Vec::with_capacity(p * s_count);
            for q in 0..p {
                for s in 0..s_count {
                    row.push((fm.comp(v, q, s), 1));
                }
            }
            fm.model.add_constraint(row, Cmp::Eq, 1);
        }

        // presence: computed here, already present, or received in the
        // previous phase
        for v in 0..n {
            for q in 0..p {
                for s in 0..s_count {
                    let mut row = vec![(fm.comm(v, q, q, s), 1), (fm.comp(v, q, s), -1)];
                    if s > 0 {
                        row.push((fm.comm(v, q, q, s - 1), -1));
                        for from in (0..p).filter(|&f| f != q) {
                            row.push((fm.comm(v, from, q, s - 1), -1));
                        }
                    }
                    fm.model.add_constraint(row, Cmp::Le, 0);
                }
            }
        }

        // edge rule
        for (u, v) in dag.edges() {
            for q in 0..p {
                for s in 0..s_count {
                    let row = vec![(fm.comp(v, q, s), 1), (fm.comm(u, q, q, s), -1)];
                    fm.model.add_constraint(row, Cmp::Le, 0);
                }
            }
        }

        // send rule
        for v in 0..n {
            for p1 in 0..p {
                for p2 in (0..p).filter(|&x| x != p1) {
                    for s in 0..s_count.saturating_sub(1) {
                        let row = vec![(fm.comm(v, p1, p2, s), 1), (fm.comm(v, p1, p1, s), -1)];
                        fm.model.add_constraint(row, Cmp::Le, 0);
                    }
                }
            }
        }

        for s in 0..s_count {
            for q in 0..p {
                let work: Vec<(VarId, i64)> = (0..n)
                    .filter(|&v| dag.work(v) > 0)
                    .map(|v| (fm.comp(v, q, s), dag.work(v) as i64))
                    .collect();
                fm.model.add_aux_lower_bound(work_max[s], 1, work, 0);
            }
            for q in 0..p {
                let mut send = Vec::new();
                let mut recv = Vec::new();
                for v in (0..n).filter(|&v| dag.comm(v) > 0) {
                    for other in (0..p).filter(|&o| o != q) {
                        let c = dag.comm(v) as i64;
                        send.push((fm.comm(v, q, other, s), c * machine.scaled_lambda(q, other) as i64));
                        recv.push((fm.comm(v, other, q, s), c * machine.scaled_lambda(other, q) as i64));
                    }
                }
                fm.model.add_aux_lower_bound(h_max[s], 1, send, 0);
                fm.model.add_aux_lower_bound(h_max[s], 1, recv, 0);
            }
            for v in 0..n {
                let row: Vec<(VarId, i64)> = (0..p).map(|q| (fm.comp(v, q, s), 1)).collect();
                fm.model.add_aux_lower_bound(used[s], 1, row, 0);
                if p > 1 && s + 1 < s_count {
                    let mut row = Vec::with_capacity(p * (p - 1));
                    for p1 in 0..p {
                        for p2 in (0..p).filter(|&x| x != p1) {
                            row.push((fm.comm(v, p1, p2, s), 1));
                        }
                    }
                    fm.model.add_aux_lower_bound(used[s], (p * (p - 1)) as i64, row, 0);
                }
            }
            // empty supersteps are pushed to the end
            if s + 1 < s_count {
                fm.model
                    .add_constraint(vec![(used[s], 1), (used[s + 1], -1)], Cmp::Ge, 0);
            }
        }
        fm
    }

    /// Variable values encoding `sched`, which must fit into the model's
    /// superstep range and have no empty superstep before a nonempty one.
    pub fn encode(&self, dag: &ComputationalDag, sched: &BspSchedule) -> Vec<f64> {
        let mut partial: Vec<Option<f64>> = vec![None; self.model.num_vars()];
        for x in &self.comp {
            partial[x.index()] = Some(0.0);
        }
        for x in &self.comm {
            partial[x.index()] = Some(0.0);
        }
        // first superstep from which v is present on q
        let mut from = vec![usize::MAX; self.n * self.p];
        for v in 0..self.n {
            let (q, s) = (sched.processor(v), sched.superstep(v));
            partial[self.comp(v, q, s).index()] = Some(1.0);
            from[v * self.p + q] = s;
        }
        for c in sched.comm() {
            partial[self.comm(c.node, c.from, c.to, c.step).index()] = Some(1.0);
            let f = &mut from[c.node * self.p + c.to];
            *f = (*f).min(c.step + 1);
        }
        for v in 0..dag.num_nodes() {
            for q in 0..self.p {
                for s in from[v * self.p + q]..self.s {
                    partial[self.comm(v, q, q, s).index()] = Some(1.0);
                }
            }
        }
        self.model.complete(&partial)
    }

    pub fn decode(&self, values: &[f64]) -> BspSchedule {
        let mut processor = vec![0; self.n];
        let mut superstep = vec![0; self.n];
        for v in 0..self.n {
            for q in 0..self.p {
                for s in 0..self.s {
                    if values[self.comp(v, q, s).index()] > 0.5 {
                        processor[v] = q;
                        superstep[v] = s;
                    }
                }
            }
        }
        let mut comm = Vec::new();
        for v in 0..self.n {
            for p1 in 0..self.p {
                for p2 in (0..self.p).filter(|&x| x != p1) {
                    for s in 0..self.s {
                        if values[self.comm(v, p1, p2, s).index()] > 0.5 {
                            comm.push(CommStep { node: v, from: p1, to: p2, step: s });
                        }
                    }
                }
            }
        }
        BspSchedule::new(processor, superstep, comm, self.s)
    }
}

/// Whole-problem MILP over the warm start's number of supersteps.
///
/// Supersteps may be left empty, so any schedule with at most that many
/// supersteps is representable. Values may be forwarded between processors
/// in several hops. Returns the better of the warm start and the decoded
/// incumbent.
pub fn ilp_full<'a>(
    dag: &ComputationalDag,
    machine: &MachineParams,
    warm_start: &BspSchedule,
    opts: impl Into<IlpOptions<'a>>,
) -> Result<IlpOutcome> {
    let opts = opts.into();
    check_schedule(dag, machine, warm_start)?;
    let s = warm_start.num_supersteps().max(1);
    let estimate = full_estimate(dag.num_nodes(), s, machine.num_processors());
    if estimate >= FULL_VARIABLE_LIMIT {
        return Err(Error::VariableBudget {
            estimate,
            limit: FULL_VARIABLE_LIMIT,
        });
    }
    if dag.is_empty() {
        return Ok(IlpOutcome::unchanged(warm_start, SolveStatus::ProvenOptimal));
    }
    let mut fm = FullModel::build(dag, machine, s);
    let hint = fm.encode(dag, &warm_start.compact());
    fm.model.set_warm_start(hint);
    let result = opts.solve(&fm.model)?;
    let Some(values) = result.values else {
        return Ok(IlpOutcome::unchanged(warm_start, result.status));
    };
    let decoded = fm.decode(&values);
    debug_assert!(check_schedule(dag, machine, &decoded).is_ok());
    if check_schedule(dag, machine, &decoded).is_err() {
        log::warn!("decoded whole-problem incumbent is invalid; keeping the warm start");
        return Ok(IlpOutcome::unchanged(warm_start, SolveStatus::NoSolution));
    }
    if scaled_cost(dag, machine, &decoded) < scaled_cost(dag, machine, warm_start) {
        Ok(IlpOutcome {
            schedule: decoded,
            status: result.status,
            improved: true,
        })
    } else {
        Ok(IlpOutcome::unchanged(warm_start, result.status))
    }
}
