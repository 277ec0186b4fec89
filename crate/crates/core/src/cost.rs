//! Exact BSP cost evaluation.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::dag::ComputationalDag;
use crate::error::Result;
use crate::machine::MachineParams;
use crate::schedule::{check_schedule, BspSchedule};

/// Exact nonnegative rational cost, stored as `scaled / denom`.
///
/// Within one machine all costs share the denominator `machine.denom()`, so
/// comparisons and sums are plain integer operations; mixed denominators are
/// still handled correctly.
#[derive(Debug, Clone, Copy)]
pub struct Cost {
    scaled: u64,
    denom: u64,
}

impl Cost {
    pub const ZERO: Cost = Cost { scaled: 0, denom: 1 };

    pub fn new(scaled: u64, denom: u64) -> Self {
        assert!(denom > 0);
        Self { scaled, denom }
    }

    pub fn integer(x: u64) -> Self {
        Self::new(x, 1)
    }

    pub fn scaled(&self) -> u64 {
        self.scaled
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn as_ratio(&self) -> Ratio<u64> {
        Ratio::new(self.scaled, self.denom)
    }

    pub fn to_f64(&self) -> f64 {
        self.scaled as f64 / self.denom as f64
    }

    /// The value as an integer, if it is one.
    pub fn as_integer(&self) -> Option<u64> {
        self.scaled.is_multiple_of(self.denom).then_some(self.scaled / self.denom)
    }
}

impl PartialEq for Cost {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.denom == other.denom {
            return self.scaled.cmp(&other.scaled);
        }
        (self.scaled as u128 * other.denom as u128).cmp(&(other.scaled as u128 * self.denom as u128))
    }
}

impl std::ops::Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        if self.denom == rhs.denom {
            return Cost::new(self.scaled + rhs.scaled, self.denom);
        }
        let r = self.as_ratio() + rhs.as_ratio();
        Cost::new(*r.numer(), *r.denom())
    }
}

impl std::iter::Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.as_ratio();
        if *r.denom() == 1 {
            write!(f, "{}", r.numer())
        } else {
            write!(f, "{}/{}", r.numer(), r.denom())
        }
    }
}

impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.as_integer() {
            Some(x) => s.serialize_u64(x),
            None => s.serialize_str(&self.to_string()),
        }
    }
}

/// Cost of one nonempty superstep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuperstepCost {
    /// Index of the superstep in the schedule (before elision).
    pub superstep: usize,
    /// Maximum work over processors.
    pub work: u64,
    /// h-relation: maximum over processors of max(send, receive), weighted
    /// by the NUMA coefficients.
    pub h: Cost,
    /// `g * h`.
    pub comm: Cost,
    pub latency: u64,
    pub total: Cost,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostBreakdown {
    pub supersteps: Vec<SuperstepCost>,
    /// `send[i][p]`: data sent by `p` in the phase of `supersteps[i]`.
    pub send: Vec<Vec<Cost>>,
    /// `recv[i][p]`: data received by `p` in the phase of `supersteps[i]`.
    pub recv: Vec<Vec<Cost>>,
    pub total: Cost,
}

impl CostBreakdown {
    /// CSV with columns `superstep,work,comm,latency,total`, where `comm`
    /// is the communication cost `g * h`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["superstep", "work", "comm", "latency", "total"])?;
        for s in &self.supersteps {
            w.write_record([
                s.superstep.to_string(),
                s.work.to_string(),
                s.comm.to_string(),
                s.latency.to_string(),
                s.total.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Per-superstep raw tables, all communication values scaled by
/// `machine.denom()`.
pub(crate) struct RawCost {
    pub work: Vec<Vec<u64>>,
    pub send: Vec<Vec<u64>>,
    pub recv: Vec<Vec<u64>>,
    pub nonempty: Vec<bool>,
}

pub(crate) fn raw_tables(
    dag: &ComputationalDag,
    machine: &MachineParams,
    sched: &BspSchedule,
) -> RawCost {
    let p = machine.num_processors();
    let s = sched.num_supersteps();
    let mut work = vec![vec![0u64; p]; s];
    let mut send = vec![vec![0u64; p]; s];
    let mut recv = vec![vec![0u64; p]; s];
    let mut nonempty = vec![false; s];
    for v in dag.nodes() {
        let t = sched.superstep(v);
        work[t][sched.processor(v)] += dag.work(v);
        nonempty[t] = true;
    }
    for c in sched.comm() {
        let x = machine.scaled_lambda(c.from, c.to) * dag.comm(c.node);
        send[c.step][c.from] += x;
        recv[c.step][c.to] += x;
        nonempty[c.step] = true;
    }
    RawCost {
        work,
        send,
        recv,
        nonempty,
    }
}

/// Total cost scaled by `machine.denom()`, without validity checks.
pub fn scaled_cost(dag: &ComputationalDag, machine: &MachineParams, sched: &BspSchedule) -> u64 {
    let raw = raw_tables(dag, machine, sched);
    let d = machine.denom();
    let mut total = 0;
    for t in 0..sched.num_supersteps() {
        if !raw.nonempty[t] {
            continue;
        }
        let w = raw.work[t].iter().copied().max().unwrap_or(0);
        let h = raw.send[t]
            .iter()
            .zip(&raw.recv[t])
            .map(|(a, b)| *a.max(b))
            .max()
            .unwrap_or(0);
        total += d * (w + machine.latency()) + machine.g() * h;
    }
    total
}

/// Total cost without validity checks.
pub fn cost_unchecked(dag: &ComputationalDag, machine: &MachineParams, sched: &BspSchedule) -> Cost {
    Cost::new(scaled_cost(dag, machine, sched), machine.denom())
}

/// Full per-superstep breakdown; fails on invalid schedules.
pub fn evaluate_cost(
    dag: &ComputationalDag,
    machine: &MachineParams,
    sched: &BspSchedule,
) -> Result<CostBreakdown> {
    check_schedule(dag, machine, sched)?;
    let raw = raw_tables(dag, machine, sched);
    let d = machine.denom();
    let c = |x: u64| Cost::new(x, d);
    let mut out = CostBreakdown {
        supersteps: Vec::new(),
        send: Vec::new(),
        recv: Vec::new(),
        total: Cost::new(0, d),
    };
    let mut total = 0;
    for t in 0..sched.num_supersteps() {
        if !raw.nonempty[t] {
            continue;
        }
        let work = raw.work[t].iter().copied().max().unwrap_or(0);
        let h = raw.send[t]
            .iter()
            .zip(&raw.recv[t])
            .map(|(a, b)| *a.max(b))
            .max()
            .unwrap_or(0);
        let step_total = d * (work + machine.latency()) + machine.g() * h;
        total += step_total;
        out.supersteps.push(SuperstepCost {
            superstep: t,
            work,
            h: c(h),
            comm: c(machine.g() * h),
            latency: machine.latency(),
            total: c(step_total),
        });
        out.send.push(raw.send[t].iter().map(|&x| c(x)).collect());
        out.recv.push(raw.recv[t].iter().map(|&x| c(x)).collect());
    }
    out.total = c(total);
    Ok(out)
}

/// Total cost of a valid schedule.
pub fn total_cost(dag: &ComputationalDag, machine: &MachineParams, sched: &BspSchedule) -> Result<Cost> {
    check_schedule(dag, machine, sched)?;
    Ok(cost_unchecked(dag, machine, sched))
}
