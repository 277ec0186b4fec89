//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bspsched::baselines::{cilk_schedule, list_schedule, ListPolicy};
use bspsched::budget::Budget;
use bspsched::classical::classical_to_bsp;
use bspsched::cost::{evaluate_cost, scaled_cost};
use bspsched::dag::ComputationalDag;
use bspsched::generator::{gen_exp, gen_spmv, generate, generate_in_range, random_pattern, GenKind, GenSpec};
use bspsched::hyperdag::{parse_hyperdag, write_hyperdag};
use bspsched::init::{bspg, source_schedule};
use bspsched::local_search::{hc_improve_with, HcConfig};
use bspsched::machine::{numa_from_tree, parse_lambda_matrix, MachineParams};
use bspsched::milp::ilp_full;
use bspsched::multilevel::{coarsen, uncoarsen_refine_with, MultilevelConfig};
use bspsched::pipeline::{
    evaluate_suite, run_algorithm, run_multilevel, run_pipeline, AlgoSpec, Algorithm, Instance, MachineSpec,
    PipelineConfig, PipelineRun,
};
use bspsched::schedule::{validate_schedule, write_schedule, BspSchedule};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------------------
// Independent oracles

/// Random DAG whose edges all go from lower to higher ids.
fn random_dag(rng: &mut ChaCha8Rng, n: usize, density: f64) -> ComputationalDag {
    let mut edges = Vec::new();
    for v in 1..n {
        for u in 0..v {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    let work = (0..n).map(|_| rng.gen_range(0..6)).collect();
    let comm = (0..n).map(|_| rng.gen_range(0..4)).collect();
    ComputationalDag::new(work, comm, &edges).unwrap()
}

/// Cost from the definition, given explicit transfers `(node, from, to, phase)`.
/// Supersteps with neither a node nor a transfer cost nothing.
fn oracle_cost(
    dag: &ComputationalDag,
    m: &MachineParams,
    place: &[(usize, usize)],
    transfers: &[(usize, usize, usize, usize)],
) -> u64 {
    let p = m.num_processors();
    let steps = place
        .iter()
        .map(|&(_, s)| s + 1)
        .chain(transfers.iter().map(|t| t.3 + 1))
        .max()
        .unwrap_or(0);
    let mut total = 0;
    for s in 0..steps {
        let mut work = vec![0u64; p];
        let mut send = vec![0u64; p];
        let mut recv = vec![0u64; p];
        let mut used = false;
        for (v, &(q, t)) in place.iter().enumerate() {
            if t == s {
                work[q] += dag.work(v);
                used = true;
            }
        }
        for &(v, from, to, _) in transfers.iter().filter(|t| t.3 == s) {
            let x = m.scaled_lambda(from, to) * dag.comm(v);
            send[from] += x;
            recv[to] += x;
            used = true;
        }
        if used {
            let w = work.iter().max().unwrap();
            let h = send.iter().chain(&recv).max().unwrap();
            total += m.denom() * (w + m.latency()) + m.g() * h;
        }
    }
    total
}

/// Every value sent straight from its producer, in the phase before its
/// first use on each other processor.
fn lazy_transfers(dag: &ComputationalDag, place: &[(usize, usize)]) -> Vec<(usize, usize, usize, usize)> {
    let mut first: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (u, v) in dag.edges() {
        if place[u].0 != place[v].0 {
            let e = first.entry((u, place[v].0)).or_insert(place[v].1);
            *e = (*e).min(place[v].1);
        }
    }
    first
        .into_iter()
        .map(|((u, q), t)| (u, place[u].0, q, t - 1))
        .collect()
}

fn edge_rule(dag: &ComputationalDag, place: &[(usize, usize)]) -> bool {
    dag.edges().all(|(u, v)| {
        let ((pu, su), (pv, sv)) = (place[u], place[v]);
        if pu == pv {
            su <= sv
        } else {
            su < sv
        }
    })
}

/// Visits every placement with `steps` supersteps that satisfies the edge
/// rule. Nodes are placed in id order, which is topological here.
fn for_each_placement(
    dag: &ComputationalDag,
    p: usize,
    steps: usize,
    limit: usize,
    visit: &mut dyn FnMut(&[(usize, usize)]),
) -> usize {
    fn rec(
        dag: &ComputationalDag,
        p: usize,
        steps: usize,
        place: &mut Vec<(usize, usize)>,
        count: &mut usize,
        limit: usize,
        visit: &mut dyn FnMut(&[(usize, usize)]),
    ) {
        if *count > limit {
            return;
        }
        let v = place.len();
        if v == dag.num_nodes() {
            *count += 1;
            visit(place);
            return;
        }
        for q in 0..p {
            for s in 0..steps {
                let ok = dag.predecessors(v).iter().all(|&u| {
                    let (pu, su) = place[u];
                    if pu == q {
                        su <= s
                    } else {
                        su < s
                    }
                });
                if ok {
                    place.push((q, s));
                    rec(dag, p, steps, place, count, limit, visit);
                    place.pop();
                }
            }
        }
    }
    let mut count = 0;
    rec(dag, p, steps, &mut Vec::new(), &mut count, limit, visit);
    count
}

/// Cheapest direct-send schedule with at most `steps` supersteps.
fn direct_send_optimum(dag: &ComputationalDag, m: &MachineParams, steps: usize) -> u64 {
    let mut best = u64::MAX;
    for_each_placement(dag, m.num_processors(), steps, usize::MAX, &mut |place| {
        let lazy = lazy_transfers(dag, place);
        // Each transfer may go in any phase from its producer's superstep
        // up to the lazy phase.
        let mut phase: Vec<usize> = lazy.iter().map(|t| place[t.0].1).collect();
        loop {
            let tr: Vec<_> = lazy
                .iter()
                .zip(&phase)
                .map(|(&(v, a, b, _), &s)| (v, a, b, s))
                .collect();
            best = best.min(oracle_cost(dag, m, place, &tr));
            let mut i = 0;
            loop {
                if i == lazy.len() {
                    return;
                }
                if phase[i] < lazy[i].3 {
                    phase[i] += 1;
                    break;
                }
                phase[i] = place[lazy[i].0].1;
                i += 1;
            }
        }
    });
    best
}

fn is_acyclic(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut indeg = vec![0; n];
    let mut succ = vec![Vec::new(); n];
    for &(u, v) in edges {
        indeg[v] += 1;
        succ[u].push(v);
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(u) = stack.pop() {
        seen += 1;
        for &v in &succ[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                stack.push(v);
            }
        }
    }
    seen == n
}

fn ln_geomean(ratios: &[f64]) -> f64 {
    (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp()
}

// ---------------------------------------------------------------------------
// Shared suite

const RANGES: [(usize, usize); 4] = [(40, 80), (80, 160), (160, 300), (300, 500)];

struct Case {
    name: String,
    dag: ComputationalDag,
    p: usize,
    g: u64,
    delta: Option<u64>,
}

impl Case {
    fn machine(&self) -> MachineParams {
        match self.delta {
            Some(d) => MachineParams::numa_tree(self.p, self.g, 5, d).unwrap(),
            None => MachineParams::uniform(self.p, self.g, 5).unwrap(),
        }
    }
}

fn suite() -> Vec<Case> {
    (0..100)
        .map(|i| {
            let kind = GenKind::ALL[i % 4];
            let (lo, hi) = RANGES[(i / 4) % 4];
            let (_, dag) = generate_in_range(kind, lo, hi, 1000 + i as u64).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
            Case {
                name: format!("{kind}-{i:03}"),
                dag,
                p: [4, 8, 16][i % 3],
                g: [1, 3, 5][rng.gen_range(0..3)],
                delta: [None, Some(2), Some(3), Some(4)][rng.gen_range(0..4)],
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Criteria

fn cost_model_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut schedules = 0usize;
    let mut mismatches = 0usize;
    let cap = 150_000;
    for _ in 0..200 {
        let n = rng.gen_range(1..=8);
        let p = rng.gen_range(1..=3);
        let (g, l) = (rng.gen_range(0..4), rng.gen_range(0..6));
        let machine = match rng.gen_range(0..3) {
            0 => MachineParams::uniform(p, g, l).unwrap(),
            1 if p != 3 => MachineParams::numa_tree(p, g, l, rng.gen_range(2..5)).unwrap(),
            _ => {
                // Arbitrary coefficients, some fractional.
                let text: String = (0..p)
                    .map(|i| {
                        let row: Vec<&str> = (0..p)
                            .map(|j| if i == j { "0" } else { ["1", "2", "3/2", "1/3"][rng.gen_range(0..4)] })
                            .collect();
                        row.join(" ") + "\n"
                    })
                    .collect();
                MachineParams::with_lambda(p, g, l, parse_lambda_matrix(&text).unwrap()).unwrap()
            }
        };
        // Denser graphs until the enumeration fits.
        let mut density = rng.gen_range(0.1..0.6);
        let dag = loop {
            let d = random_dag(&mut rng, n, density);
            if for_each_placement(&d, p, 3, cap, &mut |_| {}) <= cap {
                break d;
            }
            density = (density + 0.15).min(1.0);
        };
        for_each_placement(&dag, p, 3, usize::MAX, &mut |place| {
            let proc_ = place.iter().map(|x| x.0).collect();
            let step = place.iter().map(|x| x.1).collect();
            let sched = BspSchedule::from_assignment(&dag, proc_, step).unwrap();
            let got = evaluate_cost(&dag, &machine, &sched).unwrap().total.scaled();
            let want = oracle_cost(&dag, &machine, place, &lazy_transfers(&dag, place));
            schedules += 1;
            if got != want {
                mismatches += 1;
            }
        });
    }
    outcome(
        mismatches == 0,
        format!("{schedules} schedules on 200 DAGs, {mismatches} mismatches"),
    )
}

fn ilp_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut wrong = Vec::new();
    for i in 0..50 {
        let n = rng.gen_range(1..=5);
        let density = rng.gen_range(0.1..0.7);
        let dag = random_dag(&mut rng, n, density);
        let m = MachineParams::uniform(2, rng.gen_range(1..4), rng.gen_range(0..5)).unwrap();
        let warm = BspSchedule::trivial(&dag).with_num_supersteps(3);
        let out = ilp_full(&dag, &m, &warm, Budget::Unlimited).unwrap();
        let got = scaled_cost(&dag, &m, &out.schedule);
        let want = direct_send_optimum(&dag, &m, 3);
        if got != want || !validate_schedule(&dag, &m, &out.schedule).is_empty() {
            wrong.push(format!("#{i}: {got} vs {want}"));
        }
    }
    outcome(wrong.is_empty(), format!("50 DAGs, {} disagreements {:?}", wrong.len(), wrong))
}

fn numa_fidelity() -> Outcome {
    let l8 = numa_from_tree(8, 3).unwrap();
    let l16 = numa_from_tree(16, 3).unwrap();
    let row: Vec<String> = l8[0].iter().map(|x| x.to_string()).collect();
    let expect = ["0", "1", "3", "3", "9", "9", "9", "9"];
    let ok8 = row[1..] == expect[1..];
    let ok16 = l16[0][15].to_string() == "27";
    outcome(ok8 && ok16, format!("row 0 for P=8: {row:?}; lambda(0,15) for P=16: {}", l16[0][15]))
}

struct SuiteRuns {
    pipelines: Vec<PipelineRun>,
    validity: Outcome,
}

fn validity_everywhere(cases: &[Case], config: &PipelineConfig) -> SuiteRuns {
    let mut checked = 0usize;
    let mut bad: Vec<String> = Vec::new();
    let mut pipelines = Vec::new();
    for case in cases {
        let m = case.machine();
        let dag = &case.dag;
        let mut check = |label: &str, s: &BspSchedule| {
            checked += 1;
            let v = validate_schedule(dag, &m, s);
            if !v.is_empty() {
                bad.push(format!("{} {label}: {}", case.name, v[0]));
            }
        };
        let run = run_pipeline(dag, &m, config).unwrap();
        for st in &run.stages {
            check(&st.stage, &st.schedule);
        }
        check("pipeline", &run.schedule);
        let ml = run_multilevel(dag, &m, config).unwrap();
        for r in &ml.outcome.runs {
            check(&format!("multilevel-{}", r.ratio), &r.schedule);
        }
        check("multilevel", &ml.outcome.schedule);
        for (label, cs) in [
            ("cilk", cilk_schedule(dag, &m, config.seed)),
            ("blest", list_schedule(dag, &m, ListPolicy::BlEst)),
            ("etf", list_schedule(dag, &m, ListPolicy::Etf)),
        ] {
            check(label, &classical_to_bsp(dag, &cs).unwrap());
        }
        check("bspg", &bspg(dag, &m));
        check("source", &source_schedule(dag, &m));
        check("trivial", &BspSchedule::trivial(dag));
        pipelines.push(run);
    }
    SuiteRuns {
        pipelines,
        validity: outcome(
            bad.is_empty(),
            format!("{checked} schedules, {} violations {:?}", bad.len(), bad.iter().take(5).collect::<Vec<_>>()),
        ),
    }
}

/// Node moves allowed by the hill climber: another processor in the same
/// superstep, or any processor one superstep earlier or later.
fn improving_neighbor(dag: &ComputationalDag, m: &MachineParams, sched: &BspSchedule) -> Option<(usize, usize, usize)> {
    let base = scaled_cost(dag, m, sched);
    let steps = sched.num_supersteps();
    let mut place: Vec<(usize, usize)> = (0..dag.num_nodes())
        .map(|v| (sched.processor(v), sched.superstep(v)))
        .collect();
    for v in 0..dag.num_nodes() {
        let (p0, s0) = place[v];
        for s in s0.saturating_sub(1)..=(s0 + 1).min(steps - 1) {
            for q in 0..m.num_processors() {
                if (q, s) == (p0, s0) {
                    continue;
                }
                place[v] = (q, s);
                if edge_rule(dag, &place) {
                    let c = oracle_cost(dag, m, &place, &lazy_transfers(dag, &place));
                    if c < base {
                        return Some((v, q, s));
                    }
                }
            }
        }
        place[v] = (p0, s0);
    }
    None
}

fn monotone_improvement(cases: &[Case], runs: &[PipelineRun]) -> Outcome {
    let mut increases = Vec::new();
    let mut pairs = 0;
    for (case, run) in cases.iter().zip(runs) {
        let cost: BTreeMap<&str, u64> = run.stages.iter().map(|s| (s.stage.as_str(), s.cost)).collect();
        let mut check = |from: &str, to: &str| {
            if let (Some(&a), Some(&b)) = (cost.get(from), cost.get(to)) {
                pairs += 1;
                if b > a {
                    increases.push(format!("{}: {from} {a} -> {to} {b}", case.name));
                }
            }
        };
        for init in ["bspg", "source", "ilp_init"] {
            check(init, &format!("{init}+hc"));
            check(&format!("{init}+hc"), &format!("{init}+hccs"));
        }
        let best = ["bspg+hccs", "source+hccs", "ilp_init+hccs"]
            .iter()
            .filter_map(|s| cost.get(s))
            .min()
            .copied()
            .unwrap();
        let mut prev = best;
        for stage in ["ilp_full", "ilp_part", "ilp_cs"] {
            if let Some(&c) = cost.get(stage) {
                pairs += 1;
                if c > prev {
                    increases.push(format!("{}: {stage} {prev} -> {c}", case.name));
                }
                prev = c;
            }
        }
    }

    let mut not_minimal = Vec::new();
    for case in cases.iter().step_by(5) {
        let m = case.machine();
        let start = bspg(&case.dag, &m).relazied(&case.dag).unwrap();
        let hc = hc_improve_with(&case.dag, &m, &start, Budget::Unlimited, &HcConfig::default()).unwrap();
        if !hc.local_minimum {
            not_minimal.push(format!("{}: stopped early", case.name));
        } else if let Some(mv) = improving_neighbor(&case.dag, &m, &hc.schedule) {
            not_minimal.push(format!("{}: improving move {mv:?}", case.name));
        }
    }
    outcome(
        increases.is_empty() && not_minimal.is_empty(),
        format!(
            "{pairs} stage transitions, {} increases; 20 hill-climbing minima re-scanned, {} improvable {:?}",
            increases.len(),
            not_minimal.len(),
            increases.iter().chain(&not_minimal).take(5).collect::<Vec<_>>()
        ),
    )
}

fn baseline_comparison(cases: &[Case], config: &PipelineConfig) -> Outcome {
    let mut ratios = Vec::new();
    for case in cases {
        let m = MachineParams::uniform(case.p, 5, 5).unwrap();
        let ours = run_algorithm(Algorithm::Pipeline, &case.dag, &m, config).unwrap().cost;
        let cilk = run_algorithm(Algorithm::Cilk, &case.dag, &m, config).unwrap().cost;
        ratios.push(ours.to_f64() / cilk.to_f64());
    }
    let share = ratios.iter().filter(|&&r| r <= 1.0).count() as f64 / ratios.len() as f64;
    let gm = ln_geomean(&ratios);
    outcome(
        share >= 0.9 && gm <= 0.85,
        format!("{:.0}% of instances at or below Cilk, geometric mean ratio {gm:.3}", share * 100.0),
    )
}

fn two_clusters(len: usize) -> ComputationalDag {
    let mut edges = Vec::new();
    for c in 0..2 {
        for i in 1..len {
            edges.push((c * len + i - 1, c * len + i));
            if i >= 2 {
                edges.push((c * len + i - 2, c * len + i));
            }
        }
    }
    edges.push((len - 1, 2 * len - 1));
    ComputationalDag::new(vec![4; 2 * len], vec![3; 2 * len], &edges).unwrap()
}

fn multilevel_specialist(config: &PipelineConfig) -> Outcome {
    let mut wins = 0;
    let mut rows = Vec::new();
    for i in 0..10 {
        let dag = two_clusters(10 + 2 * i);
        let m = MachineParams::numa_tree(8, 2 + (i as u64 % 2), 5, 4).unwrap();
        let trivial = scaled_cost(&dag, &m, &BspSchedule::trivial(&dag));
        let run = run_multilevel(&dag, &m, config).unwrap();
        let ok = validate_schedule(&dag, &m, &run.outcome.schedule).is_empty();
        let cost = run.cost.scaled();
        if ok && cost < trivial {
            wins += 1;
        }
        rows.push(format!("{cost}/{trivial}"));
    }
    outcome(wins >= 9, format!("{wins}/10 below the single-processor cost {rows:?}"))
}

fn coarsening_invariants() -> Outcome {
    let mut problems = Vec::new();
    let mut levels = 0;
    let config = MultilevelConfig::default();
    for i in 0..50 {
        let kind = GenKind::ALL[i % 4];
        let (_, dag) = generate_in_range(kind, 40, 200, 5000 + i as u64).unwrap();
        let ratio = config.ratios[i % config.ratios.len()];
        let seq = coarsen(&dag, ratio).unwrap();
        for level in 0..=seq.len() {
            levels += 1;
            let (d, _) = seq.dag_at(level).unwrap();
            let edges: Vec<_> = d.edges().collect();
            if !is_acyclic(d.num_nodes(), &edges) {
                problems.push(format!("#{i} level {level}: cycle"));
            }
            if d.total_work() != dag.total_work() || d.total_comm() != dag.total_comm() {
                problems.push(format!("#{i} level {level}: weights changed"));
            }
            if d.num_nodes() != dag.num_nodes() - level {
                problems.push(format!("#{i} level {level}: {} nodes", d.num_nodes()));
            }
        }
        let m = MachineParams::numa_tree(8, 2, 5, 3).unwrap();
        let (coarse, _) = seq.dag_at(seq.len()).unwrap();
        let start = bspg(&coarse, &m);
        for level in 0..=seq.len() {
            let map = seq.projection(seq.len(), level).unwrap();
            let (d, _) = seq.dag_at(level).unwrap();
            let proc_ = map.iter().map(|&c| start.processor(c)).collect();
            let step = map.iter().map(|&c| start.superstep(c)).collect();
            match BspSchedule::from_assignment(&d, proc_, step) {
                Ok(s) if validate_schedule(&d, &m, &s).is_empty() => {}
                _ => problems.push(format!("#{i} level {level}: invalid projection")),
            }
        }
        uncoarsen_refine_with(&seq, &start, &m, &config, |level, d, s| {
            if !validate_schedule(d, &m, s).is_empty() {
                problems.push(format!("#{i} level {level}: invalid refined projection"));
            }
        })
        .unwrap();
    }
    outcome(
        problems.is_empty(),
        format!("50 DAGs, {levels} levels, {} problems {:?}", problems.len(), problems.iter().take(5).collect::<Vec<_>>()),
    )
}

fn generator_audit(cases: &[Case]) -> Outcome {
    let mut dags: Vec<ComputationalDag> = cases.iter().map(|c| c.dag.clone()).collect();
    for seed in 0..20 {
        let mut spec = GenSpec::new(GenKind::ALL[seed % 4], 10, 0.25, 1 + seed % 3, seed as u64);
        spec.shared_matrix = seed % 2 == 0;
        dags.push(generate(&spec).unwrap());
    }
    let mut problems = Vec::new();
    for (i, dag) in dags.iter().enumerate() {
        for v in dag.nodes() {
            let indeg = dag.in_degree(v) as u64;
            let w = if indeg == 0 { 1 } else { indeg - 1 };
            if dag.work(v) != w || dag.comm(v) != 1 {
                problems.push(format!("dag {i} node {v}: w={} c={}", dag.work(v), dag.comm(v)));
                break;
            }
        }
        let text = write_hyperdag(dag);
        if write_hyperdag(&parse_hyperdag(&text).unwrap()) != text {
            problems.push(format!("dag {i}: hyperDAG round trip differs"));
        }
    }
    for seed in 0..20 {
        let pattern = random_pattern(6 + seed as usize, 0.3, seed).unwrap();
        let a = gen_exp(&pattern, 1, false).unwrap();
        let b = gen_spmv(&pattern).unwrap();
        let same = a.work_weights() == b.work_weights()
            && a.comm_weights() == b.comm_weights()
            && a.edges().collect::<Vec<_>>() == b.edges().collect::<Vec<_>>();
        if !same {
            problems.push(format!("pattern {seed}: exp with k=1 differs from spmv"));
        }
    }
    outcome(
        problems.is_empty(),
        format!("{} DAGs audited, 20 exp/spmv pairs, {} problems {:?}", dags.len(), problems.len(), problems),
    )
}

fn geometric_mean_check() -> Outcome {
    // Two independent nodes on two processors, no latency: serial costs
    // twice as much as parallel.
    let dag = ComputationalDag::new(vec![3, 3], vec![1, 1], &[]).unwrap();
    let serial = BspSchedule::from_assignment(&dag, vec![0, 0], vec![0, 0]).unwrap();
    let parallel = BspSchedule::from_assignment(&dag, vec![0, 1], vec![0, 0]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (base, ours) = (dir.path().join("base"), dir.path().join("ours"));
    std::fs::create_dir_all(&base).unwrap();
    std::fs::create_dir_all(&ours).unwrap();
    for (name, b, o) in [("a", &serial, &parallel), ("b", &parallel, &serial)] {
        std::fs::write(base.join(format!("{name}.sched")), write_schedule(b, 2)).unwrap();
        std::fs::write(ours.join(format!("{name}.sched")), write_schedule(o, 2)).unwrap();
    }
    let instances: Vec<Instance> = ["a", "b"]
        .iter()
        .map(|n| Instance {
            name: n.to_string(),
            dataset: "pair".into(),
            dag: dag.clone(),
        })
        .collect();
    let algorithms = [
        AlgoSpec::External { name: "base".into(), dir: base },
        AlgoSpec::External { name: "ours".into(), dir: ours },
    ];
    let machine = MachineSpec { p: 2, g: 1, l: 0, delta: None };
    let report = evaluate_suite(&instances, &[machine], &algorithms, "base", &PipelineConfig::ops(), None).unwrap();
    let mut ratios: Vec<f64> = report
        .rows
        .iter()
        .filter(|r| r.algorithm == "ours")
        .filter_map(|r| r.ratio)
        .collect();
    ratios.sort_by(f64::total_cmp);
    let gm = report.overall("ours").unwrap_or(f64::NAN);
    let group = report.groups.iter().find(|g| g.algorithm == "ours").map_or(f64::NAN, |g| g.geomean);
    let close = |x: f64| ((x - 1.0) / 1.0).abs() <= 1e-12;
    outcome(
        ratios == [0.5, 2.0] && close(gm) && close(group),
        format!("ratios {ratios:?}, overall {gm}, group {group}"),
    )
}

// ---------------------------------------------------------------------------

fn main() {
    let config = PipelineConfig::ops();
    let mut results: Vec<(usize, &str, Outcome, Duration)> = Vec::new();
    let mut run = |id: usize, title: &'static str, limit: Option<Duration>, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let mut o = f();
        let took = start.elapsed();
        if let Some(limit) = limit {
            if took > limit {
                o.pass = false;
                o.detail.push_str(&format!("; over the {limit:?} limit"));
            }
        }
        println!(
            "criterion {id:>2} {}: {title}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64()
        );
        results.push((id, title, o, took));
    };

    run(1, "cost-model oracle equivalence", Some(Duration::from_secs(120)), &mut cost_model_oracle);
    run(2, "ILP optimality on tiny instances", Some(Duration::from_secs(300)), &mut ilp_optimality);
    run(3, "NUMA matrix fidelity", None, &mut numa_fidelity);

    let cases = suite();
    let mut runs = None;
    run(4, "validity everywhere", None, &mut || {
        let r = validity_everywhere(&cases, &config);
        let o = outcome(r.validity.pass, r.validity.detail.clone());
        runs = Some(r.pipelines);
        o
    });
    let runs = runs.unwrap_or_default();
    run(5, "monotone improvement", None, &mut || monotone_improvement(&cases, &runs));
    run(6, "directional baseline comparison", Some(Duration::from_secs(1800)), &mut || {
        baseline_comparison(&cases, &config)
    });
    run(7, "multilevel specialist behavior", None, &mut || multilevel_specialist(&config));
    run(8, "coarsening invariants", None, &mut coarsening_invariants);
    run(9, "generator audit", None, &mut || generator_audit(&cases));
    run(10, "geometric mean", None, &mut geometric_mean_check);

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
