//! Acceptance gate: one line per criterion, then a single assertion.
//!
//! All comparisons are exact (rationals or integers); there is no numeric
//! tolerance anywhere. Runtime limits are wall-clock and apply to the
//! optimized test profile configured in the workspace manifest.

use std::time::{Duration, Instant};

use mmm_core::blowup::blow_up;
use mmm_core::fracmatch::build_full;
use mmm_core::gadget::{build_gadget, Flavor};
use mmm_core::graph::{random_graph, Graph};
use mmm_core::harness::io;
use mmm_core::harness::{run_experiment, ExperimentConfig, ExperimentTable, Grid, LemmaId, LemmaParams, Verdict};
use mmm_core::rational::{rat, Rational};
use mmm_core::solvers::{enumerate_maximal_matchings, exact_mmm, greedy_maximal_matching, SolverOptions};
use mmm_core::ulc::{generate_yes, Topology, YesParams};

const CRITERION_1_LIMIT: Duration = Duration::from_secs(60);
const CRITERION_4_LIMIT: Duration = Duration::from_secs(120);
const CRITERION_7_LIMIT: Duration = Duration::from_secs(600);
const SOUNDNESS_MAX_VERTICES: usize = 40;
const SOUNDNESS_MIN_POINTS: usize = 10;
const BIPARTISATION_MIN_MATCHINGS: usize = 1000;
const ORACLE_MIN_GRAPHS: usize = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn seeds(n: u64) -> Vec<u64> {
    (1..=n).collect()
}

fn yes_grid() -> Grid {
    Grid {
        num_vars: (3..=12).collect(),
        num_colors: (2..=6).collect(),
        epsilon: vec![rat(1, 4), rat(1, 8)],
        xi: vec![rat(0, 1), rat(1, 4)],
        seeds: seeds(5),
        ..Grid::default()
    }
}

fn sweep(lemma: LemmaId, params: LemmaParams, grid: Grid) -> ExperimentTable {
    run_experiment(&ExperimentConfig::new(vec![lemma], params, grid)).expect("grid points are valid")
}

/// Serialized form used by the determinism check.
fn fingerprint(table: &ExperimentTable) -> String {
    let mut text = table.to_csv();
    for report in &table.reports {
        text.push_str(&report.to_json());
    }
    text
}

fn count(table: &ExperimentTable, verdict: Verdict) -> usize {
    table.reports.iter().filter(|r| r.verdict == verdict).count()
}

fn first_failure(table: &ExperimentTable) -> String {
    table
        .reports
        .iter()
        .find(|r| r.verdict != Verdict::Pass)
        .map(|r| {
            let check = r.failed_checks().next().map(|c| c.name.clone()).unwrap_or_default();
            format!("; first non-pass: {:?} at {:?} [{check}] {:?}", r.verdict, r.params, r.notes)
        })
        .unwrap_or_default()
}

fn all_pass(table: &ExperimentTable, what: &str, elapsed: Duration, limit: Option<Duration>) -> Outcome {
    let passed = count(table, Verdict::Pass);
    let in_time = limit.is_none_or(|l| elapsed < l);
    let limit_text = limit.map(|l| format!(" (limit {} s)", l.as_secs())).unwrap_or_default();
    Outcome {
        pass: passed == table.reports.len() && !table.reports.is_empty() && in_time,
        detail: format!(
            "{passed}/{} {what}, {:.1} s{limit_text}{}",
            table.reports.len(),
            elapsed.as_secs_f64(),
            first_failure(table)
        ),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed())
}

fn criterion_1() -> (Outcome, String) {
    let (table, elapsed) = timed(|| sweep(LemmaId::FraMat, LemmaParams::default(), yes_grid()));
    let outcome = all_pass(
        &table,
        "grid points saturate exactly V \\ IS with IS at load 0",
        elapsed,
        Some(CRITERION_1_LIMIT),
    );
    (outcome, fingerprint(&table))
}

fn criterion_2() -> (Outcome, String) {
    let (table, elapsed) = timed(|| sweep(LemmaId::WeiYes, LemmaParams::default(), yes_grid()));
    let outcome = all_pass(
        &table,
        "grid points: w+(M) + w(IS) = 1, M maximal, w+(M) <= 1/2 + 2eps where xi <= eps/2",
        elapsed,
        None,
    );
    (outcome, fingerprint(&table))
}

fn criterion_3() -> (Outcome, String) {
    let (table, elapsed) = timed(|| sweep(LemmaId::Kr07Yes, LemmaParams::default(), yes_grid()));
    let outcome = all_pass(
        &table,
        "grid points: w(IS) = (|X0|/|X|)p, and >= 1/2 - 2eps when xi = 0",
        elapsed,
        None,
    );
    (outcome, fingerprint(&table))
}

fn criterion_4() -> (Outcome, String) {
    let grid = Grid {
        num_vars: vec![3, 4],
        num_colors: vec![2, 3],
        epsilon: vec![rat(1, 4), rat(1, 8)],
        xi: vec![rat(0, 1), rat(1, 4)],
        rho: vec![rat(1, 1), rat(1, 2), rat(1, 4)],
        seeds: seeds(5),
        ..Grid::default()
    };
    let (table, elapsed) = timed(|| sweep(LemmaId::CardCompleteness, LemmaParams::default(), grid));
    let outcome = all_pass(
        &table,
        "blowups: discretized matching maximal with 2|M| < |V^rho|(1/2 + 2eps + rho)",
        elapsed,
        Some(CRITERION_4_LIMIT),
    );
    (outcome, fingerprint(&table))
}

fn criterion_5() -> (Outcome, String) {
    let grid = Grid {
        num_vars: vec![3, 4],
        num_colors: vec![2, 3],
        epsilon: vec![rat(1, 4), rat(1, 8)],
        xi: vec![rat(0, 1), rat(1, 4)],
        rho: vec![rat(1, 1), rat(3, 2), rat(2, 1), rat(3, 1)],
        seeds: seeds(3),
        ..Grid::default()
    };
    let mut small = Vec::new();
    let mut skipped = 0;
    for (_, params) in ExperimentConfig::new(vec![LemmaId::CardSoundness], LemmaParams::default(), grid).points() {
        if soundness_blowup_size(&params).is_some_and(|n| n <= SOUNDNESS_MAX_VERTICES) {
            small.push(params);
        } else {
            skipped += 1;
        }
    }
    let mut tables = Vec::new();
    let start = Instant::now();
    for params in &small {
        let grid = Grid::default();
        let params = LemmaParams {
            soundness_cap: SOUNDNESS_MAX_VERTICES,
            ..params.clone()
        };
        tables.push(sweep(LemmaId::CardSoundness, params, grid));
    }
    let elapsed = start.elapsed();
    let reports: Vec<_> = tables.iter().flat_map(|t| t.reports.iter()).collect();
    let passed = reports.iter().filter(|r| r.verdict == Verdict::Pass).count();
    let exhaustive = reports
        .iter()
        .filter(|r| r.notes.iter().any(|n| n.starts_with("exhaustive")))
        .count();
    let failure = tables.iter().map(first_failure).find(|s| !s.is_empty()).unwrap_or_default();
    let outcome = Outcome {
        pass: passed == reports.len() && reports.len() >= SOUNDNESS_MIN_POINTS,
        detail: format!(
            "{passed}/{} blowups with <= {SOUNDNESS_MAX_VERTICES} vertices ({exhaustive} exhaustive, {skipped} larger points skipped): \
             minimal covers product, 2 MMM >= VC_min, w(C_w) - |C|/|V| < rho, {:.1} s{failure}",
            reports.len(),
            elapsed.as_secs_f64()
        ),
    };
    (outcome, tables.iter().map(fingerprint).collect())
}

/// `None` when `|V|/rho` is not an integer.
fn soundness_blowup_size(params: &LemmaParams) -> Option<usize> {
    let instance = generate_yes(&YesParams {
        num_vars: params.num_vars,
        num_colors: params.num_colors,
        xi: params.xi.clone(),
        topology: Topology::Cycle,
        seed: params.seed,
    })
    .expect("valid instance");
    let gadget = build_gadget(&instance, &params.epsilon, Flavor::Base).expect("valid gadget");
    blow_up(&gadget, &params.rho).ok().map(|b| b.num_vertices())
}

fn criterion_6() -> (Outcome, String) {
    let params = LemmaParams {
        samples: 32,
        ..LemmaParams::default()
    };
    let grid = Grid {
        size: vec![6, 8, 10, 12, 14, 16, 18, 20],
        seeds: seeds(5),
        ..Grid::default()
    };
    let (table, elapsed) = timed(|| sweep(LemmaId::BipCover, params.clone(), grid));
    let matchings = table.reports.len() * params.samples;
    let mut outcome = all_pass(
        &table,
        "random bipartisations: doubling exact and maximal, paths >= 2 arcs, |C| <= 3/2 |M|, MMM(H) >= 2/3 VC where solved",
        elapsed,
        None,
    );
    outcome.pass &= matchings >= BIPARTISATION_MIN_MATCHINGS;
    outcome.detail = format!("{matchings} sampled matchings; {}", outcome.detail);
    (outcome, fingerprint(&table))
}

fn criterion_7() -> (Outcome, String) {
    let start = Instant::now();
    let yes_grid = Grid {
        size: vec![4, 8],
        epsilon: vec![rat(1, 4)],
        seeds: seeds(5),
        ..Grid::default()
    };
    let yes = sweep(LemmaId::BipSsehYes, LemmaParams::default(), yes_grid.clone());
    let no = sweep(LemmaId::BipSsehNo, LemmaParams::default(), yes_grid);
    let elapsed = start.elapsed();
    let passed = count(&yes, Verdict::Pass) + count(&no, Verdict::Pass);
    let total = yes.reports.len() + no.reports.len();
    let outcome = Outcome {
        pass: passed == total && elapsed < CRITERION_7_LIMIT,
        detail: format!(
            "{passed}/{total} gadgets (n in {{4, 8}}): |M| = n(1 + 2eps), maximal; exact MMM >= bound from exact MBB, {:.1} s (limit {} s){}{}",
            elapsed.as_secs_f64(),
            CRITERION_7_LIMIT.as_secs(),
            first_failure(&yes),
            first_failure(&no)
        ),
    };
    (outcome, fingerprint(&yes) + &fingerprint(&no))
}

fn named_graphs() -> Vec<(&'static str, Graph, usize)> {
    let g = |n, edges: &[(usize, usize)]| Graph::from_edges(n, edges.iter().copied()).unwrap();
    vec![
        ("P3", g(3, &[(0, 1), (1, 2)]), 1),
        ("C4", g(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]), 2),
        ("K1,4", g(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]), 1),
    ]
}

fn criterion_8() -> (Outcome, String) {
    let options = SolverOptions::default();
    let mut checked = 0;
    let mut disagreements = Vec::new();
    let mut greedy_excess = 0;
    let mut log = String::new();
    for (name, graph, expected) in named_graphs() {
        let exact = exact_mmm(&graph, None, &options).unwrap();
        if exact.objective != Rational::from_integer(expected.into()) {
            disagreements.push(format!("{name}: {}", exact.objective));
        }
    }
    let densities = [(1, 4), (1, 2), (3, 4)];
    'outer: for seed in 0.. {
        for n in 1..=7 {
            for &(num, den) in &densities {
                if checked >= ORACLE_MIN_GRAPHS {
                    break 'outer;
                }
                let graph = random_graph(n, num, den, seed);
                let exact = exact_mmm(&graph, None, &options).unwrap();
                let all = enumerate_maximal_matchings(&graph, usize::MAX).unwrap();
                let least = all.iter().map(|m| m.len()).min().unwrap_or(0);
                if exact.objective != Rational::from_integer(least.into()) || !exact.is_optimal() {
                    disagreements.push(format!("n={n} p={num}/{den} seed={seed}"));
                }
                for s in 0..4 {
                    let greedy = greedy_maximal_matching(&graph, seed * 4 + s);
                    if Rational::from_integer(greedy.len().into()) > Rational::from_integer(2.into()) * &exact.objective
                    {
                        greedy_excess += 1;
                    }
                }
                log.push_str(&format!("{n} {seed} {}\n", exact.objective));
                checked += 1;
            }
        }
    }
    let outcome = Outcome {
        pass: disagreements.is_empty() && greedy_excess == 0 && checked >= ORACLE_MIN_GRAPHS,
        detail: format!(
            "{checked} random graphs (<= 7 vertices) plus P3 -> 1, C4 -> 2, K1,4 -> 1: {} disagreements, {greedy_excess} greedy runs above 2x exact{}",
            disagreements.len(),
            disagreements.first().map(|d| format!(", first: {d:?}")).unwrap_or_default()
        ),
    };
    (outcome, log)
}

fn criterion_9() -> (Outcome, String) {
    let grid = Grid {
        num_vars: vec![3, 4],
        num_colors: vec![2, 3],
        size: vec![5, 8, 10, 12],
        seeds: seeds(3),
        ..Grid::default()
    };
    let (table, elapsed) = timed(|| sweep(LemmaId::TotalVc, LemmaParams::default(), grid));
    let outcome = all_pass(
        &table,
        "points: discretized and greedy matched sets are total covers, TVC_min >= VC_min",
        elapsed,
        None,
    );
    (outcome, fingerprint(&table))
}

/// Setup A artifacts in every exported format.
fn artifacts() -> String {
    let instance = generate_yes(&YesParams {
        num_vars: 3,
        num_colors: 2,
        xi: rat(0, 1),
        topology: Topology::Cycle,
        seed: 1,
    })
    .unwrap();
    let planted = instance.planted().unwrap().clone();
    let gadget = build_gadget(&instance, &rat(1, 4), Flavor::Extended).unwrap();
    let blowup = blow_up(&gadget, &rat(1, 2)).unwrap();
    let fm = build_full(&gadget, &planted).unwrap();
    let cm = mmm_core::blowup::discretize_matching(&fm, &blowup, &planted).unwrap();
    [
        io::export_instance(&instance),
        io::export_gadget(&gadget),
        io::gadget_dot(&gadget),
        io::export_blowup(&blowup),
        io::blowup_dot(&blowup).unwrap(),
        io::export_fractional(&fm),
        io::export_matching(&cm.matching),
    ]
    .concat()
}

#[test]
fn acceptance() {
    type Criterion = fn() -> (Outcome, String);
    let criteria: [(usize, &str, Criterion); 9] = [
        (1, "fractional matching saturation", criterion_1),
        (2, "weighted YES bound", criterion_2),
        (3, "independent set weight", criterion_3),
        (4, "unweighted completeness", criterion_4),
        (5, "unweighted soundness surrogate", criterion_5),
        (6, "bipartisation suite", criterion_6),
        (7, "biclique gadget", criterion_7),
        (8, "solver oracle equivalence", criterion_8),
        (9, "total vertex cover", criterion_9),
    ];
    let mut all = true;
    let mut fingerprints = Vec::new();
    for (number, name, run) in criteria {
        let (outcome, print) = run();
        println!(
            "criterion {number:>2} [{}] {name}: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
        all &= outcome.pass;
        fingerprints.push(print);
    }

    let mut repeated = 0;
    let mut differing = Vec::new();
    for (i, (number, _, run)) in criteria.iter().enumerate() {
        let (_, print) = run();
        repeated += 1;
        if print != fingerprints[i] {
            differing.push(*number);
        }
    }
    let same_artifacts = artifacts() == artifacts();
    let deterministic = differing.is_empty() && same_artifacts;
    println!(
        "criterion 10 [{}] determinism: {repeated} criterion reruns, {} differing {:?}; Setup A artifacts identical: {same_artifacts}",
        if deterministic { "PASS" } else { "FAIL" },
        differing.len(),
        differing
    );
    all &= deterministic;
    assert!(all, "acceptance criteria failed");
}
