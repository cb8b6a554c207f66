//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::Instant;

use lcis::alphabet::compress;
use lcis::bitdp::{check_row_transitions, solve_dp, BlockTables, DpOptions, DpStats, Schedule};
use lcis::cli::{fit_queries, generate_instance, run_bench, write_csv, Algo, BenchConfig, Dist, SolverConfig};
use lcis::combined::{check_merge_tables, solve_combined_with, CombinedOptions, MergeTables};
use lcis::pairsolver::{query_budget, solve_pair_based_with, PairOptions, PairStats};
use lcis::reference::{naive_staircase, quadratic_length, solve_exhaustive, solve_quadratic, StairOp};
use lcis::staircase::Staircase;
use lcis::Variant;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(v: &Verdict) {
    println!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
}

fn oracle_chain() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a11);
    let (mut checked, mut bad) = (0, 0);
    for _ in 0..1000 {
        let alphabet = [1i64, 2, 3, 5][rng.random_range(0..4)];
        let na = rng.random_range(0..=10);
        let nb = rng.random_range(0..=10);
        let a: Vec<i64> = (0..na).map(|_| rng.random_range(1..=alphabet)).collect();
        let b: Vec<i64> = (0..nb).map(|_| rng.random_range(1..=alphabet)).collect();
        for v in Variant::ALL {
            let (q, _) = solve_quadratic(&a, &b, v).unwrap();
            let e = solve_exhaustive(&a, &b, v).unwrap();
            checked += 1;
            if q != e {
                bad += 1;
            }
        }
    }
    Verdict {
        name: "oracle chain",
        pass: bad == 0 && checked == 2000,
        detail: format!("{checked} quadratic/exhaustive comparisons, {bad} mismatches"),
    }
}

struct DiffTotals {
    instances: usize,
    runs: u64,
    mismatches: Vec<String>,
    dp: DpStats,
    pairs: PairStats,
    pair_runs: u64,
    budget_violations: u64,
    elapsed_s: f64,
}

fn differential() -> DiffTotals {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1ff);
    let mut t = DiffTotals {
        instances: 0,
        runs: 0,
        mismatches: Vec::new(),
        dp: DpStats::default(),
        pairs: PairStats::default(),
        pair_runs: 0,
        budget_violations: 0,
        elapsed_s: 0.0,
    };
    let checked_pairs = PairOptions { recheck_queries: true };
    for k in 0..5040usize {
        let n = rng.random_range(1..=300usize);
        let sq = (n as f64).sqrt().ceil() as usize;
        let alphabet = [2, 4, sq, n][k % 4];
        let dist = Dist::ALL[(k / 4) % 3];
        let seed = rng.random::<u64>();
        let inst = generate_instance(n, alphabet, dist, seed);
        let input = compress(&inst.a, &inst.b);
        t.instances += 1;
        for v in Variant::ALL {
            let want = quadratic_length(&inst.a, &inst.b, v);
            let mut check = |name: String, got: usize| {
                t.runs += 1;
                if got != want && t.mismatches.len() < 10 {
                    t.mismatches.push(format!("{name} {v} n={n} alphabet={alphabet} dist={} seed={seed}: {got} != {want}", dist.name()));
                }
            };
            for b in [Some(1), Some(2), Some(3), None] {
                let opts = DpOptions { block_bits: b, scalar: false, schedule: Schedule::Auto, check_invariants: true };
                let out = solve_dp(&input, v, &opts).unwrap();
                t.dp.add(&out.stats);
                check(format!("dp-tab B={b:?}"), out.length);
            }
            let out = solve_pair_based_with(&input, v, &checked_pairs);
            t.pair_runs += 1;
            if out.stats.max_pair_queries > query_budget(input.n()) {
                t.budget_violations += 1;
            }
            t.pairs.add(&out.stats);
            check("pairs".into(), out.length);
            for c in [Some(1), Some(2), None, Some(n)] {
                let opts = CombinedOptions { threshold_c: c, block_bits: None, check_invariants: true, pair: checked_pairs };
                let out = solve_combined_with(&input, v, &opts, |_, _| {}).unwrap();
                t.dp.add(&out.stats.dp);
                t.pairs.add(&out.stats.pairs);
                if out.stats.pairs.max_pair_queries > query_budget(input.n()) {
                    t.budget_violations += 1;
                }
                check(format!("combined c={c:?}"), out.length);
            }
        }
    }
    t.elapsed_s = start.elapsed().as_secs_f64();
    t
}

fn table_exhaustiveness() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for b in 1..=4u32 {
        for v in Variant::ALL {
            let tables = BlockTables::build(b, v).unwrap();
            let c = check_row_transitions(&tables);
            pass &= c.mismatches == 0;
            parts.push(format!("B={b} {v}: {} keys/{} bad", c.keys, c.mismatches));
        }
        let m = MergeTables::build(b).unwrap();
        let (keys, bad) = check_merge_tables(&m);
        pass &= bad == 0;
        parts.push(format!("B={b} row_max: {keys} keys/{bad} bad"));
    }
    Verdict {
        name: "block-table exhaustiveness",
        pass,
        detail: parts.join("; "),
    }
}

fn staircase_fuzz() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x57a1);
    let (mut bad_answers, mut invalid, mut answers) = (0u64, 0u64, 0u64);
    let (mut visits, mut weighted_ops) = (0u64, 0.0f64);
    for _ in 0..10_000 {
        let steps = rng.random_range(1..=12);
        let max_batch = [1usize, 4, 32, 128][rng.random_range(0..4)];
        let ops: Vec<StairOp> = (0..steps)
            .map(|_| {
                let len = rng.random_range(1..=max_batch);
                if rng.random_bool(0.5) {
                    StairOp::Insert((0..len).map(|_| (rng.random_range(0..=4096), rng.random_range(0..=4096))).collect())
                } else {
                    StairOp::Query((0..len).map(|_| rng.random_range(0..=4097)).collect())
                }
            })
            .collect();
        let want = naive_staircase(&ops);
        let mut s = Staircase::new();
        let mut got = Vec::new();
        for op in &ops {
            let before = s.visits();
            let size = (s.len() + 2) as f64;
            match op {
                StairOp::Insert(points) => {
                    s.insert_batch(points);
                    weighted_ops += points.len() as f64 * size.log2();
                }
                StairOp::Query(xs) => {
                    got.extend(s.query_min_y_batch(xs));
                    weighted_ops += xs.len() as f64 * size.log2();
                }
            }
            visits += s.visits() - before;
            if !s.is_valid() {
                invalid += 1;
            }
        }
        answers += want.len() as u64;
        if got != want {
            bad_answers += 1;
        }
    }
    Verdict {
        name: "staircase differential fuzz",
        pass: bad_answers == 0 && invalid == 0,
        detail: format!(
            "10000 traces, {answers} query answers, {bad_answers} traces with wrong answers, {invalid} invalid states; \
             {:.3} node visits per op per log2(size)",
            visits as f64 / weighted_ops.max(1.0)
        ),
    }
}

fn perf_smoke() -> (Verdict, Vec<String>) {
    let inst = generate_instance(100_000, 16, Dist::Uniform, 1);
    let input = compress(&inst.a, &inst.b);
    let fast = DpOptions { check_invariants: false, ..DpOptions::default() };
    let t0 = Instant::now();
    let auto = solve_dp(&input, Variant::Strict, &fast).unwrap();
    let t_auto = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let one = solve_dp(&input, Variant::Strict, &DpOptions { block_bits: Some(1), ..fast }).unwrap();
    let t_one = t1.elapsed().as_secs_f64();

    let cfg = BenchConfig {
        algos: vec![Algo::Baseline, Algo::DpTab, Algo::Pairs, Algo::Combined],
        sizes: vec![1000, 4000, 16000],
        dists: vec![Dist::Uniform],
        alphabets: vec![16],
        seed: 1,
        variant: Variant::Strict,
        solver: SolverConfig::default(),
    };
    let t2 = Instant::now();
    let bench = run_bench(&cfg);
    let t_bench = t2.elapsed().as_secs_f64();
    let (rows, csv_ok, fits) = match &bench {
        Ok(r) => {
            let mut buf = Vec::new();
            let ok = write_csv(&r.records, &mut buf).is_ok();
            let text = String::from_utf8(buf).unwrap_or_default();
            let fits = r
                .fits
                .iter()
                .map(|f| format!("{} n={}: K={:.4} over {} phases", f.algo, f.n, f.constant, f.phases))
                .collect();
            (text.lines().count().saturating_sub(1), ok && r.records.len() == 12, fits)
        }
        Err(_) => (0, false, Vec::new()),
    };
    let pass = auto.length == one.length && csv_ok && t_bench < 600.0;
    (
        Verdict {
            name: "performance smoke",
            pass,
            detail: format!(
                "n=1e5: auto B={} -> {} in {t_auto:.1}s, B=1 -> {} in {t_one:.1}s; bench grid {rows}/12 CSV rows in {t_bench:.1}s{}",
                auto.block_bits,
                auto.length,
                one.length,
                bench.as_ref().err().map_or(String::new(), |e| format!(" ({e})"))
            ),
        },
        fits,
    )
}

fn main() {
    let mut verdicts = Vec::new();
    let mut run = |v: Verdict| {
        report(&v);
        verdicts.push(v.pass);
    };
    run(oracle_chain());

    let d = differential();
    let per_solver = d.runs / (2 * d.instances as u64).max(1);
    run(Verdict {
        name: "differential suite",
        pass: d.mismatches.is_empty() && d.instances >= 5000 && d.elapsed_s < 300.0,
        detail: format!(
            "{} instances x 2 variants x {per_solver} solver configs = {} runs, {} mismatches, {:.1}s{}",
            d.instances,
            d.runs,
            d.mismatches.len(),
            d.elapsed_s,
            d.mismatches.iter().map(|m| format!("\n    {m}")).collect::<String>()
        ),
    });

    run(table_exhaustiveness());
    run(staircase_fuzz());

    let (smoke, fits) = perf_smoke();
    let (k, phases) = fit_queries(&d.pairs.phases, 300);
    run(Verdict {
        name: "query budget",
        pass: d.budget_violations == 0 && d.pairs.recheck_mismatches == 0 && d.pair_runs > 0,
        detail: format!(
            "{} pairs, max {} node queries per pair (budget at n=300: {}), {} budget violations, {} level queries rechecked; \
             fit K={k:.4} over {phases} fuzz phases; bench fits: {}",
            d.pairs.pairs,
            d.pairs.max_pair_queries,
            query_budget(300),
            d.budget_violations,
            d.pairs.rechecked,
            if fits.is_empty() { "none".into() } else { fits.join(", ") }
        ),
    });
    run(Verdict {
        name: "row and phase step invariants",
        pass: d.dp.checked_rows > 0 && d.dp.row_step_violations == 0 && d.dp.phase_step_violations == 0,
        detail: format!(
            "{} row pairs checked, {} difference-bit violations, {} phase-increment violations",
            d.dp.checked_rows, d.dp.row_step_violations, d.dp.phase_step_violations
        ),
    });
    run(smoke);

    let failed = verdicts.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", verdicts.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
