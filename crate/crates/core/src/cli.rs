//! Command-line front end: instance text format, seeded generators, solver dispatch and the
//! `solve`, `verify` and `bench` commands.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Zipf};
use serde::Serialize;

use crate::alphabet::{compress, RankedInput};
use crate::bitdp::{solve_dp, DpOptions};
use crate::combined::{solve_combined_with, CombinedOptions};
use crate::pairsolver::{query_budget, solve_pair_based_with, PairOptions};
use crate::reference::{check_witness, quadratic_length, solve_quadratic, Witness};
use crate::{Error, Result, Variant};

/// Two integer sequences plus free-form `key=value` metadata.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Instance {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub meta: BTreeMap<String, String>,
}

impl Instance {
    pub fn new(a: Vec<i64>, b: Vec<i64>) -> Self {
        Instance {
            a,
            b,
            meta: BTreeMap::new(),
        }
    }

    /// Line 1 holds `A`, line 2 holds `B`, then one `# key=value` line per metadata entry.
    pub fn to_text(&self) -> String {
        let join = |s: &[i64]| s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        let mut out = format!("{}\n{}\n", join(&self.a), join(&self.b));
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out
    }
}

/// Parses the two-line text format; later lines must be empty or start with `#`.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines: Vec<&str> = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    if text.ends_with('\n') {
        lines.pop();
    }
    if lines.len() < 2 {
        return Err(Error::Parse {
            line: lines.len() + 1,
            token: 0,
            message: "expected two lines, one sequence each".into(),
        });
    }
    let seq = |idx: usize| -> Result<Vec<i64>> {
        lines[idx]
            .split_whitespace()
            .enumerate()
            .map(|(t, tok)| {
                tok.parse::<i64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    token: t + 1,
                    message: format!("{tok:?} is not an integer ({e})"),
                })
            })
            .collect()
    };
    let mut inst = Instance::new(seq(0)?, seq(1)?);
    for (idx, line) in lines.iter().enumerate().skip(2) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some(comment) = line.strip_prefix('#') else {
            return Err(Error::Parse {
                line: idx + 1,
                token: 1,
                message: "lines after the two sequences must start with '#'".into(),
            });
        };
        if let Some((k, v)) = comment.trim().split_once('=') {
            let k = k.trim();
            if !k.is_empty() && !k.contains(char::is_whitespace) {
                inst.meta.insert(k.to_string(), v.trim().to_string());
            }
        }
    }
    Ok(inst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dist {
    Uniform,
    Zipf,
    FewHeavy,
}

impl Dist {
    pub const ALL: [Dist; 3] = [Dist::Uniform, Dist::Zipf, Dist::FewHeavy];

    pub fn name(self) -> &'static str {
        match self {
            Dist::Uniform => "uniform",
            Dist::Zipf => "zipf",
            Dist::FewHeavy => "few-heavy",
        }
    }
}

/// Shape parameters of the generators.
#[derive(Clone, Copy, Debug)]
pub struct GenParams {
    /// Zipf exponent.
    pub zipf_s: f64,
    /// Share of draws going to the `⌈√alphabet⌉` heavy symbols.
    pub heavy_fraction: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            zipf_s: 1.0,
            heavy_fraction: 0.8,
        }
    }
}

/// Both sequences of length `n` over values `1..=alphabet`, deterministic in all arguments.
pub fn generate_instance(n: usize, alphabet: usize, dist: Dist, seed: u64) -> Instance {
    generate_instance_with(n, alphabet, dist, seed, &GenParams::default())
}

pub fn generate_instance_with(n: usize, alphabet: usize, dist: Dist, seed: u64, params: &GenParams) -> Instance {
    assert!(alphabet >= 1, "alphabet must be non-empty");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let heavy: Vec<i64> = {
        let k = (alphabet as f64).sqrt().ceil() as usize;
        let mut h: Vec<i64> = sample(&mut rng, alphabet, k.min(alphabet)).into_iter().map(|i| i as i64 + 1).collect();
        h.sort_unstable();
        h
    };
    let zipf = Zipf::new(alphabet as f64, params.zipf_s).expect("valid zipf parameters");
    let draw = |rng: &mut ChaCha8Rng| -> i64 {
        match dist {
            Dist::Uniform => rng.random_range(1..=alphabet as i64),
            Dist::Zipf => (zipf.sample(rng) as i64).clamp(1, alphabet as i64),
            Dist::FewHeavy => {
                if rng.random_bool(params.heavy_fraction) {
                    heavy[rng.random_range(0..heavy.len())]
                } else {
                    rng.random_range(1..=alphabet as i64)
                }
            }
        }
    };
    let a: Vec<i64> = (0..n).map(|_| draw(&mut rng)).collect();
    let b: Vec<i64> = (0..n).map(|_| draw(&mut rng)).collect();
    let mut inst = Instance::new(a, b);
    for (k, v) in [
        ("generator", dist.name().to_string()),
        ("n", n.to_string()),
        ("alphabet", alphabet.to_string()),
        ("seed", seed.to_string()),
    ] {
        inst.meta.insert(k.into(), v);
    }
    inst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Baseline,
    DpTab,
    Pairs,
    Combined,
    Auto,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Baseline => "baseline",
            Algo::DpTab => "dp-tab",
            Algo::Pairs => "pairs",
            Algo::Combined => "combined",
            Algo::Auto => "auto",
        }
    }
}

/// `auto`: the quadratic baseline up to a million cells, the hybrid solver above.
pub fn resolve_auto(n_a: usize, n_b: usize) -> Algo {
    if n_a as u64 * n_b as u64 <= 1_000_000 {
        Algo::Baseline
    } else {
        Algo::Combined
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Lcis,
    Lcwis,
}

impl From<Mode> for Variant {
    fn from(m: Mode) -> Variant {
        match m {
            Mode::Lcis => Variant::Strict,
            Mode::Lcwis => Variant::Weak,
        }
    }
}

/// Solver knobs shared by all commands.
#[derive(Clone, Copy, Debug, Default)]
pub struct SolverConfig {
    pub block_bits: Option<u32>,
    pub threshold_c: Option<usize>,
    /// Enable invariant counting and level-query rechecks.
    pub checks: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub pairs: u64,
    pub queries: u64,
    pub blocks: u64,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub algo: Algo,
    pub answer: usize,
    pub wall_ns: u64,
    pub counters: Counters,
    pub witness: Option<Witness>,
    /// Per value `(cnt(v), pairs, node queries)` for the pair-based solvers.
    pub phases: Vec<(u32, u64, u64)>,
    /// Invariant violations and recheck mismatches seen with checks enabled.
    pub check_failures: u64,
}

/// Runs one solver on `inst`; `witness` applies to the baseline only.
pub fn run_algo(algo: Algo, inst: &Instance, variant: Variant, cfg: &SolverConfig, witness: bool) -> Result<SolveReport> {
    let algo = match algo {
        Algo::Auto => resolve_auto(inst.a.len(), inst.b.len()),
        a => a,
    };
    if witness && algo != Algo::Baseline {
        return Err(Error::Invalid("a witness is only produced by --algo baseline".into()));
    }
    let start = Instant::now();
    let input: Option<RankedInput> = (algo != Algo::Baseline).then(|| compress(&inst.a, &inst.b));
    let mut report = SolveReport {
        algo,
        answer: 0,
        wall_ns: 0,
        counters: Counters::default(),
        witness: None,
        phases: Vec::new(),
        check_failures: 0,
    };
    match algo {
        Algo::Baseline if witness => {
            let (len, w) = solve_quadratic(&inst.a, &inst.b, variant)?;
            report.answer = len;
            report.witness = Some(w);
        }
        Algo::Baseline => report.answer = quadratic_length(&inst.a, &inst.b, variant),
        Algo::DpTab => {
            let opts = DpOptions {
                block_bits: cfg.block_bits,
                check_invariants: cfg.checks,
                ..DpOptions::default()
            };
            let out = solve_dp(input.as_ref().unwrap(), variant, &opts)?;
            report.answer = out.length;
            report.counters.blocks = out.stats.blocks;
            report.check_failures = out.stats.row_step_violations + out.stats.phase_step_violations;
        }
        Algo::Pairs => {
            let out = solve_pair_based_with(input.as_ref().unwrap(), variant, &PairOptions { recheck_queries: cfg.checks });
            report.answer = out.length;
            report.counters.pairs = out.stats.pairs;
            report.counters.queries = out.stats.node_queries;
            report.phases = out.stats.phases;
            report.check_failures = out.stats.recheck_mismatches;
        }
        Algo::Combined => {
            let opts = CombinedOptions {
                threshold_c: cfg.threshold_c,
                block_bits: cfg.block_bits,
                check_invariants: cfg.checks,
                pair: PairOptions { recheck_queries: cfg.checks },
            };
            let out = solve_combined_with(input.as_ref().unwrap(), variant, &opts, |_, _| {})?;
            report.answer = out.length;
            report.counters.pairs = out.stats.pairs.pairs;
            report.counters.queries = out.stats.pairs.node_queries;
            report.counters.blocks = out.stats.dp.blocks;
            report.phases = out.stats.pairs.phases;
            report.check_failures =
                out.stats.dp.row_step_violations + out.stats.dp.phase_step_violations + out.stats.pairs.recheck_mismatches;
        }
        Algo::Auto => unreachable!(),
    }
    report.wall_ns = start.elapsed().as_nanos() as u64;
    Ok(report)
}

/// Parses `16000`, `16k` or `2m`.
pub fn parse_size(s: &str) -> Result<usize> {
    let t = s.trim().to_ascii_lowercase();
    let (digits, mult) = match t.strip_suffix('k') {
        Some(d) => (d, 1_000),
        None => match t.strip_suffix('m') {
            Some(d) => (d, 1_000_000),
            None => (t.as_str(), 1),
        },
    };
    digits
        .parse::<usize>()
        .ok()
        .and_then(|v| v.checked_mul(mult))
        .ok_or_else(|| Error::Invalid(format!("bad size {s:?}")))
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| f(p.trim())).collect()
}

fn parse_enum<T: ValueEnum>(s: &str) -> Result<T> {
    T::from_str(s, true).map_err(|_| Error::Invalid(format!("unknown value {s:?}")))
}

#[derive(Parser, Debug)]
#[command(name = "lcis", version, about = "Longest common (weakly) increasing subsequence solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one instance read from FILE or stdin.
    Solve(SolveArgs),
    /// Cross-check all solvers on generated instances.
    Verify(VerifyArgs),
    /// Time solvers over a grid of generated instances.
    Bench(BenchArgs),
}

#[derive(clap::Args, Debug)]
struct SolveArgs {
    #[arg(long, value_enum, default_value = "auto")]
    algo: Algo,
    #[arg(long, value_enum, default_value = "lcis")]
    mode: Mode,
    /// Print an optimal subsequence as `x:y` index pairs (baseline only).
    #[arg(long)]
    witness: bool,
    #[arg(long)]
    block_bits: Option<u32>,
    #[arg(long)]
    threshold_c: Option<usize>,
    /// Instance file, `-` for stdin.
    #[arg(default_value = "-")]
    file: String,
}

#[derive(clap::Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    cases: usize,
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Alphabet size; cycles through 2, 4, ⌈√n⌉ and n when omitted.
    #[arg(long)]
    alphabet: Option<usize>,
    /// Distribution; cycles through all when omitted.
    #[arg(long, value_enum)]
    dist: Option<Dist>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Only this variant; both when omitted.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Directory receiving the shrunk failing instance.
    #[arg(long, default_value = ".")]
    dump_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(clap::Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value = "baseline,dp-tab,pairs,combined")]
    algos: String,
    #[arg(long, default_value = "1k,4k,16k")]
    sizes: String,
    #[arg(long, default_value = "uniform")]
    dists: String,
    /// Alphabet sizes.
    #[arg(long, default_value = "16")]
    alphabets: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "lcis")]
    mode: Mode,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    block_bits: Option<u32>,
    #[arg(long)]
    threshold_c: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Verify(a) => cmd_verify(a, out, err),
        Command::Bench(a) => cmd_bench(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn cmd_solve(a: SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let text = if a.file == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(&a.file)?
    };
    let inst = parse_instance(&text)?;
    let cfg = SolverConfig {
        block_bits: a.block_bits,
        threshold_c: a.threshold_c,
        checks: false,
    };
    let algo = if a.witness && a.algo == Algo::Auto { Algo::Baseline } else { a.algo };
    let report = run_algo(algo, &inst, a.mode.into(), &cfg, a.witness)?;
    writeln!(out, "{}", report.answer)?;
    if let Some(w) = report.witness {
        let pairs: Vec<String> = w.0.iter().map(|(x, y)| format!("{x}:{y}")).collect();
        writeln!(out, "{}", pairs.join(" "))?;
    }
    Ok(0)
}

/// Settings of a verification run.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub cases: usize,
    pub n: usize,
    pub alphabet: Option<usize>,
    pub dist: Option<Dist>,
    pub seed: u64,
    pub variants: Vec<Variant>,
    pub dump_dir: PathBuf,
}

/// A named solver under verification.
pub type NamedSolver = (String, Box<dyn Fn(&Instance, Variant) -> Result<usize>>);

/// The reference first, then every fast solver configuration, all with checks enabled.
pub fn default_solvers() -> Vec<NamedSolver> {
    let mut out: Vec<NamedSolver> = vec![(
        "baseline".into(),
        Box::new(|i: &Instance, v| {
            let len = quadratic_length(&i.a, &i.b, v);
            if i.a.len() * i.b.len() <= 250_000 {
                let (wl, w) = solve_quadratic(&i.a, &i.b, v)?;
                if wl != len || !check_witness(&i.a, &i.b, v, &w, len) {
                    return Err(Error::Invalid("baseline witness is invalid".into()));
                }
            }
            Ok(len)
        }),
    )];
    let checked = |r: SolveReport| -> Result<usize> {
        if r.check_failures > 0 {
            return Err(Error::Invalid(format!("{} invariant check failures", r.check_failures)));
        }
        Ok(r.answer)
    };
    for b in [Some(1), Some(2), Some(3), None] {
        let name = format!("dp-tab B={}", b.map_or("auto".into(), |b: u32| b.to_string()));
        out.push((
            name,
            Box::new(move |i: &Instance, v| {
                let cfg = SolverConfig { block_bits: b, threshold_c: None, checks: true };
                checked(run_algo(Algo::DpTab, i, v, &cfg, false)?)
            }),
        ));
    }
    out.push((
        "pairs".into(),
        Box::new(move |i: &Instance, v| {
            let cfg = SolverConfig { checks: true, ..SolverConfig::default() };
            let r = run_algo(Algo::Pairs, i, v, &cfg, false)?;
            checked(r)
        }),
    ));
    for c in ["1", "2", "auto", "n"] {
        out.push((
            format!("combined c={c}"),
            Box::new(move |i: &Instance, v| {
                let threshold_c = match c {
                    "auto" => None,
                    "n" => Some(i.a.len().max(i.b.len()).max(1)),
                    s => Some(s.parse().unwrap()),
                };
                let cfg = SolverConfig { block_bits: None, threshold_c, checks: true };
                checked(run_algo(Algo::Combined, i, v, &cfg, false)?)
            }),
        ));
    }
    out
}

/// A disagreement, after shrinking.
#[derive(Clone, Debug)]
pub struct Mismatch {
    pub case_seed: u64,
    pub solver: String,
    pub variant: Variant,
    pub expected: String,
    pub got: String,
    pub instance: Instance,
    pub dump: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub cases: usize,
    pub runs: u64,
    pub mismatch: Option<Mismatch>,
}

fn outcome_string(r: &Result<usize>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => format!("error: {e}"),
    }
}

/// First solver disagreeing with the reference (`solvers[0]`), if any.
fn disagreement(solvers: &[NamedSolver], inst: &Instance, v: Variant) -> Option<(usize, String, String)> {
    let want = (solvers[0].1)(inst, v);
    for (k, (_, f)) in solvers.iter().enumerate().skip(1) {
        let got = f(inst, v);
        let same = matches!((&want, &got), (Ok(a), Ok(b)) if a == b);
        if !same {
            return Some((k, outcome_string(&want), outcome_string(&got)));
        }
    }
    if want.is_err() {
        return Some((0, "a length".into(), outcome_string(&want)));
    }
    None
}

/// Case `k` of a run: its seed, alphabet and distribution.
pub fn verify_case(cfg: &VerifyConfig, k: usize) -> (u64, usize, Dist) {
    let n = cfg.n.max(1);
    let alphabet = cfg.alphabet.unwrap_or_else(|| {
        let sq = (n as f64).sqrt().ceil() as usize;
        [2, 4, sq, n][k % 4]
    });
    let dist = cfg.dist.unwrap_or(Dist::ALL[(k / 4) % 3]);
    (cfg.seed.wrapping_add(k as u64), alphabet.max(1), dist)
}

/// Runs `solvers` on the configured cases and stops at the first mismatch, which is shrunk
/// and written to `dump_dir`.
pub fn verify_with(cfg: &VerifyConfig, solvers: &[NamedSolver]) -> Result<VerifyOutcome> {
    let mut runs = 0;
    for k in 0..cfg.cases {
        let (seed, alphabet, dist) = verify_case(cfg, k);
        let inst = generate_instance(cfg.n, alphabet, dist, seed);
        for &v in &cfg.variants {
            runs += solvers.len() as u64;
            if let Some((idx, _, _)) = disagreement(solvers, &inst, v) {
                let shrunk = shrink(&inst, |cand| disagreement(solvers, cand, v).is_some_and(|d| d.0 == idx));
                let (_, expected, got) = disagreement(solvers, &shrunk, v).unwrap();
                let mut dumped = shrunk.clone();
                dumped.meta.insert("solver".into(), solvers[idx].0.clone());
                dumped.meta.insert("mode".into(), v.name().into());
                dumped.meta.insert("expected".into(), expected.clone());
                dumped.meta.insert("got".into(), got.clone());
                dumped.meta.insert("case_seed".into(), seed.to_string());
                std::fs::create_dir_all(&cfg.dump_dir)?;
                let path = cfg.dump_dir.join(format!("lcis-mismatch-seed{seed}.txt"));
                std::fs::write(&path, dumped.to_text())?;
                return Ok(VerifyOutcome {
                    cases: k + 1,
                    runs,
                    mismatch: Some(Mismatch {
                        case_seed: seed,
                        solver: solvers[idx].0.clone(),
                        variant: v,
                        expected,
                        got,
                        instance: dumped,
                        dump: Some(path),
                    }),
                });
            }
        }
    }
    Ok(VerifyOutcome {
        cases: cfg.cases,
        runs,
        mismatch: None,
    })
}

/// Greedily removes chunks of either sequence, then merges values, while `fails` holds.
pub fn shrink(inst: &Instance, fails: impl Fn(&Instance) -> bool) -> Instance {
    let mut cur = Instance::new(inst.a.clone(), inst.b.clone());
    loop {
        let mut progress = false;
        for side in 0..2 {
            let mut chunk = cur_len(&cur, side).div_ceil(2).max(1);
            loop {
                let mut start = 0;
                while start < cur_len(&cur, side) {
                    let mut cand = cur.clone();
                    let seq = if side == 0 { &mut cand.a } else { &mut cand.b };
                    let end = (start + chunk).min(seq.len());
                    seq.drain(start..end);
                    if fails(&cand) {
                        cur = cand;
                        progress = true;
                    } else {
                        start += chunk;
                    }
                }
                if chunk == 1 {
                    break;
                }
                chunk = chunk.div_ceil(2);
            }
        }
        // merge the largest value into the next smaller one
        let mut values: Vec<i64> = cur.a.iter().chain(&cur.b).copied().collect();
        values.sort_unstable();
        values.dedup();
        for w in values.windows(2).rev() {
            let (lo, hi) = (w[0], w[1]);
            let map = |s: &[i64]| s.iter().map(|&x| if x == hi { lo } else { x }).collect::<Vec<_>>();
            let cand = Instance::new(map(&cur.a), map(&cur.b));
            if fails(&cand) {
                cur = cand;
                progress = true;
                break;
            }
        }
        if !progress {
            return cur;
        }
    }
}

fn cur_len(inst: &Instance, side: usize) -> usize {
    if side == 0 {
        inst.a.len()
    } else {
        inst.b.len()
    }
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = VerifyConfig {
        cases: a.cases,
        n: a.n,
        alphabet: a.alphabet,
        dist: a.dist,
        seed: a.seed,
        variants: match a.mode {
            Some(m) => vec![m.into()],
            None => Variant::ALL.to_vec(),
        },
        dump_dir: a.dump_dir,
    };
    let outcome = verify_with(&cfg, &default_solvers())?;
    match outcome.mismatch {
        None => {
            writeln!(out, "ok: {} cases, {} solver runs, all solvers agree", outcome.cases, outcome.runs)?;
            Ok(0)
        }
        Some(m) => {
            let (_, alphabet, dist) = verify_case(&cfg, outcome.cases - 1);
            writeln!(
                err,
                "mismatch: {} ({}) gave {}, baseline {}; shrunk to nA={} nB={}",
                m.solver,
                m.variant,
                m.got,
                m.expected,
                m.instance.a.len(),
                m.instance.b.len()
            )?;
            writeln!(
                err,
                "reproduce: lcis verify --cases 1 --n {} --alphabet {alphabet} --dist {} --seed {} --mode {}",
                cfg.n,
                dist.name(),
                m.case_seed,
                m.variant.name()
            )?;
            if let Some(p) = &m.dump {
                writeln!(err, "instance written to {}", p.display())?;
            }
            Ok(1)
        }
    }
}

/// One row of the benchmark report.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct BenchRecord {
    pub algo: String,
    pub variant: String,
    pub n_a: usize,
    pub n_b: usize,
    pub alphabet: usize,
    pub dist: String,
    pub seed: u64,
    pub answer: usize,
    pub wall_ns: u64,
    pub counter_pairs: u64,
    pub counter_queries: u64,
    pub counter_blocks: u64,
}

/// Least-squares constant `K` in `queries(v) ≈ K · cnt(v)² (1 + log₂(n / cnt(v)))` over the
/// phases of one pair-based run.
#[derive(Clone, Debug, Serialize)]
pub struct QueryFit {
    pub algo: String,
    pub n: usize,
    pub alphabet: usize,
    pub dist: String,
    pub phases: usize,
    pub constant: f64,
    pub max_pair_budget: u32,
}

pub fn fit_queries(phases: &[(u32, u64, u64)], n: usize) -> (f64, usize) {
    let (mut num, mut den) = (0.0, 0.0);
    for &(cnt, _, q) in phases {
        let c = cnt.max(1) as f64;
        let f = c * c * (1.0 + (n as f64 / c).max(1.0).log2());
        num += q as f64 * f;
        den += f * f;
    }
    (if den > 0.0 { num / den } else { 0.0 }, phases.len())
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub algos: Vec<Algo>,
    pub sizes: Vec<usize>,
    pub dists: Vec<Dist>,
    pub alphabets: Vec<usize>,
    pub seed: u64,
    pub variant: Variant,
    pub solver: SolverConfig,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    pub fits: Vec<QueryFit>,
}

/// Runs every algorithm on every generated instance; fails if answers within an instance differ.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    let mut report = BenchReport {
        records: Vec::new(),
        fits: Vec::new(),
    };
    for &n in &cfg.sizes {
        for &dist in &cfg.dists {
            for &alphabet in &cfg.alphabets {
                let inst = generate_instance(n, alphabet, dist, cfg.seed);
                let mut answers = Vec::new();
                for &algo in &cfg.algos {
                    let r = run_algo(algo, &inst, cfg.variant, &cfg.solver, false)?;
                    answers.push(r.answer);
                    if !r.phases.is_empty() {
                        let (constant, phases) = fit_queries(&r.phases, n);
                        report.fits.push(QueryFit {
                            algo: algo.name().into(),
                            n,
                            alphabet,
                            dist: dist.name().into(),
                            phases,
                            constant,
                            max_pair_budget: query_budget(n),
                        });
                    }
                    report.records.push(BenchRecord {
                        algo: algo.name().into(),
                        variant: cfg.variant.name().into(),
                        n_a: inst.a.len(),
                        n_b: inst.b.len(),
                        alphabet,
                        dist: dist.name().into(),
                        seed: cfg.seed,
                        answer: r.answer,
                        wall_ns: r.wall_ns,
                        counter_pairs: r.counters.pairs,
                        counter_queries: r.counters.queries,
                        counter_blocks: r.counters.blocks,
                    });
                }
                if answers.windows(2).any(|w| w[0] != w[1]) {
                    return Err(Error::Invalid(format!(
                        "solvers disagree on n={n} alphabet={alphabet} dist={}: {answers:?}",
                        dist.name()
                    )));
                }
            }
        }
    }
    Ok(report)
}

/// CSV with the fixed column set.
pub fn write_csv(records: &[BenchRecord], w: &mut dyn Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    if records.is_empty() {
        wr.write_record([
            "algo",
            "variant",
            "n_a",
            "n_b",
            "alphabet",
            "dist",
            "seed",
            "answer",
            "wall_ns",
            "counter_pairs",
            "counter_queries",
            "counter_blocks",
        ])?;
    }
    wr.flush()?;
    Ok(())
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = BenchConfig {
        algos: parse_list(&a.algos, parse_enum::<Algo>)?,
        sizes: parse_list(&a.sizes, parse_size)?,
        dists: parse_list(&a.dists, parse_enum::<Dist>)?,
        alphabets: parse_list(&a.alphabets, parse_size)?,
        seed: a.seed,
        variant: a.mode.into(),
        solver: SolverConfig {
            block_bits: a.block_bits,
            threshold_c: a.threshold_c,
            checks: false,
        },
    };
    if cfg.alphabets.contains(&0) {
        return Err(Error::Invalid("alphabet sizes must be positive".into()));
    }
    let report = run_bench(&cfg)?;
    let mut sink: Box<dyn Write + '_> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(&mut *out),
    };
    match a.format {
        Format::Csv => {
            write_csv(&report.records, &mut sink)?;
            for f in &report.fits {
                writeln!(
                    err,
                    "# query fit: algo={} n={} alphabet={} dist={} phases={} constant={:.4} per-pair budget={}",
                    f.algo, f.n, f.alphabet, f.dist, f.phases, f.constant, f.max_pair_budget
                )?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &report)?;
            writeln!(sink)?;
        }
    }
    Ok(0)
}

/// Reads and parses an instance file.
pub fn read_instance(path: &Path) -> Result<Instance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("lcis").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn parse_examples() {
        let i = parse_instance("1 2 3\n3 2 1\n").unwrap();
        assert_eq!((i.a, i.b), (vec![1, 2, 3], vec![3, 2, 1]));
        let i = parse_instance("\n\n").unwrap();
        assert!(i.a.is_empty() && i.b.is_empty());
        match parse_instance("1 x\n2\n") {
            Err(Error::Parse { line: 1, token: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_instance("1 2 3\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_instance("1\n2\n3\n"), Err(Error::Parse { line: 3, .. })));
        let i = parse_instance("-5 7  \r\n 8\n# seed=4\n\n").unwrap();
        assert_eq!((i.a, i.b), (vec![-5, 7], vec![8]));
        assert_eq!(i.meta.get("seed").map(String::as_str), Some("4"));
    }

    #[test]
    fn text_round_trip() {
        for dist in Dist::ALL {
            let inst = generate_instance(40, 7, dist, 3);
            assert_eq!(parse_instance(&inst.to_text()).unwrap(), inst);
        }
        let inst = Instance::new(vec![i64::MIN, 0, i64::MAX], vec![]);
        assert_eq!(parse_instance(&inst.to_text()).unwrap(), inst);
    }

    #[test]
    fn generator_contract() {
        let e = generate_instance(0, 5, Dist::Zipf, 1);
        assert!(e.a.is_empty() && e.b.is_empty());
        for dist in Dist::ALL {
            assert_eq!(generate_instance(100, 9, dist, 5), generate_instance(100, 9, dist, 5));
            assert_ne!(generate_instance(100, 9, dist, 5).a, generate_instance(100, 9, dist, 6).a);
            let i = generate_instance(100, 9, dist, 5);
            assert!(i.a.iter().chain(&i.b).all(|&v| (1..=9).contains(&v)));
            let one = generate_instance(30, 1, dist, 2);
            assert_eq!(quadratic_length(&one.a, &one.b, Variant::Strict), 1);
            assert_eq!(quadratic_length(&one.a, &one.b, Variant::Weak), 30);
        }
        // heavy symbols take most of the mass
        let i = generate_instance(5000, 100, Dist::FewHeavy, 9);
        let mut counts = vec![0usize; 101];
        i.a.iter().for_each(|&v| counts[v as usize] += 1);
        counts.sort_unstable_by(|x, y| y.cmp(x));
        assert!(counts[..10].iter().sum::<usize>() > 3500);
    }

    #[test]
    fn sizes() {
        assert_eq!(parse_size("1k").unwrap(), 1000);
        assert_eq!(parse_size("16K").unwrap(), 16000);
        assert_eq!(parse_size("250").unwrap(), 250);
        assert_eq!(parse_size("2m").unwrap(), 2_000_000);
        assert!(parse_size("k").is_err());
    }

    #[test]
    fn solve_command() {
        let dir = std::env::temp_dir().join(format!("lcis-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("inst.txt");
        std::fs::write(&file, "1 2 3\n1 2 3\n").unwrap();
        let f = file.to_str().unwrap();
        for algo in ["baseline", "dp-tab", "pairs", "combined", "auto"] {
            assert_eq!(run_cli(&["solve", "--algo", algo, f]), (0, "3\n".into(), String::new()));
        }
        let (code, out, _) = run_cli(&["solve", "--algo", "baseline", "--witness", f]);
        assert_eq!((code, out.as_str()), (0, "3\n1:1 2:2 3:3\n"));
        let (code, _, err) = run_cli(&["solve", "--algo", "pairs", "--witness", f]);
        assert_eq!(code, 1);
        assert!(err.contains("baseline"));
        std::fs::write(&file, "1 1\n1 1\n").unwrap();
        assert_eq!(run_cli(&["solve", "--mode", "lcwis", f]).1, "2\n");
        assert_eq!(run_cli(&["solve", "--mode", "lcis", f]).1, "1\n");
        std::fs::write(&file, "1 q\n1\n").unwrap();
        let (code, _, err) = run_cli(&["solve", f]);
        assert_eq!(code, 1);
        assert!(err.contains("line 1, token 2"));
        assert_eq!(run_cli(&["solve", "--algo", "nope", f]).0, 2);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn verify_command_agrees() {
        let dir = std::env::temp_dir().join(format!("lcis-verify-{}", std::process::id()));
        let (code, out, err) = run_cli(&["verify", "--cases", "100", "--n", "50", "--seed", "7", "--dump-dir", dir.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        assert!(out.starts_with("ok: 100 cases"));
        assert!(!dir.exists());
    }

    #[test]
    fn verify_shrinks_and_dumps_a_mismatch() {
        let dir = std::env::temp_dir().join(format!("lcis-shrink-{}", std::process::id()));
        let mut solvers = default_solvers();
        solvers.truncate(1);
        // wrong whenever the value 3 occurs in both sequences
        solvers.push((
            "broken".into(),
            Box::new(|i: &Instance, v| {
                let len = quadratic_length(&i.a, &i.b, v);
                Ok(if i.a.contains(&3) && i.b.contains(&3) { len + 1 } else { len })
            }),
        ));
        let cfg = VerifyConfig {
            cases: 20,
            n: 40,
            alphabet: Some(6),
            dist: Some(Dist::Uniform),
            seed: 11,
            variants: vec![Variant::Strict],
            dump_dir: dir.clone(),
        };
        let m = verify_with(&cfg, &solvers).unwrap().mismatch.expect("mismatch found");
        assert_eq!(m.solver, "broken");
        assert_eq!((m.instance.a.len(), m.instance.b.len()), (1, 1));
        let dumped = read_instance(m.dump.as_ref().unwrap()).unwrap();
        assert_eq!(dumped, m.instance);
        assert_eq!(dumped.meta["case_seed"], m.case_seed.to_string());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn bench_grid() {
        let cfg = BenchConfig {
            algos: vec![Algo::Baseline, Algo::DpTab, Algo::Pairs, Algo::Combined],
            sizes: vec![50, 120],
            dists: vec![Dist::Uniform, Dist::FewHeavy],
            alphabets: vec![4],
            seed: 3,
            variant: Variant::Strict,
            solver: SolverConfig::default(),
        };
        let report = run_bench(&cfg).unwrap();
        assert_eq!(report.records.len(), 16);
        assert_eq!(report.fits.iter().filter(|f| f.algo == "pairs").count(), 4);
        let mut buf = Vec::new();
        write_csv(&report.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "algo,variant,n_a,n_b,alphabet,dist,seed,answer,wall_ns,counter_pairs,counter_queries,counter_blocks\n"
        ));
        assert_eq!(text.lines().count(), 17);

        let (code, out, err) = run_cli(&["bench", "--sizes", "60", "--alphabets", "3", "--format", "json"]);
        assert_eq!(code, 0, "{err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["records"].as_array().unwrap().len(), 4);
    }
}
