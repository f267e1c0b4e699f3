//! `qdel` command-line front end.
//!
//! Exit codes: 0 success, 1 verified failure (condition or fidelity),
//! 2 input or usage error.

pub mod table;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use qdel_core::codec::{delete, encode_density};
use qdel_core::combinatorics::{check_c1, check_c2};
use qdel_core::linalg::seeded_rng;
use qdel_core::search::{enumerate_codes, hamming_ball, SearchSpec};
use qdel_core::{CodeFile, CodePair, CodecInstance, QubitMessage, Verdict, C64};

/// Roundtrip passes when fidelity is at least `1 - FIDELITY_TOL`.
pub const FIDELITY_TOL: f64 = 1e-9;
/// Tolerance on `|α|² + |β|² = 1` for user-supplied messages.
pub const MESSAGE_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "qdel", version, about = "Single quantum deletion error-correcting code toolkit")]
pub struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the distance (C1) and ratio (C2) conditions of a code file.
    Check { code: PathBuf },
    /// Print the deletion sets Δ_{i,b}(A) and Δ_{i,b}(B).
    Tables { code: PathBuf },
    /// Encode, delete one qubit, decode, and report fidelity.
    Roundtrip {
        code: PathBuf,
        #[command(flatten)]
        message: MessageArgs,
        /// Deletion position (1-based) or `all`.
        #[arg(long, default_value = "all")]
        position: String,
        #[arg(long, env = "QDEL_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Print the syndrome outcome probabilities after a deletion.
    Distribution {
        code: PathBuf,
        #[command(flatten)]
        message: MessageArgs,
        /// Deletion position (1-based) or `all`.
        #[arg(long)]
        position: String,
    },
    /// Simulate the three-state experiment on the 4-qubit code with the first qubit deleted.
    #[command(name = "demo-table3")]
    DemoTable3 {
        #[arg(long, default_value_t = 8192)]
        shots: u64,
        #[arg(long, env = "QDEL_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Search for code pairs satisfying both conditions.
    Search(SearchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Zero,
    One,
    Plus,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = true)]
pub struct MessageArgs {
    /// Amplitude of |0> as `re,im` or `re`.
    #[arg(long, allow_hyphen_values = true, requires = "beta", conflicts_with = "preset")]
    pub alpha: Option<String>,
    /// Amplitude of |1> as `re,im` or `re`.
    #[arg(long, allow_hyphen_values = true, requires = "alpha", conflicts_with = "preset")]
    pub beta: Option<String>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub size_a: Option<usize>,
    #[arg(long)]
    pub size_b: Option<usize>,
    #[arg(long)]
    pub max_results: Option<usize>,
    /// Keep one pair per class under reversal, complement and A/B swap.
    #[arg(long)]
    pub symmetry: bool,
    /// Directory to write found pairs into, one code file each.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Succeed when nothing is found (and fail otherwise).
    #[arg(long)]
    pub expect_none: bool,
    /// Run even if the search space estimate exceeds the guard.
    #[arg(long)]
    pub force: bool,
    /// Restrict candidates to strings near those of this code file.
    #[arg(long)]
    pub near: Option<PathBuf>,
    /// Hamming radius used with `--near`.
    #[arg(long, default_value_t = 1, requires = "near")]
    pub radius: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Failure = 1,
    Usage = 2,
}

/// Runs a parsed command. Reports go to `out`, diagnostics to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            Exit::Usage
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<Exit> {
    match &cli.command {
        Command::Check { code } => cmd_check(code, cli.json, out),
        Command::Tables { code } => cmd_tables(code, out),
        Command::Roundtrip { code, message, position, seed } => {
            cmd_roundtrip(code, message, position, *seed, cli.json, out)
        }
        Command::Distribution { code, message, position } => cmd_distribution(code, message, position, cli.json, out),
        Command::DemoTable3 { shots, seed } => cmd_demo_table3(*shots, *seed, cli.json, out),
        Command::Search(args) => cmd_search(args, cli.json, out),
    }
}

fn load(path: &Path) -> anyhow::Result<(CodeFile, CodePair)> {
    let file = CodeFile::read(path)?;
    let pair = file.to_pair().with_context(|| format!("{}", path.display()))?;
    Ok((file, pair))
}

/// `re,im` or a bare real part.
fn parse_complex(s: &str) -> anyhow::Result<C64> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let part = |t: &str| t.trim().parse::<f64>().with_context(|| format!("expected `re,im` or `re`, got {s:?}"));
    Ok(C64::new(part(re)?, part(im)?))
}

impl MessageArgs {
    pub fn message(&self) -> anyhow::Result<(QubitMessage, String)> {
        if let Some(p) = self.preset {
            let msg = match p {
                Preset::Zero => QubitMessage::zero(),
                Preset::One => QubitMessage::one(),
                Preset::Plus => QubitMessage::plus(),
            };
            return Ok((msg, format!("{p:?}").to_lowercase()));
        }
        let (Some(a), Some(b)) = (&self.alpha, &self.beta) else {
            bail!("give either --preset or both --alpha and --beta");
        };
        let (alpha, beta) = (parse_complex(a)?, parse_complex(b)?);
        QubitMessage::with_tolerance(alpha, beta, MESSAGE_TOL)?;
        let msg = QubitMessage::normalize(alpha, beta)?;
        Ok((msg, format!("alpha={} beta={}", fmt_c64(alpha), fmt_c64(beta))))
    }
}

fn positions(spec: &str, n: usize) -> anyhow::Result<Vec<usize>> {
    if spec == "all" {
        return Ok((1..=n).collect());
    }
    let i: usize = spec.parse().with_context(|| format!("bad position {spec:?}"))?;
    if i == 0 || i > n {
        bail!("position {i} out of range 1..={n}");
    }
    Ok(vec![i])
}

fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn fmt_prob(p: f64) -> String {
    if p.abs() < 5e-13 {
        return "0".into();
    }
    let s = format!("{p:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn fmt_c64(z: C64) -> String {
    format!("{}{}{}i", fmt_prob(z.re), if z.im < 0.0 { "-" } else { "+" }, fmt_prob(z.im.abs()))
}

#[derive(Serialize)]
struct CheckReport<'a> {
    n: usize,
    c1: &'a Verdict,
    c2: &'a Verdict,
}

fn render_verdict(name: &str, v: &Verdict, out: &mut dyn Write) -> anyhow::Result<()> {
    if v.holds {
        return Ok(());
    }
    writeln!(out, "{name} witnesses ({} total):", v.total_witnesses)?;
    for w in &v.witnesses {
        writeln!(out, "  {w}")?;
    }
    if v.total_witnesses > v.witnesses.len() {
        writeln!(out, "  ... {} more", v.total_witnesses - v.witnesses.len())?;
    }
    Ok(())
}

pub fn cmd_check(path: &Path, json: bool, out: &mut dyn Write) -> anyhow::Result<Exit> {
    let (_, pair) = load(path)?;
    let (c1, c2) = (check_c1(&pair), check_c2(&pair));
    if json {
        emit_json(out, &CheckReport { n: pair.n(), c1: &c1, c2: &c2 })?;
    } else {
        let ok = |v: &Verdict| if v.holds { "OK" } else { "FAIL" };
        writeln!(out, "C1: {}, C2: {}", ok(&c1), ok(&c2))?;
        render_verdict("C1", &c1, out)?;
        render_verdict("C2", &c2, out)?;
    }
    Ok(if c1.holds && c2.holds { Exit::Success } else { Exit::Failure })
}

pub fn cmd_tables(path: &Path, out: &mut dyn Write) -> anyhow::Result<Exit> {
    let (_, pair) = load(path)?;
    out.write_all(table::render_table(&pair).as_bytes())?;
    Ok(Exit::Success)
}

fn instance_for(pair: &CodePair) -> anyhow::Result<Option<CodecInstance>> {
    match CodecInstance::new(pair.clone()) {
        Ok(inst) => Ok(Some(inst)),
        Err(qdel_core::CodecError::ConditionsNotMet { .. } | qdel_core::CodecError::ConditionViolated(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Serialize)]
pub struct RunCase {
    pub position: usize,
    pub message: String,
    pub fidelity: Option<f64>,
    pub outcome: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs_digest: String,
    pub cases: Vec<RunCase>,
    pub passed: usize,
    pub total: usize,
    pub pass: bool,
}

pub fn cmd_roundtrip(
    path: &Path,
    message: &MessageArgs,
    position: &str,
    seed: u64,
    json: bool,
    out: &mut dyn Write,
) -> anyhow::Result<Exit> {
    let (file, pair) = load(path)?;
    let (msg, label) = message.message()?;
    let positions = positions(position, pair.n())?;
    let command = format!("roundtrip {} {label} --position {position} --seed {seed}", path.display());
    let Some(inst) = instance_for(&pair)? else {
        writeln!(out, "code does not satisfy C1 and C2; run `qdel check` for witnesses")?;
        return Ok(Exit::Failure);
    };
    let rho = encode_density(&pair, &msg)?;
    let cases: Vec<RunCase> = positions
        .iter()
        .map(|&i| {
            let attempt = delete(&rho, i).and_then(|rx| inst.decode(&rx, seed)).and_then(|d| {
                let f = qdel_core::linalg::fidelity_pure(&d.sigma, &msg.state())?;
                Ok((f, d.outcome))
            });
            match attempt {
                Ok((f, k)) => RunCase { position: i, message: label.clone(), fidelity: Some(f), outcome: Some(k + 1), error: None },
                Err(e) => RunCase { position: i, message: label.clone(), fidelity: None, outcome: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    let passed = cases.iter().filter(|c| c.fidelity.is_some_and(|f| f >= 1.0 - FIDELITY_TOL)).count();
    let report = RunReport {
        command,
        inputs_digest: digest(&[&file.to_json(), &label, position, &seed.to_string()]),
        total: cases.len(),
        pass: passed == cases.len(),
        passed,
        cases,
    };
    if json {
        emit_json(out, &report)?;
    } else {
        writeln!(out, "{}", report.command)?;
        writeln!(out, "inputs {}", report.inputs_digest)?;
        writeln!(out, "position  outcome  fidelity")?;
        for c in &report.cases {
            match (c.fidelity, c.outcome) {
                (Some(f), Some(k)) => writeln!(out, "{:<8}  {:<7}  {f:.12}", c.position, k)?,
                _ => writeln!(out, "{:<8}  -        error: {}", c.position, c.error.as_deref().unwrap_or(""))?,
            }
        }
        writeln!(out, "{} {}/{} cases with fidelity >= 1 - {FIDELITY_TOL:e}", if report.pass { "PASS" } else { "FAIL" }, report.passed, report.total)?;
    }
    Ok(if report.pass { Exit::Success } else { Exit::Failure })
}

#[derive(Debug, Serialize)]
pub struct DistributionRow {
    pub position: usize,
    pub blocks: Vec<f64>,
    pub residual: f64,
    pub nonzero: usize,
    pub lambda: usize,
}

pub fn cmd_distribution(
    path: &Path,
    message: &MessageArgs,
    position: &str,
    json: bool,
    out: &mut dyn Write,
) -> anyhow::Result<Exit> {
    let (_, pair) = load(path)?;
    let (msg, label) = message.message()?;
    let positions = positions(position, pair.n())?;
    let Some(inst) = instance_for(&pair)? else {
        writeln!(out, "code does not satisfy C1 and C2; run `qdel check` for witnesses")?;
        return Ok(Exit::Failure);
    };
    let rho = encode_density(&pair, &msg)?;
    let lambda = pair.lambda();
    let mut rows = Vec::new();
    for &i in &positions {
        let d = inst.outcome_distribution(&delete(&rho, i)?)?;
        rows.push(DistributionRow {
            position: i,
            nonzero: d.nonzero_blocks(),
            residual: d.residual.unwrap_or(0.0),
            blocks: d.blocks,
            lambda,
        });
    }
    let ok = rows.iter().all(|r| r.nonzero == lambda && r.residual <= qdel_core::linalg::PROB_THRESHOLD);
    if json {
        emit_json(out, &rows)?;
    } else {
        writeln!(out, "distribution {} {label}", path.display())?;
        for r in &rows {
            let probs: Vec<String> = r.blocks.iter().map(|&p| fmt_prob(p)).collect();
            let rel = if r.nonzero == lambda { "=" } else { "!=" };
            writeln!(out, "position {}: {}; nonzero outcomes: {} {rel} λ", r.position, probs.join(", "), r.nonzero)?;
            writeln!(out, "  residual: {}", fmt_prob(r.residual))?;
        }
        writeln!(out, "λ = gcd(|A|, |B|) = {lambda}")?;
    }
    Ok(if ok { Exit::Success } else { Exit::Failure })
}

#[derive(Debug, Serialize)]
pub struct DemoRow {
    pub initial_state: String,
    pub shots: u64,
    pub outcome0: u64,
    pub outcome1: u64,
    pub percent0: f64,
    pub percent1: f64,
}

/// Encode each initial state with the 4-qubit code, delete qubit 1, decode
/// per shot and measure the decoded qubit in the computational basis.
pub fn demo_table3(shots: u64, seed: u64) -> anyhow::Result<Vec<DemoRow>> {
    let pair = CodePair::four_qubit_example();
    let inst = CodecInstance::new(pair.clone())?;
    let states = [
        ("|0>", QubitMessage::zero()),
        ("|1>", QubitMessage::one()),
        ("(|0>+|1>)/sqrt(2)", QubitMessage::plus()),
    ];
    let mut rows = Vec::new();
    for (k, (name, msg)) in states.iter().enumerate() {
        let received = delete(&encode_density(&pair, msg)?, 1)?;
        let mut rng = seeded_rng(seed.wrapping_add(k as u64));
        let mut zeros = 0;
        for _ in 0..shots {
            let decoded = inst.decode_with(&received, &mut rng)?;
            let p0 = decoded.sigma.matrix()[(0, 0)].re;
            if rng.random::<f64>() < p0 {
                zeros += 1;
            }
        }
        let pct = |c: u64| if shots == 0 { 0.0 } else { 100.0 * c as f64 / shots as f64 };
        rows.push(DemoRow {
            initial_state: name.to_string(),
            shots,
            outcome0: zeros,
            outcome1: shots - zeros,
            percent0: pct(zeros),
            percent1: pct(shots - zeros),
        });
    }
    Ok(rows)
}

pub fn cmd_demo_table3(shots: u64, seed: u64, json: bool, out: &mut dyn Write) -> anyhow::Result<Exit> {
    let rows = demo_table3(shots, seed)?;
    if json {
        emit_json(out, &rows)?;
    } else {
        writeln!(out, "4-qubit code, deletion D_1, {shots} shots, seed {seed}")?;
        writeln!(out, "{:<20}{:>12}{:>12}", "initial state", "outcome 0", "outcome 1")?;
        for r in &rows {
            writeln!(out, "{:<20}{:>11.3}%{:>11.3}%", r.initial_state, r.percent0, r.percent1)?;
        }
    }
    Ok(Exit::Success)
}

#[derive(Debug, Serialize)]
struct SearchSummary {
    n: usize,
    size_a: Option<usize>,
    size_b: Option<usize>,
    found: Vec<CodeFile>,
    truncated: usize,
    states_examined: u64,
    elapsed_ms: u128,
}

pub fn cmd_search(args: &SearchArgs, json: bool, out: &mut dyn Write) -> anyhow::Result<Exit> {
    let mut spec = SearchSpec::new(args.n);
    spec.size_a = args.size_a;
    spec.size_b = args.size_b;
    spec.max_results = args.max_results;
    spec.symmetry_reduce = args.symmetry;
    spec.force = args.force;
    if let Some(near) = &args.near {
        let (_, pair) = load(near)?;
        if pair.n() != args.n {
            bail!("--near code has length {}, expected {}", pair.n(), args.n);
        }
        let centers: Vec<_> = pair.a().iter().chain(pair.b().iter()).copied().collect();
        spec.universe = Some(hamming_ball(&centers, args.radius));
    }
    let report = enumerate_codes(&spec)?;
    let files: Vec<CodeFile> = report.found.iter().map(CodeFile::from_pair).collect();
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (k, f) in files.iter().enumerate() {
            let path = dir.join(format!("code-{:04}.json", k + 1));
            fs::write(&path, f.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
        }
    }
    if json {
        emit_json(
            out,
            &SearchSummary {
                n: args.n,
                size_a: args.size_a,
                size_b: args.size_b,
                found: files,
                truncated: report.truncated,
                states_examined: report.states_examined,
                elapsed_ms: report.elapsed.as_millis(),
            },
        )?;
    } else {
        for f in &files {
            writeln!(out, "{}", f.to_json())?;
        }
        writeln!(
            out,
            "found {} pair(s){} after {} states in {:.3}s",
            files.len(),
            if report.truncated > 0 { format!(" (+{} truncated)", report.truncated) } else { String::new() },
            report.states_examined,
            report.elapsed.as_secs_f64()
        )?;
    }
    let any = !report.found.is_empty();
    Ok(if any != args.expect_none { Exit::Success } else { Exit::Failure })
}
