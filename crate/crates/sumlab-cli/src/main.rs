//! sumlab: command-line driver for the dyadic-grid toolkit.
//!
//! Subcommands: `gen` (emit a family to a set file), `energy` (spectrum
//! report for three set files), `pipeline` (extraction → search → dichotomy
//! trace), `bounds` (exponent calculators), `incidence` (pencil-identity
//! report), `verify` (seeded invariant battery), `compare` (measured K vs
//! the exact envelope, CSV).
//!
//! Exit codes: 0 success, 1 check failure, 2 usage error (the message names
//! the offending flag). All artifacts are bit-stable: JSON with sorted keys
//! and 12-significant-digit floats, CSV with the same float tokens.
//! Configuration precedence: flag, then `SUMLAB_CAP` (caps only), then the
//! `--config` JSON file, then built-in defaults.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use sumlab_core::arith::DEFAULT_ENUM_CAP;
use sumlab_core::bounds::{
    epsilon_range, extraction_exponent_budget, gamma_thresholds, growth_exponents,
    specialized_budget,
};
use sumlab_core::energy::{energy_spectrum, EnergyOptions};
use sumlab_core::extract::{default_gap_threshold, run_pipeline, ExtractOptions, PipelineOptions};
use sumlab_core::generators::{corpus, generate, FamilySpec, TripleRole};
use sumlab_core::incidence::energy_via_incidence;
use sumlab_core::io::{read_set, write_set};
use sumlab_core::report::{canonical_json, canonical_json_of, energy_csv, float_token, pipeline_value};
use sumlab_core::scale::rat;
use sumlab_core::verify::run_verify;
use sumlab_core::{DiscretizedSet, Rat};

// ── outcome plumbing ────────────────────────────────────────────────────────

enum Failure {
    /// Bad invocation: exits 2, message names the flag at fault.
    Usage(String),
    /// The run completed enough to decide that a check failed: exits 1.
    Check(String),
}

fn usage(flag: &str, msg: impl Display) -> Failure {
    Failure::Usage(format!("{flag}: {msg}"))
}

fn check(e: impl Display) -> Failure {
    Failure::Check(e.to_string())
}

fn req<T>(opt: Option<T>, flag: &str) -> Result<T, Failure> {
    opt.ok_or_else(|| usage(flag, "required for this family"))
}

// ── CLI grammar ─────────────────────────────────────────────────────────────

#[derive(Parser)]
#[command(
    name = "sumlab",
    version,
    about = "Dyadic-grid experiments: set generation, additive energy, \
             structural extraction, exponent calculators, incidence reports"
)]
struct Cli {
    /// JSON config file supplying defaults for cap/seed/kappa/threshold/workers
    /// (explicit flags win on conflict).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for parallel stages (default: all cores). Results are
    /// independent of the schedule.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ap,
    Cantor,
    RandomFrostman,
    FullGrid,
    Extremal,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    A,
    B,
    C,
}

impl From<RoleArg> for TripleRole {
    fn from(r: RoleArg) -> Self {
        match r {
            RoleArg::A => TripleRole::A,
            RoleArg::B => TripleRole::B,
            RoleArg::C => TripleRole::C,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a set file from a named family (or a JSON family spec).
    Gen {
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        /// JSON file holding a full family spec (covers union/translate).
        #[arg(long, value_name = "FILE")]
        spec_json: Option<PathBuf>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        start: Option<i64>,
        #[arg(long)]
        step: Option<i64>,
        #[arg(long)]
        len: Option<u64>,
        #[arg(long)]
        base_bits: Option<u32>,
        /// Comma-separated digit list, e.g. 0,1,3.
        #[arg(long, value_delimiter = ',')]
        digits: Option<Vec<u32>>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        shift: Option<u32>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        max_bits: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, value_enum)]
        role: Option<RoleArg>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Energy spectrum report for set files A, B, C (JSON, optional CSV).
    Energy {
        #[arg(long = "A", value_name = "FILE")]
        a: PathBuf,
        #[arg(long = "B", value_name = "FILE")]
        b: PathBuf,
        #[arg(long = "C", value_name = "FILE")]
        c: PathBuf,
        /// JSON report path (stdout if omitted).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Optional per-c CSV (header `c_index,energy`).
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Run extraction → triple search → dense/gap dichotomy; emit the full
    /// JSON trace.
    Pipeline {
        #[arg(long = "A", value_name = "FILE")]
        a: PathBuf,
        #[arg(long = "B", value_name = "FILE")]
        b: PathBuf,
        #[arg(long = "C", value_name = "FILE")]
        c: PathBuf,
        #[arg(long)]
        kappa: Option<f64>,
        /// Dense-verdict threshold as a rational, e.g. 1/8.
        #[arg(long, value_name = "P/Q")]
        threshold: Option<String>,
        /// Enumeration cap for ratio sets and searches.
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Exponent calculators: --thm 1.6 (gain budget), 1.10 (growth
    /// exponents), eps (admissible ε window), gamma (γ-thresholds).
    Bounds {
        #[arg(long)]
        thm: String,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Frostman exponent of the dilation set (default: beta).
        #[arg(long)]
        eta: Option<f64>,
        /// Denominator-separation exponent (default: 0).
        #[arg(long)]
        kappa: Option<f64>,
        /// First extraction modulus (default: 1).
        #[arg(long)]
        m1: Option<f64>,
        /// Second extraction modulus (default: 7).
        #[arg(long)]
        m2: Option<f64>,
        /// JSON report path (human-readable lines always go to stdout).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Pencil-incidence identity report for one dilation index c.
    Incidence {
        #[arg(long = "A", value_name = "FILE")]
        a: PathBuf,
        #[arg(long = "B", value_name = "FILE")]
        b: PathBuf,
        /// Dilation as a grid index (c = index·δ).
        #[arg(long)]
        c: i64,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run the seeded invariant battery; exit 1 if any check fails.
    Verify {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Measured K vs the exact envelope across the seeded corpus (CSV).
    Compare {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

// ── configuration ───────────────────────────────────────────────────────────

/// Optional defaults from `--config FILE`. Flags always win; for caps the
/// `SUMLAB_CAP` environment variable sits between flags and this file.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    cap: Option<u64>,
    seed: Option<u64>,
    kappa: Option<f64>,
    threshold: Option<String>,
    workers: Option<usize>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = fs::read_to_string(path)
        .map_err(|e| usage("--config", format_args!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| usage("--config", format_args!("{}: {e}", path.display())))
}

fn resolve_cap(flag: Option<u64>, cfg: &FileConfig) -> Result<u64, Failure> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Ok(s) = std::env::var("SUMLAB_CAP") {
        return s
            .trim()
            .parse()
            .map_err(|e| usage("SUMLAB_CAP", format_args!("invalid cap '{s}': {e}")));
    }
    Ok(cfg.cap.unwrap_or(DEFAULT_ENUM_CAP))
}

fn resolve_seed(flag: Option<u64>, cfg: &FileConfig) -> u64 {
    flag.or(cfg.seed).unwrap_or(1)
}

fn parse_rat_str(s: &str) -> Result<Rat, String> {
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (
            p.trim().parse::<i128>().map_err(|e| format!("bad numerator '{p}': {e}"))?,
            q.trim().parse::<i128>().map_err(|e| format!("bad denominator '{q}': {e}"))?,
        ),
        None => (s.trim().parse::<i128>().map_err(|e| format!("bad rational '{s}': {e}"))?, 1),
    };
    if q == 0 {
        return Err("denominator must be nonzero".into());
    }
    Ok(rat(p, q))
}

fn resolve_threshold(flag: Option<&str>, cfg: &FileConfig) -> Result<Rat, Failure> {
    if let Some(s) = flag {
        return parse_rat_str(s).map_err(|e| usage("--threshold", e));
    }
    if let Some(s) = &cfg.threshold {
        return parse_rat_str(s).map_err(|e| usage("--config", format_args!("threshold: {e}")));
    }
    Ok(default_gap_threshold())
}

// ── report emission ─────────────────────────────────────────────────────────

/// Write `text` to `out` (newline-terminated) or print it to stdout.
fn emit(text: &str, out: Option<&Path>, flag: &str) -> Result<(), Failure> {
    let body = if text.ends_with('\n') { text.to_string() } else { format!("{text}\n") };
    match out {
        Some(p) => fs::write(p, body)
            .map_err(|e| usage(flag, format_args!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(body.as_bytes()).is_err() {
                std::process::exit(0);
            }
            Ok(())
        }
    }
}

fn read_set_flag(path: &Path, flag: &str) -> Result<DiscretizedSet, Failure> {
    read_set(path).map_err(|e| usage(flag, format_args!("{}: {e}", path.display())))
}

/// Human-line float display: round to the artifact precision (12 significant
/// digits), then print the shortest decimal for that value.
fn show(v: f64) -> String {
    let token = float_token(v);
    token.parse::<f64>().map(|r| r.to_string()).unwrap_or(token)
}

/// Print a line to stdout; if the downstream consumer has closed the pipe,
/// stop quietly instead of panicking.
fn say(text: impl Display) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{text}").is_err() {
        std::process::exit(0);
    }
}

// ── subcommand bodies ───────────────────────────────────────────────────────

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    cfg: &FileConfig,
    family: Option<FamilyArg>,
    spec_json: Option<PathBuf>,
    m: Option<u32>,
    start: Option<i64>,
    step: Option<i64>,
    len: Option<u64>,
    base_bits: Option<u32>,
    digits: Option<Vec<u32>>,
    depth: Option<u32>,
    shift: Option<u32>,
    sigma: Option<f64>,
    max_bits: Option<u32>,
    k: Option<u32>,
    role: Option<RoleArg>,
    seed: Option<u64>,
    out: PathBuf,
) -> Result<(), Failure> {
    let spec: FamilySpec = match (family, spec_json) {
        (Some(_), Some(_)) => return Err(usage("--family", "conflicts with --spec-json")),
        (None, None) => return Err(usage("--family", "required unless --spec-json is given")),
        (None, Some(path)) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| usage("--spec-json", format_args!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| usage("--spec-json", format_args!("{}: {e}", path.display())))?
        }
        (Some(f), None) => match f {
            FamilyArg::Ap => FamilySpec::Ap {
                m: req(m, "--m")?,
                start: req(start, "--start")?,
                step: req(step, "--step")?,
                len: req(len, "--len")?,
            },
            FamilyArg::Cantor => FamilySpec::Cantor {
                m: req(m, "--m")?,
                base_bits: req(base_bits, "--base-bits")?,
                digits: req(digits, "--digits")?,
                depth: req(depth, "--depth")?,
                shift: shift.unwrap_or(0),
            },
            FamilyArg::RandomFrostman => FamilySpec::RandomFrostman {
                m: req(m, "--m")?,
                sigma: req(sigma, "--sigma")?,
                seed: resolve_seed(seed, cfg),
                max_bits,
            },
            FamilyArg::FullGrid => FamilySpec::FullGrid { m: req(m, "--m")? },
            FamilyArg::Extremal => FamilySpec::Extremal {
                k: req(k, "--k")?,
                role: req(role, "--role")?.into(),
            },
        },
    };
    let set = generate(&spec).map_err(|e| usage("--family", e))?;
    write_set(&out, &set).map_err(|e| usage("--out", format_args!("{}: {e}", out.display())))?;
    say(format_args!("wrote {}: m={}, {} indices", out.display(), set.scale().m(), set.len()));
    Ok(())
}

fn cmd_energy(
    a: &Path,
    b: &Path,
    c: &Path,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> Result<(), Failure> {
    let (a, b, c) = (
        read_set_flag(a, "--A")?,
        read_set_flag(b, "--B")?,
        read_set_flag(c, "--C")?,
    );
    let opts = EnergyOptions { parallel: true, ..EnergyOptions::default() };
    let rep = energy_spectrum(&a, &b, &c, &opts).map_err(check)?;
    let json = canonical_json_of(&rep).map_err(check)?;
    emit(&json, out, "--out")?;
    if let Some(path) = csv {
        emit(&energy_csv(&rep), Some(path), "--csv")?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_pipeline(
    cfg: &FileConfig,
    a: &Path,
    b: &Path,
    c: &Path,
    kappa: Option<f64>,
    threshold: Option<&str>,
    cap: Option<u64>,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let (a, b, c) = (
        read_set_flag(a, "--A")?,
        read_set_flag(b, "--B")?,
        read_set_flag(c, "--C")?,
    );
    let opts = PipelineOptions {
        extract: ExtractOptions::default(),
        kappa: kappa.or(cfg.kappa).unwrap_or(0.25),
        threshold: resolve_threshold(threshold, cfg)?,
        cap: resolve_cap(cap, cfg)?,
        seed: resolve_seed(seed, cfg),
    };
    let rep = run_pipeline(&a, &b, &c, &opts).map_err(check)?;
    emit(&canonical_json(&pipeline_value(&rep)), out, "--out")
}

#[allow(clippy::too_many_arguments)]
fn cmd_bounds(
    thm: &str,
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    eta: Option<f64>,
    kappa: Option<f64>,
    m1: Option<f64>,
    m2: Option<f64>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let need = |v: Option<f64>, flag: &str| -> Result<f64, Failure> {
        v.ok_or_else(|| usage(flag, format_args!("required for --thm {thm}")))
    };
    match thm {
        "1.6" => {
            let gamma = need(gamma, "--gamma")?;
            let beta = need(beta, "--beta")?;
            let eta = eta.unwrap_or(beta);
            let kappa = kappa.unwrap_or(0.0);
            let budget = extraction_exponent_budget(
                gamma,
                beta,
                eta,
                kappa,
                m1.unwrap_or(1.0),
                m2.unwrap_or(7.0),
            );
            let special = specialized_budget(gamma, beta);
            for (label, v) in [
                ("e0", budget.e0),
                ("e1_statement", budget.e1_statement),
                ("e1_proof", budget.e1_proof),
                ("e2", budget.e2),
                ("e3", budget.e3),
                ("e4", budget.e4),
                ("min_exponent", budget.min_exponent),
            ] {
                say(format_args!("{label} = {}", show(v)));
            }
            let artifact = serde_json::json!({ "budget": budget, "specialized": special });
            if out.is_some() {
                emit(&canonical_json(&artifact), out, "--out")?;
            }
        }
        "1.10" => {
            let g = growth_exponents(
                need(alpha, "--alpha")?,
                need(beta, "--beta")?,
                need(gamma, "--gamma")?,
            )
            .map_err(|e| usage("--alpha/--beta", e))?;
            say(format_args!("k_exponent = {}", show(g.k_exponent)));
            if let Some(sym) = g.k_exponent_symmetric {
                say(format_args!("k_exponent_symmetric = {}", show(sym)));
            }
            say(format_args!("sumset_exponent = {}", show(g.sumset_exponent)));
            if out.is_some() {
                emit(&canonical_json_of(&g).map_err(check)?, out, "--out")?;
            }
        }
        "eps" => {
            let r = epsilon_range(
                need(alpha, "--alpha")?,
                need(beta, "--beta")?,
                need(gamma, "--gamma")?,
            );
            say(format_args!("eps_max = {}", show(r.eps_max)));
            say(format_args!("regime = {:?}", r.regime));
            say(format_args!("gamma_floor = {}", show(r.gamma_floor)));
            say(format_args!("gamma_ok = {}", r.gamma_ok));
            if out.is_some() {
                emit(&canonical_json_of(&r).map_err(check)?, out, "--out")?;
            }
        }
        "gamma" => {
            let alpha = need(alpha, "--alpha")?;
            let beta = need(beta, "--beta")?;
            let t = gamma_thresholds(alpha, beta, eta.unwrap_or(beta), kappa.unwrap_or(0.0));
            for (label, v) in &t {
                say(format_args!("{label} = {}", show(*v)));
            }
            if out.is_some() {
                emit(&canonical_json_of(&t).map_err(check)?, out, "--out")?;
            }
        }
        other => {
            return Err(usage(
                "--thm",
                format_args!("unknown value '{other}' (expected 1.6, 1.10, eps, gamma)"),
            ))
        }
    }
    Ok(())
}

fn cmd_incidence(a: &Path, b: &Path, c: i64, out: Option<&Path>) -> Result<(), Failure> {
    let (a, b) = (read_set_flag(a, "--A")?, read_set_flag(b, "--B")?);
    let id = energy_via_incidence(&a, &b, c).map_err(check)?;
    emit(&canonical_json_of(&id).map_err(check)?, out, "--out")
}

fn cmd_verify(cfg: &FileConfig, seed: Option<u64>, out: Option<&Path>) -> Result<(), Failure> {
    let rep = run_verify(resolve_seed(seed, cfg)).map_err(check)?;
    emit(&canonical_json_of(&rep).map_err(check)?, out, "--out")?;
    if !rep.pass {
        return Err(Failure::Check(format!(
            "{} of {} verification checks failed",
            rep.checks_failed,
            rep.checks_failed + rep.checks_passed
        )));
    }
    Ok(())
}

fn cmd_compare(cfg: &FileConfig, seed: Option<u64>, out: Option<&Path>) -> Result<(), Failure> {
    let triples = corpus(resolve_seed(seed, cfg)).map_err(check)?;
    let opts = EnergyOptions { parallel: true, ..EnergyOptions::default() };
    let mut csv = String::from("name,m,a_len,b_len,c_len,total,K,k_lower,k_upper,lower_ok,upper_ok\n");
    for t in &triples {
        let rep = energy_spectrum(&t.a, &t.b, &t.c, &opts).map_err(check)?;
        let k_upper = ((t.a.len() * t.b.len()) as f64).sqrt();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            t.name,
            t.a.scale().m(),
            t.a.len(),
            t.b.len(),
            t.c.len(),
            rep.total,
            float_token(rep.k_statistic),
            float_token(1.0 / 3.0),
            float_token(k_upper),
            rep.k_lower_ok,
            rep.k_upper_ok,
        ));
    }
    emit(&csv, out, "--out")
}

// ── dispatch ────────────────────────────────────────────────────────────────

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let cfg = load_config(cli.config.as_deref())?;
    if let Some(n) = cli.workers.or(cfg.workers) {
        if n == 0 {
            return Err(usage("--workers", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(check)?;
    }
    match cli.command {
        Command::Gen {
            family,
            spec_json,
            m,
            start,
            step,
            len,
            base_bits,
            digits,
            depth,
            shift,
            sigma,
            max_bits,
            k,
            role,
            seed,
            out,
        } => cmd_gen(
            &cfg, family, spec_json, m, start, step, len, base_bits, digits, depth, shift, sigma,
            max_bits, k, role, seed, out,
        ),
        Command::Energy { a, b, c, out, csv } => {
            cmd_energy(&a, &b, &c, out.as_deref(), csv.as_deref())
        }
        Command::Pipeline { a, b, c, kappa, threshold, cap, seed, out } => cmd_pipeline(
            &cfg,
            &a,
            &b,
            &c,
            kappa,
            threshold.as_deref(),
            cap,
            seed,
            out.as_deref(),
        ),
        Command::Bounds { thm, alpha, beta, gamma, eta, kappa, m1, m2, out } => {
            cmd_bounds(&thm, alpha, beta, gamma, eta, kappa, m1, m2, out.as_deref())
        }
        Command::Incidence { a, b, c, out } => cmd_incidence(&a, &b, c, out.as_deref()),
        Command::Verify { seed, out } => cmd_verify(&cfg, seed, out.as_deref()),
        Command::Compare { seed, out } => cmd_compare(&cfg, seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
