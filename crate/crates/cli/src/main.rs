//! `pucoh`: presentations, θ values and cohomology groups of `PU(n)`.

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use pucoh::arithmetic::factorize;
use pucoh::koszul::{default_window, verify_suite, MAX_MODEL_N};
use pucoh::presentation::{
    groups_by_degree, present, present_primary, present_unreduced, reduces_to_zero,
};
use pucoh::theta::{split_by_primes, theta, theta_closed, ExponentConvention};
use pucoh::{AbelianGroup, Check, Error, MultiIndex, OracleLimits, PSequence, PresElem, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Latex,
}

#[derive(Debug, Parser)]
#[command(
    name = "pucoh",
    version,
    about = "Integral cohomology of the projective unitary groups PU(n)"
)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text, env = "PUCOH_FORMAT")]
    format: Format,

    /// Highest degree to report (groups) or to compare (verify).
    #[arg(long, global = true, env = "PUCOH_MAX_DEGREE")]
    max_degree: Option<u32>,

    /// Largest n for which verify compares whole pages; larger n use a degree window.
    #[arg(long, global = true, default_value_t = 6, env = "PUCOH_ORACLE_MAX_N",
          value_parser = clap::value_parser!(u64).range(1..))]
    oracle_max_n: u64,

    /// Worker threads (defaults to one per core).
    #[arg(long, global = true, env = "PUCOH_JOBS", value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,

    /// Seed for the randomly sampled checks of verify.
    #[arg(long, global = true, default_value_t = 0, env = "PUCOH_SEED")]
    seed: u64,

    /// Print progress to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generators and relations of H*(PU(n)).
    Present {
        #[arg(value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        /// Keep every relation instead of a minimal generating set.
        #[arg(long, conflicts_with = "primary")]
        unreduced: bool,
        /// Use the prime-by-prime relations only.
        #[arg(long)]
        primary: bool,
    },
    /// theta(xi_I) in terms of w and the rho classes.
    Theta {
        #[arg(value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        /// Comma-separated indices, e.g. 1,2,8.
        index: String,
    },
    /// The group H^d(PU(n)) in each degree.
    Groups {
        #[arg(value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
    },
    /// Compare everything with the chain-level model.
    Verify {
        #[arg(value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        /// Number of random index sets for the prime-splitting check.
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
}

/// Rendered output and whether every check passed.
struct Outcome {
    text: String,
    ok: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        // only fails when a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j as usize)
            .build_global();
    }
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) => 2,
        Error::ResourceLimit(_) => 3,
        Error::VerificationFailure(_)
        | Error::IntegralityViolation { .. }
        | Error::InternalInconsistency(_) => 1,
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Present {
            n,
            unreduced,
            primary,
        } => cmd_present(cli, *n, *unreduced, *primary),
        Command::Theta { n, index } => cmd_theta(cli, *n, index),
        Command::Groups { n } => cmd_groups(cli, *n),
        Command::Verify { n, samples } => cmd_verify(cli, *n, *samples),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json renders");
    s.push('\n');
    s
}

fn ok(text: String) -> Result<Outcome> {
    Ok(Outcome { text, ok: true })
}

fn cmd_present(cli: &Cli, n: u64, unreduced: bool, primary: bool) -> Result<Outcome> {
    let pres = if unreduced {
        present_unreduced(n)?
    } else if primary {
        present_primary(n)?
    } else {
        present(n)?
    };
    ok(match cli.format {
        Format::Text => pres.to_text(),
        Format::Json => pretty(&pres.to_json()),
        Format::Latex => pres.to_latex(),
    })
}

/// The prime `p` with `I ⊆ {1, p, …, p^r}`, if there is one.
fn chain_prime(n: u64, idx: &MultiIndex) -> Result<Option<(u64, u32)>> {
    let f = factorize(n)?;
    Ok(f.factors().iter().copied().find(|&(p, r)| {
        idx.iter()
            .all(|k| (0..=r).any(|s| u64::from(k) == p.pow(s)))
    }))
}

fn cmd_theta(cli: &Cli, n: u64, index: &str) -> Result<Outcome> {
    let idx: MultiIndex = index.parse()?;
    let idx = MultiIndex::new(idx.into(), u32::try_from(n).unwrap_or(u32::MAX))?;
    let value = theta(n, &idx)?;
    let closed = match chain_prime(n, &idx)? {
        Some((p, r)) if idx.len() >= 2 => {
            let c = theta_closed(
                n,
                &PSequence::from_multi_index(p, r, &idx)?,
                ExponentConvention::Corrected,
            )?;
            let agrees = c == value || c == -&value;
            Some((p, c, agrees))
        }
        _ => None,
    };
    let text = match cli.format {
        Format::Text => {
            let mut s = format!("{}\n", value.to_text());
            if let Some((p, c, agrees)) = &closed {
                s.push_str(&format!(
                    "closed form (p = {p}): {}\nagrees: {agrees}\n",
                    c.to_text()
                ));
            }
            s
        }
        Format::Latex => format!("{}\n", value.to_latex()),
        Format::Json => {
            let closed = closed.as_ref().map(
                |(p, c, agrees)| json!({"p": p, "terms": c.to_json_terms(), "agrees": agrees}),
            );
            pretty(&json!({
                "n": n,
                "index": idx.as_slice(),
                "terms": value.to_json_terms(),
                "closed": closed,
            }))
        }
    };
    Ok(Outcome {
        text,
        ok: closed.is_none_or(|(_, _, a)| a),
    })
}

fn group_latex(g: &AbelianGroup) -> String {
    let mut parts = Vec::new();
    match g.free_rank {
        0 => {}
        1 => parts.push("\\mathbb{Z}".to_string()),
        r => parts.push(format!("\\mathbb{{Z}}^{{{r}}}")),
    }
    parts.extend(g.torsion.iter().map(|t| format!("\\mathbb{{Z}}/{t}")));
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join("\\oplus ")
    }
}

fn cmd_groups(cli: &Cli, n: u64) -> Result<Outcome> {
    let d_max = cli
        .max_degree
        .unwrap_or((n * n + 1).min(u64::from(u32::MAX)) as u32);
    let groups = groups_by_degree(n, d_max)?;
    ok(match cli.format {
        Format::Text => groups
            .iter()
            .map(|(d, g)| format!("H^{d} = {g}\n"))
            .collect(),
        Format::Json => {
            let rows: Vec<Value> = groups
                .iter()
                .map(|(d, g)| {
                    let mut v = serde_json::to_value(g).expect("group serializes");
                    v["degree"] = json!(d);
                    v
                })
                .collect();
            pretty(&json!({"n": n, "groups": rows}))
        }
        Format::Latex => {
            let mut s =
                String::from("\\begin{tabular}{l|l}\n\\hline\n$d$ & $H^{d}$ \\\\ \\hline\n");
            for (d, g) in &groups {
                s.push_str(&format!("${d}$ & ${}$ \\\\\n", group_latex(g)));
            }
            s.push_str("\\hline\n\\end{tabular}\n");
            s
        }
    })
}

/// `θ` against its closed form on every chain `I ⊆ {1, p, …, p^r}`.
fn closed_form_check(n: u64) -> Result<Check> {
    let f = factorize(n)?;
    let mut bad = Vec::new();
    let mut count = 0;
    for &(p, r) in f.factors() {
        let chain: Vec<u32> = (0..=r).map(|s| p.pow(s) as u32).collect();
        for idx in pucoh::indexcalc::subsets_of(&chain) {
            if idx.len() < 2 {
                continue;
            }
            count += 1;
            let c = theta_closed(
                n,
                &PSequence::from_multi_index(p, r, &idx)?,
                ExponentConvention::Corrected,
            )?;
            let t = theta(n, &idx)?;
            if c != t && c != -&t {
                bad.push(format!("I={idx}"));
            }
        }
    }
    Ok(Check::new(
        format!("closed formula on {count} prime chains"),
        bad.is_empty(),
        bad.join(" "),
    ))
}

/// Prime splitting of `θ` on random index sets, checked in the ring.
fn split_check(n: u64, samples: usize, seed: u64) -> Result<Check> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for _ in 0..samples {
        let size = rng.random_range(1..=3usize.min(n as usize - 1));
        let mut elems: Vec<u32> = Vec::new();
        while elems.len() < size {
            let k = rng.random_range(2..=n as u32);
            if !elems.contains(&k) {
                elems.push(k);
            }
        }
        elems.sort_unstable();
        let idx = MultiIndex::try_from(elems)?;
        let with_one = rng.random_bool(0.5);
        let s = split_by_primes(n, &idx, with_one)?;
        let diff: PresElem = &s.lhs(n)? - &s.recombine(n)?;
        if !reduces_to_zero(n, &diff)? {
            bad.push(format!("I={idx} with_one={with_one}"));
        }
    }
    Ok(Check::new(
        format!("prime splitting on {samples} random index sets"),
        bad.is_empty(),
        bad.join(" "),
    ))
}

fn cmd_verify(cli: &Cli, n: u64, samples: usize) -> Result<Outcome> {
    let limits = OracleLimits {
        max_full_n: cli.oracle_max_n,
        max_windowed_n: MAX_MODEL_N,
    };
    let window = match cli.max_degree {
        Some(d) => Some(d),
        None if n > cli.oracle_max_n => Some(default_window(n)?),
        None => None,
    };
    if cli.verbose > 0 {
        eprintln!("verifying n = {n}, window {window:?}");
    }
    let mut checks = vec![closed_form_check(n)?, split_check(n, samples, cli.seed)?];
    checks.extend(verify_suite(n, window, &limits)?);
    let all = checks.iter().all(|c| c.passed);
    let text = match cli.format {
        Format::Json => pretty(&json!({"n": n, "window": window, "passed": all, "checks": checks})),
        Format::Text | Format::Latex => {
            let mut s = String::new();
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                if c.detail.is_empty() || c.passed {
                    s.push_str(&format!("{tag} {}\n", c.name));
                } else {
                    s.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
                }
            }
            s.push_str(if all {
                "all checks passed\n"
            } else {
                "some checks failed\n"
            });
            s
        }
    };
    Ok(Outcome { text, ok: all })
}
