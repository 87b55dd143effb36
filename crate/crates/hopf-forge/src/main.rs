use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hopf_core::tower::ElementOrder;
use hopf_core::word::display_word;
use hopf_forge::ast::Span;
use hopf_forge::parser::{parse, parse_word_text};
use hopf_forge::resolve::{
    flatten_word, generator_lookup, resolve, Environment, ResolveOptions, DEFAULT_MAX_COSETS,
};
use hopf_forge::runner::{run, RunConfig};

/// Environment variable overriding the live-coset ceiling used while
/// enumerating presentation-backed groups.
const MAX_COSETS_VAR: &str = "HOPF_FORGE_MAX_COSETS";
/// Hard ceilings for `--bound`; larger searches grow exponentially.
const MAX_BOUND_LEN: u32 = 6;
const MAX_BOUND_POW: u32 = 4;

#[derive(Parser)]
#[command(
    name = "hopf-forge",
    version,
    about = "Verify group-tower plans and query word problems in them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug)]
struct SearchBound {
    len: u32,
    pow: u32,
}

fn parse_bound(s: &str) -> Result<SearchBound, String> {
    let (l, p) = s
        .split_once(',')
        .ok_or_else(|| "expected L,P (for example 4,2)".to_string())?;
    let len: u32 = l
        .trim()
        .parse()
        .map_err(|_| format!("invalid length bound `{l}`"))?;
    let pow: u32 = p
        .trim()
        .parse()
        .map_err(|_| format!("invalid power bound `{p}`"))?;
    if len == 0 || pow == 0 {
        return Err("bounds must be at least 1".to_string());
    }
    if len > MAX_BOUND_LEN || pow > MAX_BOUND_POW {
        return Err(format!(
            "bounds above {MAX_BOUND_LEN},{MAX_BOUND_POW} are rejected; the search space grows \
             exponentially"
        ));
    }
    Ok(SearchBound { len, pow })
}

#[derive(Subcommand)]
enum Command {
    /// Resolve a plan and run every declared verification, printing a report.
    Check {
        /// Plan file to verify.
        plan: PathBuf,
        /// Emit the report as a single JSON document instead of a table.
        #[arg(long)]
        json: bool,
        /// Seed for the deterministic random sanity probes.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Elementary-search bounds as `L,P`: conjugator length and power.
        #[arg(long, value_parser = parse_bound)]
        bound: Option<SearchBound>,
    },
    /// Print the normal form of each word in a group from the plan.
    Reduce {
        /// Plan file declaring the group.
        #[arg(long)]
        plan: PathBuf,
        /// Group to reduce in.
        group: String,
        /// Words to reduce.
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// Print whether two words are equal in a group from the plan.
    Equal {
        #[arg(long)]
        plan: PathBuf,
        group: String,
        lhs: String,
        rhs: String,
    },
    /// Print the order of each word in a group from the plan.
    Order {
        #[arg(long)]
        plan: PathBuf,
        group: String,
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// Print the exponent with which a word lies in a cyclic subgroup, or
    /// `none`.
    Member {
        #[arg(long)]
        plan: PathBuf,
        group: String,
        /// Generator of the cyclic subgroup.
        gamma: String,
        /// Word to test.
        word: String,
    },
}

fn max_cosets_from_env() -> Result<usize, String> {
    match std::env::var(MAX_COSETS_VAR) {
        Ok(s) => {
            let n: usize = s
                .trim()
                .parse()
                .map_err(|_| format!("invalid {MAX_COSETS_VAR} value `{s}`"))?;
            if n == 0 {
                return Err(format!("{MAX_COSETS_VAR} must be at least 1"));
            }
            Ok(n)
        }
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_MAX_COSETS),
        Err(e) => Err(format!("unreadable {MAX_COSETS_VAR}: {e}")),
    }
}

/// Reads, parses and resolves a plan. Any failure here is a load error: the
/// plan never produced a report, which callers signal with exit code 2.
fn load(plan: &Path) -> Result<(String, Environment), String> {
    let text = std::fs::read_to_string(plan)
        .map_err(|e| format!("cannot read {}: {e}", plan.display()))?;
    let parsed = parse(&text).map_err(|e| e.to_string())?;
    let max_cosets = max_cosets_from_env()?;
    let env = resolve(&parsed, &ResolveOptions { max_cosets }).map_err(|e| e.to_string())?;
    let name = plan
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "plan".to_string());
    Ok((name, env))
}

fn plan_word(
    env: &Environment,
    group: &str,
    text: &str,
) -> Result<(std::sync::Arc<hopf_core::tower::GroupNode>, hopf_core::Word), String> {
    let node = env
        .groups
        .get(group)
        .ok_or_else(|| format!("unknown group `{group}`"))?
        .clone();
    let raw = parse_word_text(text).map_err(|e| e.to_string())?;
    let lookup = generator_lookup(&node);
    let word =
        flatten_word(&raw, &lookup, Span { line: 1, col: 1 }).map_err(|e| e.message.clone())?;
    Ok((node, word))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err((message, code)) => {
            eprintln!("error: {message}");
            code
        }
    }
}

/// `Err` carries a message plus the exit code: 2 for load failures, 1 for
/// failed ad-hoc queries.
fn dispatch(cli: Cli) -> Result<ExitCode, (String, ExitCode)> {
    let load_err = |m: String| (m, ExitCode::from(2));
    let op_err = |m: String| (m, ExitCode::from(1));
    match cli.command {
        Command::Check {
            plan,
            json,
            seed,
            bound,
        } => {
            let (name, env) = load(&plan).map_err(load_err)?;
            let mut cfg = RunConfig {
                seed,
                ..RunConfig::default()
            };
            if let Some(b) = bound {
                cfg.max_len = b.len;
                cfg.max_pow = b.pow;
            }
            let report = run(&name, &env, &cfg);
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report)
                        .expect("report serialization is infallible")
                );
            } else {
                print!("{}", report.render_table());
            }
            Ok(ExitCode::from(report.exit_code() as u8))
        }
        Command::Reduce { plan, group, words } => {
            let (_, env) = load(&plan).map_err(load_err)?;
            let mut lines = Vec::new();
            for text in &words {
                let (node, word) = plan_word(&env, &group, text).map_err(op_err)?;
                let normal = node.normalize(&word).map_err(|e| op_err(e.to_string()))?;
                lines.push(display_word(&normal));
            }
            for l in lines {
                println!("{l}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Equal {
            plan,
            group,
            lhs,
            rhs,
        } => {
            let (_, env) = load(&plan).map_err(load_err)?;
            let (node, l) = plan_word(&env, &group, &lhs).map_err(op_err)?;
            let (_, r) = plan_word(&env, &group, &rhs).map_err(op_err)?;
            let equal = node.are_equal(&l, &r).map_err(|e| op_err(e.to_string()))?;
            println!("{equal}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Order { plan, group, words } => {
            let (_, env) = load(&plan).map_err(load_err)?;
            let mut lines = Vec::new();
            for text in &words {
                let (node, word) = plan_word(&env, &group, text).map_err(op_err)?;
                match node.order(&word).map_err(|e| op_err(e.to_string()))? {
                    ElementOrder::Finite(n) => lines.push(n.to_string()),
                    ElementOrder::Infinite => lines.push("Infinite".to_string()),
                }
            }
            for l in lines {
                println!("{l}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Member {
            plan,
            group,
            gamma,
            word,
        } => {
            let (_, env) = load(&plan).map_err(load_err)?;
            let (node, g) = plan_word(&env, &group, &gamma).map_err(op_err)?;
            let (_, w) = plan_word(&env, &group, &word).map_err(op_err)?;
            match node
                .cyclic_member(&g, &w)
                .map_err(|e| op_err(e.to_string()))?
            {
                Some(m) => println!("{m}"),
                None => println!("none"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
