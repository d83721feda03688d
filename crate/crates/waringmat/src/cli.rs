//! Command-line front end.
//!
//! Exit codes: 0 success, 1 parse or validation error, 2 not decomposable,
//! 3 unsupported, 4 a census check reported FAIL.

use std::ffi::OsString;
use std::io::{Read, Write};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::census;
use crate::config::{self, Config};
use crate::gf::{self, FieldRef};
use crate::matgf::Mat;
use crate::waring::{self, Constraint, WaringError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_DECOMPOSABLE: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "waringmat", version, about = "Sums of two k-th powers of matrices over finite fields")]
pub struct Cli {
    /// Worker threads for census commands (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub out: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CountWhat {
    Cyclic,
    Idempotent,
    Classes,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a matrix as B^k + C^k.
    Decompose {
        /// Field as p^l; optional when the input is JSON carrying its field.
        #[arg(long)]
        field: Option<String>,
        #[arg(long)]
        k: u128,
        #[arg(long, default_value = "NONE")]
        constraint: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Matrix file; stdin when absent or "-".
        #[arg(long = "in")]
        input: Option<String>,
    },
    /// Run one registered census check.
    VerifyTheorem {
        #[arg(long)]
        id: String,
        /// JSON object of check parameters, e.g. '{"ks":[42]}'.
        #[arg(long)]
        params: Option<String>,
    },
    /// Scalar Waring data for k-th powers in a field.
    ScalarWaring {
        #[arg(long)]
        field: String,
        #[arg(long)]
        k: u128,
        /// Largest extension degree m reported for gcd(k, q^m - 1).
        #[arg(long, default_value_t = 3)]
        mmax: u32,
    },
    /// Exhaustive counts over all n x n matrices.
    Count {
        #[arg(long)]
        field: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        what: CountWhat,
    },
    /// Regenerate a tabulated P characterization and diff it against the census.
    Tables {
        /// One of 2,2 | 3,2 | 2,3 (as n,q).
        #[arg(long = "case")]
        case: String,
        #[arg(long, default_value_t = 24)]
        kmax: u128,
    },
}

/// A command error with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn input_error(e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_INPUT, message: e.to_string() }
}

/// Parses arguments and runs one command; returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    if let Some(j) = cli.jobs {
        // a pool may already exist when run repeatedly in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    match dispatch(&cli, stdin, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn emit(stdout: &mut dyn Write, format: Format, value: &Value, text: &str) -> Result<(), Failure> {
    let out = match format {
        Format::Json => serde_json::to_string_pretty(value).expect("json values serialize"),
        Format::Text => text.trim_end().to_string(),
    };
    writeln!(stdout, "{out}").map_err(input_error)
}

fn dispatch(cli: &Cli, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let budget = config::budget_from_env();
    match &cli.command {
        Command::Decompose { field, k, constraint, seed, input } => {
            let text = read_input(input.as_deref(), stdin)?;
            let a = parse_matrix(field.as_deref(), &text)?;
            let c: Constraint = constraint.parse().map_err(input_error)?;
            let cfg = Config { budget, seed: *seed };
            match waring::decompose_with(&a, *k, c, &cfg) {
                Ok(d) => {
                    emit(stdout, cli.out, &d.to_json(), &d.to_text())?;
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    let (code, status) = match &e {
                        WaringError::NotDecomposable { .. } => (EXIT_NOT_DECOMPOSABLE, "not_decomposable"),
                        WaringError::InvalidInput(_) => (EXIT_INPUT, "invalid_input"),
                        _ => (EXIT_UNSUPPORTED, "unsupported"),
                    };
                    let mut v = json!({ "status": status, "message": e.to_string() });
                    if let WaringError::NotDecomposable { citation } = &e {
                        v["citation"] = json!(citation);
                    }
                    emit(stdout, cli.out, &v, &e.to_string())?;
                    Ok(code)
                }
            }
        }
        Command::VerifyTheorem { id, params } => {
            let params: Value = match params {
                Some(s) => serde_json::from_str(s).map_err(|e| input_error(format!("--params: {e}")))?,
                None => json!({}),
            };
            let check = census::check_theorem(id, &params, budget).map_err(input_error)?;
            let mut text = format!("{} {}", check.theorem, if check.passed() { "PASS" } else { "FAIL" });
            for m in &check.mismatches {
                text.push_str(&format!("\n  {m}"));
            }
            emit(stdout, cli.out, &check.to_json(), &text)?;
            Ok(if check.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::ScalarWaring { field, k, mmax } => {
            let f = gf::field_from_spec(field).map_err(input_error)?;
            if *k == 0 {
                return Err(input_error("k must be positive"));
            }
            let prof = gf::scalar_profile(&f, *k, (*mmax).max(1));
            let residues: Vec<String> = prof.residues.iter().map(|&x| f.format_elem(x)).collect();
            let v = json!({
                "field": f.spec(),
                "k": waring::exponent_json(prof.k),
                "d": waring::exponent_json(prof.d),
                "d_m": prof.d_m.iter().map(|&x| waring::exponent_json(x)).collect::<Vec<_>>(),
                "gamma": prof.gamma,
                "ell": prof.ell,
                "residues": residues,
                "k1": waring::exponent_json(prof.k1),
                "k2": waring::exponent_json(prof.k2),
            });
            let dm: Vec<String> = prof.d_m.iter().map(u128::to_string).collect();
            let text = format!(
                "field {}\nk = {}\nd = {}\ngamma = {}\nell = {}\nresidues {{{}}}\nd_m = [{}]\nk = {} * {}",
                f.spec(),
                prof.k,
                prof.d,
                prof.gamma,
                prof.ell,
                residues.join(","),
                dm.join(", "),
                prof.k1,
                prof.k2
            );
            emit(stdout, cli.out, &v, &text)?;
            Ok(EXIT_OK)
        }
        Command::Count { field, n, what } => {
            let f = gf::field_from_spec(field).map_err(input_error)?;
            if *n == 0 {
                return Err(input_error("n must be positive"));
            }
            count(&f, *n, *what, budget, cli.out, stdout)
        }
        Command::Tables { case, kmax } => {
            let (n, q) = parse_case(case)?;
            let rows = census::regenerate_table(n, q, *kmax, budget).map_err(input_error)?;
            let all = rows.iter().all(|r| r.agree);
            let mut text = format!("n = {n}, q = {q}\n{:>6}  {:>8}  {:>9}  {:<5}  excluded", "k", "census", "predicted", "agree");
            for r in &rows {
                text.push_str(&format!(
                    "\n{:>6}  {:>8}  {:>9}  {:<5}  {}",
                    r.k,
                    r.census_size,
                    r.predicted_size,
                    r.agree,
                    if r.excluded.is_empty() { "-".to_string() } else { r.excluded.join(" ") }
                ));
            }
            let v = json!({ "n": n, "q": q, "agree": all, "rows": rows });
            emit(stdout, cli.out, &v, &text)?;
            Ok(if all { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

fn count(f: &FieldRef, n: usize, what: CountWhat, budget: u128, format: Format, stdout: &mut dyn Write) -> Result<i32, Failure> {
    match what {
        CountWhat::Cyclic => {
            let c = census::count_invertible_cyclic(f, n, budget).map_err(input_error)?;
            let v = serde_json::to_value(&c).expect("serializable");
            let text = format!(
                "invertible cyclic: {}\ngroup order: {}\nlower bound holds: {}\n2c > q^(n^2): {}",
                c.count, c.group_order, c.lower_bound_holds, c.exceeds_half
            );
            emit(stdout, format, &v, &text)?;
        }
        CountWhat::Idempotent => {
            let sp = census::space(f, n, budget).map_err(input_error)?;
            let idem = sp.with_flags(census::IDEMPOTENT).count();
            let pi = census::sumset_pi(f, n, budget).map_err(input_error)?.count();
            let v = json!({ "field": f.spec(), "n": n, "size": sp.size(), "idempotents": idem, "Pi": pi });
            let text = format!("idempotents: {idem}\nsums of two idempotents: {pi} of {}", sp.size());
            emit(stdout, format, &v, &text)?;
        }
        CountWhat::Classes => {
            let rows = census::class_table(f, n, budget).map_err(input_error)?;
            let v = json!({ "field": f.spec(), "n": n, "classes": rows });
            let mut text = format!("{} classes", rows.len());
            for r in &rows {
                let mut tags = Vec::new();
                for (set, name) in [
                    (r.invertible, "inv"),
                    (r.semisimple, "ss"),
                    (r.split_semisimple, "split"),
                    (r.cyclic, "cyc"),
                    (r.idempotent, "idem"),
                ] {
                    if set {
                        tags.push(name);
                    }
                }
                text.push_str(&format!(
                    "\n{:<6} {:>6}  {}  order {}  [{}]",
                    r.label.as_deref().unwrap_or("-"),
                    r.size,
                    r.blocks,
                    r.order.as_deref().unwrap_or("-"),
                    tags.join(",")
                ));
            }
            emit(stdout, format, &v, &text)?;
        }
    }
    Ok(EXIT_OK)
}

fn parse_case(s: &str) -> Result<(usize, u32), Failure> {
    let bad = || input_error(format!("--case expects n,q with (n,q) in 2,2 | 3,2 | 2,3, got {s:?}"));
    let (n, q) = s.split_once(',').ok_or_else(bad)?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    let q: u32 = q.trim().parse().map_err(|_| bad())?;
    if !census::TABULATED.contains(&(n, q)) {
        return Err(bad());
    }
    Ok((n, q))
}

fn read_input(path: Option<&str>, stdin: &mut dyn Read) -> Result<String, Failure> {
    match path {
        None | Some("-") => {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map_err(|e| input_error(format!("reading stdin: {e}")))?;
            Ok(s)
        }
        Some(p) => std::fs::read_to_string(p).map_err(|e| input_error(format!("reading {p}: {e}"))),
    }
}

/// Text rows (newline or `;` separated), a JSON matrix object, or a JSON array of rows.
pub fn parse_matrix(field: Option<&str>, text: &str) -> Result<Mat, Failure> {
    let declared = field.map(gf::field_from_spec).transpose().map_err(input_error)?;
    let t = text.trim();
    if t.starts_with('{') || t.starts_with('[') {
        let v: Value = serde_json::from_str(t).map_err(|e| input_error(format!("matrix JSON: {e}")))?;
        let v = match (v, &declared) {
            (Value::Array(rows), Some(f)) => json!({ "field": f.spec(), "rows": rows }),
            (Value::Array(_), None) => return Err(input_error("--field is required for a bare row array")),
            (obj, _) => obj,
        };
        let m = Mat::from_json(&v).map_err(input_error)?;
        if let Some(f) = &declared {
            if m.field() != f {
                return Err(input_error(format!("matrix is over GF({}) but --field is {}", m.field().spec(), f.spec())));
            }
        }
        return Ok(m);
    }
    let f = declared.ok_or_else(|| input_error("--field is required for text input"))?;
    Mat::parse_text(&f, &t.replace(';', "\n")).map_err(input_error)
}

/// Entry point used by the binary.
pub fn main_exit_code() -> i32 {
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdin.lock(), &mut stdout.lock(), &mut stderr.lock())
}
