use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use aggequiv::aggregation::{AggFn, AggregateValue};
use aggequiv::database::Database;
use aggequiv::engine::{self, EngineOptions, Status, Verdict};
use aggequiv::identity::{decide, OrderedIdentity};
use aggequiv::oracle::{self, decomposition, Counterexample};
use aggequiv::orderings::CompleteOrdering;
use aggequiv::quasilinear::equivalent_quasilinear;
use aggequiv::query::{term_size_pair, value_to_string, Domain, Parser, Query};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser as ClapParser, Subcommand};
use serde_json::{json, Value as Json};

const MAX_BASE: usize = 24;
const MAX_N: usize = 5;

#[derive(ClapParser, Debug)]
#[command(name = "aggequiv", version, about = "Decide equivalence of aggregate queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Domain the queries range over: `int` or `rat`.
    #[arg(long, global = true, default_value = "rat")]
    domain: Domain,
    /// Print JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for the bounded search.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Run searches beyond the size guardrail.
    #[arg(long, global = true)]
    force: bool,
    /// Write the counterexample database to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Pair {
    /// One file with two queries, or two files with one query each.
    #[arg(num_args = 1..=2, required = true)]
    files: Vec<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Equivalence over all databases.
    Equiv(Pair),
    /// Equivalence over databases with at most N constants.
    Nequiv {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        n: usize,
    },
    /// N-equivalence at N = term size of the pair.
    LocalEquiv(Pair),
    /// Equivalence of quasilinear conjunctive queries.
    Quasilinear(Pair),
    /// Bag-set equivalence of queries without aggregates.
    BagsetEquiv(Pair),
    /// Evaluate a query on a database.
    Eval {
        query: PathBuf,
        #[arg(short = 'd', long = "database")]
        database: PathBuf,
    },
    /// Build and verify decompositions of a database for every group.
    CheckDecomposition {
        #[command(flatten)]
        pair: Pair,
        #[arg(short = 'd', long = "database")]
        database: PathBuf,
    },
    /// Decide an ordered identity such as `X < Y -> sum({X, Y}) = sum({Y, X})`.
    CheckIdentity { file: PathBuf },
    /// Exhaustive comparison on small databases.
    BruteForce {
        #[command(flatten)]
        pair: Pair,
        /// Largest carrier size searched.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Maximum number of candidate databases.
        #[arg(long, default_value_t = 1 << 20)]
        cap: u128,
    },
}

enum Outcome {
    Equivalent,
    NotEquivalent,
    Unsupported,
}

impl Outcome {
    fn code(&self) -> ExitCode {
        ExitCode::from(match self {
            Outcome::Equivalent => 0,
            Outcome::NotEquivalent => 1,
            Outcome::Unsupported => 2,
        })
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_pair(pair: &Pair, domain: Domain) -> Result<(Query, Query)> {
    let mut parser = Parser::new(domain);
    let mut queries = Vec::new();
    for f in &pair.files {
        let text = read(f)?;
        queries.extend(parser.queries(&text).map_err(|e| anyhow!("{}:{e}", f.display()))?);
    }
    match <[Query; 2]>::try_from(queries) {
        Ok([a, b]) => Ok((a, b)),
        Err(qs) => bail!("expected two queries, found {}", qs.len()),
    }
}

fn value_json(v: &Option<AggregateValue>) -> Json {
    v.as_ref().map_or(Json::Null, |v| Json::String(v.to_string()))
}

fn counterexample_json(c: &Counterexample) -> Json {
    json!({
        "facts": c.database.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
        "grouping": c.grouping.iter().map(value_to_string).collect::<Vec<_>>(),
        "values": { "q": value_json(&c.value_q), "q_prime": value_json(&c.value_q_prime) },
    })
}

struct Report<'a> {
    cli: &'a Cli,
    started: Instant,
}

impl Report<'_> {
    fn verdict(&self, v: &Verdict) -> Result<Outcome> {
        if let (Some(path), Some(c)) = (&self.cli.out, &v.counterexample) {
            fs::write(path, c.database.to_string()).with_context(|| format!("writing {}", path.display()))?;
        }
        if self.cli.json {
            let mut out = json!({
                "status": v.status.to_string(),
                "n_used": v.n_used,
                "timings": { "total_ms": self.started.elapsed().as_secs_f64() * 1000.0 },
            });
            if let Some(c) = &v.counterexample {
                out["counterexample"] = counterexample_json(c);
            }
            if let Some(r) = &v.reason {
                out["reason"] = json!(r);
            }
            println!("{out}");
        } else {
            match (&v.status, v.n_used) {
                (Status::Equivalent, Some(n)) => println!("equivalent (N = {n})"),
                (s, _) => println!("{}", s.to_string().replace('_', " ")),
            }
            if let Some(c) = &v.counterexample {
                println!("{c}");
                print!("{}", c.database);
            }
            if let Some(r) = &v.reason {
                println!("{r}");
            }
        }
        Ok(match v.status {
            Status::Equivalent => Outcome::Equivalent,
            Status::NotEquivalent => Outcome::NotEquivalent,
            Status::Unsupported => Outcome::Unsupported,
        })
    }

    fn options(&self) -> EngineOptions {
        EngineOptions { workers: self.cli.workers.map(|k| k as usize) }
    }

    fn guard(&self, q: &Query, q2: &Query, n: usize) -> Result<()> {
        let base = engine::base_size(q, q2, n);
        if !self.cli.force && (base > MAX_BASE || n > MAX_N) {
            bail!(
                "refusing to search: |BASE| = {base} and N = {n}; up to 2^{base} atom sets per ordering. \
                 Limits are |BASE| <= {MAX_BASE} and N <= {MAX_N}; pass --force to run anyway"
            );
        }
        Ok(())
    }
}

fn parse_identity(text: &str, domain: Domain) -> Result<OrderedIdentity> {
    let (order, rest) = text.split_once("->").ok_or_else(|| anyhow!("expected `ordering -> f(bag) = f(bag)`"))?;
    let mut parser = Parser::new(domain);
    let ordering = CompleteOrdering::from_classes(parser.ordering(order.trim())?, domain)?;
    let side = |s: &str| -> Result<(AggFn, Vec<Vec<aggequiv::query::Term>>, usize)> {
        let s = s.trim_start();
        let open = s.find('(').ok_or_else(|| anyhow!("expected `f(bag)`"))?;
        let f: AggFn = s[..open].trim().parse().map_err(|e: String| anyhow!(e))?;
        let mut depth = 0;
        for (i, ch) in s.char_indices().skip(open) {
            match ch {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        let bag = Parser::new(domain).bag(&s[open + 1..i])?;
                        return Ok((f, bag, s.len() - (i + 1)));
                    }
                }
                _ => {}
            }
        }
        bail!("unbalanced parentheses")
    };
    let (f, left, remaining) = side(rest)?;
    let tail = rest[rest.len() - remaining..].trim_start();
    let tail = tail.strip_prefix('=').ok_or_else(|| anyhow!("expected `=` between the two sides"))?;
    let (g, right, remaining) = side(tail)?;
    if f != g {
        bail!("both sides must use the same function");
    }
    if !tail[tail.len() - remaining..].trim().is_empty() {
        bail!("unexpected text after the identity");
    }
    Ok(OrderedIdentity::new(ordering, left, right, f)?)
}

fn print_results(q: &Query, db: &Database, as_json: bool) {
    let results = oracle::eval_concrete(q, db);
    if as_json {
        let rows: Vec<Json> = results
            .iter()
            .map(|(k, v)| json!({ "grouping": k.iter().map(value_to_string).collect::<Vec<_>>(), "value": v.to_string() }))
            .collect();
        println!("{}", json!({ "results": rows }));
    } else {
        for (k, v) in &results {
            println!("({}) {v}", k.iter().map(value_to_string).collect::<Vec<_>>().join(", "));
        }
    }
}

fn check_decomposition(q: &Query, q2: &Query, db: &Database, as_json: bool) -> Result<Outcome> {
    let mut keys: Vec<Vec<_>> = oracle::eval_concrete(q, db).into_keys().collect();
    keys.extend(oracle::eval_concrete(q2, db).into_keys());
    keys.sort();
    keys.dedup();
    let mut rows = Vec::new();
    let mut all_ok = true;
    for key in &keys {
        let family = decomposition::build_decomposition(db, q, q2, key);
        let failure = decomposition::verify_decomposition(&family, db, q, q2, key)?;
        all_ok &= failure.is_none();
        let key_text = key.iter().map(value_to_string).collect::<Vec<_>>().join(", ");
        if as_json {
            rows.push(json!({
                "grouping": key.iter().map(value_to_string).collect::<Vec<_>>(),
                "members": family.len(),
                "ok": failure.is_none(),
                "failure": failure.map(|f| format!("{f:?}")),
            }));
        } else {
            match failure {
                None => println!("({key_text}): {} members, properties hold", family.len()),
                Some(f) => println!("({key_text}): {} members, {f:?}", family.len()),
            }
        }
    }
    if as_json {
        println!("{}", json!({ "groups": rows, "ok": all_ok }));
    }
    Ok(if all_ok { Outcome::Equivalent } else { Outcome::NotEquivalent })
}

fn run(cli: &Cli) -> Result<Outcome> {
    let report = Report { cli, started: Instant::now() };
    let domain = cli.domain;
    match &cli.command {
        Command::Equiv(pair) => {
            let (q, q2) = load_pair(pair, domain)?;
            report.guard(&q, &q2, term_size_pair(&q, &q2))?;
            report.verdict(&engine::equivalent(&q, &q2, &report.options())?)
        }
        Command::Nequiv { pair, n } => {
            let (q, q2) = load_pair(pair, domain)?;
            report.guard(&q, &q2, *n)?;
            report.verdict(&engine::n_equivalent(&q, &q2, *n, &report.options())?)
        }
        Command::LocalEquiv(pair) => {
            let (q, q2) = load_pair(pair, domain)?;
            report.guard(&q, &q2, term_size_pair(&q, &q2))?;
            report.verdict(&engine::locally_equivalent(&q, &q2, &report.options())?)
        }
        Command::Quasilinear(pair) => {
            let (q, q2) = load_pair(pair, domain)?;
            report.verdict(&equivalent_quasilinear(&q, &q2, &report.options())?)
        }
        Command::BagsetEquiv(pair) => {
            let (q, q2) = load_pair(pair, domain)?;
            report.guard(&q, &q2, term_size_pair(&q, &q2))?;
            report.verdict(&engine::bagset_equivalent(&q, &q2, &report.options())?)
        }
        Command::Eval { query, database } => {
            let mut parser = Parser::new(domain);
            let q = parser.query_text(&read(query)?).map_err(|e| anyhow!("{}:{e}", query.display()))?;
            let db = parser.database(&read(database)?).map_err(|e| anyhow!("{}:{e}", database.display()))?;
            print_results(&q, &db, cli.json);
            Ok(Outcome::Equivalent)
        }
        Command::CheckDecomposition { pair, database } => {
            let (q, q2) = load_pair(pair, domain)?;
            let db = Parser::new(domain).database(&read(database)?).map_err(|e| anyhow!("{}:{e}", database.display()))?;
            check_decomposition(&q, &q2, &db, cli.json)
        }
        Command::CheckIdentity { file } => {
            let id = parse_identity(&read(file)?, domain)?;
            let v = decide(&id)?;
            let witness = v.witness.as_ref().map(|w| {
                w.iter().map(|(t, x)| (t.to_string(), Json::String(value_to_string(x)))).collect::<serde_json::Map<_, _>>()
            });
            if cli.json {
                println!("{}", json!({ "identity": id.to_string(), "valid": v.valid, "witness": witness }));
            } else {
                println!("{}", if v.valid { "valid" } else { "invalid" });
                if let Some(w) = &v.witness {
                    for (t, x) in w {
                        println!("{t} = {}", value_to_string(x));
                    }
                }
            }
            Ok(if v.valid { Outcome::Equivalent } else { Outcome::NotEquivalent })
        }
        Command::BruteForce { pair, n, cap } => {
            let (q, q2) = load_pair(pair, domain)?;
            let pool = oracle::matched_pool(&q, &q2, *n);
            let found = oracle::brute_force_check(&q, &q2, &pool, *n, *cap)?;
            let status = if found.is_some() { Status::NotEquivalent } else { Status::Equivalent };
            report.verdict(&Verdict { status, counterexample: found, n_used: Some(*n), reason: None })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(64) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(outcome) => outcome.code(),
        Err(e) => {
            if cli.json {
                println!("{}", json!({ "status": "error", "error": format!("{e:#}") }));
            }
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
