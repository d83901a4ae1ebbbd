mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use nielsen::action::{
    certify_alt_or_sym, induced_generators, k_transitivity, orbit_partition, CertifyOptions,
    Verdict, DEFAULT_STATE_BUDGET,
};
use nielsen::connect::{connect_basis, connect_stabilizing, ConnectOptions};
use nielsen::laws::{find_law_on, kernel_element, KernelOptions, LawDomain};
use nielsen::tuples::{
    build_matrix, d_power_by, hall_check, spread_witness, ClassTable, GenMatrix, MatrixOptions,
    DEFAULT_TUPLE_BUDGET,
};
use nielsen::{load, Elem, Error, FiniteGroup, Word};

use output::{render, Format};

#[derive(Parser, Debug)]
#[command(
    name = "nielsen",
    version,
    about = "Nielsen moves on generating tuples of finite groups"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Group: A5, S4, C5, D4, Q8, PSL2(7), products like C2xC2, or table:<path>.
    #[arg(long, global = true, default_value = "A5")]
    group: String,
    /// Tuple length n.
    #[arg(long, global = true, default_value_t = 3)]
    rank: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 picks the number of cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Directory holding cached class tables.
    #[arg(long, global = true, env = "CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Cap on states for tuple-space walks and word searches.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    budget_states: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Leave wall-clock and cache provenance out of the report.
    #[arg(long, global = true)]
    no_timings: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count classes of generating n-tuples up to automorphism.
    Classes {
        /// Also list the class representatives.
        #[arg(long)]
        list: bool,
    },
    /// Orbits of the Nielsen moves on the classes.
    Orbits,
    /// Whether the induced action is k-transitive.
    Ktrans {
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Hall criterion for a matrix whose columns are separated by `;`.
    Hall {
        #[arg(long)]
        columns: String,
    },
    /// An element generating with each of the given elements.
    Spread {
        #[arg(long)]
        elements: String,
    },
    /// Least number of generators of G^k.
    Dpower {
        #[arg(long)]
        k: u64,
    },
    /// Greedy matrix with pairwise generating entries and distinct row triples.
    Matrix {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 10_000_000)]
        max_steps: u64,
    },
    /// Nielsen moves between two generating tuples.
    Connect {
        /// Source tuple (random, led by a generating pair, when omitted).
        #[arg(long)]
        from: Option<String>,
        /// Target tuple (random, led by a generating pair, when omitted).
        #[arg(long)]
        to: Option<String>,
        #[arg(long)]
        max_word_len: Option<usize>,
    },
    /// Moves fixing all but the last column of a matrix and sending the last to a target.
    ConnectStab {
        /// Matrix JSON file; built with `matrix` settings when omitted.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Target tuple (random, outside the fixed classes, when omitted).
        #[arg(long)]
        to: Option<String>,
        #[arg(long)]
        max_word_len: Option<usize>,
    },
    /// Shortest two-letter law of the group.
    Law {
        #[arg(long, default_value_t = 8)]
        max_word_len: usize,
        /// Require the law only on generating pairs.
        #[arg(long)]
        generating_pairs: bool,
    },
    /// The automorphism x_n -> x_n w(x_1, x_2) and whether it moves any tuple.
    Kernel {
        /// Word in x1, x2 as signed letters, e.g. "1 2 -1 -2".
        #[arg(long)]
        word: String,
    },
    /// Decide whether the induced action is alternating or symmetric.
    Certify,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(anyhow::Error),
    Negative(anyhow::Error),
    Crash(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        use Error::*;
        match e {
            GroupSpec(_)
            | Unsupported(_)
            | MalformedTable { .. }
            | InvalidElement { .. }
            | RankMismatch { .. }
            | LetterOutOfRange { .. }
            | InvalidMove(_)
            | Parse { .. }
            | Invalid(_) => Failure::Usage(e.into()),
            Budget(_)
            | NotSimple
            | Unreachable { .. }
            | NoGeneratingPair(_)
            | NoSpreadWitness(_)
            | CliqueTooSmall { .. }
            | Exhausted { .. }
            | Verification(_)
            | NoAdmissibleZ
            | ForbiddenConfiguration => Failure::Negative(e.into()),
            Io { .. } | Cache(_) | Internal(_) => Failure::Crash(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Crash(e)
    }
}

/// A report plus whether it records a negative outcome.
struct Outcome {
    report: Value,
    negative: bool,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome {
            report,
            negative: false,
        }
    }
}

struct Run<'a> {
    common: &'a Common,
    group: &'a FiniteGroup,
    /// Provenance of each class table used, for the timings block.
    tables: Vec<Value>,
}

impl<'a> Run<'a> {
    fn tuple_budget(&self) -> u64 {
        self.common.budget_states.unwrap_or(DEFAULT_TUPLE_BUDGET)
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.common.seed)
    }

    fn cache_path(&self, rank: usize) -> Option<PathBuf> {
        let dir = self.common.cache_dir.clone().or_else(default_cache_dir)?;
        Some(dir.join(ClassTable::cache_file_name(self.group.spec(), rank)))
    }

    /// Loads the class table from the cache, building and saving it on a miss.
    fn table(&mut self, rank: usize) -> Result<ClassTable<'a>, Failure> {
        let path = self.cache_path(rank);
        if let Some(p) = path.as_deref().filter(|p| p.exists()) {
            match ClassTable::load(self.group, rank, p) {
                Ok(t) => {
                    self.tables.push(json!({"rank": rank, "source": "cache"}));
                    return Ok(t);
                }
                Err(e) => eprintln!("warning: ignoring cache {}: {e}", p.display()),
            }
        }
        let table = ClassTable::build(self.group, rank, self.tuple_budget())?;
        if let Some(p) = path {
            if let Some(dir) = p.parent() {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
            table.save(&p)?;
        }
        self.tables.push(json!({"rank": rank, "source": "built"}));
        Ok(table)
    }
}

fn default_cache_dir() -> Option<PathBuf> {
    std::env::var_os("XDG_CACHE_HOME")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("HOME").map(|h| Path::new(&h).join(".cache")))
        .map(|d| d.join("nielsen"))
}

fn parse_tuple(group: &FiniteGroup, text: &str) -> Result<Vec<Elem>, Failure> {
    let t = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<Elem>().map_err(|_| Error::Parse {
                what: "element id",
                text: s.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    group.check_elements(&t)?;
    Ok(t)
}

/// A uniform random tuple whose first two entries generate `G`.
fn random_led_by_pair(
    group: &FiniteGroup,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Elem>, Failure> {
    if n < 2 || group.rank() > 2 {
        return Err(Error::Invalid(format!("no {n}-tuple starting with a generating pair")).into());
    }
    loop {
        let t: Vec<Elem> = (0..n)
            .map(|_| rng.gen_range(0..group.order() as Elem))
            .collect();
        if group.generates_pair(t[0], t[1]) {
            return Ok(t);
        }
    }
}

fn random_generating(
    group: &FiniteGroup,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Elem>, Failure> {
    if n < group.rank() {
        return Err(Error::Invalid(format!(
            "no generating {n}-tuples: rank of the group is {}",
            group.rank()
        ))
        .into());
    }
    loop {
        let t: Vec<Elem> = (0..n)
            .map(|_| rng.gen_range(0..group.order() as Elem))
            .collect();
        if group.generates(&t) {
            return Ok(t);
        }
    }
}

fn connect_options(max_states: Option<u64>) -> ConnectOptions {
    let mut opts = ConnectOptions::default();
    if let Some(s) = max_states {
        opts.word.max_states = s;
    }
    opts
}

/// Rejects results whose stage words exceed the requested length.
fn check_word_lengths(
    stages: &[nielsen::connect::Stage],
    max: Option<usize>,
) -> Result<(), Failure> {
    if let Some(max) = max {
        if let Some(s) = stages
            .iter()
            .find(|s| s.word.split_whitespace().count() > max)
        {
            return Err(Failure::Negative(anyhow::anyhow!(
                "stage `{}` needs a word longer than {max}",
                s.label
            )));
        }
    }
    Ok(())
}

fn execute(run: &mut Run<'_>, command: &Command) -> Result<Outcome, Failure> {
    let c = run.common;
    let spec = run.group.spec().to_string();
    Ok(match command {
        Command::Classes { list } => {
            let table = run.table(c.rank)?;
            let mut report = json!({
                "group": spec,
                "rank": c.rank,
                "classes": table.len(),
                "tuples": table.tuple_count(),
                "free_action": table.free_action(),
            });
            if *list {
                report["representatives"] = json!(table.representatives().collect::<Vec<_>>());
            }
            Outcome::ok(report)
        }
        Command::Orbits => {
            let table = run.table(c.rank)?;
            let action = induced_generators(&table)?;
            let orbits = orbit_partition(&action);
            Outcome::ok(json!({
                "group": spec,
                "rank": c.rank,
                "classes": table.len(),
                "orbits": orbits.len(),
                "orbit_sizes": orbits.iter().map(Vec::len).collect::<Vec<_>>(),
                "orbit_representatives": orbits.iter().map(|o| o[0]).collect::<Vec<_>>(),
            }))
        }
        Command::Ktrans { k } => {
            let budget = c.budget_states.unwrap_or(DEFAULT_STATE_BUDGET);
            let table = run.table(c.rank)?;
            let action = induced_generators(&table)?;
            let kt = k_transitivity(&action, *k, budget)?;
            Outcome {
                negative: !kt.transitive,
                report: json!({"group": spec, "rank": c.rank, "classes": table.len(), "result": kt}),
            }
        }
        Command::Hall { columns } => {
            let cols = columns
                .split(';')
                .map(|col| parse_tuple(run.group, col))
                .collect::<Result<Vec<_>, _>>()?;
            let m = GenMatrix::from_columns(run.group, &cols)?;
            let budget = c.budget_states.unwrap_or(1 << 30);
            let r = hall_check(run.group, &m, budget)?;
            Outcome {
                negative: !r.diagonal_surjective,
                report: json!({"group": spec, "matrix": m, "result": r}),
            }
        }
        Command::Spread { elements } => {
            let gs = parse_tuple(run.group, elements)?;
            let w = spread_witness(run.group, &gs);
            Outcome {
                negative: w.is_none(),
                report: json!({"group": spec, "elements": gs, "witness": w}),
            }
        }
        Command::Dpower { k } => {
            let group = run.group;
            let mut counts = |n: usize| -> nielsen::Result<u64> {
                run.table(n).map(|t| t.len() as u64).map_err(|f| match f {
                    Failure::Usage(e) | Failure::Negative(e) | Failure::Crash(e) => e
                        .downcast::<Error>()
                        .unwrap_or_else(|e| Error::Cache(e.to_string())),
                })
            };
            let d = d_power_by(group, *k, &mut counts)?;
            Outcome::ok(json!({"group": spec, "result": d}))
        }
        Command::Matrix { k, max_steps } => {
            let opts = MatrixOptions {
                seed: c.seed,
                max_steps: *max_steps,
                ..MatrixOptions::default()
            };
            let (m, ledger) = build_matrix(run.group, c.rank, *k, &opts)?;
            Outcome::ok(json!({"group": spec, "seed": c.seed, "matrix": m, "ledger": ledger}))
        }
        Command::Connect {
            from,
            to,
            max_word_len,
        } => {
            let mut rng = run.rng();
            let g = match from {
                Some(t) => parse_tuple(run.group, t)?,
                None => random_led_by_pair(run.group, c.rank, &mut rng)?,
            };
            let h = match to {
                Some(t) => parse_tuple(run.group, t)?,
                None => random_led_by_pair(run.group, g.len(), &mut rng)?,
            };
            let res = connect_basis(run.group, &g, &h, &connect_options(c.budget_states))?;
            check_word_lengths(&res.stages, *max_word_len)?;
            Outcome {
                negative: !res.verified,
                report: json!({"group": spec, "seed": c.seed, "result": res}),
            }
        }
        Command::ConnectStab {
            matrix,
            k,
            to,
            max_word_len,
        } => {
            let a = match matrix {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))
                        .map_err(Failure::Usage)?;
                    let m = GenMatrix::from_json(&text)?;
                    m.check(run.group)?;
                    m
                }
                None => {
                    let opts = MatrixOptions {
                        seed: c.seed,
                        ..MatrixOptions::default()
                    };
                    build_matrix(run.group, c.rank, *k, &opts)?.0
                }
            };
            let mut rng = run.rng();
            let h = match to {
                Some(t) => parse_tuple(run.group, t)?,
                None => {
                    let auts = run.group.automorphisms()?;
                    let fixed: Vec<Vec<Elem>> = a.columns()[..a.cols() - 1]
                        .iter()
                        .map(|col| auts.canonical(col))
                        .collect();
                    loop {
                        let h = random_generating(run.group, a.rows(), &mut rng)?;
                        if !fixed.contains(&auts.canonical(&h)) {
                            break h;
                        }
                    }
                }
            };
            let res = connect_stabilizing(run.group, &a, &h, &connect_options(c.budget_states))?;
            check_word_lengths(&res.stages, *max_word_len)?;
            Outcome {
                negative: !res.verified,
                report: json!({"group": spec, "seed": c.seed, "matrix": a, "result": res}),
            }
        }
        Command::Law {
            max_word_len,
            generating_pairs,
        } => {
            let domain = if *generating_pairs {
                LawDomain::GeneratingPairs
            } else {
                LawDomain::AllPairs
            };
            let r = find_law_on(run.group, *max_word_len, domain);
            Outcome {
                negative: r.is_none(),
                report: json!({
                    "group": spec,
                    "domain": domain,
                    "max_len": max_word_len,
                    "found": r.is_some(),
                    "law": r,
                }),
            }
        }
        Command::Kernel { word } => {
            let w = Word::parse(word, 2)?;
            let opts = KernelOptions {
                seed: c.seed,
                exhaustive_budget: c
                    .budget_states
                    .unwrap_or(KernelOptions::default().exhaustive_budget),
                ..KernelOptions::default()
            };
            let k = kernel_element(run.group, &w, c.rank, &opts)?;
            Outcome::ok(json!({
                "group": spec,
                "rank": c.rank,
                "word": w,
                "images": k.symbolic.iter().map(Word::pretty).collect::<Vec<_>>(),
                "result": k,
            }))
        }
        Command::Certify => {
            let table = run.table(c.rank)?;
            let action = induced_generators(&table)?;
            let cert = certify_alt_or_sym(
                &action,
                &CertifyOptions {
                    seed: c.seed,
                    ..CertifyOptions::default()
                },
            );
            Outcome {
                negative: !matches!(cert.verdict, Verdict::Alternating | Verdict::Symmetric),
                report: json!({"group": spec, "rank": c.rank, "result": cert}),
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if cli.common.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.common.threads)
            .build_global()
        {
            eprintln!("warning: {e}");
        }
    }
    let start = Instant::now();
    let result = load(&cli.common.group)
        .map_err(Failure::from)
        .and_then(|group| {
            let mut run = Run {
                common: &cli.common,
                group: &group,
                tables: Vec::new(),
            };
            let mut outcome = execute(&mut run, &cli.command)?;
            if !cli.common.no_timings {
                outcome.report["timings"] = json!({
                    "elapsed_ms": start.elapsed().as_millis() as u64,
                    "class_tables": run.tables,
                });
            }
            Ok(outcome)
        });
    match result {
        Ok(outcome) => {
            print!("{}", render(&outcome.report, cli.common.format));
            ExitCode::from(u8::from(outcome.negative))
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Negative(e)) => {
            eprintln!("{e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Crash(e)) => {
            eprintln!("fatal: {e:#}");
            ExitCode::from(3)
        }
    }
}
