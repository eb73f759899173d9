//! The `ntt` command line: argument handling, dispatch and output rendering.

use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ntt_core::behavior;
use ntt_core::bisim::{self, Pool};
use ntt_core::predicate::{self, parse_pred, Env, EvalParams};
use ntt_core::print::{print_term, print_term_bare};
use ntt_core::rewrite::explore;
use ntt_core::syntax::elab::parse_term_in;
use ntt_core::syntax::raw::parse_sort_str;
use ntt_core::theories::{load_theory, morphism::load_morphism};
use ntt_core::universe::UniverseParams;
use ntt_core::{validate_theory, Error, Sort, Term, Theory};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "ntt", version, about = "Native type systems for λ-theories with rewrite semantics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a theory presentation and list its diagnostics.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Explore the rewrites of a term.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        term: String,
    },
    /// Evaluate a predicate on a term.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        term: String,
        #[arg(long)]
        pred: String,
    },
    /// Decide bisimilarity of two processes on their act system.
    Bisim {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        /// Depth of output payloads in observation contexts.
        #[arg(long, default_value_t = bisim::DEFAULT_PAYLOAD_DEPTH)]
        payload_depth: usize,
    },
    /// Translate a term along a theory morphism.
    Translate {
        #[arg(long)]
        morphism: String,
        #[arg(long)]
        term: String,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        timing: bool,
    },
    /// List the universe terms satisfying a predicate.
    Query {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pred: String,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Built-in theory name, theory file, or a name found on NTT_THEORY_PATH.
    #[arg(long)]
    pub theory: String,
    /// Rewrite steps to explore.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Node cap for explorations.
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub universe_depth: usize,
    /// Fresh names added to the universe name pool.
    #[arg(long, default_value_t = 2)]
    pub name_pool: usize,
    /// Toggle an optional equation or rule: NAME, NAME=on or NAME=off.
    #[arg(long = "flag")]
    pub flags: Vec<String>,
    /// Sort of the subject term or query.
    #[arg(long)]
    pub sort: Option<String>,
    #[arg(long)]
    pub json: bool,
    /// Include wall-clock time in the output.
    #[arg(long)]
    pub timing: bool,
}

/// What a command produced: the JSON payload, its text rendering and the exit status.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => 2,
        Error::ResourceCap(_) => 4,
        e if e.is_sort_error() => 3,
        _ => 1,
    }
}

struct Rendered {
    json: Value,
    text: String,
}

/// Runs one command line (without the program name).
pub fn run<I: IntoIterator<Item = String>>(args: I) -> Outcome {
    let cli = match Cli::try_parse_from(std::iter::once("ntt".to_string()).chain(args)) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let s = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: s, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: s }
            };
        }
    };
    let (json_mode, timing) = match &cli.command {
        Command::Translate { json, timing, .. } => (*json, *timing),
        Command::Validate { common }
        | Command::Trace { common, .. }
        | Command::Check { common, .. }
        | Command::Bisim { common, .. }
        | Command::Query { common, .. } => (common.json, common.timing),
    };
    let start = Instant::now();
    match dispatch(&cli.command) {
        Ok(mut r) => {
            let stdout = if json_mode {
                if let Value::Object(m) = &mut r.json {
                    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
                    if timing {
                        m.insert("elapsed_ms".into(), json!(start.elapsed().as_millis() as u64));
                    }
                }
                format!("{}\n", serde_json::to_string(&r.json).unwrap())
            } else {
                if timing {
                    r.text.push_str(&format!("elapsed: {} ms\n", start.elapsed().as_millis()));
                }
                r.text
            };
            Outcome { code: 0, stdout, stderr: String::new() }
        }
        Err(e) => {
            let code = exit_code(&e);
            let stdout = if json_mode {
                format!(
                    "{}\n",
                    json!({"schema_version": SCHEMA_VERSION, "error": {"code": code, "message": e.to_string()}})
                )
            } else {
                String::new()
            };
            Outcome { code, stdout, stderr: format!("error: {e}\n") }
        }
    }
}

fn theory(c: &Common) -> Result<Theory, Error> {
    let mut th = load_theory(&c.theory)?;
    for f in &c.flags {
        let (n, on) = match f.split_once('=') {
            Some((n, "on")) => (n, true),
            Some((n, "off")) => (n, false),
            Some((_, v)) => return Err(Error::parse(0, format!("flag value must be on or off, found `{v}`"))),
            None => (f.as_str(), true),
        };
        th.set_flag(n, on)?;
    }
    Ok(th)
}

fn sort_arg(c: &Common) -> Result<Option<Sort>, Error> {
    c.sort.as_deref().map(parse_sort_str).transpose()
}

fn params(c: &Common) -> EvalParams {
    let mut p = EvalParams {
        universe: UniverseParams { depth: c.universe_depth, fresh_names: c.name_pool, ..Default::default() },
        ..Default::default()
    };
    if let Some(d) = c.depth {
        p.explore_depth = d;
    }
    if let Some(k) = c.cap {
        p.explore_cap = k;
    }
    p
}

fn dispatch(cmd: &Command) -> Result<Rendered, Error> {
    match cmd {
        Command::Validate { common } => {
            let th = ntt_core::theories::resolve_theory(&common.theory)?;
            let diags = validate_theory(&th);
            let text = if diags.is_empty() {
                format!("{}: ok\n", th.name)
            } else {
                diags.iter().map(|d| format!("{d}\n")).collect()
            };
            let list: Vec<Value> =
                diags.iter().map(|d| json!({"location": d.location, "reason": d.reason})).collect();
            Ok(Rendered { json: json!({"command": "validate", "theory": th.name, "diagnostics": list}), text })
        }
        Command::Trace { common, term } => {
            let th = theory(common)?;
            let t = parse_term_in(&th, term, sort_arg(common)?.as_ref())?;
            let g = explore(&th, &t, common.depth.unwrap_or(5), common.cap.unwrap_or(1000));
            let nodes: Vec<String> = g.nodes.iter().map(|n| print_term(&th, n)).collect();
            let edges: Vec<Value> = g
                .edges
                .iter()
                .map(|e| {
                    let pos: Vec<String> = e.step.position.iter().map(|(f, i)| format!("{f}.{i}")).collect();
                    json!({"rule": e.step.rule.to_string(), "from": e.from, "to": e.to, "position": pos})
                })
                .collect();
            let mut text = String::new();
            for (i, n) in nodes.iter().enumerate() {
                let mark = if g.expanded[i] { "" } else { "  (frontier)" };
                text.push_str(&format!("[{i}] {n}{mark}\n"));
            }
            for e in &g.edges {
                text.push_str(&format!("{} --{}--> {}\n", e.from, e.step.rule, e.to));
            }
            let json = json!({
                "command": "trace",
                "theory": th.name,
                "nodes": nodes,
                "edges": edges,
                "exhausted": g.exhausted(),
                "bounded": !g.exhausted() || g.cap_hit,
            });
            Ok(Rendered { json, text })
        }
        Command::Check { common, term, pred } => {
            let th = theory(common)?;
            let t = parse_term_in(&th, term, sort_arg(common)?.as_ref())?;
            let s = th.sort_of(&[], &t)?;
            let (p, _) = parse_pred(&th, pred, Some(&s))?;
            let env = Env::new(&th, params(common), &Env::seeds_for(&p, &[t.clone()]));
            let out = behavior::check(&env, &p, &t)?;
            let witness: Vec<String> =
                out.witness.as_deref().map(|w| behavior::render_witness(&env, w)).unwrap_or_default();
            let mut text = format!("{}{}\n", out.value, if out.bounded { " (bounded)" } else { "" });
            for w in &witness {
                text.push_str(&format!("  {w}\n"));
            }
            let json = json!({
                "command": "check",
                "theory": th.name,
                "term": print_term(&th, &env.canon(&t)),
                "result": out.value,
                "bounded": out.bounded,
                "witness": witness,
            });
            Ok(Rendered { json, text })
        }
        Command::Bisim { common, left, right, payload_depth } => {
            let th = theory(common)?;
            let s = sort_arg(common)?;
            let p = parse_term_in(&th, left, s.as_ref())?;
            let q = parse_term_in(&th, right, s.as_ref())?;
            let pool = Pool::new(&th, &[p.clone(), q.clone()], common.name_pool, *payload_depth)?;
            let r = bisim::bisimilar(&th, &p, &q, &pool, common.depth.unwrap_or(2), common.cap.unwrap_or(2000))?;
            let labels: Vec<String> = r.distinguishing.iter().map(|l| l.render(&th)).collect();
            let mut text = format!("{}{}\n", if r.bisimilar { "bisimilar" } else { "not bisimilar" }, bound_note(r.bounded));
            for l in &labels {
                text.push_str(&format!("  {l}\n"));
            }
            let json = json!({
                "command": "bisim",
                "theory": th.name,
                "bisimilar": r.bisimilar,
                "distinguishing": labels,
                "bounded": r.bounded,
                "states": r.states,
            });
            Ok(Rendered { json, text })
        }
        Command::Translate { morphism, term, .. } => {
            let m = load_morphism(morphism)?;
            let t = parse_term_in(&m.source, term, None)?;
            let u = m.translate(&t)?;
            let s = m.target.sort_of(&[], &u)?;
            let printed = print_term(&m.target, &u);
            let text = format!("{printed}\n");
            let json = json!({
                "command": "translate",
                "morphism": m.name,
                "source": print_term(&m.source, &t),
                "term": printed,
                "sort": s.to_string(),
            });
            Ok(Rendered { json, text })
        }
        Command::Query { common, pred } => {
            let th = theory(common)?;
            let sort = match sort_arg(common)? {
                Some(s) => s,
                None => default_sort(&th),
            };
            let (p, _) = parse_pred(&th, pred, Some(&sort))?;
            let env = Env::new(&th, params(common), &Env::seeds_for(&p, &[]));
            let hits = predicate::comprehend(&env, &p, &sort)?;
            let total = env.universe.terms(&sort)?.len();
            let terms: Vec<String> = hits.iter().map(|t| print_term_bare(&th, t)).collect();
            let mut text = format!("{} of {} terms{}\n", hits.len(), total, bound_note(env.bounded.get()));
            for t in &terms {
                text.push_str(&format!("  {t}\n"));
            }
            let json = json!({
                "command": "query",
                "theory": th.name,
                "sort": sort.to_string(),
                "universe": total,
                "terms": terms,
                "bounded": env.bounded.get(),
            });
            Ok(Rendered { json, text })
        }
    }
}

fn bound_note(b: bool) -> &'static str {
    if b {
        " (bounded)"
    } else {
        ""
    }
}

/// The first sort that is not a sort of names.
fn default_sort(th: &Theory) -> Sort {
    th.sorts
        .iter()
        .find(|d| !d.names)
        .map(|d| Sort::Base(d.name.clone()))
        .unwrap_or_else(|| Sort::base("P"))
}

/// Printed form of a term, for callers that want the CLI's rendering.
pub fn show(th: &Theory, t: &Term) -> String {
    print_term(th, t)
}
