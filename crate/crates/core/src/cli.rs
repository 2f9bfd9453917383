//! Command-line front end. [`run`] returns the exit status and the report
//! instead of printing, so tests can drive it directly.
//!
//! Exit status: 0 success, 1 nothing found, 2 budget exhausted, 3 usage or
//! input error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{self, Budget, Evaluation, Shape};
use crate::error::{Error, Result};
use crate::model::{p_tau, Fim, TupleMode, Vocabulary};
use crate::polyramsey::{solve_polyramsey, PolySpec, RingColouring, Zq};
use crate::reductions::{arity_reduce_and_lift, collapse_and_lift, ArityReduction, CollapseStep, LiftOutcome};
use crate::search::{exact_partition_number, find_mono_line, ExactOptions, PartitionNumber};
use crate::space::{
    enumerate_lines, line_count, seeded_base_invariant, splitmix64, AlphabetSeq, Colouring, Space, TypeSet,
};

#[derive(Parser, Debug)]
#[command(name = "hj", version, about = "Partition theorems for index models: search, reductions and bounds")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Seed for every seeded colouring.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Tsv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Types {
    Full,
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ReduceKind {
    Arity,
    Collapse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BoundKind {
    F1,
    Legacy,
    F0,
    F6,
    F6star,
    F7,
    Multi,
    F4,
    F2,
    F3,
    Hj,
    Ram,
}

/// Vocabulary, alphabets and mode, from flags or a config file.
#[derive(Args, Debug, Clone)]
struct Instance {
    /// Vocabulary text: `name arity` entries separated by `;`, or `canonical t`.
    #[arg(long)]
    vocab: Option<String>,
    /// One alphabet size for every symbol, or a comma list per symbol.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    /// Line-oriented `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lists the elements of a fim.
    Model {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        k: Option<u32>,
    },
    /// Counts (and optionally lists) the combinatorial lines of a space.
    Lines {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        list: bool,
    },
    /// Finds a monochromatic line under a seeded or file colouring.
    Search {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        c: Option<u64>,
        /// Colouring file; a seeded colouring otherwise.
        #[arg(long)]
        colouring: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Types::Full)]
        types: Types,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Exact partition number by exhaustive colouring search.
    Exact {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        c: Option<u64>,
        #[arg(long, value_enum, default_value_t = Types::Full)]
        types: Types,
        #[arg(long, default_value_t = 4)]
        k_max: u32,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = 4096)]
        max_points: u64,
    },
    /// Runs a reduction on a seeded base-invariant colouring and lifts the
    /// line back.
    Reduce {
        #[command(flatten)]
        inst: Instance,
        #[arg(long, value_enum, default_value_t = ReduceKind::Arity)]
        kind: ReduceKind,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        c: Option<u64>,
        /// Invariance depth of the collapse step.
        #[arg(long, default_value_t = 0)]
        ell: u32,
        /// Dimension of the collapsed subspace.
        #[arg(long)]
        k0: Option<u32>,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Evaluates a bound recursion.
    Bound {
        #[command(flatten)]
        inst: Instance,
        #[arg(long, value_enum, default_value_t = BoundKind::F1)]
        kind: BoundKind,
        #[arg(long)]
        c: Option<u64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        t: Option<u64>,
        #[arg(long)]
        l: Option<u64>,
        #[arg(long)]
        j: Option<u64>,
        /// Print the recursion tree.
        #[arg(long)]
        trace: bool,
        /// Print the hierarchy class.
        #[arg(long)]
        class: bool,
        #[arg(long)]
        max_bits: Option<u64>,
        #[arg(long)]
        max_steps: Option<u64>,
    },
    /// Polynomial patterns over Z_q.
    Polyramsey {
        #[arg(long)]
        q: u64,
        /// One letter per line, coefficients ascending, coordinates split by `|`.
        #[arg(long)]
        polys: PathBuf,
        /// `seed:<c>` (uses --seed) or `table:<c>:<colour>,<colour>,...`.
        #[arg(long)]
        colour: String,
        /// Comma list r_1,...,r_k.
        #[arg(long)]
        r: String,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Runs the quick invariant suites.
    Selftest,
}

/// Values read from a config file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    pub vocab: Option<String>,
    pub alpha: Option<String>,
    pub mode: Option<String>,
    pub k: Option<u32>,
    pub c: Option<u64>,
    pub budget: Option<u64>,
    pub max_bits: Option<u64>,
    pub max_steps: Option<u64>,
}

impl Config {
    /// `key = value` per line; `#` starts a comment. The vocabulary value uses
    /// `;` between entries.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let (key, value) =
                line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim().to_string());
            let num = |v: &str| v.parse::<u64>().map_err(|_| err(format!("`{v}` is not a nonnegative integer")));
            match key {
                "vocab" => cfg.vocab = Some(value),
                "alpha" => cfg.alpha = Some(value),
                "mode" => cfg.mode = Some(value),
                "k" => cfg.k = Some(u32::try_from(num(&value)?).map_err(|_| err("k is too large".into()))?),
                "c" => cfg.c = Some(num(&value)?),
                "budget" => cfg.budget = Some(num(&value)?),
                "max-bits" => cfg.max_bits = Some(num(&value)?),
                "max-steps" => cfg.max_steps = Some(num(&value)?),
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        Ok(cfg)
    }
}

struct Resolved {
    vocab: Arc<Vocabulary>,
    alpha: AlphabetSeq,
    mode: TupleMode,
    cfg: Config,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))
}

fn parse_alpha(vocab: &Vocabulary, text: &str) -> Result<AlphabetSeq> {
    let bad = |t: &str| Error::Precondition(format!("alphabet size `{t}` is not a positive integer"));
    let sizes: Vec<u32> =
        text.split(',').map(|t| t.trim().parse().map_err(|_| bad(t.trim()))).collect::<Result<_>>()?;
    if sizes.len() == 1 {
        AlphabetSeq::uniform(vocab, sizes[0])
    } else {
        AlphabetSeq::new(vocab, sizes)
    }
}

fn resolve(inst: &Instance) -> Result<Resolved> {
    let cfg = match &inst.config {
        Some(p) => Config::parse(&read(p)?)?,
        None => Config::default(),
    };
    let vtext = inst
        .vocab
        .clone()
        .or_else(|| cfg.vocab.clone())
        .ok_or_else(|| Error::Precondition("missing --vocab".into()))?;
    let vocab = Arc::new(Vocabulary::parse(&vtext)?);
    let atext = inst.alpha.clone().or_else(|| cfg.alpha.clone()).unwrap_or_else(|| "2".into());
    let alpha = parse_alpha(&vocab, &atext)?;
    let mode = match inst.mode.clone().or_else(|| cfg.mode.clone()) {
        Some(m) => m.parse::<TupleMode>()?,
        None => TupleMode::default(),
    };
    Ok(Resolved { vocab, alpha, mode, cfg })
}

fn need<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Precondition(format!("missing --{name}")))
}

fn type_set(alpha: &AlphabetSeq, t: Types) -> TypeSet {
    match t {
        Types::Full => TypeSet::full(alpha),
        Types::Constant => TypeSet::constant(alpha),
    }
}

type Report = (i32, String);

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Report
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            return (code, e.to_string());
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => return (3, format!("error: cannot start {} workers: {e}\n", cli.jobs)),
    };
    pool.install(|| match dispatch(&cli) {
        Ok(r) => r,
        Err(Error::Budget { examined }) => (2, format!("BUDGET examined={examined}\n")),
        Err(e) => (3, format!("error: {e}\n")),
    })
}

fn dispatch(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Model { inst, k } => model(cli, inst, *k),
        Command::Lines { inst, k, list } => lines(cli, inst, *k, *list),
        Command::Search { inst, k, c, colouring, types, budget } => {
            search(cli, inst, *k, *c, colouring.as_deref(), *types, *budget)
        }
        Command::Exact { inst, c, types, k_max, budget, max_points } => {
            exact(inst, *c, *types, *k_max, *budget, *max_points)
        }
        Command::Reduce { inst, kind, k, c, ell, k0, budget } => reduce(cli, inst, *kind, *k, *c, *ell, *k0, *budget),
        Command::Bound { inst, kind, c, n, m, t, l, j, trace, class, max_bits, max_steps } => {
            let q = BoundQuery { kind: *kind, c: *c, n: *n, m: *m, t: *t, l: *l, j: *j };
            bound(inst, q, *trace, *class, *max_bits, *max_steps)
        }
        Command::Polyramsey { q, polys, colour, r, t, budget } => {
            polyramsey(cli.seed, *q, polys, colour, r, *t, *budget)
        }
        Command::Selftest => Ok(selftest()),
    }
}

fn model(cli: &Cli, inst: &Instance, k: Option<u32>) -> Result<Report> {
    let res = resolve(inst)?;
    let k = need(k.or(res.cfg.k), "k")?;
    let fim = Fim::new(res.vocab.clone(), k, res.mode);
    let mut out = String::new();
    writeln!(
        out,
        "fim dim={k} mode={} elements={} p_tau={}",
        res.mode,
        fim.len(),
        p_tau(&res.vocab, k as u64, res.mode)
    )
    .unwrap();
    for i in 0..fim.len() {
        match cli.format {
            Format::Plain => writeln!(out, "{}", fim.render(i)).unwrap(),
            Format::Tsv => writeln!(out, "{i}\t{}\t{}", res.vocab.name(fim.symbol_of(i)), fim.render(i)).unwrap(),
        }
    }
    Ok((0, out))
}

fn lines(cli: &Cli, inst: &Instance, k: Option<u32>, list: bool) -> Result<Report> {
    let res = resolve(inst)?;
    let k = need(k.or(res.cfg.k), "k")?;
    let space = Space::build(res.vocab, k, res.mode, res.alpha)?;
    let mut out = format!("lines {}\n", line_count(&space));
    if list {
        for line in enumerate_lines(&space) {
            let (supp, fixed) = line.render(&space);
            match cli.format {
                Format::Plain => writeln!(out, "{supp} {fixed}").unwrap(),
                Format::Tsv => writeln!(out, "{supp}\t{fixed}").unwrap(),
            }
        }
    }
    Ok((0, out))
}

fn search(
    cli: &Cli,
    inst: &Instance,
    k: Option<u32>,
    c: Option<u64>,
    colouring: Option<&Path>,
    types: Types,
    budget: Option<u64>,
) -> Result<Report> {
    let res = resolve(inst)?;
    let k = need(k.or(res.cfg.k), "k")?;
    let space = Space::build(res.vocab, k, res.mode, res.alpha.clone())?;
    let d = match colouring {
        Some(p) => Colouring::read_from(read(p)?.as_bytes())?,
        None => Colouring::seeded(need(c.or(res.cfg.c), "c")?, cli.seed),
    };
    let budget = budget.or(res.cfg.budget).unwrap_or(u64::MAX);
    Ok(match find_mono_line(&space, &d, &type_set(&res.alpha, types), budget)? {
        Some((line, colour)) => {
            let (supp, fixed) = line.render(&space);
            (0, format!("FOUND supp={supp} fixed={fixed} colour={colour}\n"))
        }
        None => (1, "NONE\n".into()),
    })
}

fn exact(
    inst: &Instance,
    c: Option<u64>,
    types: Types,
    k_max: u32,
    budget: Option<u64>,
    max_points: u64,
) -> Result<Report> {
    let res = resolve(inst)?;
    let c = need(c.or(res.cfg.c), "c")?;
    let mut opts = ExactOptions { k_max, max_points, ..ExactOptions::default() };
    if let Some(b) = budget.or(res.cfg.budget) {
        opts.budget = b;
    }
    let ts = type_set(&res.alpha, types);
    let r = exact_partition_number(&res.vocab, &res.alpha, Some(&ts), c, res.mode, &opts)?;
    let code = match r {
        PartitionNumber::Exact(_) => 0,
        PartitionNumber::AtLeast(_) => 1,
        PartitionNumber::Budget { .. } => 2,
    };
    Ok((code, format!("{}\n", r.render())))
}

#[allow(clippy::too_many_arguments)]
fn reduce(
    cli: &Cli,
    inst: &Instance,
    kind: ReduceKind,
    k: Option<u32>,
    c: Option<u64>,
    ell: u32,
    k0: Option<u32>,
    budget: Option<u64>,
) -> Result<Report> {
    let res = resolve(inst)?;
    let k = need(k.or(res.cfg.k), "k")?;
    let c = need(c.or(res.cfg.c), "c")?;
    let budget = budget.or(res.cfg.budget).unwrap_or(u64::MAX);
    let space = Space::build(res.vocab.clone(), k, TupleMode::Multiset, res.alpha.clone())?;
    let mut out = String::new();
    match kind {
        ReduceKind::Arity => {
            let d = seeded_base_invariant(&space, k, c, cli.seed);
            let b = ArityReduction::new(&res.vocab, &res.alpha)?.bind(&space, TupleMode::Multiset)?;
            writeln!(out, "reduced space dim={} points={}", b.v_star.fim().dim(), b.v_star.size()).unwrap();
            let (code, what, line) = match arity_reduce_and_lift(&b, &d, budget)? {
                LiftOutcome::Lifted(l) => (0, "LIFTED", Some(l)),
                LiftOutcome::Broken(l) => (1, "BROKEN", Some(l)),
                LiftOutcome::NoInner => (1, "NONE", None),
            };
            match line {
                Some(l) => {
                    let (supp, fixed) = l.render(&space);
                    writeln!(out, "{what} supp={supp} fixed={fixed}").unwrap();
                }
                None => writeln!(out, "{what}").unwrap(),
            }
            Ok((code, out))
        }
        ReduceKind::Collapse => {
            let k0 = k0.unwrap_or(k);
            let d = seeded_base_invariant(&space, ell, c, cli.seed);
            let step = CollapseStep::new(&space, ell, k0, None, c)?;
            writeln!(out, "collapse k0={k0} k1={} c*={}", step.k1, step.c_star).unwrap();
            match collapse_and_lift(&step, &d, budget)? {
                Some(run) => {
                    let (supp, fixed) = run.line.render(&space);
                    let what = if run.mono { "LIFTED" } else { "BROKEN" };
                    writeln!(out, "subspace {}", run.subspace.render(&space)).unwrap();
                    writeln!(out, "{what} supp={supp} fixed={fixed}").unwrap();
                    Ok((if run.mono { 0 } else { 1 }, out))
                }
                None => {
                    writeln!(out, "NONE").unwrap();
                    Ok((1, out))
                }
            }
        }
    }
}

struct BoundQuery {
    kind: BoundKind,
    c: Option<u64>,
    n: Option<u64>,
    m: Option<u64>,
    t: Option<u64>,
    l: Option<u64>,
    j: Option<u64>,
}

fn bound(
    inst: &Instance,
    q: BoundQuery,
    trace: bool,
    class: bool,
    max_bits: Option<u64>,
    max_steps: Option<u64>,
) -> Result<Report> {
    // hj and ram need no vocabulary
    let res = match q.kind {
        BoundKind::Hj | BoundKind::Ram if inst.vocab.is_none() && inst.config.is_none() => None,
        _ => Some(resolve(inst)?),
    };
    let cfg = res.as_ref().map(|r| r.cfg.clone()).unwrap_or_default();
    let mut budget = Budget::default();
    if let Some(b) = max_bits.or(cfg.max_bits) {
        budget.max_bits = b;
    }
    if let Some(s) = max_steps.or(cfg.max_steps) {
        budget.max_steps = s;
    }
    let c = need(q.c.or(cfg.c), "c")?;
    let shape = || -> Result<(Shape, TupleMode)> {
        let r = res.as_ref().ok_or_else(|| Error::Precondition("missing --vocab".into()))?;
        Ok((Shape::new(&r.vocab, &r.alpha), r.mode))
    };
    let e: Evaluation = match q.kind {
        BoundKind::Hj => bounds::hj_bound(need(q.n, "n")?, q.m.unwrap_or(1), c, budget)?,
        BoundKind::Ram => bounds::ram_bound(need(q.t, "t")?, need(q.l, "l")? as usize, c, budget)?,
        BoundKind::F1 => {
            let (s, m) = shape()?;
            bounds::f1_bound(&s, m, c, budget)?
        }
        BoundKind::Legacy => {
            let (s, m) = shape()?;
            bounds::f1_bound_legacy(&s, m, c, budget)?
        }
        BoundKind::F0 => {
            let (s, m) = shape()?;
            bounds::f0_bound(&s, m, q.n.unwrap_or(0), q.l.unwrap_or(0), c, budget)?
        }
        BoundKind::F6 => bounds::f6_bound(&shape()?.0, q.l.unwrap_or(0), c, budget)?,
        BoundKind::F6star => bounds::f6star_bound(&shape()?.0, need(q.j, "j")?, need(q.t, "t")?, c, budget)?,
        BoundKind::F7 => bounds::f7_bound(&shape()?.0, q.j, q.m.unwrap_or(1), c, budget)?,
        BoundKind::Multi => {
            let (s, m) = shape()?;
            bounds::f1_multi_bound(&s, m, q.m.unwrap_or(1), c, budget)?
        }
        BoundKind::F4 => {
            let (s, m) = shape()?;
            bounds::f4_bound(&s, m, need(q.t, "t")?, q.l.unwrap_or(0) as usize, c, budget)?
        }
        BoundKind::F2 | BoundKind::F3 => {
            let (s, m) = shape()?;
            let (f2, f3) = bounds::fim_variant_bounds(&s, m, c, budget)?;
            if q.kind == BoundKind::F2 {
                f2
            } else {
                f3
            }
        }
    };
    let mut out = format!("{}\n", e.render());
    if class {
        let cl = e.class.map_or("none".to_string(), |c| c.to_string());
        writeln!(out, "class {cl}").unwrap();
    }
    if trace {
        out.push_str(&e.trace.render());
    }
    Ok((if e.exceeded() { 2 } else { 0 }, out))
}

fn polyramsey(seed: u64, q: u64, polys: &Path, colour: &str, r: &str, t: usize, budget: Option<u64>) -> Result<Report> {
    let ring = Zq::new(q)?;
    let spec = PolySpec::parse(ring, &read(polys)?)?;
    let bad = |msg: &str| Error::Precondition(format!("bad --colour `{colour}`: {msg}"));
    let parts: Vec<&str> = colour.split(':').collect();
    let d = match parts.as_slice() {
        ["seed", c] => RingColouring::seeded(&ring, spec.coords(), c.parse().map_err(|_| bad("c"))?, seed)?,
        ["table", c, list] => {
            let c: u64 = c.parse().map_err(|_| bad("c"))?;
            let table = list.split(',').map(|x| x.trim().parse().map_err(|_| bad(x))).collect::<Result<Vec<u64>>>()?;
            RingColouring::table(&ring, spec.coords(), c, table)?
        }
        _ => return Err(bad("expected seed:<c> or table:<c>:<list>")),
    };
    let rs: Vec<u64> = r
        .split(',')
        .map(|x| {
            x.trim().parse::<u64>().map(|v| v % q).map_err(|_| Error::Precondition(format!("bad ring element `{x}`")))
        })
        .collect::<Result<_>>()?;
    let out = solve_polyramsey(&spec, t, &d, &rs, budget.unwrap_or(u64::MAX))?;
    let mut text = String::new();
    let guarantee = match out.guaranteed {
        Some(true) => "yes",
        Some(false) => "no",
        None => "unknown (bound over budget)",
    };
    let code = match &out.solution {
        Some(s) => {
            let w: Vec<String> = s.w.iter().map(|x| x.to_string()).collect();
            let y: Vec<String> = s.y.iter().map(|x| x.to_string()).collect();
            writeln!(text, "FOUND y=({}) z={} w={{{}}} colour={}", y.join(","), s.z, w.join(","), s.colour).unwrap();
            0
        }
        None => {
            writeln!(text, "NONE").unwrap();
            1
        }
    };
    writeln!(text, "k={} bound={} guaranteed={guarantee}", rs.len(), out.bound.render()).unwrap();
    Ok((code, text))
}

type Check = fn() -> std::result::Result<(), String>;

/// Quick invariant checks with a one-line verdict each.
pub fn selftest() -> Report {
    let checks: Vec<(&str, Check)> = vec![
        ("exact-unary-2-2", check_exact_unary),
        ("closure-counting", check_closure),
        ("line-census", check_census),
        ("hj-ram-anchors", check_anchors),
        ("arity-lift", check_arity_lift),
        ("polyramsey-z2", check_poly_z2),
        ("seeded-colouring-stable", check_seeded),
    ];
    let mut out = String::new();
    let mut failed = 0;
    for (name, f) in &checks {
        match f() {
            Ok(()) => writeln!(out, "PASS {name}").unwrap(),
            Err(e) => {
                failed += 1;
                writeln!(out, "FAIL {name}: {e}").unwrap();
            }
        }
    }
    writeln!(out, "selftest: {}/{} passed", checks.len() - failed, checks.len()).unwrap();
    (if failed == 0 { 0 } else { 1 }, out)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn check_exact_unary() -> std::result::Result<(), String> {
    let v = Arc::new(Vocabulary::unary());
    let a = AlphabetSeq::uniform(&v, 2).map_err(|e| e.to_string())?;
    let r =
        exact_partition_number(&v, &a, None, 2, TupleMode::Set, &ExactOptions::default()).map_err(|e| e.to_string())?;
    ensure(r == PartitionNumber::Exact(2), || format!("got {}", r.render()))
}

fn check_closure() -> std::result::Result<(), String> {
    for i in 0..40u64 {
        let h = splitmix64(17, i);
        let t = 1 + (h % 3) as usize;
        let k = 1 + ((h >> 8) % 5) as u32;
        let mode = if (h >> 16) & 1 == 0 { TupleMode::Set } else { TupleMode::Multiset };
        let fim = Fim::new(Arc::new(Vocabulary::canonical(t)), k, mode);
        let u: Vec<u32> = (1..=k).filter(|a| (h >> (20 + a)) & 1 == 1).collect();
        let cl = fim.closure(&u).map_err(|e| e.to_string())?;
        let want = p_tau(fim.vocab(), u.len() as u64, mode);
        ensure(cl.len() as u128 == want, || format!("t={t} k={k} u={u:?}: {} vs {want}", cl.len()))?;
    }
    Ok(())
}

fn check_census() -> std::result::Result<(), String> {
    let v = Arc::new(Vocabulary::canonical(2));
    let a = AlphabetSeq::uniform(&v, 2).map_err(|e| e.to_string())?;
    let s = Space::build(v, 3, TupleMode::Set, a).map_err(|e| e.to_string())?;
    let n = enumerate_lines(&s).count() as u128;
    ensure(n == 25 && line_count(&s) == 25, || format!("counted {n}"))
}

fn check_anchors() -> std::result::Result<(), String> {
    let b = Budget::default();
    let v = |e: Result<Evaluation>| e.ok().and_then(|e| e.value).map(|x| x.to_string()).unwrap_or_default();
    ensure(v(bounds::hj_bound(1, 3, 2, b)) == "3", || "HJ(1,3,2)".into())?;
    ensure(v(bounds::hj_bound(2, 1, 2, b)) == "2", || "HJ(2,1,2)".into())?;
    ensure(v(bounds::ram_bound(4, 1, 3, b)) == "10", || "RAM(4,1,3)".into())?;
    ensure(v(bounds::ram_bound(5, 5, 3, b)) == "5", || "RAM(5,5,3)".into())
}

fn check_arity_lift() -> std::result::Result<(), String> {
    let v = Arc::new(Vocabulary::canonical(2));
    let a = AlphabetSeq::uniform(&v, 2).map_err(|e| e.to_string())?;
    let s = Space::build(v.clone(), 2, TupleMode::Multiset, a.clone()).map_err(|e| e.to_string())?;
    let b = ArityReduction::new(&v, &a).and_then(|r| r.bind(&s, TupleMode::Multiset)).map_err(|e| e.to_string())?;
    for seed in 0..8 {
        let d = seeded_base_invariant(&s, 2, 2, seed);
        let r = arity_reduce_and_lift(&b, &d, u64::MAX).map_err(|e| e.to_string())?;
        ensure(!matches!(r, LiftOutcome::Broken(_)), || format!("seed {seed} broke"))?;
    }
    Ok(())
}

fn check_poly_z2() -> std::result::Result<(), String> {
    let ring = Zq::new(2).map_err(|e| e.to_string())?;
    let spec = PolySpec::parse(ring, "0\n0 1\n").map_err(|e| e.to_string())?;
    for bits in 0..4u64 {
        let d = RingColouring::table(&ring, 1, 2, vec![bits & 1, bits >> 1]).map_err(|e| e.to_string())?;
        let out = solve_polyramsey(&spec, 1, &d, &[1, 1], 1 << 20).map_err(|e| e.to_string())?;
        ensure(out.solution.is_some(), || format!("colouring {bits} found nothing"))?;
    }
    Ok(())
}

fn check_seeded() -> std::result::Result<(), String> {
    let v = Arc::new(Vocabulary::canonical(2));
    let a = AlphabetSeq::uniform(&v, 3).map_err(|e| e.to_string())?;
    let s = Space::build(v, 2, TupleMode::Set, a).map_err(|e| e.to_string())?;
    let d = Colouring::seeded(3, 99);
    ensure(d.to_table(&s) == d.to_table(&s), || "tables differ".into())
}
