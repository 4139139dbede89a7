use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rcfqe::elim::{ElimConfig, LevelBounds};
use rcfqe::formula::{eliminate, Formula, QfResult, RenderStyle};
use rcfqe::oracle::verify_staged_with;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "rcfqe", version, about = "Quantifier elimination over the reals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a quantifier-free formula equivalent to the input.
    Eliminate(Common),
    /// Decide a sentence; exit status 0 for true, 1 for false.
    Decide(Common),
    /// Eliminate, then check the result against the sampling oracle.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100, value_parser = parse_samples)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Complement the computed answer before checking (harness self-test).
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Family sizes, degrees and tree sizes next to their theoretical bounds.
    Stats(Common),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Style {
    Relations,
    Signs,
}

#[derive(Args)]
struct Common {
    /// The formula, unless --file is given.
    formula: Option<String>,
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, value_enum, default_value_t = Style::Relations)]
    style: Style,
    /// Include the cylindrical tree.
    #[arg(long)]
    dump_tree: bool,
    /// Include every elimination family with provenance.
    #[arg(long)]
    dump_elim: bool,
    #[arg(long, default_value_t = ElimConfig::default().max_family, value_parser = parse_positive)]
    max_family: usize,
    #[arg(long, default_value_t = ElimConfig::default().max_degree, value_parser = parse_positive)]
    max_degree: usize,
    #[arg(long, value_parser = parse_positive)]
    threads: Option<usize>,
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_samples(s: &str) -> Result<usize, String> {
    parse_positive(s).map_err(|e| format!("samples {e}"))
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

impl Common {
    fn formula(&self) -> Result<Formula, Failure> {
        let text = match (&self.formula, &self.file) {
            (Some(f), None) => f.clone(),
            (None, Some(p)) => std::fs::read_to_string(p)
                .map_err(|e| Failure(format!("cannot read {}: {e}", p.display())))?,
            (Some(_), Some(_)) => return Err(Failure("give the formula inline or with --file, not both".into())),
            (None, None) => return Err(Failure("no formula given".into())),
        };
        Ok(Formula::parse(&text)?)
    }

    fn config(&self) -> ElimConfig {
        ElimConfig {
            max_family: self.max_family,
            max_degree: self.max_degree,
        }
    }

    fn style(&self) -> RenderStyle {
        match self.style {
            Style::Relations => RenderStyle::Relations,
            Style::Signs => RenderStyle::Signs,
        }
    }

    fn run(&self) -> Result<(Formula, QfResult), Failure> {
        if let Some(n) = self.threads {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
        let phi = self.formula()?;
        let result = eliminate(&phi, &self.config())?;
        Ok((phi, result))
    }
}

fn level_stats(r: &QfResult) -> Vec<Value> {
    let chain = &r.chain;
    let nodes = r.tree.node_counts();
    chain
        .levels()
        .map(|l| {
            let b: LevelBounds = chain.bounds(l.level);
            json!({
                "level": l.level,
                "size": l.len(),
                "size_bound": LevelBounds::describe(b.log2_size),
                "max_degree": l.max_degree(),
                "degree_bound": LevelBounds::describe(b.log2_degree),
                "truncations": l.stats.truncations,
                "products": l.stats.products,
                "tree_nodes": nodes[l.level],
            })
        })
        .collect()
}

fn stats_text(r: &QfResult) -> String {
    let mut out = String::new();
    for s in level_stats(r) {
        let _ = writeln!(
            out,
            "level {}: {} polynomials (bound {}), max degree {} (bound {}), {} tree nodes",
            s["level"],
            s["size"],
            s["size_bound"].as_str().unwrap_or_default(),
            s["max_degree"],
            s["degree_bound"].as_str().unwrap_or_default(),
            s["tree_nodes"],
        );
    }
    out
}

fn elim_json(r: &QfResult) -> Value {
    Value::Array(
        r.chain
            .levels()
            .map(|l| serde_json::to_value(l).expect("families serialize"))
            .collect(),
    )
}

fn elim_text(r: &QfResult) -> String {
    let mut out = String::new();
    for l in r.chain.levels() {
        let _ = writeln!(out, "Elim_{}:", l.level);
        for (n, e) in l.entries.iter().enumerate() {
            let _ = writeln!(out, "  [{n}] {}", e.poly);
        }
    }
    out
}

fn extras(c: &Common, r: &QfResult, obj: &mut serde_json::Map<String, Value>) {
    if c.dump_elim {
        obj.insert("elim_levels".into(), elim_json(r));
    }
    if c.dump_tree {
        obj.insert("tree".into(), r.tree.to_json());
    }
}

fn extras_text(c: &Common, r: &QfResult, out: &mut String) {
    if c.dump_elim {
        out.push_str(&elim_text(r));
    }
    if c.dump_tree {
        out.push_str(&serde_json::to_string_pretty(&r.tree.to_json()).expect("tree serializes"));
        out.push('\n');
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn print_json(v: &Value) {
    emit(&format!("{}\n", serde_json::to_string_pretty(v).expect("json serializes")));
}

fn cmd_eliminate(c: &Common) -> Result<ExitCode, Failure> {
    let phi = c.formula()?;
    if phi.quantifiers.is_empty() {
        return Err(Failure("the formula has no quantifier to eliminate".into()));
    }
    if phi.is_sentence() {
        return Err(Failure("the formula is a sentence; use `decide`".into()));
    }
    let (_, r) = c.run()?;
    let psi = r.render(c.style());
    match c.format {
        Format::Json => {
            let tphi: Vec<&rcfqe::SignCondition> = r.tphi();
            let mut obj = serde_json::Map::new();
            obj.insert("level".into(), json!(r.level()));
            obj.insert("qf_formula".into(), json!(psi));
            obj.insert("tphi".into(), json!(tphi));
            obj.insert("elim_levels".into(), elim_json(&r));
            obj.insert("stats".into(), Value::Array(level_stats(&r)));
            if c.dump_tree {
                obj.insert("tree".into(), r.tree.to_json());
            }
            print_json(&Value::Object(obj));
        }
        Format::Text => {
            let mut out = format!("{psi}\n\n");
            out.push_str(&stats_text(&r));
            extras_text(c, &r, &mut out);
            emit(&out);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_decide(c: &Common) -> Result<ExitCode, Failure> {
    let phi = c.formula()?;
    if !phi.is_sentence() {
        return Err(Failure(format!(
            "`decide` needs a sentence; x1..x{} are free",
            phi.free
        )));
    }
    let (_, r) = c.run()?;
    let truth = r.truth_value();
    match c.format {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("result".into(), json!(truth));
            obj.insert("stats".into(), Value::Array(level_stats(&r)));
            extras(c, &r, &mut obj);
            print_json(&Value::Object(obj));
        }
        Format::Text => {
            let mut out = format!("{truth}\n");
            extras_text(c, &r, &mut out);
            emit(&out);
        }
    }
    Ok(if truth { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_verify(c: &Common, samples: usize, seed: u64, corrupt: bool) -> Result<ExitCode, Failure> {
    let phi = c.formula()?;
    if phi.quantifiers.is_empty() {
        return Err(Failure("the formula has no quantifier to verify".into()));
    }
    let (_, r) = c.run()?;
    let report = verify_staged_with(&r, samples, seed, corrupt);
    match c.format {
        Format::Json => {
            let mut obj = match serde_json::to_value(&report)? {
                Value::Object(o) => o,
                _ => unreachable!("reports serialize to objects"),
            };
            extras(c, &r, &mut obj);
            print_json(&Value::Object(obj));
        }
        Format::Text => {
            let mut out = String::new();
            for s in &report.stages {
                let _ = write!(
                    out,
                    "stage {} x{}: {} samples, {} mismatches",
                    s.quantifier, s.variable, s.samples, s.mismatches
                );
                if let Some(p) = &s.first_mismatch {
                    let _ = write!(out, " (first at ({}))", p.join(", "));
                }
                out.push('\n');
            }
            let _ = writeln!(out, "{}", if report.passed() { "ok" } else { "MISMATCH" });
            extras_text(c, &r, &mut out);
            emit(&out);
        }
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_stats(c: &Common) -> Result<ExitCode, Failure> {
    let (_, r) = c.run()?;
    match c.format {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("s".into(), json!(r.chain.s));
            obj.insert("d".into(), json!(r.chain.d));
            obj.insert("k".into(), json!(r.chain.k));
            obj.insert("levels".into(), Value::Array(level_stats(&r)));
            extras(c, &r, &mut obj);
            print_json(&Value::Object(obj));
        }
        Format::Text => {
            let mut out = format!("s = {}, d = {}, k = {}\n", r.chain.s, r.chain.d, r.chain.k);
            out.push_str(&stats_text(&r));
            extras_text(c, &r, &mut out);
            emit(&out);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Eliminate(c) => cmd_eliminate(c),
        Command::Decide(c) => cmd_decide(c),
        Command::Verify {
            common,
            samples,
            seed,
            corrupt,
        } => cmd_verify(common, *samples, *seed, *corrupt),
        Command::Stats(c) => cmd_stats(c),
    };
    match res {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
