mod cache;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use brandt_core::arith::is_prime;
use brandt_core::spectral::{decimal, format_poly, ramanujan_for, SURVEY_HEADER};
use brandt_core::{
    big_graph, enhanced_graph, little_graph, BrandtContext, BrandtMatrix, ClassOptions, ClassReps, Error, WeightedGraph,
};
use clap::{Parser, Subcommand, ValueEnum};

use crate::cache::Cache;

#[derive(Parser)]
#[command(name = "brandt", version, about = "Exact Brandt matrices and superspecial isogeny graphs")]
struct Cli {
    /// Neither read nor write the on-disk cache
    #[arg(long, global = true)]
    no_cache: bool,
    /// Length of the theta-series prefix that orders class representatives
    #[arg(long, global = true, default_value_t = 8)]
    theta_terms: usize,
    /// Enumeration level at which class search gives up (exit code 3)
    #[arg(long, global = true, default_value_t = 16)]
    max_level: i64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Class representatives, automorphism counts and the mass
    Classset {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        g: u8,
        #[arg(long)]
        p: i64,
        /// Write the class set as JSON to this path (`-` for stdout)
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// The Brandt matrix B_g(n)
    Brandt {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        g: u8,
        #[arg(long)]
        p: i64,
        #[arg(long)]
        n: i64,
        #[arg(long, conflicts_with = "json")]
        csv: bool,
        #[arg(long)]
        json: bool,
    },
    /// Big, little or enhanced isogeny graph
    Graph {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        g: u8,
        #[arg(long = "l")]
        l: i64,
        #[arg(long)]
        p: i64,
        #[arg(long, conflicts_with = "json")]
        dot: bool,
        #[arg(long)]
        json: bool,
    },
    /// Exact Ramanujan verdict for the graph of degree l
    Ramanujan {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        g: u8,
        #[arg(long = "l")]
        l: i64,
        #[arg(long)]
        p: i64,
    },
    /// Ramanujan verdicts for every prime p <= pmax
    Survey {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        g: u8,
        #[arg(long = "l")]
        l: i64,
        #[arg(long)]
        pmax: i64,
        /// Write CSV to this path instead of stdout
        #[arg(long, conflicts_with = "json")]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Check the Hecke identities for all n <= nmax coprime to p
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        g: u8,
        #[arg(long)]
        p: i64,
        #[arg(long, default_value_t = 10)]
        nmax: i64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Big,
    Little,
    Enhanced,
}

enum Failure {
    /// exit 2
    Usage(String),
    /// exit 3
    Ceiling(String),
    /// exit 1
    Failed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotPrime(_) | Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            Error::EnumerationCeiling(_) => Failure::Ceiling(e.to_string()),
            _ => Failure::Failed(e.to_string()),
        }
    }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (2, m),
                Failure::Ceiling(m) => (3, m),
                Failure::Failed(m) => (1, m),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let opts = ClassOptions { theta_terms: cli.theta_terms, max_bound: cli.max_level };
    if opts.theta_terms == 0 {
        return Err(Failure::Usage("--theta-terms must be positive".into()));
    }
    let cache = Cache::from_env(!cli.no_cache);
    let env = Env { cache, opts };
    match &cli.command {
        Command::Classset { g, p, json } => classset(&env, *g as usize, *p, json.as_ref()),
        Command::Brandt { g, p, n, csv, json } => brandt(&env, *g as usize, *p, *n, *csv, *json),
        Command::Graph { kind, g, l, p, dot, json } => graph(&env, *kind, *g as usize, *l, *p, *dot, *json),
        Command::Ramanujan { g, l, p } => ramanujan(&env, *g as usize, *l, *p),
        Command::Survey { g, l, pmax, csv, json } => survey(&env, *g as usize, *l, *pmax, csv.as_ref(), *json),
        Command::Verify { g, p, nmax } => verify(&env, *g as usize, *p, *nmax),
    }
}

struct Env {
    cache: Cache,
    opts: ClassOptions,
}

impl Env {
    fn context(&self, g: usize, p: i64) -> Result<BrandtContext, Failure> {
        check_prime("p", p)?;
        Ok(BrandtContext::new(self.cache.class_set(g, p, &self.opts)?)?)
    }

    fn brandt(&self, ctx: &BrandtContext, n: i64) -> Result<BrandtMatrix, Failure> {
        if n < 1 {
            return Err(Failure::Usage(format!("n must be positive, got {n}")));
        }
        if let Some(m) = self.cache.brandt_matrix(&self.opts, ctx.class_set(), n) {
            ctx.insert(m.clone())?;
            return Ok(m);
        }
        let m = ctx.brandt(n)?;
        self.cache.store_brandt(&self.opts, &m);
        Ok(m)
    }
}

fn check_prime(name: &str, x: i64) -> Result<(), Failure> {
    if x < 2 || !is_prime(x as u64) {
        return Err(Failure::Usage(format!("{name} = {x} is not prime")));
    }
    Ok(())
}

fn check_degree(l: i64, p: i64) -> Result<(), Failure> {
    check_prime("l", l)?;
    check_prime("p", p)?;
    if l == p {
        return Err(Failure::Usage(format!("l must differ from p (both are {p})")));
    }
    Ok(())
}

fn classset(env: &Env, g: usize, p: i64, json: Option<&PathBuf>) -> Outcome {
    let ctx = env.context(g, p)?;
    let s = ctx.class_set();
    let mut out = String::new();
    writeln!(out, "g = {g}, p = {p}").unwrap();
    writeln!(out, "h = {}", s.h()).unwrap();
    writeln!(out, "mass = {}", s.mass).unwrap();
    let e: Vec<String> = s.aut_counts.iter().map(|e| e.to_string()).collect();
    writeln!(out, "aut_counts = {}", e.join(" ")).unwrap();
    writeln!(out, "mass certified: {}", s.mass_certified()).unwrap();
    if let ClassReps::Forms(forms) = &s.reps {
        for (i, f) in forms.iter().enumerate() {
            let diag: Vec<String> = (0..f.g).map(|a| f.diag(a, &s.order).to_string()).collect();
            writeln!(out, "class {i}: diagonal {}", diag.join(" ")).unwrap();
        }
    }
    match json {
        Some(path) if path.as_os_str() == "-" => Ok(s.to_json() + "\n"),
        Some(path) => {
            std::fs::write(path, s.to_json() + "\n")
                .map_err(|e| Failure::Failed(format!("cannot write {}: {e}", path.display())))?;
            Ok(out)
        }
        None => Ok(out),
    }
}

fn brandt(env: &Env, g: usize, p: i64, n: i64, csv: bool, json: bool) -> Outcome {
    if n < 1 {
        return Err(Failure::Usage(format!("n must be positive, got {n}")));
    }
    let ctx = env.context(g, p)?;
    let m = env.brandt(&ctx, n)?;
    if json {
        return Ok(m.to_json() + "\n");
    }
    if csv {
        return Ok(m.to_csv());
    }
    let width = m.entries.iter().flatten().map(|x| x.to_string().len()).max().unwrap_or(1);
    let mut out = String::new();
    writeln!(out, "B_{g}({n}) for p = {p}, h = {}", m.h).unwrap();
    for row in &m.entries {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:>width$}")).collect();
        writeln!(out, "{}", cells.join(" ")).unwrap();
    }
    let e: Vec<String> = m.weights.iter().map(|e| e.to_string()).collect();
    writeln!(out, "weights: {}", e.join(" ")).unwrap();
    Ok(out)
}

fn graph(env: &Env, kind: Kind, g: usize, l: i64, p: i64, dot: bool, json: bool) -> Outcome {
    check_degree(l, p)?;
    let ctx = env.context(g, p)?;
    env.brandt(&ctx, l)?;
    let gr: WeightedGraph = match kind {
        Kind::Big => big_graph(&ctx, l)?,
        Kind::Little => little_graph(&ctx, l)?,
        Kind::Enhanced => enhanced_graph(&ctx, l)?,
    };
    if dot {
        return Ok(gr.to_dot());
    }
    if json {
        return Ok(gr.to_json() + "\n");
    }
    let mut out = String::new();
    writeln!(out, "vertices: {}", gr.vertices.len()).unwrap();
    writeln!(out, "edges: {}", gr.edges.len()).unwrap();
    writeln!(out, "half-edges: {}", gr.half_edge_count()).unwrap();
    writeln!(out, "connected: {}", gr.is_connected()).unwrap();
    writeln!(out, "bipartite: {}", gr.is_bipartite()).unwrap();
    Ok(out)
}

fn ramanujan(env: &Env, g: usize, l: i64, p: i64) -> Outcome {
    check_degree(l, p)?;
    let ctx = env.context(g, p)?;
    env.brandt(&ctx, l)?;
    let r = ramanujan_for(&ctx, l)?;
    let mut out = String::new();
    writeln!(out, "{}", if r.ramanujan { "RAMANUJAN" } else { "NOT RAMANUJAN" }).unwrap();
    writeln!(out, "h = {}, k = {}", r.h, r.k).unwrap();
    writeln!(out, "charpoly = {}", format_poly(&r.charpoly)).unwrap();
    if let Some((lo, hi)) = &r.second_largest_abs {
        writeln!(out, "largest nontrivial |eigenvalue| in [{}, {}]", decimal(lo, false), decimal(hi, true)).unwrap();
        writeln!(out, "bound: lambda^2 <= {}", 4 * (r.k - 1)).unwrap();
    }
    Ok(out)
}

fn survey(env: &Env, g: usize, l: i64, pmax: i64, csv: Option<&PathBuf>, json: bool) -> Outcome {
    check_prime("l", l)?;
    let rows = brandt_core::ramanujan_survey(g, l, pmax, &env.opts);
    if json {
        return serde_json::to_string_pretty(&rows).map(|s| s + "\n").map_err(|e| Failure::Failed(e.to_string()));
    }
    let mut text = String::from(SURVEY_HEADER);
    text.push('\n');
    for r in &rows {
        text.push_str(&r.to_csv());
        text.push('\n');
    }
    match csv {
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| Failure::Failed(format!("cannot write {}: {e}", path.display())))?;
            let yes: Vec<String> =
                rows.iter().filter(|r| r.result.as_ref().is_ok_and(|s| s.ramanujan)).map(|r| r.p.to_string()).collect();
            Ok(format!("{} rows written; Ramanujan at p = {}\n", rows.len(), yes.join(" ")))
        }
        None => Ok(text),
    }
}

fn verify(env: &Env, g: usize, p: i64, nmax: i64) -> Outcome {
    if nmax < 2 {
        return Err(Failure::Usage("--nmax must be at least 2".into()));
    }
    let ctx = env.context(g, p)?;
    for n in (1..=nmax).filter(|n| n % p != 0) {
        env.brandt(&ctx, n)?;
    }
    let mut report = ctx.verify_identities(nmax)?;
    if g == 1 {
        for l in (2..=nmax).filter(|&l| l != p && is_prime(l as u64) && l * l <= nmax) {
            let kmax = (1..).take_while(|&k| l.pow(k) <= nmax).last().unwrap_or(1);
            report.checks.extend(ctx.hecke_recursion(l, kmax)?.checks);
        }
    }
    let text = report.to_string();
    if report.all_passed() {
        Ok(text + "all identities hold\n")
    } else {
        print!("{text}");
        Err(Failure::Failed(format!("{} identities failed", report.failures().count())))
    }
}
