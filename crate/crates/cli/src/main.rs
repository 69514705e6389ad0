//! `bellscope` command line. Primary output is TSV on stdout, notes go to
//! stderr. Exit codes: 0 success, 2 usage error, 3 data error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bellscope::catalog::{self, canonical_name, load_catalog, load_catalog_dir, verify_entry, CatalogEntry};
use bellscope::inequality::{are_equivalent, includes, inclusion_digraph, parse_cg, to_dot, BellInequality};
use bellscope::quantum::{isotropic_state, write_measurements};
use bellscope::seesaw::{multi_restart_max, SeesawConfig};
use bellscope::threshold::{alpha_max, SearchConfig, SearchStatus};

const CATALOG_ENV: &str = "BELLSCOPE_CATALOG";

#[derive(Parser)]
#[command(name = "bellscope", version, about = "Bell inequality violations, isotropic thresholds and inequality algebra")]
struct Cli {
    /// Worker threads for restarts (results do not depend on it)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PaperScale {
    /// 1000 restarts per step
    Standard,
    /// 50000 restarts per step
    Long,
}

impl PaperScale {
    fn restarts(self) -> usize {
        match self {
            PaperScale::Standard => 1000,
            PaperScale::Long => 50_000,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Best see-saw violation of an inequality by an isotropic state
    Violate {
        /// Catalog name (CHSH, I3322, A5, ...) or path to a .cg file
        #[arg(long)]
        ineq: String,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the best measurements in measurement-file format
        #[arg(long, value_name = "PATH")]
        dump_measurements: Option<PathBuf>,
    },
    /// Bisection for the isotropic threshold alpha_max
    Threshold {
        #[arg(long)]
        ineq: String,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Raise restarts to 1000 (or 50000 with `long`), overriding --restarts
        #[arg(long, num_args = 0..=1, default_missing_value = "standard", value_name = "SCALE")]
        paper_scale: Option<PaperScale>,
        /// Start the bracket at the separability bound 1/(d+1)
        #[arg(long)]
        warm_start_separable: bool,
    },
    /// Whether two inequalities are equivalent, with a witness transform
    Equiv { a: String, b: String },
    /// Whether the first inequality includes the second, with a witness
    Includes { larger: String, smaller: String },
    /// Transitively reduced inclusion digraph in DOT format
    Graph {
        #[arg(long, value_name = "DIR")]
        catalog: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Crossing points of the shipped measurements against the reference table
    VerifyAppendix {
        #[arg(long)]
        name: Option<String>,
    },
    /// Classical (deterministic-strategy) maximum of an inequality
    Classical {
        #[arg(long)]
        ineq: String,
    },
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<bellscope::Error> for Failure {
    fn from(e: bellscope::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

#[derive(Serialize)]
struct RunManifest<'a, C: Serialize> {
    command: &'a str,
    config: C,
    bellscope_version: &'static str,
    cli_version: &'static str,
    duration_s: f64,
}

fn print_manifest<C: Serialize>(command: &str, config: C, started: Instant) {
    let m = RunManifest {
        command,
        config,
        bellscope_version: bellscope::VERSION,
        cli_version: env!("CARGO_PKG_VERSION"),
        duration_s: started.elapsed().as_secs_f64(),
    };
    println!("# manifest {}", serde_json::to_string(&m).expect("manifest serializes"));
}

fn catalog_dir() -> Option<PathBuf> {
    std::env::var_os(CATALOG_ENV).map(PathBuf::from)
}

fn catalog_entries() -> Result<Vec<CatalogEntry>, Failure> {
    match catalog_dir() {
        Some(dir) => load_catalog_dir(&dir).map_err(|e| Failure::Data(format!("{}: {e}", dir.display()))),
        None => Ok(load_catalog()),
    }
}

/// An existing file path, otherwise a catalog name.
fn resolve(source: &str) -> Result<BellInequality, Failure> {
    let path = Path::new(source);
    if path.is_file() {
        let text = fs::read_to_string(path)?;
        let stem = path.file_stem().map_or_else(|| source.to_owned(), |s| s.to_string_lossy().into_owned());
        return parse_cg(&text)
            .map(|x| x.with_name(stem))
            .map_err(|e| Failure::Data(format!("{source}: {e}")));
    }
    let name = canonical_name(source).unwrap_or(source);
    catalog_entries()?
        .into_iter()
        .find(|e| e.name == name)
        .map(|e| e.inequality)
        .ok_or_else(|| Failure::Data(format!("`{source}` is neither a file nor a catalog entry")))
}

fn label(x: &BellInequality, source: &str) -> String {
    x.name().unwrap_or(source).to_owned()
}

fn check_alpha(alpha: f64) -> Outcome {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--alpha must lie in [0, 1], got {alpha}")))
    }
}

fn check_common(d: usize, restarts: usize) -> Outcome {
    if d < 2 {
        return Err(Failure::Usage(format!("--d must be at least 2, got {d}")));
    }
    if restarts == 0 {
        return Err(Failure::Usage("--restarts must be at least 1".into()));
    }
    Ok(())
}

fn violate(
    source: &str,
    d: usize,
    alpha: f64,
    restarts: usize,
    seed: u64,
    dump: Option<&Path>,
) -> Outcome {
    check_alpha(alpha)?;
    check_common(d, restarts)?;
    let started = Instant::now();
    let x = resolve(source)?;
    let cfg = SeesawConfig {
        restarts,
        base_seed: seed,
        ..SeesawConfig::default()
    };
    let rho = isotropic_state(d, alpha)?;
    let r = multi_restart_max(&x, &rho, &cfg)?;
    let significant = r.best_violation > 1e-13;
    println!("ineq\td\talpha\trestarts\tseed\tbest_violation\tverdict\trestart_index\titers\tconverged");
    println!(
        "{}\t{d}\t{alpha}\t{restarts}\t{seed}\t{:.12e}\t{}\t{}\t{}\t{}",
        label(&x, source),
        r.best_violation,
        if significant { "violation" } else { "no significant violation" },
        r.restart_index,
        r.iters_used,
        r.converged
    );
    if !significant {
        eprintln!("no significant violation (best {:.3e} <= 1e-13)", r.best_violation);
    }
    if let Some(path) = dump {
        let text = write_measurements(&r.best_a, &r.best_b)?;
        fs::write(path, text)?;
        eprintln!("wrote measurements to {}", path.display());
    }
    #[derive(Serialize)]
    struct Config<'a> {
        ineq: &'a str,
        d: usize,
        alpha: f64,
        seesaw: &'a SeesawConfig,
    }
    print_manifest("violate", Config { ineq: source, d, alpha, seesaw: &cfg }, started);
    Ok(())
}

fn threshold(source: &str, d: usize, restarts: usize, tol: f64, seed: u64, separable: bool) -> Outcome {
    check_common(d, restarts)?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Failure::Usage(format!("--tol must lie in (0, 1), got {tol}")));
    }
    let started = Instant::now();
    let x = resolve(source)?;
    let mut cfg = SearchConfig {
        bracket_tol: tol,
        warm_start_separable: separable,
        ..SearchConfig::default()
    };
    cfg.seesaw.restarts = restarts;
    cfg.seesaw.base_seed = seed;
    let est = alpha_max(&x, d, &cfg)?;
    let status = match est.status {
        SearchStatus::Bracketed => "bracketed",
        SearchStatus::NoViolationObserved => "no violation observed",
    };
    println!("ineq\td\talpha_upper\talpha_lower\tstatus\tsteps\trestarts\twitness_violation\twitness_restart");
    println!(
        "{}\t{d}\t{:.10}\t{:.10}\t{status}\t{}\t{restarts}\t{:.6e}\t{}",
        label(&x, source),
        est.alpha_upper,
        est.alpha_lower,
        est.steps,
        est.witness.best_violation,
        est.witness.restart_index
    );
    if est.status == SearchStatus::NoViolationObserved {
        eprintln!("no violation observed at alpha = 1; reporting alpha_max = 1");
    }
    #[derive(Serialize)]
    struct Config<'a> {
        ineq: &'a str,
        d: usize,
        search: &'a SearchConfig,
    }
    print_manifest("threshold", Config { ineq: source, d, search: &cfg }, started);
    Ok(())
}

fn equiv(a: &str, b: &str) -> Outcome {
    let (x, y) = (resolve(a)?, resolve(b)?);
    match are_equivalent(&x, &y) {
        Some(t) => {
            println!("yes");
            println!("transform\t{t}");
        }
        None => println!("no"),
    }
    Ok(())
}

fn includes_cmd(larger: &str, smaller: &str) -> Outcome {
    let (x, y) = (resolve(larger)?, resolve(smaller)?);
    match includes(&x, &y) {
        Some(w) => {
            println!("yes");
            println!("transform\t{}", w.transform);
            let fixed: Vec<String> = w
                .fixed_measurements()
                .iter()
                .map(|(p, k, o)| format!("{p}{}={o}", k + 1))
                .collect();
            println!("fixed\t{}", fixed.join(","));
        }
        None => println!("no"),
    }
    Ok(())
}

fn graph(dir: Option<&Path>, out: Option<&Path>) -> Outcome {
    let entries = match dir.map(Path::to_path_buf).or_else(catalog_dir) {
        Some(d) => load_catalog_dir(&d).map_err(|e| Failure::Data(format!("{}: {e}", d.display())))?,
        None => load_catalog(),
    };
    let list: Vec<BellInequality> = entries.into_iter().map(|e| e.inequality).collect();
    let dot = to_dot(&inclusion_digraph(&list));
    match out {
        Some(path) => {
            fs::write(path, &dot)?;
            eprintln!("{} inequalities, wrote {}", list.len(), path.display());
        }
        None => print!("{dot}"),
    }
    Ok(())
}

fn verify_appendix(name: Option<&str>) -> Outcome {
    let entries = catalog_entries()?;
    let selected: Vec<&CatalogEntry> = match name {
        Some(n) => {
            let canon = canonical_name(n).unwrap_or(n);
            let e = entries
                .iter()
                .find(|e| e.name == canon)
                .ok_or_else(|| Failure::Data(bellscope::Error::UnknownEntry(n.to_owned()).to_string()))?;
            vec![e]
        }
        None => catalog::APPENDIX_ENTRIES
            .iter()
            .filter_map(|n| entries.iter().find(|e| e.name == *n))
            .collect(),
    };
    let opt = |v: Option<f64>, digits: usize| v.map_or_else(|| "NA".to_owned(), |x| format!("{x:.digits$}"));
    println!("name\tv0\tv1\tcrossing\ttable_value\tdelta");
    for e in selected {
        let r = verify_entry(e)?;
        println!(
            "{}\t{:.10}\t{:.10}\t{:.10}\t{}\t{}",
            r.name,
            r.v0,
            r.v1,
            r.crossing,
            opt(r.table_value, 10),
            r.delta.map_or_else(|| "NA".to_owned(), |x| format!("{x:.3e}"))
        );
    }
    Ok(())
}

fn classical(source: &str) -> Outcome {
    let x = resolve(source)?;
    let c = x.classical_max()?;
    println!("ineq\tclassical_max\tbound\tmatches");
    println!("{}\t{c}\t{}\t{}", label(&x, source), x.bound(), c == x.bound());
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Violate {
            ineq,
            d,
            alpha,
            restarts,
            seed,
            dump_measurements,
        } => violate(&ineq, d, alpha, restarts, seed, dump_measurements.as_deref()),
        Command::Threshold {
            ineq,
            d,
            restarts,
            tol,
            seed,
            paper_scale,
            warm_start_separable,
        } => {
            let restarts = paper_scale.map_or(restarts, PaperScale::restarts);
            threshold(&ineq, d, restarts, tol, seed, warm_start_separable)
        }
        Command::Equiv { a, b } => equiv(&a, &b),
        Command::Includes { larger, smaller } => includes_cmd(&larger, &smaller),
        Command::Graph { catalog, out } => graph(catalog.as_deref(), out.as_deref()),
        Command::VerifyAppendix { name } => verify_appendix(name.as_deref()),
        Command::Classical { ineq } => classical(&ineq),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
