//! `sturm`: batch driver for band enumeration, pre-dimensions, Gibbs
//! measures, large-coupling asymptotics and the audit suite.

mod cache;
mod config;

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sturm_core::asymptotics::{large_v_law, law_table};
use sturm_core::audit::{hard_checks_pass, run_suite, AuditConfig, Selection};
use sturm_core::dimension::{dimension_report, pre_dimension, DimensionOptions, LengthMode};
use sturm_core::dump::write_records;
use sturm_core::gibbs::build_measure;
use sturm_core::{BandTree, Error};

use config::{RawConfig, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Internal(String),
    HardCheckFailure,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidQuotient(_)
            | Error::UnsupportedAperiodic
            | Error::Syntax(_)
            | Error::TruncatedExpansion { .. }
            | Error::CouplingTooSmall(_)
            | Error::InvalidCoupling(_)
            | Error::InvalidPrecision(_)
            | Error::InvalidArgument(_) => CliError::Config(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Config(_) => 2,
            CliError::HardCheckFailure => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "sturm", version, about = "Spectral generating bands of Sturmian Hamiltonians")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Frequency: `[0;a,b,(c,d)]`, `per:a,b` or `trunc:a,b,c`.
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// Coupling V (> 20), read as a decimal at the working precision.
    #[arg(long = "V", global = true)]
    v: Option<String>,
    #[arg(long, global = true)]
    order: Option<u32>,
    /// Working precision; defaults to an estimate that resolves `order`.
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    #[arg(long, global = true)]
    bisect_rel_tol: Option<f64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Band-tree cache, reused when its config hash matches.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `key=value` config file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// JSON-lines records of every band up to `order`.
    Bands,
    /// Pre-dimension table with the a priori dimension bracket.
    Dims {
        /// Length estimate: `endpoints` or `derivative`.
        #[arg(long, default_value = "endpoints")]
        length_mode: String,
        /// Comma-separated scales for Moran cover counts.
        #[arg(long, value_delimiter = ',')]
        moran_scales: Vec<f64>,
        /// Test hook: pre-dimension of `N` bands of length `L`, given as `N:L`.
        #[arg(long, hide = true)]
        inject_lengths: Option<String>,
    },
    /// Order-m weights of the measure with exponent beta.
    Gibbs {
        /// Exponent in (0,1); defaults to the pre-dimension at order m.
        #[arg(long)]
        beta: Option<f64>,
        /// Measure order; defaults to `order`.
        #[arg(long)]
        m: Option<u32>,
    },
    /// Large-coupling law table.
    Asym {
        #[arg(long = "V-list", value_delimiter = ',', required = true)]
        v_list: Vec<f64>,
    },
    /// Numerical audit suite; exit status 3 when a hard check fails.
    Audit {
        /// `all`, `hard`, `soft` or a comma list of check names or numbers.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Exponent for the Gibbs check.
        #[arg(long)]
        beta: Option<f64>,
    },
}

fn raw_from_flags(a: &RunArgs) -> RawConfig {
    RawConfig {
        alpha_spec: a.alpha.clone(),
        v: a.v.clone(),
        order: a.order,
        precision_bits: a.precision_bits,
        bisect_rel_tol: a.bisect_rel_tol,
        threads: a.threads,
        cache_path: a.cache.clone(),
        seed: a.seed,
    }
}

fn obtain_tree(cfg: &RunConfig) -> Result<BandTree, CliError> {
    if let Some(path) = &cfg.cache_path {
        if let Some(cached) = cache::load(path, cfg) {
            let depth = cached.depth();
            if depth >= cfg.order {
                log::info!("cache {} covers order {}", path.display(), cfg.order);
                let gens = cached.generations()[..=cfg.order as usize].to_vec();
                return Ok(BandTree::from_generations(&cfg.cf, &cfg.params, cfg.settings.clone(), gens)?);
            }
            log::info!("resuming from cached order {depth}");
            let mut tree = cached;
            tree.extend_to(cfg.order)?;
            cache::store(path, cfg, &tree)?;
            return Ok(tree);
        }
    }
    let tree = BandTree::enumerate_with(&cfg.cf, &cfg.params, cfg.order, cfg.settings.clone())?;
    if let Some(path) = &cfg.cache_path {
        cache::store(path, cfg, &tree)?;
    }
    Ok(tree)
}

fn inject(spec: &str) -> Result<String, CliError> {
    let bad = || CliError::Config(format!("--inject-lengths expects N:L, got `{spec}`"));
    let (n, l) = spec.split_once(':').ok_or_else(bad)?;
    let n: usize = n.parse().map_err(|_| bad())?;
    let l: f64 = l.parse().map_err(|_| bad())?;
    if n == 0 || !(l > 0.0) {
        return Err(bad());
    }
    let pd = pre_dimension(&vec![l.ln(); n])?;
    Ok(format!("s: {}\nresidual: {:e}\n", pd.s, pd.residual))
}

fn run(cli: Cli) -> Result<String, CliError> {
    let mut raw = match &cli.run.config {
        Some(p) => RawConfig::from_file(p)?,
        None => RawConfig::default(),
    };
    raw = raw.overlay(raw_from_flags(&cli.run));
    if let Command::Dims {
        inject_lengths: Some(spec),
        ..
    } = &cli.command
    {
        return inject(spec);
    }
    let cfg = RunConfig::resolve(raw)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    match cli.command {
        Command::Bands => {
            let tree = obtain_tree(&cfg)?;
            let mut buf = Vec::new();
            write_records(&tree, &mut buf).map_err(|e| CliError::Internal(e.to_string()))?;
            Ok(String::from_utf8(buf).expect("records are utf-8"))
        }
        Command::Dims {
            length_mode,
            moran_scales,
            ..
        } => {
            let length_mode = match length_mode.as_str() {
                "endpoints" => LengthMode::Endpoints,
                "derivative" => LengthMode::Derivative,
                other => return Err(CliError::Config(format!("unknown length mode `{other}`"))),
            };
            let tree = obtain_tree(&cfg)?;
            let opts = DimensionOptions {
                length_mode,
                moran_scales,
                k_constant: None,
            };
            let report = dimension_report(&tree, &opts)?;
            let mut out = format!("alpha: {}\nV: {}\n", cfg.cf, cfg.v_text);
            out += &report.to_text();
            Ok(out)
        }
        Command::Gibbs { beta, m } => {
            let m = m.unwrap_or(cfg.order);
            let mut cfg = cfg;
            cfg.order = cfg.order.max(m);
            let tree = obtain_tree(&cfg)?;
            let beta = match beta {
                Some(b) => b,
                None => pre_dimension(&sturm_core::dimension::ln_lengths(&tree, m, LengthMode::Endpoints)?)?.s,
            };
            let mu = build_measure(&tree, beta, m)?;
            let mut out = String::new();
            let _ = writeln!(out, "# beta {beta}");
            let _ = writeln!(out, "# m {m}");
            let _ = writeln!(out, "# ln_b_m {}", mu.ln_b_m);
            out += &mu.to_table();
            Ok(out)
        }
        Command::Asym { v_list } => {
            for &v in &v_list {
                sturm_core::SpectralParams::new(v, cfg.params.precision())?.require_band_regime()?;
            }
            let rows = large_v_law(&cfg.cf, &v_list, cfg.order, cfg.params.precision())?;
            Ok(law_table(&rows))
        }
        Command::Audit { suite, beta } => {
            let selection: Selection = suite.parse()?;
            let tree = obtain_tree(&cfg)?;
            let audit_cfg = AuditConfig {
                seed: cfg.seed,
                beta,
                ..AuditConfig::default()
            };
            let reports = run_suite(&tree, &selection, &audit_cfg)?;
            let mut out = String::new();
            for r in &reports {
                let _ = writeln!(out, "{r}");
            }
            let _ = writeln!(out, "# summary");
            for r in &reports {
                let _ = writeln!(out, "{}", r.summary_line());
            }
            if hard_checks_pass(&reports) {
                Ok(out)
            } else {
                emit(&cli.run.out, &out)?;
                Err(CliError::HardCheckFailure)
            }
        }
    }
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Internal(e.to_string());
    match path {
        Some(p) => std::fs::write(p, text).map_err(io),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(io),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let out = cli.run.out.clone();
    match run(cli).and_then(|text| emit(&out, &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Config(m) => eprintln!("error: {m}"),
                CliError::Internal(m) => eprintln!("internal error: {m}"),
                CliError::HardCheckFailure => eprintln!("error: a hard audit check failed"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
