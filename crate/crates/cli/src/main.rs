//! `hypersplit`: build the splitting artifacts, run verification suites,
//! apply the splitting to a section, and compare it with the KLT route.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypersplit::splitring::{GradedSection, Truncation, VerifyReport};
use hypersplit::suites::{Corruption, SuiteConfig, Suites, SUITES};
use hypersplit::{Error, Kind, RootSystem};
use serde::Serialize;
use sha2::{Digest, Sha256};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "hypersplit", version, about = "Exact Frobenius splittings of truncated induction rings")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the root system, grading, Steinberg module and section, and write them to --out.
    Build(Opts),
    /// Run verification suites and write a JSON report bundle.
    Verify(Opts),
    /// Apply the splitting to a section read from INPUT.
    Apply {
        #[command(flatten)]
        opts: Opts,
        input: PathBuf,
    },
    /// Compare the splitting with the unprojected-section route.
    CompareKlt(Opts),
    /// List the available suites.
    Suites,
}

#[derive(Args, Clone, Default)]
struct Opts {
    /// Key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    p: Option<u32>,
    /// Degree bound for the x variables.
    #[arg(long)]
    dx: Option<u32>,
    /// Degree bound for the grade (y variables).
    #[arg(long)]
    dn: Option<u32>,
    /// PBW degree bound for the Hopf suite.
    #[arg(long)]
    d_assoc: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated suite names (default: all).
    #[arg(long)]
    suites: Option<String>,
    /// Output directory (build) or file (other commands).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, hide = true)]
    corrupt: Option<String>,
}

/// Fully resolved configuration, echoed into every report.
#[derive(Clone, Debug, Serialize)]
struct RunConfig {
    kind: Kind,
    p: u32,
    dx: u32,
    dn: u32,
    d_assoc: u32,
    seed: u64,
    suites: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    jobs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    corrupt: Option<Corruption>,
}

#[derive(Serialize)]
struct Bundle<'a> {
    schema_version: u32,
    command: &'a str,
    config: &'a RunConfig,
    artifacts: BTreeMap<&'static str, String>,
    status: &'static str,
    reports: &'a [VerifyReport],
}

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        out.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(out)
}

fn resolve(opts: &Opts) -> Result<RunConfig, Error> {
    let mut file = match &opts.config {
        Some(p) => parse_config_file(p)?,
        None => BTreeMap::new(),
    };
    let mut take = |key: &str, flag: Option<String>| {
        let from_file = file.remove(key);
        flag.or(from_file)
    };
    fn num<T: std::str::FromStr>(key: &str, v: Option<String>) -> Result<Option<T>, Error> {
        v.map(|s| s.parse().map_err(|_| Error::Parse(format!("{key}: bad value `{s}`")))).transpose()
    }
    let kind: Kind = take("kind", opts.kind.clone()).ok_or_else(|| Error::Parse("missing --kind".into()))?.parse()?;
    let p: u32 = num("p", take("p", opts.p.map(|v| v.to_string())))?.ok_or_else(|| Error::Parse("missing --p".into()))?;
    let dx = num("dx", take("dx", opts.dx.map(|v| v.to_string())))?;
    let dn = num("dn", take("dn", opts.dn.map(|v| v.to_string())))?;
    let d_assoc = num("d_assoc", take("d_assoc", opts.d_assoc.map(|v| v.to_string())))?;
    let seed = num("seed", take("seed", opts.seed.map(|v| v.to_string())))?.unwrap_or(0);
    let jobs = num("jobs", take("jobs", opts.jobs.map(|v| v.to_string())))?.unwrap_or(1);
    let suites = match take("suites", opts.suites.clone()) {
        Some(s) => s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect(),
        None => SUITES.iter().map(|(n, _)| n.to_string()).collect(),
    };
    let out = take("out", opts.out.as_ref().map(|p| p.display().to_string())).map(PathBuf::from);
    let corrupt = take("corrupt", opts.corrupt.clone()).map(|s| s.parse()).transpose()?;
    if let Some(k) = file.keys().next() {
        return Err(Error::Parse(format!("unknown config key `{k}`")));
    }
    for s in &suites {
        if !SUITES.iter().any(|(n, _)| n == s) {
            return Err(Error::Parse(format!("unknown suite `{s}`")));
        }
    }
    if p < 2 || !(2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d)) {
        return Err(Error::BadPrime { kind: kind.to_string(), p });
    }
    let n = RootSystem::build(kind).num_pos();
    let def = Truncation::default_for(p, n);
    let (dx, dn) = (dx.unwrap_or(def.dx), dn.unwrap_or(def.dn));
    if dx == 0 || dn == 0 || jobs == 0 {
        return Err(Error::Parse("truncations and --jobs must be positive".into()));
    }
    Ok(RunConfig { kind, p, dx, dn, d_assoc: d_assoc.unwrap_or(6), seed, suites, out, jobs, corrupt })
}

fn suites_for(cfg: &RunConfig) -> Result<Suites, Error> {
    let mut sc = SuiteConfig::new(cfg.kind, cfg.p);
    sc.trunc = Truncation { dx: cfg.dx, dn: cfg.dn };
    sc.seed = cfg.seed;
    sc.hopf_degree = cfg.d_assoc;
    sc.corrupt = cfg.corrupt;
    Suites::new(sc)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BadPrime { .. } => 2,
        Error::Parse(_) => 4,
        Error::TruncationExceeded(_) | Error::TruncationTooSmall(_) | Error::Overflow(_) => 5,
        _ => 3,
    }
}

fn hashes(suites: &Suites) -> Result<BTreeMap<&'static str, String>, Error> {
    Ok(suites.built_artifacts()?.into_iter().map(|(name, body)| (name, hex::encode(Sha256::digest(body.as_bytes())))).collect())
}

fn write_out(path: &Path, body: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Parse(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, body).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn emit_bundle(command: &str, cfg: &RunConfig, suites: &Suites, reports: &[VerifyReport]) -> Result<bool, Error> {
    let ok = reports.iter().all(VerifyReport::passed);
    for r in reports {
        let extra = r.nontrivial.map(|k| format!(", {k} nontrivial")).unwrap_or_default();
        println!("{} {} ({} cases{extra})", if r.passed() { "PASS" } else { "FAIL" }, r.identity, r.cases);
        if let Some(f) = r.failures.first() {
            println!("  counterexample: {}\n  lhs: {}\n  rhs: {}", f.input, f.lhs, f.rhs);
        }
    }
    let bundle = Bundle { schema_version: SCHEMA_VERSION, command, config: cfg, artifacts: hashes(suites)?, status: if ok { "pass" } else { "fail" }, reports };
    let json = serde_json::to_string_pretty(&bundle).expect("report serializes");
    if let Some(out) = &cfg.out {
        write_out(out, &json)?;
    }
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool, Error> {
    let opts = match &cli.cmd {
        Command::Build(o) | Command::Verify(o) | Command::CompareKlt(o) | Command::Apply { opts: o, .. } => o,
        Command::Suites => {
            for (name, what) in SUITES {
                println!("{name:<20} {what}");
            }
            return Ok(true);
        }
    };
    let cfg = resolve(opts)?;
    rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global().ok();
    let suites = suites_for(&cfg)?;
    match &cli.cmd {
        Command::Build(_) => {
            let r = suites.split_ring()?;
            let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("artifacts"));
            let arts = suites.built_artifacts()?;
            for (name, body) in &arts {
                write_out(&dir.join(name), body)?;
            }
            let manifest = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "config": cfg,
                "steinberg_dim": r.steinberg().dim,
                "artifacts": hashes(&suites)?,
            });
            write_out(&dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
            println!("built {} p={} in {}: dim St = {}", cfg.kind, cfg.p, dir.display(), r.steinberg().dim);
            Ok(true)
        }
        Command::Verify(_) => {
            let reports = cfg.suites.iter().map(|s| suites.run(s)).collect::<Result<Vec<_>, _>>()?;
            emit_bundle("verify", &cfg, &suites, &reports)
        }
        Command::CompareKlt(_) => {
            let rep = suites.run("klt")?;
            emit_bundle("compare-klt", &cfg, &suites, &[rep])
        }
        Command::Apply { input, .. } => {
            let r = suites.split_ring()?;
            let text = fs::read_to_string(input).map_err(|e| Error::Parse(format!("{}: {e}", input.display())))?;
            let f = GradedSection::parse_text(&text, r.rank(), r.n(), r.field())?;
            r.check_truncation(&f)?;
            let out = r.sigma_tot(&f)?.to_text(r.n());
            match &cfg.out {
                Some(path) => write_out(path, &out)?,
                None => print!("{out}"),
            }
            Ok(true)
        }
        Command::Suites => unreachable!(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
