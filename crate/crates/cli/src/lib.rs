//! Command-line front end for `lattice-collatz`: map files, command dispatch and
//! report export. [`run_command`] is the whole program minus process exit, so
//! it can be driven in-process by tests.

pub mod mapfile;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::result::Result;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lattice_collatz::density::DEFAULT_STATE_CAP;
use lattice_collatz::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

pub use mapfile::{emit_map_document, parse_map_document, MapFileError, MapSpecDocument};
pub use report::{Report, Table};

#[derive(Debug, Parser)]
#[command(name = "lattice-collatz", version, about = "Generalized Collatz mappings on lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format; `csv` is available for commands that export a table.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the output here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Add wall-clock time to the report (makes reports run-dependent).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormArg {
    Euclidean,
    Sup,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Norm {
        match n {
            NormArg::Euclidean => Norm::Euclidean,
            NormArg::Sup => Norm::Sup,
        }
    }
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
struct MapSource {
    /// JSON map document.
    #[arg(long, value_name = "FILE")]
    map: Option<PathBuf>,
    /// Built-in map: `zsqrt2` or `section4:d=<D>,b=<B>`.
    #[arg(long, value_name = "NAME", value_parser = parse_catalog)]
    catalog: Option<CatalogName>,
}

fn parse_catalog(s: &str) -> Result<CatalogName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_point(s: &str) -> Result<LatticePoint, String> {
    s.split(',')
        .map(|c| c.trim().parse::<BigInt>().map_err(|_| format!("{c:?} is not an integer")))
        .collect::<Result<Vec<_>, _>>()
        .map(LatticePoint::new)
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a map and summarise its basic properties.
    Validate {
        #[command(flatten)]
        source: MapSource,
    },
    /// Follow a trajectory until it cycles, is certified divergent, or hits the cap.
    Trajectory {
        #[command(flatten)]
        source: MapSource,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: LatticePoint,
        #[arg(long, default_value_t = 10_000)]
        max_steps: u64,
        /// Stop as soon as the trajectory enters the tame cone.
        #[arg(long)]
        certify_divergence: bool,
    },
    /// Least k with |T^k x| < |x|.
    Stopping {
        #[command(flatten)]
        source: MapSource,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: LatticePoint,
        #[arg(long, default_value_t = 1000)]
        cap: u64,
        #[arg(long, value_enum, default_value_t = NormArg::Euclidean)]
        norm: NormArg,
    },
    /// Separating hyperplanes, one primitive form per line in CSV.
    Hyperplanes {
        #[command(flatten)]
        source: MapSource,
    },
    /// Chambers of the separating arrangement and their wild/tame labels.
    Cones {
        #[command(flatten)]
        source: MapSource,
    },
    /// Lower bound on the density of divergent points (measure of the tame cone).
    Bound {
        #[command(flatten)]
        source: MapSource,
        #[arg(long, default_value_t = 200_000)]
        mc_samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = NormArg::Euclidean)]
        norm: NormArg,
    },
    /// Exact fraction of tame lattice points in balls of the given radii.
    DensityExact {
        #[command(flatten)]
        source: MapSource,
        #[arg(long, value_delimiter = ',', required = true)]
        radius: Vec<u64>,
        #[arg(long, value_enum, default_value_t = NormArg::Euclidean)]
        norm: NormArg,
    },
    /// Fractions a_k of residue sequences with multiplier product below d^k.
    Ak {
        #[command(flatten)]
        source: MapSource,
        #[arg(long, default_value_t = 8)]
        k_max: u32,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        state_cap: usize,
    },
    /// Exact check of prod m < d^(d^e).
    Hypothesis {
        #[command(flatten)]
        source: MapSource,
    },
    /// Fraction of sampled points certified divergent.
    SampleDivergent {
        #[command(flatten)]
        source: MapSource,
        #[arg(long)]
        radius: u64,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, alias = "cap", default_value_t = 1000)]
        max_steps: u64,
        #[arg(long, value_enum, default_value_t = NormArg::Euclidean)]
        norm: NormArg,
    },
    /// Fraction of sampled points with stopping time at most the cap.
    SampleStopping {
        #[command(flatten)]
        source: MapSource,
        #[arg(long)]
        radius: u64,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cap: u64,
        #[arg(long, value_enum, default_value_t = NormArg::Euclidean)]
        norm: NormArg,
    },
    /// Run the reference checks on the built-in maps.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Trajectory { .. } => "trajectory",
            Command::Stopping { .. } => "stopping",
            Command::Hyperplanes { .. } => "hyperplanes",
            Command::Cones { .. } => "cones",
            Command::Bound { .. } => "bound",
            Command::DensityExact { .. } => "density-exact",
            Command::Ak { .. } => "ak",
            Command::Hypothesis { .. } => "hypothesis",
            Command::SampleDivergent { .. } => "sample-divergent",
            Command::SampleStopping { .. } => "sample-stopping",
            Command::Report => "report",
        }
    }

    fn source(&self) -> Option<&MapSource> {
        match self {
            Command::Validate { source }
            | Command::Trajectory { source, .. }
            | Command::Stopping { source, .. }
            | Command::Hyperplanes { source }
            | Command::Cones { source }
            | Command::Bound { source, .. }
            | Command::DensityExact { source, .. }
            | Command::Ak { source, .. }
            | Command::Hypothesis { source }
            | Command::SampleDivergent { source, .. }
            | Command::SampleStopping { source, .. } => Some(source),
            Command::Report => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    MapFile { path: PathBuf, source: MapFileError },
    #[error(transparent)]
    Domain(#[from] Error),
    #[error("{0} reference check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Everything the process would print, and its exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_command<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, args) {
        Ok(stdout) => Outcome { code: 0, stdout, stderr: String::new() },
        Err(failure) => {
            let (e, partial) = *failure;
            Outcome {
                code: e.exit_code(),
                stdout: partial,
                stderr: format!("error: {e}\n"),
            }
        }
    }
}

fn load_map(source: &MapSource) -> Result<CollatzMap, CliError> {
    match (&source.map, &source.catalog) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Read { path: path.clone(), source: e })?;
            parse_map_document(&text).map_err(|e| CliError::MapFile { path: path.clone(), source: e })
        }
        (None, Some(name)) => Ok(name.build()),
        (None, None) => Err(CliError::Usage("one of --map or --catalog is required".into())),
    }
}

/// Returns the rendered output, or the error together with any output that
/// should still be shown (a failing `report` prints its findings).
fn execute(cli: &Cli, args: Vec<String>) -> Result<String, Box<(CliError, String)>> {
    let start = Instant::now();
    let mut report = build_report(cli, args).map_err(|e| Box::new((e, String::new())))?;
    if cli.timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    let rendered = match cli.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
        Format::Csv => match &report.table {
            Some(t) => t.to_csv(),
            None => {
                return Err(Box::new((
                    CliError::Usage(format!("`{}` has no tabular output; use --format json or text", report.command)),
                    String::new(),
                )))
            }
        },
    };
    let failed = report.results.get("failed").and_then(Value::as_u64).unwrap_or(0) as usize;
    let shown = match &cli.out {
        Some(path) => {
            std::fs::write(path, &rendered).map_err(|e| Box::new((CliError::Write { path: path.clone(), source: e }, String::new())))?;
            String::new()
        }
        None => rendered,
    };
    if failed > 0 {
        return Err(Box::new((CliError::ChecksFailed(failed), shown)));
    }
    Ok(shown)
}

fn build_report(cli: &Cli, args: Vec<String>) -> Result<Report, CliError> {
    let map = cli.command.source().map(load_map).transpose()?;
    let mut report = Report {
        command: cli.command.name().into(),
        args,
        map: map.as_ref().map(report::map_digest),
        results: Value::Null,
        seed: None,
        timing_ms: None,
        table: None,
    };
    let Some(map) = map else {
        report.results = reference_checks()?;
        return Ok(report);
    };
    report.results = match &cli.command {
        Command::Validate { .. } => validate(&map)?,
        Command::Trajectory { point, max_steps, certify_divergence, .. } => {
            trajectory(&map, point, *max_steps, *certify_divergence)?
        }
        Command::Stopping { point, cap, norm, .. } => {
            let res = stopping_time(&map, point, (*norm).into(), *cap)?;
            json!({ "point": report::point_json(point.coords()), "norm": norm_name(*norm), "cap": cap, "stopping_time": res.k })
        }
        Command::Hyperplanes { .. } => {
            let forms = enumerate_separating_forms(&map)?;
            let mut table = Table::new(&(1..=map.rank()).map(|i| format!("a{i}")).collect::<Vec<_>>().iter().map(String::as_str).collect::<Vec<_>>());
            table.rows = forms.iter().map(|f| f.coeffs().iter().map(i64::to_string).collect()).collect();
            report.table = Some(table);
            json!({ "count": forms.len(), "forms": forms.iter().map(|f| f.coeffs().to_vec()).collect::<Vec<_>>() })
        }
        Command::Cones { .. } => {
            let tame = TameCone::build(&map)?;
            let mut table = Table::new(&["chamber_id", "sign_vector", "wild"]);
            let mut chambers = Vec::new();
            for (id, c) in tame.chambers().iter().enumerate() {
                let signs = sign_string(&c.signs);
                table.rows.push(vec![id.to_string(), signs.clone(), c.wild.to_string()]);
                chambers.push(json!({ "id": id, "sign_vector": signs, "wild": c.wild, "interior": report::point_json(c.interior.coords()) }));
            }
            report.table = Some(table);
            json!({
                "forms": tame.forms().iter().map(|f| f.coeffs().to_vec()).collect::<Vec<_>>(),
                "count": chambers.len(),
                "wild_count": tame.wild_chambers().count(),
                "chambers": chambers,
            })
        }
        Command::Bound { mc_samples, seed, norm, .. } => {
            let est = divergence_density_bound(&map, (*norm).into(), &McConfig { samples: *mc_samples, seed: *seed })?;
            if est.kind == EstimateKind::MonteCarlo {
                report.seed = Some(*seed);
            }
            let mut results = json!({ "norm": norm_name(*norm), "bound": report::estimate_json(&est) });
            if let (Some(CatalogName::Section4(p)), NormArg::Euclidean) = (cli.command.source().and_then(|s| s.catalog), norm) {
                let closed = section4_closed_form_bound(p);
                results["closed_form"] = json!({ "value": closed, "abs_diff": (closed - est.value).abs() });
            }
            results
        }
        Command::DensityExact { radius, norm, .. } => {
            let tame = TameCone::build(&map)?;
            let mut table = Table::new(&["radius", "fraction", "value"]);
            let mut series = Vec::new();
            for &r in radius {
                let est = exact_tame_lattice_density(&tame, &BigRational::from_integer(r.into()), (*norm).into())?;
                let q = est.exact.as_ref().map(ToString::to_string).unwrap_or_default();
                table.rows.push(vec![r.to_string(), q.clone(), est.value.to_string()]);
                series.push(json!({ "radius": r, "fraction": q, "value": est.value }));
            }
            report.table = Some(table);
            json!({ "norm": norm_name(*norm), "series": series })
        }
        Command::Ak { k_max, state_cap, .. } => {
            let mut table = Table::new(&["k", "count", "total", "fraction", "value"]);
            let mut rows = Vec::new();
            for k in 1..=*k_max {
                let a = ak_fraction(&map, k, *state_cap)?;
                let value = num_traits::ToPrimitive::to_f64(&a.fraction).unwrap_or(f64::NAN);
                table.rows.push(vec![k.to_string(), a.count.to_string(), a.total.to_string(), a.fraction.to_string(), value.to_string()]);
                rows.push(json!({ "k": k, "count": report::big_json(&a.count), "total": report::big_json(&a.total), "fraction": a.fraction.to_string(), "value": value }));
            }
            report.table = Some(table);
            json!({ "rows": rows })
        }
        Command::Hypothesis { .. } => {
            let h = product_hypothesis(&map);
            json!({ "holds": h.holds, "product": report::big_json(&h.product), "bound": report::big_json(&h.bound) })
        }
        Command::SampleDivergent { radius, samples, seed, max_steps, norm, .. } => {
            let tame = TameCone::build(&map)?;
            let est = empirical_divergence_fraction(&map, &tame, *radius, *max_steps, *samples, *seed, (*norm).into())?;
            report.seed = Some(*seed);
            json!({ "radius": radius, "max_steps": max_steps, "norm": norm_name(*norm), "estimate": report::estimate_json(&est) })
        }
        Command::SampleStopping { radius, samples, seed, cap, norm, .. } => {
            let est = empirical_stopping_fraction(&map, *radius, *cap, *samples, *seed, (*norm).into())?;
            report.seed = Some(*seed);
            json!({ "radius": radius, "cap": cap, "norm": norm_name(*norm), "estimate": report::estimate_json(&est) })
        }
        Command::Report => unreachable!("handled above"),
    };
    Ok(report)
}

fn norm_name(n: NormArg) -> &'static str {
    match n {
        NormArg::Euclidean => "euclidean",
        NormArg::Sup => "sup",
    }
}

fn sign_string(signs: &[i8]) -> String {
    signs.iter().map(|&s| if s > 0 { '+' } else if s < 0 { '-' } else { '0' }).collect()
}

fn validate(map: &CollatzMap) -> Result<Value, CliError> {
    let positive = strictly_positive_witness(map.shifts(), map.rank())?;
    Ok(json!({
        "valid": true,
        "residue_classes": map.num_residues(),
        "relatively_prime_type": is_relatively_prime_type(map),
        "shift_span_rank": shift_span_rank(map),
        "acute": positive.is_some(),
        "positive_form": positive.map(|f| f.coeffs().to_vec()),
    }))
}

/// Longest cycle whose points are listed in full.
const MAX_LISTED_CYCLE: u64 = 64;

fn trajectory(map: &CollatzMap, x: &LatticePoint, max_steps: u64, certify: bool) -> Result<Value, CliError> {
    let tame = if certify { Some(TameCone::build(map)?) } else { None };
    let outcome = detect_cycle(map, x, max_steps, tame.as_ref())?;
    let detail = match outcome {
        TrajectoryOutcome::Cycle { preperiod, period } => {
            let mut cycle = Vec::new();
            if period <= MAX_LISTED_CYCLE {
                let mut y = iterate(map, x, preperiod)?;
                for _ in 0..period {
                    cycle.push(report::point_json(y.coords()));
                    y = step(map, &y)?;
                }
            }
            json!({ "kind": "cycle", "preperiod": preperiod, "period": period, "cycle": cycle })
        }
        TrajectoryOutcome::CertifiedDivergent { witness_step } => {
            let w = iterate(map, x, witness_step)?;
            json!({ "kind": "certified-divergent", "witness_step": witness_step, "witness": report::point_json(w.coords()) })
        }
        TrajectoryOutcome::ExceededCap { steps } => json!({ "kind": "exceeded-cap", "steps": steps }),
    };
    Ok(json!({
        "start": report::point_json(x.coords()),
        "max_steps": max_steps,
        "certify_divergence": certify,
        "outcome": detail,
    }))
}

/// Reference checks on the built-in maps; `failed` counts the checks that did not hold.
fn reference_checks() -> Result<Value, CliError> {
    let mut checks = Vec::new();
    let mut check = |name: &str, expected: Value, observed: Value, pass: bool| {
        checks.push(json!({ "name": name, "expected": expected, "observed": observed, "pass": pass }));
    };
    let z = build_zsqrt2_map();
    let forms = enumerate_separating_forms(&z)?;
    check("zsqrt2 separating hyperplanes", json!(10), json!(forms.len()), forms.len() == 10);
    let tame = TameCone::build(&z)?;
    let wild = tame.wild_chambers().count();
    check(
        "zsqrt2 chambers / wild chambers",
        json!([20, 5]),
        json!([tame.chambers().len(), wild]),
        tame.chambers().len() == 20 && wild == 5,
    );
    let mc = McConfig::default();
    let bz = divergence_density_bound(&z, Norm::Euclidean, &mc)?.value;
    check("zsqrt2 divergence bound", json!(0.5), json!(bz), (bz - 0.5).abs() <= 1e-12);

    let mut previous = f64::NEG_INFINITY;
    let mut increasing = true;
    for (d, b) in [(3, 1), (3, 10), (5, 20), (3, 100)] {
        let p = Section4Params::new(d, b)?;
        let v = divergence_density_bound(&build_section4_map(p), Norm::Euclidean, &mc)?.value;
        let closed = section4_closed_form_bound(p);
        check(&format!("section4 d={d} b={b} bound vs closed form"), json!(closed), json!(v), (v - closed).abs() <= 1e-9);
        increasing &= v > previous;
        previous = v;
    }
    check("section4 bounds increase with bd", json!(true), json!(increasing), increasing);

    let h = product_hypothesis(&build_section4_map(Section4Params::new(3, 1)?));
    check(
        "section4 d=3 product hypothesis",
        json!(["8192", "19683", true]),
        json!([h.product.to_string(), h.bound.to_string(), h.holds]),
        h.holds && h.product == BigInt::from(8192) && h.bound == BigInt::from(19683),
    );
    let hz = product_hypothesis(&z);
    check("zsqrt2 product hypothesis fails", json!(false), json!(hz.holds), !hz.holds);

    let cyc = detect_cycle(&z, &LatticePoint::from_i64s(&[1, 0]), 100, None)?;
    let ok = cyc == TrajectoryOutcome::Cycle { preperiod: 0, period: 2 };
    check("zsqrt2 cycle through (1,0)", json!("period 2"), json!(format!("{cyc:?}")), ok);

    let d10 = exact_tame_lattice_density(&tame, &BigRational::from_integer(10.into()), Norm::Euclidean)?;
    let q = d10.exact.map(|q| q.to_string()).unwrap_or_default();
    check("zsqrt2 tame lattice density at radius 10", json!("138/317"), json!(q), q == "138/317");

    let s = build_section4_map(Section4Params::new(3, 1)?);
    let a1 = ak_fraction(&s, 1, DEFAULT_STATE_CAP)?.fraction;
    let a8 = ak_fraction(&s, 8, DEFAULT_STATE_CAP)?.fraction;
    check("section4 d=3 b=1 a_8 > a_1", json!(a1.to_string()), json!(a8.to_string()), a8 > a1);

    let failed = checks.iter().filter(|c| c["pass"] == json!(false)).count();
    Ok(json!({ "checks": checks, "failed": failed }))
}
