//! `stdpart`: fit adoption curves, run participation decisions, reproduce the
//! bundled RBAC case, sweep what-if parameters and serve the HTTP API.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 numerical failure
//! (the curve fit did not converge), 1 anything else (I/O on output, bind).

pub mod render;
pub mod sweep;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use stdpart_core::fit::MIN_OBSERVATIONS;
use stdpart_core::ingest::read_observations;
use stdpart_core::{fit_gompertz, generate_case_report, CaseConfig, Error, FitConfig, Scenario};
use stdpart_service::documents::{case_record, CASES, DEFAULT_CURVE_SAMPLES};
use stdpart_service::{decide_outcome, fit_document, CaseDocument, DecideOptions, FitRequest};

use crate::sweep::{run_sweep, sweep_points, SweepParameter};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "stdpart", version, about = "Standards-participation decision toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the lifecycle curve to a year,penetration series.
    Fit(FitArgs),
    /// Recommend a participation level for a scenario document.
    Decide(DecideArgs),
    /// Reproduce a bundled case study.
    Case(CaseArgs),
    /// Sweep one scenario parameter and tabulate the decision at each point.
    WhatIf(WhatIfArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Structured,
    Delimited,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long, env = "STDPART_OUTPUT")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Human, env = "STDPART_FORMAT")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// Seed for the multi-start curve fit.
    #[arg(long, env = "STDPART_SEED")]
    pub seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true, env = "STDPART_THRESHOLD_INFLUENCE")]
    pub threshold_influence: Option<f64>,
    #[arg(long, allow_negative_numbers = true, env = "STDPART_THRESHOLD_ADVANTAGE")]
    pub threshold_advantage: Option<f64>,
    /// Overrides the scenario's opportunity cost coefficient.
    #[arg(long, allow_negative_numbers = true, env = "STDPART_OPPORTUNITY_COEFFICIENT")]
    pub opportunity_coefficient: Option<f64>,
}

impl EngineArgs {
    fn options(&self) -> DecideOptions {
        DecideOptions {
            threshold_influence: self.threshold_influence,
            threshold_advantage: self.threshold_advantage,
            seed: self.seed,
        }
    }

    fn scenario(&self, mut scenario: Scenario) -> Scenario {
        if let Some(k) = self.opportunity_coefficient {
            scenario.opportunity_cost_coefficient = k;
        }
        scenario
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with a year,penetration header; `-` reads standard input.
    #[arg(long, env = "STDPART_INPUT")]
    pub input: PathBuf,
    /// Year treated as t = 0. Defaults to the first row's year.
    #[arg(long, allow_negative_numbers = true, env = "STDPART_INCEPTION_YEAR")]
    pub inception_year: Option<f64>,
    #[arg(long, env = "STDPART_SEED")]
    pub seed: Option<u64>,
    /// Curve samples in the structured document.
    #[arg(long, default_value_t = DEFAULT_CURVE_SAMPLES)]
    pub samples: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DecideArgs {
    /// Scenario document (JSON); `-` reads standard input.
    #[arg(long, env = "STDPART_INPUT")]
    pub input: PathBuf,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CaseArgs {
    /// Case name.
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(CASES))]
    pub name: String,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct WhatIfArgs {
    /// Scenario document (JSON); `-` reads standard input.
    #[arg(long, env = "STDPART_INPUT")]
    pub input: PathBuf,
    /// One of p, V, L, R, opportunity_cost_coefficient, adopter_count_now.
    #[arg(long)]
    pub param: String,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long)]
    pub steps: usize,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "STDPART_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    /// Also serve files from this directory (e.g. a built UI) outside /api/.
    #[arg(long, env = "STDPART_STATIC_DIR")]
    pub static_dir: Option<PathBuf>,
}

/// A failed command: the exit code and the message for standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }

    fn other(message: impl Into<String>) -> Self {
        Failure { code: EXIT_OTHER, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = if err.is_numerical() { EXIT_NUMERICAL } else { EXIT_INPUT };
        let mut message = format!("error: {err}");
        if let Error::NonConvergence { best } = &err {
            message.push_str(&format!(
                "\nbest so far: d={} a={} b={} c={} rmse={}",
                best.params.baseline, best.params.scale, best.params.shape, best.params.rate, best.residual_rmse
            ));
        }
        Failure { code, message }
    }
}

type CmdResult = Result<(), Failure>;

fn open_input(path: &Path) -> Result<Box<dyn Read>, Failure> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdin()));
    }
    File::open(path)
        .map(|f| Box::new(f) as Box<dyn Read>)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn read_scenario(path: &Path) -> Result<Scenario, Failure> {
    let mut text = String::new();
    open_input(path)?
        .read_to_string(&mut text)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("error: malformed scenario {}: {e}", path.display())))
}

/// Writes `text` to the output file verbatim, or to standard output with a
/// trailing newline when it lacks one.
fn emit(out: &OutputArgs, text: &str) -> CmdResult {
    let result = match &out.output {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            let newline = if text.ends_with('\n') { "" } else { "\n" };
            write!(stdout, "{text}{newline}").and_then(|_| stdout.flush()).map_err(|e| format!("cannot write output: {e}"))
        }
    };
    result.map_err(Failure::other)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string(value).map_err(|e| Failure::other(e.to_string()))
}

fn delimited<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<String, Failure> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|e| Failure::other(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| Failure::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::other(e.to_string()))
}

fn cmd_fit(args: &FitArgs) -> CmdResult {
    let observations = read_observations(open_input(&args.input)?, args.inception_year)?;
    if observations.is_empty() {
        return Err(Error::InsufficientData { needed: MIN_OBSERVATIONS, got: 0 }.into());
    }
    let mut config = FitConfig::default();
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let text = match args.out.format {
        Format::Structured => fit_document(&FitRequest { observations, config, samples: args.samples })?,
        Format::Human => render::fit_report(&observations, &fit_gompertz(&observations, &config)?),
        Format::Delimited => {
            #[derive(Serialize)]
            struct Row {
                time_t: f64,
                observed: f64,
                fitted: f64,
                residual: f64,
            }
            let fit = fit_gompertz(&observations, &config)?;
            delimited(observations.iter().zip(&fit.residuals).map(|(o, r)| Row {
                time_t: o.time_t,
                observed: o.penetration,
                fitted: o.penetration + r,
                residual: *r,
            }))?
        }
    };
    emit(&args.out, &text)
}

fn cmd_decide(args: &DecideArgs) -> CmdResult {
    let scenario = args.engine.scenario(read_scenario(&args.input)?);
    let doc = decide_outcome(&scenario, &args.engine.options())?;
    let text = match args.out.format {
        // same serializer as the API payload
        Format::Structured => to_json(&doc)?,
        Format::Human => render::decision(&doc),
        Format::Delimited => {
            #[derive(Serialize)]
            struct Row {
                participation: &'static str,
                expected_value: f64,
                chosen: bool,
            }
            let chosen = doc.outcome.recommendation.participation;
            delimited(doc.outcome.action_values.iter().map(|a| Row {
                participation: a.participation.label(),
                expected_value: a.expected_value,
                chosen: a.participation == chosen,
            }))?
        }
    };
    emit(&args.out, &text)
}

fn cmd_case(args: &CaseArgs) -> CmdResult {
    let case = case_record(&args.name).ok_or_else(|| Failure::input(format!("unknown case '{}'", args.name)))?;
    let mut config = CaseConfig::default();
    config.decision = args.engine.options().config();
    if let Some(k) = args.engine.opportunity_coefficient {
        config.opportunity_cost_coefficient = k;
    }
    let report = generate_case_report(&case, &config)?;
    let doc = CaseDocument { case, report };
    let text = match args.out.format {
        Format::Structured => to_json(&doc)?,
        Format::Human => render::case(&doc),
        Format::Delimited => {
            #[derive(Serialize)]
            struct Row {
                year: f64,
                time_t: f64,
                observed: f64,
                fitted: f64,
                adopter_count: u64,
                influence: f64,
            }
            let r = &doc.report;
            delimited(r.fitted_points.iter().zip(&r.influence).map(|(p, i)| Row {
                year: p.year,
                time_t: p.time_t,
                observed: p.observed,
                fitted: p.fitted,
                adopter_count: i.adopter_count_k,
                influence: i.influence_i,
            }))?
        }
    };
    emit(&args.out, &text)
}

fn cmd_what_if(args: &WhatIfArgs) -> CmdResult {
    let parameter: SweepParameter = args.param.parse()?;
    let values = sweep_points(args.from, args.to, args.steps)?;
    let scenario = args.engine.scenario(read_scenario(&args.input)?);
    let rows = run_sweep(&scenario, parameter, &values, &args.engine.options())?;
    let text = match args.out.format {
        Format::Structured => {
            #[derive(Serialize)]
            struct Doc<'a> {
                parameter: &'a str,
                rows: &'a [sweep::SweepRow],
            }
            to_json(&Doc { parameter: parameter.name(), rows: &rows })?
        }
        Format::Human => render::sweep(parameter.name(), &rows),
        Format::Delimited => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            let header = [parameter.name(), "action", "participation", "expected_value", "full", "moderate", "none"];
            let mut write = || -> csv::Result<()> {
                writer.write_record(header)?;
                for r in &rows {
                    writer.write_record([
                        r.value.to_string(),
                        r.action.to_string(),
                        r.participation.to_string(),
                        r.expected_value.to_string(),
                        r.full.to_string(),
                        r.moderate.to_string(),
                        r.none.to_string(),
                    ])?;
                }
                writer.flush()?;
                Ok(())
            };
            write().map_err(|e| Failure::other(e.to_string()))?;
            let bytes = writer.into_inner().map_err(|e| Failure::other(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Failure::other(e.to_string()))?
        }
    };
    emit(&args.out, &text)
}

fn cmd_serve(args: &ServeArgs) -> CmdResult {
    let _ = tracing_subscriber::fmt().with_writer(io::stderr).try_init();
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::other(format!("cannot start runtime: {e}")))?;
    if let Some(dir) = &args.static_dir {
        if !dir.is_dir() {
            return Err(Failure::input(format!("static directory {} does not exist", dir.display())));
        }
    }
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(args.listen)
            .await
            .map_err(|e| Failure::other(format!("cannot listen on {}: {e}", args.listen)))?;
        let addr = listener.local_addr().map_err(|e| Failure::other(e.to_string()))?;
        eprintln!("stdpart API listening on http://{addr}/api/v1");
        let app = match &args.static_dir {
            Some(dir) => stdpart_service::router_with_assets(dir),
            None => stdpart_service::router(),
        };
        stdpart_service::serve(listener, app).await.map_err(|e| Failure::other(e.to_string()))
    })
}

pub fn execute(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Decide(a) => cmd_decide(a),
        Command::Case(a) => cmd_case(a),
        Command::WhatIf(a) => cmd_what_if(a),
        Command::Serve(a) => cmd_serve(a),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("{}", f.message);
            f.code
        }
    }
}
