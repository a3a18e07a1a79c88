//! `uireplay`: replay recorded GUI episodes against a model endpoint or a
//! scripted transcript, score VQA items, validate datasets, and poke at the
//! reference kernels.
//!
//! Exit codes: 0 on success, 1 on evaluation-level failures (unreadable or
//! empty datasets, failed checks), 2 on usage errors.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::FileConfig;
use uireplay_core::dataset::{load_dataset, validate_dataset};
use uireplay_core::evaluation::{EvaluationReport, MatchConfig};
use uireplay_core::kernels::selfcheck::run_self_check;
use uireplay_core::patch_grid::{compute_grid, PatchGridSpec};
use uireplay_core::runtime::endpoint::{EndpointConfig, HttpEndpointClient};
use uireplay_core::runtime::scripted::ScriptedClient;
use uireplay_core::runtime::{run_suite, run_vqa_suite, HistoryMode, ModelClient, RunConfig};

#[derive(Parser)]
#[command(
    name = "uireplay",
    version,
    about = "Offline replay evaluation for mobile GUI agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a dataset's episodes and report WTSR/SSR/EDR per sector and bucket
    Evaluate(EvaluateArgs),
    /// Answer a dataset's VQA items and report recall/accuracy/F-score
    Vqa(VqaArgs),
    /// Check a dataset against the format invariants and count its contents
    ValidateDataset(ValidateArgs),
    /// Pick the patch grid for an image size under a token budget
    PatchGrid(PatchGridArgs),
    /// Re-render a saved results file as CSV or an aligned text table
    Report(ReportArgs),
    /// Run the kernel sanity battery (deterministic, seeded)
    KernelsSelfcheck(SelfcheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClientKind {
    /// Responses come from a transcript file; no network involved
    Scripted,
    /// Responses come from an HTTP endpoint configured via --config
    Endpoint,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HistoryModeArg {
    Chained,
    TeacherForced,
}

impl From<HistoryModeArg> for HistoryMode {
    fn from(arg: HistoryModeArg) -> Self {
        match arg {
            HistoryModeArg::Chained => HistoryMode::Chained,
            HistoryModeArg::TeacherForced => HistoryMode::TeacherForced,
        }
    }
}

#[derive(Args)]
struct ClientArgs {
    #[arg(long, value_enum)]
    client: ClientKind,
    /// Transcript file for the scripted client
    #[arg(long, required_if_eq("client", "scripted"))]
    transcript: Option<PathBuf>,
    /// Key-value config file for the endpoint client
    #[arg(long, required_if_eq("client", "endpoint"))]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    client: ClientArgs,
    /// Write the machine-readable CSV table here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the canonical JSON results here (input for `report`)
    #[arg(long)]
    results_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "chained")]
    history_mode: HistoryModeArg,
    /// Treat missing screenshots as errors
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value_t = 4)]
    max_parallel: usize,
    #[arg(long, default_value_t = 0.5)]
    iou_threshold: f64,
}

#[derive(Args)]
struct VqaArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    client: ClientArgs,
    /// Write the metrics as JSON here
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Treat missing screenshots as errors
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct PatchGridArgs {
    width: u32,
    height: u32,
    #[arg(long, default_value_t = 784)]
    budget: u32,
    #[arg(long, default_value_t = 16)]
    patch: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Csv,
    Text,
}

#[derive(Args)]
struct ReportArgs {
    /// Saved results JSON produced by `evaluate --results-out`
    #[arg(long)]
    results: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: ReportFormat,
    /// Write here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelfcheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct AppError {
    message: String,
    code: u8,
}

impl AppError {
    fn eval(message: impl Into<String>) -> Self {
        AppError {
            message: message.into(),
            code: 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Evaluate(args) => evaluate(args),
        Command::Vqa(args) => vqa(args),
        Command::ValidateDataset(args) => validate(args),
        Command::PatchGrid(args) => patch_grid(args),
        Command::Report(args) => report(args),
        Command::KernelsSelfcheck(args) => kernels_selfcheck(args),
    }
}

fn build_client(args: &ClientArgs) -> Result<(Box<dyn ModelClient>, FileConfig), AppError> {
    let file_config = match &args.config {
        Some(path) => FileConfig::load(path).map_err(AppError::eval)?,
        None => FileConfig::default(),
    };
    let client: Box<dyn ModelClient> = match args.client {
        ClientKind::Scripted => {
            let path = args.transcript.as_ref().expect("clap enforces --transcript");
            Box::new(ScriptedClient::from_file(path).map_err(|e| AppError::eval(e.to_string()))?)
        }
        ClientKind::Endpoint => {
            let url = file_config.endpoint_url.clone().ok_or_else(|| {
                AppError::eval("endpoint client needs `endpoint_url` in the config file")
            })?;
            Box::new(
                HttpEndpointClient::new(EndpointConfig {
                    url,
                    auth_header: file_config.effective_auth(),
                    timeout: file_config.timeout(),
                    retries: file_config.retries.unwrap_or(2),
                })
                .map_err(|e| AppError::eval(e.to_string()))?,
            )
        }
    };
    Ok((client, file_config))
}

fn run_config(
    history_mode: HistoryModeArg,
    max_parallel: usize,
    iou_threshold: f64,
    file_config: &FileConfig,
) -> RunConfig {
    RunConfig {
        history_mode: history_mode.into(),
        step_timeout: file_config.timeout(),
        retries: file_config.retries.unwrap_or(2),
        max_parallel_episodes: max_parallel.max(1),
        matcher: MatchConfig {
            iou_threshold,
            ..MatchConfig::default()
        },
    }
}

fn evaluate(args: EvaluateArgs) -> Result<(), AppError> {
    let dataset =
        load_dataset(&args.dataset, args.strict).map_err(|e| AppError::eval(e.to_string()))?;
    for warning in &dataset.warnings {
        eprintln!("warning: {warning}");
    }
    let (client, file_config) = build_client(&args.client)?;
    let cfg = run_config(
        args.history_mode,
        args.max_parallel,
        args.iou_threshold,
        &file_config,
    );
    let report =
        run_suite(&dataset, client.as_ref(), &cfg).map_err(|e| AppError::eval(e.to_string()))?;
    print!("{}", report.to_text_table());
    if let Some(out) = &args.out {
        std::fs::write(out, report.to_csv())
            .map_err(|e| AppError::eval(format!("cannot write {}: {e}", out.display())))?;
    }
    if let Some(out) = &args.results_out {
        report
            .save(out)
            .map_err(|e| AppError::eval(e.to_string()))?;
    }
    Ok(())
}

fn vqa(args: VqaArgs) -> Result<(), AppError> {
    let dataset =
        load_dataset(&args.dataset, args.strict).map_err(|e| AppError::eval(e.to_string()))?;
    for warning in &dataset.warnings {
        eprintln!("warning: {warning}");
    }
    let (client, file_config) = build_client(&args.client)?;
    let cfg = run_config(HistoryModeArg::Chained, 1, 0.5, &file_config);
    let metrics = run_vqa_suite(&dataset.vqa_items, client.as_ref(), &cfg, &dataset.root)
        .map_err(|e| AppError::eval(e.to_string()))?;
    println!(
        "recall={:.4} accuracy={:.4} f_score={:.4}",
        metrics.recall, metrics.accuracy, metrics.f_score
    );
    if let Some(out) = &args.out {
        let json = serde_json_string(&metrics)?;
        std::fs::write(out, json)
            .map_err(|e| AppError::eval(format!("cannot write {}: {e}", out.display())))?;
    }
    Ok(())
}

fn serde_json_string(metrics: &uireplay_core::evaluation::VqaMetrics) -> Result<String, AppError> {
    // Hand-rolled to keep the output format pinned and dependency-free.
    Ok(format!(
        "{{\"recall\":{:.6},\"accuracy\":{:.6},\"f_score\":{:.6}}}\n",
        metrics.recall, metrics.accuracy, metrics.f_score
    ))
}

fn validate(args: ValidateArgs) -> Result<(), AppError> {
    let report = validate_dataset(&args.dataset, args.strict)
        .map_err(|e| AppError::eval(e.to_string()))?;
    print!("{}", report.to_text());
    if report.is_clean() {
        Ok(())
    } else {
        Err(AppError::eval(format!(
            "{} dataset error(s) found",
            report.errors.len()
        )))
    }
}

fn patch_grid(args: PatchGridArgs) -> Result<(), AppError> {
    let spec = PatchGridSpec {
        budget_tokens: args.budget,
        patch_px: args.patch,
    };
    let grid = compute_grid(args.width, args.height, &spec)
        .map_err(|e| AppError::eval(e.to_string()))?;
    println!(
        "n_w={} n_h={} used={} pad={} resized_w={} resized_h={}",
        grid.n_w, grid.n_h, grid.used_tokens, grid.padding_tokens, grid.resized_w, grid.resized_h
    );
    Ok(())
}

fn report(args: ReportArgs) -> Result<(), AppError> {
    let report = EvaluationReport::load(&args.results).map_err(|e| AppError::eval(e.to_string()))?;
    let rendered = match args.format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Text => report.to_text_table(),
    };
    match &args.out {
        Some(out) => std::fs::write(out, rendered)
            .map_err(|e| AppError::eval(format!("cannot write {}: {e}", out.display())))?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn kernels_selfcheck(args: SelfcheckArgs) -> Result<(), AppError> {
    let report = run_self_check(args.seed);
    println!("seed: {}", report.seed);
    for check in &report.checks {
        let status = if check.passed { "ok" } else { "FAILED" };
        println!("check {}: {status} ({})", check.name, check.detail);
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(AppError::eval("kernel self-check failed"))
    }
}
