use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use tracing_subscriber::EnvFilter;

use swingdiff_cli::api::{app, AppState, Session};
use swingdiff_cli::{exit_code, export, PortInUse};
use swingdiff_core::synth::upper_body_weights;
use swingdiff_core::{
    read_report, report_to_json, run_analysis, save_embedding_sequence, save_pose_sequence, synthesize_session,
    write_report, BodyPartGroup, SessionConfig, SessionSpec, SwingParams, WarpSpec,
};

#[derive(Parser, Debug)]
#[command(name = "swingdiff", version, about = "Compare a learner's swing against an expert's")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Align two clips and write an analysis report
    Analyze(AnalyzeArgs),
    /// Write a synthetic user/expert session to a directory
    Synth(SynthArgs),
    /// Serve the HTTP API (and viewer assets) for one session
    Serve(ServeArgs),
    /// Print a stored report as canonical JSON or CSV
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    user_pose: PathBuf,
    #[arg(long)]
    expert_pose: PathBuf,
    /// Embedding files; without them a pose-derived proxy embedding is used
    #[arg(long, requires = "expert_emb")]
    user_emb: Option<PathBuf>,
    #[arg(long, requires = "user_emb")]
    expert_emb: Option<PathBuf>,
    /// Additive cost of a non-diagonal alignment step
    #[arg(long, default_value_t = 0.0)]
    penalty: f64,
    /// Threshold = mean + k * std of the aligned distance
    #[arg(long, default_value_t = swingdiff_core::discrepancy::DEFAULT_THRESHOLD_K, allow_negative_numbers = true)]
    k: f64,
    /// Flagged runs separated by fewer unflagged frames are merged
    #[arg(long, default_value_t = swingdiff_core::discrepancy::DEFAULT_MIN_GAP)]
    min_gap: usize,
    /// Fit rotation and translation only
    #[arg(long)]
    no_scale: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Weights {
    /// Every body part weighted 1.0
    Uniform,
    /// Upper body 1.0, hips, knees and feet 0.3
    Upper,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "standard", value_parser = clap::builder::PossibleValuesParser::new(SwingParams::PRESETS))]
    preset: String,
    /// `identity` or interior control points `s:t,s:t,...`
    #[arg(long, default_value = "identity")]
    warp: String,
    #[arg(long)]
    out_dir: PathBuf,
    /// User clip length in frames (default: the expert's)
    #[arg(long)]
    user_len: Option<usize>,
    #[arg(long, value_enum, default_value_t = Weights::Uniform)]
    weights: Weights,
    #[arg(long, default_value_t = 0.0)]
    embedding_noise: f64,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["report", "config"])))]
struct ServeArgs {
    #[arg(long)]
    report: Option<PathBuf>,
    /// Session config; the analysis runs once at startup
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Directory with built viewer assets
    #[arg(long)]
    ui_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(io::stderr)
        .init();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Synth(a) => synth(a),
        Command::Serve(a) => serve(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", describe(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}

/// The error chain joined with `: `, skipping causes whose text an outer
/// message already includes.
fn describe(err: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !msg.contains(&text) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&text);
        }
    }
    msg
}

fn analyze(a: AnalyzeArgs) -> anyhow::Result<()> {
    let mut cfg = SessionConfig::new(a.user_pose, a.expert_pose);
    cfg.user_emb_path = a.user_emb;
    cfg.expert_emb_path = a.expert_emb;
    cfg.options.step_penalty = a.penalty;
    cfg.options.threshold_k = a.k;
    cfg.options.min_gap = a.min_gap;
    cfg.options.with_scale = !a.no_scale;
    let report = run_analysis(&cfg)?;
    write_report(&report, &a.out)?;
    tracing::info!(
        frames = report.comparisons.len(),
        total_cost = report.path.total_cost,
        threshold = report.threshold,
        segments = report.discrepancy.flagged_segments.len(),
        "wrote {}",
        a.out.display()
    );
    Ok(())
}

fn synth(a: SynthArgs) -> anyhow::Result<()> {
    let expert = SwingParams::preset(&a.preset, a.seed)?;
    let user = SwingParams::preset(&a.preset, a.seed.wrapping_add(1))?;
    let group_weights: BTreeMap<BodyPartGroup, f64> = match a.weights {
        Weights::Uniform => BodyPartGroup::PARTS.into_iter().map(|g| (g, 1.0)).collect(),
        Weights::Upper => upper_body_weights(0.3),
    };
    let spec = SessionSpec {
        user_len: a.user_len.unwrap_or(expert.total_frames()),
        expert,
        user,
        warp: WarpSpec::parse(&a.warp)?,
        group_weights,
        embedding_noise: a.embedding_noise,
        embedding_seed: a.seed,
    };
    let session = synthesize_session(&spec)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let dir = &a.out_dir;
    save_pose_sequence(dir.join("user_pose.json"), &session.pair.user_pose)?;
    save_pose_sequence(dir.join("expert_pose.json"), &session.pair.expert_pose)?;
    save_embedding_sequence(dir.join("user_emb.json"), &session.pair.user_emb)?;
    save_embedding_sequence(dir.join("expert_emb.json"), &session.pair.expert_emb)?;
    write_json(
        &dir.join("correspondence.json"),
        &serde_json::json!({ "expert_for_user": session.true_correspondence }),
    )?;
    let mut cfg = SessionConfig::new("user_pose.json", "expert_pose.json");
    cfg.user_emb_path = Some("user_emb.json".into());
    cfg.expert_emb_path = Some("expert_emb.json".into());
    write_json(&dir.join("session.json"), &cfg)?;
    tracing::info!("wrote synthetic session to {}", dir.display());
    Ok(())
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn serve(a: ServeArgs) -> anyhow::Result<()> {
    let report = match (&a.report, &a.config) {
        (Some(path), _) => read_report(path)?,
        (None, Some(path)) => run_analysis(&SessionConfig::load(path)?)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    let state = AppState::new(Session::with_echoed_poses(report));
    let addr = SocketAddr::new(a.host, a.port);
    let runtime = tokio::runtime::Runtime::new().context("starting async runtime")?;
    runtime.block_on(async move {
        let listener = match tokio::net::TcpListener::bind(addr).await {
            Ok(l) => l,
            Err(e) if e.kind() == io::ErrorKind::AddrInUse => return Err(PortInUse(a.port).into()),
            Err(e) => return Err(anyhow::Error::new(e).context(format!("binding {addr}"))),
        };
        tracing::info!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app(state, a.ui_dir)).await.context("serving")
    })
}

fn report(a: ReportArgs) -> anyhow::Result<()> {
    let report = read_report(&a.input)?;
    let mut buf = Vec::new();
    match a.format {
        Format::Json => buf.extend_from_slice(report_to_json(&report).as_bytes()),
        Format::Csv => export::write_csv(&report, &mut buf).map_err(io::Error::other)?,
    }
    match a.out {
        Some(path) => fs::write(&path, buf).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(&buf).context("writing to stdout"),
    }
}
