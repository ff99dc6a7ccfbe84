//! Command-line front end for graph signal reconstruction: community
//! detection, interpolation, synthetic test signals, and flow-CSV ingestion.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};

use gbf_pum::community::{detect_communities, CommunityError, CommunityParams};
use gbf_pum::graph::{Graph, GraphError, NodeSet, SignalVector};
use gbf_pum::io::{
    self, IoError, PartitionFile, RunReport, TimeBreakdown,
};
use gbf_pum::kernel::{KernelError, KernelParams};
use gbf_pum::measures::MeasureError;
use gbf_pum::mincut::MinCutError;
use gbf_pum::pum::{assemble_global, compute_errors, PumError};
use gbf_pum::synth::{sample_uniform, synth_signal, SynthError};
use gbf_pum::FailureKind;

#[derive(Parser)]
#[command(name = "gbfpum", version, about = "Kernel-based graph signal reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect sample-anchored communities and write them as JSON plus a
    /// plot-data CSV.
    Communities(CommunitiesArgs),
    /// Run the full reconstruction pipeline and write an error report.
    Interpolate(InterpolateArgs),
    /// Generate a reproducible smooth test signal.
    SynthSignal(SynthSignalArgs),
    /// Extract one time slice from a flow-measurement CSV.
    FlowIngest(FlowIngestArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("sample_spec").required(true).args(["samples", "sample_ids"])))]
struct SampleArgs {
    /// Number of sample vertices to draw uniformly (needs --seed).
    #[arg(long, requires = "seed")]
    samples: Option<usize>,
    /// Seed for the uniform sample draw.
    #[arg(long)]
    seed: Option<u64>,
    /// File listing explicit sample vertex ids, one per line.
    #[arg(long, value_name = "FILE")]
    sample_ids: Option<PathBuf>,
}

#[derive(Args)]
struct CommunityArgs {
    /// Inside-neighbor ratio below which a vertex expands with --dmax.
    #[arg(long, default_value_t = 0.75)]
    r: f64,
    /// BFS radius for boundary-heavy vertices.
    #[arg(long, default_value_t = 6)]
    dmax: usize,
    /// BFS radius for interior vertices.
    #[arg(long, default_value_t = 4)]
    dmin: usize,
    /// Communities smaller than this fraction of the graph get merged.
    #[arg(long, default_value_t = 0.02)]
    small_fraction: f64,
}

impl CommunityArgs {
    fn params(&self) -> CommunityParams {
        CommunityParams {
            r: self.r,
            dmax: self.dmax,
            dmin: self.dmin,
            small_fraction: self.small_fraction,
        }
    }
}

#[derive(Args)]
struct KernelArgs {
    /// Spectral shift of the kernel.
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Inverse power applied to the shifted Laplacian.
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    /// Least-squares regularization weight.
    #[arg(long, default_value_t = 1e-10)]
    gamma: f64,
}

impl KernelArgs {
    fn params(&self) -> KernelParams {
        KernelParams { epsilon: self.epsilon, s: self.s, gamma: self.gamma }
    }
}

#[derive(Args)]
struct CommunitiesArgs {
    /// Edge-list file of the graph.
    #[arg(long, value_name = "FILE")]
    graph: PathBuf,
    #[command(flatten)]
    sample: SampleArgs,
    #[command(flatten)]
    community: CommunityArgs,
    /// Output JSON file for the communities.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Output CSV for plotting (default: --out with a .csv extension).
    #[arg(long, value_name = "FILE")]
    plot_out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("signal_spec").required(true).args(["signal", "synth_seed"])))]
struct InterpolateArgs {
    /// Edge-list file of the graph.
    #[arg(long, value_name = "FILE")]
    graph: PathBuf,
    #[command(flatten)]
    sample: SampleArgs,
    /// CSV file with the true signal (node,value).
    #[arg(long, value_name = "FILE")]
    signal: Option<PathBuf>,
    /// Generate the true signal synthetically from this seed instead.
    #[arg(long)]
    synth_seed: Option<u64>,
    /// Keep only this many lowest graph frequencies in the synthetic
    /// signal (0 keeps all).
    #[arg(long, default_value_t = 0)]
    cutoff: usize,
    #[command(flatten)]
    community: CommunityArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Output JSON report file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Also write the approximation as a node,value CSV.
    #[arg(long, value_name = "FILE")]
    approx_out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthSignalArgs {
    /// Edge-list file of the graph.
    #[arg(long, value_name = "FILE")]
    graph: PathBuf,
    /// Seed of the noise the signal is filtered from.
    #[arg(long)]
    seed: u64,
    /// Keep only this many lowest graph frequencies (0 keeps all).
    #[arg(long, default_value_t = 0)]
    cutoff: usize,
    /// Output CSV file (node,value).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct FlowIngestArgs {
    /// Edge-list file of the graph.
    #[arg(long, value_name = "FILE")]
    graph: PathBuf,
    /// CSV file with rows node,timestamp,flow.
    #[arg(long, value_name = "FILE")]
    csv: PathBuf,
    /// Timestamp of the slice to extract.
    #[arg(long)]
    timestamp: String,
    /// Output CSV file (node,value).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Output list of the measured vertices kept (default: --out with a
    /// .nodes extension).
    #[arg(long, value_name = "FILE")]
    nodes_out: Option<PathBuf>,
}

/// A failed run, classified for the exit code.
struct Failure {
    kind: FailureKind,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure { kind: FailureKind::Validation, message: message.into() }
    }
}

macro_rules! failure_from {
    ($($ty:ty),+) => {$(
        impl From<$ty> for Failure {
            fn from(e: $ty) -> Self {
                Failure { kind: e.kind(), message: e.to_string() }
            }
        }
    )+};
}

failure_from!(CommunityError, MeasureError, MinCutError, KernelError, PumError, SynthError, IoError);

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        Failure::validation(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Communities(args) => cmd_communities(args),
        Command::Interpolate(args) => cmd_interpolate(args),
        Command::SynthSignal(args) => cmd_synth_signal(args),
        Command::FlowIngest(args) => cmd_flow_ingest(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            match failure.kind {
                FailureKind::Validation => ExitCode::from(2),
                FailureKind::Numerical => ExitCode::from(3),
            }
        }
    }
}

fn resolve_samples(g: &Graph, args: &SampleArgs) -> Result<NodeSet, Failure> {
    let n = g.node_count();
    if let Some(count) = args.samples {
        if count > n {
            return Err(Failure::validation(format!(
                "requested {count} samples but the graph has {n} vertices"
            )));
        }
        let seed = args.seed.expect("clap enforces --seed with --samples");
        return Ok(sample_uniform(n, count, seed)?);
    }
    let path = args.sample_ids.as_ref().expect("clap enforces the sample group");
    let ids = io::load_node_list(path)?;
    if ids.is_empty() {
        return Err(Failure::validation(format!(
            "sample file {} lists no vertices",
            path.display()
        )));
    }
    if let Some(&bad) = ids.iter().find(|&&id| id >= n) {
        return Err(Failure::validation(format!(
            "sample vertex {bad} out of range for a graph on {n} vertices"
        )));
    }
    Ok(NodeSet::from_unsorted(ids))
}

fn cmd_communities(args: CommunitiesArgs) -> Result<(), Failure> {
    let g = io::load_graph(&args.graph)?;
    let w = resolve_samples(&g, &args.sample)?;
    let detection = detect_communities(&g, &w, &args.community.params())?;
    log::info!(
        "found {} communities, modularity {:.6}",
        detection.partition.len(),
        detection.modularity
    );
    io::write_json(&args.out, &PartitionFile::from_detection(&detection))?;
    let plot_path =
        args.plot_out.clone().unwrap_or_else(|| args.out.with_extension("csv"));
    write_text(&plot_path, &io::format_communities_csv(&detection))?;
    Ok(())
}

fn cmd_interpolate(args: InterpolateArgs) -> Result<(), Failure> {
    let g = io::load_graph(&args.graph)?;
    let n = g.node_count();
    let w = resolve_samples(&g, &args.sample)?;

    // The truth signal either covers everything (synthetic) or the vertices
    // listed in the file; samples must fall inside the covered set.
    let (covered, truth): (NodeSet, Vec<f64>) = match (&args.signal, args.synth_seed) {
        (Some(path), None) => {
            let pairs = io::load_signal(path)?;
            if let Some(&(bad, _)) = pairs.iter().find(|&&(id, _)| id >= n) {
                return Err(Failure::validation(format!(
                    "signal vertex {bad} out of range for a graph on {n} vertices"
                )));
            }
            let covered = NodeSet::from_sorted(pairs.iter().map(|&(id, _)| id).collect());
            let values = pairs.into_iter().map(|(_, v)| v).collect();
            (covered, values)
        }
        (None, Some(seed)) => {
            let x = synth_signal(&g, seed, args.cutoff)?;
            (NodeSet::from_sorted((0..n).collect()), x.into_vec())
        }
        _ => unreachable!("clap enforces the signal group"),
    };
    if let Some(missing) = w.iter().find(|&id| !covered.contains(id)) {
        return Err(Failure::validation(format!(
            "sample vertex {missing} has no signal value"
        )));
    }
    let value_at = |id: usize| {
        truth[covered.ids().binary_search(&id).expect("id is covered")]
    };
    let x_w: Vec<f64> = w.iter().map(value_at).collect();

    let t0 = Instant::now();
    let detection = detect_communities(&g, &w, &args.community.params())?;
    let t_detect = t0.elapsed().as_secs_f64();
    log::info!(
        "found {} communities, modularity {:.6}",
        detection.partition.len(),
        detection.modularity
    );

    let t1 = Instant::now();
    let approx = assemble_global(&g, &detection.expanded, &w, &x_w, &args.kernel.params())?;
    let t_fit = t1.elapsed().as_secs_f64();
    let total = t0.elapsed().as_secs_f64();

    let truth_covered = SignalVector::new(truth.clone());
    let approx_covered =
        SignalVector::new(covered.iter().map(|id| approx[id]).collect());
    let report = compute_errors(&truth_covered, &approx_covered, total)?;
    log::info!("rmae {:.6e}, rrmse {:.6e}, {total:.3}s", report.rmae, report.rrmse);

    io::write_json(
        &args.out,
        &RunReport {
            approx: approx.as_slice().to_vec(),
            rmae: report.rmae,
            rrmse: report.rrmse,
            communities: detection.partition.len(),
            time_s: TimeBreakdown { detect: t_detect, fit: t_fit, total },
        },
    )?;
    if let Some(path) = &args.approx_out {
        let pairs: Vec<(usize, f64)> =
            approx.as_slice().iter().copied().enumerate().collect();
        io::write_signal(path, &pairs)?;
    }
    Ok(())
}

fn cmd_synth_signal(args: SynthSignalArgs) -> Result<(), Failure> {
    let g = io::load_graph(&args.graph)?;
    let x = synth_signal(&g, args.seed, args.cutoff)?;
    let pairs: Vec<(usize, f64)> = x.as_slice().iter().copied().enumerate().collect();
    io::write_signal(&args.out, &pairs)?;
    Ok(())
}

fn cmd_flow_ingest(args: FlowIngestArgs) -> Result<(), Failure> {
    let g = io::load_graph(&args.graph)?;
    let n = g.node_count();
    let records = io::load_flow_csv(&args.csv)?;
    let slice = io::slice_flow(&records, &args.timestamp)
        .map_err(|e| Failure::validation(e.to_string()))?;
    if let Some(&(bad, _)) = slice.iter().find(|&&(id, _)| id >= n) {
        return Err(Failure::validation(format!(
            "measured vertex {bad} unknown: the graph has {n} vertices"
        )));
    }

    let measured = NodeSet::from_sorted(slice.iter().map(|&(id, _)| id).collect());
    let (sub, map) = g.induced_subgraph(&measured)?;
    let components = sub.connected_components();
    let mut largest = &components[0];
    for component in &components[1..] {
        if component.len() > largest.len() {
            largest = component;
        }
    }
    let kept = map.set_to_global(largest);
    log::info!(
        "kept the largest of {} components: {} of {} measured vertices",
        components.len(),
        kept.len(),
        measured.len()
    );

    let pairs: Vec<(usize, f64)> =
        slice.into_iter().filter(|&(id, _)| kept.contains(id)).collect();
    io::write_signal(&args.out, &pairs)?;
    let nodes_path =
        args.nodes_out.clone().unwrap_or_else(|| args.out.with_extension("nodes"));
    io::write_node_list(&nodes_path, kept.ids())?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure {
        kind: FailureKind::Validation,
        message: format!("{}: {e}", path.display()),
    })
}
