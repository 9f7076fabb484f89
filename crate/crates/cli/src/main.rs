use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use dtqw_rank::graph::{self, DirectedGraph, GraphError};
use dtqw_rank::rank::{
    self, GoogleConvention, PageRankOptions, RankError, DEFAULT_STEPS, DEFAULT_TELEPORT,
    DEFAULT_WINDOW,
};
use dtqw_rank::spectral::{self, SpectralError};
use rayon::prelude::*;
use thiserror::Error;

mod output;

use output::Format;

/// Node ranking on directed networks with a directed discrete-time quantum walk.
///
/// Edge-list files hold the node count N on the first line, then one
/// `src dst [weight]` per line; `#` starts a comment.
#[derive(Debug, Parser)]
#[command(name = "qwrank", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a network and write it as an edge list.
    Generate(GenerateArgs),
    /// Quantum ranks (and optionally PageRank) for one or more graphs.
    ///
    /// CSV columns: node, quantum_mean, quantum_variance[, classical],
    /// sorted by quantum_mean descending.
    Rank(RankArgs),
    /// Quantum ranks next to PageRank, with top-node match and Kendall tau-b.
    ///
    /// CSV starts with `# key,value` summary lines, followed by the columns
    /// node, classical, quantum_mean, quantum_variance (or depth instead of
    /// node with --group-by-depth).
    Compare(CompareArgs),
    /// Running-mean quantum ranks after every step, for convergence plots.
    ///
    /// CSV starts with `# key,value` lines (stabilization_step, window),
    /// followed by the columns step, then one column per tracked node or depth.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Tree,
    ScaleFree,
    Gnc,
    Cycle,
}

#[derive(Debug, Args)]
struct GeneratorParams {
    /// Tree branching factor.
    #[arg(long, default_value_t = 2)]
    branching: usize,
    /// Tree generations below the root.
    #[arg(long, default_value_t = 5)]
    generations: u32,
    /// Node count for scale-free, GNC and cycle graphs.
    #[arg(long, default_value_t = 32)]
    n: usize,
    /// Edges added per new node in the scale-free generator.
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GeneratorParams {
    fn build(&self, family: Family) -> Result<DirectedGraph, GraphError> {
        match family {
            Family::Tree => graph::gen_tree(self.branching, self.generations),
            Family::ScaleFree => graph::gen_scale_free(self.n, self.m, self.seed),
            Family::Gnc => graph::gen_gnc(self.n, self.seed),
            Family::Cycle => graph::gen_cycle(self.n),
        }
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    family: Family,
    #[command(flatten)]
    params: GeneratorParams,
    /// Edge-list destination; standard output if omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write a Graphviz DOT file.
    #[arg(long)]
    dot: Option<PathBuf>,
}

/// Exactly one of `--input` or `--family`.
#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "family"])))]
struct Source {
    /// Edge-list file(s).
    #[arg(long, short, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Generate the graph in memory instead of reading a file.
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[command(flatten)]
    params: GeneratorParams,
}

impl Source {
    fn single(&self) -> Result<DirectedGraph, CliError> {
        match (self.family, self.input.as_slice()) {
            (Some(family), _) => Ok(self.params.build(family)?),
            (None, [path]) => Ok(graph::read_edge_list(path)?),
            (None, _) => Err(CliError::Usage(
                "this command takes exactly one --input".into(),
            )),
        }
    }
}

#[derive(Debug, Args)]
struct ClassicalArgs {
    /// Teleport parameter of the Google matrix.
    #[arg(long, default_value_t = DEFAULT_TELEPORT)]
    p: f64,
    /// `paper`: G = (1-p)Â + (p/N)B; `standard`: G = pÂ + ((1-p)/N)B.
    #[arg(long, default_value_t = GoogleConvention::Paper)]
    convention: GoogleConvention,
}

impl ClassicalArgs {
    fn options(&self) -> PageRankOptions {
        PageRankOptions {
            p: self.p,
            convention: self.convention,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
struct RankArgs {
    #[command(flatten)]
    source: Source,
    /// Walk steps T.
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    steps: usize,
    /// Add a PageRank column.
    #[arg(long)]
    classical: bool,
    #[command(flatten)]
    pagerank: ClassicalArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Destination for a single graph; standard output if omitted.
    #[arg(long, short, conflicts_with = "output_dir")]
    output: Option<PathBuf>,
    /// Destination directory when ranking several input files.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads for several input files (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Write P, Q, singular values and U as CSV files into this directory.
    #[arg(long)]
    dump_spectral: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    steps: usize,
    #[command(flatten)]
    pagerank: ClassicalArgs,
    /// Compare mean ranks per distance-to-sink level instead of per node.
    #[arg(long)]
    group_by_depth: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    steps: usize,
    /// Steps the ordering must hold unchanged to count as stable.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    /// Track mean ranks per distance-to-sink level instead of per node.
    #[arg(long)]
    group_by_depth: bool,
    /// Only emit these nodes (or depths), comma separated.
    #[arg(long, value_delimiter = ',')]
    track: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 for numerical failures, 2 for I/O and argument errors.
    fn exit_code(&self) -> u8 {
        match self {
            Self::Rank(
                RankError::NoSteps
                | RankError::InvalidWindow { .. }
                | RankError::InvalidTeleport(_),
            ) => 2,
            Self::Rank(_) | Self::Json(_) => 1,
            Self::Spectral(SpectralError::Io { .. }) => 2,
            Self::Spectral(_) => 1,
            Self::Graph(_) | Self::Write { .. } | Self::Usage(_) => 2,
        }
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        }),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Write {
                path: "standard output".into(),
                source,
            }),
    }
}

fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    let g = args.params.build(args.family)?;
    match &args.output {
        Some(path) => {
            graph::write_edge_list(&g, path)?;
            println!("nodes {} edges {}", g.node_count(), g.edge_count());
        }
        None => {
            emit(&g.to_edge_list_string(), None)?;
            eprintln!("nodes {} edges {}", g.node_count(), g.edge_count());
        }
    }
    if let Some(dot) = &args.dot {
        emit(&g.to_dot(), Some(dot))?;
    }
    Ok(())
}

fn rank_one(g: &DirectedGraph, args: &RankArgs) -> Result<String, CliError> {
    let quantum = rank::quantum_rank(g, args.steps)?;
    let classical = if args.classical {
        Some(rank::pagerank(g, args.pagerank.options())?)
    } else {
        None
    };
    output::rank_table(&quantum, classical.as_ref(), &args.pagerank, args.format)
}

fn rank_command(args: &RankArgs) -> Result<(), CliError> {
    if args.source.family.is_some() || args.source.input.len() == 1 {
        let g = args.source.single()?;
        if let Some(dir) = &args.dump_spectral {
            let triple = spectral::svd(&g.adjacency_matrix())?;
            spectral::dump_csv(&triple, &spectral::unitary_from_svd(&triple), dir)?;
        }
        let text = rank_one(&g, args)?;
        return emit(&text, args.output.as_deref());
    }

    let Some(dir) = &args.output_dir else {
        return Err(CliError::Usage("several inputs need --output-dir".into()));
    };
    if args.dump_spectral.is_some() {
        return Err(CliError::Usage(
            "--dump-spectral takes a single graph".into(),
        ));
    }
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.display().to_string(),
        source,
    })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
    let results: Vec<Result<(), CliError>> = pool.install(|| {
        args.source
            .input
            .par_iter()
            .map(|path| {
                let g = graph::read_edge_list(path)?;
                let text = rank_one(&g, args)?;
                let stem = path.file_stem().unwrap_or(path.as_os_str());
                let mut out = dir.join(stem);
                out.set_extension(args.format.extension());
                emit(&text, Some(&out))
            })
            .collect()
    });
    // report every failure, exit with the first one's code
    let mut first = None;
    for (path, result) in args.source.input.iter().zip(results) {
        if let Err(e) = result {
            eprintln!("qwrank: {}: {e}", path.display());
            first.get_or_insert(e);
        }
    }
    first.map_or(Ok(()), Err)
}

fn depth_groups(g: &DirectedGraph) -> Result<Vec<Vec<usize>>, CliError> {
    let depths = g.sink_depths();
    if let Some(node) = depths.iter().position(Option::is_none) {
        return Err(CliError::Usage(format!(
            "--group-by-depth needs every node to reach a sink; node {node} does not"
        )));
    }
    let max = depths.iter().flatten().copied().max().unwrap_or(0);
    let mut groups = vec![Vec::new(); max + 1];
    for (node, d) in depths.iter().enumerate() {
        groups[d.unwrap_or(0)].push(node);
    }
    Ok(groups)
}

fn compare_command(args: &CompareArgs) -> Result<(), CliError> {
    let g = args.source.single()?;
    let quantum = rank::quantum_rank(&g, args.steps)?;
    let classical = rank::pagerank(&g, args.pagerank.options())?;
    let report = if args.group_by_depth {
        let groups = depth_groups(&g)?;
        rank::compare_values(
            &rank::group_means(&classical.ranks, &groups),
            &rank::group_means(&quantum.mean, &groups),
            &rank::group_means(&quantum.variance, &groups),
        )?
    } else {
        rank::compare(&classical, &quantum)?
    };
    let text = output::comparison(
        &report,
        args.group_by_depth,
        args.steps,
        &args.pagerank,
        args.format,
    )?;
    emit(&text, args.output.as_deref())
}

fn convergence_command(args: &ConvergenceArgs) -> Result<(), CliError> {
    let g = args.source.single()?;
    let profile = rank::convergence_profile(&g, args.steps, args.window)?;
    let (series, stabilization) = if args.group_by_depth {
        let groups = depth_groups(&g)?;
        let series: Vec<Vec<f64>> = profile
            .running_mean
            .iter()
            .map(|row| rank::group_means(row, &groups))
            .collect();
        (series, profile.grouped_stabilization(&groups))
    } else {
        (profile.running_mean.clone(), profile.stabilization_step)
    };
    let width = series.first().map_or(0, Vec::len);
    let tracked: Vec<usize> = if args.track.is_empty() {
        (0..width).collect()
    } else {
        args.track.clone()
    };
    if let Some(&bad) = tracked.iter().find(|&&x| x >= width) {
        return Err(CliError::Usage(format!(
            "--track {bad} is outside 0..{width}"
        )));
    }
    let text = output::convergence(
        &series,
        &tracked,
        args.group_by_depth,
        args.window,
        stabilization,
        args.format,
    )?;
    emit(&text, args.output.as_deref())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Generate(args) => generate(args),
        Command::Rank(args) => rank_command(args),
        Command::Compare(args) => compare_command(args),
        Command::Convergence(args) => convergence_command(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qwrank: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
