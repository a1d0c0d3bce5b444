use std::net::SocketAddr;
use std::path::PathBuf;

use artgraph::graph::Direction;
use artgraph::model::Mode;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Artistic knowledge graph pipeline.
///
/// Stages exchange files only, so each one can be rerun on its own. Every
/// flag can also be set through an ARTGRAPH_* environment variable, shown
/// next to it below.
#[derive(Debug, Parser)]
#[command(name = "artgraph", version, max_term_width = 100)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load nodes and edges TSV files into a graph snapshot
    Ingest(IngestArgs),
    /// Generate planted synthetic data: a snapshot and visual features
    Synth(SynthArgs),
    /// Split artworks and run node2vec on the training subgraph
    Embed(EmbedArgs),
    /// Write the labeled train, validation and test sets as dataset files
    Assemble(AssembleArgs),
    /// Train the classifier and write a checkpoint
    Train(TrainArgs),
    /// Report per-task accuracy of a checkpoint on one split
    Evaluate(EvaluateArgs),
    /// Train all three modes on one split and print the accuracy table
    Compare(CompareArgs),
    /// Run a discovery query against a snapshot
    Query(QueryArgs),
    /// Serve the JSON API and the static web bundle
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subset {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Out,
    In,
    Both,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Out => Direction::Out,
            DirectionArg::In => Direction::In,
            DirectionArg::Both => Direction::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Multimodal,
    RegularizationOnly,
    VisualOnly,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Multimodal => Mode::Multimodal,
            ModeArg::RegularizationOnly => Mode::RegularizationOnly,
            ModeArg::VisualOnly => Mode::VisualOnly,
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Nodes file: label, name, props columns
    #[arg(long, env = "ARTGRAPH_NODES", default_value = "nodes.tsv")]
    pub nodes: PathBuf,
    /// Edges file: src_label, src_name, type, dst_label, dst_name columns
    #[arg(long, env = "ARTGRAPH_EDGES", default_value = "edges.tsv")]
    pub edges: PathBuf,
    /// Snapshot to write
    #[arg(long, env = "ARTGRAPH_OUT", default_value = "graph.snap")]
    pub out: PathBuf,
    /// Write the full ingest report as JSON here [default: not written]
    #[arg(long, env = "ARTGRAPH_REPORT")]
    pub report: Option<PathBuf>,
    /// Fail with a data error if any row was rejected
    #[arg(long, env = "ARTGRAPH_STRICT")]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON generator spec; missing fields take built-in defaults [default: all defaults]
    #[arg(long, env = "ARTGRAPH_SPEC")]
    pub spec: Option<PathBuf>,
    /// Generator seed [default: the spec's seed]
    #[arg(long, env = "ARTGRAPH_SEED")]
    pub seed: Option<u64>,
    /// Snapshot to write
    #[arg(long, env = "ARTGRAPH_OUT", default_value = "graph.snap")]
    pub out: PathBuf,
    /// Visual feature table to write
    #[arg(long, env = "ARTGRAPH_FEATURES_OUT", default_value = "features.bin")]
    pub features_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Graph snapshot
    #[arg(long, env = "ARTGRAPH_SNAPSHOT", default_value = "graph.snap")]
    pub snapshot: PathBuf,
    /// Seed of the artwork split; held-out artworks are removed before walking
    #[arg(long, env = "ARTGRAPH_SPLIT_SEED", default_value_t = 0)]
    pub split_seed: u64,
    /// JSON node2vec config; missing fields take built-in defaults [default: all defaults]
    #[arg(long, env = "ARTGRAPH_CONFIG")]
    pub config: Option<PathBuf>,
    /// Walk and training seed [default: the config's seed]
    #[arg(long, env = "ARTGRAPH_SEED")]
    pub seed: Option<u64>,
    /// Embedding dimension [default: the config's dim]
    #[arg(long, env = "ARTGRAPH_DIM")]
    pub dim: Option<usize>,
    /// Skip-gram epochs [default: the config's epochs]
    #[arg(long, env = "ARTGRAPH_EPOCHS")]
    pub epochs: Option<usize>,
    /// Embedding table to write
    #[arg(long, env = "ARTGRAPH_OUT", default_value = "embeddings.bin")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AssembleArgs {
    /// Graph snapshot
    #[arg(long, env = "ARTGRAPH_SNAPSHOT", default_value = "graph.snap")]
    pub snapshot: PathBuf,
    /// Visual feature table
    #[arg(long, env = "ARTGRAPH_FEATURES", default_value = "features.bin")]
    pub features: PathBuf,
    /// Embedding table produced by `embed` with the same split seed
    #[arg(long, env = "ARTGRAPH_EMBEDDINGS", default_value = "embeddings.bin")]
    pub embeddings: PathBuf,
    /// Seed of the artwork split
    #[arg(long, env = "ARTGRAPH_SPLIT_SEED", default_value_t = 0)]
    pub split_seed: u64,
    /// Directory receiving train.ds, validation.ds and test.ds
    #[arg(long, env = "ARTGRAPH_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Graph snapshot
    #[arg(long, env = "ARTGRAPH_SNAPSHOT", default_value = "graph.snap")]
    pub snapshot: PathBuf,
    /// Visual feature table
    #[arg(long, env = "ARTGRAPH_FEATURES", default_value = "features.bin")]
    pub features: PathBuf,
    /// Embedding table produced by `embed` with the same split seed
    #[arg(long, env = "ARTGRAPH_EMBEDDINGS", default_value = "embeddings.bin")]
    pub embeddings: PathBuf,
    /// Seed of the artwork split
    #[arg(long, env = "ARTGRAPH_SPLIT_SEED", default_value_t = 0)]
    pub split_seed: u64,
    /// Which classifier variant to train
    #[arg(long, env = "ARTGRAPH_MODE", value_enum, default_value_t = ModeArg::Multimodal)]
    pub mode: ModeArg,
    /// JSON model config; dims and class counts are taken from the data [default: built-in]
    #[arg(long, env = "ARTGRAPH_CONFIG")]
    pub config: Option<PathBuf>,
    /// Initialisation and shuffling seed [default: the config's seed]
    #[arg(long, env = "ARTGRAPH_SEED")]
    pub seed: Option<u64>,
    /// Total epochs [default: the config's epochs]
    #[arg(long, env = "ARTGRAPH_EPOCHS")]
    pub epochs: Option<usize>,
    /// Adam step size [default: the config's learning_rate]
    #[arg(long, env = "ARTGRAPH_LEARNING_RATE")]
    pub learning_rate: Option<f64>,
    /// Continue from this checkpoint up to --epochs [default: start fresh]
    #[arg(long, env = "ARTGRAPH_RESUME")]
    pub resume: Option<PathBuf>,
    /// Checkpoint to write
    #[arg(long, env = "ARTGRAPH_OUT", default_value = "model.ckpt")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Checkpoint to evaluate
    #[arg(long, env = "ARTGRAPH_CHECKPOINT", default_value = "model.ckpt")]
    pub checkpoint: PathBuf,
    /// Graph snapshot
    #[arg(long, env = "ARTGRAPH_SNAPSHOT", default_value = "graph.snap")]
    pub snapshot: PathBuf,
    /// Visual feature table
    #[arg(long, env = "ARTGRAPH_FEATURES", default_value = "features.bin")]
    pub features: PathBuf,
    /// Seed of the artwork split; must match training [default: the checkpoint's, else 0]
    #[arg(long, env = "ARTGRAPH_SPLIT_SEED")]
    pub split_seed: Option<u64>,
    /// Which part of the split to score
    #[arg(long, env = "ARTGRAPH_SET", value_enum, default_value_t = Subset::Test)]
    pub set: Subset,
    /// Output format
    #[arg(long, env = "ARTGRAPH_FORMAT", value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// JSON generator spec for planted data [default: built-in spec]
    #[arg(long, env = "ARTGRAPH_SPEC", conflicts_with = "snapshot")]
    pub spec: Option<PathBuf>,
    /// Compare on an existing snapshot instead of planted data [default: none]
    #[arg(long, env = "ARTGRAPH_SNAPSHOT", requires = "features")]
    pub snapshot: Option<PathBuf>,
    /// Visual feature table for --snapshot [default: none]
    #[arg(long, env = "ARTGRAPH_FEATURES")]
    pub features: Option<PathBuf>,
    /// JSON comparison config (split_seed, node2vec, model) [default: the planted benchmark settings]
    #[arg(long, env = "ARTGRAPH_CONFIG")]
    pub config: Option<PathBuf>,
    /// Sets every seed: generator, split, node2vec and model [default: file values, else 0]
    #[arg(long, env = "ARTGRAPH_SEED")]
    pub seed: Option<u64>,
    /// Output format
    #[arg(long, env = "ARTGRAPH_FORMAT", value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Also write the report here [default: stdout only]
    #[arg(long, env = "ARTGRAPH_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Graph snapshot
    #[arg(long, env = "ARTGRAPH_SNAPSHOT", default_value = "graph.snap")]
    pub snapshot: PathBuf,
    /// Output format
    #[arg(long, env = "ARTGRAPH_FORMAT", value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub query: Query,
}

#[derive(Debug, Subcommand)]
pub enum Query {
    /// Every simple path between two artists
    Influence {
        /// Source artist: numeric id or exact name
        #[arg(long)]
        from: String,
        /// Target artist: numeric id or exact name
        #[arg(long)]
        to: String,
        /// Longest path, in hops (1 to 6)
        #[arg(long, default_value_t = 3)]
        max_depth: usize,
        /// Relations to follow, comma separated
        #[arg(long, value_delimiter = ',', default_value = "influenced")]
        edge_types: Vec<String>,
        /// Follow edges forwards, backwards or both ways
        #[arg(long, value_enum, default_value_t = DirectionArg::Out)]
        direction: DirectionArg,
    },
    /// Artists grouped by hop distance from one artist
    Reachable {
        /// Artist: numeric id or exact name
        #[arg(long)]
        artist: String,
        /// Largest distance (1 to 6)
        #[arg(long, default_value_t = 2)]
        degrees: usize,
        /// Relations to follow, comma separated
        #[arg(long, value_delimiter = ',', default_value = "influenced")]
        edge_types: Vec<String>,
        /// Follow edges forwards, backwards or both ways
        #[arg(long, value_enum, default_value_t = DirectionArg::Out)]
        direction: DirectionArg,
    },
    /// Artworks kept in a country other than where they were completed
    Displaced,
    /// Artworks kept at a gallery, city or country
    AtLocation {
        /// Place: numeric id or exact gallery, city or country name
        #[arg(long)]
        place: String,
    },
    /// Properties and neighbours of one node
    Entity {
        /// Numeric id or exact name
        #[arg(long)]
        id: String,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Graph snapshot
    #[arg(long, env = "ARTGRAPH_SNAPSHOT", default_value = "graph.snap")]
    pub snapshot: PathBuf,
    /// Checkpoint enabling /api/predict [default: none, predict answers 503]
    #[arg(long, env = "ARTGRAPH_CHECKPOINT")]
    pub checkpoint: Option<PathBuf>,
    /// Address to bind
    #[arg(long, env = "ARTGRAPH_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    /// Directory served for non-API paths [default: none]
    #[arg(long, env = "ARTGRAPH_STATIC_DIR")]
    pub static_dir: Option<PathBuf>,
    /// Origins allowed by CORS, comma separated; `*` allows any [default: CORS off]
    #[arg(long, env = "ARTGRAPH_CORS_ORIGIN", value_delimiter = ',')]
    pub cors_origin: Vec<String>,
}
