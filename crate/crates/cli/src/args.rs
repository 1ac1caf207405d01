use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use itca::baselines::LinkageKind;
use itca::classifiers::ClassifierKind;
use itca::{CriterionName, ForbiddenMerges, Partition, Strategy};

#[derive(Debug, Parser)]
#[command(name = "itca", version, about = "Find which observed classes are worth distinguishing")]
pub struct Cli {
    /// Base seed for folds, simulations and randomized classifiers.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Number of cross-validation folds.
    #[arg(long, global = true)]
    pub folds: Option<usize>,

    /// Criterion to maximize; benchmark accepts a comma-separated list.
    #[arg(long, global = true, value_delimiter = ',')]
    pub criterion: Vec<CriterionName>,

    /// lda, soft_lda, random_forest, nearest_centroid or majority.
    #[arg(long, global = true)]
    pub classifier: Option<ClassifierKind>,

    /// Trees in the random forest.
    #[arg(long, global = true)]
    pub trees: Option<usize>,

    /// exhaustive, greedy or bfs; benchmark accepts a comma-separated list.
    #[arg(long, global = true, value_delimiter = ',')]
    pub strategy: Vec<Strategy>,

    /// Only merge neighboring classes.
    #[arg(long, global = true, conflicts_with = "nominal")]
    pub ordinal: bool,

    /// Merge any classes (the default for analyze).
    #[arg(long, global = true)]
    pub nominal: bool,

    /// Skip merges ruled out by the conditional-accuracy bound (itca, greedy or bfs).
    #[arg(long, global = true)]
    pub prune: bool,

    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Directory for every output file.
    #[arg(long, global = true, default_value = "itca-out")]
    pub out_dir: PathBuf,

    /// Re-run the job recorded in a manifest.json.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search class combinations of a labeled CSV.
    Analyze {
        input: PathBuf,
        /// Column holding the class labels.
        #[arg(long, default_value = "label")]
        label_column: String,
        /// Pairs that must stay apart, 1-based, e.g. "1-2,3-4".
        #[arg(long)]
        forbid: Option<ForbiddenMerges>,
    },
    /// Simulate a Gaussian dataset from a config file or flags.
    Simulate {
        /// JSON simulation config; flags are ignored when given.
        config_file: Option<PathBuf>,
        /// True partition, e.g. "{(1,2),3}".
        #[arg(long, default_value = "{(1,2),(3,4),(5,6)}")]
        partition: Partition,
        #[arg(long, default_value_t = 3.0)]
        step_length: f64,
        #[arg(long, default_value_t = 1.5)]
        sigma: f64,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        d: usize,
        /// Observed-class probabilities, comma-separated.
        #[arg(long, value_delimiter = ',')]
        probs: Vec<f64>,
    },
    /// Run a simulation sweep and score recoveries.
    Benchmark {
        #[arg(long, value_enum, default_value_t = SuiteArg::K0_6)]
        suite: SuiteArg,
        /// True partitions for the custom suite, separated by ';'.
        #[arg(long, value_delimiter = ';')]
        partitions: Vec<Partition>,
        /// Keep only the first this many instances.
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long, default_value_t = 3.0)]
        step_length: f64,
        #[arg(long, default_value_t = 1.5)]
        sigma: f64,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        d: usize,
    },
    /// Evaluate where merging two classes raises the criterion.
    Theory {
        #[arg(long, value_enum, default_value_t = AlgorithmArg::Oracle)]
        algorithm: AlgorithmArg,
        /// Cells per axis; defaults to 100, or 6 for empirical grids.
        #[arg(long)]
        resolution: Option<usize>,
        /// Distance between the two class means over σ (lda only).
        #[arg(long, default_value_t = 2.0)]
        separation: f64,
        #[arg(long, value_enum)]
        domain: Option<DomainArg>,
        /// Points per simulated dataset (empirical only).
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 5.0)]
        step_length: f64,
        #[arg(long, default_value_t = 1.5)]
        sigma: f64,
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        replicates: usize,
    },
    /// Combine classes by clustering their feature means.
    Baselines {
        input: PathBuf,
        #[arg(long, default_value = "label")]
        label_column: String,
        /// Number of combined classes to produce.
        #[arg(long)]
        k_star: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Kmeans)]
        method: MethodArg,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    #[value(name = "k0_6")]
    K0_6,
    #[value(name = "k0_8")]
    K0_8,
    #[value(name = "k0_20")]
    K0_20,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Oracle,
    #[value(name = "lda_limit")]
    LdaLimit,
    Lda,
    Empirical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Omega,
    Restricted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Kmeans,
    Single,
    Complete,
    Average,
}

impl MethodArg {
    pub fn linkage(self) -> Option<LinkageKind> {
        match self {
            MethodArg::Kmeans => None,
            MethodArg::Single => Some(LinkageKind::Single),
            MethodArg::Complete => Some(LinkageKind::Complete),
            MethodArg::Average => Some(LinkageKind::Average),
        }
    }
}
