use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use itca::benchmark::SweepConfig;
use itca::theory::{Domain, GridAlgorithm};
use itca::{SearchConfig, SimulationConfig};

use crate::CliError;

/// A fully resolved unit of work. Running the same job again reproduces
/// every output file except the manifest's timestamps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Job {
    Analyze {
        input: PathBuf,
        label_column: String,
        search: SearchConfig,
    },
    Simulate {
        simulation: SimulationConfig,
    },
    Benchmark {
        suite: String,
        sweep: SweepConfig,
    },
    Theory {
        grid: GridAlgorithm,
        resolution: usize,
        domain: Domain,
    },
    Baselines {
        input: PathBuf,
        label_column: String,
        k_star: usize,
        /// `kmeans`, or a linkage name for hierarchical clustering.
        method: String,
        seed: u64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub job: Job,
    /// Files written next to the manifest.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<RunManifest, CliError> {
        if !path.exists() {
            return Err(itca::Error::FileNotFound(path.to_path_buf()).into());
        }
        let text = std::fs::read_to_string(path).map_err(|source| itca::Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad manifest {}: {e}", path.display())))
    }
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}
