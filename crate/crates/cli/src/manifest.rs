use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::{Deserialize, Serialize};

/// Written next to every artifact. `argv` replays the run; the timing fields
/// are the only ones that change between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name.
    pub argv: Vec<String>,
    /// Effective settings after defaults were applied.
    pub settings: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub started_unix_seconds: f64,
    pub wall_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

pub struct Clock {
    started: SystemTime,
    timer: Instant,
}

impl Clock {
    pub fn start() -> Self {
        Self {
            started: SystemTime::now(),
            timer: Instant::now(),
        }
    }
}

impl RunManifest {
    pub fn new(
        command: &str,
        argv: &[String],
        settings: impl Serialize,
        seed: u64,
        clock: &Clock,
        outputs: Vec<PathBuf>,
    ) -> anyhow::Result<Self> {
        Ok(Self {
            command: command.to_string(),
            argv: argv.to_vec(),
            settings: serde_json::to_value(settings)?,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_seconds: clock
                .started
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0),
            wall_seconds: clock.timer.elapsed().as_secs_f64(),
            outputs,
        })
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(path, text).with_context(|| format!("writing manifest {}", path.display()))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

/// `<artifact>.manifest.json`.
pub fn beside(artifact: &Path) -> PathBuf {
    let mut name = artifact.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
