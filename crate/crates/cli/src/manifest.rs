use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the config file, hex.
    pub input_digest: String,
    pub config: String,
    pub command: String,
    /// Full argument list after the program name.
    pub args: Vec<String>,
    pub tool_version: String,
    pub constants_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(config: Option<&Path>, command: &str, args: Vec<String>) -> CliResult<Self> {
        Ok(Self {
            input_digest: config.map(file_digest).transpose()?.unwrap_or_default(),
            config: config
                .map(|c| std::path::absolute(c).unwrap_or_else(|_| c.to_path_buf()).display().to_string())
                .unwrap_or_default(),
            command: command.to_string(),
            args,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            constants_version: rovib::units::CONSTANTS_VERSION.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read manifest `{}`: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad manifest `{}`: {e}", path.display())))
    }

    pub fn to_json(&self) -> CliResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fails if the config changed since the manifest was written.
    pub fn check_input(&self) -> CliResult<()> {
        if self.config.is_empty() {
            return Ok(());
        }
        let now = file_digest(Path::new(&self.config))?;
        if now != self.input_digest {
            return Err(CliError::Usage(format!(
                "config `{}` changed since the run (digest {} vs {})",
                self.config, now, self.input_digest
            )));
        }
        Ok(())
    }
}

pub fn file_digest(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Usage(format!("cannot read config `{}`: {e}", path.display())))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

/// `<out>.manifest.json` next to the output file.
pub fn sidecar(out: &Path, suffix: &str) -> std::path::PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(suffix);
    name.into()
}
