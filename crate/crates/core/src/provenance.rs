use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL_NAME: &str = "junctest";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stamped into every artifact so outputs can be traced back to the config that made them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
}

impl Provenance {
    pub fn for_config_bytes(bytes: &[u8]) -> Self {
        Provenance { tool: TOOL_NAME.into(), version: TOOL_VERSION.into(), config_sha256: sha256_hex(bytes) }
    }

    /// One-line form used as a `#` comment in CSV outputs.
    pub fn comment_line(&self) -> String {
        format!("# {} {} config_sha256={}", self.tool, self.version, self.config_sha256)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
