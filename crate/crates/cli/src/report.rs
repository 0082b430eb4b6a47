use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use theta_core::theta::ChoiceRecord;

pub const TOOL: &str = "theta-param";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

/// Output document of every subcommand. Object keys are emitted in sorted
/// order, so identical inputs give identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub operation: String,
    pub input_sha256: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub choices: Option<ChoiceRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

impl Report {
    pub fn new(operation: &str) -> Report {
        Report {
            tool: TOOL,
            version: VERSION,
            operation: operation.to_string(),
            input_sha256: Vec::new(),
            choices: None,
            outputs: None,
            error: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
