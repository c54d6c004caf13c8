//! Versioned, checksummed model bundles: a one-line JSON header followed by
//! the trained tournament as JSON.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::multiclass::TrainedTournament;

pub const BUNDLE_FORMAT: &str = "argcbr-bundle";
pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("bundle i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a model bundle: {0}")]
    Header(String),
    #[error("bundle version {found} is not supported (expected {BUNDLE_VERSION})")]
    Version { found: u32 },
    #[error("bundle checksum mismatch; the file is truncated or corrupted")]
    Checksum,
    #[error("bundle payload: {0}")]
    Payload(String),
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    sha256: String,
}

pub fn save_bundle<W: Write>(
    mut sink: W,
    tournament: &TrainedTournament,
) -> Result<(), BundleError> {
    let payload =
        serde_json::to_vec(tournament).map_err(|e| BundleError::Payload(e.to_string()))?;
    let header = Header {
        format: BUNDLE_FORMAT.to_string(),
        version: BUNDLE_VERSION,
        sha256: hex::encode(Sha256::digest(&payload)),
    };
    serde_json::to_writer(&mut sink, &header).map_err(|e| BundleError::Payload(e.to_string()))?;
    sink.write_all(b"\n")?;
    sink.write_all(&payload)?;
    sink.write_all(b"\n")?;
    sink.flush()?;
    Ok(())
}

/// Reads a whole bundle; nothing is returned unless the checksum matches.
pub fn load_bundle<R: Read>(mut source: R) -> Result<TrainedTournament, BundleError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or(BundleError::Checksum)?;
    let header: Header = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| BundleError::Header(e.to_string()))?;
    if header.format != BUNDLE_FORMAT {
        return Err(BundleError::Header(format!(
            "unexpected format {:?}",
            header.format
        )));
    }
    if header.version != BUNDLE_VERSION {
        return Err(BundleError::Version {
            found: header.version,
        });
    }
    let mut payload = &bytes[newline + 1..];
    if let Some(stripped) = payload.strip_suffix(b"\n") {
        payload = stripped;
    }
    if hex::encode(Sha256::digest(payload)) != header.sha256 {
        return Err(BundleError::Checksum);
    }
    serde_json::from_slice(payload).map_err(|e| BundleError::Payload(e.to_string()))
}
