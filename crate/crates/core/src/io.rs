//! Versioned JSON containers.
//!
//! Every artifact written by the crate is wrapped as
//!
//! ```json
//! { "format": "<kind>", "version": <u32>, "payload": { ... } }
//! ```
//!
//! Readers reject unknown kinds and versions instead of guessing.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    version: u32,
    payload: T,
}

pub fn to_json_string<T: Serialize>(kind: &str, value: &T) -> Result<String> {
    let env = Envelope {
        format: kind.to_string(),
        version: FORMAT_VERSION,
        payload: value,
    };
    Ok(serde_json::to_string_pretty(&env)?)
}

pub fn from_json_str<T: DeserializeOwned>(kind: &str, text: &str) -> Result<T> {
    let env: Envelope<serde_json::Value> = serde_json::from_str(text)?;
    if env.format != kind {
        return Err(Error::invalid_data(format!(
            "expected a '{kind}' container, found '{}'",
            env.format
        )));
    }
    if env.version != FORMAT_VERSION {
        return Err(Error::Version {
            kind: kind.to_string(),
            found: env.version,
            expected: FORMAT_VERSION,
        });
    }
    Ok(serde_json::from_value(env.payload)?)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, kind: &str, value: &T) -> Result<()> {
    let path = path.as_ref();
    let text = to_json_string(kind, value)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>, kind: &str) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json_str(kind, &text)
}
