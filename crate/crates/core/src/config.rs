//! JSON configuration schema.
//!
//! ```json
//! {
//!   "locations": [{ "id": 1, "coords": [0.0, 0.0] }, ...],
//!   "edges":     [{ "i": 1, "j": 2, "weight": 3.5 }, ...],
//!   "teams":     [{ "members": [1, 2], "comm_points": [1, 4] }, ...],
//!   "robots":    [{ "start": 1, "speed": 1.0 }, ...]
//! }
//! ```
//!
//! Teams and robots are numbered from 1 in the order they appear. The edge
//! `weight` is optional and defaults to the Euclidean distance between the
//! endpoints. Unknown fields are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub locations: Vec<LocationSpec>,
    pub edges: Vec<EdgeSpec>,
    pub teams: Vec<TeamSpec>,
    pub robots: Vec<RobotSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocationSpec {
    pub id: usize,
    pub coords: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub i: usize,
    pub j: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeamSpec {
    pub members: Vec<usize>,
    pub comm_points: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpec {
    pub start: usize,
    pub speed: f64,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_fields() {
        let text = r#"{"locations":[],"edges":[],"teams":[],"robots":[],"extra":1}"#;
        assert!(matches!(Config::from_json(text), Err(ConfigError::Parse(_))));
        let text = r#"{"locations":[{"id":1,"coords":[0],"z":2}],"edges":[],"teams":[],"robots":[]}"#;
        assert!(Config::from_json(text).is_err());
    }

    #[test]
    fn edge_weight_is_optional() {
        let text = r#"{"locations":[],"edges":[{"i":1,"j":2},{"i":2,"j":3,"weight":4.5}],"teams":[],"robots":[]}"#;
        let config = Config::from_json(text).unwrap();
        assert_eq!(config.edges[0].weight, None);
        assert_eq!(config.edges[1].weight, Some(4.5));
        let back = Config::from_json(&config.to_json()).unwrap();
        assert_eq!(back, config);
    }
}
