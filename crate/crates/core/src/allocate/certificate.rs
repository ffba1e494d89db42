use std::path::Path;

use serde::{Deserialize, Serialize};

use super::objective::ObjectiveReport;
use super::oracle::OracleSolution;
use crate::error::{Error, Result};
use crate::model::Allocation;

/// Companion document to an instance file holding a solved allocation and
/// its objective report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub report: ObjectiveReport,
    #[serde(default)]
    pub explored: u64,
    pub allocation: Allocation,
}

impl From<OracleSolution> for Certificate {
    fn from(s: OracleSolution) -> Self {
        Certificate {
            report: s.report,
            explored: s.explored,
            allocation: s.allocation,
        }
    }
}

impl Certificate {
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: Default::default(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml_string()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }
}
