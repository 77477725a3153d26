//! CSV and JSON output.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{Report, SimError};

pub const CSV_HEADER: &str =
    "swept_var,value,mean_pdp,stderr_pdp,mean_php,stderr_php,overload_rate,trials,seed,config_hash";

impl Report {
    /// Rows in sweep order. Timing is left out so equal specs give equal bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let s = &r.summary;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.swept_var,
                r.value,
                s.mean_pdp,
                s.stderr_pdp,
                s.mean_php,
                s.stderr_php,
                s.overload_rate,
                s.trials,
                self.spec.seed,
                self.config_hash
            ));
        }
        out
    }
}

fn write(path: &Path, contents: &str) -> Result<(), SimError> {
    fs::write(path, contents).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_csv(report: &Report, path: &Path) -> Result<(), SimError> {
    write(path, &report.to_csv())
}

/// Pretty-printed, newline-terminated JSON.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), SimError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| SimError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    write(path, &text)
}
