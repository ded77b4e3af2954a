//! Writes experiment artifacts: `{name}_s{seed}_{hash}.json` and `.csv`,
//! where `hash` is the first 16 hex digits of the SHA-256 of the JSON.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::verifier::ExperimentResult;
use crate::Result;

#[derive(Serialize)]
struct Document<'a> {
    config: &'a RunConfig,
    passed: bool,
    result: &'a ExperimentResult,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub json: String,
    pub csv: String,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub json_path: PathBuf,
    pub csv_path: PathBuf,
    pub hash: String,
}

/// JSON holds the resolved config and all records; the CSV starts with a
/// `# {config}` line followed by the header row.
pub fn render(config: &RunConfig, result: &ExperimentResult) -> Result<Rendered> {
    let doc = Document { config, passed: result.passed(), result };
    let mut json = serde_json::to_string_pretty(&doc)?;
    json.push('\n');
    let csv = format!("# {}\n{}", config.to_json(), result.to_csv());
    let digest = Sha256::digest(json.as_bytes());
    let hash = hex::encode(digest)[..16].to_string();
    Ok(Rendered { json, csv, hash })
}

pub fn write_artifacts(dir: &Path, config: &RunConfig, result: &ExperimentResult) -> Result<Artifacts> {
    let r = render(config, result)?;
    std::fs::create_dir_all(dir)?;
    let stem = format!("{}_s{}_{}", result.name, result.seed, r.hash);
    let json_path = dir.join(format!("{stem}.json"));
    let csv_path = dir.join(format!("{stem}.csv"));
    std::fs::write(&json_path, &r.json)?;
    std::fs::write(&csv_path, &r.csv)?;
    Ok(Artifacts { json_path, csv_path, hash: r.hash })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rerun_gives_identical_bytes() {
        let cfg = RunConfig::from_json(
            r#"{"schema_version":1,"seed":3,"threads":2,"experiment":{"name":"marcinkiewicz_check","trials":20}}"#,
        )
        .unwrap();
        let a = render(&cfg, &cfg.run().unwrap()).unwrap();
        let b = render(&cfg, &cfg.run().unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash.len(), 16);
        assert!(a.csv.starts_with("# {\"schema_version\":1"));
        assert_eq!(a.csv.lines().nth(1).unwrap(), "trial,n,total_mass,s_n1,s_n2,s_n1_over_mass,s_n2_over_mass");
    }

    #[test]
    fn writes_named_files() {
        let dir = std::env::temp_dir().join(format!("capacity-lab-out-{}", std::process::id()));
        let cfg =
            RunConfig::from_json(r#"{"schema_version":1,"seed":5,"experiment":{"name":"self_similarity","n_max":1}}"#)
                .unwrap();
        let art = write_artifacts(&dir, &cfg, &cfg.run().unwrap()).unwrap();
        let name = art.json_path.file_name().unwrap().to_str().unwrap().to_string();
        assert!(name.starts_with("self_similarity_s5_") && name.ends_with(".json"), "{name}");
        assert!(art.csv_path.exists());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
