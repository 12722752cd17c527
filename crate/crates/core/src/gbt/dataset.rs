//! Task datasets: one JSON object per line.
//!
//! ```json
//! {"id": "t1", "image_path": "shots/t1.png", "instruction": "Open settings",
//!  "target": {"bbox": [10, 20, 60, 44]}, "feasible": true,
//!  "metadata": {"application": "vscode", "resolution": [3840, 2160], "group": "dev"}}
//! ```
//!
//! `target` may also be `{"polygon": [[x, y], ...]}`. Infeasible tasks set
//! `"feasible": false` and usually omit `target`. `image_path` is optional
//! (simulated predictors need only the resolution); relative paths are
//! resolved against the dataset file's directory.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::ImageBounds;
use crate::imaging::TargetRegion;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read dataset {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetadata {
    #[serde(default)]
    pub application: String,
    pub resolution: (u32, u32),
    #[serde(default)]
    pub group: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundingTask {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_path: Option<PathBuf>,
    pub instruction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetRegion>,
    #[serde(default = "yes")]
    pub feasible: bool,
    pub metadata: TaskMetadata,
}

fn yes() -> bool {
    true
}

impl GroundingTask {
    pub fn bounds(&self) -> Option<ImageBounds> {
        let (w, h) = self.metadata.resolution;
        ImageBounds::new(w, h)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("field `id` is empty".into());
        }
        if self.bounds().is_none() {
            return Err("field `metadata.resolution` must be two positive integers".into());
        }
        match &self.target {
            Some(t) => t.validate().map_err(|e| format!("field `target`: {e}"))?,
            None if self.feasible => return Err("field `target` is required when `feasible` is true".into()),
            None => {}
        }
        Ok(())
    }
}

/// Parses one dataset line (1-based `line` for messages).
pub fn parse_task(text: &str, line: usize) -> Result<GroundingTask, DatasetError> {
    let task: GroundingTask =
        serde_json::from_str(text).map_err(|e| DatasetError::Invalid { line, message: e.to_string() })?;
    task.validate().map_err(|message| DatasetError::Invalid { line, message })?;
    Ok(task)
}

pub fn load_dataset(path: &Path) -> Result<Vec<GroundingTask>, DatasetError> {
    let io = |source| DatasetError::Io { path: path.to_owned(), source };
    let file = std::fs::File::open(path).map_err(io)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut seen = HashSet::new();
    let mut tasks = Vec::new();
    for (i, text) in BufReader::new(file).lines().enumerate() {
        let text = text.map_err(io)?;
        let line = i + 1;
        if text.trim().is_empty() {
            continue;
        }
        let mut task = parse_task(&text, line)?;
        if !seen.insert(task.id.clone()) {
            return Err(DatasetError::Invalid { line, message: format!("duplicate field `id` {:?}", task.id) });
        }
        if let Some(p) = &task.image_path {
            if p.is_relative() {
                task.image_path = Some(base.join(p));
            }
        }
        tasks.push(task);
    }
    Ok(tasks)
}

pub fn write_dataset(path: &Path, tasks: &[GroundingTask]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for t in tasks {
        serde_json::to_writer(&mut out, t)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let bbox = r#"{"id":"a","instruction":"x","target":{"bbox":[1,2,3,4]},"metadata":{"resolution":[100,100]}}"#;
        let t = parse_task(bbox, 1).unwrap();
        assert!(t.feasible);
        assert!(matches!(t.target, Some(TargetRegion::Bbox(_))));

        let infeasible = r#"{"id":"b","instruction":"x","feasible":false,"metadata":{"resolution":[100,100]}}"#;
        assert!(!parse_task(infeasible, 2).unwrap().feasible);

        let missing = r#"{"id":"c","instruction":"x","metadata":{"resolution":[100,100]}}"#;
        let err = parse_task(missing, 7).unwrap_err().to_string();
        assert!(err.starts_with("line 7:") && err.contains("target"), "{err}");
    }

    #[test]
    fn malformed_line_names_field() {
        let err = parse_task(r#"{"id":"c","metadata":{"resolution":[1,1]}}"#, 3).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("instruction"), "{err}");
    }

    #[test]
    fn duplicates_and_paths() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        let line =
            r#"{"id":"a","image_path":"img/a.png","instruction":"x","feasible":false,"metadata":{"resolution":[9,9]}}"#;
        std::fs::write(&p, format!("{line}\n\n")).unwrap();
        let tasks = load_dataset(&p).unwrap();
        assert_eq!(tasks[0].image_path.as_deref(), Some(dir.path().join("img/a.png").as_path()));
        std::fs::write(&p, format!("{line}\n{line}\n")).unwrap();
        assert!(load_dataset(&p).unwrap_err().to_string().contains("line 2"));
    }
}
