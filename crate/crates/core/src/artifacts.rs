//! File layout of the artifacts produced for one dataset.

use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArtifactPaths {
    pub dir: PathBuf,
}

impl ArtifactPaths {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ArtifactPaths { dir: dir.into() }
    }

    pub fn census(&self) -> PathBuf {
        self.dir.join("census.json")
    }

    pub fn gcn(&self) -> PathBuf {
        self.dir.join("gcn.json")
    }

    pub fn gcn_report(&self) -> PathBuf {
        report_path(&self.gcn())
    }

    pub fn surrogate(&self) -> PathBuf {
        self.dir.join("surrogate.json")
    }

    pub fn surrogate_report(&self) -> PathBuf {
        report_path(&self.surrogate())
    }
}

/// `model.json` -> `model.report.json`
pub fn report_path(model: &Path) -> PathBuf {
    let stem = model.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    model.with_file_name(format!("{stem}.report.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_sibling() {
        assert_eq!(report_path(Path::new("a/b/gcn.json")), PathBuf::from("a/b/gcn.report.json"));
        assert_eq!(ArtifactPaths::new("x").surrogate_report(), PathBuf::from("x/surrogate.report.json"));
    }
}
