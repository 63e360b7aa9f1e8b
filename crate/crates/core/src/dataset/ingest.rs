use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{io_err, DatasetError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnomalousEntry {
    pub image: PathBuf,
    pub mask: PathBuf,
    pub defect: String,
}

/// File listing of one class. All lists are sorted by path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub class_name: String,
    pub normal_train: Vec<PathBuf>,
    pub normal_test: Vec<PathBuf>,
    pub anomalous_test: Vec<AnomalousEntry>,
}

fn require_dir(path: &Path) -> Result<(), DatasetError> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(DatasetError::Layout {
            path: path.to_path_buf(),
            reason: "missing directory".into(),
        })
    }
}

fn pngs_in(dir: &Path) -> Result<Vec<PathBuf>, DatasetError> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_file()
            && path
                .extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("png"))
        {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Indexes `root/class_name` laid out as `train/good`, `test/<defect>` and
/// `ground_truth/<defect>/<stem>_mask.png`.
pub fn ingest_mvtec(
    root: impl AsRef<Path>,
    class_name: &str,
) -> Result<DatasetIndex, DatasetError> {
    let class_dir = root.as_ref().join(class_name);
    let train_good = class_dir.join("train").join("good");
    let test_dir = class_dir.join("test");
    require_dir(&class_dir)?;
    require_dir(&train_good)?;
    require_dir(&test_dir)?;

    let normal_train = pngs_in(&train_good)?;
    let test_good = test_dir.join("good");
    let normal_test = if test_good.is_dir() {
        pngs_in(&test_good)?
    } else {
        Vec::new()
    };

    let mut defects = Vec::new();
    for entry in std::fs::read_dir(&test_dir).map_err(io_err(&test_dir))? {
        let path = entry.map_err(io_err(&test_dir))?.path();
        if path.is_dir() && path.file_name().is_some_and(|n| n != "good") {
            defects.push(path);
        }
    }
    defects.sort();

    let mut anomalous_test = Vec::new();
    for defect_dir in defects {
        let defect = defect_dir
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default()
            .to_string();
        let gt_dir = class_dir.join("ground_truth").join(&defect);
        for image in pngs_in(&defect_dir)? {
            let stem = image
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default();
            let mask = gt_dir.join(format!("{stem}_mask.png"));
            if !mask.is_file() {
                return Err(DatasetError::MissingMask(image));
            }
            anomalous_test.push(AnomalousEntry {
                image,
                mask,
                defect: defect.clone(),
            });
        }
    }
    anomalous_test.sort_by(|a, b| a.image.cmp(&b.image));

    Ok(DatasetIndex {
        class_name: class_name.to_string(),
        normal_train,
        normal_test,
        anomalous_test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn touch(p: &Path) {
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, b"").unwrap();
    }

    fn tree() -> tempfile::TempDir {
        let d = tempfile::tempdir().unwrap();
        let c = d.path().join("bottle");
        for n in ["002.png", "000.png", "001.png"] {
            touch(&c.join("train/good").join(n));
        }
        touch(&c.join("test/good/000.png"));
        touch(&c.join("test/crack/001.png"));
        touch(&c.join("test/crack/000.png"));
        touch(&c.join("ground_truth/crack/000_mask.png"));
        touch(&c.join("ground_truth/crack/001_mask.png"));
        d
    }

    #[test]
    fn well_formed_tree() {
        let d = tree();
        let idx = ingest_mvtec(d.path(), "bottle").unwrap();
        assert_eq!(idx.normal_train.len(), 3);
        assert_eq!(idx.normal_test.len(), 1);
        assert_eq!(idx.anomalous_test.len(), 2);
        assert!(idx.normal_train.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(idx.anomalous_test[0].defect, "crack");
        assert!(idx.anomalous_test[0].mask.ends_with("000_mask.png"));
        assert_eq!(ingest_mvtec(d.path(), "bottle").unwrap(), idx);
    }

    #[test]
    fn missing_mask_names_the_image() {
        let d = tree();
        touch(&d.path().join("bottle/test/crack/007.png"));
        match ingest_mvtec(d.path(), "bottle") {
            Err(DatasetError::MissingMask(p)) => assert!(p.ends_with("007.png")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_directories() {
        let d = tree();
        assert!(matches!(
            ingest_mvtec(d.path(), "cable"),
            Err(DatasetError::Layout { .. })
        ));
        fs::remove_dir_all(d.path().join("bottle/test")).unwrap();
        assert!(matches!(
            ingest_mvtec(d.path(), "bottle"),
            Err(DatasetError::Layout { .. })
        ));
    }
}
