use std::fs;
use std::path::{Path, PathBuf};

use super::Dataset;
use crate::error::{Error, Result};
use crate::signal::Signal;

struct Row {
    line: usize,
    label: f64,
    values: Vec<f64>,
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t').map(str::trim).collect()
    } else if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn parse_file(path: &Path) -> Result<Vec<Row>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    let mut width = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut nums = Vec::new();
        for field in split_fields(raw) {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(format!("non-numeric field {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("non-finite field {field:?}")));
            }
            nums.push(v);
        }
        match width {
            None => width = Some(nums.len()),
            Some(w) if w != nums.len() => {
                return Err(parse_err(format!(
                    "expected {w} fields, found {}",
                    nums.len()
                )))
            }
            _ => {}
        }
        if nums.len() < 3 {
            return Err(parse_err("need a label and at least 2 values".into()));
        }
        let label = nums.remove(0);
        rows.push(Row {
            line,
            label,
            values: nums,
        });
    }
    if rows.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "no data rows".into(),
        });
    }
    Ok(rows)
}

/// TRAIN files first, then TEST files, each group sorted by name.
fn split_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        if name.contains("_TRAIN") {
            train.push(path);
        } else if name.contains("_TEST") {
            test.push(path);
        }
    }
    if train.is_empty() {
        return Err(Error::Format {
            path: dir.to_path_buf(),
            message: "no *_TRAIN file found".into(),
        });
    }
    train.sort();
    test.sort();
    train.extend(test);
    Ok(train)
}

/// Loads a UCR-archive dataset: a single file, or a directory whose
/// `*_TRAIN*` and `*_TEST*` files are merged. Rows are a label followed by
/// the values, separated by tabs, commas or spaces. Labels are mapped to
/// `0..C` in increasing numeric order of the labels seen in the first
/// (training) file; each signal is standardized to `[0, 1]`.
pub fn load_ucr(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let files = if path.is_dir() {
        split_files(path)?
    } else {
        vec![path.to_path_buf()]
    };
    let parsed = files
        .iter()
        .map(|f| parse_file(f))
        .collect::<Result<Vec<_>>>()?;

    let mut classes: Vec<f64> = parsed[0].iter().map(|r| r.label).collect();
    classes.sort_by(f64::total_cmp);
    classes.dedup();

    let width = parsed[0][0].values.len();
    let mut signals = Vec::new();
    for (file, rows) in files.iter().zip(&parsed) {
        for r in rows {
            let err = |message: String| Error::Parse {
                path: file.clone(),
                line: r.line,
                message,
            };
            if r.values.len() != width {
                return Err(err(format!(
                    "expected {width} values, found {}",
                    r.values.len()
                )));
            }
            let label = classes
                .binary_search_by(|c| c.total_cmp(&r.label))
                .map_err(|_| err(format!("unknown label {}", r.label)))?;
            signals.push(Signal::with_label(r.values.clone(), label)?.standardize());
        }
    }
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .map(|s| {
            s.split("_TRAIN")
                .next()
                .unwrap_or(s)
                .split("_TEST")
                .next()
                .unwrap_or(s)
        })
        .unwrap_or("ucr")
        .to_string();
    Dataset::new(name, signals, classes.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn merges_train_and_test() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "Toy_TRAIN.tsv", "2\t0\t5\t10\n-1\t3\t1\t2\n");
        write(dir.path(), "Toy_TEST.tsv", "2\t1\t1\t2\n");
        let d = load_ucr(dir.path()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.labels(), vec![1, 0, 1]);
        assert_eq!(d.signals()[0].values(), &[0.0, 0.5, 1.0]);
        assert_eq!(d.signals()[1].values(), &[1.0, 0.0, 0.5]);
        assert_eq!(d.class_histogram(), &[1, 2]);
    }

    #[test]
    fn accepts_commas_and_spaces() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "1,0,1\n2,1,0\n");
        let b = write(
            dir.path(),
            "b.txt",
            "  1.0000000e+00  0  1\n  2.0000000e+00 1 0\n",
        );
        assert_eq!(
            load_ucr(a).unwrap().signals(),
            load_ucr(b).unwrap().signals()
        );
    }

    #[test]
    fn errors() {
        let dir = tempfile::tempdir().unwrap();
        let empty = write(dir.path(), "empty.tsv", "\n");
        assert!(matches!(load_ucr(empty), Err(Error::Format { .. })));
        let ragged = write(dir.path(), "ragged.tsv", "1\t0\t1\n1\t0\t1\t2\n");
        assert!(matches!(
            load_ucr(ragged),
            Err(Error::Parse { line: 2, .. })
        ));
        let text = write(dir.path(), "text.tsv", "1\t0\tx\n");
        assert!(matches!(load_ucr(text), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            load_ucr(dir.path().join("missing.tsv")),
            Err(Error::Io { .. })
        ));

        let sub = dir.path().join("U");
        fs::create_dir(&sub).unwrap();
        write(&sub, "U_TRAIN.tsv", "1\t0\t1\n");
        write(&sub, "U_TEST.tsv", "3\t0\t1\n");
        assert!(matches!(load_ucr(&sub), Err(Error::Parse { line: 1, .. })));
    }
}
