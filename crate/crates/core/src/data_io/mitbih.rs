use std::fs;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::signal::Signal;

pub const MITBIH_BEAT_LENGTH: usize = 187;
const MITBIH_CLASSES: usize = 5;

/// Loads the pre-segmented heartbeat CSV: 187 samples followed by a label
/// in `0..5` on every row. Several files (e.g. the train and test halves)
/// can be concatenated by calling this on each and merging the signals.
pub fn load_mitbih_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut signals = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != MITBIH_BEAT_LENGTH + 1 {
            return Err(err(format!(
                "expected {} columns, found {}",
                MITBIH_BEAT_LENGTH + 1,
                fields.len()
            )));
        }
        let mut values = Vec::with_capacity(MITBIH_BEAT_LENGTH);
        for f in &fields[..MITBIH_BEAT_LENGTH] {
            let v: f64 = f
                .parse()
                .map_err(|_| err(format!("non-numeric field {f:?}")))?;
            if !v.is_finite() {
                return Err(err(format!("non-finite field {f:?}")));
            }
            values.push(v);
        }
        let label_field = fields[MITBIH_BEAT_LENGTH];
        let label: f64 = label_field
            .parse()
            .map_err(|_| err(format!("non-numeric label {label_field:?}")))?;
        if label.fract() != 0.0 || !(0.0..MITBIH_CLASSES as f64).contains(&label) {
            return Err(err(format!(
                "label {label_field:?} outside 0..{MITBIH_CLASSES}"
            )));
        }
        signals.push(Signal::with_label(values, label as usize)?.standardize());
    }
    if signals.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "no data rows".into(),
        });
    }
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("mitbih")
        .to_string();
    Dataset::new(name, signals, MITBIH_CLASSES)
}
