use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::Dataset;
use crate::error::{Error, Result};
use crate::landscape::{LandscapeGrid, LandscapeStack};
use crate::signal::Signal;

const STACKS_MAGIC: &[u8; 4] = b"TDLS";
pub const STACKS_VERSION: u32 = 1;
const NO_LABEL: u64 = u64::MAX;

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// CSV with one `label,v1,...,vn` row per signal. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn save_dataset(path: impl AsRef<Path>, d: &Dataset) -> Result<()> {
    let mut out = format!("# name={} classes={}\n", d.name, d.class_count());
    for s in d.signals() {
        write!(out, "{}", s.label().expect("dataset signals are labelled")).unwrap();
        for v in s.values() {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let format_err = |message: &str| Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    };
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).unwrap_or_default();
    let meta = header
        .strip_prefix("# ")
        .ok_or_else(|| format_err("missing dataset header"))?;
    let (mut name, mut classes) = (None, None);
    for kv in meta.split(' ') {
        match kv.split_once('=') {
            Some(("name", v)) => name = Some(v.to_string()),
            Some(("classes", v)) => classes = v.parse::<usize>().ok(),
            _ => {}
        }
    }
    let (name, classes) = name
        .zip(classes)
        .ok_or_else(|| format_err("header needs name= and classes="))?;
    let mut signals = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let mut fields = line.split(',');
        let label: usize = fields
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|_| err("bad label".into()))?;
        let values = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| err(format!("bad value {f:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        signals.push(Signal::with_label(values, label).map_err(|e| err(e.to_string()))?);
    }
    Dataset::new(name, signals, classes)
}

/// Binary stack file: magic, version, count, levels, grid points, grid
/// bounds, normalized flag, one label per stack (all ones when absent) and
/// then every stack's row-major values. All fields are little endian.
pub fn save_stacks(
    path: impl AsRef<Path>,
    stacks: &[LandscapeStack],
    labels: &[Option<usize>],
) -> Result<()> {
    let path = path.as_ref();
    let shape_err = |m: String| Error::Format {
        path: path.to_path_buf(),
        message: m,
    };
    if stacks.len() != labels.len() {
        return Err(shape_err(format!(
            "{} stacks but {} labels",
            stacks.len(),
            labels.len()
        )));
    }
    let (levels, grid, normalized) = match stacks.first() {
        Some(s) => (s.num_levels(), *s.grid(), s.is_normalized()),
        None => (0, LandscapeGrid::default(), false),
    };
    if let Some(i) = stacks.iter().position(|s| {
        s.num_levels() != levels || *s.grid() != grid || s.is_normalized() != normalized
    }) {
        return Err(shape_err(format!(
            "stack {i} differs in shape from stack 0"
        )));
    }
    let mut buf = Vec::with_capacity(48 + stacks.len() * (8 + levels * grid.points * 8));
    buf.extend_from_slice(STACKS_MAGIC);
    buf.extend_from_slice(&STACKS_VERSION.to_le_bytes());
    buf.extend_from_slice(&(stacks.len() as u64).to_le_bytes());
    buf.extend_from_slice(&(levels as u64).to_le_bytes());
    buf.extend_from_slice(&(grid.points as u64).to_le_bytes());
    buf.extend_from_slice(&grid.t_min.to_le_bytes());
    buf.extend_from_slice(&grid.t_max.to_le_bytes());
    buf.push(u8::from(normalized));
    for l in labels {
        buf.extend_from_slice(&l.map_or(NO_LABEL, |l| l as u64).to_le_bytes());
    }
    for s in stacks {
        for v in s.as_slice() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    write_atomic(path, &buf)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Option<[u8; N]> {
        let out = self.bytes.get(self.pos..self.pos + N)?.try_into().ok()?;
        self.pos += N;
        Some(out)
    }

    fn u64(&mut self) -> Option<u64> {
        self.take().map(u64::from_le_bytes)
    }

    fn f64(&mut self) -> Option<f64> {
        self.take().map(f64::from_le_bytes)
    }
}

pub fn load_stacks(path: impl AsRef<Path>) -> Result<(Vec<LandscapeStack>, Vec<Option<usize>>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let err = |m: &str| Error::Format {
        path: path.to_path_buf(),
        message: m.into(),
    };
    let truncated = || err("truncated stack file");
    let mut r = Reader {
        bytes: &bytes,
        pos: 0,
    };
    if r.take::<4>().as_ref() != Some(STACKS_MAGIC) {
        return Err(err("not a landscape stack file"));
    }
    let version = r.take().map(u32::from_le_bytes).ok_or_else(truncated)?;
    if version != STACKS_VERSION {
        return Err(err(&format!("unsupported stack file version {version}")));
    }
    let count = r.u64().ok_or_else(truncated)? as usize;
    let levels = r.u64().ok_or_else(truncated)? as usize;
    let points = r.u64().ok_or_else(truncated)? as usize;
    let t_min = r.f64().ok_or_else(truncated)?;
    let t_max = r.f64().ok_or_else(truncated)?;
    let normalized = r.take::<1>().ok_or_else(truncated)?[0] != 0;
    let per = levels
        .checked_mul(points)
        .and_then(|p| p.checked_mul(8))
        .ok_or_else(|| err("stack shape overflows"))?;
    let expected = count
        .checked_mul(per + 8)
        .and_then(|b| b.checked_add(r.pos))
        .ok_or_else(|| err("stack count overflows"))?;
    if bytes.len() != expected {
        return Err(err(&format!(
            "expected {expected} bytes for {count} stacks, found {}",
            bytes.len()
        )));
    }
    let grid = LandscapeGrid::new(t_min, t_max, points)?;
    let labels = (0..count)
        .map(|_| {
            let l = r.u64().expect("length checked");
            (l != NO_LABEL).then_some(l as usize)
        })
        .collect();
    let stacks = (0..count)
        .map(|_| {
            let values = (0..levels * points)
                .map(|_| r.f64().expect("length checked"))
                .collect();
            LandscapeStack::from_raw(values, levels, grid, normalized)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((stacks, labels))
}

/// Flat CSV export: `sample,label,level,t,value` per grid point.
pub fn write_stacks_csv(
    path: impl AsRef<Path>,
    stacks: &[LandscapeStack],
    labels: &[Option<usize>],
) -> Result<()> {
    let mut out = String::from("sample,label,level,t,value\n");
    for (i, (s, l)) in stacks.iter().zip(labels).enumerate() {
        let label = l.map(|l| l.to_string()).unwrap_or_default();
        let ts = s.grid().ts();
        for (k, row) in s.rows().enumerate() {
            for (t, v) in ts.iter().zip(row) {
                writeln!(out, "{i},{label},{},{t},{v}", k + 1).unwrap();
            }
        }
    }
    write_atomic(path, out.as_bytes())
}
