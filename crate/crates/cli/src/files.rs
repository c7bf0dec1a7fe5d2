//! Reading and writing run artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use sbda_core::{BitVector, ObjectivePoint};

pub const MANIFEST: &str = "manifest.json";
pub const FRONT: &str = "front.csv";
pub const LOG: &str = "log.jsonl";
pub const PORTFOLIOS: &str = "portfolios.json";
pub const HV: &str = "hv.csv";
pub const EAF: &str = "eaf.csv";
pub const EAF_DIFF: &str = "eafdiff.csv";

/// Directory of run `index` inside an experiment directory.
pub fn run_dir(root: &Path, index: usize) -> PathBuf {
    root.join(format!("run_{index:03}"))
}

/// Writes through a sibling temporary file and a rename, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("cannot create directory {}", path.display()))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// One row of a front CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontRow {
    pub point: ObjectivePoint,
    pub iteration: usize,
    pub lambda1: f64,
    pub bits_hex: String,
}

impl FrontRow {
    pub fn bits(&self, n: usize) -> Result<BitVector> {
        BitVector::from_hex(&self.bits_hex, n)
            .with_context(|| format!("bad bit string `{}` for {n} variables", self.bits_hex))
    }
}

pub fn parse_front(text: &str, origin: &Path) -> Result<Vec<FrontRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "f1,f2,iteration,lambda1,lambda2,bits_hex" => {}
        _ => bail!("{}: missing front CSV header", origin.display()),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let row = (|| -> Option<FrontRow> {
            if fields.len() != 6 {
                return None;
            }
            Some(FrontRow {
                point: ObjectivePoint::new(fields[0].parse().ok()?, fields[1].parse().ok()?),
                iteration: fields[2].parse().ok()?,
                lambda1: fields[3].parse().ok()?,
                bits_hex: fields[5].trim().to_string(),
            })
        })();
        match row {
            Some(r) => rows.push(r),
            None => bail!("{}: malformed row at line {}", origin.display(), idx + 1),
        }
    }
    Ok(rows)
}

pub fn read_front(path: &Path) -> Result<Vec<FrontRow>> {
    parse_front(&read_text(path)?, path)
}

/// `f1,f2,<name>` rows.
pub fn points_csv(header: &str, rows: &[(ObjectivePoint, f64)]) -> String {
    let mut out = format!("f1,f2,{header}\n");
    for (p, v) in rows {
        out.push_str(&format!("{},{},{}\n", p.f1, p.f2, v));
    }
    out
}
