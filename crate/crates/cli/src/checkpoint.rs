//! Sweep checkpoints: a JSON-lines file with a header object followed by one
//! record per completed `n`. Every update rewrites the file through a
//! temporary sibling and a rename.

use std::io::Write;
use std::path::{Path, PathBuf};

use gamma_criteria::ball::{Ball, Mag};
use gamma_criteria::criterion::CriterionRow;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const CHECKPOINT_SCHEMA: &str = "gamma-criteria/checkpoint/1";

/// Settings a resumed run must share with the run that wrote the file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointConfig {
    pub m_list: Vec<u32>,
    pub frac_bits: u32,
    pub prec_cap: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    schema: String,
    config: CheckpointConfig,
}

/// A ball stored losslessly: hexadecimal midpoint with its precision, and
/// hexadecimal radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredBall {
    pub mid: String,
    pub prec: u32,
    pub rad: String,
}

impl StoredBall {
    pub fn from_ball(b: &Ball) -> StoredBall {
        StoredBall {
            mid: b.mid_hex(),
            prec: b.prec(),
            rad: b.rad().as_float().to_string_radix(16, None),
        }
    }

    pub fn to_ball(&self) -> std::result::Result<Ball, String> {
        let parse = |s: &str, prec: u32| {
            Float::parse_radix(s, 16)
                .map(|p| Float::with_val(prec, p))
                .map_err(|e| format!("bad number {s:?}: {e}"))
        };
        let mid = parse(&self.mid, self.prec)?;
        let rad = parse(&self.rad, 64)?;
        if rad.is_sign_negative() || rad.is_nan() {
            return Err(format!("bad radius {:?}", self.rad));
        }
        Ok(Ball::new(mid, Mag::from_float(&rad)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredRow {
    pub m: u32,
    pub l: StoredBall,
    pub a: String,
    pub j: StoredBall,
    pub frac_signed: StoredBall,
    pub frac_unsigned: StoredBall,
    pub table_ratio: StoredBall,
    pub prec_bits: u32,
    pub certified: bool,
}

/// All rows of one completed `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub schema: String,
    pub n: u32,
    pub rows: Vec<StoredRow>,
}

impl Record {
    pub fn from_rows(n: u32, rows: &[CriterionRow]) -> Record {
        let rows = rows
            .iter()
            .map(|r| StoredRow {
                m: r.m,
                l: StoredBall::from_ball(&r.l),
                a: r.a.to_string(),
                j: StoredBall::from_ball(&r.j),
                frac_signed: StoredBall::from_ball(&r.frac_signed),
                frac_unsigned: StoredBall::from_ball(&r.frac_unsigned),
                table_ratio: StoredBall::from_ball(&r.table_ratio),
                prec_bits: r.prec_bits,
                certified: r.certified,
            })
            .collect();
        Record { schema: CHECKPOINT_SCHEMA.to_string(), n, rows }
    }

    pub fn to_rows(&self) -> std::result::Result<Vec<CriterionRow>, String> {
        self.rows
            .iter()
            .map(|s| {
                Ok(CriterionRow {
                    n: self.n,
                    m: s.m,
                    l: s.l.to_ball()?,
                    a: s.a.parse::<Rational>().map_err(|e| format!("bad rational {:?}: {e}", s.a))?,
                    j: s.j.to_ball()?,
                    frac_signed: s.frac_signed.to_ball()?,
                    frac_unsigned: s.frac_unsigned.to_ball()?,
                    table_ratio: s.table_ratio.to_ball()?,
                    prec_bits: s.prec_bits,
                    certified: s.certified,
                })
            })
            .collect()
    }
}

pub struct Checkpoint {
    path: PathBuf,
    text: String,
    /// Completed rows in `(n, m)` order.
    pub rows: Vec<CriterionRow>,
    pub last_n: u32,
}

impl Checkpoint {
    /// Opens `path`, creating an empty checkpoint if the file does not exist.
    /// Any malformed content is an error; nothing is silently discarded.
    pub fn open(path: &Path, config: &CheckpointConfig) -> Result<Checkpoint> {
        let shown = path.display().to_string();
        let header_line = serde_json::to_string(&Header {
            schema: CHECKPOINT_SCHEMA.to_string(),
            config: config.clone(),
        })
        .expect("header serializes");
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Ok(Checkpoint {
                    path: path.to_path_buf(),
                    text: format!("{header_line}\n"),
                    rows: Vec::new(),
                    last_n: 0,
                });
            }
            Err(e) => return Err(CliError::io(shown, e)),
        };
        if !text.ends_with('\n') {
            return Err(CliError::checkpoint(&shown, "truncated final line"));
        }
        let mut lines = text.lines();
        let first = lines.next().ok_or_else(|| CliError::checkpoint(&shown, "empty file"))?;
        let header: Header = serde_json::from_str(first)
            .map_err(|e| CliError::checkpoint(&shown, format!("bad header: {e}")))?;
        if header.schema != CHECKPOINT_SCHEMA {
            return Err(CliError::checkpoint(&shown, format!("unsupported schema {:?}", header.schema)));
        }
        if header.config != *config {
            return Err(CliError::Usage(format!(
                "checkpoint {shown} was written with {:?}, this run uses {:?}",
                header.config, config
            )));
        }
        let mut rows = Vec::new();
        let mut last_n = 0;
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let rec: Record = serde_json::from_str(line)
                .map_err(|e| CliError::checkpoint(&shown, format!("line {lineno}: {e}")))?;
            if rec.schema != CHECKPOINT_SCHEMA {
                return Err(CliError::checkpoint(&shown, format!("line {lineno}: bad schema tag")));
            }
            if rec.n != last_n + 1 {
                return Err(CliError::checkpoint(
                    &shown,
                    format!("line {lineno}: expected n = {}, found {}", last_n + 1, rec.n),
                ));
            }
            let want: Vec<u32> = config.m_list.iter().copied().filter(|&m| m <= rec.n).collect();
            let got: Vec<u32> = rec.rows.iter().map(|r| r.m).collect();
            if want != got {
                return Err(CliError::checkpoint(&shown, format!("line {lineno}: rows for m = {got:?}")));
            }
            rows.extend(rec.to_rows().map_err(|e| CliError::checkpoint(&shown, format!("line {lineno}: {e}")))?);
            last_n = rec.n;
        }
        Ok(Checkpoint { path: path.to_path_buf(), text, rows, last_n })
    }

    /// Appends records and atomically replaces the file.
    pub fn commit(&mut self, records: &[Record]) -> Result<()> {
        for r in records {
            self.text.push_str(&serde_json::to_string(r).expect("record serializes"));
            self.text.push('\n');
            self.last_n = r.n;
        }
        let shown = self.path.display().to_string();
        let dir = match self.path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&shown, e))?;
        tmp.write_all(self.text.as_bytes()).map_err(|e| CliError::io(&shown, e))?;
        tmp.as_file().sync_all().map_err(|e| CliError::io(&shown, e))?;
        tmp.persist(&self.path).map_err(|e| CliError::io(&shown, e.error))?;
        Ok(())
    }
}
