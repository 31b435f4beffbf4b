//! Row output in CSV or JSON lines.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use gamma_criteria::ball::Ball;
use gamma_criteria::criterion::CriterionRow;
use serde::Serialize;

use crate::args::Format;
use crate::error::{CliError, Result};
use crate::reference;

pub const ROW_SCHEMA: &str = "gamma-criteria/rows/1";

pub const ROW_COLUMNS: [&str; 8] =
    ["n", "m", "frac_signed", "frac_unsigned", "table_ratio", "cumavg", "prec_bits", "certified"];
pub const REFERENCE_COLUMNS: [&str; 2] = ["reference_value", "reference_status"];

pub const SIG_DIGITS: usize = 15;

/// Midpoint at 15 significant digits; `nan` for an unbounded enclosure.
pub fn render(b: &Ball) -> String {
    if !b.rad().is_finite() || !b.mid().is_finite() {
        "nan".to_string()
    } else {
        b.mid_string(SIG_DIGITS)
    }
}

pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::io(p.display().to_string(), e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(std::io::stdout()))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RowRecord {
    pub n: u32,
    pub m: u32,
    pub frac_signed: String,
    pub frac_unsigned: String,
    pub table_ratio: String,
    pub cumavg: String,
    pub prec_bits: u32,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_status: Option<&'static str>,
}

impl RowRecord {
    pub fn new(row: &CriterionRow, cumavg: &Ball, with_reference: bool) -> RowRecord {
        let (reference_value, reference_status) = if with_reference {
            let status = reference::compare(row.n, row.m, row.table_ratio.to_f64());
            let value = reference::published(row.n, row.m).unwrap_or("").to_string();
            (Some(value), Some(status.as_str()))
        } else {
            (None, None)
        };
        RowRecord {
            n: row.n,
            m: row.m,
            frac_signed: render(&row.frac_signed),
            frac_unsigned: render(&row.frac_unsigned),
            table_ratio: render(&row.table_ratio),
            cumavg: render(cumavg),
            prec_bits: row.prec_bits,
            certified: row.certified,
            reference_value,
            reference_status,
        }
    }

    fn fields(&self) -> Vec<String> {
        let mut v = vec![
            self.n.to_string(),
            self.m.to_string(),
            self.frac_signed.clone(),
            self.frac_unsigned.clone(),
            self.table_ratio.clone(),
            self.cumavg.clone(),
            self.prec_bits.to_string(),
            self.certified.to_string(),
        ];
        if let (Some(val), Some(st)) = (&self.reference_value, self.reference_status) {
            v.push(val.clone());
            v.push(st.to_string());
        }
        v
    }
}

enum Inner {
    Csv(csv::Writer<Box<dyn Write>>),
    Json(Box<dyn Write>),
}

/// Ordered row writer; the header is written only when asked for, so a
/// resumed run can continue an existing stream.
pub struct RowSink {
    inner: Inner,
    with_reference: bool,
    path: String,
}

impl RowSink {
    pub fn new(w: Box<dyn Write>, format: Format, with_reference: bool, path: Option<&Path>) -> RowSink {
        let inner = match format {
            Format::Csv => Inner::Csv(
                csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w),
            ),
            Format::Json => Inner::Json(w),
        };
        let path = path.map_or_else(|| "<stdout>".to_string(), |p| p.display().to_string());
        RowSink { inner, with_reference, path }
    }

    fn columns(&self) -> Vec<&'static str> {
        let mut c = ROW_COLUMNS.to_vec();
        if self.with_reference {
            c.extend(REFERENCE_COLUMNS);
        }
        c
    }

    fn io(&self, e: impl Into<std::io::Error>) -> CliError {
        CliError::io(self.path.clone(), e.into())
    }

    pub fn header(&mut self) -> Result<()> {
        let cols = self.columns();
        let res = match &mut self.inner {
            Inner::Csv(w) => w.write_record(&cols).map_err(std::io::Error::from),
            Inner::Json(w) => {
                let line = serde_json::json!({ "schema": ROW_SCHEMA, "columns": cols });
                writeln!(w, "{line}")
            }
        };
        res.map_err(|e| self.io(e))
    }

    pub fn write(&mut self, rec: &RowRecord) -> Result<()> {
        let res = match &mut self.inner {
            Inner::Csv(w) => w.write_record(rec.fields()).map_err(std::io::Error::from),
            Inner::Json(w) => {
                let line = serde_json::to_string(rec).expect("row serializes");
                writeln!(w, "{line}")
            }
        };
        res.map_err(|e| self.io(e))
    }

    pub fn flush(&mut self) -> Result<()> {
        let res = match &mut self.inner {
            Inner::Csv(w) => w.flush(),
            Inner::Json(w) => w.flush(),
        };
        res.map_err(|e| self.io(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Float;

    #[test]
    fn render_examples() {
        let b = Ball::exact(Float::with_val(64, 0.125));
        assert_eq!(render(&b), "0.125000000000000");
        let inf = Ball::new(Float::new(64), gamma_criteria::ball::Mag::inf());
        assert_eq!(render(&inf), "nan");
    }
}
