use std::io::Write;

use gamma_criteria::analytic::{gamma_classic, gamma_new, gamma_reference, AnalyticError};
use gamma_criteria::ball::Ball;
use gamma_criteria::criterion::{
    a_nm, l_nm_capped, working_precision, CriterionContext, CriterionRow, PrecisionPolicy, RunningMeans,
};
use gamma_criteria::pade::{decimal_string, gap_bound, pade_row, PadeCriterionRow};
use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::Serialize;

use crate::args::{Format, Job, Method, RunConfig};
use crate::checkpoint::{Checkpoint, CheckpointConfig, Record};
use crate::error::{CliError, Result};
use crate::output::{open_output, RowRecord, RowSink, SIG_DIGITS};
use crate::verify;

/// Values of `n` computed together between checkpoint commits.
pub const SWEEP_BATCH: u32 = 16;

pub fn run(cfg: &RunConfig) -> Result<()> {
    match &cfg.job {
        Job::Table => cmd_table(cfg),
        Job::Sweep => cmd_sweep(cfg),
        Job::Verify(_) => verify::cmd_verify(cfg),
        Job::Gamma(_) => cmd_gamma(cfg),
        Job::Pade => cmd_pade(cfg),
    }
}

fn context(cfg: &RunConfig) -> CriterionContext {
    CriterionContext::new(PrecisionPolicy::with_cap(cfg.prec_cap), gamma_reference().clone())
}

fn finish_rows(cfg: &RunConfig, uncertified: usize) -> Result<()> {
    if uncertified == 0 {
        return Ok(());
    }
    if cfg.strict {
        return Err(CliError::StrictCap(uncertified));
    }
    eprintln!("warning: {uncertified} row(s) uncertified at the precision cap of {} bits", cfg.prec_cap);
    Ok(())
}

pub fn cmd_table(cfg: &RunConfig) -> Result<()> {
    let sweep = context(cfg).sweep(cfg.bound, &cfg.m_list, cfg.target_frac_bits)?;
    let mut sink = RowSink::new(open_output(cfg.out.as_deref())?, cfg.format, true, cfg.out.as_deref());
    sink.header()?;
    for (row, avg) in sweep.rows.iter().zip(&sweep.cumavg) {
        sink.write(&RowRecord::new(row, avg, true))?;
    }
    sink.flush()?;
    finish_rows(cfg, sweep.rows.iter().filter(|r| !r.certified).count())
}

/// Rows for `n` in `n_start..=n_max`; with a checkpoint, rows already
/// recorded there are skipped and their running means carried over, and
/// only the new rows are written (headerless when resuming).
pub fn cmd_sweep(cfg: &RunConfig) -> Result<()> {
    let ctx = context(cfg);
    let ck_cfg = CheckpointConfig {
        m_list: cfg.m_list.clone(),
        frac_bits: cfg.target_frac_bits,
        prec_cap: cfg.prec_cap,
    };
    let mut ck = match &cfg.checkpoint {
        Some(p) => Some(Checkpoint::open(p, &ck_cfg)?),
        None => None,
    };
    let mut means = RunningMeans::new();
    let mut start = 1;
    if let Some(c) = &ck {
        for r in &c.rows {
            means.push(r);
        }
        start = c.last_n + 1;
    }
    let mut sink = RowSink::new(open_output(cfg.out.as_deref())?, cfg.format, false, cfg.out.as_deref());
    if start == 1 {
        sink.header()?;
    }
    let mut uncertified = 0;
    let mut lo = start;
    while lo <= cfg.bound {
        let hi = (lo + SWEEP_BATCH - 1).min(cfg.bound);
        let batch = ctx.sweep_range(lo, hi, &cfg.m_list, cfg.target_frac_bits, &[])?;
        for row in &batch.rows {
            let avg = means.push(row);
            uncertified += usize::from(!row.certified);
            sink.write(&RowRecord::new(row, &avg, false))?;
        }
        sink.flush()?;
        if let Some(c) = ck.as_mut() {
            let records: Vec<Record> = (lo..=hi)
                .map(|n| {
                    let rows: Vec<CriterionRow> = batch.rows.iter().filter(|r| r.n == n).cloned().collect();
                    Record::from_rows(n, &rows)
                })
                .collect();
            c.commit(&records)?;
        }
        lo = hi + 1;
    }
    finish_rows(cfg, uncertified)
}

#[derive(Serialize)]
struct GammaOutput {
    schema: &'static str,
    method: &'static str,
    digits: u32,
    value: String,
    radius: String,
    prec_bits: u32,
}

/// γ from `A_{n,0} - L_{n,0} = γ - J_{n,0}` with `0 < J_{n,0} < 4^-n` and
/// `4^-n < 10^-(digits+2)`.
pub fn gamma_by_identity(digits: u32, cap: u32) -> Result<Ball> {
    let n = (((digits + 2) as f64 * std::f64::consts::LOG2_10) / 2.0).ceil() as u32 + 1;
    let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 32;
    let prec = working_precision(n, bits);
    let l = l_nm_capped(n, 0, prec, cap)?;
    let a = Ball::from_rational(&a_nm(n), prec);
    let half = Ball::from_rational(&Rational::from((Integer::from(1), Integer::from(1) << (2 * n + 1))), prec);
    let mut g = &(&a - &l) + &half;
    g.add_error(&half.mag());
    Ok(g)
}

pub fn cmd_gamma(cfg: &RunConfig) -> Result<()> {
    let Job::Gamma(method) = cfg.job else { unreachable!("gamma job") };
    let digits = cfg.bound;
    let res = match method {
        Method::Classic => gamma_classic(digits),
        Method::New => gamma_new(digits),
        Method::Identity => Ok(gamma_by_identity(digits, cfg.prec_cap)?),
    };
    let g = match res {
        Ok(g) => g,
        Err(AnalyticError::NotConverged { what, best, nodes }) => {
            return Err(CliError::Compute(format!(
                "{what} did not converge after {nodes} nodes; best enclosure {best:.40}"
            )));
        }
        Err(e) => return Err(e.into()),
    };
    let name = match method {
        Method::Classic => "classic",
        Method::New => "new",
        Method::Identity => "identity",
    };
    let out = GammaOutput {
        schema: "gamma-criteria/gamma/1",
        method: name,
        digits,
        value: g.mid_string(digits as usize),
        radius: g.rad().to_string(),
        prec_bits: g.prec(),
    };
    let mut w = open_output(cfg.out.as_deref())?;
    let shown = cfg.out.as_ref().map_or("<stdout>".to_string(), |p| p.display().to_string());
    let res = match cfg.format {
        Format::Csv => writeln!(
            w,
            "method,digits,value,radius,prec_bits\n{},{},{},{},{}",
            out.method, out.digits, out.value, out.radius, out.prec_bits
        ),
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&out).expect("serializes")),
    };
    res.and_then(|_| w.flush()).map_err(|e| CliError::io(shown, e))
}

#[derive(Serialize)]
struct PadeRecord {
    p: u32,
    m: u32,
    n: u32,
    ltilde: String,
    frac: String,
    frac_decimal: String,
    gap: String,
    gap_bound: String,
    gap_bound_ok: bool,
    gap_bound_applies: bool,
}

impl PadeRecord {
    fn new(r: &PadeCriterionRow, digits: usize) -> PadeRecord {
        PadeRecord {
            p: r.p,
            m: r.m,
            n: r.n,
            ltilde: r.ltilde.to_string(),
            frac: r.frac.to_string(),
            frac_decimal: decimal_string(&r.frac, digits),
            gap: r.gap.mid_string(SIG_DIGITS),
            gap_bound: if r.n == 0 { String::new() } else { gap_bound(r.n).to_string() },
            gap_bound_ok: r.gap_bound_ok,
            gap_bound_applies: r.gap_bound_applies,
        }
    }
}

pub fn cmd_pade(cfg: &RunConfig) -> Result<()> {
    let keys: Vec<(u32, u32)> =
        (0..=cfg.bound).flat_map(|p| cfg.m_list.iter().map(move |&m| (p, m))).collect();
    let rows: Vec<PadeCriterionRow> =
        keys.par_iter().map(|&(p, m)| pade_row(p, m)).collect::<std::result::Result<_, _>>()?;
    let digits = cfg.decimal_digits as usize;
    let recs: Vec<PadeRecord> = rows.iter().map(|r| PadeRecord::new(r, digits)).collect();
    let mut w = open_output(cfg.out.as_deref())?;
    let shown = cfg.out.as_ref().map_or("<stdout>".to_string(), |p| p.display().to_string());
    let res = match cfg.format {
        Format::Csv => {
            let mut cw = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut w);
            let r = recs.iter().try_for_each(|r| cw.serialize(r)).and_then(|_| Ok(cw.flush()?));
            r.map_err(std::io::Error::from)
        }
        Format::Json => {
            let head = serde_json::json!({ "schema": "gamma-criteria/pade/1" });
            let mut r = writeln!(w, "{head}");
            for rec in &recs {
                r = r.and_then(|_| writeln!(w, "{}", serde_json::to_string(rec).expect("serializes")));
            }
            r
        }
    };
    res.and_then(|_| w.flush()).map_err(|e| CliError::io(shown, e))
}
