//! Invariant suites behind `verify`.

use std::io::Write;

use gamma_criteria::analytic::{
    gamma_reference, j_direct, markov_stieltjes_residual, pade_error_integral, rho, rho_moment_residual,
    total_monotonicity_table,
};
use gamma_criteria::ball::{format_sig, Ball};
use gamma_criteria::combinatorics::lcm_upto;
use gamma_criteria::criterion::{
    a_nm, j_by_identity, l_nm, sondow_a, sondow_i, working_precision, CriterionContext, PrecisionPolicy,
};
use gamma_criteria::pade::{
    contact_order, ln2_error_bound, ln2_error_bound_literal, ln2_pade_error, log1p_taylor, pade_log1p,
    pade_lnu_over_um1, pade_row, poly_eval, tilde_frac,
};
use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::args::{Format, Job, RunConfig, Suite};
use crate::error::{CliError, Result};
use crate::output::open_output;
use crate::reference::{self, MatchStatus};

pub const REPORT_SCHEMA: &str = "gamma-criteria/verify/1";

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// Not decided at the working precision; listed but not a failure.
    Uncertified,
    /// A stated value or bound that recomputation contradicts, recorded as
    /// such rather than failed.
    DocumentedDeviation,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Uncertified => "uncertified",
            Status::DocumentedDeviation => "documented-deviation",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub id: String,
    /// The statement being checked.
    pub anchor: &'static str,
    pub status: Status,
    pub measured: String,
    pub bound: String,
    pub radius: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(suite: &'static str, id: impl Into<String>, anchor: &'static str, status: Status) -> Check {
        Check {
            suite,
            id: id.into(),
            anchor,
            status,
            measured: String::new(),
            bound: String::new(),
            radius: String::new(),
            note: None,
        }
    }

    fn measured(mut self, s: impl Into<String>) -> Check {
        self.measured = s.into();
        self
    }

    fn bound(mut self, s: impl Into<String>) -> Check {
        self.bound = s.into();
        self
    }

    fn radius(mut self, s: impl Into<String>) -> Check {
        self.radius = s.into();
        self
    }

    fn note(mut self, s: impl Into<String>) -> Check {
        self.note = Some(s.into());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub suite: &'static str,
    pub checks: Vec<Check>,
    /// `Pass` iff no check failed.
    pub overall: Status,
}

impl VerifyReport {
    pub fn new(suite: Suite, checks: Vec<Check>) -> VerifyReport {
        let overall = if checks.iter().any(|c| c.status == Status::Fail) { Status::Fail } else { Status::Pass };
        VerifyReport { schema: REPORT_SCHEMA, suite: suite.name(), checks, overall }
    }

    pub fn count(&self, s: Status) -> usize {
        self.checks.iter().filter(|c| c.status == s).count()
    }
}

fn sig(b: &Ball) -> String {
    format_sig(b.mid(), 10)
}

fn f64s(x: f64) -> String {
    format!("{x:.6e}")
}

fn signed_j(n: u32, m: u32) -> std::result::Result<Ball, String> {
    let j = j_by_identity(n, m, gamma_reference()).map_err(|e| e.to_string())?;
    Ok(if m % 2 == 0 { j } else { -j })
}

const IDENTITY: &str = "γ = A_{n,m} − L_{n,m} + J_{n,m}, J as ∫ u^(n−m) P_n*(u) (1/ln u + 1/(1−u)) du";

pub fn identity_suite(tol: Option<f64>) -> Vec<Check> {
    let tol = tol.unwrap_or(1e-32);
    let keys: Vec<(u32, u32)> = (1..=30u32).flat_map(|n| (0..=3u32.min(n)).map(move |m| (n, m))).collect();
    keys.par_iter()
        .map(|&(n, m)| {
            let id = format!("n={n} m={m}");
            let jd = match j_direct(n, m, tol) {
                Ok(j) => j,
                Err(e) => {
                    return Check::new("identity", id, IDENTITY, Status::Uncertified).note(e.to_string());
                }
            };
            let prec = working_precision(n, 200);
            let l = l_nm(n, m, prec).expect("valid (n, m)");
            let lhs = &(&Ball::from_rational(&a_nm(n), prec) - &l) + &jd;
            let diff = &lhs - gamma_reference();
            let status = if !diff.contains_zero() {
                Status::Fail
            } else if jd.rad().to_f64() < 1e-30 {
                Status::Pass
            } else {
                Status::Uncertified
            };
            Check::new("identity", id, IDENTITY, status)
                .measured(format_sig(diff.mid(), 6))
                .bound("0 within radii; radius(J) < 1e-30")
                .radius(format!("{}", jd.rad()))
        })
        .collect()
}

const MARKOV: &str = "1/ln(1−u) + 1/u = ∫_0^1 w(t)/(1−ut) dt, w(t) = 1/(t(ln²(1/t−1)+π²))";

pub fn lemma1_suite(tol: Option<f64>) -> Vec<Check> {
    let tol = tol.unwrap_or(1e-14);
    (1..=9i64)
        .into_par_iter()
        .map(|k| {
            let id = format!("u={k}/10");
            match markov_stieltjes_residual(&Rational::from((k, 10)), tol) {
                Ok(r) => {
                    let res = r.residual.to_f64();
                    let status = if res < 1e-12 {
                        Status::Pass
                    } else if r.lhs.overlaps(&r.rhs) {
                        Status::Uncertified
                    } else {
                        Status::Fail
                    };
                    Check::new("lemma1", id, MARKOV, status)
                        .measured(f64s(res))
                        .bound("1e-12")
                        .radius(format!("{}", r.rhs.rad()))
                }
                Err(e) => Check::new("lemma1", id, MARKOV, Status::Uncertified).note(e.to_string()),
            }
        })
        .collect()
}

const MOMENT: &str = "(−1)^m J_{n,m} = ∫_0^{1/4} v^n ρ_m(v) dv";
const RHO_POS: &str = "ρ_m(v) > 0 on (0, 1/4)";
const TMS: &str = "(−1)^k Δ^k [(−1)^m J_{n,m}] > 0 (total monotonicity)";

pub fn lemma2_suite(tol: Option<f64>) -> Vec<Check> {
    let tol = tol.unwrap_or(1e-8);
    let g = gamma_reference();
    let mut out: Vec<Check> = [(2u32, 0u32), (3, 1), (4, 2)]
        .par_iter()
        .map(|&(n, m)| {
            let id = format!("moment n={n} m={m}");
            match rho_moment_residual(n, m, tol, g) {
                Ok(c) => {
                    let res = c.residual.to_f64();
                    let status = if res < 1e-6 {
                        Status::Pass
                    } else if c.moment.overlaps(&c.identity) {
                        Status::Uncertified
                    } else {
                        Status::Fail
                    };
                    Check::new("lemma2", id, MOMENT, status)
                        .measured(f64s(res))
                        .bound("1e-6")
                        .radius(format!("{}", c.moment.rad()))
                }
                Err(e) => Check::new("lemma2", id, MOMENT, Status::Uncertified).note(e.to_string()),
            }
        })
        .collect();
    let vs = [(1i64, 32i64), (1, 16), (1, 8), (3, 16), (7, 32)];
    let keys: Vec<(u32, (i64, i64))> = (0..=3u32).flat_map(|m| vs.iter().map(move |&v| (m, v))).collect();
    out.extend(keys.par_iter().map(|&(m, v)| {
        let id = format!("rho m={m} v={}/{}", v.0, v.1);
        match rho(m, &Rational::from(v), 1e-10) {
            Ok(r) => {
                let status = if r.is_positive() {
                    Status::Pass
                } else if r.is_negative() {
                    Status::Fail
                } else {
                    Status::Uncertified
                };
                Check::new("lemma2", id, RHO_POS, status).measured(sig(&r)).bound("> 0").radius(format!("{}", r.rad()))
            }
            Err(e) => Check::new("lemma2", id, RHO_POS, Status::Uncertified).note(e.to_string()),
        }
    }).collect::<Vec<_>>());
    for m in 0..=1u32 {
        let id = format!("tms m={m} n<=20 k<=8");
        let c = match total_monotonicity_table(m, 20, 8, g) {
            Ok(t) => {
                let bad = t.uncertain();
                let negative = t.entries.iter().flatten().any(Ball::is_negative);
                let status = if bad.is_empty() {
                    Status::Pass
                } else if negative {
                    Status::Fail
                } else {
                    Status::Uncertified
                };
                let min = t.entries.iter().flatten().map(|b| b.mid().to_f64()).fold(f64::INFINITY, f64::min);
                let mut c = Check::new("lemma2", id, TMS, status).measured(f64s(min)).bound("> 0");
                if !bad.is_empty() {
                    c = c.note(format!("undecided or negative at (n, k) = {bad:?}"));
                }
                c
            }
            Err(e) => Check::new("lemma2", id, TMS, Status::Uncertified).note(e.to_string()),
        };
        out.push(c);
    }
    out
}

const SIGN: &str = "(−1)^m J_{n,m} > 0";
const RATIO: &str = "J_{n+1,m}/J_{n,m} < 1/4";
const SCALED: &str = "d_n (−1)^m J_{n,m} < 0.707^n";
const DYADIC: &str = "p ↦ d_{2^p} (−1)^m J_{2^p,m} strictly decreasing";
const ROOT: &str = "((−1)^m J_{n,m})^(1/n) within 10% of 1/4 at n = 40";
const LCM_UP: &str = "d_n ≤ e^(1.039 n)";
const LCM_LOW: &str = "d_n ≥ 2^n";
const CUMAVG: &str = "running mean of {d_n L_{n,0}} at n = 200 lies in (0.3, 0.7)";

fn bounds_for_m(m: u32) -> std::result::Result<Vec<Check>, String> {
    let first = m.max(1);
    let js: Vec<Ball> = (first..=41).map(|n| signed_j(n, m)).collect::<std::result::Result<_, _>>()?;
    let j = |n: u32| &js[(n - first) as usize];
    let mut out = Vec::new();

    let min_lower = (first..=40).map(|n| j(n).lower().to_f64()).fold(f64::INFINITY, f64::min);
    let all_pos = (first..=40).all(|n| j(n).is_positive());
    out.push(
        Check::new("bounds", format!("sign m={m} n<=40"), SIGN, if all_pos { Status::Pass } else { Status::Fail })
            .measured(f64s(min_lower))
            .bound("> 0"),
    );

    let mut worst = 0f64;
    let mut ok = true;
    for n in first..=40 {
        let r = j(n + 1).div(j(n)).map_err(|e| e.to_string())?;
        worst = worst.max(r.upper().to_f64());
        ok &= r.upper() < 0.25;
    }
    out.push(
        Check::new("bounds", format!("ratio m={m} n<=40"), RATIO, if ok { Status::Pass } else { Status::Fail })
            .measured(f64s(worst))
            .bound("0.25"),
    );

    let mut worst = 0f64;
    let mut ok = true;
    for n in first..=40 {
        let v = j(n).mul_int(&lcm_upto(n));
        let b = Float::with_val(128, 0.707f64).pow(n);
        let rel = Float::with_val(128, v.upper() / &b);
        worst = worst.max(rel.to_f64());
        ok &= rel < 1;
    }
    out.push(
        Check::new("bounds", format!("scaled m={m} n<=40"), SCALED, if ok { Status::Pass } else { Status::Fail })
            .measured(f64s(worst))
            .bound("ratio to 0.707^n < 1"),
    );

    let mut prev: Option<Ball> = None;
    let mut ok = true;
    let mut vals = Vec::new();
    for p in 0..=5u32 {
        let n = 1u32 << p;
        if n < first {
            continue;
        }
        let v = j(n).mul_int(&lcm_upto(n));
        vals.push(format_sig(v.mid(), 4));
        if let Some(pv) = &prev {
            ok &= v.upper() < pv.lower();
        }
        prev = Some(v);
    }
    out.push(
        Check::new("bounds", format!("dyadic m={m} p<=5"), DYADIC, if ok { Status::Pass } else { Status::Fail })
            .measured(vals.join(" > ")),
    );

    let root = j(40).mid().to_f64().powf(1.0 / 40.0);
    let within = (root / 0.25 - 1.0).abs() < 0.1;
    let mut c = Check::new(
        "bounds",
        format!("root m={m} n=40"),
        ROOT,
        if within { Status::Pass } else { Status::DocumentedDeviation },
    )
    .measured(format!("{root:.6}"))
    .bound("[0.225, 0.275]");
    if !within {
        c = c.note("polynomial prefactor n^-(m+3/2) still dominates at n = 40; the limit is 1/4");
    }
    out.push(c);
    Ok(out)
}

pub fn bounds_suite() -> Vec<Check> {
    let mut out: Vec<Check> = (0..=3u32)
        .into_par_iter()
        .map(|m| {
            bounds_for_m(m).unwrap_or_else(|e| {
                vec![Check::new("bounds", format!("m={m}"), SIGN, Status::Uncertified).note(e)]
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let mut worst_up = 0f64;
    let mut low_fail = Vec::new();
    for n in 1..=2000u32 {
        let d = lcm_upto(n);
        let ln = Float::with_val(128, &d).ln().to_f64();
        worst_up = worst_up.max(ln / n as f64);
        if n >= 7 && d < (Integer::from(1) << n) {
            low_fail.push(n);
        }
    }
    let up_ok = worst_up <= 1.039;
    out.push(
        Check::new("bounds", "lcm upper n<=2000", LCM_UP, if up_ok { Status::Pass } else { Status::Fail })
            .measured(format!("max ln(d_n)/n = {worst_up:.6}"))
            .bound("1.039"),
    );
    out.push(
        Check::new(
            "bounds",
            "lcm lower 7<=n<=2000",
            LCM_LOW,
            if low_fail.is_empty() { Status::Pass } else { Status::Fail },
        )
        .measured(format!("{} failures", low_fail.len()))
        .note("fails for n in {1, 2, 3, 4, 6}"),
    );

    let ctx = CriterionContext::with_reference(PrecisionPolicy::default());
    let c = match ctx.sweep(200, &[0], 53) {
        Ok(s) => {
            let avg = s.cumavg.last().expect("200 rows");
            let v = avg.mid().to_f64();
            let status = if !s.rows.iter().all(|r| r.certified) {
                Status::Uncertified
            } else if v > 0.3 && v < 0.7 {
                Status::Pass
            } else {
                Status::Fail
            };
            Check::new("bounds", "cumavg m=0 n=200", CUMAVG, status)
                .measured(format!("{v:.6}"))
                .bound("(0.3, 0.7)")
                .radius(format!("{}", avg.rad()))
        }
        Err(e) => Check::new("bounds", "cumavg m=0 n=200", CUMAVG, Status::Uncertified).note(e.to_string()),
    };
    out.push(c);
    out
}

const TAYLOR: &str = "[n/n] of ln(1+t) matches its Taylor series through t^(2n)";
const CONTACT: &str = "D_n(u) ln u − N_n(u)(u−1) vanishes to order ≥ 2n+1 at u = 1";
const NORMAL: &str = "N_n(1) = D_n(1) = 1";
const LN2_RATIO: &str = "(ln 2 − [n/n]_1) ratios approach (3−2√2)²";
const LN2_INTEGRAL: &str = "ln 2 − [n/n]_1 = |P_n*(−1)|^-1 ∫_0^1 t^n(1−t)^n/(1+t)^(n+1) dt";
const LN2_BOUND: &str = "0 < ln 2 − [n/n]_1 ≤ (3−2√2)^n ln 2 / |P_n*(−1)|";
const LN2_LITERAL: &str = "|ln 2 − [n/n]_1| ≤ (3−2√2)^(2n) ln 2";
const GAP: &str = "|L_{n,m} − L̃_{n,m}| ≤ 4^-n / n for n ≥ 10";
const DETERMINISM: &str = "the rational criterion is exact and reproducible";

pub fn pade_suite(tol: Option<f64>) -> Vec<Check> {
    let mut out = Vec::new();
    for n in 1..=8u32 {
        let deg = 2 * n as usize;
        let ok = pade_log1p(n)
            .and_then(|p| p.taylor(deg))
            .map(|t| t == log1p_taylor(deg))
            .unwrap_or(false);
        out.push(Check::new("pade", format!("taylor n={n}"), TAYLOR, if ok { Status::Pass } else { Status::Fail }));
        let order = contact_order(n).unwrap_or(0);
        out.push(
            Check::new(
                "pade",
                format!("contact n={n}"),
                CONTACT,
                if order > 2 * n { Status::Pass } else { Status::Fail },
            )
            .measured(order.to_string())
            .bound(format!(">= {}", 2 * n + 1)),
        );
    }
    for n in 1..=10u32 {
        let ok = pade_lnu_over_um1(n)
            .map(|p| {
                let one = Rational::from(1);
                poly_eval(&p.num, &one) == 1 && poly_eval(&p.den, &one) == 1
            })
            .unwrap_or(false);
        out.push(Check::new("pade", format!("normalized n={n}"), NORMAL, if ok { Status::Pass } else { Status::Fail }));
    }
    let target = (3.0 - 2.0 * 2f64.sqrt()).powi(2);
    for n in 10..=14u32 {
        let r = ln2_pade_error(n + 1, 512)
            .and_then(|b| Ok(b.div(&ln2_pade_error(n, 512)?)?))
            .map(|r| r.to_f64())
            .unwrap_or(f64::NAN);
        let ok = (r / target - 1.0).abs() < 0.1;
        out.push(
            Check::new("pade", format!("ln2 ratio n={n}"), LN2_RATIO, if ok { Status::Pass } else { Status::Fail })
                .measured(f64s(r))
                .bound(format!("{} ± 10%", f64s(target))),
        );
    }
    let itol = tol.unwrap_or(1e-30);
    out.extend((1..=10u32).into_par_iter().map(|n| {
        let id = format!("integral n={n}");
        match (pade_error_integral(n, itol), ln2_pade_error(n, 256)) {
            (Ok(i), Ok(e)) => Check::new(
                "pade",
                id,
                LN2_INTEGRAL,
                if i.overlaps(&e) { Status::Pass } else { Status::Fail },
            )
            .measured(sig(&i))
            .bound(sig(&e))
            .radius(format!("{}", i.rad())),
            (Err(e), _) => Check::new("pade", id, LN2_INTEGRAL, Status::Uncertified).note(e.to_string()),
            (_, Err(e)) => Check::new("pade", id, LN2_INTEGRAL, Status::Uncertified).note(e.to_string()),
        }
    }).collect::<Vec<_>>());
    let mut bound_ok = true;
    let mut literal_holds = Vec::new();
    for n in 1..=30u32 {
        let e = ln2_pade_error(n, 512).expect("n >= 1");
        let b = ln2_error_bound(n, 512).expect("n >= 1");
        bound_ok &= e.is_positive() && e.upper() <= b.lower();
        let lit = ln2_error_bound_literal(n, 512).expect("n >= 1");
        if e.upper() <= lit.lower() {
            literal_holds.push(n);
        }
    }
    out.push(Check::new("pade", "ln2 bound n<=30", LN2_BOUND, if bound_ok { Status::Pass } else { Status::Fail }));
    out.push(
        Check::new(
            "pade",
            "ln2 literal bound n<=30",
            LN2_LITERAL,
            if literal_holds.len() == 30 { Status::Pass } else { Status::DocumentedDeviation },
        )
        .measured(format!("holds for {} of 30", literal_holds.len()))
        .note("the error is about 1.5 (3−2√2)^(2n) ln 2; the excess factor tends to a constant near 1.55"),
    );
    let keys: Vec<(u32, u32)> = (0..=5u32).flat_map(|p| (0..=3u32).map(move |m| (p, m))).collect();
    out.extend(
        keys.par_iter()
            .filter_map(|&(p, m)| {
                let r = pade_row(p, m).ok()?;
                if r.n == 0 {
                    return None;
                }
                let status = match (r.gap_bound_applies, r.gap_bound_ok) {
                    (_, true) => Status::Pass,
                    (true, false) => Status::Fail,
                    (false, false) => Status::DocumentedDeviation,
                };
                let mut c = Check::new("pade", format!("gap p={p} m={m} n={}", r.n), GAP, status)
                    .measured(format_sig(r.gap.mid(), 6))
                    .bound(format_sig(
                        &Float::with_val(64, gamma_criteria::pade::gap_bound(r.n)),
                        6,
                    ))
                    .radius(format!("{}", r.gap.rad()));
                if !r.gap_bound_applies {
                    c = c.note("bound claimed only for n >= 10");
                }
                Some(c)
            })
            .collect::<Vec<_>>(),
    );
    let first: Vec<Option<Rational>> = keys.iter().map(|&(p, m)| tilde_frac(p, m).ok()).collect();
    let second: Vec<Option<Rational>> = keys.par_iter().map(|&(p, m)| tilde_frac(p, m).ok()).collect();
    out.push(Check::new(
        "pade",
        "tilde_frac repeat p<=5 m<=3",
        DETERMINISM,
        if first == second && first.iter().all(Option::is_some) { Status::Pass } else { Status::Fail },
    ));
    out
}

const SONDOW_A: &str = "A_n = Σ_i C(n,i)² H_{n+i}";
const SONDOW_I: &str = "I_n = C(2n,n) γ + L_n − A_n";
const SONDOW_RATIO: &str = "|I_{n+1}/I_n| within 20% of 1/16";

pub fn sondow_suite() -> Vec<Check> {
    let g = gamma_reference();
    let mut out = Vec::new();
    let a1 = sondow_a(1).expect("n >= 1");
    out.push(
        Check::new("sondow", "A_1", SONDOW_A, if a1 == Rational::from((5, 2)) { Status::Pass } else { Status::Fail })
            .measured(a1.to_string())
            .bound("5/2"),
    );
    let i1 = sondow_i(1, g, 256).expect("n >= 1");
    let prec = 256;
    let closed = &(&g.mul_pow2(1) + &Ball::ln2(prec).mul_pow2(1)) - &Ball::from_rational(&Rational::from((5, 2)), prec);
    let near = (i1.mid().to_f64() - 0.0407258).abs() < 5e-7;
    out.push(
        Check::new(
            "sondow",
            "I_1",
            SONDOW_I,
            if i1.overlaps(&closed) && near { Status::Pass } else { Status::Fail },
        )
        .measured(sig(&i1))
        .bound("2γ + 2 ln 2 − 5/2")
        .radius(format!("{}", i1.rad())),
    );
    for n in 10..=15u32 {
        let r = sondow_i(n + 1, g, 256)
            .and_then(|b| Ok(b.div(&sondow_i(n, g, 256)?)?))
            .map(|r| r.to_f64().abs())
            .unwrap_or(f64::NAN);
        let ok = (r * 16.0 - 1.0).abs() < 0.2;
        out.push(
            Check::new("sondow", format!("ratio n={n}"), SONDOW_RATIO, if ok { Status::Pass } else { Status::Fail })
                .measured(f64s(r))
                .bound("0.0625 ± 20%"),
        );
    }
    out
}

const TABLE: &str = "0.7^n / {d_n (−1)^m L_{n,m}} agrees with the published table to 4 significant digits";

pub fn table_suite() -> Vec<Check> {
    let ctx = CriterionContext::with_reference(PrecisionPolicy::default());
    let sweep = match ctx.sweep(20, &[0, 1, 2, 3], 53) {
        Ok(s) => s,
        Err(e) => return vec![Check::new("table", "n<=20", TABLE, Status::Uncertified).note(e.to_string())],
    };
    sweep
        .rows
        .iter()
        .map(|r| {
            let v = r.table_ratio.mid().to_f64();
            let printed = reference::published(r.n, r.m).unwrap_or("");
            let status = if !r.certified {
                Status::Uncertified
            } else {
                match reference::compare(r.n, r.m, v) {
                    MatchStatus::Match | MatchStatus::Absent => Status::Pass,
                    MatchStatus::DocumentedMismatch => Status::DocumentedDeviation,
                    MatchStatus::Mismatch => Status::Fail,
                }
            };
            let mut c = Check::new("table", format!("n={} m={}", r.n, r.m), TABLE, status)
                .measured(format_sig(r.table_ratio.mid(), 8))
                .bound(printed)
                .radius(format!("{}", r.table_ratio.rad()));
            if status == Status::DocumentedDeviation {
                c = c.note("recomputes to 3.38225; the printed leading digit is dropped");
            }
            c
        })
        .collect()
}

pub fn run_suite(suite: Suite, tol: Option<f64>) -> Vec<Check> {
    match suite {
        Suite::Identity => identity_suite(tol),
        Suite::Lemma1 => lemma1_suite(tol),
        Suite::Lemma2 => lemma2_suite(tol),
        Suite::Bounds => bounds_suite(),
        Suite::Pade => pade_suite(tol),
        Suite::Sondow => sondow_suite(),
        Suite::Table => table_suite(),
        Suite::All => [
            Suite::Identity,
            Suite::Lemma1,
            Suite::Lemma2,
            Suite::Bounds,
            Suite::Pade,
            Suite::Sondow,
            Suite::Table,
        ]
        .iter()
        .flat_map(|&s| run_suite(s, tol))
        .collect(),
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<()> {
    let Job::Verify(suite) = cfg.job else { unreachable!("verify job") };
    let report = VerifyReport::new(suite, run_suite(suite, cfg.tolerance));
    let shown = cfg.out.as_ref().map_or("<stdout>".to_string(), |p| p.display().to_string());
    let mut w = open_output(cfg.out.as_deref())?;
    let res = match cfg.format {
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&report).expect("serializes")),
        Format::Csv => {
            let mut cw = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut w);
            let mut r = cw
                .write_record(["suite", "id", "anchor", "status", "measured", "bound", "radius", "note"])
                .map_err(std::io::Error::from);
            for c in &report.checks {
                r = r.and_then(|_| {
                    cw.write_record([
                        c.suite,
                        &c.id,
                        c.anchor,
                        c.status.as_str(),
                        &c.measured,
                        &c.bound,
                        &c.radius,
                        c.note.as_deref().unwrap_or(""),
                    ])
                    .map_err(std::io::Error::from)
                });
            }
            r.and_then(|_| cw.flush())
        }
    };
    res.and_then(|_| w.flush()).map_err(|e| CliError::io(shown, e))?;
    eprintln!(
        "verify {}: {} pass, {} fail, {} uncertified, {} documented deviation(s)",
        report.suite,
        report.count(Status::Pass),
        report.count(Status::Fail),
        report.count(Status::Uncertified),
        report.count(Status::DocumentedDeviation),
    );
    let fails = report.count(Status::Fail);
    if fails > 0 {
        return Err(CliError::VerifyFailed(fails));
    }
    Ok(())
}
