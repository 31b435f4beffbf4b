//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `EXPECTED_FAILURES` are run in full and reported as
//! FAIL when they fail, with the reason; only other failures make the
//! process exit non-zero.

use std::fmt::Display;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gamma_criteria::analytic::{
    gamma_classic, gamma_new, gamma_reference, j_direct, markov_stieltjes_residual, pade_error_integral,
    rho_moment_residual, total_monotonicity_table,
};
use gamma_criteria::ball::Ball;
use gamma_criteria::combinatorics::lcm_upto;
use gamma_criteria::criterion::{
    a_nm, j_by_identity, l_nm, sondow_a, sondow_i, working_precision, CriterionContext, PrecisionPolicy,
    DEFAULT_CAP_BITS,
};
use gamma_criteria::pade::{
    contact_order, delta_gap, gap_bound, ln2_pade_error, log1p_taylor, pade_lnu_over_um1, pade_log1p, pade_row,
    poly_eval, tilde_frac,
};
use gamma_criteria_cli::commands::gamma_by_identity;
use gamma_criteria_cli::reference::{self, MatchStatus};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rug::ops::Pow;
use rug::Rational;

const BIN: &str = env!("CARGO_BIN_EXE_gamma-criteria");

/// `(criterion, reason)` for criteria that cannot hold as stated.
const EXPECTED_FAILURES: [(u32, &str); 1] = [(
    3,
    "the root clause fails for m >= 1: (-1)^m J_{n,m} carries a power-of-n prefactor that \
     steepens with m, so at n = 40 the n-th root is still about 18-27% below 1/4 \
     (it tends to 1/4 only as n grows); the sign and ratio clauses hold",
)];

type Res = Result<Outcome, String>;

#[derive(Default)]
struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn absorb(&mut self, other: Outcome) {
        self.failures.extend(other.failures);
        self.notes.extend(other.notes);
    }
}

fn err<E: Display>(e: E) -> String {
    e.to_string()
}

fn signed_j(n: u32, m: u32) -> Result<Ball, String> {
    let j = j_by_identity(n, m, gamma_reference()).map_err(err)?;
    Ok(if m % 2 == 0 { j } else { -j })
}

fn run_bin(args: &[&str], dir: &Path) -> Result<(), String> {
    let out = Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("GAMMA_CRITERIA_PREC_CAP")
        .output()
        .map_err(err)?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} exited with {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))
    }
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn table_reproduction() -> Res {
    let mut out = Outcome::default();
    let ctx = CriterionContext::with_reference(PrecisionPolicy::default());
    let sweep = ctx.sweep(20, &[0, 1, 2, 3], 53).map_err(err)?;
    let mut compared = 0;
    for r in &sweep.rows {
        let v = r.table_ratio.to_f64();
        out.check(r.certified, || format!("({},{}) not certified", r.n, r.m));
        let status = reference::compare(r.n, r.m, v);
        if (r.n, r.m) == (4, 3) {
            out.check(status == MatchStatus::DocumentedMismatch, || format!("(4,3) not flagged: {status:?}"));
            out.note(format!("(4,3) flagged as documented mismatch: computed {v:.6}, printed 0.38225"));
        } else {
            compared += 1;
            out.check(status == MatchStatus::Match, || {
                format!("({},{}) computed {v:.6} vs printed {:?}", r.n, r.m, reference::published(r.n, r.m))
            });
        }
    }
    out.check(compared == 76, || format!("compared {compared} entries, expected 76"));
    let anchors = [((1, 0), 1.38868), ((2, 0), 0.56003), ((3, 3), 0.67030), ((10, 0), 0.06778), ((20, 0), 0.001147)];
    for ((n, m), a) in anchors {
        let a: f64 = a;
        let r = sweep.rows.iter().find(|r| r.n == n && r.m == m).ok_or("anchor row missing")?;
        let v = r.table_ratio.to_f64();
        let unit = 10f64.powf(a.log10().floor() - 3.0);
        out.check((v - a).abs() <= unit, || format!("anchor ({n},{m}): {v} vs {a}"));
    }
    let dir = tempfile::tempdir().map_err(err)?;
    run_bin(&["table", "--out", "t.csv"], dir.path())?;
    let text = String::from_utf8(read(&dir.path().join("t.csv"))?).map_err(err)?;
    let flagged = text.lines().any(|l| l.starts_with("4,3,") && l.ends_with(",documented-mismatch"));
    out.check(flagged, || "CLI table does not flag (4,3)".into());
    out.note(format!("{compared} entries within 4 significant digits; 5 anchors hold"));
    Ok(out)
}

fn identity_suite() -> Res {
    let keys: Vec<(u32, u32)> = (1..=30u32).flat_map(|n| (0..=3u32.min(n)).map(move |m| (n, m))).collect();
    let results: Vec<Result<(u32, u32, bool, f64), String>> = keys
        .par_iter()
        .map(|&(n, m)| {
            let jd = j_direct(n, m, 1e-32).map_err(|e| format!("J_direct({n},{m}): {e}"))?;
            let prec = working_precision(n, 200);
            let l = l_nm(n, m, prec).map_err(err)?;
            let lhs = &(&Ball::from_rational(&a_nm(n), prec) - &l) + &jd;
            let diff = &lhs - gamma_reference();
            Ok((n, m, diff.contains_zero(), jd.rad().to_f64()))
        })
        .collect();
    let mut out = Outcome::default();
    let mut worst: f64 = 0.0;
    for r in results {
        let (n, m, holds, rad) = r?;
        worst = worst.max(rad);
        out.check(holds, || format!("({n},{m}): identity residual exceeds radii"));
        out.check(rad < 1e-30, || format!("({n},{m}): radius {rad:e}"));
    }
    out.note(format!("{} pairs; largest J_direct radius {worst:.2e}", keys.len()));
    Ok(out)
}

fn remainder_decay() -> Res {
    let mut out = Outcome::default();
    for m in 0..=3u32 {
        let js: Vec<Ball> = (1..=41).map(|n| if n >= m { signed_j(n, m) } else { Ok(Ball::zero(64)) }).collect::<Result<_, _>>()?;
        let quarter = Ball::from_rational(&Rational::from((1, 4)), 64);
        for n in m.max(1)..=40 {
            let j = &js[n as usize - 1];
            out.check(j.is_positive(), || format!("m={m} n={n}: (-1)^m J not positive"));
            let ratio = js[n as usize].div(j).map_err(err)?;
            out.check(ratio.upper() < quarter.lower(), || format!("m={m} n={n}: ratio {}", ratio.to_f64()));
        }
        let root = (js[39].to_f64().ln() / 40.0).exp();
        let ok = (root / 0.25 - 1.0).abs() <= 0.1;
        out.check(ok, || format!("m={m}: 40th root {root:.4} outside [0.225, 0.275]"));
        let last = js[40].div(&js[39]).map_err(err)?.to_f64();
        out.note(format!("m={m}: 40th root {root:.4}, J_41/J_40 = {last:.4}"));
    }
    Ok(out)
}

fn lcm_bounds() -> Res {
    let mut out = Outcome::default();
    for m in 0..=3u32 {
        for n in m.max(1)..=40 {
            let v = signed_j(n, m)?.mul_int(&lcm_upto(n));
            let b = Ball::from_rational(&Rational::from((707, 1000)).pow(n), 128);
            out.check(v.upper() < b.lower(), || format!("m={m} n={n}: d_n J = {} >= 0.707^n", v.to_f64()));
        }
        let seq: Vec<Ball> = (0..=5u32)
            .map(|p| 1u32 << p)
            .filter(|&n| n >= m)
            .map(|n| Ok(signed_j(n, m)?.mul_int(&lcm_upto(n))))
            .collect::<Result<_, String>>()?;
        for w in seq.windows(2) {
            out.check(w[1].upper() < w[0].lower(), || format!("m={m}: dyadic sequence not decreasing"));
        }
        out.note(format!("m={m}: {} dyadic terms strictly decreasing", seq.len()));
    }
    Ok(out)
}

fn total_monotonicity() -> Res {
    let mut out = Outcome::default();
    for m in 0..=1u32 {
        let t = total_monotonicity_table(m, 20, 8, gamma_reference()).map_err(err)?;
        out.check(t.all_positive(), || format!("m={m}: uncertain or negative at {:?}", t.uncertain()));
        out.note(format!("m={m}: {} entries certified positive", t.entries.iter().map(Vec::len).sum::<usize>()));
    }
    Ok(out)
}

fn pade_correctness() -> Res {
    let mut out = Outcome::default();
    for n in 1..=8u32 {
        let deg = 2 * n as usize;
        let p = pade_log1p(n).map_err(err)?;
        out.check(p.taylor(deg).map_err(err)? == log1p_taylor(deg), || format!("[{n}/{n}] Taylor mismatch"));
        let c = contact_order(n).map_err(err)?;
        out.check(c > 2 * n, || format!("contact order {c} at n={n}"));
    }
    let one = Rational::from(1);
    for n in 1..=10u32 {
        let pair = pade_lnu_over_um1(n).map_err(err)?;
        out.check(poly_eval(&pair.num, &one) == 1 && poly_eval(&pair.den, &one) == 1, || {
            format!("N_{n}(1) or D_{n}(1) differs from 1")
        });
    }
    let target = (3.0 - 2.0 * 2f64.sqrt()).powi(2);
    let mut ratios = Vec::new();
    for n in 10..=14u32 {
        let r = ln2_pade_error(n + 1, 512).map_err(err)?.div(&ln2_pade_error(n, 512).map_err(err)?).map_err(err)?;
        let r = r.to_f64();
        ratios.push(format!("{r:.6}"));
        out.check((r / target - 1.0).abs() <= 0.1, || format!("ln2 error ratio {r} at n={n}"));
    }
    out.note(format!("ln2 error ratios n=10..14: {} (target {target:.7})", ratios.join(", ")));
    let integral: Vec<Result<(u32, bool), String>> = (1..=10u32)
        .into_par_iter()
        .map(|n| {
            let i = pade_error_integral(n, 1e-30).map_err(err)?;
            let e = ln2_pade_error(n, 256).map_err(err)?;
            Ok((n, i.overlaps(&e)))
        })
        .collect();
    for r in integral {
        let (n, ok) = r?;
        out.check(ok, || format!("error integral disagrees at n={n}"));
    }
    Ok(out)
}

fn tilde_pipeline() -> Res {
    let mut out = Outcome::default();
    let keys: Vec<(u32, u32)> = (0..=5u32).flat_map(|p| (0..=3u32).map(move |m| (p, m))).collect();
    let first: Vec<Rational> = keys.iter().map(|&(p, m)| tilde_frac(p, m)).collect::<Result<_, _>>().map_err(err)?;
    let second: Vec<Rational> =
        keys.par_iter().map(|&(p, m)| tilde_frac(p, m)).collect::<Result<_, _>>().map_err(err)?;
    out.check(first == second, || "tilde_frac differs between evaluations".into());

    let dir = tempfile::tempdir().map_err(err)?;
    let args = |f: &'static str| ["pade", "--p-max", "5", "--m", "0,1,2,3", "--digits", "60", "--out", f];
    run_bin(&args("a.csv"), dir.path())?;
    run_bin(&args("b.csv"), dir.path())?;
    let (a, b) = (read(&dir.path().join("a.csv"))?, read(&dir.path().join("b.csv"))?);
    out.check(a == b, || "pade output differs between runs".into());

    let mut checked = 0;
    for &(p, m) in &keys {
        let n = (1u32 << p) + m - 1;
        if n < 10 {
            continue;
        }
        let prec = working_precision(n, 2 * n + 64);
        let gap = delta_gap(p, m, prec).map_err(err)?;
        let bound = Ball::from_rational(&gap_bound(n), prec);
        out.check(gap.upper() <= bound.lower(), || format!("p={p} m={m} n={n}: gap {}", gap.to_f64()));
        let row = pade_row(p, m).map_err(err)?;
        out.check(row.gap_bound_applies && row.gap_bound_ok, || format!("p={p} m={m}: row disagrees"));
        checked += 1;
    }
    out.note(format!("{} tilde_frac values repeat exactly; gap bound holds at {checked} grid points with n >= 10", keys.len()));
    Ok(out)
}

fn gamma_two_ways() -> Res {
    let mut out = Outcome::default();
    let classic = gamma_classic(15).map_err(err)?;
    let new = gamma_new(15).map_err(err)?;
    let ident = gamma_by_identity(15, DEFAULT_CAP_BITS).map_err(err)?;
    for (name, g) in [("classic", &classic), ("new", &new), ("identity", &ident)] {
        out.check(g.rad().to_f64() < 1e-15, || format!("{name}: radius {}", g.rad()));
    }
    let gap = (&classic - &new).mag().to_f64();
    out.check(gap < 1e-12, || format!("classic and new differ by up to {gap:e}"));
    let s = [classic.mid_string(15), new.mid_string(15), ident.mid_string(15)];
    out.check(s[0] == s[2] && s[1] == s[2], || format!("15-digit values differ: {s:?}"));
    out.note(format!("γ = {} by all three methods; |classic - new| <= {gap:.1e}", s[2]));
    Ok(out)
}

fn lemmas() -> Res {
    let mut out = Outcome::default();
    let res: Vec<Result<(u32, f64), String>> = (1..=9u32)
        .into_par_iter()
        .map(|k| Ok((k, markov_stieltjes_residual(&Rational::from((k, 10)), 1e-14).map_err(err)?.residual.to_f64())))
        .collect();
    let mut worst: f64 = 0.0;
    for r in res {
        let (k, v) = r?;
        worst = worst.max(v);
        out.check(v < 1e-12, || format!("Markov-Stieltjes residual {v:e} at u=0.{k}"));
    }
    out.note(format!("Markov-Stieltjes: largest residual {worst:.1e}"));
    let moments: Vec<Result<(u32, u32, f64), String>> = [(2u32, 0u32), (3, 1), (4, 2)]
        .par_iter()
        .map(|&(n, m)| {
            let c = rho_moment_residual(n, m, 1e-8, gamma_reference()).map_err(err)?;
            Ok((n, m, c.residual.to_f64()))
        })
        .collect();
    for r in moments {
        let (n, m, v) = r?;
        out.check(v < 1e-6, || format!("moment ({n},{m}) residual {v:e}"));
        out.note(format!("moment ({n},{m}): residual {v:.1e}"));
    }
    Ok(out)
}

fn sondow() -> Res {
    let mut out = Outcome::default();
    let g = gamma_reference();
    let a1 = sondow_a(1).map_err(err)?;
    out.check(a1 == Rational::from((5, 2)), || format!("A_1 = {a1}"));
    let prec = 256;
    let i1 = sondow_i(1, g, prec).map_err(err)?;
    let closed =
        &(&g.mul_pow2(1) + &Ball::ln2(prec).mul_pow2(1)) - &Ball::from_rational(&Rational::from((5, 2)), prec);
    out.check(i1.overlaps(&closed), || "I_1 differs from 2γ + 2 ln 2 - 5/2".into());
    let v = i1.to_f64();
    out.check((v - 0.0407258).abs() < 5e-7, || format!("I_1 = {v} is not near 0.0407258"));
    out.note(format!("I_1 = {} (printed approximation 0.0407258)", i1.mid_string(12)));
    for n in 10..=15u32 {
        let r = sondow_i(n + 1, g, prec).map_err(err)?.div(&sondow_i(n, g, prec).map_err(err)?).map_err(err)?;
        let r = r.to_f64().abs();
        out.check((r * 16.0 - 1.0).abs() <= 0.2, || format!("|I_{}/I_{n}| = {r}", n + 1));
    }
    Ok(out)
}

fn determinism() -> Result<Outcome, String> {
    let mut out = Outcome::default();
    let dir = tempfile::tempdir().map_err(err)?;
    let d = dir.path();
    let sweep = ["sweep", "--n-max", "60", "--m", "0,1,2,3"];
    run_bin(&[&sweep[..], &["--workers", "1", "--out", "w1.csv"]].concat(), d)?;
    run_bin(&[&sweep[..], &["--workers", "8", "--out", "w8.csv"]].concat(), d)?;
    let w1 = read(&d.join("w1.csv"))?;
    out.check(w1 == read(&d.join("w8.csv"))?, || "1 and 8 workers differ".into());
    out.note(format!("workers 1 vs 8: {} identical bytes", w1.len()));
    Ok(out)
}

fn resume() -> Result<Outcome, String> {
    let mut out = Outcome::default();
    let dir = tempfile::tempdir().map_err(err)?;
    let d = dir.path();
    let base = ["sweep", "--m", "0,1,2,3", "--workers", "4"];
    run_bin(&[&base[..], &["--n-max", "60", "--out", "full.csv", "--checkpoint", "full.jsonl"]].concat(), d)?;
    run_bin(&[&base[..], &["--n-max", "25", "--out", "a.csv", "--checkpoint", "part.jsonl"]].concat(), d)?;
    run_bin(&[&base[..], &["--n-max", "60", "--out", "b.csv", "--checkpoint", "part.jsonl"]].concat(), d)?;
    let mut joined = read(&d.join("a.csv"))?;
    joined.extend(read(&d.join("b.csv"))?);
    out.check(joined == read(&d.join("full.csv"))?, || "resumed output differs from a single run".into());
    out.check(read(&d.join("part.jsonl"))? == read(&d.join("full.jsonl"))?, || {
        "resumed checkpoint differs from a single run".into()
    });
    out.note("interrupted-at-25 then resumed run equals one uninterrupted run");
    Ok(out)
}

fn escalation() -> Result<Outcome, String> {
    let mut out = Outcome::default();
    let mut rng = StdRng::seed_from_u64(0x5eed_2024);
    let keys: Vec<(u32, u32)> = (0..50)
        .map(|_| {
            let n = rng.gen_range(1..=60u32);
            (n, rng.gen_range(0..=n.min(3)))
        })
        .collect();
    let ctx = CriterionContext::with_reference(PrecisionPolicy::default());
    let results: Vec<Result<(u32, u32, bool, bool), String>> = keys
        .par_iter()
        .map(|&(n, m)| {
            let prec = working_precision(n, 53);
            let lo = ctx.row_at(n, m, prec, 53).map_err(err)?;
            let hi = ctx.row_at(n, m, 2 * prec, 53).map_err(err)?;
            let pairs = [(&lo.l, &hi.l), (&lo.j, &hi.j), (&lo.frac_unsigned, &hi.frac_unsigned), (&lo.frac_signed, &hi.frac_signed)];
            let consistent = pairs.iter().all(|(a, b)| a.overlaps(b));
            let tighter = pairs.iter().all(|(a, b)| b.rad() <= a.rad());
            Ok((n, m, consistent, tighter))
        })
        .collect();
    for r in results {
        let (n, m, consistent, tighter) = r?;
        out.check(consistent, || format!("({n},{m}): doubled-precision enclosure disjoint from original"));
        out.check(tighter, || format!("({n},{m}): doubled-precision radius is wider"));
    }
    out.note("50 seeded random (n, m) with n <= 60: enclosures at p and 2p overlap");
    Ok(out)
}

fn engineering() -> Res {
    let mut out = determinism()?;
    out.absorb(resume()?);
    out.absorb(escalation()?);
    Ok(out)
}

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Option<Duration>,
    run: fn() -> Res,
}

const fn mins(m: u64) -> Option<Duration> {
    Some(Duration::from_secs(60 * m))
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, title: "table reproduction", limit: Some(Duration::from_secs(60)), run: table_reproduction },
        Criterion { id: 2, title: "identity suite", limit: mins(5), run: identity_suite },
        Criterion { id: 3, title: "remainder decay", limit: None, run: remainder_decay },
        Criterion { id: 4, title: "lcm-scaled bounds", limit: None, run: lcm_bounds },
        Criterion { id: 5, title: "total monotonicity", limit: None, run: total_monotonicity },
        Criterion { id: 6, title: "Padé correctness", limit: None, run: pade_correctness },
        Criterion { id: 7, title: "rational substitute pipeline", limit: mins(5), run: tilde_pipeline },
        Criterion { id: 8, title: "γ two ways", limit: mins(2), run: gamma_two_ways },
        Criterion { id: 9, title: "Markov-Stieltjes and moments", limit: mins(5), run: lemmas },
        Criterion { id: 10, title: "Sondow suite", limit: None, run: sondow },
        Criterion { id: 11, title: "engineering properties", limit: None, run: engineering },
    ]
}

fn main() -> ExitCode {
    let mut unexpected = Vec::new();
    let mut total = 0;
    for c in criteria() {
        let start = Instant::now();
        let res = std::panic::catch_unwind(c.run).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let mut outcome = res.unwrap_or_else(|e| Outcome { failures: vec![e], notes: vec![] });
        if let Some(limit) = c.limit {
            outcome.check(elapsed <= limit, || format!("took {elapsed:.1?}, limit {limit:?}"));
        }
        let pass = outcome.failures.is_empty();
        println!(
            "criterion {:>2}: {}  {} ({:.1}s)",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.title,
            elapsed.as_secs_f64()
        );
        for n in &outcome.notes {
            println!("    {n}");
        }
        for f in outcome.failures.iter().take(12) {
            println!("    failed: {f}");
        }
        if outcome.failures.len() > 12 {
            println!("    ... {} more", outcome.failures.len() - 12);
        }
        let expected = EXPECTED_FAILURES.iter().find(|(id, _)| *id == c.id);
        match (pass, expected) {
            (false, Some((_, why))) => println!("    known: {why}"),
            (false, None) => unexpected.push(c.id),
            _ => {}
        }
        total += 1;
    }
    println!("acceptance: {} criteria run; unexpected failures: {unexpected:?}", total);
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
