//! Double-exponential quadrature over ball arithmetic.
//!
//! Finite intervals use the tanh-sinh map, `[a, ∞)` uses exp-sinh. The
//! trapezoidal sum is refined by halving the step; each level reuses all
//! previous evaluations. The returned radius is the sum of
//!
//! * the propagated radii of the integrand evaluations and of the summation,
//! * a bound for the rounding of the stored abscissas and weights,
//! * the difference between the last two levels (discretization estimate),
//! * rigorous bounds for the truncated end pieces, taken from the endpoint
//!   and decay annotations of the [`Integrand`].
//!
//! The discretization term is an estimate: the true error of a converged
//! double-exponential rule is far smaller than the last level difference,
//! but it is not proven to be.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::{Float, Rational};

use crate::ball::{Ball, BallError, Mag};

/// Total evaluation budget per call.
pub const NODE_CAP: usize = 1 << 16;
/// Levels below this are never accepted as converged.
const MIN_LEVEL: u32 = 3;
/// Extra bits carried by node tables.
const NODE_GUARD: u32 = 16;
/// Scan step, in units of `t`, used to place the truncation points.
const SCAN_STEP: f64 = 1.0 / 16.0;

#[derive(Debug, thiserror::Error)]
pub enum QuadError {
    #[error("integrand failed at x = {x}: {source}")]
    Eval { x: String, source: BallError },
    #[error("invalid interval: {0}")]
    Interval(String),
}

#[derive(Clone, Debug)]
pub enum Domain {
    /// `[a, b]` with `a < b`.
    Finite { a: Rational, b: Rational },
    /// `[a, ∞)`.
    HalfLine { a: Rational },
}

/// Behaviour of the integrand next to a finite endpoint, in terms of the
/// distance `d` to that endpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Endpoint {
    /// `|f| <= M`.
    Bounded(f64),
    /// Removable singularity, `|f| <= M` nearby; the evaluator is never
    /// called at the endpoint itself.
    Removable(f64),
    /// `|f| <= c (1 + |ln d|)`.
    IntegrableLog(f64),
    /// `|f| <= c d^(-alpha)` with `alpha < 1`.
    Algebraic { c: f64, alpha: f64 },
    /// No bound known; the end piece is dropped without accounting.
    Unbounded,
}

/// Decay at infinity in terms of the distance `X` from the left endpoint.
pub enum Decay {
    /// `|f| <= c X^(-p)` for `X >= 1`, `p > 1`.
    Algebraic { c: f64, p: f64 },
    /// `|f| <= c e^(-rate X)`.
    Exponential { c: f64, rate: f64 },
    /// Upper bound on `∫_X^∞ |f|`.
    Custom(Box<dyn Fn(&Float) -> Mag + Send + Sync>),
    /// No bound known; the tail is dropped without accounting.
    Unknown,
}

/// A quadrature abscissa. Distances to the endpoints are supplied
/// separately so integrands can avoid cancellation next to them; all three
/// balls enclose the same point.
pub struct Node {
    pub x: Ball,
    pub to_left: Ball,
    /// `None` on a half-line.
    pub to_right: Option<Ball>,
    /// Working precision of the call.
    pub prec: u32,
}

type Evaluator<'a> = dyn Fn(&Node) -> Result<Ball, BallError> + Send + Sync + 'a;

pub struct Integrand<'a> {
    domain: Domain,
    eval: Box<Evaluator<'a>>,
    left: Endpoint,
    right: Endpoint,
    decay: Decay,
    prec: Option<u32>,
}

impl<'a> Integrand<'a> {
    pub fn finite<F>(a: Rational, b: Rational, f: F) -> Self
    where
        F: Fn(&Node) -> Result<Ball, BallError> + Send + Sync + 'a,
    {
        Integrand {
            domain: Domain::Finite { a, b },
            eval: Box::new(f),
            left: Endpoint::Unbounded,
            right: Endpoint::Unbounded,
            decay: Decay::Unknown,
            prec: None,
        }
    }

    pub fn half_line<F>(a: Rational, f: F) -> Self
    where
        F: Fn(&Node) -> Result<Ball, BallError> + Send + Sync + 'a,
    {
        Integrand {
            domain: Domain::HalfLine { a },
            eval: Box::new(f),
            left: Endpoint::Unbounded,
            right: Endpoint::Unbounded,
            decay: Decay::Unknown,
            prec: None,
        }
    }

    pub fn left(mut self, e: Endpoint) -> Self {
        self.left = e;
        self
    }

    pub fn right(mut self, e: Endpoint) -> Self {
        self.right = e;
        self
    }

    pub fn decay(mut self, d: Decay) -> Self {
        self.decay = d;
        self
    }

    /// Working precision in bits; defaults to what `tol` needs plus 32.
    pub fn prec(mut self, bits: u32) -> Self {
        self.prec = Some(bits);
        self
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Whether every truncated piece is covered by a rigorous bound.
    pub fn tails_bounded(&self) -> bool {
        let left_ok = self.left != Endpoint::Unbounded;
        match self.domain {
            Domain::Finite { .. } => left_ok && self.right != Endpoint::Unbounded,
            Domain::HalfLine { .. } => left_ok && !matches!(self.decay, Decay::Unknown),
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadResult {
    pub value: Ball,
    pub nodes_used: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Rule {
    TanhSinh,
    ExpSinh,
}

/// Abscissa data of the standard rule, `t = k 2^-level`.
struct StdNode {
    t: f64,
    /// tanh-sinh: distance from 0 in `[0, 1]`; exp-sinh: the abscissa itself.
    near_left: Float,
    /// tanh-sinh only: distance from 1.
    near_right: Float,
    weight: Float,
}

type NodeTable = Arc<Vec<StdNode>>;

static NODE_CACHE: Mutex<Option<HashMap<(Rule, u32, u32), NodeTable>>> = Mutex::new(None);

/// Largest `|s|` ever tabulated at precision `q`; end pieces beyond it are
/// below `2^(-2q)` in every annotated case used here.
fn s_cap(q: u32) -> f64 {
    2.0 * q as f64 * std::f64::consts::LN_2
}

fn t_cap(q: u32) -> f64 {
    (2.0 * s_cap(q) / std::f64::consts::PI).asinh()
}

fn build_level(rule: Rule, q: u32, level: u32) -> Vec<StdNode> {
    let cap = t_cap(q);
    let kmax = (cap * (1u64 << level) as f64).floor() as i64;
    let step = if level == 0 { 1 } else { 2 };
    let start = if level == 0 { -kmax } else { -kmax | 1 };
    let half_pi = Float::with_val(q, Constant::Pi) / 2u32;
    let mut out = Vec::new();
    let mut k = start;
    while k <= kmax {
        let mut t = Float::with_val(q, k);
        t >>= level;
        let s = Float::with_val(q, t.sinh_ref()) * &half_pi;
        let cosh_t = Float::with_val(q, t.cosh_ref());
        let node = match rule {
            Rule::TanhSinh => {
                let two_s = Float::with_val(q, &s * 2u32);
                let lf = Float::with_val(q, 1u32 + Float::with_val(q, -&two_s).exp()).recip();
                let rf = Float::with_val(q, 1u32 + Float::with_val(q, two_s.exp_ref())).recip();
                let pi = Float::with_val(q, Constant::Pi);
                let weight = pi * cosh_t * &lf * &rf;
                StdNode { t: t.to_f64(), near_left: lf, near_right: rf, weight }
            }
            Rule::ExpSinh => {
                let x = Float::with_val(q, s.exp_ref());
                let weight = Float::with_val(q, &half_pi * &cosh_t) * &x;
                StdNode { t: t.to_f64(), near_left: x, near_right: Float::new(q), weight }
            }
        };
        out.push(node);
        k += step;
    }
    out
}

fn node_table(rule: Rule, q: u32, level: u32) -> NodeTable {
    let key = (rule, q, level);
    {
        let guard = NODE_CACHE.lock().expect("node cache poisoned");
        if let Some(t) = guard.as_ref().and_then(|m| m.get(&key)) {
            return t.clone();
        }
    }
    let table = Arc::new(build_level(rule, q, level));
    let mut guard = NODE_CACHE.lock().expect("node cache poisoned");
    guard
        .get_or_insert_with(HashMap::new)
        .entry(key)
        .or_insert(table)
        .clone()
}

fn f64_upper(x: f64) -> Float {
    Float::with_val_round(64, x.abs(), Round::Up).0
}

/// `∫` of the endpoint envelope over `[0, eps]`, or `None` if unknown.
fn endpoint_bound(e: Endpoint, eps: &Float) -> Option<Float> {
    let slack = 1.0 + 1e-9;
    let v = match e {
        Endpoint::Bounded(m) | Endpoint::Removable(m) => f64_upper(m) * eps,
        Endpoint::IntegrableLog(c) => {
            if *eps >= 1 {
                return Some(Float::with_val(64, rug::float::Special::Infinity));
            }
            let ln_inv = -Float::with_val(64, eps.ln_ref());
            f64_upper(c) * eps * (ln_inv + 2u32)
        }
        Endpoint::Algebraic { c, alpha } => {
            assert!(alpha < 1.0, "non-integrable endpoint annotation");
            let p = Float::with_val(64, eps.pow(1.0 - alpha));
            f64_upper(c) * p / (1.0 - alpha)
        }
        Endpoint::Unbounded => return None,
    };
    Some(v * slack)
}

fn decay_bound(d: &Decay, x: &Float) -> Option<Float> {
    let slack = 1.0 + 1e-9;
    let v = match d {
        Decay::Algebraic { c, p } => {
            assert!(*p > 1.0, "non-integrable decay annotation");
            if *x < 1 {
                return Some(Float::with_val(64, rug::float::Special::Infinity));
            }
            let xp = Float::with_val(64, x.pow(1.0 - p));
            f64_upper(*c) * xp / (p - 1.0)
        }
        Decay::Exponential { c, rate } => {
            let e = Float::with_val(64, (-Float::with_val(64, x * rate)).exp_ref());
            f64_upper(*c) * e / *rate
        }
        Decay::Custom(g) => g(x).as_float().clone(),
        Decay::Unknown => return None,
    };
    Some(v * slack)
}

/// Low-precision standard-map values at `t = tau >= 0`:
/// (tanh-sinh distance of the far node from its endpoint, exp-sinh e^s).
fn std_at(rule: Rule, tau: f64) -> Float {
    let t = Float::with_val(64, tau);
    let s = Float::with_val(64, t.sinh_ref()) * Float::with_val(64, Constant::Pi) / 2u32;
    match rule {
        Rule::TanhSinh => Float::with_val(64, 1u32 + Float::with_val(64, (s * 2u32).exp_ref())).recip(),
        Rule::ExpSinh => Float::with_val(64, s.exp_ref()),
    }
}

/// Smallest scanned `tau` whose end piece is below `budget`, plus its bound.
fn truncation<B>(cap: f64, budget: &Float, bound: B) -> (f64, Option<Float>)
where
    B: Fn(f64) -> Option<Float>,
{
    let mut tau = SCAN_STEP;
    loop {
        match bound(tau) {
            None => return (cap, None),
            Some(b) if b <= *budget || tau >= cap => return (tau.min(cap), Some(b)),
            Some(_) => tau += SCAN_STEP,
        }
    }
}

pub fn default_prec(tol: f64) -> u32 {
    let bits = if tol > 0.0 { (-tol.log2()).ceil().max(0.0) as u32 } else { 256 };
    (bits + 32).max(64)
}

/// Integrates `f` to absolute tolerance `tol`.
pub fn quad(f: &Integrand<'_>, tol: f64) -> Result<QuadResult, QuadError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let prec = f.prec.unwrap_or_else(|| default_prec(tol));
    let q = prec + NODE_GUARD;
    let cap = t_cap(q);
    let budget = Float::with_val(64, tol / 8.0);

    let (rule, lo, hi, width) = match &f.domain {
        Domain::Finite { a, b } => {
            if a >= b {
                return Err(QuadError::Interval(format!("[{a}, {b}]")));
            }
            let w = Rational::from(b - a);
            (Rule::TanhSinh, a.clone(), Some(b.clone()), w)
        }
        Domain::HalfLine { a } => (Rule::ExpSinh, a.clone(), None, Rational::from(1)),
    };
    let width_f = Float::with_val(64, &width);

    // truncation points and end-piece bounds
    let (t_left, left_err, t_right, right_err) = match rule {
        Rule::TanhSinh => {
            let (tl, el) = truncation(cap, &budget, |tau| {
                endpoint_bound(f.left, &(std_at(rule, tau) * &width_f))
            });
            let (tr, er) = truncation(cap, &budget, |tau| {
                endpoint_bound(f.right, &(std_at(rule, tau) * &width_f))
            });
            (tl, el, tr, er)
        }
        Rule::ExpSinh => {
            let (tl, el) = truncation(cap, &budget, |tau| {
                endpoint_bound(f.left, &std_at(rule, tau).recip())
            });
            let (tr, er) = truncation(cap, &budget, |tau| decay_bound(&f.decay, &std_at(rule, tau)));
            (tl, el, tr, er)
        }
    };
    let mut trunc = Mag::zero();
    for e in [left_err, right_err].into_iter().flatten() {
        trunc = trunc.add(&Mag::from_float(&e));
    }

    let a_ball = Ball::from_rational(&lo, q);
    let b_ball = hi.as_ref().map(|b| Ball::from_rational(b, q));
    let w_ball = Ball::from_rational(&width, q);
    let half = Float::with_val(q, 0.5);

    let make_node = |sn: &StdNode| -> (Node, Ball) {
        match rule {
            Rule::TanhSinh => {
                let b_ball = b_ball.as_ref().expect("finite interval");
                let (x, to_left, to_right) = if sn.near_left <= half {
                    let dl = &w_ball * &Ball::exact(sn.near_left.clone());
                    let x = &a_ball + &dl;
                    let dr = &w_ball - &dl;
                    (x, dl, dr)
                } else {
                    let dr = &w_ball * &Ball::exact(sn.near_right.clone());
                    let x = b_ball - &dr;
                    let dl = &w_ball - &dr;
                    (x, dl, dr)
                };
                let w = &w_ball * &Ball::exact(sn.weight.clone());
                (Node { x, to_left, to_right: Some(to_right), prec }, w)
            }
            Rule::ExpSinh => {
                let dl = Ball::exact(sn.near_left.clone());
                let x = &a_ball + &dl;
                (Node { x, to_left: dl, to_right: None, prec }, Ball::exact(sn.weight.clone()))
            }
        }
    };

    let mut acc = Ball::zero(q);
    let mut abs_acc = Mag::zero();
    let mut nodes_used = 0usize;
    let mut prev: Option<Ball> = None;
    let mut best: Option<(Ball, Mag)> = None;
    let mut level = 0u32;
    loop {
        let table = node_table(rule, q, level);
        let active: Vec<&StdNode> = table
            .iter()
            .filter(|sn| -t_left <= sn.t && sn.t <= t_right)
            .collect();
        if nodes_used + active.len() > NODE_CAP {
            break;
        }
        let vals: Vec<(Ball, Ball)> = active
            .par_iter()
            .map(|sn| {
                let (node, w) = make_node(sn);
                let fx = (f.eval)(&node).map_err(|source| QuadError::Eval {
                    x: node.x.mid_string(20),
                    source,
                })?;
                Ok((w, fx))
            })
            .collect::<Result<_, QuadError>>()?;
        nodes_used += vals.len();
        for (w, fx) in &vals {
            let term = w * fx;
            abs_acc = abs_acc.add(&term.mag());
            acc = &acc + &term;
        }
        let s = acc.mul_pow2(-(level as i32));
        if let Some(p) = &prev {
            let diff = (&s - p).mid().clone();
            let disc = Mag::from_float(&diff);
            // stored abscissas and weights carry relative error below 2^(4-q)
            let table_err = abs_acc.mul(&Mag::pow2(4 - q as i64 - level as i64));
            let extra = disc.add(&table_err).add(&trunc);
            let mut v = s.clone();
            v.add_error(&extra);
            let total = v.rad().clone();
            let better = best.as_ref().map_or(true, |(_, r)| total < *r);
            if better {
                best = Some((v.clone(), total.clone()));
            }
            if level >= MIN_LEVEL && total.to_f64() <= tol {
                return Ok(QuadResult { value: v.with_prec(prec), nodes_used, converged: true });
            }
        }
        prev = Some(s);
        level += 1;
    }
    let value = match best {
        Some((v, _)) => v.with_prec(prec),
        None => Ball::new(Float::new(prec), Mag::inf()),
    };
    Ok(QuadResult { value, nodes_used, converged: false })
}
