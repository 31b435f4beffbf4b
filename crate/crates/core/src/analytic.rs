//! Integral representations checked by quadrature: two integrals for γ,
//! the Markov–Stieltjes form of `1/ln(1-u) + 1/u`, `J_{n,m}` as an integral
//! against the γ-integrand, the moment form of `(-1)^m J_{n,m}` with weight
//! `ρ_m`, finite differences of the remainder sequence, and the integral
//! form of the error of `[n/n]` at `t = 1`.

use std::sync::{Mutex, OnceLock};

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::ball::{Ball, BallError, Mag};
use crate::combinatorics::{central_delannoy, legendre_shifted};
use crate::criterion::{j_by_identity, CriterionError};
use crate::quad::{quad, Decay, Endpoint, Integrand, Node, QuadError, QuadResult};

#[derive(Debug, thiserror::Error)]
pub enum AnalyticError {
    #[error("{what} did not converge after {nodes} nodes (best {best})")]
    NotConverged { what: String, best: Ball, nodes: usize },
    #[error("invalid arguments: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Ball(#[from] BallError),
    #[error(transparent)]
    Criterion(#[from] CriterionError),
}

pub type Result<T> = std::result::Result<T, AnalyticError>;

/// Below this distance from `u = 1` the γ-integrand is summed from its
/// Gregory series.
const SERIES_CUTOFF_LOG2: i32 = -20;

fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 40
}

fn tol_for_digits(digits: u32) -> f64 {
    10f64.powi(-(digits as i32)) / 4.0
}

fn converged(what: impl Into<String>, r: QuadResult) -> Result<Ball> {
    if r.converged {
        Ok(r.value)
    } else {
        Err(AnalyticError::NotConverged { what: what.into(), best: r.value, nodes: r.nodes_used })
    }
}

static GREGORY: Mutex<Vec<Rational>> = Mutex::new(Vec::new());

/// `|G_1|, ..., |G_k|` where `x / ln(1+x) = 1 + Σ G_j x^j`.
pub fn gregory_abs(k: usize) -> Vec<Rational> {
    let mut g = GREGORY.lock().expect("gregory cache poisoned");
    if g.is_empty() {
        g.push(Rational::from(1));
    }
    while g.len() <= k {
        let n = g.len();
        let mut acc = Rational::new();
        for j in 1..=n {
            let term = Rational::from(&g[n - j] / Rational::from(j as u64 + 1));
            if j % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        g.push(acc);
    }
    g[1..=k].iter().map(|c| Rational::from(c.abs_ref())).collect()
}

/// `1/ln u + 1/(1-u)` at a quadrature node in `[0, 1]`.
pub fn gamma_integrand(node: &Node) -> std::result::Result<Ball, BallError> {
    let prec = node.prec;
    let delta = node.to_right.as_ref().expect("finite interval");
    let near_one = delta.upper() < Float::with_val(64, Float::u_exp(1, SERIES_CUTOFF_LOG2));
    if near_one {
        // Σ_{k>=1} |G_k| δ^(k-1), tail below δ^K since Σ |G_k| = 1
        let k = (prec as usize).div_ceil(20) + 2;
        let coeffs = gregory_abs(k);
        let mut acc = Ball::zero(prec);
        for c in coeffs.iter().rev() {
            acc = &(&acc * delta) + &Ball::from_rational(c, prec);
        }
        let tail = delta.mag();
        let mut t = Mag::from_f64(1.0);
        for _ in 0..k {
            t = t.mul(&tail);
        }
        acc.add_error(&t);
        return Ok(acc);
    }
    if node.x.upper() <= 0.5 {
        let lnu = node.x.ln()?;
        return Ok(&lnu.recip()? + &delta.recip()?);
    }
    let wide = prec + 24;
    let d = delta.with_prec(wide);
    let lnu = (-&d).ln_1p()?;
    Ok((&lnu.recip()? + &d.recip()?).with_prec(prec))
}

fn unit_interval<'a, F>(f: F, prec: u32) -> Integrand<'a>
where
    F: Fn(&Node) -> std::result::Result<Ball, BallError> + Send + Sync + 'a,
{
    Integrand::finite(Rational::from(0), Rational::from(1), f)
        .left(Endpoint::Bounded(1.0))
        .right(Endpoint::Removable(1.0))
        .prec(prec)
}

/// `γ = ∫_0^1 (1/ln u + 1/(1-u)) du` to `digits` decimal digits.
pub fn gamma_classic(digits: u32) -> Result<Ball> {
    if digits == 0 {
        return Err(AnalyticError::InvalidArgument("digits must be positive".into()));
    }
    let f = unit_interval(gamma_integrand, bits_for_digits(digits));
    converged("gamma_classic", quad(&f, tol_for_digits(digits))?)
}

/// `ln(1+x)/x` for `x = e^-z`, `z >= 0`.
fn log1p_ratio(z: &Ball, prec: u32) -> std::result::Result<Ball, BallError> {
    if z.lower() > (prec + 64) as f64 {
        // |h - 1| <= x/2 < 2^-(prec+64)
        let mut one = Ball::from_i64(1).with_prec(prec);
        one.add_error(&Mag::pow2(-(prec as i64) - 64));
        return Ok(one);
    }
    let x = (-z).exp()?;
    x.ln_1p()?.div(&x)
}

/// `γ = ∫_{-∞}^{∞} ln(1+e^-z) e^z/(z²+π²) dz`, split at `z = 0`.
pub fn gamma_new(digits: u32) -> Result<Ball> {
    if digits == 0 {
        return Err(AnalyticError::InvalidArgument("digits must be positive".into()));
    }
    let prec = bits_for_digits(digits);
    let tol = tol_for_digits(digits) / 2.0;
    let bound0 = 1.0 / (std::f64::consts::PI * std::f64::consts::PI) * 1.001;
    let right = Integrand::half_line(Rational::from(0), move |n: &Node| {
        let pi2 = Ball::pi(n.prec).sqr();
        let h = log1p_ratio(&n.x, n.prec)?;
        h.div(&(&n.x.sqr() + &pi2))
    })
    .left(Endpoint::Bounded(bound0))
    .decay(Decay::Algebraic { c: 1.0, p: 2.0 })
    .prec(prec);
    // z = -w: (w + ln(1+e^-w)) e^-w / (w² + π²)
    let left = Integrand::half_line(Rational::from(0), move |n: &Node| {
        let pi2 = Ball::pi(n.prec).sqr();
        let e = (-&n.x).exp()?;
        let num = &(&n.x + &e.ln_1p()?) * &e;
        num.div(&(&n.x.sqr() + &pi2))
    })
    .left(Endpoint::Bounded(bound0))
    .decay(Decay::Exponential { c: 1.0, rate: 1.0 })
    .prec(prec);
    let r = converged("gamma_new (z >= 0)", quad(&right, tol)?)?;
    let l = converged("gamma_new (z <= 0)", quad(&left, tol)?)?;
    Ok(&r + &l)
}

/// Digits of the shared reference value of γ.
pub const REFERENCE_DIGITS: u32 = 90;

static GAMMA_REF: OnceLock<Ball> = OnceLock::new();

/// γ from [`gamma_classic`], computed once per process and checked against
/// [`gamma_new`].
pub fn gamma_reference() -> &'static Ball {
    GAMMA_REF.get_or_init(|| {
        let (a, b) = rayon::join(
            || gamma_classic(REFERENCE_DIGITS),
            || gamma_new(REFERENCE_DIGITS),
        );
        let a = a.expect("classic integral for γ failed");
        let b = b.expect("second integral for γ failed");
        assert!(a.overlaps(&b), "integrals for γ disagree: {a} vs {b}");
        a
    })
}

#[derive(Clone, Debug)]
pub struct Residual {
    pub lhs: Ball,
    pub rhs: Ball,
    /// Upper bound on `|lhs - rhs|` over both enclosures.
    pub residual: Mag,
}

impl Residual {
    fn new(lhs: Ball, rhs: Ball) -> Self {
        let residual = (&lhs - &rhs).mag();
        Residual { lhs, rhs, residual }
    }
}

/// The Markov-Stieltjes identity at `u`: `1/ln(1-u) + 1/u` against `∫_0^1 w(t)/(1-ut) dt` with
/// `w(t) = 1/(t (ln²(1/t - 1) + π²))`. The right side is integrated in
/// `z = ln(1/t - 1)`, where it reads `∫ (1-t)/((1-ut)(z²+π²)) dz`.
pub fn markov_stieltjes_residual(u: &Rational, tol: f64) -> Result<Residual> {
    if *u <= 0 || *u >= 1 {
        return Err(AnalyticError::InvalidArgument(format!("u = {u} is outside (0, 1)")));
    }
    let prec = crate::quad::default_prec(tol / 4.0);
    let ub = Ball::from_rational(u, prec);
    let lhs = &(-&ub).ln_1p()?.recip()? + &ub.recip()?;

    let inv_pi2 = 1.0 / (std::f64::consts::PI * std::f64::consts::PI) * 1.001;
    let one_minus_u = 1.0 - u.to_f64();
    let uu = ub.clone();
    // z >= 0: t = 1/(1+e^z) <= 1/2
    let pos = Integrand::half_line(Rational::from(0), move |n: &Node| {
        let pi2 = Ball::pi(n.prec).sqr();
        let e = (-&n.x).exp()?;
        let one = Ball::from_i64(1).with_prec(n.prec);
        let t = e.div(&(&one + &e))?;
        let omt = &one - &t;
        let den = &(&one - &(&uu * &t)) * &(&n.x.sqr() + &pi2);
        omt.div(&den)
    })
    .left(Endpoint::Bounded(2.0 * inv_pi2))
    .decay(Decay::Algebraic { c: 2.0, p: 2.0 })
    .prec(prec);
    let uu = ub.clone();
    // z = -w <= 0: 1 - t = e^-w/(1+e^-w)
    let neg = Integrand::half_line(Rational::from(0), move |n: &Node| {
        let pi2 = Ball::pi(n.prec).sqr();
        let e = (-&n.x).exp()?;
        let one = Ball::from_i64(1).with_prec(n.prec);
        let omt = e.div(&(&one + &e))?;
        let t = &one - &omt;
        let den = &(&one - &(&uu * &t)) * &(&n.x.sqr() + &pi2);
        omt.div(&den)
    })
    .left(Endpoint::Bounded(inv_pi2 / one_minus_u * 1.001))
    .decay(Decay::Exponential { c: inv_pi2 / one_minus_u * 1.001, rate: 1.0 })
    .prec(prec);
    let a = converged("Markov-Stieltjes (z >= 0)", quad(&pos, tol / 4.0)?)?;
    let b = converged("Markov-Stieltjes (z <= 0)", quad(&neg, tol / 4.0)?)?;
    Ok(Residual::new(lhs, &a + &b))
}

/// Bits of cancellation in evaluating `P_n*` on `[0, 1]`.
fn legendre_bits(n: u32) -> u32 {
    (n as f64 * (3.0 + 2.0 * 2f64.sqrt()).log2()).ceil() as u32
}

/// `J_{n,m} = ∫_0^1 u^(n-m) P_n*(u) (1/ln u + 1/(1-u)) du`.
pub fn j_direct(n: u32, m: u32, tol: f64) -> Result<Ball> {
    if m > n {
        return Err(AnalyticError::InvalidArgument(format!("m = {m} exceeds n = {n}")));
    }
    let prec = crate::quad::default_prec(tol) + legendre_bits(n);
    let poly = legendre_shifted(n);
    let f = unit_interval(
        move |node: &Node| {
            let g = gamma_integrand(node)?;
            let p = poly.eval_ball(&node.x);
            Ok(&(&node.x.pow_u(n - m) * &p) * &g)
        },
        prec,
    );
    converged(format!("J_direct({n},{m})"), quad(&f, tol)?)
}

/// `ρ_m(v) = ∫_{φ₂}^{φ₁} ((u-u²-v)/(uv))^m / ((u-u²-v)(π² + ln²(uv/(u-u²-v)))) du`
/// for `0 < v < 1/4`, with `D = 1 - 4v` given separately.
///
/// Integrated in `y` with `u = (1 + √D tanh y)/2`, which turns it into
/// `∫_ℝ (g/(uv))^m (2/√D) / (π² + ℓ²) dy`, `g = D / (4 cosh² y)`,
/// `ℓ = ln(4uv/D) + 2 ln cosh y`.
fn rho_parts(m: u32, v: &Ball, d: &Ball, tol: f64, prec: u32) -> Result<QuadResult> {
    let sd = d.sqrt()?;
    let one = Ball::from_i64(1).with_prec(prec);
    let phi2 = v.mul_pow2(1).div(&(&one + &sd))?;
    let two_over_sd = Ball::from_i64(2).with_prec(prec).div(&sd)?;

    // tail constants in low precision, rounded outward
    let lo = |b: &Ball| Float::with_val(64, b.lower());
    let d_lo = lo(d);
    let sd_lo = lo(&sd);
    let pv_lo = lo(&(&phi2 * v));
    let c_tail = Float::with_val(64, &pv_lo / &d_lo).ln();
    let ratio_hi = Float::with_val_round(64, &d.upper() / &pv_lo, Round::Up).0;
    let pi2 = Float::with_val(64, Constant::Pi).square();
    let sup = {
        let r = Float::with_val(64, (&ratio_hi).pow(m));
        (Float::with_val(64, 2u32) / &sd_lo * r / &pi2).to_f64() * 1.001
    };
    let mm = m;
    let tail = move |y: &Float| -> Mag {
        if mm == 0 {
            let den = Float::with_val(64, y * 2u32) + &c_tail;
            if den <= 0 {
                return Mag::inf();
            }
            Mag::from_float(&(Float::with_val(64, &sd_lo * den).recip())).mul_f64(1.001)
        } else {
            let e = Float::with_val(64, (-Float::with_val(64, y * (2 * mm))).exp_ref());
            let r = Float::with_val(64, (&ratio_hi).pow(mm));
            let v = Float::with_val(64, 2u32) / &sd_lo * r * e / (2.0 * mm as f64) / &pi2;
            Mag::from_float(&v).mul_f64(1.001)
        }
    };

    let mut total: Option<Ball> = None;
    let mut nodes = 0;
    let mut ok = true;
    for side in [1i32, -1] {
        let (v, d, sd, phi2, two_over_sd) =
            (v.clone(), d.clone(), sd.clone(), phi2.clone(), two_over_sd.clone());
        let tail = tail.clone();
        let f = Integrand::half_line(Rational::from(0), move |n: &Node| {
            let p = n.prec;
            let one = Ball::from_i64(1).with_prec(p);
            let pi2 = Ball::pi(p).sqr();
            let y = &n.x;
            let e = (-y.mul_pow2(1)).exp()?;
            let onepe = &one + &e;
            let low_u = &phi2 + &(&sd * &e).div(&onepe)?;
            let u = if side < 0 { low_u } else { &one - &low_u };
            let g = (&d * &e).div(&onepe.sqr())?;
            let uv = &u * &v;
            let ell = &(&uv.mul_pow2(2).div(&d)?.ln()? + &y.mul_pow2(1))
                + &(&e.ln_1p()? - &Ball::ln2(p)).mul_pow2(1);
            let core = two_over_sd.div(&(&pi2 + &ell.sqr()))?;
            Ok(&g.div(&uv)?.pow_u(m) * &core)
        })
        .left(Endpoint::Bounded(sup))
        .decay(Decay::Custom(Box::new(tail)))
        .prec(prec);
        let r = quad(&f, tol / 2.0)?;
        nodes += r.nodes_used;
        ok &= r.converged;
        total = Some(match total {
            None => r.value,
            Some(t) => &t + &r.value,
        });
    }
    Ok(QuadResult { value: total.expect("two halves"), nodes_used: nodes, converged: ok })
}

/// `ρ_m(v)` for rational `0 < v < 1/4`.
pub fn rho(m: u32, v: &Rational, tol: f64) -> Result<Ball> {
    if *v <= 0 || *v >= Rational::from((1, 4)) {
        return Err(AnalyticError::InvalidArgument(format!("v = {v} is outside (0, 1/4)")));
    }
    let prec = crate::quad::default_prec(tol);
    let vb = Ball::from_rational(v, prec);
    let d = Ball::from_rational(&(Rational::from(1) - Rational::from(v * 4u32)), prec);
    converged(format!("rho_{m}({v})"), rho_parts(m, &vb, &d, tol, prec)?)
}

#[derive(Clone, Debug)]
pub struct MomentCheck {
    /// `∫_0^{1/4} v^n ρ_m(v) dv`.
    pub moment: Ball,
    /// `(-1)^m J_{n,m}` from the identity.
    pub identity: Ball,
    pub residual: Mag,
    pub nodes_used: usize,
}

/// Nested quadrature of `∫_0^{1/4} v^n ρ_m(v) dv` compared with
/// `(-1)^m J_{n,m}`.
pub fn rho_moment_residual(n: u32, m: u32, tol: f64, gamma_ref: &Ball) -> Result<MomentCheck> {
    if m > n || n > 6 {
        return Err(AnalyticError::InvalidArgument(format!(
            "need 0 <= m <= n <= 6, got n={n}, m={m}"
        )));
    }
    let prec = crate::quad::default_prec(tol);
    let inner_tol = tol / 8.0;
    let left = if n > 2 * m {
        Endpoint::Bounded(2.0)
    } else if n == 2 * m {
        Endpoint::IntegrableLog(1.5)
    } else {
        Endpoint::Unbounded
    };
    let f = Integrand::finite(Rational::from(0), Rational::from((1, 4)), move |node: &Node| {
        let v = &node.to_left;
        let d = node.to_right.as_ref().expect("finite").mul_pow2(2);
        let r = rho_parts(m, v, &d, inner_tol, node.prec).map_err(|_| BallError::NotFinite)?;
        Ok(&v.pow_u(n) * &r.value)
    })
    .left(left)
    .right(Endpoint::Algebraic { c: 1.0, alpha: 0.5 })
    .prec(prec);
    let r = quad(&f, tol)?;
    let nodes_used = r.nodes_used;
    let moment = converged(format!("moment({n},{m})"), r)?;
    let j = j_by_identity(n, m, gamma_ref)?;
    let identity = if m % 2 == 0 { j } else { -j };
    let residual = (&moment - &identity).mag();
    Ok(MomentCheck { moment, identity, residual, nodes_used })
}

/// Rows `n = 1..=n_max`, columns `k = 0..=k_max` of
/// `(-1)^k Δ^k u_n` with `u_n = (-1)^m J_{n,m}`.
#[derive(Clone, Debug)]
pub struct TmsTable {
    pub m: u32,
    pub entries: Vec<Vec<Ball>>,
}

impl TmsTable {
    pub fn all_positive(&self) -> bool {
        self.entries.iter().flatten().all(Ball::is_positive)
    }

    /// `(n, k)` of entries whose sign is not certified positive.
    pub fn uncertain(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (i, row) in self.entries.iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                if !e.is_positive() {
                    out.push((i as u32 + 1, k as u32));
                }
            }
        }
        out
    }
}

pub fn total_monotonicity_table(m: u32, n_max: u32, k_max: u32, gamma_ref: &Ball) -> Result<TmsTable> {
    if n_max + k_max > 40 || m > n_max {
        return Err(AnalyticError::InvalidArgument(format!(
            "need n_max + k_max <= 40 and m <= n_max, got N={n_max}, K={k_max}, m={m}"
        )));
    }
    let first = m.max(1);
    let last = n_max + k_max;
    let mut u: Vec<Ball> = Vec::new();
    for n in first..=last {
        let j = j_by_identity(n, m, gamma_ref)?;
        u.push(if m % 2 == 0 { j } else { -j });
    }
    // diffs[k][i] = (-1)^k Δ^k u_{first+i}
    let mut diffs = vec![u];
    for k in 1..=k_max as usize {
        let prev = &diffs[k - 1];
        let next: Vec<Ball> = prev.windows(2).map(|w| &w[0] - &w[1]).collect();
        diffs.push(next);
    }
    let entries = (first..=n_max)
        .map(|n| {
            let i = (n - first) as usize;
            (0..=k_max as usize).map(|k| diffs[k][i].clone()).collect()
        })
        .collect();
    Ok(TmsTable { m, entries })
}

/// `|P_n*(-1)|^-1 ∫_0^1 t^n (1-t)^n / (1+t)^(n+1) dt`, the integral form of
/// `ln 2 - [n/n]_{t=1}`.
pub fn pade_error_integral(n: u32, tol: f64) -> Result<Ball> {
    let del = central_delannoy(n);
    let prec = crate::quad::default_prec(tol) + del.significant_bits();
    let scaled_tol = tol * del.to_f64();
    let f = Integrand::finite(Rational::from(0), Rational::from(1), move |node: &Node| {
        let t = &node.x;
        let omt = node.to_right.as_ref().expect("finite");
        let one = Ball::from_i64(1).with_prec(node.prec);
        let num = (t * omt).pow_u(n);
        num.div(&(&one + t).pow_u(n + 1))
    })
    .left(Endpoint::Bounded(1.0))
    .right(Endpoint::Bounded(1.0))
    .prec(prec);
    let v = converged(format!("Padé error integral n={n}"), quad(&f, scaled_tol)?)?;
    Ok(v.div_int(&Integer::from(del))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gregory_first_terms() {
        let g = gregory_abs(4);
        assert_eq!(g[0], Rational::from((1, 2)));
        assert_eq!(g[1], Rational::from((1, 12)));
        assert_eq!(g[2], Rational::from((1, 24)));
        assert_eq!(g[3], Rational::from((19, 720)));
    }

    #[test]
    fn integrand_limits() {
        let prec = 128;
        let node = |x: f64| {
            let xb = Ball::from_f64(x).with_prec(prec);
            let d = &Ball::from_i64(1).with_prec(prec) - &xb;
            Node { x: xb.clone(), to_left: xb, to_right: Some(d), prec }
        };
        let near1 = gamma_integrand(&node(1.0 - 1e-9)).unwrap();
        assert!((near1.to_f64() - 0.5).abs() < 1e-8);
        let near0 = gamma_integrand(&node(1e-300)).unwrap();
        assert!((near0.to_f64() - 1.0).abs() < 0.01);
        let mid = gamma_integrand(&node(0.75)).unwrap();
        let want = 1.0 / 0.75f64.ln() + 4.0;
        assert!((mid.to_f64() - want).abs() < 1e-14);
    }

    #[test]
    fn classic_gamma_fifteen_digits() {
        let g = gamma_classic(15).unwrap();
        assert_eq!(g.mid_string(15), "0.577215664901533");
        assert!(g.rad().to_f64() < 1e-15);
    }

    #[test]
    fn zero_digits_rejected() {
        assert!(matches!(gamma_classic(0), Err(AnalyticError::InvalidArgument(_))));
        assert!(matches!(gamma_new(0), Err(AnalyticError::InvalidArgument(_))));
    }
}
