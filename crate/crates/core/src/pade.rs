//! Exact Padé approximants of logarithms.
//!
//! [`pade_log1p`] is the diagonal `[n/n]` approximant of `ln(1 + t)` at
//! `t = 0`, stored with the integer denominator coefficients
//! `C(n,k) C(n+k,k)` unnormalized. [`tilde_l`] replaces every logarithm in
//! `L_{n,m}` by it on the grid `n - m + 1 = 2^p`, giving a rational number.
//! [`pade_lnu_over_um1`] is the `[n-1/n]` pair of `ln(u)/(u-1)` at `u = 1`.

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::ball::{Ball, BallError};
use crate::combinatorics::{binomial, harmonic_numbers, lcm_upto, legendre_weight};
use crate::criterion::{l_nm, working_precision, CriterionError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PadeError {
    #[error("denominator vanishes at t = {0}")]
    Pole(String),
    #[error("invalid arguments: {0}")]
    InvalidArgument(String),
    #[error("the two closed forms of {0} disagree")]
    FormMismatch(&'static str),
    #[error(transparent)]
    Criterion(#[from] CriterionError),
    #[error(transparent)]
    Ball(#[from] BallError),
}

pub type Result<T> = std::result::Result<T, PadeError>;

/// Polynomial in the monomial basis, ascending degree.
pub type Poly = Vec<Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadeRational {
    pub n: u32,
    pub num: Poly,
    pub den: Poly,
}

fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().is_some_and(|c| *c == 0) {
        p.pop();
    }
    p
}

pub fn poly_eval(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::new(), |acc, c| acc * x + c)
}

fn poly_eval_ball(p: &[Rational], x: &Ball, prec: u32) -> Ball {
    let mut acc = Ball::zero(prec);
    for c in p.iter().rev() {
        acc = &(&acc * x) + &Ball::from_rational(c, prec);
    }
    acc
}

pub fn poly_mul(a: &[Rational], b: &[Rational]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += Rational::from(x * y);
        }
    }
    out
}

fn poly_add_into(acc: &mut Poly, p: &[Rational], scale: &Rational) {
    if acc.len() < p.len() {
        acc.resize(p.len(), Rational::new());
    }
    for (a, c) in acc.iter_mut().zip(p) {
        *a += Rational::from(c * scale);
    }
}

/// `(c0 + c1 x)^e`.
fn linear_pow(c0: i64, c1: i64, e: u32) -> Poly {
    (0..=e)
        .map(|j| {
            let b = binomial(e, j as i64);
            let v = b * Integer::from(c1).pow(j) * Integer::from(c0).pow(e - j);
            Rational::from(v)
        })
        .collect()
}

/// Taylor coefficients of `num/den` at 0 through degree `deg`.
pub fn series_div(num: &[Rational], den: &[Rational], deg: usize) -> Result<Poly> {
    let d0 = den.first().cloned().unwrap_or_default();
    if d0 == 0 {
        return Err(PadeError::Pole("0".into()));
    }
    let mut out: Poly = Vec::with_capacity(deg + 1);
    for k in 0..=deg {
        let mut v = num.get(k).cloned().unwrap_or_default();
        for j in 1..=k.min(den.len().saturating_sub(1)) {
            v -= Rational::from(&den[j] * &out[k - j]);
        }
        out.push(v / &d0);
    }
    Ok(out)
}

/// Taylor coefficients of `ln(1 + t)` through degree `deg`.
pub fn log1p_taylor(deg: usize) -> Poly {
    (0..=deg)
        .map(|j| {
            if j == 0 {
                Rational::new()
            } else if j % 2 == 1 {
                Rational::from((1, j as u64))
            } else {
                -Rational::from((1, j as u64))
            }
        })
        .collect()
}

/// `[n/n]` of `ln(1+t)` at `t = 0`.
pub fn pade_log1p(n: u32) -> Result<PadeRational> {
    if n == 0 {
        return Err(PadeError::InvalidArgument("pade_log1p needs n >= 1".into()));
    }
    let nu = n as usize;
    let mut den = vec![Rational::new(); nu + 1];
    let mut num = vec![Rational::new(); nu + 1];
    for k in 0..=n {
        let c = Rational::from(legendre_weight(n, k));
        den[(n - k) as usize] += &c;
        for i in 0..k {
            // t * t^(i - k + n)
            let e = (1 + i + n - k) as usize;
            let term = Rational::from((1, i as u64 + 1));
            if i % 2 == 0 {
                num[e] += Rational::from(&c * &term);
            } else {
                num[e] -= Rational::from(&c * &term);
            }
        }
    }
    Ok(PadeRational { n, num, den })
}

impl PadeRational {
    pub fn eval(&self, t: &Rational) -> Result<Rational> {
        let d = poly_eval(&self.den, t);
        if d == 0 {
            return Err(PadeError::Pole(t.to_string()));
        }
        Ok(poly_eval(&self.num, t) / d)
    }

    /// Taylor coefficients at 0 through degree `deg`.
    pub fn taylor(&self, deg: usize) -> Result<Poly> {
        series_div(&self.num, &self.den, deg)
    }
}

/// Free-function form of [`PadeRational::eval`].
pub fn pade_eval(p: &PadeRational, t: &Rational) -> Result<Rational> {
    p.eval(t)
}

fn grid_n(p: u32, m: u32) -> Result<u32> {
    if p >= 31 {
        return Err(PadeError::InvalidArgument(format!("p = {p} is too large")));
    }
    Ok((1u32 << p) + m - 1)
}

fn signed_weight(n: u32, k: u32) -> Rational {
    let c = Rational::from(legendre_weight(n, k));
    if (n + k) % 2 == 0 {
        c
    } else {
        -c
    }
}

/// `L̃_{n,m}` for `n = 2^p + m - 1`; the empty form `n = 0` is zero.
pub fn tilde_l(p: u32, m: u32) -> Result<Rational> {
    let n = grid_n(p, m)?;
    if n == 0 {
        return Ok(Rational::new());
    }
    let pade = pade_log1p(n)?;
    let scale = Rational::from(1u64 << p);
    let mut acc = pade.eval(&Rational::from(1))? * p;
    for k in 1..=n {
        let zeta = Rational::from(k) / &scale;
        acc += signed_weight(n, k) * pade.eval(&zeta)?;
    }
    Ok(acc)
}

/// Exact `{x}` with floor toward `-∞`.
pub fn frac_rational(x: &Rational) -> Rational {
    let fl = x.clone().floor();
    Rational::from(x - fl)
}

/// `{d_{2^p} (-1)^m L̃_{2^p+m-1,m}}`, exactly.
pub fn tilde_frac(p: u32, m: u32) -> Result<Rational> {
    let lt = tilde_l(p, m)?;
    Ok(tilde_frac_of(p, m, &lt))
}

fn tilde_frac_of(p: u32, m: u32, lt: &Rational) -> Rational {
    let d = lcm_upto(1u32 << p);
    let mut x = Rational::from(lt * &d);
    if m % 2 == 1 {
        x = -x;
    }
    frac_rational(&x)
}

/// Precision for comparing `L_{n,m}` with its rational substitute.
fn gap_prec(n: u32) -> u32 {
    working_precision(n, 2 * n + 64)
}

/// Certified `|L_{n,m} - L̃_{n,m}|`.
pub fn delta_gap(p: u32, m: u32, prec: u32) -> Result<Ball> {
    let n = grid_n(p, m)?;
    let lt = tilde_l(p, m)?;
    gap_of(n, m, &lt, prec)
}

fn gap_of(n: u32, m: u32, lt: &Rational, prec: u32) -> Result<Ball> {
    if n == 0 {
        return Ok(Ball::zero(prec));
    }
    let l = l_nm(n, m, prec)?;
    Ok((&l - &Ball::from_rational(lt, prec)).abs())
}

/// `4^-n / n`, for `n >= 1`.
pub fn gap_bound(n: u32) -> Rational {
    assert!(n >= 1, "gap_bound needs n >= 1");
    Rational::from((1, 1)) / (Integer::from(1) << (2 * n)) / n
}

/// `δ_{n,m} = Σ_k (-1)^(n+k) C(n,k) C(n+k,k) (ln(1+ζ_k) - [n/n]_{ζ_k})`,
/// `ζ_k = k / (n-m+1)`: the part of `L - L̃` not coming from `ln 2^p`.
pub fn delta_sum(p: u32, m: u32, prec: u32) -> Result<Ball> {
    let n = grid_n(p, m)?;
    if n == 0 {
        return Ok(Ball::zero(prec));
    }
    let pade = pade_log1p(n)?;
    let scale = Rational::from(1u64 << p);
    let mut acc = Ball::zero(prec);
    for k in 1..=n {
        let zeta = Rational::from(k) / &scale;
        let ln = Ball::from_rational(&zeta, prec).ln_1p()?;
        let diff = &ln - &Ball::from_rational(&pade.eval(&zeta)?, prec);
        acc = &acc + &(&diff * &Ball::from_rational(&signed_weight(n, k), prec));
    }
    Ok(acc)
}

/// `1 / (n 4^n)`.
pub fn delta_bound(n: u32) -> Rational {
    gap_bound(n)
}

#[derive(Clone, Debug)]
pub struct PadeCriterionRow {
    pub p: u32,
    pub m: u32,
    pub n: u32,
    pub ltilde: Rational,
    pub frac: Rational,
    pub gap: Ball,
    /// Certified `gap <= 4^-n / n`.
    pub gap_bound_ok: bool,
    /// The bound is only claimed for `n >= 10`.
    pub gap_bound_applies: bool,
}

pub const GAP_BOUND_MIN_N: u32 = 10;

pub fn pade_row(p: u32, m: u32) -> Result<PadeCriterionRow> {
    let n = grid_n(p, m)?;
    if m > n {
        return Err(PadeError::InvalidArgument(format!("m = {m} exceeds n = {n}")));
    }
    let ltilde = tilde_l(p, m)?;
    let frac = tilde_frac_of(p, m, &ltilde);
    let prec = gap_prec(n);
    let gap = gap_of(n, m, &ltilde, prec)?;
    let gap_bound_ok = n == 0 || gap.upper() <= Ball::from_rational(&gap_bound(n), prec).lower();
    Ok(PadeCriterionRow {
        p,
        m,
        n,
        ltilde,
        frac,
        gap,
        gap_bound_ok,
        gap_bound_applies: n >= GAP_BOUND_MIN_N,
    })
}

/// `ln 2 - [n/n]_{t=1}`.
pub fn ln2_pade_error(n: u32, prec: u32) -> Result<Ball> {
    let v = pade_log1p(n)?.eval(&Rational::from(1))?;
    Ok(&Ball::ln2(prec) - &Ball::from_rational(&v, prec))
}

/// `(3 - 2√2)^n ln 2 / |P_n*(-1)|`, an upper bound for `|ln 2 - [n/n]_1|`.
pub fn ln2_error_bound(n: u32, prec: u32) -> Result<Ball> {
    let s = Ball::from_i64(2).with_prec(prec).sqrt()?.mul_pow2(1);
    let base = &Ball::from_i64(3).with_prec(prec) - &s;
    let del = Ball::from_int(&crate::combinatorics::central_delannoy(n));
    Ok((&base.pow_u(n) * &Ball::ln2(prec)).div(&del)?)
}

/// `(3 - 2√2)^(2n) ln 2`.
pub fn ln2_error_bound_literal(n: u32, prec: u32) -> Result<Ball> {
    let s = Ball::from_i64(2).with_prec(prec).sqrt()?.mul_pow2(1);
    let base = &Ball::from_i64(3).with_prec(prec) - &s;
    Ok(&base.pow_u(2 * n) * &Ball::ln2(prec))
}

/// The `[n-1/n]` approximant `N_n/D_n` of `ln(u)/(u-1)` at `u = 1`,
/// normalized by `N_n(1) = D_n(1) = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogPadePair {
    pub n: u32,
    pub num: Poly,
    pub den: Poly,
}

/// `N_n` from the harmonic-number double sum.
pub fn numerator_harmonic_form(n: u32) -> Poly {
    let h = harmonic_numbers(n);
    let norm = Rational::from(binomial(2 * n, n as i64));
    let mut out = vec![Rational::new(); n as usize];
    for k in 1..=n {
        for i in 0..k {
            let c = Rational::from(binomial(n, i as i64).square());
            out[(k - 1) as usize] += c * Rational::from(&h[(n - i) as usize] - &h[i as usize]) * 2u32;
        }
    }
    trim(out.into_iter().map(|c| c / &norm).collect())
}

/// `N_n` from the Legendre-weight form in powers of `u - 1`.
pub fn numerator_legendre_form(n: u32) -> Poly {
    let norm = Rational::from(binomial(2 * n, n as i64));
    let mut out: Poly = vec![Rational::new()];
    for k in 1..=n {
        let c = Rational::from(legendre_weight(n, k));
        for i in 0..k {
            let mut coeff = Rational::from((1, i as u64 + 1)) * &c;
            if i % 2 == 1 {
                coeff = -coeff;
            }
            poly_add_into(&mut out, &linear_pow(-1, 1, n - k + i), &coeff);
        }
    }
    trim(out.into_iter().map(|c| c / &norm).collect())
}

/// `D_n = C(2n,n)^-1 Σ C(n,k)² u^k`.
pub fn denominator_square_form(n: u32) -> Poly {
    let norm = Rational::from(binomial(2 * n, n as i64));
    (0..=n)
        .map(|k| Rational::from(binomial(n, k as i64).square()) / &norm)
        .collect()
}

/// `D_n = C(2n,n)^-1 Σ C(n,k) C(n+k,k) (1-u)^(n-k) u^k`.
pub fn denominator_legendre_form(n: u32) -> Poly {
    let norm = Rational::from(binomial(2 * n, n as i64));
    let mut out: Poly = vec![Rational::new()];
    for k in 0..=n {
        let c = Rational::from(legendre_weight(n, k));
        let mut term = linear_pow(1, -1, n - k);
        term.splice(0..0, std::iter::repeat(Rational::new()).take(k as usize));
        poly_add_into(&mut out, &term, &c);
    }
    trim(out.into_iter().map(|c| c / &norm).collect())
}

/// Both closed forms of each polynomial are computed and must agree.
pub fn pade_lnu_over_um1(n: u32) -> Result<LogPadePair> {
    if n == 0 {
        return Err(PadeError::InvalidArgument("n must be >= 1".into()));
    }
    let num = numerator_harmonic_form(n);
    if num != numerator_legendre_form(n) {
        return Err(PadeError::FormMismatch("N_n"));
    }
    let den = denominator_square_form(n);
    if den != denominator_legendre_form(n) {
        return Err(PadeError::FormMismatch("D_n"));
    }
    Ok(LogPadePair { n, num, den })
}

/// Re-expands `p(u)` in powers of `x = u - 1`.
pub fn shift_to_one(p: &[Rational]) -> Poly {
    let mut out: Poly = vec![Rational::new()];
    for (j, c) in p.iter().enumerate() {
        if *c != 0 {
            poly_add_into(&mut out, &linear_pow(1, 1, j as u32), c);
        }
    }
    out
}

/// Order of vanishing at `u = 1` of `D_n(u) ln u - N_n(u) (u - 1)`, read off
/// exact Taylor coefficients through degree `2n + 4`; `2n + 5` means no
/// nonzero coefficient was found there.
pub fn contact_order(n: u32) -> Result<u32> {
    let pair = pade_lnu_over_um1(n)?;
    let cutoff = 2 * n as usize + 4;
    let d = shift_to_one(&pair.den);
    let nx = shift_to_one(&pair.num);
    let mut r = poly_mul(&d, &log1p_taylor(cutoff));
    let mut nxx = vec![Rational::new()];
    nxx.extend(nx);
    for (i, c) in nxx.iter().enumerate() {
        if i < r.len() {
            r[i] -= c;
        }
    }
    Ok(r
        .iter()
        .take(cutoff + 1)
        .position(|c| *c != 0)
        .unwrap_or(cutoff + 1) as u32)
}

/// Enclosure of `N_n(u)/D_n(u)` at a ball argument.
pub fn log_pade_eval_ball(pair: &LogPadePair, u: &Ball, prec: u32) -> Result<Ball> {
    let n = poly_eval_ball(&pair.num, u, prec);
    let d = poly_eval_ball(&pair.den, u, prec);
    Ok(n.div(&d)?)
}

/// Truncated decimal rendering of a rational in `[0, 1)` style:
/// `digits` digits after the point, rounded toward zero.
pub fn decimal_string(x: &Rational, digits: usize) -> String {
    let neg = *x < 0;
    let a = Rational::from(x.abs_ref());
    let int = a.clone().trunc();
    let fracp = a - &int;
    let scaled = fracp * Integer::from(10).pow(digits as u32);
    let digits_int = scaled.trunc();
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    s.push_str(&int.numer().to_string());
    if digits > 0 {
        let body = digits_int.numer().to_string();
        s.push('.');
        s.push_str(&"0".repeat(digits - body.len()));
        s.push_str(&body);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from((a, b))
    }

    fn ints(v: &[i64]) -> Poly {
        v.iter().map(|&x| Rational::from(x)).collect()
    }

    #[test]
    fn first_two_approximants() {
        let p1 = pade_log1p(1).unwrap();
        assert_eq!(p1.num, ints(&[0, 2]));
        assert_eq!(p1.den, ints(&[2, 1]));
        let p2 = pade_log1p(2).unwrap();
        assert_eq!(p2.den, ints(&[6, 6, 1]));
        assert_eq!(p2.num, ints(&[0, 6, 3]));
    }

    #[test]
    fn eval_examples() {
        let p1 = pade_log1p(1).unwrap();
        assert_eq!(p1.eval(&q(1, 1)).unwrap(), q(2, 3));
        assert_eq!(p1.eval(&q(0, 1)).unwrap(), 0);
        assert!(matches!(p1.eval(&q(-2, 1)), Err(PadeError::Pole(_))));
        for n in 1..6 {
            assert_eq!(pade_log1p(n).unwrap().eval(&q(0, 1)).unwrap(), 0);
        }
    }

    #[test]
    fn tilde_examples() {
        assert_eq!(tilde_l(0, 1).unwrap(), q(4, 3));
        assert_eq!(tilde_l(1, 1).unwrap(), q(1161, 481));
        assert_eq!(tilde_frac(0, 1).unwrap(), q(2, 3));
        assert_eq!(tilde_frac(1, 0).unwrap(), q(14, 15));
    }

    #[test]
    fn frac_rational_floors_toward_minus_infinity() {
        assert_eq!(frac_rational(&q(-4, 3)), q(2, 3));
        assert_eq!(frac_rational(&q(7, 1)), 0);
        assert_eq!(frac_rational(&q(7, 2)), q(1, 2));
    }

    #[test]
    fn log_pade_small_cases() {
        let p1 = pade_lnu_over_um1(1).unwrap();
        assert_eq!(p1.num, ints(&[1]));
        assert_eq!(p1.den, vec![q(1, 2), q(1, 2)]);
        let p2 = pade_lnu_over_um1(2).unwrap();
        assert_eq!(p2.den, vec![q(1, 6), q(2, 3), q(1, 6)]);
        assert_eq!(p2.num, vec![q(1, 2), q(1, 2)]);
    }

    #[test]
    fn contact_order_small() {
        assert_eq!(contact_order(1).unwrap(), 3);
        assert_eq!(contact_order(2).unwrap(), 5);
        assert_eq!(contact_order(4).unwrap(), 9);
    }

    #[test]
    fn ln2_error_first() {
        let e = ln2_pade_error(1, 128).unwrap();
        assert!((e.to_f64() - 0.026480514).abs() < 1e-9);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_string(&q(2, 3), 6), "0.666666");
        assert_eq!(decimal_string(&q(1, 8), 2), "0.12");
        assert_eq!(decimal_string(&q(0, 1), 3), "0.000");
        assert_eq!(decimal_string(&q(-5, 4), 1), "-1.2");
    }
}
