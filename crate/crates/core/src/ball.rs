//! Midpoint–radius ("ball") arithmetic over MPFR floats.
//!
//! A [`Ball`] stands for every real number in `[mid - rad, mid + rad]`.
//! Midpoints are rounded to nearest at the working precision; each
//! operation adds an upper bound on its own rounding error to the radius,
//! together with the propagated input radii, so a true value enclosed by
//! the inputs is always enclosed by the output.
//!
//! Radii are kept in [`Mag`], a short MPFR float that is only ever rounded
//! upward. MPFR's exponent range keeps radii like `2^-4000` representable,
//! which `f64` could not.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::ops::CompleteRound;
use rug::{Float, Integer, Rational};

/// Precision of radius magnitudes.
const MAG_PREC: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BallError {
    #[error("division by an enclosure that contains zero")]
    DivisionByZero,
    #[error("{op} is undefined on an enclosure reaching {lower}")]
    Domain { op: &'static str, lower: String },
    #[error("result is not finite")]
    NotFinite,
}

/// Non-negative upper bound used for radii.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct Mag(Float);

impl Mag {
    pub fn zero() -> Mag {
        Mag(Float::new(MAG_PREC))
    }

    pub fn inf() -> Mag {
        Mag(Float::with_val(MAG_PREC, rug::float::Special::Infinity))
    }

    /// `2^e`, exact.
    pub fn pow2(e: i64) -> Mag {
        let e = e.clamp(i32::MIN as i64 / 2, i32::MAX as i64 / 2) as i32;
        Mag(Float::with_val(MAG_PREC, Float::u_exp(1, e)))
    }

    /// Upper bound on `|x|`.
    pub fn from_f64(x: f64) -> Mag {
        assert!(!x.is_nan(), "NaN magnitude");
        Mag(Float::with_val_round(MAG_PREC, x.abs(), Round::Up).0)
    }

    /// Upper bound on `|x|`.
    pub fn from_float(x: &Float) -> Mag {
        Mag(Float::with_val_round(MAG_PREC, x.abs_ref(), Round::Up).0)
    }

    /// Upper bound on `|q|`.
    pub fn from_rational(q: &Rational) -> Mag {
        let a = Rational::from(q.abs_ref());
        Mag(Float::with_val_round(MAG_PREC, &a, Round::Up).0)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn add(&self, other: &Mag) -> Mag {
        Mag((&self.0 + &other.0).complete_round(MAG_PREC, Round::Up).0)
    }

    pub fn mul(&self, other: &Mag) -> Mag {
        Mag((&self.0 * &other.0).complete_round(MAG_PREC, Round::Up).0)
    }

    /// `self / d` rounded up; `d` must be a positive lower bound.
    pub fn div_lower(&self, d: &Float) -> Mag {
        debug_assert!(*d > 0);
        Mag((&self.0 / d).complete_round(MAG_PREC, Round::Up).0)
    }

    pub fn mul_f64(&self, x: f64) -> Mag {
        self.mul(&Mag::from_f64(x))
    }

    pub fn max(&self, other: &Mag) -> Mag {
        if self.0 >= other.0 {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// Upper bound as `f64` (saturating to infinity, never below the true value).
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64_round(Round::Up)
    }

    /// Base-2 exponent bound: `self <= 2^e`. `None` for zero.
    pub fn log2_ceil(&self) -> Option<i64> {
        self.0.get_exp().map(|e| e as i64)
    }
}

impl fmt::Display for Mag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_zero() {
            write!(f, "0")
        } else {
            write!(f, "{}", format_sig(&self.0, 3))
        }
    }
}

/// Bound on `|exact - x|` where `x` was produced by an MPFR operation that
/// reported ternary value `ord`.
fn round_err(x: &Float, ord: Ordering) -> Mag {
    if ord == Ordering::Equal {
        return Mag::zero();
    }
    match x.get_exp() {
        Some(e) => Mag::pow2(e as i64 - x.prec() as i64),
        // inexact zero means underflow
        None if x.is_zero() => Mag::pow2(rug::float::exp_min() as i64),
        None => Mag::inf(),
    }
}

/// Certified real: the enclosure `[mid - rad, mid + rad]`.
#[derive(Clone, Debug)]
pub struct Ball {
    mid: Float,
    rad: Mag,
}

impl Ball {
    pub fn new(mid: Float, rad: Mag) -> Ball {
        Ball { mid, rad }
    }

    pub fn exact(mid: Float) -> Ball {
        Ball { mid, rad: Mag::zero() }
    }

    pub fn zero(prec: u32) -> Ball {
        Ball::exact(Float::new(prec))
    }

    pub fn from_i64(v: i64) -> Ball {
        Ball::exact(Float::with_val(64, v))
    }

    pub fn from_f64(v: f64) -> Ball {
        assert!(v.is_finite());
        Ball::exact(Float::with_val(53, v))
    }

    /// Exact conversion; the midpoint gets as many bits as the integer needs.
    pub fn from_int(v: &Integer) -> Ball {
        let bits = v.significant_bits().max(2);
        Ball::exact(Float::with_val(bits, v))
    }

    pub fn from_rational(q: &Rational, prec: u32) -> Ball {
        if *q.denom() == 1 && q.numer().significant_bits() <= prec {
            return Ball::exact(Float::with_val(prec, q.numer()));
        }
        let (mid, ord) = Float::with_val_round(prec, q, Round::Nearest);
        let rad = round_err(&mid, ord);
        Ball { mid, rad }
    }

    pub fn pi(prec: u32) -> Ball {
        let (mid, ord) = Float::with_val_round(prec, Constant::Pi, Round::Nearest);
        let rad = round_err(&mid, ord);
        Ball { mid, rad }
    }

    pub fn ln2(prec: u32) -> Ball {
        let (mid, ord) = Float::with_val_round(prec, Constant::Log2, Round::Nearest);
        let rad = round_err(&mid, ord);
        Ball { mid, rad }
    }

    pub fn mid(&self) -> &Float {
        &self.mid
    }

    pub fn rad(&self) -> &Mag {
        &self.rad
    }

    pub fn prec(&self) -> u32 {
        self.mid.prec()
    }

    pub fn is_finite(&self) -> bool {
        self.mid.is_finite() && self.rad.is_finite()
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    /// Rounds the midpoint to `prec` bits, widening the radius accordingly.
    pub fn with_prec(&self, prec: u32) -> Ball {
        let (mid, ord) = Float::with_val_round(prec, &self.mid, Round::Nearest);
        let rad = self.rad.add(&round_err(&mid, ord));
        Ball { mid, rad }
    }

    pub fn add_error(&mut self, err: &Mag) {
        self.rad = self.rad.add(err);
    }

    /// Lower end of the enclosure, rounded down.
    pub fn lower(&self) -> Float {
        let p = self.prec().max(MAG_PREC);
        (&self.mid - self.rad.as_float()).complete_round(p, Round::Down).0
    }

    /// Upper end of the enclosure, rounded up.
    pub fn upper(&self) -> Float {
        let p = self.prec().max(MAG_PREC);
        (&self.mid + self.rad.as_float()).complete_round(p, Round::Up).0
    }

    pub fn is_positive(&self) -> bool {
        self.is_finite() && self.lower() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.is_finite() && self.upper() < 0
    }

    pub fn contains_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }

    /// Whether the enclosure meets an integer.
    pub fn contains_integer(&self) -> bool {
        if !self.is_finite() {
            return true;
        }
        let lo = self.lower();
        let hi = self.upper();
        let lo_ceil = lo.ceil();
        lo_ceil <= hi
    }

    /// Upper bound on the largest absolute value in the enclosure.
    pub fn mag(&self) -> Mag {
        Mag::from_float(&self.mid).add(&self.rad)
    }

    /// Whether the two enclosures share a point.
    pub fn overlaps(&self, other: &Ball) -> bool {
        if !self.is_finite() || !other.is_finite() {
            return true;
        }
        let p = self.prec().max(other.prec()) + 2;
        let gap = (&self.mid - &other.mid).complete_round(p, Round::Down).0.abs();
        let reach = self.rad.add(&other.rad);
        gap <= *reach.as_float()
    }

    /// Whether `other` lies entirely inside `self`.
    pub fn contains(&self, other: &Ball) -> bool {
        if !self.is_finite() {
            return true;
        }
        if !other.is_finite() {
            return false;
        }
        self.lower() <= other.lower() && other.upper() <= self.upper()
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    pub fn abs(&self) -> Ball {
        Ball {
            mid: self.mid.clone().abs(),
            rad: self.rad.clone(),
        }
    }

    pub fn sqr(&self) -> Ball {
        self * self
    }

    pub fn mul_int(&self, k: &Integer) -> Ball {
        self * &Ball::from_int(k)
    }

    /// Multiplication by `2^e`, exact.
    pub fn mul_pow2(&self, e: i32) -> Ball {
        let mut mid = self.mid.clone();
        mid <<= e;
        let rad = self.rad.mul(&Mag::pow2(e as i64));
        Ball { mid, rad }
    }

    pub fn div(&self, other: &Ball) -> Result<Ball, BallError> {
        if !self.is_finite() || !other.is_finite() {
            return Err(BallError::NotFinite);
        }
        let bm = Mag::from_float(&other.mid);
        // |b| >= |b.mid| - b.rad
        let abs_b = Float::with_val(other.prec(), other.mid.abs_ref());
        let b_low = Float::with_val_round(MAG_PREC, &abs_b - other.rad.as_float(), Round::Down).0;
        if b_low <= 0 {
            return Err(BallError::DivisionByZero);
        }
        let p = self.prec().max(other.prec());
        let (mid, ord) = Float::with_val_round(p, &self.mid / &other.mid, Round::Nearest);
        let abs_bm_low = Float::with_val_round(MAG_PREC, other.mid.abs_ref(), Round::Down).0;
        let denom = (&abs_bm_low * &b_low).complete_round(MAG_PREC, Round::Down).0;
        let num = Mag::from_float(&self.mid)
            .mul(&other.rad)
            .add(&bm.mul(&self.rad));
        let rad = num.div_lower(&denom).add(&round_err(&mid, ord));
        Ok(Ball { mid, rad })
    }

    pub fn recip(&self) -> Result<Ball, BallError> {
        Ball::from_i64(1).with_prec(self.prec()).div(self)
    }

    pub fn div_int(&self, k: &Integer) -> Result<Ball, BallError> {
        self.div(&Ball::from_int(k))
    }

    pub fn ln(&self) -> Result<Ball, BallError> {
        let lo = self.lower();
        if !self.is_finite() || lo <= 0 {
            return Err(BallError::Domain {
                op: "ln",
                lower: format_sig(&lo, 6),
            });
        }
        let mut mid = self.mid.clone();
        let ord = mid.ln_round(Round::Nearest);
        // |ln x - ln m| <= r / (m - r)
        let rad = self.rad.div_lower(&lo).add(&round_err(&mid, ord));
        Ok(Ball { mid, rad })
    }

    /// `ln(1 + x)`, accurate for small `x`.
    pub fn ln_1p(&self) -> Result<Ball, BallError> {
        let lo = self.lower();
        let one_plus_lo = (&lo + 1u32).complete_round(MAG_PREC, Round::Down).0;
        if !self.is_finite() || one_plus_lo <= 0 {
            return Err(BallError::Domain {
                op: "ln_1p",
                lower: format_sig(&lo, 6),
            });
        }
        let mut mid = self.mid.clone();
        let ord = mid.ln_1p_round(Round::Nearest);
        let rad = self.rad.div_lower(&one_plus_lo).add(&round_err(&mid, ord));
        Ok(Ball { mid, rad })
    }

    pub fn exp(&self) -> Result<Ball, BallError> {
        if !self.is_finite() {
            return Err(BallError::NotFinite);
        }
        let mut mid = self.mid.clone();
        let ord = mid.exp_round(Round::Nearest);
        if !mid.is_finite() {
            return Err(BallError::NotFinite);
        }
        let err = round_err(&mid, ord);
        let rad = if self.rad.is_zero() {
            err
        } else {
            // |e^x - e^m| <= e^m (e^r - 1)
            let mut r = self.rad.as_float().clone();
            r.exp_m1_round(Round::Up);
            let bound = Mag::from_float(&mid).add(&err);
            bound.mul(&Mag::from_float(&r)).add(&err)
        };
        Ok(Ball { mid, rad })
    }

    pub fn sqrt(&self) -> Result<Ball, BallError> {
        let lo = self.lower();
        if !self.is_finite() || lo < 0 {
            return Err(BallError::Domain {
                op: "sqrt",
                lower: format_sig(&lo, 6),
            });
        }
        let mut mid = self.mid.clone();
        let ord = mid.sqrt_round(Round::Nearest);
        let rad = if self.rad.is_zero() {
            round_err(&mid, ord)
        } else {
            if self.mid <= 0 {
                return Err(BallError::Domain {
                    op: "sqrt",
                    lower: format_sig(&lo, 6),
                });
            }
            // |sqrt x - sqrt m| <= r / sqrt m
            let mut s = Float::with_val_round(MAG_PREC, &self.mid, Round::Down).0;
            s.sqrt_round(Round::Down);
            self.rad.div_lower(&s).add(&round_err(&mid, ord))
        };
        Ok(Ball { mid, rad })
    }

    /// `self^k` by binary powering.
    pub fn pow_u(&self, k: u32) -> Ball {
        let mut acc = Ball::from_i64(1).with_prec(self.prec());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        acc
    }

    /// `(e^x + e^-x)/2`.
    pub fn cosh(&self) -> Result<Ball, BallError> {
        let e = self.exp()?;
        let inv = e.recip()?;
        Ok((&e + &inv).mul_pow2(-1))
    }

    /// Largest integer not exceeding the midpoint.
    pub fn floor_mid(&self) -> Integer {
        self.mid
            .to_integer_round(Round::Down)
            .map(|(i, _)| i)
            .expect("finite midpoint")
    }

    /// Decimal rendering of the midpoint with `digits` significant digits.
    pub fn mid_string(&self, digits: usize) -> String {
        format_sig(&self.mid, digits)
    }

    /// Exact round-trippable hexadecimal rendering of the midpoint.
    pub fn mid_hex(&self) -> String {
        self.mid.to_string_radix(16, None)
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        write!(f, "{} ± {}", format_sig(&self.mid, digits), self.rad)
    }
}

impl Add<&Ball> for &Ball {
    type Output = Ball;
    fn add(self, o: &Ball) -> Ball {
        let p = self.prec().max(o.prec());
        let (mid, ord) = Float::with_val_round(p, &self.mid + &o.mid, Round::Nearest);
        let rad = self.rad.add(&o.rad).add(&round_err(&mid, ord));
        Ball { mid, rad }
    }
}

impl Sub<&Ball> for &Ball {
    type Output = Ball;
    fn sub(self, o: &Ball) -> Ball {
        let p = self.prec().max(o.prec());
        let (mid, ord) = Float::with_val_round(p, &self.mid - &o.mid, Round::Nearest);
        let rad = self.rad.add(&o.rad).add(&round_err(&mid, ord));
        Ball { mid, rad }
    }
}

impl Mul<&Ball> for &Ball {
    type Output = Ball;
    fn mul(self, o: &Ball) -> Ball {
        let p = self.prec().max(o.prec());
        let (mid, ord) = Float::with_val_round(p, &self.mid * &o.mid, Round::Nearest);
        let a = Mag::from_float(&self.mid);
        let b = Mag::from_float(&o.mid);
        let rad = a
            .mul(&o.rad)
            .add(&b.mul(&self.rad))
            .add(&self.rad.mul(&o.rad))
            .add(&round_err(&mid, ord));
        Ball { mid, rad }
    }
}

impl Neg for &Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        Ball {
            mid: Float::with_val(self.prec(), -&self.mid),
            rad: self.rad.clone(),
        }
    }
}

impl Neg for Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        Ball {
            mid: -self.mid,
            rad: self.rad,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Ball> for Ball {
            type Output = Ball;
            fn $m(self, o: Ball) -> Ball {
                (&self).$m(&o)
            }
        }
        impl $tr<&Ball> for Ball {
            type Output = Ball;
            fn $m(self, o: &Ball) -> Ball {
                (&self).$m(o)
            }
        }
        impl $tr<Ball> for &Ball {
            type Output = Ball;
            fn $m(self, o: Ball) -> Ball {
                self.$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl std::iter::Sum for Ball {
    fn sum<I: Iterator<Item = Ball>>(iter: I) -> Ball {
        iter.fold(Ball::zero(2), |acc, x| &acc + &x)
    }
}

/// Renders `x` with `digits` significant decimal digits (round to nearest).
///
/// Plain positional notation is used for decimal exponents in `[-20, 20]`,
/// scientific notation (`1.25e-31`) outside that window.
pub fn format_sig(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    // MPFR renders as "[-]d.ddde[+-]x"
    let s = x.to_string_radix(10, Some(digits));
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", s.as_str()),
    };
    // small exponents already come back positional
    let Some((mant, exp)) = body.split_once('e') else {
        return s;
    };
    let exp = exp.parse::<i64>().expect("decimal exponent");
    let mant_digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    // value = 0.d1d2d3... * 10^(point) where point = exp + 1
    let point = exp + 1;
    if !(-20..=20).contains(&exp) {
        let (head, tail) = mant_digits.split_at(1);
        return if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        };
    }
    let mut out = String::from(sign);
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat('0').take((-point) as usize));
        out.push_str(&mant_digits);
    } else if point as usize >= mant_digits.len() {
        out.push_str(&mant_digits);
        out.extend(std::iter::repeat('0').take(point as usize - mant_digits.len()));
    } else {
        let (a, b) = mant_digits.split_at(point as usize);
        out.push_str(a);
        out.push('.');
        out.push_str(b);
    }
    out
}
