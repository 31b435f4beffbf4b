//! Exact integer and rational building blocks: binomials, harmonic numbers,
//! `d_n = lcm(1, ..., n)` and the shifted Legendre polynomials `P_n*`.

use std::sync::RwLock;

use rug::{Integer, Rational};

use crate::ball::Ball;

/// Exact rational in lowest terms with a positive denominator.
pub type ExactRational = Rational;

/// `C(n, k)`, zero outside `0 <= k <= n`.
pub fn binomial(n: u32, k: i64) -> Integer {
    if k < 0 || k > n as i64 {
        return Integer::new();
    }
    Integer::from(Integer::binomial_u(n, k as u32))
}

/// `H_n = 1 + 1/2 + ... + 1/n`, with `H_0 = 0`.
pub fn harmonic(n: u32) -> ExactRational {
    (1..=n).fold(Rational::new(), |acc, k| acc + Rational::from((1, k)))
}

/// `[H_0, H_1, ..., H_n]`.
pub fn harmonic_numbers(n: u32) -> Vec<ExactRational> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = Rational::new();
    out.push(acc.clone());
    for k in 1..=n {
        acc += Rational::from((1, k));
        out.push(acc.clone());
    }
    out
}

static LCM_CACHE: RwLock<Vec<Integer>> = RwLock::new(Vec::new());

/// `d_n = lcm(1, ..., n)`.
///
/// Values are memoised process-wide and extended incrementally through
/// `d_n = lcm(d_{n-1}, n)`, so a sweep up to `N` costs `N` gcds in total.
pub fn lcm_upto(n: u32) -> Integer {
    assert!(n >= 1, "lcm_upto needs n >= 1");
    let idx = n as usize - 1;
    {
        let cache = LCM_CACHE.read().expect("lcm cache poisoned");
        if let Some(v) = cache.get(idx) {
            return v.clone();
        }
    }
    let mut cache = LCM_CACHE.write().expect("lcm cache poisoned");
    if cache.is_empty() {
        cache.push(Integer::from(1));
    }
    while cache.len() <= idx {
        let k = cache.len() as u32 + 1;
        let next = cache.last().expect("non-empty").clone().lcm(&Integer::from(k));
        cache.push(next);
    }
    cache[idx].clone()
}

/// Shifted Legendre polynomial `P_n*` in the monomial basis,
/// `coeffs[k] = C(n,k) C(n+k,k) (-1)^(n+k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegendrePoly {
    n: u32,
    coeffs: Vec<Integer>,
}

/// `C(n,k) C(n+k,k)`, the unsigned coefficient of `t^k` in `P_n*`.
pub fn legendre_weight(n: u32, k: u32) -> Integer {
    binomial(n, k as i64) * binomial(n + k, k as i64)
}

/// Builds `P_n*` from its closed form.
pub fn legendre_shifted(n: u32) -> LegendrePoly {
    let coeffs = (0..=n)
        .map(|k| {
            let c = legendre_weight(n, k);
            if (n + k) % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect();
    LegendrePoly { n, coeffs }
}

impl LegendrePoly {
    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    /// Exact Horner evaluation.
    pub fn eval(&self, x: &ExactRational) -> ExactRational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::new(), |acc, c| acc * x + c)
    }

    /// Horner evaluation on an enclosure.
    pub fn eval_ball(&self, x: &Ball) -> Ball {
        let mut acc = Ball::zero(x.prec());
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + &Ball::from_int(c);
        }
        acc.with_prec(x.prec())
    }

    /// `sum_k |coeffs[k]| = |P_n*(-1)|`, the central Delannoy number.
    pub fn abs_sum(&self) -> Integer {
        self.coeffs.iter().map(|c| Integer::from(c.abs_ref())).sum()
    }
}

/// Central Delannoy number `D_n = sum_k C(n,k) C(n+k,k) = |P_n*(-1)|`.
pub fn central_delannoy(n: u32) -> Integer {
    (0..=n).map(|k| legendre_weight(n, k)).sum()
}
