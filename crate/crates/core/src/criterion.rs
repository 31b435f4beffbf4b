//! The linear forms `L_{n,m}`, rational parts `A_{n,m} = 2 H_n`, remainders
//! `J_{n,m} = γ - A_{n,m} + L_{n,m}`, the fractional parts of
//! `d_n (±1) L_{n,m}`, and Sondow's `A_n`, `L_n`, `I_n`.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::ball::{Ball, BallError, Mag};
use crate::combinatorics::{binomial, harmonic, harmonic_numbers, lcm_upto, legendre_weight};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CriterionError {
    #[error("precision {requested} bits exceeds the cap of {cap} bits")]
    PrecisionCap { requested: u32, cap: u32 },
    #[error("sign of (-1)^m J_{{{n},{m}}} is not resolved at this precision")]
    SignUncertain { n: u32, m: u32 },
    #[error("enclosure {0} meets an integer")]
    BoundaryAmbiguous(String),
    #[error("invalid arguments: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Ball(#[from] BallError),
}

pub type Result<T> = std::result::Result<T, CriterionError>;

/// Bits needed for row `n`: cancellation in the alternating sum grows like
/// `(3 + 2√2)^n` and the scale factor `d_n` like `e^(1.039 n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionPolicy {
    pub cancel_bits_per_n: f64,
    pub lcm_bits_per_n: f64,
    pub guard_bits: u32,
    pub cap_bits: u32,
}

pub const DEFAULT_CAP_BITS: u32 = 1_000_000;

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            cancel_bits_per_n: (3.0 + 2.0 * 2f64.sqrt()).log2(),
            lcm_bits_per_n: 1.039 / std::f64::consts::LN_2,
            guard_bits: 64,
            cap_bits: DEFAULT_CAP_BITS,
        }
    }
}

impl PrecisionPolicy {
    pub fn with_cap(cap_bits: u32) -> Self {
        PrecisionPolicy { cap_bits, ..Self::default() }
    }

    pub fn working_precision(&self, n: u32, target_frac_bits: u32) -> u32 {
        let per_n = self.cancel_bits_per_n + self.lcm_bits_per_n;
        (n as f64 * per_n).ceil() as u32 + target_frac_bits + self.guard_bits
    }
}

/// [`PrecisionPolicy::working_precision`] under the default policy.
pub fn working_precision(n: u32, target_frac_bits: u32) -> u32 {
    PrecisionPolicy::default().working_precision(n, target_frac_bits)
}

/// `A_{n,m} = 2 H_n`; the same for every `m`.
pub fn a_nm(n: u32) -> Rational {
    harmonic(n) * 2u32
}

fn check_nm(n: u32, m: u32) -> Result<()> {
    if n == 0 || m > n {
        return Err(CriterionError::InvalidArgument(format!(
            "need 1 <= n and 0 <= m <= n, got n={n}, m={m}"
        )));
    }
    Ok(())
}

fn check_cap(prec: u32, cap: u32) -> Result<()> {
    if prec > cap {
        return Err(CriterionError::PrecisionCap { requested: prec, cap });
    }
    Ok(())
}

fn ln_int(j: u64, prec: u32) -> Result<Ball> {
    Ok(Ball::from_int(&Integer::from(j)).with_prec(prec).ln()?)
}

/// `L_{n,m} = Σ_k C(n,k) C(n+k,k) (-1)^(n+k) ln(n-m+k+1)` at `prec` bits,
/// refusing precisions above the default cap.
pub fn l_nm(n: u32, m: u32, prec: u32) -> Result<Ball> {
    l_nm_capped(n, m, prec, DEFAULT_CAP_BITS)
}

pub fn l_nm_capped(n: u32, m: u32, prec: u32, cap: u32) -> Result<Ball> {
    check_nm(n, m)?;
    check_cap(prec, cap)?;
    let mut acc = Ball::zero(prec);
    for k in 0..=n {
        let arg = (n - m + k + 1) as u64;
        if arg == 1 {
            continue;
        }
        let mut c = legendre_weight(n, k);
        if (n + k) % 2 == 1 {
            c = -c;
        }
        acc = &acc + &ln_int(arg, prec)?.mul_int(&c);
    }
    Ok(acc.with_prec(prec))
}

/// `J_{n,m} = γ - A_{n,m} + L_{n,m}`; fails unless `(-1)^m J` is certified
/// positive.
pub fn j_by_identity(n: u32, m: u32, gamma_ref: &Ball) -> Result<Ball> {
    check_nm(n, m)?;
    // J ~ 4^-n, so keep 2n bits more than γ carries
    let prec = gamma_ref.prec().max(working_precision(n, gamma_ref.prec()));
    let l = l_nm(n, m, prec)?;
    j_from_parts(n, m, gamma_ref, &l)
}

fn j_from_parts(n: u32, m: u32, gamma_ref: &Ball, l: &Ball) -> Result<Ball> {
    let a = Ball::from_rational(&a_nm(n), l.prec());
    let j = &(gamma_ref - &a) + l;
    let signed = if m % 2 == 0 { j.clone() } else { -&j };
    if !signed.is_positive() {
        return Err(CriterionError::SignUncertain { n, m });
    }
    Ok(j)
}

/// `{x} = x - ⌊x⌋` on an enclosure that avoids the integers.
pub fn frac_part(x: &Ball) -> Result<Ball> {
    if x.contains_integer() {
        return Err(CriterionError::BoundaryAmbiguous(format!("{x:.12}")));
    }
    let fl = x.floor_mid();
    Ok(x - &Ball::from_int(&fl))
}

#[derive(Clone, Debug)]
pub struct CriterionRow {
    pub n: u32,
    pub m: u32,
    pub l: Ball,
    pub a: Rational,
    /// `γ - A + L`; wide when the reference value is too coarse.
    pub j: Ball,
    /// `{d_n (-1)^m L_{n,m}}`.
    pub frac_signed: Ball,
    /// `{d_n L_{n,m}}`.
    pub frac_unsigned: Ball,
    /// `0.7^n / frac_unsigned`.
    pub table_ratio: Ball,
    pub prec_bits: u32,
    pub certified: bool,
}

/// Precision policy plus the reference enclosure of γ.
#[derive(Clone, Debug)]
pub struct CriterionContext {
    pub policy: PrecisionPolicy,
    pub gamma: Ball,
}

#[derive(Clone, Debug)]
pub struct Sweep {
    pub rows: Vec<CriterionRow>,
    /// Running mean of `frac_signed` per `m`, aligned with `rows`.
    pub cumavg: Vec<Ball>,
}

impl CriterionContext {
    pub fn new(policy: PrecisionPolicy, gamma: Ball) -> Self {
        CriterionContext { policy, gamma }
    }

    /// Uses the cross-checked integral value of γ.
    pub fn with_reference(policy: PrecisionPolicy) -> Self {
        CriterionContext::new(policy, crate::analytic::gamma_reference().clone())
    }

    /// One row at a fixed working precision; `certified` means both
    /// fractional parts have radius below `2^-target`.
    pub fn row_at(&self, n: u32, m: u32, prec: u32, target: u32) -> Result<CriterionRow> {
        check_nm(n, m)?;
        let l = l_nm_capped(n, m, prec, self.policy.cap_bits)?;
        let a = a_nm(n);
        let d = lcm_upto(n);
        let scaled = l.mul_int(&d);
        let signed = if m % 2 == 0 { scaled.clone() } else { -&scaled };
        let gamma = self.gamma.with_prec(prec.max(self.gamma.prec()));
        let j = &(&gamma - &Ball::from_rational(&a, prec)) + &l;
        let make_row = |frac_s: Ball, frac_u: Ball, ratio: Ball, ok: bool| CriterionRow {
            n,
            m,
            l: l.clone(),
            a: a.clone(),
            j: j.clone(),
            frac_signed: frac_s,
            frac_unsigned: frac_u,
            table_ratio: ratio,
            prec_bits: prec,
            certified: ok,
        };
        let fu = frac_part(&scaled);
        let fs = frac_part(&signed);
        let (fu, fs) = match (fu, fs) {
            (Ok(u), Ok(s)) => (u, s),
            _ => {
                // best effort: fractional part of the midpoint, full radius
                let wide = |x: &Ball| {
                    let mut f = x - &Ball::from_int(&x.floor_mid());
                    f.add_error(&Mag::from_f64(1.0));
                    f
                };
                let u = wide(&scaled);
                let s = wide(&signed);
                let ratio = Ball::new(rug::Float::new(prec), Mag::inf());
                return Ok(make_row(s, u, ratio, false));
            }
        };
        let seven_tenths = Rational::from((7, 10)).pow(n);
        let ratio = Ball::from_rational(&seven_tenths, prec)
            .div(&fu)
            .unwrap_or_else(|_| Ball::new(rug::Float::new(prec), Mag::inf()));
        let tol = Mag::pow2(-(target as i64));
        let ok = *fu.rad() < tol && *fs.rad() < tol;
        Ok(make_row(fs, fu, ratio, ok))
    }

    /// One row, doubling the precision until certified or capped.
    pub fn criterion_row(&self, n: u32, m: u32, target_frac_bits: u32) -> Result<CriterionRow> {
        check_nm(n, m)?;
        let cap = self.policy.cap_bits;
        let mut prec = self.policy.working_precision(n, target_frac_bits).min(cap);
        loop {
            let row = self.row_at(n, m, prec, target_frac_bits)?;
            if row.certified || prec >= cap {
                return Ok(row);
            }
            prec = prec.saturating_mul(2).min(cap);
        }
    }

    /// Rows for all `n <= n_max`, `m` in `m_list` with `m <= n`, ordered by
    /// `(n, m)`; rows are computed in parallel.
    pub fn sweep(&self, n_max: u32, m_list: &[u32], target_frac_bits: u32) -> Result<Sweep> {
        self.sweep_range(1, n_max, m_list, target_frac_bits, &[])
    }

    /// Like [`sweep`](Self::sweep) for `n_start <= n <= n_max`, continuing
    /// running means from `prior` (rows for `n < n_start`).
    pub fn sweep_range(
        &self,
        n_start: u32,
        n_max: u32,
        m_list: &[u32],
        target_frac_bits: u32,
        prior: &[CriterionRow],
    ) -> Result<Sweep> {
        let mut ms: Vec<u32> = m_list.to_vec();
        ms.sort_unstable();
        ms.dedup();
        let keys: Vec<(u32, u32)> = (n_start.max(1)..=n_max)
            .flat_map(|n| ms.iter().filter(move |&&m| m <= n).map(move |&m| (n, m)))
            .collect();
        let rows: Vec<CriterionRow> = keys
            .par_iter()
            .map(|&(n, m)| self.criterion_row(n, m, target_frac_bits))
            .collect::<Result<_>>()?;
        let cumavg = running_means(prior, &rows);
        Ok(Sweep { rows, cumavg })
    }
}

/// Running mean of `frac_signed` per `m`, fed one row at a time.
#[derive(Clone, Debug, Default)]
pub struct RunningMeans {
    sums: std::collections::BTreeMap<u32, (Ball, u32)>,
}

impl RunningMeans {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a row and returns the mean for its `m` so far.
    pub fn push(&mut self, row: &CriterionRow) -> Ball {
        let e = self.sums.entry(row.m).or_insert((Ball::zero(64), 0));
        e.0 = &e.0 + &row.frac_signed;
        e.1 += 1;
        e.0.div_int(&Integer::from(e.1)).expect("positive count")
    }

    pub fn count(&self, m: u32) -> u32 {
        self.sums.get(&m).map_or(0, |e| e.1)
    }
}

/// Running mean of `frac_signed` per `m` over `prior` followed by `rows`,
/// reported for `rows` only.
pub fn running_means(prior: &[CriterionRow], rows: &[CriterionRow]) -> Vec<Ball> {
    let mut acc = RunningMeans::new();
    for r in prior {
        acc.push(r);
    }
    rows.iter().map(|r| acc.push(r)).collect()
}

/// Sondow's `A_n = Σ_i C(n,i)² H_{n+i}`.
pub fn sondow_a(n: u32) -> Result<Rational> {
    if n == 0 {
        return Err(CriterionError::InvalidArgument("sondow_a needs n >= 1".into()));
    }
    let h = harmonic_numbers(2 * n);
    Ok((0..=n)
        .map(|i| {
            let c = binomial(n, i as i64);
            Rational::from(c.square()) * &h[(n + i) as usize]
        })
        .sum())
}

/// Sondow's `L_n = 2 Σ_{k=1}^n Σ_{i<k} C(n,i)² (H_{n-i} - H_i) ln(n+k)`.
pub fn sondow_l(n: u32, prec: u32) -> Result<Ball> {
    if n == 0 {
        return Err(CriterionError::InvalidArgument("sondow_l needs n >= 1".into()));
    }
    check_cap(prec, DEFAULT_CAP_BITS)?;
    let h = harmonic_numbers(n);
    let mut acc = Ball::zero(prec);
    for k in 1..=n {
        let coeff: Rational = (0..k)
            .map(|i| {
                let c = binomial(n, i as i64);
                Rational::from(c.square())
                    * Rational::from(&h[(n - i) as usize] - &h[i as usize])
            })
            .sum();
        let term = ln_int((n + k) as u64, prec)? * Ball::from_rational(&coeff, prec);
        acc = &acc + &term;
    }
    Ok(acc.mul_pow2(1).with_prec(prec))
}

/// `I_n = C(2n,n) γ + L_n - A_n`.
pub fn sondow_i(n: u32, gamma_ref: &Ball, prec: u32) -> Result<Ball> {
    let l = sondow_l(n, prec)?;
    let a = Ball::from_rational(&sondow_a(n)?, prec);
    let g = gamma_ref.mul_int(&binomial(2 * n, n as i64));
    Ok(&(&g + &l) - &a)
}
