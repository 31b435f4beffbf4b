use gamma_criteria::analytic::gamma_reference;
use gamma_criteria::ball::{Ball, Mag};
use gamma_criteria::combinatorics::lcm_upto;
use gamma_criteria::criterion::*;
use proptest::prelude::*;
use rug::ops::Pow;
use rug::{Float, Rational};

// Frozen from an independent 150-digit evaluation of the defining sums.
const L_3_0: &str = "3.092379492353929954107382";
const L_4_3: &str = "3.589249013177704789381218";
const J_ORACLE: &[(u32, u32, &str)] = &[
    (1, 0, "0.08129306167780693397977044"),
    (1, 1, "-0.03648997397857652055902367"),
    (2, 1, "-0.003544719827836265340941752"),
    (3, 0, "0.002928490588796148047227297"),
    (4, 3, "-0.0002019885874290166789368961"),
    (10, 2, "1.197885857043100241846836e-9"),
    (20, 3, "-4.233935350035548580435543e-17"),
    (40, 0, "2.752584449469665516128865e-26"),
    (40, 3, "-2.446286101679638207489509e-30"),
];
const I_1: &str = "0.040725690922956340047";
const I_10: &str = "6.7179698910796709856e-14";

fn close(b: &Ball, s: &str, rel: f64) -> bool {
    let want = Float::with_val(200, Float::parse(s).unwrap());
    let diff = Float::with_val(200, b.mid() - &want).abs();
    let scale = Float::with_val(200, want.abs_ref());
    diff <= scale * rel + b.rad().as_float()
}

fn signed_j(n: u32, m: u32) -> Ball {
    let j = j_by_identity(n, m, gamma_reference()).unwrap();
    if m % 2 == 0 {
        j
    } else {
        -j
    }
}

#[test]
fn linear_forms_match_oracle() {
    assert!(close(&l_nm(3, 0, 200).unwrap(), L_3_0, 1e-24));
    assert!(close(&l_nm(4, 3, 200).unwrap(), L_4_3, 1e-24));
    assert_eq!(a_nm(2), Rational::from(3));
}

#[test]
fn remainders_match_oracle() {
    for (n, m, s) in J_ORACLE {
        let j = j_by_identity(*n, *m, gamma_reference()).unwrap();
        assert!(close(&j, s, 1e-20), "J({n},{m}) = {j}");
        assert!(j.rad().to_f64() < 1e-80);
    }
}

#[test]
fn remainder_sign_and_ratio() {
    for m in 0..=3u32 {
        let mut prev: Option<Ball> = None;
        for n in m.max(1)..=41 {
            let j = signed_j(n, m);
            assert!(j.is_positive(), "sign at ({n},{m})");
            if let Some(p) = prev {
                let r = j.div(&p).unwrap();
                assert!(r.upper() < 0.25, "ratio at ({n},{m}): {r}");
            }
            prev = Some(j);
        }
    }
}

#[test]
fn scaled_remainder_bound() {
    for m in 0..=3u32 {
        for n in m.max(1)..=40 {
            let v = signed_j(n, m).mul_int(&lcm_upto(n));
            let bound = Float::with_val(128, 0.707f64).pow(n);
            assert!(v.upper() < bound, "d_n J at ({n},{m})");
        }
    }
}

#[test]
fn dyadic_scaled_remainders_decrease() {
    for m in 0..=3u32 {
        let mut prev: Option<Ball> = None;
        for p in 0..=5u32 {
            let n = 1u32 << p;
            if n < m {
                continue;
            }
            let v = signed_j(n, m).mul_int(&lcm_upto(n));
            if let Some(pv) = prev {
                assert!(v.upper() < pv.lower(), "p={p}, m={m}");
            }
            prev = Some(v);
        }
    }
}

#[test]
fn root_decay_at_40() {
    let j = signed_j(40, 0);
    let root = j.mid().to_f64().powf(1.0 / 40.0);
    assert!((root / 0.25 - 1.0).abs() < 0.1, "root {root}");
    // larger m carries a polynomial prefactor that is still visible at n = 40
    let j3 = signed_j(40, 3);
    let root3 = j3.mid().to_f64().powf(1.0 / 40.0);
    assert!((root3 - 0.1819).abs() < 1e-3, "root {root3}");
}

#[test]
fn table_anchors() {
    let ctx = CriterionContext::with_reference(PrecisionPolicy::default());
    let anchors = [
        (1, 0, 1.38868),
        (2, 0, 0.56003),
        (3, 3, 0.67030),
        (10, 0, 0.06778),
        (20, 0, 0.001147),
    ];
    for (n, m, want) in anchors {
        let row = ctx.criterion_row(n, m, 53).unwrap();
        assert!(row.certified);
        let got = row.table_ratio.to_f64();
        assert!((got - want).abs() / want < 5e-4, "({n},{m}): {got}");
    }
    // recomputation gives 3.38225, not 0.38225
    let row = ctx.criterion_row(4, 3, 53).unwrap();
    assert!((row.table_ratio.to_f64() - 3.38225).abs() < 1e-4);
}

#[test]
fn cumulative_average_band() {
    let ctx = CriterionContext::with_reference(PrecisionPolicy::default());
    let s = ctx.sweep(200, &[0], 53).unwrap();
    assert_eq!(s.rows.len(), 200);
    assert!(s.rows.iter().all(|r| r.certified));
    let last = s.cumavg.last().unwrap().to_f64();
    assert!(last > 0.3 && last < 0.7, "cumavg {last}");
    let mean: f64 = s.rows.iter().map(|r| r.frac_signed.to_f64()).sum::<f64>() / 200.0;
    assert!((mean - last).abs() < 1e-12);
}

#[test]
fn sweep_resumes_with_prior_rows() {
    let ctx = CriterionContext::with_reference(PrecisionPolicy::default());
    let full = ctx.sweep(12, &[0, 1], 53).unwrap();
    let head = ctx.sweep(5, &[0, 1], 53).unwrap();
    let tail = ctx.sweep_range(6, 12, &[0, 1], 53, &head.rows).unwrap();
    let split = head.rows.len();
    for (a, b) in full.cumavg[split..].iter().zip(&tail.cumavg) {
        assert_eq!(a.mid(), b.mid());
    }
    for (a, b) in full.rows[split..].iter().zip(&tail.rows) {
        assert_eq!((a.n, a.m), (b.n, b.m));
        assert_eq!(a.frac_signed.mid(), b.frac_signed.mid());
    }
}

#[test]
fn precision_cap_is_reported() {
    let ctx = CriterionContext::with_reference(PrecisionPolicy::with_cap(100));
    let r = ctx.criterion_row(30, 0, 53);
    assert!(matches!(r, Err(CriterionError::PrecisionCap { .. })) || !r.unwrap().certified);
}

#[test]
fn sondow_values() {
    assert_eq!(sondow_a(1).unwrap(), Rational::from((5, 2)));
    assert_eq!(sondow_a(2).unwrap(), Rational::from((131, 12)));
    let g = gamma_reference();
    let i1 = sondow_i(1, g, 256).unwrap();
    assert!(close(&i1, I_1, 1e-18));
    let i10 = sondow_i(10, g, 256).unwrap();
    assert!(close(&i10, I_10, 1e-15));
    for n in 10..15u32 {
        let a = sondow_i(n, g, 256).unwrap();
        let b = sondow_i(n + 1, g, 256).unwrap();
        let r = b.div(&a).unwrap().to_f64().abs();
        assert!((r * 16.0 - 1.0).abs() < 0.2, "n={n}: {r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn identity_holds_for_random_rows(n in 1u32..60, m in 0u32..4) {
        prop_assume!(m <= n);
        let g = gamma_reference();
        let prec = working_precision(n, 200);
        let l = l_nm(n, m, prec).unwrap();
        let j = j_by_identity(n, m, g).unwrap();
        let a = Ball::from_rational(&a_nm(n), prec);
        let back = &(&a - &l) + &j;
        prop_assert!(back.overlaps(g));
    }

    #[test]
    fn odd_m_fractions_are_complementary(n in 1u32..60, m in 0u32..4) {
        prop_assume!(m <= n && m % 2 == 1);
        let ctx = CriterionContext::with_reference(PrecisionPolicy::default());
        let row = ctx.criterion_row(n, m, 53).unwrap();
        let s = &row.frac_signed + &row.frac_unsigned;
        prop_assert!(s.overlaps(&Ball::from_i64(1)));
    }

    #[test]
    fn escalation_is_consistent(n in 1u32..60, m in 0u32..4) {
        prop_assume!(m <= n);
        let ctx = CriterionContext::with_reference(PrecisionPolicy::default());
        let lo = working_precision(n, 53);
        let a = ctx.row_at(n, m, lo, 53).unwrap();
        let b = ctx.row_at(n, m, 2 * lo, 53).unwrap();
        prop_assert!(a.frac_signed.overlaps(&b.frac_signed));
        prop_assert!(a.frac_unsigned.overlaps(&b.frac_unsigned));
        prop_assert!(b.frac_signed.rad() <= &a.frac_signed.rad().max(&Mag::pow2(-400)));
    }
}
