use gamma_criteria::combinatorics::*;
use proptest::prelude::*;
use rug::{Float, Integer, Rational};

fn q(a: i64, b: i64) -> Rational {
    Rational::from((a, b))
}

#[test]
fn binomial_known_values() {
    assert_eq!(binomial(20, 10), 184756);
    assert_eq!(binomial(5, -1), 0);
    assert_eq!(binomial(5, 6), 0);
    assert_eq!(binomial(0, 0), 1);
}

#[test]
fn harmonic_differences_up_to_1000() {
    let h = harmonic_numbers(1000);
    for n in 1..=1000u32 {
        assert_eq!(Rational::from(&h[n as usize] - &h[n as usize - 1]), q(1, n as i64));
    }
    assert_eq!(harmonic(1000), h[1000]);
    assert_eq!(harmonic(4), q(25, 12));
}

#[test]
fn legendre_three_term_recurrence() {
    let points = [q(0, 1), q(1, 3), q(1, 2), q(7, 5), q(-2, 1)];
    for n in 1..50u32 {
        let p0 = legendre_shifted(n - 1);
        let p1 = legendre_shifted(n);
        let p2 = legendre_shifted(n + 1);
        for x in &points {
            let lhs = p2.eval(x) * (n + 1);
            let two_x_minus_1 = Rational::from(x * 2u32) - 1u32;
            let rhs = p1.eval(x) * two_x_minus_1 * (2 * n + 1) - p0.eval(x) * n;
            assert_eq!(lhs, rhs, "n={n}, x={x}");
        }
    }
}

fn inner(a: &LegendrePoly, b: &LegendrePoly) -> Rational {
    let mut s = Rational::new();
    for (i, x) in a.coeffs().iter().enumerate() {
        for (j, y) in b.coeffs().iter().enumerate() {
            s += Rational::from(x * y) / (i + j + 1) as u32;
        }
    }
    s
}

#[test]
fn legendre_orthogonality() {
    let ps: Vec<LegendrePoly> = (0..=15).map(legendre_shifted).collect();
    for i in 0..=15usize {
        for j in 0..=15usize {
            let want = if i == j { q(1, 2 * i as i64 + 1) } else { q(0, 1) };
            assert_eq!(inner(&ps[i], &ps[j]), want, "({i},{j})");
        }
    }
}

#[test]
fn legendre_endpoints_and_delannoy() {
    for n in 0..=30u32 {
        let p = legendre_shifted(n);
        assert_eq!(p.degree(), n);
        assert_eq!(p.eval(&q(1, 1)), 1);
        let at0 = if n % 2 == 0 { q(1, 1) } else { q(-1, 1) };
        assert_eq!(p.eval(&q(0, 1)), at0);
        assert_eq!(Rational::from(p.eval(&q(-1, 1)).abs_ref()), Rational::from(central_delannoy(n)));
        assert_eq!(p.abs_sum(), central_delannoy(n));
    }
    assert_eq!(central_delannoy(3), 63);
}

#[test]
fn delannoy_growth_ratio() {
    let target = 3.0 + 2.0 * 2f64.sqrt();
    let ratio = |n: u32| {
        Float::with_val(64, Rational::from((central_delannoy(n + 1), central_delannoy(n)))).to_f64()
    };
    // D_n ~ c (3+2√2)^n / √n, so the bare ratio is about 1.2% low at n = 40
    let r40 = ratio(40);
    assert!((r40 / target - 1.0).abs() < 0.013, "ratio {r40}");
    assert!((r40 * (41f64 / 40.0).sqrt() / target - 1.0).abs() < 1e-4);
    for n in 60..=80 {
        assert!((ratio(n) / target - 1.0).abs() < 0.01, "n={n}");
    }
}

fn ln_int(x: &Integer) -> f64 {
    Float::with_val(128, x).ln().to_f64()
}

#[test]
fn lcm_bounds() {
    for n in 1..=2000u32 {
        let d = lcm_upto(n);
        assert!(ln_int(&d) <= 1.039 * n as f64, "upper bound fails at {n}");
        let lower_ok = d >= (Integer::from(1) << n);
        if [1, 2, 3, 4, 6].contains(&n) {
            assert!(!lower_ok, "d_{n} >= 2^{n} unexpectedly");
        } else {
            assert!(lower_ok, "lower bound fails at {n}");
        }
    }
}

#[test]
fn lcm_small_values() {
    let want = [1, 2, 6, 12, 60, 60, 420, 840, 2520, 2520];
    for (i, w) in want.iter().enumerate() {
        assert_eq!(lcm_upto(i as u32 + 1), *w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn legendre_weights_are_products(n in 0u32..60, k in 0u32..60) {
        prop_assume!(k <= n);
        prop_assert_eq!(legendre_weight(n, k), binomial(n, k as i64) * binomial(n + k, k as i64));
    }

    #[test]
    fn pascal_rule(n in 1u32..200, k in 0i64..200) {
        prop_assert_eq!(binomial(n, k), binomial(n - 1, k) + binomial(n - 1, k - 1));
    }

    #[test]
    fn lcm_divisibility(n in 1u32..400) {
        let d = lcm_upto(n);
        for j in 1..=n {
            prop_assert!(d.is_divisible(&Integer::from(j)));
        }
        if n > 1 {
            prop_assert!(d.is_divisible(&lcm_upto(n - 1)));
        }
    }

    #[test]
    fn legendre_reflection(n in 0u32..25, a in 0i64..50, b in 1i64..50) {
        // P_n*(1 - x) = (-1)^n P_n*(x)
        let x = q(a, b);
        let p = legendre_shifted(n);
        let lhs = p.eval(&(Rational::from(1) - &x));
        let rhs = if n % 2 == 0 { p.eval(&x) } else { -p.eval(&x) };
        prop_assert_eq!(lhs, rhs);
    }
}
