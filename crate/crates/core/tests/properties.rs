use phank::dsl::{parse_h, Expr, Func, NamedConst};
use phank::fluid::{equilibrium_density, support_endpoints, v_prime};
use phank::hankel::{hankel_logdet_ldl, hankel_logdet_recurrence, MomentSequence};
use phank::jacobi::{jacobi_moment, jacobi_moments};
use phank::linstat::{mean_term, pv_double_integral};
use phank::quadrature::{cheb_expand, gauss_jacobi_rule, ln_h_expansion};
use phank::specfun::{log_barnes_g, log_gamma};
use phank::{BigReal, JacobiParams, MeanForm, Precision};
use proptest::prelude::*;
use rug::{Float, Rational};

fn p40() -> Precision {
    Precision::new(40).unwrap()
}

fn abs(x: BigReal) -> f64 {
    x.abs().to_f64()
}

fn exponent() -> impl Strategy<Value = Rational> {
    (-9i32..=30).prop_map(|k| Rational::from((k, 10)))
}

fn params() -> impl Strategy<Value = JacobiParams> {
    (exponent(), exponent()).prop_map(|(a, b)| JacobiParams::new(a, b).unwrap())
}

/// ASTs of the shape the parser produces: non-negative terminating
/// decimal constants, folded rational exponents.
fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..2000, 0u32..3).prop_map(|(v, places)| Expr::Const(Rational::from((v, 10u32.pow(places))))),
        Just(Expr::X),
        Just(Expr::Named(NamedConst::Pi)),
        Just(Expr::Named(NamedConst::E)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::div(a, b)),
            (inner.clone(), -6i32..6, 1i32..4).prop_map(|(a, n, d)| Expr::pow(a, Rational::from((n, d)))),
            (inner, 0usize..5).prop_map(|(a, f)| {
                let func = [Func::Exp, Func::Log, Func::Sqrt, Func::Cosh, Func::Sinh][f];
                Expr::call(func, a)
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_expressions_reparse_identically(e in expr()) {
        let text = e.to_string();
        let back = parse_h(&text).unwrap();
        prop_assert_eq!(back.expr(), &e, "{}", text);
    }

    #[test]
    fn evaluation_is_deterministic(e in expr(), x in -1.0f64..1.0) {
        let x = Float::with_val(p40().bits(), x);
        match (e.eval(&x), e.eval(&x)) {
            (Ok(a), Ok(b)) => prop_assert!(a == b || (a.is_nan() && b.is_nan())),
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            _ => prop_assert!(false, "evaluation outcome changed"),
        }
    }

    #[test]
    fn barnes_g_difference_equation(z in 0.01f64..60.0) {
        let p = p40();
        let z = Float::with_val(p.bits(), z);
        let lhs = log_barnes_g(&Float::with_val(p.bits(), &z + 1u32), p).unwrap();
        let rhs = log_gamma(&z, p).unwrap() + log_barnes_g(&z, p).unwrap();
        let scale = lhs.to_f64().abs().max(1.0);
        prop_assert!(abs(lhs - rhs) <= 1e-32 * scale);
    }

    #[test]
    fn gamma_duplication(z in 0.05f64..40.0) {
        // Γ(z) Γ(z+1/2) = 2^{1-2z} √π Γ(2z)
        let p = p40();
        let bits = p.bits();
        let z = Float::with_val(bits, z);
        let lhs = log_gamma(&z, p).unwrap() + log_gamma(&Float::with_val(bits, &z + 0.5), p).unwrap();
        let ln2 = Float::with_val(bits, rug::float::Constant::Log2);
        let ln_sqrt_pi = Float::with_val(bits, rug::float::Constant::Pi).ln() / 2u32;
        let rhs = (1u32 - Float::with_val(bits, &z * 2u32)) * ln2 + ln_sqrt_pi
            + log_gamma(&Float::with_val(bits, &z * 2u32), p).unwrap();
        prop_assert!(abs(lhs - rhs) <= 1e-32 * 40.0);
    }

    #[test]
    fn moments_satisfy_their_recurrence(jp in params(), k in 1usize..25) {
        // (k+α+β+2) μ_{k+1} = (β-α) μ_k + k μ_{k-1}
        let p = p40();
        let bits = p.bits();
        let mu = jacobi_moments(k + 2, &jp, p).unwrap();
        let a = jp.alpha_big(bits);
        let b = jp.beta_big(bits);
        let lhs = (Float::with_val(bits, &a + &b) + (k as u32 + 2)) * &mu[k + 1];
        let rhs = Float::with_val(bits, &b - &a) * &mu[k] + Float::with_val(bits, &mu[k - 1] * k as u32);
        prop_assert!(abs(lhs - rhs) <= 1e-32 * mu[0].to_f64());
    }

    #[test]
    fn v_prime_reflection(jp in params(), x in -0.99f64..0.99) {
        let bits = p40().bits();
        let x = Float::with_val(bits, x);
        let swapped = JacobiParams::new(jp.beta().clone(), jp.alpha().clone()).unwrap();
        let lhs = v_prime(&Float::with_val(bits, -&x), &jp).unwrap();
        let rhs = v_prime(&x, &swapped).unwrap();
        let scale = 1.0 + rhs.to_f64().abs();
        prop_assert!(abs(lhs + rhs) <= 1e-35 * scale);
    }

    #[test]
    fn density_is_even_for_symmetric_weights(a in 0i32..30, n in 1usize..40, t in -0.99f64..0.99) {
        let p = p40();
        let jp = JacobiParams::new(Rational::from((a, 10)), Rational::from((a, 10))).unwrap();
        let si = support_endpoints(n, &jp, p).unwrap();
        let x = Float::with_val(p.bits(), &si.b * t);
        let lhs = equilibrium_density(&x, &si).unwrap();
        let rhs = equilibrium_density(&Float::with_val(p.bits(), -&x), &si).unwrap();
        prop_assert!(abs(lhs.clone() - rhs) <= 1e-35 * lhs.to_f64().max(1.0));
    }

    #[test]
    fn mean_shift_under_scaling(c in 1u32..50, n in 1usize..60, jp in params()) {
        let p = p40();
        let base = ln_h_expansion(&parse_h("exp(x/2) + x^2").unwrap(), Some(48), p).unwrap();
        let scaled_h = parse_h(&format!("{c}*(exp(x/2) + x^2)")).unwrap();
        let scaled = ln_h_expansion(&scaled_h, Some(48), p).unwrap();
        let d = mean_term(&scaled, n, &jp, MeanForm::Limit, p).unwrap()
            - mean_term(&base, n, &jp, MeanForm::Limit, p).unwrap();
        let expected = (n as f64 + (jp.alpha().to_f64() + jp.beta().to_f64()) / 2.0) * (c as f64).ln();
        prop_assert!((d.to_f64() - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        prop_assert!(abs(pv_double_integral(&scaled) - pv_double_integral(&base)) < 1e-30);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gauss_jacobi_exactness(jp in params(), m in prop::sample::select(vec![5usize, 10, 20])) {
        let p = p40();
        let rule = gauss_jacobi_rule(m, &jp, p).unwrap();
        let mut pw: Vec<BigReal> = rule.weights.clone();
        for k in 0..2 * m {
            let q = pw.iter().fold(Float::with_val(p.bits(), 0), |acc, v| acc + v);
            let exact = jacobi_moment(k, &jp, p).unwrap();
            let scale = jacobi_moment(0, &jp, p).unwrap().to_f64();
            prop_assert!(abs(q - &exact) <= 1e-33 * scale, "k={} m={}", k, m);
            for (v, x) in pw.iter_mut().zip(&rule.nodes) {
                *v *= x;
            }
        }
    }

    #[test]
    fn symmetric_rules_have_mirrored_nodes(a in exponent(), m in 1usize..30) {
        let jp = JacobiParams::new(a.clone(), a).unwrap();
        let rule = gauss_jacobi_rule(m, &jp, p40()).unwrap();
        for i in 0..m {
            let j = m - 1 - i;
            prop_assert!(abs(Float::with_val(rule.nodes[i].prec(), &rule.nodes[i] + &rule.nodes[j])) < 1e-38);
            prop_assert!(abs(Float::with_val(rule.weights[i].prec(), &rule.weights[i] - &rule.weights[j])) < 1e-38);
        }
    }

    #[test]
    fn chebyshev_round_trip(coeffs in prop::collection::vec(-5i32..5, 1..20), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let p = p40();
        let bits = p.bits();
        let horner = |x: &BigReal| {
            coeffs.iter().rev().fold(Float::with_val(bits, 0), |acc, c| acc * x + *c)
        };
        let m = 32;
        let ce = cheb_expand(|x| Ok(horner(x)), m, p).unwrap();
        for c in &ce.coeffs[coeffs.len()..] {
            prop_assert!(abs(c.clone()) < 1e-35);
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..3 * m {
            let x = Float::with_val(bits, rng.gen_range(-1.0..=1.0));
            prop_assert!(abs(ce.eval(&x) - horner(&x)) < 1e-33);
        }
    }

    #[test]
    fn ldl_and_recurrence_agree(jp in params(), n in 1usize..16) {
        let p = p40();
        let ms = MomentSequence::pure(n, &jp, p).unwrap();
        let ldl = hankel_logdet_ldl(&ms, n, p).unwrap();
        let rec = hankel_logdet_recurrence(&ms, n, &jp, p).unwrap();
        prop_assert!(abs(ldl.log_det - rec.log_det) <= 1e-24 * n as f64);
    }
}

#[test]
fn chebyshev_coefficients_decay_for_analytic_h() {
    let p = p40();
    let ce = ln_h_expansion(&parse_h("1 + x^2/2").unwrap(), Some(64), p).unwrap();
    // ln(1 + x²/2) has its nearest singularity at x = ±i√2, so |c_k| ~ ρ^{-k},
    // ρ = √2 + √3
    let rho = 2f64.sqrt() + 3f64.sqrt();
    for k in (2..40).step_by(2) {
        let c = ce.coeffs[k].to_f64().abs();
        assert!(c < 4.0 * rho.powi(-(k as i32)), "k={k}: {c:e}");
        assert!(c > 0.01 * rho.powi(-(k as i32)) / k as f64, "k={k}: {c:e}");
        assert!(ce.coeffs[k + 1].to_f64().abs() < 1e-38);
    }
}
