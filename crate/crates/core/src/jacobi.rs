//! Closed forms for the pure Jacobi weight `w(x) = (1-x)^α (1+x)^β`.
//!
//! Monic orthogonal polynomials obey `x P_n = P_{n+1} + α_n P_n + β_n P_{n-1}`,
//! with norms `h_n = h_0 β_1 ⋯ β_n` and `D_n = h_0 h_1 ⋯ h_{n-1}`.

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::precision::{ensure_finite, parse_rational, pi, BigReal, Precision};
use crate::specfun::{log_barnes_g, log_gamma};

/// Exponents of the pure weight, held exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JacobiParams {
    alpha: Rational,
    beta: Rational,
}

impl JacobiParams {
    /// Requires `α > -1` and `β > -1` so that the moments exist.
    pub fn new(alpha: Rational, beta: Rational) -> Result<Self> {
        for (name, v) in [("alpha", &alpha), ("beta", &beta)] {
            if *v <= -1 {
                return Err(Error::InvalidParams(format!("{name} = {} must exceed -1", v.to_f64())));
            }
        }
        Ok(JacobiParams { alpha, beta })
    }

    /// Uses the exact binary value of each `f64`.
    pub fn from_f64(alpha: f64, beta: f64) -> Result<Self> {
        let conv = |v: f64| Rational::from_f64(v).ok_or_else(|| Error::InvalidParams(format!("{v} is not finite")));
        Self::new(conv(alpha)?, conv(beta)?)
    }

    /// Decimal (`"0.5"`, `"-9e-1"`) or fraction (`"1/3"`) strings, read exactly.
    pub fn parse(alpha: &str, beta: &str) -> Result<Self> {
        let conv =
            |s: &str| parse_rational(s).ok_or_else(|| Error::InvalidParams(format!("cannot parse {s:?} as a number")));
        Self::new(conv(alpha)?, conv(beta)?)
    }

    pub fn legendre() -> Self {
        JacobiParams {
            alpha: Rational::new(),
            beta: Rational::new(),
        }
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    pub fn alpha_big(&self, bits: u32) -> BigReal {
        Float::with_val(bits, &self.alpha)
    }

    pub fn beta_big(&self, bits: u32) -> BigReal {
        Float::with_val(bits, &self.beta)
    }

    /// The asymptotic formulas are stated for `α, β ≥ -1/2`.
    pub fn asymptotic_valid(&self) -> bool {
        let half = Rational::from((-1, 2));
        self.alpha >= half && self.beta >= half
    }

    /// `Some((α, β))` when both exponents are non-negative integers.
    pub fn integer_exponents(&self) -> Option<(u32, u32)> {
        let as_u32 = |r: &Rational| {
            if *r.denom() == 1 && *r >= 0 {
                r.numer().to_u32()
            } else {
                None
            }
        };
        Some((as_u32(&self.alpha)?, as_u32(&self.beta)?))
    }

    pub fn is_symmetric(&self) -> bool {
        self.alpha == self.beta
    }

    fn sum(&self) -> Rational {
        Rational::from(&self.alpha + &self.beta)
    }

    pub(crate) fn require_asymptotic(&self) -> Result<()> {
        if self.asymptotic_valid() {
            Ok(())
        } else {
            Err(Error::OutsideValidity(format!(
                "alpha = {}, beta = {}; the asymptotic formula needs alpha, beta >= -1/2",
                self.alpha.to_f64(),
                self.beta.to_f64()
            )))
        }
    }
}

/// Recurrence coefficients `α_0..α_{n-1}` and `β_0..β_{n-1}`.
///
/// `beta_seq[0]` holds `β_0 := μ_0`, so that `h_j = β_0 β_1 ⋯ β_j`.
#[derive(Clone, Debug)]
pub struct RecurrenceCoeffs {
    pub alpha_seq: Vec<BigReal>,
    pub beta_seq: Vec<BigReal>,
}

impl RecurrenceCoeffs {
    pub fn len(&self) -> usize {
        self.alpha_seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha_seq.is_empty()
    }
}

/// `μ_k = ∫ x^k w(x) dx`, from
/// `μ_k = 2^{α+β+1} Σ_j C(k,j) (-2)^j B(α+j+1, β+1)`.
pub fn jacobi_moment(k: usize, jp: &JacobiParams, p: Precision) -> Result<BigReal> {
    // the alternating sum loses about k·log2(3) bits
    let bits = p.bits() + 2 * k as u32 + 32;
    let wp = Precision::new(p.digits() + (2 * k as u32 + 32) * 3 / 10 + 1)?;
    let a = jp.alpha_big(bits);
    let b = jp.beta_big(bits);
    let b1 = Float::with_val(bits, &b + 1u32);
    let lg_b1 = log_gamma(&b1, wp)?;
    let mut sum = Float::with_val(bits, 0);
    let mut binom = Integer::from(1);
    for j in 0..=k {
        let aj = Float::with_val(bits, &a + (j as u32 + 1));
        let abj = Float::with_val(bits, &aj + &b1);
        let log_beta = log_gamma(&aj, wp)? + &lg_b1 - log_gamma(&abj, wp)?;
        let mut term = log_beta.exp() * Float::with_val(bits, &binom);
        term <<= j as u32;
        if j % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        binom *= (k - j) as u32;
        binom /= (j + 1) as u32;
    }
    let s1 = Float::with_val(bits, &a + &b) + 1u32;
    let scale = (s1 * Float::with_val(bits, rug::float::Constant::Log2)).exp();
    ensure_finite(Float::with_val(p.bits(), sum * scale), "jacobi_moment")
}

/// `μ_0, …, μ_{count-1}` of the pure weight.
pub fn jacobi_moments(count: usize, jp: &JacobiParams, p: Precision) -> Result<Vec<BigReal>> {
    (0..count).map(|k| jacobi_moment(k, jp, p)).collect()
}

/// `α_n = (β² - α²) / ((2n+α+β)(2n+α+β+2))`, exactly.
///
/// At `n = 0` the value `μ_1/μ_0 = (β-α)/(α+β+2)` is used, which agrees
/// with the formula whenever `α+β ≠ 0` and stays finite when it vanishes.
pub fn jacobi_alpha_n(n: usize, jp: &JacobiParams) -> Rational {
    let s = jp.sum();
    if n == 0 {
        return Rational::from(&jp.beta - &jp.alpha) / (s + 2u32);
    }
    let num = Rational::from(jp.beta.square_ref()) - Rational::from(jp.alpha.square_ref());
    let d = s + 2 * n as u32;
    let d2 = Rational::from(&d + 2u32);
    num / (d * d2)
}

/// `β_n = 4n(n+α)(n+β)(n+α+β) / ((2n+α+β)²(2n+α+β+1)(2n+α+β-1))` for `n ≥ 1`.
pub fn jacobi_beta_n(n: usize, jp: &JacobiParams) -> Result<Rational> {
    if n == 0 {
        return Err(Error::domain("jacobi_beta_n", "n must be >= 1"));
    }
    let s = jp.sum();
    let a1 = Rational::from(&jp.alpha + 1u32);
    let b1 = Rational::from(&jp.beta + 1u32);
    if n == 1 {
        // (n+α+β)/(2n+α+β-1) = 1 at n = 1; cancelled to stay finite at α+β = -1
        let d = Rational::from(&s + 2u32);
        let d3 = Rational::from(&s + 3u32);
        return Ok(a1 * b1 * 4u32 / (d.clone() * d * d3));
    }
    let nn = n as u32;
    let num = Rational::from(nn)
        * Rational::from(&jp.alpha + nn)
        * Rational::from(&jp.beta + nn)
        * Rational::from(&s + nn)
        * 4u32;
    let d = Rational::from(&s + 2 * nn);
    let den = d.clone() * &d * Rational::from(&d + 1u32) * Rational::from(&d - 1u32);
    Ok(num / den)
}

pub fn recurrence_coeffs(n: usize, jp: &JacobiParams, p: Precision) -> Result<RecurrenceCoeffs> {
    let bits = p.bits();
    let mut alpha_seq = Vec::with_capacity(n);
    let mut beta_seq = Vec::with_capacity(n);
    for k in 0..n {
        alpha_seq.push(Float::with_val(bits, &jacobi_alpha_n(k, jp)));
        if k == 0 {
            beta_seq.push(jacobi_hn(0, jp, p)?);
        } else {
            beta_seq.push(Float::with_val(bits, &jacobi_beta_n(k, jp)?));
        }
    }
    Ok(RecurrenceCoeffs { alpha_seq, beta_seq })
}

/// `ln h_n` for the monic Jacobi polynomials,
/// `h_n = 2^{2n+α+β+1} Γ(n+1)Γ(n+α+1)Γ(n+β+1)Γ(n+α+β+1) / ((2n+α+β+1) Γ(2n+α+β+1)²)`.
///
/// `h_0` is taken as `μ_0 = 2^{α+β+1} Γ(α+1)Γ(β+1)/Γ(α+β+2)`, the same value
/// without the removable singularity at `α+β = -1`.
pub fn jacobi_log_hn(n: usize, jp: &JacobiParams, p: Precision) -> Result<BigReal> {
    let wp = p.scaled_bits(16);
    let bits = wp.bits();
    let a = jp.alpha_big(bits);
    let b = jp.beta_big(bits);
    let s = Float::with_val(bits, &a + &b);
    let ln2 = Float::with_val(bits, rug::float::Constant::Log2);
    let nf = Float::with_val(bits, n);
    let v = if n == 0 {
        let lead = Float::with_val(bits, &s + 1u32) * &ln2;
        lead + log_gamma(&Float::with_val(bits, &a + 1u32), wp)? + log_gamma(&Float::with_val(bits, &b + 1u32), wp)?
            - log_gamma(&Float::with_val(bits, &s + 2u32), wp)?
    } else {
        let two_n_s = Float::with_val(bits, &s + 2 * n as u32);
        let lead = Float::with_val(bits, &two_n_s + 1u32) * &ln2;
        let num = log_gamma(&Float::with_val(bits, &nf + 1u32), wp)?
            + log_gamma(&(Float::with_val(bits, &nf + &a) + 1u32), wp)?
            + log_gamma(&(Float::with_val(bits, &nf + &b) + 1u32), wp)?
            + log_gamma(&(Float::with_val(bits, &nf + &s) + 1u32), wp)?;
        let den = Float::with_val(bits, &two_n_s + 1u32).ln()
            + log_gamma(&Float::with_val(bits, &two_n_s + 1u32), wp)? * 2u32;
        lead + num - den
    };
    ensure_finite(Float::with_val(p.bits(), v), "jacobi_log_hn")
}

pub fn jacobi_hn(n: usize, jp: &JacobiParams, p: Precision) -> Result<BigReal> {
    Ok(jacobi_log_hn(n, jp, p)?.exp())
}

/// Logarithm of the `n`-independent Barnes-G ratio
/// `G²((α+β+1)/2) G²((α+β)/2+1) Γ((α+β+1)/2) / (G(α+β+1) G(α+1) G(β+1))`.
///
/// With `s = α+β+1` the first three factors are rewritten as
/// `G²(s/2+1) Γ(s+1) / (2 Γ(s/2+1) G(s+1))`, whose arguments stay positive for
/// every admissible pair, including `s = 0`.
pub fn log_pure_constant(jp: &JacobiParams, p: Precision) -> Result<BigReal> {
    let wp = p.scaled_bits(16);
    let bits = wp.bits();
    let a = jp.alpha_big(bits);
    let b = jp.beta_big(bits);
    let s = Float::with_val(bits, &a + &b) + 1u32;
    let half_s1 = Float::with_val(bits, &s / 2u32) + 1u32;
    let mid = Float::with_val(bits, &a + &b) / 2u32 + 1u32;
    let v = log_barnes_g(&half_s1, wp)? * 2u32 + log_gamma(&Float::with_val(bits, &s + 1u32), wp)?
        - Float::with_val(bits, rug::float::Constant::Log2)
        - log_gamma(&half_s1, wp)?
        - log_barnes_g(&Float::with_val(bits, &s + 1u32), wp)?
        + log_barnes_g(&mid, wp)? * 2u32
        - log_barnes_g(&Float::with_val(bits, &a + 1u32), wp)?
        - log_barnes_g(&Float::with_val(bits, &b + 1u32), wp)?;
    Ok(Float::with_val(p.bits(), v))
}

/// `ln D_n[w_{α,β}]` from the Barnes-G closed form.
pub fn jacobi_logdet_exact(n: usize, jp: &JacobiParams, p: Precision) -> Result<BigReal> {
    if n == 0 {
        return Err(Error::domain("jacobi_logdet_exact", "n must be >= 1"));
    }
    let wp = p.scaled_bits(16);
    let bits = wp.bits();
    let a = jp.alpha_big(bits);
    let b = jp.beta_big(bits);
    let s = Float::with_val(bits, &a + &b);
    let nf = Float::with_val(bits, n);
    let ln2 = Float::with_val(bits, rug::float::Constant::Log2);
    let ln_2pi = (pi(bits) * 2u32).ln();

    let mut v = -Float::with_val(bits, &nf + &s) * &nf * &ln2 + Float::with_val(bits, &nf * &ln_2pi);
    v += log_pure_constant(jp, wp)?;
    for arg in [
        Float::with_val(bits, &nf + 1u32),
        Float::with_val(bits, &nf + &a) + 1u32,
        Float::with_val(bits, &nf + &b) + 1u32,
        Float::with_val(bits, &nf + &s) + 1u32,
    ] {
        v += log_barnes_g(&arg, wp)?;
    }
    let half_s1 = Float::with_val(bits, &s + 1u32) / 2u32 + &nf;
    let half_s2 = Float::with_val(bits, &s / 2u32) + 1u32 + &nf;
    v -= log_barnes_g(&half_s1, wp)? * 2u32;
    v -= log_barnes_g(&half_s2, wp)? * 2u32;
    v -= log_gamma(&half_s1, wp)?;
    ensure_finite(Float::with_val(p.bits(), v), "jacobi_logdet_exact")
}

/// `ln` of the large-`n` form
/// `2^{-n(n+α+β)} n^{(α²+β²)/2 - 1/4} (2π)^n × (pure constant)`.
pub fn jacobi_logdet_asym(n: usize, jp: &JacobiParams, p: Precision) -> Result<BigReal> {
    if n == 0 {
        return Err(Error::domain("jacobi_logdet_asym", "n must be >= 1"));
    }
    jp.require_asymptotic()?;
    let bits = p.bits() + 16;
    Ok(Float::with_val(
        p.bits(),
        log_leading(n, jp, bits) + log_pure_constant(jp, p)?,
    ))
}

/// `ln(2^{-n(n+α+β)} n^{(α²+β²)/2 - 1/4} (2π)^n)`.
pub(crate) fn log_leading(n: usize, jp: &JacobiParams, bits: u32) -> BigReal {
    let a = jp.alpha_big(bits);
    let b = jp.beta_big(bits);
    let nf = Float::with_val(bits, n);
    let ln2 = Float::with_val(bits, rug::float::Constant::Log2);
    let ln_2pi = (pi(bits) * 2u32).ln();
    let expo = (Float::with_val(bits, a.square_ref()) + Float::with_val(bits, b.square_ref())) / 2u32
        - Float::with_val(bits, 0.25);
    -(Float::with_val(bits, &nf + &a) + &b) * &nf * ln2 + expo * Float::with_val(bits, nf.ln_ref()) + nf * ln_2pi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p64() -> Precision {
        Precision::new(64).unwrap()
    }

    fn jp(a: f64, b: f64) -> JacobiParams {
        JacobiParams::from_f64(a, b).unwrap()
    }

    fn diff(a: &BigReal, b: f64) -> f64 {
        (a.to_f64() - b).abs()
    }

    #[test]
    fn params_validation() {
        assert!(JacobiParams::from_f64(-1.0, 0.0).is_err());
        assert!(JacobiParams::from_f64(0.0, -1.5).is_err());
        let p = jp(-0.9, 0.0);
        assert!(!p.asymptotic_valid());
        assert!(jp(-0.5, -0.5).asymptotic_valid());
        assert_eq!(jp(2.0, 1.0).integer_exponents(), Some((2, 1)));
        assert_eq!(jp(0.5, 1.0).integer_exponents(), None);
        assert_eq!(JacobiParams::parse("1/2", "0.5").unwrap(), jp(0.5, 0.5));
    }

    #[test]
    fn moments_of_legendre() {
        let p = p64();
        let l = JacobiParams::legendre();
        assert!(diff(&jacobi_moment(0, &l, p).unwrap(), 2.0) < 1e-60);
        assert!(diff(&jacobi_moment(1, &l, p).unwrap(), 0.0) < 1e-60);
        assert!(diff(&jacobi_moment(2, &l, p).unwrap(), 2.0 / 3.0) < 1e-15);
        let two_thirds = Float::with_val(p.bits(), 2) / 3u32;
        let d = jacobi_moment(2, &l, p).unwrap() - two_thirds;
        assert!(d.abs().to_f64() < 1e-62);
    }

    #[test]
    fn moments_satisfy_three_term_relation() {
        // (k+α+β+2) μ_{k+1} = (β-α) μ_k + k μ_{k-1}, from integrating a derivative
        let p = p64();
        for (a, b) in [(0.5, 1.5), (1.0, 0.0), (-0.5, 0.25)] {
            let j = jp(a, b);
            let mu = jacobi_moments(30, &j, p).unwrap();
            for k in 1..29 {
                let lhs = Float::with_val(p.bits(), &mu[k + 1]) * (k as f64 + a + b + 2.0);
                let rhs =
                    Float::with_val(p.bits(), &mu[k]) * (b - a) + Float::with_val(p.bits(), &mu[k - 1]) * k as u32;
                let d = (lhs - &rhs).abs().to_f64();
                assert!(d <= 1e-60 * rhs.to_f64().abs().max(1e-3), "a={a}, b={b}, k={k}");
            }
        }
    }

    #[test]
    fn alpha_n_values() {
        assert_eq!(jacobi_alpha_n(1, &jp(1.0, 0.0)), Rational::from((-1, 15)));
        assert_eq!(jacobi_alpha_n(0, &JacobiParams::legendre()), 0);
        for n in 0..10 {
            assert_eq!(jacobi_alpha_n(n, &jp(0.75, 0.75)), 0);
        }
        // n = 0 with α+β = 0 but α ≠ β
        assert_eq!(jacobi_alpha_n(0, &jp(0.5, -0.5)), Rational::from((-1, 2)));
    }

    #[test]
    fn beta_n_values() {
        let l = JacobiParams::legendre();
        assert_eq!(jacobi_beta_n(1, &l).unwrap(), Rational::from((1, 3)));
        for n in 1..=50u32 {
            let expected = Rational::from((n * n, 4 * n * n - 1));
            assert_eq!(jacobi_beta_n(n as usize, &l).unwrap(), expected);
        }
        assert_eq!(jacobi_beta_n(1, &jp(1.0, 1.0)).unwrap(), Rational::from((1, 5)));
        assert!(jacobi_beta_n(0, &l).is_err());
        // α+β = -1: the n = 1 value stays finite
        assert!(jacobi_beta_n(1, &jp(-0.5, -0.5)).unwrap() > 0);
    }

    #[test]
    fn hn_values() {
        let p = p64();
        let l = JacobiParams::legendre();
        assert!(diff(&jacobi_hn(0, &l, p).unwrap(), 2.0) < 1e-60);
        let d = jacobi_hn(1, &l, p).unwrap() - Float::with_val(p.bits(), 2) / 3u32;
        assert!(d.abs().to_f64() < 1e-62);
    }

    #[test]
    fn hn_is_product_of_betas() {
        let p = p64();
        for a in [0.0, 0.5, 1.0] {
            for b in [0.0, 0.5, 1.0] {
                let j = jp(a, b);
                let mut acc = jacobi_hn(0, &j, p).unwrap();
                for n in 1..=20 {
                    acc *= Float::with_val(p.bits(), &jacobi_beta_n(n, &j).unwrap());
                    let h = jacobi_hn(n, &j, p).unwrap();
                    let rel = Float::with_val(p.bits(), &h - &acc).abs() / &acc;
                    assert!(rel.to_f64() < 1e-60, "a={a} b={b} n={n}");
                }
            }
        }
    }

    #[test]
    fn logdet_small_cases() {
        let p = p64();
        let l = JacobiParams::legendre();
        assert!(diff(&jacobi_logdet_exact(1, &l, p).unwrap(), 2f64.ln()) < 1e-15);
        let d1 = jacobi_logdet_exact(1, &l, p).unwrap() - Float::with_val(p.bits(), 2).ln();
        assert!(d1.abs().to_f64() < 1e-60);
        let d2 = jacobi_logdet_exact(2, &l, p).unwrap() - (Float::with_val(p.bits(), 4) / 3u32).ln();
        assert!(d2.abs().to_f64() < 1e-60);
        assert!(jacobi_logdet_exact(0, &l, p).is_err());
    }

    #[test]
    fn logdet_equals_sum_of_log_norms() {
        let p = p64();
        for (a, b) in [
            (0.0, 0.0),
            (0.5, 1.5),
            (1.0, 0.5),
            (1.5, 1.5),
            (-0.5, -0.5),
            (-0.9, 0.3),
        ] {
            let j = jp(a, b);
            let mut acc = Float::with_val(p.bits(), 0);
            for n in 1..=15 {
                acc += jacobi_log_hn(n - 1, &j, p).unwrap();
                let ld = jacobi_logdet_exact(n, &j, p).unwrap();
                let d = Float::with_val(p.bits(), &ld - &acc).abs().to_f64();
                assert!(d <= 1e-56 * acc.to_f64().abs().max(1.0), "a={a} b={b} n={n}: {d:e}");
            }
        }
    }

    #[test]
    fn asym_legendre_form() {
        // π^n n^{-1/4} 2^{-n(n-1)} G²(1/2) Γ(1/2)
        let p = p64();
        let bits = p.bits();
        let n = 17usize;
        let half = Float::with_val(bits, 0.5);
        let expected = pi(bits).ln() * n as u32
            - Float::with_val(bits, n).ln() / 4u32
            - Float::with_val(bits, rug::float::Constant::Log2) * (n * (n - 1)) as u32
            + log_barnes_g(&half, p).unwrap() * 2u32
            + log_gamma(&half, p).unwrap();
        let got = jacobi_logdet_asym(n, &JacobiParams::legendre(), p).unwrap();
        assert!((got - expected).abs().to_f64() < 1e-55);
    }

    #[test]
    fn asym_requires_validity() {
        let err = jacobi_logdet_asym(10, &jp(-0.9, 0.0), p64()).unwrap_err();
        assert!(matches!(err, Error::OutsideValidity(_)));
        // the exact formula still applies
        assert!(jacobi_logdet_exact(10, &jp(-0.9, 0.0), p64()).is_ok());
    }

    #[test]
    fn asym_close_at_hundred() {
        let p = p64();
        let l = JacobiParams::legendre();
        let e = jacobi_logdet_exact(100, &l, p).unwrap() - jacobi_logdet_asym(100, &l, p).unwrap();
        assert!(e.abs().to_f64() <= 1e-2);
    }
}
