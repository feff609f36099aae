//! Log-Gamma and log-Barnes-G in arbitrary precision.
//!
//! `ln G` is evaluated by pushing the argument up with `G(z+1) = Γ(z) G(z)`
//! until the Stirling-type series
//!
//! ```text
//! ln G(w+1) = (w²/2 - 1/12) ln w - 3w²/4 + (w/2) ln 2π + ζ'(-1)
//!             + Σ_{k≥1} B_{2k+2} / (4k(k+1) w^{2k})
//! ```
//!
//! reaches working precision. Its smallest term is about `e^{-2πw}`, which
//! fixes the shift. The constant `ζ'(-1)` is recovered from the exact values
//! `G(N+1) = 1! 2! ⋯ (N-1)!` at an integer `N` beyond the same threshold.

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::precision::{ensure_finite, pi, BigReal, Precision};

/// Extra bits absorbing the cancellation in the shifted evaluation.
const G_GUARD_BITS: u32 = 48;

/// `ln Γ(z)` for `z > 0`.
pub fn log_gamma(z: &BigReal, p: Precision) -> Result<BigReal> {
    if !z.is_finite() || *z <= 0 {
        return Err(Error::domain("log_gamma", format!("argument {z} is not > 0")));
    }
    let v = Float::with_val(p.bits(), z).ln_gamma();
    ensure_finite(v, "log_gamma")
}

/// `ln G(z)` for `z > 0`.
pub fn log_barnes_g(z: &BigReal, p: Precision) -> Result<BigReal> {
    if !z.is_finite() || *z <= 0 {
        return Err(Error::domain("log_barnes_g", format!("argument {z} is not > 0")));
    }
    let bits = p.bits() + G_GUARD_BITS;
    // the series is taken at w = z + shift - 1
    let w_min = series_threshold(bits) + 1.0;
    let zf = z.to_f64();
    let shift = if zf >= w_min { 0u32 } else { (w_min - zf).ceil() as u32 };

    let z = Float::with_val(bits, z);
    let w = Float::with_val(bits, &z + shift) - 1u32;
    let mut value = stirling_g(&w, bits) + zeta_prime_minus_one_bits(bits);

    if shift > 0 {
        // Σ_{k<shift} ln Γ(z+k) = shift·ln Γ(z) + Σ_{j ≤ shift-2} (shift-1-j) ln(z+j)
        let mut sum = Float::with_val(bits, z.ln_gamma_ref()) * shift;
        for j in 0..shift.saturating_sub(1) {
            let t = Float::with_val(bits, &z + j).ln();
            sum += t * (shift - 1 - j);
        }
        value -= sum;
    }
    ensure_finite(Float::with_val(p.bits(), value), "log_barnes_g")
}

/// Logarithm of the large-`n` form
/// `G(n+a+1) ~ n^{(n+a)²/2 - 1/12} e^{-3n²/4 - an} (2π)^{(n+a)/2} K`.
pub fn log_barnes_g_asym(n: &BigReal, a: &BigReal, p: Precision) -> Result<BigReal> {
    if !n.is_finite() || *n < 1 {
        return Err(Error::domain("log_barnes_g_asym", format!("n = {n} must be >= 1")));
    }
    let bits = p.bits() + 16;
    let n = Float::with_val(bits, n);
    let a = Float::with_val(bits, a);
    let na = Float::with_val(bits, &n + &a);
    let ln_n = Float::with_val(bits, n.ln_ref());
    let ln_2pi = Float::with_val(bits, pi(bits) * 2u32).ln();

    let power = Float::with_val(bits, na.square_ref()) / 2u32 - Float::with_val(bits, 12).recip();
    let mut v = power * &ln_n;
    v -= Float::with_val(bits, n.square_ref()) * 3u32 / 4u32;
    v -= Float::with_val(bits, &a * &n);
    v += na * ln_2pi / 2u32;
    v += constant_k(p)?;
    ensure_finite(Float::with_val(p.bits(), v), "log_barnes_g_asym")
}

/// `ln K` with `K = G(1/2)^{2/3} π^{1/6} 2^{-1/36}`.
pub fn constant_k(p: Precision) -> Result<BigReal> {
    let bits = p.bits() + 16;
    let half = Float::with_val(bits, 0.5);
    let ln_g_half = log_barnes_g(&half, p.scaled_bits(16))?;
    let ln_pi = pi(bits).ln();
    let ln_2 = Float::with_val(bits, Constant::Log2);
    let v = Float::with_val(bits, ln_g_half * 2u32) / 3u32 + ln_pi / 6u32 - ln_2 / 36u32;
    Ok(Float::with_val(p.bits(), v))
}

/// `ζ'(-1) = 1/12 - ln A`, with `A` Glaisher's constant.
pub fn zeta_prime_minus_one(p: Precision) -> BigReal {
    Float::with_val(p.bits(), zeta_prime_minus_one_bits(p.bits() + 16))
}

/// Smallest `w` at which the series attains `bits` bits.
fn series_threshold(bits: u32) -> f64 {
    (bits as f64 * std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI)).ceil() + 2.0
}

fn zeta_prime_minus_one_bits(bits: u32) -> BigReal {
    let n = series_threshold(bits) as u32 + 1;
    let mut exact = Float::with_val(bits, 0);
    for j in 2..n {
        exact += Float::with_val(bits, j).ln() * (n - j);
    }
    let w = Float::with_val(bits, n);
    exact - stirling_g(&w, bits)
}

/// Series for `ln G(w+1)` without the constant `ζ'(-1)`.
fn stirling_g(w: &BigReal, bits: u32) -> BigReal {
    let w = Float::with_val(bits, w);
    let ln_w = Float::with_val(bits, w.ln_ref());
    let w2 = Float::with_val(bits, w.square_ref());
    let two_pi = pi(bits) * 2u32;
    let ln_2pi = Float::with_val(bits, two_pi.ln_ref());

    let mut sum = (Float::with_val(bits, &w2 / 2u32) - Float::with_val(bits, 12).recip()) * &ln_w;
    sum -= Float::with_val(bits, &w2 * 3u32) / 4u32;
    sum += Float::with_val(bits, &w * &ln_2pi) / 2u32;

    // B_{2j} = (-1)^{j+1} 2 (2j)! ζ(2j) / (2π)^{2j}; start at j = 2.
    let two_pi_sq = Float::with_val(bits, two_pi.square_ref());
    let mut fact_ratio = Float::with_val(bits, 24) / Float::with_val(bits, two_pi_sq.square_ref());
    let inv_w2 = Float::with_val(bits, w2.recip_ref());
    let mut w_pow = inv_w2.clone();
    let eps = Float::with_val(bits, 2).pow(-(bits as i32))
        * Float::with_val(bits, sum.abs_ref()).max(&Float::with_val(bits, 1));
    let k_max = 4 * series_threshold(bits) as u32 + 16;
    let mut prev = None::<Float>;
    for k in 1..=k_max {
        let j = k + 1;
        let zeta = Float::with_val(bits, Float::zeta_u(2 * j));
        let mut bern = Float::with_val(bits, &fact_ratio * &zeta) * 2u32;
        if j % 2 == 0 {
            bern = -bern;
        }
        let term = bern * &w_pow / (4 * k * (k + 1));
        let mag = Float::with_val(bits, term.abs_ref());
        if let Some(p) = &prev {
            // asymptotic series: stop before terms start growing
            if mag > *p {
                break;
            }
        }
        sum += &term;
        if mag < eps {
            break;
        }
        prev = Some(mag);
        fact_ratio *= Float::with_val(bits, (2 * j + 1) * (2 * j + 2)) / &two_pi_sq;
        w_pow *= &inv_w2;
    }
    sum
}

impl Precision {
    /// Same digit contract with `extra` bits of headroom, rounded up to
    /// whole digits.
    pub(crate) fn scaled_bits(self, extra: u32) -> Precision {
        let d = (extra as f64 / std::f64::consts::LOG2_10).ceil() as u32;
        Precision::new(self.digits() + d).expect("digits only grow")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p64() -> Precision {
        Precision::new(64).unwrap()
    }

    fn f(v: f64) -> BigReal {
        Float::with_val(256, v)
    }

    fn close(a: &BigReal, b: &BigReal, rel: f64, abs: f64) -> bool {
        let d = Float::with_val(a.prec(), a - b).abs().to_f64();
        d <= rel * b.to_f64().abs() + abs
    }

    #[test]
    fn log_gamma_classical_values() {
        let p = p64();
        assert!(log_gamma(&f(1.0), p).unwrap().is_zero() || log_gamma(&f(1.0), p).unwrap().to_f64().abs() < 1e-70);
        let ln_sqrt_pi = pi(p.bits()).sqrt().ln();
        assert!(close(&log_gamma(&f(0.5), p).unwrap(), &ln_sqrt_pi, 1e-60, 0.0));
    }

    #[test]
    fn log_gamma_matches_product_recurrence() {
        let p = p64();
        let bits = p.bits();
        let base = Float::with_val(bits, 0.25);
        let mut oracle = Float::with_val(bits, base.ln_gamma_ref());
        for k in 0..20 {
            oracle += Float::with_val(bits, Float::with_val(bits, 0.25) + k).ln();
        }
        let v = log_gamma(&f(20.25), p).unwrap();
        assert!(close(&v, &oracle, 1e-60, 0.0));
    }

    #[test]
    fn log_gamma_rejects_nonpositive() {
        assert!(log_gamma(&f(0.0), p64()).is_err());
        assert!(log_gamma(&f(-1.5), p64()).is_err());
    }

    #[test]
    fn barnes_g_integer_values() {
        let p = p64();
        for (z, expected) in [(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 2f64.ln()), (5.0, 12f64.ln())] {
            let v = log_barnes_g(&f(z), p).unwrap();
            assert!((v.to_f64() - expected).abs() < 1e-60, "z={z}: {v}");
        }
        assert!(log_barnes_g(&f(0.0), p).is_err());
    }

    #[test]
    fn barnes_g_against_reference_values() {
        // frozen from an independent 60-digit evaluation
        let p = p64();
        let cases = [
            ("0.5", "-0.505433054489695382797684989808344951721399101466619932789828"),
            ("0.3", "-1.02829563032320984278365352984307648965796438029125348958507"),
            ("7.7", "14.8581691635892609611307996651394836001168647817485767392846"),
            ("51", "3060.48425871808876633352939071353662483906498703900727949367"),
        ];
        for (z, s) in cases {
            let expected = Float::with_val(256, Float::parse(s).unwrap());
            let z = Float::with_val(256, Float::parse(z).unwrap());
            let v = log_barnes_g(&z, p).unwrap();
            assert!(close(&v, &expected, 1e-56, 1e-56), "z={z}: {v}");
        }
    }

    #[test]
    fn zeta_prime_regression() {
        let expected = Float::with_val(
            256,
            Float::parse("-0.165421143700450929213919660242780642764036380335201783666522").unwrap(),
        );
        let v = zeta_prime_minus_one(p64());
        assert!(close(&v, &expected, 1e-58, 0.0));
        // ln K is the same constant
        let k = constant_k(p64()).unwrap();
        assert!(close(&k, &expected, 1e-58, 0.0));
    }

    #[test]
    fn constant_k_matches_definition() {
        let p = p64();
        let bits = p.bits();
        let g_half = log_barnes_g(&f(0.5), p).unwrap().exp();
        let k = Float::with_val(bits, g_half.pow(Float::with_val(bits, 2) / 3u32))
            * Float::with_val(bits, pi(bits).pow(Float::with_val(bits, 6).recip()))
            * Float::with_val(bits, Float::with_val(bits, 2).pow(Float::with_val(bits, -1) / 36u32));
        let ln_k = constant_k(p).unwrap();
        assert!(ln_k.clone().exp() > 0);
        assert!(close(&ln_k.exp(), &k, 1e-58, 0.0));
    }

    #[test]
    fn asym_close_to_exact_at_fifty() {
        let p = p64();
        let asym = log_barnes_g_asym(&f(50.0), &f(0.0), p).unwrap();
        let exact = log_barnes_g(&f(51.0), p).unwrap();
        let rel = Float::with_val(256, &asym - &exact).abs() / exact.abs();
        assert!(rel.to_f64() <= 1e-3);
    }

    #[test]
    fn asym_exponent_difference_in_a() {
        let p = p64();
        let bits = p.bits();
        for (n, a) in [(10.0, 1.0), (37.0, 0.5), (5.0, 2.5)] {
            let d = log_barnes_g_asym(&f(n), &f(a), p).unwrap() - log_barnes_g_asym(&f(n), &f(0.0), p).unwrap();
            let n_ = Float::with_val(bits, n);
            let ln_n = n_.clone().ln();
            let ln_2pi = (pi(bits) * 2u32).ln();
            // ((n+a)² - n²)/2 ln n - a n + (a/2) ln 2π
            let expected = Float::with_val(bits, (2.0 * a * n + a * a) / 2.0) * ln_n - a * n
                + ln_2pi * Float::with_val(bits, a / 2.0);
            assert!(close(&d, &expected, 1e-55, 1e-55), "n={n}, a={a}");
        }
    }

    #[test]
    fn asym_diagonal_targets_agree_in_the_limit() {
        let p = p64();
        let mut prev = f64::INFINITY;
        for n in [10.0, 40.0, 160.0] {
            let d = log_barnes_g_asym(&f(n), &f(0.0), p).unwrap() - log_barnes_g_asym(&f(n - 1.0), &f(1.0), p).unwrap();
            let rel = d.abs().to_f64() / log_barnes_g(&f(n + 1.0), p).unwrap().to_f64();
            assert!(rel < prev);
            prev = rel;
        }
    }

    #[test]
    fn asym_error_order() {
        // error halves per doubling for a != 0, quarters for a = 0
        let p = p64();
        let err = |n: f64, a: f64| {
            let exact = log_barnes_g(&f(n + a + 1.0), p).unwrap();
            (log_barnes_g_asym(&f(n), &f(a), p).unwrap() - exact).abs().to_f64()
        };
        for (a, ratio) in [(0.0, 4.0), (0.5, 2.0), (1.0, 2.0)] {
            let r = err(50.0, a) / err(100.0, a);
            assert!((r / ratio - 1.0).abs() < 0.01, "a={a}: {r}");
        }
    }
}
