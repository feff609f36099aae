//! Large-`n` form of `ln D_n[w_{α,β} h]`.
//!
//! With `f = ln h = c_0/2 + Σ_{k≥1} c_k T_k` (see [`ChebExpansion`]),
//!
//! ```text
//! ln D_n[w h] ≈ ln D_n^{asym}[w] + (n + (α+β)/2) c_0/2 + (1/8) Σ_k k c_k²
//! ```
//!
//! The last sum is the principal-value double integral
//! `(1/4π²) ∫ f(x)/√(1-x²) P∫ √(1-y²) f'(y)/(x-y) dy dx`.
//! The finite Hilbert transform maps `√(1-y²) U_{k-1}(y)` to `-π T_k(x)`
//! under the kernel `1/(y-x)`; with that kernel the double integral is
//! `-(1/8) Σ k c_k²`. The determinant ratio is bounded below by its
//! Jensen mean, which forces the positive sign, so the kernel is taken as
//! `1/(x-y)`. [`hilbert_transform_cheb`] still returns the literal `1/(y-x)`
//! transform.
//!
//! The equilibrium density carries mass `n`, not `n + (α+β)/2`; the
//! difference sits at the hard edges and contributes
//! `-(α f(1) + β f(-1))/2` to the limit, kept as
//! [`ConstantParts::edge_part`]. Without it the prediction is off by that
//! amount whenever `α` or `β` is nonzero.

use rug::Float;

use crate::dsl::PerturbationFn;
use crate::error::Result;
use crate::fluid::{stieltjes_semicircle, support_endpoints};
use crate::jacobi::{log_leading, log_pure_constant, JacobiParams};
use crate::precision::{pi, BigReal, Precision};
use crate::quadrature::{cheb_expand, ln_h_expansion, ChebExpansion};

/// `P∫ √(1-y²) f'(y)/(y-x) dy` as a Chebyshev series in `x`.
///
/// Since `f' = Σ k c_k U_{k-1}`, coefficient `k` of the result is
/// `-π k c_k`, and the constant term is 0.
pub fn hilbert_transform_cheb(ce: &ChebExpansion) -> ChebExpansion {
    let bits = ce.precision_bits();
    let pi = pi(bits);
    let coeffs = ce
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| -Float::with_val(bits, c * &pi) * k as u32)
        .collect();
    ChebExpansion::new(coeffs)
}

/// `(1/8) Σ_{k≥1} k c_k²`.
pub fn pv_double_integral(ce: &ChebExpansion) -> BigReal {
    let bits = ce.precision_bits();
    let mut acc = Float::with_val(bits, 0);
    for (k, c) in ce.coeffs.iter().enumerate().skip(1) {
        acc += Float::with_val(bits, c.square_ref()) * k as u32;
    }
    acc / 8u32
}

/// The same double integral by Gauss–Chebyshev quadrature of
/// `f(x) H(x) / √(1-x²)`, `H` from [`hilbert_transform_cheb`], with the
/// sign flipped to the `1/(x-y)` kernel. Exact once `nodes > degree`.
pub fn pv_double_integral_quadrature(ce: &ChebExpansion, nodes: usize) -> BigReal {
    let bits = ce.precision_bits();
    let hilbert = hilbert_transform_cheb(ce);
    let pi = pi(bits);
    let mut acc = Float::with_val(bits, 0);
    for j in 0..nodes {
        let theta = Float::with_val(bits, &pi * (2 * j + 1) as u32) / (2 * nodes) as u32;
        let x = theta.cos();
        acc += ce.eval(&x) * hilbert.eval(&x);
    }
    // (1/4π²)(π/nodes) Σ, negated
    -acc / (pi * 4u32 * nodes as u32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeanForm {
    /// Support `[-1, 1]` with the arcsine density.
    Limit,
    /// Support `[a_n, b_n]` with the equilibrium density.
    Finite,
}

/// `∫ ln h · σ`.
///
/// `Limit`: `(n + (α+β)/2) c_0/2`, where `c_0/2` is the mean of `ln h`
/// under `dx/(π√(1-x²))`.
///
/// `Finite`: with `x = R + r t` on the consistent support,
/// `(N r²/π) ∫ f(x) √(1-t²)/(1-x²) dt`. Splitting `1/(1-x²)` into
/// `1/(1-x)` and `1/(1+x)`, the parts `(f(x) - f(±1))/(1∓x)` are
/// polynomials in `t` when `f` is, and are integrated by Gauss–Chebyshev
/// of the second kind; the remainders are Stieltjes transforms of the
/// semicircle, in closed form.
pub fn mean_term(ce: &ChebExpansion, n: usize, jp: &JacobiParams, form: MeanForm, p: Precision) -> Result<BigReal> {
    let bits = ce.precision_bits().max(p.bits());
    let half_s = Float::with_val(bits, jp.alpha_big(bits) + jp.beta_big(bits)) / 2u32;
    match form {
        MeanForm::Limit => Ok(ce.mean() * (half_s + n as u32)),
        MeanForm::Finite => {
            let si = support_endpoints(n, jp, p)?;
            let (big_r, r) = (si.center(), si.half_width());
            let pi = pi(bits);
            let one = Float::with_val(bits, 1);
            let f_hi = ce.eval(&one);
            let f_lo = ce.eval(&-one);
            let k = ce.degree() + 2;
            let mut upper = Float::with_val(bits, 0);
            let mut lower = Float::with_val(bits, 0);
            for j in 1..=k {
                let theta = Float::with_val(bits, &pi * j as u32) / (k + 1) as u32;
                let (sin, cos) = theta.sin_cos(Float::new(bits));
                let weight = sin.square();
                let x = Float::with_val(bits, &r * &cos) + &big_r;
                let fx = ce.eval(&x);
                let om = Float::with_val(bits, 1u32 - &x);
                let op = Float::with_val(bits, 1u32 + &x);
                if !om.is_zero() {
                    upper += Float::with_val(bits, &fx - &f_hi) / om * &weight;
                }
                if !op.is_zero() {
                    lower += Float::with_val(bits, &fx - &f_lo) / op * &weight;
                }
            }
            let gc = Float::with_val(bits, &pi / (k + 1) as u32);
            let c1 = Float::with_val(bits, 1u32 - &big_r) / &r;
            let c2 = Float::with_val(bits, 1u32 + &big_r) / &r;
            let stieltjes = |c: &BigReal, fv: &BigReal| Float::with_val(bits, stieltjes_semicircle(c) * fv) * &pi / &r;
            let integral = (upper + lower) * gc + stieltjes(&c1, &f_hi) + stieltjes(&c2, &f_lo);
            Ok(si.effective_n() * Float::with_val(bits, r.square_ref()) / pi * integral / 2u32)
        }
    }
}

/// `-(α f(1) + β f(-1))/2`.
pub fn edge_term(ce: &ChebExpansion, jp: &JacobiParams) -> BigReal {
    let bits = ce.precision_bits();
    let one = Float::with_val(bits, 1);
    let upper = ce.eval(&one) * jp.alpha_big(bits);
    let lower = ce.eval(&-one) * jp.beta_big(bits);
    -(upper + lower) / 2u32
}

/// Both terms of the large-`n` expansion of `ln⟨Π h(x_j)⟩`.
#[derive(Clone, Debug)]
pub struct LinStatTerms {
    pub n: usize,
    pub mean_term: BigReal,
    /// `(1/8) Σ k c_k²`; in the finite form the `c_k` are those of
    /// `t ↦ f(R_n + r_n t)`.
    pub variance_term: BigReal,
    pub form: MeanForm,
}

impl LinStatTerms {
    pub fn total(&self) -> BigReal {
        Float::with_val(self.mean_term.prec(), &self.mean_term + &self.variance_term)
    }
}

pub fn linstat_terms(
    ce: &ChebExpansion,
    n: usize,
    jp: &JacobiParams,
    form: MeanForm,
    p: Precision,
) -> Result<LinStatTerms> {
    let mean = mean_term(ce, n, jp, form, p)?;
    let variance_term = match form {
        MeanForm::Limit => pv_double_integral(ce),
        MeanForm::Finite => {
            let si = support_endpoints(n, jp, p)?;
            let (big_r, r) = (si.center(), si.half_width());
            let bits = ce.precision_bits();
            let shifted = cheb_expand(
                |t| Ok(ce.eval(&(Float::with_val(bits, &r * t) + &big_r))),
                ce.degree().max(1),
                Precision::from_bits(bits),
            )?;
            pv_double_integral(&shifted)
        }
    };
    Ok(LinStatTerms {
        n,
        mean_term: mean,
        variance_term,
        form,
    })
}

/// Pieces of the `n`-independent constant, as logarithms.
#[derive(Clone, Debug)]
pub struct ConstantParts {
    /// `(1/8) Σ k c_k²`.
    pub pv_part: BigReal,
    /// `((α+β)/2) c_0/2`.
    pub boundary_part: BigReal,
    /// The Barnes-G constant of the pure weight.
    pub pure_constant_part: BigReal,
    /// `-(α f(1) + β f(-1))/2`.
    pub edge_part: BigReal,
}

impl ConstantParts {
    pub fn total(&self) -> BigReal {
        self.total_without_edge() + &self.edge_part
    }

    pub fn total_without_edge(&self) -> BigReal {
        Float::with_val(self.pv_part.prec(), &self.pv_part + &self.boundary_part) + &self.pure_constant_part
    }
}

#[derive(Clone, Debug)]
pub struct AsymptoticPrediction {
    pub n: usize,
    /// `ln(2^{-n(n+α+β)} n^{(α²+β²)/2-1/4} (2π)^n)`.
    pub log_leading: BigReal,
    /// `n c_0/2 = (n/π) ∫ ln h/√(1-x²) dx`.
    pub log_mean: BigReal,
    pub log_c: ConstantParts,
    /// Degree of the Chebyshev expansion of `ln h` that was used.
    pub cheb_degree: usize,
    pub precision_used: Precision,
}

impl AsymptoticPrediction {
    /// `ln` of the predicted `D_n[w h]`.
    pub fn total(&self) -> BigReal {
        Float::with_val(self.log_leading.prec(), &self.log_leading + &self.log_mean) + self.log_c.total()
    }

    /// [`total`](Self::total) without the edge term.
    pub fn total_without_edge(&self) -> BigReal {
        Float::with_val(self.log_leading.prec(), &self.log_leading + &self.log_mean) + self.log_c.total_without_edge()
    }

    /// The part attributable to `h`:
    /// `log_mean + pv_part + boundary_part + edge_part`.
    pub fn perturbation(&self) -> BigReal {
        let c = &self.log_c;
        Float::with_val(self.log_mean.prec(), &self.log_mean + &c.pv_part) + &c.boundary_part + &c.edge_part
    }
}

/// The asymptotic prediction, with `ln h` expanded automatically.
pub fn assemble_prediction(
    n: usize,
    jp: &JacobiParams,
    h: &PerturbationFn,
    p: Precision,
) -> Result<AsymptoticPrediction> {
    assemble_prediction_with(n, jp, h, None, p)
}

/// As [`assemble_prediction`], optionally with a fixed Chebyshev degree.
pub fn assemble_prediction_with(
    n: usize,
    jp: &JacobiParams,
    h: &PerturbationFn,
    cheb_m: Option<usize>,
    p: Precision,
) -> Result<AsymptoticPrediction> {
    let ce = ln_h_expansion(h, cheb_m, p)?;
    prediction_from_expansion(n, jp, &ce, p)
}

pub fn prediction_from_expansion(
    n: usize,
    jp: &JacobiParams,
    ce: &ChebExpansion,
    p: Precision,
) -> Result<AsymptoticPrediction> {
    if n == 0 {
        return Err(crate::error::Error::domain("assemble_prediction", "n must be >= 1"));
    }
    jp.require_asymptotic()?;
    let bits = p.bits();
    let mean = ce.mean();
    let half_s = Float::with_val(bits, jp.alpha_big(bits) + jp.beta_big(bits)) / 2u32;
    let edge_part = edge_term(ce, jp);
    Ok(AsymptoticPrediction {
        n,
        log_leading: Float::with_val(bits, log_leading(n, jp, bits + 16)),
        log_mean: Float::with_val(bits, &mean * n as u32),
        log_c: ConstantParts {
            pv_part: Float::with_val(bits, pv_double_integral(ce)),
            boundary_part: Float::with_val(bits, half_s * &mean),
            pure_constant_part: log_pure_constant(jp, p)?,
            edge_part: Float::with_val(bits, edge_part),
        },
        cheb_degree: ce.degree(),
        precision_used: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::Family;
    use crate::jacobi::jacobi_logdet_asym;
    use rug::Rational;

    fn p40() -> Precision {
        Precision::new(40).unwrap()
    }

    fn jp(a: f64, b: f64) -> JacobiParams {
        JacobiParams::from_f64(a, b).unwrap()
    }

    fn exp_linear(t: i64) -> PerturbationFn {
        Family::ExpLinear(Rational::from(t)).build()
    }

    /// `P∫_{-1}^{1} g(y)/(y-x) dy` for `g(y) = √(1-y²) f'(y)`, by subtracting
    /// `g(x)` and using `y = cos θ` with the midpoint rule.
    fn pv_oracle(fprime: impl Fn(&BigReal) -> BigReal, x: f64, m: u32, bits: u32) -> f64 {
        let x = Float::with_val(bits, x);
        let g = |y: &BigReal| {
            let s = (Float::with_val(bits, 1u32) - Float::with_val(bits, y.square_ref())).sqrt();
            s * fprime(y)
        };
        let gx = g(&x);
        let pi = pi(bits);
        let mut acc = Float::with_val(bits, 0);
        for j in 0..m {
            let th = Float::with_val(bits, &pi * (2 * j + 1)) / (2 * m);
            let (sin, cos) = th.sin_cos(Float::new(bits));
            acc += Float::with_val(bits, g(&cos) - &gx) / Float::with_val(bits, &cos - &x) * sin;
        }
        let smooth = acc * &pi / m;
        let log = (Float::with_val(bits, 1u32 - &x) / Float::with_val(bits, 1u32 + &x)).ln();
        (smooth + gx * log).to_f64()
    }

    #[test]
    fn hilbert_transform_of_linear_and_t2() {
        let p = p40();
        let bits = p.bits();
        let t = 0.75;
        let ce = cheb_expand(|y| Ok(Float::with_val(bits, y * t)), 8, p).unwrap();
        let hilbert = hilbert_transform_cheb(&ce);
        for x in [-0.6, 0.1, 0.45] {
            let v = hilbert.eval(&Float::with_val(bits, x)).to_f64();
            assert!((v + std::f64::consts::PI * t * x).abs() < 1e-14);
            let oracle = pv_oracle(|_| Float::with_val(bits, t), x, 4000, bits);
            assert!((v - oracle).abs() < 1e-6, "x={x}: {v} vs {oracle}");
        }
        // f = T_2: only the T_2 coefficient survives
        let ce = cheb_expand(|y| Ok(Float::with_val(bits, y.square_ref()) * 2u32 - 1u32), 8, p).unwrap();
        let hilbert = hilbert_transform_cheb(&ce);
        for (k, c) in hilbert.coeffs.iter().enumerate() {
            let expected = if k == 2 { -2.0 * std::f64::consts::PI } else { 0.0 };
            assert!((c.to_f64() - expected).abs() < 1e-14, "k={k}");
        }
        for x in [-0.8, -0.3, 0.0, 0.2, 0.7] {
            let v = hilbert.eval(&Float::with_val(bits, x)).to_f64();
            let oracle = pv_oracle(|y| Float::with_val(bits, y * 4u32), x, 4000, bits);
            assert!((v - oracle).abs() < 1e-6, "x={x}");
        }
        let constant = cheb_expand(|_| Ok(Float::with_val(bits, 3)), 8, p).unwrap();
        assert!(hilbert_transform_cheb(&constant)
            .coeffs
            .iter()
            .all(|c| c.to_f64().abs() < 1e-35));
    }

    #[test]
    fn pv_closed_form_values() {
        let p = p40();
        let ce = ln_h_expansion(&exp_linear(1), Some(16), p).unwrap();
        assert!((pv_double_integral(&ce).to_f64() - 0.125).abs() < 1e-35);
        let ce = ln_h_expansion(&Family::ExpT2(Rational::from(1)).build(), Some(16), p).unwrap();
        assert!((pv_double_integral(&ce).to_f64() - 0.25).abs() < 1e-35);
        let ce = ln_h_expansion(&Family::One.build(), Some(16), p).unwrap();
        assert!(pv_double_integral(&ce).is_zero());
    }

    #[test]
    fn pv_quadrature_path_agrees() {
        let p = p40();
        for h in [
            exp_linear(2),
            Family::OnePlusQuadratic(Rational::from((1, 2))).build(),
            Family::ExpT2(Rational::from((1, 3))).build(),
        ] {
            let ce = ln_h_expansion(&h, None, p).unwrap();
            let closed = pv_double_integral(&ce);
            let quad = pv_double_integral_quadrature(&ce, ce.degree() + 1);
            let d = Float::with_val(p.bits(), closed - quad).abs().to_f64();
            assert!(d < 1e-28, "{}: {d:e}", h.source());
        }
    }

    #[test]
    fn mean_term_forms() {
        let p = p40();
        let params = jp(0.5, 1.0);
        let odd = ln_h_expansion(&exp_linear(1), None, p).unwrap();
        assert!(mean_term(&odd, 10, &params, MeanForm::Limit, p).unwrap().to_f64().abs() < 1e-35);

        // h = 3: limit form gives N ln 3, finite form n ln 3
        let c = ln_h_expansion(&Family::Constant(Rational::from(3)).build(), Some(8), p).unwrap();
        let lim = mean_term(&c, 7, &params, MeanForm::Limit, p).unwrap().to_f64();
        let fin = mean_term(&c, 7, &params, MeanForm::Finite, p).unwrap().to_f64();
        assert!((lim - 7.75 * 3f64.ln()).abs() < 1e-12);
        assert!((fin - 7.0 * 3f64.ln()).abs() < 1e-12);

        let q = ln_h_expansion(&Family::OnePlusQuadratic(Rational::from((1, 2))).build(), None, p).unwrap();
        let legendre = JacobiParams::legendre();
        let lim = mean_term(&q, 50, &legendre, MeanForm::Limit, p).unwrap();
        let fin = mean_term(&q, 50, &legendre, MeanForm::Finite, p).unwrap();
        assert!(Float::with_val(p.bits(), lim - fin).abs().to_f64() < 1e-2);

        // with α, β > 0 the forms differ by the edge term
        let lim = mean_term(&q, 50, &params, MeanForm::Limit, p).unwrap().to_f64();
        let fin = mean_term(&q, 50, &params, MeanForm::Finite, p).unwrap().to_f64();
        let edge = edge_term(&q, &params).to_f64();
        assert!((edge + 0.75 * 1.5f64.ln()).abs() < 1e-14);
        assert!((lim + edge - fin).abs() < 1e-2, "{lim} {fin}");
    }

    #[test]
    fn finite_mean_against_direct_quadrature() {
        // ∫ f σ by the midpoint rule in θ, x = R + r cos θ
        let p = p40();
        let bits = p.bits();
        let params = jp(1.5, 0.5);
        let n = 4;
        let ce = ln_h_expansion(&exp_linear(1), None, p).unwrap();
        let fin = mean_term(&ce, n, &params, MeanForm::Finite, p).unwrap().to_f64();
        let si = support_endpoints(n, &params, p).unwrap();
        let (c, r) = (si.center(), si.half_width());
        let m = 4000u32;
        let pi = pi(bits);
        let mut acc = Float::with_val(bits, 0);
        for j in 0..m {
            let th = Float::with_val(bits, &pi * (2 * j + 1)) / (2 * m);
            let (sin, cos) = th.sin_cos(Float::new(bits));
            let x = Float::with_val(bits, &r * &cos) + &c;
            let sigma = crate::fluid::equilibrium_density(&x, &si).unwrap();
            acc += sigma * Float::with_val(bits, &x) * sin;
        }
        let direct = (acc * &pi * &r / m).to_f64();
        assert!((fin - direct).abs() < 1e-9, "{fin} vs {direct}");
    }

    #[test]
    fn scaling_covariance() {
        let p = p40();
        let params = jp(0.5, 0.0);
        let base = ln_h_expansion(&parse("exp(x) * (1 + x^2/4)"), None, p).unwrap();
        let scaled = ln_h_expansion(&parse("2.5 * exp(x) * (1 + x^2/4)"), None, p).unwrap();
        let n = 12;
        let d_mean = mean_term(&scaled, n, &params, MeanForm::Limit, p).unwrap()
            - mean_term(&base, n, &params, MeanForm::Limit, p).unwrap();
        assert!((d_mean.to_f64() - 12.25 * 2.5f64.ln()).abs() < 1e-12);
        let d_pv = pv_double_integral(&scaled) - pv_double_integral(&base);
        assert!(d_pv.to_f64().abs() < 1e-30);
    }

    fn parse(s: &str) -> PerturbationFn {
        crate::dsl::parse_h(s).unwrap()
    }

    #[test]
    fn prediction_reduces_to_pure_weight() {
        let p = p40();
        for (a, b) in [(0.0, 0.0), (0.5, 1.5)] {
            let params = jp(a, b);
            let pred = assemble_prediction(30, &params, &Family::One.build(), p).unwrap();
            let c = &pred.log_c;
            assert!(
                pred.log_mean.is_zero() && c.pv_part.is_zero() && c.boundary_part.is_zero() && c.edge_part.is_zero()
            );
            let asym = jacobi_logdet_asym(30, &params, p).unwrap();
            assert!(Float::with_val(p.bits(), pred.total() - asym).abs().to_f64() < 1e-35);
        }
        assert!(assemble_prediction(5, &jp(-0.9, 0.0), &Family::One.build(), p).is_err());
    }

    #[test]
    fn finite_terms_approach_limit_terms() {
        let p = p40();
        let params = jp(1.0, 2.0);
        let ce = ln_h_expansion(&exp_linear(1), None, p).unwrap();
        let mut prev = f64::INFINITY;
        for n in [10usize, 20, 40, 80] {
            let lim = linstat_terms(&ce, n, &params, MeanForm::Limit, p).unwrap();
            let fin = linstat_terms(&ce, n, &params, MeanForm::Finite, p).unwrap();
            let gap = Float::with_val(p.bits(), lim.total() + edge_term(&ce, &params) - fin.total())
                .abs()
                .to_f64();
            assert!(gap < prev, "n={n}: {gap}");
            prev = gap;
        }
        assert!(prev < 1e-2);
    }
}
