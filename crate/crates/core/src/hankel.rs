//! Direct computation of `ln D_n[w]` from the moments of `w`.
//!
//! Hankel matrices are badly conditioned (roughly `2^{4n}` for weights on
//! `[-1, 1]`), so moments are generated and factorized with
//! [`extra_bits`]`(n)` bits on top of the requested precision.

use std::fmt;

use rug::{Float, Integer, Rational};

use crate::dsl::PerturbationFn;
use crate::error::{Error, Result};
use crate::jacobi::{jacobi_alpha_n, jacobi_beta_n, jacobi_moments, JacobiParams};
use crate::precision::{ensure_finite, BigReal, Precision};
use crate::quadrature::{gauss_jacobi_rule, moments_from_rule};

/// Bits added for a size-`n` factorization.
pub fn extra_bits(n: usize) -> u32 {
    6 * n as u32 + 64
}

/// Precision at which the moments for a size-`n` determinant are generated.
pub fn moment_precision(n: usize, p: Precision) -> Precision {
    let digits = (extra_bits(n) as f64 * std::f64::consts::LOG10_2).ceil() as u32;
    Precision::new(p.digits() + digits).expect("increasing a valid precision")
}

/// Gauss–Jacobi order used for perturbed moments when none is given.
pub fn default_quad_order(n: usize, p: Precision) -> usize {
    n + moment_precision(n, p).digits() as usize + 16
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MomentSource {
    Pure,
    /// Perturbed by `h`, recorded by its source text and the quadrature order.
    Perturbed {
        h: String,
        quad_order: usize,
    },
    /// Supplied by the caller.
    External,
}

/// `μ_0, μ_1, …` of a weight on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct MomentSequence {
    pub mu: Vec<BigReal>,
    pub source: MomentSource,
}

impl MomentSequence {
    pub fn new(mu: Vec<BigReal>, source: MomentSource) -> Result<Self> {
        match mu.first() {
            Some(m0) if *m0 > 0 => Ok(MomentSequence { mu, source }),
            _ => Err(Error::InvalidParams("moment sequence needs mu_0 > 0".into())),
        }
    }

    /// `μ_0..μ_{2n-2}` of the pure weight at [`moment_precision`]`(n, p)`.
    pub fn pure(n: usize, jp: &JacobiParams, p: Precision) -> Result<Self> {
        let count = moment_count(n)?;
        Self::new(jacobi_moments(count, jp, moment_precision(n, p))?, MomentSource::Pure)
    }

    /// `μ_0..μ_{2n-2}` of `w_{α,β} h` by Gauss–Jacobi quadrature of order
    /// `quad_order` (default [`default_quad_order`]).
    pub fn perturbed(
        n: usize,
        jp: &JacobiParams,
        h: &PerturbationFn,
        quad_order: Option<usize>,
        p: Precision,
    ) -> Result<Self> {
        let count = moment_count(n)?;
        let m = quad_order.unwrap_or_else(|| default_quad_order(n, p));
        let rule = gauss_jacobi_rule(m, jp, moment_precision(n, p))?;
        let mu = moments_from_rule(count, &rule, h)?;
        Self::new(
            mu,
            MomentSource::Perturbed {
                h: h.source().to_string(),
                quad_order: m,
            },
        )
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// True when `μ_{2n-2}` is present.
    pub fn covers(&self, n: usize) -> bool {
        n >= 1 && self.mu.len() > 2 * n - 2
    }

    fn bits(&self) -> u32 {
        self.mu.iter().map(|m| m.prec()).min().unwrap_or(64)
    }
}

fn moment_count(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::domain("hankel", "n must be >= 1"));
    }
    Ok(2 * n - 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HankelMethod {
    Ldl,
    Recurrence,
    Rational,
}

impl fmt::Display for HankelMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HankelMethod::Ldl => "ldl",
            HankelMethod::Recurrence => "recurrence",
            HankelMethod::Rational => "rational",
        })
    }
}

#[derive(Clone, Debug)]
pub struct HankelResult {
    pub n: usize,
    pub log_det: BigReal,
    pub method: HankelMethod,
    /// The precision the result is reported at.
    pub precision_used: Precision,
    /// Bits carried through the factorization.
    pub working_bits: u32,
    /// Smallest pivot `d_j = h_j`.
    pub min_pivot: BigReal,
    /// Estimated absolute error of `log_det`,
    /// `2^{-b} Σ_j μ_{2j}/d_j + 2^{-w} n² + 2^{1-r} |ln D_n|`, with `b` the
    /// moment precision, `w` the working precision and `r` the reported
    /// precision. Quadrature truncation in the moments is not included.
    pub error_bound: BigReal,
}

fn check_request(ms: &MomentSequence, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("hankel", "n must be >= 1"));
    }
    if !ms.covers(n) {
        return Err(Error::domain(
            "hankel",
            format!("{} moments do not reach index {}", ms.len(), 2 * n - 2),
        ));
    }
    Ok(())
}

fn finish(
    ms: &MomentSequence,
    n: usize,
    pivots: &[BigReal],
    method: HankelMethod,
    bits: u32,
    p: Precision,
) -> Result<HankelResult> {
    let mut log_det = Float::with_val(bits, 0);
    let mut growth = Float::with_val(bits, 0);
    for (j, d) in pivots.iter().enumerate() {
        log_det += Float::with_val(bits, d.ln_ref());
        growth += Float::with_val(bits, &ms.mu[2 * j] / d).abs();
    }
    let min_pivot = pivots
        .iter()
        .min_by(|x, y| x.partial_cmp(y).expect("finite pivots"))
        .expect("n >= 1")
        .clone();
    let eps_in = Float::with_val(bits, Float::with_val(bits, 1) >> ms.bits());
    let eps_work = Float::with_val(bits, Float::with_val(bits, 1) >> bits) * (n * n) as u32;
    let rounding = Float::with_val(bits, log_det.abs_ref()) >> (p.bits() - 1);
    let error_bound = Float::with_val(64, growth * eps_in + eps_work + rounding);
    Ok(HankelResult {
        n,
        log_det: ensure_finite(Float::with_val(p.bits(), log_det), "hankel")?,
        method,
        precision_used: p,
        working_bits: bits,
        min_pivot: Float::with_val(p.bits(), min_pivot),
        error_bound,
    })
}

/// A pivot is accepted when it exceeds `2^{16-w}` times the diagonal entry.
fn pivot_ok(d: &BigReal, diag: &BigReal, bits: u32) -> bool {
    if d.is_sign_negative() || d.is_zero() || !d.is_finite() {
        return false;
    }
    let floor = Float::with_val(bits, diag.abs_ref()) >> (bits - 16);
    *d > floor
}

/// `ln D_n` by `LDLᵀ` of the Hankel matrix `(μ_{j+k})`; `ln D_n = Σ ln d_j`.
pub fn hankel_logdet_ldl(ms: &MomentSequence, n: usize, p: Precision) -> Result<HankelResult> {
    check_request(ms, n)?;
    let bits = p.bits() + extra_bits(n);
    let a = |i: usize, j: usize| Float::with_val(bits, &ms.mu[i + j]);
    let mut l = vec![vec![Float::with_val(bits, 0); n]; n];
    let mut d: Vec<BigReal> = Vec::with_capacity(n);
    for j in 0..n {
        // v_k = L_jk d_k
        let v: Vec<BigReal> = (0..j).map(|k| Float::with_val(bits, &l[j][k] * &d[k])).collect();
        let mut dj = a(j, j);
        for k in 0..j {
            dj -= Float::with_val(bits, &l[j][k] * &v[k]);
        }
        if !pivot_ok(&dj, &ms.mu[2 * j], bits) {
            return Err(Error::NotPositiveDefinite {
                method: "ldl",
                index: j,
            });
        }
        for (i, row) in l.iter_mut().enumerate().skip(j + 1) {
            let mut s = a(i, j);
            for (lik, vk) in row.iter().zip(&v) {
                s -= Float::with_val(bits, lik * vk);
            }
            row[j] = s / &dj;
        }
        d.push(dj);
    }
    finish(ms, n, &d, HankelMethod::Ldl, bits, p)
}

/// Coefficients of the monic Jacobi polynomials `π_0..π_{count-1}` in the
/// monomial basis, exactly.
pub(crate) fn monic_jacobi_coefficients(count: usize, jp: &JacobiParams) -> Result<Vec<Vec<Rational>>> {
    let mut polys: Vec<Vec<Rational>> = Vec::with_capacity(count);
    for l in 0..count {
        let next = match l {
            0 => vec![Rational::from(1)],
            _ => {
                let prev = &polys[l - 1];
                let a = jacobi_alpha_n(l - 1, jp);
                let mut q = vec![Rational::new(); l + 1];
                for (j, c) in prev.iter().enumerate() {
                    q[j + 1] += c;
                    q[j] -= Rational::from(&a * c);
                }
                if l >= 2 {
                    let b = jacobi_beta_n(l - 1, jp)?;
                    for (j, c) in polys[l - 2].iter().enumerate() {
                        q[j] -= Rational::from(&b * c);
                    }
                }
                q
            }
        };
        polys.push(next);
    }
    Ok(polys)
}

/// `ln D_n` by the modified Chebyshev algorithm.
///
/// Modified moments `ν_l = ∫ π_l w` against the monic pure-Jacobi
/// polynomials `π_l` (same `α, β`) are formed from the ordinary moments,
/// then the mixed moments `σ_{k,l} = ∫ p_k π_l w` are advanced by
///
/// ```text
/// σ_{k,l} = σ_{k-1,l+1} - (α_{k-1} - a_l) σ_{k-1,l} - β_{k-1} σ_{k-2,l} + b_l σ_{k-1,l-1}
/// ```
///
/// where `a_l, b_l` are the Jacobi coefficients and `α_k, β_k` those of `w`.
/// The norms are `h_k = σ_{k,k}`.
pub fn hankel_logdet_recurrence(
    ms: &MomentSequence,
    n: usize,
    jp: &JacobiParams,
    p: Precision,
) -> Result<HankelResult> {
    check_request(ms, n)?;
    let bits = p.bits() + extra_bits(n);
    let top = 2 * n - 1; // ν_0..ν_{2n-2}
    let coeffs = monic_jacobi_coefficients(top, jp)?;
    let nu: Vec<BigReal> = coeffs
        .iter()
        .map(|c| {
            let mut acc = Float::with_val(bits, 0);
            for (cj, mj) in c.iter().zip(&ms.mu) {
                acc += Float::with_val(bits, cj) * mj;
            }
            acc
        })
        .collect();
    let aux_a: Vec<BigReal> = (0..top)
        .map(|l| Float::with_val(bits, &jacobi_alpha_n(l, jp)))
        .collect();
    let aux_b: Vec<BigReal> = (0..top)
        .map(|l| match l {
            0 => Ok(Float::with_val(bits, 0)),
            _ => Ok(Float::with_val(bits, &jacobi_beta_n(l, jp)?)),
        })
        .collect::<Result<_>>()?;

    let mut norms = Vec::with_capacity(n);
    if !pivot_ok(&nu[0], &ms.mu[0], bits) {
        return Err(Error::NotPositiveDefinite {
            method: "recurrence",
            index: 0,
        });
    }
    norms.push(nu[0].clone());
    // rows σ_{k-1,·} and σ_{k-2,·}, indexed by l
    let mut prev2 = vec![Float::with_val(bits, 0); top];
    let mut prev = nu;
    let mut alpha = Float::with_val(
        bits,
        &aux_a[0] + Float::with_val(bits, &prev[1.min(top - 1)] / &prev[0]),
    );
    let mut beta = Float::with_val(bits, 0);
    for k in 1..n {
        let mut cur = vec![Float::with_val(bits, 0); top];
        for l in k..top - k {
            let mut s = Float::with_val(bits, &prev[l + 1]);
            s -= Float::with_val(bits, &alpha - &aux_a[l]) * &prev[l];
            s -= Float::with_val(bits, &beta * &prev2[l]);
            s += Float::with_val(bits, &aux_b[l] * &prev[l - 1]);
            cur[l] = s;
        }
        let hk = cur[k].clone();
        if !pivot_ok(&hk, &ms.mu[2 * k], bits) {
            return Err(Error::NotPositiveDefinite {
                method: "recurrence",
                index: k,
            });
        }
        if k + 1 < n {
            alpha = Float::with_val(bits, &aux_a[k] + Float::with_val(bits, &cur[k + 1] / &hk))
                - Float::with_val(bits, &prev[k] / &prev[k - 1]);
        }
        beta = Float::with_val(bits, &hk / &prev[k - 1]);
        norms.push(hk);
        prev2 = std::mem::replace(&mut prev, cur);
    }
    finish(ms, n, &norms, HankelMethod::Recurrence, bits, p)
}

/// `ln D_n[w_{α,β} h]` from quadrature moments, by the chosen method.
pub fn perturbed_logdet(
    n: usize,
    jp: &JacobiParams,
    h: &PerturbationFn,
    method: HankelMethod,
    quad_order: Option<usize>,
    p: Precision,
) -> Result<HankelResult> {
    let ms = MomentSequence::perturbed(n, jp, h, quad_order, p)?;
    match method {
        HankelMethod::Ldl => hankel_logdet_ldl(&ms, n, p),
        HankelMethod::Recurrence => hankel_logdet_recurrence(&ms, n, jp, p),
        HankelMethod::Rational => rational::logdet(n, jp, h, p),
    }
}

/// Gauss–Jacobi order used by [`heine_average_small_n`].
pub const DEFAULT_HEINE_ORDER: usize = 48;

/// `⟨Π_l h(x_l)⟩` over the `n`-point Jacobi ensemble, `n ≤ 3`.
///
/// Both `n`-fold integrals `∫ Ψ Π_{j<k}(x_k-x_j)² Π w(x_l) dx` (with
/// `Ψ = Π h(x_l)` and `Ψ = 1`) are evaluated by tensor-product Gauss–Jacobi
/// quadrature, and their ratio returned.
pub fn heine_average_small_n(n: usize, jp: &JacobiParams, h: &PerturbationFn, p: Precision) -> Result<BigReal> {
    heine_average(n, jp, h, DEFAULT_HEINE_ORDER, p)
}

pub fn heine_average(n: usize, jp: &JacobiParams, h: &PerturbationFn, order: usize, p: Precision) -> Result<BigReal> {
    if !(1..=3).contains(&n) {
        return Err(Error::domain("heine_average", "n must be 1, 2 or 3"));
    }
    let wp = p.scaled_bits(16);
    let bits = wp.bits();
    let rule = gauss_jacobi_rule(order.max(n), jp, wp)?;
    let hv = rule
        .nodes
        .iter()
        .map(|x| h.eval(x))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let m = rule.order();
    let mut num = Float::with_val(bits, 0);
    let mut den = Float::with_val(bits, 0);
    let mut idx = vec![0usize; n];
    loop {
        let mut weight = Float::with_val(bits, 1);
        let mut psi = Float::with_val(bits, 1);
        for &i in &idx {
            weight *= &rule.weights[i];
            psi *= &hv[i];
        }
        for j in 0..n {
            for k in j + 1..n {
                weight *= Float::with_val(bits, &rule.nodes[idx[k]] - &rule.nodes[idx[j]]).square();
            }
        }
        num += Float::with_val(bits, &weight * &psi);
        den += weight;
        // next multi-index
        let mut pos = 0;
        loop {
            if pos == n {
                return ensure_finite(Float::with_val(p.bits(), num / den), "heine_average");
            }
            idx[pos] += 1;
            if idx[pos] < m {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Exact arithmetic for integer exponents and polynomial `h`.
pub mod rational {
    use super::*;

    /// Coefficients of `(1-x)^a (1+x)^b`.
    fn pure_polynomial(a: u32, b: u32) -> Vec<Integer> {
        let mut poly = vec![Integer::from(1)];
        let mul = |poly: &mut Vec<Integer>, sign: i32| {
            let mut next = vec![Integer::new(); poly.len() + 1];
            for (j, c) in poly.iter().enumerate() {
                next[j] += c;
                next[j + 1] += Integer::from(c * sign);
            }
            *poly = next;
        };
        for _ in 0..a {
            mul(&mut poly, -1);
        }
        for _ in 0..b {
            mul(&mut poly, 1);
        }
        poly
    }

    /// `μ_0..μ_{count-1}` of `(1-x)^a (1+x)^b h(x)` for polynomial `h`
    /// given by ascending coefficients.
    pub fn exact_moments(count: usize, a: u32, b: u32, h: &[Rational]) -> Vec<Rational> {
        let mut weight = Vec::new();
        let pure = pure_polynomial(a, b);
        for (i, hi) in h.iter().enumerate() {
            if weight.len() < pure.len() + i {
                weight.resize(pure.len() + i, Rational::new());
            }
            for (j, q) in pure.iter().enumerate() {
                weight[i + j] += Rational::from(hi * q);
            }
        }
        (0..count)
            .map(|k| {
                let mut acc = Rational::new();
                for (j, c) in weight.iter().enumerate() {
                    let e = k + j;
                    if e % 2 == 0 {
                        acc += c * Rational::from((2, e as u32 + 1));
                    }
                }
                acc
            })
            .collect()
    }

    /// Fraction-free (Bareiss) determinant of an integer matrix.
    pub fn bareiss_det(mut m: Vec<Vec<Integer>>) -> Integer {
        let n = m.len();
        let mut sign = 1;
        let mut prev = Integer::from(1);
        for k in 0..n {
            if m[k][k] == 0 {
                match (k + 1..n).find(|&i| m[i][k] != 0) {
                    Some(i) => {
                        m.swap(i, k);
                        sign = -sign;
                    }
                    None => return Integer::new(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let t = Integer::from(&m[i][j] * &m[k][k]) - Integer::from(&m[i][k] * &m[k][j]);
                    m[i][j] = t.div_exact(&prev);
                }
            }
            prev = m[k][k].clone();
        }
        if n == 0 {
            return Integer::from(1);
        }
        Integer::from(&m[n - 1][n - 1] * sign)
    }

    /// `det(μ_{j+k})_{j,k<n}` exactly; the rational entries are cleared to
    /// a common denominator first.
    pub fn hankel_det(moments: &[Rational], n: usize) -> Rational {
        let mut lcm = Integer::from(1);
        for m in &moments[..2 * n - 1] {
            lcm.lcm_mut(m.denom());
        }
        let scaled: Vec<Integer> = moments[..2 * n - 1]
            .iter()
            .map(|m| Rational::from(m * &lcm).into_numer_denom().0)
            .collect();
        let mat = (0..n)
            .map(|i| (0..n).map(|j| scaled[i + j].clone()).collect())
            .collect();
        let det = bareiss_det(mat);
        let scale = Integer::from(rug::ops::Pow::pow(&lcm, n as u32));
        Rational::from((det, scale))
    }

    /// Recurrence coefficients `α_0..α_{n-1}`, `β_0..β_{n-1}` (with
    /// `β_0 = μ_0`) from `μ_0..μ_{2n-1}` by the Chebyshev algorithm, exactly.
    pub fn exact_recurrence(moments: &[Rational], n: usize) -> (Vec<Rational>, Vec<Rational>) {
        let top = 2 * n;
        assert!(moments.len() >= top, "need 2n moments");
        let mut alpha = Vec::with_capacity(n);
        let mut beta = Vec::with_capacity(n);
        let mut prev2 = vec![Rational::new(); top];
        let mut prev: Vec<Rational> = moments[..top].to_vec();
        alpha.push(Rational::from(&prev[1] / &prev[0]));
        beta.push(prev[0].clone());
        for k in 1..n {
            let mut cur = vec![Rational::new(); top];
            for l in k..top - k {
                cur[l] = (&prev[l + 1] - Rational::from(&alpha[k - 1] * &prev[l]))
                    - Rational::from(&beta[k - 1] * &prev2[l]);
            }
            alpha.push(Rational::from(&cur[k + 1] / &cur[k]) - Rational::from(&prev[k] / &prev[k - 1]));
            beta.push(Rational::from(&cur[k] / &prev[k - 1]));
            prev2 = std::mem::replace(&mut prev, cur);
        }
        (alpha, beta)
    }

    /// Exact `D_n` when both exponents are non-negative integers and `h` is a
    /// polynomial with rational coefficients.
    pub fn exact_det(n: usize, jp: &JacobiParams, h: &PerturbationFn) -> Result<Rational> {
        let (a, b) = jp
            .integer_exponents()
            .ok_or_else(|| Error::InvalidParams("the rational path needs integer exponents".into()))?;
        let poly = h
            .as_polynomial()
            .ok_or_else(|| Error::InvalidParams(format!("{} is not a polynomial", h.source())))?;
        let mu = exact_moments(moment_count(n)?, a, b, &poly);
        Ok(hankel_det(&mu, n))
    }

    /// `ln` of [`exact_det`] as a [`HankelResult`].
    pub fn logdet(n: usize, jp: &JacobiParams, h: &PerturbationFn, p: Precision) -> Result<HankelResult> {
        let det = exact_det(n, jp, h)?;
        if det <= 0 {
            return Err(Error::NotPositiveDefinite {
                method: "rational",
                index: n - 1,
            });
        }
        let bits = p.bits();
        let log_det = Float::with_val(bits, &det).ln();
        Ok(HankelResult {
            n,
            log_det,
            method: HankelMethod::Rational,
            precision_used: p,
            working_bits: bits,
            min_pivot: Float::with_val(bits, f64::NAN),
            error_bound: Float::with_val(64, Float::with_val(64, 1) >> (bits - 2)),
        })
    }
}
