//! Gauss–Jacobi quadrature in arbitrary precision, and Chebyshev
//! interpolation on `[-1, 1]`.

use rug::Float;

use crate::dsl::PerturbationFn;
use crate::error::{Error, Result};
use crate::jacobi::{jacobi_alpha_n, jacobi_beta_n, jacobi_hn, JacobiParams};
use crate::precision::{pi, BigReal, Precision};

/// Nodes and weights of the `m`-point Gauss rule for `w_{α,β}`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: Vec<BigReal>,
    pub weights: Vec<BigReal>,
    pub params: JacobiParams,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `Σ_i w_i f(x_i)`.
    pub fn integrate<F>(&self, mut f: F) -> Result<BigReal>
    where
        F: FnMut(&BigReal) -> Result<BigReal>,
    {
        let bits = self.nodes.first().map_or(64, |x| x.prec());
        let mut acc = Float::with_val(bits, 0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(x)? * w;
        }
        Ok(acc)
    }
}

/// Extra bits carried by the root finder.
const ROOT_GUARD_BITS: u32 = 32;

/// Gauss–Jacobi rule with `m` nodes.
///
/// Each root of the monic Jacobi polynomial is isolated by bisection on the
/// Sturm count of the three-term recurrence (in `f64`), then polished by
/// Newton's method in full precision, falling back to bisection whenever a
/// step leaves the bracket. Weights are `h_{m-1} / (P_{m-1}(x_i) P_m'(x_i))`.
pub fn gauss_jacobi_rule(m: usize, jp: &JacobiParams, p: Precision) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(Error::domain("gauss_jacobi_rule", "order must be >= 1"));
    }
    let bits = p.bits() + ROOT_GUARD_BITS;
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for k in 0..m {
        a.push(Float::with_val(bits, &jacobi_alpha_n(k, jp)));
        b.push(if k == 0 {
            Float::with_val(bits, 0)
        } else {
            Float::with_val(bits, &jacobi_beta_n(k, jp)?)
        });
    }
    let a64: Vec<f64> = a.iter().map(Float::to_f64).collect();
    let b64: Vec<f64> = b.iter().map(Float::to_f64).collect();
    let h_last = Float::with_val(bits, jacobi_hn(m - 1, jp, p.scaled_bits(ROOT_GUARD_BITS))?);

    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for i in 0..m {
        let (lo, hi) = isolate_root(i, &a64, &b64);
        let x = polish_root(lo, hi, &a, &b, bits).map_err(|detail| Error::Convergence {
            what: "gauss_jacobi_rule",
            detail: format!("root {i} of {m} in [{lo:e}, {hi:e}]: {detail}"),
        })?;
        let (_, dpm, pm1) = eval_monic(&x, &a, &b);
        let w = Float::with_val(bits, &h_last / (dpm * pm1));
        if w <= 0 {
            return Err(Error::Convergence {
                what: "gauss_jacobi_rule",
                detail: format!("non-positive weight at node {i}"),
            });
        }
        nodes.push(Float::with_val(p.bits(), x));
        weights.push(Float::with_val(p.bits(), w));
    }
    for pair in nodes.windows(2) {
        if pair[0] >= pair[1] {
            return Err(Error::Convergence {
                what: "gauss_jacobi_rule",
                detail: "nodes are not strictly increasing".into(),
            });
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        params: jp.clone(),
    })
}

/// Number of roots of `P_m` below `x`. Each negative ratio
/// `P_k(x)/P_{k-1}(x)` is a sign change, i.e. a root above `x`.
fn sturm_count(x: f64, a: &[f64], b: &[f64]) -> usize {
    let mut above = 0;
    let mut r = x - a[0];
    for k in 0..a.len() {
        if k > 0 {
            let prev = if r == 0.0 { f64::MIN_POSITIVE } else { r };
            r = (x - a[k]) - b[k] / prev;
        }
        if r < 0.0 {
            above += 1;
        }
    }
    a.len() - above
}

/// Bracket `[lo, hi]` containing the `i`-th smallest root.
fn isolate_root(i: usize, a: &[f64], b: &[f64]) -> (f64, f64) {
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < 1e-15 {
            break;
        }
        if sturm_count(mid, a, b) > i {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // f64 rounding in the count can misplace the bracket slightly
    let pad = 1e-12;
    ((lo - pad).max(-1.0), (hi + pad).min(1.0))
}

/// `(P_m(x), P_m'(x), P_{m-1}(x))` for the monic polynomials.
fn eval_monic(x: &BigReal, a: &[BigReal], b: &[BigReal]) -> (BigReal, BigReal, BigReal) {
    let bits = x.prec();
    let mut p_prev = Float::with_val(bits, 0);
    let mut p = Float::with_val(bits, 1);
    let mut dp_prev = Float::with_val(bits, 0);
    let mut dp = Float::with_val(bits, 0);
    for k in 0..a.len() {
        let xa = Float::with_val(bits, x - &a[k]);
        let p_next = Float::with_val(bits, &xa * &p) - Float::with_val(bits, &b[k] * &p_prev);
        let dp_next = Float::with_val(bits, &xa * &dp) + &p - Float::with_val(bits, &b[k] * &dp_prev);
        p_prev = std::mem::replace(&mut p, p_next);
        dp_prev = std::mem::replace(&mut dp, dp_next);
    }
    (p, dp, p_prev)
}

fn polish_root(lo: f64, hi: f64, a: &[BigReal], b: &[BigReal], bits: u32) -> std::result::Result<BigReal, String> {
    let mut lo = Float::with_val(bits, lo);
    let mut hi = Float::with_val(bits, hi);
    let sign_lo = eval_monic(&lo, a, b).0.is_sign_negative();
    let sign_hi = eval_monic(&hi, a, b).0.is_sign_negative();
    if sign_lo == sign_hi {
        return Err("bracket does not straddle a sign change".into());
    }
    let mut x = Float::with_val(bits, &lo + &hi) / 2u32;
    let tol = Float::with_val(bits, Float::with_val(bits, 1) >> (bits - 4));
    for _ in 0..4 * bits {
        let (pm, dpm, _) = eval_monic(&x, a, b);
        if pm.is_zero() {
            return Ok(x);
        }
        if pm.is_sign_negative() == sign_lo {
            lo.clone_from(&x);
        } else {
            hi.clone_from(&x);
        }
        if !dpm.is_zero() {
            let delta = Float::with_val(bits, &pm / &dpm);
            if Float::with_val(bits, delta.abs_ref()) <= tol {
                return Ok(x - delta);
            }
            let newton = Float::with_val(bits, &x - &delta);
            if newton > lo && newton < hi && newton.is_finite() {
                x = newton;
                continue;
            }
        }
        x = Float::with_val(bits, &lo + &hi) / 2u32;
        if Float::with_val(bits, &hi - &lo) <= tol {
            return Ok(x);
        }
    }
    Err("no convergence within the iteration budget".into())
}

/// `∫ x^k w_{α,β}(x) h(x) dx ≈ Σ_i w_i x_i^k h(x_i)` with an `m`-point rule.
pub fn perturbed_moment(k: usize, jp: &JacobiParams, h: &PerturbationFn, m: usize, p: Precision) -> Result<BigReal> {
    Ok(perturbed_moments(k + 1, jp, h, m, p)?.pop().expect("k + 1 moments"))
}

/// The first `count` moments of `w_{α,β} h` by an `m`-point rule.
pub fn perturbed_moments(
    count: usize,
    jp: &JacobiParams,
    h: &PerturbationFn,
    m: usize,
    p: Precision,
) -> Result<Vec<BigReal>> {
    let rule = gauss_jacobi_rule(m, jp, p)?;
    moments_from_rule(count, &rule, h)
}

pub(crate) fn moments_from_rule(count: usize, rule: &QuadratureRule, h: &PerturbationFn) -> Result<Vec<BigReal>> {
    let bits = rule.nodes[0].prec();
    let mut mu = vec![Float::with_val(bits, 0); count];
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let mut t = Float::with_val(bits, h.eval(x)? * w);
        for m in mu.iter_mut() {
            *m += &t;
            t *= x;
        }
    }
    Ok(mu)
}

/// Chebyshev coefficients of a function on `[-1, 1]`.
///
/// Convention: `f(x) ≈ c_0/2 + Σ_{k=1}^{M} c_k T_k(x)`. Only `c_0` is halved
/// on reconstruction; the Lobatto endpoint coefficient `c_M` is stored
/// already halved. With this normalization `c_0/2` is the mean of `f`
/// against `dx / (π √(1-x²))`.
#[derive(Clone, Debug)]
pub struct ChebExpansion {
    pub coeffs: Vec<BigReal>,
    /// At least `max(|c_{M-1}|, |c_M|)`, and never below the rounding floor.
    pub tail_bound: BigReal,
}

impl ChebExpansion {
    pub fn new(coeffs: Vec<BigReal>) -> Self {
        let tail_bound = tail_bound(&coeffs);
        ChebExpansion { coeffs, tail_bound }
    }

    /// Index of the last coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn precision_bits(&self) -> u32 {
        self.coeffs.first().map_or(64, |c| c.prec())
    }

    /// Clenshaw summation.
    pub fn eval(&self, x: &BigReal) -> BigReal {
        let bits = self.precision_bits().max(x.prec());
        let two_x = Float::with_val(bits, x * 2u32);
        let mut b1 = Float::with_val(bits, 0);
        let mut b2 = Float::with_val(bits, 0);
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = Float::with_val(bits, &two_x * &b1) - &b2 + c;
            b2 = std::mem::replace(&mut b1, b0);
        }
        let c0 = self
            .coeffs
            .first()
            .map_or(Float::with_val(bits, 0), |c| Float::with_val(bits, c / 2u32));
        Float::with_val(bits, x * &b1) - b2 + c0
    }

    /// `c_0/2`, the arcsine-measure mean.
    pub fn mean(&self) -> BigReal {
        Float::with_val(self.precision_bits(), &self.coeffs[0] / 2u32)
    }
}

fn tail_bound(coeffs: &[BigReal]) -> BigReal {
    let bits = coeffs.first().map_or(64, |c| c.prec());
    let m = coeffs.len();
    let mut bound = Float::with_val(bits, 0);
    for c in coeffs.iter().skip(m.saturating_sub(2)) {
        bound.max_mut(&Float::with_val(bits, c.abs_ref()));
    }
    let scale = coeffs
        .iter()
        .map(|c| Float::with_val(bits, c.abs_ref()))
        .fold(Float::with_val(bits, 0), |acc, v| acc.max(&v));
    let floor = (scale * m as u32) >> (bits - 8);
    bound.max(&floor)
}

/// Interpolates `f` at the `M+1` Chebyshev–Lobatto points `cos(πj/M)`.
pub fn cheb_expand<F>(f: F, m: usize, p: Precision) -> Result<ChebExpansion>
where
    F: Fn(&BigReal) -> Result<BigReal>,
{
    if m == 0 {
        return Err(Error::domain("cheb_expand", "M must be >= 1"));
    }
    let bits = p.bits();
    let pi = pi(bits);
    // cos(π r / M) for r = 0..2M
    let table: Vec<BigReal> = (0..2 * m)
        .map(|r| (Float::with_val(bits, &pi * r as u32) / m as u32).cos())
        .collect();
    let values = (0..=m).map(|j| f(&table[j])).collect::<Result<Vec<_>>>()?;
    let mut coeffs = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let mut acc = Float::with_val(bits, 0);
        for (j, v) in values.iter().enumerate() {
            let t = Float::with_val(bits, v * &table[(j * k) % (2 * m)]);
            if j == 0 || j == m {
                acc += t / 2u32;
            } else {
                acc += t;
            }
        }
        acc *= 2u32;
        acc /= m as u32;
        if k == m {
            acc /= 2u32;
        }
        coeffs.push(acc);
    }
    Ok(ChebExpansion::new(coeffs))
}

/// Smallest `M` of the form `64·2^j` with `max(|c_{M-1}|, |c_M|) < 10^{-digits/2}`.
pub fn cheb_expand_auto<F>(f: F, p: Precision) -> Result<ChebExpansion>
where
    F: Fn(&BigReal) -> Result<BigReal>,
{
    let threshold = crate::precision::pow10(p.bits(), -(p.digits() as i64 / 2));
    let mut m = 64;
    loop {
        let ce = cheb_expand(&f, m, p)?;
        let last = ce.coeffs.len();
        let resolved = ce.coeffs[last - 2..]
            .iter()
            .all(|c| Float::with_val(p.bits(), c.abs_ref()) < threshold);
        if resolved {
            return Ok(ce);
        }
        if m >= 1 << 14 {
            return Err(Error::Convergence {
                what: "cheb_expand_auto",
                detail: format!("coefficients still above 10^-{} at M = {m}", p.digits() / 2),
            });
        }
        m *= 2;
    }
}

/// Chebyshev expansion of `ln h`, at a fixed `M` or chosen automatically.
pub fn ln_h_expansion(h: &PerturbationFn, m: Option<usize>, p: Precision) -> Result<ChebExpansion> {
    let f = |x: &BigReal| h.eval_ln(x).map_err(Error::from);
    match m {
        Some(m) => cheb_expand(f, m, p),
        None => cheb_expand_auto(f, p),
    }
}
