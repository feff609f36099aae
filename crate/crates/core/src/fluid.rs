//! Coulomb-fluid (equilibrium measure) description of the Jacobi ensemble.
//!
//! For the potential `v(x) = -ln w_{α,β}(x)` the `n`-particle equilibrium
//! measure is supported on a single interval `[a_n, b_n]`. With
//! `N = n + (α+β)/2` the endpoint equations reduce to
//! `α / √((1-a)(1-b)) = N` and `β / √((1+a)(1+b)) = N`, solved by
//!
//! ```text
//! a_n, b_n = (β² - α² ∓ 4√(n(n+α)(n+β)(n+α+β))) / (2n+α+β)²
//! ```
//!
//! and the density is `σ(x) = N √((b-x)(x-a)) / (π (1-x²))`.

use rug::Float;

use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;
use crate::precision::{ensure_finite, pi, BigReal, Precision};

/// `v'(x) = -α/(x-1) - β/(x+1)`.
pub fn v_prime(x: &BigReal, jp: &JacobiParams) -> Result<BigReal> {
    let bits = x.prec();
    let xm = Float::with_val(bits, x - 1u32);
    let xp = Float::with_val(bits, x + 1u32);
    if xm.is_zero() || xp.is_zero() {
        return Err(Error::domain("v_prime", "pole at x = ±1"));
    }
    let v = -(jp.alpha_big(bits) / xm) - jp.beta_big(bits) / xp;
    ensure_finite(v, "v_prime")
}

/// Support `[a_n, b_n]` of the equilibrium measure.
#[derive(Clone, Debug)]
pub struct SupportInterval {
    pub a: BigReal,
    pub b: BigReal,
    pub n: usize,
    pub params: JacobiParams,
}

impl SupportInterval {
    /// `R_n = (b_n + a_n)/2`.
    pub fn center(&self) -> BigReal {
        Float::with_val(self.a.prec(), &self.b + &self.a) / 2u32
    }

    /// `r_n = (b_n - a_n)/2`.
    pub fn half_width(&self) -> BigReal {
        Float::with_val(self.a.prec(), &self.b - &self.a) / 2u32
    }

    /// `N = n + (α+β)/2`, the total charge seen by the reduced equations.
    pub fn effective_n(&self) -> BigReal {
        let bits = self.a.prec();
        let s = Float::with_val(bits, self.params.alpha_big(bits) + self.params.beta_big(bits));
        s / 2u32 + self.n as u32
    }

    pub fn contains_open(&self, x: &BigReal) -> bool {
        *x > self.a && *x < self.b
    }

    /// True when an endpoint sits on `±1`, which happens for the
    /// consistent solution exactly when the matching exponent is 0.
    pub fn has_hard_edge(&self) -> bool {
        self.a == -1 || self.b == 1
    }

    /// Residuals of the reduced endpoint equations
    ///
    /// ```text
    /// N - α/(2√((1-a)(1-b))) - β/(2√((1+a)(1+b)))
    ///     α/√((1-a)(1-b))    - β/√((1+a)(1+b))
    /// ```
    ///
    /// `None` at a hard edge, where one of the quotients is `0/0`.
    pub fn endpoint_residuals(&self) -> Option<(BigReal, BigReal)> {
        if self.has_hard_edge() {
            return None;
        }
        let bits = self.a.prec();
        let one_minus = Float::with_val(bits, 1u32 - &self.a) * Float::with_val(bits, 1u32 - &self.b);
        let one_plus = Float::with_val(bits, 1u32 + &self.a) * Float::with_val(bits, 1u32 + &self.b);
        let left = self.params.alpha_big(bits) / one_minus.sqrt();
        let right = self.params.beta_big(bits) / one_plus.sqrt();
        let first = self.effective_n() - Float::with_val(bits, &left + &right) / 2u32;
        let second = left - right;
        Some((first, second))
    }
}

/// Endpoints with the `(2n+α+β)²` denominator, which solve the endpoint
/// equations exactly.
pub fn support_endpoints(n: usize, jp: &JacobiParams, p: Precision) -> Result<SupportInterval> {
    endpoints_with_shift(n, jp, p, 0)
}

/// Endpoints with the `(2n+α+β+2)²` denominator, kept for comparison.
///
/// These do not satisfy the endpoint equations: they differ from
/// [`support_endpoints`] at order `1/n` and put `1 + a_n ≈ 2/n`.
pub fn support_endpoints_shifted(n: usize, jp: &JacobiParams, p: Precision) -> Result<SupportInterval> {
    endpoints_with_shift(n, jp, p, 2)
}

fn endpoints_with_shift(n: usize, jp: &JacobiParams, p: Precision, shift: u32) -> Result<SupportInterval> {
    if n == 0 {
        return Err(Error::domain("support_endpoints", "n must be >= 1"));
    }
    let bits = p.bits() + 16;
    let a = jp.alpha_big(bits);
    let b = jp.beta_big(bits);
    let nf = Float::with_val(bits, n);
    let s = Float::with_val(bits, &a + &b);
    let prod =
        Float::with_val(bits, &nf + &a) * Float::with_val(bits, &nf + &b) * Float::with_val(bits, &nf + &s) * &nf;
    let q = prod.sqrt() * 4u32;
    let diff = Float::with_val(bits, b.square_ref()) - Float::with_val(bits, a.square_ref());
    let den = (Float::with_val(bits, &nf * 2u32) + &s + shift).square();
    let lo = Float::with_val(p.bits(), Float::with_val(bits, &diff - &q) / &den);
    let hi = Float::with_val(p.bits(), Float::with_val(bits, &diff + &q) / &den);
    // with α = 0 (β = 0) the consistent b_n (a_n) is exactly ±1; rounding
    // must not push it past the edge
    let lo = if shift == 0 && *jp.beta() == 0 {
        Float::with_val(p.bits(), -1)
    } else {
        lo
    };
    let hi = if shift == 0 && *jp.alpha() == 0 {
        Float::with_val(p.bits(), 1)
    } else {
        hi
    };
    if !(lo >= -1 && lo < hi && hi <= 1) {
        return Err(Error::Convergence {
            what: "support_endpoints",
            detail: format!("endpoints ({}, {}) out of order", lo.to_f64(), hi.to_f64()),
        });
    }
    Ok(SupportInterval {
        a: lo,
        b: hi,
        n,
        params: jp.clone(),
    })
}

/// `σ(x) = N √((b-x)(x-a)) / (π(1-x²))` on a fixed support.
#[derive(Clone, Debug)]
pub struct EquilibriumDensity {
    pub support: SupportInterval,
}

impl EquilibriumDensity {
    pub fn new(support: SupportInterval) -> Self {
        EquilibriumDensity { support }
    }

    /// Zero at the endpoints; domain error outside `[a_n, b_n]` and at `±1`.
    pub fn eval(&self, x: &BigReal) -> Result<BigReal> {
        equilibrium_density(x, &self.support)
    }

    /// `∫ σ` in closed form.
    ///
    /// After `x = R + r t`, with `1/(1-x²) = (1/(1-x) + 1/(1+x))/2` and
    /// `∫ √(1-t²)/(c-t) dt = π(c - √(c²-1))` for `c ≥ 1`, the mass is
    /// `(N r / 2) (g(c₁) + g(c₂))`, `c₁ = (1-R)/r`, `c₂ = (1+R)/r`.
    pub fn total_mass(&self) -> BigReal {
        let si = &self.support;
        let bits = si.a.prec();
        let r = si.half_width();
        let big_r = si.center();
        let c1 = Float::with_val(bits, 1u32 - &big_r) / &r;
        let c2 = Float::with_val(bits, 1u32 + &big_r) / &r;
        let total = stieltjes_semicircle(&c1) + stieltjes_semicircle(&c2);
        si.effective_n() * r * total / 2u32
    }
}

/// `(1/π) ∫_{-1}^{1} √(1-t²)/(c-t) dt = c - √(c²-1)` for `c ≥ 1`.
pub(crate) fn stieltjes_semicircle(c: &BigReal) -> BigReal {
    let bits = c.prec();
    let disc = Float::with_val(bits, c.square_ref()) - 1u32;
    // c ≥ 1 up to rounding
    let root = if disc.is_sign_negative() {
        Float::with_val(bits, 0)
    } else {
        disc.sqrt()
    };
    Float::with_val(bits, c - root)
}

pub fn equilibrium_density(x: &BigReal, si: &SupportInterval) -> Result<BigReal> {
    if *x < si.a || *x > si.b {
        return Err(Error::domain("equilibrium_density", "x outside the support"));
    }
    if *x == si.a || *x == si.b {
        return Ok(Float::with_val(x.prec(), 0));
    }
    let bits = x.prec().max(si.a.prec());
    let one_minus_sq = Float::with_val(bits, 1u32 - Float::with_val(bits, x.square_ref()));
    if one_minus_sq.is_zero() {
        return Err(Error::domain("equilibrium_density", "pole at x = ±1"));
    }
    let root = (Float::with_val(bits, &si.b - x) * Float::with_val(bits, x - &si.a)).sqrt();
    let v = si.effective_n() * root / (pi(bits) * one_minus_sq);
    ensure_finite(v, "equilibrium_density")
}

/// Coulomb-fluid approximations to the recurrence coefficients.
#[derive(Clone, Debug)]
pub struct FluidRecurrence {
    pub n: usize,
    /// `(b_n + a_n)/2` from the consistent endpoints.
    pub alpha_tilde: BigReal,
    /// `(b_n - a_n)²/16` from the consistent endpoints.
    pub beta_tilde: BigReal,
    /// `(β² - α²)/(2n+α+β)²`.
    pub alpha_tilde_closed: BigReal,
    /// `4n(n+α)(n+β)(n+α+β)/(2n+α+β)⁴`.
    pub beta_tilde_closed: BigReal,
    /// `(b_n + a_n)/2` from the shifted endpoints.
    pub alpha_tilde_shifted: BigReal,
    /// `(b_n - a_n)²/16` from the shifted endpoints.
    pub beta_tilde_shifted: BigReal,
    /// `R_n`.
    pub center: BigReal,
    /// `r_n`.
    pub half_width: BigReal,
}

pub fn fluid_recurrence(n: usize, jp: &JacobiParams, p: Precision) -> Result<FluidRecurrence> {
    let si = support_endpoints(n, jp, p)?;
    let shifted = support_endpoints_shifted(n, jp, p)?;
    let bits = p.bits();
    let beta_of = |s: &SupportInterval| Float::with_val(bits, &s.b - &s.a).square() / 16u32;

    let a = jp.alpha_big(bits);
    let b = jp.beta_big(bits);
    let nf = Float::with_val(bits, n);
    let s = Float::with_val(bits, &a + &b);
    let d = Float::with_val(bits, &nf * 2u32) + &s;
    let diff = Float::with_val(bits, b.square_ref()) - Float::with_val(bits, a.square_ref());
    let alpha_tilde_closed = diff / Float::with_val(bits, d.square_ref());
    let beta_tilde_closed = Float::with_val(bits, &nf + &a)
        * Float::with_val(bits, &nf + &b)
        * Float::with_val(bits, &nf + &s)
        * &nf
        * 4u32
        / d.square().square();

    Ok(FluidRecurrence {
        n,
        alpha_tilde: si.center(),
        beta_tilde: beta_of(&si),
        alpha_tilde_closed,
        beta_tilde_closed,
        alpha_tilde_shifted: shifted.center(),
        beta_tilde_shifted: beta_of(&shifted),
        center: si.center(),
        half_width: si.half_width(),
    })
}
