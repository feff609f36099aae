use phank::fluid::{fluid_recurrence, support_endpoints, support_endpoints_shifted, EquilibriumDensity};
use phank::hankel::{hankel_logdet_ldl, hankel_logdet_recurrence, heine_average_small_n, MomentSource};
use phank::jacobi::{jacobi_alpha_n, jacobi_beta_n, jacobi_log_hn, jacobi_logdet_asym, jacobi_logdet_exact};
use phank::linstat::{mean_term, prediction_from_expansion};
use phank::quadrature::ln_h_expansion;
use phank::{BigReal, JacobiParams, MeanForm, MomentSequence, PerturbationFn, Precision};
use rayon::prelude::*;
use rug::Float;

use crate::report::Row;

/// A failure with its exit code: 2 usage, 3 numeric, 4 invalid `h`.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
    Perturbation(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Perturbation(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) | Failure::Perturbation(m) => m,
        }
    }
}

impl From<phank::Error> for Failure {
    fn from(e: phank::Error) -> Self {
        let msg = e.to_string();
        match e {
            phank::Error::Perturbation(_) => Failure::Perturbation(msg),
            e if e.is_numeric() => Failure::Numeric(msg),
            _ => Failure::Usage(msg),
        }
    }
}

impl From<phank::dsl::DslError> for Failure {
    fn from(e: phank::dsl::DslError) -> Self {
        Failure::Perturbation(e.to_string())
    }
}

type Outcome = Result<Row, Failure>;

/// Digits for size `n`: the requested value, or the determinant policy.
pub fn precision_for(n: usize, digits: Option<u32>) -> Result<Precision, Failure> {
    match digits {
        Some(d) => Precision::new(d).map_err(Failure::from),
        None => Ok(Precision::for_hankel(n)),
    }
}

/// Evaluates `f` for every `n` concurrently; rows come back ordered by `n`.
/// A failing `n` becomes a row carrying the error; the worst exit code is
/// returned alongside.
pub fn sweep<F>(ns: &[usize], f: F) -> (Vec<Row>, u8)
where
    F: Fn(usize) -> Result<Vec<Row>, Failure> + Sync,
{
    let results: Vec<(usize, Result<Vec<Row>, Failure>)> = ns.par_iter().map(|&n| (n, f(n))).collect();
    let mut code = 0;
    let mut rows = Vec::new();
    for (n, r) in results {
        match r {
            Ok(mut rs) => rows.append(&mut rs),
            Err(e) => {
                code = code.max(e.code());
                rows.push(Row::new().int("n", n).text("error", e.message()));
            }
        }
    }
    (rows, code)
}

fn diff(x: &BigReal, y: &BigReal) -> BigReal {
    Float::with_val(x.prec().max(y.prec()), x - y)
}

pub fn exact(n: usize, jp: &JacobiParams, digits: Option<u32>) -> Outcome {
    let p = precision_for(n, digits)?;
    let d = p.digits();
    let closed = jacobi_logdet_exact(n, jp, p)?;
    let mut sum = Float::with_val(p.bits(), 0);
    for j in 0..n {
        sum += jacobi_log_hn(j, jp, p)?;
    }
    let ms = MomentSequence::pure(n, jp, p)?;
    let ldl = hankel_logdet_ldl(&ms, n, p)?;
    let mut row = Row::new()
        .int("n", n)
        .int("digits", d as usize)
        .big("closed_form", &closed, d)
        .big("sum_log_h", &sum, d)
        .big("ldl", &ldl.log_det, d)
        .small("ldl_error_bound", &ldl.error_bound)
        .small("closed_minus_sum", &diff(&closed, &sum))
        .small("closed_minus_ldl", &diff(&closed, &ldl.log_det))
        .small("sum_minus_ldl", &diff(&sum, &ldl.log_det));
    if jp.asymptotic_valid() {
        let asym = jacobi_logdet_asym(n, jp, p)?;
        row = row
            .big("asymptotic", &asym, d)
            .small("closed_minus_asymptotic", &diff(&closed, &asym));
    }
    Ok(row)
}

pub struct CompareOptions<'a> {
    pub h: &'a PerturbationFn,
    pub digits: Option<u32>,
    pub quad_order: Option<usize>,
    pub cheb_m: Option<usize>,
    pub heine: bool,
}

pub fn compare(n: usize, jp: &JacobiParams, opts: &CompareOptions) -> Outcome {
    let p = precision_for(n, opts.digits)?;
    let d = p.digits();
    let ms = MomentSequence::perturbed(n, jp, opts.h, opts.quad_order, p)?;
    let quad_order = match ms.source {
        MomentSource::Perturbed { quad_order, .. } => quad_order,
        _ => unreachable!("perturbed moments"),
    };
    let ldl = hankel_logdet_ldl(&ms, n, p)?;
    let rec = hankel_logdet_recurrence(&ms, n, jp, p)?;
    let pure = jacobi_logdet_exact(n, jp, p)?;
    let ratio = diff(&ldl.log_det, &pure);
    let mut row = Row::new()
        .int("n", n)
        .int("digits", d as usize)
        .int("quad_order", quad_order)
        .big("ldl", &ldl.log_det, d)
        .big("recurrence", &rec.log_det, d)
        .small("ldl_minus_recurrence", &diff(&ldl.log_det, &rec.log_det))
        .small("ldl_error_bound", &ldl.error_bound)
        .big("log_ratio", &ratio, d);
    if jp.asymptotic_valid() {
        let ce = ln_h_expansion(opts.h, opts.cheb_m, p)?;
        let pred = prediction_from_expansion(n, jp, &ce, p)?;
        let mean = mean_term(&ce, n, jp, MeanForm::Limit, p)?;
        let total = pred.total();
        let without_edge = pred.total_without_edge();
        row = row
            .int("cheb_degree", pred.cheb_degree)
            .big("prediction", &total, d)
            .big("prediction_without_edge", &without_edge, d)
            .small("difference", &diff(&ldl.log_det, &total))
            .small("difference_without_edge", &diff(&ldl.log_det, &without_edge))
            .big("mean_term", &mean, d)
            .big("pv_constant", &pred.log_c.pv_part, d)
            .big("edge_term", &pred.log_c.edge_part, d)
            .big("pv_estimate", &diff(&ratio, &mean), d);
    }
    if opts.heine {
        let avg = heine_average_small_n(n, jp, opts.h, p)?;
        let direct = Float::with_val(p.bits(), ratio.exp_ref());
        row = row
            .big("ratio", &direct, d)
            .big("heine_average", &avg, d)
            .small("ratio_minus_heine", &diff(&direct, &avg));
    }
    Ok(row)
}

pub fn heine(
    n: usize,
    jp: &JacobiParams,
    h: &PerturbationFn,
    digits: Option<u32>,
    quad_order: Option<usize>,
) -> Outcome {
    let p = precision_for(n, digits)?;
    let d = p.digits();
    let ms = MomentSequence::perturbed(n, jp, h, quad_order, p)?;
    let ldl = hankel_logdet_ldl(&ms, n, p)?;
    let pure = jacobi_logdet_exact(n, jp, p)?;
    let ratio = diff(&ldl.log_det, &pure).exp();
    let avg = heine_average_small_n(n, jp, h, p)?;
    Ok(Row::new()
        .int("n", n)
        .int("digits", d as usize)
        .big("ratio", &ratio, d)
        .big("heine_average", &avg, d)
        .small("difference", &diff(&ratio, &avg)))
}

pub fn fluid(n: usize, jp: &JacobiParams, digits: Option<u32>) -> Outcome {
    let p = precision_for(n, digits)?;
    let d = p.digits();
    let bits = p.bits();
    let si = support_endpoints(n, jp, p)?;
    let shifted = support_endpoints_shifted(n, jp, p)?;
    let fr = fluid_recurrence(n, jp, p)?;
    let alpha = Float::with_val(bits, &jacobi_alpha_n(n, jp));
    let beta = Float::with_val(bits, &jacobi_beta_n(n, jp)?);
    let n2 = Float::with_val(bits, n) * n as u32;
    let n3 = Float::with_val(bits, &n2 * n as u32);
    Ok(Row::new()
        .int("n", n)
        .int("digits", d as usize)
        .big("a_n", &si.a, d)
        .big("b_n", &si.b, d)
        .flag("hard_edge", si.has_hard_edge())
        .big("a_n_shifted", &shifted.a, d)
        .big("b_n_shifted", &shifted.b, d)
        .big("alpha_n", &alpha, d)
        .big("beta_n", &beta, d)
        .big("alpha_tilde", &fr.alpha_tilde, d)
        .big("beta_tilde", &fr.beta_tilde, d)
        .big("alpha_tilde_shifted", &fr.alpha_tilde_shifted, d)
        .big("beta_tilde_shifted", &fr.beta_tilde_shifted, d)
        .big("n3_alpha_deviation", &(diff(&fr.alpha_tilde, &alpha) * &n3), d)
        .big("n2_beta_deviation", &(diff(&fr.beta_tilde, &beta) * &n2), d)
        .big("n2_one_plus_a", &(Float::with_val(bits, &si.a + 1u32) * &n2), d)
        .big("n2_one_minus_b", &(Float::with_val(bits, 1u32 - &si.b) * &n2), d))
}

/// `σ` on `points` equally spaced points of `[a_n, b_n]`, endpoints included.
pub fn density(n: usize, jp: &JacobiParams, digits: Option<u32>, points: usize) -> Result<Vec<Row>, Failure> {
    if points < 2 {
        return Err(Failure::Usage("--points must be at least 2".into()));
    }
    let p = precision_for(n, digits)?;
    let d = p.digits();
    let bits = p.bits();
    let si = support_endpoints(n, jp, p)?;
    let density = EquilibriumDensity::new(si.clone());
    let mass = density.total_mass();
    let width = Float::with_val(bits, &si.b - &si.a);
    let mut rows = Vec::with_capacity(points);
    for j in 0..points {
        let x = if j + 1 == points {
            si.b.clone()
        } else {
            Float::with_val(bits, &width * j as u32) / (points - 1) as u32 + &si.a
        };
        let sigma = density.eval(&x)?;
        rows.push(
            Row::new()
                .int("n", n)
                .int("digits", d as usize)
                .int("j", j)
                .big("x", &x, d)
                .big("sigma", &sigma, d)
                .big("total_mass", &mass, d),
        );
    }
    Ok(rows)
}
