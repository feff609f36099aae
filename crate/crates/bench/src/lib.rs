//! Fixed workloads shared by the benchmarks.

use phank::{parse_h, JacobiParams, PerturbationFn};

/// Exponent pairs covering the symmetric, soft-edge and hard-edge cases.
pub fn exponent_pairs() -> Vec<(&'static str, JacobiParams)> {
    vec![
        ("legendre", JacobiParams::legendre()),
        ("half_one", JacobiParams::parse("1/2", "1").expect("valid exponents")),
        ("one_zero", JacobiParams::parse("1", "0").expect("valid exponents")),
    ]
}

pub fn perturbations() -> Vec<PerturbationFn> {
    ["exp(x)", "1 + x^2/2"]
        .iter()
        .map(|s| parse_h(s).expect("valid h"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(exponent_pairs().len(), 3);
        assert!(perturbations().iter().all(|h| !h.is_identity()));
    }
}
