//! Deterministic summation.
//!
//! Every integral in the crate is reduced through [`pairwise_sum`], which has
//! a fixed traversal order independent of how the summands were produced, so
//! a parallel evaluation followed by this reduction is bit-reproducible.

const LEAF: usize = 16;

/// Pairwise summation with Neumaier-compensated leaves.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        return neumaier_sum(values);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_single() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[3.5]), 3.5);
    }

    #[test]
    fn cancellation_is_compensated() {
        let mut v = vec![1.0, 1e100, 1.0, -1e100];
        v.extend(std::iter::repeat(0.0).take(40));
        assert_eq!(pairwise_sum(&v), 2.0);
    }

    #[test]
    fn harmonic_matches_reference() {
        let v: Vec<f64> = (1..=100_000).map(|k| 1.0 / k as f64).collect();
        // H_100000 to 20 digits
        let reference = 12.090_146_129_863_428;
        assert!((pairwise_sum(&v) - reference).abs() < 1e-13);
    }
}
