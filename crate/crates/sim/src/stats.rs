//! Paired one-sided t-test for comparing simulator modes over shared seeds.

use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairedTest {
    pub n: usize,
    pub mean_diff: f64,
    /// Sample standard deviation of the differences.
    pub sd: f64,
    pub t: f64,
    /// P-value of `mean(treated - control) > 0`.
    pub p: f64,
}

/// Tests whether `treated` exceeds `control` on average. Returns `None` with
/// fewer than two pairs or mismatched lengths.
pub fn paired_t_test(treated: &[f64], control: &[f64]) -> Option<PairedTest> {
    if treated.len() != control.len() || treated.len() < 2 {
        return None;
    }
    let n = treated.len();
    let diffs: Vec<f64> = treated.iter().zip(control).map(|(a, b)| a - b).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        let p = if mean > 0.0 { 0.0 } else { 1.0 };
        let t = if mean > 0.0 {
            f64::INFINITY
        } else if mean < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        return Some(PairedTest { n, mean_diff: mean, sd, t, p });
    }
    let t = mean / (sd / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).ok()?;
    Some(PairedTest { n, mean_diff: mean, sd, t, p: dist.sf(t) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_a_hand_computed_case() {
        // Differences 1, 2, 3: mean 2, sd 1, t = 2 * sqrt(3), df 2.
        let r = paired_t_test(&[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r.t - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        // Survival of t with 2 df: (1 - t / sqrt(t^2 + 2)) / 2.
        let expected = 0.5 * (1.0 - r.t / (r.t * r.t + 2.0).sqrt());
        assert!((r.p - expected).abs() < 1e-9, "{} vs {expected}", r.p);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(paired_t_test(&[1.0], &[0.0]).is_none());
        assert!(paired_t_test(&[1.0, 2.0], &[0.0]).is_none());
        assert_eq!(paired_t_test(&[1.0, 1.0], &[1.0, 1.0]).unwrap().p, 1.0);
        assert_eq!(paired_t_test(&[2.0, 2.0], &[1.0, 1.0]).unwrap().p, 0.0);
        assert!(paired_t_test(&[0.0, 0.0, 1.0], &[1.0, 2.0, 1.5]).unwrap().p > 0.5);
    }
}
