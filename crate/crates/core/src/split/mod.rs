//! Gradient-guided policy splitting.
//!
//! Per-task PPO gradients are stacked into a [`GradientMatrix`]; the
//! per-coordinate variance across tasks ([`VarianceVector`]) is averaged over
//! a window of iterations, and the `M` lowest-variance parameters are kept
//! shared ([`ShareMask`]). A [`SplitPolicy`] then holds one copy of every
//! shared parameter and one copy per task of every other parameter.

mod artifact;
mod mask;
mod metric;
mod policy;

pub use artifact::{read_mask_artifact, write_mask_artifact};
pub use mask::{random_mask, select_shared_mask, shared_count_for, ShareMask};
pub use metric::{
    specialization_metric, GradientMatrix, MetricAccumulator, VarianceVector, METRIC_WINDOW,
};
pub use policy::{split_policy, SplitOptimizer, SplitPolicy};

/// Mean of equal-length rows, computed as `r0 + Σ (r_i - r0) / n`.
///
/// Identical rows give back the first row bit for bit, which keeps
/// all-shared split updates and joint updates on the same trajectory.
pub(crate) fn shifted_mean<R: AsRef<[f64]>>(rows: &[R]) -> Vec<f64> {
    let first = rows[0].as_ref();
    let n = rows.len() as f64;
    let mut offset = vec![0.0; first.len()];
    for row in &rows[1..] {
        for ((o, &x), &x0) in offset.iter_mut().zip(row.as_ref()).zip(first) {
            *o += x - x0;
        }
    }
    first
        .iter()
        .zip(&offset)
        .map(|(&x0, &o)| x0 + o / n)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::shifted_mean;

    #[test]
    fn shifted_mean_is_exact_on_identical_rows() {
        let r = vec![0.1, 1.0 / 3.0, -7.3e-9];
        let m = shifted_mean(&[r.clone(), r.clone(), r.clone()]);
        assert!(m.iter().zip(&r).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn shifted_mean_values() {
        assert_eq!(
            shifted_mean(&[vec![1.0, 0.0], vec![3.0, 2.0]]),
            vec![2.0, 1.0]
        );
    }
}
