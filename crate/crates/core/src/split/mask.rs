use rand::Rng;

use super::VarianceVector;
use crate::error::{Error, Result};

/// Per-parameter share flags for the policy network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareMask {
    shared: Vec<bool>,
    shared_count: usize,
}

impl ShareMask {
    pub fn from_flags(shared: Vec<bool>) -> Self {
        let shared_count = shared.iter().filter(|&&s| s).count();
        Self {
            shared,
            shared_count,
        }
    }

    pub fn all_shared(len: usize) -> Self {
        Self::from_flags(vec![true; len])
    }

    pub fn none_shared(len: usize) -> Self {
        Self::from_flags(vec![false; len])
    }

    pub fn len(&self) -> usize {
        self.shared.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shared.is_empty()
    }

    /// M
    pub fn shared_count(&self) -> usize {
        self.shared_count
    }

    pub fn specialized_count(&self) -> usize {
        self.shared.len() - self.shared_count
    }

    pub fn is_shared(&self, index: usize) -> bool {
        self.shared[index]
    }

    pub fn flags(&self) -> &[bool] {
        &self.shared
    }

    pub fn shared_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.shared[i]).collect()
    }

    pub fn specialized_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.shared[i]).collect()
    }
}

/// M for a specialized fraction: `round((1 - sp) * |θ|)`.
pub fn shared_count_for(sp_fraction: f64, num_params: usize) -> usize {
    (((1.0 - sp_fraction) * num_params as f64).round() as usize).min(num_params)
}

/// Share the `m` coordinates with the smallest variance; ties go to the lower
/// index.
pub fn select_shared_mask(v: &VarianceVector, m: usize) -> Result<ShareMask> {
    let values = v.as_slice();
    if m > values.len() {
        return Err(Error::invalid(format!(
            "shared count {m} exceeds parameter count {}",
            values.len()
        )));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut shared = vec![false; values.len()];
    for &i in &order[..m] {
        shared[i] = true;
    }
    Ok(ShareMask::from_flags(shared))
}

/// Share `round(shared_fraction * len)` uniformly chosen coordinates.
pub fn random_mask<R: Rng + ?Sized>(
    len: usize,
    shared_fraction: f64,
    rng: &mut R,
) -> Result<ShareMask> {
    if !(0.0..=1.0).contains(&shared_fraction) {
        return Err(Error::invalid(format!(
            "shared fraction {shared_fraction} outside [0, 1]"
        )));
    }
    let m = ((shared_fraction * len as f64).round() as usize).min(len);
    let mut shared = vec![false; len];
    for i in rand::seq::index::sample(rng, len, m) {
        shared[i] = true;
    }
    Ok(ShareMask::from_flags(shared))
}
