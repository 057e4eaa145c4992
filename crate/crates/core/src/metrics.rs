//! Screening evaluation criteria and the concordance statistic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survival::SurvivalResponse;

/// Quantile levels reported for the minimum model size.
pub const S_QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.50, 0.75, 0.95];

/// Feature ranking from one replication together with the true active set.
/// Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub omega_order: Vec<usize>,
    pub active_set: Vec<usize>,
}

impl ReplicationRecord {
    pub fn new(omega_order: Vec<usize>, active_set: Vec<usize>) -> Result<Self> {
        if active_set.is_empty() {
            return Err(Error::InvalidArgument("active set is empty".into()));
        }
        let p = omega_order.len();
        if let Some(&bad) = active_set.iter().find(|&&j| j >= p) {
            return Err(Error::InvalidArgument(format!(
                "active feature {bad} outside 0..{p}"
            )));
        }
        Ok(Self {
            omega_order,
            active_set,
        })
    }

    /// One-based position of every feature in the ranking.
    fn positions(&self) -> Vec<usize> {
        let mut pos = vec![usize::MAX; self.omega_order.len()];
        for (r, &k) in self.omega_order.iter().enumerate() {
            if k < pos.len() {
                pos[k] = r + 1;
            }
        }
        pos
    }
}

/// Smallest `d` whose top-`d` set contains every active feature.
pub fn min_model_size(rec: &ReplicationRecord) -> Result<usize> {
    let pos = rec.positions();
    rec.active_set
        .iter()
        .map(|&j| match pos.get(j) {
            Some(&r) if r != usize::MAX => Ok(r),
            _ => Err(Error::InvalidArgument(format!(
                "active feature {j} is missing from the ranking"
            ))),
        })
        .try_fold(0, |acc, r| r.map(|r| acc.max(r)))
}

/// Type-1 (inverse ECDF) sample quantile: the order statistic at one-based
/// index `ceil(q N)`, clamped to `[1, N]`.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyColumn);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "quantile level {q} outside [0, 1]"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let idx = ((q * n as f64).ceil() as usize).clamp(1, n);
    Ok(sorted[idx - 1])
}

/// Per-feature selection proportions `P_j` (aligned with the active set) and
/// the all-active proportion `P_a` at model size `d`.
pub fn selection_proportions(records: &[ReplicationRecord], d: usize) -> Result<(Vec<f64>, f64)> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidArgument("no replication records".into()))?;
    if d < 1 {
        return Err(Error::InvalidArgument(
            "model size must be at least 1".into(),
        ));
    }
    let active = &first.active_set;
    let mut hits = vec![0usize; active.len()];
    let mut all_hits = 0usize;
    for rec in records {
        if rec.active_set != *active {
            return Err(Error::InvalidArgument(
                "replication records disagree on the active set".into(),
            ));
        }
        let pos = rec.positions();
        let mut all = true;
        for (h, &j) in hits.iter_mut().zip(active) {
            if pos.get(j).is_some_and(|&r| r <= d) {
                *h += 1;
            } else {
                all = false;
            }
        }
        all_hits += all as usize;
    }
    let total = records.len() as f64;
    Ok((
        hits.into_iter().map(|h| h as f64 / total).collect(),
        all_hits as f64 / total,
    ))
}

/// Harrell's C: among pairs with `Y_i < Y_j` and `Delta_i = 1`, the fraction
/// where `risk_i > risk_j`, counting tied risks as one half.
///
/// Runs in `O(n log n)` with a Fenwick tree over risk ranks.
pub fn concordance(risk: &[f64], resp: &SurvivalResponse) -> Result<f64> {
    let n = resp.len();
    if risk.len() != n {
        return Err(Error::LengthMismatch {
            left: risk.len(),
            right: n,
        });
    }
    if let Some(i) = risk.iter().position(|r| !r.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let y = resp.y();
    let delta = resp.delta();

    // Dense ranks of risk, 1-based.
    let mut by_risk: Vec<usize> = (0..n).collect();
    by_risk.sort_by(|&a, &b| risk[a].total_cmp(&risk[b]));
    let mut dense = vec![0usize; n];
    let mut levels = 0;
    for (k, &i) in by_risk.iter().enumerate() {
        if k == 0 || risk[i] != risk[by_risk[k - 1]] {
            levels += 1;
        }
        dense[i] = levels;
    }

    // Walk times from largest to smallest; the tree holds subjects with a
    // strictly larger observed time.
    let mut by_time: Vec<usize> = (0..n).collect();
    by_time.sort_by(|&a, &b| y[b].total_cmp(&y[a]));
    let mut tree = Fenwick::new(levels);
    let (mut twice_concordant, mut comparable): (u128, u128) = (0, 0);
    let mut start = 0;
    while start < n {
        let t = y[by_time[start]];
        let mut end = start;
        while end < n && y[by_time[end]] == t {
            end += 1;
        }
        let later = tree.total();
        for &i in &by_time[start..end] {
            if delta[i] && later > 0 {
                let below = tree.prefix(dense[i] - 1);
                let tied = tree.prefix(dense[i]) - below;
                comparable += later as u128;
                twice_concordant += 2 * below as u128 + tied as u128;
            }
        }
        for &i in &by_time[start..end] {
            tree.add(dense[i]);
        }
        start = end;
    }
    if comparable == 0 {
        return Err(Error::NoComparablePairs);
    }
    Ok(twice_concordant as f64 / (2 * comparable) as f64)
}

struct Fenwick {
    counts: Vec<u64>,
    total: u64,
}

impl Fenwick {
    fn new(size: usize) -> Self {
        Self {
            counts: vec![0; size + 1],
            total: 0,
        }
    }

    fn add(&mut self, mut at: usize) {
        self.total += 1;
        while at < self.counts.len() {
            self.counts[at] += 1;
            at += at & at.wrapping_neg();
        }
    }

    fn prefix(&self, mut upto: usize) -> u64 {
        let mut s = 0;
        while upto > 0 {
            s += self.counts[upto];
            upto -= upto & upto.wrapping_neg();
        }
        s
    }

    fn total(&self) -> u64 {
        self.total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(order: &[usize], active: &[usize]) -> ReplicationRecord {
        ReplicationRecord::new(order.to_vec(), active.to_vec()).unwrap()
    }

    #[test]
    fn model_size_examples() {
        // One-based [3,1,2] with active {3}.
        assert_eq!(min_model_size(&rec(&[2, 0, 1], &[2])).unwrap(), 1);
        // One-based [5,2,9,1,7,...] with active {2,7}.
        let order = [4, 1, 8, 0, 6, 2, 3, 5, 7];
        assert_eq!(min_model_size(&rec(&order, &[1, 6])).unwrap(), 5);
    }

    #[test]
    fn record_validation() {
        assert!(ReplicationRecord::new(vec![0, 1], vec![]).is_err());
        assert!(ReplicationRecord::new(vec![0, 1], vec![2]).is_err());
        // Not a permutation: feature 1 never ranked.
        let bad = ReplicationRecord {
            omega_order: vec![0, 0],
            active_set: vec![1],
        };
        assert!(min_model_size(&bad).is_err());
    }

    #[test]
    fn quantile_rule() {
        assert_eq!(quantile(&[5.0; 4], 0.5).unwrap(), 5.0);
        let seq: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(quantile(&seq, 0.25).unwrap(), 25.0);
        assert_eq!(quantile(&seq, 0.0).unwrap(), 1.0);
        assert_eq!(quantile(&seq, 1.0).unwrap(), 100.0);
        assert_eq!(quantile(&[7.0], 0.95).unwrap(), 7.0);
        assert!(quantile(&[], 0.5).is_err());
    }

    #[test]
    fn proportions_edge_cases() {
        let records = vec![rec(&[2, 0, 1], &[0, 1]), rec(&[0, 1, 2], &[0, 1])];
        let (pj, pa) = selection_proportions(&records, 3).unwrap();
        assert_eq!((pj, pa), (vec![1.0, 1.0], 1.0));
        let (pj, pa) = selection_proportions(&records, 1).unwrap();
        assert_eq!(pa, 0.0);
        assert_eq!(pj, vec![0.5, 0.0]);
        let mixed = vec![rec(&[0, 1], &[0]), rec(&[0, 1], &[1])];
        assert!(selection_proportions(&mixed, 1).is_err());
        assert!(selection_proportions(&[], 1).is_err());
    }

    #[test]
    fn concordance_extremes() {
        let y = [1.0, 2.0, 3.0, 4.0, 5.0];
        let resp = SurvivalResponse::new(y.to_vec(), vec![true; 5]).unwrap();
        let anti: Vec<f64> = y.iter().map(|t| -t).collect();
        assert_eq!(concordance(&anti, &resp).unwrap(), 1.0);
        assert_eq!(concordance(&y, &resp).unwrap(), 0.0);
        assert_eq!(concordance(&[2.0; 5], &resp).unwrap(), 0.5);
    }

    #[test]
    fn concordance_without_usable_pairs() {
        // The only event is at the largest time.
        let resp = SurvivalResponse::new(vec![1.0, 2.0], vec![false, true]).unwrap();
        assert!(matches!(
            concordance(&[0.0, 1.0], &resp),
            Err(Error::NoComparablePairs)
        ));
    }
}
