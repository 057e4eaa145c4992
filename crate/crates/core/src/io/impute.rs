//! Weighted K-nearest-neighbour imputation of missing feature cells.
//!
//! Distance between rows `i` and `j` is `sqrt(sum (x_ic - x_jc)^2 / s)` over
//! the `s` features observed in both rows. A missing cell `(i, k)` takes the
//! inverse-distance weighted mean of feature `k` over the `K` closest rows that
//! observe it; if any of those rows sits at distance zero, the mean of the
//! zero-distance values is used instead.

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

use super::table::RawTable;

/// Short description recorded in output metadata.
pub const KNN_KERNEL: &str =
    "inverse-distance weights; euclidean distance over shared observed features divided by their count";

fn distance(a: ArrayView1<'_, Option<f64>>, b: ArrayView1<'_, Option<f64>>) -> Option<f64> {
    let mut ss = 0.0;
    let mut shared = 0usize;
    for (x, y) in a.iter().zip(b.iter()) {
        if let (Some(x), Some(y)) = (x, y) {
            ss += (x - y) * (x - y);
            shared += 1;
        }
    }
    (shared > 0).then(|| (ss / shared as f64).sqrt())
}

/// Fills every missing cell; complete tables come back unchanged.
pub fn knn_impute(table: &RawTable, k: usize) -> Result<Array2<f64>> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let x = &table.features;
    let (n, p) = x.dim();
    if let Some(i) = (0..n).find(|&i| x.row(i).iter().all(Option::is_none)) {
        return Err(Error::Data(format!("row {i} has no observed features")));
    }
    let mut out = x.mapv(|c| c.unwrap_or(f64::NAN));
    let mut dist: Vec<Option<f64>> = vec![None; n];
    let mut donors: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        let row = x.row(i);
        if row.iter().all(Option::is_some) {
            continue;
        }
        for j in 0..n {
            dist[j] = if j == i {
                None
            } else {
                distance(row, x.row(j))
            };
        }
        for f in (0..p).filter(|&f| row[f].is_none()) {
            donors.clear();
            donors.extend((0..n).filter_map(|j| match (dist[j], x[[j, f]]) {
                (Some(d), Some(_)) => Some((d, j)),
                _ => None,
            }));
            if donors.is_empty() {
                return Err(Error::NoImputationDonor { row: i, feature: f });
            }
            donors.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            donors.truncate(k);
            let value = |j: usize| x[[j, f]].expect("donor observes the feature");
            let exact: Vec<f64> = donors
                .iter()
                .filter(|d| d.0 == 0.0)
                .map(|d| value(d.1))
                .collect();
            out[[i, f]] = if exact.is_empty() {
                let (num, den) = donors.iter().fold((0.0, 0.0), |(num, den), &(d, j)| {
                    (num + value(j) / d, den + 1.0 / d)
                });
                num / den
            } else {
                exact.iter().sum::<f64>() / exact.len() as f64
            };
        }
    }
    Ok(out)
}
