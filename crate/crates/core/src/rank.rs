//! Rank machinery and the revised Chatterjee rank correlation `xi_{n,M}`.
//!
//! For a sample `(U_i, V_i)`, let `R_i` be the rank of `V_i` and `j_m(i)` the
//! index of the `m`-th right nearest neighbour of `U_i` (the sample point whose
//! `U` value is the `m`-th smallest among those strictly greater than `U_i`,
//! or `i` itself when fewer than `m` such points exist). Then
//!
//! ```text
//! xi_{n,M} = -2 + 6 * sum_i sum_{m<=M} min(R_i, R_{j_m(i)}) / ((n + 1) (n M + M (M + 1) / 4))
//! ```
//!
//! Ties are broken uniformly at random from an explicit seed, so every ranking
//! is a permutation of `1..=n` and every result is reproducible.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seed;

const V_RANK_SALT: u64 = 0x5652_414e_4b53; // "VRANKS"

/// A column reduced to tie-broken ranks `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedColumn {
    ranks: Vec<usize>,
    order: Vec<usize>,
    tie_seed: u64,
    distinct: usize,
}

impl RankedColumn {
    /// One-based ranks, aligned with the input.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Sample indices sorted by rank: `order()[r - 1]` has rank `r`.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn tie_seed(&self) -> u64 {
        self.tie_seed
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Number of distinct values before tie breaking.
    pub fn distinct_values(&self) -> usize {
        self.distinct
    }

    /// True when every input value was equal (before tie breaking).
    pub fn is_constant(&self) -> bool {
        self.distinct == 1
    }
}

/// Ranks `values` as `R_i = #{j : V_j <= V_i}` after a seeded uniform random
/// ordering of tied values.
pub fn rank_vector(values: &[f64], tie_seed: u64) -> Result<RankedColumn> {
    if values.is_empty() {
        return Err(Error::EmptyColumn);
    }
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(pos));
    }
    let n = values.len();
    let mut keyed: Vec<(f64, usize)> = values.iter().copied().zip(0..n).collect();
    keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut order: Vec<usize> = keyed.iter().map(|&(_, i)| i).collect();
    let mut distinct = 0;
    let mut rng: Option<ChaCha8Rng> = None;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && keyed[end].0 == keyed[start].0 {
            end += 1;
        }
        distinct += 1;
        if end - start > 1 {
            let rng = rng.get_or_insert_with(|| ChaCha8Rng::seed_from_u64(tie_seed));
            order[start..end].shuffle(rng);
        }
        start = end;
    }

    let mut ranks = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    Ok(RankedColumn {
        ranks,
        order,
        tie_seed,
        distinct,
    })
}

/// Right nearest neighbour indices `j_m(i)` for `m = 1..=M`, zero-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborTable {
    indices: Vec<usize>,
    n: usize,
    m: usize,
}

impl NeighborTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbor_count(&self) -> usize {
        self.m
    }

    /// `j_m(i)` for `m` in `1..=M`.
    pub fn neighbor(&self, i: usize, m: usize) -> usize {
        assert!(
            (1..=self.m).contains(&m),
            "neighbor order {m} outside 1..={}",
            self.m
        );
        self.indices[i * self.m + (m - 1)]
    }

    /// `[j_1(i), ..., j_M(i)]`.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.indices[i * self.m..(i + 1) * self.m]
    }
}

fn check_neighbor_count(m: usize, n: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::InvalidNeighborCount { m, n });
    }
    Ok(())
}

/// Builds the neighbour table from the `U` ranking in `O(n M)`.
pub fn right_neighbors(u_ranks: &RankedColumn, m: usize) -> Result<NeighborTable> {
    let n = u_ranks.len();
    check_neighbor_count(m, n)?;
    let order = u_ranks.order();
    let mut indices = Vec::with_capacity(n * m);
    for i in 0..n {
        let pos = u_ranks.ranks()[i] - 1;
        for step in 1..=m {
            indices.push(order.get(pos + step).copied().unwrap_or(i));
        }
    }
    Ok(NeighborTable { indices, n, m })
}

/// `sum_i sum_{m<=M} min(R_i, R_{j_m(i)})` for a `U` ordering and `V` ranks.
///
/// `scratch` is reused across calls to avoid reallocating in hot loops.
pub(crate) fn neighbor_min_sum(
    u_order: &[usize],
    v_ranks: &[usize],
    m: usize,
    scratch: &mut Vec<u32>,
) -> u64 {
    let n = u_order.len();
    scratch.clear();
    scratch.extend(u_order.iter().map(|&i| v_ranks[i] as u32));
    let w = scratch.as_slice();
    let mut total: u64 = 0;
    for pos in 0..n {
        let r = w[pos];
        let last = (pos + m).min(n - 1);
        let mut acc: u64 = 0;
        for &other in &w[pos + 1..=last] {
            acc += r.min(other) as u64;
        }
        // j_m(i) = i past the largest U value.
        acc += (pos + m - last) as u64 * r as u64;
        total += acc;
    }
    total
}

/// Maps the neighbour-min sum to `xi_{n,M}` with a single rounding:
/// `xi = (24 S - 2 D) / D` where `D = (n + 1)(4 n M + M (M + 1))`.
pub(crate) fn xi_from_sum(sum: u64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as i128, m as i128);
    let den = (n + 1) * (4 * n * m + m * (m + 1));
    let num = 24 * sum as i128 - 2 * den;
    num as f64 / den as f64
}

/// `xi_{n,M}` from two precomputed rankings.
///
/// Fails with [`Error::ConstantColumn`] when `v` was constant before tie
/// breaking.
pub fn xi_from_ranked(u: &RankedColumn, v: &RankedColumn, m: usize) -> Result<f64> {
    let n = check_pair(u.len(), v.len(), m)?;
    if v.is_constant() {
        return Err(Error::ConstantColumn);
    }
    let mut scratch = Vec::with_capacity(n);
    let sum = neighbor_min_sum(u.order(), v.ranks(), m, &mut scratch);
    Ok(xi_from_sum(sum, n, m))
}

fn check_pair(nu: usize, nv: usize, m: usize) -> Result<usize> {
    if nu != nv {
        return Err(Error::LengthMismatch {
            left: nu,
            right: nv,
        });
    }
    if nu < 2 {
        return Err(Error::DegenerateSample(nu));
    }
    check_neighbor_count(m, nu)?;
    Ok(nu)
}

fn rank_pair(
    u: &[f64],
    v: &[f64],
    m: usize,
    tie_seed: u64,
) -> Result<(RankedColumn, RankedColumn)> {
    check_pair(u.len(), v.len(), m)?;
    let ur = rank_vector(u, tie_seed)?;
    let vr = rank_vector(v, seed::derive(tie_seed, V_RANK_SALT))?;
    Ok((ur, vr))
}

/// The revised Chatterjee rank correlation of `v` on `u` with `m` right
/// nearest neighbours.
pub fn xi_nm(u: &[f64], v: &[f64], m: usize, tie_seed: u64) -> Result<f64> {
    let (ur, vr) = rank_pair(u, v, m, tie_seed)?;
    xi_from_ranked(&ur, &vr, m)
}

/// `xi_{n,M}` split into its empirical-process parts.
///
/// With `F_n(V_i) = R_i / n` and `G_n(V_i) = #{j : V_j >= V_i} / n`:
///
/// ```text
/// Q_{n,M} = (1 / nM) sum_i sum_m min(F_n(V_i), F_n(V_{j_m(i)})) - (1/n) sum_i G_n(V_i)^2
/// U_n     = (1/n) sum_i G_n(V_i) (1 - G_n(V_i))
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiDecomposition {
    pub q_nm: f64,
    pub u_n: f64,
    pub xi_nm: f64,
    pub n: usize,
    pub m_neighbors: usize,
}

impl XiDecomposition {
    /// `4(n-1)/(4n+M+1) * Q/U - 2(M-1)/(4n+M+1)`; equals `xi_nm` up to rounding.
    pub fn reconstructed_xi(&self) -> f64 {
        let n = self.n as f64;
        let m = self.m_neighbors as f64;
        let den = 4.0 * n + m + 1.0;
        4.0 * (n - 1.0) / den * (self.q_nm / self.u_n) - 2.0 * (m - 1.0) / den
    }

    pub fn identity_residual(&self) -> f64 {
        (self.reconstructed_xi() - self.xi_nm).abs()
    }
}

pub fn xi_decompose(u: &[f64], v: &[f64], m: usize, tie_seed: u64) -> Result<XiDecomposition> {
    let (ur, vr) = rank_pair(u, v, m, tie_seed)?;
    let xi = xi_from_ranked(&ur, &vr, m)?;
    let n = ur.len();
    let mut scratch = Vec::with_capacity(n);
    let sum_min = neighbor_min_sum(ur.order(), vr.ranks(), m, &mut scratch) as i128;

    // G_n(V_i) * n = n - R_i + 1 on tie-broken ranks.
    let (mut sum_g2, mut sum_g_1mg): (i128, i128) = (0, 0);
    for &r in vr.ranks() {
        let g = (n - r + 1) as i128;
        sum_g2 += g * g;
        sum_g_1mg += g * (n as i128 - g);
    }
    let (ni, mi) = (n as i128, m as i128);
    let n3 = ni * ni * ni;
    let q_nm = (sum_min * ni - mi * sum_g2) as f64 / (n3 * mi) as f64;
    let u_n = sum_g_1mg as f64 / n3 as f64;
    Ok(XiDecomposition {
        q_nm,
        u_n,
        xi_nm: xi,
        n,
        m_neighbors: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `R_i = sum_j 1(V_j <= V_i)` and `j_m(i)` by literal counting; distinct
    /// inputs only.
    fn definitional_xi(u: &[f64], v: &[f64], m: usize) -> f64 {
        let n = u.len();
        let ranks: Vec<usize> = (0..n)
            .map(|i| (0..n).filter(|&j| v[j] <= v[i]).count())
            .collect();
        let mut total = 0usize;
        for i in 0..n {
            for step in 1..=m {
                let j = (0..n)
                    .find(|&j| (0..n).filter(|&k| u[i] < u[k] && u[k] <= u[j]).count() == step)
                    .unwrap_or(i);
                total += ranks[i].min(ranks[j]);
            }
        }
        let (nf, mf) = (n as f64, m as f64);
        -2.0 + 6.0 * total as f64 / ((nf + 1.0) * (nf * mf + mf * (mf + 1.0) / 4.0))
    }

    #[test]
    fn distinct_values_rank_directly() {
        let r = rank_vector(&[3.1, 1.2, 2.7], 99).unwrap();
        assert_eq!(r.ranks(), &[3, 1, 2]);
        assert_eq!(r.order(), &[1, 2, 0]);
        assert_eq!(rank_vector(&[5.0], 0).unwrap().ranks(), &[1]);
    }

    #[test]
    fn empty_column_is_rejected() {
        let err = rank_vector(&[], 0).unwrap_err();
        assert_eq!(err.to_string(), "empty column");
        assert!(matches!(
            rank_vector(&[1.0, f64::NAN], 0),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn ties_resolve_to_admissible_orders() {
        // The only admissible tie-broken rankings of [2, 2, 1].
        let admissible = [[2, 3, 1], [3, 2, 1]];
        let mut seen = [0usize; 2];
        for seed in 0..400u64 {
            let r = rank_vector(&[2.0, 2.0, 1.0], seed).unwrap();
            let idx = admissible
                .iter()
                .position(|a| a.as_slice() == r.ranks())
                .expect("tie break produced an inadmissible ranking");
            seen[idx] += 1;
            assert_eq!(r, rank_vector(&[2.0, 2.0, 1.0], seed).unwrap());
        }
        // Both orders occur with roughly equal frequency.
        assert!(seen[0] > 140 && seen[1] > 140, "{seen:?}");
    }

    #[test]
    fn constant_detection_happens_before_tie_breaking() {
        let r = rank_vector(&[4.0, 4.0, 4.0], 3).unwrap();
        assert!(r.is_constant());
        let mut sorted = r.ranks().to_vec();
        sorted.sort();
        assert_eq!(sorted, vec![1, 2, 3]);
        assert!(matches!(
            xi_nm(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0], 1, 0),
            Err(Error::ConstantColumn)
        ));
    }

    #[test]
    fn neighbors_on_sorted_input() {
        let u = rank_vector(&[1.0, 2.0, 3.0], 0).unwrap();
        let t = right_neighbors(&u, 1).unwrap();
        assert_eq!(
            (0..3).map(|i| t.neighbor(i, 1)).collect::<Vec<_>>(),
            vec![1, 2, 2]
        );

        let u = rank_vector(&[1.0, 2.0, 3.0, 4.0], 0).unwrap();
        let t = right_neighbors(&u, 2).unwrap();
        assert_eq!(t.row(0), &[1, 2]);
        assert_eq!(t.row(2), &[3, 2]);
        assert_eq!(t.row(3), &[3, 3]);
    }

    #[test]
    fn neighbor_count_is_validated() {
        let u = rank_vector(&[1.0, 2.0, 3.0], 0).unwrap();
        for m in [0, 4] {
            let err = right_neighbors(&u, m).unwrap_err();
            assert!(err.to_string().starts_with("invalid neighbor count"));
        }
    }

    #[test]
    fn neighbors_match_pair_counting_scan() {
        let u = [5.0, 2.0, 8.0, 1.0, 7.0, 3.0, 6.0, 4.0];
        let r = rank_vector(&u, 0).unwrap();
        let m = 3;
        let table = right_neighbors(&r, m).unwrap();
        let n = u.len();
        for i in 0..n {
            for step in 1..=m {
                let expect = (0..n)
                    .find(|&j| (0..n).filter(|&k| u[i] < u[k] && u[k] <= u[j]).count() == step)
                    .unwrap_or(i);
                assert_eq!(table.neighbor(i, step), expect, "i={i} m={step}");
            }
        }
    }

    #[test]
    fn perfect_monotone_dependence_closed_form() {
        let u = [0.3, 1.7, -2.0, 4.4, 0.9];
        let v: Vec<f64> = u.iter().map(|x| x * 3.0 + 1.0).collect();
        assert_eq!(xi_nm(&u, &v, 1, 0).unwrap(), 8.0 / 11.0);
    }

    #[test]
    fn matches_definitional_formula() {
        let u = [0.11, 0.93, 0.42, 0.27, 0.65, 0.08, 0.77, 0.35, 0.51, 0.19];
        let v = [0.7, 0.2, 0.9, 0.15, 0.66, 0.31, 0.05, 0.48, 0.83, 0.59];
        let got = xi_nm(&u, &v, 3, 0).unwrap();
        assert!((got - definitional_xi(&u, &v, 3)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            xi_nm(&[1.0], &[2.0], 1, 0),
            Err(Error::DegenerateSample(1))
        ));
        assert!(matches!(
            xi_nm(&[1.0, 2.0], &[2.0], 1, 0),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn decomposition_for_monotone_pair() {
        let u = [1.0, 2.0, 3.0, 4.0, 5.0];
        let d = xi_decompose(&u, &u, 1, 0).unwrap();
        assert_eq!(d.xi_nm, 8.0 / 11.0);
        assert!(d.identity_residual() < 1e-12);
        assert_eq!(d.u_n, 24.0 / 150.0);
    }

    #[test]
    fn u_n_closed_form_at_ten() {
        let u: Vec<f64> = (0..10).map(|i| (i * 7 % 10) as f64).collect();
        let v: Vec<f64> = (0..10).map(|i| (i * 3 % 10) as f64 + 0.5).collect();
        let d = xi_decompose(&u, &v, 2, 1).unwrap();
        assert_eq!(d.u_n, 0.165);
    }
}
