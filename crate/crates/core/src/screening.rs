//! Marginal screening by the symmetrized revised Chatterjee correlation.
//!
//! For feature `k` the utility is
//!
//! ```text
//! omega_k = max{ xi_{n,M}(F_k(X_k), S(T)), xi_{n,M}(S(T), F_k(X_k)) }
//! ```
//!
//! with `F_k` the empirical CDF of the feature and `S` the Kaplan–Meier curve
//! evaluated at the observed times. Both plug-ins enter only through their
//! ranks: the ECDF ranks of `X_k` are the ranks of `X_k` itself, and the
//! survival curve is ranked by `S(Y_i)` itself (descending in observed time),
//! with ties among censored subjects broken at random. The response side is
//! therefore ranked once per screen and shared by every feature.
//!
//! The orientation matters. `xi_{n,M}` is not invariant under reversing one
//! argument: the fallback `j_m(i) = i` at the right boundary adds a term that
//! favours increasing dependence. A feature that shortens survival is
//! increasing in `S(Y)`, so it is scored on the favourable side.

use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rank::{self, RankedColumn};
use crate::seed;
use crate::survival::{km_survival, KmCurve, SurvivalResponse};

const RESPONSE_SALT: u64 = 0x5355_5256_4956; // "SURVIV"

/// How the neighbour count `M` is derived from the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum NeighborRule {
    /// `max(1, round(c * sqrt(n)))`.
    Auto(f64),
    /// `max(1, floor(sqrt(n)) + offset)`.
    SqrtOffset(i64),
    Fixed(usize),
}

impl Default for NeighborRule {
    fn default() -> Self {
        NeighborRule::Auto(1.0)
    }
}

fn floor_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

impl NeighborRule {
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let m = match *self {
            NeighborRule::Auto(c) => {
                if !(c.is_finite() && c > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "neighbor multiplier must be positive, got {c}"
                    )));
                }
                ((c * (n as f64).sqrt()).round() as usize).max(1).min(n)
            }
            NeighborRule::SqrtOffset(k) => {
                (floor_sqrt(n) as i64 + k).clamp(1, n.max(1) as i64) as usize
            }
            NeighborRule::Fixed(m) => m,
        };
        if m == 0 || m > n {
            return Err(Error::InvalidNeighborCount { m, n });
        }
        Ok(m)
    }

    /// The three variants used in the benchmark tables:
    /// `floor(sqrt(n)) - 1`, `floor(sqrt(n))`, `floor(sqrt(n)) + 1`.
    pub fn benchmark_variants() -> [(String, NeighborRule); 3] {
        [
            ("XIM-SIS1".to_string(), NeighborRule::SqrtOffset(-1)),
            ("XIM-SIS2".to_string(), NeighborRule::SqrtOffset(0)),
            ("XIM-SIS3".to_string(), NeighborRule::SqrtOffset(1)),
        ]
    }
}

impl fmt::Display for NeighborRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NeighborRule::Auto(c) => write!(f, "auto:{c}"),
            NeighborRule::SqrtOffset(0) => write!(f, "sqrt"),
            NeighborRule::SqrtOffset(k) => write!(f, "sqrt{k:+}"),
            NeighborRule::Fixed(m) => write!(f, "fixed:{m}"),
        }
    }
}

impl FromStr for NeighborRule {
    type Err = Error;

    /// Accepts `auto:C`, `fixed:M`, `sqrt`, `sqrt+K` and `sqrt-K`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unrecognized neighbor rule {s:?}"));
        let s = s.trim();
        if let Some(c) = s.strip_prefix("auto:") {
            return c.parse().map(NeighborRule::Auto).map_err(|_| bad());
        }
        if let Some(m) = s.strip_prefix("fixed:") {
            return m.parse().map(NeighborRule::Fixed).map_err(|_| bad());
        }
        if s == "auto" {
            return Ok(NeighborRule::Auto(1.0));
        }
        if let Some(rest) = s.strip_prefix("sqrt") {
            if rest.is_empty() {
                return Ok(NeighborRule::SqrtOffset(0));
            }
            let offset: i64 = rest.trim_start_matches('+').parse().map_err(|_| bad())?;
            return Ok(NeighborRule::SqrtOffset(offset));
        }
        Err(bad())
    }
}

impl TryFrom<String> for NeighborRule {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NeighborRule> for String {
    fn from(rule: NeighborRule) -> String {
        rule.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    /// Keep the `d` largest utilities.
    TopD(usize),
    /// Keep every feature with `omega >= gamma`.
    Threshold(f64),
    /// `TopD(ceil(n / ln n))`.
    DefaultModelSize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningConfig {
    pub neighbors: NeighborRule,
    pub selection: Selection,
    pub tie_seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl Default for ScreeningConfig {
    fn default() -> Self {
        Self {
            neighbors: NeighborRule::default(),
            selection: Selection::DefaultModelSize,
            tie_seed: 0,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningResult {
    /// Utility per feature, in column order.
    pub omega: Vec<f64>,
    /// Zero-based feature indices sorted by descending utility, ties by index.
    pub order: Vec<usize>,
    /// Selected features in rank order.
    pub selected: Vec<usize>,
    pub m_used: usize,
    /// Constant features, scored as zero.
    pub degenerate: Vec<usize>,
}

/// `(d1, d2) = (ceil(n / ln n), n - 1)`.
pub fn default_model_sizes(n: usize) -> Result<(usize, usize)> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "model sizes need n >= 3, got {n}"
        )));
    }
    let d1 = (n as f64 / (n as f64).ln()).ceil() as usize;
    Ok((d1, n - 1))
}

/// Kaplan–Meier curve and its tie-broken ranking, computed once per response.
#[derive(Debug, Clone)]
pub struct PreparedResponse {
    km: KmCurve,
    ranks: RankedColumn,
}

impl PreparedResponse {
    pub fn new(resp: &SurvivalResponse, tie_seed: u64) -> Result<Self> {
        let km = km_survival(resp);
        let ranks = rank::rank_vector(km.at_observed(), seed::derive(tie_seed, RESPONSE_SALT))?;
        Ok(Self { km, ranks })
    }

    pub fn km(&self) -> &KmCurve {
        &self.km
    }

    pub fn ranks(&self) -> &RankedColumn {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// `(xi(F_k, S), xi(S, F_k))`, or `None` when either side is constant.
    pub fn directed_xis(&self, xk: &[f64], m: usize, tie_seed: u64) -> Result<Option<(f64, f64)>> {
        let mut scratch = Vec::with_capacity(xk.len());
        self.directed_with(xk, m, tie_seed, &mut scratch)
    }

    fn directed_with(
        &self,
        xk: &[f64],
        m: usize,
        tie_seed: u64,
        scratch: &mut Vec<u32>,
    ) -> Result<Option<(f64, f64)>> {
        let n = self.len();
        if xk.len() != n {
            return Err(Error::LengthMismatch {
                left: xk.len(),
                right: n,
            });
        }
        if n < 2 {
            return Err(Error::DegenerateSample(n));
        }
        if m == 0 || m > n {
            return Err(Error::InvalidNeighborCount { m, n });
        }
        let xr = rank::rank_vector(xk, tie_seed)?;
        if xr.is_constant() || self.ranks.is_constant() {
            return Ok(None);
        }
        let x_to_s = rank::neighbor_min_sum(xr.order(), self.ranks.ranks(), m, scratch);
        let s_to_x = rank::neighbor_min_sum(self.ranks.order(), xr.ranks(), m, scratch);
        Ok(Some((
            rank::xi_from_sum(x_to_s, n, m),
            rank::xi_from_sum(s_to_x, n, m),
        )))
    }

    /// `omega_k`, or `None` for a degenerate (constant) feature.
    pub fn omega(&self, xk: &[f64], m: usize, tie_seed: u64) -> Result<Option<f64>> {
        Ok(self.directed_xis(xk, m, tie_seed)?.map(|(a, b)| a.max(b)))
    }
}

/// The screening utility of a single feature. Constant features score 0.
pub fn omega_hat(xk: &[f64], resp: &SurvivalResponse, m: usize, tie_seed: u64) -> Result<f64> {
    let prepared = PreparedResponse::new(resp, tie_seed)?;
    match prepared.omega(xk, m, tie_seed)? {
        Some(w) => Ok(w),
        None => {
            log::warn!("constant feature: utility set to 0");
            Ok(0.0)
        }
    }
}

/// Tie-break seed of column `k` under base seed `base`.
pub fn column_seed(base: u64, k: usize) -> u64 {
    base ^ k as u64
}

/// Scores every column of `x` (`n x p`) and applies the selection rule.
///
/// Column `k` is ranked with [`column_seed`]`(cfg.tie_seed, k)`, so results do
/// not depend on how columns are distributed over workers.
pub fn screen(
    x: ArrayView2<'_, f64>,
    resp: &SurvivalResponse,
    cfg: &ScreeningConfig,
) -> Result<ScreeningResult> {
    let (n, p) = x.dim();
    if n != resp.len() {
        return Err(Error::DimensionMismatch(format!(
            "covariate matrix has {n} rows but the response has {}",
            resp.len()
        )));
    }
    if p == 0 {
        return Err(Error::DimensionMismatch("no feature columns".into()));
    }
    let m = cfg.neighbors.resolve(n)?;
    let prepared = PreparedResponse::new(resp, cfg.tie_seed)?;

    let score = |k: usize, scratch: &mut (Vec<f64>, Vec<u32>)| -> Result<Option<f64>> {
        let col = x.column(k);
        let values = match col.as_slice() {
            Some(s) => s,
            None => {
                scratch.0.clear();
                scratch.0.extend(col.iter().copied());
                &scratch.0
            }
        };
        Ok(prepared
            .directed_with(values, m, column_seed(cfg.tie_seed, k), &mut scratch.1)?
            .map(|(a, b)| a.max(b)))
    };

    let scored: Vec<Result<Option<f64>>> = if cfg.workers == 1 {
        let mut scratch = (Vec::new(), Vec::new());
        (0..p).map(|k| score(k, &mut scratch)).collect()
    } else {
        let run = || {
            (0..p)
                .into_par_iter()
                .map_init(|| (Vec::new(), Vec::new()), |s, k| score(k, s))
                .collect()
        };
        if cfg.workers == 0 {
            run()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?
                .install(run)
        }
    };

    let mut omega = Vec::with_capacity(p);
    let mut degenerate = Vec::new();
    for (k, s) in scored.into_iter().enumerate() {
        match s? {
            Some(w) => omega.push(w),
            None => {
                degenerate.push(k);
                omega.push(0.0);
            }
        }
    }
    if !degenerate.is_empty() {
        log::warn!(
            "{} constant feature(s) scored as 0 (first: column {})",
            degenerate.len(),
            degenerate[0]
        );
    }

    let order = rank_order(&omega);
    let selected = select(&omega, &order, cfg.selection, n);
    Ok(ScreeningResult {
        omega,
        order,
        selected,
        m_used: m,
        degenerate,
    })
}

/// Feature indices by descending utility, ties by ascending index.
pub fn rank_order(omega: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..omega.len()).collect();
    order.sort_by(|&a, &b| omega[b].total_cmp(&omega[a]).then(a.cmp(&b)));
    order
}

fn select(omega: &[f64], order: &[usize], selection: Selection, n: usize) -> Vec<usize> {
    let p = order.len();
    let top = |d: usize| {
        let d = if d < 1 || d > p {
            log::warn!("model size {d} outside [1, {p}]; keeping all {p} features");
            p
        } else {
            d
        };
        order[..d].to_vec()
    };
    match selection {
        Selection::TopD(d) => top(d),
        Selection::DefaultModelSize => top(default_model_sizes(n.max(3))
            .map(|(d1, _)| d1)
            .unwrap_or(p)
            .min(p)),
        Selection::Threshold(gamma) => order
            .iter()
            .copied()
            .take_while(|&k| omega[k] >= gamma)
            .collect(),
    }
}
