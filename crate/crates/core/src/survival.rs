//! Kaplan–Meier estimation for right-censored responses.

use crate::error::{Error, Result};

/// Observed times `Y_i = min(T_i, C_i)` with event indicators `Delta_i = 1(T_i <= C_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalResponse {
    y: Vec<f64>,
    delta: Vec<bool>,
}

impl SurvivalResponse {
    pub fn new(y: Vec<f64>, delta: Vec<bool>) -> Result<Self> {
        if y.len() != delta.len() {
            return Err(Error::LengthMismatch {
                left: y.len(),
                right: delta.len(),
            });
        }
        if y.len() < 2 {
            return Err(Error::DegenerateSample(y.len()));
        }
        if let Some(i) = y.iter().position(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidResponse(format!(
                "observed time at row {i} must be finite and positive, got {}",
                y[i]
            )));
        }
        if !delta.iter().any(|&d| d) {
            return Err(Error::NoEvents);
        }
        Ok(Self { y, delta })
    }

    /// Builds a response from 0/1 indicators.
    pub fn from_indicators(y: Vec<f64>, delta: &[u8]) -> Result<Self> {
        let delta = delta
            .iter()
            .enumerate()
            .map(|(i, &d)| match d {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidResponse(format!(
                    "status must be 0/1, got {other} at row {i}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(y, delta)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn delta(&self) -> &[bool] {
        &self.delta
    }

    pub fn censoring_rate(&self) -> f64 {
        censoring_rate(&self.delta).expect("response is nonempty")
    }

    /// Reorders subjects; `perm[i]` is the source row of new row `i`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: perm.len(),
                right: self.len(),
            });
        }
        Self::new(
            perm.iter().map(|&i| self.y[i]).collect(),
            perm.iter().map(|&i| self.delta[i]).collect(),
        )
    }
}

/// Fraction of censored observations, `(1/n) sum_i (1 - Delta_i)`.
pub fn censoring_rate(delta: &[bool]) -> Result<f64> {
    if delta.is_empty() {
        return Err(Error::EmptyColumn);
    }
    let censored = delta.iter().filter(|&&d| !d).count();
    Ok(censored as f64 / delta.len() as f64)
}

/// Right-continuous product-limit curve.
#[derive(Debug, Clone, PartialEq)]
pub struct KmCurve {
    at_observed: Vec<f64>,
    times: Vec<f64>,
    steps: Vec<f64>,
}

impl KmCurve {
    /// `S(Y_i)` aligned with the response rows.
    pub fn at_observed(&self) -> &[f64] {
        &self.at_observed
    }

    /// Distinct observed times, ascending.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `S(t)` at each entry of [`KmCurve::times`].
    pub fn values(&self) -> &[f64] {
        &self.steps
    }

    /// `S(t)` for arbitrary `t`; 1 before the first observed time.
    pub fn eval(&self, t: f64) -> f64 {
        match self.times.partition_point(|&s| s <= t) {
            0 => 1.0,
            k => self.steps[k - 1],
        }
    }
}

/// `S(t) = prod_{t_j <= t} (1 - d_j / r_j)` over distinct event times, with
/// `r_j = #{i : Y_i >= t_j}`.
///
/// Events at a tied time are counted before censorings at that time. Runs of
/// times without censoring telescope, so each run is evaluated as a single
/// ratio; with no censoring at all `S(Y_(k))` is exactly `(n - k) / n`.
pub fn km_survival(resp: &SurvivalResponse) -> KmCurve {
    let n = resp.len();
    let y = resp.y();
    let delta = resp.delta();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b)));

    let mut times = Vec::new();
    let mut steps = Vec::new();
    let mut at_observed = vec![0.0; n];

    // Survival at the start of the current censoring-free run, and the risk
    // set size when that run began.
    let mut run_factor = 1.0;
    let mut run_risk = n;
    let mut at_risk = n;
    let mut start = 0;
    while start < n {
        let t = y[idx[start]];
        let mut end = start;
        let mut events = 0;
        while end < n && y[idx[end]] == t {
            events += delta[idx[end]] as usize;
            end += 1;
        }
        let censored = (end - start) - events;
        let survivors = at_risk - events;
        let s = run_factor * (survivors as f64 / run_risk as f64);
        times.push(t);
        steps.push(s);
        for &i in &idx[start..end] {
            at_observed[i] = s;
        }
        at_risk = survivors - censored;
        if censored > 0 {
            run_factor = s;
            run_risk = at_risk;
        }
        start = end;
    }
    KmCurve {
        at_observed,
        times,
        steps,
    }
}
