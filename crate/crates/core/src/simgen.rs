//! Generators for the four benchmark survival designs.
//!
//! Covariates are Gaussian with either AR(1) (`rho^|i-j|`) or compound
//! symmetry covariance, produced by exact streaming recursions so that no
//! `p x p` matrix is formed. Censoring is `Unif(0, c)` with `c` calibrated
//! once per scenario to hit a target censoring rate.

use ndarray::{Array2, ArrayView2, ShapeBuilder};
use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::survival::SurvivalResponse;

pub const DEFAULT_CALIBRATION_TOL: f64 = 0.005;
pub const DEFAULT_PILOT_N: usize = 200_000;
const CALIBRATION_STREAM: u64 = u64::MAX;

/// Latent times are kept inside `[e^-700, e^700]` so they stay finite and
/// strictly positive.
const LOG_TIME_BOUND: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Covariance {
    /// `Sigma_ij = rho^|i-j|`.
    Ar1 { rho: f64 },
    /// Unit variances, constant correlation `rho`.
    CompoundSymmetry { rho: f64 },
}

impl Covariance {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Covariance::Ar1 { rho } if !(rho > -1.0 && rho < 1.0) => Err(Error::InvalidArgument(
                format!("AR(1) correlation must lie in (-1, 1), got {rho}"),
            )),
            Covariance::CompoundSymmetry { rho } if !(0.0..1.0).contains(&rho) => {
                Err(Error::InvalidArgument(format!(
                    "compound symmetry correlation must lie in [0, 1), got {rho}"
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SurvivalModel {
    /// Proportional hazards with constant baseline hazard:
    /// `T = -ln(u) / (hazard * exp(x'beta))`.
    Cox { beta: Vec<f64>, hazard: f64 },
    /// Linear transformation model `H(T) = -x'beta + eps`, eps standard Cauchy,
    /// `H(t) = ln(0.5 (exp(2t) - 1))`.
    Transformation { beta: Vec<f64> },
    /// `ln T = x1 + 0.8 x2 + x7^2 + eps`.
    Aft,
    /// `ln T = 1.5 - exp(-x1 - 0.8 x2 - x7) * eps`.
    NonlinearExp,
}

impl SurvivalModel {
    /// Zero-based indices of the features the latent time depends on.
    pub fn active_set(&self) -> Vec<usize> {
        match self {
            SurvivalModel::Cox { beta, .. } | SurvivalModel::Transformation { beta } => beta
                .iter()
                .enumerate()
                .filter(|(_, b)| **b != 0.0)
                .map(|(i, _)| i)
                .collect(),
            SurvivalModel::Aft | SurvivalModel::NonlinearExp => vec![0, 1, 6],
        }
    }

    /// Number of leading columns the latent time reads.
    pub fn support_width(&self) -> usize {
        match self {
            SurvivalModel::Cox { beta, .. } | SurvivalModel::Transformation { beta } => beta.len(),
            SurvivalModel::Aft | SurvivalModel::NonlinearExp => 7,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SurvivalModel::Cox { .. } => "cox",
            SurvivalModel::Transformation { .. } => "transformation",
            SurvivalModel::Aft => "aft",
            SurvivalModel::NonlinearExp => "nonlinear",
        }
    }
}

/// One simulation design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub model: SurvivalModel,
    pub n: usize,
    pub p: usize,
    pub covariance: Covariance,
    pub target_cr: f64,
    pub seed: u64,
}

impl SimScenario {
    /// Cox model, `beta = (0.35 x 5, 0, ...)`, hazard 0.5, AR(1) 0.6.
    pub fn cox_example(n: usize, p: usize, target_cr: f64, seed: u64) -> Self {
        Self {
            model: SurvivalModel::Cox {
                beta: vec![0.35; 5],
                hazard: 0.5,
            },
            n,
            p,
            covariance: Covariance::Ar1 { rho: 0.6 },
            target_cr,
            seed,
        }
    }

    /// Transformation model with nonzero `beta` (-1, -0.9, 0.8, 1) at
    /// features 1, 2, 9, 10; AR(1) 0.5.
    pub fn transformation_example(n: usize, p: usize, target_cr: f64, seed: u64) -> Self {
        Self {
            model: SurvivalModel::Transformation {
                beta: vec![-1.0, -0.9, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.8, 1.0],
            },
            n,
            p,
            covariance: Covariance::Ar1 { rho: 0.5 },
            target_cr,
            seed,
        }
    }

    /// AFT model with a quadratic effect; AR(1) 0.6.
    pub fn aft_example(n: usize, p: usize, target_cr: f64, seed: u64) -> Self {
        Self {
            model: SurvivalModel::Aft,
            n,
            p,
            covariance: Covariance::Ar1 { rho: 0.6 },
            target_cr,
            seed,
        }
    }

    /// Heteroscedastic log-time model; compound symmetry 0.5.
    pub fn nonlinear_example(n: usize, p: usize, target_cr: f64, seed: u64) -> Self {
        Self {
            model: SurvivalModel::NonlinearExp,
            n,
            p,
            covariance: Covariance::CompoundSymmetry { rho: 0.5 },
            target_cr,
            seed,
        }
    }

    pub fn active_set(&self) -> Vec<usize> {
        self.model.active_set()
    }

    pub fn validate(&self) -> Result<()> {
        self.covariance.validate()?;
        if !(self.target_cr > 0.0 && self.target_cr < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "target censoring rate must lie in (0, 1), got {}",
                self.target_cr
            )));
        }
        if self.n < 2 {
            return Err(Error::DegenerateSample(self.n));
        }
        if self.model.support_width() > self.p {
            return Err(Error::InvalidArgument(format!(
                "{} model needs p >= {}, got {}",
                self.model.name(),
                self.model.support_width(),
                self.p
            )));
        }
        if let SurvivalModel::Cox { hazard, .. } = self.model {
            if !(hazard > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "baseline hazard must be positive, got {hazard}"
                )));
            }
        }
        if self.active_set().is_empty() {
            return Err(Error::InvalidArgument("active set is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSample {
    /// `n x p`, column-major.
    pub x: Array2<f64>,
    pub t_true: Vec<f64>,
    pub censor: Vec<f64>,
    pub resp: SurvivalResponse,
    pub c_upper: f64,
}

/// Draws `n` rows of an `N_p(0, Sigma)` vector, column by column.
///
/// AR(1): `X_1 = Z_1`, `X_j = rho X_{j-1} + sqrt(1 - rho^2) Z_j`.
/// Compound symmetry: `X_j = sqrt(rho) W + sqrt(1 - rho) Z_j` with `W` shared
/// across a row.
pub fn sample_covariates<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    covariance: Covariance,
    rng: &mut R,
) -> Result<Array2<f64>> {
    covariance.validate()?;
    let mut data = vec![0.0; n * p];
    match covariance {
        Covariance::Ar1 { rho } => {
            let innov = (1.0 - rho * rho).sqrt();
            for j in 0..p {
                let (prev, cur) = data.split_at_mut(j * n);
                let cur = &mut cur[..n];
                for (i, v) in cur.iter_mut().enumerate() {
                    let z: f64 = StandardNormal.sample(rng);
                    *v = if j == 0 {
                        z
                    } else {
                        rho * prev[(j - 1) * n + i] + innov * z
                    };
                }
            }
        }
        Covariance::CompoundSymmetry { rho } => {
            let (shared, own) = (rho.sqrt(), (1.0 - rho).sqrt());
            let w: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
            for j in 0..p {
                for (i, v) in data[j * n..(j + 1) * n].iter_mut().enumerate() {
                    let z: f64 = StandardNormal.sample(rng);
                    *v = shared * w[i] + own * z;
                }
            }
        }
    }
    Ok(Array2::from_shape_vec((n, p).f(), data).expect("shape matches buffer"))
}

fn time_from_log(log_t: f64) -> f64 {
    log_t.clamp(-LOG_TIME_BOUND, LOG_TIME_BOUND).exp()
}

fn linear_predictor(x: ArrayView2<'_, f64>, beta: &[f64]) -> Vec<f64> {
    let mut lin = vec![0.0; x.nrows()];
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            for (acc, v) in lin.iter_mut().zip(x.column(j)) {
                *acc += b * v;
            }
        }
    }
    lin
}

/// Inverse-transform draw of an exponential time with rate `hazard * e^lin`.
pub fn cox_time(u: f64, lin: f64, hazard: f64) -> f64 {
    time_from_log((-u.ln()).ln() - hazard.ln() - lin)
}

pub fn gen_cox<R: Rng + ?Sized>(
    x: ArrayView2<'_, f64>,
    beta: &[f64],
    hazard: f64,
    rng: &mut R,
) -> Vec<f64> {
    linear_predictor(x, beta)
        .into_iter()
        .map(|lin| {
            let u: f64 = Open01.sample(rng);
            cox_time(u, lin, hazard)
        })
        .collect()
}

/// `H(t) = ln(0.5 (e^{2t} - 1))` for `t > 0`.
pub fn transform_h(t: f64) -> f64 {
    if t > 20.0 {
        // e^{2t} - 1 = e^{2t} (1 - e^{-2t})
        2.0 * t + (-(-2.0 * t).exp()).ln_1p() - std::f64::consts::LN_2
    } else {
        (2.0 * t).exp_m1().ln() - std::f64::consts::LN_2
    }
}

/// `H^{-1}(h) = 0.5 ln(1 + 2 e^h)`, evaluated without overflow or
/// cancellation at either tail.
pub fn inverse_transform_h(h: f64) -> f64 {
    if h > 0.0 {
        0.5 * (h + std::f64::consts::LN_2 + (0.5 * (-h).exp()).ln_1p())
    } else {
        0.5 * (2.0 * h.exp()).ln_1p()
    }
}

pub fn gen_transformation<R: Rng + ?Sized>(
    x: ArrayView2<'_, f64>,
    beta: &[f64],
    rng: &mut R,
) -> Vec<f64> {
    linear_predictor(x, beta)
        .into_iter()
        .map(|lin| {
            // Standard Cauchy as a ratio of independent standard normals.
            let num: f64 = StandardNormal.sample(rng);
            let den: f64 = StandardNormal.sample(rng);
            inverse_transform_h(-lin + num / den).max(f64::MIN_POSITIVE)
        })
        .collect()
}

pub fn aft_time(x1: f64, x2: f64, x7: f64, eps: f64) -> f64 {
    time_from_log(x1 + 0.8 * x2 + x7 * x7 + eps)
}

pub fn gen_aft<R: Rng + ?Sized>(x: ArrayView2<'_, f64>, rng: &mut R) -> Vec<f64> {
    (0..x.nrows())
        .map(|i| {
            let eps: f64 = StandardNormal.sample(rng);
            aft_time(x[[i, 0]], x[[i, 1]], x[[i, 6]], eps)
        })
        .collect()
}

pub fn nonlinear_time(x1: f64, x2: f64, x7: f64, eps: f64) -> f64 {
    time_from_log(1.5 - (-x1 - 0.8 * x2 - x7).exp() * eps)
}

pub fn gen_nonlinear<R: Rng + ?Sized>(x: ArrayView2<'_, f64>, rng: &mut R) -> Vec<f64> {
    (0..x.nrows())
        .map(|i| {
            let eps: f64 = StandardNormal.sample(rng);
            nonlinear_time(x[[i, 0]], x[[i, 1]], x[[i, 6]], eps)
        })
        .collect()
}

/// Latent event times for `model` given covariates.
pub fn latent_times<R: Rng + ?Sized>(
    model: &SurvivalModel,
    x: ArrayView2<'_, f64>,
    rng: &mut R,
) -> Vec<f64> {
    match model {
        SurvivalModel::Cox { beta, hazard } => gen_cox(x, beta, *hazard, rng),
        SurvivalModel::Transformation { beta } => gen_transformation(x, beta, rng),
        SurvivalModel::Aft => gen_aft(x, rng),
        SurvivalModel::NonlinearExp => gen_nonlinear(x, rng),
    }
}

/// Expected censoring rate under `C ~ Unif(0, c)` averaged over `latent`:
/// `P(C < T) = mean(min(T, c) / c)`.
pub fn expected_censoring_rate(latent: &[f64], c: f64) -> f64 {
    latent.iter().map(|&t| t.min(c)).sum::<f64>() / (c * latent.len() as f64)
}

/// Finds `c` with `expected_censoring_rate(latent, c) = target` by bisection
/// on `ln c`, starting from `[1e-3, 1e3]` and widening geometrically.
pub fn calibrate_upper_bound(latent: &[f64], target: f64, tol: f64) -> Result<f64> {
    if latent.is_empty() {
        return Err(Error::EmptyColumn);
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::CensoringUnattainable(format!(
            "target {target} outside (0, 1)"
        )));
    }
    let cr = |c: f64| expected_censoring_rate(latent, c);
    let (mut lo, mut hi) = (1e-3_f64, 1e3_f64);
    let mut doublings = 0;
    while cr(lo) < target {
        lo /= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::CensoringUnattainable(format!(
                "censoring rate stays below {target} for every c"
            )));
        }
    }
    doublings = 0;
    while cr(hi) > target {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::CensoringUnattainable(format!(
                "censoring rate stays above {target} for every c"
            )));
        }
    }
    // The rate is nonincreasing in c; bisect geometrically to convergence.
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if cr(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-13 {
            break;
        }
    }
    let c = (lo * hi).sqrt();
    let achieved = cr(c);
    if (achieved - target).abs() > tol {
        return Err(Error::CensoringUnattainable(format!(
            "closest achievable rate {achieved:.4} misses target {target} by more than {tol}"
        )));
    }
    Ok(c)
}

/// Calibrates the censoring bound from `pilot_n` latent draws.
pub fn calibrate_censoring<R: Rng + ?Sized>(
    scenario: &SimScenario,
    rng: &mut R,
    tol: f64,
    pilot_n: usize,
) -> Result<f64> {
    scenario.validate()?;
    let width = scenario.model.support_width();
    let x = sample_covariates(pilot_n, width, scenario.covariance, rng)?;
    let latent = latent_times(&scenario.model, x.view(), rng);
    calibrate_upper_bound(&latent, scenario.target_cr, tol)
}

/// The scenario's censoring bound with default tolerance and pilot size.
pub fn scenario_censoring_bound(scenario: &SimScenario) -> Result<f64> {
    let mut rng = seed::stream_rng(scenario.seed, CALIBRATION_STREAM);
    let c = calibrate_censoring(scenario, &mut rng, DEFAULT_CALIBRATION_TOL, DEFAULT_PILOT_N)?;
    log::info!(
        "{} scenario n={} p={}: censoring bound c = {c:.6} for target CR {}",
        scenario.model.name(),
        scenario.n,
        scenario.p,
        scenario.target_cr
    );
    Ok(c)
}

/// One replication on its own random stream with a fixed censoring bound.
pub fn generate_replication(
    scenario: &SimScenario,
    c_upper: f64,
    stream: u64,
) -> Result<GeneratedSample> {
    scenario.validate()?;
    let mut rng = seed::stream_rng(scenario.seed, stream);
    let x = sample_covariates(scenario.n, scenario.p, scenario.covariance, &mut rng)?;
    let t_true = latent_times(&scenario.model, x.view(), &mut rng);
    let censor: Vec<f64> = (0..scenario.n)
        .map(|_| {
            let u: f64 = Open01.sample(&mut rng);
            u * c_upper
        })
        .collect();
    let y = t_true
        .iter()
        .zip(&censor)
        .map(|(&t, &c)| t.min(c))
        .collect();
    let delta = t_true.iter().zip(&censor).map(|(&t, &c)| t <= c).collect();
    let resp = SurvivalResponse::new(y, delta)?;
    Ok(GeneratedSample {
        x,
        t_true,
        censor,
        resp,
        c_upper,
    })
}

/// Calibrates censoring and draws the scenario's first replication.
pub fn generate(scenario: &SimScenario) -> Result<GeneratedSample> {
    let c = scenario_censoring_bound(scenario)?;
    generate_replication(scenario, c, 0)
}
