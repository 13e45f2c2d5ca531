//! Monte-Carlo estimation of empirical power functions.
//!
//! For each method and each point of the alternative grid, the harness
//! replays many independent trials: draw a reference sample from the null
//! family, a comparison sample from the alternative, run the test, record
//! the rejection. Trials run in parallel; every trial derives its own
//! stream from `(master seed, method, grid index, trial index)`, so the
//! result is bit-identical regardless of thread count.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::distributions::{ContinuousDist, SeededRng};
use crate::ecdf::EmpiricalCdf;
use crate::error::{Error, Result};
use crate::hypothesis::{ks_transform_test, ks_two_sample};

/// Stream tag for the shared-reference design variant; far above any
/// realistic trial index.
const SHARED_REFERENCE_CHILD: u64 = u64::MAX;

/// Which test a power curve describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    TwoSample,
    Transform,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::TwoSample => "two_sample",
            Method::Transform => "transform",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            Method::TwoSample => 0,
            Method::Transform => 1,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_sample" | "two-sample" => Ok(Method::TwoSample),
            "transform" => Ok(Method::Transform),
            other => Err(Error::InvalidConfig(format!(
                "unknown method `{other}` (expected two_sample or transform)"
            ))),
        }
    }
}

/// Full description of one power-function experiment.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    /// Reference sample size per trial.
    pub n_reference: usize,
    /// Comparison sample size per trial.
    pub m_comparison: usize,
    /// Trials per grid point; at least 100 for any statistical output.
    pub replications: usize,
    /// Significance level of every test run.
    pub alpha: f64,
    /// Alternative parameter grid: means for a normal null, rate
    /// multipliers for an exponential null.
    pub mu_grid: Vec<f64>,
    /// Distribution of the reference sample (the null).
    pub null_family: ContinuousDist,
    /// Tests to estimate curves for.
    pub methods: Vec<Method>,
    pub master_seed: u64,
    /// Dither the transform-test mapping.
    pub dither: bool,
    /// Draw one reference per grid point instead of one per trial; a
    /// sensitivity variant, off by default.
    pub shared_reference: bool,
}

impl SimulationConfig {
    /// Standard-normal-null experiment with the default grid, 10^4
    /// replications and alpha 0.05.
    pub fn new(n_reference: usize, m_comparison: usize, master_seed: u64) -> Self {
        SimulationConfig {
            n_reference,
            m_comparison,
            replications: 10_000,
            alpha: 0.05,
            mu_grid: default_mu_grid(),
            null_family: ContinuousDist::Normal {
                mu: 0.0,
                sigma: 1.0,
            },
            methods: vec![Method::TwoSample, Method::Transform],
            master_seed,
            dither: false,
            shared_reference: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_reference == 0 || self.m_comparison == 0 {
            return fail("sample sizes must be at least 1".to_owned());
        }
        if self.replications < 100 {
            return fail(format!(
                "replications must be at least 100 for statistical output, got {}",
                self.replications
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha must be in (0, 1), got {}", self.alpha));
        }
        if self.mu_grid.is_empty() {
            return fail("parameter grid is empty".to_owned());
        }
        if self.methods.is_empty() {
            return fail("no methods selected".to_owned());
        }
        for &g in &self.mu_grid {
            if !g.is_finite() {
                return fail(format!("grid value {g} is not finite"));
            }
        }
        match self.null_family {
            ContinuousDist::Normal { .. } => {}
            ContinuousDist::Exponential { .. } => {
                if self.mu_grid.iter().any(|&g| g <= 0.0) {
                    return fail(
                        "rate multipliers must be positive for an exponential null".to_owned(),
                    );
                }
            }
            ContinuousDist::Uniform01 => {
                return fail(
                    "the uniform family has no parametric alternative; use a normal or \
                     exponential null"
                        .to_owned(),
                );
            }
        }
        Ok(())
    }

    /// The comparison-sample distribution at grid value `g`.
    fn alternative(&self, g: f64) -> ContinuousDist {
        match self.null_family {
            ContinuousDist::Normal { sigma, .. } => ContinuousDist::Normal { mu: g, sigma },
            ContinuousDist::Exponential { rate } => ContinuousDist::Exponential { rate: rate * g },
            ContinuousDist::Uniform01 => unreachable!("rejected by validate"),
        }
    }
}

/// 41 equally spaced alternative means on [-1, 1].
pub fn default_mu_grid() -> Vec<f64> {
    // One division per point so the values print as exact twentieths.
    (0..41).map(|i| (i - 20) as f64 / 20.0).collect()
}

/// One estimated point of a power function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPoint {
    pub mu: f64,
    pub rejection_rate: f64,
    /// Binomial standard error `sqrt(rate * (1 - rate) / replications)`.
    pub mc_stderr: f64,
}

/// An empirical power function for one method.
#[derive(Debug, Clone)]
pub struct PowerCurve {
    pub method: Method,
    pub points: Vec<PowerPoint>,
    pub config: SimulationConfig,
}

/// Pointwise difference between two power curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapPoint {
    pub mu: f64,
    /// `rate_a - rate_b` at this grid value.
    pub gap: f64,
    /// Combined Monte-Carlo standard error of the difference.
    pub joint_stderr: f64,
}

/// Estimate one power curve per configured method.
pub fn estimate_power(config: &SimulationConfig) -> Result<Vec<PowerCurve>> {
    config.validate()?;
    let root = SeededRng::new(config.master_seed, 0);
    config
        .methods
        .iter()
        .map(|&method| {
            let method_rng = root.substream(method.tag());
            let points = config
                .mu_grid
                .iter()
                .enumerate()
                .map(|(g_idx, &mu)| {
                    let point_rng = method_rng.substream(g_idx as u64);
                    let rejections: usize = (0..config.replications)
                        .into_par_iter()
                        .map(|trial| run_trial(config, method, mu, &point_rng, trial) as usize)
                        .sum();
                    let rate = rejections as f64 / config.replications as f64;
                    PowerPoint {
                        mu,
                        rejection_rate: rate,
                        mc_stderr: (rate * (1.0 - rate) / config.replications as f64).sqrt(),
                    }
                })
                .collect();
            Ok(PowerCurve {
                method,
                points,
                config: config.clone(),
            })
        })
        .collect()
}

fn run_trial(
    config: &SimulationConfig,
    method: Method,
    mu: f64,
    point_rng: &SeededRng,
    trial: usize,
) -> bool {
    let trial_rng = point_rng.substream(trial as u64);
    let mut ref_rng = if config.shared_reference {
        point_rng.substream(SHARED_REFERENCE_CHILD)
    } else {
        trial_rng.substream(0)
    };
    let reference = config
        .null_family
        .sample(config.n_reference, &mut ref_rng)
        .expect("validated sizes");
    let comparison = config
        .alternative(mu)
        .sample(config.m_comparison, &mut trial_rng.substream(1))
        .expect("validated sizes");
    match method {
        Method::TwoSample => {
            ks_two_sample(&reference, &comparison, config.alpha)
                .expect("validated inputs")
                .reject
        }
        Method::Transform => {
            let ecdf = EmpiricalCdf::build(&reference).expect("validated inputs");
            let seed = config.dither.then(|| trial_rng.substream(2).next_u64());
            ks_transform_test(&ecdf, &comparison, config.alpha, config.dither, seed)
                .expect("validated inputs")
                .0
                .reject
        }
    }
}

/// Pointwise `A - B` rate differences with combined standard errors.
pub fn power_gap(curve_a: &PowerCurve, curve_b: &PowerCurve) -> Result<Vec<GapPoint>> {
    if curve_a.points.len() != curve_b.points.len()
        || curve_a
            .points
            .iter()
            .zip(&curve_b.points)
            .any(|(a, b)| a.mu != b.mu)
    {
        return Err(Error::GridMismatch);
    }
    Ok(curve_a
        .points
        .iter()
        .zip(&curve_b.points)
        .map(|(a, b)| GapPoint {
            mu: a.mu,
            gap: a.rejection_rate - b.rejection_rate,
            joint_stderr: (a.mc_stderr * a.mc_stderr + b.mc_stderr * b.mc_stderr).sqrt(),
        })
        .collect())
}

/// Power curves under an exponential null, with the grid read as rate
/// multipliers (1 is the null itself).
pub fn exponential_variant(config: &SimulationConfig) -> Result<Vec<PowerCurve>> {
    if !matches!(config.null_family, ContinuousDist::Exponential { .. }) {
        return Err(Error::InvalidConfig(
            "exponential_variant requires an exponential null family".to_owned(),
        ));
    }
    estimate_power(config)
}

/// Write curves as CSV, one row per grid point.
pub fn write_power_csv<W: Write>(curves: &[PowerCurve], writer: W) -> Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    writeln!(
        w,
        "method,mu,rejection_rate,mc_stderr,n,m,replications,alpha,seed"
    )?;
    for curve in curves {
        let c = &curve.config;
        for p in &curve.points {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                curve.method,
                p.mu,
                p.rejection_rate,
                p.mc_stderr,
                c.n_reference,
                c.m_comparison,
                c.replications,
                c.alpha,
                c.master_seed
            )?;
        }
    }
    w.flush()?;
    Ok(())
}
