//! Monte Carlo simulation of joint spin measurements with bootstrap errors.
//!
//! Measurement records are drawn one event at a time from the exact joint
//! outcome table of a state, using a counter-based RNG whose stream id
//! encodes the measured axis — so the three axes consume independent,
//! reproducible streams from one seed. Estimators are plug-in functionals
//! of the empirical table (the same functionals the analytic criteria use
//! on the exact table), and their uncertainties come from a multinomial
//! bootstrap over the observed counts. [`estimate_criteria_suite`] packages
//! the collective-spin criterion and both inference conventions with
//! bootstrap standard errors and a 3-sigma agreement flag against the
//! analytic values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::criteria::{
    collective_spin_criterion, epr_criterion, inferred_variance_of_pmf, joint_outcome_pmf,
    InferenceConvention, JointOutcomePmf,
};
use crate::qmatrix::DensityMatrix;
use crate::states::SpinAxis;
use crate::{tol, Error, Result};

/// Number of multinomial bootstrap resamples behind every standard error.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Stream-id flag separating bootstrap streams from sampling streams.
const BOOTSTRAP_STREAM_FLAG: u64 = 0x8000_0000;

/// What to measure and how many events to draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    /// Number of measurement events.
    pub n_samples: u64,
    /// Master seed; the axis selects the stream, so one seed covers all axes.
    pub seed: u64,
    /// Spin axis measured jointly at both sites.
    pub axis: SpinAxis,
}

/// Joint outcome counts from one simulated measurement run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    axis: SpinAxis,
    outcomes_a: Vec<f64>,
    outcomes_b: Vec<f64>,
    counts: Vec<Vec<u64>>,
    n: u64,
}

impl OutcomeCounts {
    /// Axis the run measured.
    pub fn axis(&self) -> SpinAxis {
        self.axis
    }

    /// Ascending outcome values for site A.
    pub fn outcomes_a(&self) -> &[f64] {
        &self.outcomes_a
    }

    /// Ascending outcome values for site B.
    pub fn outcomes_b(&self) -> &[f64] {
        &self.outcomes_b
    }

    /// Count table indexed `[a][b]`.
    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    /// Total number of events.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Empirical joint probability table `counts / n`.
    pub fn empirical_pmf(&self) -> Result<JointOutcomePmf> {
        let n = self.n as f64;
        let probs = self
            .counts
            .iter()
            .map(|row| row.iter().map(|&k| k as f64 / n).collect())
            .collect();
        JointOutcomePmf::from_table(self.outcomes_a.clone(), self.outcomes_b.clone(), probs)
    }
}

/// Draw `n_samples` joint outcomes from the exact measurement distribution
/// of `rho` along the configured axis, one event per RNG draw.
pub fn sample_joint(rho: &DensityMatrix, config: &SampleConfig) -> Result<OutcomeCounts> {
    if config.n_samples == 0 {
        return Err(Error::Domain {
            name: "n_samples",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    let pmf = joint_outcome_pmf(rho, config.axis)?;
    let na = pmf.outcomes_a().len();
    let nb = pmf.outcomes_b().len();
    let mut cdf = Vec::with_capacity(na * nb);
    let mut acc = 0.0;
    for row in pmf.probs() {
        for &p in row {
            acc += p;
            cdf.push(acc);
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    rng.set_stream(config.axis.index() as u64);
    let mut counts = vec![vec![0u64; nb]; na];
    for _ in 0..config.n_samples {
        let u: f64 = rng.gen();
        let mut cell = na * nb - 1;
        for (k, &edge) in cdf.iter().enumerate() {
            if u < edge {
                cell = k;
                break;
            }
        }
        counts[cell / nb][cell % nb] += 1;
    }
    Ok(OutcomeCounts {
        axis: config.axis,
        outcomes_a: pmf.outcomes_a().to_vec(),
        outcomes_b: pmf.outcomes_b().to_vec(),
        counts,
        n: config.n_samples,
    })
}

/// Multinomial resample of a flattened count vector, drawn cell by cell as
/// sequential conditional binomials (exact, O(cells) per resample).
fn multinomial_resample(counts: &[u64], n: u64, rng: &mut ChaCha12Rng) -> Result<Vec<u64>> {
    let total = n as f64;
    let mut out = vec![0u64; counts.len()];
    let mut remaining = n;
    let mut rest = 1.0;
    for (k, &c) in counts.iter().enumerate() {
        if k + 1 == counts.len() {
            out[k] = remaining;
            break;
        }
        if remaining == 0 {
            break;
        }
        let p = c as f64 / total;
        let ratio = if rest > 0.0 { (p / rest).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, ratio)
            .map_err(|e| Error::ContractViolation(format!("binomial setup failed: {e}")))?
            .sample(rng);
        out[k] = draw;
        remaining -= draw;
        rest -= p;
    }
    Ok(out)
}

fn resampled_pmf(counts: &OutcomeCounts, rng: &mut ChaCha12Rng) -> Result<JointOutcomePmf> {
    let nb = counts.outcomes_b.len();
    let flat: Vec<u64> = counts.counts.iter().flatten().copied().collect();
    let resampled = multinomial_resample(&flat, counts.n, rng)?;
    let n = counts.n as f64;
    let probs: Vec<Vec<f64>> = resampled
        .chunks(nb)
        .map(|row| row.iter().map(|&k| k as f64 / n).collect())
        .collect();
    JointOutcomePmf::from_table(
        counts.outcomes_a.clone(),
        counts.outcomes_b.clone(),
        probs,
    )
}

fn bootstrap_rng(seed: u64, axis: SpinAxis) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(BOOTSTRAP_STREAM_FLAG | axis.index() as u64);
    rng
}

fn std_error(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// A plug-in estimate with its bootstrap standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    /// Plug-in value from the observed counts.
    pub value: f64,
    /// Standard deviation of the bootstrap resample values.
    pub std_error: f64,
    /// Bootstrap resamples that yielded a defined value.
    pub resamples: usize,
}

/// Estimate the inferred variance from sampled counts, with a multinomial
/// bootstrap standard error.
///
/// Resamples where the convention degenerates (no detected outcomes) are
/// skipped; if more than half collapse the estimate itself is reported as
/// degenerate.
pub fn estimate_inferred_variance(
    counts: &OutcomeCounts,
    convention: InferenceConvention,
    seed: u64,
) -> Result<VarianceEstimate> {
    let value = inferred_variance_of_pmf(&counts.empirical_pmf()?, convention)?;
    let mut rng = bootstrap_rng(seed, counts.axis);
    let mut values = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let pmf = resampled_pmf(counts, &mut rng)?;
        match inferred_variance_of_pmf(&pmf, convention) {
            Ok(v) => values.push(v),
            Err(Error::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if values.len() < BOOTSTRAP_RESAMPLES / 2 {
        return Err(Error::Degenerate(format!(
            "only {} of {BOOTSTRAP_RESAMPLES} bootstrap resamples were defined",
            values.len()
        )));
    }
    Ok(VarianceEstimate {
        value,
        std_error: std_error(&values),
        resamples: values.len(),
    })
}

/// One criterion evaluated by Monte Carlo, with its analytic counterpart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatedCriterion {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention: Option<InferenceConvention>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// Bootstrap standard error of the margin.
    pub margin_std_error: f64,
    /// Verdict from the sampled margin.
    pub satisfied: bool,
    /// Margin of the same criterion evaluated exactly on the state.
    pub analytic_margin: f64,
    /// Whether the sampled margin lies within 3 standard errors of the
    /// analytic one.
    pub agrees: bool,
}

/// Monte Carlo evaluation of the collective-spin criterion and both
/// inference conventions on one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub n_samples: u64,
    pub seed: u64,
    pub collective: EstimatedCriterion,
    /// Inference criterion per convention, in [`InferenceConvention::ALL`]
    /// order.
    pub epr: Vec<EstimatedCriterion>,
}

impl SuiteReport {
    /// True when every estimated margin agrees with its analytic value.
    pub fn all_agree(&self) -> bool {
        self.collective.agrees && self.epr.iter().all(|c| c.agrees)
    }
}

/// Empirical variance of the summed outcome `a + b` under one table.
fn collective_variance_of_pmf(pmf: &JointOutcomePmf) -> Result<f64> {
    let mut mean = 0.0;
    let mut second = 0.0;
    for (i, row) in pmf.probs().iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            let s = pmf.outcomes_a()[i] + pmf.outcomes_b()[j];
            mean += p * s;
            second += p * s * s;
        }
    }
    let mut var = second - mean * mean;
    if var < 0.0 {
        if var < -tol::VARIANCE_CLAMP {
            return Err(Error::ContractViolation(format!(
                "collective variance {var:.3e} below the round-off floor"
            )));
        }
        var = 0.0;
    }
    Ok(var)
}

/// Detection probability of one site under a table: total weight of rows
/// (site A) or columns (site B) with a non-zero outcome value.
fn detection_probs(pmf: &JointOutcomePmf) -> (f64, f64) {
    let mut pa = 0.0;
    for (i, &a) in pmf.outcomes_a().iter().enumerate() {
        if a.abs() > tol::OUTCOME_CLUSTER {
            pa += pmf.probs()[i].iter().sum::<f64>();
        }
    }
    let mut pb = 0.0;
    for (j, &b) in pmf.outcomes_b().iter().enumerate() {
        if b.abs() > tol::OUTCOME_CLUSTER {
            pb += pmf.probs().iter().map(|row| row[j]).sum::<f64>();
        }
    }
    (pa, pb)
}

/// Sides of the collective criterion from one table per axis.
fn collective_sides(tables: &[JointOutcomePmf; 3]) -> Result<(f64, f64)> {
    let mut lhs = 0.0;
    let mut n_sites = 0.0;
    for pmf in tables {
        lhs += collective_variance_of_pmf(pmf)?;
        let (pa, pb) = detection_probs(pmf);
        n_sites += pa + pb;
    }
    Ok((lhs, n_sites / 3.0 / 2.0))
}

/// Sides of the inference criterion from one table per axis.
fn epr_sides(tables: &[JointOutcomePmf; 3], convention: InferenceConvention) -> Result<(f64, f64)> {
    let mut lhs = 0.0;
    let mut nb = 0.0;
    for pmf in tables {
        lhs += inferred_variance_of_pmf(pmf, convention)?;
        nb += detection_probs(pmf).1;
    }
    Ok((lhs, nb / 3.0 / 2.0))
}

/// Sample all three axes of `rho` and evaluate the collective-spin
/// criterion and both inference conventions, with bootstrap margin errors
/// and 3-sigma agreement flags against the exact values.
pub fn estimate_criteria_suite(
    rho: &DensityMatrix,
    n_samples: u64,
    seed: u64,
) -> Result<SuiteReport> {
    let mut counts = Vec::with_capacity(3);
    for axis in SpinAxis::ALL {
        counts.push(sample_joint(
            rho,
            &SampleConfig {
                n_samples,
                seed,
                axis,
            },
        )?);
    }
    let observed: [JointOutcomePmf; 3] = [
        counts[0].empirical_pmf()?,
        counts[1].empirical_pmf()?,
        counts[2].empirical_pmf()?,
    ];

    let (col_lhs, col_rhs) = collective_sides(&observed)?;
    let point_epr: Vec<(f64, f64)> = InferenceConvention::ALL
        .iter()
        .map(|&c| epr_sides(&observed, c))
        .collect::<Result<_>>()?;

    // Lockstep bootstrap: one resample of every axis feeds all criteria, so
    // each margin's numerator and denominator stay correlated as observed.
    let mut rngs: Vec<ChaCha12Rng> = SpinAxis::ALL
        .iter()
        .map(|&axis| bootstrap_rng(seed, axis))
        .collect();
    let mut col_margins = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut epr_margins = [
        Vec::with_capacity(BOOTSTRAP_RESAMPLES),
        Vec::with_capacity(BOOTSTRAP_RESAMPLES),
    ];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let tables: [JointOutcomePmf; 3] = [
            resampled_pmf(&counts[0], &mut rngs[0])?,
            resampled_pmf(&counts[1], &mut rngs[1])?,
            resampled_pmf(&counts[2], &mut rngs[2])?,
        ];
        let (lhs, rhs) = collective_sides(&tables)?;
        col_margins.push(rhs - lhs);
        for (k, &convention) in InferenceConvention::ALL.iter().enumerate() {
            match epr_sides(&tables, convention) {
                Ok((lhs, rhs)) => epr_margins[k].push(rhs - lhs),
                Err(Error::Degenerate(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    for margins in &epr_margins {
        if margins.len() < BOOTSTRAP_RESAMPLES / 2 {
            return Err(Error::Degenerate(format!(
                "only {} of {BOOTSTRAP_RESAMPLES} bootstrap resamples were defined",
                margins.len()
            )));
        }
    }

    let analytic_col = collective_spin_criterion(rho)?;
    let build = |name: &str,
                 convention: Option<InferenceConvention>,
                 lhs: f64,
                 rhs: f64,
                 se: f64,
                 analytic_margin: f64| {
        let margin = rhs - lhs;
        EstimatedCriterion {
            name: name.to_string(),
            convention,
            lhs,
            rhs,
            margin,
            margin_std_error: se,
            satisfied: margin > 0.0,
            analytic_margin,
            agrees: (margin - analytic_margin).abs() <= 3.0 * se,
        }
    };

    let collective = build(
        "collective-spin-uncertainty",
        None,
        col_lhs,
        col_rhs,
        std_error(&col_margins),
        analytic_col.margin,
    );
    let mut epr = Vec::with_capacity(2);
    for (k, &convention) in InferenceConvention::ALL.iter().enumerate() {
        let analytic = epr_criterion(rho, convention)?;
        let (lhs, rhs) = point_epr[k];
        epr.push(build(
            "epr-inferred-variance",
            Some(convention),
            lhs,
            rhs,
            std_error(&epr_margins[k]),
            analytic.margin,
        ));
    }
    Ok(SuiteReport {
        n_samples,
        seed,
        collective,
        epr,
    })
}
