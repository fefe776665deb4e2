//! Entanglement and inference-based criteria for the two-site pair.
//!
//! All inequality-style checks report through [`CriterionReport`], whose
//! `margin = rhs - lhs` is positive exactly when the criterion is satisfied.
//! Three families are implemented:
//!
//! - **negativity** of the partial transpose, an entanglement monotone with
//!   closed form `eta²(3p - 1)/4` for the lossy pair family;
//! - **collective-spin uncertainty**: separable states obey
//!   `Σ_θ Var(J_θ^A + J_θ^B) ≥ ⟨N^A + N^B⟩/2`, so a smaller sum witnesses
//!   entanglement;
//! - **inferred-variance inference**: if the sum over axes of Bob's variance
//!   conditioned on Alice's outcome drops below `⟨N^B⟩/2`, no local quantum
//!   state for B can explain the correlations.
//!
//! Conditioning on Alice's outcome admits two conventions
//! ([`InferenceConvention`]): averaging over *all* of her outcomes including
//! the no-photon event, or renormalizing over detected (`±1/2`) outcomes
//! only. Both are implemented from the same joint outcome table; their
//! closed forms and efficiency thresholds differ and are pinned in the tests.

use serde::{Deserialize, Serialize};

use crate::qmatrix::{expectation, variance, DensityMatrix, Observable};
use crate::states::{
    lossy_state_closed_form, number_operator, spin_operator, total_number, werner_state,
    DetectionSpace, Site, SpinAxis, WernerLossParams,
};
use crate::{tol, Error, Result};

/// Largest singlet weight for which a local-hidden-state model reproduces
/// all projective spin measurements on the two-photon sector. Recorded as a
/// cross-check constant: the inference thresholds computed here must lie
/// strictly above it.
pub const WISEMAN_STEERING_P: f64 = 0.5;

/// How Bob's conditional variance is averaged over Alice's outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceConvention {
    /// Average over every Alice outcome, including the no-photon event:
    /// `Σ_a P(a)·Var(B|a)`.
    AllOutcomes,
    /// Renormalize over Alice's detected (`±1/2`) outcomes only:
    /// `Σ_{a≠0} P(a)·Var(B|a) / Σ_{a≠0} P(a)`.
    DetectedOnly,
}

impl InferenceConvention {
    /// Both conventions, in a stable order.
    pub const ALL: [InferenceConvention; 2] =
        [InferenceConvention::AllOutcomes, InferenceConvention::DetectedOnly];

    /// Snake-case label used in reports and serialized output.
    pub fn label(&self) -> &'static str {
        match self {
            InferenceConvention::AllOutcomes => "all_outcomes",
            InferenceConvention::DetectedOnly => "detected_only",
        }
    }
}

/// Outcome of evaluating one inequality-style criterion.
///
/// The criterion is the statement `lhs < rhs`; `margin = rhs - lhs` and
/// `satisfied = margin > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention: Option<InferenceConvention>,
}

impl CriterionReport {
    /// Build a report from the two sides of the inequality.
    pub fn new(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        convention: Option<InferenceConvention>,
    ) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin,
            satisfied: margin > 0.0,
            convention,
        }
    }
}

fn detection_space_of(rho: &DensityMatrix) -> Result<DetectionSpace> {
    match rho.shape().dims() {
        [2, 2] => Ok(DetectionSpace::QubitPair),
        [3, 3] => Ok(DetectionSpace::QutritPair),
        dims => Err(Error::InvalidShape(format!(
            "expected a 2x2 or 3x3 site pair, got {dims:?}"
        ))),
    }
}

/// Magnitude of the most negative eigenvalue of the partial transpose over
/// the chosen site (0 or 1); zero for states that stay positive under it.
///
/// For the pair families here at most one eigenvalue can turn negative, so
/// this coincides with the full sum-of-negative-eigenvalues monotone.
/// Eigenvalues above `-`[`tol::PPT`] count as non-negative, so separable
/// closures like `p = 1/3` report exactly zero.
pub fn negativity(rho: &DensityMatrix, site: usize) -> Result<f64> {
    let pt = rho.matrix().partial_transpose(rho.shape(), site)?;
    let spectrum = pt.hermitian_eigenvalues()?;
    let min = spectrum.min();
    if min >= -tol::PPT {
        Ok(0.0)
    } else {
        Ok(-min)
    }
}

/// Closed form `max(0, eta²(3p - 1)/4)` for the negativity of the lossy
/// pair state.
pub fn negativity_formula(params: &WernerLossParams) -> f64 {
    let (p, eta) = (params.p(), params.eta());
    (eta * eta * (3.0 * p - 1.0) / 4.0).max(0.0)
}

/// Sum of collective-spin variances against the separable bound
/// `⟨N^A + N^B⟩/2`, on either detection space.
///
/// For the lossy pair state the left side is `3·eta(1 - eta·p)/2` and the
/// right side `eta`, so the criterion detects entanglement exactly when
/// `eta·p > 1/3`.
pub fn collective_spin_criterion(rho: &DensityMatrix) -> Result<CriterionReport> {
    let space = detection_space_of(rho)?;
    let mut lhs = 0.0;
    for axis in SpinAxis::ALL {
        let j = crate::states::collective_spin(axis, space);
        lhs += variance(&j, rho)?;
    }
    let rhs = expectation(&total_number(space), rho)? / 2.0;
    Ok(CriterionReport::new("collective-spin-uncertainty", lhs, rhs, None))
}

/// Collective-spin uncertainty criterion evaluated on the two-photon
/// (post-selected) pair state with singlet weight `p`.
///
/// The left side is `3(1 - p)/2` against the bound `1`, so entanglement is
/// detected exactly when `p > 1/3`; loss drops out entirely because
/// post-selection restores the ideal pair state.
pub fn hofmann_takeuchi_projected(p: f64) -> Result<CriterionReport> {
    let rho = werner_state(p)?;
    let report = collective_spin_criterion(&rho)?;
    Ok(CriterionReport::new(
        "collective-spin-uncertainty-projected",
        report.lhs,
        report.rhs,
        None,
    ))
}

/// Joint probability table for one-axis spin measurements at both sites.
///
/// `probs[i][j]` is the probability that site A yields `outcomes_a[i]` and
/// site B yields `outcomes_b[j]`; outcome lists are ascending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointOutcomePmf {
    outcomes_a: Vec<f64>,
    outcomes_b: Vec<f64>,
    probs: Vec<Vec<f64>>,
}

impl JointOutcomePmf {
    /// Build from explicit tables, validating shape, non-negativity (after
    /// clamping round-off no larger than [`tol::PROB_CLAMP`]) and unit
    /// normalization within [`tol::PMF_SUM`].
    pub fn from_table(
        outcomes_a: Vec<f64>,
        outcomes_b: Vec<f64>,
        probs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if probs.len() != outcomes_a.len() || probs.iter().any(|row| row.len() != outcomes_b.len())
        {
            return Err(Error::InvalidShape(format!(
                "probability table {}x{:?} does not match {}x{} outcomes",
                probs.len(),
                probs.first().map(|r| r.len()),
                outcomes_a.len(),
                outcomes_b.len()
            )));
        }
        let mut clean = probs;
        let mut sum = 0.0;
        for row in &mut clean {
            for p in row.iter_mut() {
                if *p < 0.0 {
                    if *p < -tol::PROB_CLAMP {
                        return Err(Error::ContractViolation(format!(
                            "probability {p:.3e} below the round-off floor"
                        )));
                    }
                    *p = 0.0;
                }
                sum += *p;
            }
        }
        if (sum - 1.0).abs() > tol::PMF_SUM {
            return Err(Error::ContractViolation(format!(
                "probability table sums to {sum} instead of 1"
            )));
        }
        Ok(Self {
            outcomes_a,
            outcomes_b,
            probs: clean,
        })
    }

    /// Ascending outcome values for site A.
    pub fn outcomes_a(&self) -> &[f64] {
        &self.outcomes_a
    }

    /// Ascending outcome values for site B.
    pub fn outcomes_b(&self) -> &[f64] {
        &self.outcomes_b
    }

    /// Probability rows, indexed `[a][b]`.
    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    /// Marginal distribution of site A's outcome.
    pub fn marginal_a(&self) -> Vec<f64> {
        self.probs.iter().map(|row| row.iter().sum()).collect()
    }

    /// Marginal distribution of site B's outcome.
    pub fn marginal_b(&self) -> Vec<f64> {
        (0..self.outcomes_b.len())
            .map(|j| self.probs.iter().map(|row| row[j]).sum())
            .collect()
    }
}

/// Joint outcome table for measuring the same spin axis at both sites.
///
/// The two site operators are verified to commute (within
/// [`tol::COMMUTATOR`]) before their shared eigenprojectors are combined;
/// the table's marginal means are checked against the operator expectations
/// within [`tol::MARGINAL`].
pub fn joint_outcome_pmf(rho: &DensityMatrix, axis: SpinAxis) -> Result<JointOutcomePmf> {
    let space = detection_space_of(rho)?;
    let ja = spin_operator(Site::A, axis, space);
    let jb = spin_operator(Site::B, axis, space);

    let comm = &ja.matrix().matmul(jb.matrix()) - &jb.matrix().matmul(ja.matrix());
    if comm.max_abs() > tol::COMMUTATOR {
        return Err(Error::ContractViolation(format!(
            "site operators fail to commute: |[A,B]| = {:.3e}",
            comm.max_abs()
        )));
    }

    let outcomes_a = ja.outcomes()?;
    let outcomes_b = jb.outcomes()?;
    let mut probs = Vec::with_capacity(outcomes_a.len());
    for (_, proj_a) in outcomes_a {
        let mut row = Vec::with_capacity(outcomes_b.len());
        for (_, proj_b) in outcomes_b {
            let joint = Observable::new(proj_a.matmul(proj_b))?;
            row.push(expectation(&joint, rho)?);
        }
        probs.push(row);
    }
    let values_a: Vec<f64> = outcomes_a.iter().map(|(v, _)| *v).collect();
    let values_b: Vec<f64> = outcomes_b.iter().map(|(v, _)| *v).collect();
    let pmf = JointOutcomePmf::from_table(values_a, values_b, probs)?;

    let mean_a: f64 = pmf
        .marginal_a()
        .iter()
        .zip(pmf.outcomes_a())
        .map(|(p, v)| p * v)
        .sum();
    let mean_b: f64 = pmf
        .marginal_b()
        .iter()
        .zip(pmf.outcomes_b())
        .map(|(p, v)| p * v)
        .sum();
    let direct_a = expectation(&ja, rho)?;
    let direct_b = expectation(&jb, rho)?;
    if (mean_a - direct_a).abs() > tol::MARGINAL || (mean_b - direct_b).abs() > tol::MARGINAL {
        return Err(Error::ContractViolation(format!(
            "marginal means ({mean_a}, {mean_b}) disagree with operator expectations \
             ({direct_a}, {direct_b})"
        )));
    }
    Ok(pmf)
}

/// Average of site B's conditional variance over site A's outcomes, for one
/// convention, directly from a joint outcome table.
pub fn inferred_variance_of_pmf(
    pmf: &JointOutcomePmf,
    convention: InferenceConvention,
) -> Result<f64> {
    let mut weighted = 0.0;
    let mut weight = 0.0;
    for (i, &a) in pmf.outcomes_a().iter().enumerate() {
        let detected = a.abs() > tol::OUTCOME_CLUSTER;
        if convention == InferenceConvention::DetectedOnly && !detected {
            continue;
        }
        let row = &pmf.probs()[i];
        let w: f64 = row.iter().sum();
        if w <= tol::PROJECTION_WEIGHT {
            continue;
        }
        let mean: f64 = row
            .iter()
            .zip(pmf.outcomes_b())
            .map(|(p, b)| p * b)
            .sum::<f64>()
            / w;
        let second: f64 = row
            .iter()
            .zip(pmf.outcomes_b())
            .map(|(p, b)| p * b * b)
            .sum::<f64>()
            / w;
        let mut var = second - mean * mean;
        if var < 0.0 {
            if var < -tol::VARIANCE_CLAMP {
                return Err(Error::ContractViolation(format!(
                    "conditional variance {var:.3e} below the round-off floor"
                )));
            }
            var = 0.0;
        }
        weighted += w * var;
        weight += w;
    }
    match convention {
        InferenceConvention::AllOutcomes => Ok(weighted),
        InferenceConvention::DetectedOnly => {
            if weight <= tol::PROJECTION_WEIGHT {
                Err(Error::Degenerate(
                    "no detected outcomes to condition on".into(),
                ))
            } else {
                Ok(weighted / weight)
            }
        }
    }
}

/// Inferred variance of site B's spin along one axis given site A's outcome
/// on the same axis.
pub fn inferred_variance(
    rho: &DensityMatrix,
    axis: SpinAxis,
    convention: InferenceConvention,
) -> Result<f64> {
    let pmf = joint_outcome_pmf(rho, axis)?;
    inferred_variance_of_pmf(&pmf, convention)
}

/// Closed form of the per-axis inferred variance for the lossy pair state:
/// `eta(1 - eta²p²)/4` averaging over all outcomes, `eta(1 - eta·p²)/4`
/// conditioning on detected outcomes only.
pub fn inferred_variance_formula(params: &WernerLossParams, convention: InferenceConvention) -> f64 {
    let (p, eta) = (params.p(), params.eta());
    match convention {
        InferenceConvention::AllOutcomes => eta * (1.0 - eta * eta * p * p) / 4.0,
        InferenceConvention::DetectedOnly => eta * (1.0 - eta * p * p) / 4.0,
    }
}

/// Inference criterion for site B: sum over the three axes of the inferred
/// variance against the local-state bound `⟨N^B⟩/2`.
///
/// The bound is unconditioned in both conventions — it constrains the states
/// a local model assigns to B, which cannot depend on whether A's photon
/// survived.
pub fn epr_criterion(
    rho: &DensityMatrix,
    convention: InferenceConvention,
) -> Result<CriterionReport> {
    let space = detection_space_of(rho)?;
    let mut lhs = 0.0;
    for axis in SpinAxis::ALL {
        lhs += inferred_variance(rho, axis, convention)?;
    }
    let rhs = expectation(&number_operator(Site::B, space), rho)? / 2.0;
    Ok(CriterionReport::new(
        "epr-inferred-variance",
        lhs,
        rhs,
        Some(convention),
    ))
}

/// Monotone-increasing root finder: bisect `f` on `[lo, hi]` assuming
/// `f(lo) ≤ 0 ≤ f(hi)`, to within [`tol::BISECT_TOL`] on the argument.
pub(crate) fn bisect_increasing(
    f: impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64> {
    while hi - lo > tol::BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minimal detection efficiency at which the inference criterion turns
/// positive for singlet weight `p`, found by bisection on the evaluated
/// margin; `None` when even `eta = 1` does not reach it.
pub fn epr_threshold_qubit(p: f64, convention: InferenceConvention) -> Result<Option<f64>> {
    let margin_at = |eta: f64| -> Result<f64> {
        let rho = lossy_state_closed_form(&WernerLossParams::new(p, eta)?)?;
        Ok(epr_criterion(&rho, convention)?.margin)
    };
    if margin_at(1.0)? <= 0.0 {
        return Ok(None);
    }
    if margin_at(tol::BISECT_LO)? > 0.0 {
        return Ok(Some(tol::BISECT_LO));
    }
    bisect_increasing(margin_at, tol::BISECT_LO, 1.0).map(Some)
}

/// Closed-form efficiency threshold: `1/(√3·p)` averaging over all
/// outcomes, `1/(3p²)` for detected outcomes only; `None` when the
/// threshold would lie at or above `eta = 1`.
pub fn epr_threshold_formula(p: f64, convention: InferenceConvention) -> Option<f64> {
    if p <= 0.0 {
        return None;
    }
    let t = match convention {
        InferenceConvention::AllOutcomes => 1.0 / (3.0_f64.sqrt() * p),
        InferenceConvention::DetectedOnly => 1.0 / (3.0 * p * p),
    };
    (t < 1.0).then_some(t)
}
