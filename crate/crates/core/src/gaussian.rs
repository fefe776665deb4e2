//! Macroscopic spin correlations of two-mode squeezed light under loss.
//!
//! Two squeezed-vacuum pairs link the sites — the `+`-polarized mode at A
//! with the `-`-polarized mode at B, and vice versa, combined in the
//! antisymmetric pairing `a₊†b₋† - a₋†b₊†` that is invariant under joint
//! polarization rotations — so each site carries two modes with
//! `s̄ = sinh²r` photons per mode before loss. Every mode then passes an
//! independent efficiency-`eta` beam-splitter channel. Spin components are
//! Stokes-operator differences, e.g. `J_z^A = (a₊†a₊ - a₋†a₋)/2`; the
//! rotation invariance makes every moment below isotropic across axes, all
//! first moments vanish, and the second moments follow from Gaussian moment
//! factorization, giving the closed forms implemented here.
//!
//! Unlike the single-pair family, the collective-spin entanglement
//! criterion for these states is satisfied exactly when `eta > 1/3`,
//! independent of the squeezing strength. The inference criterion depends
//! on the occupation: its efficiency threshold rises from `1/√3` in the
//! weak-squeezing limit towards `2/3` as the per-mode occupation grows.

use serde::{Deserialize, Serialize};

use crate::criteria::{bisect_increasing, CriterionReport};
use crate::{tol, Error, Result};

/// Squeezing strength and detection efficiency of the macroscopic pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeLossParams {
    r: f64,
    eta: f64,
}

impl SqueezeLossParams {
    /// Validate `0 ≤ r ≤ `[`tol::R_MAX`] and `0 ≤ eta ≤ 1`.
    pub fn new(r: f64, eta: f64) -> Result<Self> {
        if !(0.0..=tol::R_MAX).contains(&r) || !r.is_finite() {
            return Err(Error::Domain {
                name: "r",
                value: r,
                range: "[0, 20]",
            });
        }
        if !(0.0..=1.0).contains(&eta) || !eta.is_finite() {
            return Err(Error::Domain {
                name: "eta",
                value: eta,
                range: "[0, 1]",
            });
        }
        Ok(Self { r, eta })
    }

    /// Squeezing parameter.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Detection efficiency.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Mean photons per mode before loss, `sinh²r`.
    pub fn mean_occupation(&self) -> f64 {
        sinh_sq(self.r)
    }
}

/// `sinh²r` evaluated as `(expm1(2r) + expm1(-2r))/4`, which stays accurate
/// for small `r` where squaring `sinh` loses relative precision.
pub fn sinh_sq(r: f64) -> f64 {
    ((2.0 * r).exp_m1() + (-2.0 * r).exp_m1()) / 4.0
}

/// Second moments of the site spins for the lossy squeezed pair.
///
/// With `s̄ = sinh²r`, the moments are isotropic across axes:
/// `⟨(J^A)²⟩ = eta·s̄(1 + eta·s̄)/2` per axis, the cross-correlator
/// `⟨J^A J^B⟩ = -eta²cosh²r·s̄/2`, site numbers `⟨N^A⟩ = ⟨N^B⟩ = 2eta·s̄`,
/// and each collective variance `Var(J^A + J^B) = eta(1 - eta)s̄`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpinMoments {
    /// Per-axis single-site second moment `⟨(J^A)²⟩ = ⟨(J^B)²⟩`.
    pub jz2_local: f64,
    /// Per-axis cross-site correlator `⟨J^A J^B⟩` (negative).
    pub jz_cross: f64,
    /// Mean photon number at site A.
    pub n_a: f64,
    /// Mean photon number at site B.
    pub n_b: f64,
    /// Per-axis collective variance `Var(J^A + J^B)`.
    pub collective_var: f64,
}

/// Spin second moments of the lossy squeezed pair.
pub fn spin_moments(params: &SqueezeLossParams) -> GaussianSpinMoments {
    let eta = params.eta();
    let s = sinh_sq(params.r());
    let cosh_sq = 1.0 + s;
    let jz2_local = 0.5 * eta * s * (1.0 + eta * s);
    let jz_cross = -0.5 * eta * eta * cosh_sq * s;
    GaussianSpinMoments {
        jz2_local,
        jz_cross,
        n_a: 2.0 * eta * s,
        n_b: 2.0 * eta * s,
        collective_var: eta * (1.0 - eta) * s,
    }
}

/// Optimal linear inference of one site's spin from the other's.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianInference {
    /// Residual variance of `J^B` after subtracting the best linear
    /// prediction from `J^A` (per axis).
    pub variance: f64,
    /// Magnitude of the optimal linear gain `|Cov(J^A, J^B)| / Var(J^A)`.
    pub gain: f64,
}

/// Residual variance and gain of the best linear estimate of `J^B` from
/// `J^A`. For a Gaussian joint distribution this equals the conditional
/// variance, so no convention split arises here.
///
/// Errors with [`Error::Degenerate`] at `r = 0`, where `J^A` has zero
/// variance and carries no information to condition on.
pub fn inferred_variance_gaussian(params: &SqueezeLossParams) -> Result<GaussianInference> {
    let eta = params.eta();
    let s = sinh_sq(params.r());
    if s <= 0.0 {
        return Err(Error::Degenerate(
            "no squeezing: the predictor spin has zero variance".into(),
        ));
    }
    let denom = 1.0 + eta * s;
    let variance = eta * s * (1.0 - eta) * (1.0 + eta + 2.0 * eta * s) / (2.0 * denom);
    let gain = eta * (1.0 + s) / denom;
    Ok(GaussianInference { variance, gain })
}

/// Collective-spin uncertainty criterion for the squeezed pair:
/// `3·Var(J^A + J^B) < ⟨N^A + N^B⟩/2`, i.e. `3eta(1-eta)s̄ < 2eta·s̄`.
///
/// The occupation cancels from both sides, so the verdict depends only on
/// the efficiency: satisfied exactly when `eta > 1/3`. At `r = 0` the state
/// is vacuum and the report degenerates to `0 < 0` (unsatisfied).
pub fn macroscopic_entanglement_check(params: &SqueezeLossParams) -> Result<CriterionReport> {
    let m = spin_moments(params);
    let lhs = 3.0 * m.collective_var;
    let rhs = (m.n_a + m.n_b) / 2.0;
    Ok(CriterionReport::new(
        "macroscopic-collective-spin",
        lhs,
        rhs,
        None,
    ))
}

/// Inference criterion for the squeezed pair: `3·Δ²_inf J^B < ⟨N^B⟩/2`.
///
/// Errors with [`Error::Degenerate`] at `r = 0` (nothing to infer from).
pub fn macroscopic_epr_check(params: &SqueezeLossParams) -> Result<CriterionReport> {
    let inference = inferred_variance_gaussian(params)?;
    let m = spin_moments(params);
    Ok(CriterionReport::new(
        "macroscopic-epr-inference",
        3.0 * inference.variance,
        m.n_b / 2.0,
        None,
    ))
}

/// Minimal efficiency satisfying the inference criterion at fixed per-mode
/// occupation `s̄ > 0`: the positive root of
/// `(3 + 6s̄)·eta² - 4s̄·eta - 1 = 0`, which grows from `1/√3` at `s̄ → 0`
/// to `2/3` as `s̄ → ∞`.
pub fn epr_threshold_at_squeezing(s_bar: f64) -> Result<f64> {
    if s_bar <= 0.0 || !s_bar.is_finite() {
        return Err(Error::Domain {
            name: "s_bar",
            value: s_bar,
            range: "(0, inf)",
        });
    }
    let a = 3.0 + 6.0 * s_bar;
    Ok((2.0 * s_bar + (4.0 * s_bar * s_bar + 6.0 * s_bar + 3.0).sqrt()) / a)
}

/// Closed-form inference threshold at fixed site occupation `nb = ⟨N^B⟩`:
/// the positive root of `3eta² + 3nb·eta - (1 + 2nb) = 0`.
///
/// Holding `nb` fixed re-adjusts the squeezing as the efficiency varies, so
/// this threshold differs from [`epr_threshold_at_squeezing`]; it runs from
/// `1/√3` at `nb → 0` to `2/3` as `nb → ∞`.
pub fn epr_threshold_at_occupation(nb: f64) -> Result<f64> {
    if nb <= 0.0 || !nb.is_finite() {
        return Err(Error::Domain {
            name: "nb",
            value: nb,
            range: "(0, inf)",
        });
    }
    Ok((-3.0 * nb + (9.0 * nb * nb + 24.0 * nb + 12.0).sqrt()) / 6.0)
}

/// One row of the efficiency-threshold curve at fixed site occupation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroThresholdPoint {
    /// Mean detected photon number per site, held fixed along the sweep.
    pub nb: f64,
    /// Minimal efficiency for the collective-spin criterion (`1/3`,
    /// independent of `nb`), when reachable below unit efficiency.
    pub eta_min_entanglement: Option<f64>,
    /// Minimal efficiency for the inference criterion, when reachable.
    pub eta_min_epr: Option<f64>,
}

/// Efficiency thresholds of both macroscopic criteria along a sweep of the
/// detected site occupation `nb = 2·eta·s̄`.
///
/// Holding `nb` fixed while varying `eta` means re-adjusting the squeezing
/// to `s̄ = nb/(2eta)`; each margin is monotone in `eta` and the roots are
/// found by bisection on the evaluated criteria. Requires every `nb > 0`
/// small enough that the implied squeezing stays within [`tol::R_MAX`].
pub fn epr_threshold_curve(nb_values: &[f64]) -> Result<Vec<MacroThresholdPoint>> {
    let mut out = Vec::with_capacity(nb_values.len());
    for &nb in nb_values {
        if nb <= 0.0 || !nb.is_finite() {
            return Err(Error::Domain {
                name: "nb",
                value: nb,
                range: "(0, inf)",
            });
        }
        let params_at = |eta: f64| -> Result<SqueezeLossParams> {
            let s = nb / (2.0 * eta);
            SqueezeLossParams::new(s.sqrt().asinh(), eta)
        };
        let ent_margin = |eta: f64| Ok(macroscopic_entanglement_check(&params_at(eta)?)?.margin);
        let epr_margin = |eta: f64| Ok(macroscopic_epr_check(&params_at(eta)?)?.margin);
        let bracketed_root = |f: &dyn Fn(f64) -> Result<f64>| -> Result<Option<f64>> {
            if f(1.0)? <= 0.0 {
                return Ok(None);
            }
            if f(tol::BISECT_LO)? > 0.0 {
                return Ok(Some(tol::BISECT_LO));
            }
            bisect_increasing(f, tol::BISECT_LO, 1.0).map(Some)
        };
        out.push(MacroThresholdPoint {
            nb,
            eta_min_entanglement: bracketed_root(&ent_margin)?,
            eta_min_epr: bracketed_root(&epr_margin)?,
        });
    }
    Ok(out)
}
