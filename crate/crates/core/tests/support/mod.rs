//! Independent reference implementations ("oracles") for the acceptance
//! suite.
//!
//! Two self-contained calculators live here, deliberately re-derived from
//! first principles so they share no code path with the library:
//!
//! - a brute-force joint-outcome-table oracle for the lossy single-pair
//!   family, built from literal matrix entries and literal site eigenvectors
//!   (no eigensolver, no operator clustering);
//! - a Gaussian moment composer for the squeezed-pair family, evaluating
//!   vacuum expectations of products of Bogoliubov-evolved mode operators by
//!   recursive pair contraction.

use num_complex::Complex;

pub type C64 = Complex<f64>;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

// ---------------------------------------------------------------------------
// Brute-force outcome-table oracle for the lossy pair family.
// ---------------------------------------------------------------------------

/// Literal 9×9 density matrix of the lossy pair state in tensor ordering
/// with site basis `|+1⟩, |-1⟩, |0⟩`.
pub fn oracle_lossy_matrix(p: f64, eta: f64) -> [[C64; 9]; 9] {
    let mut m = [[c(0.0); 9]; 9];
    let q = (1.0 - p) / 4.0;
    // Two-photon entries in the order (+,+), (+,-), (-,+), (-,-).
    let werner = |row: usize, col: usize| -> f64 {
        match (row, col) {
            (0, 0) | (3, 3) => q,
            (1, 1) | (2, 2) => q + p / 2.0,
            (1, 2) | (2, 1) => -p / 2.0,
            _ => 0.0,
        }
    };
    let tensor = [0usize, 1, 3, 4];
    for (r, &tr) in tensor.iter().enumerate() {
        for (col, &tc) in tensor.iter().enumerate() {
            m[tr][tc] = c(eta * eta * werner(r, col));
        }
    }
    for t in [2usize, 5, 6, 7] {
        m[t][t] = c(eta * (1.0 - eta) / 2.0);
    }
    m[8][8] = c((1.0 - eta) * (1.0 - eta));
    m
}

/// Site eigenbasis per axis (0 = x, 1 = y, 2 = z) as literal
/// (eigenvalue, eigenvector) triples on `|+1⟩, |-1⟩, |0⟩`.
pub fn site_eigenbasis(axis: usize) -> [(f64, [C64; 3]); 3] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let zero = [c(0.0), c(0.0), c(1.0)];
    match axis {
        0 => [
            (0.5, [c(h), c(h), c(0.0)]),
            (-0.5, [c(h), c(-h), c(0.0)]),
            (0.0, zero),
        ],
        1 => [
            (0.5, [c(h), C64::new(0.0, h), c(0.0)]),
            (-0.5, [c(h), C64::new(0.0, -h), c(0.0)]),
            (0.0, zero),
        ],
        2 => [
            (0.5, [c(1.0), c(0.0), c(0.0)]),
            (-0.5, [c(0.0), c(1.0), c(0.0)]),
            (0.0, zero),
        ],
        _ => panic!("axis {axis} out of range"),
    }
}

/// Joint outcome table from direct quadratic forms
/// `P(a, b) = ⟨e_a ⊗ f_b| ρ |e_a ⊗ f_b⟩`.
pub struct OracleTable {
    pub values: [f64; 3],
    pub probs: [[f64; 3]; 3],
}

pub fn oracle_joint_pmf(m: &[[C64; 9]; 9], axis: usize) -> OracleTable {
    let basis = site_eigenbasis(axis);
    let mut probs = [[0.0; 3]; 3];
    let mut values = [0.0; 3];
    for (i, (va, ea)) in basis.iter().enumerate() {
        values[i] = *va;
        for (j, (_, fb)) in basis.iter().enumerate() {
            let mut acc = c(0.0);
            for k in 0..3 {
                for l in 0..3 {
                    for kk in 0..3 {
                        for ll in 0..3 {
                            acc += (ea[k] * fb[l]).conj() * m[3 * k + l][3 * kk + ll]
                                * ea[kk]
                                * fb[ll];
                        }
                    }
                }
            }
            assert!(acc.im.abs() < 1e-12, "probability with imaginary part");
            probs[i][j] = acc.re;
        }
    }
    probs
        .iter()
        .flatten()
        .for_each(|&p| assert!(p > -1e-12, "negative probability {p}"));
    let total: f64 = probs.iter().flatten().sum();
    assert!((total - 1.0).abs() < 1e-12, "table sums to {total}");
    OracleTable { values, probs }
}

/// Oracle inferred variance for one axis table, by convention label:
/// `detected_only = true` restricts and renormalizes to A-outcomes `±1/2`.
pub fn oracle_inferred_variance(table: &OracleTable, detected_only: bool) -> f64 {
    let mut weighted = 0.0;
    let mut weight = 0.0;
    for (i, &a) in table.values.iter().enumerate() {
        if detected_only && a == 0.0 {
            continue;
        }
        let w: f64 = table.probs[i].iter().sum();
        if w == 0.0 {
            continue;
        }
        let mean: f64 = table.probs[i]
            .iter()
            .zip(&table.values)
            .map(|(p, b)| p * b)
            .sum::<f64>()
            / w;
        let second: f64 = table.probs[i]
            .iter()
            .zip(&table.values)
            .map(|(p, b)| p * b * b)
            .sum::<f64>()
            / w;
        weighted += w * (second - mean * mean);
        weight += w;
    }
    if detected_only {
        weighted / weight
    } else {
        weighted
    }
}

/// Oracle margin of the inference criterion: `⟨N^B⟩/2` minus the summed
/// three-axis inferred variance, everything from the oracle table alone.
pub fn oracle_epr_margin(p: f64, eta: f64, detected_only: bool) -> f64 {
    let m = oracle_lossy_matrix(p, eta);
    let mut lhs = 0.0;
    let mut nb = 0.0;
    for axis in 0..3 {
        let table = oracle_joint_pmf(&m, axis);
        lhs += oracle_inferred_variance(&table, detected_only);
        for (j, &b) in table.values.iter().enumerate() {
            if b != 0.0 {
                nb += table.probs.iter().map(|row| row[j]).sum::<f64>();
            }
        }
    }
    nb / 3.0 / 2.0 - lhs
}

/// Efficiency threshold of the oracle margin at fixed `p`, by bisection.
pub fn oracle_epr_threshold(p: f64, detected_only: bool) -> Option<f64> {
    if oracle_epr_margin(p, 1.0, detected_only) <= 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (1e-6, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if oracle_epr_margin(p, mid, detected_only) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// Gaussian moment composer for the squeezed pair family.
// ---------------------------------------------------------------------------

pub const A_PLUS: usize = 0;
pub const A_MINUS: usize = 1;
pub const B_PLUS: usize = 2;
pub const B_MINUS: usize = 3;
pub const VA_PLUS: usize = 4;
pub const VA_MINUS: usize = 5;
pub const VB_PLUS: usize = 6;
pub const VB_MINUS: usize = 7;

/// A linear form `Σ_k alpha[k]·c_k + beta[k]·c_k†` over the eight initial
/// vacuum modes.
#[derive(Clone, Copy)]
pub struct LinearForm {
    pub alpha: [C64; 8],
    pub beta: [C64; 8],
}

impl LinearForm {
    pub fn zero() -> Self {
        Self {
            alpha: [c(0.0); 8],
            beta: [c(0.0); 8],
        }
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zero();
        for k in 0..8 {
            out.alpha[k] = self.beta[k].conj();
            out.beta[k] = self.alpha[k].conj();
        }
        out
    }
}

/// Vacuum two-point function `⟨first · second⟩` of two linear forms, with
/// `first` standing to the left: only `c_k c_k†` survives.
pub fn contraction(first: &LinearForm, second: &LinearForm) -> C64 {
    (0..8).map(|k| first.alpha[k] * second.beta[k]).sum()
}

/// Vacuum expectation of an ordered product of linear forms by recursive
/// pairing: pair the first factor with each later one, keep relative order
/// in the remainder.
pub fn vacuum_moment(forms: &[LinearForm]) -> C64 {
    if forms.is_empty() {
        return c(1.0);
    }
    if forms.len() % 2 == 1 {
        return c(0.0);
    }
    let mut total = c(0.0);
    for j in 1..forms.len() {
        let pair = contraction(&forms[0], &forms[j]);
        if pair == c(0.0) {
            continue;
        }
        let mut rest = Vec::with_capacity(forms.len() - 2);
        rest.extend_from_slice(&forms[1..j]);
        rest.extend_from_slice(&forms[j + 1..]);
        total += pair * vacuum_moment(&rest);
    }
    total
}

/// Output annihilators `a±, b±` after two-mode squeezing of the cross pairs
/// followed by efficiency-`eta` beam splitters onto the vacuum ancillas.
///
/// The squeezing interaction pairs the modes antisymmetrically,
/// `a₊†b₋† - a₋†b₊†`, which is invariant under joint polarization rotations
/// of the two sites — that invariance is what makes every spin moment
/// isotropic across axes. (The symmetric `+` pairing would anti-squeeze the
/// collective x and y spins instead.)
pub struct EvolvedModes {
    /// Order: `a+, a-, b+, b-`.
    pub modes: [LinearForm; 4],
}

pub fn evolved_modes(r: f64, eta: f64) -> EvolvedModes {
    let (ch, sh) = (r.cosh(), r.sinh());
    let (t, l) = (eta.sqrt(), (1.0 - eta).sqrt());
    let mut modes = [LinearForm::zero(); 4];

    modes[0].alpha[A_PLUS] = c(t * ch);
    modes[0].beta[B_MINUS] = c(t * sh);
    modes[0].alpha[VA_PLUS] = c(l);

    modes[1].alpha[A_MINUS] = c(t * ch);
    modes[1].beta[B_PLUS] = c(-t * sh);
    modes[1].alpha[VA_MINUS] = c(l);

    modes[2].alpha[B_PLUS] = c(t * ch);
    modes[2].beta[A_MINUS] = c(-t * sh);
    modes[2].alpha[VB_PLUS] = c(l);

    modes[3].alpha[B_MINUS] = c(t * ch);
    modes[3].beta[A_PLUS] = c(t * sh);
    modes[3].alpha[VB_MINUS] = c(l);

    EvolvedModes { modes }
}

/// Sum of coefficient-weighted ordered products of linear forms.
pub struct OperatorPoly(pub Vec<(C64, Vec<LinearForm>)>);

impl OperatorPoly {
    pub fn mul(&self, rhs: &OperatorPoly) -> OperatorPoly {
        let mut out = Vec::with_capacity(self.0.len() * rhs.0.len());
        for (ca, fa) in &self.0 {
            for (cb, fb) in &rhs.0 {
                let mut prod = fa.clone();
                prod.extend_from_slice(fb);
                out.push((ca * cb, prod));
            }
        }
        OperatorPoly(out)
    }

    pub fn expectation(&self) -> C64 {
        self.0
            .iter()
            .map(|(coeff, forms)| coeff * vacuum_moment(forms))
            .sum()
    }
}

/// Spin component of one site (0 = A, 1 = B) as an operator polynomial in
/// the evolved modes: `J_x = (p†m + m†p)/2`, `J_y = (p†m - m†p)/(2i)`,
/// `J_z = (p†p - m†m)/2` with `p, m` the site's `±` modes.
pub fn spin_poly(modes: &EvolvedModes, site: usize, axis: usize) -> OperatorPoly {
    let (p, m) = match site {
        0 => (modes.modes[0], modes.modes[1]),
        1 => (modes.modes[2], modes.modes[3]),
        _ => panic!("site {site} out of range"),
    };
    let half = c(0.5);
    let ihalf = C64::new(0.0, 0.5);
    match axis {
        0 => OperatorPoly(vec![
            (half, vec![p.dagger(), m]),
            (half, vec![m.dagger(), p]),
        ]),
        1 => OperatorPoly(vec![
            (-ihalf, vec![p.dagger(), m]),
            (ihalf, vec![m.dagger(), p]),
        ]),
        2 => OperatorPoly(vec![
            (half, vec![p.dagger(), p]),
            (-half, vec![m.dagger(), m]),
        ]),
        _ => panic!("axis {axis} out of range"),
    }
}

/// Photon number of one site as an operator polynomial.
pub fn number_poly(modes: &EvolvedModes, site: usize) -> OperatorPoly {
    let (p, m) = match site {
        0 => (modes.modes[0], modes.modes[1]),
        1 => (modes.modes[2], modes.modes[3]),
        _ => panic!("site {site} out of range"),
    };
    OperatorPoly(vec![
        (c(1.0), vec![p.dagger(), p]),
        (c(1.0), vec![m.dagger(), m]),
    ])
}

/// Real part of an expectation that must be real; asserts the imaginary
/// part is negligible relative to the magnitude.
pub fn real_expectation(poly: &OperatorPoly) -> f64 {
    let value = poly.expectation();
    assert!(
        value.im.abs() <= 1e-12 * value.re.abs().max(1.0),
        "expectation {value} is not real"
    );
    value.re
}
