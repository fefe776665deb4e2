//! State constructors and measurement operators for the two-site photon pair.
//!
//! Two detection spaces appear throughout:
//!
//! - **qubit pair** (dim 4, shape 2×2): both photons present, site basis
//!   `(|+1⟩, |-1⟩)`, composite ordering `(+,+), (+,-), (-,+), (-,-)`;
//! - **qutrit pair** (dim 9, shape 3×3): a site may also have lost its
//!   photon, site basis `(|+1⟩, |-1⟩, |0⟩)` with `|0⟩` the empty (vacuum)
//!   outcome, composite index `3·a + b`.
//!
//! The canonical in-memory ordering is always the tensor-product ordering
//! above, so the kernel's partial transpose/trace apply directly. The
//! photon-number-grouped labelling `u1…u9` (two-photon block first, then the
//! single-photon states, then the vacuum) is exposed by [`QutritPairBasis`] as
//! a documented permutation of the tensor indices.
//!
//! Spin is measured per site through the mode operators of the `±` photon
//! channels (`J_x = (a₊†a₋ + a₋†a₊)/2` and cyclic); with at most one photon
//! per site each component has outcomes `±1/2` (photon detected) and `0`
//! (site empty). The site photon number `N = a₊†a₊ + a₋†a₋` coincides with
//! the detection projector on this truncation, so the measured-spin operator
//! `J_θ·P` equals `J_θ` itself and needs no separate constructor.

use serde::{Deserialize, Serialize};

use crate::qmatrix::{C64, ComplexMatrix, DensityMatrix, Observable, SubsystemShape, ZERO};
use crate::{tol, Error, Result};

/// Mixedness and detection-efficiency parameters of the lossy pair family.
///
/// `p` interpolates between the maximally mixed pair (`p = 0`) and the pure
/// singlet (`p = 1`); `eta` is the per-photon transmission/detection
/// efficiency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WernerLossParams {
    p: f64,
    eta: f64,
}

impl WernerLossParams {
    /// Validate `0 ≤ p ≤ 1` and `0 ≤ eta ≤ 1`.
    pub fn new(p: f64, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::Domain {
                name: "p",
                value: p,
                range: "[0, 1]",
            });
        }
        if !(0.0..=1.0).contains(&eta) || !eta.is_finite() {
            return Err(Error::Domain {
                name: "eta",
                value: eta,
                range: "[0, 1]",
            });
        }
        Ok(Self { p, eta })
    }

    /// Singlet weight.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Detection efficiency.
    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// Measurement axis for a spin component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpinAxis {
    X,
    Y,
    Z,
}

impl SpinAxis {
    /// All three axes in `x, y, z` order.
    pub const ALL: [SpinAxis; 3] = [SpinAxis::X, SpinAxis::Y, SpinAxis::Z];

    /// Stable index `x → 0, y → 1, z → 2` (used for RNG stream derivation).
    pub fn index(&self) -> usize {
        match self {
            SpinAxis::X => 0,
            SpinAxis::Y => 1,
            SpinAxis::Z => 2,
        }
    }

    /// Lower-case axis name.
    pub fn label(&self) -> &'static str {
        match self {
            SpinAxis::X => "x",
            SpinAxis::Y => "y",
            SpinAxis::Z => "z",
        }
    }
}

/// The two measurement sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Site {
    A,
    B,
}

/// Which detection space an operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectionSpace {
    /// Both photons present: 2×2 sites, dim 4.
    QubitPair,
    /// Loss included: 3×3 sites, dim 9.
    QutritPair,
}

impl DetectionSpace {
    /// Per-site dimension.
    pub fn site_dim(&self) -> usize {
        match self {
            DetectionSpace::QubitPair => 2,
            DetectionSpace::QutritPair => 3,
        }
    }

    /// Composite subsystem shape (two equal sites).
    pub fn shape(&self) -> SubsystemShape {
        SubsystemShape::pair(self.site_dim())
    }
}

/// Photon-number sector of a qutrit-pair basis state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhotonBlock {
    /// Both sites occupied (`u1…u4`).
    TwoPhoton,
    /// Only site A occupied (`u5, u6`).
    OnePhotonA,
    /// Only site B occupied (`u7, u8`).
    OnePhotonB,
    /// Both photons lost (`u9`).
    Vacuum,
}

/// Photon-number-grouped labelling `u1…u9` of the qutrit-pair basis.
///
/// `u1…u4` are the two-photon states in the order `(+,+), (+,-), (-,+),
/// (-,-)`; `u5, u6` are `|+1,0⟩, |-1,0⟩`; `u7, u8` are `|0,+1⟩, |0,-1⟩`;
/// `u9` is `|0,0⟩`. The table below maps each label (0-based: `u1` is index
/// 0) to its tensor-product index `3·a + b`.
pub struct QutritPairBasis;

impl QutritPairBasis {
    /// Ket labels in `u` order.
    pub const LABELS: [&'static str; 9] = [
        "|+1,+1>", "|+1,-1>", "|-1,+1>", "|-1,-1>", "|+1,0>", "|-1,0>", "|0,+1>", "|0,-1>",
        "|0,0>",
    ];

    /// Tensor-product index of the `u`-th label (0-based).
    pub const TENSOR_INDEX: [usize; 9] = [0, 1, 3, 4, 2, 5, 6, 7, 8];

    /// Tensor-product index of `u` (0-based: pass 0 for `u1`).
    pub fn tensor_index(u: usize) -> usize {
        Self::TENSOR_INDEX[u]
    }

    /// Photon-number sector of the `u`-th label (0-based).
    pub fn block(u: usize) -> PhotonBlock {
        match u {
            0..=3 => PhotonBlock::TwoPhoton,
            4 | 5 => PhotonBlock::OnePhotonA,
            6 | 7 => PhotonBlock::OnePhotonB,
            8 => PhotonBlock::Vacuum,
            _ => panic!("u index {u} out of range"),
        }
    }
}

/// Diagonal weights of the three photon-number sectors of a qutrit-pair state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockWeights {
    pub two_photon: f64,
    pub one_photon: f64,
    pub vacuum: f64,
}

/// Photon-number sector weights of a 9-dim state.
pub fn block_weights(rho: &DensityMatrix) -> Result<BlockWeights> {
    require_qutrit_pair(rho)?;
    let mut w = BlockWeights {
        two_photon: 0.0,
        one_photon: 0.0,
        vacuum: 0.0,
    };
    for u in 0..9 {
        let t = QutritPairBasis::tensor_index(u);
        let d = rho.matrix().get(t, t).re;
        match QutritPairBasis::block(u) {
            PhotonBlock::TwoPhoton => w.two_photon += d,
            PhotonBlock::OnePhotonA | PhotonBlock::OnePhotonB => w.one_photon += d,
            PhotonBlock::Vacuum => w.vacuum += d,
        }
    }
    Ok(w)
}

/// The spin-singlet pair `(|+1,-1⟩ - |-1,+1⟩)/√2` on the qubit-pair space.
pub fn bell_singlet() -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = [ZERO, C64::new(h, 0.0), C64::new(-h, 0.0), ZERO];
    DensityMatrix::new(ComplexMatrix::outer(&v), SubsystemShape::pair(2))
        .expect("singlet is a valid state")
}

/// Singlet/maximally-mixed blend `p·ρ_singlet + (1-p)·I/4`.
pub fn werner_state(p: f64) -> Result<DensityMatrix> {
    let params = WernerLossParams::new(p, 1.0)?; // reuse the p-range check
    let p = params.p();
    let s = bell_singlet();
    let m = &s.matrix().scale_re(p) + &ComplexMatrix::identity(4).scale_re((1.0 - p) / 4.0);
    DensityMatrix::new(m, SubsystemShape::pair(2))
}

/// Purity `Tr[ρ_W²] = (3p² + 1)/4` of the blended pair state.
///
/// Evaluates both the closed form and the numerical trace and asserts they
/// agree to 1e-12 before returning the closed form.
pub fn werner_purity(p: f64) -> Result<f64> {
    let closed = (3.0 * p * p + 1.0) / 4.0;
    let numeric = werner_state(p)?.purity();
    assert!(
        (closed - numeric).abs() < 1e-12,
        "purity closed form {closed} vs numeric {numeric}"
    );
    Ok(closed)
}

/// Closed-form state of the pair after each photon independently passes a
/// transmission-`eta` channel: the two-photon block keeps the blended pair
/// state with weight `eta²`, each single-photon state carries
/// `eta(1-eta)/2`, and the vacuum `(1-eta)²`.
pub fn lossy_state_closed_form(params: &WernerLossParams) -> Result<DensityMatrix> {
    let (p, eta) = (params.p(), params.eta());
    let rw = werner_state(p)?;
    let mut m = ComplexMatrix::zeros(9);
    for s in 0..2 {
        for t in 0..2 {
            for sp in 0..2 {
                for tp in 0..2 {
                    let v = rw.matrix().get(2 * s + t, 2 * sp + tp) * (eta * eta);
                    m.set(3 * s + t, 3 * sp + tp, v);
                }
            }
        }
    }
    let single = eta * (1.0 - eta) / 2.0;
    for u in 4..8 {
        let t = QutritPairBasis::tensor_index(u);
        m.set(t, t, C64::new(single, 0.0));
    }
    m.set(8, 8, C64::new((1.0 - eta) * (1.0 - eta), 0.0));
    DensityMatrix::new(m, SubsystemShape::pair(3))
}

/// Independent construction of the lossy state by explicit beam-splitter
/// dilation.
///
/// Eight optical modes (the four spin modes `a±, b±` interleaved with one
/// vacuum ancilla each, occupation ≤ 1) start in `ρ_W ⊗ |vac⟩⟨vac|`; a
/// two-mode beam-splitter rotation of angle `cos θ = √eta` couples every
/// spin mode to its ancilla; the ancillas are traced out and the four-mode
/// state is relabelled onto the qutrit pair. Photon number is conserved per
/// mode pair and the input has at most one photon per pair, so truncating
/// each mode at occupation 1 is exact.
pub fn lossy_state_dilation(params: &WernerLossParams) -> Result<DensityMatrix> {
    let (p, eta) = (params.p(), params.eta());
    let rw = werner_state(p)?;

    // Mode order: (a+, v_a+, a-, v_a-, b+, v_b+, b-, v_b-), one bit each.
    // Embedding of the spin basis: s = 0 means the site photon occupies the
    // `+` mode, s = 1 the `-` mode.
    let full_shape = SubsystemShape::new(vec![2; 8])?;
    let occupation = |s: usize, t: usize| -> usize {
        let bits = [
            (s == 0) as usize, // a+
            0,                 // v_a+
            (s == 1) as usize, // a-
            0,                 // v_a-
            (t == 0) as usize, // b+
            0,                 // v_b+
            (t == 1) as usize, // b-
            0,                 // v_b-
        ];
        full_shape.compose(&bits)
    };

    let mut big = ComplexMatrix::zeros(256);
    for s in 0..2 {
        for t in 0..2 {
            for sp in 0..2 {
                for tp in 0..2 {
                    big.set(
                        occupation(s, t),
                        occupation(sp, tp),
                        rw.matrix().get(2 * s + t, 2 * sp + tp),
                    );
                }
            }
        }
    }

    // Beam splitter on one (mode, ancilla) pair, basis |n_mode n_anc⟩ in the
    // order 00, 01, 10, 11: rotation in the one-photon subspace {01, 10},
    // identity elsewhere (the 11 state is unreachable).
    let (ct, st) = (eta.sqrt(), (1.0 - eta).sqrt());
    let mut bs = ComplexMatrix::identity(4);
    bs.set(2, 2, C64::new(ct, 0.0));
    bs.set(1, 2, C64::new(st, 0.0));
    bs.set(1, 1, C64::new(ct, 0.0));
    bs.set(2, 1, C64::new(-st, 0.0));

    // The four beam splitters act on disjoint adjacent pairs: apply each as a
    // local factor of the 4^4 decomposition.
    let mut state = big;
    for pair in 0..4 {
        state = apply_factor_unitary(&state, &bs, pair, 4);
    }

    let four_mode = state.partial_trace(&full_shape, &[0, 2, 4, 6])?;

    // Relabel occupations onto the qutrit pair; a doubly-occupied site cannot
    // occur (photon number is conserved pairwise).
    let mode_shape = SubsystemShape::new(vec![2; 4])?;
    let site_of = |n_plus: usize, n_minus: usize| -> Option<usize> {
        match (n_plus, n_minus) {
            (1, 0) => Some(0),
            (0, 1) => Some(1),
            (0, 0) => Some(2),
            _ => None,
        }
    };
    let mut m9 = ComplexMatrix::zeros(9);
    let mut invalid_weight = 0.0;
    for row in 0..16 {
        let rb = mode_shape.decompose(row);
        let (ra, rbb) = match (site_of(rb[0], rb[1]), site_of(rb[2], rb[3])) {
            (Some(x), Some(y)) => (x, y),
            _ => {
                invalid_weight += four_mode.get(row, row).re;
                continue;
            }
        };
        for col in 0..16 {
            let cb = mode_shape.decompose(col);
            let (ca, cbb) = match (site_of(cb[0], cb[1]), site_of(cb[2], cb[3])) {
                (Some(x), Some(y)) => (x, y),
                _ => continue,
            };
            m9.set(3 * ra + rbb, 3 * ca + cbb, four_mode.get(row, col));
        }
    }
    if invalid_weight.abs() > tol::PROJECTION_WEIGHT {
        return Err(Error::ContractViolation(format!(
            "doubly-occupied site weight {invalid_weight:.3e} in loss dilation"
        )));
    }
    DensityMatrix::new(m9, SubsystemShape::pair(3))
}

/// Apply `(I ⊗ … ⊗ u ⊗ … ⊗ I) ρ (…)†` where `u` sits at `factor` of
/// `num_factors` equal tensor slots of dimension `u.dim()`.
fn apply_factor_unitary(
    rho: &ComplexMatrix,
    u: &ComplexMatrix,
    factor: usize,
    num_factors: usize,
) -> ComplexMatrix {
    let d = u.dim();
    let total = rho.dim();
    let stride = d.pow((num_factors - 1 - factor) as u32);
    let replace = |idx: usize, x: usize| -> usize {
        let cur = (idx / stride) % d;
        idx - cur * stride + x * stride
    };

    // Left multiply.
    let mut tmp = ComplexMatrix::zeros(total);
    for i in 0..total {
        let ik = (i / stride) % d;
        for x in 0..d {
            let c = u.get(ik, x);
            if c == ZERO {
                continue;
            }
            let src = replace(i, x);
            for j in 0..total {
                let v = tmp.get(i, j) + c * rho.get(src, j);
                tmp.set(i, j, v);
            }
        }
    }
    // Right multiply by the adjoint.
    let mut out = ComplexMatrix::zeros(total);
    for j in 0..total {
        let jk = (j / stride) % d;
        for y in 0..d {
            let c = u.get(jk, y).conj();
            if c == ZERO {
                continue;
            }
            let src = replace(j, y);
            for i in 0..total {
                let v = out.get(i, j) + tmp.get(i, src) * c;
                out.set(i, j, v);
            }
        }
    }
    out
}

/// Single-site spin component as a matrix on the site space.
fn site_spin(axis: SpinAxis, site_dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(site_dim);
    match axis {
        SpinAxis::X => {
            m.set(0, 1, C64::new(0.5, 0.0));
            m.set(1, 0, C64::new(0.5, 0.0));
        }
        SpinAxis::Y => {
            m.set(0, 1, C64::new(0.0, -0.5));
            m.set(1, 0, C64::new(0.0, 0.5));
        }
        SpinAxis::Z => {
            m.set(0, 0, C64::new(0.5, 0.0));
            m.set(1, 1, C64::new(-0.5, 0.0));
        }
    }
    m
}

/// Embed a single-site operator at the given site of a two-site space.
fn at_site(op: &ComplexMatrix, site: Site) -> ComplexMatrix {
    let eye = ComplexMatrix::identity(op.dim());
    match site {
        Site::A => op.kron(&eye),
        Site::B => eye.kron(op),
    }
}

/// Spin component `J_axis` of one site on the chosen detection space.
///
/// Outcomes are `±1/2` on an occupied site; the qutrit space adds the
/// eigenvalue `0` for the empty site.
pub fn spin_operator(site: Site, axis: SpinAxis, space: DetectionSpace) -> Observable {
    let op = site_spin(axis, space.site_dim());
    Observable::new(at_site(&op, site)).expect("spin operators are Hermitian")
}

/// Collective spin component `J_axis^A + J_axis^B`.
pub fn collective_spin(axis: SpinAxis, space: DetectionSpace) -> Observable {
    spin_operator(Site::A, axis, space).sum(&spin_operator(Site::B, axis, space))
}

/// Site photon number `N = a₊†a₊ + a₋†a₋`, which doubles as the detection
/// projector on spaces truncated at one photon per site.
pub fn number_operator(site: Site, space: DetectionSpace) -> Observable {
    let d = space.site_dim();
    let mut op = ComplexMatrix::identity(d);
    if d == 3 {
        op.set(2, 2, ZERO); // vacuum carries no photon
    }
    Observable::new(at_site(&op, site)).expect("number operators are Hermitian")
}

/// Total photon number `N^A + N^B`.
pub fn total_number(space: DetectionSpace) -> Observable {
    number_operator(Site::A, space).sum(&number_operator(Site::B, space))
}

fn require_qutrit_pair(rho: &DensityMatrix) -> Result<()> {
    if rho.shape() != &SubsystemShape::pair(3) {
        return Err(Error::InvalidShape(format!(
            "expected a 3x3-site state, got {:?}",
            rho.shape().dims()
        )));
    }
    Ok(())
}

/// Restrict a qutrit-pair state to the both-photons-detected sector and
/// renormalize: `P^A P^B ρ P^A P^B / Tr[ρ P^A P^B]`.
///
/// Errors with [`Error::Degenerate`] when the sector weight is below
/// [`tol::PROJECTION_WEIGHT`].
pub fn project_two_photon(rho: &DensityMatrix) -> Result<DensityMatrix> {
    require_qutrit_pair(rho)?;
    let mut sub = ComplexMatrix::zeros(4);
    for s in 0..2 {
        for t in 0..2 {
            for sp in 0..2 {
                for tp in 0..2 {
                    sub.set(
                        2 * s + t,
                        2 * sp + tp,
                        rho.matrix().get(3 * s + t, 3 * sp + tp),
                    );
                }
            }
        }
    }
    let weight = sub.trace().re;
    if weight <= tol::PROJECTION_WEIGHT {
        return Err(Error::Degenerate(format!(
            "two-photon sector weight {weight:.3e} too small to condition on"
        )));
    }
    DensityMatrix::new(sub.scale_re(1.0 / weight), SubsystemShape::pair(2))
}

/// Embed a qubit-pair state into the two-photon sector of the qutrit pair
/// (all loss sectors empty). Inverse of [`project_two_photon`] on its image.
pub fn embed_qubit_pair(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.shape() != &SubsystemShape::pair(2) {
        return Err(Error::InvalidShape(format!(
            "expected a 2x2-site state, got {:?}",
            rho.shape().dims()
        )));
    }
    let mut m = ComplexMatrix::zeros(9);
    for s in 0..2 {
        for t in 0..2 {
            for sp in 0..2 {
                for tp in 0..2 {
                    m.set(
                        3 * s + t,
                        3 * sp + tp,
                        rho.matrix().get(2 * s + t, 2 * sp + tp),
                    );
                }
            }
        }
    }
    DensityMatrix::new(m, SubsystemShape::pair(3))
}
