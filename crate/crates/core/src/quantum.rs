//! States, measurements and observables.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    contract_leading, hermitian_eigenvalues, kron, kron_vec, partial_trace, partial_transpose, pauli_x,
    pauli_z, permute_subsystems, DimList, Matrix, C64, ONE, ZERO,
};
use crate::tolerance;

/// Relative sign between the two branches of a GHZ-type superposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    vec: Vec<C64>,
    dims: DimList,
}

impl PureState {
    pub fn new(vec: Vec<C64>, dims: DimList) -> Result<Self> {
        if vec.len() != dims.total() {
            return Err(Error::InvalidDims(format!("{} amplitudes for dims {dims}", vec.len())));
        }
        let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tolerance::PURE_NORM {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(Self { vec, dims })
    }

    /// Normalizes `vec` first; fails only on a zero vector.
    pub fn normalized(vec: Vec<C64>, dims: DimList) -> Result<Self> {
        let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= tolerance::ZERO_PROBABILITY {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(vec.into_iter().map(|z| z / norm).collect(), dims)
    }

    pub fn basis(index: usize, dims: DimList) -> Result<Self> {
        let mut v = vec![ZERO; dims.total()];
        *v.get_mut(index)
            .ok_or_else(|| Error::InvalidDims(format!("basis index {index} out of range")))? = ONE;
        Self::new(v, dims)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.vec
    }

    pub fn dims(&self) -> &DimList {
        &self.dims
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator { mat: Matrix::outer(&self.vec), dims: self.dims.clone() }
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState { vec: kron_vec(&self.vec, &other.vec), dims: self.dims.concat(&other.dims) }
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.vec.iter().zip(&other.vec).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    mat: Matrix,
    dims: DimList,
}

impl DensityOperator {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(mat: Matrix, dims: DimList) -> Result<Self> {
        dims.check_matrix(&mat)?;
        let deviation = mat.hermitian_deviation();
        if deviation > tolerance::HERMITIAN {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tolerance::TRACE || tr.im.abs() > tolerance::TRACE {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eigenvalues(&mat)?[0];
        if min < -tolerance::PSD {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { mat, dims })
    }

    /// For operators that are positive with unit trace by construction
    /// (tensor products, renormalized collapses, reorderings of valid states).
    pub(crate) fn trusted(mat: Matrix, dims: DimList) -> Self {
        debug_assert_eq!(mat.rows(), dims.total());
        Self { mat, dims }
    }

    pub fn maximally_mixed(dims: DimList) -> Self {
        let n = dims.total();
        Self { mat: Matrix::identity(n).scale(1.0 / n as f64), dims }
    }

    pub fn mat(&self) -> &Matrix {
        &self.mat
    }

    pub fn dims(&self) -> &DimList {
        &self.dims
    }

    pub fn into_parts(self) -> (Matrix, DimList) {
        (self.mat, self.dims)
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        Self::trusted(kron(&self.mat, &other.mat), self.dims.concat(&other.dims))
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::InvalidDims("reduced state needs at least one subsystem".into()));
        }
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        let mat = partial_trace(&self.mat, &self.dims, &sorted)?;
        Ok(Self::trusted(mat, self.dims.select(&sorted)?))
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<DensityOperator> {
        let (mat, dims) = permute_subsystems(&self.mat, &self.dims, perm)?;
        Ok(Self::trusted(mat, dims))
    }

    /// Convex mixture `Σ w_k ρ_k`; weights must be a probability vector.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<DensityOperator> {
        let first = parts.first().ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > tolerance::TRACE {
            return Err(Error::InvalidParameter(format!("mixture weights sum to {total}")));
        }
        let mut mat = Matrix::zeros(first.1.mat.rows(), first.1.mat.cols());
        for (w, rho) in parts {
            if rho.dims != first.1.dims {
                return Err(Error::InvalidDims("mixture of states with different dims".into()));
            }
            mat = &mat + &rho.mat.scale(*w);
        }
        Ok(Self::trusted(mat, first.1.dims.clone()))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.mat)
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).map(|z| z.re).unwrap_or(f64::NAN)
    }

    /// `Tr[O ρ]` for an operator on the full space.
    pub fn expectation(&self, op: &Matrix) -> Result<f64> {
        Ok(op.trace_product(&self.mat)?.re)
    }

    pub fn max_abs_diff(&self, other: &DensityOperator) -> f64 {
        if self.dims != other.dims {
            return f64::INFINITY;
        }
        self.mat.max_abs_diff(&other.mat)
    }
}

impl From<&PureState> for DensityOperator {
    fn from(p: &PureState) -> Self {
        p.density()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<Matrix>,
    dims: DimList,
}

impl Povm {
    /// Each element must be positive semidefinite; elements must sum to identity.
    pub fn new(elements: Vec<Matrix>, dims: DimList) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidMeasurement("POVM without elements".into()));
        }
        let n = dims.total();
        let mut sum = Matrix::zeros(n, n);
        for (k, e) in elements.iter().enumerate() {
            dims.check_matrix(e)?;
            let deviation = e.hermitian_deviation();
            if deviation > tolerance::HERMITIAN {
                return Err(Error::InvalidMeasurement(format!(
                    "element {k} not Hermitian (deviation {deviation:e})"
                )));
            }
            let min = hermitian_eigenvalues(e)?[0];
            if min < -tolerance::PSD {
                return Err(Error::InvalidMeasurement(format!("element {k} has eigenvalue {min:e}")));
            }
            sum = &sum + e;
        }
        let gap = sum.max_abs_diff(&Matrix::identity(n));
        if gap > tolerance::TRACE {
            return Err(Error::InvalidMeasurement(format!("elements sum to identity only within {gap:e}")));
        }
        Ok(Self { elements, dims })
    }

    /// Projective measurement in the computational basis of `dims`.
    pub fn computational(dims: DimList) -> Self {
        let n = dims.total();
        let elements = (0..n)
            .map(|k| Matrix::from_fn(n, n, |i, j| if i == k && j == k { ONE } else { ZERO }))
            .collect();
        Self { elements, dims }
    }

    /// Outcome-wise Kronecker product; outcome `(x1, x2)` has index `x1 * len(b) + x2`.
    pub fn product(&self, other: &Povm) -> Povm {
        let elements = self
            .elements
            .iter()
            .flat_map(|a| other.elements.iter().map(move |b| kron(a, b)))
            .collect();
        Povm { elements, dims: self.dims.concat(&other.dims) }
    }

    pub fn elements(&self) -> &[Matrix] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> &Matrix {
        &self.elements[k]
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dims(&self) -> &DimList {
        &self.dims
    }
}

/// A Hermitian observable with the values attached to its two spectral
/// projectors. Only dichotomic (`M² = I`) observables are used here.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    mat: Matrix,
    outcome_values: [f64; 2],
}

impl Observable {
    pub fn dichotomic(mat: Matrix) -> Result<Self> {
        let deviation = mat.hermitian_deviation();
        if deviation > tolerance::HERMITIAN {
            return Err(Error::NotHermitian { deviation });
        }
        let sq = &mat * &mat;
        let gap = sq.max_abs_diff(&Matrix::identity(mat.rows()));
        if gap > tolerance::TRACE {
            return Err(Error::InvalidMeasurement(format!("observable squares to identity only within {gap:e}")));
        }
        Ok(Self { mat, outcome_values: [1.0, -1.0] })
    }

    pub fn mat(&self) -> &Matrix {
        &self.mat
    }

    pub fn outcome_values(&self) -> [f64; 2] {
        self.outcome_values
    }

    /// `{(I + M)/2, (I - M)/2}`: outcome 0 carries +1, outcome 1 carries -1.
    pub fn povm(&self) -> Povm {
        let n = self.mat.rows();
        let id = Matrix::identity(n);
        let plus = (&id + &self.mat).scale(0.5);
        let minus = (&id - &self.mat).scale(0.5);
        Povm { elements: vec![plus, minus], dims: DimList::new(vec![n]).expect("nonzero dimension") }
    }
}

/// Observable families used by the multipartite CHSH tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    /// `(1 - i) σz + i σx`
    ZxPair,
    /// `(1 - i) I + i σx`
    IdentityXPair,
    /// `cos θ σz + (-1)^i sin θ σx`
    Tilted,
}

pub fn dichotomic_observable(kind: ObservableKind, i: u8, theta: f64) -> Observable {
    let mat = match (kind, i) {
        (ObservableKind::ZxPair, 0) => pauli_z(),
        (ObservableKind::ZxPair, _) => pauli_x(),
        (ObservableKind::IdentityXPair, 0) => Matrix::identity(2),
        (ObservableKind::IdentityXPair, _) => pauli_x(),
        (ObservableKind::Tilted, i) => {
            let s = if i == 0 { 1.0 } else { -1.0 };
            &pauli_z().scale(theta.cos()) + &pauli_x().scale(s * theta.sin())
        }
    };
    Observable { mat, outcome_values: [1.0, -1.0] }
}

/// `Σ_i c_i |ii⟩` on two `local_dim`-dimensional systems.
pub fn schmidt_pure_state(coeffs: &[f64], local_dim: usize) -> Result<PureState> {
    if coeffs.is_empty() || coeffs.len() > local_dim {
        return Err(Error::InvalidParameter(format!(
            "{} Schmidt coefficients for local dimension {local_dim}",
            coeffs.len()
        )));
    }
    if coeffs.iter().any(|&c| c < 0.0 || !c.is_finite()) {
        return Err(Error::InvalidParameter("Schmidt coefficients must be non-negative".into()));
    }
    let norm: f64 = coeffs.iter().map(|c| c * c).sum();
    if (norm - 1.0).abs() > tolerance::TRACE {
        return Err(Error::InvalidParameter(format!("squared Schmidt coefficients sum to {norm}")));
    }
    let mut v = vec![ZERO; local_dim * local_dim];
    for (i, &c) in coeffs.iter().enumerate() {
        v[i * local_dim + i] = C64::new(c, 0.0);
    }
    PureState::normalized(v, DimList::uniform(local_dim, 2)?)
}

/// The generalized GHZ state `r(u|y⟩ ± v|ȳ⟩)` with `r = 1/√(u² + v²)`.
///
/// `u` and `v` are kept unnormalized because the closed-form CHSH predictions
/// are stated in terms of them together with `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzState {
    pub u: f64,
    pub v: f64,
    pub y: Vec<u8>,
    pub sign: Sign,
}

impl GhzState {
    pub fn new(n: usize, u: f64, v: f64, y: Vec<u8>, sign: Sign) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("GHZ state needs n >= 2, got {n}")));
        }
        if y.len() != n || y.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter(format!("bitstring {y:?} is not of length {n}")));
        }
        if !(u.is_finite() && v.is_finite()) || u * u + v * v <= tolerance::ZERO_PROBABILITY {
            return Err(Error::InvalidParameter("GHZ amplitudes are both zero".into()));
        }
        Ok(Self { u, v, y, sign })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn r(&self) -> f64 {
        1.0 / (self.u * self.u + self.v * self.v).sqrt()
    }

    pub fn index(bits: &[u8]) -> usize {
        bits.iter().fold(0, |acc, &b| acc * 2 + b as usize)
    }

    pub fn complement(&self) -> Vec<u8> {
        self.y.iter().map(|b| 1 - b).collect()
    }

    pub fn to_pure(&self) -> PureState {
        let n = self.n();
        let r = self.r();
        let mut v = vec![ZERO; 1 << n];
        v[Self::index(&self.y)] += C64::new(r * self.u, 0.0);
        v[Self::index(&self.complement())] += C64::new(self.sign.value() * r * self.v, 0.0);
        PureState { vec: v, dims: DimList::qubits(n) }
    }
}

pub fn ghz_state(n: usize, u: f64, v: f64, y: &[u8], sign: Sign) -> Result<PureState> {
    Ok(GhzState::new(n, u, v, y.to_vec(), sign)?.to_pure())
}

/// `(1-p)/4 I + p |Φ⟩⟨Φ|` with `|Φ⟩ = a|00⟩ + b|11⟩`.
pub fn werner_state(p: f64, schmidt: (f64, f64)) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("mixing weight {p} outside [0, 1]")));
    }
    let phi = schmidt_pure_state(&[schmidt.0, schmidt.1], 2)?;
    let mat = &Matrix::identity(4).scale((1.0 - p) / 4.0) + &Matrix::outer(phi.amplitudes()).scale(p);
    Ok(DensityOperator::trusted(mat, DimList::qubits(2)))
}

/// Label of one element of the n-qubit Bell (GHZ) basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BellLabel {
    pub y: Vec<u8>,
    pub sign: Sign,
}

impl BellLabel {
    pub fn vector(&self) -> Vec<C64> {
        let n = self.y.len();
        let mut v = vec![ZERO; 1 << n];
        let ybar: Vec<u8> = self.y.iter().map(|b| 1 - b).collect();
        v[GhzState::index(&self.y)] += C64::new(FRAC_1_SQRT_2, 0.0);
        v[GhzState::index(&ybar)] += C64::new(self.sign.value() * FRAC_1_SQRT_2, 0.0);
        v
    }

    pub fn projector(&self) -> Matrix {
        Matrix::outer(&self.vector())
    }
}

impl std::fmt::Display for BellLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.y {
            write!(f, "{b}")?;
        }
        write!(f, "{}", self.sign.symbol())
    }
}

/// Labels in POVM order: `y` with `y₁ = 0` ascending, `+` before `-`.
pub fn bell_basis_labels(n: usize) -> Vec<BellLabel> {
    let mut labels = Vec::with_capacity(1 << n);
    for tail in 0..(1usize << (n - 1)) {
        let y: Vec<u8> = (0..n).map(|k| ((tail >> (n - 1 - k)) & 1) as u8).collect();
        for sign in [Sign::Plus, Sign::Minus] {
            labels.push(BellLabel { y: y.clone(), sign });
        }
    }
    labels
}

pub fn bell_basis_povm(n: usize) -> Result<Povm> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("Bell basis needs n >= 2, got {n}")));
    }
    let elements = bell_basis_labels(n).iter().map(BellLabel::projector).collect();
    Ok(Povm { elements, dims: DimList::qubits(n) })
}

/// Result of a selective measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct Collapse {
    pub probability: f64,
    pub state: DensityOperator,
}

fn bring_to_front(state: &DensityOperator, on: &[usize]) -> Result<(Matrix, Vec<usize>)> {
    let n = state.dims.len();
    let mut seen = vec![false; n];
    for &s in on {
        if s >= n || seen[s] {
            return Err(Error::InvalidDims(format!("bad measured subsystems {on:?} for {n} subsystems")));
        }
        seen[s] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|k| !seen[*k]).collect();
    let perm: Vec<usize> = on.iter().copied().chain(rest.iter().copied()).collect();
    let (mat, _) = permute_subsystems(&state.mat, &state.dims, &perm)?;
    Ok((mat, rest))
}

fn check_element(state: &DensityOperator, element: &Matrix, on: &[usize]) -> Result<()> {
    let d: usize = on.iter().map(|&k| state.dims.as_slice().get(k).copied().unwrap_or(0)).product();
    if !element.is_square() || element.rows() != d {
        return Err(Error::InvalidDims(format!(
            "{}x{} element on subsystems {on:?} of dims {}",
            element.rows(),
            element.cols(),
            state.dims
        )));
    }
    let deviation = element.hermitian_deviation();
    if deviation > tolerance::HERMITIAN {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// `Tr[(E_on ⊗ I) ρ]`.
pub fn outcome_probability(state: &DensityOperator, element: &Matrix, on: &[usize]) -> Result<f64> {
    check_element(state, element, on)?;
    let (front, _) = bring_to_front(state, on)?;
    Ok(contract_leading(&front, element)?.trace().re)
}

/// Measures `element` on the subsystems `on` (in the listed order) and returns
/// the outcome probability with the renormalized state of the remaining
/// subsystems.
///
/// The remaining state is `Tr_on[√E ρ √E] / p`. Because the measured systems
/// are traced out, cyclicity of the partial trace over them reduces this to
/// `Tr_on[(E ⊗ I) ρ] / p`, so no matrix square root is formed.
pub fn collapse(state: &DensityOperator, element: &Matrix, on: &[usize]) -> Result<Collapse> {
    check_element(state, element, on)?;
    let (front, rest) = bring_to_front(state, on)?;
    if rest.is_empty() {
        return Err(Error::InvalidDims("collapse would leave no subsystem".into()));
    }
    let reduced = contract_leading(&front, element)?;
    let probability = reduced.trace().re;
    if probability <= tolerance::ZERO_PROBABILITY {
        return Err(Error::ZeroProbability { probability });
    }
    let dims = state.dims.select(&rest)?;
    // restore exact Hermiticity lost to round-off in the contraction
    let mat = (&reduced + &reduced.dagger()).scale(0.5 / probability);
    Ok(Collapse { probability, state: DensityOperator::trusted(mat, dims) })
}

/// Outcome of the partial-transpose test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PptVerdict {
    /// Negative partial transpose; entangled in any dimension.
    Entangled,
    /// Positive partial transpose in 2⊗2 or 2⊗3, where PPT is exact.
    Separable,
    /// Positive partial transpose in larger dimensions.
    Inconclusive,
}

/// Smallest eigenvalue of the partial transpose on the second subsystem.
pub fn min_partial_transpose_eigenvalue(state: &DensityOperator) -> Result<f64> {
    if state.dims.len() != 2 {
        return Err(Error::InvalidDims(format!("PPT test needs a bipartite state, got dims {}", state.dims)));
    }
    let pt = partial_transpose(&state.mat, &state.dims, &[1])?;
    Ok(hermitian_eigenvalues(&pt)?[0])
}

pub fn ppt_verdict(state: &DensityOperator) -> Result<PptVerdict> {
    let min = min_partial_transpose_eigenvalue(state)?;
    Ok(if min < -tolerance::PPT {
        PptVerdict::Entangled
    } else if state.dims.total() <= 6 {
        PptVerdict::Separable
    } else {
        PptVerdict::Inconclusive
    })
}

/// True iff the partial transpose has an eigenvalue below `-1e-10`.
pub fn is_entangled_ppt(state: &DensityOperator) -> Result<bool> {
    Ok(ppt_verdict(state)? == PptVerdict::Entangled)
}

/// Eigenvalues of the first subsystem's reduced state, descending; these are
/// the squared Schmidt coefficients of a bipartite pure state.
pub fn schmidt_spectrum(state: &PureState) -> Result<Vec<f64>> {
    if state.dims.len() != 2 {
        return Err(Error::InvalidDims("Schmidt spectrum needs a bipartite state".into()));
    }
    let mut e = state.density().reduced(&[0])?.eigenvalues()?;
    e.reverse();
    Ok(e)
}

pub fn schmidt_rank(state: &PureState) -> Result<usize> {
    Ok(schmidt_spectrum(state)?.iter().filter(|&&x| x > 1e-10).count())
}
