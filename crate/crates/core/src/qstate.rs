//! Density matrices and pure states over a tensor-factor layout.
//!
//! Subsystems are ordered; the leftmost factor is the slowest-varying index
//! of the computational basis. Everything here is an immutable value type.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Eigenvalues at or below this contribute nothing to the entropy.
pub const ENTROPY_FLOOR: f64 = 1e-12;

/// Maximum imaginary residue tolerated in quantities that must be real.
const REAL_RESIDUE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of labelled tensor factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemLayout {
    subsystems: Vec<Subsystem>,
}

impl SystemLayout {
    pub fn new<I, S>(parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let subsystems: Vec<Subsystem> = parts
            .into_iter()
            .map(|(label, dim)| Subsystem {
                label: label.into(),
                dim,
            })
            .collect();
        if subsystems.is_empty() {
            return Err(Error::InvalidLayout("no subsystems".into()));
        }
        for (i, s) in subsystems.iter().enumerate() {
            if s.label.is_empty() {
                return Err(Error::InvalidLayout(format!("subsystem {i} has an empty label")));
            }
            if s.dim == 0 {
                return Err(Error::InvalidLayout(format!("subsystem `{}` has dimension 0", s.label)));
            }
            if subsystems[..i].iter().any(|o| o.label == s.label) {
                return Err(Error::InvalidLayout(format!("duplicate label `{}`", s.label)));
            }
        }
        let layout = SystemLayout { subsystems };
        layout
            .dims()
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidLayout("total dimension overflows".into()))?;
        Ok(layout)
    }

    /// Every subsystem gets the same local dimension.
    pub fn uniform(labels: &[&str], dim: usize) -> Result<Self> {
        Self::new(labels.iter().map(|l| (*l, dim)))
    }

    /// `A1`, `A2`, ... with the given dimensions.
    pub fn numbered(dims: &[usize]) -> Result<Self> {
        Self::new(dims.iter().enumerate().map(|(i, &d)| (format!("A{}", i + 1), d)))
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.subsystems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.subsystems.iter().position(|s| s.label == label)
    }

    pub fn dim_of(&self, label: &str) -> Option<usize> {
        self.position(label).map(|i| self.subsystems[i].dim)
    }

    /// Sub-layout on `keep`, in this layout's order regardless of the order of `keep`.
    pub fn restrict<S: AsRef<str>>(&self, keep: &[S]) -> Result<SystemLayout> {
        let mask = self.mask(keep)?;
        Ok(SystemLayout {
            subsystems: self
                .subsystems
                .iter()
                .zip(&mask)
                .filter(|(_, &k)| k)
                .map(|(s, _)| s.clone())
                .collect(),
        })
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &SystemLayout) -> Result<SystemLayout> {
        Self::new(
            self.subsystems
                .iter()
                .chain(&other.subsystems)
                .map(|s| (s.label.clone(), s.dim)),
        )
    }

    /// This layout followed by a primed copy of every factor.
    pub fn doubled(&self) -> SystemLayout {
        let mut subsystems = self.subsystems.clone();
        for s in &self.subsystems {
            let mut label = format!("{}'", s.label);
            while subsystems.iter().any(|o| o.label == label) {
                label.push('\'');
            }
            subsystems.push(Subsystem { label, dim: s.dim });
        }
        SystemLayout { subsystems }
    }

    pub(crate) fn mask<S: AsRef<str>>(&self, keep: &[S]) -> Result<Vec<bool>> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let mut mask = vec![false; self.len()];
        for label in keep {
            let label = label.as_ref();
            let i = self
                .position(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            mask[i] = true;
        }
        Ok(mask)
    }
}

/// Split of every basis index into (kept index, traced index).
pub(crate) struct FactorSplit {
    pub keep_dim: usize,
    pub rest_dim: usize,
    /// For each full basis index, its position in the kept factor.
    pub keep: Vec<usize>,
    /// For each full basis index, its position in the traced factor.
    pub rest: Vec<usize>,
    /// (kept index, full index) pairs grouped by traced index.
    groups: Vec<Vec<(usize, usize)>>,
}

impl FactorSplit {
    pub fn new(layout: &SystemLayout, mask: &[bool]) -> Self {
        let dims = layout.dims();
        let total: usize = dims.iter().product();
        let keep_dim: usize = dims.iter().zip(mask).filter(|(_, &k)| k).map(|(d, _)| d).product();
        let rest_dim = total / keep_dim;
        let mut keep = Vec::with_capacity(total);
        let mut rest = Vec::with_capacity(total);
        let mut digits = vec![0usize; dims.len()];
        for _ in 0..total {
            let (mut k, mut r) = (0, 0);
            for ((&d, &m), &digit) in dims.iter().zip(mask).zip(&digits) {
                if m {
                    k = k * d + digit;
                } else {
                    r = r * d + digit;
                }
            }
            keep.push(k);
            rest.push(r);
            // odometer increment, rightmost fastest
            for pos in (0..dims.len()).rev() {
                digits[pos] += 1;
                if digits[pos] < dims[pos] {
                    break;
                }
                digits[pos] = 0;
            }
        }
        let mut groups = vec![Vec::with_capacity(keep_dim); rest_dim];
        for (full, (&k, &r)) in keep.iter().zip(&rest).enumerate() {
            groups[r].push((k, full));
        }
        FactorSplit {
            keep_dim,
            rest_dim,
            keep,
            rest,
            groups,
        }
    }

    pub fn trace_out(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.keep_dim, self.keep_dim);
        for group in &self.groups {
            for &(k1, f1) in group {
                for &(k2, f2) in group {
                    out[(k1, k2)] += m[(f1, f2)];
                }
            }
        }
        out
    }

    /// `op ⊗ I_rest`, arranged in the full layout's factor order.
    pub fn embed(&self, op: &CMatrix) -> CMatrix {
        let n = self.keep.len();
        let mut out = CMatrix::zeros(n, n);
        for group in &self.groups {
            for &(k1, f1) in group {
                for &(k2, f2) in group {
                    out[(f1, f2)] = op[(k1, k2)];
                }
            }
        }
        out
    }
}

/// Partial trace of a raw square matrix over everything outside `keep`.
pub fn reduce_matrix<S: AsRef<str>>(m: &CMatrix, layout: &SystemLayout, keep: &[S]) -> Result<CMatrix> {
    check_side(m, layout)?;
    let mask = layout.mask(keep)?;
    Ok(FactorSplit::new(layout, &mask).trace_out(m))
}

/// `op ⊗ I` on the complement of `support`, in the layout's factor order.
pub fn embed_with_identity<S: AsRef<str>>(op: &CMatrix, layout: &SystemLayout, support: &[S]) -> Result<CMatrix> {
    let mask = layout.mask(support)?;
    let split = FactorSplit::new(layout, &mask);
    if op.nrows() != split.keep_dim || op.ncols() != split.keep_dim {
        return Err(Error::DimensionMismatch {
            expected: split.keep_dim,
            got: op.nrows(),
        });
    }
    Ok(split.embed(op))
}

fn check_side(m: &CMatrix, layout: &SystemLayout) -> Result<()> {
    let d = layout.total_dim();
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if m.nrows() != d { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).unscale(2.0)
}

fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let eig = SymmetricEigen::try_new(hermitian_part(m), f64::EPSILON, 10_000).ok_or(Error::ConvergenceFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// `V diag(f(λ)) V†`.
pub(crate) fn spectral_function(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let w = f(v);
        scaled.column_mut(j).scale_mut(w);
    }
    scaled * vectors.adjoint()
}

/// Square root of a positive-semidefinite matrix; negative dust is clamped.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(m)?;
    Ok(spectral_function(&values, &vectors, |v| v.max(0.0).sqrt()))
}

/// Hermitian, positive-semidefinite, unit-trace matrix on a layout.
///
/// Equality compares layout and entries; the validation tolerance is not part of the value.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    layout: SystemLayout,
    entries: CMatrix,
    validation_tol: f64,
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.layout == other.layout && self.entries == other.entries
    }
}

/// Checks the density-matrix invariants at `tol` and stores the Hermitian part.
///
/// Eigenvalues in `[-tol, 0)` are accepted and treated as zero by every
/// spectral routine; the stored entries are not rewritten, so a loaded state
/// is bit-identical to the one that was saved.
pub fn validate_density(matrix: CMatrix, layout: &SystemLayout, tol: f64) -> Result<DensityMatrix> {
    if !(tol > 0.0) {
        return Err(Error::Numerical(format!("validation tolerance must be positive, got {tol}")));
    }
    check_side(&matrix, layout)?;
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    let defect = hermiticity_defect(&matrix);
    if defect > tol {
        return Err(Error::NonHermitian(defect));
    }
    let entries = hermitian_part(&matrix);
    let (values, _) = hermitian_eigen(&entries)?;
    let min = values.last().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::NotPositive(min));
    }
    let trace = entries.trace().re;
    if (trace - 1.0).abs() > tol {
        return Err(Error::TraceMismatch(trace));
    }
    Ok(DensityMatrix {
        layout: layout.clone(),
        entries,
        validation_tol: tol,
    })
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, layout: &SystemLayout, tol: f64) -> Result<Self> {
        validate_density(matrix, layout, tol)
    }

    /// Wraps a matrix already known to be a state (e.g. a reduction of one).
    pub(crate) fn from_trusted(layout: SystemLayout, matrix: &CMatrix, tol: f64) -> Self {
        DensityMatrix {
            layout,
            entries: hermitian_part(matrix),
            validation_tol: tol,
        }
    }

    pub fn maximally_mixed(layout: &SystemLayout) -> Self {
        let d = layout.total_dim();
        let m = CMatrix::identity(d, d).unscale(d as f64);
        Self::from_trusted(layout.clone(), &m, 1e-12)
    }

    /// Real diagonal state; the entries must form a probability vector.
    pub fn diagonal(probs: &[f64], layout: &SystemLayout, tol: f64) -> Result<Self> {
        let diag = CVector::from_iterator(probs.len(), probs.iter().map(|&p| C64::new(p, 0.0)));
        validate_density(CMatrix::from_diagonal(&diag), layout, tol)
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn validation_tol(&self) -> f64 {
        self.validation_tol
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// `self ⊗ other` on the concatenated layout.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let layout = self.layout.concat(&other.layout)?;
        let m = self.entries.kronecker(&other.entries);
        Ok(Self::from_trusted(layout, &m, self.validation_tol.max(other.validation_tol)))
    }

    /// `alpha·self + (1 − alpha)·other`, with `alpha` in [0, 1].
    pub fn mix(&self, other: &DensityMatrix, alpha: f64) -> Result<DensityMatrix> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch);
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Numerical(format!("mixing weight {alpha} outside [0, 1]")));
        }
        let m = self.entries.scale(alpha) + other.entries.scale(1.0 - alpha);
        Ok(Self::from_trusted(self.layout.clone(), &m, self.validation_tol.max(other.validation_tol)))
    }

    /// `U ρ U†` for a unitary `U` of matching size.
    pub fn conjugate_by(&self, unitary: &CMatrix) -> Result<DensityMatrix> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: unitary.nrows(),
            });
        }
        let m = unitary * &self.entries * unitary.adjoint();
        validate_density(m, &self.layout, self.validation_tol.max(1e-9))
    }
}

/// Unit vector on a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    layout: SystemLayout,
    amplitudes: CVector,
    norm_tol: f64,
}

impl PureState {
    pub fn new(amplitudes: CVector, layout: &SystemLayout, norm_tol: f64) -> Result<Self> {
        let d = layout.total_dim();
        if amplitudes.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > norm_tol {
            return Err(Error::NotNormalized(norm));
        }
        Ok(PureState {
            layout: layout.clone(),
            amplitudes,
            norm_tol,
        })
    }

    /// Normalizes `amplitudes` first; fails only on a zero or mis-sized vector.
    pub fn normalized(amplitudes: CVector, layout: &SystemLayout) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(amplitudes.unscale(norm), layout, 1e-12)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(index: usize, layout: &SystemLayout) -> Result<Self> {
        let d = layout.total_dim();
        if index >= d {
            return Err(Error::DimensionMismatch { expected: d, got: index });
        }
        let mut v = CVector::zeros(d);
        v[index] = C64::new(1.0, 0.0);
        Self::new(v, layout, 0.0)
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm_tol(&self) -> f64 {
        self.norm_tol
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch);
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix::from_trusted(self.layout.clone(), &m, self.norm_tol.max(1e-12) * 4.0)
    }
}

/// Eigenvalues (descending) with matching eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    /// `Σ p_j u_j u_j†`.
    pub fn reconstruct(&self) -> CMatrix {
        spectral_function(&self.eigenvalues, &self.eigenvectors, |v| v)
    }

    /// Eigenvalues with anything below zero set to zero.
    pub fn clamped(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|&v| v.max(0.0)).collect()
    }
}

pub fn spectral_decomposition(rho: &DensityMatrix) -> Result<Spectrum> {
    let (eigenvalues, eigenvectors) = hermitian_eigen(&rho.entries)?;
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Reduced state on `keep`, in the original relative order.
pub fn partial_trace<S: AsRef<str>>(rho: &DensityMatrix, keep: &[S]) -> Result<DensityMatrix> {
    let layout = rho.layout.restrict(keep)?;
    let mask = rho.layout.mask(keep)?;
    let reduced = FactorSplit::new(&rho.layout, &mask).trace_out(&rho.entries);
    Ok(DensityMatrix::from_trusted(layout, &reduced, rho.validation_tol))
}

/// Shannon entropy in bits of a probability vector, with the `0 log 0 = 0` floor.
pub fn shannon_bits(probs: &[f64]) -> f64 {
    let s: f64 = probs
        .iter()
        .filter(|&&p| p > ENTROPY_FLOOR)
        .map(|&p| -p * p.log2())
        .sum();
    s.max(0.0)
}

/// `−tr(ρ log2 ρ)` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let (values, _) = hermitian_eigen(&rho.entries)?;
    Ok(shannon_bits(&values))
}

/// Canonical purification `Σ √p_j |u_j⟩ ⊗ |u_j⟩*` on the doubled layout.
pub fn purify(rho: &DensityMatrix) -> Result<PureState> {
    let spec = spectral_decomposition(rho)?;
    let d = rho.dim();
    let mut amps = CVector::zeros(d * d);
    for (j, p) in spec.clamped().into_iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let w = p.sqrt();
        let u = spec.eigenvectors.column(j);
        for a in 0..d {
            let ua = u[a] * w;
            for b in 0..d {
                amps[a * d + b] += ua * u[b].conj();
            }
        }
    }
    let tol = rho.validation_tol.max(1e-10);
    PureState::new(amps, &rho.layout.doubled(), tol)
}

fn same_layout(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.layout != sigma.layout {
        Err(Error::LayoutMismatch)
    } else {
        Ok(())
    }
}

/// `tr(√σ √ρ)`, the overlap of the canonical purifications.
pub fn g_overlap(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_layout(rho, sigma)?;
    let sr = psd_sqrt(&rho.entries)?;
    let ss = psd_sqrt(&sigma.entries)?;
    let value: C64 = ss.iter().zip(sr.transpose().iter()).map(|(a, b)| a * b).sum();
    if value.im.abs() > REAL_RESIDUE_TOL {
        return Err(Error::Numerical(format!("overlap has imaginary residue {:e}", value.im)));
    }
    Ok(value.re)
}

/// `tr √(√ρ σ √ρ)`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_layout(rho, sigma)?;
    let sr = psd_sqrt(&rho.entries)?;
    let inner = &sr * &sigma.entries * &sr;
    let (values, _) = hermitian_eigen(&inner)?;
    Ok(values.iter().map(|v| v.max(0.0).sqrt()).sum())
}

pub fn support_orthogonal(rho: &DensityMatrix, sigma: &DensityMatrix, tol: f64) -> Result<bool> {
    Ok(fidelity(rho, sigma)? <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn qubit() -> SystemLayout {
        SystemLayout::uniform(&["A"], 2).unwrap()
    }

    fn bell() -> PureState {
        let layout = SystemLayout::uniform(&["A", "B"], 2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(CVector::from_vec(vec![c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)]), &layout, 1e-12).unwrap()
    }

    #[test]
    fn layout_rejects_bad_parts() {
        assert!(matches!(SystemLayout::new([("A", 2), ("A", 3)]), Err(Error::InvalidLayout(_))));
        assert!(matches!(SystemLayout::new([("A", 0)]), Err(Error::InvalidLayout(_))));
        assert!(matches!(SystemLayout::new(Vec::<(String, usize)>::new()), Err(Error::InvalidLayout(_))));
        let l = SystemLayout::new([("A", 2), ("B", 3), ("C", 2)]).unwrap();
        assert_eq!(l.total_dim(), 12);
        assert_eq!(l.restrict(&["C", "A"]).unwrap().labels(), vec!["A", "C"]);
        assert_eq!(l.doubled().labels(), vec!["A", "B", "C", "A'", "B'", "C'"]);
    }

    #[test]
    fn validate_maximally_mixed_qubit() {
        let m = CMatrix::identity(2, 2).unscale(2.0);
        let rho = validate_density(m, &qubit(), 1e-9).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validate_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(1., 0.), c(0., 0.), c(0.5, 0.)]);
        assert!(matches!(validate_density(m, &qubit(), 1e-9), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn validate_rejects_negative_eigenvalue() {
        let err = DensityMatrix::diagonal(&[1.5, -0.5], &qubit(), 1e-9).unwrap_err();
        match err {
            Error::NotPositive(v) => assert!((v + 0.5).abs() < 1e-12),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn validate_rejects_trace_and_size() {
        assert!(matches!(DensityMatrix::diagonal(&[0.5, 0.4], &qubit(), 1e-9), Err(Error::TraceMismatch(_))));
        assert!(matches!(
            DensityMatrix::diagonal(&[0.5, 0.25, 0.25], &qubit(), 1e-9),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(validate_density(CMatrix::identity(2, 2), &qubit(), 0.0).is_err());
    }

    #[test]
    fn validate_accepts_negative_dust() {
        let rho = DensityMatrix::diagonal(&[1.0 + 1e-11, -1e-11], &qubit(), 1e-9).unwrap();
        assert_eq!(von_neumann_entropy(&rho).unwrap(), 0.0);
        let spec = spectral_decomposition(&rho).unwrap();
        assert_eq!(spec.clamped()[1], 0.0);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = bell().density();
        let a = partial_trace(&rho, &["A"]).unwrap();
        let expected = CMatrix::identity(2, 2).unscale(2.0);
        assert!(frobenius_distance(a.matrix(), &expected) < 1e-15);
        assert_eq!(a.layout().labels(), vec!["A"]);
    }

    #[test]
    fn product_state_marginal() {
        let la = SystemLayout::uniform(&["A"], 2).unwrap();
        let lb = SystemLayout::new([("B", 3)]).unwrap();
        let ra = validate_density(
            CMatrix::from_row_slice(2, 2, &[c(0.7, 0.), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.)]),
            &la,
            1e-9,
        )
        .unwrap();
        let rb = DensityMatrix::diagonal(&[0.2, 0.3, 0.5], &lb, 1e-9).unwrap();
        let joint = ra.tensor(&rb).unwrap();
        let back_a = partial_trace(&joint, &["A"]).unwrap();
        let back_b = partial_trace(&joint, &["B"]).unwrap();
        assert!(frobenius_distance(back_a.matrix(), ra.matrix()) < 1e-15);
        assert!(frobenius_distance(back_b.matrix(), rb.matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = bell().density();
        assert!(matches!(partial_trace(&rho, &["Z"]), Err(Error::UnknownLabel(_))));
        assert!(matches!(partial_trace::<&str>(&rho, &[]), Err(Error::EmptyKeepSet)));
    }

    #[test]
    fn spectra_of_simple_states() {
        let half = DensityMatrix::diagonal(&[0.5, 0.5], &qubit(), 1e-9).unwrap();
        let s = spectral_decomposition(&half).unwrap();
        assert!((s.eigenvalues[0] - 0.5).abs() < 1e-15 && (s.eigenvalues[1] - 0.5).abs() < 1e-15);
        let zero = PureState::basis(0, &qubit()).unwrap().density();
        let s = spectral_decomposition(&zero).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-15 && s.eigenvalues[1].abs() < 1e-15);
    }

    #[test]
    fn hadamard_rotated_spectrum() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = CMatrix::from_row_slice(2, 2, &[c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)]);
        let base = DensityMatrix::diagonal(&[0.75, 0.25], &qubit(), 1e-9).unwrap();
        let rho = base.conjugate_by(&had).unwrap();
        let s = spectral_decomposition(&rho).unwrap();
        assert!((s.eigenvalues[0] - 0.75).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 0.25).abs() < 1e-14);
        for j in 0..2 {
            // |⟨h_j|u_j⟩| = 1 means equal up to phase
            let overlap = had.column(j).dotc(&s.eigenvectors.column(j)).norm();
            assert!((overlap - 1.0).abs() < 1e-12);
        }
        assert!(frobenius_distance(&s.reconstruct(), rho.matrix()) < 1e-10 * 2.0);
    }

    #[test]
    fn entropy_closed_forms() {
        let half = DensityMatrix::maximally_mixed(&qubit());
        assert!((von_neumann_entropy(&half).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(von_neumann_entropy(&bell().density()).unwrap(), 0.0);
        let l3 = SystemLayout::new([("A", 3)]).unwrap();
        let r = DensityMatrix::diagonal(&[0.5, 0.25, 0.25], &l3, 1e-9).unwrap();
        assert!((von_neumann_entropy(&r).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn purify_maximally_mixed_is_maximally_entangled() {
        let psi = purify(&DensityMatrix::maximally_mixed(&qubit())).unwrap();
        assert_eq!(psi.layout().labels(), vec!["A", "A'"]);
        // basis-independent check: Σ u u^T* over an orthonormal basis is the identity
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = psi.amplitudes();
        assert!((a[0] - c(h, 0.)).norm() < 1e-12 && (a[3] - c(h, 0.)).norm() < 1e-12);
        assert!(a[1].norm() < 1e-12 && a[2].norm() < 1e-12);
    }

    #[test]
    fn purify_pure_state_is_product() {
        let psi = purify(&PureState::basis(0, &qubit()).unwrap().density()).unwrap();
        let a = psi.amplitudes();
        assert!((a[0].norm() - 1.0).abs() < 1e-12);
        assert!(a.iter().skip(1).all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn purify_diagonal_round_trip() {
        let rho = DensityMatrix::diagonal(&[0.75, 0.25], &qubit(), 1e-9).unwrap();
        let psi = purify(&rho).unwrap();
        let a = psi.amplitudes();
        assert!((a[0].norm() - 0.75f64.sqrt()).abs() < 1e-12);
        assert!((a[3].norm() - 0.5).abs() < 1e-12);
        let back = partial_trace(&psi.density(), &["A"]).unwrap();
        assert!(frobenius_distance(back.matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn overlap_and_fidelity_edge_cases() {
        let zero = PureState::basis(0, &qubit()).unwrap().density();
        let one = PureState::basis(1, &qubit()).unwrap().density();
        let mixed = DensityMatrix::diagonal(&[0.3, 0.7], &qubit(), 1e-9).unwrap();
        assert!((g_overlap(&mixed, &mixed).unwrap() - 1.0).abs() < 1e-12);
        assert!(g_overlap(&zero, &one).unwrap().abs() < 1e-12);
        assert!((fidelity(&mixed, &mixed).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        assert!(support_orthogonal(&zero, &one, 1e-8).unwrap());
        assert!(!support_orthogonal(&mixed, &mixed, 1e-8).unwrap());
        let l4 = SystemLayout::new([("A", 4)]).unwrap();
        let lo = DensityMatrix::diagonal(&[0.5, 0.5, 0.0, 0.0], &l4, 1e-9).unwrap();
        let hi = DensityMatrix::diagonal(&[0.0, 0.0, 0.5, 0.5], &l4, 1e-9).unwrap();
        assert!(support_orthogonal(&lo, &hi, 1e-8).unwrap());
        assert!(matches!(fidelity(&lo, &zero), Err(Error::LayoutMismatch)));
        assert!(matches!(g_overlap(&lo, &zero), Err(Error::LayoutMismatch)));
    }

    #[test]
    fn pure_state_norm_checked() {
        let v = CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(PureState::new(v.clone(), &qubit(), 1e-9), Err(Error::NotNormalized(_))));
        assert!(PureState::normalized(v, &qubit()).is_ok());
        assert!(PureState::normalized(CVector::zeros(2), &qubit()).is_err());
    }
}
