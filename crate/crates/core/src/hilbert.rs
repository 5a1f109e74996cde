//! Dense complex linear algebra over small labeled tensor-product spaces.
//!
//! Composite basis indices are row-major over the factor list: for factors
//! `(A, B, C)` the index of `|a b c⟩` is `(a·dim B + b)·dim C + c`. This is
//! the same convention as the Kronecker product, so `tensor` and `embed`
//! agree with `HilbertSpace::index_of`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Relative tolerance used for the Hermiticity flag on operators.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// One tensor factor: a name and an ordered list of unique basis labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    name: String,
    labels: Vec<String>,
}

impl Factor {
    pub fn new<S: Into<String>>(name: S, labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Dimension("a factor needs at least one basis label".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidParameter(format!("duplicate basis label `{l}`")));
            }
        }
        Ok(Self { name: name.into(), labels })
    }

    /// Three-level Λ emitter with labels `0`, `1`, `e`.
    pub fn emitter<S: Into<String>>(name: S) -> Self {
        Self {
            name: name.into(),
            labels: vec!["0".into(), "1".into(), "e".into()],
        }
    }

    /// Truncated Fock ladder with labels `0..=n_max`.
    pub fn fock<S: Into<String>>(name: S, n_max: usize) -> Self {
        Self {
            name: name.into(),
            labels: (0..=n_max).map(|n| n.to_string()).collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    factors: Vec<Factor>,
}

impl HilbertSpace {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Dimension("a Hilbert space needs at least one factor".into()));
        }
        Ok(Self { factors })
    }

    /// A single-factor space whose basis is an explicit list of labels.
    pub fn flat<S: Into<String>>(name: S, labels: &[&str]) -> Result<Self> {
        let labels = labels.iter().map(|l| l.to_string()).collect();
        Self::new(vec![Factor::new(name, labels)?])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).product()
    }

    pub fn factor_index(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }

    /// Composite index of a label tuple, one label per factor.
    pub fn index_of(&self, labels: &[&str]) -> Result<usize> {
        if labels.len() != self.factors.len() {
            return Err(Error::Dimension(format!(
                "expected {} labels, got {}",
                self.factors.len(),
                labels.len()
            )));
        }
        let mut index = 0;
        for (factor, label) in self.factors.iter().zip(labels) {
            let local = factor
                .index_of(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            index = index * factor.dim() + local;
        }
        Ok(index)
    }

    /// Per-factor local indices of a composite index.
    pub fn local_indices(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, factor) in out.iter_mut().zip(&self.factors).rev() {
            *slot = index % factor.dim();
            index /= factor.dim();
        }
        out
    }

    pub fn labels_of(&self, index: usize) -> Vec<&str> {
        self.local_indices(index)
            .into_iter()
            .zip(&self.factors)
            .map(|(i, f)| f.labels[i].as_str())
            .collect()
    }

    /// The tensor product `self ⊗ other`, factors concatenated in order.
    pub fn tensor(&self, other: &HilbertSpace) -> HilbertSpace {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        HilbertSpace { factors }
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self
            .factors
            .iter()
            .map(|fac| format!("{}[{}]", fac.name, fac.dim()))
            .collect();
        write!(f, "{}", names.join(" ⊗ "))
    }
}

pub(crate) fn same_space(a: &Arc<HilbertSpace>, b: &Arc<HilbertSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Dense square operator on a Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: Arc<HilbertSpace>,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(space: Arc<HilbertSpace>, matrix: DMatrix<C64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension(format!(
                "operator is {}x{}, space {} has dimension {d}",
                matrix.nrows(),
                matrix.ncols(),
                space
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: Arc<HilbertSpace>) -> Self {
        let d = space.dim();
        Self { space, matrix: DMatrix::zeros(d, d) }
    }

    pub fn identity(space: Arc<HilbertSpace>) -> Self {
        let d = space.dim();
        Self { space, matrix: DMatrix::identity(d, d) }
    }

    /// `|row⟩⟨col|` for two label tuples.
    pub fn outer(space: Arc<HilbertSpace>, row: &[&str], col: &[&str]) -> Result<Self> {
        let r = space.index_of(row)?;
        let c = space.index_of(col)?;
        let mut op = Self::zeros(space);
        op.matrix[(r, c)] = ONE;
        Ok(op)
    }

    /// `|ket⟩⟨bra|` for two states on the same space.
    pub fn ket_bra(ket: &StateVector, bra: &StateVector) -> Result<Self> {
        if !same_space(&ket.space, &bra.space) {
            return Err(Error::SpaceMismatch);
        }
        let matrix = &ket.amplitudes * bra.amplitudes.adjoint();
        Ok(Self { space: ket.space.clone(), matrix })
    }

    pub fn projector(state: &StateVector) -> Self {
        let matrix = &state.amplitudes * state.amplitudes.adjoint();
        Self { space: state.space.clone(), matrix }
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    /// Kronecker product on the concatenated space.
    pub fn tensor(&self, other: &Operator) -> Operator {
        Operator {
            space: Arc::new(self.space.tensor(&other.space)),
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// Lifts a single-factor operator to `space`, identity on every other factor.
    pub fn embed(&self, factor_index: usize, space: &Arc<HilbertSpace>) -> Result<Operator> {
        let factors = space.factors();
        let target = factors.get(factor_index).ok_or_else(|| {
            Error::Dimension(format!("factor index {factor_index} out of range"))
        })?;
        if target.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "operator dimension {} does not match factor `{}` of dimension {}",
                self.dim(),
                target.name(),
                target.dim()
            )));
        }
        let mut matrix = DMatrix::<C64>::identity(1, 1);
        for (k, factor) in factors.iter().enumerate() {
            let piece = if k == factor_index {
                self.matrix.clone()
            } else {
                DMatrix::identity(factor.dim(), factor.dim())
            };
            matrix = matrix.kronecker(&piece);
        }
        Ok(Operator { space: space.clone(), matrix })
    }

    pub fn dagger(&self) -> Operator {
        Operator { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        self.check_space(other)?;
        Ok(Operator { space: self.space.clone(), matrix: &self.matrix * &other.matrix })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_space(other)?;
        Ok(Operator { space: self.space.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_space(other)?;
        Ok(Operator { space: self.space.clone(), matrix: &self.matrix - &other.matrix })
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator { space: self.space.clone(), matrix: &self.matrix * factor }
    }

    pub fn scale_re(&self, factor: f64) -> Operator {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// `max|A - A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOL * self.max_abs()
    }

    /// Returns `self` if it passes the Hermiticity tolerance.
    pub fn assert_hermitian(self) -> Result<Self> {
        let defect = self.hermiticity_defect();
        if defect <= HERMITIAN_TOL * self.max_abs() {
            Ok(self)
        } else {
            Err(Error::NotHermitian(defect))
        }
    }

    /// Real eigenvalues of a Hermitian operator, ascending.
    pub fn eigenvalues_hermitian(&self) -> Result<Vec<f64>> {
        let h = self.clone().assert_hermitian()?;
        let mut vals: Vec<f64> = SymmetricEigen::new(h.matrix).eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        Ok(vals)
    }

    /// `A·v` with space checking.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.check_state_space(&state.space)?;
        Ok(StateVector { space: self.space.clone(), amplitudes: &self.matrix * &state.amplitudes })
    }

    /// `⟨ψ|A|ψ⟩` (no normalization).
    pub fn expect_pure(&self, state: &StateVector) -> Result<C64> {
        self.check_state_space(&state.space)?;
        Ok(state.amplitudes.dotc(&(&self.matrix * &state.amplitudes)))
    }

    /// `Tr(ρA)`.
    pub fn expect_mixed(&self, rho: &DensityMatrix) -> Result<C64> {
        self.check_state_space(&rho.space)?;
        Ok(trace_of_product(&rho.matrix, &self.matrix))
    }

    fn check_space(&self, other: &Operator) -> Result<()> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    fn check_state_space(&self, space: &Arc<HilbertSpace>) -> Result<()> {
        if same_space(&self.space, space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

/// `Tr(AB)` without forming the product.
pub(crate) fn trace_of_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let d = a.nrows();
    let mut acc = ZERO;
    for i in 0..d {
        for k in 0..d {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: Arc<HilbertSpace>,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(space: Arc<HilbertSpace>, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::Dimension(format!(
                "state has {} amplitudes, space {} has dimension {}",
                amplitudes.len(),
                space,
                space.dim()
            )));
        }
        Ok(Self { space, amplitudes })
    }

    pub fn basis(space: Arc<HilbertSpace>, labels: &[&str]) -> Result<Self> {
        let index = space.index_of(labels)?;
        let mut amplitudes = DVector::zeros(space.dim());
        amplitudes[index] = ONE;
        Ok(Self { space, amplitudes })
    }

    /// Normalized linear combination `Σ cₖ|ψₖ⟩`.
    pub fn superpose(terms: &[(C64, &StateVector)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidState("empty superposition".into()))?;
        let mut amplitudes = DVector::zeros(first.dim());
        for (c, psi) in terms {
            if !same_space(&first.space, &psi.space) {
                return Err(Error::SpaceMismatch);
            }
            amplitudes += &psi.amplitudes * *c;
        }
        Self { space: first.space.clone(), amplitudes }.normalized()
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.amplitudes.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidState("cannot normalize a zero or non-finite state".into()));
        }
        self.amplitudes /= C64::new(n, 0.0);
        Ok(self)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < 1e-9
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if !same_space(&self.space, &other.space) {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector {
            space: Arc::new(self.space.tensor(&other.space)),
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }
}

/// Tolerances on density-matrix validity.
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-10;
pub const DENSITY_TRACE_TOL: f64 = 1e-8;
pub const DENSITY_POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: Arc<HilbertSpace>,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validated construction: Hermitian, unit trace, positive semidefinite.
    pub fn new(space: Arc<HilbertSpace>, matrix: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(space, matrix)?;
        rho.validate(DENSITY_HERMITIAN_TOL, DENSITY_TRACE_TOL, DENSITY_POSITIVITY_TOL)?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(space: Arc<HilbertSpace>, matrix: DMatrix<C64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension(format!(
                "density matrix is {}x{}, space has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn from_pure(state: &StateVector) -> Self {
        Self {
            space: state.space.clone(),
            matrix: &state.amplitudes * state.amplitudes.adjoint(),
        }
    }

    pub fn validate(&self, herm_tol: f64, trace_tol: f64, pos_tol: f64) -> Result<()> {
        let as_op = Operator { space: self.space.clone(), matrix: self.matrix.clone() };
        let defect = as_op.hermiticity_defect();
        if defect > herm_tol * as_op.max_abs().max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidState(format!("density matrix not Hermitian ({defect:e})")));
        }
        let tr = self.trace();
        if tr.is_nan() || (tr - 1.0).abs() > trace_tol {
            return Err(Error::InvalidState(format!("density matrix trace {tr} != 1")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig.is_nan() || min_eig < -pos_tol {
            return Err(Error::InvalidState(format!(
                "density matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(())
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        trace_of_product(&self.matrix, &self.matrix).re
    }

    /// Smallest eigenvalue of the Hermitian part; NaN if the decomposition
    /// does not produce finite values.
    pub fn min_eigenvalue(&self) -> f64 {
        let mut herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        // entries this far below the largest one underflow when squared in the
        // tridiagonalization and turn the spectrum into ±inf; dropping them
        // moves every eigenvalue by at most d·ε²·max|ρ|
        let floor = herm.camax() * f64::EPSILON * f64::EPSILON;
        herm.iter_mut().filter(|z| z.norm() < floor).for_each(|z| *z = ZERO);
        let min = SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min.is_finite() { min } else { f64::NAN }
    }

    /// `ρ ← (ρ + ρ†)/2`.
    pub fn hermitize(&mut self) {
        let adj = self.matrix.adjoint();
        self.matrix = (&self.matrix + adj) * C64::new(0.5, 0.0);
    }

    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    /// Reduced state of one factor, tracing out all others.
    pub fn partial_trace_keep(&self, keep: usize) -> Result<DensityMatrix> {
        self.reduce_to(&[keep])
    }

    /// Reduced state on the listed factors (kept in the given order),
    /// tracing out all others.
    pub fn reduce_to(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let factors = self.space.factors();
        if keep.is_empty() || keep.iter().any(|&k| k >= factors.len()) {
            return Err(Error::Dimension(format!("invalid factor selection {keep:?}")));
        }
        let kept: Vec<Factor> = keep.iter().map(|&k| factors[k].clone()).collect();
        let space = Arc::new(HilbertSpace::new(kept)?);
        let dk = space.dim();
        let d = self.dim();
        let locals: Vec<Vec<usize>> = (0..d).map(|i| self.space.local_indices(i)).collect();
        let reduced_index = |l: &[usize]| keep.iter().fold(0, |acc, &k| acc * factors[k].dim() + l[k]);
        let mut out = DMatrix::<C64>::zeros(dk, dk);
        for r in 0..d {
            for c in 0..d {
                let (lr, lc) = (&locals[r], &locals[c]);
                let traced_match = (0..factors.len()).all(|k| keep.contains(&k) || lr[k] == lc[k]);
                if traced_match {
                    out[(reduced_index(lr), reduced_index(lc))] += self.matrix[(r, c)];
                }
            }
        }
        Ok(DensityMatrix { space, matrix: out })
    }

    /// Conjugation `UρU†`.
    pub fn conjugate_by(&self, u: &Operator) -> Result<DensityMatrix> {
        if !same_space(&self.space, &u.space) {
            return Err(Error::SpaceMismatch);
        }
        Ok(DensityMatrix {
            space: self.space.clone(),
            matrix: &u.matrix * &self.matrix * u.matrix.adjoint(),
        })
    }
}

/// Either kind of state; lets observables and fidelities accept both.
pub trait QuantumState {
    fn space(&self) -> &Arc<HilbertSpace>;
    /// Expectation value of an operator; pure states are normalized first.
    fn expect(&self, op: &Operator) -> Result<C64>;
    fn to_density(&self) -> DensityMatrix;
}

impl QuantumState for StateVector {
    fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    fn expect(&self, op: &Operator) -> Result<C64> {
        Ok(op.expect_pure(self)? / self.norm_sqr())
    }

    fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

impl QuantumState for DensityMatrix {
    fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    fn expect(&self, op: &Operator) -> Result<C64> {
        op.expect_mixed(self)
    }

    fn to_density(&self) -> DensityMatrix {
        self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nv(name: &str) -> Arc<HilbertSpace> {
        Arc::new(HilbertSpace::new(vec![Factor::emitter(name)]).unwrap())
    }

    fn two_nv() -> Arc<HilbertSpace> {
        Arc::new(HilbertSpace::new(vec![Factor::emitter("nv1"), Factor::emitter("nv2")]).unwrap())
    }

    fn diag(space: Arc<HilbertSpace>, d: &[f64]) -> Operator {
        let m = DMatrix::from_diagonal(&DVector::from_iterator(
            d.len(),
            d.iter().map(|&x| C64::new(x, 0.0)),
        ));
        Operator::new(space, m).unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let a = Arc::new(HilbertSpace::flat("a", &["x", "y"]).unwrap());
        let id = Operator::identity(a).tensor(&Operator::identity(nv("b")));
        assert_eq!(id.dim(), 6);
        assert_eq!(id.matrix(), &DMatrix::<C64>::identity(6, 6));
    }

    #[test]
    fn tensor_of_diagonals() {
        let a = Arc::new(HilbertSpace::flat("a", &["x", "y"]).unwrap());
        let b = Arc::new(HilbertSpace::flat("b", &["u", "v"]).unwrap());
        let k = diag(a, &[1.0, 2.0]).tensor(&diag(b, &[3.0, 4.0]));
        let expect = [3.0, 4.0, 6.0, 8.0];
        for (r, &d) in expect.iter().enumerate() {
            for c in 0..4 {
                let want = if r == c { d } else { 0.0 };
                assert_eq!(k.get(r, c), C64::new(want, 0.0));
            }
        }
    }

    #[test]
    fn exchange_term_is_single_entry() {
        let s1 = nv("nv1");
        let s2 = nv("nv2");
        let a = Operator::outer(s1, &["e"], &["0"]).unwrap();
        let b = Operator::outer(s2, &["0"], &["e"]).unwrap();
        let k = a.tensor(&b);
        let sp = two_nv();
        let row = sp.index_of(&["e", "0"]).unwrap();
        let col = sp.index_of(&["0", "e"]).unwrap();
        let nonzero: Vec<_> = (0..9)
            .flat_map(|r| (0..9).map(move |c| (r, c)))
            .filter(|&(r, c)| k.get(r, c) != ZERO)
            .collect();
        assert_eq!(nonzero, vec![(row, col)]);
        assert_eq!(k.get(row, col), ONE);
    }

    #[test]
    fn embed_matches_explicit_kronecker() {
        let sp = two_nv();
        let s01 = Operator::outer(nv("nv1"), &["0"], &["1"]).unwrap();
        let lifted = s01.embed(0, &sp).unwrap();
        let explicit = s01.tensor(&Operator::identity(nv("nv2")));
        assert_eq!(lifted.matrix(), explicit.matrix());

        let id = Operator::identity(nv("x")).embed(1, &sp).unwrap();
        assert_eq!(id.matrix(), &DMatrix::<C64>::identity(9, 9));
    }

    #[test]
    fn embed_trace_multiplies_by_other_dims() {
        let sp = Arc::new(
            HilbertSpace::new(vec![Factor::emitter("nv1"), Factor::emitter("nv2"), Factor::fock("cav", 2)])
                .unwrap(),
        );
        let op = diag(nv("x"), &[0.5, -2.0, 7.0]);
        for k in 0..2 {
            let lifted = op.embed(k, &sp).unwrap();
            assert!((lifted.trace() - op.trace() * 9.0).norm() < 1e-12);
        }
    }

    #[test]
    fn embed_rejects_wrong_dimension() {
        let sp = two_nv();
        let op = Operator::identity(Arc::new(HilbertSpace::flat("q", &["a", "b"]).unwrap()));
        assert!(matches!(op.embed(0, &sp), Err(Error::Dimension(_))));
        assert!(matches!(op.embed(5, &sp), Err(Error::Dimension(_))));
    }

    #[test]
    fn dagger_and_expectations() {
        let sp = two_nv();
        let a = Operator::outer(sp.clone(), &["e", "0"], &["1", "1"]).unwrap().scale(C64::new(0.3, -0.7));
        assert_eq!(a.dagger().dagger(), a);

        let ten = StateVector::basis(sp.clone(), &["1", "0"]).unwrap();
        let p = Operator::projector(&ten);
        assert_eq!(p.expect_pure(&ten).unwrap(), ONE);

        let q = nv("q");
        let mut z = Operator::zeros(q.clone());
        z.matrix[(0, 0)] = ONE;
        z.matrix[(1, 1)] = -ONE;
        let plus = StateVector::superpose(&[
            (ONE, &StateVector::basis(q.clone(), &["0"]).unwrap()),
            (ONE, &StateVector::basis(q, &["1"]).unwrap()),
        ])
        .unwrap();
        assert!(z.expect_pure(&plus).unwrap().norm() < 1e-15);
    }

    #[test]
    fn space_mismatch_is_rejected() {
        let a = Operator::identity(nv("a"));
        let b = Operator::identity(nv("b"));
        assert_eq!(a.matmul(&b), Err(Error::SpaceMismatch));
        let psi = StateVector::basis(nv("b"), &["1"]).unwrap();
        assert_eq!(a.expect_pure(&psi), Err(Error::SpaceMismatch));
    }

    #[test]
    fn unknown_label_is_rejected() {
        assert_eq!(
            StateVector::basis(two_nv(), &["1", "2"]),
            Err(Error::UnknownLabel("2".into()))
        );
        assert!(Factor::new("dup", vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn basis_is_orthonormal() {
        let sp = two_nv();
        let states: Vec<StateVector> = (0..9)
            .map(|i| {
                let labels = sp.labels_of(i);
                StateVector::basis(sp.clone(), &labels).unwrap()
            })
            .collect();
        for (i, a) in states.iter().enumerate() {
            assert_eq!(sp.index_of(&sp.labels_of(i)).unwrap(), i);
            for (j, b) in states.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((a.inner(b).unwrap() - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        let sp = two_nv();
        let psi = StateVector::superpose(&[
            (ONE, &StateVector::basis(sp.clone(), &["0", "0"]).unwrap()),
            (I, &StateVector::basis(sp.clone(), &["0", "1"]).unwrap()),
        ])
        .unwrap();
        let rho2 = DensityMatrix::from_pure(&psi).partial_trace_keep(1).unwrap();
        assert!((rho2.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((rho2.matrix()[(1, 0)] - C64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((rho2.purity() - 1.0).abs() < 1e-14);
        let rho1 = DensityMatrix::from_pure(&psi).partial_trace_keep(0).unwrap();
        assert!((rho1.population(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        let sp = nv("q");
        let mut m = DMatrix::<C64>::zeros(3, 3);
        m[(0, 0)] = C64::new(1.2, 0.0);
        m[(1, 1)] = C64::new(-0.2, 0.0);
        assert!(DensityMatrix::new(sp.clone(), m).is_err());
        let mut m = DMatrix::<C64>::zeros(3, 3);
        m[(0, 0)] = C64::new(0.5, 0.0);
        assert!(DensityMatrix::new(sp.clone(), m).is_err());
        let psi = StateVector::basis(sp, &["e"]).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        assert!(DensityMatrix::new(rho.space().clone(), rho.matrix().clone()).is_ok());
    }
}
