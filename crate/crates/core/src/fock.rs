//! Truncated Fock-space linear algebra, optionally tensored with a 2- or
//! 3-level atom.
//!
//! All operators are dense. Product spaces are atom-major: the amplitude of
//! `|level, n⟩` (levels numbered from 1) lives at
//! `(level - 1) * fock_dim + n`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use crate::math::{self, hermitian_eigenvalues, max_abs};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Largest admissible Poisson tail beyond the truncation.
pub const TAIL_TOLERANCE: f64 = 1e-10;
/// Norm tolerance for states flagged as normalized.
pub const NORM_TOLERANCE: f64 = 1e-8;
/// Hermiticity tolerance for density matrices.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// Trace tolerance for density matrices.
pub const TRACE_TOLERANCE: f64 = 1e-8;
/// Most negative eigenvalue tolerated in a density matrix.
pub const POSITIVITY_TOLERANCE: f64 = 1e-8;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dimensions of a truncated cavity mode, optionally with an atom attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruncatedSpace {
    fock_dim: usize,
    atom_dim: usize,
}

impl TruncatedSpace {
    /// `fock_dim >= 2` levels `0..fock_dim` and `atom_dim ∈ {1, 2, 3}`
    /// (1 means field only).
    pub fn new(fock_dim: usize, atom_dim: usize) -> Result<Self> {
        if fock_dim < 2 || !(1..=3).contains(&atom_dim) {
            return Err(Error::InvalidSpace { fock_dim, atom_dim });
        }
        Ok(Self { fock_dim, atom_dim })
    }

    pub fn field(fock_dim: usize) -> Result<Self> {
        Self::new(fock_dim, 1)
    }

    /// Space of a reduced atomic state: the field factor is one-dimensional.
    pub fn atom_only(atom_dim: usize) -> Result<Self> {
        if !(1..=3).contains(&atom_dim) {
            return Err(Error::InvalidSpace {
                fock_dim: 1,
                atom_dim,
            });
        }
        Ok(Self {
            fock_dim: 1,
            atom_dim,
        })
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn atom_dim(&self) -> usize {
        self.atom_dim
    }

    /// Total dimension `atom_dim * fock_dim`.
    pub fn dim(&self) -> usize {
        self.atom_dim * self.fock_dim
    }

    pub fn is_field_only(&self) -> bool {
        self.atom_dim == 1
    }

    /// Flat index of `|level, n⟩`, `level` counted from 1.
    pub fn index(&self, level: usize, n: usize) -> Result<usize> {
        self.check_level(level)?;
        if n >= self.fock_dim {
            return Err(Error::DimensionMismatch {
                expected: self.fock_dim,
                found: n + 1,
            });
        }
        Ok((level - 1) * self.fock_dim + n)
    }

    /// The field factor alone.
    pub fn field_factor(&self) -> TruncatedSpace {
        TruncatedSpace {
            fock_dim: self.fock_dim,
            atom_dim: 1,
        }
    }

    pub(crate) fn check_level(&self, level: usize) -> Result<()> {
        if level == 0 || level > self.atom_dim {
            return Err(Error::InvalidLevel {
                level,
                atom_dim: self.atom_dim,
            });
        }
        Ok(())
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }
}

/// Truncation needed for coherent amplitudes up to `alpha_max`.
///
/// Starts from `max(16, ⌈|α|² + 8√(|α|² + 1)⌉)` and grows until the Poisson
/// tail beyond the truncation is below [`TAIL_TOLERANCE`].
pub fn fock_dim_for(alpha_max: f64) -> usize {
    let mean = alpha_max * alpha_max;
    let rule = libm::ceil(mean + 8.0 * libm::sqrt(mean + 1.0)) as usize;
    let mut dim = rule.max(16);
    while math::poisson_tail(mean, dim) >= TAIL_TOLERANCE {
        dim += 1;
    }
    dim
}

fn check_tail(fock_dim: usize, alpha: C64) -> Result<()> {
    let alpha_sq = alpha.norm_sqr();
    let tail = math::poisson_tail(alpha_sq, fock_dim);
    if tail >= TAIL_TOLERANCE {
        return Err(Error::TruncationTooSmall {
            fock_dim,
            alpha_sq,
            tail,
        });
    }
    Ok(())
}

/// Dense operator on a [`TruncatedSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct FieldOperator {
    space: TruncatedSpace,
    matrix: CMatrix,
}

impl FieldOperator {
    pub fn new(space: TruncatedSpace, matrix: CMatrix) -> Result<Self> {
        space.check_dim(matrix.nrows())?;
        space.check_dim(matrix.ncols())?;
        Ok(Self { space, matrix })
    }

    pub fn identity(space: TruncatedSpace) -> Self {
        Self {
            space,
            matrix: CMatrix::identity(space.dim(), space.dim()),
        }
    }

    pub fn zeros(space: TruncatedSpace) -> Self {
        Self {
            space,
            matrix: CMatrix::zeros(space.dim(), space.dim()),
        }
    }

    /// `1_A ⊗ field`.
    pub fn from_field_matrix(space: TruncatedSpace, field: &CMatrix) -> Result<Self> {
        if field.nrows() != space.fock_dim() || field.ncols() != space.fock_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.fock_dim(),
                found: field.nrows(),
            });
        }
        let atom = CMatrix::identity(space.atom_dim(), space.atom_dim());
        Ok(Self {
            space,
            matrix: atom.kronecker(field),
        })
    }

    /// `atom ⊗ 1_F`.
    pub fn from_atom_matrix(space: TruncatedSpace, atom: &CMatrix) -> Result<Self> {
        if atom.nrows() != space.atom_dim() || atom.ncols() != space.atom_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.atom_dim(),
                found: atom.nrows(),
            });
        }
        let field = CMatrix::identity(space.fock_dim(), space.fock_dim());
        Ok(Self {
            space,
            matrix: atom.kronecker(&field),
        })
    }

    pub fn space(&self) -> TruncatedSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dagger(&self) -> Self {
        Self {
            space: self.space,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            space: self.space,
            matrix: &self.matrix * factor,
        }
    }

    /// Largest entry of `H - H†`.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Largest entry of `U†U - 1`.
    pub fn unitarity_error(&self) -> f64 {
        let dim = self.space.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - CMatrix::identity(dim, dim)))
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &FieldOperator) -> Result<FieldOperator> {
        self.check_same(other)?;
        Ok(Self {
            space: self.space,
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
        })
    }

    /// `⟨ψ|O|ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        self.space.check_dim(psi.amplitudes.len())?;
        let o_psi = &self.matrix * &psi.amplitudes;
        Ok(psi.amplitudes.dotc(&o_psi) / psi.norm_sqr())
    }

    pub fn apply(&self, psi: &StateVector) -> Result<CVector> {
        self.space.check_dim(psi.amplitudes.len())?;
        Ok(&self.matrix * &psi.amplitudes)
    }

    fn check_same(&self, other: &FieldOperator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                found: other.space.dim(),
            });
        }
        Ok(())
    }
}

impl<'a> Mul<&'a FieldOperator> for &'a FieldOperator {
    type Output = FieldOperator;

    /// Panics when the spaces differ.
    fn mul(self, rhs: &'a FieldOperator) -> FieldOperator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        FieldOperator {
            space: self.space,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl<'a> Add<&'a FieldOperator> for &'a FieldOperator {
    type Output = FieldOperator;

    fn add(self, rhs: &'a FieldOperator) -> FieldOperator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        FieldOperator {
            space: self.space,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl<'a> Sub<&'a FieldOperator> for &'a FieldOperator {
    type Output = FieldOperator;

    fn sub(self, rhs: &'a FieldOperator) -> FieldOperator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        FieldOperator {
            space: self.space,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

fn field_annihilation(fock_dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(fock_dim, fock_dim);
    for n in 1..fock_dim {
        a[(n - 1, n)] = C64::new(libm::sqrt(n as f64), 0.0);
    }
    a
}

/// Cavity annihilation operator `a`, identity on the atom.
pub fn annihilation_op(space: TruncatedSpace) -> FieldOperator {
    FieldOperator::from_field_matrix(space, &field_annihilation(space.fock_dim()))
        .expect("field factor has fock_dim rows")
}

/// Cavity creation operator `a†`.
pub fn creation_op(space: TruncatedSpace) -> FieldOperator {
    annihilation_op(space).dagger()
}

/// Photon number operator, built diagonally.
pub fn number_op(space: TruncatedSpace) -> FieldOperator {
    let diag = CMatrix::from_diagonal(&CVector::from_fn(space.fock_dim(), |n, _| {
        C64::new(n as f64, 0.0)
    }));
    FieldOperator::from_field_matrix(space, &diag).expect("field factor has fock_dim rows")
}

/// Atomic transition `|to⟩⟨from| ⊗ 1_F` (levels counted from 1).
///
/// With this convention `S^{ij}₊ = atom_transition(space, j, i)`.
pub fn atom_transition(space: TruncatedSpace, to: usize, from: usize) -> Result<FieldOperator> {
    space.check_level(to)?;
    space.check_level(from)?;
    let mut atom = CMatrix::zeros(space.atom_dim(), space.atom_dim());
    atom[(to - 1, from - 1)] = ONE;
    FieldOperator::from_atom_matrix(space, &atom)
}

/// Projector `|level⟩⟨level| ⊗ 1_F`.
pub fn atom_projector(space: TruncatedSpace, level: usize) -> Result<FieldOperator> {
    atom_transition(space, level, level)
}

/// `S_x = S^{12}₊ + S^{12}₋ = |1⟩⟨2| + |2⟩⟨1|`.
pub fn atom_sx(space: TruncatedSpace) -> Result<FieldOperator> {
    Ok(&atom_transition(space, 2, 1)? + &atom_transition(space, 1, 2)?)
}

/// Coherent-state amplitudes `e^{-|α|²/2} αⁿ / √n!` for `n < fock_dim`,
/// without renormalization.
pub fn coherent_amplitudes(alpha: C64, fock_dim: usize) -> CVector {
    let mut amps = CVector::zeros(fock_dim);
    let mut c = C64::new(libm::exp(-0.5 * alpha.norm_sqr()), 0.0);
    for n in 0..fock_dim {
        if n > 0 {
            c = c * alpha / libm::sqrt(n as f64);
        }
        amps[n] = c;
    }
    amps
}

/// Normalized coherent state `|α⟩` on a field-only space.
///
/// Fails with [`Error::TruncationTooSmall`] when the Poisson tail beyond the
/// truncation exceeds [`TAIL_TOLERANCE`]; the retained amplitudes are
/// renormalized.
pub fn coherent_state(space: TruncatedSpace, alpha: C64) -> Result<StateVector> {
    if !space.is_field_only() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: space.atom_dim(),
        });
    }
    check_tail(space.fock_dim(), alpha)?;
    let amps = coherent_amplitudes(alpha, space.fock_dim());
    let norm = amps.norm();
    Ok(StateVector {
        space,
        amplitudes: amps / C64::new(norm, 0.0),
        normalized: true,
    })
}

/// Displacement `D(β) = exp(β a† - β* a)` on the field factor.
///
/// Built by a tolerance-controlled matrix exponential of the truncated
/// generator, which is exactly anti-Hermitian, so `D` is unitary on the
/// retained subspace.
pub fn displacement_op(space: TruncatedSpace, beta: C64) -> Result<FieldOperator> {
    check_tail(space.fock_dim(), beta)?;
    let a = field_annihilation(space.fock_dim());
    let generator = a.adjoint() * beta - &a * beta.conj();
    let d = math::expm(&generator, 1e-12);
    FieldOperator::from_field_matrix(space, &d)
}

/// Photon-number parity `(-1)^{a†a}`.
pub fn parity_op(space: TruncatedSpace) -> FieldOperator {
    let diag = CMatrix::from_diagonal(&CVector::from_fn(space.fock_dim(), |n, _| {
        C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
    }));
    FieldOperator::from_field_matrix(space, &diag).expect("field factor has fock_dim rows")
}

/// Pure state on a [`TruncatedSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: TruncatedSpace,
    amplitudes: CVector,
    normalized: bool,
}

impl StateVector {
    /// Normalized state; the norm must be within [`NORM_TOLERANCE`] of 1.
    pub fn new(space: TruncatedSpace, amplitudes: CVector) -> Result<Self> {
        space.check_dim(amplitudes.len())?;
        let norm_sqr = amplitudes.norm_squared();
        if libm::fabs(norm_sqr - 1.0) > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self {
            space,
            amplitudes,
            normalized: true,
        })
    }

    /// State explicitly flagged as not normalized (trajectory intermediates).
    pub fn unnormalized(space: TruncatedSpace, amplitudes: CVector) -> Result<Self> {
        space.check_dim(amplitudes.len())?;
        Ok(Self {
            space,
            amplitudes,
            normalized: false,
        })
    }

    /// Renormalizes arbitrary amplitudes.
    pub fn from_unnormalized(space: TruncatedSpace, amplitudes: CVector) -> Result<Self> {
        space.check_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        Ok(Self {
            space,
            amplitudes: amplitudes / C64::new(norm, 0.0),
            normalized: true,
        })
    }

    /// Basis state `|level, n⟩` (`level` counted from 1).
    pub fn basis(space: TruncatedSpace, level: usize, n: usize) -> Result<Self> {
        let idx = space.index(level, n)?;
        let mut amps = CVector::zeros(space.dim());
        amps[idx] = ONE;
        Ok(Self {
            space,
            amplitudes: amps,
            normalized: true,
        })
    }

    /// `Σ_j atom[j] |j+1⟩ ⊗ |field⟩`.
    pub fn product(atom: &[C64], field: &StateVector) -> Result<Self> {
        if !field.space.is_field_only() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: field.space.atom_dim(),
            });
        }
        let space = TruncatedSpace::new(field.space.fock_dim(), atom.len())?;
        let f = field.space.fock_dim();
        let mut amps = CVector::zeros(space.dim());
        for (j, &cj) in atom.iter().enumerate() {
            for n in 0..f {
                amps[j * f + n] = cj * field.amplitudes[n];
            }
        }
        let norm_sqr = amps.norm_squared();
        let normalized = libm::fabs(norm_sqr - 1.0) <= NORM_TOLERANCE;
        Ok(Self {
            space,
            amplitudes: amps,
            normalized,
        })
    }

    pub fn space(&self) -> TruncatedSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.space.check_dim(other.amplitudes.len())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|⟨self|other⟩|²` for normalized states.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr() / (self.norm_sqr() * other.norm_sqr()))
    }

    pub fn normalize(self) -> Result<Self> {
        Self::from_unnormalized(self.space, self.amplitudes)
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn to_density(&self) -> DensityMatrix {
        let v = &self.amplitudes / C64::new(self.norm_sqr(), 0.0);
        DensityMatrix {
            space: self.space,
            matrix: &v * self.amplitudes.adjoint(),
        }
    }
}

/// Mixed state on a [`TruncatedSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: TruncatedSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validated density matrix: Hermitian, unit trace and positive within
    /// the module tolerances.
    pub fn new(space: TruncatedSpace, matrix: CMatrix) -> Result<Self> {
        space.check_dim(matrix.nrows())?;
        space.check_dim(matrix.ncols())?;
        let herm = max_abs(&(&matrix - matrix.adjoint()));
        if herm > HERMITIAN_TOLERANCE {
            return Err(Error::InvalidDensity {
                reason: "not Hermitian",
                value: herm,
            });
        }
        let trace = matrix.trace();
        if (trace - ONE).norm() > TRACE_TOLERANCE {
            return Err(Error::InvalidDensity {
                reason: "trace differs from 1",
                value: trace.re,
            });
        }
        let min_eig = hermitian_eigenvalues(&matrix)[0];
        if min_eig < -POSITIVITY_TOLERANCE {
            return Err(Error::InvalidDensity {
                reason: "negative eigenvalue",
                value: min_eig,
            });
        }
        Ok(Self { space, matrix })
    }

    /// Skips validation. Used for integrator snapshots, whose drift is
    /// reported separately.
    pub fn new_unchecked(space: TruncatedSpace, matrix: CMatrix) -> Result<Self> {
        space.check_dim(matrix.nrows())?;
        space.check_dim(matrix.ncols())?;
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> TruncatedSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        // Tr(ρ ρ) = Σ_ij ρ_ij ρ_ji = Σ_ij |ρ_ij|² for Hermitian ρ.
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Ascending spectrum of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `Tr[ρ O]`.
    pub fn expectation(&self, op: &FieldOperator) -> Result<C64> {
        self.space.check_dim(op.matrix.nrows())?;
        let mut acc = ZERO;
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                acc += self.matrix[(i, j)] * op.matrix[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Embeds a field-only state into a larger truncation by zero padding.
    pub fn padded(&self, fock_dim: usize) -> Result<Self> {
        if !self.space.is_field_only() || fock_dim < self.space.fock_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.fock_dim(),
                found: fock_dim,
            });
        }
        let space = TruncatedSpace::field(fock_dim)?;
        let mut m = CMatrix::zeros(fock_dim, fock_dim);
        let d = self.space.fock_dim();
        m.view_mut((0, 0), (d, d)).copy_from(&self.matrix);
        Ok(Self { space, matrix: m })
    }
}

/// Which factor a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Atom,
    Field,
}

/// Partial trace of an atom-field state.
///
/// Keeping the atom yields a state on [`TruncatedSpace::atom_only`].
pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> Result<DensityMatrix> {
    let space = rho.space;
    if space.atom_dim() < 2 {
        return Err(Error::InvalidSpace {
            fock_dim: space.fock_dim(),
            atom_dim: space.atom_dim(),
        });
    }
    let (na, nf) = (space.atom_dim(), space.fock_dim());
    let m = &rho.matrix;
    match keep {
        Subsystem::Atom => {
            let reduced = CMatrix::from_fn(na, na, |i, j| {
                (0..nf).map(|n| m[(i * nf + n, j * nf + n)]).sum()
            });
            Ok(DensityMatrix {
                space: TruncatedSpace::atom_only(na)?,
                matrix: reduced,
            })
        }
        Subsystem::Field => {
            let reduced = CMatrix::from_fn(nf, nf, |n, k| {
                (0..na).map(|l| m[(l * nf + n, l * nf + k)]).sum()
            });
            Ok(DensityMatrix {
                space: space.field_factor(),
                matrix: reduced,
            })
        }
    }
}

/// Rectangular grid of phase-space points `β = x + i y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl PhaseSpaceGrid {
    /// `[-half_width, half_width]²` sampled at `points × points`.
    pub fn square(half_width: f64, points: usize) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
            nx: points,
            ny: points,
        }
    }

    fn axis(min: f64, max: f64, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![0.5 * (min + max)],
            _ => (0..n)
                .map(|k| min + (max - min) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.x_min, self.x_max, self.nx)
    }

    pub fn ys(&self) -> Vec<f64> {
        Self::axis(self.y_min, self.y_max, self.ny)
    }
}

impl Default for PhaseSpaceGrid {
    fn default() -> Self {
        Self::square(4.0, 161)
    }
}

/// Wigner function sampled on a [`PhaseSpaceGrid`]. `values[(iy, ix)]`
/// holds `W(xs[ix] + i ys[iy])`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerMap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: nalgebra::DMatrix<f64>,
}

impl WignerMap {
    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }

    /// Riemann sum `∫ W d²β` over the grid.
    pub fn integral(&self) -> f64 {
        if self.xs.len() < 2 || self.ys.len() < 2 {
            return 0.0;
        }
        let dx = self.xs[1] - self.xs[0];
        let dy = self.ys[1] - self.ys[0];
        self.values.sum() * dx * dy
    }
}

/// `W(β) = (2/π) Tr[ρ D(β) Π D(-β)]` at a single point.
///
/// Evaluated exactly for the given (finite) ρ through the Laguerre
/// recursion for the matrix elements of the displaced parity, so no
/// truncated displacement is involved.
pub fn wigner_at(rho: &DensityMatrix, beta: C64) -> Result<f64> {
    if !rho.space.is_field_only() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: rho.space.atom_dim(),
        });
    }
    let mut scratch = vec![ZERO; rho.space.fock_dim()];
    Ok(wigner_point(rho.matrix(), beta, &mut scratch))
}

/// Wigner function of a field-only state on a grid.
pub fn wigner(rho: &DensityMatrix, grid: &PhaseSpaceGrid) -> Result<WignerMap> {
    if !rho.space.is_field_only() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: rho.space.atom_dim(),
        });
    }
    let xs = grid.xs();
    let ys = grid.ys();
    let mut values = nalgebra::DMatrix::<f64>::zeros(ys.len(), xs.len());
    let mut scratch = vec![ZERO; rho.space.fock_dim()];
    for (iy, &y) in ys.iter().enumerate() {
        for (ix, &x) in xs.iter().enumerate() {
            values[(iy, ix)] = wigner_point(rho.matrix(), C64::new(x, y), &mut scratch);
        }
    }
    Ok(WignerMap { xs, ys, values })
}

// w[n] holds W_{|m⟩⟨n|}(β) = (2/π)⟨n|D(β)ΠD(-β)|m⟩ for the current row m.
fn wigner_point(rho: &CMatrix, beta: C64, w: &mut [C64]) -> f64 {
    let dim = rho.nrows();
    let two_beta = beta * 2.0;
    w[0] = C64::new(2.0 / PI * libm::exp(-2.0 * beta.norm_sqr()), 0.0);
    let mut total = rho[(0, 0)].re * w[0].re;
    for n in 1..dim {
        w[n] = two_beta * w[n - 1] / libm::sqrt(n as f64);
        total += 2.0 * (rho[(0, n)] * w[n]).re;
    }
    for m in 1..dim {
        let sqrt_m = libm::sqrt(m as f64);
        let mut prev_row = w[m];
        w[m] = (two_beta.conj() * prev_row - w[m - 1] * sqrt_m) / sqrt_m;
        total += (rho[(m, m)] * w[m]).re;
        for n in (m + 1)..dim {
            let next = (two_beta * w[n - 1] - prev_row * sqrt_m) / libm::sqrt(n as f64);
            prev_row = w[n];
            w[n] = next;
            total += 2.0 * (rho[(m, n)] * w[n]).re;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn space_invariants() {
        assert!(TruncatedSpace::new(1, 1).is_err());
        assert!(TruncatedSpace::new(4, 0).is_err());
        assert!(TruncatedSpace::new(4, 4).is_err());
        let s = TruncatedSpace::new(5, 3).unwrap();
        assert_eq!(s.dim(), 15);
        assert_eq!(s.index(1, 0).unwrap(), 0);
        assert_eq!(s.index(3, 4).unwrap(), 14);
        assert!(s.index(4, 0).is_err());
        assert!(s.index(0, 0).is_err());
    }

    #[test]
    fn sizing_rule_meets_tail_bound() {
        assert_eq!(fock_dim_for(0.0), 16);
        for &a in &[
            0.5,
            1.0,
            core::f64::consts::SQRT_2,
            1.591,
            2.0,
            2.2361,
            3.1623,
            4.4721,
            6.0,
        ] {
            let d = fock_dim_for(a);
            assert!(math::poisson_tail(a * a, d) < TAIL_TOLERANCE, "alpha {a}");
            assert!(d >= 16);
        }
        // |α|² = 2.53: the bare rule gives 18 levels, which leaves 2.6e-10.
        assert_eq!(fock_dim_for(libm::sqrt(2.53)), 19);
    }

    #[test]
    fn annihilation_two_levels() {
        let s = TruncatedSpace::field(2).unwrap();
        let a = annihilation_op(s);
        assert_eq!(a.matrix()[(0, 1)], ONE);
        assert_eq!(a.matrix()[(0, 0)], ZERO);
        assert_eq!(a.matrix()[(1, 0)], ZERO);
        assert_eq!(a.matrix()[(1, 1)], ZERO);
    }

    #[test]
    fn commutator_has_truncation_corner() {
        let s = TruncatedSpace::field(20).unwrap();
        let a = annihilation_op(s);
        let comm = a.commutator(&a.dagger()).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                let want = if i != j {
                    0.0
                } else if i < 19 {
                    1.0
                } else {
                    -19.0
                };
                assert!((comm.matrix()[(i, j)] - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn commutator_acts_on_field_factor_only() {
        let s = TruncatedSpace::new(6, 3).unwrap();
        let a = annihilation_op(s);
        let comm = a.commutator(&a.dagger()).unwrap();
        for level in 1..=3 {
            for n in 0..6 {
                let i = s.index(level, n).unwrap();
                let want = if n < 5 { 1.0 } else { -5.0 };
                assert!((comm.matrix()[(i, i)].re - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn number_operator_is_adag_a() {
        let s = TruncatedSpace::new(12, 2).unwrap();
        let a = annihilation_op(s);
        let n = number_op(s);
        let ada = &a.dagger() * &a;
        assert!(max_abs(&(n.matrix() - ada.matrix())) < 1e-12);
    }

    #[test]
    fn mean_photon_of_imaginary_coherent_state() {
        let s = TruncatedSpace::field(40).unwrap();
        let alpha = c(0.0, 1.5);
        let psi = coherent_state(s, alpha).unwrap();
        let n = number_op(s).expectation(&psi).unwrap();
        // Poisson-sum oracle Σ n |α|^{2n} e^{-|α|²} / n!
        let mean = alpha.norm_sqr();
        let mut term = libm::exp(-mean);
        let mut oracle = 0.0;
        for k in 1..200 {
            term *= mean / k as f64;
            oracle += k as f64 * term;
        }
        assert!((n.re - oracle).abs() < 1e-10);
        assert!((n.re - 2.25).abs() < 1e-10);
    }

    #[test]
    fn coherent_state_examples() {
        let s = TruncatedSpace::field(30).unwrap();
        let vac = coherent_state(s, ZERO).unwrap();
        assert_eq!(vac.amplitudes()[0], ONE);
        assert!(vac.amplitudes().iter().skip(1).all(|z| *z == ZERO));

        let one = coherent_state(s, c(1.0, 0.0)).unwrap();
        assert!((one.amplitudes()[0].norm_sqr() - 0.36787944117144233).abs() < 1e-12);

        let minus = coherent_state(s, c(-1.0, 0.0)).unwrap();
        let overlap = minus.inner(&one).unwrap();
        assert!((overlap.re - 0.1353352832366127).abs() < 1e-12);
        assert!(overlap.im.abs() < 1e-15);
    }

    #[test]
    fn coherent_state_rejects_small_truncation() {
        let s = TruncatedSpace::field(10).unwrap();
        match coherent_state(s, c(3.0, 0.0)) {
            Err(Error::TruncationTooSmall { fock_dim, .. }) => assert_eq!(fock_dim, 10),
            other => panic!("unexpected {other:?}"),
        }
        let with_atom = TruncatedSpace::new(10, 2).unwrap();
        assert!(coherent_state(with_atom, ZERO).is_err());
    }

    #[test]
    fn coherent_amplitudes_are_poissonian() {
        let alpha = c(0.8, -1.1);
        let amps = coherent_amplitudes(alpha, 40);
        for n in 0..40 {
            let p = math::poisson_pmf(alpha.norm_sqr(), n);
            assert!((amps[n].norm_sqr() - p).abs() < 1e-12);
        }
    }

    #[test]
    fn displacement_examples() {
        let s = TruncatedSpace::field(40).unwrap();
        let id = displacement_op(s, ZERO).unwrap();
        assert!(max_abs(&(id.matrix() - CMatrix::identity(40, 40))) < 1e-15);

        let beta = c(0.7, 0.3);
        let d = displacement_op(s, beta).unwrap();
        let dm = displacement_op(s, -beta).unwrap();
        let prod = &d * &dm;
        assert!(max_abs(&(prod.matrix() - CMatrix::identity(40, 40))) < 1e-8);
        assert!(d.unitarity_error() < 1e-8);

        let s30 = TruncatedSpace::field(30).unwrap();
        let d1 = displacement_op(s30, c(1.0, 0.0)).unwrap();
        let vac = StateVector::basis(s30, 1, 0).unwrap();
        let displaced = d1.apply(&vac).unwrap();
        let coh = coherent_state(s30, c(1.0, 0.0)).unwrap();
        assert!((displaced - coh.amplitudes()).norm() < 1e-8);
    }

    #[test]
    fn wigner_reference_points() {
        let s = TruncatedSpace::field(30).unwrap();
        let vac = StateVector::basis(s, 1, 0).unwrap().to_density();
        assert!((wigner_at(&vac, ZERO).unwrap() - 2.0 / PI).abs() < 1e-12);

        let alpha = c(1.0, 0.0);
        let coh = coherent_state(s, alpha).unwrap().to_density();
        assert!((wigner_at(&coh, alpha).unwrap() - 2.0 / PI).abs() < 1e-9);

        let plus = coherent_state(s, alpha).unwrap();
        let minus = coherent_state(s, -alpha).unwrap();
        let odd = StateVector::from_unnormalized(s, plus.amplitudes() - minus.amplitudes())
            .unwrap()
            .to_density();
        assert!((wigner_at(&odd, ZERO).unwrap() + 2.0 / PI).abs() < 1e-9);
    }

    #[test]
    fn wigner_matches_displaced_parity_trace() {
        // Second route: (2/π) Tr[ρ D(β) Π D(-β)] with explicit displacements in
        // a padded space.
        let small = TruncatedSpace::field(8).unwrap();
        let mut m = CMatrix::zeros(8, 8);
        m[(0, 0)] = c(0.5, 0.0);
        m[(1, 1)] = c(0.3, 0.0);
        m[(3, 3)] = c(0.2, 0.0);
        m[(0, 1)] = c(0.1, 0.2);
        m[(1, 0)] = c(0.1, -0.2);
        m[(1, 3)] = c(0.0, 0.05);
        m[(3, 1)] = c(0.0, -0.05);
        let rho = DensityMatrix::new(small, m).unwrap();
        let big = rho.padded(60).unwrap();
        let parity = parity_op(big.space());
        for &beta in &[c(0.0, 0.0), c(0.4, -0.3), c(-1.1, 0.6), c(0.2, 1.7)] {
            let d = displacement_op(big.space(), beta).unwrap();
            let dm = displacement_op(big.space(), -beta).unwrap();
            let kernel = &(&d * &parity) * &dm;
            let route = big.expectation(&kernel).unwrap().re * 2.0 / PI;
            let w = wigner_at(&rho, beta).unwrap();
            assert!((w - route).abs() < 1e-9, "beta {beta}: {w} vs {route}");
        }
    }

    #[test]
    fn wigner_integrates_to_one() {
        let s = TruncatedSpace::field(30).unwrap();
        let alpha = c(0.0, 1.2);
        let plus = coherent_state(s, alpha).unwrap();
        let minus = coherent_state(s, -alpha).unwrap();
        let even = StateVector::from_unnormalized(s, plus.amplitudes() + minus.amplitudes())
            .unwrap()
            .to_density();
        let map = wigner(&even, &PhaseSpaceGrid::square(4.5, 121)).unwrap();
        assert!((map.integral() - 1.0).abs() < 1e-3);
        assert!(map.min() < -0.1);
    }

    #[test]
    fn partial_trace_examples() {
        let s = TruncatedSpace::new(4, 2).unwrap();
        // Product state: |ψ_A⟩ = (|1⟩ + i|2⟩)/√2, field |1⟩.
        let field = StateVector::basis(TruncatedSpace::field(4).unwrap(), 1, 1).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let prod = StateVector::product(&[c(h, 0.0), c(0.0, h)], &field).unwrap();
        let rho_f = partial_trace(&prod.to_density(), Subsystem::Field).unwrap();
        assert!(max_abs(&(rho_f.matrix() - field.to_density().matrix())) < 1e-14);

        // (|+⟩|0⟩ + |−⟩|1⟩)/√2
        let mut amps = CVector::zeros(8);
        amps[s.index(1, 0).unwrap()] += c(0.5, 0.0);
        amps[s.index(2, 0).unwrap()] += c(0.5, 0.0);
        amps[s.index(1, 1).unwrap()] += c(0.5, 0.0);
        amps[s.index(2, 1).unwrap()] -= c(0.5, 0.0);
        let bell = StateVector::new(s, amps).unwrap().to_density();
        let rho_a = partial_trace(&bell, Subsystem::Atom).unwrap();
        assert_eq!(rho_a.space().dim(), 2);
        assert!((rho_a.matrix()[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!((rho_a.matrix()[(1, 1)].re - 0.5).abs() < 1e-14);
        assert!(rho_a.matrix()[(0, 1)].norm() < 1e-14);

        let fd = DensityMatrix::new(
            TruncatedSpace::field(4).unwrap(),
            CMatrix::identity(4, 4) * c(0.25, 0.0),
        )
        .unwrap();
        assert!(partial_trace(&fd, Subsystem::Atom).is_err());
    }

    #[test]
    fn density_validation() {
        let s = TruncatedSpace::field(2).unwrap();
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(1.2, 0.0);
        m[(1, 1)] = c(-0.2, 0.0);
        assert!(matches!(
            DensityMatrix::new(s, m),
            Err(Error::InvalidDensity {
                reason: "negative eigenvalue",
                ..
            })
        ));
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(0.5, 0.0);
        m[(1, 1)] = c(0.5, 0.0);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(DensityMatrix::new(s, m).is_err());
    }

    #[test]
    fn atom_transition_convention() {
        let s = TruncatedSpace::new(3, 3).unwrap();
        let s13_plus = atom_transition(s, 3, 1).unwrap();
        let low = StateVector::basis(s, 1, 2).unwrap();
        let up = s13_plus.apply(&low).unwrap();
        assert_eq!(up[s.index(3, 2).unwrap()], ONE);
        assert!(atom_transition(s, 4, 1).is_err());
    }
}
