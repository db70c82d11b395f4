//! Compressed sparse row operators and time-dependent operator sums, used by
//! the integrators' inner loops.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::fock::{FieldOperator, TruncatedSpace};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Complex CSR matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C64>,
}

impl SparseOperator {
    /// Keeps entries whose modulus exceeds `drop_below`.
    pub fn from_dense(m: &CMatrix, drop_below: f64) -> Self {
        let dim = m.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                if z.norm() > drop_below {
                    cols.push(j);
                    values.push(z);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn from_operator(op: &FieldOperator) -> Self {
        Self::from_dense(op.matrix(), 0.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] += self.values[k];
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_dense(&self.to_dense().adjoint(), 0.0)
    }

    /// `y += c · A x`.
    pub fn apply_add(&self, c: C64, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.dim) {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *yi += c * acc;
        }
    }

    /// `y = A x`.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        self.apply_add(C64::new(1.0, 0.0), x, y);
    }

    pub fn apply(&self, x: &CVector) -> CVector {
        let mut y = CVector::zeros(self.dim);
        self.apply_into(x.as_slice(), y.as_mut_slice());
        y
    }

    /// `Y += c · A X` for a dense square `X`.
    pub fn apply_matrix_add(&self, c: C64, x: &CMatrix, y: &mut CMatrix) {
        let n = x.ncols();
        for j in 0..n {
            let xs = x.column(j);
            let xs = xs.as_slice();
            let mut ys = y.column_mut(j);
            for i in 0..self.dim {
                let mut acc = C64::new(0.0, 0.0);
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.values[k] * xs[self.cols[k]];
                }
                ys[i] += c * acc;
            }
        }
    }

    /// Maximum absolute row sum, an upper bound on the spectral norm of a
    /// Hermitian operator.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|k| self.values[k].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Scalar prefactor of one operator term.
#[derive(Clone)]
pub enum Coefficient {
    Constant(C64),
    /// `f(t)` together with a bound on `|f|` for step-size checks.
    TimeDependent {
        f: Arc<dyn Fn(f64) -> C64 + Send + Sync>,
        max_abs: f64,
    },
}

impl Coefficient {
    pub fn at(&self, t: f64) -> C64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::TimeDependent { f, .. } => f(t),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Coefficient::Constant(c) => c.norm(),
            Coefficient::TimeDependent { max_abs, .. } => *max_abs,
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Coefficient::TimeDependent { max_abs, .. } => f
                .debug_struct("TimeDependent")
                .field("max_abs", max_abs)
                .finish_non_exhaustive(),
        }
    }
}

/// `H(t) = Σ_k c_k(t) A_k`.
#[derive(Debug, Clone)]
pub struct TimeDependentOperator {
    space: TruncatedSpace,
    terms: Vec<(Coefficient, SparseOperator)>,
}

impl TimeDependentOperator {
    pub fn new(space: TruncatedSpace) -> Self {
        Self {
            space,
            terms: Vec::new(),
        }
    }

    pub fn constant(op: &FieldOperator) -> Self {
        let mut h = Self::new(op.space());
        h.push(Coefficient::Constant(C64::new(1.0, 0.0)), op)
            .expect("same space");
        h
    }

    pub fn push(&mut self, coefficient: Coefficient, op: &FieldOperator) -> Result<()> {
        if op.space() != self.space {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                found: op.space().dim(),
            });
        }
        self.terms
            .push((coefficient, SparseOperator::from_operator(op)));
        Ok(())
    }

    pub fn space(&self) -> TruncatedSpace {
        self.space
    }

    pub fn terms(&self) -> &[(Coefficient, SparseOperator)] {
        &self.terms
    }

    pub fn is_time_dependent(&self) -> bool {
        self.terms
            .iter()
            .any(|(c, _)| matches!(c, Coefficient::TimeDependent { .. }))
    }

    /// Dense `H(t)`.
    pub fn at(&self, t: f64) -> Result<FieldOperator> {
        let mut m = CMatrix::zeros(self.space.dim(), self.space.dim());
        for (c, op) in &self.terms {
            m += op.to_dense() * c.at(t);
        }
        FieldOperator::new(self.space, m)
    }

    /// `Σ_k max|c_k| · ‖A_k‖`, a time-uniform bound on `‖H(t)‖`.
    pub fn norm_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|(c, op)| c.max_abs() * op.norm_bound())
            .sum()
    }

    /// `y = H(t) x`.
    pub fn apply_into(&self, t: f64, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        self.apply_add(t, C64::new(1.0, 0.0), x, y);
    }

    /// `y += s · H(t) x`.
    pub fn apply_add(&self, t: f64, s: C64, x: &[C64], y: &mut [C64]) {
        for (c, op) in &self.terms {
            op.apply_add(s * c.at(t), x, y);
        }
    }

    /// `Y += s · H(t) X`.
    pub fn apply_matrix_add(&self, t: f64, s: C64, x: &CMatrix, y: &mut CMatrix) {
        for (c, op) in &self.terms {
            op.apply_matrix_add(s * c.at(t), x, y);
        }
    }
}
