//! Quantities reported for numerical and analytic states.

use alloc::vec;
use alloc::vec::Vec;

use crate::analytic::mandel_q_of_moments;
use crate::fock::{partial_trace, DensityMatrix, StateVector, Subsystem, TruncatedSpace};
use crate::math::{entropy_bits_of, hermitian_eigenvalues};
use crate::{CMatrix, Error, Result, C64};

/// Everything reported for a single state.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSet {
    pub mean_photon: f64,
    /// `p_j` for levels `1..=atom_dim` (just `[1]` for a bare field).
    pub populations: Vec<f64>,
    pub photon_pdf: Vec<f64>,
    pub q: f64,
    /// Von Neumann entropy of the reduced atomic state.
    pub entropy_bits: f64,
    /// `p₁ - p₂`, zero without an atom.
    pub inversion: f64,
}

/// Borrowed pure or mixed state.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a StateVector> for StateRef<'a> {
    fn from(s: &'a StateVector) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(s: &'a DensityMatrix) -> Self {
        StateRef::Mixed(s)
    }
}

/// Linear functionals of a state, the raw material of every reported
/// observable. Averaging these over trajectories gives ensemble values.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    /// `Tr ρ` (or `⟨ψ|ψ⟩`), reported to expose drift.
    pub norm: f64,
    pub mean_photon: f64,
    /// `⟨N²⟩`.
    pub second_moment: f64,
    /// Reduced atomic density matrix (1×1 for a bare field).
    pub atom: CMatrix,
}

impl Moments {
    /// Pure-state moments from atom-major amplitudes, normalized by `⟨ψ|ψ⟩`.
    pub fn of_amplitudes(space: TruncatedSpace, amps: &[C64]) -> Self {
        let (na, nf) = (space.atom_dim(), space.fock_dim());
        let mut atom = CMatrix::zeros(na, na);
        let (mut norm, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for l in 0..na {
            for n in 0..nf {
                let p = amps[l * nf + n].norm_sqr();
                let nn = n as f64;
                norm += p;
                m1 += nn * p;
                m2 += nn * nn * p;
            }
        }
        for i in 0..na {
            for j in i..na {
                let mut acc = C64::new(0.0, 0.0);
                for n in 0..nf {
                    acc += amps[i * nf + n] * amps[j * nf + n].conj();
                }
                atom[(i, j)] = acc / norm;
                atom[(j, i)] = acc.conj() / norm;
            }
        }
        Self {
            norm,
            mean_photon: m1 / norm,
            second_moment: m2 / norm,
            atom,
        }
    }

    pub fn of_density(rho: &DensityMatrix) -> Self {
        let space = rho.space();
        let (na, nf) = (space.atom_dim(), space.fock_dim());
        let m = rho.matrix();
        let (mut norm, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for l in 0..na {
            for n in 0..nf {
                let p = m[(l * nf + n, l * nf + n)].re;
                let nn = n as f64;
                norm += p;
                m1 += nn * p;
                m2 += nn * nn * p;
            }
        }
        let atom = CMatrix::from_fn(na, na, |i, j| {
            (0..nf).map(|n| m[(i * nf + n, j * nf + n)]).sum::<C64>() / norm
        });
        Self {
            norm,
            mean_photon: m1 / norm,
            second_moment: m2 / norm,
            atom,
        }
    }

    pub fn population(&self, level: usize) -> f64 {
        if level >= 1 && level <= self.atom.nrows() {
            self.atom[(level - 1, level - 1)].re
        } else {
            0.0
        }
    }

    pub fn inversion(&self) -> f64 {
        if self.atom.nrows() >= 2 {
            self.population(1) - self.population(2)
        } else {
            0.0
        }
    }

    pub fn q(&self) -> f64 {
        mandel_q_of_moments(self.mean_photon, self.second_moment)
    }

    pub fn entropy_bits(&self) -> f64 {
        if self.atom.nrows() < 2 {
            return 0.0;
        }
        entropy_bits_of(&hermitian_eigenvalues(&self.atom))
    }
}

/// Populations, photon statistics, Q, atomic entropy and inversion.
pub fn extract<'a>(state: impl Into<StateRef<'a>>) -> ObservableSet {
    let (space, moments, pdf) = match state.into() {
        StateRef::Pure(psi) => {
            let space = psi.space();
            let amps = psi.amplitudes().as_slice();
            let moments = Moments::of_amplitudes(space, amps);
            let nf = space.fock_dim();
            let mut pdf = vec![0.0; nf];
            for l in 0..space.atom_dim() {
                for (n, p) in pdf.iter_mut().enumerate() {
                    *p += amps[l * nf + n].norm_sqr() / moments.norm;
                }
            }
            (space, moments, pdf)
        }
        StateRef::Mixed(rho) => {
            let space = rho.space();
            let moments = Moments::of_density(rho);
            let nf = space.fock_dim();
            let mut pdf = vec![0.0; nf];
            for l in 0..space.atom_dim() {
                for (n, p) in pdf.iter_mut().enumerate() {
                    *p += rho.matrix()[(l * nf + n, l * nf + n)].re / moments.norm;
                }
            }
            (space, moments, pdf)
        }
    };
    let populations = (1..=space.atom_dim())
        .map(|l| moments.population(l))
        .collect();
    ObservableSet {
        mean_photon: moments.mean_photon,
        populations,
        q: moments.q(),
        entropy_bits: moments.entropy_bits(),
        inversion: moments.inversion(),
        photon_pdf: pdf,
    }
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy_bits(rho: &DensityMatrix) -> f64 {
    entropy_bits_of(&rho.eigenvalues())
}

/// Entropies of both reductions of a pure atom-field state and their gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPair {
    pub atom_bits: f64,
    pub field_bits: f64,
    pub gap: f64,
}

/// `S_A`, `S_F` and `|S_A - S_F|`; fails with [`Error::NotPure`] unless
/// `Tr ρ² > 1 - 1e-8`.
pub fn entropy_pair_check(rho: &DensityMatrix) -> Result<EntropyPair> {
    let purity = rho.purity();
    if purity <= 1.0 - 1e-8 {
        return Err(Error::NotPure(purity));
    }
    let atom_bits = von_neumann_entropy_bits(&partial_trace(rho, Subsystem::Atom)?);
    let field_bits = von_neumann_entropy_bits(&partial_trace(rho, Subsystem::Field)?);
    Ok(EntropyPair {
        atom_bits,
        field_bits,
        gap: libm::fabs(atom_bits - field_bits),
    })
}
