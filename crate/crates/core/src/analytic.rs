//! Closed-form solution of the effective master equation
//!
//! ```text
//! dρ/dt = -i[H, ρ] - (κ/2)(a†aρ - 2aρa† + ρa†a),   H = -(g_eff/2)(a† + a)S_x
//! ```
//!
//! from `ρ(0) = |1⟩⟨1| ⊗ |0⟩⟨0|`. Writing `ρ` in the `|±⟩ = (|1⟩ ± |2⟩)/√2`
//! basis, the four field blocks are coherent dyads built from
//!
//! ```text
//! α(t) = i (g_eff/κ)(1 - e^{-κt/2})
//! f(t) = exp{-(4g_eff²/κ²)(e^{-κt/2} - 1 + κt/2)}
//! ```
//!
//! With `κ = 0` the unitary limits `α = i g_eff t/2` and `f = e^{-g_eff² t²/2}`
//! are used.

use crate::fock::{
    coherent_amplitudes, coherent_state, DensityMatrix, StateVector, TruncatedSpace,
};
use crate::math::{
    binary_entropy_bits, coherence_excess, exp_neg_minus_one_plus, one_minus_exp_neg, poisson_pmf,
};
use crate::{CMatrix, Error, Result, C64};

/// Outcome of a projective measurement of the atom in the bare basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Atom found in `|1⟩`: even-cat branch.
    Level1,
    /// Atom found in `|2⟩`: odd-cat branch.
    Level2,
}

impl Branch {
    /// `+1` for `|1⟩`, `-1` for `|2⟩`.
    pub fn sign(&self) -> f64 {
        match self {
            Branch::Level1 => 1.0,
            Branch::Level2 => -1.0,
        }
    }

    /// Atomic level, counted from 1.
    pub fn level(&self) -> usize {
        match self {
            Branch::Level1 => 1,
            Branch::Level2 => 2,
        }
    }
}

/// Photon-statistics target for [`AnalyticSolution::mandel_q`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhotonStatistics {
    Unconditional,
    Conditional(Branch),
}

/// The pair `(α(t), f(t))` for given `g_eff`, `κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticSolution {
    g_eff: f64,
    kappa: f64,
}

impl AnalyticSolution {
    /// `κ = 0` selects the unitary-limit forms.
    pub fn new(g_eff: f64, kappa: f64) -> Result<Self> {
        if !(g_eff.is_finite() && g_eff >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "g_eff",
                value: g_eff,
            });
        }
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: kappa,
            });
        }
        Ok(Self { g_eff, kappa })
    }

    /// Solution with steady photon number `N` at decay rate `κ > 0`.
    pub fn from_steady_photons(n_ss: f64, kappa: f64) -> Result<Self> {
        if !(n_ss.is_finite() && n_ss >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "n_ss",
                value: n_ss,
            });
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: kappa,
            });
        }
        Self::new(kappa * libm::sqrt(n_ss), kappa)
    }

    pub fn g_eff(&self) -> f64 {
        self.g_eff
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn is_unitary_limit(&self) -> bool {
        self.kappa == 0.0
    }

    /// Same coupling with `κ = 0`.
    pub fn unitary_limit(&self) -> Self {
        Self {
            g_eff: self.g_eff,
            kappa: 0.0,
        }
    }

    /// `(g_eff/κ)²`; infinite in the unitary limit.
    pub fn steady_photons(&self) -> f64 {
        let r = self.g_eff / self.kappa;
        r * r
    }

    /// `α(t)`, purely imaginary.
    pub fn alpha(&self, t: f64) -> C64 {
        let im = if self.is_unitary_limit() {
            0.5 * self.g_eff * t
        } else {
            self.g_eff / self.kappa * one_minus_exp_neg(0.5 * self.kappa * t)
        };
        C64::new(0.0, im)
    }

    /// `|α(t)|²`.
    pub fn alpha_sq(&self, t: f64) -> f64 {
        self.alpha(t).norm_sqr()
    }

    /// Mean photon number, equal to `|α(t)|²`.
    pub fn mean_photon(&self, t: f64) -> f64 {
        self.alpha_sq(t)
    }

    /// `ln f(t)`.
    pub fn ln_f(&self, t: f64) -> f64 {
        if self.is_unitary_limit() {
            -0.5 * self.g_eff * self.g_eff * t * t
        } else {
            let r = self.g_eff / self.kappa;
            -4.0 * r * r * exp_neg_minus_one_plus(0.5 * self.kappa * t)
        }
    }

    /// Decoherence function `f(t)`.
    pub fn f(&self, t: f64) -> f64 {
        libm::exp(self.ln_f(t))
    }

    /// `ln(f e^{2|α|²}) ≤ 0`, the log of the coherence retained relative to
    /// a pure cat. Exactly zero in the unitary limit.
    pub fn ln_coherence(&self, t: f64) -> f64 {
        if self.is_unitary_limit() {
            0.0
        } else {
            let r = self.g_eff / self.kappa;
            -2.0 * r * r * coherence_excess(0.5 * self.kappa * t)
        }
    }

    /// Atomic inversion `p₁ - p₂`, equal to `f(t)`.
    pub fn inversion(&self, t: f64) -> f64 {
        self.f(t)
    }

    /// Poisson photon distribution at `t`.
    pub fn photon_pdf(&self, t: f64, n: usize) -> f64 {
        poisson_pmf(self.alpha_sq(t), n)
    }

    /// Field state after finding the atom in `branch` at `t`.
    pub fn conditional(&self, t: f64, branch: Branch) -> ConditionalFieldState {
        let alpha = self.alpha(t);
        let ln_f = self.ln_f(t);
        let f = libm::exp(ln_f);
        ConditionalFieldState {
            branch,
            alpha,
            f,
            probability: 0.5 * (1.0 + branch.sign() * f),
            ln_f,
            ln_coherence: self.ln_coherence(t),
        }
    }

    /// Conditional photon distribution `p_n^{(1,2)}(t)`.
    pub fn conditional_photon_pdf(&self, t: f64, branch: Branch, n: usize) -> f64 {
        self.conditional(t, branch).pdf(n)
    }

    /// Mandel–Fano parameter. The unconditional field is Poissonian; summing
    /// the conditional distributions in closed form gives
    /// `Q^{(1,2)} = ±4|α|² f / (1 - f²)`, zero when `α = 0`.
    pub fn mandel_q(&self, t: f64, which: PhotonStatistics) -> f64 {
        let a = self.alpha_sq(t);
        let PhotonStatistics::Conditional(branch) = which else {
            return 0.0;
        };
        if a <= 0.0 {
            return 0.0;
        }
        let ln_f = self.ln_f(t);
        branch.sign() * 4.0 * a * libm::exp(ln_f) / -libm::expm1(2.0 * ln_f)
    }

    /// Reduced atomic state at `t`.
    pub fn atom_density(&self, t: f64) -> AtomDensity {
        AtomDensity::from_f(self.f(t))
    }

    /// Entanglement entropy in bits, from the eigenvalues `½(1 ± f)`.
    pub fn entanglement_entropy(&self, t: f64) -> f64 {
        binary_entropy_bits(0.5 * (1.0 + self.f(t)))
    }

    /// Inflection time of `f(t)`:
    /// `t_F = -(2/κ) ln(1 + (1 - √(1 + 16N))/(8N))`.
    pub fn inflection_time(&self) -> Result<f64> {
        let n = self.positive_steady_photons()?;
        let s = libm::sqrt(1.0 + 16.0 * n);
        Ok(-2.0 / self.kappa * libm::log1p((1.0 - s) / (8.0 * n)))
    }

    /// `(γ_D, γ'_D) = (κ(√(1 + 16N) - 1)/4, 2κN)`.
    pub fn decoherence_rates(&self) -> Result<(f64, f64)> {
        let n = self.positive_steady_photons()?;
        let gamma = 0.25 * self.kappa * (libm::sqrt(1.0 + 16.0 * n) - 1.0);
        Ok((gamma, 2.0 * self.kappa * n))
    }

    fn positive_steady_photons(&self) -> Result<f64> {
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: self.kappa,
            });
        }
        if self.g_eff <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "g_eff",
                value: self.g_eff,
            });
        }
        Ok(self.steady_photons())
    }

    /// The four field blocks at `t` on `fock_dim` levels.
    pub fn joint_state(&self, t: f64, fock_dim: usize) -> Result<JointState> {
        let field = TruncatedSpace::field(fock_dim)?;
        let alpha = self.alpha(t);
        let plus = coherent_state(field, alpha)?;
        let minus = coherent_state(field, -alpha)?;
        let p = plus.amplitudes();
        let m = minus.amplitudes();
        let half = C64::new(0.5, 0.0);
        let coherence = C64::new(0.5 * libm::exp(self.ln_coherence(t)), 0.0);
        let rho3 = p * m.adjoint() * coherence;
        Ok(JointState {
            field,
            rho1: p * p.adjoint() * half,
            rho2: m * m.adjoint() * half,
            rho4: rho3.adjoint(),
            rho3,
        })
    }

    /// Even (`Level1`) or odd (`Level2`) cat `(|α̃⟩ ± |-α̃⟩)/N` with the
    /// unitary-limit amplitude `α̃ = i g_eff t/2`.
    pub fn conditional_cat_state(
        &self,
        t: f64,
        branch: Branch,
        space: TruncatedSpace,
    ) -> Result<StateVector> {
        cat_state(space, self.unitary_limit().alpha(t), branch)
    }
}

/// Even or odd cat `(|α⟩ ± |-α⟩)/N` on a field-only space, built from
/// parity-filtered amplitudes so the odd cat stays accurate as `α → 0`.
pub fn cat_state(space: TruncatedSpace, alpha: C64, branch: Branch) -> Result<StateVector> {
    coherent_state(space, alpha)?;
    let mut amps = coherent_amplitudes(alpha, space.fock_dim());
    let keep = match branch {
        Branch::Level1 => 0,
        Branch::Level2 => 1,
    };
    for (n, a) in amps.iter_mut().enumerate() {
        if n % 2 != keep {
            *a = C64::new(0.0, 0.0);
        }
    }
    if amps.norm() == 0.0 {
        // α = 0: the odd branch has no support; its limit is |1⟩.
        amps[1] = C64::new(1.0, 0.0);
    }
    StateVector::from_unnormalized(space, amps)
}

/// Conditional field state after an atomic measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalFieldState {
    pub branch: Branch,
    pub alpha: C64,
    pub f: f64,
    /// Probability `½(1 ± f)` of the measurement outcome.
    pub probability: f64,
    ln_f: f64,
    ln_coherence: f64,
}

impl ConditionalFieldState {
    /// From an arbitrary `(α, f)` pair; requires `0 ≤ f ≤ e^{-2|α|²}`.
    pub fn new(branch: Branch, alpha: C64, f: f64) -> Result<Self> {
        let a = alpha.norm_sqr();
        let bound = libm::exp(-2.0 * a);
        if f.is_nan() || f < 0.0 || f > bound + 1e-12 {
            return Err(Error::NegativeProbability { f, bound });
        }
        let ln_f = libm::log(f);
        Ok(Self {
            branch,
            alpha,
            f,
            probability: 0.5 * (1.0 + branch.sign() * f),
            ln_f,
            ln_coherence: (ln_f + 2.0 * a).min(0.0),
        })
    }

    /// `p_n = e^{-A} Aⁿ/n! [1 ± (-1)ⁿ f e^{2A}] / (1 ± f)` with `A = |α|²`.
    /// In the `A → 0` limit of the odd branch this is `δ_{n,1}`.
    pub fn pdf(&self, n: usize) -> f64 {
        let a = self.alpha.norm_sqr();
        let poisson = poisson_pmf(a, n);
        let even = n.is_multiple_of(2);
        let r = libm::exp(self.ln_coherence);
        match self.branch {
            Branch::Level1 => {
                let bracket = if even {
                    1.0 + r
                } else {
                    -libm::expm1(self.ln_coherence)
                };
                poisson * bracket / (1.0 + self.f)
            }
            Branch::Level2 => {
                let denom = -libm::expm1(self.ln_f);
                if denom <= 0.0 || a == 0.0 {
                    return if n == 1 { 1.0 } else { 0.0 };
                }
                let bracket = if even {
                    -libm::expm1(self.ln_coherence)
                } else {
                    1.0 + r
                };
                poisson * bracket / denom
            }
        }
    }

    /// Conditional density matrix `(ρ₁ + ρ₂ ± (ρ₃ + ρ₄)) / (2p)` on
    /// `fock_dim` levels.
    pub fn density(&self, fock_dim: usize) -> Result<DensityMatrix> {
        if self.probability < 1e-10 {
            return Err(Error::NegligibleBranch(self.probability));
        }
        let field = TruncatedSpace::field(fock_dim)?;
        let p = coherent_state(field, self.alpha)?;
        let m = coherent_state(field, -self.alpha)?;
        let (p, m) = (p.amplitudes(), m.amplitudes());
        let c = C64::new(self.branch.sign() * libm::exp(self.ln_coherence), 0.0);
        let cross = p * m.adjoint() * c;
        let total = p * p.adjoint() + m * m.adjoint() + &cross + cross.adjoint();
        let tr = total.trace().re;
        DensityMatrix::new(field, total / C64::new(tr, 0.0))
    }
}

/// Mandel–Fano `Q = (⟨N²⟩ - ⟨N⟩²)/⟨N⟩ - 1` of a photon distribution,
/// zero when `⟨N⟩ = 0`.
pub fn mandel_q_of_pdf(pdf: &[f64]) -> f64 {
    let (mut m1, mut m2) = (0.0, 0.0);
    for (n, &p) in pdf.iter().enumerate() {
        let n = n as f64;
        m1 += n * p;
        m2 += n * n * p;
    }
    mandel_q_of_moments(m1, m2)
}

/// Mandel–Fano parameter from `⟨N⟩` and `⟨N²⟩`.
pub fn mandel_q_of_moments(mean: f64, second: f64) -> f64 {
    if mean <= 0.0 {
        0.0
    } else {
        (second - mean * mean) / mean - 1.0
    }
}

/// Field blocks `ρ_{iF} = ⟨a|ρ|b⟩` for `(a, b) = (+,+), (-,-), (+,-), (-,+)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub field: TruncatedSpace,
    pub rho1: CMatrix,
    pub rho2: CMatrix,
    pub rho3: CMatrix,
    pub rho4: CMatrix,
}

impl JointState {
    /// `ρ_AF` on the bare atomic basis `{|1⟩, |2⟩}` (atom-major).
    pub fn assemble(&self) -> Result<DensityMatrix> {
        let space = TruncatedSpace::new(self.field.fock_dim(), 2)?;
        let half = 0.5;
        // Bare-basis matrices of |+⟩⟨+|, |-⟩⟨-|, |+⟩⟨-|, |-⟩⟨+|.
        let pp = [[half, half], [half, half]];
        let mm = [[half, -half], [-half, half]];
        let pm = [[half, -half], [half, -half]];
        let mp = [[half, half], [-half, -half]];
        let d = self.field.fock_dim();
        let mut out = CMatrix::zeros(2 * d, 2 * d);
        for i in 0..2 {
            for j in 0..2 {
                let block = &self.rho1 * C64::new(pp[i][j], 0.0)
                    + &self.rho2 * C64::new(mm[i][j], 0.0)
                    + &self.rho3 * C64::new(pm[i][j], 0.0)
                    + &self.rho4 * C64::new(mp[i][j], 0.0);
                out.view_mut((i * d, j * d), (d, d)).copy_from(&block);
            }
        }
        DensityMatrix::new_unchecked(space, out)
    }

    /// Reduced field state `ρ₁ + ρ₂`.
    pub fn field_state(&self) -> Result<DensityMatrix> {
        DensityMatrix::new_unchecked(self.field, &self.rho1 + &self.rho2)
    }
}

/// Reduced atomic state: `½[[1, f], [f, 1]]` in the `|±⟩` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomDensity {
    /// Matrix in the `|±⟩` basis.
    pub pm_basis: CMatrix,
    pub p1: f64,
    pub p2: f64,
    /// Upper-level population, identically zero in the effective model.
    pub p3: f64,
}

impl AtomDensity {
    pub fn from_f(f: f64) -> Self {
        let h = C64::new(0.5, 0.0);
        let c = C64::new(0.5 * f, 0.0);
        Self {
            pm_basis: CMatrix::from_row_slice(2, 2, &[h, c, c, h]),
            p1: 0.5 * (1.0 + f),
            p2: 0.5 * (1.0 - f),
            p3: 0.0,
        }
    }

    /// Matrix in the bare `{|1⟩, |2⟩}` basis.
    pub fn bare_basis(&self) -> CMatrix {
        let r = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        let u = CMatrix::from_row_slice(2, 2, &[r, r, r, -r]);
        &u * &self.pm_basis * u.adjoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{displacement_op, fock_dim_for, partial_trace, wigner_at, Subsystem};
    use crate::math::max_abs;
    use alloc::vec::Vec;
    use core::f64::consts::PI;

    fn sol(ratio: f64) -> AnalyticSolution {
        AnalyticSolution::new(ratio, 1.0).unwrap()
    }

    #[test]
    fn alpha_examples() {
        let s = sol(1.0);
        assert_eq!(s.alpha(0.0), C64::new(0.0, 0.0));
        assert!((s.alpha(200.0) - C64::new(0.0, 1.0)).norm() < 1e-15);
        let a = s.alpha(2.0);
        assert_eq!(a.re, 0.0);
        assert!((a.im - 0.6321205588285577).abs() < 1e-15);
        let u = AnalyticSolution::new(4.444444444444444e-4, 0.0).unwrap();
        assert!((u.alpha(7160.0).im - 1.5911111111111111).abs() < 1e-12);
    }

    #[test]
    fn f_examples() {
        let s = sol(1.0);
        assert_eq!(s.f(0.0), 1.0);
        assert!((s.f(1.0) - 0.653036249594541).abs() < 1e-14);
        let unitary = AnalyticSolution::new(0.3, 0.0).unwrap();
        assert!((unitary.f(2.0) - libm::exp(-0.18)).abs() < 1e-15);
        // κ → 0 at fixed t approaches the Gaussian form
        let weak = AnalyticSolution::new(0.3, 1e-7).unwrap();
        assert!((weak.f(2.0) - unitary.f(2.0)).abs() < 1e-7);
        assert!(sol(1.0).f(400.0) < 1e-100);
    }

    #[test]
    fn mean_photon_examples() {
        let s = AnalyticSolution::new(2.0, 0.5).unwrap();
        assert_eq!(s.mean_photon(0.0), 0.0);
        assert!((s.mean_photon(500.0) - 16.0).abs() < 1e-12);
        let u = AnalyticSolution::new(2.0, 0.0).unwrap();
        assert!((u.mean_photon(1.5) - 2.25).abs() < 1e-15);
    }

    #[test]
    fn photon_pdf_examples() {
        let s = sol(1.0);
        assert_eq!(s.photon_pdf(0.0, 0), 1.0);
        let t1 = 200.0; // |α|² = 1
        assert!((s.photon_pdf(t1, 0) - 0.36787944117144233).abs() < 1e-15);
        let total: f64 = (0..30).map(|n| s.photon_pdf(t1, n)).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn conditional_pdf_examples() {
        let u = AnalyticSolution::new(1.0, 0.0).unwrap();
        for n in (1..25).step_by(2) {
            assert_eq!(u.conditional_photon_pdf(1.3, Branch::Level1, n), 0.0);
        }
        let tiny = 2e-3; // |α̃| = 1e-3
        assert!((u.conditional_photon_pdf(tiny, Branch::Level2, 1) - 1.0).abs() < 1e-6);
        assert!(u.conditional_photon_pdf(tiny, Branch::Level2, 3) < 1e-6);
        assert_eq!(u.conditional_photon_pdf(0.0, Branch::Level2, 1), 1.0);

        // f = 0 reduces to Poisson
        let alpha = C64::new(0.0, 1.3);
        for branch in [Branch::Level1, Branch::Level2] {
            let c = ConditionalFieldState::new(branch, alpha, 0.0).unwrap();
            for n in 0..20 {
                assert!((c.pdf(n) - poisson_pmf(1.69, n)).abs() < 1e-15);
            }
        }
        assert!(matches!(
            ConditionalFieldState::new(Branch::Level1, alpha, 0.5),
            Err(Error::NegativeProbability { .. })
        ));
    }

    #[test]
    fn conditional_pdf_is_normalized_and_weighted() {
        let s = AnalyticSolution::new(2.0, 1.0).unwrap();
        for &t in &[0.01, 0.3, 1.0, 4.0] {
            let dim = fock_dim_for(2.0);
            let c1 = s.conditional(t, Branch::Level1);
            let c2 = s.conditional(t, Branch::Level2);
            let n1: f64 = (0..dim).map(|n| c1.pdf(n)).sum();
            let n2: f64 = (0..dim).map(|n| c2.pdf(n)).sum();
            assert!((n1 - 1.0).abs() < 1e-9 && (n2 - 1.0).abs() < 1e-9);
            for n in 0..dim {
                let mix = c1.probability * c1.pdf(n) + c2.probability * c2.pdf(n);
                assert!((mix - s.photon_pdf(t, n)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mandel_q_examples() {
        let s = AnalyticSolution::new(2.0, 1.0).unwrap();
        for &t in &[0.0, 0.5, 3.0] {
            assert!(s.mandel_q(t, PhotonStatistics::Unconditional).abs() < 1e-8);
        }
        // |α̃|² = 1e-4
        let u = AnalyticSolution::new(1.0, 0.0).unwrap();
        let t = 0.02;
        let q1 = u.mandel_q(t, PhotonStatistics::Conditional(Branch::Level1));
        let q2 = u.mandel_q(t, PhotonStatistics::Conditional(Branch::Level2));
        assert!((q1 - 0.99999999333).abs() < 1e-8, "{q1}");
        assert!((q2 + 0.99999999333).abs() < 1e-8, "{q2}");
        let late = 40.0;
        for b in [Branch::Level1, Branch::Level2] {
            assert!(s.mandel_q(late, PhotonStatistics::Conditional(b)).abs() < 1e-8);
        }
        assert_eq!(mandel_q_of_pdf(&[1.0, 0.0]), 0.0);
    }

    #[test]
    fn even_and_odd_cat_q_at_unit_amplitude() {
        let field = TruncatedSpace::field(40).unwrap();
        let u = AnalyticSolution::new(2.0, 0.0).unwrap();
        for (branch, q_want, n_want) in [
            (Branch::Level1, 0.5514411295, 0.7615941560),
            (Branch::Level2, -0.5514411295, 1.3130352855),
        ] {
            let cat = u.conditional_cat_state(1.0, branch, field).unwrap();
            let pdf: Vec<f64> = cat.amplitudes().iter().map(|z| z.norm_sqr()).collect();
            let mean: f64 = pdf.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
            assert!((mean - n_want).abs() < 1e-9);
            assert!((mandel_q_of_pdf(&pdf) - q_want).abs() < 1e-9);
            let q_closed = u.mandel_q(1.0, PhotonStatistics::Conditional(branch));
            assert!((q_closed - q_want).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_form_q_matches_pdf_summation() {
        for (ratio, t) in [(1.0, 0.3), (1.0, 2.0), (2.0, 1.0), (0.5, 4.0)] {
            let s = AnalyticSolution::new(ratio, 1.0).unwrap();
            let dim = fock_dim_for(libm::sqrt(s.alpha_sq(t))) + 20;
            for b in [Branch::Level1, Branch::Level2] {
                let c = s.conditional(t, b);
                let pdf: Vec<f64> = (0..dim).map(|n| c.pdf(n)).collect();
                let q = s.mandel_q(t, PhotonStatistics::Conditional(b));
                assert!(
                    (q - mandel_q_of_pdf(&pdf)).abs() < 1e-9,
                    "{ratio} {t} {b:?}"
                );
            }
        }
    }

    #[test]
    fn atom_density_examples() {
        let s = sol(1.0);
        let d0 = s.atom_density(0.0);
        assert_eq!((d0.p1, d0.p2, d0.p3), (1.0, 0.0, 0.0));
        let late = s.atom_density(300.0);
        assert!((late.p1 - 0.5).abs() < 1e-15 && (late.p2 - 0.5).abs() < 1e-15);
        let d1 = s.atom_density(1.0);
        assert!((d1.p1 - 0.8265181247972706).abs() < 1e-14);
        assert!((d1.p2 - 0.1734818752027294).abs() < 1e-14);
        let bare = d1.bare_basis();
        assert!((bare[(0, 0)].re - d1.p1).abs() < 1e-15);
        assert!(bare[(0, 1)].norm() < 1e-15);
        assert!((d1.pm_basis.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_examples() {
        let s = sol(1.0);
        assert_eq!(s.entanglement_entropy(0.0), 0.0);
        assert!((s.entanglement_entropy(300.0) - 1.0).abs() < 1e-12);
        assert!((binary_entropy_bits(0.75) - 0.8112781244591329).abs() < 1e-15);
    }

    #[test]
    fn landmark_examples() {
        let cases = [
            (1.0, 0.9898658461890538),
            (5.0, 0.4462871026284195),
            (20.0, 0.2234904993466672),
            (0.25, 1.924847300238414),
        ];
        for (n, want) in cases {
            let s = AnalyticSolution::from_steady_photons(n, 1.0).unwrap();
            assert!((s.inflection_time().unwrap() - want).abs() < 1e-12);
        }
        let s = AnalyticSolution::from_steady_photons(100.0, 1.0).unwrap();
        let (gd, _) = s.decoherence_rates().unwrap();
        assert!((gd / s.g_eff() - 0.9753124511871278).abs() < 1e-12);
        let small = AnalyticSolution::from_steady_photons(0.25, 2.0).unwrap();
        assert!((small.decoherence_rates().unwrap().1 - 1.0).abs() < 1e-15);
        assert!(AnalyticSolution::new(1.0, 0.0)
            .unwrap()
            .inflection_time()
            .is_err());
    }

    #[test]
    fn inflection_is_zero_of_second_difference() {
        let s = AnalyticSolution::from_steady_photons(1.0, 1.0).unwrap();
        let h = 1e-4;
        let f2 = |t: f64| (s.f(t + h) - 2.0 * s.f(t) + s.f(t - h)) / (h * h);
        let (mut lo, mut hi) = (0.5, 1.5);
        assert!(f2(lo) * f2(hi) < 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f2(lo) * f2(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((0.5 * (lo + hi) - s.inflection_time().unwrap()).abs() < 1e-5);
    }

    #[test]
    fn joint_state_examples() {
        let s = sol(1.0);
        let j0 = s.joint_state(0.0, 16).unwrap();
        for rho in [&j0.rho1, &j0.rho2, &j0.rho3, &j0.rho4] {
            assert!((rho[(0, 0)].re - 0.5).abs() < 1e-15);
            assert!((rho.trace().re - 0.5).abs() < 1e-15);
        }
        let rho0 = j0.assemble().unwrap();
        assert!((rho0.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);

        let late = s.joint_state(60.0, 20).unwrap();
        assert!(max_abs(&late.rho3) < 1e-12);
        let assembled = late.assemble().unwrap();
        let rho = DensityMatrix::new(assembled.space(), assembled.into_matrix()).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_times_give_the_pure_cat() {
        // κt ≪ 1, |α̃|² ≤ 1: compare with (|+⟩|α̃⟩ + |−⟩|−α̃⟩)/√2.
        let s = AnalyticSolution::new(1.0, 1e-6).unwrap();
        let t = 2.0;
        let field = TruncatedSpace::field(24).unwrap();
        let alpha = s.unitary_limit().alpha(t);
        let p = coherent_state(field, alpha).unwrap();
        let m = coherent_state(field, -alpha).unwrap();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::product(&[C64::new(r, 0.0), C64::new(r, 0.0)], &p).unwrap();
        let minus = StateVector::product(&[C64::new(r, 0.0), C64::new(-r, 0.0)], &m).unwrap();
        let psi =
            StateVector::from_unnormalized(plus.space(), plus.amplitudes() + minus.amplitudes())
                .unwrap();
        let rho = s.joint_state(t, 24).unwrap().assemble().unwrap();
        let diff = rho.matrix() - psi.to_density().matrix();
        assert!(max_abs(&diff) < 1e-6);
    }

    #[test]
    fn characteristic_function_of_first_block() {
        let s = AnalyticSolution::new(1.3, 0.7).unwrap();
        let t = 1.1;
        let alpha = s.alpha(t);
        let j = s.joint_state(t, 20).unwrap();
        let big = TruncatedSpace::field(70).unwrap();
        let mut rho1 = CMatrix::zeros(70, 70);
        rho1.view_mut((0, 0), (20, 20)).copy_from(&j.rho1);
        let betas = [
            C64::new(0.3, -0.2),
            C64::new(-1.0, 0.4),
            C64::new(0.8, 0.9),
            C64::new(-0.1, -1.4),
        ];
        for beta in betas {
            let d = displacement_op(big, beta).unwrap();
            let chi = (&rho1 * d.matrix()).trace();
            let want = (C64::new(-0.5 * beta.norm_sqr(), 0.0) + beta * alpha.conj()
                - beta.conj() * alpha)
                .exp()
                * 0.5;
            assert!((chi - want).norm() < 1e-8, "{beta}");
        }
    }

    #[test]
    fn cat_states() {
        let field = TruncatedSpace::field(30).unwrap();
        let u = AnalyticSolution::new(1.0, 0.0).unwrap();
        let odd = u
            .conditional_cat_state(2e-3, Branch::Level2, field)
            .unwrap();
        assert!((odd.amplitudes()[1].norm() - 1.0).abs() < 1e-6);
        let even0 = u.conditional_cat_state(0.0, Branch::Level1, field).unwrap();
        assert_eq!(even0.amplitudes()[0], C64::new(1.0, 0.0));
        let odd0 = u.conditional_cat_state(0.0, Branch::Level2, field).unwrap();
        assert_eq!(odd0.amplitudes()[1], C64::new(1.0, 0.0));

        let g = 4.444444444444444e-4;
        let fig = AnalyticSolution::new(g, 0.0).unwrap();
        let even = fig
            .conditional_cat_state(7160.0, Branch::Level1, field)
            .unwrap();
        let rho = even.to_density();
        assert!((wigner_at(&rho, C64::new(0.0, 0.0)).unwrap() - 2.0 / PI).abs() < 1e-9);
        let lobe = wigner_at(&rho, C64::new(0.0, 1.5911111)).unwrap();
        assert!(lobe > 0.25);
    }

    #[test]
    fn conditional_density_matches_cat() {
        let u = AnalyticSolution::new(1.0, 0.0).unwrap();
        let field = TruncatedSpace::field(24).unwrap();
        for branch in [Branch::Level1, Branch::Level2] {
            let rho = u.conditional(1.6, branch).density(24).unwrap();
            let cat = u.conditional_cat_state(1.6, branch, field).unwrap();
            assert!(max_abs(&(rho.matrix() - cat.to_density().matrix())) < 1e-10);
        }
        assert!(matches!(
            u.conditional(0.0, Branch::Level2).density(24),
            Err(Error::NegligibleBranch(_))
        ));
    }

    #[test]
    fn joint_state_partial_trace_at_unit_amplitude() {
        let u = AnalyticSolution::new(1.0, 0.0).unwrap();
        let rho = u.joint_state(2.0, 24).unwrap().assemble().unwrap();
        let atom = partial_trace(&rho, Subsystem::Atom).unwrap();
        // |±⟩ coherence e^{-2|α̃|²} shows up as a p₁ - p₂ imbalance.
        let pm = atom.matrix()[(0, 0)].re - atom.matrix()[(1, 1)].re;
        assert!((pm - libm::exp(-2.0)).abs() < 1e-12);
    }
}
