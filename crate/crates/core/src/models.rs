//! Parameter sets, Hamiltonians and the regime-validity checker.
//!
//! The full model is a Λ atom (lower levels `|1⟩`, `|2⟩`, upper `|3⟩`) in a
//! single cavity mode, written in the interaction picture in units of the
//! detuning Δ:
//!
//! ```text
//! H(t) = -Δ' + Δ' S³³ - (1-Δ') a†a
//!        + [(g a + Ω₂') S²³₊ + h.c.]
//!        + [(Ω₁' + Ω e^{i(1-Δ')t}) S¹³₊ + h.c.]
//! ```
//!
//! Eliminating `|3⟩` and applying the strong-driving RWA leaves
//! `-(g_eff/2)(a† + a)(S¹²₊ + S¹²₋)`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::fock::{annihilation_op, atom_transition, number_op, FieldOperator, TruncatedSpace};
use crate::sparse::{Coefficient, TimeDependentOperator};
use crate::{CMatrix, Error, Result, C64};

/// Dimensionless parameters of the three-level model; frequencies in units
/// of Δ, time in units of 1/Δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaParams {
    pub delta_prime: f64,
    pub g: f64,
    pub omega: f64,
    pub omega1p: f64,
    pub omega2p: f64,
    pub kappa: f64,
}

impl LambdaParams {
    /// Parameters of the Hamiltonian-dynamics benchmark run (κ = 0).
    pub const BENCHMARK: LambdaParams = LambdaParams {
        delta_prime: 0.9,
        g: 0.004,
        omega: 0.1,
        omega1p: 0.05,
        omega2p: 0.1,
        kappa: 0.0,
    };

    /// Requires `0 < Δ' < 1` and finite, nonnegative couplings and decay.
    /// Zero couplings and `κ = 0` are admitted for limiting cases.
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_prime > 0.0 && self.delta_prime < 1.0) {
            return Err(Error::InvalidParameter {
                name: "delta_prime",
                value: self.delta_prime,
            });
        }
        for (name, value) in [
            ("g", self.g),
            ("omega", self.omega),
            ("omega1p", self.omega1p),
            ("omega2p", self.omega2p),
            ("kappa", self.kappa),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// Frequency `1 - Δ'` of the time-dependent drive phase.
    pub fn drive_beat(&self) -> f64 {
        1.0 - self.delta_prime
    }
}

/// Couplings of the effective two-level model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub g_eff: f64,
    pub omega_eff: f64,
    pub kappa: f64,
}

impl EffectiveParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("g_eff", self.g_eff),
            ("omega_eff", self.omega_eff),
            ("kappa", self.kappa),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// Steady-state photon number `(g_eff/κ)²`; infinite when `κ = 0`.
    pub fn steady_photon_number(&self) -> f64 {
        let r = self.g_eff / self.kappa;
        r * r
    }
}

/// `g_eff = gΩ/Δ'`, `Ω_eff = ΩΩ₂'/Δ'`, κ passed through.
pub fn effective_params(p: &LambdaParams) -> EffectiveParams {
    EffectiveParams {
        g_eff: p.g * p.omega / p.delta_prime,
        omega_eff: p.omega * p.omega2p / p.delta_prime,
        kappa: p.kappa,
    }
}

/// Which Hamiltonian to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HamiltonianKind {
    /// Three-level Λ model with the explicit drive phase.
    FullLambda,
    /// `-g_eff(a†S₊ + aS₋) - Ω_eff(S₊ + S₋)`.
    EffectiveDriven,
    /// `-(g_eff/2)(a† + a)(S₊ + S₋)`.
    EffectiveFinal,
}

impl HamiltonianKind {
    pub fn atom_dim(&self) -> usize {
        match self {
            HamiltonianKind::FullLambda => 3,
            HamiltonianKind::EffectiveDriven | HamiltonianKind::EffectiveFinal => 2,
        }
    }
}

/// Parameter block matching a [`HamiltonianKind`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    Lambda(LambdaParams),
    Effective(EffectiveParams),
}

/// A fully specified Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    pub kind: HamiltonianKind,
    pub space: TruncatedSpace,
    pub params: ModelParams,
}

impl HamiltonianSpec {
    pub fn new(kind: HamiltonianKind, space: TruncatedSpace, params: ModelParams) -> Result<Self> {
        check_atom(space, kind.atom_dim())?;
        let ok = matches!(
            (kind, params),
            (HamiltonianKind::FullLambda, ModelParams::Lambda(_))
                | (HamiltonianKind::EffectiveDriven, _)
                | (HamiltonianKind::EffectiveFinal, _)
        );
        if !ok {
            return Err(Error::InvalidParameter {
                name: "params",
                value: f64::NAN,
            });
        }
        Ok(Self {
            kind,
            space,
            params,
        })
    }

    fn effective(&self) -> EffectiveParams {
        match self.params {
            ModelParams::Lambda(p) => effective_params(&p),
            ModelParams::Effective(e) => e,
        }
    }

    /// Cavity decay rate of the parameter block.
    pub fn kappa(&self) -> f64 {
        match self.params {
            ModelParams::Lambda(p) => p.kappa,
            ModelParams::Effective(e) => e.kappa,
        }
    }

    /// Time-dependent provider for the integrators.
    pub fn provider(&self) -> Result<TimeDependentOperator> {
        match (self.kind, self.params) {
            (HamiltonianKind::FullLambda, ModelParams::Lambda(p)) => {
                full_hamiltonian(&p, self.space)
            }
            (kind, _) => Ok(TimeDependentOperator::constant(
                &build_effective_hamiltonian(&self.effective(), self.space, kind)?,
            )),
        }
    }

    /// Dense `H(t)`.
    pub fn at(&self, t: f64) -> Result<FieldOperator> {
        match (self.kind, self.params) {
            (HamiltonianKind::FullLambda, ModelParams::Lambda(p)) => {
                build_full_hamiltonian(&p, self.space, t)
            }
            (kind, _) => build_effective_hamiltonian(&self.effective(), self.space, kind),
        }
    }
}

fn check_atom(space: TruncatedSpace, atom_dim: usize) -> Result<()> {
    if space.atom_dim() != atom_dim {
        return Err(Error::DimensionMismatch {
            expected: atom_dim,
            found: space.atom_dim(),
        });
    }
    Ok(())
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

// Everything except the drive term oscillating at 1 - Δ'.
fn static_part(p: &LambdaParams, space: TruncatedSpace) -> Result<FieldOperator> {
    let dim = space.dim();
    let a = annihilation_op(space);
    let s33 = atom_transition(space, 3, 3)?;
    let s23p = atom_transition(space, 3, 2)?;
    let s13p = atom_transition(space, 3, 1)?;
    let id = FieldOperator::identity(space);

    let mut m = CMatrix::identity(dim, dim) * real(-p.delta_prime);
    m += s33.matrix() * real(p.delta_prime);
    m -= number_op(space).matrix() * real(1.0 - p.delta_prime);
    let x23 = (&a.scale(real(p.g)) + &id.scale(real(p.omega2p))).matrix() * s23p.matrix();
    m += &x23 + x23.adjoint();
    let y13 = s13p.matrix() * real(p.omega1p);
    m += &y13 + y13.adjoint();
    FieldOperator::new(space, m)
}

/// Dense `H(t)` of the three-level model.
pub fn build_full_hamiltonian(
    p: &LambdaParams,
    space: TruncatedSpace,
    t: f64,
) -> Result<FieldOperator> {
    check_atom(space, 3)?;
    let s13p = atom_transition(space, 3, 1)?;
    let phase = C64::from_polar(p.omega, p.drive_beat() * t);
    let drive = s13p.matrix() * phase;
    let h = static_part(p, space)?.into_matrix() + &drive + drive.adjoint();
    FieldOperator::new(space, h)
}

/// The three-level Hamiltonian as a static part plus two phase-rotating
/// drive terms.
pub fn full_hamiltonian(p: &LambdaParams, space: TruncatedSpace) -> Result<TimeDependentOperator> {
    check_atom(space, 3)?;
    let mut h = TimeDependentOperator::new(space);
    h.push(Coefficient::Constant(real(1.0)), &static_part(p, space)?)?;
    let s13p = atom_transition(space, 3, 1)?;
    let (omega, nu) = (p.omega, p.drive_beat());
    h.push(
        Coefficient::TimeDependent {
            f: Arc::new(move |t| C64::from_polar(omega, nu * t)),
            max_abs: omega,
        },
        &s13p,
    )?;
    h.push(
        Coefficient::TimeDependent {
            f: Arc::new(move |t| C64::from_polar(omega, -nu * t)),
            max_abs: omega,
        },
        &s13p.dagger(),
    )?;
    Ok(h)
}

/// Effective two-level Hamiltonian (time independent).
pub fn build_effective_hamiltonian(
    e: &EffectiveParams,
    space: TruncatedSpace,
    kind: HamiltonianKind,
) -> Result<FieldOperator> {
    check_atom(space, 2)?;
    let a = annihilation_op(space);
    let ad = a.dagger();
    let s_plus = atom_transition(space, 2, 1)?;
    let s_minus = atom_transition(space, 1, 2)?;
    let sx = &s_plus + &s_minus;
    let h = match kind {
        HamiltonianKind::EffectiveDriven => {
            let jc = &(&ad * &s_plus) + &(&a * &s_minus);
            &jc.scale(real(-e.g_eff)) + &sx.scale(real(-e.omega_eff))
        }
        HamiltonianKind::EffectiveFinal => (&(&ad + &a) * &sx).scale(real(-0.5 * e.g_eff)),
        HamiltonianKind::FullLambda => {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: 2,
            })
        }
    };
    Ok(h)
}

/// Outcome of one validity inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

/// Ratios below this pass.
pub const PASS_THRESHOLD: f64 = 0.15;
/// Ratios below this (and at least [`PASS_THRESHOLD`]) warn.
pub const WARN_THRESHOLD: f64 = 0.35;

impl Verdict {
    pub fn of(ratio: f64) -> Self {
        if ratio < PASS_THRESHOLD {
            Verdict::Pass
        } else if ratio < WARN_THRESHOLD {
            Verdict::Warn
        } else {
            Verdict::Fail
        }
    }
}

/// One named small-parameter ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityCheck {
    pub name: &'static str,
    pub ratio: f64,
    pub verdict: Verdict,
}

/// Margins of every small parameter the effective model relies on.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub checks: Vec<ValidityCheck>,
}

impl ValidityReport {
    pub fn overall(&self) -> Verdict {
        self.checks
            .iter()
            .map(|c| c.verdict)
            .max()
            .unwrap_or(Verdict::Pass)
    }

    pub fn get(&self, name: &str) -> Option<&ValidityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Evaluates the small-rotation conditions and the strong-driving RWA
/// condition `g_eff ≪ Ω_eff`.
pub fn check_validity(p: &LambdaParams) -> ValidityReport {
    let e = effective_params(p);
    let rwa = if e.omega_eff > 0.0 {
        e.g_eff / e.omega_eff
    } else {
        f64::INFINITY
    };
    let checks = [
        ("omega1p/delta_prime", p.omega1p / p.delta_prime),
        ("omega/delta_prime", p.omega / p.delta_prime),
        ("g/delta", p.g),
        ("omega2p/delta", p.omega2p),
        ("(delta-delta_prime)/delta", 1.0 - p.delta_prime),
        ("g_eff/omega_eff", rwa),
    ]
    .into_iter()
    .map(|(name, ratio)| ValidityCheck {
        name,
        ratio,
        verdict: Verdict::of(ratio),
    })
    .collect();
    ValidityReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, StateVector};
    use crate::math::{expm, max_abs};

    fn bench_space() -> TruncatedSpace {
        TruncatedSpace::new(8, 3).unwrap()
    }

    #[test]
    fn effective_params_examples() {
        let e = effective_params(&LambdaParams::BENCHMARK);
        assert!((e.g_eff - 4.444444444444444e-4).abs() < 1e-15);
        assert!((e.omega_eff - 1.1111111111111112e-2).abs() < 1e-15);
        assert!((e.omega_eff / e.g_eff - 25.0).abs() < 1e-12);

        let zero = effective_params(&LambdaParams {
            omega: 0.0,
            ..LambdaParams::BENCHMARK
        });
        assert_eq!((zero.g_eff, zero.omega_eff), (0.0, 0.0));

        let half = effective_params(&LambdaParams {
            delta_prime: 0.5,
            g: 0.5,
            omega: 0.5,
            omega1p: 0.5,
            omega2p: 0.5,
            kappa: 0.1,
        });
        assert!((half.g_eff - 0.5).abs() < 1e-15);
        assert!((half.omega_eff - 0.5).abs() < 1e-15);
        assert_eq!(half.kappa, 0.1);
    }

    #[test]
    fn parameter_validation() {
        assert!(LambdaParams::BENCHMARK.validate().is_ok());
        let bad = LambdaParams {
            delta_prime: 1.0,
            ..LambdaParams::BENCHMARK
        };
        assert!(bad.validate().is_err());
        let neg = LambdaParams {
            g: -0.1,
            ..LambdaParams::BENCHMARK
        };
        assert!(matches!(
            neg.validate(),
            Err(Error::InvalidParameter { name: "g", .. })
        ));
    }

    #[test]
    fn full_hamiltonian_without_couplings_is_diagonal() {
        let p = LambdaParams {
            g: 0.0,
            omega: 0.0,
            omega1p: 0.0,
            omega2p: 0.0,
            ..LambdaParams::BENCHMARK
        };
        let s = bench_space();
        let h = build_full_hamiltonian(&p, s, 0.0).unwrap();
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                if i != j {
                    assert_eq!(h.matrix()[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
        let e = h.matrix()[(s.index(3, 2).unwrap(), s.index(3, 2).unwrap())].re;
        assert!((e - (-0.9 + 0.9 - 0.1 * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn full_hamiltonian_is_hermitian_and_has_drive_element() {
        let s = bench_space();
        let p = LambdaParams::BENCHMARK;
        let h = build_full_hamiltonian(&p, s, 37.3).unwrap();
        assert!(h.hermiticity_error() < 1e-12);
        let h0 = build_full_hamiltonian(&p, s, 0.0).unwrap();
        let el = h0.matrix()[(s.index(3, 0).unwrap(), s.index(1, 0).unwrap())];
        assert!((el - C64::new(0.15, 0.0)).norm() < 1e-15);
        // cavity-assisted Raman leg: ⟨3,0|H|2,1⟩ = g·√1
        let cav = h0.matrix()[(s.index(3, 0).unwrap(), s.index(2, 1).unwrap())];
        assert!((cav.re - 0.004).abs() < 1e-15);
        let pump = h0.matrix()[(s.index(3, 0).unwrap(), s.index(2, 0).unwrap())];
        assert!((pump.re - 0.1).abs() < 1e-15);
    }

    #[test]
    fn provider_matches_dense_builder() {
        let s = bench_space();
        let p = LambdaParams::BENCHMARK;
        let provider = full_hamiltonian(&p, s).unwrap();
        for &t in &[0.0, 1.7, 37.3, 7160.0] {
            let a = provider.at(t).unwrap();
            let b = build_full_hamiltonian(&p, s, t).unwrap();
            assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-14);
        }
        assert!(
            provider.norm_bound()
                >= build_full_hamiltonian(&p, s, 3.0).unwrap().matrix().norm()
                    / (s.dim() as f64).sqrt()
        );
    }

    #[test]
    fn effective_final_examples() {
        let s = TruncatedSpace::new(10, 2).unwrap();
        let e = EffectiveParams {
            g_eff: 1.0,
            omega_eff: 0.0,
            kappa: 0.0,
        };
        let h = build_effective_hamiltonian(&e, s, HamiltonianKind::EffectiveFinal).unwrap();
        assert!(h.hermiticity_error() < 1e-12);
        // ⟨+,1|H|+,0⟩ with |+⟩ = (|1⟩ + |2⟩)/√2
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let plus = |n: usize| {
            let mut v = crate::CVector::zeros(s.dim());
            v[s.index(1, n).unwrap()] = C64::new(r, 0.0);
            v[s.index(2, n).unwrap()] = C64::new(r, 0.0);
            v
        };
        let el = plus(1).dotc(&(h.matrix() * plus(0)));
        assert!((el - C64::new(-0.5, 0.0)).norm() < 1e-14);

        let sx = crate::fock::atom_sx(s).unwrap();
        assert!(max_abs(h.commutator(&sx).unwrap().matrix()) < 1e-12);
    }

    #[test]
    fn effective_driven_is_jaynes_cummings() {
        let s = TruncatedSpace::new(6, 2).unwrap();
        let e = EffectiveParams {
            g_eff: 1.0,
            omega_eff: 0.0,
            kappa: 0.0,
        };
        let h = build_effective_hamiltonian(&e, s, HamiltonianKind::EffectiveDriven).unwrap();
        assert!(h.hermiticity_error() < 1e-12);
        // a†S¹²₊ takes |1,0⟩ to |2,1⟩.
        let el = h.matrix()[(s.index(2, 1).unwrap(), s.index(1, 0).unwrap())];
        assert!((el - C64::new(-1.0, 0.0)).norm() < 1e-15);
        let el = h.matrix()[(s.index(1, 1).unwrap(), s.index(2, 0).unwrap())];
        assert_eq!(el, C64::new(0.0, 0.0));
    }

    #[test]
    fn wrong_atom_dimension_is_rejected() {
        let e = EffectiveParams {
            g_eff: 1.0,
            omega_eff: 0.0,
            kappa: 0.0,
        };
        let three = TruncatedSpace::new(4, 3).unwrap();
        assert!(build_effective_hamiltonian(&e, three, HamiltonianKind::EffectiveFinal).is_err());
        let two = TruncatedSpace::new(4, 2).unwrap();
        assert!(build_full_hamiltonian(&LambdaParams::BENCHMARK, two, 0.0).is_err());
        assert!(HamiltonianSpec::new(
            HamiltonianKind::FullLambda,
            three,
            ModelParams::Effective(e)
        )
        .is_err());
    }

    #[test]
    fn effective_final_generates_displaced_branches() {
        let s = TruncatedSpace::new(30, 2).unwrap();
        let g = 0.8;
        let t = 2.5;
        let e = EffectiveParams {
            g_eff: g,
            omega_eff: 0.0,
            kappa: 0.0,
        };
        let h = build_effective_hamiltonian(&e, s, HamiltonianKind::EffectiveFinal).unwrap();
        let u = expm(&(h.matrix() * C64::new(0.0, -t)), 1e-14);
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let field = TruncatedSpace::field(30).unwrap();
        for sign in [1.0, -1.0] {
            let vac = StateVector::basis(field, 1, 0).unwrap();
            let psi0 =
                StateVector::product(&[C64::new(r, 0.0), C64::new(sign * r, 0.0)], &vac).unwrap();
            let out = &u * psi0.amplitudes();
            let coh = coherent_state(field, C64::new(0.0, sign * g * t / 2.0)).unwrap();
            let want =
                StateVector::product(&[C64::new(r, 0.0), C64::new(sign * r, 0.0)], &coh).unwrap();
            let overlap = want.amplitudes().dotc(&out).norm();
            assert!((overlap - 1.0).abs() < 1e-9, "sign {sign}: {overlap}");
        }
    }

    #[test]
    fn validity_examples() {
        let report = check_validity(&LambdaParams::BENCHMARK);
        assert_eq!(report.overall(), Verdict::Pass);
        for c in &report.checks {
            assert!(c.ratio <= 0.1111111111111112, "{}: {}", c.name, c.ratio);
        }
        assert!((report.get("(delta-delta_prime)/delta").unwrap().ratio - 0.1).abs() < 1e-12);
        assert!((report.get("g_eff/omega_eff").unwrap().ratio - 0.04).abs() < 1e-12);

        let strong = check_validity(&LambdaParams {
            g: 1.0,
            ..LambdaParams::BENCHMARK
        });
        assert_eq!(strong.get("g/delta").unwrap().verdict, Verdict::Fail);

        // Ω_eff = g_eff: Ω₂' = g.
        let weak_drive = check_validity(&LambdaParams {
            omega2p: 0.004,
            ..LambdaParams::BENCHMARK
        });
        assert_eq!(
            weak_drive.get("g_eff/omega_eff").unwrap().verdict,
            Verdict::Fail
        );
        assert_eq!(weak_drive.overall(), Verdict::Fail);
    }
}
