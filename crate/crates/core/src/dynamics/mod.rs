//! Time propagation: a dense Lindblad integrator and a Monte Carlo
//! wave-function (quantum-jump) engine, both fixed-step RK4.

mod conditional;
mod envelope;
mod lindblad;
mod series;
mod trajectory;

pub use conditional::{conditional_field_state, ConditionalField};
pub use envelope::{sliding_envelope, Envelope};
pub use lindblad::{lindblad_evolve, LindbladResult};
pub use series::{Column, ObservableSeries, COLUMNS};
pub use trajectory::{
    aggregate, mcwf_ensemble, mcwf_trajectory, EnsembleResult, JumpStatistics, TrajectoryResult,
};

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fock::{annihilation_op, FieldOperator, TruncatedSpace};
use crate::sparse::{SparseOperator, TimeDependentOperator};
use crate::{Error, Result, C64};

/// Largest admissible `dt · ‖H‖`.
pub const MAX_PHASE_STEP: f64 = 0.1;
/// Largest admissible `rate · dt` of any dissipative channel.
pub const MAX_DECAY_STEP: f64 = 1e-2;

/// Dissipative channel `rate · (LρL† - ½{L†L, ρ})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseChannel {
    pub rate: f64,
    pub op: FieldOperator,
}

impl CollapseChannel {
    pub fn new(rate: f64, op: FieldOperator) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "rate",
                value: rate,
            });
        }
        Ok(Self { rate, op })
    }

    /// Cavity photon loss `√κ a`.
    pub fn cavity_decay(space: TruncatedSpace, kappa: f64) -> Result<Self> {
        Self::new(kappa, annihilation_op(space))
    }
}

/// Fixed-step RK4 settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Observables are recorded every `record_stride` steps (and at the end).
    pub record_stride: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_max: f64, record_stride: usize) -> Result<Self> {
        let cfg = Self {
            dt,
            t_max,
            record_stride,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: self.dt,
            });
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "t_max",
                value: self.t_max,
            });
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter {
                name: "record_stride",
                value: 0.0,
            });
        }
        Ok(())
    }

    /// Number of steps covering `[0, t_max]`.
    pub fn steps(&self) -> usize {
        libm::ceil(self.t_max / self.dt - 1e-9).max(0.0) as usize
    }

    /// Step indices at which observables are recorded.
    pub fn record_steps(&self) -> Vec<usize> {
        let n = self.steps();
        let mut out: Vec<usize> = (0..=n).step_by(self.record_stride).collect();
        if *out.last().unwrap() != n {
            out.push(n);
        }
        out
    }

    /// Recorded times.
    pub fn record_times(&self) -> Vec<f64> {
        self.record_steps()
            .into_iter()
            .map(|k| k as f64 * self.dt)
            .collect()
    }

    /// Checks `dt · ‖H‖ ≤ 0.1` and `rate · dt ≤ 1e-2` for every channel.
    pub fn check_step(
        &self,
        h: &TimeDependentOperator,
        collapse: &[CollapseChannel],
    ) -> Result<()> {
        let phase = self.dt * h.norm_bound();
        if phase > MAX_PHASE_STEP {
            return Err(Error::StepTooLarge {
                quantity: "dt*|H|",
                value: phase,
                limit: MAX_PHASE_STEP,
            });
        }
        for c in collapse {
            let decay = self.dt * c.rate;
            if decay > MAX_DECAY_STEP {
                return Err(Error::StepTooLarge {
                    quantity: "rate*dt",
                    value: decay,
                    limit: MAX_DECAY_STEP,
                });
            }
        }
        Ok(())
    }
}

/// Quantum-jump rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum JumpRule {
    /// `δp = dt Σ rate⟨L†L⟩`; the no-jump branch is rescaled by `1/√(1-δp)`.
    #[default]
    FirstOrder,
    /// `δp = 1 - ‖ψ(t+dt)‖²` from the propagated state, followed by exact
    /// renormalization. A jump is applied at the middle of the step, between
    /// two half-step propagations.
    NormExact,
}

/// Trajectory ensemble settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub n_traj: usize,
    pub master_seed: u64,
    pub integrator: IntegratorConfig,
    pub jump_rule: JumpRule,
}

impl TrajectoryConfig {
    pub fn new(n_traj: usize, master_seed: u64, integrator: IntegratorConfig) -> Result<Self> {
        if n_traj == 0 {
            return Err(Error::InvalidParameter {
                name: "n_traj",
                value: 0.0,
            });
        }
        integrator.validate()?;
        Ok(Self {
            n_traj,
            master_seed,
            integrator,
            jump_rule: JumpRule::default(),
        })
    }

    pub fn with_jump_rule(mut self, rule: JumpRule) -> Self {
        self.jump_rule = rule;
        self
    }

    /// Generator of trajectory `index`: the master seed selects the key, the
    /// index selects an independent stream.
    pub fn rng_for(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(index);
        rng
    }
}

// `-(i/2) Σ rate L†L`, the anti-Hermitian part of the effective Hamiltonian.
fn anti_hermitian_part(
    space: TruncatedSpace,
    collapse: &[CollapseChannel],
) -> Result<SparseOperator> {
    let mut k = crate::CMatrix::zeros(space.dim(), space.dim());
    for c in collapse {
        if c.op.space() != space {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: c.op.space().dim(),
            });
        }
        k += c.op.matrix().adjoint() * c.op.matrix() * C64::new(0.0, -0.5 * c.rate);
    }
    Ok(SparseOperator::from_dense(&k, 0.0))
}
