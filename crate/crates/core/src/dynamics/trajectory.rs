use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::series::{linear_value, Column, ObservableSeries, COLUMNS};
use super::{anti_hermitian_part, CollapseChannel, JumpRule, TrajectoryConfig};
use crate::fock::{StateVector, TruncatedSpace};
use crate::math::{entropy_bits_of, hermitian_eigenvalues};
use crate::observables::Moments;
use crate::sparse::{SparseOperator, TimeDependentOperator};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Largest collapse probability tolerated in one step.
pub const MAX_JUMP_PROBABILITY: f64 = 0.1;

/// One quantum trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub index: u64,
    pub series: ObservableSeries,
    /// Raw moments at each recorded time, for ensemble aggregation.
    pub records: Vec<Moments>,
    pub jump_times: Vec<f64>,
    pub final_state: StateVector,
}

struct Engine<'a> {
    h: &'a TimeDependentOperator,
    anti: SparseOperator,
    jumps: Vec<(f64, SparseOperator)>,
    k: [CVector; 4],
    tmp: CVector,
    jump_buf: CVector,
}

impl<'a> Engine<'a> {
    fn new(h: &'a TimeDependentOperator, collapse: &[CollapseChannel]) -> Result<Self> {
        let space = h.space();
        let d = space.dim();
        Ok(Self {
            h,
            anti: anti_hermitian_part(space, collapse)?,
            jumps: collapse
                .iter()
                .map(|c| (c.rate, SparseOperator::from_operator(&c.op)))
                .collect(),
            k: [
                CVector::zeros(d),
                CVector::zeros(d),
                CVector::zeros(d),
                CVector::zeros(d),
            ],
            tmp: CVector::zeros(d),
            jump_buf: CVector::zeros(d),
        })
    }

    // out = -i H_e(t) x
    fn deriv(h: &TimeDependentOperator, anti: &SparseOperator, t: f64, x: &[C64], out: &mut [C64]) {
        let minus_i = C64::new(0.0, -1.0);
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        h.apply_add(t, minus_i, x, out);
        anti.apply_add(minus_i, x, out);
    }

    // psi <- RK4 step of dψ/dt = -i H_e ψ.
    fn rk4(&mut self, t: f64, dt: f64, psi: &mut CVector) {
        let (h, anti) = (self.h, &self.anti);
        let [k1, k2, k3, k4] = &mut self.k;
        Self::deriv(h, anti, t, psi.as_slice(), k1.as_mut_slice());
        self.tmp.copy_from(psi);
        self.tmp
            .axpy(C64::new(0.5 * dt, 0.0), k1, C64::new(1.0, 0.0));
        Self::deriv(
            h,
            anti,
            t + 0.5 * dt,
            self.tmp.as_slice(),
            k2.as_mut_slice(),
        );
        self.tmp.copy_from(psi);
        self.tmp
            .axpy(C64::new(0.5 * dt, 0.0), k2, C64::new(1.0, 0.0));
        Self::deriv(
            h,
            anti,
            t + 0.5 * dt,
            self.tmp.as_slice(),
            k3.as_mut_slice(),
        );
        self.tmp.copy_from(psi);
        self.tmp.axpy(C64::new(dt, 0.0), k3, C64::new(1.0, 0.0));
        Self::deriv(h, anti, t + dt, self.tmp.as_slice(), k4.as_mut_slice());
        let w = C64::new(dt / 6.0, 0.0);
        psi.axpy(w, k1, C64::new(1.0, 0.0));
        psi.axpy(w * 2.0, k2, C64::new(1.0, 0.0));
        psi.axpy(w * 2.0, k3, C64::new(1.0, 0.0));
        psi.axpy(w, k4, C64::new(1.0, 0.0));
    }

    // Per-channel rate·⟨ψ|L†L|ψ⟩/⟨ψ|ψ⟩ = rate·‖Lψ‖²/‖ψ‖².
    fn channel_weights(&mut self, psi: &CVector, out: &mut [f64]) {
        let norm_sqr = psi.norm_squared();
        for (w, (rate, l)) in out.iter_mut().zip(&self.jumps) {
            if *rate == 0.0 {
                *w = 0.0;
                continue;
            }
            l.apply_into(psi.as_slice(), self.jump_buf.as_mut_slice());
            *w = rate * self.jump_buf.norm_squared() / norm_sqr;
        }
    }

    // psi <- L_k ψ / ‖L_k ψ‖
    fn jump(&mut self, channel: usize, psi: &mut CVector) {
        let l = &self.jumps[channel].1;
        l.apply_into(psi.as_slice(), self.jump_buf.as_mut_slice());
        let norm = self.jump_buf.norm();
        psi.copy_from(&self.jump_buf);
        psi.unscale_mut(norm);
    }
}

fn pick_channel(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    if weights.len() == 1 {
        return 0;
    }
    let total: f64 = weights.iter().sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return k;
        }
    }
    weights.len() - 1
}

/// Runs trajectory `index` of the ensemble described by `cfg`.
///
/// Each step computes the collapse probability `δp`; when `δp > 0` a
/// uniform `r ∈ (0, 1]` is drawn and the state jumps iff `δp ≥ r`.
/// Steps with `δp = 0` consume no randomness.
pub fn mcwf_trajectory(
    h: &TimeDependentOperator,
    collapse: &[CollapseChannel],
    psi0: &StateVector,
    cfg: &TrajectoryConfig,
    index: u64,
) -> Result<TrajectoryResult> {
    let icfg = &cfg.integrator;
    icfg.validate()?;
    let space: TruncatedSpace = psi0.space();
    if h.space() != space {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: h.space().dim(),
        });
    }
    if !psi0.is_normalized() {
        return Err(Error::NotNormalized(psi0.norm_sqr()));
    }
    icfg.check_step(h, collapse)?;

    let mut engine = Engine::new(h, collapse)?;
    let mut rng = cfg.rng_for(index);
    let mut psi = psi0.amplitudes().clone();
    let mut weights = vec![0.0; collapse.len()];
    let dt = icfg.dt;
    let steps = icfg.steps();
    let record_steps = icfg.record_steps();
    let mut next_record = 0;
    let mut records = Vec::with_capacity(record_steps.len());
    let mut jump_times = Vec::new();
    let mut propagated = CVector::zeros(space.dim());

    for step in 0..=steps {
        if next_record < record_steps.len() && record_steps[next_record] == step {
            records.push(Moments::of_amplitudes(space, psi.as_slice()));
            next_record += 1;
        }
        if step == steps {
            break;
        }
        let t = step as f64 * dt;
        match cfg.jump_rule {
            JumpRule::FirstOrder => {
                engine.channel_weights(&psi, &mut weights);
                let dp = dt * weights.iter().sum::<f64>();
                if dp > MAX_JUMP_PROBABILITY {
                    return Err(Error::DeltaPTooLarge { dp, t });
                }
                let jumped = dp > 0.0 && dp >= 1.0 - rng.random::<f64>();
                if jumped {
                    let k = pick_channel(&weights, &mut rng);
                    engine.jump(k, &mut psi);
                    jump_times.push(t + dt);
                } else {
                    engine.rk4(t, dt, &mut psi);
                    if dp > 0.0 {
                        psi.unscale_mut(libm::sqrt(1.0 - dp));
                    }
                }
            }
            JumpRule::NormExact => {
                let before = psi.norm_squared();
                propagated.copy_from(&psi);
                engine.rk4(t, dt, &mut propagated);
                let dp = (1.0 - propagated.norm_squared() / before).max(0.0);
                if dp > MAX_JUMP_PROBABILITY {
                    return Err(Error::DeltaPTooLarge { dp, t });
                }
                let jumped = dp > 0.0 && dp >= 1.0 - rng.random::<f64>();
                if jumped {
                    // Jump at the step midpoint, so the jump-time error
                    // averages out to second order.
                    let half = 0.5 * dt;
                    engine.rk4(t, half, &mut psi);
                    engine.channel_weights(&psi, &mut weights);
                    let k = pick_channel(&weights, &mut rng);
                    engine.jump(k, &mut psi);
                    engine.rk4(t + half, half, &mut psi);
                    let n = psi.norm();
                    psi.unscale_mut(n);
                    jump_times.push(t + half);
                } else {
                    let n = propagated.norm();
                    psi.copy_from(&propagated);
                    psi.unscale_mut(n);
                }
            }
        }
    }

    let series = ObservableSeries::from_moments(icfg.record_times(), &records);
    Ok(TrajectoryResult {
        index,
        series,
        records,
        jump_times,
        final_state: StateVector::unnormalized(space, psi)?,
    })
}

/// Jump bookkeeping across an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpStatistics {
    pub per_trajectory: Vec<usize>,
    pub jump_times: Vec<Vec<f64>>,
}

impl JumpStatistics {
    pub fn total(&self) -> usize {
        self.per_trajectory.iter().sum()
    }

    /// Jumps per unit time per trajectory within `[t0, t1)`.
    pub fn rate_in(&self, t0: f64, t1: f64) -> f64 {
        let n = self.jump_times.len().max(1) as f64;
        let count = self
            .jump_times
            .iter()
            .flat_map(|v| v.iter())
            .filter(|&&t| t >= t0 && t < t1)
            .count();
        count as f64 / (n * (t1 - t0))
    }
}

/// Ensemble mean ± standard error plus jump statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub n_traj: usize,
    pub master_seed: u64,
    pub series: ObservableSeries,
    pub jumps: JumpStatistics,
}

/// Aggregates trajectories, which must be sorted by index.
///
/// Linear observables are averaged with standard error `std/√n`. Entropy
/// and Q are evaluated on the averaged atomic matrix and photon moments,
/// with jackknife standard errors.
pub fn aggregate(cfg: &TrajectoryConfig, trajectories: &[TrajectoryResult]) -> EnsembleResult {
    let n = trajectories.len();
    let times = trajectories
        .first()
        .map(|t| t.series.times.clone())
        .unwrap_or_default();
    let n_rec = times.len();
    let mut columns: Vec<Column> = COLUMNS
        .iter()
        .map(|&name| Column {
            name,
            values: Vec::with_capacity(n_rec),
            stderr: Some(Vec::with_capacity(n_rec)),
        })
        .collect();

    let nf = n as f64;
    for r in 0..n_rec {
        for (k, col) in columns.iter_mut().enumerate() {
            if k == 5 || k == 6 {
                continue;
            }
            let values = trajectories
                .iter()
                .map(|tr| linear_value(&tr.records[r], k));
            let (mean, se) = mean_and_stderr(values, n);
            col.values.push(mean);
            col.stderr.as_mut().unwrap().push(se);
        }

        let atom_dim = trajectories[0].records[r].atom.nrows();
        let mut atom_sum = CMatrix::zeros(atom_dim, atom_dim);
        let (mut n1, mut n2) = (0.0, 0.0);
        for tr in trajectories {
            let m = &tr.records[r];
            atom_sum += &m.atom;
            n1 += m.mean_photon;
            n2 += m.second_moment;
        }
        let entropy_of = |atom: &CMatrix, count: f64| -> f64 {
            if atom.nrows() < 2 {
                return 0.0;
            }
            entropy_bits_of(&hermitian_eigenvalues(&(atom / C64::new(count, 0.0))))
        };
        let q_of = |a: f64, b: f64| crate::analytic::mandel_q_of_moments(a, b);
        let entropy = entropy_of(&atom_sum, nf);
        let q = q_of(n1 / nf, n2 / nf);

        let (mut se_s, mut se_q) = (0.0, 0.0);
        if n > 1 {
            let loo = nf - 1.0;
            let mut s_vals = Vec::with_capacity(n);
            let mut q_vals = Vec::with_capacity(n);
            for tr in trajectories {
                let m = &tr.records[r];
                s_vals.push(entropy_of(&(&atom_sum - &m.atom), loo));
                q_vals.push(q_of(
                    (n1 - m.mean_photon) / loo,
                    (n2 - m.second_moment) / loo,
                ));
            }
            se_s = jackknife(&s_vals);
            se_q = jackknife(&q_vals);
        }
        columns[5].values.push(entropy);
        columns[5].stderr.as_mut().unwrap().push(se_s);
        columns[6].values.push(q);
        columns[6].stderr.as_mut().unwrap().push(se_q);
    }

    EnsembleResult {
        n_traj: n,
        master_seed: cfg.master_seed,
        series: ObservableSeries { times, columns },
        jumps: JumpStatistics {
            per_trajectory: trajectories.iter().map(|t| t.jump_times.len()).collect(),
            jump_times: trajectories.iter().map(|t| t.jump_times.clone()).collect(),
        },
    }
}

fn mean_and_stderr(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = values.clone().sum::<f64>() / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    (mean, libm::sqrt(var / nf))
}

fn jackknife(leave_one_out: &[f64]) -> f64 {
    let n = leave_one_out.len() as f64;
    let mean = leave_one_out.iter().sum::<f64>() / n;
    let ss: f64 = leave_one_out.iter().map(|v| (v - mean) * (v - mean)).sum();
    libm::sqrt((n - 1.0) / n * ss)
}

/// Runs all trajectories sequentially in index order and aggregates them.
pub fn mcwf_ensemble(
    h: &TimeDependentOperator,
    collapse: &[CollapseChannel],
    psi0: &StateVector,
    cfg: &TrajectoryConfig,
) -> Result<EnsembleResult> {
    let trajectories = (0..cfg.n_traj as u64)
        .map(|i| mcwf_trajectory(h, collapse, psi0, cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(cfg, &trajectories))
}
