//! Numerical checks against the closed forms: parallel ensembles, the
//! master-equation residual, inflection search and decay-rate fits.

use rayon::prelude::*;
use sdoal_core::analytic::AnalyticSolution;
use sdoal_core::dynamics::{
    aggregate, mcwf_trajectory, sliding_envelope, CollapseChannel, EnsembleResult, Envelope,
    TrajectoryConfig, TrajectoryResult,
};
use sdoal_core::fock::{annihilation_op, StateVector, TruncatedSpace};
use sdoal_core::models::{build_effective_hamiltonian, EffectiveParams, HamiltonianKind};
use sdoal_core::sparse::TimeDependentOperator;
use sdoal_core::{CMatrix, Result, C64};

/// Runs every trajectory on the rayon pool. Results are collected in index
/// order, so the output matches sequential execution bit for bit.
pub fn run_trajectories(
    h: &TimeDependentOperator,
    collapse: &[CollapseChannel],
    psi0: &StateVector,
    cfg: &TrajectoryConfig,
) -> Result<Vec<TrajectoryResult>> {
    (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|i| mcwf_trajectory(h, collapse, psi0, cfg, i))
        .collect()
}

pub fn parallel_ensemble(
    h: &TimeDependentOperator,
    collapse: &[CollapseChannel],
    psi0: &StateVector,
    cfg: &TrajectoryConfig,
) -> Result<EnsembleResult> {
    Ok(aggregate(cfg, &run_trajectories(h, collapse, psi0, cfg)?))
}

/// Largest `|a[i] - b[i]|`.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Largest elementwise residual of the master equation, with the time
/// derivative of the closed-form state taken by central differences of
/// width `2·delta`.
pub fn master_equation_residual(
    sol: &AnalyticSolution,
    fock_dim: usize,
    times: &[f64],
    delta: f64,
) -> Result<f64> {
    let space = TruncatedSpace::new(fock_dim, 2)?;
    let e = EffectiveParams {
        g_eff: sol.g_eff(),
        omega_eff: 0.0,
        kappa: sol.kappa(),
    };
    let h = build_effective_hamiltonian(&e, space, HamiltonianKind::EffectiveFinal)?.into_matrix();
    let a = annihilation_op(space).into_matrix();
    let ad = a.adjoint();
    let n = &ad * &a;
    let rho_at =
        |t: f64| -> Result<CMatrix> { Ok(sol.joint_state(t, fock_dim)?.assemble()?.into_matrix()) };
    let i = C64::new(0.0, 1.0);
    let kappa = C64::new(sol.kappa(), 0.0);
    let mut worst: f64 = 0.0;
    for &t in times {
        let rho = rho_at(t)?;
        let lhs = (rho_at(t + delta)? - rho_at(t - delta)?) / C64::new(2.0 * delta, 0.0);
        let comm = &h * &rho - &rho * &h;
        let diss = &a * &rho * &ad - (&n * &rho + &rho * &n) * C64::new(0.5, 0.0);
        let rhs = comm * (-i) + diss * kappa;
        let r = (lhs - rhs).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Zero of the second derivative of `f` in `[lo, hi]`, located from the
/// sign change of the second difference on a grid of `n` points and
/// refined by bisection.
pub fn locate_inflection(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Option<f64> {
    let h = (hi - lo) / n as f64;
    let eps = h * 1e-2;
    let second = |t: f64| f(t + eps) - 2.0 * f(t) + f(t - eps);
    let mut prev_t = lo + h;
    let mut prev = second(prev_t);
    for k in 2..n {
        let t = lo + k as f64 * h;
        let cur = second(t);
        if prev.signum() != cur.signum() {
            let (mut a, mut b, mut fa) = (prev_t, t, prev);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                let fm = second(m);
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            return Some(0.5 * (a + b));
        }
        prev_t = t;
        prev = cur;
    }
    None
}

/// Least-squares decay rate `γ` of `y ≈ c e^{-γ t}` over the samples.
pub fn fit_decay_rate(times: &[f64], values: &[f64]) -> f64 {
    let n = times.len() as f64;
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let tm = times.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxy: f64 = times
        .iter()
        .zip(&ys)
        .map(|(t, y)| (t - tm) * (y - ym))
        .sum();
    let sxx: f64 = times.iter().map(|t| (t - tm) * (t - tm)).sum();
    -sxy / sxx
}

/// Sliding envelope with the window given in time units.
pub fn envelope_over(times: &[f64], values: &[f64], window: f64) -> Envelope {
    let spacing = if times.len() > 1 {
        times[1] - times[0]
    } else {
        1.0
    };
    let samples = ((window / spacing).round() as usize).max(1);
    sliding_envelope(values, samples)
}

/// Mean of `values` over samples with `lo ≤ t ≤ hi`.
pub fn window_mean(times: &[f64], values: &[f64], lo: f64, hi: f64) -> f64 {
    let picked: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(_, v)| *v)
        .collect();
    picked.iter().sum::<f64>() / picked.len() as f64
}
