use alloc::vec::Vec;

use super::{anti_hermitian_part, CollapseChannel, IntegratorConfig, ObservableSeries};
use crate::fock::DensityMatrix;
use crate::math::hermitian_eigenvalues;
use crate::observables::Moments;
use crate::sparse::{SparseOperator, TimeDependentOperator};
use crate::{CMatrix, Error, Result, C64};

/// Largest trace change tolerated in a single step.
pub const MAX_TRACE_DRIFT_PER_STEP: f64 = 1e-6;

/// Output of [`lindblad_evolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladResult {
    pub series: ObservableSeries,
    pub final_state: DensityMatrix,
    /// Smallest eigenvalue over all recorded states.
    pub min_eigenvalue: f64,
    /// Largest `|Tr ρ - 1|` over all steps.
    pub max_trace_drift: f64,
}

struct Liouvillian<'a> {
    h: &'a TimeDependentOperator,
    anti: SparseOperator,
    jumps: Vec<(f64, SparseOperator)>,
    m: CMatrix,
    x: CMatrix,
}

impl Liouvillian<'_> {
    // out = L[ρ] for Hermitian ρ:
    //   M = H_e ρ,  L[ρ] = -i(M - M†) + Σ rate L (Lρ)†.
    fn apply(&mut self, t: f64, rho: &CMatrix, out: &mut CMatrix) {
        let one = C64::new(1.0, 0.0);
        self.m.fill(C64::new(0.0, 0.0));
        self.h.apply_matrix_add(t, one, rho, &mut self.m);
        self.anti.apply_matrix_add(one, rho, &mut self.m);
        let d = rho.nrows();
        for j in 0..d {
            for i in 0..d {
                let v = self.m[(i, j)] - self.m[(j, i)].conj();
                out[(i, j)] = C64::new(v.im, -v.re);
            }
        }
        for (rate, l) in &self.jumps {
            self.x.fill(C64::new(0.0, 0.0));
            l.apply_matrix_add(one, rho, &mut self.x);
            self.x.adjoint_to(&mut self.m);
            l.apply_matrix_add(C64::new(*rate, 0.0), &self.m, out);
        }
    }
}

// y += a x
fn axpy(y: &mut CMatrix, a: C64, x: &CMatrix) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += a * xi;
    }
}

fn symmetrize(m: &mut CMatrix) {
    let d = m.nrows();
    for i in 0..d {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..d {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
}

/// Integrates `dρ/dt = -i[H(t), ρ] + Σ rate (LρL† - ½{L†L, ρ})` with RK4,
/// symmetrizing `ρ` after every step.
pub fn lindblad_evolve(
    h: &TimeDependentOperator,
    collapse: &[CollapseChannel],
    rho0: &DensityMatrix,
    cfg: &IntegratorConfig,
) -> Result<LindbladResult> {
    cfg.validate()?;
    let space = rho0.space();
    if h.space() != space {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: h.space().dim(),
        });
    }
    cfg.check_step(h, collapse)?;
    let d = space.dim();
    let mut liou = Liouvillian {
        h,
        anti: anti_hermitian_part(space, collapse)?,
        jumps: collapse
            .iter()
            .map(|c| (c.rate, SparseOperator::from_operator(&c.op)))
            .collect(),
        m: CMatrix::zeros(d, d),
        x: CMatrix::zeros(d, d),
    };

    let dt = cfg.dt;
    let mut rho = rho0.matrix().clone();
    let mut k1 = CMatrix::zeros(d, d);
    let mut k2 = CMatrix::zeros(d, d);
    let mut k3 = CMatrix::zeros(d, d);
    let mut k4 = CMatrix::zeros(d, d);
    let mut tmp = CMatrix::zeros(d, d);

    let record_steps = cfg.record_steps();
    let mut next_record = 0;
    let mut records = Vec::with_capacity(record_steps.len());
    let mut min_eigenvalue = f64::INFINITY;
    let mut max_trace_drift: f64 = 0.0;
    let steps = cfg.steps();

    for step in 0..=steps {
        if next_record < record_steps.len() && record_steps[next_record] == step {
            let snapshot = DensityMatrix::new_unchecked(space, rho.clone())?;
            records.push(Moments::of_density(&snapshot));
            min_eigenvalue = min_eigenvalue.min(hermitian_eigenvalues(&rho)[0]);
            next_record += 1;
        }
        if step == steps {
            break;
        }
        let t = step as f64 * dt;
        let trace_before = rho.trace().re;

        liou.apply(t, &rho, &mut k1);
        tmp.copy_from(&rho);
        axpy(&mut tmp, C64::new(0.5 * dt, 0.0), &k1);
        liou.apply(t + 0.5 * dt, &tmp, &mut k2);
        tmp.copy_from(&rho);
        axpy(&mut tmp, C64::new(0.5 * dt, 0.0), &k2);
        liou.apply(t + 0.5 * dt, &tmp, &mut k3);
        tmp.copy_from(&rho);
        axpy(&mut tmp, C64::new(dt, 0.0), &k3);
        liou.apply(t + dt, &tmp, &mut k4);

        let w = C64::new(dt / 6.0, 0.0);
        axpy(&mut rho, w, &k1);
        axpy(&mut rho, w * 2.0, &k2);
        axpy(&mut rho, w * 2.0, &k3);
        axpy(&mut rho, w, &k4);
        symmetrize(&mut rho);

        let trace = rho.trace().re;
        let step_drift = libm::fabs(trace - trace_before);
        if step_drift > MAX_TRACE_DRIFT_PER_STEP {
            return Err(Error::StepTooLarge {
                quantity: "trace drift per step",
                value: step_drift,
                limit: MAX_TRACE_DRIFT_PER_STEP,
            });
        }
        max_trace_drift = max_trace_drift.max(libm::fabs(trace - 1.0));
    }

    Ok(LindbladResult {
        series: ObservableSeries::from_moments(cfg.record_times(), &records),
        final_state: DensityMatrix::new_unchecked(space, rho)?,
        min_eigenvalue,
        max_trace_drift,
    })
}
