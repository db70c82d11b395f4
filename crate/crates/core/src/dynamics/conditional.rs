use crate::fock::{DensityMatrix, StateVector, TruncatedSpace};
use crate::observables::StateRef;
use crate::{CMatrix, CVector, Error, Result, C64};

/// Branch probabilities below this are rejected.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-10;

/// Field state after finding the atom in a given level.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalField {
    pub level: usize,
    pub probability: f64,
    pub state: DensityMatrix,
}

/// Projects the atom onto `|level⟩`, traces it out and renormalizes.
pub fn conditional_field_state<'a>(
    state: impl Into<StateRef<'a>>,
    level: usize,
) -> Result<ConditionalField> {
    let state = state.into();
    let space = match state {
        StateRef::Pure(psi) => psi.space(),
        StateRef::Mixed(rho) => rho.space(),
    };
    space.check_level(level)?;
    let nf = space.fock_dim();
    let field = TruncatedSpace::field(nf)?;
    let offset = (level - 1) * nf;
    let (probability, matrix) = match state {
        StateRef::Pure(psi) => {
            let amps = psi.amplitudes();
            let block = CVector::from_fn(nf, |n, _| amps[offset + n]);
            let p = block.norm_squared() / psi.norm_sqr();
            (p, &block * block.adjoint())
        }
        StateRef::Mixed(rho) => {
            let block: CMatrix = rho.matrix().view((offset, offset), (nf, nf)).into();
            let p = block.trace().re / rho.trace().re;
            (p, block)
        }
    };
    if probability.is_nan() || probability < MIN_BRANCH_PROBABILITY {
        return Err(Error::NegligibleBranch(probability));
    }
    let tr = matrix.trace().re;
    let state = DensityMatrix::new(field, matrix / C64::new(tr, 0.0))?;
    Ok(ConditionalField {
        level,
        probability,
        state,
    })
}

impl ConditionalField {
    /// Pure field state, when the conditional state is pure.
    pub fn pure_state(&self) -> Option<StateVector> {
        if self.state.purity() < 1.0 - 1e-8 {
            return None;
        }
        let m = self.state.matrix();
        let col = (0..m.ncols())
            .max_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re))
            .unwrap_or(0);
        let v = m.column(col).into_owned();
        StateVector::from_unnormalized(self.state.space(), v).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{AnalyticSolution, Branch};
    use crate::fock::coherent_state;

    #[test]
    fn cat_pair_projects_onto_cats() {
        let field = TruncatedSpace::field(24).unwrap();
        let u = AnalyticSolution::new(1.0, 0.0).unwrap();
        let t = 2.4;
        let alpha = u.alpha(t);
        let p = coherent_state(field, alpha).unwrap();
        let m = coherent_state(field, -alpha).unwrap();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let a = StateVector::product(&[C64::new(r, 0.0), C64::new(r, 0.0)], &p).unwrap();
        let b = StateVector::product(&[C64::new(r, 0.0), C64::new(-r, 0.0)], &m).unwrap();
        let psi =
            StateVector::from_unnormalized(a.space(), a.amplitudes() + b.amplitudes()).unwrap();

        let mut total = 0.0;
        for branch in [Branch::Level1, Branch::Level2] {
            let cond = conditional_field_state(&psi, branch.level()).unwrap();
            let cat = u.conditional_cat_state(t, branch, field).unwrap();
            let fid = cat
                .to_density()
                .expectation(
                    &crate::fock::FieldOperator::new(field, cond.state.matrix().clone()).unwrap(),
                )
                .unwrap()
                .re;
            assert!(fid > 1.0 - 1e-8, "{fid}");
            let pure = cond.pure_state().unwrap();
            assert!(pure.fidelity(&cat).unwrap() > 1.0 - 1e-8);
            total += cond.probability;
            let mixed = conditional_field_state(&psi.to_density(), branch.level()).unwrap();
            assert!((mixed.probability - cond.probability).abs() < 1e-12);
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_branch_is_rejected() {
        let s = TruncatedSpace::new(4, 2).unwrap();
        let psi = StateVector::basis(s, 1, 0).unwrap();
        assert!(matches!(
            conditional_field_state(&psi, 2),
            Err(Error::NegligibleBranch(_))
        ));
        assert!(conditional_field_state(&psi, 3).is_err());
    }
}
