//! Exhaustive solver for the accumulation problem `⊕_x ⊙_f φ_f(x)`.
//!
//! Enumerates every labeling in odometer order (last variable fastest) and
//! evaluates the model at each. Deliberately naive: every other algorithm is
//! tested against it.

use crate::algebra::Value;
use crate::error::{Error, Result};
use crate::model::{GraphicalModel, Labeling};
use crate::runtime::{
    Algorithm, Control, Inference, InferenceState, Monitor, Termination, Visitor,
};

pub const DEFAULT_STATE_CAP: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: Value,
    /// `⊕`-optimal labeling, lexicographically smallest among ties. Present
    /// only for selective semi-rings.
    pub best: Option<Labeling>,
    /// `marginals[v][l]` accumulates every labeling with `x_v = l`.
    pub marginals: Option<Vec<Vec<Value>>>,
}

#[derive(Debug, Clone)]
pub struct Oracle<'m> {
    model: &'m GraphicalModel,
    state_cap: u128,
    marginals: bool,
}

impl<'m> Oracle<'m> {
    pub fn new(model: &'m GraphicalModel) -> Self {
        Oracle {
            model,
            state_cap: DEFAULT_STATE_CAP,
            marginals: false,
        }
    }

    pub fn with_state_cap(mut self, cap: u128) -> Self {
        self.state_cap = cap;
        self
    }

    pub fn with_marginals(mut self, on: bool) -> Self {
        self.marginals = on;
        self
    }

    fn check_size(&self) -> Result<()> {
        let states = self.model.space().num_states();
        if states > self.state_cap {
            Err(Error::TooLarge {
                states,
                cap: self.state_cap,
            })
        } else {
            Ok(())
        }
    }

    pub fn solve(&self) -> Result<OracleResult> {
        self.check_size()?;
        let m = self.model;
        let s = m.semiring();
        let counts = m.space().counts();
        let selective = s.accumulate_is_selective();

        let mut value = s.zero();
        let mut best: Option<Labeling> = None;
        let mut marginals: Option<Vec<Vec<Value>>> = self
            .marginals
            .then(|| counts.iter().map(|&c| vec![s.zero(); c]).collect());

        crate::model::for_each_tuple(counts, |x| {
            let e = m.evaluate_unchecked(x);
            if selective && (best.is_none() || s.better(e, value)) {
                best = Some(x.to_vec());
            }
            value = s.add(value, e);
            if let Some(marg) = marginals.as_mut() {
                for (v, &l) in x.iter().enumerate() {
                    marg[v][l] = s.add(marg[v][l], e);
                }
            }
        });
        Ok(OracleResult {
            value,
            best,
            marginals,
        })
    }

    /// `result[l] = ⊕` of the model over all labelings with `x_v = l`.
    pub fn marginal(&self, v: usize) -> Result<Vec<Value>> {
        if v >= self.model.num_variables() {
            return Err(Error::Index(format!(
                "variable {v} does not exist in a model with {} variables",
                self.model.num_variables()
            )));
        }
        self.check_size()?;
        let m = self.model;
        let s = m.semiring();
        let mut out = vec![s.zero(); m.num_labels(v)];
        crate::model::for_each_tuple(m.space().counts(), |x| {
            out[x[v]] = s.add(out[x[v]], m.evaluate_unchecked(x));
        });
        Ok(out)
    }
}

/// Solves the accumulation problem with the default state cap.
pub fn accumulate_all(model: &GraphicalModel) -> Result<OracleResult> {
    Oracle::new(model).solve()
}

/// Marginal of variable `v` with the default state cap.
pub fn marginal(model: &GraphicalModel, v: usize) -> Result<Vec<Value>> {
    Oracle::new(model).marginal(v)
}

impl Inference for Oracle<'_> {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Oracle
    }

    fn infer_with(&mut self, visitor: &mut dyn Visitor) -> Result<InferenceState> {
        let s = self.model.semiring();
        let mut monitor = Monitor::begin(visitor, Algorithm::Oracle, s.zero(), None);
        let outcome = self.solve().map(|r| {
            let termination = match monitor.step(r.value, Some(r.value)) {
                Control::Continue => Termination::Converged,
                Control::Stop => Termination::VisitorStop,
            };
            (r.best, r.value, Some(r.value), termination)
        });
        monitor.finish(outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Semiring;
    use crate::fixtures;
    use crate::model::{FunctionEncoding, LabelSpace};

    #[test]
    fn model_a_optimum() {
        let r = accumulate_all(&fixtures::model_a()).unwrap();
        assert_eq!(r.best, Some(vec![0, 1]));
        assert_eq!(r.value, 0.2 + 0.1 + 0.3);
    }

    #[test]
    fn model_a_enumeration_values() {
        // (0,0)=0.7, (0,1)=0.6, (1,0)=1.6, (1,1)=0.9
        let m = fixtures::model_a();
        let expected = [[0.7, 0.6], [1.6, 0.9]];
        for a in 0..2 {
            for b in 0..2 {
                assert!((m.evaluate(&[a, b]).unwrap() - expected[a][b]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn model_a_min_marginal() {
        let marg = marginal(&fixtures::model_a(), 1).unwrap();
        assert!((marg[0] - 0.7).abs() < 1e-15);
        assert!((marg[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn or_and_all_ones_is_satisfiable() {
        let mut m =
            GraphicalModel::new(LabelSpace::uniform(2, 2).unwrap(), Semiring::OrAnd).unwrap();
        let one = m
            .add_function(FunctionEncoding::dense(vec![2], vec![1.0, 1.0]))
            .unwrap();
        let pair = m
            .add_function(FunctionEncoding::potts(2, 2, 1.0, 1.0))
            .unwrap();
        m.add_factor(&one, &[0]).unwrap();
        m.add_factor(&one, &[1]).unwrap();
        m.add_factor(&pair, &[0, 1]).unwrap();
        let r = accumulate_all(&m).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.best, Some(vec![0, 0]));
    }

    #[test]
    fn empty_model() {
        let r = accumulate_all(&GraphicalModel::empty(Semiring::MinSum)).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.best, Some(vec![]));
    }

    #[test]
    fn unary_marginal_and_uniform_sum() {
        let mut m =
            GraphicalModel::new(LabelSpace::uniform(1, 2).unwrap(), Semiring::MinSum).unwrap();
        let u = m
            .add_function(FunctionEncoding::dense(vec![2], vec![0.2, 0.8]))
            .unwrap();
        m.add_factor(&u, &[0]).unwrap();
        assert_eq!(marginal(&m, 0).unwrap(), vec![0.2, 0.8]);

        let m = fixtures::potts_chain(3, 3, 1.0, 1.0).boltzmann().unwrap();
        let marg = marginal(&m, 1).unwrap();
        assert!(marg.iter().all(|&x| x == marg[0]));
        assert!(matches!(marginal(&m, 3), Err(Error::Index(_))));
    }

    #[test]
    fn sum_prod_has_no_best() {
        let m = fixtures::model_a().boltzmann().unwrap();
        let r = Oracle::new(&m).with_marginals(true).solve().unwrap();
        assert!(r.best.is_none());
        let marg = r.marginals.unwrap();
        let total: f64 = marg[0].iter().sum();
        assert!((total - r.value).abs() <= 1e-12 * r.value);
    }

    #[test]
    fn cap_is_enforced() {
        let m = fixtures::potts_chain(30, 2, 0.0, 1.0);
        assert!(matches!(accumulate_all(&m), Err(Error::TooLarge { .. })));
        let small = fixtures::potts_chain(4, 2, 0.0, 1.0);
        assert!(matches!(
            Oracle::new(&small).with_state_cap(15).solve(),
            Err(Error::TooLarge {
                states: 16,
                cap: 15
            })
        ));
    }

    #[test]
    fn infer_reports_tight_bound() {
        let m = fixtures::model_a();
        let state = Oracle::new(&m).infer().unwrap();
        assert_eq!(state.arg, Some(vec![0, 1]));
        assert_eq!(state.bound, Some(state.value));
        assert_eq!(state.termination, Termination::Converged);
        assert_eq!(state.step_count, 1);
    }
}
