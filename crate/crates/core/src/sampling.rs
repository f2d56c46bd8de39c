//! Gibbs sampling on `SumProd` models, reading factor values as nonnegative
//! potentials.
//!
//! Variables are resampled in round-robin index order; step `t` resamples
//! variable `t mod n` from its conditional distribution, proportional to the
//! product of its adjacent factors. Randomness comes from `ChaCha8Rng`
//! seeded with `seed_from_u64(seed)`, so a run is reproducible bit for bit.
//!
//! After burn-in, each step adds one count for the label drawn for the
//! resampled variable; marginal estimates are the per-variable normalized
//! counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::Value;
use crate::error::{Error, Result};
use crate::model::{GraphicalModel, Labeling};
use crate::runtime::{
    Algorithm, Control, Inference, InferenceState, Monitor, Termination, Visitor,
};

/// Sampling steps between two visitor calls.
pub const VISIT_INTERVAL: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsParameters {
    /// Number of single-variable resamples.
    pub total_steps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub track_marginals: bool,
    /// Starting labeling; all zeros when absent.
    pub initial: Option<Labeling>,
}

impl GibbsParameters {
    pub fn new(total_steps: usize, burn_in: usize, seed: u64) -> Self {
        GibbsParameters {
            total_steps,
            burn_in,
            seed,
            track_marginals: true,
            initial: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Gibbs<'m> {
    model: &'m GraphicalModel,
    params: GibbsParameters,
    marginals: Option<Vec<Vec<Value>>>,
    last: Option<Labeling>,
}

impl<'m> Gibbs<'m> {
    pub fn new(model: &'m GraphicalModel, params: GibbsParameters) -> Result<Self> {
        Algorithm::Gibbs.check(model.semiring())?;
        if params.total_steps == 0 || params.burn_in >= params.total_steps {
            return Err(Error::InvalidArgument(format!(
                "burn-in ({}) must be smaller than the positive step count ({})",
                params.burn_in, params.total_steps
            )));
        }
        if params.track_marginals && params.total_steps - params.burn_in < model.num_variables() {
            return Err(Error::InvalidArgument(format!(
                "{} post-burn-in steps cannot visit all {} variables",
                params.total_steps - params.burn_in,
                model.num_variables()
            )));
        }
        Ok(Gibbs {
            model,
            params,
            marginals: None,
            last: None,
        })
    }

    /// Empirical marginals of the last run, when tracked.
    pub fn marginals(&self) -> Option<&[Vec<Value>]> {
        self.marginals.as_deref()
    }

    /// State of the chain at the end of the last run.
    pub fn final_labeling(&self) -> Option<&[usize]> {
        self.last.as_deref()
    }

    fn log_score(&self, x: &[usize]) -> f64 {
        (0..self.model.num_factors())
            .map(|f| self.model.factor_value(f, x).ln())
            .sum()
    }

    fn run(&mut self, monitor: &mut Monitor<'_>) -> Result<(Labeling, Termination)> {
        let m = self.model;
        let n = m.num_variables();
        let mut x = crate::local_search::initial_labeling(m, &self.params.initial)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.params.seed);
        let mut counts: Vec<Vec<u64>> = (0..n).map(|v| vec![0; m.num_labels(v)]).collect();
        let mut current_log = self.log_score(&x);
        let mut best = x.clone();
        let mut best_log = current_log;
        let mut weights = Vec::new();
        let mut termination = Termination::MaxIterations;

        if n > 0 {
            for t in 0..self.params.total_steps {
                let v = t % n;
                weights.clear();
                weights.extend((0..m.num_labels(v)).map(|l| m.local_value(v, l, &x)));
                let total: f64 = weights.iter().sum();
                if !(total > 0.0 && total.is_finite()) {
                    return Err(Error::DegenerateDistribution { variable: v });
                }
                let u = rng.random::<f64>() * total;
                let mut acc = 0.0;
                let mut label = weights
                    .iter()
                    .rposition(|&w| w > 0.0)
                    .expect("positive weight");
                for (l, &w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc && w > 0.0 {
                        label = l;
                        break;
                    }
                }

                let old = x[v];
                x[v] = label;
                if old != label {
                    current_log = if weights[old] > 0.0 {
                        current_log - weights[old].ln() + weights[label].ln()
                    } else {
                        self.log_score(&x)
                    };
                    if current_log > best_log {
                        best_log = current_log;
                        best.clone_from(&x);
                    }
                }
                if t >= self.params.burn_in {
                    counts[v][label] += 1;
                }
                let done = t + 1;
                let due = done % VISIT_INTERVAL == 0 || done == self.params.total_steps;
                if due && monitor.step(best_log.exp(), None) == Control::Stop {
                    termination = Termination::VisitorStop;
                    break;
                }
            }
        }

        if self.params.track_marginals {
            self.marginals = Some(
                counts
                    .iter()
                    .map(|c| {
                        let total: u64 = c.iter().sum();
                        c.iter().map(|&k| k as f64 / total as f64).collect()
                    })
                    .collect(),
            );
        }
        self.last = Some(x);
        Ok((best, termination))
    }
}

impl Inference for Gibbs<'_> {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Gibbs
    }

    fn infer_with(&mut self, visitor: &mut dyn Visitor) -> Result<InferenceState> {
        self.marginals = None;
        self.last = None;
        let m = self.model;
        let mut monitor = Monitor::begin(visitor, Algorithm::Gibbs, m.semiring().zero(), None);
        let outcome = self.run(&mut monitor).map(|(best, termination)| {
            let value = m.evaluate_unchecked(&best);
            (Some(best), value, None, termination)
        });
        monitor.finish(outcome)
    }
}
