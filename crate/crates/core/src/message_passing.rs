//! Loopy belief propagation over `MinSum`, `SumProd` and `MaxProd`.
//!
//! Flooding schedule: each sweep first recomputes every variable-to-factor
//! message from the previous factor-to-variable messages, then every
//! factor-to-variable message from the fresh variable-to-factor messages.
//! Messages are normalized (minimum 0 for `MinSum`, sum 1 otherwise) and then
//! damped, `new = damping * old + (1 - damping) * raw`. Under `MinSum` the
//! damped message is shifted back to minimum 0.
//!
//! Factors of any arity are handled by enumerating their label product.

use crate::algebra::{Semiring, Value};
use crate::error::{Error, Result};
use crate::model::{for_each_tuple, GraphicalModel, Labeling};
use crate::runtime::{
    Algorithm, Control, Inference, InferenceState, Monitor, Termination, Visitor,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpParameters {
    pub max_iterations: usize,
    /// Stop once the largest entrywise message change of a sweep is at most
    /// this.
    pub convergence_bound: f64,
    /// In `[0, 1)`; 0 disables damping.
    pub damping: f64,
}

impl BpParameters {
    pub fn new(max_iterations: usize, convergence_bound: f64, damping: f64) -> Self {
        BpParameters {
            max_iterations,
            convergence_bound,
            damping,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.convergence_bound.is_nan() || self.convergence_bound < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "convergence bound must be nonnegative, got {}",
                self.convergence_bound
            )));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidArgument(format!(
                "damping must lie in [0, 1), got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

impl Default for BpParameters {
    fn default() -> Self {
        BpParameters::new(100, 1e-7, 0.0)
    }
}

/// All messages of a run. Edge `e` joins factor `f` and the variable at
/// position `j` of `f`, with `e = edge_offset[f] + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageState {
    pub var_to_factor: Vec<Vec<Value>>,
    pub factor_to_var: Vec<Vec<Value>>,
    pub iteration: usize,
    pub last_distance: f64,
}

#[derive(Debug, Clone)]
pub struct BeliefPropagation<'m> {
    model: &'m GraphicalModel,
    params: BpParameters,
    edge_offset: Vec<usize>,
    edge_variable: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
    state: MessageState,
}

pub(crate) fn normalize(s: Semiring, msg: &mut [Value]) {
    if msg.is_empty() {
        return;
    }
    match s {
        Semiring::MinSum => {
            let min = msg.iter().copied().fold(f64::INFINITY, f64::min);
            if min.is_finite() {
                msg.iter_mut().for_each(|x| *x -= min);
            } else {
                msg.iter_mut().for_each(|x| *x = 0.0);
            }
        }
        _ => {
            let sum: f64 = msg.iter().sum();
            if sum > 0.0 && sum.is_finite() {
                msg.iter_mut().for_each(|x| *x /= sum);
            } else {
                let u = 1.0 / msg.len() as f64;
                msg.iter_mut().for_each(|x| *x = u);
            }
        }
    }
}

fn uniform(s: Semiring, k: usize) -> Vec<Value> {
    let mut msg = vec![s.one(); k];
    normalize(s, &mut msg);
    msg
}

fn entry_distance(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}

impl<'m> BeliefPropagation<'m> {
    pub fn new(model: &'m GraphicalModel, params: BpParameters) -> Result<Self> {
        Algorithm::BeliefPropagation.check(model.semiring())?;
        params.validate()?;
        let mut edge_offset = Vec::with_capacity(model.num_factors());
        let mut edge_variable = Vec::new();
        let mut var_edges = vec![Vec::new(); model.num_variables()];
        for factor in model.factors() {
            edge_offset.push(edge_variable.len());
            for &v in factor.variables() {
                var_edges[v].push(edge_variable.len());
                edge_variable.push(v);
            }
        }
        let s = model.semiring();
        let messages: Vec<Vec<Value>> = edge_variable
            .iter()
            .map(|&v| uniform(s, model.num_labels(v)))
            .collect();
        Ok(BeliefPropagation {
            model,
            params,
            edge_offset,
            edge_variable,
            var_edges,
            state: MessageState {
                var_to_factor: messages.clone(),
                factor_to_var: messages,
                iteration: 0,
                last_distance: f64::INFINITY,
            },
        })
    }

    pub fn state(&self) -> &MessageState {
        &self.state
    }

    pub fn params(&self) -> &BpParameters {
        &self.params
    }

    /// Edge index of position `j` of factor `f`.
    pub fn edge(&self, f: usize, j: usize) -> usize {
        self.edge_offset[f] + j
    }

    fn update(&self, old: &[Value], mut raw: Vec<Value>, distance: &mut f64) -> Vec<Value> {
        let s = self.model.semiring();
        normalize(s, &mut raw);
        let d = self.params.damping;
        if d > 0.0 {
            for (r, &o) in raw.iter_mut().zip(old) {
                *r = d * o + (1.0 - d) * *r;
            }
            if s == Semiring::MinSum {
                normalize(s, &mut raw);
            }
        }
        for (&n, &o) in raw.iter().zip(old) {
            *distance = distance.max(entry_distance(n, o));
        }
        raw
    }

    /// One synchronous sweep over all messages.
    pub fn sweep(&mut self) {
        let m = self.model;
        let s = m.semiring();
        let mut distance = 0.0f64;

        let mut var_to_factor = Vec::with_capacity(self.edge_variable.len());
        for (e, &v) in self.edge_variable.iter().enumerate() {
            let mut raw = vec![s.one(); m.num_labels(v)];
            for &other in &self.var_edges[v] {
                if other != e {
                    for (r, &x) in raw.iter_mut().zip(&self.state.factor_to_var[other]) {
                        *r = s.mul(*r, x);
                    }
                }
            }
            var_to_factor.push(self.update(&self.state.var_to_factor[e], raw, &mut distance));
        }
        self.state.var_to_factor = var_to_factor;

        let mut factor_to_var = Vec::with_capacity(self.edge_variable.len());
        for (f, factor) in m.factors().iter().enumerate() {
            let function = m
                .function(factor.function().index())
                .expect("registered function");
            let shape = factor.function().shape();
            let base = self.edge_offset[f];
            let incoming = &self.state.var_to_factor[base..base + shape.len()];
            let mut raw: Vec<Vec<Value>> = shape.iter().map(|&k| vec![s.zero(); k]).collect();
            for_each_tuple(shape, |t| {
                let phi = function.value(t);
                for (j, out) in raw.iter_mut().enumerate() {
                    let mut prod = phi;
                    for (i, msg) in incoming.iter().enumerate() {
                        if i != j {
                            prod = s.mul(prod, msg[t[i]]);
                        }
                    }
                    out[t[j]] = s.add(out[t[j]], prod);
                }
            });
            for (j, r) in raw.into_iter().enumerate() {
                factor_to_var.push(self.update(
                    &self.state.factor_to_var[base + j],
                    r,
                    &mut distance,
                ));
            }
        }
        self.state.factor_to_var = factor_to_var;

        self.state.iteration += 1;
        self.state.last_distance = distance;
    }

    /// Normalized beliefs of every variable.
    pub fn beliefs(&self) -> Vec<Vec<Value>> {
        let m = self.model;
        let s = m.semiring();
        (0..m.num_variables())
            .map(|v| {
                let mut b = vec![s.one(); m.num_labels(v)];
                for &e in &self.var_edges[v] {
                    for (x, &msg) in b.iter_mut().zip(&self.state.factor_to_var[e]) {
                        *x = s.mul(*x, msg);
                    }
                }
                normalize(s, &mut b);
                b
            })
            .collect()
    }

    /// Labeling choosing each variable's best belief (minimum for `MinSum`,
    /// maximum otherwise; smallest label on ties) and the beliefs themselves.
    pub fn decode(&self) -> (Labeling, Vec<Vec<Value>>) {
        let s = self.model.semiring();
        let beliefs = self.beliefs();
        let labeling = beliefs.iter().map(|b| s.arg_best(b)).collect();
        (labeling, beliefs)
    }
}

impl Inference for BeliefPropagation<'_> {
    fn algorithm(&self) -> Algorithm {
        Algorithm::BeliefPropagation
    }

    fn infer_with(&mut self, visitor: &mut dyn Visitor) -> Result<InferenceState> {
        let m = self.model;
        let (labeling, _) = self.decode();
        let mut monitor = Monitor::begin(
            visitor,
            Algorithm::BeliefPropagation,
            m.evaluate_unchecked(&labeling),
            None,
        );
        let termination = loop {
            if self.state.iteration >= self.params.max_iterations {
                break Termination::MaxIterations;
            }
            self.sweep();
            let (labeling, _) = self.decode();
            if monitor.step(m.evaluate_unchecked(&labeling), None) == Control::Stop {
                break Termination::VisitorStop;
            }
            if self.state.last_distance <= self.params.convergence_bound {
                break Termination::Converged;
            }
        };
        let (labeling, _) = self.decode();
        let value = m.evaluate_unchecked(&labeling);
        monitor.finish(Ok((Some(labeling), value, None, termination)))
    }
}
