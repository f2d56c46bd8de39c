//! Move-making descent on `MinSum` models: ICM and the Lazy Flipper.
//!
//! Both evaluate moves through the factors adjacent to the moved variables
//! only and accept a move only if it lowers that local energy by more than
//! [`IMPROVEMENT_EPSILON`].

use crate::algebra::{Semiring, Value};
use crate::error::Result;
use crate::model::{for_each_tuple, GraphicalModel, Labeling};
use crate::runtime::{
    Algorithm, Control, Inference, InferenceState, Monitor, SilentVisitor, Termination, Visitor,
    IMPROVEMENT_EPSILON,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchParameters {
    /// Starting labeling; all zeros when absent.
    pub initial: Option<Labeling>,
    /// Largest connected subgraph the Lazy Flipper relabels jointly.
    pub max_subgraph_size: usize,
    /// Cap on passes (ICM) or rounds per subgraph size (Lazy Flipper).
    pub max_rounds: usize,
    /// Lazy Flipper only: run ICM from `initial` first.
    pub pre_icm: bool,
}

impl Default for SearchParameters {
    fn default() -> Self {
        SearchParameters {
            initial: None,
            max_subgraph_size: 2,
            max_rounds: 1000,
            pre_icm: false,
        }
    }
}

impl SearchParameters {
    pub fn with_subgraph_size(mut self, k: usize) -> Self {
        self.max_subgraph_size = k;
        self
    }

    pub fn with_initial(mut self, initial: Labeling) -> Self {
        self.initial = Some(initial);
        self
    }
}

pub(crate) fn initial_labeling(
    model: &GraphicalModel,
    initial: &Option<Labeling>,
) -> Result<Labeling> {
    match initial {
        Some(x) => {
            model.check_labeling(x)?;
            Ok(x.clone())
        }
        None => Ok(vec![0; model.num_variables()]),
    }
}

fn check_rounds(p: &SearchParameters) -> Result<()> {
    if p.max_rounds == 0 {
        return Err(crate::Error::InvalidArgument(
            "max_rounds must be positive".into(),
        ));
    }
    if p.max_subgraph_size == 0 {
        return Err(crate::Error::InvalidArgument(
            "max_subgraph_size must be positive".into(),
        ));
    }
    Ok(())
}

/// Iterated conditional modes.
#[derive(Debug, Clone)]
pub struct Icm<'m> {
    model: &'m GraphicalModel,
    params: SearchParameters,
}

impl<'m> Icm<'m> {
    pub fn new(model: &'m GraphicalModel, params: SearchParameters) -> Result<Self> {
        Algorithm::Icm.check(model.semiring())?;
        check_rounds(&params)?;
        Ok(Icm { model, params })
    }
}

impl Inference for Icm<'_> {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Icm
    }

    fn infer_with(&mut self, visitor: &mut dyn Visitor) -> Result<InferenceState> {
        let m = self.model;
        let mut x = initial_labeling(m, &self.params.initial)?;
        let mut monitor = Monitor::begin(visitor, Algorithm::Icm, m.evaluate_unchecked(&x), None);
        let mut local = Vec::new();
        let termination = loop {
            let mut changed = false;
            for v in 0..m.num_variables() {
                local.clear();
                local.extend((0..m.num_labels(v)).map(|l| m.local_value(v, l, &x)));
                let best = Semiring::MinSum.arg_best(&local);
                if local[best] < local[x[v]] - IMPROVEMENT_EPSILON {
                    x[v] = best;
                    changed = true;
                }
            }
            let stop = monitor.step(m.evaluate_unchecked(&x), None) == Control::Stop;
            if stop {
                break Termination::VisitorStop;
            }
            if !changed {
                break Termination::FixedPoint;
            }
            if monitor.steps() >= self.params.max_rounds {
                break Termination::MaxIterations;
            }
        };
        let value = m.evaluate_unchecked(&x);
        monitor.finish(Ok((Some(x), value, None, termination)))
    }
}

/// Calls `emit` once for every connected vertex set of size at most
/// `max_size` whose smallest vertex is `root`. Enumeration stops early when
/// `emit` returns false; the return value reports whether it ran to the end.
pub fn connected_subgraphs_from(
    neighbors: &[Vec<usize>],
    root: usize,
    max_size: usize,
    emit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    struct Esu<'a> {
        neighbors: &'a [Vec<usize>],
        root: usize,
        max_size: usize,
        // per vertex: how many members of the current set are it or adjacent to it
        covered: Vec<u32>,
        members: Vec<usize>,
    }

    impl Esu<'_> {
        fn add(&mut self, w: usize) {
            self.members.push(w);
            self.covered[w] += 1;
            for &u in &self.neighbors[w] {
                self.covered[u] += 1;
            }
        }

        fn remove(&mut self, w: usize) {
            self.members.pop();
            self.covered[w] -= 1;
            for &u in &self.neighbors[w] {
                self.covered[u] -= 1;
            }
        }

        fn extend(
            &mut self,
            mut extension: Vec<usize>,
            emit: &mut dyn FnMut(&[usize]) -> bool,
        ) -> bool {
            if !emit(&self.members) {
                return false;
            }
            if self.members.len() == self.max_size {
                return true;
            }
            while !extension.is_empty() {
                let w = extension.remove(0);
                let mut next = extension.clone();
                next.extend(
                    self.neighbors[w]
                        .iter()
                        .copied()
                        .filter(|&u| u > self.root && self.covered[u] == 0),
                );
                self.add(w);
                let go_on = self.extend(next, emit);
                self.remove(w);
                if !go_on {
                    return false;
                }
            }
            true
        }
    }

    if max_size == 0 {
        return true;
    }
    let mut esu = Esu {
        neighbors,
        root,
        max_size,
        covered: vec![0; neighbors.len()],
        members: Vec::with_capacity(max_size),
    };
    esu.add(root);
    let extension = neighbors[root]
        .iter()
        .copied()
        .filter(|&u| u > root)
        .collect();
    esu.extend(extension, emit)
}

/// Calls `emit` once for every connected vertex set of size at most
/// `max_size`, grouped by ascending smallest vertex.
pub fn connected_subgraphs(
    neighbors: &[Vec<usize>],
    max_size: usize,
    emit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    (0..neighbors.len()).all(|root| connected_subgraphs_from(neighbors, root, max_size, emit))
}

/// Lazy Flipper: exhaustive relabeling of connected subgraphs of growing
/// size.
///
/// Subgraph sizes are processed in increasing order; size `k` starts only
/// once no subgraph of size below `k` can improve, and afterwards subgraphs
/// of every size up to `k` stay eligible. After the first round of each size,
/// only subgraphs near variables changed in the previous round are
/// revisited.
#[derive(Debug, Clone)]
pub struct LazyFlipper<'m> {
    model: &'m GraphicalModel,
    params: SearchParameters,
}

impl<'m> LazyFlipper<'m> {
    pub fn new(model: &'m GraphicalModel, params: SearchParameters) -> Result<Self> {
        Algorithm::LazyFlipper.check(model.semiring())?;
        check_rounds(&params)?;
        Ok(LazyFlipper { model, params })
    }

    /// Tries every joint relabeling of `subset` in odometer order and applies
    /// the first one that lowers the local energy.
    fn try_move(&self, subset: &[usize], x: &mut Labeling, factors: &mut Vec<usize>) -> bool {
        let m = self.model;
        let s = Semiring::MinSum;
        factors.clear();
        for &v in subset {
            factors.extend_from_slice(m.factors_of(v));
        }
        factors.sort_unstable();
        factors.dedup();

        let local = |label_of: &dyn Fn(usize) -> usize| -> Value {
            factors.iter().fold(s.one(), |acc, &f| {
                s.mul(acc, m.factor_value_with(f, label_of))
            })
        };
        let current = local(&|u| x[u]);
        let shape: Vec<usize> = subset.iter().map(|&v| m.num_labels(v)).collect();
        let mut found: Option<Vec<usize>> = None;
        let mut done = false;
        for_each_tuple(&shape, |t| {
            if done || subset.iter().zip(t).all(|(&v, &l)| x[v] == l) {
                return;
            }
            let label_of = |u: usize| match subset.iter().position(|&w| w == u) {
                Some(p) => t[p],
                None => x[u],
            };
            if local(&label_of) < current - IMPROVEMENT_EPSILON {
                found = Some(t.to_vec());
                done = true;
            }
        });
        match found {
            Some(t) => {
                for (&v, l) in subset.iter().zip(t) {
                    x[v] = l;
                }
                true
            }
            None => false,
        }
    }
}

impl Inference for LazyFlipper<'_> {
    fn algorithm(&self) -> Algorithm {
        Algorithm::LazyFlipper
    }

    fn infer_with(&mut self, visitor: &mut dyn Visitor) -> Result<InferenceState> {
        let m = self.model;
        let n = m.num_variables();
        let mut x = initial_labeling(m, &self.params.initial)?;
        if self.params.pre_icm {
            let params = SearchParameters {
                initial: Some(x),
                ..self.params.clone()
            };
            x = Icm::new(m, params)?
                .infer_with(&mut SilentVisitor)?
                .arg
                .expect("icm labeling");
        }
        let neighbors = m.variable_neighbors();
        let mut monitor = Monitor::begin(
            visitor,
            Algorithm::LazyFlipper,
            m.evaluate_unchecked(&x),
            None,
        );
        let mut factors = Vec::new();
        let max_size = self.params.max_subgraph_size.min(n.max(1));

        let mut termination = Termination::FixedPoint;
        'sizes: for size in 1..=max_size {
            let mut touched = vec![true; n];
            let mut rounds = 0;
            loop {
                let mut changed = vec![false; n];
                let mut any = false;
                let mut stopped = false;
                connected_subgraphs(&neighbors, size, &mut |subset| {
                    if !subset.iter().any(|&v| touched[v]) {
                        return true;
                    }
                    if self.try_move(subset, &mut x, &mut factors) {
                        any = true;
                        subset.iter().for_each(|&v| changed[v] = true);
                        if monitor.step(m.evaluate_unchecked(&x), None) == Control::Stop {
                            stopped = true;
                            return false;
                        }
                    }
                    true
                });
                if stopped {
                    termination = Termination::VisitorStop;
                    break 'sizes;
                }
                if !any {
                    break;
                }
                rounds += 1;
                if rounds >= self.params.max_rounds {
                    termination = Termination::MaxIterations;
                    break 'sizes;
                }
                touched = changed.clone();
                for v in (0..n).filter(|&v| changed[v]) {
                    for &u in &neighbors[v] {
                        touched[u] = true;
                    }
                }
            }
        }
        let value = m.evaluate_unchecked(&x);
        monitor.finish(Ok((Some(x), value, None, termination)))
    }
}
