//! α-expansion and αβ-swap for `MinSum` models with factors of arity at most
//! two. Each move is a binary labeling problem solved exactly by a minimum
//! s-t cut when its pairwise terms are submodular.

use std::collections::VecDeque;

use crate::algebra::Value;
use crate::error::{Error, Result};
use crate::model::{for_each_tuple, GraphicalModel, Labeling};
use crate::runtime::{
    Algorithm, Control, Inference, InferenceState, Monitor, Termination, Visitor,
    IMPROVEMENT_EPSILON,
};

/// Directed network with nonnegative capacities.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    num_nodes: usize,
    source: usize,
    sink: usize,
    arcs: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxFlow {
    pub value: f64,
    /// Nodes reachable from the source in the final residual network: the
    /// source side of a minimum cut.
    pub source_side: Vec<bool>,
}

impl FlowNetwork {
    pub fn new(num_nodes: usize, source: usize, sink: usize) -> Result<Self> {
        if source >= num_nodes || sink >= num_nodes || source == sink {
            return Err(Error::InvalidArgument(format!(
                "source {source} and sink {sink} must be distinct nodes below {num_nodes}"
            )));
        }
        Ok(FlowNetwork {
            num_nodes,
            source,
            sink,
            arcs: Vec::new(),
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn arcs(&self) -> &[(usize, usize, f64)] {
        &self.arcs
    }

    pub fn add_arc(&mut self, from: usize, to: usize, capacity: f64) -> Result<()> {
        if from >= self.num_nodes || to >= self.num_nodes {
            return Err(Error::Index(format!("arc {from}->{to} leaves the network")));
        }
        if from == to {
            return Err(Error::InvalidArgument(format!("self arc at node {from}")));
        }
        if capacity.is_nan() || capacity < 0.0 || capacity.is_infinite() {
            return Err(Error::InvalidArgument(format!(
                "arc capacity must be finite and nonnegative, got {capacity}"
            )));
        }
        self.arcs.push((from, to, capacity));
        Ok(())
    }

    /// Capacity of the cut separating `source_side` from the rest.
    pub fn cut_capacity(&self, source_side: &[bool]) -> f64 {
        self.arcs
            .iter()
            .filter(|&&(u, v, _)| source_side[u] && !source_side[v])
            .map(|&(_, _, c)| c)
            .sum()
    }

    /// Shortest augmenting paths (breadth-first), deterministic in arc
    /// insertion order.
    pub fn max_flow(&self) -> MaxFlow {
        // residual arcs in pairs: 2i forward, 2i + 1 backward
        let mut head = Vec::with_capacity(2 * self.arcs.len());
        let mut residual = Vec::with_capacity(2 * self.arcs.len());
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.num_nodes];
        for &(u, v, c) in &self.arcs {
            out[u].push(head.len());
            head.push(v);
            residual.push(c);
            out[v].push(head.len());
            head.push(u);
            residual.push(0.0);
        }

        let mut value = 0.0;
        let mut parent_arc = vec![usize::MAX; self.num_nodes];
        loop {
            parent_arc.iter_mut().for_each(|p| *p = usize::MAX);
            let mut reached = vec![false; self.num_nodes];
            reached[self.source] = true;
            let mut queue = VecDeque::from([self.source]);
            while let Some(u) = queue.pop_front() {
                if u == self.sink {
                    break;
                }
                for &a in &out[u] {
                    let v = head[a];
                    if !reached[v] && residual[a] > 0.0 {
                        reached[v] = true;
                        parent_arc[v] = a;
                        queue.push_back(v);
                    }
                }
            }
            if !reached[self.sink] {
                return MaxFlow {
                    value,
                    source_side: reached_from(self.source, &out, &head, &residual),
                };
            }
            let mut bottleneck = f64::INFINITY;
            let mut v = self.sink;
            while v != self.source {
                let a = parent_arc[v];
                bottleneck = bottleneck.min(residual[a]);
                v = head[a ^ 1];
            }
            let mut v = self.sink;
            while v != self.source {
                let a = parent_arc[v];
                residual[a] -= bottleneck;
                residual[a ^ 1] += bottleneck;
                v = head[a ^ 1];
            }
            value += bottleneck;
        }
    }
}

fn reached_from(source: usize, out: &[Vec<usize>], head: &[usize], residual: &[f64]) -> Vec<bool> {
    let mut seen = vec![false; out.len()];
    seen[source] = true;
    let mut stack = vec![source];
    while let Some(u) = stack.pop() {
        for &a in &out[u] {
            if residual[a] > 0.0 && !seen[head[a]] {
                seen[head[a]] = true;
                stack.push(head[a]);
            }
        }
    }
    seen
}

/// What to do with a pairwise move term violating
/// `E(0,0) + E(1,1) <= E(0,1) + E(1,0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonSubmodular {
    #[default]
    Error,
    /// Clamp the offending cut capacity to zero; the move becomes
    /// approximate.
    Truncate,
}

impl std::str::FromStr for NonSubmodular {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(NonSubmodular::Error),
            "truncate" => Ok(NonSubmodular::Truncate),
            other => Err(Error::InvalidArgument(format!(
                "unknown non-submodular policy `{other}` (expected error or truncate)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoveParameters {
    /// Starting labeling; all zeros when absent.
    pub initial: Option<Labeling>,
    /// Maximum number of full cycles over labels (or label pairs).
    pub max_rounds: usize,
    pub on_nonsubmodular: NonSubmodular,
}

impl Default for MoveParameters {
    fn default() -> Self {
        MoveParameters {
            initial: None,
            max_rounds: 100,
            on_nonsubmodular: NonSubmodular::Error,
        }
    }
}

/// Energy over binary variables `y`: per-variable `[E(0), E(1)]` plus
/// pairwise tables `[E(0,0), E(0,1), E(1,0), E(1,1)]`.
struct BinaryEnergy {
    unary: Vec<[Value; 2]>,
    pairwise: Vec<(usize, usize, [Value; 4], usize)>,
}

impl BinaryEnergy {
    fn new(n: usize) -> Self {
        BinaryEnergy {
            unary: vec![[0.0; 2]; n],
            pairwise: Vec::new(),
        }
    }

    /// Exact minimizer via min cut; node `i` ends on the sink side iff
    /// `y_i = 1`. Reports whether a term had to be truncated.
    fn minimize(mut self, policy: NonSubmodular) -> Result<(Vec<bool>, bool)> {
        let n = self.unary.len();
        let (source, sink) = (n, n + 1);
        let mut net = FlowNetwork::new(n + 2, source, sink)?;
        let mut truncated = false;
        let mut couplings = Vec::with_capacity(self.pairwise.len());
        for &(u, v, [a, b, c, d], factor) in &self.pairwise {
            // E = a + (c - a) y_u + (d - c) y_v + (b + c - a - d) (1 - y_u) y_v
            let mut slack = b + c - a - d;
            if slack < 0.0 {
                if slack < -IMPROVEMENT_EPSILON && policy == NonSubmodular::Error {
                    return Err(Error::SubmodularityViolation {
                        factor,
                        detail: format!(
                            "E(0,0) + E(1,1) = {} exceeds E(0,1) + E(1,0) = {}",
                            a + d,
                            b + c
                        ),
                    });
                }
                truncated |= slack < -IMPROVEMENT_EPSILON;
                slack = 0.0;
            }
            self.unary[u][1] += c - a;
            self.unary[v][1] += d - c;
            if slack > 0.0 {
                couplings.push((u, v, slack));
            }
        }
        for (v, &[e0, e1]) in self.unary.iter().enumerate() {
            if e1 > e0 {
                net.add_arc(source, v, e1 - e0)?;
            } else if e0 > e1 {
                net.add_arc(v, sink, e0 - e1)?;
            }
        }
        for (u, v, slack) in couplings {
            net.add_arc(u, v, slack)?;
        }
        let flow = net.max_flow();
        Ok(((0..n).map(|i| !flow.source_side[i]).collect(), truncated))
    }
}

fn check_model(model: &GraphicalModel, algorithm: Algorithm) -> Result<()> {
    algorithm.check(model.semiring())?;
    for (f, factor) in model.factors().iter().enumerate() {
        if factor.arity() > 2 {
            return Err(Error::UnsupportedModel(format!(
                "factor {f} has arity {}; graph-cut moves handle arity at most 2",
                factor.arity()
            )));
        }
    }
    for (i, function) in model.functions().iter().enumerate() {
        if function.arity() > 2 {
            continue;
        }
        let mut finite = true;
        for_each_tuple(&function.shape(), |t| {
            finite &= function.value(t).is_finite()
        });
        if !finite {
            return Err(Error::UnsupportedModel(format!(
                "function {i} takes infinite values; graph-cut moves need finite energies"
            )));
        }
    }
    Ok(())
}

/// Builds the binary move energy. `choice(v)` gives the labels of variable
/// `v` for `y = 0` and `y = 1`, or `None` when `v` is fixed at `current[v]`.
fn move_energy(
    model: &GraphicalModel,
    current: &[usize],
    choice: impl Fn(usize) -> Option<[usize; 2]>,
) -> (BinaryEnergy, Vec<usize>, Vec<[usize; 2]>) {
    let n = model.num_variables();
    let mut node = vec![usize::MAX; n];
    let mut labels = Vec::new();
    for (v, slot) in node.iter_mut().enumerate() {
        if let Some(pair) = choice(v) {
            *slot = labels.len();
            labels.push(pair);
        }
    }
    let mut energy = BinaryEnergy::new(labels.len());
    for (f, factor) in model.factors().iter().enumerate() {
        let function = model
            .function(factor.function().index())
            .expect("registered function");
        match *factor.variables() {
            [v] => {
                if node[v] != usize::MAX {
                    let [l0, l1] = labels[node[v]];
                    energy.unary[node[v]][0] += function.value(&[l0]);
                    energy.unary[node[v]][1] += function.value(&[l1]);
                }
            }
            [u, v] => match (node[u] != usize::MAX, node[v] != usize::MAX) {
                (true, true) => {
                    let ([u0, u1], [v0, v1]) = (labels[node[u]], labels[node[v]]);
                    energy.pairwise.push((
                        node[u],
                        node[v],
                        [
                            function.value(&[u0, v0]),
                            function.value(&[u0, v1]),
                            function.value(&[u1, v0]),
                            function.value(&[u1, v1]),
                        ],
                        f,
                    ));
                }
                (true, false) => {
                    let [u0, u1] = labels[node[u]];
                    energy.unary[node[u]][0] += function.value(&[u0, current[v]]);
                    energy.unary[node[u]][1] += function.value(&[u1, current[v]]);
                }
                (false, true) => {
                    let [v0, v1] = labels[node[v]];
                    energy.unary[node[v]][0] += function.value(&[current[u], v0]);
                    energy.unary[node[v]][1] += function.value(&[current[u], v1]);
                }
                (false, false) => {}
            },
            _ => unreachable!("arity checked on construction"),
        }
    }
    (energy, node, labels)
}

fn apply_move(current: &[usize], node: &[usize], labels: &[[usize; 2]], y: &[bool]) -> Labeling {
    current
        .iter()
        .enumerate()
        .map(|(v, &c)| {
            if node[v] == usize::MAX {
                c
            } else {
                labels[node[v]][y[node[v]] as usize]
            }
        })
        .collect()
}

fn num_labels_max(model: &GraphicalModel) -> usize {
    model.space().counts().iter().copied().max().unwrap_or(0)
}

/// Minimizes over labelings where every variable keeps its label or takes
/// `alpha`. Returns the minimizer and whether a term was truncated.
pub fn expansion_move(
    model: &GraphicalModel,
    current: &[usize],
    alpha: usize,
    policy: NonSubmodular,
) -> Result<(Labeling, bool)> {
    model.check_labeling(current)?;
    let (energy, node, labels) = move_energy(model, current, |v| {
        (alpha < model.num_labels(v)).then_some([current[v], alpha])
    });
    let (y, truncated) = energy.minimize(policy)?;
    Ok((apply_move(current, &node, &labels, &y), truncated))
}

/// Minimizes over labelings where variables labeled `alpha` or `beta` may
/// exchange those two labels and all others stay fixed.
pub fn swap_move(
    model: &GraphicalModel,
    current: &[usize],
    alpha: usize,
    beta: usize,
    policy: NonSubmodular,
) -> Result<(Labeling, bool)> {
    model.check_labeling(current)?;
    let (energy, node, labels) = move_energy(model, current, |v| {
        let c = current[v];
        let k = model.num_labels(v);
        ((c == alpha || c == beta) && alpha < k && beta < k).then_some([alpha, beta])
    });
    let (y, truncated) = energy.minimize(policy)?;
    Ok((apply_move(current, &node, &labels, &y), truncated))
}

/// Runs `moves` cyclically until a full cycle brings no strict improvement.
fn descend(
    model: &GraphicalModel,
    algorithm: Algorithm,
    params: &MoveParameters,
    moves: &[Vec<usize>],
    solve: impl Fn(&[usize], &[usize]) -> Result<(Labeling, bool)>,
    visitor: &mut dyn Visitor,
    approximate: &mut bool,
) -> Result<InferenceState> {
    let mut x = crate::local_search::initial_labeling(model, &params.initial)?;
    let mut value = model.evaluate_unchecked(&x);
    let mut monitor = Monitor::begin(visitor, algorithm, value, None);
    let mut run = || -> Result<Termination> {
        let mut rounds = 0;
        loop {
            let mut improved = false;
            for mv in moves {
                let (y, truncated) = solve(&x, mv)?;
                *approximate |= truncated;
                let candidate = model.evaluate_unchecked(&y);
                if candidate < value - IMPROVEMENT_EPSILON {
                    x = y;
                    value = candidate;
                    improved = true;
                }
                if monitor.step(value, None) == Control::Stop {
                    return Ok(Termination::VisitorStop);
                }
            }
            rounds += 1;
            if !improved {
                return Ok(Termination::FixedPoint);
            }
            if rounds >= params.max_rounds {
                return Ok(Termination::MaxIterations);
            }
        }
    };
    let outcome = run();
    let outcome = outcome.map(|t| (Some(x), value, None, t));
    monitor.finish(outcome)
}

fn check_params(params: &MoveParameters) -> Result<()> {
    if params.max_rounds == 0 {
        return Err(Error::InvalidArgument("max_rounds must be positive".into()));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct AlphaExpansion<'m> {
    model: &'m GraphicalModel,
    params: MoveParameters,
    approximate: bool,
}

impl<'m> AlphaExpansion<'m> {
    pub fn new(model: &'m GraphicalModel, params: MoveParameters) -> Result<Self> {
        check_model(model, Algorithm::AlphaExpansion)?;
        check_params(&params)?;
        Ok(AlphaExpansion {
            model,
            params,
            approximate: false,
        })
    }

    /// True when some move of the last run was truncated.
    pub fn approximate(&self) -> bool {
        self.approximate
    }
}

impl Inference for AlphaExpansion<'_> {
    fn algorithm(&self) -> Algorithm {
        Algorithm::AlphaExpansion
    }

    fn infer_with(&mut self, visitor: &mut dyn Visitor) -> Result<InferenceState> {
        let m = self.model;
        let policy = self.params.on_nonsubmodular;
        let moves: Vec<Vec<usize>> = (0..num_labels_max(m)).map(|a| vec![a]).collect();
        self.approximate = false;
        descend(
            m,
            Algorithm::AlphaExpansion,
            &self.params,
            &moves,
            |x, mv| expansion_move(m, x, mv[0], policy),
            visitor,
            &mut self.approximate,
        )
    }
}

#[derive(Debug, Clone)]
pub struct AlphaBetaSwap<'m> {
    model: &'m GraphicalModel,
    params: MoveParameters,
    approximate: bool,
}

impl<'m> AlphaBetaSwap<'m> {
    pub fn new(model: &'m GraphicalModel, params: MoveParameters) -> Result<Self> {
        check_model(model, Algorithm::AlphaBetaSwap)?;
        check_params(&params)?;
        Ok(AlphaBetaSwap {
            model,
            params,
            approximate: false,
        })
    }

    pub fn approximate(&self) -> bool {
        self.approximate
    }
}

impl Inference for AlphaBetaSwap<'_> {
    fn algorithm(&self) -> Algorithm {
        Algorithm::AlphaBetaSwap
    }

    fn infer_with(&mut self, visitor: &mut dyn Visitor) -> Result<InferenceState> {
        let m = self.model;
        let policy = self.params.on_nonsubmodular;
        let k = num_labels_max(m);
        let moves: Vec<Vec<usize>> = (0..k)
            .flat_map(|a| (a + 1..k).map(move |b| vec![a, b]))
            .collect();
        self.approximate = false;
        descend(
            m,
            Algorithm::AlphaBetaSwap,
            &self.params,
            &moves,
            |x, mv| swap_move(m, x, mv[0], mv[1], policy),
            visitor,
            &mut self.approximate,
        )
    }
}
