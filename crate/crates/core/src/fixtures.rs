//! Model builders shared by tests, benchmarks and the shipped example files.

use rand::seq::index::sample;
use rand::Rng;

use crate::algebra::{Semiring, Value};
use crate::model::{FunctionEncoding, FunctionId, GraphicalModel, LabelSpace};

/// Two binary variables, `MinSum`: unaries `[0.2, 0.8]` and `[0.5, 0.1]`,
/// Potts coupling `(0.0, 0.3)`. Optimum `[0, 1]` with energy 0.6.
pub fn model_a() -> GraphicalModel {
    let mut m = GraphicalModel::new(LabelSpace::uniform(2, 2).unwrap(), Semiring::MinSum).unwrap();
    let u1 = m
        .add_function(FunctionEncoding::dense(vec![2], vec![0.2, 0.8]))
        .unwrap();
    let u2 = m
        .add_function(FunctionEncoding::dense(vec![2], vec![0.5, 0.1]))
        .unwrap();
    let potts = m
        .add_function(FunctionEncoding::potts(2, 2, 0.0, 0.3))
        .unwrap();
    m.add_factor(&u1, &[0]).unwrap();
    m.add_factor(&u2, &[1]).unwrap();
    m.add_factor(&potts, &[0, 1]).unwrap();
    m
}

/// Three variables, three unary functions and one pairwise function shared by
/// the factors on `(0, 1)` and `(1, 2)`.
///
/// `value(i, coords)` fills the dense table of function `i` (0..4).
pub fn shared_chain(
    semiring: Semiring,
    labels: usize,
    value: impl Fn(usize, &[usize]) -> Value,
) -> GraphicalModel {
    let mut m = GraphicalModel::new(LabelSpace::uniform(3, labels).unwrap(), semiring).unwrap();
    let table = |i: usize, shape: Vec<usize>| {
        let mut values = Vec::new();
        crate::model::for_each_tuple(&shape, |c| values.push(value(i, c)));
        FunctionEncoding::dense(shape, values)
    };
    let mut ids: Vec<FunctionId> = Vec::new();
    for i in 0..3 {
        ids.push(m.add_function(table(i, vec![labels])).unwrap());
    }
    ids.push(m.add_function(table(3, vec![labels, labels])).unwrap());
    m.add_factor(&ids[0], &[0]).unwrap();
    m.add_factor(&ids[1], &[1]).unwrap();
    m.add_factor(&ids[2], &[2]).unwrap();
    m.add_factor(&ids[3], &[0, 1]).unwrap();
    m.add_factor(&ids[3], &[1, 2]).unwrap();
    m
}

/// Chain of `n` variables coupled by one shared Potts function.
pub fn potts_chain(
    n: usize,
    labels: usize,
    value_equal: Value,
    value_unequal: Value,
) -> GraphicalModel {
    let mut m =
        GraphicalModel::new(LabelSpace::uniform(n, labels).unwrap(), Semiring::MinSum).unwrap();
    let potts = m
        .add_function(FunctionEncoding::potts(
            labels,
            labels,
            value_equal,
            value_unequal,
        ))
        .unwrap();
    for v in 1..n {
        m.add_factor(&potts, &[v - 1, v]).unwrap();
    }
    m
}

/// 4-connected `rows × cols` grid whose pairwise factors all share one Potts
/// function. Variable `(r, c)` has index `r * cols + c`.
pub fn potts_grid(rows: usize, cols: usize, labels: usize, value_unequal: Value) -> GraphicalModel {
    let mut m = GraphicalModel::new(
        LabelSpace::uniform(rows * cols, labels).unwrap(),
        Semiring::MinSum,
    )
    .unwrap();
    let potts = m
        .add_function(FunctionEncoding::potts(labels, labels, 0.0, value_unequal))
        .unwrap();
    add_grid_edges(&mut m, rows, cols, &potts);
    m
}

fn add_grid_edges(m: &mut GraphicalModel, rows: usize, cols: usize, fid: &FunctionId) {
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                m.add_factor(fid, &[v, v + 1]).unwrap();
            }
            if r + 1 < rows {
                m.add_factor(fid, &[v, v + cols]).unwrap();
            }
        }
    }
}

/// Grid with random dense unaries in `[0, 1)` and a shared truncated-linear
/// smoothness term, `MinSum`.
pub fn random_grid<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    labels: usize,
) -> GraphicalModel {
    let n = rows * cols;
    let mut m =
        GraphicalModel::new(LabelSpace::uniform(n, labels).unwrap(), Semiring::MinSum).unwrap();
    for v in 0..n {
        let values = (0..labels).map(|_| rng.random::<f64>()).collect();
        let id = m
            .add_function(FunctionEncoding::dense(vec![labels], values))
            .unwrap();
        m.add_factor(&id, &[v]).unwrap();
    }
    let smooth = m
        .add_function(FunctionEncoding::truncated_abs_diff(
            labels, labels, 0.25, 0.5,
        ))
        .unwrap();
    add_grid_edges(&mut m, rows, cols, &smooth);
    m
}

/// Random value valid in `semiring`'s domain.
pub fn random_value<R: Rng + ?Sized>(rng: &mut R, semiring: Semiring) -> Value {
    match semiring {
        Semiring::MinSum => rng.random_range(-1.0..2.0),
        Semiring::SumProd | Semiring::MaxProd => rng.random_range(0.05..2.0),
        Semiring::OrAnd => {
            if rng.random_bool(0.8) {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Random encoding of the given shape; Potts and truncated absolute
/// difference are only drawn for arity 2.
pub fn random_encoding<R: Rng + ?Sized>(
    rng: &mut R,
    semiring: Semiring,
    shape: &[usize],
) -> FunctionEncoding {
    let variants = if shape.len() == 2 { 4 } else { 2 };
    match rng.random_range(0..variants) {
        0 => {
            let len = shape.iter().product();
            FunctionEncoding::dense(
                shape.to_vec(),
                (0..len).map(|_| random_value(rng, semiring)).collect(),
            )
        }
        1 => {
            let default = random_value(rng, semiring);
            let k = rng.random_range(0..=3);
            let entries: Vec<_> = (0..k)
                .map(|_| {
                    let coords = shape.iter().map(|&n| rng.random_range(0..n)).collect();
                    (coords, random_value(rng, semiring))
                })
                .collect();
            FunctionEncoding::sparse(shape.to_vec(), default, entries)
        }
        2 => FunctionEncoding::potts(
            shape[0],
            shape[1],
            random_value(rng, semiring),
            random_value(rng, semiring),
        ),
        _ => {
            let (weight, truncation) = if semiring == Semiring::OrAnd {
                (rng.random_range(0..3) as f64, rng.random_range(0..2) as f64)
            } else {
                (rng.random_range(0.0..1.0), rng.random_range(0.0..2.0))
            };
            FunctionEncoding::truncated_abs_diff(shape[0], shape[1], weight, truncation)
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RandomModelConfig {
    pub max_variables: usize,
    pub max_labels: usize,
    pub max_arity: usize,
    /// Upper bound on factors per variable.
    pub factor_density: usize,
    /// Probability that a factor reuses an already registered function of the
    /// right shape.
    pub share_probability: f64,
}

impl Default for RandomModelConfig {
    fn default() -> Self {
        RandomModelConfig {
            max_variables: 8,
            max_labels: 4,
            max_arity: 3,
            factor_density: 2,
            share_probability: 0.3,
        }
    }
}

/// Random model with mixed encodings and shared functions.
pub fn random_model<R: Rng + ?Sized>(
    rng: &mut R,
    semiring: Semiring,
    config: &RandomModelConfig,
) -> GraphicalModel {
    let n = rng.random_range(1..=config.max_variables);
    let counts = (0..n)
        .map(|_| rng.random_range(1..=config.max_labels))
        .collect();
    let mut m = GraphicalModel::new(LabelSpace::new(counts).unwrap(), semiring).unwrap();
    let num_factors = rng.random_range(0..=config.factor_density * n);
    for _ in 0..num_factors {
        let arity = rng.random_range(1..=config.max_arity.min(n));
        let mut vars = sample(rng, n, arity).into_vec();
        vars.sort_unstable();
        let shape: Vec<usize> = vars.iter().map(|&v| m.num_labels(v)).collect();
        let reusable: Vec<usize> = (0..m.num_functions())
            .filter(|&i| m.function(i).unwrap().shape() == shape)
            .collect();
        let fid = if !reusable.is_empty() && rng.random_bool(config.share_probability) {
            m.function_id(reusable[rng.random_range(0..reusable.len())])
                .unwrap()
        } else {
            let enc = random_encoding(rng, semiring, &shape);
            m.add_function(enc).unwrap()
        };
        m.add_factor(&fid, &vars).unwrap();
    }
    m
}

/// Random tree-structured model: dense unaries on every variable and one
/// dense pairwise factor linking each variable `v > 0` to an earlier one.
pub fn random_tree<R: Rng + ?Sized>(
    rng: &mut R,
    semiring: Semiring,
    max_variables: usize,
    max_labels: usize,
) -> GraphicalModel {
    let n = rng.random_range(1..=max_variables);
    let counts = (0..n).map(|_| rng.random_range(1..=max_labels)).collect();
    let mut m = GraphicalModel::new(LabelSpace::new(counts).unwrap(), semiring).unwrap();
    for v in 0..n {
        let k = m.num_labels(v);
        let values = (0..k).map(|_| random_value(rng, semiring)).collect();
        let id = m
            .add_function(FunctionEncoding::dense(vec![k], values))
            .unwrap();
        m.add_factor(&id, &[v]).unwrap();
    }
    for v in 1..n {
        let parent = rng.random_range(0..v);
        let shape = vec![m.num_labels(parent), m.num_labels(v)];
        let len = shape[0] * shape[1];
        let values = (0..len).map(|_| random_value(rng, semiring)).collect();
        let id = m
            .add_function(FunctionEncoding::dense(shape, values))
            .unwrap();
        m.add_factor(&id, &[parent, v]).unwrap();
    }
    m
}

/// Random binary pairwise `MinSum` model whose pairwise tables satisfy
/// `E(0,0) + E(1,1) <= E(0,1) + E(1,0)`.
pub fn random_submodular_binary<R: Rng + ?Sized>(
    rng: &mut R,
    max_variables: usize,
) -> GraphicalModel {
    let n = rng.random_range(2..=max_variables.max(2));
    let mut m = GraphicalModel::new(LabelSpace::uniform(n, 2).unwrap(), Semiring::MinSum).unwrap();
    for v in 0..n {
        let id = m
            .add_function(FunctionEncoding::dense(
                vec![2],
                vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            ))
            .unwrap();
        m.add_factor(&id, &[v]).unwrap();
    }
    for u in 0..n {
        for v in u + 1..n {
            if !rng.random_bool(0.4) {
                continue;
            }
            let e00 = rng.random_range(-1.0..1.0);
            let e11 = rng.random_range(-1.0..1.0);
            let e01 = rng.random_range(-1.0..1.0);
            // e10 chosen so that the submodularity slack is nonnegative
            let e10 = e00 + e11 - e01 + rng.random_range(0.0..1.5);
            let id = m
                .add_function(FunctionEncoding::dense(
                    vec![2, 2],
                    vec![e00, e01, e10, e11],
                ))
                .unwrap();
            m.add_factor(&id, &[u, v]).unwrap();
        }
    }
    m
}

/// Random `MinSum` model with dense unaries and metric pairwise terms
/// (Potts or truncated absolute difference), suitable for graph-cut moves.
pub fn random_metric_model<R: Rng + ?Sized>(
    rng: &mut R,
    max_variables: usize,
    max_labels: usize,
) -> GraphicalModel {
    let n = rng.random_range(2..=max_variables.max(2));
    let labels = rng.random_range(2..=max_labels.max(2));
    let mut m =
        GraphicalModel::new(LabelSpace::uniform(n, labels).unwrap(), Semiring::MinSum).unwrap();
    for v in 0..n {
        let values = (0..labels).map(|_| rng.random_range(0.0..2.0)).collect();
        let id = m
            .add_function(FunctionEncoding::dense(vec![labels], values))
            .unwrap();
        m.add_factor(&id, &[v]).unwrap();
    }
    let potts = m
        .add_function(FunctionEncoding::potts(
            labels,
            labels,
            0.0,
            rng.random_range(0.1..1.0),
        ))
        .unwrap();
    let tad = m
        .add_function(FunctionEncoding::truncated_abs_diff(
            labels,
            labels,
            rng.random_range(0.1..1.0),
            rng.random_range(0.5..2.0),
        ))
        .unwrap();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(0.35) {
                let fid = if rng.random_bool(0.5) { &potts } else { &tad };
                m.add_factor(fid, &[u, v]).unwrap();
            }
        }
    }
    m
}

/// Three binary variables on a cycle with one strong and two weak Potts
/// couplings. Unaries reward label 1 on variables 0 and 1 by `pull`, so from
/// `[0, 0, 0]` no single flip improves (when `pull < strong + weak`) but
/// flipping `{0, 1}` together does (when `pull > weak`).
pub fn frustrated_cycle(strong: Value, weak: Value, pull: Value) -> GraphicalModel {
    let mut m = GraphicalModel::new(LabelSpace::uniform(3, 2).unwrap(), Semiring::MinSum).unwrap();
    let unary = m
        .add_function(FunctionEncoding::dense(vec![2], vec![pull, 0.0]))
        .unwrap();
    let strong = m
        .add_function(FunctionEncoding::potts(2, 2, 0.0, strong))
        .unwrap();
    let weak = m
        .add_function(FunctionEncoding::potts(2, 2, 0.0, weak))
        .unwrap();
    m.add_factor(&unary, &[0]).unwrap();
    m.add_factor(&unary, &[1]).unwrap();
    m.add_factor(&strong, &[0, 1]).unwrap();
    m.add_factor(&weak, &[0, 2]).unwrap();
    m.add_factor(&weak, &[1, 2]).unwrap();
    m
}
