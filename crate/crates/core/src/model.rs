//! Factor graph, function registry with shared identifiers, and evaluation of
//! the induced function.
//!
//! Variables are `0..n`, labels of variable `v` are `0..counts[v]`. Functions
//! are registered once and referenced by any number of factors through their
//! [`FunctionId`]; a factor lists its variables in strictly ascending order,
//! which fixes the argument positions of the function.

use std::collections::BTreeMap;

use smallvec::SmallVec;

use crate::algebra::{Semiring, Value};
use crate::error::{Error, Result};

/// One label index per variable.
pub type Labeling = Vec<usize>;

pub(crate) type Coords = SmallVec<[usize; 4]>;

/// Number of labels of each variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSpace {
    counts: Vec<usize>,
}

impl LabelSpace {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if let Some(v) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidArgument(format!(
                "variable {v} has no labels"
            )));
        }
        Ok(LabelSpace { counts })
    }

    /// `n` variables with `labels` labels each.
    pub fn uniform(n: usize, labels: usize) -> Result<Self> {
        Self::new(vec![labels; n])
    }

    pub fn num_variables(&self) -> usize {
        self.counts.len()
    }

    pub fn num_labels(&self, v: usize) -> usize {
        self.counts[v]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Size of the full label space, saturating at `u128::MAX`.
    pub fn num_states(&self) -> u128 {
        self.counts
            .iter()
            .try_fold(1u128, |acc, &c| acc.checked_mul(c as u128))
            .unwrap_or(u128::MAX)
    }
}

/// Encodings of a function `φ_i`. All four share the evaluation contract of
/// [`FunctionEncoding::value`].
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionEncoding {
    /// Dense value table, row-major (last coordinate fastest).
    ExplicitDense {
        shape: Vec<usize>,
        values: Vec<Value>,
    },
    /// `value_equal` on the diagonal, `value_unequal` elsewhere.
    Potts {
        n1: usize,
        n2: usize,
        value_equal: Value,
        value_unequal: Value,
    },
    /// `min(truncation, weight * |x - y|)`.
    TruncatedAbsDiff {
        n1: usize,
        n2: usize,
        weight: Value,
        truncation: Value,
    },
    /// Default value plus explicit exceptions. Entries never equal `default`.
    Sparse {
        shape: Vec<usize>,
        default: Value,
        entries: BTreeMap<Vec<usize>, Value>,
    },
}

impl FunctionEncoding {
    pub fn dense(shape: Vec<usize>, values: Vec<Value>) -> Self {
        FunctionEncoding::ExplicitDense { shape, values }
    }

    pub fn potts(n1: usize, n2: usize, value_equal: Value, value_unequal: Value) -> Self {
        FunctionEncoding::Potts {
            n1,
            n2,
            value_equal,
            value_unequal,
        }
    }

    pub fn truncated_abs_diff(n1: usize, n2: usize, weight: Value, truncation: Value) -> Self {
        FunctionEncoding::TruncatedAbsDiff {
            n1,
            n2,
            weight,
            truncation,
        }
    }

    pub fn sparse(
        shape: Vec<usize>,
        default: Value,
        entries: impl IntoIterator<Item = (Vec<usize>, Value)>,
    ) -> Self {
        FunctionEncoding::Sparse {
            shape,
            default,
            entries: entries.into_iter().collect(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FunctionEncoding::ExplicitDense { .. } => "explicit",
            FunctionEncoding::Potts { .. } => "potts",
            FunctionEncoding::TruncatedAbsDiff { .. } => "truncated-abs-diff",
            FunctionEncoding::Sparse { .. } => "sparse",
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        match self {
            FunctionEncoding::ExplicitDense { shape, .. }
            | FunctionEncoding::Sparse { shape, .. } => shape.clone(),
            FunctionEncoding::Potts { n1, n2, .. }
            | FunctionEncoding::TruncatedAbsDiff { n1, n2, .. } => vec![*n1, *n2],
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            FunctionEncoding::ExplicitDense { shape, .. }
            | FunctionEncoding::Sparse { shape, .. } => shape.len(),
            _ => 2,
        }
    }

    /// Number of scalars held by the encoding.
    pub fn stored_values(&self) -> usize {
        match self {
            FunctionEncoding::ExplicitDense { values, .. } => values.len(),
            FunctionEncoding::Potts { .. } | FunctionEncoding::TruncatedAbsDiff { .. } => 2,
            FunctionEncoding::Sparse { entries, .. } => 1 + entries.len(),
        }
    }

    /// Number of entries of the equivalent dense table.
    pub fn table_size(&self) -> usize {
        self.shape().iter().product()
    }

    /// Evaluates at `coords`, checking arity and ranges.
    pub fn eval(&self, coords: &[usize]) -> Result<Value> {
        let shape = self.shape();
        if coords.len() != shape.len() {
            return Err(Error::Index(format!(
                "expected {} coordinates, got {}",
                shape.len(),
                coords.len()
            )));
        }
        if let Some(j) = (0..shape.len()).find(|&j| coords[j] >= shape[j]) {
            return Err(Error::Index(format!(
                "coordinate {j} is {} but the function has {} labels there",
                coords[j], shape[j]
            )));
        }
        Ok(self.value(coords))
    }

    /// Evaluates at in-range `coords`.
    #[inline]
    pub fn value(&self, coords: &[usize]) -> Value {
        match self {
            FunctionEncoding::ExplicitDense { shape, values } => {
                values[dense_offset(shape, coords)]
            }
            FunctionEncoding::Potts {
                value_equal,
                value_unequal,
                ..
            } => {
                if coords[0] == coords[1] {
                    *value_equal
                } else {
                    *value_unequal
                }
            }
            FunctionEncoding::TruncatedAbsDiff {
                weight, truncation, ..
            } => {
                let d = coords[0].abs_diff(coords[1]) as f64;
                truncation.min(weight * d)
            }
            FunctionEncoding::Sparse {
                default, entries, ..
            } => entries.get(coords).copied().unwrap_or(*default),
        }
    }

    /// Equivalent dense table.
    pub fn to_dense(&self) -> FunctionEncoding {
        let shape = self.shape();
        let mut values = Vec::with_capacity(self.table_size());
        for_each_tuple(&shape, |c| values.push(self.value(c)));
        FunctionEncoding::ExplicitDense { shape, values }
    }

    /// Applies `f` to every stored scalar, preserving the encoding where the
    /// result stays representable.
    fn map_values(&self, f: impl Fn(Value) -> Value) -> FunctionEncoding {
        match self {
            FunctionEncoding::ExplicitDense { shape, values } => FunctionEncoding::ExplicitDense {
                shape: shape.clone(),
                values: values.iter().map(|&v| f(v)).collect(),
            },
            FunctionEncoding::Potts {
                n1,
                n2,
                value_equal,
                value_unequal,
            } => FunctionEncoding::Potts {
                n1: *n1,
                n2: *n2,
                value_equal: f(*value_equal),
                value_unequal: f(*value_unequal),
            },
            FunctionEncoding::TruncatedAbsDiff { .. } => self.to_dense().map_values(f),
            FunctionEncoding::Sparse {
                shape,
                default,
                entries,
            } => FunctionEncoding::Sparse {
                shape: shape.clone(),
                default: f(*default),
                entries: entries.iter().map(|(k, &v)| (k.clone(), f(v))).collect(),
            },
        }
    }

    /// Checks well-formedness and semi-ring validity; drops sparse entries
    /// equal to the default.
    fn normalize(mut self, semiring: Semiring) -> Result<Self> {
        let shape = self.shape();
        if shape.is_empty() {
            return Err(Error::InvalidArgument(
                "function arity must be positive".into(),
            ));
        }
        if let Some(j) = shape.iter().position(|&n| n == 0) {
            return Err(Error::InvalidArgument(format!(
                "dimension {j} of the function shape is zero"
            )));
        }
        match &mut self {
            FunctionEncoding::ExplicitDense { shape, values } => {
                let expected: usize = shape.iter().product();
                if values.len() != expected {
                    return Err(Error::InvalidArgument(format!(
                        "dense table of shape {shape:?} needs {expected} values, got {}",
                        values.len()
                    )));
                }
                for &v in values.iter() {
                    semiring.validate(v)?;
                }
            }
            FunctionEncoding::Potts {
                value_equal,
                value_unequal,
                ..
            } => {
                semiring.validate(*value_equal)?;
                semiring.validate(*value_unequal)?;
            }
            FunctionEncoding::TruncatedAbsDiff {
                n1,
                n2,
                weight,
                truncation,
            } => {
                for p in [*weight, *truncation] {
                    if p.is_nan() || p < 0.0 {
                        return Err(Error::InvalidArgument(format!(
                            "truncated absolute difference parameters must be nonnegative, got {p}"
                        )));
                    }
                }
                // every value the function can take
                for d in 0..(*n1).max(*n2) {
                    semiring.validate(truncation.min(*weight * d as f64))?;
                }
            }
            FunctionEncoding::Sparse {
                shape,
                default,
                entries,
            } => {
                semiring.validate(*default)?;
                for (coords, &v) in entries.iter() {
                    if coords.len() != shape.len()
                        || coords.iter().zip(shape.iter()).any(|(c, n)| c >= n)
                    {
                        return Err(Error::InvalidArgument(format!(
                            "sparse entry {coords:?} lies outside shape {shape:?}"
                        )));
                    }
                    semiring.validate(v)?;
                }
                let d = *default;
                entries.retain(|_, v| *v != d);
            }
        }
        Ok(self)
    }
}

#[inline]
pub(crate) fn dense_offset(shape: &[usize], coords: &[usize]) -> usize {
    coords
        .iter()
        .zip(shape)
        .fold(0, |acc, (&c, &n)| acc * n + c)
}

/// Calls `f` on every tuple of the product space `shape`, last coordinate
/// fastest.
pub fn for_each_tuple(shape: &[usize], mut f: impl FnMut(&[usize])) {
    if shape.contains(&0) {
        return;
    }
    let mut tuple = vec![0usize; shape.len()];
    loop {
        f(&tuple);
        let mut j = shape.len();
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            tuple[j] += 1;
            if tuple[j] < shape[j] {
                break;
            }
            tuple[j] = 0;
        }
    }
}

/// Handle to a registered function: its index in the registry and its
/// label-count signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionId {
    index: usize,
    shape: Vec<usize>,
}

impl FunctionId {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn arity(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    function: FunctionId,
    variables: Vec<usize>,
}

impl Factor {
    pub fn function(&self) -> &FunctionId {
        &self.function
    }

    /// Strictly ascending variable indices.
    pub fn variables(&self) -> &[usize] {
        &self.variables
    }

    pub fn arity(&self) -> usize {
        self.variables.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StorageStats {
    pub num_variables: usize,
    pub num_factors: usize,
    pub num_functions: usize,
    /// Scalars held by all registered encodings.
    pub num_stored_values: usize,
    /// Scalars a model without sharing and with dense tables only would hold:
    /// the sum over factors of the product of their shapes.
    pub dense_equivalent_values: usize,
}

impl StorageStats {
    /// `dense_equivalent_values / num_stored_values`, 1 for an empty registry.
    pub fn sharing_ratio(&self) -> f64 {
        if self.num_stored_values == 0 {
            1.0
        } else {
            self.dense_equivalent_values as f64 / self.num_stored_values as f64
        }
    }
}

/// A complete discrete graphical model.
#[derive(Debug, Clone)]
pub struct GraphicalModel {
    space: LabelSpace,
    semiring: Semiring,
    functions: Vec<FunctionEncoding>,
    factors: Vec<Factor>,
    adjacency: Vec<Vec<usize>>,
    revision: u64,
}

impl GraphicalModel {
    pub fn new(space: LabelSpace, semiring: Semiring) -> Result<Self> {
        if space.is_empty() {
            return Err(Error::InvalidArgument(
                "label space must have at least one variable".into(),
            ));
        }
        Ok(Self::with_space(space, semiring))
    }

    /// The model over zero variables. Its only labeling is `[]`.
    pub fn empty(semiring: Semiring) -> Self {
        Self::with_space(LabelSpace { counts: Vec::new() }, semiring)
    }

    fn with_space(space: LabelSpace, semiring: Semiring) -> Self {
        let adjacency = vec![Vec::new(); space.num_variables()];
        GraphicalModel {
            space,
            semiring,
            functions: Vec::new(),
            factors: Vec::new(),
            adjacency,
            revision: 0,
        }
    }

    pub fn space(&self) -> &LabelSpace {
        &self.space
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn num_variables(&self) -> usize {
        self.space.num_variables()
    }

    pub fn num_labels(&self, v: usize) -> usize {
        self.space.num_labels(v)
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn num_functions(&self) -> usize {
        self.functions.len()
    }

    pub fn functions(&self) -> &[FunctionEncoding] {
        &self.functions
    }

    pub fn function(&self, index: usize) -> Option<&FunctionEncoding> {
        self.functions.get(index)
    }

    /// Identifier of the registered function at `index`.
    pub fn function_id(&self, index: usize) -> Option<FunctionId> {
        self.functions.get(index).map(|f| FunctionId {
            index,
            shape: f.shape(),
        })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, index: usize) -> &Factor {
        &self.factors[index]
    }

    /// Indices of the factors depending on `v`, ascending.
    pub fn factors_of(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn max_arity(&self) -> usize {
        self.factors.iter().map(Factor::arity).max().unwrap_or(0)
    }

    /// Incremented by every mutation.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn add_function(&mut self, function: FunctionEncoding) -> Result<FunctionId> {
        let function = function.normalize(self.semiring)?;
        let id = FunctionId {
            index: self.functions.len(),
            shape: function.shape(),
        };
        self.functions.push(function);
        self.revision += 1;
        Ok(id)
    }

    /// Connects the function `fid` to `variables` (strictly ascending) and
    /// returns the new factor's index.
    pub fn add_factor(&mut self, fid: &FunctionId, variables: &[usize]) -> Result<usize> {
        match self.functions.get(fid.index) {
            Some(f) if f.shape() == fid.shape => {}
            _ => return Err(Error::NotFound(fid.index)),
        }
        if let Some(&v) = variables.iter().find(|&&v| v >= self.num_variables()) {
            return Err(Error::Index(format!(
                "variable {v} does not exist in a model with {} variables",
                self.num_variables()
            )));
        }
        if variables.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "factor variables {variables:?} are not strictly ascending"
            )));
        }
        if variables.len() != fid.arity() {
            return Err(Error::ShapeMismatch(format!(
                "function {} has arity {} but {} variables were given",
                fid.index,
                fid.arity(),
                variables.len()
            )));
        }
        for (j, (&v, &n)) in variables.iter().zip(&fid.shape).enumerate() {
            if self.num_labels(v) != n {
                return Err(Error::ShapeMismatch(format!(
                    "argument {j} of function {} has {n} labels but variable {v} has {}",
                    fid.index,
                    self.num_labels(v)
                )));
            }
        }
        let index = self.factors.len();
        for &v in variables {
            self.adjacency[v].push(index);
        }
        self.factors.push(Factor {
            function: fid.clone(),
            variables: variables.to_vec(),
        });
        self.revision += 1;
        Ok(index)
    }

    pub fn check_labeling(&self, labeling: &[usize]) -> Result<()> {
        if labeling.len() != self.num_variables() {
            return Err(Error::Index(format!(
                "labeling has {} entries for {} variables",
                labeling.len(),
                self.num_variables()
            )));
        }
        if let Some(v) = (0..labeling.len()).find(|&v| labeling[v] >= self.num_labels(v)) {
            return Err(Error::Index(format!(
                "label {} of variable {v} is out of range (variable has {} labels)",
                labeling[v],
                self.num_labels(v)
            )));
        }
        Ok(())
    }

    /// Value of the induced function at `labeling`: the `⊙`-product of all
    /// factor values.
    pub fn evaluate(&self, labeling: &[usize]) -> Result<Value> {
        self.check_labeling(labeling)?;
        Ok(self.evaluate_unchecked(labeling))
    }

    pub(crate) fn evaluate_unchecked(&self, labeling: &[usize]) -> Value {
        let s = self.semiring;
        (0..self.factors.len()).fold(s.one(), |acc, f| s.mul(acc, self.factor_value(f, labeling)))
    }

    /// Value of factor `f` under a full labeling.
    #[inline]
    pub fn factor_value(&self, f: usize, labeling: &[usize]) -> Value {
        self.factor_value_with(f, |v| labeling[v])
    }

    /// Value of factor `f` with each variable's label supplied by `label_of`.
    #[inline]
    pub fn factor_value_with(&self, f: usize, label_of: impl Fn(usize) -> usize) -> Value {
        let factor = &self.factors[f];
        let coords: Coords = factor.variables.iter().map(|&v| label_of(v)).collect();
        self.functions[factor.function.index].value(&coords)
    }

    /// `⊙` of the factors adjacent to `v`, with `v` set to `label` and all other
    /// variables taken from `labeling`.
    pub fn local_value(&self, v: usize, label: usize, labeling: &[usize]) -> Value {
        let s = self.semiring;
        self.adjacency[v].iter().fold(s.one(), |acc, &f| {
            s.mul(
                acc,
                self.factor_value_with(f, |u| if u == v { label } else { labeling[u] }),
            )
        })
    }

    /// For each variable, the sorted list of other variables sharing a factor
    /// with it.
    pub fn variable_neighbors(&self) -> Vec<Vec<usize>> {
        let mut neighbors = vec![Vec::new(); self.num_variables()];
        for factor in &self.factors {
            for &u in &factor.variables {
                for &w in &factor.variables {
                    if u != w {
                        neighbors[u].push(w);
                    }
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        neighbors
    }

    pub fn storage_stats(&self) -> StorageStats {
        StorageStats {
            num_variables: self.num_variables(),
            num_factors: self.factors.len(),
            num_functions: self.functions.len(),
            num_stored_values: self
                .functions
                .iter()
                .map(FunctionEncoding::stored_values)
                .sum(),
            dense_equivalent_values: self
                .factors
                .iter()
                .map(|f| f.function.shape.iter().product::<usize>())
                .sum(),
        }
    }

    /// Number of factors referencing each registered function.
    pub fn function_usage(&self) -> Vec<usize> {
        let mut usage = vec![0; self.functions.len()];
        for f in &self.factors {
            usage[f.function.index] += 1;
        }
        usage
    }

    /// The `SumProd` model with potentials `exp(-energy)` of a `MinSum` model.
    /// Function sharing and factor order are preserved; truncated absolute
    /// difference functions become dense tables.
    pub fn boltzmann(&self) -> Result<GraphicalModel> {
        if self.semiring != Semiring::MinSum {
            return Err(Error::InvalidArgument(format!(
                "the Boltzmann transform maps minsum models, this model is {}",
                self.semiring
            )));
        }
        let mut out = GraphicalModel::with_space(self.space.clone(), Semiring::SumProd);
        let mut ids = Vec::with_capacity(self.functions.len());
        for f in &self.functions {
            ids.push(out.add_function(f.map_values(|e| (-e).exp()))?);
        }
        for factor in &self.factors {
            out.add_factor(&ids[factor.function.index], &factor.variables)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn new_model_evaluates_to_one() {
        let m = GraphicalModel::new(LabelSpace::uniform(2, 2).unwrap(), Semiring::MinSum).unwrap();
        assert_eq!(m.evaluate(&[0, 0]).unwrap(), 0.0);
        let m = GraphicalModel::new(LabelSpace::uniform(3, 5).unwrap(), Semiring::SumProd).unwrap();
        assert_eq!(m.evaluate(&[4, 2, 0]).unwrap(), 1.0);
    }

    #[test]
    fn empty_space_is_rejected() {
        let err = GraphicalModel::new(LabelSpace::new(vec![]).unwrap(), Semiring::MinSum);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
        assert!(LabelSpace::new(vec![2, 0]).is_err());
    }

    #[test]
    fn add_function_examples() {
        let mut m =
            GraphicalModel::new(LabelSpace::uniform(2, 4).unwrap(), Semiring::MinSum).unwrap();
        let potts = m
            .add_function(FunctionEncoding::potts(4, 4, 0.0, 0.3))
            .unwrap();
        assert_eq!(potts.arity(), 2);
        let unary = m
            .add_function(FunctionEncoding::dense(vec![2], vec![0.2, 0.8]))
            .unwrap();
        assert_eq!(unary.arity(), 1);
        assert_eq!(unary.index(), 1);
        let bad = m.add_function(FunctionEncoding::dense(vec![2, 2], vec![0.0]));
        assert!(matches!(bad, Err(Error::InvalidArgument(_))));
        assert_eq!(m.num_functions(), 2);
    }

    #[test]
    fn add_function_checks_domain() {
        let mut m =
            GraphicalModel::new(LabelSpace::uniform(2, 2).unwrap(), Semiring::SumProd).unwrap();
        assert!(m
            .add_function(FunctionEncoding::potts(2, 2, -1.0, 0.0))
            .is_err());
        let mut m =
            GraphicalModel::new(LabelSpace::uniform(2, 3).unwrap(), Semiring::OrAnd).unwrap();
        assert!(m
            .add_function(FunctionEncoding::truncated_abs_diff(3, 3, 2.0, 1.0))
            .is_ok());
        assert!(m
            .add_function(FunctionEncoding::truncated_abs_diff(3, 3, 0.5, 1.0))
            .is_err());
        assert!(m
            .add_function(FunctionEncoding::sparse(vec![2], 0.0, [(vec![2], 1.0)]))
            .is_err());
    }

    #[test]
    fn sparse_drops_default_entries() {
        let mut m =
            GraphicalModel::new(LabelSpace::uniform(2, 3).unwrap(), Semiring::MinSum).unwrap();
        let id = m
            .add_function(FunctionEncoding::sparse(
                vec![3, 3],
                0.0,
                [(vec![1, 2], 5.0), (vec![0, 0], 0.0)],
            ))
            .unwrap();
        assert_eq!(m.function(id.index()).unwrap().stored_values(), 2);
    }

    #[test]
    fn add_factor_validation() {
        let mut m = fixtures::model_a();
        let pair = m.function_id(2).unwrap();
        assert!(matches!(
            m.add_factor(&pair, &[1, 0]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            m.add_factor(&pair, &[0, 0]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(m.add_factor(&pair, &[0, 7]), Err(Error::Index(_))));

        let big = m
            .add_function(FunctionEncoding::potts(3, 3, 0.0, 1.0))
            .unwrap();
        assert!(matches!(
            m.add_factor(&big, &[0, 1]),
            Err(Error::ShapeMismatch(_))
        ));
        let unary = m.function_id(0).unwrap();
        assert!(matches!(
            m.add_factor(&unary, &[0, 1]),
            Err(Error::ShapeMismatch(_))
        ));

        let mut other = fixtures::model_a();
        let foreign = other
            .add_function(FunctionEncoding::potts(2, 2, 1.0, 0.0))
            .unwrap();
        let foreign = FunctionId {
            index: foreign.index() + 10,
            ..foreign
        };
        assert!(matches!(
            m.add_factor(&foreign, &[0, 1]),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn shared_pairwise_function() {
        let m = fixtures::shared_chain(Semiring::SumProd, 3, |_, _| 1.0);
        assert_eq!(m.factor(3).function(), m.factor(4).function());
        assert_eq!(m.num_functions(), 4);
        for_each_tuple(&[3, 3, 3], |x| assert_eq!(m.evaluate(x).unwrap(), 1.0));
    }

    #[test]
    fn eval_function_examples() {
        let potts = FunctionEncoding::potts(2, 2, 0.0, 0.3);
        assert_eq!(potts.eval(&[1, 1]).unwrap(), 0.0);
        assert_eq!(potts.eval(&[0, 1]).unwrap(), 0.3);
        let tad = FunctionEncoding::truncated_abs_diff(6, 6, 1.0, 2.0);
        assert_eq!(tad.eval(&[0, 5]).unwrap(), 2.0);
        assert_eq!(tad.eval(&[2, 3]).unwrap(), 1.0);
        let sparse = FunctionEncoding::sparse(vec![3, 3], 0.0, [(vec![1, 2], 5.0)]);
        assert_eq!(sparse.eval(&[0, 0]).unwrap(), 0.0);
        assert_eq!(sparse.eval(&[1, 2]).unwrap(), 5.0);
        assert!(matches!(sparse.eval(&[3, 0]), Err(Error::Index(_))));
        assert!(matches!(sparse.eval(&[0]), Err(Error::Index(_))));
    }

    #[test]
    fn dense_is_row_major() {
        let f = FunctionEncoding::dense(vec![2, 3], (0..6).map(f64::from).collect());
        assert_eq!(f.value(&[0, 2]), 2.0);
        assert_eq!(f.value(&[1, 0]), 3.0);
    }

    #[test]
    fn evaluate_model_a() {
        let m = fixtures::model_a();
        assert_eq!(m.evaluate(&[0, 1]).unwrap(), 0.2 + 0.1 + 0.3);
        assert!((m.evaluate(&[0, 1]).unwrap() - 0.6).abs() < 1e-15);
        assert!(matches!(m.evaluate(&[0, 2]), Err(Error::Index(_))));
        assert!(matches!(m.evaluate(&[0]), Err(Error::Index(_))));
    }

    #[test]
    fn empty_model_evaluates_to_identity() {
        for s in Semiring::ALL {
            assert_eq!(GraphicalModel::empty(s).evaluate(&[]).unwrap(), s.one());
        }
    }

    #[test]
    fn storage_stats_examples() {
        let chain = fixtures::shared_chain(Semiring::MinSum, 2, |_, _| 0.0);
        let stats = chain.storage_stats();
        assert_eq!(
            (stats.num_variables, stats.num_factors, stats.num_functions),
            (3, 5, 4)
        );
        assert_eq!(stats.num_stored_values, 2 + 2 + 2 + 4);

        let chain = fixtures::potts_chain(101, 3, 0.0, 1.0);
        let stats = chain.storage_stats();
        assert_eq!(stats.num_factors, 100);
        assert_eq!(stats.num_functions, 1);
        assert_eq!(stats.num_stored_values, 2);
        assert_eq!(stats.dense_equivalent_values, 100 * 9);

        let empty = GraphicalModel::empty(Semiring::MinSum).storage_stats();
        assert_eq!(empty.num_stored_values, 0);
        assert_eq!(empty.sharing_ratio(), 1.0);
    }

    #[test]
    fn revision_counts_mutations() {
        let mut m =
            GraphicalModel::new(LabelSpace::uniform(2, 2).unwrap(), Semiring::MinSum).unwrap();
        assert_eq!(m.revision(), 0);
        let id = m
            .add_function(FunctionEncoding::potts(2, 2, 0.0, 1.0))
            .unwrap();
        m.add_factor(&id, &[0, 1]).unwrap();
        assert_eq!(m.revision(), 2);
        assert!(m.add_factor(&id, &[1, 0]).is_err());
        assert_eq!(m.revision(), 2);
    }

    #[test]
    fn boltzmann_preserves_structure() {
        let m = fixtures::model_a();
        let p = m.boltzmann().unwrap();
        assert_eq!(p.semiring(), Semiring::SumProd);
        assert_eq!(p.storage_stats(), m.storage_stats());
        for_each_tuple(&[2, 2], |x| {
            let e = m.evaluate(x).unwrap();
            let w = p.evaluate(x).unwrap();
            assert!((w - (-e).exp()).abs() < 1e-12);
        });
        assert!(p.boltzmann().is_err());
    }

    #[test]
    fn variable_neighbors_follow_factors() {
        let m = fixtures::shared_chain(Semiring::MinSum, 2, |_, _| 0.0);
        assert_eq!(m.variable_neighbors(), vec![vec![1], vec![0, 2], vec![1]]);
    }

    #[test]
    fn for_each_tuple_order() {
        let mut seen = Vec::new();
        for_each_tuple(&[2, 3], |t| seen.push(t.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![0, 1]);
        assert_eq!(seen[3], vec![1, 0]);
        let mut count = 0;
        for_each_tuple(&[], |t| {
            assert!(t.is_empty());
            count += 1
        });
        assert_eq!(count, 1);
    }
}
