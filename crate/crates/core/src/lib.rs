//! Discrete graphical models over commutative semi-rings.
//!
//! A [`GraphicalModel`] holds a label space, a registry of shared factor
//! functions and a list of factors. Inference engines borrow a model
//! immutably and implement the common [`Inference`] trait, so they can be
//! swapped without touching the model:
//!
//! ```
//! use factorgm::{fixtures, Icm, Inference, SearchParameters};
//!
//! let model = fixtures::model_a();
//! let state = Icm::new(&model, SearchParameters::default()).unwrap().infer().unwrap();
//! assert_eq!(state.arg, Some(vec![0, 1]));
//! ```

pub mod algebra;
pub mod error;
pub mod fixtures;
pub mod graph_cut;
pub mod io;
pub mod local_search;
pub mod message_passing;
pub mod model;
pub mod oracle;
pub mod runtime;
pub mod sampling;

pub use algebra::{Semiring, Value};
pub use error::{Error, Result};
pub use graph_cut::{AlphaBetaSwap, AlphaExpansion, FlowNetwork, MoveParameters, NonSubmodular};
pub use io::ModelFile;
pub use local_search::{Icm, LazyFlipper, SearchParameters};
pub use message_passing::{BeliefPropagation, BpParameters};
pub use model::{
    Factor, FunctionEncoding, FunctionId, GraphicalModel, LabelSpace, Labeling, StorageStats,
};
pub use oracle::{Oracle, OracleResult};
pub use runtime::{
    Algorithm, Control, Inference, InferenceState, SilentVisitor, Termination, TimingVisitor,
    VerboseVisitor, VisitContext, Visitor,
};
pub use sampling::{Gibbs, GibbsParameters};
