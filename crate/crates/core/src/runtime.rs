//! The contract shared by all inference engines: `infer` with an optional
//! visitor, the result bundle, and the algorithm/semi-ring compatibility
//! matrix.
//!
//! Visitors are called at algorithm-defined step boundaries:
//!
//! | algorithm     | one visit per              |
//! |---------------|----------------------------|
//! | oracle        | completed enumeration      |
//! | bp            | sweep                      |
//! | icm           | pass over all variables    |
//! | lazyflipper   | accepted move              |
//! | gibbs         | 1000 sampling steps        |
//! | alphaexp      | expansion move             |
//! | abswap        | swap move                  |

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::algebra::{Semiring, Value};
use crate::error::{Error, Result};
use crate::io::format_real;
use crate::model::Labeling;

/// Smallest decrease of a move-making objective that counts as an
/// improvement.
pub const IMPROVEMENT_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Oracle,
    BeliefPropagation,
    Icm,
    LazyFlipper,
    Gibbs,
    AlphaExpansion,
    AlphaBetaSwap,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Oracle,
        Algorithm::BeliefPropagation,
        Algorithm::Icm,
        Algorithm::LazyFlipper,
        Algorithm::Gibbs,
        Algorithm::AlphaExpansion,
        Algorithm::AlphaBetaSwap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Oracle => "oracle",
            Algorithm::BeliefPropagation => "bp",
            Algorithm::Icm => "icm",
            Algorithm::LazyFlipper => "lazyflipper",
            Algorithm::Gibbs => "gibbs",
            Algorithm::AlphaExpansion => "alphaexp",
            Algorithm::AlphaBetaSwap => "abswap",
        }
    }

    pub fn supports(self, semiring: Semiring) -> bool {
        match self {
            Algorithm::Oracle => true,
            Algorithm::BeliefPropagation => semiring != Semiring::OrAnd,
            Algorithm::Gibbs => semiring == Semiring::SumProd,
            Algorithm::Icm
            | Algorithm::LazyFlipper
            | Algorithm::AlphaExpansion
            | Algorithm::AlphaBetaSwap => semiring == Semiring::MinSum,
        }
    }

    pub fn check(self, semiring: Semiring) -> Result<()> {
        if self.supports(semiring) {
            Ok(())
        } else {
            Err(Error::UnsupportedCombination {
                algorithm: self.name(),
                semiring,
            })
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    Converged,
    MaxIterations,
    FixedPoint,
    VisitorStop,
    Error,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
            Termination::FixedPoint => "fixed_point",
            Termination::VisitorStop => "visitor_stop",
            Termination::Error => "error",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of an inference run.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceState {
    pub arg: Option<Labeling>,
    pub value: Value,
    /// Certified bound on the accumulated value, when the algorithm has one.
    pub bound: Option<Value>,
    pub termination: Termination,
    /// Number of visitor steps performed.
    pub step_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Read-only view handed to visitor callbacks.
#[derive(Debug, Clone, Copy)]
pub struct VisitContext {
    pub algorithm: &'static str,
    pub step: usize,
    pub value: Value,
    pub bound: Option<Value>,
    pub elapsed: Duration,
    /// Set only for `end`.
    pub termination: Option<Termination>,
}

/// Monitors a running algorithm. `begin` and `end` are called exactly once
/// per run; `visit` may stop the run.
pub trait Visitor {
    fn begin(&mut self, _ctx: &VisitContext) {}

    fn visit(&mut self, _ctx: &VisitContext) -> Control {
        Control::Continue
    }

    fn end(&mut self, _ctx: &VisitContext) {}
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SilentVisitor;

impl Visitor for SilentVisitor {}

/// Writes `step=<n> value=<v> bound=<b|na> ms=<t>` per visit, framed by
/// `begin` / `end` banners.
pub struct VerboseVisitor<W: Write> {
    out: W,
}

impl<W: Write> VerboseVisitor<W> {
    pub fn new(out: W) -> Self {
        VerboseVisitor { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

pub fn format_progress(ctx: &VisitContext) -> String {
    let bound = ctx.bound.map_or_else(|| "na".to_string(), format_real);
    format!(
        "step={} value={} bound={} ms={}",
        ctx.step,
        format_real(ctx.value),
        bound,
        ctx.elapsed.as_millis()
    )
}

impl<W: Write> Visitor for VerboseVisitor<W> {
    fn begin(&mut self, ctx: &VisitContext) {
        let _ = writeln!(
            self.out,
            "begin algorithm={} value={}",
            ctx.algorithm,
            format_real(ctx.value)
        );
    }

    fn visit(&mut self, ctx: &VisitContext) -> Control {
        let _ = writeln!(self.out, "{}", format_progress(ctx));
        Control::Continue
    }

    fn end(&mut self, ctx: &VisitContext) {
        let _ = writeln!(
            self.out,
            "end algorithm={} termination={} steps={}",
            ctx.algorithm,
            ctx.termination.unwrap_or(Termination::Error),
            ctx.step
        );
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub value: Value,
    pub bound: Option<Value>,
    pub elapsed: Duration,
}

/// Records one [`TraceRecord`] per visit.
#[derive(Debug, Default, Clone)]
pub struct TimingVisitor {
    pub trace: Vec<TraceRecord>,
}

impl Visitor for TimingVisitor {
    fn begin(&mut self, _ctx: &VisitContext) {
        self.trace.clear();
    }

    fn visit(&mut self, ctx: &VisitContext) -> Control {
        self.trace.push(TraceRecord {
            step: ctx.step,
            value: ctx.value,
            bound: ctx.bound,
            elapsed: ctx.elapsed,
        });
        Control::Continue
    }
}

impl<V: Visitor + ?Sized> Visitor for &mut V {
    fn begin(&mut self, ctx: &VisitContext) {
        (**self).begin(ctx)
    }

    fn visit(&mut self, ctx: &VisitContext) -> Control {
        (**self).visit(ctx)
    }

    fn end(&mut self, ctx: &VisitContext) {
        (**self).end(ctx)
    }
}

/// An inference engine constructed over a model and its parameters.
pub trait Inference {
    fn algorithm(&self) -> Algorithm;

    /// Runs to termination, reporting to `visitor`.
    fn infer_with(&mut self, visitor: &mut dyn Visitor) -> Result<InferenceState>;

    fn infer(&mut self) -> Result<InferenceState> {
        self.infer_with(&mut SilentVisitor)
    }
}

/// Drives the visitor protocol for one run: guarantees paired `begin`/`end`
/// and counts steps.
pub(crate) struct Monitor<'v> {
    visitor: &'v mut dyn Visitor,
    algorithm: &'static str,
    start: Instant,
    steps: usize,
    value: Value,
    bound: Option<Value>,
}

impl<'v> Monitor<'v> {
    pub fn begin(
        visitor: &'v mut dyn Visitor,
        algorithm: Algorithm,
        value: Value,
        bound: Option<Value>,
    ) -> Self {
        let monitor = Monitor {
            visitor,
            algorithm: algorithm.name(),
            start: Instant::now(),
            steps: 0,
            value,
            bound,
        };
        let ctx = monitor.context(None);
        monitor.visitor.begin(&ctx);
        monitor
    }

    fn context(&self, termination: Option<Termination>) -> VisitContext {
        VisitContext {
            algorithm: self.algorithm,
            step: self.steps,
            value: self.value,
            bound: self.bound,
            elapsed: self.start.elapsed(),
            termination,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Records one step and asks the visitor whether to continue.
    pub fn step(&mut self, value: Value, bound: Option<Value>) -> Control {
        self.steps += 1;
        self.value = value;
        self.bound = bound;
        let ctx = self.context(None);
        self.visitor.visit(&ctx)
    }

    /// Fires `end` and assembles the result. Errors still trigger `end`.
    pub fn finish(
        self,
        outcome: Result<(Option<Labeling>, Value, Option<Value>, Termination)>,
    ) -> Result<InferenceState> {
        match outcome {
            Ok((arg, value, bound, termination)) => {
                let mut monitor = self;
                monitor.value = value;
                monitor.bound = bound;
                let ctx = monitor.context(Some(termination));
                monitor.visitor.end(&ctx);
                Ok(InferenceState {
                    arg,
                    value,
                    bound,
                    termination,
                    step_count: monitor.steps,
                })
            }
            Err(e) => {
                let ctx = self.context(Some(Termination::Error));
                self.visitor.end(&ctx);
                Err(e)
            }
        }
    }
}
