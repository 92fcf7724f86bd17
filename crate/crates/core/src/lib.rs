//! Trace semantics for asynchronous sequence diagrams.
//!
//! A diagram is parsed into a [`Fragment`] tree whose meaning is the set of
//! message traces it allows ([`denote`]) and the lifelines it leaves in scope
//! ([`namespace_of`]). On top of that sit scope validation, refinement between
//! diagrams, and conformance checks against recorded system traces.

pub mod ast;
pub mod conformance;
pub mod oracle;
pub mod parser;
pub mod semantics;

pub use ast::{
    message_alphabet, peers, shares_lifeline, Fragment, FragmentKind, Label, LifelineName, Message,
    Namespace, NameError, SourceLocation, Spanned, Trace, TraceSet,
};
pub use conformance::{
    conform, refines, validate, ConformanceMode, LogParseError, Side, TraceLog, Verdict, Witness,
};
pub use parser::{dump_ast, parse, render_diagram, render_fragment, ParseError, ParseErrorKind, ParsedDiagram};
pub use semantics::{
    denote, filter, namespace_of, theorem1_check, EvalLimits, LoopBound, SemanticError, SemanticResult,
    TraceSetOverflow,
};
