//! Scope validation, refinement between diagrams, and checking recorded
//! system traces against a diagram.

use std::fmt;
use std::str::FromStr;

use crate::ast::{Fragment, FragmentKind, Message, Namespace, Trace, TraceSet};
use crate::parser::ParsedDiagram;
use crate::semantics::{denote, EvalLimits, LoopBound, SemanticError};

/// Scope diagnostics for `d`, in the order evaluation would meet them.
///
/// Walks the tree threading namespaces exactly like [`denote`] but computes no
/// traces, and keeps going after a problem so every one is reported.
pub fn validate(d: &ParsedDiagram) -> Vec<SemanticError> {
    let mut diags = Vec::new();
    validate_fragment(&d.root, &d.initial_namespace, &mut diags);
    diags
}

/// Like [`validate`] for a bare fragment; returns the namespace after `f`.
pub fn validate_fragment(f: &Fragment, ns: &Namespace, diags: &mut Vec<SemanticError>) -> Namespace {
    match &f.kind {
        FragmentKind::Basic(ms) => {
            for m in ms {
                for name in m.value.peers() {
                    if !ns.contains(&name) {
                        diags.push(SemanticError::UnknownLifeline { name, loc: m.loc.or(f.loc) });
                    }
                }
            }
            ns.clone()
        }
        FragmentKind::WeakSeq(cs) => cs.iter().fold(ns.clone(), |cur, c| validate_fragment(c, &cur, diags)),
        FragmentKind::Alt(cs) | FragmentKind::Par(cs) => {
            for c in cs {
                validate_fragment(c, ns, diags);
            }
            ns.clone()
        }
        FragmentKind::Loop(b) | FragmentKind::Consider(_, b) | FragmentKind::Ignore(_, b) => {
            validate_fragment(b, ns, diags);
            ns.clone()
        }
        FragmentKind::Create(n) => {
            let mut out = ns.clone();
            if !out.insert(n.clone()) {
                diags.push(SemanticError::DuplicateCreate { name: n.clone(), loc: f.loc });
            }
            out
        }
        FragmentKind::Destroy(n) => {
            let mut out = ns.clone();
            if !out.remove(n) {
                diags.push(SemanticError::DestroyAbsent { name: n.clone(), loc: f.loc });
            }
            out
        }
        FragmentKind::Skip => ns.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct LogParseError {
    pub line: usize,
    pub message: String,
}

/// Traces recorded from a running system, one per line.
///
/// Each line holds space-separated `sender.label.receiver` messages, or `ε`
/// for the empty trace. Blank lines and `#` comments are skipped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceLog {
    pub traces: TraceSet,
}

impl TraceLog {
    pub fn parse(text: &str) -> Result<Self, LogParseError> {
        let mut traces = TraceSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| LogParseError { line: i + 1, message };
            if line == "ε" {
                traces.insert(Trace::empty());
                continue;
            }
            let trace = line
                .split_whitespace()
                .map(|tok| parse_log_message(tok).map_err(&err))
                .collect::<Result<Trace, _>>()?;
            traces.insert(trace);
        }
        Ok(Self { traces })
    }

    /// The log text for `traces`, sorted.
    pub fn render(traces: &TraceSet) -> String {
        traces.sorted_lines().into_iter().map(|l| l + "\n").collect()
    }
}

/// `sender.label.receiver`; the label may itself contain dots.
fn parse_log_message(tok: &str) -> Result<Message, String> {
    let (Some(first), Some(last)) = (tok.find('.'), tok.rfind('.')) else {
        return Err(format!("`{tok}` is not of the form sender.label.receiver"));
    };
    if first == last {
        return Err(format!("`{tok}` is not of the form sender.label.receiver"));
    }
    Message::parse_parts(&tok[..first], &tok[first + 1..last], &tok[last + 1..])
        .map_err(|e| format!("`{tok}`: {e}"))
}

/// How a diagram's traces `D` must relate to a system's traces `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConformanceMode {
    /// `D ⊆ S`: every diagram trace must be observed.
    Required,
    /// `S ⊆ D`: every observed trace must be allowed by the diagram.
    Exhaustive,
    /// `D ∩ S = ∅`: no diagram trace may be observed.
    Forbidden,
}

impl FromStr for ConformanceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "required" => Ok(Self::Required),
            "exhaust" => Ok(Self::Exhaustive),
            "forbid" => Ok(Self::Forbidden),
            other => Err(format!("unknown mode `{other}` (expected required, exhaust or forbid)")),
        }
    }
}

impl fmt::Display for ConformanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Required => "required",
            Self::Exhaustive => "exhaust",
            Self::Forbidden => "forbid",
        })
    }
}

/// Where a counterexample trace was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Only in the first operand (the refining diagram, or the diagram under check).
    First,
    /// Only in the second operand (the refined diagram, or the log).
    Second,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub trace: Trace,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    /// Empty iff `holds`; sorted by rendered trace text.
    pub witnesses: Vec<Witness>,
    /// Loop bound the diagram traces were computed under.
    pub loop_bound: LoopBound,
}

pub const DEFAULT_MAX_WITNESSES: usize = 10;

impl Verdict {
    fn from_offenders(offenders: TraceSet, side: Side, max_witnesses: usize, loop_bound: LoopBound) -> Self {
        let mut sorted: Vec<Trace> = offenders.into_iter().collect();
        sorted.sort_by_cached_key(Trace::to_string);
        let witnesses: Vec<Witness> = sorted
            .into_iter()
            .take(max_witnesses.max(1))
            .map(|trace| Witness { trace, side })
            .collect();
        Self { holds: witnesses.is_empty(), witnesses, loop_bound }
    }
}

/// Holds iff every trace of `a` is a trace of `b` under the same limits.
pub fn refines(
    a: &ParsedDiagram,
    b: &ParsedDiagram,
    limits: &EvalLimits,
    max_witnesses: usize,
) -> Result<Verdict, SemanticError> {
    let da = denote(&a.root, &a.initial_namespace, limits)?.traces;
    let db = denote(&b.root, &b.initial_namespace, limits)?.traces;
    Ok(Verdict::from_offenders(da.difference(&db), Side::First, max_witnesses, limits.loop_bound))
}

/// Checks the diagram's traces against a system log under `mode`.
pub fn conform(
    d: &ParsedDiagram,
    log: &TraceLog,
    mode: ConformanceMode,
    limits: &EvalLimits,
    max_witnesses: usize,
) -> Result<Verdict, SemanticError> {
    let dt = denote(&d.root, &d.initial_namespace, limits)?.traces;
    let s = &log.traces;
    let (offenders, side) = match mode {
        ConformanceMode::Required => (dt.difference(s), Side::First),
        ConformanceMode::Exhaustive => (s.difference(&dt), Side::Second),
        ConformanceMode::Forbidden => (dt.intersection(s), Side::Both),
    };
    Ok(Verdict::from_offenders(offenders, side, max_witnesses, limits.loop_bound))
}
