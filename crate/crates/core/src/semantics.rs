//! The trace semantics: `D` (the traces of a fragment) and `N` (its namespace).
//!
//! Every set operation takes a `cap` on the number of traces it may produce
//! and fails with [`TraceSetOverflow`] instead of truncating.

use std::collections::BTreeSet;
use std::fmt;

use crate::ast::{Fragment, FragmentKind, LifelineName, Message, Namespace, SourceLocation, Trace, TraceSet};

/// Maximum number of loop iterations unrolled during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LoopBound(pub usize);

impl fmt::Display for LoopBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalLimits {
    pub loop_bound: LoopBound,
    /// Largest trace set any step may build.
    pub max_traces: usize,
}

impl EvalLimits {
    pub const DEFAULT_LOOP_BOUND: usize = 2;
    pub const DEFAULT_MAX_TRACES: usize = 1_000_000;

    pub fn new(loop_bound: usize, max_traces: usize) -> Self {
        assert!(max_traces > 0, "max_traces must be positive");
        Self { loop_bound: LoopBound(loop_bound), max_traces }
    }

    pub fn with_loop_bound(self, k: usize) -> Self {
        Self { loop_bound: LoopBound(k), ..self }
    }
}

impl Default for EvalLimits {
    fn default() -> Self {
        Self::new(Self::DEFAULT_LOOP_BOUND, Self::DEFAULT_MAX_TRACES)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("trace set exceeds the limit of {limit} traces")]
pub struct TraceSetOverflow {
    pub limit: usize,
}

struct At(Option<SourceLocation>);

impl fmt::Display for At {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(loc) => write!(f, "{loc}: "),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemanticError {
    #[error("{}UnknownLifeline: `{name}` is not in scope", At(*.loc))]
    UnknownLifeline { name: LifelineName, loc: Option<SourceLocation> },
    #[error("{}DuplicateCreate: `{name}` is already in scope", At(*.loc))]
    DuplicateCreate { name: LifelineName, loc: Option<SourceLocation> },
    #[error("{}DestroyAbsent: `{name}` is not in scope", At(*.loc))]
    DestroyAbsent { name: LifelineName, loc: Option<SourceLocation> },
    #[error("{}TraceSetOverflow: more than {limit} traces", At(*.loc))]
    TraceSetOverflow { limit: usize, loc: Option<SourceLocation> },
}

impl SemanticError {
    pub fn location(&self) -> Option<SourceLocation> {
        match self {
            Self::UnknownLifeline { loc, .. }
            | Self::DuplicateCreate { loc, .. }
            | Self::DestroyAbsent { loc, .. }
            | Self::TraceSetOverflow { loc, .. } => *loc,
        }
    }

    /// True for scope errors, false for resource exhaustion.
    pub fn is_namespace_error(&self) -> bool {
        !matches!(self, Self::TraceSetOverflow { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticResult {
    pub traces: TraceSet,
    pub namespace_out: Namespace,
}

fn check_cap(set: &TraceSet, cap: usize) -> Result<(), TraceSetOverflow> {
    if set.len() > cap {
        Err(TraceSetOverflow { limit: cap })
    } else {
        Ok(())
    }
}

/// Weak sequential composition of a message sequence.
///
/// Messages that share a lifeline keep their written order; all others may
/// interleave. The recursion is `weak ⟨⟩ = {⟨⟩}` and otherwise
/// `weak s = ∪ { s[i] ⌢ weak(s without i) }` over every occurrence `i` that
/// has no earlier, still-unplaced occurrence on a common lifeline. Choosing
/// among all such occurrences (not just the first two) is what makes the
/// result the full set of linear extensions.
///
/// Occurrences are tracked by index, so repeated equal messages keep their
/// relative order. Equal messages always share a lifeline, hence two
/// different choices never yield the same trace.
pub fn weak(ms: &[Message], cap: usize) -> Result<TraceSet, TraceSetOverflow> {
    let n = ms.len();
    let mut blockers: Vec<usize> = (0..n)
        .map(|i| (0..i).filter(|&j| ms[j].shares_lifeline(&ms[i])).count())
        .collect();
    let successors: Vec<Vec<usize>> = (0..n)
        .map(|i| (i + 1..n).filter(|&j| ms[i].shares_lifeline(&ms[j])).collect())
        .collect();
    let mut placed = vec![false; n];
    let mut prefix = Vec::with_capacity(n);
    let mut out = TraceSet::new();
    extend_weak(ms, &successors, &mut blockers, &mut placed, &mut prefix, &mut out, cap)?;
    Ok(out)
}

fn extend_weak(
    ms: &[Message],
    successors: &[Vec<usize>],
    blockers: &mut [usize],
    placed: &mut [bool],
    prefix: &mut Vec<Message>,
    out: &mut TraceSet,
    cap: usize,
) -> Result<(), TraceSetOverflow> {
    if prefix.len() == ms.len() {
        out.insert(Trace(prefix.clone()));
        return check_cap(out, cap);
    }
    for i in 0..ms.len() {
        if placed[i] || blockers[i] > 0 {
            continue;
        }
        placed[i] = true;
        successors[i].iter().for_each(|&j| blockers[j] -= 1);
        prefix.push(ms[i].clone());
        let res = extend_weak(ms, successors, blockers, placed, prefix, out, cap);
        prefix.pop();
        successors[i].iter().for_each(|&j| blockers[j] += 1);
        placed[i] = false;
        res?;
    }
    Ok(())
}

/// `∪ { weak(t) : t ∈ ts }`
///
/// Every `t' ∈ weak(t)` orders each lifeline's messages exactly as `t` does,
/// so `weak(t') = weak(t)`; traces already produced are skipped.
pub fn weak_over_set(ts: &TraceSet, cap: usize) -> Result<TraceSet, TraceSetOverflow> {
    let mut out = TraceSet::new();
    for t in ts {
        if out.contains(t) {
            continue;
        }
        out.extend(weak(t.messages(), cap)?);
        check_cap(&out, cap)?;
    }
    Ok(out)
}

/// Language concatenation `u v = { x ⌢ y : x ∈ u, y ∈ v }`.
pub fn concat_sets(u: &TraceSet, v: &TraceSet, cap: usize) -> Result<TraceSet, TraceSetOverflow> {
    let mut out = TraceSet::new();
    for x in u {
        for y in v {
            out.insert(x.concat(y));
        }
        check_cap(&out, cap)?;
    }
    Ok(out)
}

/// `u⁰ ∪ u¹ ∪ … ∪ uᵏ`, with `uⁿ⁺¹ = uⁿ u`.
pub fn kleene_bounded(u: &TraceSet, k: LoopBound, cap: usize) -> Result<TraceSet, TraceSetOverflow> {
    let mut power = TraceSet::unit();
    let mut out = power.clone();
    for _ in 0..k.0 {
        power = concat_sets(&power, u, cap)?;
        out = out.union(&power);
        check_cap(&out, cap)?;
    }
    Ok(out)
}

/// Shuffle product of two traces.
///
/// `⟨⟩ ⧢ t = {t}`, `t ⧢ ⟨⟩ = {t}`, otherwise
/// `x ⧢ y = head(x) ⌢ (tail(x) ⧢ y) ∪ head(y) ⌢ (x ⧢ tail(y))`.
pub fn interleave_traces(x: &Trace, y: &Trace, cap: usize) -> Result<TraceSet, TraceSetOverflow> {
    let mut out = TraceSet::new();
    let mut prefix = Vec::with_capacity(x.len() + y.len());
    shuffle_into(x.messages(), y.messages(), &mut prefix, &mut out, cap)?;
    Ok(out)
}

fn shuffle_into(
    x: &[Message],
    y: &[Message],
    prefix: &mut Vec<Message>,
    out: &mut TraceSet,
    cap: usize,
) -> Result<(), TraceSetOverflow> {
    let (Some((xh, xt)), Some((yh, yt))) = (x.split_first(), y.split_first()) else {
        let mut t = prefix.clone();
        t.extend_from_slice(x);
        t.extend_from_slice(y);
        out.insert(Trace(t));
        return check_cap(out, cap);
    };
    prefix.push(xh.clone());
    let res = shuffle_into(xt, y, prefix, out, cap);
    prefix.pop();
    res?;
    prefix.push(yh.clone());
    let res = shuffle_into(x, yt, prefix, out, cap);
    prefix.pop();
    res
}

/// `∪ { x ⧢ y : x ∈ xs, y ∈ ys }`
pub fn interleave_sets(xs: &TraceSet, ys: &TraceSet, cap: usize) -> Result<TraceSet, TraceSetOverflow> {
    let mut out = TraceSet::new();
    for x in xs {
        for y in ys {
            out.extend(interleave_traces(x, y, cap)?);
            check_cap(&out, cap)?;
        }
    }
    Ok(out)
}

/// The subsequence of `t` made of the messages in `ms`.
pub fn filter(ms: &BTreeSet<Message>, t: &Trace) -> Trace {
    t.messages().iter().filter(|m| ms.contains(m)).cloned().collect()
}

/// The namespace after `f` runs in `ns`. Only create, destroy and sequencing
/// change it; combined fragments are scopes and hand back `ns` untouched.
pub fn namespace_of(f: &Fragment, ns: &Namespace) -> Namespace {
    match &f.kind {
        FragmentKind::Create(n) => {
            let mut out = ns.clone();
            out.insert(n.clone());
            out
        }
        FragmentKind::Destroy(n) => {
            let mut out = ns.clone();
            out.remove(n);
            out
        }
        FragmentKind::WeakSeq(cs) => cs.iter().fold(ns.clone(), |acc, c| namespace_of(c, &acc)),
        _ => ns.clone(),
    }
}

/// Evaluates the traces and resulting namespace of `f` started in `ns`.
///
/// Ignore blocks filter against the alphabet of `f` itself, which contains
/// every message a trace of `f` can hold.
pub fn denote(f: &Fragment, ns: &Namespace, limits: &EvalLimits) -> Result<SemanticResult, SemanticError> {
    let eval = Evaluator { limits: *limits, sigma: f.message_alphabet() };
    let (traces, namespace_out) = eval.eval(f, ns)?;
    Ok(SemanticResult { traces, namespace_out })
}

struct Evaluator {
    limits: EvalLimits,
    sigma: BTreeSet<Message>,
}

impl Evaluator {
    fn eval(&self, f: &Fragment, ns: &Namespace) -> Result<(TraceSet, Namespace), SemanticError> {
        let cap = self.limits.max_traces;
        let overflow = |e: TraceSetOverflow| SemanticError::TraceSetOverflow { limit: e.limit, loc: f.loc };
        match &f.kind {
            FragmentKind::Basic(ms) => {
                for m in ms {
                    for name in m.value.peers() {
                        if !ns.contains(&name) {
                            return Err(SemanticError::UnknownLifeline { name, loc: m.loc.or(f.loc) });
                        }
                    }
                }
                let msgs: Vec<Message> = ms.iter().map(|m| m.value.clone()).collect();
                Ok((weak(&msgs, cap).map_err(overflow)?, ns.clone()))
            }
            FragmentKind::WeakSeq(cs) => {
                let mut acc = TraceSet::unit();
                let mut cur = ns.clone();
                for c in cs {
                    let (ts, next) = self.eval(c, &cur)?;
                    acc = concat_sets(&acc, &ts, cap).map_err(overflow)?;
                    cur = next;
                }
                Ok((weak_over_set(&acc, cap).map_err(overflow)?, cur))
            }
            FragmentKind::Alt(bs) => {
                let mut acc = TraceSet::new();
                for b in bs {
                    acc.extend(self.eval(b, ns)?.0);
                    check_cap(&acc, cap).map_err(overflow)?;
                }
                Ok((acc, ns.clone()))
            }
            FragmentKind::Par(os) => {
                let mut acc: Option<TraceSet> = None;
                for o in os {
                    let ts = self.eval(o, ns)?.0;
                    acc = Some(match acc {
                        None => ts,
                        Some(prev) => interleave_sets(&prev, &ts, cap).map_err(overflow)?,
                    });
                }
                Ok((acc.unwrap_or_else(TraceSet::unit), ns.clone()))
            }
            FragmentKind::Loop(body) => {
                let (body_traces, _) = self.eval(body, ns)?;
                let star = kleene_bounded(&body_traces, self.limits.loop_bound, cap).map_err(overflow)?;
                Ok((weak_over_set(&star, cap).map_err(overflow)?, ns.clone()))
            }
            FragmentKind::Create(n) => {
                if ns.contains(n) {
                    return Err(SemanticError::DuplicateCreate { name: n.clone(), loc: f.loc });
                }
                Ok((TraceSet::unit(), namespace_of(f, ns)))
            }
            FragmentKind::Destroy(n) => {
                if !ns.contains(n) {
                    return Err(SemanticError::DestroyAbsent { name: n.clone(), loc: f.loc });
                }
                Ok((TraceSet::unit(), namespace_of(f, ns)))
            }
            FragmentKind::Skip => Ok((TraceSet::unit(), ns.clone())),
            FragmentKind::Consider(keep, body) => {
                let ts = self.eval(body, ns)?.0;
                Ok((ts.iter().map(|t| filter(keep, t)).collect(), ns.clone()))
            }
            FragmentKind::Ignore(drop, body) => {
                let keep: BTreeSet<Message> = self.sigma.difference(drop).cloned().collect();
                let ts = self.eval(body, ns)?.0;
                Ok((ts.iter().map(|t| filter(&keep, t)).collect(), ns.clone()))
            }
        }
    }
}

/// `alt(skip, b, weakseq(b,b), …)` with `k` copies in the last operand.
pub fn unfold_loop(body: &Fragment, k: LoopBound) -> Fragment {
    let mut branches = vec![Fragment::skip()];
    branches.extend((1..=k.0).map(|n| Fragment::seq(std::iter::repeat_n(body.clone(), n))));
    Fragment::alt(branches)
}

/// Both sides of the bounded loop-unfolding identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnfoldingComparison {
    /// Traces of `loop(b)` with `k` iterations.
    pub loop_traces: TraceSet,
    /// Traces of [`unfold_loop`]`(b, k)`.
    pub unfolded_traces: TraceSet,
}

impl UnfoldingComparison {
    pub fn equal(&self) -> bool {
        self.loop_traces == self.unfolded_traces
    }

    /// Traces on exactly one side.
    pub fn symmetric_difference(&self) -> TraceSet {
        self.loop_traces
            .difference(&self.unfolded_traces)
            .union(&self.unfolded_traces.difference(&self.loop_traces))
    }
}

/// Evaluates `loop(b)` and its explicit unfolding as two separate trees.
pub fn compare_loop_unfolding(
    body: &Fragment,
    ns: &Namespace,
    k: LoopBound,
    limits: &EvalLimits,
) -> Result<UnfoldingComparison, SemanticError> {
    let limits = limits.with_loop_bound(k.0);
    let loop_traces = denote(&Fragment::looped(body.clone()), ns, &limits)?.traces;
    let unfolded_traces = denote(&unfold_loop(body, k), ns, &limits)?.traces;
    Ok(UnfoldingComparison { loop_traces, unfolded_traces })
}

/// True iff `loop(b)` and `alt(skip, b, weakseq(b,b), …)` agree up to `k` iterations.
pub fn theorem1_check(
    body: &Fragment,
    ns: &Namespace,
    k: LoopBound,
    limits: &EvalLimits,
) -> Result<bool, SemanticError> {
    compare_loop_unfolding(body, ns, k, limits).map(|c| c.equal())
}
