//! Abstract syntax and semantic value types.
//!
//! A diagram is a tree of [`Fragment`]s. Its meaning is a [`TraceSet`] (every
//! message history the diagram permits) together with a [`Namespace`] (the
//! lifelines in scope once the fragment has run).

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Line and column (both 1-based) of a construct in diagram source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceLocation {
    pub line: usize,
    pub column: usize,
}

impl SourceLocation {
    pub fn new(line: usize, column: usize) -> Self {
        Self { line, column }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Error returned when a token is not a legal lifeline name or label.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NameError {
    #[error("invalid lifeline name `{0}`: expected a letter followed by letters, digits or `_`")]
    Lifeline(String),
    #[error("invalid message label `{0}`: expected letters, digits, `_` or `.`")]
    Label(String),
}

/// Name of a lifeline. Case-sensitive, `[A-Za-z][A-Za-z0-9_]*`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LifelineName(Arc<str>);

impl LifelineName {
    pub fn new(name: &str) -> Result<Self, NameError> {
        if is_lifeline_name(name) {
            Ok(Self(Arc::from(name)))
        } else {
            Err(NameError::Lifeline(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_lifeline_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn is_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

impl fmt::Debug for LifelineName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for LifelineName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Opaque message label, `[A-Za-z0-9_.]+`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(label: &str) -> Result<Self, NameError> {
        if is_label(label) {
            Ok(Self(Arc::from(label)))
        } else {
            Err(NameError::Label(label.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An atomic communication event `(sender, label, receiver)`.
///
/// Equality is structural: two arrows with the same three fields are the same
/// symbol, wherever they appear in a diagram.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message {
    pub sender: LifelineName,
    pub label: Label,
    pub receiver: LifelineName,
}

impl Message {
    pub fn new(sender: LifelineName, label: Label, receiver: LifelineName) -> Self {
        Self { sender, label, receiver }
    }

    /// Builds a message from raw text, validating each field.
    pub fn parse_parts(sender: &str, label: &str, receiver: &str) -> Result<Self, NameError> {
        Ok(Self::new(
            LifelineName::new(sender)?,
            Label::new(label)?,
            LifelineName::new(receiver)?,
        ))
    }

    /// The lifelines this message is incident on: one for a self-message, else two.
    pub fn peers(&self) -> BTreeSet<LifelineName> {
        [self.sender.clone(), self.receiver.clone()].into_iter().collect()
    }

    /// True when the two messages have a lifeline in common.
    pub fn shares_lifeline(&self, other: &Message) -> bool {
        self.sender == other.sender
            || self.sender == other.receiver
            || self.receiver == other.sender
            || self.receiver == other.receiver
    }

    pub fn is_self_message(&self) -> bool {
        self.sender == self.receiver
    }
}

/// `sender.label.receiver`, the notation used in trace logs.
impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.sender, self.label, self.receiver)
    }
}

impl fmt::Debug for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.sender, self.label, self.receiver)
    }
}

pub fn peers(m: &Message) -> BTreeSet<LifelineName> {
    m.peers()
}

pub fn shares_lifeline(x: &Message, y: &Message) -> bool {
    x.shares_lifeline(y)
}

/// A value tagged with the place it was written. Equality ignores the location.
#[derive(Debug, Clone)]
pub struct Spanned<T> {
    pub value: T,
    pub loc: Option<SourceLocation>,
}

impl<T> Spanned<T> {
    pub fn new(value: T, loc: Option<SourceLocation>) -> Self {
        Self { value, loc }
    }

    pub fn bare(value: T) -> Self {
        Self { value, loc: None }
    }
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl<T: Eq> Eq for Spanned<T> {}

/// The shape of an interaction fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FragmentKind {
    /// Messages in top-to-bottom order; never empty.
    Basic(Vec<Spanned<Message>>),
    /// Weak sequential composition of at least two children.
    WeakSeq(Vec<Fragment>),
    Alt(Vec<Fragment>),
    Par(Vec<Fragment>),
    Loop(Box<Fragment>),
    Create(LifelineName),
    Destroy(LifelineName),
    Skip,
    Consider(BTreeSet<Message>, Box<Fragment>),
    Ignore(BTreeSet<Message>, Box<Fragment>),
}

/// A node of the diagram tree. Equality is structural and ignores locations.
#[derive(Debug, Clone)]
pub struct Fragment {
    pub kind: FragmentKind,
    pub loc: Option<SourceLocation>,
}

impl PartialEq for Fragment {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Fragment {}

impl From<FragmentKind> for Fragment {
    fn from(kind: FragmentKind) -> Self {
        Self { kind, loc: None }
    }
}

impl Fragment {
    /// # Panics
    /// If `messages` is empty.
    pub fn basic(messages: impl IntoIterator<Item = Message>) -> Self {
        let msgs: Vec<_> = messages.into_iter().map(Spanned::bare).collect();
        assert!(!msgs.is_empty(), "basic fragment needs at least one message");
        FragmentKind::Basic(msgs).into()
    }

    /// # Panics
    /// If fewer than two children are given.
    pub fn weak_seq(children: impl IntoIterator<Item = Fragment>) -> Self {
        let children: Vec<_> = children.into_iter().collect();
        assert!(children.len() >= 2, "weakseq needs at least two children");
        FragmentKind::WeakSeq(children).into()
    }

    /// Sequences `children`: nothing gives `Skip`, one child is returned as is.
    pub fn seq(children: impl IntoIterator<Item = Fragment>) -> Self {
        let mut children: Vec<_> = children.into_iter().collect();
        match children.len() {
            0 => Self::skip(),
            1 => children.pop().unwrap(),
            _ => FragmentKind::WeakSeq(children).into(),
        }
    }

    /// # Panics
    /// If `branches` is empty.
    pub fn alt(branches: impl IntoIterator<Item = Fragment>) -> Self {
        let branches: Vec<_> = branches.into_iter().collect();
        assert!(!branches.is_empty(), "alt needs at least one branch");
        FragmentKind::Alt(branches).into()
    }

    /// # Panics
    /// If `operands` is empty.
    pub fn par(operands: impl IntoIterator<Item = Fragment>) -> Self {
        let operands: Vec<_> = operands.into_iter().collect();
        assert!(!operands.is_empty(), "par needs at least one operand");
        FragmentKind::Par(operands).into()
    }

    pub fn looped(body: Fragment) -> Self {
        FragmentKind::Loop(Box::new(body)).into()
    }

    pub fn create(name: LifelineName) -> Self {
        FragmentKind::Create(name).into()
    }

    pub fn destroy(name: LifelineName) -> Self {
        FragmentKind::Destroy(name).into()
    }

    pub fn skip() -> Self {
        FragmentKind::Skip.into()
    }

    pub fn consider(alphabet: BTreeSet<Message>, body: Fragment) -> Self {
        FragmentKind::Consider(alphabet, Box::new(body)).into()
    }

    pub fn ignore(alphabet: BTreeSet<Message>, body: Fragment) -> Self {
        FragmentKind::Ignore(alphabet, Box::new(body)).into()
    }

    pub fn at(mut self, loc: SourceLocation) -> Self {
        self.loc = Some(loc);
        self
    }

    /// Every message written anywhere in a basic fragment of this tree.
    ///
    /// Consider/ignore filter sets are not part of the alphabet.
    pub fn message_alphabet(&self) -> BTreeSet<Message> {
        let mut out = BTreeSet::new();
        self.collect_alphabet(&mut out);
        out
    }

    fn collect_alphabet(&self, out: &mut BTreeSet<Message>) {
        match &self.kind {
            FragmentKind::Basic(ms) => out.extend(ms.iter().map(|m| m.value.clone())),
            FragmentKind::WeakSeq(cs) | FragmentKind::Alt(cs) | FragmentKind::Par(cs) => {
                cs.iter().for_each(|c| c.collect_alphabet(out))
            }
            FragmentKind::Loop(b) | FragmentKind::Consider(_, b) | FragmentKind::Ignore(_, b) => {
                b.collect_alphabet(out)
            }
            FragmentKind::Create(_) | FragmentKind::Destroy(_) | FragmentKind::Skip => {}
        }
    }

    /// Short variant name, as used in AST dumps.
    pub fn variant_name(&self) -> &'static str {
        match self.kind {
            FragmentKind::Basic(_) => "Basic",
            FragmentKind::WeakSeq(_) => "WeakSeq",
            FragmentKind::Alt(_) => "Alt",
            FragmentKind::Par(_) => "Par",
            FragmentKind::Loop(_) => "Loop",
            FragmentKind::Create(_) => "Create",
            FragmentKind::Destroy(_) => "Destroy",
            FragmentKind::Skip => "Skip",
            FragmentKind::Consider(..) => "Consider",
            FragmentKind::Ignore(..) => "Ignore",
        }
    }

    /// The normal form produced by parsing rendered text: nested sequences are
    /// flattened, adjacent basic fragments merge, and single-element sequences
    /// are unwrapped.
    pub fn canonicalize(&self) -> Fragment {
        let kind = match &self.kind {
            FragmentKind::WeakSeq(_) => {
                let mut flat = Vec::new();
                self.flatten_seq_into(&mut flat);
                return Fragment { loc: self.loc, ..Fragment::seq(flat) };
            }
            FragmentKind::Alt(cs) => FragmentKind::Alt(cs.iter().map(Fragment::canonicalize).collect()),
            FragmentKind::Par(cs) => FragmentKind::Par(cs.iter().map(Fragment::canonicalize).collect()),
            FragmentKind::Loop(b) => FragmentKind::Loop(Box::new(b.canonicalize())),
            FragmentKind::Consider(ms, b) => FragmentKind::Consider(ms.clone(), Box::new(b.canonicalize())),
            FragmentKind::Ignore(ms, b) => FragmentKind::Ignore(ms.clone(), Box::new(b.canonicalize())),
            other => other.clone(),
        };
        Fragment { kind, loc: self.loc }
    }

    fn flatten_seq_into(&self, out: &mut Vec<Fragment>) {
        match &self.kind {
            FragmentKind::WeakSeq(cs) => cs.iter().for_each(|c| c.flatten_seq_into(out)),
            FragmentKind::Basic(ms) => {
                if let Some(Fragment { kind: FragmentKind::Basic(prev), .. }) = out.last_mut() {
                    prev.extend(ms.iter().cloned());
                } else {
                    out.push(self.clone());
                }
            }
            _ => out.push(self.canonicalize()),
        }
    }
}

pub fn message_alphabet(f: &Fragment) -> BTreeSet<Message> {
    f.message_alphabet()
}

/// One possible communication history: a finite sequence of messages.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trace(pub Vec<Message>);

impl Trace {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn messages(&self) -> &[Message] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self ⌢ other`
    pub fn concat(&self, other: &Trace) -> Trace {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Trace(v)
    }
}

impl From<Vec<Message>> for Trace {
    fn from(v: Vec<Message>) -> Self {
        Self(v)
    }
}

impl FromIterator<Message> for Trace {
    fn from_iter<I: IntoIterator<Item = Message>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Space-separated `sender.label.receiver` messages, or `ε` for the empty trace.
impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// A finite, duplicate-free set of traces.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TraceSet(BTreeSet<Trace>);

impl TraceSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// `{⟨⟩}`, the meaning of `skip`.
    pub fn unit() -> Self {
        Self::singleton(Trace::empty())
    }

    pub fn singleton(t: Trace) -> Self {
        Self(BTreeSet::from([t]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, t: &Trace) -> bool {
        self.0.contains(t)
    }

    pub fn insert(&mut self, t: Trace) -> bool {
        self.0.insert(t)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Trace> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &TraceSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &TraceSet) -> TraceSet {
        Self(self.0.union(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &TraceSet) -> TraceSet {
        Self(self.0.difference(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &TraceSet) -> TraceSet {
        Self(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn extend(&mut self, other: TraceSet) {
        self.0.extend(other.0)
    }

    /// Traces rendered as text and sorted by that text.
    pub fn sorted_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self.0.iter().map(Trace::to_string).collect();
        lines.sort();
        lines
    }
}

impl FromIterator<Trace> for TraceSet {
    fn from_iter<I: IntoIterator<Item = Trace>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl IntoIterator for TraceSet {
    type Item = Trace;
    type IntoIter = std::collections::btree_set::IntoIter<Trace>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a TraceSet {
    type Item = &'a Trace;
    type IntoIter = std::collections::btree_set::Iter<'a, Trace>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// The lifeline names in scope at some point of a diagram.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Namespace(BTreeSet<LifelineName>);

impl Namespace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, name: &LifelineName) -> bool {
        self.0.contains(name)
    }

    pub fn insert(&mut self, name: LifelineName) -> bool {
        self.0.insert(name)
    }

    pub fn remove(&mut self, name: &LifelineName) -> bool {
        self.0.remove(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LifelineName> {
        self.0.iter()
    }
}

impl FromIterator<LifelineName> for Namespace {
    fn from_iter<I: IntoIterator<Item = LifelineName>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}


#[cfg(test)]
mod tests {
    use super::test_util::*;
    use super::*;

    #[test]
    fn peers_of_messages() {
        assert_eq!(msg("A", "m1", "B").peers(), BTreeSet::from([name("A"), name("B")]));
        assert_eq!(msg("A", "m2", "A").peers(), BTreeSet::from([name("A")]));
        assert_eq!(msg("c", "invite", "x").peers(), BTreeSet::from([name("c"), name("x")]));
    }

    #[test]
    fn lifeline_sharing() {
        assert!(shares_lifeline(&msg("A", "m1", "B"), &msg("A", "m2", "B")));
        assert!(!shares_lifeline(&msg("A", "m1", "B"), &msg("C", "m3", "D")));
        assert!(shares_lifeline(&msg("A", "m", "A"), &msg("A", "n", "A")));
        assert!(shares_lifeline(&msg("A", "m", "B"), &msg("B", "n", "C")));
    }

    #[test]
    fn names_are_validated() {
        assert!(LifelineName::new("A1_b").is_ok());
        assert!(LifelineName::new("1A").is_err());
        assert!(LifelineName::new("").is_err());
        assert!(LifelineName::new("a.b").is_err());
        assert!(Label::new("1.x_y").is_ok());
        assert!(Label::new("").is_err());
        assert!(Label::new("a-b").is_err());
        assert_ne!(name("a"), name("A"));
    }

    #[test]
    fn alphabet_of_basic_and_skip() {
        let f = Fragment::basic([
            msg("A", "m1", "B"),
            msg("C", "m3", "D"),
            msg("A", "m2", "B"),
            msg("B", "m4", "C"),
        ]);
        assert_eq!(f.message_alphabet().len(), 4);
        assert!(Fragment::skip().message_alphabet().is_empty());
        let single = Fragment::basic([msg("A", "m1", "B")]);
        assert_eq!(single.message_alphabet(), BTreeSet::from([msg("A", "m1", "B")]));
    }

    #[test]
    fn equality_ignores_locations() {
        let a = Fragment::skip().at(SourceLocation::new(3, 4));
        assert_eq!(a, Fragment::skip());
    }

    #[test]
    fn canonicalize_flattens_and_merges() {
        let a = Fragment::basic([msg("A", "a", "B")]);
        let b = Fragment::basic([msg("B", "b", "C")]);
        let nested = Fragment::weak_seq([Fragment::weak_seq([a, b]), Fragment::skip()]);
        let expected = Fragment::weak_seq([
            Fragment::basic([msg("A", "a", "B"), msg("B", "b", "C")]),
            Fragment::skip(),
        ]);
        assert_eq!(nested.canonicalize(), expected);
    }

    #[test]
    fn trace_display() {
        assert_eq!(Trace::empty().to_string(), "ε");
        let t = trace(&[&msg("c", "invite", "x"), &msg("x", "accept", "c")]);
        assert_eq!(t.to_string(), "c.invite.x x.accept.c");
    }
}
