//! Text format for diagrams.
//!
//! ```text
//! lifeline A
//! lifeline B
//! lifeline C
//! alt {
//!   A -> B : m1
//!   --
//!   A -> B : m2
//! }
//! A -> C : m3
//! ```
//!
//! Whitespace and line breaks only separate tokens and `#` starts a comment
//! that runs to the end of the line. Consecutive messages form one basic
//! fragment; any other run of statements is a weak sequence.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::ast::{
    is_label, is_lifeline_name, Fragment, FragmentKind, Label, LifelineName, Message, Namespace,
    SourceLocation, Spanned,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax { expected: Vec<String>, found: String },
    DuplicateLifelineDecl(LifelineName),
    EmptyBlock(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{loc}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub loc: SourceLocation,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Syntax { expected, found } => {
                write!(f, "SyntaxError: expected {}, found {found}", expected.join(" or "))
            }
            Self::DuplicateLifelineDecl(n) => write!(f, "DuplicateLifelineDecl: `{n}` is declared twice"),
            Self::EmptyBlock(kw) => write!(f, "EmptyBlock: `{kw}` operand has no statements"),
        }
    }
}

/// A parsed diagram file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedDiagram {
    /// Exactly the lifelines declared with `lifeline` headers.
    pub initial_namespace: Namespace,
    pub root: Fragment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Arrow,
    Colon,
    LBrace,
    RBrace,
    Sep,
    LBracket,
    RBracket,
    Comma,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Sep => f.write_str("`--`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

fn syntax(loc: SourceLocation, expected: &[&str], found: impl Into<String>) -> ParseError {
    ParseError {
        kind: ParseErrorKind::Syntax {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: found.into(),
        },
        loc,
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, SourceLocation)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let loc = SourceLocation::new(line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        };
        match c {
            '#' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump(&mut chars);
                }
            }
            c if c.is_whitespace() => bump(&mut chars),
            c if is_word_char(c) => {
                let mut w = String::new();
                while let Some(&c) = chars.peek().filter(|c| is_word_char(**c)) {
                    w.push(c);
                    bump(&mut chars);
                }
                out.push((Tok::Word(w), loc));
            }
            '-' => {
                bump(&mut chars);
                match chars.peek() {
                    Some('>') => {
                        bump(&mut chars);
                        out.push((Tok::Arrow, loc));
                    }
                    Some('-') => {
                        bump(&mut chars);
                        out.push((Tok::Sep, loc));
                    }
                    _ => return Err(syntax(loc, &["`->`", "`--`"], "`-`")),
                }
            }
            ':' | '{' | '}' | '[' | ']' | ',' => {
                bump(&mut chars);
                let tok = match c {
                    ':' => Tok::Colon,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    _ => Tok::Comma,
                };
                out.push((tok, loc));
            }
            other => return Err(syntax(loc, &["statement"], format!("`{other}`"))),
        }
    }
    out.push((Tok::Eof, SourceLocation::new(line, col)));
    Ok(out)
}

/// Parses diagram text.
pub fn parse(source: &str) -> Result<ParsedDiagram, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser { toks, pos: 0 };
    p.diagram()
}

struct Parser {
    toks: Vec<(Tok, SourceLocation)>,
    pos: usize,
}

enum Stmt {
    Message(Spanned<Message>),
    Other(Fragment),
}

const STMT_START: &[&str] = &["message", "`create`", "`destroy`", "`skip`", "block"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn loc(&self) -> SourceLocation {
        self.toks[self.pos].1
    }

    fn advance(&mut self) -> (Tok, SourceLocation) {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        syntax(self.loc(), expected, self.peek().to_string())
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<SourceLocation, ParseError> {
        if *self.peek() == tok {
            Ok(self.advance().1)
        } else {
            Err(self.unexpected(&[what]))
        }
    }

    fn name(&mut self) -> Result<LifelineName, ParseError> {
        match self.peek() {
            Tok::Word(w) if is_lifeline_name(w) => {
                let n = LifelineName::new(w).unwrap();
                self.advance();
                Ok(n)
            }
            _ => Err(self.unexpected(&["lifeline name"])),
        }
    }

    fn label(&mut self) -> Result<Label, ParseError> {
        match self.peek() {
            Tok::Word(w) if is_label(w) => {
                let l = Label::new(w).unwrap();
                self.advance();
                Ok(l)
            }
            _ => Err(self.unexpected(&["message label"])),
        }
    }

    fn at_word(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Word(w) if w == kw) && *self.peek_at(1) != Tok::Arrow
    }

    fn diagram(&mut self) -> Result<ParsedDiagram, ParseError> {
        let mut ns = Namespace::new();
        let mut stmts = Vec::new();
        loop {
            if *self.peek() == Tok::Eof {
                break;
            }
            if self.at_word("lifeline") {
                self.advance();
                let loc = self.loc();
                let n = self.name()?;
                if !ns.insert(n.clone()) {
                    return Err(ParseError { kind: ParseErrorKind::DuplicateLifelineDecl(n), loc });
                }
                continue;
            }
            match self.stmt()? {
                Some(s) => stmts.push(s),
                None => return Err(self.unexpected(&["`lifeline`", "statement"])),
            }
        }
        Ok(ParsedDiagram { initial_namespace: ns, root: build_seq(stmts, None) })
    }

    /// Statements up to (not including) `}` or `--`.
    fn stmts(&mut self, kw: &'static str, block_loc: SourceLocation) -> Result<Fragment, ParseError> {
        let mut stmts = Vec::new();
        while let Some(s) = self.stmt()? {
            stmts.push(s);
        }
        if stmts.is_empty() {
            return Err(ParseError { kind: ParseErrorKind::EmptyBlock(kw), loc: block_loc });
        }
        Ok(build_seq(stmts, None))
    }

    /// `None` when the next token cannot start a statement.
    fn stmt(&mut self) -> Result<Option<Stmt>, ParseError> {
        let loc = self.loc();
        let Tok::Word(w) = self.peek().clone() else {
            return Ok(None);
        };
        if *self.peek_at(1) == Tok::Arrow {
            return Ok(Some(Stmt::Message(self.message()?)));
        }
        let frag = match w.as_str() {
            "create" | "destroy" => {
                self.advance();
                let n = self.name()?;
                if w == "create" { Fragment::create(n) } else { Fragment::destroy(n) }
            }
            "skip" => {
                self.advance();
                Fragment::skip()
            }
            "loop" | "alt" | "par" => {
                self.advance();
                self.expect(Tok::LBrace, "`{`")?;
                let kw: &'static str = match w.as_str() {
                    "loop" => "loop",
                    "alt" => "alt",
                    _ => "par",
                };
                let mut operands = vec![self.stmts(kw, loc)?];
                while kw != "loop" && *self.peek() == Tok::Sep {
                    self.advance();
                    operands.push(self.stmts(kw, loc)?);
                }
                self.expect(Tok::RBrace, "`}`")?;
                match kw {
                    "loop" => Fragment::looped(operands.pop().unwrap()),
                    "alt" => Fragment::alt(operands),
                    _ => Fragment::par(operands),
                }
            }
            "consider" | "ignore" => {
                self.advance();
                let set = self.msgset()?;
                self.expect(Tok::LBrace, "`{`")?;
                let kw = if w == "consider" { "consider" } else { "ignore" };
                let body = self.stmts(kw, loc)?;
                self.expect(Tok::RBrace, "`}`")?;
                if kw == "consider" { Fragment::consider(set, body) } else { Fragment::ignore(set, body) }
            }
            _ => return Err(self.unexpected(STMT_START)),
        };
        Ok(Some(Stmt::Other(frag.at(loc))))
    }

    fn message(&mut self) -> Result<Spanned<Message>, ParseError> {
        let loc = self.loc();
        let sender = self.name()?;
        self.expect(Tok::Arrow, "`->`")?;
        let receiver = self.name()?;
        self.expect(Tok::Colon, "`:`")?;
        let label = self.label()?;
        Ok(Spanned::new(Message::new(sender, label, receiver), Some(loc)))
    }

    /// `[m, m, …]`; an empty set `[]` is accepted as well.
    fn msgset(&mut self) -> Result<BTreeSet<Message>, ParseError> {
        self.expect(Tok::LBracket, "`[`")?;
        let mut set = BTreeSet::new();
        if *self.peek() == Tok::RBracket {
            self.advance();
            return Ok(set);
        }
        loop {
            set.insert(self.message()?.value);
            match self.peek() {
                Tok::Comma => {
                    self.advance();
                }
                Tok::RBracket => {
                    self.advance();
                    return Ok(set);
                }
                _ => return Err(self.unexpected(&["`,`", "`]`"])),
            }
        }
    }
}

fn build_seq(stmts: Vec<Stmt>, loc: Option<SourceLocation>) -> Fragment {
    let mut children: Vec<Fragment> = Vec::new();
    let mut run: Vec<Spanned<Message>> = Vec::new();
    let flush = |run: &mut Vec<Spanned<Message>>, children: &mut Vec<Fragment>| {
        if !run.is_empty() {
            let loc = run[0].loc;
            children.push(Fragment { kind: FragmentKind::Basic(std::mem::take(run)), loc });
        }
    };
    for s in stmts {
        match s {
            Stmt::Message(m) => run.push(m),
            Stmt::Other(f) => {
                flush(&mut run, &mut children);
                children.push(f);
            }
        }
    }
    flush(&mut run, &mut children);
    let first = children.first().and_then(|c| c.loc).or(loc);
    let mut root = Fragment::seq(children);
    if matches!(root.kind, FragmentKind::WeakSeq(_)) {
        root.loc = first;
    }
    root
}

/// Renders `f` as diagram text without lifeline headers.
pub fn render_fragment(f: &Fragment) -> String {
    let mut out = String::new();
    render_into(f, 0, &mut out);
    out
}

/// Renders a whole diagram: one `lifeline` header per declared name, then the body.
pub fn render_diagram(d: &ParsedDiagram) -> String {
    let mut out = String::new();
    for n in d.initial_namespace.iter() {
        writeln!(out, "lifeline {n}").unwrap();
    }
    out.push_str(&render_fragment(&d.root));
    out
}

fn message_text(m: &Message) -> String {
    format!("{} -> {} : {}", m.sender, m.receiver, m.label)
}

fn render_into(f: &Fragment, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match &f.kind {
        FragmentKind::Basic(ms) => {
            for m in ms {
                writeln!(out, "{pad}{}", message_text(&m.value)).unwrap();
            }
        }
        FragmentKind::WeakSeq(cs) => cs.iter().for_each(|c| render_into(c, depth, out)),
        FragmentKind::Alt(cs) | FragmentKind::Par(cs) => {
            let kw = if matches!(f.kind, FragmentKind::Alt(_)) { "alt" } else { "par" };
            writeln!(out, "{pad}{kw} {{").unwrap();
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    writeln!(out, "{pad}--").unwrap();
                }
                render_into(c, depth + 1, out);
            }
            writeln!(out, "{pad}}}").unwrap();
        }
        FragmentKind::Loop(b) => {
            writeln!(out, "{pad}loop {{").unwrap();
            render_into(b, depth + 1, out);
            writeln!(out, "{pad}}}").unwrap();
        }
        FragmentKind::Create(n) => writeln!(out, "{pad}create {n}").unwrap(),
        FragmentKind::Destroy(n) => writeln!(out, "{pad}destroy {n}").unwrap(),
        FragmentKind::Skip => writeln!(out, "{pad}skip").unwrap(),
        FragmentKind::Consider(ms, b) | FragmentKind::Ignore(ms, b) => {
            let kw = if matches!(f.kind, FragmentKind::Consider(..)) { "consider" } else { "ignore" };
            let set: Vec<String> = ms.iter().map(message_text).collect();
            writeln!(out, "{pad}{kw} [{}] {{", set.join(", ")).unwrap();
            render_into(b, depth + 1, out);
            writeln!(out, "{pad}}}").unwrap();
        }
    }
}

/// Indented tree dump, one node per line: variant, location, payload.
pub fn dump_ast(d: &ParsedDiagram) -> String {
    let names: Vec<&str> = d.initial_namespace.iter().map(LifelineName::as_str).collect();
    let mut out = format!("Diagram lifelines=[{}]\n", names.join(", "));
    dump_into(&d.root, 1, &mut out);
    out
}

fn loc_text(loc: Option<SourceLocation>) -> String {
    loc.map_or_else(|| "-".to_string(), |l| l.to_string())
}

fn dump_into(f: &Fragment, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let head = format!("{pad}{} @{}", f.variant_name(), loc_text(f.loc));
    match &f.kind {
        FragmentKind::Basic(ms) => {
            writeln!(out, "{head}").unwrap();
            for m in ms {
                writeln!(out, "{pad}  Message @{} {}", loc_text(m.loc), message_text(&m.value)).unwrap();
            }
        }
        FragmentKind::WeakSeq(cs) | FragmentKind::Alt(cs) | FragmentKind::Par(cs) => {
            writeln!(out, "{head}").unwrap();
            cs.iter().for_each(|c| dump_into(c, depth + 1, out));
        }
        FragmentKind::Loop(b) => {
            writeln!(out, "{head}").unwrap();
            dump_into(b, depth + 1, out);
        }
        FragmentKind::Create(n) | FragmentKind::Destroy(n) => writeln!(out, "{head} {n}").unwrap(),
        FragmentKind::Skip => writeln!(out, "{head}").unwrap(),
        FragmentKind::Consider(ms, b) | FragmentKind::Ignore(ms, b) => {
            let set: Vec<String> = ms.iter().map(Message::to_string).collect();
            writeln!(out, "{head} [{}]", set.join(", ")).unwrap();
            dump_into(b, depth + 1, out);
        }
    }
}
