//! Command implementations behind the `seqtrace` binary.
//!
//! Each command returns an [`OutputReport`] instead of printing, so the
//! binary and the tests share one code path. Exit codes: 0 when the command
//! succeeds or the checked property holds, 1 when the property fails, 2 for
//! usage, parse and evaluation errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use clap::{Parser, Subcommand};
use seqtrace_core::conformance::DEFAULT_MAX_WITNESSES;
use seqtrace_core::semantics::compare_loop_unfolding;
use seqtrace_core::{
    conform, denote, dump_ast, parse, refines, validate, ConformanceMode, EvalLimits, FragmentKind,
    LoopBound, ParsedDiagram, TraceLog, TraceSet, Verdict,
};

#[derive(Debug, Parser)]
#[command(name = "seqtrace", version, about = "Trace semantics for asynchronous sequence diagrams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the parsed syntax tree
    Parse { file: PathBuf },
    /// Report lifelines used out of scope
    Check { file: PathBuf },
    /// Print every trace of the diagram, sorted
    Traces {
        file: PathBuf,
        #[arg(long, default_value_t = EvalLimits::DEFAULT_LOOP_BOUND)]
        max_loop: usize,
        #[arg(long, default_value_t = EvalLimits::DEFAULT_MAX_TRACES, value_parser = positive)]
        max_traces: usize,
        /// Print only the number of traces
        #[arg(long)]
        count: bool,
    },
    /// Check that every trace of A is a trace of B
    Refine {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = EvalLimits::DEFAULT_LOOP_BOUND)]
        max_loop: usize,
    },
    /// Check a log of system traces against the diagram
    Conform {
        file: PathBuf,
        log: PathBuf,
        #[arg(long, value_parser = parse_mode)]
        mode: ConformanceMode,
        #[arg(long, default_value_t = EvalLimits::DEFAULT_LOOP_BOUND)]
        max_loop: usize,
    },
    /// Compare loop(b) with alt(skip, b, weakseq(b,b), ...) up to DEPTH copies
    Theorem {
        file: PathBuf,
        #[arg(long)]
        depth: usize,
    },
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_mode(s: &str) -> Result<ConformanceMode, String> {
    s.parse()
}

/// What a command produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutputReport {
    pub exit_code: i32,
    /// Machine-readable result, for standard output.
    pub body: String,
    /// Human-oriented messages, for standard error.
    pub diagnostics: String,
}

impl OutputReport {
    fn ok(body: String) -> Self {
        Self { exit_code: 0, body, diagnostics: String::new() }
    }

    fn error(diagnostics: impl Into<String>) -> Self {
        let mut diagnostics = diagnostics.into();
        if !diagnostics.ends_with('\n') {
            diagnostics.push('\n');
        }
        Self { exit_code: 2, body: String::new(), diagnostics }
    }

    fn note(mut self, line: impl AsRef<str>) -> Self {
        self.diagnostics.push_str(line.as_ref());
        self.diagnostics.push('\n');
        self
    }
}

pub fn run(cli: Cli) -> OutputReport {
    let result = match cli.command {
        Command::Parse { file } => cmd_parse(&file),
        Command::Check { file } => cmd_check(&file),
        Command::Traces { file, max_loop, max_traces, count } => {
            cmd_traces(&file, EvalLimits::new(max_loop, max_traces), count)
        }
        Command::Refine { a, b, max_loop } => cmd_refine(&a, &b, max_loop),
        Command::Conform { file, log, mode, max_loop } => cmd_conform(&file, &log, mode, max_loop),
        Command::Theorem { file, depth } => cmd_theorem(&file, depth),
    };
    result.unwrap_or_else(|e| OutputReport::error(format!("error: {e:#}")))
}

/// Reads and parses a diagram, reporting syntax errors as `path:line:col: ...`.
fn load(path: &Path) -> Result<ParsedDiagram, OutputReport> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(|e| OutputReport::error(format!("error: {e:#}")))?;
    parse(&text).map_err(|e| OutputReport::error(format!("{}:{e}", path.display())))
}

/// Loads a diagram and refuses it if any lifeline is used out of scope.
fn load_valid(path: &Path) -> Result<ParsedDiagram, OutputReport> {
    let d = load(path)?;
    let diags = validate(&d);
    if diags.is_empty() {
        Ok(d)
    } else {
        let text: String = diags.iter().map(|e| format!("{}:{e}\n", path.display())).collect();
        Err(OutputReport::error(text))
    }
}

macro_rules! try_report {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(report) => return Ok(report),
        }
    };
}

pub fn cmd_parse(file: &Path) -> anyhow::Result<OutputReport> {
    let d = try_report!(load(file));
    Ok(OutputReport::ok(dump_ast(&d)))
}

pub fn cmd_check(file: &Path) -> anyhow::Result<OutputReport> {
    let d = try_report!(load(file));
    let diags = validate(&d);
    let body: String = diags.iter().map(|e| format!("{}:{e}\n", file.display())).collect();
    Ok(OutputReport { exit_code: i32::from(!diags.is_empty()), body, diagnostics: String::new() })
}

pub fn cmd_traces(file: &Path, limits: EvalLimits, count_only: bool) -> anyhow::Result<OutputReport> {
    let d = try_report!(load_valid(file));
    let traces = match denote(&d.root, &d.initial_namespace, &limits) {
        Ok(r) => r.traces,
        Err(e) => return Ok(OutputReport::error(format!("{}:{e}", file.display()))),
    };
    let body = if count_only { format!("{}\n", traces.len()) } else { TraceLog::render(&traces) };
    Ok(OutputReport::ok(body))
}

fn verdict_report(v: &Verdict, pass: &str) -> OutputReport {
    let mut body = String::new();
    if v.holds {
        writeln!(body, "{pass}").unwrap();
    } else {
        writeln!(body, "FAILS").unwrap();
        for w in &v.witnesses {
            writeln!(body, "{}", w.trace).unwrap();
        }
    }
    OutputReport { exit_code: i32::from(!v.holds), body, diagnostics: String::new() }
        .note(format!("note: loop bound {}", v.loop_bound))
}

pub fn cmd_refine(a: &Path, b: &Path, max_loop: usize) -> anyhow::Result<OutputReport> {
    let da = try_report!(load_valid(a));
    let db = try_report!(load_valid(b));
    let limits = EvalLimits::default().with_loop_bound(max_loop);
    match refines(&da, &db, &limits, DEFAULT_MAX_WITNESSES) {
        Ok(v) => Ok(verdict_report(&v, "REFINES")),
        Err(e) => Ok(OutputReport::error(e.to_string())),
    }
}

pub fn cmd_conform(file: &Path, log: &Path, mode: ConformanceMode, max_loop: usize) -> anyhow::Result<OutputReport> {
    let d = try_report!(load_valid(file));
    let text = fs::read_to_string(log).with_context(|| format!("cannot read {}", log.display()))?;
    let log_traces = match TraceLog::parse(&text) {
        Ok(l) => l,
        Err(e) => return Ok(OutputReport::error(format!("{}: LogParseError: {e}", log.display()))),
    };
    let limits = EvalLimits::default().with_loop_bound(max_loop);
    match conform(&d, &log_traces, mode, &limits, DEFAULT_MAX_WITNESSES) {
        Ok(v) => Ok(verdict_report(&v, "HOLDS").note(format!("note: mode {mode}"))),
        Err(e) => Ok(OutputReport::error(format!("{}:{e}", file.display()))),
    }
}

pub fn cmd_theorem(file: &Path, depth: usize) -> anyhow::Result<OutputReport> {
    let d = try_report!(load_valid(file));
    let FragmentKind::Loop(body) = &d.root.kind else {
        return Ok(OutputReport::error(format!(
            "{}: the diagram must consist of a single top-level loop, found {}",
            file.display(),
            d.root.variant_name()
        )));
    };
    let cmp = match compare_loop_unfolding(body, &d.initial_namespace, LoopBound(depth), &EvalLimits::default()) {
        Ok(c) => c,
        Err(e) => return Ok(OutputReport::error(format!("{}:{e}", file.display()))),
    };
    if cmp.equal() {
        return Ok(OutputReport::ok("EQUAL\n".into()).note(format!("note: {} traces", cmp.loop_traces.len())));
    }
    let diff: TraceSet = cmp.symmetric_difference();
    let mut body_text = String::from("DIFFERENT\n");
    for line in diff.sorted_lines() {
        writeln!(body_text, "{line}").unwrap();
    }
    Ok(OutputReport { exit_code: 1, body: body_text, diagnostics: String::new() })
}
