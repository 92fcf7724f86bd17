//! Inputs shared by the criterion benchmarks.

use seqtrace_core::{parse, ParsedDiagram};

/// Two independent request/reply chains inside a loop.
pub const PAIRED_LOOP: &str = "\
lifeline A
lifeline B
lifeline C
lifeline D
loop {
  A -> B : m1
  C -> D : m3
  A -> B : m2
  C -> D : m4
}
";

/// A coordinator inviting `n` participants in parallel.
pub fn invitations(n: usize) -> String {
    let mut src = String::from("lifeline c\n");
    for i in 0..n {
        src.push_str(&format!("lifeline p{i}\n"));
    }
    src.push_str("par {\n");
    for i in 0..n {
        if i > 0 {
            src.push_str("--\n");
        }
        src.push_str(&format!("  c -> p{i} : invite\n  p{i} -> c : accept\n"));
    }
    src.push_str("}\n");
    src
}

pub fn load(src: &str) -> ParsedDiagram {
    parse(src).expect("benchmark input parses")
}
