//! Property checks of the semantics against the brute-force oracles and the
//! algebraic laws the trace operators must satisfy.

use std::collections::BTreeSet;

use proptest::prelude::*;
use seqtrace_core::oracle::{
    chain_merge_count, oracle_interleave, oracle_weak, FragmentGenerator, GeneratorConfig,
};
use seqtrace_core::semantics::{
    compare_loop_unfolding, concat_sets, interleave_traces, kleene_bounded, weak,
};
use seqtrace_core::{
    denote, filter, parse, refines, render_fragment, validate, ConformanceMode, EvalLimits, Fragment,
    Label, LifelineName, LoopBound, Message, Namespace, ParsedDiagram, SemanticError, Trace, TraceLog, TraceSet,
};

const CAP: usize = 200_000;

fn pool() -> Namespace {
    ["A", "B", "C", "D"].iter().map(|n| LifelineName::new(n).unwrap()).collect()
}

fn limits(k: usize) -> EvalLimits {
    EvalLimits::new(k, CAP)
}

fn message() -> impl Strategy<Value = Message> {
    let name = prop::sample::select(vec!["A", "B", "C", "D"]);
    let label = prop::sample::select(vec!["a", "b"]);
    (name.clone(), label, name).prop_map(|(s, l, r)| Message::parse_parts(s, l, r).unwrap())
}

fn distinct_trace(len: usize, tag: &'static str) -> Trace {
    (0..len).map(|i| Message::parse_parts("A", &format!("{tag}{i}"), "B").unwrap()).collect()
}

fn is_subsequence(needle: &[Message], hay: &[Message]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|m| it.any(|h| h == m))
}

/// Index sets that place `x` and `y` inside `t` as disjoint subsequences.
fn disjoint_embedding(t: &[Message], x: &[Message], y: &[Message]) -> bool {
    fn go(t: &[Message], x: &[Message], y: &[Message]) -> bool {
        match t.split_first() {
            None => x.is_empty() && y.is_empty(),
            Some((h, rest)) => {
                (x.first() == Some(h) && go(rest, &x[1..], y)) || (y.first() == Some(h) && go(rest, x, &y[1..]))
            }
        }
    }
    go(t, x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn weak_matches_oracle(ms in prop::collection::vec(message(), 0..=7)) {
        prop_assert_eq!(weak(&ms, CAP).unwrap(), oracle_weak(&ms).unwrap());
    }

    #[test]
    fn weak_traces_are_order_preserving_permutations(ms in prop::collection::vec(message(), 0..=6)) {
        let mut sorted_in = ms.clone();
        sorted_in.sort();
        for t in &weak(&ms, CAP).unwrap() {
            let mut sorted_out = t.messages().to_vec();
            sorted_out.sort();
            prop_assert_eq!(&sorted_out, &sorted_in);
            // each lifeline sees its messages in written order
            for l in pool().iter() {
                let on = |s: &[Message]| -> Vec<Message> {
                    s.iter().filter(|m| m.peers().contains(l)).cloned().collect()
                };
                prop_assert_eq!(on(t.messages()), on(&ms));
            }
        }
    }

    #[test]
    fn interleave_matches_oracle(
        x in prop::collection::vec(message(), 0..=5),
        y in prop::collection::vec(message(), 0..=5),
    ) {
        let (x, y) = (Trace(x), Trace(y));
        let ours = interleave_traces(&x, &y, CAP).unwrap();
        prop_assert_eq!(&ours, &oracle_interleave(&x, &y).unwrap());
        prop_assert_eq!(&ours, &interleave_traces(&y, &x, CAP).unwrap());
        for t in &ours {
            prop_assert_eq!(t.len(), x.len() + y.len());
            prop_assert!(disjoint_embedding(t.messages(), x.messages(), y.messages()));
        }
    }

    #[test]
    fn filter_is_idempotent(
        t in prop::collection::vec(message(), 0..=8),
        keep in prop::collection::btree_set(message(), 0..=6),
    ) {
        let t = Trace(t);
        let once = filter(&keep, &t);
        prop_assert_eq!(filter(&keep, &once), once.clone());
        prop_assert!(is_subsequence(once.messages(), t.messages()));
        prop_assert!(once.messages().iter().all(|m| keep.contains(m)));
    }

    #[test]
    fn kleene_is_monotone(
        u in prop::collection::btree_set(prop::collection::vec(message(), 0..=2), 0..=3),
        k in 0usize..3,
    ) {
        let u: TraceSet = u.into_iter().map(Trace).collect();
        let small = kleene_bounded(&u, LoopBound(k), CAP).unwrap();
        let big = kleene_bounded(&u, LoopBound(k + 1), CAP).unwrap();
        prop_assert!(small.is_subset(&big));
    }

    #[test]
    fn concat_size_bound(
        u in prop::collection::btree_set(prop::collection::vec(message(), 0..=2), 0..=4),
        v in prop::collection::btree_set(prop::collection::vec(message(), 0..=2), 0..=4),
    ) {
        let u: TraceSet = u.into_iter().map(Trace).collect();
        let v: TraceSet = v.into_iter().map(Trace).collect();
        prop_assert!(concat_sets(&u, &v, CAP).unwrap().len() <= u.len() * v.len());
    }

    #[test]
    fn parse_is_total(src in "[ -~\n]{0,80}") {
        let line_count = src.split('\n').count();
        if let Err(e) = parse(&src) {
            prop_assert!(e.loc.line >= 1 && e.loc.line <= line_count);
            let line_len = src.split('\n').nth(e.loc.line - 1).unwrap().chars().count();
            prop_assert!(e.loc.column >= 1 && e.loc.column <= line_len + 1);
        }
    }

    #[test]
    fn parse_is_total_on_dsl_tokens(toks in prop::collection::vec(
        prop::sample::select(vec!["A", "->", "B", ":", "m", "{", "}", "--", "alt", "loop", "par",
                                  "consider", "ignore", "[", "]", ",", "create", "destroy", "skip",
                                  "lifeline", "\n", "#"]), 0..40)
    ) {
        let src = toks.join(" ");
        let _ = parse(&src);
    }
}

#[test]
fn interleave_cardinality_grid() {
    for i in 0..=5 {
        for j in 0..=5 {
            let n = interleave_traces(&distinct_trace(i, "x"), &distinct_trace(j, "y"), CAP).unwrap().len();
            assert_eq!(n as u128, chain_merge_count(&[i, j]), "|x|={i} |y|={j}");
        }
    }
}

fn generator(seed: u64, depth: usize) -> FragmentGenerator {
    FragmentGenerator::new(GeneratorConfig::new(seed).with_depth(depth).with_messages(2))
}

#[test]
fn generated_fragments_validate() {
    let mut g = FragmentGenerator::new(GeneratorConfig::new(11).with_depth(3));
    for _ in 0..1000 {
        let f = g.next_fragment();
        let d = ParsedDiagram { initial_namespace: pool(), root: f };
        assert!(validate(&d).is_empty(), "{:?}", d.root);
    }
}

#[test]
fn generated_fragments_evaluate_or_overflow() {
    let mut g = FragmentGenerator::new(GeneratorConfig::new(12).with_depth(3).with_filters(true));
    for _ in 0..300 {
        let f = g.next_fragment();
        for k in 0..=2 {
            match denote(&f, &pool(), &EvalLimits::new(k, 20_000)) {
                Ok(r) => assert_eq!(r.namespace_out, pool()),
                Err(SemanticError::TraceSetOverflow { .. }) => {}
                Err(e) => panic!("{e} in {f:?}"),
            }
        }
    }
}

#[test]
fn validate_agrees_with_denote() {
    // mutate generated diagrams by dropping lifelines from scope
    let mut g = generator(13, 3);
    let mut failures = 0;
    for i in 0..400 {
        let f = g.next_fragment();
        let mut ns = pool();
        if i % 2 == 0 {
            ns.remove(&LifelineName::new(["A", "B", "C", "D"][i % 4]).unwrap());
        }
        let d = ParsedDiagram { initial_namespace: ns.clone(), root: f };
        let diags = validate(&d);
        match denote(&d.root, &ns, &limits(2)) {
            Ok(_) => assert!(diags.is_empty(), "{diags:?}"),
            Err(SemanticError::TraceSetOverflow { .. }) => {}
            Err(e) => {
                failures += 1;
                assert_eq!(diags.first(), Some(&e));
            }
        }
    }
    assert!(failures > 50, "mutation produced too few scope errors: {failures}");
}

#[test]
fn combined_fragments_restore_namespace() {
    let mut g = FragmentGenerator::new(GeneratorConfig::new(14).with_depth(2).with_filters(true));
    let sample = |g: &mut FragmentGenerator| {
        // a body that creates and keeps a fresh lifeline
        let p = LifelineName::new("Q").unwrap();
        Fragment::weak_seq([
            Fragment::create(p.clone()),
            Fragment::basic([Message::new(p, Label::new("a").unwrap(), LifelineName::new("A").unwrap())]),
            g.next_fragment(),
        ])
    };
    for _ in 0..50 {
        let b = sample(&mut g);
        let all = [
            Fragment::alt([b.clone()]),
            Fragment::par([b.clone(), Fragment::skip()]),
            Fragment::looped(b.clone()),
            Fragment::consider(BTreeSet::new(), b.clone()),
            Fragment::ignore(BTreeSet::new(), b.clone()),
        ];
        for f in all {
            let r = denote(&f, &pool(), &limits(2)).unwrap();
            assert_eq!(r.namespace_out, pool());
        }
    }
}

#[test]
fn alt_is_idempotent_and_weakseq_associative() {
    let mut g = generator(15, 2);
    for _ in 0..150 {
        let (a, b, c) = (g.next_fragment(), g.next_fragment(), g.next_fragment());
        let l = limits(1);
        let da = denote(&a, &pool(), &l).unwrap();
        assert_eq!(denote(&Fragment::alt([a.clone(), a.clone()]), &pool(), &l).unwrap().traces, da.traces);

        let left = Fragment::weak_seq([Fragment::weak_seq([a.clone(), b.clone()]), c.clone()]);
        let right = Fragment::weak_seq([a, Fragment::weak_seq([b, c])]);
        assert_eq!(denote(&left, &pool(), &l).unwrap(), denote(&right, &pool(), &l).unwrap());
    }
}

#[test]
fn bounded_loop_unfolding_identity() {
    let mut g = generator(16, 2);
    for _ in 0..100 {
        let b = g.next_fragment();
        for k in 0..=3 {
            let c = compare_loop_unfolding(&b, &pool(), LoopBound(k), &limits(k)).unwrap();
            assert!(c.equal(), "k={k} body={b:?} diff={:?}", c.symmetric_difference());
        }
    }
}

#[test]
fn consider_all_and_ignore_nothing_are_identities() {
    let mut g = generator(17, 3);
    for _ in 0..150 {
        let b = g.next_fragment();
        let plain = denote(&b, &pool(), &limits(1)).unwrap().traces;
        let ignore = denote(&Fragment::ignore(BTreeSet::new(), b.clone()), &pool(), &limits(1)).unwrap();
        let consider = denote(&Fragment::consider(b.message_alphabet(), b.clone()), &pool(), &limits(1)).unwrap();
        assert_eq!(ignore.traces, plain);
        assert_eq!(consider.traces, plain);

        // consider(ms) and ignore(Σ \ ms) keep the same messages
        let ms = g.subset(&b.message_alphabet());
        let rest: BTreeSet<Message> = b.message_alphabet().difference(&ms).cloned().collect();
        let c = denote(&Fragment::consider(ms, b.clone()), &pool(), &limits(1)).unwrap();
        let i = denote(&Fragment::ignore(rest, b), &pool(), &limits(1)).unwrap();
        assert_eq!(c.traces, i.traces);
    }
}

#[test]
fn render_parse_round_trip() {
    let mut g = FragmentGenerator::new(GeneratorConfig::new(18).with_depth(4).with_filters(true));
    for _ in 0..1000 {
        let f = g.next_fragment();
        let text = render_fragment(&f);
        let back = parse(&text).unwrap_or_else(|e| panic!("{e}\n{text}")).root;
        assert_eq!(back, f.canonicalize(), "\n{text}");
    }
}

#[test]
fn refinement_is_reflexive_and_transitive() {
    let mut g = generator(19, 2);
    let l = limits(1);
    let mut chains = 0;
    for _ in 0..150 {
        let a = g.next_fragment();
        let b = g.next_fragment();
        let diag = |f: Fragment| ParsedDiagram { initial_namespace: pool(), root: f };
        // alt widens, so a ⊑ alt(a,b) ⊑ alt(a,b,skip) always holds
        let (da, dab, dabs) = (
            diag(a.clone()),
            diag(Fragment::alt([a.clone(), b.clone()])),
            diag(Fragment::alt([a, b, Fragment::skip()])),
        );
        assert!(refines(&da, &da, &l, 10).unwrap().holds);
        let ab = refines(&da, &dab, &l, 10).unwrap().holds;
        let bc = refines(&dab, &dabs, &l, 10).unwrap().holds;
        assert!(ab && bc);
        assert!(refines(&da, &dabs, &l, 10).unwrap().holds);
        chains += 1;

        // transitivity over arbitrary triples: a ⊑ b ∧ b ⊑ c ⇒ a ⊑ c
        let (x, y, z) = (diag(g.next_fragment()), diag(g.next_fragment()), diag(g.next_fragment()));
        if refines(&x, &y, &l, 1).unwrap().holds && refines(&y, &z, &l, 1).unwrap().holds {
            assert!(refines(&x, &z, &l, 1).unwrap().holds);
        }
    }
    assert_eq!(chains, 150);
}

#[test]
fn forbidden_holds_when_required_fails_on_disjoint_singletons() {
    let mut g = generator(20, 2);
    for _ in 0..100 {
        let d = ParsedDiagram { initial_namespace: pool(), root: g.next_fragment() };
        let dt = denote(&d.root, &d.initial_namespace, &limits(1)).unwrap().traces;
        let outsider = Trace(vec![Message::parse_parts("A", "zzz", "B").unwrap()]);
        assert!(!dt.contains(&outsider));
        let log = TraceLog { traces: TraceSet::singleton(outsider) };
        let req = seqtrace_core::conform(&d, &log, ConformanceMode::Required, &limits(1), 10).unwrap();
        let forb = seqtrace_core::conform(&d, &log, ConformanceMode::Forbidden, &limits(1), 10).unwrap();
        assert!(!req.holds);
        assert!(forb.holds);
    }
}
