//! Brute-force reference implementations and a random diagram generator.
//!
//! Nothing here calls into [`crate::semantics`]. The oracles enumerate
//! candidates exhaustively and filter them, so they stay usable as an
//! independent check on the compositional definitions.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{Fragment, Label, LifelineName, Message, Trace, TraceSet};

pub const DEFAULT_WEAK_LIMIT: usize = 8;
pub const DEFAULT_INTERLEAVE_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("oracle input of size {size} exceeds the limit of {limit}")]
pub struct InputTooLarge {
    pub size: usize,
    pub limit: usize,
}

/// All orderings of `ms` that keep every pair of lifeline-sharing messages in
/// their written order.
pub fn oracle_weak(ms: &[Message]) -> Result<TraceSet, InputTooLarge> {
    oracle_weak_with_limit(ms, DEFAULT_WEAK_LIMIT)
}

pub fn oracle_weak_with_limit(ms: &[Message], limit: usize) -> Result<TraceSet, InputTooLarge> {
    if ms.len() > limit {
        return Err(InputTooLarge { size: ms.len(), limit });
    }
    let n = ms.len();
    // position[i] = where occurrence i ends up in the candidate permutation
    let mut out = TraceSet::new();
    for perm in permutations(n) {
        let mut position = vec![0; n];
        for (pos, &idx) in perm.iter().enumerate() {
            position[idx] = pos;
        }
        let respects_order = (0..n).all(|i| {
            (i + 1..n).all(|j| !ms[i].shares_lifeline(&ms[j]) || position[i] < position[j])
        });
        if respects_order {
            out.insert(perm.iter().map(|&i| ms[i].clone()).collect());
        }
    }
    Ok(out)
}

/// Every permutation of `0..n`, in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut all = vec![perm.clone()];
    // next_permutation
    loop {
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return all;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
        all.push(perm.clone());
    }
}

/// All merges of `x` and `y` that keep each one's internal order, built by
/// choosing which output positions hold the elements of `x`.
pub fn oracle_interleave(x: &Trace, y: &Trace) -> Result<TraceSet, InputTooLarge> {
    oracle_interleave_with_limit(x, y, DEFAULT_INTERLEAVE_LIMIT)
}

pub fn oracle_interleave_with_limit(
    x: &Trace,
    y: &Trace,
    limit: usize,
) -> Result<TraceSet, InputTooLarge> {
    let total = x.len() + y.len();
    if total > limit {
        return Err(InputTooLarge { size: total, limit });
    }
    let mut out = TraceSet::new();
    for mask in 0u32..(1u32 << total) {
        if mask.count_ones() as usize != x.len() {
            continue;
        }
        let (mut xi, mut yi) = (x.messages().iter(), y.messages().iter());
        let merged: Trace = (0..total)
            .map(|pos| {
                let from_x = mask & (1 << pos) != 0;
                let next = if from_x { xi.next() } else { yi.next() };
                next.expect("mask has exactly |x| bits").clone()
            })
            .collect();
        out.insert(merged);
    }
    Ok(out)
}

/// Knobs for [`FragmentGenerator`].
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    /// Nesting depth; 1 yields only basic fragments and `skip`.
    pub max_depth: usize,
    pub max_messages_per_basic: usize,
    pub lifeline_pool: Vec<LifelineName>,
    pub seed: u64,
    /// Also emit consider/ignore blocks. They are off by default because their
    /// filtered trace sets are not closed under reordering, which the bounded
    /// loop identity relies on.
    pub include_filters: bool,
}

impl GeneratorConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            max_depth: 3,
            max_messages_per_basic: 3,
            lifeline_pool: ["A", "B", "C", "D"]
                .iter()
                .map(|n| LifelineName::new(n).unwrap())
                .collect(),
            seed,
            include_filters: false,
        }
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn with_messages(mut self, max: usize) -> Self {
        self.max_messages_per_basic = max;
        self
    }

    pub fn with_filters(mut self, on: bool) -> Self {
        self.include_filters = on;
        self
    }
}

const LABELS: &[&str] = &["a", "b", "c"];

/// Seeded source of random, scope-valid fragments.
///
/// Creates are emitted inside a sequence that uses the fresh name. At the
/// top level of a generated fragment (and of every sequence child) each
/// create is paired with a destroy, so a fragment leaves the namespace it was
/// given unchanged; inside alt/par/loop operands the destroy is optional.
pub struct FragmentGenerator {
    cfg: GeneratorConfig,
    rng: ChaCha8Rng,
    fresh: usize,
}

impl FragmentGenerator {
    pub fn new(cfg: GeneratorConfig) -> Self {
        assert!(cfg.max_depth >= 1, "max_depth must be positive");
        assert!(cfg.max_messages_per_basic >= 1, "max_messages_per_basic must be positive");
        assert!(!cfg.lifeline_pool.is_empty(), "lifeline_pool must not be empty");
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Self { cfg, rng, fresh: 0 }
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.cfg
    }

    pub fn next_fragment(&mut self) -> Fragment {
        let scope: Vec<LifelineName> = self.cfg.lifeline_pool.clone();
        self.fresh = 0;
        self.gen(self.cfg.max_depth, &scope, true)
    }

    fn gen(&mut self, depth: usize, scope: &[LifelineName], balanced: bool) -> Fragment {
        if depth <= 1 {
            return if self.rng.gen_bool(0.85) { self.gen_basic(scope) } else { Fragment::skip() };
        }
        let choices = if self.cfg.include_filters { 9 } else { 7 };
        match self.rng.gen_range(0..choices) {
            0 | 1 => self.gen_basic(scope),
            2 => {
                let n = self.rng.gen_range(2..=3);
                Fragment::seq((0..n).map(|_| self.gen(depth - 1, scope, true)))
            }
            3 => {
                let n = self.rng.gen_range(1..=3);
                Fragment::alt((0..n).map(|_| self.gen(depth - 1, scope, false)).collect::<Vec<_>>())
            }
            4 => {
                let n = self.rng.gen_range(1..=2);
                Fragment::par((0..n).map(|_| self.gen(depth - 1, scope, false)).collect::<Vec<_>>())
            }
            5 => Fragment::looped(self.gen(depth - 1, scope, false)),
            6 => self.gen_scoped_create(depth, scope, balanced),
            7 => {
                let body = self.gen(depth - 1, scope, false);
                let ms = self.gen_filter_set(&body);
                Fragment::consider(ms, body)
            }
            _ => {
                let body = self.gen(depth - 1, scope, false);
                let ms = self.gen_filter_set(&body);
                Fragment::ignore(ms, body)
            }
        }
    }

    fn gen_scoped_create(&mut self, depth: usize, scope: &[LifelineName], balanced: bool) -> Fragment {
        let name = LifelineName::new(&format!("P{}", self.fresh)).unwrap();
        self.fresh += 1;
        let mut inner = scope.to_vec();
        inner.push(name.clone());
        let mut children = vec![Fragment::create(name.clone())];
        // make sure the fresh lifeline takes part in at least one message
        children.push(self.gen_basic_with(&inner, Some(&name)));
        if self.rng.gen_bool(0.5) {
            children.push(self.gen(depth - 1, &inner, true));
        }
        if balanced || self.rng.gen_bool(0.5) {
            children.push(Fragment::destroy(name));
        }
        Fragment::seq(children)
    }

    fn gen_basic(&mut self, scope: &[LifelineName]) -> Fragment {
        self.gen_basic_with(scope, None)
    }

    fn gen_basic_with(&mut self, scope: &[LifelineName], must_use: Option<&LifelineName>) -> Fragment {
        let n = self.rng.gen_range(1..=self.cfg.max_messages_per_basic);
        let mut msgs: Vec<Message> = (0..n).map(|_| random_message(&mut self.rng, scope)).collect();
        if let Some(name) = must_use {
            let other = scope.choose(&mut self.rng).unwrap().clone();
            msgs[0] = if self.rng.gen_bool(0.5) {
                Message::new(name.clone(), msgs[0].label.clone(), other)
            } else {
                Message::new(other, msgs[0].label.clone(), name.clone())
            };
        }
        Fragment::basic(msgs)
    }

    fn gen_filter_set(&mut self, body: &Fragment) -> BTreeSet<Message> {
        body.message_alphabet()
            .into_iter()
            .filter(|_| self.rng.gen_bool(0.5))
            .collect()
    }

    /// A random message sequence of exactly `len` messages over the pool.
    pub fn message_sequence(&mut self, len: usize) -> Vec<Message> {
        let pool = self.cfg.lifeline_pool.clone();
        (0..len).map(|_| random_message(&mut self.rng, &pool)).collect()
    }

    /// A random subset of `from`.
    pub fn subset(&mut self, from: &BTreeSet<Message>) -> BTreeSet<Message> {
        from.iter().filter(|_| self.rng.gen_bool(0.5)).cloned().collect()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

fn random_message(rng: &mut ChaCha8Rng, scope: &[LifelineName]) -> Message {
    let sender = scope.choose(rng).unwrap().clone();
    let receiver = scope.choose(rng).unwrap().clone();
    let label = Label::new(LABELS.choose(rng).unwrap()).unwrap();
    Message::new(sender, label, receiver)
}

/// One fragment drawn from `cfg`; the same config always gives the same fragment.
pub fn generate_fragment(cfg: &GeneratorConfig) -> Fragment {
    FragmentGenerator::new(cfg.clone()).next_fragment()
}

/// Number of merges of disjoint chains with the given lengths, i.e. the
/// multinomial coefficient `(Σ lens)! / Π lens!`.
pub fn chain_merge_count(lens: &[usize]) -> u128 {
    let mut total = 0u128;
    let mut acc = 1u128;
    for &len in lens {
        for i in 1..=len as u128 {
            total += 1;
            acc = acc * total / i;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::test_util::*;
    use crate::ast::FragmentKind;

    fn crossing() -> Vec<Message> {
        vec![msg("A", "m1", "B"), msg("C", "m3", "D"), msg("A", "m2", "B"), msg("B", "m4", "C")]
    }

    fn paired_body() -> Vec<Message> {
        vec![msg("A", "m1", "B"), msg("C", "m3", "D"), msg("A", "m2", "B"), msg("C", "m4", "D")]
    }

    #[test]
    fn permutations_are_complete() {
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
        assert_eq!(permutations(4).len(), 24);
        let distinct: BTreeSet<_> = permutations(5).into_iter().collect();
        assert_eq!(distinct.len(), 120);
    }

    #[test]
    fn weak_oracle_on_crossing() {
        let [m1, m3, m2, m4] = <[Message; 4]>::try_from(crossing()).unwrap();
        let expected: TraceSet = [
            trace(&[&m1, &m3, &m2, &m4]),
            trace(&[&m1, &m2, &m3, &m4]),
            trace(&[&m3, &m1, &m2, &m4]),
        ]
        .into_iter()
        .collect();
        assert_eq!(oracle_weak(&crossing()).unwrap(), expected);
    }

    #[test]
    fn weak_oracle_edge_cases() {
        assert_eq!(oracle_weak(&[]).unwrap(), TraceSet::unit());
        assert_eq!(oracle_weak(&paired_body()).unwrap().len(), 6);
        let too_many = vec![msg("A", "a", "B"); 9];
        assert_eq!(oracle_weak(&too_many), Err(InputTooLarge { size: 9, limit: 8 }));
    }

    #[test]
    fn interleave_oracle() {
        let a = msg("A", "a", "B");
        assert_eq!(
            oracle_interleave(&Trace::empty(), &trace(&[&a])).unwrap(),
            TraceSet::singleton(trace(&[&a]))
        );
        let (b, c, d) = (msg("B", "b", "C"), msg("C", "c", "D"), msg("D", "d", "A"));
        let two_by_two = oracle_interleave(&trace(&[&a, &b]), &trace(&[&c, &d])).unwrap();
        assert_eq!(two_by_two.len(), 6);
        let long = Trace(vec![a.clone(); 13]);
        assert!(oracle_interleave(&long, &Trace::empty()).is_err());
    }

    #[test]
    fn multinomial_counts() {
        assert_eq!(chain_merge_count(&[2, 2]), 6);
        assert_eq!(chain_merge_count(&[4, 4]), 70);
        assert_eq!(chain_merge_count(&[3, 2]), 10);
        assert_eq!(chain_merge_count(&[]), 1);
    }

    #[test]
    fn depth_one_is_basic_or_skip() {
        let mut g = FragmentGenerator::new(GeneratorConfig::new(7).with_depth(1));
        for _ in 0..200 {
            let f = g.next_fragment();
            assert!(matches!(f.kind, FragmentKind::Basic(_) | FragmentKind::Skip), "{f:?}");
        }
    }

    #[test]
    fn same_seed_same_fragments() {
        let cfg = GeneratorConfig::new(42);
        assert_eq!(generate_fragment(&cfg), generate_fragment(&cfg));
        let mut a = FragmentGenerator::new(cfg.clone());
        let mut b = FragmentGenerator::new(cfg);
        for _ in 0..50 {
            assert_eq!(a.next_fragment(), b.next_fragment());
        }
    }

    #[test]
    fn basic_sizes_respect_config() {
        let mut g = FragmentGenerator::new(GeneratorConfig::new(3).with_depth(1).with_messages(2));
        for _ in 0..100 {
            if let FragmentKind::Basic(ms) = g.next_fragment().kind {
                assert!((1..=2).contains(&ms.len()));
            }
        }
    }
}
