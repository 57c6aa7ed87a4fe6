//! Topological Markov chains over truncated countable alphabets: admissible
//! words, cylinders, the symbolic metric, and transition-property checks
//! (mixing, BI, BIP).
//!
//! Symbols are contiguous ids `0..A`. Interval-map models attach digit
//! semantics (e.g. continued-fraction digit = id + 1) on top of these ids.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Index into the (truncated) alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol(pub u32);

/// Finite admissible word. A word of length `n` is the cylinder fixing
/// coordinates `0..n`; the paper-style cylinder index of that cylinder is
/// `n - 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<u32>);

impl Word {
    pub fn new(symbols: Vec<u32>) -> Self {
        Word(symbols)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u32] {
        &self.0
    }

    pub fn first(&self) -> Option<u32> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<u32> {
        self.0.last().copied()
    }

    /// Prefix with `len` symbols (cylinder index `len - 1`).
    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len.min(self.0.len())].to_vec())
    }

    /// `self` followed by `tail`.
    pub fn concat(&self, tail: &[u32]) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(tail);
        Word(v)
    }

    pub fn push(&mut self, s: u32) {
        self.0.push(s);
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Transition structure of the truncated chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TransitionRule {
    /// Every pair admissible (Bernoulli / full shift).
    Full,
    /// From id 0 everything is allowed; from id `i > 0` only ids `j < i`.
    /// In digit terms (digit = id + 1): `a(1,j) = 1` for all `j`, and
    /// `a(i,j) = 1` iff `1 <= j < i` for `i > 1`.
    StrictlyDecreasingFromSecond,
    /// Dense 0/1 matrix, row-major.
    Dense(Vec<Vec<bool>>),
}

/// Model of the truncated tail of a countable alphabet, used to turn
/// truncation error into explicit brackets: upper bounds for the per-symbol
/// sup cylinder weight of the log-derivative potential at parameter `t`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TailDescriptor {
    /// `sup weight(id) <= digit^(-2t)`, digit = id + 1 (Gauss family).
    GaussLike,
    /// `sup weight(id) <= (digit*(digit+1))^(-t)` (Lüroth).
    LurothLike,
    /// `sup weight(id) <= c * (alpha*(id+1))^(-t(1+1/alpha))` (induced
    /// intermittent blocks).
    InducedPolynomial { alpha: f64, c: f64 },
}

impl TailDescriptor {
    /// Upper bound on `sum_{id >= a} sup_weight(id, t)`; `f64::INFINITY`
    /// signals that the countable sum genuinely diverges at this `t`.
    pub fn tail_sum_bound(&self, t: f64, a: u32) -> f64 {
        let a = a as f64;
        match self {
            // sum_{d > a} d^(-2t) <= a^(1-2t)/(2t-1)
            TailDescriptor::GaussLike | TailDescriptor::LurothLike => {
                let e = 2.0 * t;
                if e <= 1.0 {
                    f64::INFINITY
                } else {
                    a.powf(1.0 - e) / (e - 1.0)
                }
            }
            TailDescriptor::InducedPolynomial { alpha, c } => {
                let e = t * (1.0 + 1.0 / alpha);
                if e <= 1.0 {
                    f64::INFINITY
                } else {
                    c * alpha.powf(-e) * a.powf(1.0 - e) / (e - 1.0)
                }
            }
        }
    }
}

/// Finite-alphabet approximation of a (possibly countable) topological Markov
/// chain. Immutable after construction; cheap to clone.
#[derive(Debug, Clone)]
pub struct TruncatedChain {
    alphabet_size: u32,
    rule: TransitionRule,
    dense: Option<Arc<Vec<Vec<bool>>>>,
    pub full_alphabet_countable: bool,
    pub tail: Option<TailDescriptor>,
}

impl TruncatedChain {
    pub fn full_shift(alphabet_size: u32) -> Self {
        assert!(alphabet_size >= 1);
        TruncatedChain {
            alphabet_size,
            rule: TransitionRule::Full,
            dense: None,
            full_alphabet_countable: false,
            tail: None,
        }
    }

    /// Full shift truncated from a countable alphabet.
    pub fn full_shift_countable(alphabet_size: u32, tail: TailDescriptor) -> Self {
        let mut c = Self::full_shift(alphabet_size);
        c.full_alphabet_countable = true;
        c.tail = Some(tail);
        c
    }

    pub fn from_dense(matrix: Vec<Vec<bool>>) -> Result<Self> {
        let a = matrix.len() as u32;
        if a == 0 || matrix.iter().any(|r| r.len() != a as usize) {
            return Err(Error::InvalidParameter(
                "transition matrix must be square and nonempty".into(),
            ));
        }
        Ok(TruncatedChain {
            alphabet_size: a,
            rule: TransitionRule::Dense(vec![]),
            dense: Some(Arc::new(matrix)),
            full_alphabet_countable: false,
            tail: None,
        })
    }

    /// Truncation of the non-Bernoulli modification of the full shift: id 0
    /// reaches every symbol, id `i > 0` reaches exactly ids `0..i`.
    pub fn strictly_decreasing_from_second(
        alphabet_size: u32,
        tail: Option<TailDescriptor>,
    ) -> Self {
        TruncatedChain {
            alphabet_size,
            rule: TransitionRule::StrictlyDecreasingFromSecond,
            dense: None,
            full_alphabet_countable: tail.is_some(),
            tail,
        }
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn is_admissible_pair(&self, a: u32, b: u32) -> bool {
        if a >= self.alphabet_size || b >= self.alphabet_size {
            return false;
        }
        match (&self.rule, &self.dense) {
            (_, Some(m)) => m[a as usize][b as usize],
            (TransitionRule::Full, _) => true,
            (TransitionRule::StrictlyDecreasingFromSecond, _) => a == 0 || b < a,
            (TransitionRule::Dense(_), None) => unreachable!(),
        }
    }

    pub fn is_admissible_word(&self, w: &Word) -> bool {
        w.symbols().iter().all(|&s| s < self.alphabet_size)
            && w.symbols().windows(2).all(|p| self.is_admissible_pair(p[0], p[1]))
    }

    pub fn successors(&self, a: u32) -> impl Iterator<Item = u32> + '_ {
        (0..self.alphabet_size).filter(move |&b| self.is_admissible_pair(a, b))
    }

    pub fn least_successor(&self, a: u32) -> Option<u32> {
        self.successors(a).next()
    }
}

/// Rule producing the tail of a symbolic point beyond its explicit head.
#[derive(Debug, Clone)]
pub enum TailRule {
    /// Repeatedly append the least admissible symbol (the artifact's
    /// canonical extension of a finite word).
    Canonical,
    /// Repeat the head periodically (head must be cyclically admissible).
    PeriodicHead,
    /// Explicit digit stream after the head; canonical beyond it.
    Digits(Arc<Vec<u32>>),
}

/// A point of the shift space: nonempty explicit head plus a tail rule that
/// always produces admissible continuations.
#[derive(Debug, Clone)]
pub struct SymbolicPoint {
    pub head: Word,
    pub tail_rule: TailRule,
    chain: TruncatedChain,
}

impl SymbolicPoint {
    pub fn new(chain: &TruncatedChain, head: Word, tail_rule: TailRule) -> Result<Self> {
        if head.is_empty() {
            return Err(Error::InvalidParameter("symbolic point needs a nonempty head".into()));
        }
        if !chain.is_admissible_word(&head) {
            let (a, b) = first_bad_pair(chain, &head);
            return Err(Error::Inadmissible { a, b });
        }
        if let TailRule::Digits(d) = &tail_rule {
            let mut prev = head.last().unwrap();
            for &s in d.iter() {
                if !chain.is_admissible_pair(prev, s) {
                    return Err(Error::Inadmissible { a: prev, b: s });
                }
                prev = s;
            }
        }
        Ok(SymbolicPoint { head, tail_rule, chain: chain.clone() })
    }

    /// Canonical extension of a finite word.
    pub fn canonical(chain: &TruncatedChain, head: Word) -> Result<Self> {
        Self::new(chain, head, TailRule::Canonical)
    }

    pub fn periodic(chain: &TruncatedChain, head: Word) -> Result<Self> {
        let p = Self::new(chain, head, TailRule::PeriodicHead)?;
        let (f, l) = (p.head.first().unwrap(), p.head.last().unwrap());
        if !p.chain.is_admissible_pair(l, f) {
            return Err(Error::Inadmissible { a: l, b: f });
        }
        Ok(p)
    }

    pub fn chain(&self) -> &TruncatedChain {
        &self.chain
    }

    /// Symbol at position `k` (0-based). Sequential access is O(1) amortized
    /// for head/periodic/stored positions and O(k) past the stored stream.
    pub fn symbol_at(&self, k: usize) -> u32 {
        let h = self.head.len();
        if k < h {
            return self.head.0[k];
        }
        match &self.tail_rule {
            TailRule::PeriodicHead => self.head.0[k % h],
            TailRule::Canonical => self.canonical_from(self.head.0[h - 1], k - h),
            TailRule::Digits(d) => {
                let idx = k - h;
                if idx < d.len() {
                    d[idx]
                } else {
                    let seed = if d.is_empty() { self.head.0[h - 1] } else { d[d.len() - 1] };
                    self.canonical_from(seed, idx - d.len())
                }
            }
        }
    }

    fn canonical_from(&self, seed: u32, steps_past: usize) -> u32 {
        let mut last = seed;
        for _ in 0..=steps_past {
            last = self
                .chain
                .least_successor(last)
                .expect("chain has a dead-end symbol");
        }
        last
    }

    /// First `n` symbols as a word.
    pub fn word_prefix(&self, n: usize) -> Word {
        Word((0..n).map(|k| self.symbol_at(k)).collect())
    }
}

fn first_bad_pair(chain: &TruncatedChain, w: &Word) -> (u32, u32) {
    for p in w.symbols().windows(2) {
        if !chain.is_admissible_pair(p[0], p[1]) {
            return (p[0], p[1]);
        }
    }
    let bad = w.symbols().iter().copied().find(|&s| s >= chain.alphabet_size()).unwrap_or(0);
    (bad, bad)
}

/// Symbolic metric `2^(-m)` with `m` the first index of disagreement.
/// Agreement through `max_depth` is reported as `0.0` with the depth-limited
/// flag set (the true distance is `<= 2^(-max_depth)`).
pub fn metric(x: &SymbolicPoint, y: &SymbolicPoint, max_depth: usize) -> (f64, bool) {
    for m in 0..max_depth {
        if x.symbol_at(m) != y.symbol_at(m) {
            return (2f64.powi(-(m as i32)), false);
        }
    }
    (0.0, true)
}

/// Deterministic lexicographic depth-first enumeration of admissible words of
/// a fixed length, pruning on inadmissible pairs.
pub struct WordIter<'a> {
    chain: &'a TruncatedChain,
    length: usize,
    first: Option<u32>,
    last: Option<u32>,
    stack: Vec<u32>,
    /// `next_try[d]` is the next candidate symbol at depth `d`;
    /// `next_try.len() == stack.len() + 1` while running.
    next_try: Vec<u32>,
    done: bool,
}

impl<'a> Iterator for WordIter<'a> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        loop {
            let d = self.stack.len();
            if d == self.length {
                let w = Word(self.stack.clone());
                self.stack.pop();
                self.next_try.pop();
                if self.last.map_or(true, |l| w.last() == Some(l)) {
                    return Some(w);
                }
                continue;
            }
            let hi = match (d, self.first) {
                (0, Some(f)) => f + 1,
                _ => self.chain.alphabet_size(),
            };
            let lo = match (d, self.first) {
                (0, Some(f)) => self.next_try[d].max(f),
                _ => self.next_try[d],
            };
            let mut chosen = None;
            for s in lo..hi {
                let ok = match self.stack.last() {
                    None => true,
                    Some(&p) => self.chain.is_admissible_pair(p, s),
                };
                if ok {
                    chosen = Some(s);
                    break;
                }
            }
            match chosen {
                Some(s) => {
                    self.next_try[d] = s + 1;
                    self.stack.push(s);
                    self.next_try.push(0);
                }
                None => {
                    if d == 0 {
                        self.done = true;
                        return None;
                    }
                    self.stack.pop();
                    self.next_try.pop();
                }
            }
        }
    }
}

/// Enumerate admissible words of exactly `length` symbols in lexicographic
/// order, optionally fixing the first and/or last symbol. Errors out if the
/// loose projection of the count exceeds `cap`.
pub fn enumerate_words<'a>(
    chain: &'a TruncatedChain,
    length: usize,
    first: Option<Symbol>,
    last: Option<Symbol>,
    cap: u64,
) -> Result<WordIter<'a>> {
    if length == 0 {
        return Err(Error::InvalidParameter("word length must be >= 1".into()));
    }
    let free = length as i32 - i32::from(first.is_some());
    let projected = (chain.alphabet_size() as f64).powi(free.max(0));
    if projected > cap as f64 {
        return Err(Error::ResourceCap { projected, cap });
    }
    Ok(WordIter {
        chain,
        length,
        first: first.map(|s| s.0),
        last: last.map(|s| s.0),
        stack: Vec::with_capacity(length),
        next_try: vec![0],
        done: false,
    })
}

/// Collect `enumerate_words` into a vector.
pub fn collect_words(
    chain: &TruncatedChain,
    length: usize,
    first: Option<Symbol>,
    last: Option<Symbol>,
    cap: u64,
) -> Result<Vec<Word>> {
    Ok(enumerate_words(chain, length, first, last, cap)?.collect())
}

/// Report of `check_properties`.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    /// `Some(p)` when the p-th matrix power is strictly positive.
    pub mixing_witness_power: Option<u32>,
    /// False when the power bound was exhausted before the reachability
    /// pattern stabilized; mixing status is then inconclusive.
    pub mixing_conclusive: bool,
    pub big_images: bool,
    pub bi_witness: Vec<u32>,
    pub big_images_and_preimages: bool,
    pub bip_witness: Vec<u32>,
    pub bernoulli: bool,
}

/// Verify topological mixing by boolean matrix powers up to `power_bound`,
/// and the BI/BIP properties with a greedy finite witness set.
pub fn check_properties(chain: &TruncatedChain, power_bound: u32) -> PropertyReport {
    let a = chain.alphabet_size() as usize;
    let base: Vec<Vec<bool>> = (0..a)
        .map(|i| (0..a).map(|j| chain.is_admissible_pair(i as u32, j as u32)).collect())
        .collect();
    let mut cur = base.clone();
    let mut mixing_witness_power = None;
    let mut conclusive = false;
    let mut seen: Vec<Vec<Vec<bool>>> = vec![base.clone()];
    for p in 1..=power_bound {
        if cur.iter().all(|row| row.iter().all(|&x| x)) {
            mixing_witness_power = Some(p);
            conclusive = true;
            break;
        }
        let mut next = vec![vec![false; a]; a];
        for i in 0..a {
            for k in 0..a {
                if cur[i][k] {
                    for (j, cell) in next[i].iter_mut().enumerate() {
                        if base[k][j] {
                            *cell = true;
                        }
                    }
                }
            }
        }
        if seen.contains(&next) {
            // the boolean power pattern entered a cycle without a strictly
            // positive power: not mixing
            conclusive = true;
            break;
        }
        seen.push(next.clone());
        cur = next;
    }

    // BI: greedy witness set such that every symbol has a successor in it.
    let mut bi_witness: Vec<u32> = Vec::new();
    let mut covered = vec![false; a];
    while !covered.iter().all(|&c| c) {
        let mut best = None;
        let mut best_count = 0usize;
        for cand in 0..a {
            let count = (0..a).filter(|&i| !covered[i] && base[i][cand]).count();
            if count > best_count {
                best_count = count;
                best = Some(cand);
            }
        }
        match best {
            Some(c) => {
                bi_witness.push(c as u32);
                for i in 0..a {
                    if base[i][c] {
                        covered[i] = true;
                    }
                }
            }
            None => break,
        }
    }
    let big_images = covered.iter().all(|&c| c);

    // BIP: additionally every symbol needs a predecessor in the witness set.
    let mut bip_witness = bi_witness.clone();
    let pred_ok = |w: &[u32], i: usize| w.iter().any(|&k| base[k as usize][i]);
    if big_images {
        for cand in 0..a {
            if (0..a).all(|i| pred_ok(&bip_witness, i)) {
                break;
            }
            let helps = (0..a).any(|i| !pred_ok(&bip_witness, i) && base[cand][i]);
            if helps {
                bip_witness.push(cand as u32);
            }
        }
    }
    let bip = big_images && (0..a).all(|i| pred_ok(&bip_witness, i));
    if !bip {
        bip_witness.clear();
    }

    let bernoulli = base.iter().all(|row| row.iter().all(|&x| x));

    PropertyReport {
        mixing_witness_power,
        mixing_conclusive: conclusive,
        big_images,
        bi_witness,
        big_images_and_preimages: bip,
        bip_witness,
        bernoulli,
    }
}

/// Count admissible words of `length` symbols starting at `first` via row
/// sums of the (length-1)-th matrix power.
pub fn word_count_from(chain: &TruncatedChain, length: usize, first: Symbol) -> f64 {
    assert!(length >= 1);
    let a = chain.alphabet_size() as usize;
    let mut v = vec![1.0f64; a];
    for _ in 0..length - 1 {
        let mut next = vec![0.0; a];
        for (i, nx) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, vj) in v.iter().enumerate() {
                if chain.is_admissible_pair(i as u32, j as u32) {
                    acc += vj;
                }
            }
            *nx = acc;
        }
        v = next;
    }
    v[first.0 as usize]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn full2() -> TruncatedChain {
        TruncatedChain::full_shift(2)
    }

    #[test]
    fn metric_examples() {
        let c = TruncatedChain::full_shift(5);
        let x = SymbolicPoint::canonical(&c, Word::new(vec![1, 2, 3])).unwrap();
        let y = SymbolicPoint::canonical(&c, Word::new(vec![1, 2, 4])).unwrap();
        assert_eq!(metric(&x, &y, 64), (0.25, false));

        let p = SymbolicPoint::periodic(&c, Word::new(vec![1, 2])).unwrap();
        let q = SymbolicPoint::periodic(&c, Word::new(vec![1, 2])).unwrap();
        let (d, limited) = metric(&p, &q, 64);
        assert_eq!(d, 0.0);
        assert!(limited);

        let x0 = SymbolicPoint::canonical(&c, Word::new(vec![0])).unwrap();
        let x1 = SymbolicPoint::canonical(&c, Word::new(vec![1])).unwrap();
        assert_eq!(metric(&x0, &x1, 64).0, 1.0);
    }

    #[test]
    fn enumerate_full_two_shift_len3() {
        let c = full2();
        let words = collect_words(&c, 3, None, None, 1 << 20).unwrap();
        assert_eq!(words.len(), 8);
        let mut sorted = words.clone();
        sorted.sort();
        assert_eq!(words, sorted);
        assert_eq!(words[0], Word::new(vec![0, 0, 0]));
        assert_eq!(words[7], Word::new(vec![1, 1, 1]));
    }

    #[test]
    fn enumerate_modified_gauss_truncation() {
        // digits 1..=3 are ids 0..=2; "first = digit 3" is id 2, and the
        // admissible continuations are digits 1 and 2 (ids 0 and 1)
        let c = TruncatedChain::strictly_decreasing_from_second(3, None);
        let words = collect_words(&c, 2, Some(Symbol(2)), None, 1 << 20).unwrap();
        assert_eq!(words, vec![Word::new(vec![2, 0]), Word::new(vec![2, 1])]);
    }

    #[test]
    fn enumerate_empty_when_no_path() {
        let c = TruncatedChain::from_dense(vec![vec![false, true], vec![true, true]]).unwrap();
        let words = collect_words(&c, 2, Some(Symbol(0)), Some(Symbol(0)), 1 << 20).unwrap();
        assert!(words.is_empty());
    }

    #[test]
    fn enumeration_cap_errors() {
        let c = TruncatedChain::full_shift(10);
        assert!(matches!(
            enumerate_words(&c, 12, None, None, 1000).map(|_| ()),
            Err(Error::ResourceCap { .. })
        ));
    }

    #[test]
    fn properties_full_shift() {
        let r = check_properties(&TruncatedChain::full_shift(4), 32);
        assert_eq!(r.mixing_witness_power, Some(1));
        assert!(r.big_images && r.big_images_and_preimages && r.bernoulli);
        assert_eq!(r.bip_witness.len(), 1);
    }

    #[test]
    fn properties_modified_gauss() {
        let r = check_properties(&TruncatedChain::strictly_decreasing_from_second(8, None), 64);
        assert!(r.mixing_witness_power.is_some());
        assert!(r.big_images_and_preimages);
        assert!(!r.bernoulli);
    }

    #[test]
    fn properties_period_two_not_mixing() {
        let c = TruncatedChain::from_dense(vec![vec![false, true], vec![true, false]]).unwrap();
        let r = check_properties(&c, 64);
        assert_eq!(r.mixing_witness_power, None);
        assert!(r.mixing_conclusive);
    }

    #[test]
    fn word_counts_match_matrix_powers() {
        for a in [2u32, 3, 5, 12] {
            let c = TruncatedChain::strictly_decreasing_from_second(a, None);
            for n in 1..=8usize {
                if (a as f64).powi(n as i32) > 2e6 {
                    continue;
                }
                for i in 0..a {
                    let listed = collect_words(&c, n, Some(Symbol(i)), None, 1 << 22)
                        .unwrap()
                        .len() as f64;
                    let counted = word_count_from(&c, n, Symbol(i));
                    assert_eq!(listed, counted, "a={a} n={n} i={i}");
                }
            }
        }
    }

    #[test]
    fn enumerated_words_are_admissible() {
        let c = TruncatedChain::strictly_decreasing_from_second(6, None);
        for w in enumerate_words(&c, 5, None, None, 1 << 22).unwrap() {
            assert!(c.is_admissible_word(&w));
        }
    }

    #[test]
    fn canonical_extension_is_admissible() {
        let c = TruncatedChain::strictly_decreasing_from_second(6, None);
        let p = SymbolicPoint::canonical(&c, Word::new(vec![5])).unwrap();
        for k in 0..20 {
            assert!(c.is_admissible_pair(p.symbol_at(k), p.symbol_at(k + 1)));
        }
    }

    proptest! {
        #[test]
        fn metric_symmetry_and_ultrametric(
            ha in proptest::collection::vec(0u32..4, 1..6),
            hb in proptest::collection::vec(0u32..4, 1..6),
            hc in proptest::collection::vec(0u32..4, 1..6),
        ) {
            let c = TruncatedChain::full_shift(4);
            let x = SymbolicPoint::periodic(&c, Word::new(ha)).unwrap();
            let y = SymbolicPoint::periodic(&c, Word::new(hb)).unwrap();
            let z = SymbolicPoint::periodic(&c, Word::new(hc)).unwrap();
            let d = |u: &SymbolicPoint, v: &SymbolicPoint| metric(u, v, 128).0;
            prop_assert_eq!(d(&x, &y), d(&y, &x));
            prop_assert!(d(&x, &z) <= d(&x, &y).max(d(&y, &z)) + 1e-15);
        }
    }
}
