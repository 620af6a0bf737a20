//! Streams of naturals and the pairing toolkit.
//!
//! A [`Stream`] is an immutable description of a total (or machine-backed,
//! hence partial) sequence of naturals. Querying a cell never mutates the
//! description; machine-backed producers memoize, so repeated queries are
//! cheap and deterministic.

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::vm::{run_monotone, MachineCode};

/// A finite prefix of a stream.
pub type Word = Vec<u64>;

/// Cantor pairing: diagonal enumeration of pairs.
pub fn pair(n: u64, k: u64) -> u64 {
    let s = (n as u128) + (k as u128);
    let m = s * (s + 1) / 2 + k as u128;
    u64::try_from(m).expect("pair overflows u64")
}

/// Inverse of [`pair`].
pub fn unpair(m: u64) -> (u64, u64) {
    // Largest s with s(s+1)/2 <= m.
    let m128 = m as u128;
    let mut s = (((8.0 * m as f64 + 1.0).sqrt() - 1.0) / 2.0) as u128;
    while (s + 1) * (s + 2) / 2 <= m128 {
        s += 1;
    }
    while s * (s + 1) / 2 > m128 {
        s -= 1;
    }
    let k = m128 - s * (s + 1) / 2;
    ((s - k) as u64, k as u64)
}

/// Triple pairing, nested to the right: `<i,j,k> = pair(i, pair(j, k))`.
pub fn pair3(i: u64, j: u64, k: u64) -> u64 {
    pair(i, pair(j, k))
}

/// Inverse of [`pair3`].
pub fn unpair3(m: u64) -> (u64, u64, u64) {
    let (i, rest) = unpair(m);
    let (j, k) = unpair(rest);
    (i, j, k)
}

/// Bijection between naturals and finite words, via bijective base-4 digit
/// strings: blocks of bijective base-3 digits separated by the digit 4.
/// 0 is the empty word; every natural decodes to exactly one word.
pub fn word_from_index(mut n: u64) -> Word {
    if n == 0 {
        return Vec::new();
    }
    let mut digits = Vec::new();
    while n > 0 {
        let d = ((n - 1) % 4) + 1;
        digits.push(d);
        n = (n - 1) / 4;
    }
    digits.reverse();
    let mut out = Vec::new();
    let mut cur: u64 = 0;
    for d in digits {
        if d == 4 {
            out.push(cur);
            cur = 0;
        } else {
            cur = cur * 3 + d;
        }
    }
    out.push(cur);
    out
}

/// Inverse of [`word_from_index`].
pub fn word_to_index(w: &[u64]) -> u64 {
    if w.is_empty() {
        return 0;
    }
    let mut digits: Vec<u64> = Vec::new();
    for (pos, &v) in w.iter().enumerate() {
        if pos > 0 {
            digits.push(4);
        }
        let mut block = Vec::new();
        let mut v = v;
        while v > 0 {
            let d = ((v - 1) % 3) + 1;
            block.push(d);
            v = (v - 1) / 3;
        }
        block.reverse();
        digits.extend(block);
    }
    let mut n: u64 = 0;
    for d in digits {
        n = n * 4 + d;
    }
    n
}

/// Index into a product of finitely or infinitely many streams, as used by
/// the interleavings below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TupleIndex {
    /// Which component.
    pub component: u64,
    /// Position within that component.
    pub position: u64,
}

impl TupleIndex {
    /// Cell of the omega-interleaving that carries this tuple position.
    pub fn flatten(self) -> u64 {
        pair(self.component, self.position)
    }

    /// Inverse of [`TupleIndex::flatten`].
    pub fn unflatten(cell: u64) -> Self {
        let (component, position) = unpair(cell);
        TupleIndex { component, position }
    }
}

type LazyFn = dyn Fn(u64) -> Result<u64> + Send + Sync;
type FamilyFn = dyn Fn(u64) -> Stream + Send + Sync;

enum Producer {
    Const(u64),
    Periodic(Vec<u64>),
    WordThenConst(Word, u64),
    /// Output of a monotone machine on `input`, queried with a per-call
    /// step budget. Cells are memoized once produced.
    Machine {
        code: MachineCode,
        input: Stream,
        budget: u64,
    },
    Interleave2(Stream, Stream),
    InterleaveOmega(Arc<FamilyFn>),
    Prepend(u64, Stream),
    Skip(Stream, u64),
    Lazy(Arc<LazyFn>),
}

struct Inner {
    producer: Producer,
    cache: Mutex<Vec<u64>>,
    // host-function cells are pure but can be expensive (oracle verdicts
    // simulate machines), so successful queries are memoized sparsely
    sparse: Mutex<std::collections::HashMap<u64, u64>>,
    // a machine run with a fixed budget is deterministic: once it has been
    // played out, cells beyond its output stay out of reach forever
    ran: std::sync::atomic::AtomicBool,
}

/// An immutable stream of naturals.
#[derive(Clone)]
pub struct Stream(Arc<Inner>);

impl fmt::Debug for Stream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.producer {
            Producer::Const(n) => write!(f, "const:{n}"),
            Producer::Periodic(w) => write!(f, "periodic:{w:?}"),
            Producer::WordThenConst(w, n) => write!(f, "word:{w:?} then const:{n}"),
            Producer::Machine { budget, .. } => write!(f, "machine(budget={budget})"),
            Producer::Interleave2(_, _) => write!(f, "interleave2"),
            Producer::InterleaveOmega(_) => write!(f, "interleave_omega"),
            Producer::Prepend(n, _) => write!(f, "prepend({n})"),
            Producer::Skip(_, k) => write!(f, "skip({k})"),
            Producer::Lazy(_) => write!(f, "lazy"),
        }
    }
}

impl Stream {
    fn new(producer: Producer) -> Self {
        Stream(Arc::new(Inner {
            producer,
            cache: Mutex::new(Vec::new()),
            sparse: Mutex::new(std::collections::HashMap::new()),
            ran: std::sync::atomic::AtomicBool::new(false),
        }))
    }

    /// The constant stream of `n`.
    pub fn constant(n: u64) -> Self {
        Stream::new(Producer::Const(n))
    }

    /// Periodic repetition of a nonempty word.
    pub fn periodic(word: Word) -> Self {
        assert!(!word.is_empty(), "periodic stream needs a nonempty period");
        Stream::new(Producer::Periodic(word))
    }

    /// A finite word followed by a constant tail.
    pub fn word_then_const(word: Word, tail: u64) -> Self {
        Stream::new(Producer::WordThenConst(word, tail))
    }

    /// Output of a monotone machine on `input`. Each cell query re-runs the
    /// machine with the given step budget until enough cells are produced;
    /// produced cells are memoized.
    pub fn machine(code: MachineCode, input: Stream, budget: u64) -> Self {
        Stream::new(Producer::Machine { code, input, budget })
    }

    /// Pairing of two streams: even cells from `p`, odd cells from `q`.
    pub fn interleave2(p: Stream, q: Stream) -> Self {
        Stream::new(Producer::Interleave2(p, q))
    }

    /// Pairing of a family of streams: cell `pair(n, k)` is cell `k` of the
    /// `n`-th member.
    pub fn interleave_omega<F>(family: F) -> Self
    where
        F: Fn(u64) -> Stream + Send + Sync + 'static,
    {
        Stream::new(Producer::InterleaveOmega(Arc::new(family)))
    }

    /// Pairing of a finite list of streams, padded with `pad` beyond the end.
    pub fn interleave_list(members: Vec<Stream>, pad: Stream) -> Self {
        Stream::interleave_omega(move |n| {
            members.get(n as usize).cloned().unwrap_or_else(|| pad.clone())
        })
    }

    /// `n` followed by `p`.
    pub fn prepend(n: u64, p: Stream) -> Self {
        Stream::new(Producer::Prepend(n, p))
    }

    /// `p` with the first `k` cells dropped.
    pub fn skip(p: Stream, k: u64) -> Self {
        Stream::new(Producer::Skip(p, k))
    }

    /// A stream computed by an arbitrary pure host function.
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(u64) -> Result<u64> + Send + Sync + 'static,
    {
        Stream::new(Producer::Lazy(Arc::new(f)))
    }

    /// A natural presented as machine input: `n` followed by zeros.
    pub fn of_natural(n: u64) -> Self {
        Stream::word_then_const(vec![n], 0)
    }

    /// Component `n` of an omega-interleaved stream.
    pub fn component(self, n: u64) -> Stream {
        Stream::from_fn(move |k| self.get(pair(n, k)))
    }

    /// Cell `n`.
    pub fn get(&self, n: u64) -> Result<u64> {
        match &self.0.producer {
            Producer::Const(c) => Ok(*c),
            Producer::Periodic(w) => Ok(w[(n % w.len() as u64) as usize]),
            Producer::WordThenConst(w, tail) => {
                Ok(if (n as usize) < w.len() { w[n as usize] } else { *tail })
            }
            Producer::Machine { code, input, budget } => {
                use std::sync::atomic::Ordering;
                {
                    let cache = self.0.cache.lock().unwrap();
                    if (n as usize) < cache.len() {
                        return Ok(cache[n as usize]);
                    }
                    if self.0.ran.load(Ordering::SeqCst) {
                        return Err(Error::StreamBudget { cell: n, budget: *budget });
                    }
                }
                let run = run_monotone(code, input, *budget)?;
                let mut cache = self.0.cache.lock().unwrap();
                if run.output.len() > cache.len() {
                    *cache = run.output;
                }
                self.0.ran.store(true, Ordering::SeqCst);
                if (n as usize) < cache.len() {
                    Ok(cache[n as usize])
                } else {
                    Err(Error::StreamBudget { cell: n, budget: *budget })
                }
            }
            Producer::Interleave2(p, q) => {
                if n % 2 == 0 {
                    p.get(n / 2)
                } else {
                    q.get(n / 2)
                }
            }
            Producer::InterleaveOmega(fam) => {
                let (comp, pos) = unpair(n);
                fam(comp).get(pos)
            }
            Producer::Prepend(head, p) => {
                if n == 0 {
                    Ok(*head)
                } else {
                    p.get(n - 1)
                }
            }
            Producer::Skip(p, k) => p.get(n + k),
            Producer::Lazy(f) => {
                if let Some(&v) = self.0.sparse.lock().unwrap().get(&n) {
                    return Ok(v);
                }
                let v = f(n)?;
                self.0.sparse.lock().unwrap().insert(n, v);
                Ok(v)
            }
        }
    }

    /// The prefix of length `len`, failing on the first unproducible cell.
    pub fn prefix(&self, len: u64) -> Result<Word> {
        (0..len).map(|n| self.get(n)).collect()
    }

    /// Decidable equality for eventually-constant and periodic descriptions;
    /// `None` when the descriptions are not of that shape.
    pub fn decidable_eq(&self, other: &Stream) -> Option<bool> {
        let a = self.eventual_form()?;
        let b = other.eventual_form()?;
        let horizon = (a.0.len().max(b.0.len()) as u64) + a.1.len().max(b.1.len()) as u64 * 2;
        for n in 0..horizon.max(2) {
            if eventual_get(&a, n) != eventual_get(&b, n) {
                return Some(false);
            }
        }
        // Beyond the combined preperiod both are periodic with known periods;
        // checking one full lcm window would be exact, a doubled window is
        // already exact for the shapes we construct.
        Some(true)
    }

    /// (preperiod word, period word) when the stream is syntactically
    /// eventually periodic.
    fn eventual_form(&self) -> Option<(Word, Word)> {
        match &self.0.producer {
            Producer::Const(c) => Some((Vec::new(), vec![*c])),
            Producer::Periodic(w) => Some((Vec::new(), w.clone())),
            Producer::WordThenConst(w, t) => Some((w.clone(), vec![*t])),
            Producer::Prepend(h, p) => {
                let (mut pre, per) = p.eventual_form()?;
                pre.insert(0, *h);
                Some((pre, per))
            }
            _ => None,
        }
    }
}

fn eventual_get(form: &(Word, Word), n: u64) -> u64 {
    let (pre, per) = form;
    if (n as usize) < pre.len() {
        pre[n as usize]
    } else {
        per[((n - pre.len() as u64) % per.len() as u64) as usize]
    }
}

/// Parse a stream literal: `const:N`, `periodic:a,b,c`,
/// `word:a,b,c then const:N`, or `machine:INDEX` (canonical monotone machine
/// on the zero stream).
pub fn parse_stream_literal(s: &str) -> Result<Stream> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("const:") {
        let n = rest.trim().parse::<u64>().map_err(|e| Error::Parse(e.to_string()))?;
        return Ok(Stream::constant(n));
    }
    if let Some(rest) = s.strip_prefix("periodic:") {
        let w = parse_word(rest)?;
        if w.is_empty() {
            return Err(Error::Parse("periodic literal needs at least one value".into()));
        }
        return Ok(Stream::periodic(w));
    }
    if let Some(rest) = s.strip_prefix("word:") {
        let Some((wpart, cpart)) = rest.split_once(" then ") else {
            return Err(Error::Parse("expected `word:a,b,c then const:N`".into()));
        };
        let w = parse_word(wpart)?;
        let Some(tail) = cpart.trim().strip_prefix("const:") else {
            return Err(Error::Parse("expected `const:N` after `then`".into()));
        };
        let n = tail.trim().parse::<u64>().map_err(|e| Error::Parse(e.to_string()))?;
        return Ok(Stream::word_then_const(w, n));
    }
    if let Some(rest) = s.strip_prefix("machine:") {
        let idx: num_bigint::BigUint =
            rest.trim().parse().map_err(|_| Error::Parse("bad machine index".into()))?;
        let code = MachineCode::from_index(&idx, crate::vm::ProgramKind::Monotone)?;
        return Ok(Stream::machine(code, Stream::constant(0), 100_000));
    }
    Err(Error::Parse(format!("unrecognized stream literal `{s}`")))
}

fn parse_word(s: &str) -> Result<Word> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_matches_closed_form() {
        // pair(n,k) = (n+k)(n+k+1)/2 + k, spot values from the diagonal walk
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(1, 0), 1);
        assert_eq!(pair(0, 1), 2);
        assert_eq!(pair(2, 0), 3);
        assert_eq!(pair(1, 1), 4);
        assert_eq!(pair(0, 2), 5);
    }

    #[test]
    fn pairing_round_trip() {
        for m in 0..10_000u64 {
            let (n, k) = unpair(m);
            assert_eq!(pair(n, k), m);
        }
        for n in 0..100 {
            for k in 0..100 {
                assert_eq!(unpair(pair(n, k)), (n, k));
            }
        }
    }

    #[test]
    fn word_index_round_trip() {
        for n in 0..20_000u64 {
            assert_eq!(word_to_index(&word_from_index(n)), n);
        }
        assert_eq!(word_from_index(0), Vec::<u64>::new());
    }

    #[test]
    fn interleave_projections() {
        let p = Stream::word_then_const(vec![9, 8, 7], 0);
        let q = Stream::constant(5);
        let both = Stream::interleave2(p.clone(), q.clone());
        for n in 0..20 {
            assert_eq!(both.get(2 * n).unwrap(), p.get(n).unwrap());
            assert_eq!(both.get(2 * n + 1).unwrap(), q.get(n).unwrap());
        }
    }

    #[test]
    fn omega_interleave_components() {
        let fam = Stream::interleave_omega(|n| Stream::constant(n * n));
        for n in 0..10 {
            for k in 0..10 {
                assert_eq!(fam.get(pair(n, k)).unwrap(), n * n);
            }
        }
        let comp3 = fam.component(3);
        assert_eq!(comp3.prefix(5).unwrap(), vec![9, 9, 9, 9, 9]);
    }

    #[test]
    fn prepend_then_skip_is_identity() {
        let p = Stream::periodic(vec![3, 1, 4, 1, 5]);
        let q = Stream::skip(Stream::prepend(42, p.clone()), 1);
        for n in 0..25 {
            assert_eq!(p.get(n).unwrap(), q.get(n).unwrap());
        }
    }

    #[test]
    fn literals_parse() {
        let s = parse_stream_literal("word:0,0,0,1 then const:0").unwrap();
        assert_eq!(s.prefix(6).unwrap(), vec![0, 0, 0, 1, 0, 0]);
        let s = parse_stream_literal("periodic:2,7").unwrap();
        assert_eq!(s.prefix(5).unwrap(), vec![2, 7, 2, 7, 2]);
        let s = parse_stream_literal("const:3").unwrap();
        assert_eq!(s.get(1000).unwrap(), 3);
        assert!(parse_stream_literal("nope").is_err());
    }

    #[test]
    fn decidable_equality_on_tame_shapes() {
        let a = Stream::word_then_const(vec![1, 1], 1);
        let b = Stream::constant(1);
        assert_eq!(a.decidable_eq(&b), Some(true));
        let c = Stream::word_then_const(vec![1, 0], 1);
        assert_eq!(a.decidable_eq(&c), Some(false));
        let lazy = Stream::from_fn(|_| Ok(1));
        assert_eq!(a.decidable_eq(&lazy), None);
    }

    #[test]
    fn queries_are_deterministic() {
        let s = Stream::interleave_omega(|n| Stream::word_then_const(vec![n, 0, n], 7));
        let first: Vec<_> = (0..64).map(|n| s.get(n).unwrap()).collect();
        let second: Vec<_> = (0..64).map(|n| s.get(n).unwrap()).collect();
        assert_eq!(first, second);
    }
}
