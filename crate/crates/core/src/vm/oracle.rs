//! Universes, verdicts, jumps, and oracle queries.
//!
//! A universe assigns machines (and optionally certified verdicts) to
//! indices. The canonical universe is the Gödel numbering itself; whitelist
//! universes carry explicit entries and rule-based layouts, so their jump is
//! an exactly computable stream instead of something only approximable.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::baire::{pair, unpair, Stream, Word};
use crate::error::{Error, Result};

use super::{decode_program, run_for_halting, run_limit, MachineCode, Program};

/// Certified halting behavior of a whitelisted machine, as a predicate on
/// input streams.
#[derive(Debug, Clone)]
pub enum Verdict {
    /// Halts on every input.
    Halts,
    /// Halts on no input.
    Loops,
    /// Halts iff input cell `cell` equals `value`.
    InputCellEq { cell: u64, value: u64 },
    /// Halts iff the machine `code`, run on the queried stream, rewrites
    /// output cell `cell` at some step past `after`. Certified
    /// observationally within `probe` steps.
    CellRewriteAfter { code: MachineCode, cell: u64, after: u64, probe: u64 },
    /// Halts iff some later member of the interleaved input disagrees with
    /// member `t` at position `pos`; members `t+1 ..= t+probe` are examined.
    DiagChangesAfter { pos: u64, t: u64, probe: u64 },
    /// Per-prefix certificates: `(w, true)` means the machine halts on every
    /// extension of `w`, `(w, false)` that it halts on none.
    ExtensionTable(Vec<(Word, bool)>),
}

/// Evaluate a verdict against a concrete input stream.
pub fn eval_verdict(v: &Verdict, p: &Stream) -> Result<bool> {
    match v {
        Verdict::Halts => Ok(true),
        Verdict::Loops => Ok(false),
        Verdict::InputCellEq { cell, value } => Ok(p.get(*cell)? == *value),
        Verdict::CellRewriteAfter { code, cell, after, probe } => {
            let run = run_limit(code, p, *probe)?;
            Ok(run
                .history
                .get(cell)
                .map(|h| h.iter().any(|e| e.step > *after))
                .unwrap_or(false))
        }
        Verdict::DiagChangesAfter { pos, t, probe } => {
            let base = p.get(pair(*t, *pos))?;
            for j in (*t + 1)..=(*t + *probe) {
                if p.get(pair(j, *pos))? != base {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Verdict::ExtensionTable(certs) => {
            for (w, halts) in certs {
                let matches = w
                    .iter()
                    .enumerate()
                    .map(|(i, &want)| Ok(p.get(i as u64)? == want))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .all(|b| b);
                if matches {
                    return Ok(*halts);
                }
            }
            Err(Error::VerdictFailure {
                index: 0,
                reason: "no extension certificate matches the queried stream".into(),
            })
        }
    }
}

/// A whitelisted machine: a program, a certified verdict, or both.
#[derive(Debug, Clone, Default)]
pub struct UniverseEntry {
    pub program: Option<MachineCode>,
    pub verdict: Option<Verdict>,
}

/// Rule-based index layouts for whitelist universes.
#[derive(Debug, Clone)]
pub enum Layout {
    /// Index `m` answers "input cell n equals k" with `(n,k) = unpair(m)`.
    Comparators,
    /// Even index `2m`: comparator for `unpair(m)`. Odd index `2m+1`:
    /// stability monitor for `code` with cell `m & 63` and step threshold
    /// `m >> 6`. Cell indices are capped at 64 by the packing.
    JumpNf { code: MachineCode, probe: u64 },
    /// Index mod 3 splits three families: comparators (`3m`), diagonal
    /// settling monitors (`3m+1`, position `m & 63`, member `m >> 6`), and a
    /// halts-on-zero-input family (`3m+2`, reflecting whether the explicit
    /// entry machine `m` halts on the zero stream within `probe`).
    HJump { probe: u64 },
}

/// An assignment of machines to indices.
#[derive(Debug, Clone, Default)]
pub struct Universe {
    pub entries: BTreeMap<u64, UniverseEntry>,
    pub layout: Option<Layout>,
    /// Fall back to the Gödel numbering for indices without entries.
    pub canonical_fallback: bool,
}

impl Universe {
    /// The Gödel numbering itself.
    pub fn canonical() -> Self {
        Universe { entries: BTreeMap::new(), layout: None, canonical_fallback: true }
    }

    /// Empty whitelist, to be populated with entries.
    pub fn whitelist() -> Self {
        Universe::default()
    }

    pub fn with_layout(layout: Layout) -> Self {
        Universe { entries: BTreeMap::new(), layout: Some(layout), canonical_fallback: false }
    }

    pub fn insert(&mut self, index: u64, entry: UniverseEntry) {
        self.entries.insert(index, entry);
    }

    /// Program registered at an index, if any.
    pub fn program_at(&self, index: u64) -> Option<Program> {
        if let Some(e) = self.entries.get(&index) {
            if let Some(code) = &e.program {
                return Some(code.program().clone());
            }
        }
        if self.canonical_fallback {
            return Some(decode_program(&BigUint::from(index)));
        }
        None
    }

    /// Certified verdict at an index: explicit entries first, then the layout.
    pub fn verdict_at(&self, index: u64) -> Option<Verdict> {
        if let Some(e) = self.entries.get(&index) {
            if let Some(v) = &e.verdict {
                return Some(v.clone());
            }
        }
        match &self.layout {
            Some(Layout::Comparators) => {
                let (cell, value) = unpair(index);
                Some(Verdict::InputCellEq { cell, value })
            }
            Some(Layout::JumpNf { code, probe }) => {
                if index % 2 == 0 {
                    let (cell, value) = unpair(index / 2);
                    Some(Verdict::InputCellEq { cell, value })
                } else {
                    let m = (index - 1) / 2;
                    Some(Verdict::CellRewriteAfter {
                        code: code.clone(),
                        cell: m & 63,
                        after: m >> 6,
                        probe: *probe,
                    })
                }
            }
            Some(Layout::HJump { probe }) => match index % 3 {
                0 => {
                    let (cell, value) = unpair(index / 3);
                    Some(Verdict::InputCellEq { cell, value })
                }
                1 => {
                    let m = (index - 1) / 3;
                    Some(Verdict::DiagChangesAfter { pos: m & 63, t: m >> 6, probe: *probe })
                }
                _ => {
                    let m = (index - 2) / 3;
                    let prog = self.entries.get(&m).and_then(|e| e.program.clone())?;
                    let halts =
                        run_for_halting(prog.program(), &Stream::constant(0), *probe).is_some();
                    Some(if halts { Verdict::Halts } else { Verdict::Loops })
                }
            },
            None => None,
        }
    }
}

/// How halting questions get answered.
#[derive(Debug, Clone)]
pub enum Oracle {
    /// Simulate for a fixed number of steps; silence is `Unknown`.
    StepBounded { universe: Arc<Universe>, budget: u64 },
    /// Answer from certified verdicts only.
    Whitelist { universe: Arc<Universe> },
}

impl Oracle {
    pub fn step_bounded(budget: u64) -> Self {
        Oracle::StepBounded { universe: Arc::new(Universe::canonical()), budget }
    }

    pub fn whitelist(universe: Universe) -> Self {
        Oracle::Whitelist { universe: Arc::new(universe) }
    }

    pub fn universe(&self) -> &Universe {
        match self {
            Oracle::StepBounded { universe, .. } => universe,
            Oracle::Whitelist { universe } => universe,
        }
    }
}

/// Answer to a halting query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Halts,
    Loops,
    Unknown,
}

/// Does machine `index` halt on `p`?
pub fn oracle_query(oracle: &Oracle, index: u64, p: &Stream) -> Result<Answer> {
    match oracle {
        Oracle::StepBounded { universe, budget } => {
            let Some(prog) = universe.program_at(index) else {
                return Err(Error::OracleGap(index));
            };
            Ok(match run_for_halting(&prog, p, *budget) {
                Some(_) => Answer::Halts,
                None => Answer::Unknown,
            })
        }
        Oracle::Whitelist { universe } => {
            let Some(v) = universe.verdict_at(index) else {
                return Err(Error::OracleGap(index));
            };
            match eval_verdict(&v, p) {
                Ok(true) => Ok(Answer::Halts),
                Ok(false) => Ok(Answer::Loops),
                Err(Error::VerdictFailure { .. }) => Ok(Answer::Unknown),
                Err(e) => Err(e),
            }
        }
    }
}

/// Budgeted jump approximation: bit `i` (for `i < width`) is 1 iff the
/// universe's machine at `i` halts on `p` within the budget. Entries with a
/// verdict but no program use the verdict.
pub fn jump_approx(universe: &Universe, p: &Stream, budget: u64, width: u64) -> Result<Word> {
    let mut bits = Vec::with_capacity(width as usize);
    for i in 0..width {
        let bit = if let Some(prog) = universe.program_at(i) {
            run_for_halting(&prog, p, budget).is_some()
        } else if let Some(v) = universe.verdict_at(i) {
            eval_verdict(&v, p)?
        } else {
            return Err(Error::OracleGap(i));
        };
        bits.push(bit as u64);
    }
    Ok(bits)
}

/// Exact jump over a whitelist universe: bit `i` is the certified verdict of
/// machine `i` on `p`. Lazy; erroring on gaps.
pub fn jump_exact(universe: Arc<Universe>, p: Stream) -> Stream {
    // All the monitor bits of a jump-normal-form layout derive from one
    // simulation of the monitored machine on `p`, so run it once per stream
    // and answer those queries from the recorded rewrite history.
    if let Some(Layout::JumpNf { code, probe }) = universe.layout.clone() {
        let history = std::sync::Mutex::new(None);
        return Stream::from_fn(move |i| {
            if i % 2 == 1 && !universe.entries.contains_key(&i) {
                let m = (i - 1) / 2;
                let (cell, after) = (m & 63, m >> 6);
                let mut guard = history.lock().unwrap();
                if guard.is_none() {
                    *guard = Some(run_limit(&code, &p, probe)?.history);
                }
                let hist: &std::collections::BTreeMap<_, Vec<_>> = guard.as_ref().unwrap();
                let rewritten =
                    hist.get(&cell).map(|h| h.iter().any(|e| e.step > after)).unwrap_or(false);
                return Ok(rewritten as u64);
            }
            let Some(v) = universe.verdict_at(i) else {
                return Err(Error::OracleGap(i));
            };
            Ok(eval_verdict(&v, &p)? as u64)
        });
    }
    Stream::from_fn(move |i| {
        let Some(v) = universe.verdict_at(i) else {
            return Err(Error::OracleGap(i));
        };
        Ok(eval_verdict(&v, &p)? as u64)
    })
}

/// Enumerate the halting set of the machine at a Gödel index: naturals
/// `n < probe` (presented as `n` followed by zeros) on which it halts within
/// `budget` steps, in increasing order.
pub fn we_enumerate(index: &BigUint, probe: u64, budget: u64) -> Vec<u64> {
    let prog = decode_program(index);
    (0..probe)
        .filter(|&n| run_for_halting(&prog, &Stream::of_natural(n), budget).is_some())
        .collect()
}
