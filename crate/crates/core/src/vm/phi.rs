//! Monotone associates: functions on streams presented as enumerations of
//! prefix pairs `(u, v)` meaning "on inputs extending u, the output extends
//! v". Application scans a finite number of enumeration slots; a slot may be
//! vacant.
//!
//! Wire format of an associate as a stream: slot `i` occupies cells `2i` and
//! `2i+1`, holding `word_to_index(u) + 1` and `word_to_index(v) + 1`, with 0
//! marking a vacant slot.

use std::sync::Arc;

use crate::baire::{word_from_index, word_to_index, Stream, Word};
use crate::error::{Error, Result};

/// A monotone associate.
#[derive(Clone)]
pub enum PhiCode {
    /// Explicit finite table of prefix pairs.
    Explicit(Arc<Vec<(Word, Word)>>),
    /// The identity: every word maps to itself.
    Identity,
    /// The constant function with the given word-then-constant output.
    Constant { word: Word, tail: u64 },
    /// Slots read from a stream in the wire format.
    FromStream(Stream),
    /// Curried composition: apply `base` to the pairing of `fixed` with the
    /// argument.
    Smn { base: Arc<PhiCode>, fixed: Stream },
}

impl std::fmt::Debug for PhiCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhiCode::Explicit(t) => write!(f, "assoc[{} entries]", t.len()),
            PhiCode::Identity => write!(f, "assoc[identity]"),
            PhiCode::Constant { word, tail } => write!(f, "assoc[const {word:?};{tail}]"),
            PhiCode::FromStream(_) => write!(f, "assoc[stream]"),
            PhiCode::Smn { .. } => write!(f, "assoc[smn]"),
        }
    }
}

impl PhiCode {
    /// Slot `i` of the enumeration, `None` when vacant.
    pub fn entry(&self, i: u64) -> Result<Option<(Word, Word)>> {
        match self {
            PhiCode::Explicit(table) => Ok(table.get(i as usize).cloned()),
            PhiCode::Identity => {
                let w = word_from_index(i);
                Ok(Some((w.clone(), w)))
            }
            PhiCode::Constant { word, tail } => {
                let u = word_from_index(i);
                let v: Word = (0..u.len() as u64 + 1)
                    .map(|n| {
                        if (n as usize) < word.len() {
                            word[n as usize]
                        } else {
                            *tail
                        }
                    })
                    .collect();
                Ok(Some((u, v)))
            }
            PhiCode::FromStream(s) => {
                let cu = s.get(2 * i)?;
                let cv = s.get(2 * i + 1)?;
                if cu == 0 || cv == 0 {
                    return Ok(None);
                }
                Ok(Some((word_from_index(cu - 1), word_from_index(cv - 1))))
            }
            PhiCode::Smn { base, fixed } => {
                let Some((u, v)) = base.entry(i)? else {
                    return Ok(None);
                };
                // split the constraint into the fixed (even) and free (odd) halves
                let mut free = Vec::new();
                for (pos, &val) in u.iter().enumerate() {
                    if pos % 2 == 0 {
                        if fixed.get(pos as u64 / 2)? != val {
                            return Ok(None);
                        }
                    } else {
                        free.push(val);
                    }
                }
                Ok(Some((free, v)))
            }
        }
    }

    /// Render as a stream in the wire format. Word indices past u64 range
    /// surface as a parse error at query time; desk-scale words are fine.
    pub fn to_stream(&self) -> Stream {
        let code = self.clone();
        Stream::from_fn(move |cell| {
            let i = cell / 2;
            match code.entry(i)? {
                None => Ok(0),
                Some((u, v)) => {
                    let w = if cell % 2 == 0 { u } else { v };
                    Ok(word_to_index(&w) + 1)
                }
            }
        })
    }

    pub fn from_pairs(pairs: Vec<(Word, Word)>) -> Self {
        PhiCode::Explicit(Arc::new(pairs))
    }
}

fn is_prefix_of_stream(u: &[u64], q: &Stream) -> Result<bool> {
    for (n, &val) in u.iter().enumerate() {
        if q.get(n as u64)? != val {
            return Ok(false);
        }
    }
    Ok(true)
}

fn is_prefix(a: &[u64], b: &[u64]) -> bool {
    a.len() <= b.len() && a.iter().zip(b).all(|(x, y)| x == y)
}

/// Apply an associate to a stream, scanning the first `slots` enumeration
/// slots. The result is the longest output commitment among applicable
/// pairs; incomparable commitments from applicable pairs signal a malformed
/// associate.
///
/// The rule-given variants (identity, constants, smn wrappers) apply
/// analytically, equivalent to an unbounded slot scan.
pub fn phi_apply(code: &PhiCode, q: &Stream, slots: u64, want: u64) -> Result<Word> {
    match code {
        PhiCode::Identity => return q.prefix(want),
        PhiCode::Constant { word, tail } => {
            return Ok((0..want)
                .map(|n| if (n as usize) < word.len() { word[n as usize] } else { *tail })
                .collect())
        }
        PhiCode::Smn { base, fixed } => {
            let paired = Stream::interleave2(fixed.clone(), q.clone());
            return phi_apply(base, &paired, slots, want);
        }
        _ => {}
    }
    let mut best: Word = Vec::new();
    for i in 0..slots {
        let Some((u, v)) = code.entry(i)? else { continue };
        if !is_prefix_of_stream(&u, q)? {
            continue;
        }
        if is_prefix(&best, &v) {
            best = v;
        } else if !is_prefix(&v, &best) {
            return Err(Error::MalformedCode(format!(
                "slot {i} commits {v:?}, incompatible with {best:?}"
            )));
        }
    }
    best.truncate(want as usize);
    Ok(best)
}

/// Check pairwise consistency of the first `slots` slots: comparable input
/// constraints must carry comparable output commitments.
pub fn validate_assoc(code: &PhiCode, slots: u64) -> Result<()> {
    let mut entries = Vec::new();
    for i in 0..slots {
        if let Some(e) = code.entry(i)? {
            entries.push((i, e));
        }
    }
    for (i, (u1, v1)) in &entries {
        for (j, (u2, v2)) in &entries {
            if i < j && (is_prefix(u1, u2) || is_prefix(u2, u1)) {
                if !(is_prefix(v1, v2) || is_prefix(v2, v1)) {
                    return Err(Error::MalformedCode(format!(
                        "slots {i} and {j} have comparable constraints but incomparable commitments"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Parameter fixing: an associate for `q -> f(<r, q>)`.
pub fn phi_smn(code: &PhiCode, fixed: Stream) -> PhiCode {
    PhiCode::Smn { base: Arc::new(code.clone()), fixed }
}
