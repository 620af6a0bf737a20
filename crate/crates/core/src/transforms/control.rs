//! Stagewise control of limit-computable operators, jumps restricted to
//! generic inputs, and lifting machines through transparent maps.

use std::sync::Arc;

use crate::baire::{word_from_index, Stream, Word};
use crate::error::{Error, Result};
use crate::vm::{
    jump_exact, lim_code, limdelta_code, phi_apply, Answer, MachineCode, PhiCode, ProgramKind,
    Universe, Verdict,
};

use super::normal_forms::{
    comparators_universe, fmc_normal_form, jump_inverse_stream, limit_to_monotone,
    monotone_after_limit,
};

/// A computed map on streams: either honest bytecode or a host-level
/// function. Host realizers appear exactly where the underlying construction
/// is an oracle computation rather than a machine.
#[derive(Clone)]
pub enum Realizer {
    Code(MachineCode),
    Host(Arc<dyn HostRealizer>),
}

pub trait HostRealizer: Send + Sync {
    fn describe(&self) -> String;
    fn apply(&self, input: &Stream, budget: u64) -> Result<Stream>;
}

impl Realizer {
    pub fn apply(&self, input: &Stream, budget: u64) -> Result<Stream> {
        match self {
            Realizer::Code(code) => Ok(Stream::machine(code.clone(), input.clone(), budget)),
            Realizer::Host(h) => h.apply(input, budget),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Realizer::Code(code) => format!("bytecode({} instructions)", code.program().len()),
            Realizer::Host(h) => h.describe(),
        }
    }

    pub fn code(&self) -> Option<&MachineCode> {
        match self {
            Realizer::Code(c) => Some(c),
            Realizer::Host(_) => None,
        }
    }
}

/// Maps through which machine application can be transported: composing with
/// them on the inside lifts to a machine on the primed side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransparentMap {
    /// Cellwise limit of an interleaved family.
    Lim,
    /// Discrete limit: the family is eventually constant per cell.
    LimDelta,
    /// Jump inversion over the comparator universe.
    JumpInverse,
}

/// Witness that a map is transparent, able to lift any monotone machine `f`
/// to a machine `G` on primed names with `map(G(x)) = f(map(x))`.
#[derive(Debug, Clone, Copy)]
pub struct TransparencyWitness {
    pub map: TransparentMap,
    /// Search cap for host-level jump inversion.
    pub cap: u64,
}

struct JumpInverseLift {
    f: MachineCode,
    cap: u64,
}

impl HostRealizer for JumpInverseLift {
    fn describe(&self) -> String {
        "jump-inversion lift: invert, apply, re-jump over comparators".into()
    }

    fn apply(&self, q: &Stream, budget: u64) -> Result<Stream> {
        let p = jump_inverse_stream(q.clone(), self.cap);
        let y = Stream::machine(self.f.clone(), p, budget);
        Ok(jump_exact(comparators_universe(), y))
    }
}

impl TransparencyWitness {
    pub fn new(map: TransparentMap) -> Self {
        TransparencyWitness { map, cap: 1 << 16 }
    }

    /// Lift a monotone machine through the witnessed map.
    pub fn lift(&self, f: &MachineCode) -> Result<Realizer> {
        if f.kind() != ProgramKind::Monotone {
            return Err(Error::KindMismatch { expected: "monotone", got: f.kind().name() });
        }
        match self.map {
            TransparentMap::Lim => {
                let composite = monotone_after_limit(f, &lim_code())?;
                Ok(Realizer::Code(limit_to_monotone(&composite)?))
            }
            TransparentMap::LimDelta => {
                let composite = monotone_after_limit(f, &limdelta_code())?;
                Ok(Realizer::Code(fmc_normal_form(&composite)?))
            }
            TransparentMap::JumpInverse => Ok(Realizer::Host(Arc::new(JumpInverseLift {
                f: f.clone(),
                cap: self.cap,
            }))),
        }
    }
}

/// Stage codes controlling a continuous operator: stage `t` commits, for
/// every word `u` with index below `t`, the part of the output visible from
/// `u` alone. Visibility is certified by agreement under two different
/// paddings of `u`, so a commitment never depends on cells `u` does not
/// determine. The stages are monotone in `t` for operators whose commitments
/// are prefix-stable, and their entrywise limit recovers the operator.
pub fn uniform_limit_control(q: &PhiCode, stages: u64) -> Result<Vec<PhiCode>> {
    let mut out = Vec::new();
    for t in 1..=stages {
        let mut entries: Vec<(Word, Word)> = Vec::new();
        for u_idx in 0..t {
            let u = word_from_index(u_idx);
            let commit = stage_commitment(q, &u, t)?;
            entries.push((u, commit));
        }
        out.push(PhiCode::Explicit(Arc::new(entries)));
    }
    Ok(out)
}

fn stage_commitment(q: &PhiCode, u: &Word, budget: u64) -> Result<Word> {
    let y0 = padded_apply(q, u, 0, budget)?;
    let y1 = padded_apply(q, u, 1, budget)?;
    let mut commit = Vec::new();
    for (a, b) in y0.iter().zip(y1.iter()) {
        if a == b {
            commit.push(*a);
        } else {
            break;
        }
    }
    Ok(commit)
}

fn padded_apply(q: &PhiCode, u: &Word, pad: u64, budget: u64) -> Result<Word> {
    let z = Stream::word_then_const(u.clone(), pad);
    match phi_apply(q, &z, budget, budget) {
        Ok(w) => Ok(w),
        // an unproductive stage commits nothing rather than failing
        Err(Error::MalformedCode(_)) => Ok(Vec::new()),
        Err(e) => Err(e),
    }
}

/// Apply staged control codes to a point: each stage refines the committed
/// output, and the final stage is the current best approximation. Returns
/// per-stage outputs so callers can watch the convergence.
pub fn apply_staged(codes: &[PhiCode], p: &Stream, want: u64) -> Result<Vec<Word>> {
    codes.iter().map(|c| phi_apply(c, p, want.max(64), want)).collect()
}

/// Jump bits on inputs generic enough that prefix certificates decide them:
/// bit `i` comes from the universe's verdict at `i`, and a verdict whose
/// certificates do not cover the input is reported `Unknown` instead of
/// diverging.
pub fn jump_on_generics(p: &Stream, universe: &Universe, width: u64) -> Result<Vec<Answer>> {
    let mut out = Vec::with_capacity(width as usize);
    for i in 0..width {
        let Some(v) = universe.verdict_at(i) else {
            return Err(Error::OracleGap(i));
        };
        out.push(match crate::vm::eval_verdict(&v, p) {
            Ok(true) => Answer::Halts,
            Ok(false) => Answer::Loops,
            Err(Error::VerdictFailure { .. }) => Answer::Unknown,
            Err(e) => return Err(e),
        });
    }
    Ok(out)
}

/// Convenience: a width-`w` extension-certificate universe from explicit
/// per-prefix tables, for exercising generic-input jumps.
pub fn extension_universe(tables: Vec<Vec<(Word, bool)>>) -> Universe {
    let mut u = Universe::whitelist();
    for (i, certs) in tables.into_iter().enumerate() {
        u.insert(
            i as u64,
            crate::vm::UniverseEntry { program: None, verdict: Some(Verdict::ExtensionTable(certs)) },
        );
    }
    u
}
