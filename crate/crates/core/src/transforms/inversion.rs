//! Inverting limits through the jump: given a point `p`, build an
//! interleaved family `r = <r_0, r_1, ...>` with `lim r = p` whose jump is
//! exactly computable stage by stage, by answering one halting question per
//! stage with a finite-extension argument.
//!
//! Each whitelisted verdict is a predicate on streams whose restriction to
//! "finitely many cells are pinned, the rest free" is decidable, which is
//! what makes the staged existentials effective.

use std::collections::HashMap;
use std::sync::Arc;

use crate::baire::{unpair, Stream, TupleIndex, Word};
use crate::error::{Error, Result};
use crate::vm::{eval_verdict, jump_exact, Asm, MachineCode, ProgramKind, Universe, Verdict};

use super::inline::{inline_program, InlineConfig};

/// One stage of the staged construction.
#[derive(Debug, Clone)]
pub struct InversionStage {
    pub stage: u64,
    /// The answered jump bit: does machine `stage` halt on the family?
    pub bit: bool,
    /// Cell pinned to realize a positive answer, if one was needed:
    /// (component, position, value).
    pub witness: Option<(u64, u64, u64)>,
}

/// The constructed family. Component `n` agrees with `p` on its first `n`
/// cells, carries finitely many pinned witness cells, and is zero elsewhere,
/// so the family converges cellwise to `p`.
pub struct Inversion {
    p: Stream,
    pinned: Arc<HashMap<(u64, u64), u64>>,
    pub bits: Word,
    pub stages: Vec<InversionStage>,
}

impl Inversion {
    pub fn component(&self, n: u64) -> Stream {
        let p = self.p.clone();
        let pinned = Arc::clone(&self.pinned);
        Stream::from_fn(move |pos| {
            if pos < n {
                p.get(pos)
            } else {
                Ok(pinned.get(&(n, pos)).copied().unwrap_or(0))
            }
        })
    }

    /// The family as a single interleaved point.
    pub fn interleaved(&self) -> Stream {
        let p = self.p.clone();
        let pinned = Arc::clone(&self.pinned);
        Stream::from_fn(move |cell| {
            let TupleIndex { component, position } = TupleIndex::unflatten(cell);
            if position < component {
                p.get(position)
            } else {
                Ok(pinned.get(&(component, position)).copied().unwrap_or(0))
            }
        })
    }
}

/// A cell of the family during construction: already forced, or still free.
enum CellState {
    Forced(u64),
    Free,
}

fn cell_state(
    p: &Stream,
    pinned: &HashMap<(u64, u64), u64>,
    stage: u64,
    component: u64,
    position: u64,
) -> Result<CellState> {
    if position < component {
        return Ok(CellState::Forced(p.get(position)?));
    }
    if let Some(&v) = pinned.get(&(component, position)) {
        return Ok(CellState::Forced(v));
    }
    if component < stage {
        // earlier components are fully materialized; unpinned cells are zero
        return Ok(CellState::Forced(0));
    }
    Ok(CellState::Free)
}

/// Decide `does machine `stage` halt on some admissible completion of the
/// family?`, returning the witness cell to pin when a free cell decides it.
fn decide_stage(
    v: &Verdict,
    p: &Stream,
    pinned: &HashMap<(u64, u64), u64>,
    stage: u64,
) -> Result<(bool, Option<(u64, u64, u64)>)> {
    match v {
        Verdict::Halts => Ok((true, None)),
        Verdict::Loops => Ok((false, None)),
        Verdict::InputCellEq { cell, value } => {
            let (component, position) = unpair(*cell);
            match cell_state(p, pinned, stage, component, position)? {
                CellState::Forced(have) => Ok((have == *value, None)),
                CellState::Free => Ok((true, Some((component, position, *value)))),
            }
        }
        _ => Err(Error::VerdictFailure {
            index: stage,
            reason: "verdict kind is not decidable over partial families".into(),
        }),
    }
}

/// Stage-by-stage jump inversion: builds a family `r` with `lim r = p` and
/// returns it together with the jump bits it realizes over `universe`. Bit
/// `i` is decided at stage `i` from the whitelisted verdict of machine `i`,
/// pinning at most one extra cell of a not-yet-materialized component.
pub fn limit_inversion(p: &Stream, universe: &Universe, stages: u64) -> Result<Inversion> {
    let mut pinned: HashMap<(u64, u64), u64> = HashMap::new();
    let mut bits = Vec::new();
    let mut log = Vec::new();
    for i in 0..stages {
        let v = universe.verdict_at(i).ok_or(Error::OracleGap(i))?;
        let (bit, witness) = decide_stage(&v, p, &pinned, i)?;
        if let Some((c, pos, val)) = witness {
            pinned.insert((c, pos), val);
        }
        bits.push(bit as u64);
        log.push(InversionStage { stage: i, bit, witness });
    }
    Ok(Inversion { p: p.clone(), pinned: Arc::new(pinned), bits, stages: log })
}

/// Check the constructed family against the universe's exact jump: the bits
/// answered during construction must be the certified jump of the realized
/// point.
pub fn verify_inversion(inv: &Inversion, universe: &Arc<Universe>) -> Result<bool> {
    let z = inv.interleaved();
    for (i, &b) in inv.bits.iter().enumerate() {
        let v = universe.verdict_at(i as u64).ok_or(Error::OracleGap(i as u64))?;
        if eval_verdict(&v, &z)? as u64 != b {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact jump of the realized family, as a stream.
pub fn inversion_jump(inv: &Inversion, universe: Arc<Universe>) -> Stream {
    jump_exact(universe, inv.interleaved())
}

// ---- halting normal form ----

/// Emit `dst := p(i)` where `p = lim_t r_t` is recovered from an H-name:
/// find the first member `t` whose position `i` has settled (diagonal
/// monitor at index `3*((t<<6)+i)+1` reads 0), then scan comparators
/// (index `3m`, m enumerating (cell, value) pairs with cell = pair(t, i))
/// for the settled value.
struct HRegs {
    t1: u64,
    t2: u64,
    tm: u64,
    wa: u64,
    wb: u64,
    wm: u64,
}

fn emit_h_limit_read(asm: &mut Asm, r: &HRegs, i_reg: u64, dst_r: u64) {
    let t_top = asm.label();
    let settled = asm.label();
    asm.clear(r.tm); // candidate member t
    asm.bind(t_top);
    // diagonal monitor index 3*((t << 6) + i) + 1
    asm.copy(r.tm, r.t1);
    for _ in 0..6 {
        asm.double(r.t1);
    }
    asm.add_to(i_reg, r.t1);
    asm.copy(r.t1, r.t2);
    asm.double(r.t1);
    asm.add_to(r.t2, r.t1); // 3x
    asm.inc(r.t1);
    asm.read(r.t1, r.t2);
    asm.jz(r.t2, settled);
    asm.inc(r.tm);
    asm.jmp(t_top);
    asm.bind(settled);
    // settled: fetch r_t(i), the cell pair(t, i) of the interleaved family,
    // by scanning comparator bits 3*pair(cell, value)
    let target = r.t2; // target cell = pair(tm, i)
    // walk (wa, wb) along the diagonal enumeration until pair(wa, wb) hits
    // (tm, i); cheaper: compute pair(tm, i) once by walking
    asm.clear(r.wa);
    asm.clear(r.wb);
    asm.clear(target);
    let seek = asm.label();
    let found = asm.label();
    let step = asm.label();
    asm.bind(seek);
    let chk2 = asm.label();
    asm.branch_eq(r.wa, r.tm, chk2, step);
    asm.bind(chk2);
    asm.branch_eq(r.wb, i_reg, found, step);
    asm.bind(step);
    asm.advance_diag(r.wa, r.wb);
    asm.inc(target);
    asm.jmp(seek);
    asm.bind(found);
    // now scan values: comparator for (cell=target, value=wb') at 3*pair(...)
    asm.clear(r.wa);
    asm.clear(r.wb);
    asm.clear(r.wm);
    let scan = asm.label();
    let row = asm.label();
    let adv = asm.label();
    let hit = asm.label();
    asm.bind(scan);
    asm.branch_eq(r.wa, target, row, adv);
    asm.bind(row);
    asm.copy(r.wm, r.t1);
    asm.copy(r.t1, r.tm);
    asm.double(r.t1);
    asm.add_to(r.tm, r.t1); // 3m
    asm.read(r.t1, r.tm);
    asm.jz(r.tm, adv);
    asm.jmp(hit);
    asm.bind(adv);
    asm.advance_diag(r.wa, r.wb);
    asm.inc(r.wm);
    asm.jmp(scan);
    asm.bind(hit);
    asm.copy(r.wb, dst_r);
}

/// Halting normal form: given a monotone machine `s` expecting the pair
/// `<halting bits, p>` (even input cells the halting family, odd cells `p`),
/// produce a monotone machine computing the same function from an H-name: the
/// exact jump, over the returned universe, of any interleaved family settling
/// to `p`. Comparator bits (indices `3m`) carry the family's graph, diagonal
/// monitors (`3m+1`) its settling, and the `3m+2` family answers the halting
/// bits directly.
pub fn halting_normal_form(s: &MachineCode, probe: u64) -> Result<(MachineCode, Universe)> {
    if s.kind() != ProgramKind::Monotone {
        return Err(Error::KindMismatch { expected: "monotone", got: s.kind().name() });
    }
    let universe = Universe::with_layout(crate::vm::Layout::HJump { probe });

    let mut asm = Asm::new();
    let one = asm.reg();
    let t1 = asm.reg();
    let t2 = asm.reg();
    let tm = asm.reg();
    let wa = asm.reg();
    let wb = asm.reg();
    let wm = asm.reg();
    let half = asm.reg();
    let parity = asm.reg();

    let start = asm.label();
    let done = asm.label();
    asm.jmp(start);

    let mut cfg = InlineConfig::new(done);
    cfg.scratch_shift = 1;
    cfg.scratch_offset = 1;
    cfg.append = Some(Box::new(move |a: &mut Asm, r: u64| a.append(r)));
    cfg.read = Some(Box::new(move |a: &mut Asm, idx_r: u64, dst_r: u64| {
        // halve the index, keeping the parity
        a.copy(idx_r, t1);
        a.clear(half);
        a.clear(parity);
        let htop = a.label();
        let hodd = a.label();
        let hdone = a.label();
        a.bind(htop);
        a.jz(t1, hdone);
        a.dec(t1);
        a.jz(t1, hodd);
        a.dec(t1);
        a.inc(half);
        a.jmp(htop);
        a.bind(hodd);
        a.inc(parity);
        a.bind(hdone);
        let even = a.label();
        let after = a.label();
        a.jz(parity, even);
        // odd cell 2i+1: p(i) recovered from the settling family
        emit_h_limit_read(a, &HRegs { t1, t2, tm, wa, wb, wm }, half, dst_r);
        a.jmp(after);
        a.bind(even);
        // even cell 2i: halting bit of machine i, published at index 3i+2
        a.copy(half, t1);
        a.double(t1);
        a.add_to(half, t1);
        a.inc(t1);
        a.inc(t1);
        a.read(t1, dst_r);
        a.bind(after);
    }));
    let inl = inline_program(&mut asm, s.program(), &mut cfg);
    drop(cfg);

    asm.bind(start);
    asm.set_const(one, 1);
    asm.jmp(inl.entry);

    asm.bind(done);
    asm.halt();

    Ok((MachineCode::new(asm.finish(), ProgramKind::Monotone)?, universe))
}
