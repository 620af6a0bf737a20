//! Normal forms: turning limit machines into monotone machines and back.
//!
//! `limit_to_monotone` realizes the basic trade: a limit machine computing x
//! becomes a monotone machine emitting a double sequence whose diagonal limit
//! is x. `monotone_after_limit` composes a monotone machine after a limit
//! machine into a single limit machine. `jump_normal_form` removes the limit
//! entirely, at the cost of upgrading the input to a jump.

use std::sync::Arc;

use crate::baire::{pair, Stream, Word};
use crate::error::{Error, Result};
use crate::vm::{
    jump_inverse_code, low_code, run_limit, Asm, Layout, LimitRun, MachineCode,
    ProgramKind, Universe,
};

use super::inline::{inline_program, InlineConfig};

/// Monotone machine emitting, at output position `pair(i, j)`, the value of
/// the source's output cell `j` once `i` further steps have elapsed after the
/// cell was first written. The diagonal limit of the emitted double sequence
/// is the source's limit output. If the source halts without ever writing
/// some cell the transformed machine blocks there, mirroring the partiality
/// of the limit.
pub fn limit_to_monotone(c: &MachineCode) -> Result<MachineCode> {
    if c.kind() == ProgramKind::Monotone {
        return Err(Error::KindMismatch { expected: "limit or fmc", got: "monotone" });
    }
    let mut asm = Asm::new();
    let i_reg = asm.reg(); // fuel budget for the current probe
    let j_reg = asm.reg(); // tracked output cell
    let seen = asm.reg(); // cell j written at least once this probe
    let cap = asm.reg(); // latest value of cell j this probe
    let fuel = asm.reg();

    let m_top = asm.label();
    let sim_done = asm.label();
    let src_halted = asm.label();
    let hang = asm.label();

    asm.jmp(m_top);

    let mut cfg = InlineConfig::new(src_halted);
    cfg.scratch_shift = 1;
    cfg.scratch_offset = 1;
    cfg.on_step = Some(Box::new(move |a: &mut Asm| {
        // fuel only burns once the tracked cell has been filled
        let skip = a.label();
        a.jz(seen, skip);
        a.jz(fuel, sim_done);
        a.dec(fuel);
        a.bind(skip);
    }));
    cfg.write = Some(Box::new(move |a: &mut Asm, cell_r: u64, val_r: u64| {
        let is_j = a.label();
        let not_j = a.label();
        a.branch_eq(cell_r, j_reg, is_j, not_j);
        a.bind(is_j);
        a.copy(val_r, cap);
        a.set_const(seen, 1);
        a.bind(not_j);
    }));
    let inl = inline_program(&mut asm, c.program(), &mut cfg);
    drop(cfg);

    asm.bind(m_top);
    asm.clear(seen);
    asm.clear(cap);
    asm.copy(i_reg, fuel);
    inl.emit_reset(&mut asm);
    asm.jmp(inl.entry);

    asm.bind(src_halted);
    asm.jz(seen, hang);
    asm.jmp(sim_done);

    asm.bind(sim_done);
    asm.append(cap);
    asm.advance_diag(i_reg, j_reg);
    asm.jmp(m_top);

    asm.bind(hang);
    asm.jmp(hang);

    MachineCode::new(asm.finish(), ProgramKind::Monotone)
}

/// The same construction restricted to sources with finitely many mind
/// changes; the emitted columns are then eventually constant in the discrete
/// sense, not merely convergent.
pub fn fmc_normal_form(c: &MachineCode) -> Result<MachineCode> {
    if c.kind() != ProgramKind::Fmc {
        return Err(Error::KindMismatch { expected: "fmc", got: c.kind().name() });
    }
    limit_to_monotone(c)
}

/// Value at position `pair(i, j)` of a diagonal presentation, if emitted.
pub fn diagonal_value(out: &Word, i: u64, j: u64) -> Option<u64> {
    out.get(pair(i, j) as usize).copied()
}

/// Column `j` of a diagonal presentation, in probe order.
pub fn diagonal_column(out: &Word, j: u64) -> Vec<u64> {
    (0..).map_while(|i| diagonal_value(out, i, j)).collect()
}

/// Limit of column `j`, accepted when the last `window` available entries
/// agree (an observational stabilization criterion, not a proof).
pub fn diagonal_limit(out: &Word, j: u64, window: usize) -> Option<u64> {
    let col = diagonal_column(out, j);
    if col.len() < window.max(1) {
        return None;
    }
    let v = *col.last().unwrap();
    if col[col.len() - window.max(1)..].iter().all(|&x| x == v) {
        Some(v)
    } else {
        None
    }
}

/// Compose a monotone machine `g` after a limit machine `f` into one limit
/// machine computing `g(f(p))`. Works in growing rounds: round R re-runs `f`
/// from scratch for R steps, materializing its tape on the scratch tape, then
/// re-runs `g` for R steps against that partial tape, rewriting the output
/// prefix. A `g`-read of a cell `f` has not produced yet ends the round, so
/// commitments only ever reflect genuinely available data.
pub fn monotone_after_limit(g: &MachineCode, f: &MachineCode) -> Result<MachineCode> {
    if g.kind() != ProgramKind::Monotone {
        return Err(Error::KindMismatch { expected: "monotone", got: g.kind().name() });
    }
    if f.kind() == ProgramKind::Monotone {
        return Err(Error::KindMismatch { expected: "limit or fmc", got: "monotone" });
    }
    let mut asm = Asm::new();
    let round = asm.reg();
    let fuel_f = asm.reg();
    let fuel_g = asm.reg();
    let cur = asm.reg(); // g's output cursor
    let one = asm.reg();
    let t_f = asm.reg();
    let t_g = asm.reg();
    let flag = asm.reg();

    let round_top = asm.label();
    let f_done = asm.label();
    let g_done = asm.label();

    asm.set_const(one, 1);
    asm.jmp(round_top);

    // f's tape lives at scratch 4c (value) and 4c+2 (flag);
    // f's own scratch is relocated to 4a+1, g's to 4a+3.
    let mut f_cfg = InlineConfig::new(f_done);
    f_cfg.scratch_shift = 2;
    f_cfg.scratch_offset = 1;
    f_cfg.on_step = Some(Box::new(move |a: &mut Asm| {
        a.jz(fuel_f, f_done);
        a.dec(fuel_f);
    }));
    f_cfg.write = Some(Box::new(move |a: &mut Asm, cell_r: u64, val_r: u64| {
        a.copy(cell_r, t_f);
        a.double(t_f);
        a.double(t_f);
        a.sstore(t_f, val_r);
        a.inc(t_f);
        a.inc(t_f);
        a.sstore(t_f, one);
    }));
    let f_inl = inline_program(&mut asm, f.program(), &mut f_cfg);
    drop(f_cfg);

    let mut g_cfg = InlineConfig::new(g_done);
    g_cfg.scratch_shift = 2;
    g_cfg.scratch_offset = 3;
    g_cfg.on_step = Some(Box::new(move |a: &mut Asm| {
        a.jz(fuel_g, g_done);
        a.dec(fuel_g);
    }));
    g_cfg.read = Some(Box::new(move |a: &mut Asm, idx_r: u64, dst_r: u64| {
        a.copy(idx_r, t_g);
        a.double(t_g);
        a.double(t_g);
        a.inc(t_g);
        a.inc(t_g);
        a.sload(t_g, flag);
        a.jz(flag, g_done); // blocked on a cell f has not produced yet
        a.dec(t_g);
        a.dec(t_g);
        a.sload(t_g, dst_r);
    }));
    g_cfg.append = Some(Box::new(move |a: &mut Asm, r: u64| {
        a.write(cur, r);
        a.inc(cur);
    }));
    let g_inl = inline_program(&mut asm, g.program(), &mut g_cfg);
    drop(g_cfg);

    asm.bind(round_top);
    asm.inc(round);
    f_inl.emit_reset(&mut asm);
    asm.copy(round, fuel_f);
    asm.jmp(f_inl.entry);

    asm.bind(f_done);
    g_inl.emit_reset(&mut asm);
    asm.copy(round, fuel_g);
    asm.clear(cur);
    asm.jmp(g_inl.entry);

    asm.bind(g_done);
    asm.jmp(round_top);

    // rewrites on a cell happen only when f's settling genuinely shifts g's
    // commitment, so the composite inherits f's mind-change discipline
    MachineCode::new(asm.finish(), f.kind())
}

/// Registers used by the stability-check block of `jump_normal_form`.
struct CheckRegs {
    out: u64,
    step: u64,
    t1: u64,
    t2: u64,
}

/// Cells the packed monitor indices can address.
const MONITOR_CELL_CAP: u64 = 64;

fn emit_check(asm: &mut Asm, r: &CheckRegs) {
    let top = asm.label();
    let end = asm.label();
    let in_cap = asm.label();
    let stable = asm.label();
    asm.bind(top);
    // monitor indices pack the cell into 6 bits
    asm.set_const(r.t2, MONITOR_CELL_CAP);
    asm.branch_eq(r.out, r.t2, end, in_cap);
    asm.bind(in_cap);
    // has the simulation written cell `out` at all? flag at 8*out+2
    asm.copy(r.out, r.t1);
    asm.double(r.t1);
    asm.double(r.t1);
    asm.double(r.t1);
    asm.inc(r.t1);
    asm.inc(r.t1);
    asm.sload(r.t1, r.t2);
    asm.jz(r.t2, end);
    // monitor bit for (cell=out, after=step) sits at odd index
    // 2*((step << 6) + out) + 1
    asm.copy(r.step, r.t1);
    for _ in 0..6 {
        asm.double(r.t1);
    }
    asm.add_to(r.out, r.t1);
    asm.double(r.t1);
    asm.inc(r.t1);
    asm.read(r.t1, r.t2);
    asm.jz(r.t2, stable);
    asm.jmp(end); // still in flux past this step, retry later
    asm.bind(stable);
    asm.copy(r.out, r.t1);
    asm.double(r.t1);
    asm.double(r.t1);
    asm.double(r.t1);
    asm.sload(r.t1, r.t2);
    asm.append(r.t2);
    asm.inc(r.out);
    asm.jmp(top);
    asm.bind(end);
}

/// Jump normal form of a limit machine `c`: a monotone machine `G` such that
/// running `G` on the jump of `p` (over the returned universe, whose even
/// indices compare cells of `p` and whose odd indices monitor `c`'s output
/// stability) emits the limit output of `c` on `p` directly.
///
/// `G` simulates `c`, answering its input reads by inverting the jump on the
/// comparator bits, and on a geometric schedule consults the stability
/// monitors to certify completed prefix cells before appending them. Monitor
/// certification is observational within `probe` steps, and packed monitor
/// indices only address the first 64 output cells.
pub fn jump_normal_form(c: &MachineCode, probe: u64) -> Result<(MachineCode, Universe)> {
    if c.kind() == ProgramKind::Monotone {
        return Err(Error::KindMismatch { expected: "limit or fmc", got: "monotone" });
    }
    let universe = Universe::with_layout(Layout::JumpNf { code: c.clone(), probe });

    let mut asm = Asm::new();
    let step = asm.reg();
    let checkctr = asm.reg();
    let out = asm.reg();
    let one = asm.reg();
    let t1 = asm.reg();
    let t2 = asm.reg();
    // comparator walk state for jump inversion
    let wa = asm.reg();
    let wb = asm.reg();
    let wm = asm.reg();

    let start = asm.label();
    let src_halted = asm.label();
    asm.jmp(start);

    // scratch layout: c's tape value at 8n, tape flag at 8n+2,
    // p-cache value at 8n+4, p-cache flag at 8n+6; c's own scratch at 8a+1
    let mut cfg = InlineConfig::new(src_halted);
    cfg.scratch_shift = 3;
    cfg.scratch_offset = 1;
    cfg.on_step = Some(Box::new(move |a: &mut Asm| {
        a.dec(checkctr);
        let do_check = a.label();
        let cont = a.label();
        a.jz(checkctr, do_check);
        a.jmp(cont);
        a.bind(do_check);
        emit_check(a, &CheckRegs { out, step, t1, t2 });
        a.copy(step, checkctr);
        a.inc(checkctr);
        a.bind(cont);
        a.inc(step);
    }));
    cfg.write = Some(Box::new(move |a: &mut Asm, cell_r: u64, val_r: u64| {
        a.copy(cell_r, t1);
        a.double(t1);
        a.double(t1);
        a.double(t1);
        a.sstore(t1, val_r);
        a.inc(t1);
        a.inc(t1);
        a.sstore(t1, one);
    }));
    cfg.read = Some(Box::new(move |a: &mut Asm, idx_r: u64, dst_r: u64| {
        // p(idx) via jump inversion on the comparator bits, cached in scratch
        let miss = a.label();
        let done = a.label();
        a.copy(idx_r, t1);
        a.double(t1);
        a.double(t1);
        a.double(t1);
        for _ in 0..6 {
            a.inc(t1);
        }
        a.sload(t1, t2);
        a.jz(t2, miss);
        a.dec(t1);
        a.dec(t1);
        a.sload(t1, dst_r);
        a.jmp(done);
        a.bind(miss);
        a.clear(wa);
        a.clear(wb);
        a.clear(wm);
        let scan = a.label();
        let chkrow = a.label();
        let adv = a.label();
        a.bind(scan);
        a.branch_eq(wa, idx_r, chkrow, adv);
        a.bind(chkrow);
        a.copy(wm, t1);
        a.double(t1); // comparator at even index 2m asks p(wa) == wb
        a.read(t1, t2);
        a.jz(t2, adv);
        // cache before touching dst: the source READ may alias idx and dst
        a.copy(idx_r, t1);
        a.double(t1);
        a.double(t1);
        a.double(t1);
        for _ in 0..4 {
            a.inc(t1);
        }
        a.sstore(t1, wb);
        a.inc(t1);
        a.inc(t1);
        a.sstore(t1, one);
        a.copy(wb, dst_r);
        a.jmp(done);
        a.bind(adv);
        a.advance_diag(wa, wb);
        a.inc(wm);
        a.jmp(scan);
        a.bind(done);
    }));
    let inl = inline_program(&mut asm, c.program(), &mut cfg);
    drop(cfg);

    asm.bind(start);
    asm.set_const(one, 1);
    asm.set_const(checkctr, 1);
    asm.jmp(inl.entry);

    asm.bind(src_halted);
    // everything is final now; flush whatever the monitors certify
    emit_check(&mut asm, &CheckRegs { out, step, t1, t2 });
    asm.halt();

    Ok((MachineCode::new(asm.finish(), ProgramKind::Monotone)?, universe))
}

/// The jump inversion realizer together with the universe whose jump it
/// inverts: over the comparator layout, `J(p)` is the graph of `p`, and the
/// machine reads `p(n)` back off it monotonically.
pub fn jump_inverse_realizer() -> (MachineCode, Universe) {
    (jump_inverse_code(), Universe::with_layout(Layout::Comparators))
}

/// Host-side jump inversion over comparator bits: `p(n)` is the least `k`
/// whose comparator bit is set, searched up to `cap`.
pub fn jump_inverse_apply(q: &Stream, n: u64, cap: u64) -> Result<u64> {
    for k in 0..cap {
        if q.get(pair(n, k))? == 1 {
            return Ok(k);
        }
    }
    Err(Error::SearchBudget(format!("no comparator bit set in row {n} below {cap}")))
}

/// Lazy host-side jump inversion of a whole stream.
pub fn jump_inverse_stream(q: Stream, cap: u64) -> Stream {
    Stream::from_fn(move |n| jump_inverse_apply(&q, n, cap))
}

/// Run the lowness witness: a single limit machine sending `q` to a point
/// whose jump `q` already computes. Input is an interleaved family settling
/// cellwise; the tape converges to its limit.
pub fn low_apply(q: &Stream, budget: u64) -> Result<LimitRun> {
    run_limit(&low_code(), q, budget)
}

/// Oracle-free composite: lowness followed by the monotone normal form, used
/// as a code-level translator from interleaved-family names to diagonal
/// presentations.
pub fn low_monotone_code() -> MachineCode {
    limit_to_monotone(&low_code()).expect("low machine is limit kind")
}

/// Comparator universe shared by the jump-inversion artifacts.
pub fn comparators_universe() -> Arc<Universe> {
    Arc::new(Universe::with_layout(Layout::Comparators))
}
