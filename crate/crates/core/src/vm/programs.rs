//! Library of concrete machines.
//!
//! Conventions: sequence-of-streams arguments arrive omega-interleaved, so
//! cell `pair(i, j)` of the input carries cell `j` of the `i`-th member.
//! Jump streams use the comparator layout: bit `m` answers "input cell `n`
//! equals `k`" with `(n, k) = unpair(m)`.

use super::{Asm, Instr, MachineCode, Program, ProgramKind};

/// Monotone identity: appends the input cell by cell.
pub fn copier_code() -> MachineCode {
    let mut asm = Asm::new();
    let n = asm.reg();
    let v = asm.reg();
    let top = asm.label();
    asm.bind(top);
    asm.read(n, v);
    asm.append(v);
    asm.inc(n);
    asm.jmp(top);
    MachineCode::new(asm.finish(), ProgramKind::Monotone).unwrap()
}

/// Limit-kind identity: writes the input cell by cell, never revising.
pub fn write_copier_code() -> MachineCode {
    let mut asm = Asm::new();
    let n = asm.reg();
    let v = asm.reg();
    let top = asm.label();
    asm.bind(top);
    asm.read(n, v);
    asm.write(n, v);
    asm.inc(n);
    asm.jmp(top);
    MachineCode::new(asm.finish(), ProgramKind::Limit).unwrap()
}

/// Equality test against the zero stream, with configurable output values:
/// emits `one_val` everywhere while only zeros have been read, and rewrites
/// everything to `zero_val` forever once a nonzero cell shows up. At most one
/// mind change per cell.
pub fn eq_test_with_values(one_val: u64, zero_val: u64) -> MachineCode {
    let mut asm = Asm::new();
    let n = asm.reg();
    let v = asm.reg();
    let ov = asm.reg();
    let zv = asm.reg();
    let c = asm.reg();
    asm.set_const(ov, one_val);
    asm.set_const(zv, zero_val);
    let top_a = asm.label();
    let write_one = asm.label();
    let phase_b = asm.label();
    asm.bind(top_a);
    asm.read(n, v);
    asm.jz(v, write_one);
    asm.jmp(phase_b);
    asm.bind(write_one);
    asm.write(n, ov);
    asm.inc(n);
    asm.jmp(top_a);
    asm.bind(phase_b);
    let top_b = asm.label();
    asm.bind(top_b);
    asm.write(c, zv);
    asm.inc(c);
    asm.jmp(top_b);
    MachineCode::new(asm.finish(), ProgramKind::Fmc).unwrap()
}

/// Equality test against the zero stream over bits: all ones iff the input
/// is the zero stream, all zeros otherwise.
pub fn eq_test_code() -> MachineCode {
    eq_test_with_values(1, 0)
}

/// Limit of a sequence of streams. Reads the interleaved input along the
/// diagonal enumeration and writes member `i`'s cell `j` onto output cell
/// `j`; for fixed `j` later members win, so the tape converges to the limit
/// whenever one exists.
pub fn lim_code() -> MachineCode {
    let mut asm = Asm::new();
    let a = asm.reg();
    let b = asm.reg();
    let m = asm.reg();
    let v = asm.reg();
    let top = asm.label();
    asm.bind(top);
    asm.read(m, v);
    asm.write(b, v);
    asm.advance_diag(a, b);
    asm.inc(m);
    asm.jmp(top);
    MachineCode::new(asm.finish(), ProgramKind::Limit).unwrap()
}

/// Discrete limit: same machine as [`lim_code`], promising finitely many
/// rewrites on inputs that converge discretely.
pub fn limdelta_code() -> MachineCode {
    let code = lim_code();
    MachineCode::new(code.program().clone(), ProgramKind::Fmc).unwrap()
}

/// Constant embedding `p -> <p, p, p, ...>`, a computable right inverse of
/// the limit.
pub fn constembed_code() -> MachineCode {
    let mut asm = Asm::new();
    let a = asm.reg();
    let b = asm.reg();
    let v = asm.reg();
    let top = asm.label();
    asm.bind(top);
    asm.read(b, v);
    asm.append(v);
    asm.advance_diag(a, b);
    asm.jmp(top);
    MachineCode::new(asm.finish(), ProgramKind::Monotone).unwrap()
}

/// Recovers a stream from its comparator-layout jump: output cell `n` is the
/// least `k` whose comparator bit `pair(n, k)` is set. Diverges past the
/// first position whose comparator row is all zeros, which only happens on
/// streams outside the jump's range.
pub fn jump_inverse_code() -> MachineCode {
    let mut asm = Asm::new();
    let n = asm.reg();
    let a = asm.reg();
    let b = asm.reg();
    let m = asm.reg();
    let bit = asm.reg();
    let outer = asm.label();
    asm.bind(outer);
    asm.clear(a);
    asm.clear(b);
    asm.clear(m);
    let scan = asm.label();
    let check = asm.label();
    let adv = asm.label();
    asm.bind(scan);
    asm.branch_eq(a, n, check, adv);
    asm.bind(check);
    asm.read(m, bit);
    asm.jz(bit, adv);
    asm.append(b);
    asm.inc(n);
    asm.jmp(outer);
    asm.bind(adv);
    asm.advance_diag(a, b);
    asm.inc(m);
    asm.jmp(scan);
    MachineCode::new(asm.finish(), ProgramKind::Monotone).unwrap()
}

/// The low map: jump inversion after a limit. The input is a sequence of
/// comparator-layout jump approximations converging to the jump of some
/// stream x; the revisable output converges to x.
///
/// Round R scans member R of the input. Whenever the diagonal walk sits in
/// component R, a second walk decodes the position into a comparator pair
/// (n, k); the first set bit per n this round writes `x(n) := k`. Scratch
/// cell `n` holds `R+1` as a per-round "already written" marker.
pub fn low_code() -> MachineCode {
    let mut asm = Asm::new();
    let r_round = asm.reg();
    let a = asm.reg();
    let b = asm.reg();
    let m = asm.reg();
    let n2 = asm.reg();
    let k2 = asm.reg();
    let diag = asm.reg(); // n2 + k2
    let two_r = asm.reg();
    let bit = asm.reg();
    let flag = asm.reg();
    let rp1 = asm.reg();

    let round_top = asm.label();
    asm.bind(round_top);
    asm.clear(a);
    asm.clear(b);
    asm.clear(m);
    asm.clear(n2);
    asm.clear(k2);
    asm.clear(diag);
    asm.copy(r_round, two_r);
    asm.add_to(r_round, two_r);
    asm.copy(r_round, rp1);
    asm.inc(rp1);

    let scan = asm.label();
    let in_component = asm.label();
    let adv = asm.label();
    let next_round = asm.label();
    asm.bind(scan);
    asm.branch_eq(a, r_round, in_component, adv);

    asm.bind(in_component);
    // (n2, k2) = unpair(b); stop the round once past diagonal 2R
    let within = asm.label();
    asm.branch_gt(diag, two_r, next_round, within);
    asm.bind(within);
    asm.read(m, bit);
    let after = asm.label();
    asm.jz(bit, after);
    asm.sload(n2, flag);
    let skip = asm.label();
    let do_write = asm.label();
    asm.branch_eq(flag, rp1, skip, do_write);
    asm.bind(do_write);
    asm.write(n2, k2);
    asm.sstore(n2, rp1);
    asm.bind(skip);
    asm.bind(after);
    // advance the comparator walk together with this component's position
    asm.advance_diag(n2, k2);
    asm.clear(diag);
    asm.copy(n2, diag);
    asm.add_to(k2, diag);
    asm.bind(adv);
    asm.advance_diag(a, b);
    asm.inc(m);
    asm.jmp(scan);

    asm.bind(next_round);
    asm.inc(r_round);
    asm.jmp(round_top);
    MachineCode::new(asm.finish(), ProgramKind::Limit).unwrap()
}

/// Halts iff the first input cell is even.
pub fn halt_iff_even_code() -> MachineCode {
    let mut asm = Asm::new();
    let v = asm.reg();
    asm.read(0, v); // register 0 is the zero register, so this reads cell 0
    let top = asm.label();
    let even = asm.label();
    let odd = asm.label();
    asm.bind(top);
    asm.jz(v, even);
    asm.dec(v);
    asm.jz(v, odd);
    asm.dec(v);
    asm.jmp(top);
    asm.bind(odd);
    asm.jmp(odd);
    asm.bind(even);
    asm.halt();
    MachineCode::new(asm.finish(), ProgramKind::Monotone).unwrap()
}

/// Halts immediately.
pub fn halt_now_code() -> MachineCode {
    MachineCode::new(Program::new(vec![Instr::Halt]), ProgramKind::Monotone).unwrap()
}

/// Never halts.
pub fn loop_forever_code() -> MachineCode {
    MachineCode::new(Program::new(vec![Instr::Jz { reg: 0, target: 0 }]), ProgramKind::Monotone)
        .unwrap()
}
