//! Internal assembler: labels, fresh registers, and compound operations
//! lowered to the instruction set. Register 0 is reserved and never written,
//! so `JZ 0,l` is an unconditional jump.
//!
//! All compound operations are macro-expanded inline; the instruction set has
//! no call stack. Generated code favors simplicity over size.

use std::collections::HashMap;

use super::{Instr, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Label(usize);

enum AInstr {
    Fixed(Instr),
    JzSym { reg: u64, label: Label },
}

/// Program builder.
pub struct Asm {
    instrs: Vec<AInstr>,
    bound: HashMap<Label, usize>,
    next_label: usize,
    next_reg: u64,
}

impl Default for Asm {
    fn default() -> Self {
        Self::new()
    }
}

impl Asm {
    pub fn new() -> Self {
        Asm { instrs: Vec::new(), bound: HashMap::new(), next_label: 0, next_reg: 1 }
    }

    /// Fresh register, never aliased.
    pub fn reg(&mut self) -> u64 {
        let r = self.next_reg;
        self.next_reg += 1;
        r
    }

    /// Reserve a contiguous block of fresh registers starting at the returned id.
    pub fn reg_block(&mut self, count: u64) -> u64 {
        let base = self.next_reg;
        self.next_reg += count;
        base
    }

    pub fn label(&mut self) -> Label {
        let l = Label(self.next_label);
        self.next_label += 1;
        l
    }

    pub fn bind(&mut self, l: Label) {
        let prev = self.bound.insert(l, self.instrs.len());
        assert!(prev.is_none(), "label bound twice");
    }

    // ---- primitive emits ----

    pub fn inc(&mut self, r: u64) {
        self.instrs.push(AInstr::Fixed(Instr::Inc(r)));
    }

    pub fn dec(&mut self, r: u64) {
        self.instrs.push(AInstr::Fixed(Instr::Dec(r)));
    }

    pub fn jz(&mut self, reg: u64, label: Label) {
        self.instrs.push(AInstr::JzSym { reg, label });
    }

    pub fn jmp(&mut self, label: Label) {
        self.jz(0, label);
    }

    pub fn read(&mut self, idx: u64, dst: u64) {
        self.instrs.push(AInstr::Fixed(Instr::Read { idx, dst }));
    }

    pub fn write(&mut self, cell: u64, val: u64) {
        self.instrs.push(AInstr::Fixed(Instr::Write { cell, val }));
    }

    pub fn append(&mut self, r: u64) {
        self.instrs.push(AInstr::Fixed(Instr::Append(r)));
    }

    pub fn sload(&mut self, addr: u64, dst: u64) {
        self.instrs.push(AInstr::Fixed(Instr::SLoad { addr, dst }));
    }

    pub fn sstore(&mut self, addr: u64, val: u64) {
        self.instrs.push(AInstr::Fixed(Instr::SStore { addr, val }));
    }

    pub fn halt(&mut self) {
        self.instrs.push(AInstr::Fixed(Instr::Halt));
    }

    // ---- compound operations ----

    /// r := 0
    pub fn clear(&mut self, r: u64) {
        let top = self.label();
        let end = self.label();
        self.bind(top);
        self.jz(r, end);
        self.dec(r);
        self.jmp(top);
        self.bind(end);
    }

    /// Drain `src` to 0, incrementing every register in `dsts` per unit.
    pub fn drain(&mut self, src: u64, dsts: &[u64]) {
        let top = self.label();
        let end = self.label();
        self.bind(top);
        self.jz(src, end);
        self.dec(src);
        for &d in dsts {
            self.inc(d);
        }
        self.jmp(top);
        self.bind(end);
    }

    /// dst := src, src := 0
    pub fn move_to(&mut self, src: u64, dst: u64) {
        self.clear(dst);
        self.drain(src, &[dst]);
    }

    /// dst := src, src preserved
    pub fn copy(&mut self, src: u64, dst: u64) {
        let tmp = self.reg();
        self.clear(dst);
        self.clear(tmp);
        self.drain(src, &[dst, tmp]);
        self.drain(tmp, &[src]);
    }

    /// dst += src, src preserved
    pub fn add_to(&mut self, src: u64, dst: u64) {
        let tmp = self.reg();
        self.clear(tmp);
        self.drain(src, &[dst, tmp]);
        self.drain(tmp, &[src]);
    }

    /// r := c
    pub fn set_const(&mut self, r: u64, c: u64) {
        self.clear(r);
        for _ in 0..c {
            self.inc(r);
        }
    }

    /// r := 2*r
    pub fn double(&mut self, r: u64) {
        let tmp = self.reg();
        self.clear(tmp);
        self.drain(r, &[tmp]);
        self.drain(tmp, &[r, r]);
    }

    /// Branch on `r == c` without destroying `r`. Small constants only.
    pub fn branch_eq_const(&mut self, r: u64, c: u64, eq: Label, ne: Label) {
        let tmp = self.reg();
        self.copy(r, tmp);
        for _ in 0..c {
            self.jz(tmp, ne);
            self.dec(tmp);
        }
        self.jz(tmp, eq);
        self.jmp(ne);
    }

    /// Branch on `a == b`; both preserved.
    pub fn branch_eq(&mut self, a: u64, b: u64, eq: Label, ne: Label) {
        let ta = self.reg();
        let tb = self.reg();
        self.copy(a, ta);
        self.copy(b, tb);
        let top = self.label();
        let a_zero = self.label();
        self.bind(top);
        self.jz(ta, a_zero);
        self.jz(tb, ne);
        self.dec(ta);
        self.dec(tb);
        self.jmp(top);
        self.bind(a_zero);
        self.jz(tb, eq);
        self.jmp(ne);
    }

    /// Branch to `gt` when `a > b`, else `le`; both preserved.
    pub fn branch_gt(&mut self, a: u64, b: u64, gt: Label, le: Label) {
        let ta = self.reg();
        let tb = self.reg();
        self.copy(a, ta);
        self.copy(b, tb);
        let top = self.label();
        self.bind(top);
        self.jz(ta, le);
        self.jz(tb, gt);
        self.dec(ta);
        self.dec(tb);
        self.jmp(top);
    }

    /// One step of the diagonal enumeration of pairs:
    /// `(a,b) := if a == 0 { (b+1, 0) } else { (a-1, b+1) }`.
    /// Walking from (0,0) and counting steps visits exactly the pairs in
    /// Cantor order, so after m steps `(a,b)` satisfies `pair(a,b) = m`.
    pub fn advance_diag(&mut self, a: u64, b: u64) {
        let azero = self.label();
        let done = self.label();
        self.jz(a, azero);
        self.dec(a);
        self.inc(b);
        self.jmp(done);
        self.bind(azero);
        self.drain(b, &[a]); // a was 0
        self.inc(a);
        self.bind(done);
    }

    /// Resolve labels. Panics on unbound labels; generated code binding is an
    /// internal invariant.
    pub fn finish(self) -> Program {
        let instrs = self
            .instrs
            .iter()
            .map(|ai| match ai {
                AInstr::Fixed(i) => *i,
                AInstr::JzSym { reg, label } => {
                    let target = *self.bound.get(label).expect("unbound label");
                    Instr::Jz { reg: *reg, target: target as u64 }
                }
            })
            .collect();
        Program::new(instrs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baire::{pair, Stream};
    use crate::vm::{run_monotone, MachineCode, ProgramKind};

    fn run_and_peek(build: impl FnOnce(&mut Asm) -> Vec<u64>, budget: u64) -> Vec<u64> {
        let mut asm = Asm::new();
        let watch = build(&mut asm);
        for r in watch {
            asm.append(r);
        }
        asm.halt();
        let code = MachineCode::new(asm.finish(), ProgramKind::Monotone).unwrap();
        run_monotone(&code, &Stream::constant(0), budget).unwrap().output
    }

    #[test]
    fn arithmetic_macros() {
        let out = run_and_peek(
            |asm| {
                let a = asm.reg();
                let b = asm.reg();
                asm.set_const(a, 7);
                asm.copy(a, b);
                asm.add_to(a, b); // b = 14
                asm.double(a); // a = 14
                asm.inc(a); // a = 15
                vec![a, b]
            },
            10_000,
        );
        assert_eq!(out, vec![15, 14]);
    }

    #[test]
    fn branches() {
        let out = run_and_peek(
            |asm| {
                let a = asm.reg();
                let b = asm.reg();
                let flag = asm.reg();
                asm.set_const(a, 5);
                asm.set_const(b, 5);
                let eq = asm.label();
                let ne = asm.label();
                let done = asm.label();
                asm.branch_eq(a, b, eq, ne);
                asm.bind(eq);
                asm.set_const(flag, 1);
                asm.jmp(done);
                asm.bind(ne);
                asm.set_const(flag, 2);
                asm.bind(done);
                let flag2 = asm.reg();
                let gt = asm.label();
                let le = asm.label();
                let done2 = asm.label();
                asm.inc(a); // a = 6 > b = 5
                asm.branch_gt(a, b, gt, le);
                asm.bind(gt);
                asm.set_const(flag2, 1);
                asm.jmp(done2);
                asm.bind(le);
                asm.set_const(flag2, 2);
                asm.bind(done2);
                vec![flag, flag2]
            },
            10_000,
        );
        assert_eq!(out, vec![1, 1]);
    }

    #[test]
    fn diagonal_walk_matches_pairing() {
        // Walk m steps from (0,0); the final (a,b) must satisfy pair(a,b) = m.
        for m_target in [0u64, 1, 2, 3, 4, 5, 17, 30] {
            let out = run_and_peek(
                |asm| {
                    let a = asm.reg();
                    let b = asm.reg();
                    for _ in 0..m_target {
                        asm.advance_diag(a, b);
                    }
                    vec![a, b]
                },
                100_000,
            );
            assert_eq!(pair(out[0], out[1]), m_target);
        }
    }
}
