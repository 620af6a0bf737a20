//! Inlining one program into another with instrumentation.
//!
//! The instruction set has no call mechanism, so transformed machines embed
//! their source verbatim: registers are relocated to a fresh block, jump
//! targets become labels, and the output/input instructions are replaced by
//! caller-supplied hook code. A hook runs with the relocated register ids of
//! the source instruction it replaces.
//!
//! Source scratch addresses are relocated affinely (`a << shift | offset`) so
//! the instrumenting program can keep its own scratch classes disjoint.

use crate::vm::{Asm, Instr, Label, Program};

type StepHook<'a> = Box<dyn FnMut(&mut Asm) + 'a>;
type TwoRegHook<'a> = Box<dyn FnMut(&mut Asm, u64, u64) + 'a>;
type OneRegHook<'a> = Box<dyn FnMut(&mut Asm, u64) + 'a>;

pub struct InlineConfig<'a> {
    /// Emitted before every source instruction; counts simulated steps.
    pub on_step: Option<StepHook<'a>>,
    /// Replaces `READ idx,dst` (receives relocated register ids).
    pub read: Option<TwoRegHook<'a>>,
    /// Replaces `WRITE cell,val`.
    pub write: Option<TwoRegHook<'a>>,
    /// Replaces `APPEND r`.
    pub append: Option<OneRegHook<'a>>,
    /// Where control goes when the source halts (explicitly or by running
    /// off the end or jumping past it).
    pub on_halt: Label,
    /// Source scratch address `a` becomes `(a << shift) + offset`.
    pub scratch_shift: u32,
    pub scratch_offset: u64,
}

impl<'a> InlineConfig<'a> {
    pub fn new(on_halt: Label) -> Self {
        InlineConfig {
            on_step: None,
            read: None,
            write: None,
            append: None,
            on_halt,
            scratch_shift: 0,
            scratch_offset: 0,
        }
    }
}

/// Where the inlined body lives.
pub struct Inlined {
    pub entry: Label,
    /// Relocated register block: source register r is `reg_base + r`.
    pub reg_base: u64,
    pub reg_count: u64,
}

impl Inlined {
    /// Emit code clearing the source's registers, for restarts.
    pub fn emit_reset(&self, asm: &mut Asm) {
        for r in self.reg_base..self.reg_base + self.reg_count {
            asm.clear(r);
        }
    }
}

/// Emit the instrumented body of `prog` at the current position. The body is
/// not fallen through in a meaningful state, so callers should only reach it
/// via the returned entry label.
pub fn inline_program(asm: &mut Asm, prog: &Program, cfg: &mut InlineConfig) -> Inlined {
    let reg_count = prog.max_register().map(|m| m + 1).unwrap_or(0);
    let reg_base = asm.reg_block(reg_count.max(1));
    let map = |r: u64| reg_base + r;

    let scratch_tmp = asm.reg();
    let len = prog.instrs.len();
    let site: Vec<Label> = (0..=len).map(|_| asm.label()).collect();
    let entry = site[0];

    for (i, instr) in prog.instrs.iter().enumerate() {
        asm.bind(site[i]);
        if let Some(hook) = cfg.on_step.as_mut() {
            hook(asm);
        }
        match *instr {
            Instr::Inc(r) => asm.inc(map(r)),
            Instr::Dec(r) => asm.dec(map(r)),
            Instr::Jz { reg, target } => {
                let t = (target as usize).min(len);
                asm.jz(map(reg), site[t]);
            }
            Instr::Read { idx, dst } => match cfg.read.as_mut() {
                Some(hook) => hook(asm, map(idx), map(dst)),
                None => asm.read(map(idx), map(dst)),
            },
            Instr::Write { cell, val } => match cfg.write.as_mut() {
                Some(hook) => hook(asm, map(cell), map(val)),
                None => asm.write(map(cell), map(val)),
            },
            Instr::Append(r) => match cfg.append.as_mut() {
                Some(hook) => hook(asm, map(r)),
                // no default: an unhooked append inside an instrumented body
                // would leak into the host output, drop it instead
                None => {}
            },
            Instr::SLoad { addr, dst } => {
                asm.copy(map(addr), scratch_tmp);
                for _ in 0..cfg.scratch_shift {
                    asm.double(scratch_tmp);
                }
                for _ in 0..cfg.scratch_offset {
                    asm.inc(scratch_tmp);
                }
                asm.sload(scratch_tmp, map(dst));
            }
            Instr::SStore { addr, val } => {
                asm.copy(map(addr), scratch_tmp);
                for _ in 0..cfg.scratch_shift {
                    asm.double(scratch_tmp);
                }
                for _ in 0..cfg.scratch_offset {
                    asm.inc(scratch_tmp);
                }
                asm.sstore(scratch_tmp, map(val));
            }
            Instr::Halt => asm.jmp(cfg.on_halt),
        }
    }
    asm.bind(site[len]);
    asm.jmp(cfg.on_halt);

    Inlined { entry, reg_base, reg_count: reg_count.max(1) }
}
