//! A register machine over streams of naturals.
//!
//! Three output disciplines share one instruction set:
//!
//! * monotone programs append to a one-way output tape (`APPEND`),
//! * limit programs write to a revisable output tape (`WRITE`), cells may be
//!   rewritten and are expected to stabilize,
//! * fmc programs are limit programs promising finitely many rewrites.
//!
//! Besides the registers there is a private scratch tape (`SLOAD`/`SSTORE`)
//! used by generated code for unbounded intermediate state; it is invisible
//! to the output semantics.

mod asm;
mod manifest;
mod numbering;
mod oracle;
mod phi;
mod programs;
mod run;
mod text;

pub use asm::{Asm, Label};
pub use manifest::{load_universe_manifest, save_universe_manifest, ManifestEntry, UniverseManifest};
pub use numbering::{big_pair, big_unpair, decode_program, encode_program};
pub use oracle::{
    eval_verdict, jump_approx, jump_exact, oracle_query, we_enumerate, Answer, Layout, Oracle,
    Universe, UniverseEntry, Verdict,
};
pub use phi::{phi_apply, phi_smn, validate_assoc, PhiCode};
pub use programs::{
    constembed_code, copier_code, eq_test_code, eq_test_with_values, halt_iff_even_code,
    halt_now_code, jump_inverse_code, lim_code, limdelta_code, loop_forever_code, low_code,
    write_copier_code,
};
pub use run::{run_for_halting, run_limit, run_monotone, LimitRun, MonotoneRun, WriteEvent};
pub use text::{parse_program, print_program};

use num_bigint::BigUint;

use crate::error::{Error, Result};

/// One instruction. Register ids and immediates are naturals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instr {
    /// reg += 1
    Inc(u64),
    /// reg -= 1, floored at 0
    Dec(u64),
    /// if reg == 0 jump to instruction index `target` (past the end halts)
    Jz { reg: u64, target: u64 },
    /// dst := input[ reg[idx] ]
    Read { idx: u64, dst: u64 },
    /// output[ reg[cell] ] := reg[val]  (limit and fmc programs)
    Write { cell: u64, val: u64 },
    /// push reg[r] onto the output tape  (monotone programs)
    Append(u64),
    /// dst := scratch[ reg[addr] ]
    SLoad { addr: u64, dst: u64 },
    /// scratch[ reg[addr] ] := reg[val]
    SStore { addr: u64, val: u64 },
    Halt,
}

impl Instr {
    pub fn name(&self) -> &'static str {
        match self {
            Instr::Inc(_) => "INC",
            Instr::Dec(_) => "DEC",
            Instr::Jz { .. } => "JZ",
            Instr::Read { .. } => "READ",
            Instr::Write { .. } => "WRITE",
            Instr::Append(_) => "APPEND",
            Instr::SLoad { .. } => "SLOAD",
            Instr::SStore { .. } => "SSTORE",
            Instr::Halt => "HALT",
        }
    }
}

/// A straight-line list of instructions; control flow via `JZ`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub instrs: Vec<Instr>,
}

impl Program {
    pub fn new(instrs: Vec<Instr>) -> Self {
        Program { instrs }
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    /// Largest register id mentioned, if any.
    pub fn max_register(&self) -> Option<u64> {
        self.instrs
            .iter()
            .flat_map(|i| match *i {
                Instr::Inc(r) | Instr::Dec(r) | Instr::Append(r) => vec![r],
                Instr::Jz { reg, .. } => vec![reg],
                Instr::Read { idx, dst } => vec![idx, dst],
                Instr::Write { cell, val } => vec![cell, val],
                Instr::SLoad { addr, dst } => vec![addr, dst],
                Instr::SStore { addr, val } => vec![addr, val],
                Instr::Halt => vec![],
            })
            .max()
    }

    /// Checks that every jump target lands on an instruction (or one past the
    /// end, which is an explicit halt).
    pub fn labels_in_range(&self) -> bool {
        self.instrs.iter().all(|i| match *i {
            Instr::Jz { target, .. } => target <= self.instrs.len() as u64,
            _ => true,
        })
    }
}

/// Output discipline of a program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProgramKind {
    Monotone,
    Limit,
    Fmc,
}

impl ProgramKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProgramKind::Monotone => "monotone",
            ProgramKind::Limit => "limit",
            ProgramKind::Fmc => "fmc",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "monotone" => Ok(ProgramKind::Monotone),
            "limit" => Ok(ProgramKind::Limit),
            "fmc" => Ok(ProgramKind::Fmc),
            other => Err(Error::Parse(format!("unknown program kind `{other}`"))),
        }
    }
}

/// A program together with its output discipline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineCode {
    kind: ProgramKind,
    program: Program,
}

impl MachineCode {
    /// Validates the kind discipline: monotone programs must not `WRITE`,
    /// limit and fmc programs must not `APPEND`.
    pub fn new(program: Program, kind: ProgramKind) -> Result<Self> {
        for instr in &program.instrs {
            match (kind, instr) {
                (ProgramKind::Monotone, Instr::Write { .. }) => {
                    return Err(Error::KindViolation { instr: "WRITE", kind: "monotone" })
                }
                (ProgramKind::Limit | ProgramKind::Fmc, Instr::Append(_)) => {
                    return Err(Error::KindViolation { instr: "APPEND", kind: kind.name() })
                }
                _ => {}
            }
        }
        Ok(MachineCode { kind, program })
    }

    /// Decode a Gödel index. Total: every index yields a valid program, but
    /// the kind discipline is still enforced.
    pub fn from_index(index: &BigUint, kind: ProgramKind) -> Result<Self> {
        MachineCode::new(decode_program(index), kind)
    }

    pub fn kind(&self) -> ProgramKind {
        self.kind
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    /// Gödel index of the program.
    pub fn index(&self) -> BigUint {
        encode_program(&self.program)
    }
}
