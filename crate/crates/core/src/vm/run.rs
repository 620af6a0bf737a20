//! Execution engines for the three output disciplines.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::baire::{Stream, Word};
use crate::error::{Error, Result};

use super::{Instr, MachineCode, Program, ProgramKind};

/// Register file: dense for small ids, sparse for decoded junk.
struct Regs {
    lo: Vec<u64>,
    hi: HashMap<u64, u64>,
}

const DENSE: u64 = 4096;

impl Regs {
    fn new() -> Self {
        Regs { lo: Vec::new(), hi: HashMap::new() }
    }

    #[inline]
    fn get(&self, r: u64) -> u64 {
        if r < DENSE {
            self.lo.get(r as usize).copied().unwrap_or(0)
        } else {
            self.hi.get(&r).copied().unwrap_or(0)
        }
    }

    #[inline]
    fn set(&mut self, r: u64, v: u64) {
        if r < DENSE {
            let r = r as usize;
            if r >= self.lo.len() {
                self.lo.resize(r + 1, 0);
            }
            self.lo[r] = v;
        } else {
            self.hi.insert(r, v);
        }
    }
}

/// Result of a monotone run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotoneRun {
    pub output: Word,
    pub steps: u64,
    pub halted: bool,
}

/// One recorded rewrite of an output cell. Writes that repeat the current
/// value are not recorded: the history tracks value changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WriteEvent {
    pub step: u64,
    pub value: u64,
    pub prev: Option<u64>,
}

/// Result of a limit (or fmc) run: final tape, per-cell write history.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitRun {
    pub tape: BTreeMap<u64, u64>,
    pub history: BTreeMap<u64, Vec<WriteEvent>>,
    pub budget: u64,
    pub steps: u64,
    pub halted: bool,
}

impl LimitRun {
    /// Number of value changes at a cell: writes minus one for written cells.
    pub fn mind_changes(&self, cell: u64) -> u64 {
        self.history.get(&cell).map(|h| h.len() as u64 - 1).unwrap_or(0)
    }

    /// Largest per-cell mind-change count over all written cells.
    pub fn max_mind_changes(&self) -> u64 {
        self.history.keys().map(|&c| self.mind_changes(c)).max().unwrap_or(0)
    }

    /// Largest `L` such that cells `0..L` are all written and none of them
    /// was rewritten inside the final quiet window. The window covers the
    /// last `quiet_fraction` of the spent budget; this is an observational
    /// notion, not a proof of stabilization.
    pub fn stabilized_prefix(&self, quiet_fraction: f64) -> u64 {
        let horizon = self.steps.saturating_sub((self.steps as f64 * quiet_fraction) as u64);
        let mut l = 0u64;
        loop {
            match self.history.get(&l) {
                Some(h) if h.last().map(|e| e.step <= horizon).unwrap_or(false) => l += 1,
                _ => return l,
            }
        }
    }

    /// The written prefix of the tape, up to the first unwritten cell.
    pub fn tape_prefix(&self) -> Word {
        let mut out = Vec::new();
        let mut n = 0u64;
        while let Some(&v) = self.tape.get(&n) {
            out.push(v);
            n += 1;
        }
        out
    }
}

enum OutputSink {
    Monotone(Word),
    Limit { tape: BTreeMap<u64, u64>, history: BTreeMap<u64, Vec<WriteEvent>> },
    /// Halting probes: outputs executed but discarded.
    Discard { appended: u64 },
}

struct Machine<'a> {
    program: &'a Program,
    input: &'a Stream,
    regs: Regs,
    scratch: HashMap<u64, u64>,
    pc: usize,
    steps: u64,
    halted: bool,
    sink: OutputSink,
}

impl<'a> Machine<'a> {
    fn new(program: &'a Program, input: &'a Stream, sink: OutputSink) -> Self {
        Machine {
            program,
            input,
            regs: Regs::new(),
            scratch: HashMap::new(),
            pc: 0,
            steps: 0,
            halted: false,
            sink,
        }
    }

    fn run(&mut self, budget: u64) -> Result<()> {
        let len = self.program.instrs.len();
        while self.steps < budget {
            if self.pc >= len {
                self.halted = true;
                return Ok(());
            }
            let instr = self.program.instrs[self.pc];
            self.steps += 1;
            match instr {
                Instr::Inc(r) => {
                    let v = self.regs.get(r);
                    self.regs.set(r, v.wrapping_add(1));
                    self.pc += 1;
                }
                Instr::Dec(r) => {
                    let v = self.regs.get(r);
                    self.regs.set(r, v.saturating_sub(1));
                    self.pc += 1;
                }
                Instr::Jz { reg, target } => {
                    if self.regs.get(reg) == 0 {
                        self.pc = target.min(len as u64) as usize;
                    } else {
                        self.pc += 1;
                    }
                }
                Instr::Read { idx, dst } => {
                    let cell = self.regs.get(idx);
                    let v = self.input.get(cell)?;
                    self.regs.set(dst, v);
                    self.pc += 1;
                }
                Instr::Write { cell, val } => {
                    let c = self.regs.get(cell);
                    let v = self.regs.get(val);
                    if let OutputSink::Limit { tape, history } = &mut self.sink {
                        let prev = tape.get(&c).copied();
                        if prev != Some(v) {
                            tape.insert(c, v);
                            history
                                .entry(c)
                                .or_default()
                                .push(WriteEvent { step: self.steps, value: v, prev });
                        }
                    }
                    self.pc += 1;
                }
                Instr::Append(r) => {
                    let v = self.regs.get(r);
                    match &mut self.sink {
                        OutputSink::Monotone(out) => out.push(v),
                        OutputSink::Discard { appended } => *appended += 1,
                        OutputSink::Limit { .. } => {}
                    }
                    self.pc += 1;
                }
                Instr::SLoad { addr, dst } => {
                    let a = self.regs.get(addr);
                    let v = self.scratch.get(&a).copied().unwrap_or(0);
                    self.regs.set(dst, v);
                    self.pc += 1;
                }
                Instr::SStore { addr, val } => {
                    let a = self.regs.get(addr);
                    let v = self.regs.get(val);
                    self.scratch.insert(a, v);
                    self.pc += 1;
                }
                Instr::Halt => {
                    self.steps -= 1; // halting is free
                    self.halted = true;
                    return Ok(());
                }
            }
        }
        Ok(())
    }
}

/// Run a monotone program, returning whatever prefix it appended within the
/// step budget.
pub fn run_monotone(code: &MachineCode, input: &Stream, budget: u64) -> Result<MonotoneRun> {
    if code.kind() != ProgramKind::Monotone {
        return Err(Error::KindMismatch { expected: "monotone", got: code.kind().name() });
    }
    let mut m = Machine::new(code.program(), input, OutputSink::Monotone(Vec::new()));
    m.run(budget)?;
    let output = match m.sink {
        OutputSink::Monotone(w) => w,
        _ => unreachable!(),
    };
    Ok(MonotoneRun { output, steps: m.steps, halted: m.halted })
}

/// Run a limit or fmc program, recording the revisable tape and its history.
pub fn run_limit(code: &MachineCode, input: &Stream, budget: u64) -> Result<LimitRun> {
    if code.kind() == ProgramKind::Monotone {
        return Err(Error::KindMismatch { expected: "limit or fmc", got: "monotone" });
    }
    let mut m = Machine::new(
        code.program(),
        input,
        OutputSink::Limit { tape: BTreeMap::new(), history: BTreeMap::new() },
    );
    m.run(budget)?;
    let (tape, history) = match m.sink {
        OutputSink::Limit { tape, history } => (tape, history),
        _ => unreachable!(),
    };
    Ok(LimitRun { tape, history, budget, steps: m.steps, halted: m.halted })
}

/// Halting probe for an arbitrary program (output discipline ignored).
/// Returns the number of steps on halt, `None` on budget exhaustion. Input
/// read failures count as divergence within the probe.
pub fn run_for_halting(program: &Program, input: &Stream, budget: u64) -> Option<u64> {
    let mut m = Machine::new(program, input, OutputSink::Discard { appended: 0 });
    match m.run(budget) {
        Ok(()) if m.halted => Some(m.steps),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vm::{parse_program, ProgramKind};

    fn machine(text: &str, kind: ProgramKind) -> MachineCode {
        MachineCode::new(parse_program(text).unwrap(), kind).unwrap()
    }

    #[test]
    fn monotone_copier_copies() {
        // r1 walks the input; copy cell into r2 and append forever
        let code = machine(
            "READ 1,2\nAPPEND 2\nINC 1\nJZ 0,0\n",
            ProgramKind::Monotone,
        );
        let input = Stream::word_then_const(vec![5, 4, 3], 9);
        let run = run_monotone(&code, &input, 100).unwrap();
        assert!(!run.halted);
        assert_eq!(&run.output[..6], &[5, 4, 3, 9, 9, 9]);
    }

    #[test]
    fn limit_run_records_value_changes_only() {
        // write 7 to cell 0 twice, then 8
        let code = machine(
            "INC 2\nINC 2\nINC 2\nINC 2\nINC 2\nINC 2\nINC 2\nWRITE 1,2\nWRITE 1,2\nINC 2\nWRITE 1,2\nHALT\n",
            ProgramKind::Limit,
        );
        let run = run_limit(&code, &Stream::constant(0), 100).unwrap();
        assert!(run.halted);
        assert_eq!(run.tape.get(&0), Some(&8));
        assert_eq!(run.mind_changes(0), 1);
        let h = &run.history[&0];
        assert_eq!(h.len(), 2);
        assert_eq!(h[0].prev, None);
        assert_eq!(h[1].prev, Some(7));
    }

    #[test]
    fn kind_discipline_enforced() {
        let p = parse_program("WRITE 1,2\n").unwrap();
        assert!(MachineCode::new(p, ProgramKind::Monotone).is_err());
        let p = parse_program("APPEND 1\n").unwrap();
        assert!(MachineCode::new(p, ProgramKind::Limit).is_err());
    }

    #[test]
    fn out_of_range_jump_halts() {
        let code = machine("JZ 0,99\n", ProgramKind::Monotone);
        let run = run_monotone(&code, &Stream::constant(0), 10).unwrap();
        assert!(run.halted);
        assert_eq!(run.steps, 1);
    }

    #[test]
    fn budget_cuts_off() {
        let code = machine("INC 1\nJZ 0,0\n", ProgramKind::Monotone);
        let run = run_monotone(&code, &Stream::constant(0), 7).unwrap();
        assert!(!run.halted);
        assert_eq!(run.steps, 7);
    }

    #[test]
    fn halting_probe() {
        let diverge = parse_program("JZ 0,0\n").unwrap();
        assert_eq!(run_for_halting(&diverge, &Stream::constant(0), 50), None);
        let halt = parse_program("INC 1\nHALT\n").unwrap();
        assert_eq!(run_for_halting(&halt, &Stream::constant(0), 50), Some(1));
    }

    #[test]
    fn scratch_is_private_and_readable() {
        // scratch[3] := 7, then read it back and append
        let code = machine(
            "INC 1\nINC 1\nINC 1\nINC 2\nINC 2\nINC 2\nINC 2\nINC 2\nINC 2\nINC 2\nSSTORE 1,2\nSLOAD 1,3\nAPPEND 3\nHALT\n",
            ProgramKind::Monotone,
        );
        let run = run_monotone(&code, &Stream::constant(0), 100).unwrap();
        assert_eq!(run.output, vec![7]);
    }
}
