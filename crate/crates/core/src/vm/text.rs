//! Textual program format: one instruction per line, `#` comments,
//! jump targets are absolute instruction indices.

use crate::error::{Error, Result};

use super::{Instr, Program};

/// Parse the textual format.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut instrs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (op, rest) = match line.split_once(char::is_whitespace) {
            Some((op, rest)) => (op, rest.trim()),
            None => (line, ""),
        };
        let parse_u64 = |s: &str| -> Result<u64> {
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("line {}: bad number `{s}`", lineno + 1)))
        };
        let two = |rest: &str| -> Result<(u64, u64)> {
            let Some((a, b)) = rest.split_once(',') else {
                return Err(Error::Parse(format!(
                    "line {}: expected two comma-separated arguments",
                    lineno + 1
                )));
            };
            Ok((parse_u64(a)?, parse_u64(b)?))
        };
        let instr = match op.to_ascii_uppercase().as_str() {
            "INC" => Instr::Inc(parse_u64(rest)?),
            "DEC" => Instr::Dec(parse_u64(rest)?),
            "JZ" => {
                let (reg, target) = two(rest)?;
                Instr::Jz { reg, target }
            }
            "READ" => {
                let (idx, dst) = two(rest)?;
                Instr::Read { idx, dst }
            }
            "WRITE" => {
                let (cell, val) = two(rest)?;
                Instr::Write { cell, val }
            }
            "APPEND" => Instr::Append(parse_u64(rest)?),
            "SLOAD" => {
                let (addr, dst) = two(rest)?;
                Instr::SLoad { addr, dst }
            }
            "SSTORE" => {
                let (addr, val) = two(rest)?;
                Instr::SStore { addr, val }
            }
            "HALT" => Instr::Halt,
            other => {
                return Err(Error::Parse(format!("line {}: unknown opcode `{other}`", lineno + 1)))
            }
        };
        instrs.push(instr);
    }
    Ok(Program::new(instrs))
}

/// Print in the textual format; parses back to the same program.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for instr in &p.instrs {
        let line = match *instr {
            Instr::Inc(r) => format!("INC {r}"),
            Instr::Dec(r) => format!("DEC {r}"),
            Instr::Jz { reg, target } => format!("JZ {reg},{target}"),
            Instr::Read { idx, dst } => format!("READ {idx},{dst}"),
            Instr::Write { cell, val } => format!("WRITE {cell},{val}"),
            Instr::Append(r) => format!("APPEND {r}"),
            Instr::SLoad { addr, dst } => format!("SLOAD {addr},{dst}"),
            Instr::SStore { addr, val } => format!("SSTORE {addr},{val}"),
            Instr::Halt => "HALT".to_string(),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}
