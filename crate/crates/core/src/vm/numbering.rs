//! Total Gödel numbering of programs.
//!
//! Instructions: HALT is 0; any other instruction is `1 + 8*payload + tag`
//! with the tag selecting the shape and the payload carrying the register
//! arguments (pairing for two-argument shapes). Programs: the instruction
//! codes are written in bijective base 3 and joined with a separator digit,
//! the resulting digit string is read as a bijective base-4 numeral. Both
//! directions are total; the empty program is index 0.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::{Instr, Program};

/// Cantor pairing over big naturals.
pub fn big_pair(a: &BigUint, b: &BigUint) -> BigUint {
    let s = a + b;
    (&s * (&s + 1u32)) / 2u32 + b
}

/// Inverse of [`big_pair`].
pub fn big_unpair(m: &BigUint) -> (BigUint, BigUint) {
    let disc = (m * 8u32) + 1u32;
    let mut s = (disc.sqrt() - 1u32) / 2u32;
    while (&s + 1u32) * (&s + 2u32) / 2u32 <= *m {
        s += 1u32;
    }
    while &s * (&s + 1u32) / 2u32 > *m {
        s -= 1u32;
    }
    let b = m - (&s * (&s + 1u32) / 2u32);
    (&s - &b, b)
}

fn to_u64_saturating(n: &BigUint) -> u64 {
    n.to_u64().unwrap_or(u64::MAX)
}

fn instr_to_code(i: &Instr) -> BigUint {
    let (tag, payload): (u32, BigUint) = match *i {
        Instr::Halt => return BigUint::zero(),
        Instr::Inc(r) => (0, BigUint::from(r)),
        Instr::Dec(r) => (1, BigUint::from(r)),
        Instr::Jz { reg, target } => (2, big_pair(&BigUint::from(reg), &BigUint::from(target))),
        Instr::Read { idx, dst } => (3, big_pair(&BigUint::from(idx), &BigUint::from(dst))),
        Instr::Write { cell, val } => (4, big_pair(&BigUint::from(cell), &BigUint::from(val))),
        Instr::Append(r) => (5, BigUint::from(r)),
        Instr::SLoad { addr, dst } => (6, big_pair(&BigUint::from(addr), &BigUint::from(dst))),
        Instr::SStore { addr, val } => (7, big_pair(&BigUint::from(addr), &BigUint::from(val))),
    };
    payload * 8u32 + tag + 1u32
}

fn instr_from_code(c: &BigUint) -> Instr {
    if c.is_zero() {
        return Instr::Halt;
    }
    let c1 = c - 1u32;
    let tag = (&c1 % 8u32).to_u32().unwrap();
    let payload = &c1 / 8u32;
    let one = |p: &BigUint| to_u64_saturating(p);
    let two = |p: &BigUint| {
        let (a, b) = big_unpair(p);
        (to_u64_saturating(&a), to_u64_saturating(&b))
    };
    match tag {
        0 => Instr::Inc(one(&payload)),
        1 => Instr::Dec(one(&payload)),
        2 => {
            let (reg, target) = two(&payload);
            Instr::Jz { reg, target }
        }
        3 => {
            let (idx, dst) = two(&payload);
            Instr::Read { idx, dst }
        }
        4 => {
            let (cell, val) = two(&payload);
            Instr::Write { cell, val }
        }
        5 => Instr::Append(one(&payload)),
        6 => {
            let (addr, dst) = two(&payload);
            Instr::SLoad { addr, dst }
        }
        7 => {
            let (addr, val) = two(&payload);
            Instr::SStore { addr, val }
        }
        _ => unreachable!(),
    }
}

/// Bijective base-3 digits (values 1..=3), most significant first.
fn block_digits(n: &BigUint) -> Vec<u8> {
    let mut digits = Vec::new();
    let mut n = n.clone();
    while !n.is_zero() {
        let d = ((&n - 1u32) % 3u32).to_u8().unwrap() + 1;
        digits.push(d);
        n = (n - 1u32) / 3u32;
    }
    digits.reverse();
    digits
}

fn block_value(digits: &[u8]) -> BigUint {
    let mut n = BigUint::zero();
    for &d in digits {
        n = n * 3u32 + d;
    }
    n
}

/// Gödel index of a program. 0 is the empty program; a nonempty program is
/// one plus the bijective base-4 value of its digit string (digit strings
/// biject with nonempty programs, the empty string being a lone HALT).
pub fn encode_program(p: &Program) -> BigUint {
    if p.instrs.is_empty() {
        return BigUint::zero();
    }
    let mut digits: Vec<u8> = Vec::new();
    for (pos, instr) in p.instrs.iter().enumerate() {
        if pos > 0 {
            digits.push(4);
        }
        digits.extend(block_digits(&instr_to_code(instr)));
    }
    let mut n = BigUint::zero();
    for d in digits {
        n = n * 4u32 + d;
    }
    n + 1u32
}

/// Program at a Gödel index. Total.
pub fn decode_program(n: &BigUint) -> Program {
    if n.is_zero() {
        return Program::default();
    }
    let mut digits: Vec<u8> = Vec::new();
    let mut n = n - 1u32;
    while !n.is_zero() {
        let d = ((&n - 1u32) % 4u32).to_u8().unwrap() + 1;
        digits.push(d);
        n = (n - 1u32) / 4u32;
    }
    digits.reverse();
    let mut instrs = Vec::new();
    let mut block: Vec<u8> = Vec::new();
    for d in digits {
        if d == 4 {
            instrs.push(instr_from_code(&block_value(&block)));
            block.clear();
        } else {
            block.push(d);
        }
    }
    instrs.push(instr_from_code(&block_value(&block)));
    Program::new(instrs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vm::ProgramKind;

    // one past the largest index checked to round-trip; the numbering is in
    // fact bijective for every index whose decoded register arguments fit in
    // a machine word
    const ROUND_TRIP_CHECKED: u64 = 5000;

    #[test]
    fn empty_program_is_zero() {
        assert_eq!(encode_program(&Program::default()), BigUint::zero());
        assert!(decode_program(&BigUint::zero()).is_empty());
    }

    #[test]
    fn exhaustive_round_trip_below_cutoff() {
        for n in 0..ROUND_TRIP_CHECKED {
            let n = BigUint::from(n);
            let p = decode_program(&n);
            assert_eq!(encode_program(&p), n, "index {n} does not round-trip");
        }
    }

    #[test]
    fn sample_programs_round_trip() {
        let samples = vec![
            Program::new(vec![Instr::Halt]),
            Program::new(vec![Instr::Inc(3), Instr::Jz { reg: 3, target: 0 }]),
            Program::new(vec![
                Instr::Read { idx: 1, dst: 2 },
                Instr::Append(2),
                Instr::Inc(1),
                Instr::Jz { reg: 0, target: 0 },
            ]),
            Program::new(vec![
                Instr::Write { cell: 1, val: 2 },
                Instr::SLoad { addr: 4, dst: 5 },
                Instr::SStore { addr: 4, val: 5 },
                Instr::Dec(9),
            ]),
        ];
        for p in samples {
            assert_eq!(decode_program(&encode_program(&p)), p);
        }
    }

    #[test]
    fn random_indices_decode_to_valid_programs() {
        // Deterministic pseudo-random sweep; validity means labels may point
        // anywhere (out-of-range targets halt) and the program is runnable.
        let mut x: u64 = 0x9e3779b97f4a7c15;
        for _ in 0..500 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let p = decode_program(&BigUint::from(x >> 16));
            // Constructible under some kind: strip nothing, just check both
            // runs reject or accept by discipline without panicking.
            let _ = crate::vm::MachineCode::new(p.clone(), ProgramKind::Limit);
            let _ = crate::vm::MachineCode::new(p, ProgramKind::Monotone);
        }
    }

    #[test]
    fn big_pairing_round_trip() {
        for a in 0u32..40 {
            for b in 0u32..40 {
                let m = big_pair(&BigUint::from(a), &BigUint::from(b));
                let (x, y) = big_unpair(&m);
                assert_eq!((x, y), (BigUint::from(a), BigUint::from(b)));
            }
        }
    }
}
