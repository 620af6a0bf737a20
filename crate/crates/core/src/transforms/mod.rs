//! Program transformations between the output disciplines: limit machines to
//! monotone machines and back, jump normal forms, inversion of limits
//! through the jump, stagewise control, and transparency lifts.

mod control;
mod inline;
mod inversion;
mod normal_forms;

pub use control::{
    apply_staged, extension_universe, jump_on_generics, uniform_limit_control, HostRealizer,
    Realizer, TransparencyWitness, TransparentMap,
};
pub use inline::{inline_program, InlineConfig, Inlined};
pub use inversion::{
    halting_normal_form, inversion_jump, limit_inversion, verify_inversion, Inversion,
    InversionStage,
};
pub use normal_forms::{
    comparators_universe, diagonal_column, diagonal_limit, diagonal_value, fmc_normal_form,
    jump_inverse_apply, jump_inverse_realizer, jump_inverse_stream, jump_normal_form, low_apply,
    low_monotone_code, limit_to_monotone, monotone_after_limit,
};

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::baire::{pair, Stream};
    use crate::vm::{
        copier_code, eq_test_code, jump_exact, lim_code, run_limit, run_monotone, Answer, Asm,
        MachineCode, PhiCode, ProgramKind, Universe, UniverseEntry, Verdict,
    };

    #[test]
    fn limit_to_monotone_matches_direct_run() {
        // the equality test settles every cell; its monotone form must emit
        // columns converging to the same tape
        let e = eq_test_code();
        let g = limit_to_monotone(&e).unwrap();
        for p in [
            Stream::constant(0),
            Stream::word_then_const(vec![0, 0, 0, 2], 0),
            Stream::word_then_const(vec![0, 7], 0),
        ] {
            let direct = run_limit(&e, &p, 200_000).unwrap();
            let out = run_monotone(&g, &p, 3_000_000).unwrap().output;
            for j in 0..4 {
                let want = direct.tape.get(&j).copied().unwrap();
                assert_eq!(diagonal_limit(&out, j, 3), Some(want), "cell {j}");
            }
        }
    }

    #[test]
    fn limit_to_monotone_rejects_monotone_sources() {
        assert!(limit_to_monotone(&copier_code()).is_err());
        assert!(fmc_normal_form(&lim_code()).is_err());
    }

    #[test]
    fn monotone_after_limit_composes() {
        // copier after the equality test: the composite limit machine's tape
        // is the function value itself
        let c = monotone_after_limit(&copier_code(), &eq_test_code()).unwrap();
        assert_eq!(c.kind(), ProgramKind::Fmc);
        let p = Stream::word_then_const(vec![0, 0, 5], 0);
        let direct = run_limit(&eq_test_code(), &p, 100_000).unwrap();
        let composed = run_limit(&c, &p, 3_000_000).unwrap();
        for j in 0..4 {
            assert_eq!(composed.tape.get(&j), direct.tape.get(&j), "cell {j}");
        }
        // each cell of the composite flips at most once more than the source
        assert!(composed.max_mind_changes() <= 2);
    }

    #[test]
    fn jump_normal_form_removes_the_limit() {
        let (g, universe) = jump_normal_form(&eq_test_code(), 300_000).unwrap();
        let universe = Arc::new(universe);
        for (p, expect) in [
            (Stream::constant(0), vec![1, 1, 1]),
            (Stream::word_then_const(vec![0, 0, 3], 0), vec![0, 0, 0]),
        ] {
            let q = jump_exact(Arc::clone(&universe), p.clone());
            let out = run_monotone(&g, &q, 30_000_000).unwrap().output;
            assert!(out.len() >= expect.len(), "only {} cells emitted", out.len());
            assert_eq!(&out[..expect.len()], &expect[..]);
        }
    }

    #[test]
    fn staged_inversion_realizes_its_bits() {
        let mut u = Universe::whitelist();
        u.insert(0, UniverseEntry { program: None, verdict: Some(Verdict::Halts) });
        u.insert(1, UniverseEntry { program: None, verdict: Some(Verdict::Loops) });
        // cell pair(5, 7) is free at stage 2 (component 5 > stage, position 7 >= 5)
        u.insert(
            2,
            UniverseEntry {
                program: None,
                verdict: Some(Verdict::InputCellEq { cell: pair(5, 7), value: 9 }),
            },
        );
        // cell pair(6, 2) is forced to p(2) by block agreement
        u.insert(
            3,
            UniverseEntry {
                program: None,
                verdict: Some(Verdict::InputCellEq { cell: pair(6, 2), value: 4 }),
            },
        );
        let u = Arc::new(u);
        let p = Stream::word_then_const(vec![3, 1, 4, 1, 5], 0);
        let inv = limit_inversion(&p, &u, 4).unwrap();
        assert_eq!(inv.bits, vec![1, 0, 1, 1]);
        assert_eq!(inv.stages[2].witness, Some((5, 7, 9)));
        assert!(verify_inversion(&inv, &u).unwrap());
        // the family converges to p blockwise
        for n in 0..6u64 {
            let r_n = inv.component(n);
            for j in 0..n {
                assert_eq!(r_n.get(j).unwrap(), p.get(j).unwrap());
            }
        }
    }

    #[test]
    fn halting_normal_form_reads_bits_and_point() {
        // s appends: the halting bit of machine 0, then p(0), p(1)
        let mut asm = Asm::new();
        let idx = asm.reg();
        let v = asm.reg();
        for cell in [0u64, 1, 3] {
            asm.set_const(idx, cell);
            asm.read(idx, v);
            asm.append(v);
        }
        asm.halt();
        let s = MachineCode::new(asm.finish(), ProgramKind::Monotone).unwrap();

        let (g, mut universe) = halting_normal_form(&s, 50).unwrap();
        universe.insert(
            0,
            UniverseEntry { program: Some(crate::vm::halt_now_code()), verdict: None },
        );
        let universe = Arc::new(universe);
        let p = Stream::word_then_const(vec![6, 2], 0);
        let fam = p.clone();
        let r = Stream::interleave_omega(move |_| fam.clone());
        let h = jump_exact(Arc::clone(&universe), r);
        let out = run_monotone(&g, &h, 5_000_000).unwrap().output;
        assert_eq!(out, vec![1, 6, 2]);
    }

    #[test]
    fn transparency_lift_through_lim() {
        // f doubles each cell as it copies; lift it through the cellwise limit
        let mut asm = Asm::new();
        let m = asm.reg();
        let v = asm.reg();
        let top = asm.label();
        asm.bind(top);
        asm.read(m, v);
        asm.double(v);
        asm.append(v);
        asm.inc(m);
        asm.jmp(top);
        let f = MachineCode::new(asm.finish(), ProgramKind::Monotone).unwrap();

        let lifted = TransparencyWitness::new(TransparentMap::Lim).lift(&f).unwrap();
        let g = lifted.code().expect("lim lift is bytecode").clone();
        // a family settling cellwise to p: member t disagrees below index t
        let p = Stream::word_then_const(vec![3, 1, 4], 0);
        let fam = p.clone();
        let x = Stream::interleave_omega(move |t| {
            let fam = fam.clone();
            Stream::from_fn(move |k| if k > t { Ok(9) } else { fam.get(k) })
        });
        let out = run_monotone(&g, &x, 60_000_000).unwrap().output;
        for j in 0..3u64 {
            let want = 2 * p.get(j).unwrap();
            assert_eq!(
                diagonal_limit(&out, j, 2),
                Some(want),
                "cell {j} of the lifted output"
            );
        }
    }

    #[test]
    fn transparency_lift_through_jump_inverse() {
        let f = copier_code();
        let lifted = TransparencyWitness::new(TransparentMap::JumpInverse).lift(&f).unwrap();
        let p = Stream::word_then_const(vec![2, 0, 5], 1);
        let q = jump_exact(comparators_universe(), p.clone());
        let out = lifted.apply(&q, 100_000).unwrap();
        // G(q) is the jump of f(p) = p; invert it back
        let back = jump_inverse_stream(out, 64);
        for j in 0..5 {
            assert_eq!(back.get(j).unwrap(), p.get(j).unwrap());
        }
    }

    #[test]
    fn staged_control_converges_for_continuous_codes() {
        let id = PhiCode::Identity;
        let codes = uniform_limit_control(&id, 12).unwrap();
        let p = Stream::word_then_const(vec![1, 0, 2], 3);
        let outs = apply_staged(&codes, &p, 3).unwrap();
        // later stages commit a correct, growing prefix
        let last = outs.last().unwrap();
        assert!(!last.is_empty());
        for (j, &v) in last.iter().enumerate() {
            assert_eq!(v, p.get(j as u64).unwrap());
        }
        let lens: Vec<usize> = outs.iter().map(|w| w.len()).collect();
        assert!(lens.windows(2).all(|w| w[0] <= w[1]));

        let konst = PhiCode::Constant { word: vec![8, 8], tail: 0 };
        let codes = uniform_limit_control(&konst, 8).unwrap();
        let outs = apply_staged(&codes, &p, 4).unwrap();
        assert_eq!(outs.last().unwrap()[..2], [8, 8]);
    }

    #[test]
    fn generic_jump_bits_from_certificates() {
        let u = extension_universe(vec![
            vec![(vec![0], false), (vec![1], true)],
            vec![(vec![1, 1], true)],
            vec![(vec![0, 0], true)],
        ]);
        let p = Stream::word_then_const(vec![1, 1], 0);
        let bits = jump_on_generics(&p, &u, 3).unwrap();
        assert_eq!(bits, vec![Answer::Halts, Answer::Halts, Answer::Unknown]);
    }
}
