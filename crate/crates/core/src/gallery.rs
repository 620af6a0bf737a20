//! The concrete function gallery: counterexamples driven by a finiteness
//! oracle, derivative operators, lower bounds on the Mandelbrot distance,
//! names of semicomputable reals, and small desk demos that tie the machine
//! layer together.
//!
//! The finiteness oracle is explicit: a [`FinUniverse`] declares, for each
//! registered index, either a finite set or an infinite generator. The
//! algorithms only consume the enumerations, so their growing mind-change
//! traces demonstrate (rather than prove) why the computed functions escape
//! the halting problem.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::baire::{pair, Stream, Word};
use crate::error::Result;
use crate::interval::{dyadic_eps, point_rect_distance_lower, rat, rat_int, Expr, Interval};
use crate::metric::{index_of_rational, rational_of_index, CauchyName};
use crate::transforms::{
    extension_universe, jump_normal_form, jump_on_generics, limit_inversion, verify_inversion,
    HostRealizer, Realizer,
};
use crate::vm::{
    eq_test_code, jump_exact, run_limit, run_monotone, Answer, LimitRun, Universe, UniverseEntry,
    Verdict, WriteEvent,
};

// ---- the finiteness oracle ----

/// Presentation of one registered set W_n.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WSet {
    /// An explicit finite set; the enumerator repeats the last element.
    Finite { values: Vec<u64> },
    /// An infinite arithmetic generator: e(i) = base + i * stride.
    Generator { base: u64, stride: u64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FinEntry {
    n: u64,
    #[serde(flatten)]
    set: WSet,
}

/// A ground-truth register of sets W_n together with their enumerators.
/// Whether W_n is finite is decidable *here* by construction; the gallery
/// algorithms never look, they only consume the enumerations.
#[derive(Debug, Clone, Default)]
pub struct FinUniverse {
    entries: BTreeMap<u64, WSet>,
}

impl FinUniverse {
    pub fn new() -> Self {
        FinUniverse::default()
    }

    pub fn insert(&mut self, n: u64, set: WSet) {
        self.entries.insert(n, set);
    }

    /// e_n(i); None when W_n is empty or unregistered.
    pub fn enumerate(&self, n: u64, i: u64) -> Option<u64> {
        match self.entries.get(&n)? {
            WSet::Finite { values } => {
                values.get((i as usize).min(values.len().checked_sub(1)?)).copied()
            }
            WSet::Generator { base, stride } => Some(base + i * (*stride).max(1)),
        }
    }

    /// Number of distinct values among e_n(0), ..., e_n(m).
    pub fn distinct(&self, n: u64, m: u64) -> u64 {
        let mut seen = std::collections::BTreeSet::new();
        for i in 0..=m {
            if let Some(v) = self.enumerate(n, i) {
                seen.insert(v);
            }
        }
        seen.len() as u64
    }

    /// Ground truth, for demos and assertions only.
    pub fn is_finite(&self, n: u64) -> bool {
        matches!(self.entries.get(&n), Some(WSet::Finite { .. }) | None)
    }

    /// |W_n| when finite.
    pub fn cardinality(&self, n: u64) -> Option<u64> {
        match self.entries.get(&n) {
            Some(WSet::Finite { values }) => {
                Some(values.iter().collect::<std::collections::BTreeSet<_>>().len() as u64)
            }
            Some(WSet::Generator { .. }) => None,
            None => Some(0),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let entries: Vec<FinEntry> = serde_json::from_str(&text)?;
        let mut u = FinUniverse::new();
        for e in entries {
            u.insert(e.n, e.set);
        }
        Ok(u)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let entries: Vec<FinEntry> =
            self.entries.iter().map(|(&n, set)| FinEntry { n, set: set.clone() }).collect();
        std::fs::write(path, serde_json::to_string_pretty(&entries)?)?;
        Ok(())
    }
}

/// A sample universe matching the worked examples: W_1 = {9}, W_2 = {4, 7},
/// W_0 and W_5 infinite generators.
pub fn sample_fin_universe() -> FinUniverse {
    let mut u = FinUniverse::new();
    u.insert(0, WSet::Generator { base: 3, stride: 2 });
    u.insert(1, WSet::Finite { values: vec![9] });
    u.insert(2, WSet::Finite { values: vec![4, 7] });
    u.insert(5, WSet::Generator { base: 0, stride: 1 });
    u
}

// ---- single-cell limit runs ----

fn single_cell_run(values: &[u64], budget: u64) -> LimitRun {
    let mut history: Vec<WriteEvent> = Vec::new();
    for (step, &v) in values.iter().enumerate() {
        match history.last() {
            Some(last) if last.value == v => {}
            prev => {
                let prev = prev.map(|e| e.value);
                history.push(WriteEvent { step: step as u64, value: v, prev });
            }
        }
    }
    let tape: BTreeMap<u64, u64> =
        history.last().map(|e| (0, e.value)).into_iter().collect();
    let steps = values.len() as u64;
    LimitRun {
        tape,
        history: if history.is_empty() {
            BTreeMap::new()
        } else {
            [(0, history)].into_iter().collect()
        },
        budget,
        steps,
        halted: false,
    }
}

/// Re-emit a limit run's history as JSONL records, one rewrite per line.
pub fn run_trace_jsonl(run: &LimitRun) -> String {
    let mut events: Vec<(u64, u64, Option<u64>, u64)> = Vec::new();
    for (&cell, writes) in &run.history {
        for w in writes {
            events.push((w.step, cell, w.prev, w.value));
        }
    }
    events.sort();
    let mut out = String::new();
    for (step, cell, old, new) in events {
        let old = old.map(|v| v.to_string()).unwrap_or_else(|| "null".into());
        out.push_str(&format!(
            "{{\"step\":{step},\"cell\":{cell},\"old\":{old},\"new\":{new}}}\n"
        ));
    }
    out
}

/// Split a binary prefix into (zeros, ones, rest) at the first two blocks.
fn split_blocks(prefix: &[u64]) -> Option<(u64, u64, &[u64])> {
    let zeros = prefix.iter().take_while(|&&b| b == 0).count();
    let ones = prefix[zeros..].iter().take_while(|&&b| b == 1).count();
    if ones == 0 {
        return None;
    }
    Some((zeros as u64, ones as u64, &prefix[zeros + ones..]))
}

/// The Cantor-to-reals counterexample: w maps to 2^{-n} when the prefix
/// reads 0^n 1^(|W_n|+1) 0 for some finite W_n, and to 0 otherwise. The
/// returned run revises a single cell holding the index of the current
/// rational output; on any fixed input the value changes at most twice.
pub fn f_cantor(u: &FinUniverse, p: &Stream, stages: u64) -> Result<LimitRun> {
    let zero = index_of_rational(&BigRational::zero());
    let mut values = Vec::with_capacity(stages as usize);
    let mut current = zero;
    let mut prefix: Word = Vec::new();
    for t in 0..stages {
        prefix.push(p.get(t)?);
        if let Some((n, ones, rest)) = split_blocks(&prefix) {
            // the block shape 0^n 1^(k+1) 0 w is committed once the first 0
            // after the ones is visible
            if !rest.is_empty() {
                let k = ones - 1;
                let m = rest.len() as u64 - 1;
                current = if u.distinct(n, m) == k && n < 32 {
                    index_of_rational(&dyadic_value(n))
                } else {
                    zero
                };
            }
        }
        values.push(current);
    }
    Ok(single_cell_run(&values, stages))
}

fn dyadic_value(n: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << n as usize)
}

/// The Cantor-to-Sierpinski counterexample: the characteristic function of
/// the open complement of the zero point and the committed blocks. The
/// single tracked cell holds the Sierpinski bit; it changes at most three
/// times on any fixed input.
pub fn chi_u_sierpinski(u: &FinUniverse, p: &Stream, stages: u64) -> Result<LimitRun> {
    let mut values = Vec::with_capacity(stages as usize);
    let mut current = 0u64;
    let mut prefix: Word = Vec::new();
    for t in 0..stages {
        prefix.push(p.get(t)?);
        if let Some((n, ones, rest)) = split_blocks(&prefix) {
            // updates only fire while the tail after the ones is all zeros
            if !rest.is_empty() && rest.iter().all(|&b| b == 0) {
                let k = ones - 1;
                let m = rest.len() as u64 - 1;
                current = (u.distinct(n, m) != k) as u64;
            }
        }
        values.push(current);
    }
    Ok(single_cell_run(&values, stages))
}

// ---- scaled triangle and bump families ----

/// The triangle piece on the unit interval: 2^{-n} * hat(2^{n+k+2}(x -
/// 2^{-n-1}) - 1), supported on (2^{-n-1}, 2^{-n-1} + 2^{-n-k-1}).
pub fn triangle_piece(n: u64, k: u64) -> Expr {
    let scale = pow2_rat((n + k + 2) as i64);
    let shift = dyadic_value(n + 1);
    let arg = Expr::x().sub(Expr::constant(shift)).scale(scale).sub(Expr::constant(rat_int(1)));
    Expr::Hat(Box::new(arg)).scale(dyadic_value(n))
}

/// The bump piece on the real line: bump(2^{k+2}(x - n) - 1), supported on
/// (n, n + 2^{-k-1}) and smooth everywhere.
pub fn bump_piece(n: u64, k: u64) -> Expr {
    let scale = pow2_rat((k + 2) as i64);
    let arg = Expr::x().sub(Expr::constant(rat_int(n as i64))).scale(scale)
        .sub(Expr::constant(rat_int(1)));
    Expr::Bump(Box::new(arg))
}

fn pow2_rat(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

/// Stagewise outputs of the unit-interval counterexample at point x: value 0
/// while x could still equal some 2^{-n} (or 0), then 2^{-n} * triangle at
/// the committed scale once x is isolated in (2^{-n-1}, 2^{-n}). Exact
/// rational arithmetic throughout.
pub fn f_unit_run(u: &FinUniverse, x: &BigRational, stages: u64) -> Vec<BigRational> {
    let mut values = Vec::with_capacity(stages as usize);
    let mut out = BigRational::zero();
    for t in 0..stages {
        let tol = dyadic_eps(t + 2);
        let mut excluded = x > &tol;
        let mut level = None;
        for n in 0..t + 3 {
            let d = dyadic_value(n);
            if (x - &d).abs() <= tol {
                excluded = false;
                break;
            }
            if x > &dyadic_value(n + 1) && x < &d {
                level = Some(n);
            }
        }
        if excluded {
            if let Some(n) = level {
                let k = u.distinct(n, t);
                let arg = (x - dyadic_value(n + 1)) * pow2_rat((n + k + 2) as i64) - rat_int(1);
                let hat = (rat_int(1) - arg.abs()).max(BigRational::zero());
                out = dyadic_value(n) * hat;
            }
        } else {
            out = BigRational::zero();
        }
        values.push(out.clone());
    }
    values
}

/// Stage-t enclosure of the smooth counterexample at x: the sum of bump
/// pieces for the registered levels, each scaled by the count of distinct
/// enumerated values seen so far.
pub fn f_smooth_enclosure(
    u: &FinUniverse,
    x: &Interval,
    stage: u64,
    terms: u32,
) -> Result<Interval> {
    let mut total = Interval::zero();
    for (&n, _) in &u.entries {
        if n > stage {
            continue;
        }
        let k = u.distinct(n, stage);
        // pieces whose support misses x evaluate to the exact zero interval
        let piece = bump_piece(n, k).eval(x, terms)?;
        total = total.add(&piece);
    }
    Ok(total)
}

// ---- derivative operators ----

/// Symmetric difference quotient (f(x + 2^{-n}) - f(x - 2^{-n})) / 2^{-n+1},
/// evaluated exactly on rational points. For quadratics the quotient equals
/// the derivative for every n; for cubics the defect at 0 is exactly 4^{-n}.
pub fn derivative_pointwise(f: &Expr, x: &BigRational, n: u32, terms: u32) -> Result<Interval> {
    let h = dyadic_eps(n as u64);
    let hi = f.eval_point(&(x + &h), terms)?;
    let lo = f.eval_point(&(x - &h), terms)?;
    Ok(hi.sub(&lo).scale(&(rat(1, 2) / h)))
}

/// The n-th member of the uniformly converging difference-quotient sequence,
/// as a symbolic expression: (f(x + h) - f(x - h)) / (2h) with h = 2^{-n}.
pub fn derivative_uniform(f: &Expr, n: u32) -> Expr {
    let h = dyadic_eps(n as u64);
    let right = f.compose(&Expr::x().add(Expr::constant(h.clone())));
    let left = f.compose(&Expr::x().sub(Expr::constant(h.clone())));
    right.sub(left).scale(rat(1, 2) / h)
}

// ---- Mandelbrot distance ----

/// Outward-round an interval to the dyadic grid 2^{-bits}, keeping the
/// iteration's rational complexity bounded.
fn coarsen(i: &Interval, bits: u32) -> Interval {
    let scale = BigRational::from_integer(BigInt::one() << bits as usize);
    let lo = (&i.lo * &scale).floor() / &scale;
    let hi = (&i.hi * &scale).ceil() / &scale;
    Interval::new(lo, hi)
}

/// True when every c in the box escapes: some iterate of z -> z^2 + c
/// starting at 0 has |z|^2 certifiably above 4.
fn box_escapes(re: &Interval, im: &Interval, iterations: u32) -> bool {
    let mut zr = Interval::zero();
    let mut zi = Interval::zero();
    let four = rat_int(4);
    for _ in 0..iterations {
        let nr = zr.square().sub(&zi.square()).add(re);
        let ni = zr.mul(&zi).scale(&rat_int(2)).add(im);
        zr = coarsen(&nr, 24);
        zi = coarsen(&ni, 24);
        if zr.square().add(&zi.square()).lo > four {
            return true;
        }
        // once the enclosure is useless, further iteration cannot certify
        if zr.abs().hi > rat_int(100) || zi.abs().hi > rat_int(100) {
            return false;
        }
    }
    false
}

/// Nondecreasing rational lower bounds on the distance from c to the
/// Mandelbrot set. Stage d tiles [-2,2]^2 at resolution 2^{-d+2}, certifies
/// tiles outside the set by interval escape, and measures the distance to
/// the nearest unconsumed tile; any point outside the tiled square escapes
/// immediately, so candidates are confined to it.
pub fn mandelbrot_distance_lower(
    c: (BigRational, BigRational),
    iterations: u32,
    depth: u32,
) -> Vec<BigRational> {
    let mut bounds = Vec::with_capacity(depth as usize);
    let mut best = BigRational::zero();
    for d in 1..=depth {
        let cells = 1u64 << d;
        let side = rat_int(4) / BigRational::from_integer(BigInt::from(cells));
        let mut nearest: Option<BigRational> = None;
        for i in 0..cells {
            for j in 0..cells {
                let re = Interval::new(
                    rat_int(-2) + &side * rat_int(i as i64),
                    rat_int(-2) + &side * rat_int(i as i64 + 1),
                );
                let im = Interval::new(
                    rat_int(-2) + &side * rat_int(j as i64),
                    rat_int(-2) + &side * rat_int(j as i64 + 1),
                );
                if box_escapes(&re, &im, iterations) {
                    continue;
                }
                let dist = point_rect_distance_lower(&c.0, &c.1, (&re, &im), 16);
                nearest = Some(match nearest {
                    Some(b) if b <= dist => b,
                    _ => dist,
                });
            }
        }
        if let Some(b) = nearest {
            best = best.max(b);
        }
        bounds.push(best.clone());
    }
    bounds
}

// ---- semicomputable reals ----

/// Which one-sided name discipline the enumeration follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Increasing cuts: the named real is the supremum of the enumeration.
    Lower,
    /// Decreasing cuts: the named real is the infimum.
    Upper,
}

/// One recorded rewrite of a name cell during a semicomputable translation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Revision {
    pub stage: u64,
    pub cell: u64,
    pub old: Option<u64>,
    pub new: u64,
}

/// Translate an enumeration of rationals (as indices) to a fast Cauchy name
/// of its supremum or infimum. Cell j is rewritten only when the running
/// extremum overtakes it by more than 2^{-j-1}, so each cell is revised
/// finitely often and the final cells are mutually 2^{-k}-close.
pub fn semicomputable_name(
    direction: Direction,
    q: &Stream,
    stages: u64,
    cells: u64,
) -> Result<(CauchyName, Vec<Revision>)> {
    let mut extremum = rational_of_index(q.get(0)?);
    let mut vals: Vec<BigRational> = vec![extremum.clone(); cells as usize];
    let mut revisions = Vec::new();
    for t in 1..stages.max(1) {
        let r = rational_of_index(q.get(t)?);
        let better = match direction {
            Direction::Lower => r > extremum,
            Direction::Upper => r < extremum,
        };
        if better {
            extremum = r;
        }
        for (j, v) in vals.iter_mut().enumerate() {
            if (&extremum - &*v).abs() > dyadic_eps(j as u64 + 1) {
                revisions.push(Revision {
                    stage: t,
                    cell: j as u64,
                    old: Some(index_of_rational(v)),
                    new: index_of_rational(&extremum),
                });
                *v = extremum.clone();
            }
        }
    }
    let tail = index_of_rational(&extremum);
    let indices: Vec<u64> = vals.iter().map(index_of_rational).collect();
    let name = CauchyName::new(Stream::word_then_const(indices, tail));
    Ok((name, revisions))
}

struct SemiTranslator {
    direction: Direction,
}

impl HostRealizer for SemiTranslator {
    fn describe(&self) -> String {
        match self.direction {
            Direction::Lower => "lower cut to Cauchy name".into(),
            Direction::Upper => "upper cut to Cauchy name".into(),
        }
    }
    fn apply(&self, input: &Stream, budget: u64) -> Result<Stream> {
        let (name, _) = semicomputable_name(self.direction, input, budget.clamp(1, 4096), 24)?;
        Ok(name.stream)
    }
}

/// A limit-regime translator from one-sided cut names to Cauchy names.
pub fn semicomputable_translator(direction: Direction) -> Realizer {
    Realizer::Host(Arc::new(SemiTranslator { direction }))
}

// ---- desk demos ----

/// Outcome of one desk demo: both reduction directions at a small prefix,
/// with a human-readable trace summary.
#[derive(Debug, Clone)]
pub struct DemoReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn shoenfield_demo() -> Result<DemoReport> {
    // a revisable computation equals a monotone one reading the jump
    let e = eq_test_code();
    let (g, universe) = jump_normal_form(&e, 300_000)?;
    let universe = Arc::new(universe);
    let mut passed = true;
    let mut detail = String::new();
    for p in [Stream::constant(0), Stream::word_then_const(vec![0, 0, 3], 0)] {
        let direct = run_limit(&e, &p, 200_000)?;
        let q = jump_exact(Arc::clone(&universe), p.clone());
        let out = run_monotone(&g, &q, 60_000_000)?.output;
        for j in 0..3u64 {
            if direct.tape.get(&j).copied() != out.get(j as usize).copied() {
                passed = false;
            }
        }
        detail.push_str(&format!("prefix {:?}; ", &out[..out.len().min(3)]));
    }
    Ok(DemoReport { name: "shoenfield".into(), passed, detail })
}

fn jockusch_demo() -> Result<DemoReport> {
    // jump bits of a point from extension certificates: the pair of the
    // point and the certificate table decides the point's jump
    let u = extension_universe(vec![
        vec![(vec![0], false), (vec![1], true)],
        vec![(vec![1, 1], true)],
        vec![(vec![0, 0], true)],
    ]);
    let p = Stream::word_then_const(vec![1, 1], 0);
    let bits = jump_on_generics(&p, &u, 3)?;
    let passed = bits == vec![Answer::Halts, Answer::Halts, Answer::Unknown];
    Ok(DemoReport { name: "jockusch".into(), passed, detail: format!("{bits:?}") })
}

/// The four-monitor whitelist used by the limit-inversion demo and shipped
/// with the repository.
pub fn inversion_whitelist() -> Universe {
    let mut u = Universe::whitelist();
    u.insert(0, UniverseEntry { program: None, verdict: Some(Verdict::Halts) });
    u.insert(1, UniverseEntry { program: None, verdict: Some(Verdict::Loops) });
    u.insert(
        2,
        UniverseEntry {
            program: None,
            verdict: Some(Verdict::InputCellEq { cell: pair(5, 7), value: 9 }),
        },
    );
    u.insert(
        3,
        UniverseEntry {
            program: None,
            verdict: Some(Verdict::InputCellEq { cell: pair(6, 2), value: 4 }),
        },
    );
    u
}

fn friedberg_demo() -> Result<DemoReport> {
    // a point whose jump is prescribed: build the finite-extension family,
    // check the answered bits, and recover the point from the family
    let u = Arc::new(inversion_whitelist());
    let p = Stream::word_then_const(vec![3, 1, 4, 1, 5], 0);
    let inv = limit_inversion(&p, &u, 4)?;
    let mut passed = verify_inversion(&inv, &u)?;
    for j in 0..8u64 {
        // members beyond j agree with p at j: the family converges to p
        if inv.component(j + 1).get(j)? != p.get(j)? {
            passed = false;
        }
    }
    Ok(DemoReport {
        name: "friedberg".into(),
        passed,
        detail: format!("bits {:?}, {} stages", inv.bits, inv.stages.len()),
    })
}

/// Run all shipped desk demos.
pub fn desk_demos() -> Result<Vec<DemoReport>> {
    Ok(vec![shoenfield_demo()?, jockusch_demo()?, friedberg_demo()?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{cauchy_decode, Cms};

    fn bits(word: &[u64]) -> Stream {
        Stream::word_then_const(word.to_vec(), 0)
    }

    #[test]
    fn cantor_counterexample_hits_the_worked_cases() {
        let u = sample_fin_universe();
        // 0^2 1^3 0...: W_2 has two distinct values, so the value is 1/4
        let run = f_cantor(&u, &bits(&[0, 0, 1, 1, 1, 0]), 64).unwrap();
        let val = rational_of_index(run.tape[&0]);
        assert_eq!(val, rat(1, 4));
        assert!(run.max_mind_changes() <= 2);

        let zero_run = f_cantor(&u, &Stream::constant(0), 64).unwrap();
        assert_eq!(rational_of_index(zero_run.tape[&0]), rat(0, 1));
        assert_eq!(zero_run.max_mind_changes(), 0);

        // wrong block length: three ones expect |W_1| = 2, but W_1 = {9}
        let run = f_cantor(&u, &bits(&[0, 1, 1, 1, 0]), 64).unwrap();
        assert_eq!(rational_of_index(run.tape[&0]), rat(0, 1));
    }

    #[test]
    fn cantor_counterexample_changes_at_most_twice_on_seeded_inputs() {
        let u = sample_fin_universe();
        for seed in 0..100u64 {
            let p = Stream::from_fn(move |k| Ok((seed >> (k % 7)) & 1));
            let run = f_cantor(&u, &p, 48).unwrap();
            assert!(run.max_mind_changes() <= 2, "seed {seed}");
        }
    }

    #[test]
    fn sierpinski_counterexample_follows_the_case_split() {
        let u = sample_fin_universe();
        let zero = chi_u_sierpinski(&u, &Stream::constant(0), 64).unwrap();
        assert_eq!(zero.tape.get(&0).copied(), Some(0));

        // committed block with the right count: W_2 = {4, 7}
        let run = chi_u_sierpinski(&u, &bits(&[0, 0, 1, 1, 1, 0]), 64).unwrap();
        assert_eq!(run.tape[&0], 0);
        assert!(run.max_mind_changes() <= 3);

        // p = 1 0^...: the zero cases fail once W_0 enumerates values
        let run = chi_u_sierpinski(&u, &bits(&[1]), 64).unwrap();
        assert_eq!(run.tape[&0], 1);
        assert!(run.max_mind_changes() <= 3);
    }

    #[test]
    fn unit_counterexample_matches_direct_evaluation() {
        let u = sample_fin_universe();
        // midpoint of the level-1 piece at scale k = 1 (W_1 = {9})
        let x = rat(5, 16);
        let vals = f_unit_run(&u, &x, 48);
        assert_eq!(vals.last().unwrap(), &rat(1, 2));

        // right of every level-0 piece at scales k >= 1: the generator
        // enumeration pushes the support away and the value to 0
        let vals = f_unit_run(&u, &rat(3, 4), 48);
        assert_eq!(vals.last().unwrap(), &rat(0, 1));

        // finite mind changes across a dyadic grid
        for i in 0..=64u64 {
            let x = rat(i as i64, 64);
            let vals = f_unit_run(&u, &x, 40);
            let changes = vals.windows(2).filter(|w| w[0] != w[1]).count();
            assert!(changes <= 6, "x = {x} changed {changes} times");
        }
    }

    #[test]
    fn unit_triangle_expr_agrees_with_the_run() {
        let u = sample_fin_universe();
        let x = rat(5, 16);
        let k = u.cardinality(1).unwrap();
        let direct = triangle_piece(1, k).eval_point(&x, 8).unwrap();
        assert_eq!(direct.lo, rat(1, 2));
        assert_eq!(direct.hi, rat(1, 2));
    }

    #[test]
    fn smooth_counterexample_has_the_advertised_supports() {
        let u = sample_fin_universe();
        // far from every registered level
        let away = f_smooth_enclosure(&u, &Interval::point(rat(7, 2)), 10, 12).unwrap();
        assert_eq!(away.lo, rat(0, 1));
        assert_eq!(away.hi, rat(0, 1));

        // center of the level-1 piece: the bump evaluates near e^{-1}
        let k = u.cardinality(1).unwrap();
        let center = rat_int(1) + dyadic_eps(k + 2);
        let on = f_smooth_enclosure(&u, &Interval::point(center), 10, 16).unwrap();
        assert!(on.lo > rat(1, 4) && on.hi < rat(1, 2), "e^-1 bracket, got {on:?}");

        // symmetric difference quotients of the bump bracket 0 at its crest
        let bump = Expr::Bump(Box::new(Expr::x()));
        for n in 2..6u32 {
            let q = derivative_pointwise(&bump, &rat(0, 1), n, 16).unwrap();
            assert!(q.lo <= rat(0, 1) && q.hi >= rat(0, 1));
        }
    }

    #[test]
    fn pointwise_derivative_is_exact_on_quadratics() {
        let sq = Expr::x().square();
        for i in 0..8u64 {
            let x = rat(i as i64, 8);
            for n in 1..6u32 {
                let d = derivative_pointwise(&sq, &x, n, 8).unwrap();
                assert_eq!(d.lo, rat(2 * i as i64, 8));
                assert_eq!(d.hi, d.lo);
            }
        }
        let cube = Expr::x().square().mul(Expr::x());
        for n in 1..8u32 {
            let d = derivative_pointwise(&cube, &rat(0, 1), n, 8).unwrap();
            assert_eq!(d.lo, dyadic_eps(2 * n as u64));
        }
        let konst = Expr::constant(rat(9, 7));
        let d = derivative_pointwise(&konst, &rat(1, 3), 4, 8).unwrap();
        assert_eq!(d.lo, rat(0, 1));
        assert_eq!(d.hi, rat(0, 1));
    }

    #[test]
    fn uniform_derivative_sequence_converges_on_the_grid() {
        let sq = Expr::x().square();
        let d1 = derivative_uniform(&sq, 3);
        for i in 0..=32u64 {
            let x = rat(i as i64, 32);
            let v = d1.eval_point(&x, 8).unwrap();
            assert_eq!(v.lo, rat(2 * i as i64, 32), "2x at {x}");
            assert_eq!(v.hi, v.lo);
        }

        let cube = Expr::x().square().mul(Expr::x());
        let d10 = derivative_uniform(&cube, 10);
        let mut sup = rat(0, 1);
        for i in 0..=32u64 {
            let x = rat(i as i64, 32);
            let got = d10.eval_point(&x, 8).unwrap();
            let want = rat(3 * (i * i) as i64, 1024);
            sup = sup.max((got.lo - &want).abs().max((got.hi - &want).abs()));
        }
        assert!(sup <= dyadic_eps(6), "sup defect {sup}");

        let lin = Expr::x().scale(rat(5, 3)).add(Expr::constant(rat(1, 9)));
        let d = derivative_uniform(&lin, 2);
        let v = d.eval_point(&rat(1, 2), 8).unwrap();
        assert_eq!(v.lo, rat(5, 3));
        assert_eq!(v.hi, v.lo);
    }

    #[test]
    fn mandelbrot_bounds_behave_at_the_two_probes() {
        let inside = mandelbrot_distance_lower((rat(0, 1), rat(0, 1)), 10, 5);
        assert!(inside.iter().all(|b| b == &rat(0, 1)));

        let far = mandelbrot_distance_lower((rat(-3, 1), rat(0, 1)), 12, 5);
        let last = far.last().unwrap();
        assert!(last > &rat(9, 10), "bound {last}");
        assert!(last <= &(rat_int(1) + dyadic_eps(8)));
        assert!(far.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn semicomputable_names_converge_to_the_cut() {
        let reals = Cms::Reals;
        // dyadic ramp 0, 1/2, 3/4, 7/8, ... sups to 1
        let ramp = Stream::from_fn(|t| {
            Ok(index_of_rational(&(rat_int(1) - dyadic_eps(t.min(12)))))
        });
        let (name, revisions) = semicomputable_name(Direction::Lower, &ramp, 64, 12).unwrap();
        name.validate(&reals, 10).unwrap();
        let ball = cauchy_decode(&reals, &name, 6).unwrap();
        let c = rational_of_index(ball.center);
        assert!((c - rat_int(1)).abs() <= dyadic_eps(6));
        assert!(!revisions.is_empty());

        let constant = Stream::constant(index_of_rational(&rat(2, 7)));
        let (name, revisions) = semicomputable_name(Direction::Lower, &constant, 32, 8).unwrap();
        assert!(revisions.is_empty());
        assert_eq!(rational_of_index(name.stream.get(5).unwrap()), rat(2, 7));

        // the upper mirror of the ramp names its infimum
        let drop = Stream::from_fn(|t| {
            Ok(index_of_rational(&(rat_int(-1) + dyadic_eps(t.min(12)))))
        });
        let (name, _) = semicomputable_name(Direction::Upper, &drop, 64, 12).unwrap();
        name.validate(&reals, 10).unwrap();
        let ball = cauchy_decode(&reals, &name, 6).unwrap();
        assert!((rational_of_index(ball.center) + rat_int(1)).abs() <= dyadic_eps(6));
    }

    #[test]
    fn semicomputable_realizer_emits_valid_names() {
        let t = semicomputable_translator(Direction::Lower);
        let ramp = Stream::from_fn(|k| {
            Ok(index_of_rational(&(rat_int(1) - dyadic_eps(k.min(12)))))
        });
        let out = t.apply(&ramp, 64).unwrap();
        CauchyName::new(out).validate(&Cms::Reals, 10).unwrap();
    }

    #[test]
    fn trace_jsonl_lists_rewrites_in_step_order() {
        let run = single_cell_run(&[0, 0, 5, 5, 2], 16);
        let text = run_trace_jsonl(&run);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].contains("\"old\":null"));
        assert!(lines[2].contains("\"old\":5") && lines[2].contains("\"new\":2"));
    }

    #[test]
    fn fin_universe_round_trips_through_json() {
        let u = sample_fin_universe();
        let dir = std::env::temp_dir().join("limitlab-fin-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("fin.json");
        u.save(&path).unwrap();
        let back = FinUniverse::load(&path).unwrap();
        assert_eq!(back.cardinality(2), Some(2));
        assert!(!back.is_finite(0));
        assert_eq!(back.enumerate(0, 3), Some(9));
    }

    #[test]
    fn desk_demos_all_pass() {
        for report in desk_demos().unwrap() {
            assert!(report.passed, "{}: {}", report.name, report.detail);
        }
    }
}
