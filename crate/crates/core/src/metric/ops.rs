//! Operations on metric names: the metric jump and its inverse, the limit
//! normal form, naive-Cauchy translators, moduli of continuity, 1-generic
//! jump bits, and unique-zero finding.

use std::sync::{Arc, Mutex};

use num_rational::BigRational;
use num_traits::Zero;

use crate::baire::{pair, unpair, Stream, Word};
use crate::error::{Error, Result};
use crate::interval::{dyadic_eps, Expr, Interval};
use crate::transforms::{HostRealizer, Realizer};
use crate::vm::{run_limit, Answer, MachineCode, ProgramKind};

use super::cms::{index_of_rational, simplest_rational_in, Cms};
use super::names::{Ball, CauchyName};

/// A c.e. open set presented as a budget-monotone ball enumeration: the
/// stage-t approximation is the first t balls.
#[derive(Debug, Clone, Default)]
pub struct CeOpen {
    pub balls: Vec<Ball>,
}

impl CeOpen {
    pub fn new(balls: Vec<Ball>) -> Self {
        CeOpen { balls }
    }

    pub fn enumerated(&self, budget: u64) -> &[Ball] {
        let n = (budget as usize).min(self.balls.len());
        &self.balls[..n]
    }
}

/// Formal relation of two balls, decided by strict rational inequalities at
/// the given precision. `Included` and `Disjoint` are sound; boundary cases
/// stay `Unknown` at every precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Included,
    Disjoint,
    Unknown,
}

pub fn formal_relations(space: &Cms, b1: &Ball, b2: &Ball, prec: u64) -> Result<Relation> {
    let d = space.dist_enclosure(b1.center, b2.center, prec)?;
    if &d.hi + &b1.radius < b2.radius {
        return Ok(Relation::Included);
    }
    if d.lo > &b1.radius + &b2.radius {
        return Ok(Relation::Disjoint);
    }
    Ok(Relation::Unknown)
}

/// The metric jump: bit i is 1 once some enumerated ball of `opens[i]` is
/// certified to contain the named point — a decoded ball of the name is
/// formally included in it. Bits are monotone in the budget, so each cell
/// changes its mind at most once.
pub fn jump_x(space: &Cms, name: &CauchyName, opens: &[CeOpen], budget: u64) -> Result<Word> {
    let depth = budget.min(24);
    let mut bits = Vec::with_capacity(opens.len());
    for u in opens {
        let mut hit = false;
        'balls: for ball in u.enumerated(budget) {
            for k in 0..=depth {
                let decoded = Ball::dyadic(name.stream.get(k)?, k);
                if formal_relations(space, &decoded, ball, k + 4)? == Relation::Included {
                    hit = true;
                    break 'balls;
                }
            }
        }
        bits.push(hit as u64);
    }
    Ok(bits)
}

/// Invert a jump bit prefix over registered balls: bit i flags `balls[i]`.
/// Emits the constant name of a point inside every flagged ball. Certified
/// pairwise-disjoint flagged balls are contradictory; with no flags at all,
/// any point works and the default index-0 path is returned.
pub fn jump_x_inverse(space: &Cms, bits: &Word, balls: &[Ball]) -> Result<CauchyName> {
    let flagged: Vec<usize> =
        (0..bits.len().min(balls.len())).filter(|&i| bits[i] != 0).collect();
    for (a, &i) in flagged.iter().enumerate() {
        for &j in &flagged[a + 1..] {
            if formal_relations(space, &balls[i], &balls[j], 32)? == Relation::Disjoint {
                return Err(Error::ContradictoryBits(i as u64, j as u64));
            }
        }
    }
    if flagged.is_empty() {
        return Ok(CauchyName::constant(0));
    }
    // in the real-like spaces the flagged balls are intervals: pairwise
    // intersecting intervals share a point, so the interval intersection of
    // the closures is the whole story
    let mut lo: Option<BigRational> = None;
    let mut hi: Option<BigRational> = None;
    for &i in &flagged {
        let c = space.alpha_rational(balls[i].center)?;
        let l = &c - &balls[i].radius;
        let h = &c + &balls[i].radius;
        lo = Some(lo.map_or(l.clone(), |v| v.max(l)));
        hi = Some(hi.map_or(h.clone(), |v| v.min(h)));
    }
    let (lo, hi) = (lo.unwrap(), hi.unwrap());
    if lo > hi {
        return Err(Error::NotInRange("flagged balls have empty intersection".into()));
    }
    let point = (&lo + &hi) / BigRational::from_integer(2.into());
    Ok(CauchyName::constant(space.index_of(&point)))
}

/// Exact jump bit for a point that avoids the boundary of the open set:
/// search decoded balls of the name for one formally inside an enumerated
/// ball (bit 1) or formally disjoint from every enumerated ball (bit 0). A
/// point on the boundary defeats both searches and stays `Unknown`.
pub fn jump_on_generics_metric(
    space: &Cms,
    name: &CauchyName,
    u: &CeOpen,
    budget: u64,
) -> Result<Answer> {
    let depth = budget.min(30);
    for k in 0..=depth {
        let decoded = Ball::dyadic(name.stream.get(k)?, k);
        let mut all_disjoint = !u.balls.is_empty();
        for ball in &u.balls {
            match formal_relations(space, &decoded, ball, k + 4)? {
                Relation::Included => return Ok(Answer::Halts),
                Relation::Disjoint => {}
                Relation::Unknown => all_disjoint = false,
            }
        }
        if all_disjoint || u.balls.is_empty() {
            return Ok(Answer::Loops);
        }
    }
    Ok(Answer::Unknown)
}

/// Greedy validity patching: extend a name prefix with `candidate` if the
/// fast-convergence checks against the existing prefix all pass, otherwise
/// repeat the last entry (which always passes).
fn patched_push(space: &Cms, prefix: &mut Vec<u64>, candidate: u64) -> Result<()> {
    let s = prefix.len() as u64;
    let mut ok = true;
    for (j, &earlier) in prefix.iter().enumerate() {
        let d = space.dist_enclosure(candidate, earlier, s + 8)?;
        if d.hi >= dyadic_eps(j as u64) {
            ok = false;
            break;
        }
    }
    let value = if ok { candidate } else { *prefix.last().expect("nonempty prefix") };
    prefix.push(value);
    Ok(())
}

struct MetricLimitNf {
    code: MachineCode,
    space: Cms,
}

impl HostRealizer for MetricLimitNf {
    fn describe(&self) -> String {
        format!("metric limit normal form into {}", self.space.name())
    }

    fn apply(&self, input: &Stream, budget: u64) -> Result<Stream> {
        let code = self.code.clone();
        let space = self.space.clone();
        let input = input.clone();
        let slice = budget / 64 + 1;
        Ok(Stream::from_fn(move |cell| {
            let (i, k) = unpair(cell);
            let stage = slice.saturating_mul(i + 1).min(budget);
            let run = run_limit(&code, &input, stage)?;
            let mut prefix: Vec<u64> = Vec::with_capacity(k as usize + 1);
            for pos in 0..=k {
                let snap = run
                    .tape
                    .get(&pos)
                    .copied()
                    .or_else(|| prefix.last().copied())
                    .unwrap_or(0);
                if prefix.is_empty() {
                    prefix.push(snap);
                } else {
                    patched_push(&space, &mut prefix, snap)?;
                }
            }
            Ok(prefix[k as usize])
        }))
    }
}

/// Turn a limit realizer of a Y-valued map into a total map onto limit
/// names: the result emits an interleaved sequence ⟨r_0, r_1, ...⟩ in which
/// every r_i is a valid Cauchy name (snapshots of the limit run, patched by
/// racing the validity check against the raw value), and the named points
/// converge to the realized value.
pub fn metric_limit_normal_form(code: &MachineCode, space: Cms) -> Result<Realizer> {
    if code.kind() != ProgramKind::Limit {
        return Err(Error::KindMismatch { expected: "limit", got: code.kind().name() });
    }
    Ok(Realizer::Host(Arc::new(MetricLimitNf { code: code.clone(), space })))
}

struct NaiveToJump {
    space: Cms,
}

impl HostRealizer for NaiveToJump {
    fn describe(&self) -> String {
        format!("naive Cauchy name to jump name over {}", self.space.name())
    }

    // stage-t guess for cell k: the earliest window start m <= t from which
    // every later index seen so far stays within 2^{-k-1}; the guess
    // stabilizes because the naive name converges
    fn apply(&self, input: &Stream, _budget: u64) -> Result<Stream> {
        let space = self.space.clone();
        let input = input.clone();
        Ok(Stream::from_fn(move |cell| {
            let (t, k) = unpair(cell);
            let bound = dyadic_eps(k + 1);
            'starts: for m in 0..=t {
                let base = input.get(m)?;
                for j in m + 1..=t {
                    let d = space.dist_enclosure(input.get(j)?, base, k + 8)?;
                    if d.hi >= bound {
                        continue 'starts;
                    }
                }
                return Ok(base);
            }
            input.get(t)
        }))
    }
}

struct JumpToNaive {
    space: Cms,
}

impl HostRealizer for JumpToNaive {
    fn describe(&self) -> String {
        format!("jump name to naive Cauchy name over {}", self.space.name())
    }

    // entry s: read column s of the interleaved jump name and walk down its
    // diagonal as far as the fast-convergence checks hold; the checked
    // prefix chains the emitted index to the settled cells, so the entries
    // converge to the named point
    fn apply(&self, input: &Stream, _budget: u64) -> Result<Stream> {
        let space = self.space.clone();
        let input = input.clone();
        Ok(Stream::from_fn(move |s| {
            let mut prefix = vec![input.get(pair(s, 0))?];
            'deepen: for i in 1..=s {
                let candidate = input.get(pair(s, i))?;
                for (j, &earlier) in prefix.iter().enumerate() {
                    let d = space.dist_enclosure(candidate, earlier, s + 8)?;
                    if d.hi >= dyadic_eps(j as u64) {
                        break 'deepen;
                    }
                }
                prefix.push(candidate);
            }
            Ok(*prefix.last().expect("nonempty prefix"))
        }))
    }
}

/// Translators between the naive Cauchy representation (any sequence of
/// dense indices converging to the point) and the jump of the Cauchy
/// representation (cellwise limit of the interleaved columns is a fast
/// name). Point-preserving in both directions.
pub fn naive_translators(space: &Cms) -> (Realizer, Realizer) {
    (
        Realizer::Host(Arc::new(NaiveToJump { space: space.clone() })),
        Realizer::Host(Arc::new(JumpToNaive { space: space.clone() })),
    )
}

/// Outcome of checking one candidate modulus value at one precision.
#[derive(Debug, Clone, PartialEq)]
pub enum ModulusCheck {
    Accepted,
    /// A pair inside the 2^{-m} ball whose images are certifiably at least
    /// 2^{-n} apart.
    Rejected { witness: (BigRational, BigRational) },
    Undecided,
}

/// Does the radius-2^{-m} ball around x provably map into a 2^{-n} interval
/// around f(x)? Accepts by interval-evaluating the (domain-clamped) ball
/// with subdivision; rejects by exhibiting a witness point in the open ball
/// whose image is certifiably too far from f(x).
pub fn check_modulus(
    f: &Expr,
    domain: &Interval,
    x: &BigRational,
    m: u64,
    n: u64,
    depth: u32,
    terms: u32,
) -> Result<ModulusCheck> {
    let eps_m = dyadic_eps(m);
    let eps_n = dyadic_eps(n);
    let fx = f.eval_point(x, terms)?;

    // rejection witnesses on a grid strictly inside the ball
    let step = dyadic_eps(m + 3);
    for i in 1..8i64 {
        for sign in [1i64, -1] {
            let y = x + &step * BigRational::from_integer((i * sign).into());
            if !domain.contains(&y) {
                continue;
            }
            let fy = f.eval_point(&y, terms)?;
            let far_up = &fy.lo - &fx.hi >= eps_n;
            let far_down = &fx.lo - &fy.hi >= eps_n;
            if far_up || far_down {
                return Ok(ModulusCheck::Rejected { witness: (x.clone(), y) });
            }
        }
    }

    let ball = Interval::new(
        (x - &eps_m).max(domain.lo.clone()),
        (x + &eps_m).min(domain.hi.clone()),
    );
    let image = f.eval_subdivided(&ball, depth, terms)?;
    if image.hi <= &fx.lo + &eps_n && image.lo >= &fx.hi - &eps_n {
        return Ok(ModulusCheck::Accepted);
    }
    Ok(ModulusCheck::Undecided)
}

/// Least accepted modulus value at precision n, searching upward from m = n.
pub fn modulus(
    f: &Expr,
    domain: &Interval,
    x: &BigRational,
    n: u64,
    depth: u32,
    terms: u32,
) -> Result<u64> {
    for m in n..n + 48 {
        if check_modulus(f, domain, x, m, n, depth, terms)? == ModulusCheck::Accepted {
            return Ok(m);
        }
    }
    Err(Error::SearchBudget(format!("no modulus value accepted at precision {n}")))
}

/// Evaluate f at precision k from a modulus and a dense evaluator, exactly
/// as in the oracle argument: fetch m(k), step to a dense point within
/// 2^{-m(k)} of x (index m(k)+1 of the validated name), and apply f∘α there.
pub fn reconstruct_from_modulus(
    space: &Cms,
    f_alpha: &dyn Fn(u64) -> Result<u64>,
    m_source: &dyn Fn(u64) -> Result<u64>,
    p: &CauchyName,
    k: u64,
) -> Result<Ball> {
    let m = m_source(k)?;
    p.validate(space, m + 1)?;
    let near = p.stream.get(m + 1)?;
    Ok(Ball::dyadic(f_alpha(near)?, k))
}

/// A global modulus of uniform continuity, valid on a registered probe set.
pub struct Modulus {
    pub stream: Stream,
}

/// Least m(k) such that no registered probe pair sits closer than 2^{-m} in
/// the source while its images are certifiably farther than 2^{-(k+1)} in
/// the target. Probes are (i, j, f_i, f_j): source indices and the indices
/// of their images.
pub fn uniform_modulus(
    space_x: &Cms,
    space_y: &Cms,
    probes: Vec<(u64, u64, u64, u64)>,
) -> Modulus {
    let space_x = space_x.clone();
    let space_y = space_y.clone();
    let stream = Stream::from_fn(move |k| {
        'values: for m in k + 1..k + 200 {
            for &(i, j, fi, fj) in &probes {
                let dx = space_x.dist_enclosure(i, j, m + 4)?;
                let dy = space_y.dist_enclosure(fi, fj, k + 4)?;
                if dx.hi < dyadic_eps(m) && dy.lo > dyadic_eps(k + 1) {
                    continue 'values;
                }
            }
            return Ok(m);
        }
        Err(Error::SearchBudget(format!("no uniform modulus value at precision {k}")))
    });
    Modulus { stream }
}

fn certified_sign(f: &Expr, q: &BigRational, terms: u32) -> Result<Option<bool>> {
    let v = f.eval_point(q, terms)?;
    if v.lo > BigRational::zero() {
        Ok(Some(true))
    } else if v.hi < BigRational::zero() {
        Ok(Some(false))
    } else {
        Ok(None)
    }
}

/// Name of the unique zero of f on [a,b], by trisection: each round keeps a
/// third (or two) across which a sign change is certified at rational
/// probes. Probing at thirds keeps dyadic zeros off the probe points; an
/// uncertifiable probe is nudged before giving up.
pub fn unique_zero(f: Expr, domain: Interval, terms: u32) -> Result<CauchyName> {
    let sign_at = move |f: &Expr, q: &BigRational| -> Result<bool> {
        certified_sign(f, q, terms)?.ok_or_else(|| {
            Error::SearchBudget(format!("sign of f({q}) not certifiable"))
        })
    };
    let s_lo = sign_at(&f, &domain.lo)?;
    let s_hi = sign_at(&f, &domain.hi)?;
    if s_lo == s_hi {
        return Err(Error::NotInRange("no certified sign change on the domain".into()));
    }
    let state = Mutex::new((domain.lo.clone(), domain.hi.clone(), s_lo));
    let three = BigRational::from_integer(3.into());
    let nine = BigRational::from_integer(9.into());
    let stream = Stream::from_fn(move |k| {
        let mut st = state.lock().unwrap();
        while &st.1 - &st.0 > dyadic_eps(k + 2) {
            let w = &st.1 - &st.0;
            let mut m1 = &st.0 + &w / &three;
            let mut m2 = &st.1 - &w / &three;
            let mut s1 = certified_sign(&f, &m1, terms)?;
            let mut s2 = certified_sign(&f, &m2, terms)?;
            if s1.is_none() {
                m1 = &m1 + &w / &nine;
                s1 = certified_sign(&f, &m1, terms)?;
            }
            if s2.is_none() {
                m2 = &m2 - &w / &nine;
                s2 = certified_sign(&f, &m2, terms)?;
            }
            let (Some(s1), Some(s2)) = (s1, s2) else {
                return Err(Error::SearchBudget("trisection probe signs uncertifiable".into()));
            };
            if s1 != st.2 {
                st.1 = m1;
            } else if s2 != s1 {
                st.0 = m1;
                st.1 = m2;
            } else {
                st.0 = m2;
                st.2 = s2;
            }
        }
        // any point of the bracket is within 2^-(k+2) of the zero; the
        // trisection midpoint's denominator grows like 9^k and overflows the
        // rational coding, so emit the simplest rational in the bracket
        Ok(index_of_rational(&simplest_rational_in(&st.0, &st.1)))
    });
    Ok(CauchyName::new(stream))
}

/// Convenience: f(x) = x - c as an expression, the usual zero-finding probe.
pub fn shifted_identity(c: BigRational) -> Expr {
    Expr::x().sub(Expr::constant(c))
}

