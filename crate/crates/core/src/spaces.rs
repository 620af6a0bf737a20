//! Represented spaces as first-class values: representations and their
//! jumps, translators between them, the Galois connection between the two
//! jump families, and the product/function-space isomorphisms.
//!
//! A representation here is a name plus a desk-scale decoder: given a name
//! stream and a prefix length, the decoder produces that many cells of the
//! underlying point (inverting whatever jump tags are stacked on top, with
//! explicit search budgets). Decoders make translator correctness testable:
//! a translator is sound when source and target names decode alike.

use std::sync::Arc;

use crate::baire::{pair, unpair, word_from_index, word_to_index, Stream, Word};
use crate::error::{Error, Result};
use crate::transforms::{
    comparators_universe, jump_inverse_stream, limit_to_monotone, uniform_limit_control,
    HostRealizer, Realizer, TransparencyWitness,
};
use crate::vm::{
    constembed_code, jump_exact, low_code, phi_apply, Layout, MachineCode, PhiCode, Universe,
};

/// Default search cap for budgeted limit extraction and jump inversion.
const CAP: u64 = 1 << 12;
/// Agreement window certifying a cell as settled. Kept small: members of a
/// machine-produced family cost quadratically in the member index.
const WINDOW: u64 = 4;
/// Monitor packing width of the halting-jump layout.
const HPOS: u64 = 64;

type DecodeFn = dyn Fn(&Stream, u64) -> Result<Word> + Send + Sync;

/// A representation: a named decoding discipline on streams.
#[derive(Clone)]
pub struct Representation {
    pub name: String,
    decode: Arc<DecodeFn>,
}

impl std::fmt::Debug for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Representation({})", self.name)
    }
}

/// Jump tags stackable on a representation. The two families obey the
/// normal-form laws X^L = (X_J)' and X_H = (X')_J.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    /// Cellwise limit of an interleaved family.
    Lim,
    /// Discrete (eventually constant per cell) limit.
    LimDelta,
    /// The low map: a family of comparator-jump approximations.
    Low,
    /// Comparator jump of the base name.
    JumpS,
    /// Halting jump: the HJump-layout jump of a limit name.
    JumpH,
}

impl Tag {
    fn suffix(self) -> &'static str {
        match self {
            Tag::Lim => "'",
            Tag::LimDelta => "^D",
            Tag::Low => "^L",
            Tag::JumpS => "_J",
            Tag::JumpH => "_H",
        }
    }
}

/// Budgeted cellwise limit: cell k is the first value on which WINDOW
/// consecutive members agree. Unreadable cells (a machine-backed member not
/// yet produced within its budget) count as disagreement, not as failure:
/// the next members may still settle.
fn budgeted_lim(family: &Stream, k: u64, cap: u64) -> Result<u64> {
    let mut t = 0;
    'outer: while t < cap {
        let Ok(v) = family.get(pair(t, k)) else {
            t += 1;
            continue;
        };
        for d in 1..WINDOW {
            match family.get(pair(t + d, k)) {
                Ok(w) if w == v => {}
                _ => {
                    t += d;
                    continue 'outer;
                }
            }
        }
        return Ok(v);
    }
    Err(Error::SearchBudget(format!("limit cell {k} did not stabilize within {cap} members")))
}

/// Extract the base name under a halting-jump name: find a settled member
/// for the cell via the layout's monitors, then read it off the comparator
/// bits.
fn h_extract(q: &Stream, k: u64, cap: u64) -> Result<u64> {
    if k >= HPOS {
        return Err(Error::SearchBudget(format!(
            "halting-jump layout monitors only positions below {HPOS}, asked for {k}"
        )));
    }
    let mut member = None;
    for t in 0..cap {
        if q.get(3 * ((t << 6) | k) + 1)? == 0 {
            member = Some(t);
            break;
        }
    }
    let Some(t) = member else {
        return Err(Error::SearchBudget(format!("no settled member for cell {k} within {cap}")));
    };
    let cell = pair(t, k);
    for v in 0..cap {
        if q.get(3 * pair(cell, v))? == 1 {
            return Ok(v);
        }
    }
    Err(Error::SearchBudget(format!("comparator row of cell {cell} all zero within {cap}")))
}

impl Representation {
    /// The identity representation of Baire space.
    pub fn baire() -> Self {
        Representation {
            name: "id".into(),
            decode: Arc::new(|p: &Stream, n: u64| p.prefix(n)),
        }
    }

    /// Stack a jump tag on top.
    pub fn jump(&self, tag: Tag) -> Self {
        let base = self.decode.clone();
        let decode: Arc<DecodeFn> = match tag {
            Tag::Lim | Tag::LimDelta => Arc::new(move |p: &Stream, n: u64| {
                let family = p.clone();
                let settled = Stream::from_fn(move |k| budgeted_lim(&family, k, CAP));
                base(&settled, n)
            }),
            Tag::Low => Arc::new(move |p: &Stream, n: u64| {
                // the low map is jump inversion after a limit: stabilize the
                // comparator bits first, then walk them
                let family = p.clone();
                let settled_jump = Stream::from_fn(move |m| budgeted_lim(&family, m, CAP));
                base(&jump_inverse_stream(settled_jump, CAP), n)
            }),
            Tag::JumpS => Arc::new(move |q: &Stream, n: u64| {
                base(&jump_inverse_stream(q.clone(), CAP), n)
            }),
            Tag::JumpH => Arc::new(move |q: &Stream, n: u64| {
                let q = q.clone();
                base(&Stream::from_fn(move |k| h_extract(&q, k, CAP)), n)
            }),
        };
        Representation { name: format!("{}{}", self.name, tag.suffix()), decode }
    }

    /// Pairing of two representations: even cells name in `self`, odd cells
    /// in `other`; the decoded prefixes are re-interleaved.
    pub fn product(&self, other: &Representation) -> Self {
        let (da, db) = (self.decode.clone(), other.decode.clone());
        Representation {
            name: format!("{}x{}", self.name, other.name),
            decode: Arc::new(move |p: &Stream, n: u64| {
                let left = p.clone();
                let right = p.clone();
                let a = da(&Stream::from_fn(move |k| left.get(2 * k)), n.div_ceil(2))?;
                let b = db(&Stream::from_fn(move |k| right.get(2 * k + 1)), n / 2)?;
                let mut out = Vec::with_capacity(n as usize);
                for i in 0..n as usize {
                    out.push(if i % 2 == 0 { a[i / 2] } else { b[i / 2] });
                }
                Ok(out)
            }),
        }
    }

    /// Meet of two representations: a name pairs a `self`-name and an
    /// `other`-name of the same point; decoding reads the first component
    /// (soundness tests check both against each other).
    pub fn infimum(&self, other: &Representation) -> Self {
        let da = self.decode.clone();
        Representation {
            name: format!("{}^{}", self.name, other.name),
            decode: Arc::new(move |p: &Stream, n: u64| {
                let left = p.clone();
                da(&Stream::from_fn(move |k| left.get(2 * k)), n)
            }),
        }
    }

    /// Decode a name prefix to the underlying point's prefix.
    pub fn decode(&self, p: &Stream, n: u64) -> Result<Word> {
        (self.decode)(p, n)
    }

    /// Prefix-level validity: the decoder succeeds on the prefix.
    pub fn domain_check(&self, p: &Stream, n: u64) -> bool {
        self.decode(p, n).is_ok()
    }
}

/// Computation discipline a translator runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Computable,
    Limit,
    /// Needs certified verdicts from a whitelist universe.
    Oracle,
}

/// A point-preserving name transformer between two representations.
#[derive(Clone)]
pub struct Translator {
    pub name: String,
    pub source: Representation,
    pub target: Representation,
    pub realizer: Realizer,
    pub regime: Regime,
}

impl Translator {
    pub fn translate(&self, p: &Stream, budget: u64) -> Result<Stream> {
        self.realizer.apply(p, budget)
    }

    /// Soundness on one name: source and target decode to the same prefix.
    pub fn check_on(&self, p: &Stream, prefix: u64, budget: u64) -> Result<bool> {
        let out = self.translate(p, budget)?;
        Ok(self.source.decode(p, prefix)? == self.target.decode(&out, prefix)?)
    }
}

struct FnRealizer<F>(String, F);

impl<F> HostRealizer for FnRealizer<F>
where
    F: Fn(&Stream, u64) -> Result<Stream> + Send + Sync,
{
    fn describe(&self) -> String {
        self.0.clone()
    }
    fn apply(&self, input: &Stream, budget: u64) -> Result<Stream> {
        (self.1)(input, budget)
    }
}

fn host<F>(name: &str, f: F) -> Realizer
where
    F: Fn(&Stream, u64) -> Result<Stream> + Send + Sync + 'static,
{
    Realizer::Host(Arc::new(FnRealizer(name.to_string(), f)))
}

/// Constant family `<p, p, p, ...>`, the computable right inverse of lim.
pub fn constant_family(p: Stream) -> Stream {
    Stream::interleave_omega(move |_| p.clone())
}

/// The halting-jump universe: comparators, settling monitors, and the
/// halts-on-zero family over the registered entries.
pub fn h_universe(probe: u64) -> Arc<Universe> {
    Arc::new(Universe::with_layout(Layout::HJump { probe }))
}

/// A halting-jump name of the point named by `p`: the HJump-layout jump of
/// the constant limit name of `p`.
pub fn h_name_of(p: Stream, probe: u64) -> Stream {
    jump_exact(h_universe(probe), constant_family(p))
}

/// The five-step reducibility chain d_J <= d_H <= d <= d^D <= d^L <= d'.
pub fn chain_translators() -> Result<Vec<Translator>> {
    let base = Representation::baire();
    let j_to_h = Translator {
        name: "j<=h".into(),
        source: base.jump(Tag::JumpS),
        target: base.jump(Tag::JumpH),
        realizer: host("comparator jump to halting jump", |q, _| {
            Ok(h_name_of(jump_inverse_stream(q.clone(), CAP), 1 << 10))
        }),
        regime: Regime::Oracle,
    };
    let h_to_base = Translator {
        name: "h<=id".into(),
        source: base.jump(Tag::JumpH),
        target: base.clone(),
        realizer: host("halting jump bits to the point", |q, _| {
            let q = q.clone();
            Ok(Stream::from_fn(move |k| h_extract(&q, k, CAP)))
        }),
        regime: Regime::Computable,
    };
    let base_to_delta = Translator {
        name: "id<=delta".into(),
        source: base.clone(),
        target: base.jump(Tag::LimDelta),
        realizer: Realizer::Code(constembed_code()),
        regime: Regime::Computable,
    };
    let delta_to_low = Translator {
        name: "delta<=low".into(),
        source: base.jump(Tag::LimDelta),
        target: base.jump(Tag::Low),
        // member t of the low name: the comparator jump of member t of the
        // input, bit by bit a plain read
        realizer: host("member-wise comparator jump", |p, _| {
            let p = p.clone();
            Ok(Stream::from_fn(move |cell| {
                let (t, m) = unpair(cell);
                let (n, k) = unpair(m);
                Ok((p.get(pair(t, n))? == k) as u64)
            }))
        }),
        regime: Regime::Computable,
    };
    let low_to_prime = Translator {
        name: "low<=prime".into(),
        source: base.jump(Tag::Low),
        target: base.jump(Tag::Lim),
        realizer: Realizer::Code(limit_to_monotone(&low_code())?),
        regime: Regime::Computable,
    };
    Ok(vec![j_to_h, h_to_base, base_to_delta, delta_to_low, low_to_prime])
}

/// The Galois connection between the two jump families: translators
/// witnessing d_{X_J} <= d_Y correspond to translators witnessing
/// d_X <= d_{Y'}. Both factories preserve decoded points.
pub fn galois_witness(
    x: &Representation,
    y: &Representation,
) -> (
    impl Fn(&Translator) -> Translator + use<>,
    impl Fn(&Translator) -> Translator + use<>,
) {
    let (xf, yf) = (x.clone(), y.clone());
    let forward = move |t: &Translator| {
        let inner = t.realizer.clone();
        Translator {
            name: format!("galois+({})", t.name),
            source: xf.clone(),
            target: yf.jump(Tag::Lim),
            realizer: host("jump the input, translate, embed constantly", move |p, budget| {
                let q = jump_exact(comparators_universe(), p.clone());
                Ok(constant_family(inner.apply(&q, budget)?))
            }),
            regime: Regime::Oracle,
        }
    };
    let (xb, yb) = (x.clone(), y.clone());
    let backward = move |s: &Translator| {
        let inner = s.realizer.clone();
        Translator {
            name: format!("galois-({})", s.name),
            source: xb.jump(Tag::JumpS),
            target: yb.clone(),
            realizer: host("invert the jump, translate, take the limit", move |q, budget| {
                let family = inner.apply(&jump_inverse_stream(q.clone(), CAP), budget)?;
                Ok(Stream::from_fn(move |k| budgeted_lim(&family, k, CAP)))
            }),
            regime: Regime::Oracle,
        }
    };
    (forward, backward)
}

/// Both directions of (X x Y)' = X' x Y': pure re-indexing, since tupling
/// and the limit are both cellwise.
pub fn product_jump_iso(x: &Representation, y: &Representation) -> (Translator, Translator) {
    let split = host("(XxY)' to X'xY'", |p, _| {
        let p = p.clone();
        Ok(Stream::from_fn(move |c| {
            let (t, k) = unpair(c / 2);
            p.get(pair(t, 2 * k + c % 2))
        }))
    });
    let join = host("X'xY' to (XxY)'", |p, _| {
        let p = p.clone();
        Ok(Stream::from_fn(move |c| {
            let (t, m) = unpair(c);
            p.get(2 * pair(t, m / 2) + m % 2)
        }))
    });
    let prod_prime = x.product(y).jump(Tag::Lim);
    let prime_prod = x.jump(Tag::Lim).product(&y.jump(Tag::Lim));
    (
        Translator {
            name: "(XxY)'<=X'xY'".into(),
            source: prod_prime.clone(),
            target: prime_prod.clone(),
            realizer: split,
            regime: Regime::Computable,
        },
        Translator {
            name: "X'xY'<=(XxY)'".into(),
            source: prime_prod,
            target: prod_prime,
            realizer: join,
            regime: Regime::Computable,
        },
    )
}

/// Both directions of (X ^ Y)' = X' ^ Y' for the infimum of representations:
/// the same cellwise re-indexing as the product, through the diagonal.
pub fn infimum_jump_iso(x: &Representation, y: &Representation) -> (Translator, Translator) {
    let (fwd, bwd) = product_jump_iso(x, y);
    (
        Translator {
            name: "(X^Y)'<=X'^Y'".into(),
            source: x.infimum(y).jump(Tag::Lim),
            target: x.jump(Tag::Lim).infimum(&y.jump(Tag::Lim)),
            realizer: fwd.realizer,
            regime: Regime::Computable,
        },
        Translator {
            name: "X'^Y'<=(X^Y)'".into(),
            source: x.jump(Tag::Lim).infimum(&y.jump(Tag::Lim)),
            target: x.infimum(y).jump(Tag::Lim),
            realizer: bwd.realizer,
            regime: Regime::Computable,
        },
    )
}

/// Apply an associate to a *finite known prefix*: only entries whose
/// constraint is a prefix of the known cells may fire, so commitments are
/// monotone in the prefix.
fn apply_to_prefix(code: &PhiCode, known: &[u64], slots: u64) -> Result<Word> {
    let mut best: Word = Vec::new();
    for i in 0..slots {
        let Some((u, v)) = code.entry(i)? else { continue };
        if u.len() > known.len() || u.iter().zip(known).any(|(a, b)| a != b) {
            continue;
        }
        if best.len() <= v.len() && best.iter().zip(&v).all(|(a, b)| a == b) {
            best = v;
        } else if !(v.len() <= best.len() && v.iter().zip(&best).all(|(a, b)| a == b)) {
            return Err(Error::MalformedCode(format!("slot {i} commits incompatibly")));
        }
    }
    Ok(best)
}

/// The easy direction of C(X,Y)' = C(X',Y'): from a converging family of
/// associates, an associate acting member-wise on converging inputs. Entry
/// `s` constrains the interleaved input by the word of `s` and commits the
/// longest determined interleaved output under member-wise application.
fn easy_funcspace(family: &Stream) -> Stream {
    let family = family.clone();
    Stream::from_fn(move |cell| {
        let s = cell / 2;
        let u = word_from_index(s);
        if cell % 2 == 0 {
            return Ok(word_to_index(&u) + 1);
        }
        // member prefixes recoverable from u have at most |u| letters, so
        // their slots in a member's own enumeration sit below ~4^(|u|+1)
        let slots = (1u64 << (2 * (u.len() as u32 + 1)).min(16)) + 8;
        let mut v: Word = Vec::new();
        'extend: loop {
            let c = v.len() as u64;
            let (t, j) = unpair(c);
            // member t's known input prefix inside u
            let mut known = Vec::new();
            while pair(t, known.len() as u64) < u.len() as u64 {
                known.push(u[pair(t, known.len() as u64) as usize]);
            }
            let code = PhiCode::FromStream(family.clone().component(t));
            let out = apply_to_prefix(&code, &known, slots)?;
            match out.get(j as usize) {
                Some(&val) if (c as usize) < u.len() + 1 => v.push(val),
                _ => break 'extend,
            }
        }
        Ok(word_to_index(&v) + 1)
    })
}

/// Both directions of C(X,Y)' = C(X',Y'). The easy direction is fully
/// computable; the hard one stages the uniform limit control construction
/// and is valid on inputs its commitment search can certify.
pub fn funcspace_jump_iso(x: &Representation, y: &Representation) -> (Translator, Translator) {
    let fnspace = Representation {
        name: format!("C({},{})", x.name, y.name),
        decode: Arc::new(|p: &Stream, n: u64| p.prefix(n)),
    };
    let easy = Translator {
        name: "C(X,Y)'<=C(X',Y')".into(),
        source: fnspace.jump(Tag::Lim),
        target: fnspace.clone(),
        realizer: host("member-wise application associate", |p, _| Ok(easy_funcspace(p))),
        regime: Regime::Computable,
    };
    let hard = Translator {
        name: "C(X',Y')<=C(X,Y)'".into(),
        source: fnspace.clone(),
        target: fnspace.jump(Tag::Lim),
        realizer: host("staged uniform limit control", |g, budget| {
            let stages = budget.clamp(1, 64);
            let codes = uniform_limit_control(&PhiCode::FromStream(g.clone()), stages)?;
            Ok(Stream::interleave_omega(move |t| {
                codes[(t as usize).min(codes.len() - 1)].to_stream()
            }))
        }),
        regime: Regime::Oracle,
    };
    (easy, hard)
}

/// Realizers for evaluation, currying, and the C(N,X) = X^N identification
/// over associate names.
pub fn ev_cur_seq_realizers() -> (Realizer, Realizer, Realizer) {
    // ev: <assoc, x> -> f(x), slots and length grow with the budget
    let ev = host("evaluation", |input, budget| {
        let input = input.clone();
        Ok(Stream::from_fn(move |k| {
            let assoc = input.clone();
            let arg = input.clone();
            let code = PhiCode::FromStream(Stream::from_fn(move |c| assoc.get(2 * c)));
            let x = Stream::from_fn(move |c| arg.get(2 * c + 1));
            let out = phi_apply(&code, &x, budget.max(2 * k + 16), k + 1)?;
            out.get(k as usize).copied().ok_or_else(|| Error::SearchBudget(format!(
                "evaluation output cell {k} not committed within the slot budget"
            )))
        }))
    });
    // cur: <assoc for f(<r,q>), r> -> assoc for q -> f(<r,q>)
    let cur = host("currying", |input, _| {
        let assoc = input.clone();
        let fixed_src = input.clone();
        let code = PhiCode::FromStream(Stream::from_fn(move |c| assoc.get(2 * c)));
        let fixed = Stream::from_fn(move |c| fixed_src.get(2 * c + 1));
        Ok(PhiCode::Smn { base: Arc::new(code), fixed }.to_stream())
    });
    // seq: assoc for f in C(N,X) -> the interleaved family <f(0), f(1), ...>
    let seq = host("sequence identification", |input, budget| {
        let input = input.clone();
        Ok(Stream::from_fn(move |cell| {
            let (n, k) = unpair(cell);
            let code = PhiCode::FromStream(input.clone());
            let out = phi_apply(&code, &Stream::of_natural(n), budget.max(2 * k + 32), k + 1)?;
            out.get(k as usize).copied().ok_or_else(|| Error::SearchBudget(format!(
                "member {n} cell {k} not committed within the slot budget"
            )))
        }))
    });
    (ev, cur, seq)
}

/// Word index that reports words too large for the u64 numbering instead
/// of overflowing.
fn word_index_checked(w: &[u64]) -> Option<u64> {
    let mut digits: u32 = w.len().saturating_sub(1) as u32;
    for &v in w {
        let mut v = v;
        while v > 0 {
            digits += 1;
            v = (v - 1) / 3;
        }
    }
    (digits <= 31).then(|| word_to_index(w))
}

/// The inverse of the sequence identification: an associate for n -> member
/// n of an interleaved family. Prefixes beyond the word numbering's u64
/// range are left vacant.
pub fn seq_to_assoc(family: Stream) -> Stream {
    PhiCode::FromStream(Stream::from_fn(move |cell| {
        let i = cell / 2;
        let (n, l) = unpair(i);
        let member: Word = (0..l).map(|k| family.get(pair(n, k))).collect::<Result<_>>()?;
        let Some(idx) = word_index_checked(&member) else { return Ok(0) };
        if cell % 2 == 0 {
            // the constraint [n] alone is unusable: the word numbering sends
            // the one-letter word [0] to the empty word, which matches every
            // argument; [n, 0] encodes faithfully and still pins of_natural(n)
            return Ok(word_to_index(&[n, 0]) + 1);
        }
        Ok(idx + 1)
    }))
    .to_stream()
}

/// Lift a realizer through a transparent endofunctor; thin facade over the
/// transforms-level witness, re-exported here because lifting is how jumped
/// representations acquire their realizers.
pub fn lift_endofunctor(f: &MachineCode, w: TransparencyWitness) -> Result<Realizer> {
    w.lift(f)
}

/// Sierpinski observation of a stream under delta_S: the point is "true"
/// exactly when the name is not the zero stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SierpinskiObs {
    /// A nonzero cell was found at this position: the point is certainly T.
    ObservedOne(u64),
    /// Every inspected cell was zero; the point may be bottom.
    AllZeroSoFar(u64),
}

/// Decode a Sierpinski name by inspecting `budget` cells.
pub fn sierpinski_decode(p: &Stream, budget: u64) -> Result<SierpinskiObs> {
    for k in 0..budget {
        if p.get(k)? != 0 {
            return Ok(SierpinskiObs::ObservedOne(k));
        }
    }
    Ok(SierpinskiObs::AllZeroSoFar(budget))
}
