//! Computable metric spaces over exact rationals: the space library, the
//! rational coding of dense points, and certified distance enclosures.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::baire::{pair3, unpair, unpair3, word_from_index, Word};
use crate::error::{Error, Result};
use crate::interval::{dyadic_eps, rat_int, Expr, Interval};

/// Rational coded by a natural: index `<i,j,k>` names `(i - j)/(k + 1)`.
pub fn rational_of_index(n: u64) -> BigRational {
    let (i, j, k) = unpair3(n);
    BigRational::new(BigInt::from(i) - BigInt::from(j), BigInt::from(k) + BigInt::one())
}

/// Some index naming the rational exactly (the coding is far from injective;
/// this picks the canonical reduced witness).
pub fn index_of_rational(q: &BigRational) -> u64 {
    let q = q.reduced();
    let num = q.numer();
    let den = q.denom(); // positive in canonical form
    let k = u64::try_from(den - BigInt::one()).expect("denominator fits");
    let (i, j) = if num.is_negative() {
        (0, u64::try_from(-num).expect("numerator fits"))
    } else {
        (u64::try_from(num.clone()).expect("numerator fits"), 0)
    };
    pair3(i, j, k)
}

/// The rational in `[lo, hi]` with the smallest denominator (ties broken
/// toward the smaller numerator), by the continued-fraction walk. Useful for
/// keeping coded indices small when any point of an interval will do.
pub fn simplest_rational_in(lo: &BigRational, hi: &BigRational) -> BigRational {
    assert!(lo <= hi, "empty interval");
    let fl = lo.floor();
    if &fl == lo {
        return fl;
    }
    let next = &fl + BigRational::one();
    if next <= *hi {
        return next;
    }
    // both endpoints lie strictly inside (fl, fl + 1): recurse on the
    // reciprocal of the fractional parts, which swaps the endpoints
    let sub = simplest_rational_in(
        &(BigRational::one() / (hi - &fl)),
        &(BigRational::one() / (lo - &fl)),
    );
    fl + BigRational::one() / sub
}

/// A point of one of the library spaces, decoded for desk-scale inspection.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Real(BigRational),
    /// Eventually-zero sequence, given by its minimal word.
    Cantor(Word),
    Nat(u64),
    Pair(Box<Point>, Box<Point>),
    /// A dense element of a function space.
    Fn(String),
}

/// A computable metric space: a dense sequence `alpha` indexed by naturals
/// with a certified distance.
#[derive(Debug, Clone)]
pub enum Cms {
    /// All rationals under the `<i,j,k>` coding.
    Reals,
    /// Rationals clamped into [0,1]; dyadics are dense already.
    Unit,
    /// Eventually-zero binary-ish words; d = 2^{-(first difference)}.
    Cantor,
    /// Discrete naturals.
    Naturals,
    /// Max metric; index pair(i, j) names (alpha(i), alpha(j)).
    Product(Arc<Cms>, Arc<Cms>),
    /// Continuous functions on a rational interval with the sup norm; the
    /// dense sequence enumerates rational polynomials by coefficient words.
    ContFns(Interval),
}

impl Cms {
    pub fn name(&self) -> String {
        match self {
            Cms::Reals => "R".into(),
            Cms::Unit => "[0,1]".into(),
            Cms::Cantor => "2^N".into(),
            Cms::Naturals => "N".into(),
            Cms::Product(a, b) => format!("{}x{}", a.name(), b.name()),
            Cms::ContFns(_) => "C(X)".into(),
        }
    }

    /// The polynomial named by index `n` in a `ContFns` space: the word of
    /// `n` lists rational codes of the coefficients.
    pub fn polynomial(n: u64) -> Expr {
        let coeffs = word_from_index(n);
        let mut terms = Vec::new();
        let mut power = Expr::Const(BigRational::one());
        for c in coeffs {
            terms.push(power.clone().scale(rational_of_index(c)));
            power = power.mul(Expr::x());
        }
        Expr::sum(terms)
    }

    /// Decode a dense-sequence index to a point description.
    pub fn alpha(&self, n: u64) -> Point {
        match self {
            Cms::Reals => Point::Real(rational_of_index(n)),
            Cms::Unit => {
                let q = rational_of_index(n);
                let clamped = q.max(BigRational::zero()).min(BigRational::one());
                Point::Real(clamped)
            }
            Cms::Cantor => Point::Cantor(word_from_index(n)),
            Cms::Naturals => Point::Nat(n),
            Cms::Product(a, b) => {
                let (i, j) = unpair(n);
                Point::Pair(Box::new(a.alpha(i)), Box::new(b.alpha(j)))
            }
            Cms::ContFns(_) => Point::Fn(format!("poly#{n}")),
        }
    }

    /// Rational value of a dense point, for the real-like spaces.
    pub fn alpha_rational(&self, n: u64) -> Result<BigRational> {
        match self.alpha(n) {
            Point::Real(q) => Ok(q),
            _ => Err(Error::NotInRange(format!("{} has no rational alpha", self.name()))),
        }
    }

    /// Index of a rational as a dense point, for the real-like spaces.
    pub fn index_of(&self, q: &BigRational) -> u64 {
        index_of_rational(q)
    }

    /// Certified enclosure of d(alpha(i), alpha(j)) of width at most
    /// 2^{-prec}. Exact (degenerate) for all spaces except function spaces,
    /// where the sup norm is bracketed by subdivision.
    pub fn dist_enclosure(&self, i: u64, j: u64, prec: u64) -> Result<Interval> {
        match self {
            Cms::Reals | Cms::Unit => {
                let (a, b) = (self.alpha_rational(i)?, self.alpha_rational(j)?);
                Ok(Interval::point((a - b).abs()))
            }
            Cms::Cantor => {
                let (u, v) = (word_from_index(i), word_from_index(j));
                Ok(Interval::point(cantor_dist(&u, &v)))
            }
            Cms::Naturals => Ok(Interval::point(if i == j {
                BigRational::zero()
            } else {
                BigRational::one()
            })),
            Cms::Product(a, b) => {
                let (i1, i2) = unpair(i);
                let (j1, j2) = unpair(j);
                let da = a.dist_enclosure(i1, j1, prec + 1)?;
                let db = b.dist_enclosure(i2, j2, prec + 1)?;
                Ok(Interval::new(da.lo.max(db.lo), da.hi.max(db.hi)))
            }
            Cms::ContFns(domain) => {
                let diff = Cms::polynomial(i).sub(Cms::polynomial(j));
                sup_abs_enclosure(&diff, domain, &dyadic_eps(prec))
            }
        }
    }

    /// Pointwise distance of two exactly-known points (the real-like and
    /// discrete spaces), for invariant checks.
    pub fn point_dist(&self, x: &Point, y: &Point) -> Result<BigRational> {
        match (self, x, y) {
            (Cms::Reals | Cms::Unit, Point::Real(a), Point::Real(b)) => Ok((a - b).abs()),
            (Cms::Cantor, Point::Cantor(u), Point::Cantor(v)) => Ok(cantor_dist(u, v)),
            (Cms::Naturals, Point::Nat(a), Point::Nat(b)) => Ok(if a == b {
                BigRational::zero()
            } else {
                BigRational::one()
            }),
            (Cms::Product(s, t), Point::Pair(a1, a2), Point::Pair(b1, b2)) => {
                Ok(s.point_dist(a1, b1)?.max(t.point_dist(a2, b2)?))
            }
            _ => Err(Error::NotInRange("point kind does not match the space".into())),
        }
    }
}

/// 2^{-(first difference)} on eventually-zero words, 0 for equal sequences.
pub fn cantor_dist(u: &Word, v: &Word) -> BigRational {
    let len = u.len().max(v.len());
    for k in 0..len {
        let a = u.get(k).copied().unwrap_or(0);
        let b = v.get(k).copied().unwrap_or(0);
        if a != b {
            return dyadic_eps(k as u64);
        }
    }
    BigRational::zero()
}

/// Enclosure of sup |f| over a domain, bracketed within `tol` by
/// branch-and-bound: point evaluations push the lower bound up, interval
/// evaluations cap the upper bound.
pub fn sup_abs_enclosure(f: &Expr, domain: &Interval, tol: &BigRational) -> Result<Interval> {
    let terms = 16;
    let mut lower = f.eval_point(&domain.midpoint(), terms)?.abs().lo;
    let mut queue = vec![domain.clone()];
    let mut upper = f.eval(domain, terms)?.abs().hi;
    for _round in 0..64 {
        let mut next = Vec::new();
        let mut round_upper = lower.clone();
        for seg in &queue {
            let enc = f.eval(seg, terms)?.abs();
            if enc.hi > round_upper {
                round_upper = enc.hi.clone();
            }
            let probe = f.eval_point(&seg.midpoint(), terms)?.abs().lo;
            if probe > lower {
                lower = probe;
            }
            if enc.hi > &lower + tol {
                let (a, b) = seg.bisect();
                next.push(a);
                next.push(b);
            }
        }
        upper = round_upper;
        if next.is_empty() || &upper - &lower <= *tol {
            return Ok(Interval::new(lower.clone(), upper.max(lower)));
        }
        queue = next;
        if queue.len() > 1 << 14 {
            return Err(Error::SearchBudget("sup-norm subdivision exploded".into()));
        }
    }
    Ok(Interval::new(lower.clone(), upper.max(lower)))
}

/// The standard library of spaces.
pub fn cms_library() -> Vec<Cms> {
    vec![
        Cms::Reals,
        Cms::Unit,
        Cms::Cantor,
        Cms::Naturals,
        Cms::Product(Arc::new(Cms::Reals), Arc::new(Cms::Cantor)),
        Cms::ContFns(Interval::new(rat_int(0), rat_int(1))),
    ]
}
