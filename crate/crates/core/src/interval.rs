//! Exact rational interval arithmetic and interval evaluation of function
//! expression trees. Everything is outward-rounded over `BigRational`, so
//! enclosures are sound by construction; tightness is controlled by
//! subdivision depth and by the number of Taylor terms used for `exp`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// 2^k for k of either sign.
pub fn pow2(k: i64) -> BigRational {
    let mag = BigInt::from(1u8) << k.unsigned_abs() as usize;
    if k >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    }
}

/// A closed rational interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(r: BigRational) -> Self {
        Interval { lo: r.clone(), hi: r }
    }

    pub fn zero() -> Self {
        Interval::point(BigRational::zero())
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / rat_int(2)
    }

    pub fn contains(&self, r: &BigRational) -> bool {
        &self.lo <= r && r <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&BigRational::zero())
    }

    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let cands = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    pub fn scale(&self, r: &BigRational) -> Interval {
        self.mul(&Interval::point(r.clone()))
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= BigRational::zero() {
            self.clone()
        } else if self.hi <= BigRational::zero() {
            self.neg()
        } else {
            Interval { lo: BigRational::zero(), hi: self.lo.abs().max(self.hi.abs()) }
        }
    }

    /// 1/self; the interval must not contain 0.
    pub fn recip(&self) -> Result<Interval> {
        if self.contains_zero() {
            return Err(Error::NotInRange("reciprocal of an interval containing 0".into()));
        }
        Ok(Interval { lo: self.hi.recip(), hi: self.lo.recip() })
    }

    pub fn square(&self) -> Interval {
        let a = self.abs();
        Interval { lo: &a.lo * &a.lo, hi: &a.hi * &a.hi }
    }

    /// Split at the midpoint.
    pub fn bisect(&self) -> (Interval, Interval) {
        let m = self.midpoint();
        (Interval::new(self.lo.clone(), m.clone()), Interval::new(m, self.hi.clone()))
    }
}

// ---- exponential bounds ----

fn taylor_sum(r: &BigRational, terms: u32) -> BigRational {
    let mut sum = BigRational::one();
    let mut term = BigRational::one();
    for k in 1..=terms {
        term = term * r / rat_int(k as i64);
        sum += term.clone();
    }
    sum
}

/// Lower bound on exp(r). Exact rational, sound for all r.
pub fn exp_lower(r: &BigRational, terms: u32) -> BigRational {
    if r.is_negative() {
        // exp(r) = 1/exp(-r) and any upper bound on exp(-r) works
        return exp_upper(&-r.clone(), terms).recip();
    }
    // argument reduction to [0, 1/2]: exp(r) = exp(r/2^k)^(2^k)
    let mut k = 0u32;
    let mut t = r.clone();
    let half = rat(1, 2);
    while t > half {
        t /= rat_int(2);
        k += 1;
    }
    let mut v = taylor_sum(&t, terms); // partial sums underestimate for t >= 0
    for _ in 0..k {
        v = &v * &v;
    }
    v
}

/// Upper bound on exp(r). Exact rational, sound for all r. Very negative
/// arguments take the cheap bound exp(r) <= 1/(1 - r).
pub fn exp_upper(r: &BigRational, terms: u32) -> BigRational {
    if r.is_negative() {
        if -r.clone() > rat_int(32) {
            // exp(r) <= 1/(1 - r) for r <= 0
            return (BigRational::one() - r).recip();
        }
        return exp_lower(&-r.clone(), terms).recip();
    }
    let mut k = 0u32;
    let mut t = r.clone();
    let half = rat(1, 2);
    while t > half {
        t /= rat_int(2);
        k += 1;
    }
    // S_N(t) + 2 * t^(N+1)/(N+1)!  dominates the tail for t <= 1/2
    let mut tail = BigRational::one();
    for i in 1..=(terms + 1) {
        tail = tail * &t / rat_int(i as i64);
    }
    let mut v = taylor_sum(&t, terms) + tail * rat_int(2);
    for _ in 0..k {
        v = &v * &v;
    }
    v
}

/// Enclosure of exp over an interval, by monotonicity.
pub fn exp_interval(x: &Interval, terms: u32) -> Interval {
    Interval { lo: exp_lower(&x.lo, terms), hi: exp_upper(&x.hi, terms) }
}

/// Largest dyadic `k/2^bits` with square at most `q` (requires `q >= 0`):
/// a certified rational lower bound on sqrt(q).
pub fn sqrt_lower(q: &BigRational, bits: u32) -> BigRational {
    debug_assert!(!q.is_negative());
    let scale = BigInt::from(1u8) << (2 * bits as usize);
    let scaled = (q * BigRational::from_integer(scale)).floor().to_integer();
    let root = scaled.max(BigInt::zero()).sqrt();
    BigRational::new(root, BigInt::from(1u8) << bits as usize)
}

// ---- expression trees ----

/// Function expression over one real variable, evaluable on intervals.
#[derive(Debug, Clone)]
pub enum Expr {
    Const(BigRational),
    X,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// 1/e; evaluation fails on enclosures containing 0.
    Recip(Box<Expr>),
    Exp(Box<Expr>),
    /// Hat function of the argument: max(0, 1 - |y|).
    Hat(Box<Expr>),
    /// Smooth bump of the argument: e^{1/(y^2 - 1)} for |y| < 1, else 0.
    Bump(Box<Expr>),
}

impl Expr {
    pub fn x() -> Expr {
        Expr::X
    }

    pub fn constant(r: BigRational) -> Expr {
        Expr::Const(r)
    }

    pub fn add(self, other: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(other))
    }

    pub fn sub(self, other: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(other))
    }

    pub fn mul(self, other: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(other))
    }

    pub fn scale(self, r: BigRational) -> Expr {
        Expr::Const(r).mul(self)
    }

    /// a*x + b
    pub fn affine(a: BigRational, b: BigRational) -> Expr {
        Expr::x().scale(a).add(Expr::Const(b))
    }

    pub fn square(self) -> Expr {
        self.clone().mul(self)
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        terms
            .into_iter()
            .reduce(|a, b| a.add(b))
            .unwrap_or(Expr::Const(BigRational::zero()))
    }

    /// Substitute `inner` for the variable.
    pub fn compose(&self, inner: &Expr) -> Expr {
        match self {
            Expr::Const(r) => Expr::Const(r.clone()),
            Expr::X => inner.clone(),
            Expr::Neg(e) => Expr::Neg(Box::new(e.compose(inner))),
            Expr::Add(a, b) => Expr::Add(Box::new(a.compose(inner)), Box::new(b.compose(inner))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.compose(inner)), Box::new(b.compose(inner))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.compose(inner)), Box::new(b.compose(inner))),
            Expr::Recip(e) => Expr::Recip(Box::new(e.compose(inner))),
            Expr::Exp(e) => Expr::Exp(Box::new(e.compose(inner))),
            Expr::Hat(e) => Expr::Hat(Box::new(e.compose(inner))),
            Expr::Bump(e) => Expr::Bump(Box::new(e.compose(inner))),
        }
    }

    /// Interval enclosure of the function over `x`.
    pub fn eval(&self, x: &Interval, terms: u32) -> Result<Interval> {
        match self {
            Expr::Const(r) => Ok(Interval::point(r.clone())),
            Expr::X => Ok(x.clone()),
            Expr::Neg(e) => Ok(e.eval(x, terms)?.neg()),
            Expr::Add(a, b) => Ok(a.eval(x, terms)?.add(&b.eval(x, terms)?)),
            Expr::Sub(a, b) => Ok(a.eval(x, terms)?.sub(&b.eval(x, terms)?)),
            Expr::Mul(a, b) => Ok(a.eval(x, terms)?.mul(&b.eval(x, terms)?)),
            Expr::Recip(e) => e.eval(x, terms)?.recip(),
            Expr::Exp(e) => Ok(exp_interval(&e.eval(x, terms)?, terms)),
            Expr::Hat(e) => {
                let a = e.eval(x, terms)?.abs();
                let one = BigRational::one();
                let lo = (&one - &a.hi).max(BigRational::zero());
                let hi = (&one - &a.lo).max(BigRational::zero());
                Ok(Interval::new(lo, hi))
            }
            Expr::Bump(e) => {
                let y = e.eval(x, terms)?;
                bump_interval(&y, terms)
            }
        }
    }

    /// Exact evaluation at a rational point (outward-rounded for exp/bump).
    pub fn eval_point(&self, r: &BigRational, terms: u32) -> Result<Interval> {
        self.eval(&Interval::point(r.clone()), terms)
    }

    /// Enclosure over `x` after splitting it into `2^depth` pieces: hull of
    /// the pieces' enclosures, much tighter for non-monotone trees.
    pub fn eval_subdivided(&self, x: &Interval, depth: u32, terms: u32) -> Result<Interval> {
        if depth == 0 || x.width().is_zero() {
            return self.eval(x, terms);
        }
        let (a, b) = x.bisect();
        let ia = self.eval_subdivided(&a, depth - 1, terms)?;
        let ib = self.eval_subdivided(&b, depth - 1, terms)?;
        Ok(ia.hull(&ib))
    }
}

fn bump_interval(y: &Interval, terms: u32) -> Result<Interval> {
    let one = BigRational::one();
    let a = y.abs(); // |y| interval, lo >= 0
    if a.lo >= one {
        return Ok(Interval::zero());
    }
    let inside_hi = if a.hi < one { a.hi.clone() } else { one.clone() };
    // on [a.lo, inside_hi] the bump decreases in |y|: max at a.lo
    let s_min = &a.lo * &a.lo;
    let w_hi = (s_min - &one).recip(); // closest-to-zero exponent, largest value
    let hi = exp_upper(&w_hi, terms);
    let lo = if a.hi >= one {
        // the enclosure touches the support boundary, where the bump is 0
        BigRational::zero()
    } else {
        let s_max = &inside_hi * &inside_hi;
        exp_lower(&(s_max - &one).recip(), terms)
    };
    Ok(Interval::new(lo.min(hi.clone()), hi))
}

/// Certified lower bound on the euclidean distance from a rational point to
/// an axis-aligned rational rectangle (0 if inside).
pub fn point_rect_distance_lower(
    x: &BigRational,
    y: &BigRational,
    rect: (&Interval, &Interval),
    bits: u32,
) -> BigRational {
    let zero = BigRational::zero();
    let dx = (&rect.0.lo - x).max(x - &rect.0.hi).max(zero.clone());
    let dy = (&rect.1.lo - y).max(y - &rect.1.hi).max(zero);
    sqrt_lower(&(&dx * &dx + &dy * &dy), bits)
}

/// Leftover conversion helper: 2^{-k} as a positive rational.
pub fn dyadic_eps(k: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(BigUint::from(1u8) << k as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        rat(n, d)
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = Interval::new(r(-1, 2), r(1, 3));
        let b = Interval::new(r(2, 1), r(3, 1));
        assert_eq!(a.add(&b), Interval::new(r(3, 2), r(10, 3)));
        assert_eq!(a.mul(&b), Interval::new(r(-3, 2), r(1, 1)));
        assert_eq!(a.square(), Interval::new(r(0, 1), r(1, 4)));
        assert!(b.recip().unwrap().lo == r(1, 3));
        assert!(a.recip().is_err());
    }

    #[test]
    fn exp_brackets_are_sound_and_tight() {
        for (num, den) in [(0i64, 1i64), (1, 1), (-1, 1), (5, 2), (-7, 3), (1, 100)] {
            let x = r(num, den);
            let lo = exp_lower(&x, 20);
            let hi = exp_upper(&x, 20);
            assert!(lo <= hi);
            let fx = (num as f64 / den as f64).exp();
            let lof = num_traits::ToPrimitive::to_f64(&lo).unwrap();
            let hif = num_traits::ToPrimitive::to_f64(&hi).unwrap();
            assert!(lof <= fx * 1.0000001 && fx <= hif * 1.0000001, "exp({num}/{den})");
            assert!(hif - lof < 1e-6 * fx.max(1.0));
        }
        // very negative arguments fall back to the cheap bound
        let far = r(-1000, 1);
        assert!(exp_upper(&far, 8) <= r(1, 1000));
        assert!(exp_lower(&far, 8) >= BigRational::zero());
    }

    #[test]
    fn hat_and_bump_supports() {
        let hat = Expr::Hat(Box::new(Expr::x()));
        let out = hat.eval(&Interval::new(r(2, 1), r(3, 1)), 8).unwrap();
        assert_eq!(out, Interval::zero());
        let peak = hat.eval_point(&r(0, 1), 8).unwrap();
        assert_eq!(peak, Interval::point(r(1, 1)));

        let bump = Expr::Bump(Box::new(Expr::x()));
        assert_eq!(bump.eval(&Interval::new(r(1, 1), r(2, 1)), 8).unwrap(), Interval::zero());
        let mid = bump.eval_point(&r(0, 1), 16).unwrap();
        // bump(0) = 1/e
        assert!(mid.lo > r(36, 100) && mid.hi < r(37, 100));
        let straddle = bump.eval(&Interval::new(r(1, 2), r(3, 2)), 12).unwrap();
        assert_eq!(straddle.lo, BigRational::zero());
        assert!(straddle.hi >= bump.eval_point(&r(1, 2), 12).unwrap().lo);
    }

    #[test]
    fn subdivision_tightens_square() {
        let sq = Expr::x().square();
        let x = Interval::new(r(-1, 1), r(1, 1));
        let coarse = sq.eval(&x, 8).unwrap();
        let fine = sq.eval_subdivided(&x, 5, 8).unwrap();
        assert!(fine.subset_of(&coarse));
        assert!(fine.hi == r(1, 1) && fine.lo <= r(1, 256));
    }

    #[test]
    fn sqrt_lower_is_certified() {
        for (n, d) in [(2i64, 1i64), (1, 4), (9, 1), (5, 7)] {
            let q = r(n, d);
            let s = sqrt_lower(&q, 20);
            assert!(&s * &s <= q);
            // within 2^-19 of the true root
            let s2 = &s + r(1, 1 << 19);
            assert!(&s2 * &s2 > q);
        }
        assert_eq!(sqrt_lower(&r(9, 1), 10), r(3, 1));
    }

    #[test]
    fn rect_distance() {
        let rect = (&Interval::new(r(0, 1), r(1, 1)), &Interval::new(r(0, 1), r(1, 1)));
        let d = point_rect_distance_lower(&r(-3, 1), &r(0, 1), rect, 20);
        assert!(d <= r(3, 1) && d > r(29, 10));
        let inside = point_rect_distance_lower(&r(1, 2), &r(1, 2), rect, 20);
        assert_eq!(inside, BigRational::zero());
    }
}
