//! Cauchy names, balls, and the metric limit map.

use std::sync::Mutex;

use num_rational::BigRational;
use num_traits::Zero;

use crate::baire::{pair, Stream};
use crate::error::{Error, Result};
use crate::interval::dyadic_eps;

use super::cms::Cms;

/// A rational ball around a dense point.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    /// alpha-index of the center.
    pub center: u64,
    pub radius: BigRational,
}

impl Ball {
    pub fn new(center: u64, radius: BigRational) -> Self {
        assert!(radius >= BigRational::zero(), "ball radius must be nonnegative");
        Ball { center, radius }
    }

    pub fn dyadic(center: u64, k: u64) -> Self {
        Ball::new(center, dyadic_eps(k))
    }
}

/// A Cauchy name: a stream of alpha-indices with d(alpha p(n), alpha p(k))
/// < 2^{-k} for n >= k. The invariant is checked on demand, never assumed.
#[derive(Clone)]
pub struct CauchyName {
    pub stream: Stream,
}

impl std::fmt::Debug for CauchyName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CauchyName({:?})", self.stream)
    }
}

impl CauchyName {
    pub fn new(stream: Stream) -> Self {
        CauchyName { stream }
    }

    /// The constant name of a dense point.
    pub fn constant(index: u64) -> Self {
        CauchyName { stream: Stream::constant(index) }
    }

    /// Check fast convergence for every pair k <= n <= upto. Distances are
    /// certified at precision upto+4; a violation must be certain (the
    /// enclosure's lower bound already breaks the bound) to reject.
    pub fn validate(&self, space: &Cms, upto: u64) -> Result<()> {
        for k in 0..=upto {
            let pk = self.stream.get(k)?;
            for n in k + 1..=upto {
                let pn = self.stream.get(n)?;
                let d = space.dist_enclosure(pn, pk, upto + 4)?;
                if d.lo >= dyadic_eps(k) {
                    return Err(Error::NotFastConverging { n, k });
                }
            }
        }
        Ok(())
    }
}

/// Decode a name at precision k: a radius-2^{-k} ball certified to contain
/// the named point, after validating the name through index k.
pub fn cauchy_decode(space: &Cms, name: &CauchyName, k: u64) -> Result<Ball> {
    name.validate(space, k)?;
    Ok(Ball::dyadic(name.stream.get(k)?, k))
}

/// Certify d(x_a, x_b) > threshold for two named points, by decoding both at
/// precision `prec` and comparing centers with the slack subtracted.
fn names_certified_apart(
    space: &Cms,
    seq: &Stream,
    a: u64,
    b: u64,
    threshold: &BigRational,
    prec: u64,
) -> Result<bool> {
    let ca = seq.get(pair(a, prec))?;
    let cb = seq.get(pair(b, prec))?;
    let d = space.dist_enclosure(ca, cb, prec + 2)?;
    let slack = dyadic_eps(prec - 1); // both decoded balls have radius 2^{-prec}
    Ok(&d.lo - slack > *threshold)
}

/// The metric limit map: from an interleaved sequence of Cauchy names of a
/// convergent point sequence, a Cauchy name of the limit. Cell k of the
/// result is p_{i_k}(k+2), where i_k is the least index past i_{k-1} such
/// that no later member within the probe window is certifiably farther than
/// 2^{-k-2} from member i_k.
pub fn lim_x(space: Cms, seq: Stream, probe: u64) -> CauchyName {
    let picks: Mutex<Vec<u64>> = Mutex::new(Vec::new());
    let stream = Stream::from_fn(move |k| {
        let mut picks = picks.lock().unwrap();
        while (picks.len() as u64) <= k {
            let stage = picks.len() as u64;
            let threshold = dyadic_eps(stage + 2);
            let start = picks.last().map_or(0, |&i| i + 1);
            let mut chosen = None;
            'candidates: for i in start..start + probe {
                for n in i + 1..=i + probe {
                    if names_certified_apart(&space, &seq, n, i, &threshold, stage + 5)? {
                        continue 'candidates;
                    }
                }
                chosen = Some(i);
                break;
            }
            let Some(i) = chosen else {
                return Err(Error::SearchBudget(format!(
                    "no stable member found for limit cell {stage} within probe {probe}"
                )));
            };
            picks.push(i);
        }
        seq.get(pair(picks[k as usize], k + 2))
    });
    CauchyName::new(stream)
}
