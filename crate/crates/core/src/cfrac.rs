//! Continued-fraction frequencies `α = [0; a₁, a₂, …]`.
//!
//! Only eventually periodic expansions can be enumerated to arbitrary
//! order. A truncated mode holds a finite prefix of quotients for
//! experiments; anything computed from it is labelled as truncated.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rug::Float;

use crate::error::{Error, Result};

/// The frequency as a preperiod followed by a repeating period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFraction {
    preperiod: Vec<u32>,
    period: Vec<u32>,
    truncated: bool,
    max_quotient: u32,
}

/// `p_k / q_k`, the k-th convergent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub k: i64,
    pub p: BigUint,
    pub q: BigUint,
}

fn check_quotients(qs: &[u32]) -> Result<()> {
    match qs.iter().find(|&&a| a == 0) {
        Some(a) => Err(Error::InvalidQuotient(a.to_string())),
        None => Ok(()),
    }
}

impl ContinuedFraction {
    pub fn new(preperiod: Vec<u32>, period: Vec<u32>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::UnsupportedAperiodic);
        }
        check_quotients(&preperiod)?;
        check_quotients(&period)?;
        let max_quotient = preperiod.iter().chain(&period).copied().max().unwrap_or(1);
        Ok(Self {
            preperiod,
            period,
            truncated: false,
            max_quotient,
        })
    }

    /// Purely periodic expansion, e.g. `periodic(vec![1])` is the golden mean.
    pub fn periodic(period: Vec<u32>) -> Result<Self> {
        Self::new(Vec::new(), period)
    }

    pub fn golden_mean() -> Self {
        Self::periodic(vec![1]).expect("static expansion")
    }

    /// A finite prefix `a₁..a_N`; orders needing `a_{N+1}` are unavailable.
    pub fn truncated(quotients: Vec<u32>) -> Result<Self> {
        if quotients.is_empty() {
            return Err(Error::Syntax("empty truncated expansion".into()));
        }
        check_quotients(&quotients)?;
        let max_quotient = quotients.iter().copied().max().unwrap_or(1);
        Ok(Self {
            preperiod: quotients,
            period: Vec::new(),
            truncated: true,
            max_quotient,
        })
    }

    pub fn preperiod(&self) -> &[u32] {
        &self.preperiod
    }

    pub fn period(&self) -> &[u32] {
        &self.period
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Bound `M` on all partial quotients.
    pub fn max_quotient(&self) -> u32 {
        self.max_quotient
    }

    /// `a_i` for `i ≥ 1`; `None` past the end of a truncated expansion.
    pub fn quotient(&self, i: usize) -> Option<u32> {
        assert!(i >= 1, "partial quotients are indexed from 1");
        let j = i - 1;
        if j < self.preperiod.len() {
            Some(self.preperiod[j])
        } else if self.period.is_empty() {
            None
        } else {
            let r = (j - self.preperiod.len()) % self.period.len();
            Some(self.period[r])
        }
    }

    /// `a₁..a_n` as a vector.
    pub fn quotients(&self, n: usize) -> Result<Vec<u32>> {
        (1..=n)
            .map(|i| {
                self.quotient(i).ok_or(Error::TruncatedExpansion {
                    index: i,
                    available: self.preperiod.len(),
                })
            })
            .collect()
    }

    /// Exact convergent `p_k/q_k` for `k ≥ -1`.
    pub fn convergent(&self, k: i64) -> Result<Convergent> {
        assert!(k >= -1, "convergents start at k = -1");
        // seeds (p_{-1}, q_{-1}) = (1, 0) and (p_0, q_0) = (0, 1)
        let (mut p_prev, mut q_prev) = (BigUint::from(1u32), BigUint::from(0u32));
        let (mut p, mut q) = (BigUint::from(0u32), BigUint::from(1u32));
        if k == -1 {
            return Ok(Convergent { k, p: p_prev, q: q_prev });
        }
        for i in 1..=k as usize {
            let a = self.quotient(i).ok_or(Error::TruncatedExpansion {
                index: i,
                available: self.preperiod.len(),
            })?;
            let p_next = &p * a + &p_prev;
            let q_next = &q * a + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
        }
        Ok(Convergent { k, p, q })
    }

    /// `K = lim (a₁⋯a_k)^{1/k}`, the geometric mean of the period. For a
    /// truncated expansion this is the geometric mean of the available prefix.
    pub fn growth_constant(&self) -> f64 {
        let qs = if self.period.is_empty() {
            &self.preperiod
        } else {
            &self.period
        };
        let log_sum: f64 = qs.iter().map(|&a| (a as f64).ln()).sum();
        (log_sum / qs.len() as f64).exp()
    }

    /// Decimal approximation of α, for display only.
    pub fn approximate_value(&self, prec: u32) -> Float {
        let mut k = 1i64;
        loop {
            match self.convergent(k) {
                Ok(c) if c.q.bits() as u32 > prec / 2 + 8 => {
                    return ratio(&c.p, &c.q, prec);
                }
                Ok(_) => k += 1,
                Err(_) => {
                    let c = self.convergent(k - 1).expect("previous convergent exists");
                    return ratio(&c.p, &c.q, prec);
                }
            }
        }
    }
}

fn ratio(p: &BigUint, q: &BigUint, prec: u32) -> Float {
    let p = Float::with_val(prec, Float::parse(p.to_string()).expect("integer literal"));
    let q = Float::with_val(prec, Float::parse(q.to_string()).expect("integer literal"));
    p / q
}

fn parse_list(body: &str, whole: &str) -> Result<Vec<u32>> {
    body.split(',')
        .map(|tok| {
            let tok = tok.trim();
            if tok.is_empty() {
                return Err(Error::Syntax(whole.to_string()));
            }
            match tok.parse::<i64>() {
                Ok(v) if v >= 1 && v <= u32::MAX as i64 => Ok(v as u32),
                Ok(v) => Err(Error::InvalidQuotient(v.to_string())),
                Err(_) => Err(Error::Syntax(whole.to_string())),
            }
        })
        .collect()
}

/// Parses `[0;a,b,(c,d)]`, `per:a,b` (pure period) or `trunc:a,b,c`.
pub fn parse_cf(spec: &str) -> Result<ContinuedFraction> {
    let s: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(rest) = s.strip_prefix("per:") {
        return ContinuedFraction::periodic(parse_list(rest, spec)?);
    }
    if let Some(rest) = s.strip_prefix("trunc:") {
        return ContinuedFraction::truncated(parse_list(rest, spec)?);
    }
    let body = s
        .strip_prefix("[0;")
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::Syntax(spec.to_string()))?;
    let (head, tail) = match body.find('(') {
        Some(open) => {
            let close = body
                .strip_suffix(')')
                .ok_or_else(|| Error::Syntax(spec.to_string()))?;
            (&body[..open], Some(&close[open + 1..]))
        }
        None => (body, None),
    };
    let head = head.strip_suffix(',').unwrap_or(head);
    let preperiod = if head.is_empty() {
        Vec::new()
    } else {
        parse_list(head, spec)?
    };
    match tail {
        Some(t) => ContinuedFraction::new(preperiod, parse_list(t, spec)?),
        None => {
            if preperiod.is_empty() {
                return Err(Error::Syntax(spec.to_string()));
            }
            check_quotients(&preperiod)?;
            Err(Error::UnsupportedAperiodic)
        }
    }
}

impl FromStr for ContinuedFraction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_cf(s)
    }
}

impl fmt::Display for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u32]| {
            v.iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        if self.truncated {
            return write!(f, "trunc:{}", join(&self.preperiod));
        }
        write!(f, "[0;")?;
        if !self.preperiod.is_empty() {
            write!(f, "{},", join(&self.preperiod))?;
        }
        write!(f, "({})]", join(&self.period))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn parses_golden_shorthand() {
        let cf = parse_cf("per:1").unwrap();
        assert!(cf.preperiod().is_empty());
        assert_eq!(cf.period(), &[1]);
        assert_eq!(cf.max_quotient(), 1);
    }

    #[test]
    fn parses_bracket_form() {
        let cf = parse_cf("[0;1,2,(3,4)]").unwrap();
        assert_eq!(cf.preperiod(), &[1, 2]);
        assert_eq!(cf.period(), &[3, 4]);
        assert_eq!(cf.max_quotient(), 4);
        assert_eq!(cf.to_string(), "[0;1,2,(3,4)]");
        assert_eq!(parse_cf(&cf.to_string()).unwrap(), cf);
        let pure = parse_cf("[0;(2)]").unwrap();
        assert_eq!(pure.period(), &[2]);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            parse_cf("[0;0,1]"),
            Err(Error::InvalidQuotient("0".into()))
        );
        assert!(matches!(parse_cf("[0;1,-3,(2)]"), Err(Error::InvalidQuotient(_))));
        assert_eq!(parse_cf("[0;1,2]"), Err(Error::UnsupportedAperiodic));
        assert!(matches!(parse_cf("0;1"), Err(Error::Syntax(_))));
        assert!(matches!(parse_cf("per:1,x"), Err(Error::Syntax(_))));
    }

    #[test]
    fn quotient_indexing_wraps_period() {
        let cf = parse_cf("[0;5,(1,2)]").unwrap();
        let qs = cf.quotients(6).unwrap();
        assert_eq!(qs, vec![5, 1, 2, 1, 2, 1]);
        let t = ContinuedFraction::truncated(vec![1, 1, 2]).unwrap();
        assert!(t.is_truncated());
        assert!(matches!(t.quotients(4), Err(Error::TruncatedExpansion { index: 4, .. })));
    }

    #[test]
    fn convergent_examples() {
        let golden = ContinuedFraction::golden_mean();
        assert_eq!(golden.convergent(5).unwrap().q, BigUint::from(8u32));
        let c0 = golden.convergent(0).unwrap();
        assert_eq!((c0.p, c0.q), (BigUint::from(0u32), BigUint::from(1u32)));
        let cm = golden.convergent(-1).unwrap();
        assert_eq!((cm.p, cm.q), (BigUint::from(1u32), BigUint::from(0u32)));
        let silver = ContinuedFraction::periodic(vec![2]).unwrap();
        let qs: Vec<_> = (0..=3).map(|k| silver.convergent(k).unwrap().q).collect();
        assert_eq!(qs, [1u32, 2, 5, 12].map(BigUint::from));
        assert_eq!(silver.convergent(4).unwrap().q, BigUint::from(29u32));
    }

    #[test]
    fn convergents_do_not_overflow() {
        let q = ContinuedFraction::golden_mean().convergent(200).unwrap().q;
        assert!(q.bits() > 128);
    }

    #[test]
    fn growth_constant_examples() {
        assert_eq!(ContinuedFraction::golden_mean().growth_constant(), 1.0);
        let k = ContinuedFraction::periodic(vec![1, 2]).unwrap().growth_constant();
        // brute force (a₁⋯a_k)^{1/k} at k = 10⁴
        let cf = ContinuedFraction::periodic(vec![1, 2]).unwrap();
        let n = 10_000;
        let brute = (cf.quotients(n).unwrap().iter().map(|&a| (a as f64).ln()).sum::<f64>()
            / n as f64)
            .exp();
        assert!((k - 2f64.sqrt()).abs() < 1e-12);
        assert!((k - brute).abs() < 1e-9);
        let three = ContinuedFraction::periodic(vec![3]).unwrap().growth_constant();
        assert!((three - 3.0).abs() < 1e-12);
    }

    #[test]
    fn approximate_value_is_golden() {
        let a = ContinuedFraction::golden_mean().approximate_value(128).to_f64();
        assert!((a - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn convergent_determinant_identity(
            pre in proptest::collection::vec(1u32..6, 0..3),
            per in proptest::collection::vec(1u32..6, 1..4),
            k in 1i64..40,
        ) {
            let cf = ContinuedFraction::new(pre, per).unwrap();
            let c = cf.convergent(k).unwrap();
            let c1 = cf.convergent(k - 1).unwrap();
            let lhs = BigInt::from(c.p.clone()) * BigInt::from(c1.q.clone())
                - BigInt::from(c1.p.clone()) * BigInt::from(c.q.clone());
            // p_k q_{k-1} - p_{k-1} q_k = (-1)^{k+1} with the seeds p_0 = 0, q_0 = 1
            let sign = if k % 2 == 0 { -1 } else { 1 };
            proptest::prop_assert_eq!(lhs, BigInt::from(sign));
            if k >= 2 {
                proptest::prop_assert!(c.q > c1.q);
            }
            let kk = cf.growth_constant();
            proptest::prop_assert!(kk >= 1.0 - 1e-12 && kk <= cf.max_quotient() as f64 + 1e-12);
        }
    }
}
