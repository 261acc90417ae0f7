//! Continuants, cylinder intervals and continued fraction expansions.
//!
//! A word `(a₁, …, aₙ)` names the cylinder of numbers in `[0, 1]` whose
//! expansion `[0; a₁, a₂, …]` starts with those digits. Endpoints are the
//! convergent `pₙ/qₙ` and `(pₙ + pₙ₋₁)/(qₙ + qₙ₋₁)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::game::Ball;
use crate::rational::{ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CfError {
    #[error("continued fraction digits must be at least 1")]
    ZeroDigit,
    #[error("a cylinder needs a nonempty word")]
    EmptyWord,
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("alphabet must be nonempty")]
    EmptyAlphabet,
    #[error("{0} is outside [0, 1]")]
    OutOfRange(String),
}

/// Digits `a₁, …, aₙ`, all at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct CfWord(Vec<u64>);

impl CfWord {
    pub fn new(digits: Vec<u64>) -> Result<Self, CfError> {
        if digits.contains(&0) {
            return Err(CfError::ZeroDigit);
        }
        Ok(CfWord(digits))
    }

    pub fn empty() -> Self {
        CfWord(Vec::new())
    }

    pub fn digits(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, digit: u64) -> CfWord {
        assert!(digit >= 1);
        let mut d = self.0.clone();
        d.push(digit);
        CfWord(d)
    }

    pub fn max_digit(&self) -> Option<u64> {
        self.0.iter().copied().max()
    }
}

impl fmt::Display for CfWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// `(qₙ, qₙ₋₁)` with `q₋₁ = 0`, `q₀ = 1`, `qₙ = aₙqₙ₋₁ + qₙ₋₂`.
pub fn continuants(word: &CfWord) -> (BigInt, BigInt) {
    let (mut q, mut q_prev) = (BigInt::one(), BigInt::zero());
    for &a in word.digits() {
        let next = BigInt::from(a) * &q + &q_prev;
        q_prev = std::mem::replace(&mut q, next);
    }
    (q, q_prev)
}

/// `(pₙ, pₙ₋₁)` for `[0; a₁, …, aₙ]`, with `p₋₁ = 1`, `p₀ = 0`.
pub fn numerators(word: &CfWord) -> (BigInt, BigInt) {
    let (mut p, mut p_prev) = (BigInt::zero(), BigInt::one());
    for &a in word.digits() {
        let next = BigInt::from(a) * &p + &p_prev;
        p_prev = std::mem::replace(&mut p, next);
    }
    (p, p_prev)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cylinder {
    pub word: CfWord,
    pub lo: Rational,
    pub hi: Rational,
    pub q: BigInt,
    pub q_prev: BigInt,
}

impl Cylinder {
    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// `1/(qₙ(qₙ + qₙ₋₁))`.
    pub fn length_from_continuants(&self) -> Rational {
        Rational::new(BigInt::one(), &self.q * (&self.q + &self.q_prev))
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, lo: &Rational, hi: &Rational) -> bool {
        &self.lo <= lo && hi <= &self.hi
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(BigInt::from(2))
    }
}

/// Closed interval of numbers whose expansion starts with `word`.
pub fn cylinder_interval(word: &CfWord) -> Result<Cylinder, CfError> {
    if word.is_empty() {
        return Err(CfError::EmptyWord);
    }
    let (q, q_prev) = continuants(word);
    let (p, p_prev) = numerators(word);
    let a = Rational::new(p.clone(), q.clone());
    let b = Rational::new(&p + p_prev, &q + &q_prev);
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    Ok(Cylinder {
        word: word.clone(),
        lo,
        hi,
        q,
        q_prev,
    })
}

/// All words of length `depth` over `alphabet`, lexicographic in alphabet order.
pub fn words(alphabet: &[u64], depth: usize) -> Vec<CfWord> {
    let mut level = vec![CfWord::empty()];
    for _ in 0..depth {
        level = level
            .iter()
            .flat_map(|w| alphabet.iter().map(move |&a| w.child(a)))
            .collect();
    }
    level
}

/// Extremal child/parent length ratios over an alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub max_depth: usize,
    pub alphabet: Vec<u64>,
    /// Number of (parent, child) pairs with a nonempty parent.
    pub pairs_checked: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub min_ratio: Rational,
    pub min_at: CfWord,
    #[serde(with = "crate::rational::serde_str")]
    pub max_ratio: Rational,
    pub max_at: CfWord,
    /// Every ratio lies strictly between `lower` and `upper`.
    pub within_bounds: bool,
    #[serde(with = "crate::rational::serde_str")]
    pub lower: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub upper: Rational,
    /// At every parent, a larger digit gives a strictly shorter child.
    pub larger_digit_shorter: bool,
    /// Ratios of the depth-1 cylinders to `[0, 1]`, for reference.
    #[serde(with = "crate::rational::serde_vec")]
    pub root_ratios: Vec<Rational>,
    pub cylinders: usize,
}

/// Checks `lower < l(child)/l(parent) < upper` exactly for every nonempty
/// parent word of length `< max_depth`.
pub fn ratio_bounds_check(max_depth: usize, alphabet: &[u64]) -> Result<RatioReport, CfError> {
    if max_depth == 0 {
        return Err(CfError::ZeroDepth);
    }
    if alphabet.is_empty() {
        return Err(CfError::EmptyAlphabet);
    }
    if alphabet.contains(&0) {
        return Err(CfError::ZeroDigit);
    }
    let mut sorted = alphabet.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let (lower, upper) = (ratio(1, 12), ratio(1, 2));
    let length = |q: &BigInt, q_prev: &BigInt| (q * (q + q_prev)).clone();
    let root_ratios = sorted
        .iter()
        .map(|&a| Rational::new(BigInt::one(), length(&BigInt::from(a), &BigInt::one())))
        .collect();
    let mut report = RatioReport {
        max_depth,
        alphabet: sorted.clone(),
        pairs_checked: 0,
        min_ratio: Rational::one(),
        min_at: CfWord::empty(),
        max_ratio: Rational::zero(),
        max_at: CfWord::empty(),
        within_bounds: true,
        lower: lower.clone(),
        upper: upper.clone(),
        larger_digit_shorter: true,
        root_ratios,
        cylinders: 0,
    };
    // Continuant pairs (qₙ, qₙ₋₁) per word; lengths are 1/(qₙ(qₙ + qₙ₋₁)).
    let mut level: Vec<(CfWord, BigInt, BigInt)> = sorted
        .iter()
        .map(|&a| (CfWord(vec![a]), BigInt::from(a), BigInt::one()))
        .collect();
    report.cylinders += level.len();
    for _ in 1..max_depth {
        let mut next = Vec::with_capacity(level.len() * sorted.len());
        for (word, q, q_prev) in &level {
            let parent_inv = length(q, q_prev);
            let mut previous: Option<Rational> = None;
            for &a in &sorted {
                let cq = BigInt::from(a) * q + q_prev;
                let child_inv = length(&cq, q);
                let r = Rational::new(parent_inv.clone(), child_inv);
                report.pairs_checked += 1;
                if !(lower < r && r < upper) {
                    report.within_bounds = false;
                }
                if let Some(prev) = &previous {
                    if &r >= prev {
                        report.larger_digit_shorter = false;
                    }
                }
                let child = word.child(a);
                if r < report.min_ratio {
                    report.min_ratio = r.clone();
                    report.min_at = child.clone();
                }
                if r > report.max_ratio {
                    report.max_ratio = r.clone();
                    report.max_at = child.clone();
                }
                previous = Some(r);
                next.push((child, cq, q.clone()));
            }
        }
        report.cylinders += next.len();
        level = next;
    }
    Ok(report)
}

/// Integer part and digits of the finite expansion of `x` (Euclid; last digit ≥ 2
/// whenever there is at least one digit).
pub fn expansion(x: &Rational) -> (BigInt, Vec<BigInt>) {
    let a0 = x.floor().to_integer();
    let mut digits = Vec::new();
    let mut num = x.numer() - &a0 * x.denom();
    let mut den = x.denom().clone();
    while !num.is_zero() {
        let (q, r) = den.div_mod_floor(&num);
        digits.push(q);
        den = std::mem::replace(&mut num, r);
    }
    (a0, digits)
}

/// Canonical expansion `[0; a₁, …, aₙ]` of a rational in `[0, 1]`.
pub fn cf_of_rational(x: &Rational) -> Result<Vec<BigInt>, CfError> {
    if x.is_negative() || x > &Rational::one() {
        return Err(CfError::OutOfRange(crate::rational::format_rational(x)));
    }
    let (a0, digits) = expansion(x);
    if a0.is_one() {
        return Ok(vec![BigInt::one()]);
    }
    Ok(digits)
}

/// The other expansion of a rational: `[…, aₙ]` becomes `[…, aₙ − 1, 1]`.
pub fn alternate_expansion(a0: &BigInt, digits: &[BigInt]) -> (BigInt, Vec<BigInt>) {
    match digits.split_last() {
        None => (a0 - 1, vec![BigInt::one()]),
        Some((last, rest)) => {
            let mut d = rest.to_vec();
            if last.is_one() {
                // [.., b, 1] is itself the alternate form of [.., b + 1].
                match d.last_mut() {
                    Some(b) => *b += 1,
                    None => return (a0 + 1, d),
                }
            } else {
                d.push(last - 1);
                d.push(BigInt::one());
            }
            (a0.clone(), d)
        }
    }
}

/// Convergents `p_k/q_k` of `[a₀; a₁, …]`, in order.
pub fn convergents_of(a0: &BigInt, digits: &[BigInt]) -> Vec<Rational> {
    let (mut p, mut p_prev) = (a0.clone(), BigInt::one());
    let (mut q, mut q_prev) = (BigInt::one(), BigInt::zero());
    let mut out = vec![Rational::from_integer(a0.clone())];
    for a in digits {
        let np = a * &p + &p_prev;
        let nq = a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, np);
        q_prev = std::mem::replace(&mut q, nq);
        // Convergents are already in lowest terms with a positive denominator.
        out.push(Rational::new_raw(p.clone(), q.clone()));
    }
    out
}

/// Convergents of both expansions of `x`, ascending by denominator, deduplicated.
pub fn convergents(x: &Rational) -> Vec<Rational> {
    let (a0, digits) = expansion(x);
    let (b0, alt) = alternate_expansion(&a0, &digits);
    let mut all = convergents_of(&a0, &digits);
    all.extend(convergents_of(&b0, &alt));
    all.sort_by(|a, b| a.denom().cmp(b.denom()).then_with(|| a.cmp(b)));
    all.dedup();
    all
}

fn digit_u64(d: &BigInt) -> Option<u64> {
    d.to_u64().filter(|&v| v >= 1)
}

/// Longest word whose cylinder contains all of `[lo, hi]`.
pub fn cf_prefix_of_interval(lo: &Rational, hi: &Rational) -> Result<CfWord, CfError> {
    let unit = |x: &Rational| !x.is_negative() && x <= &Rational::one();
    if !unit(lo) || !unit(hi) || lo > hi {
        return Err(CfError::OutOfRange(format!(
            "[{}, {}]",
            crate::rational::format_rational(lo),
            crate::rational::format_rational(hi)
        )));
    }
    let expansions_of = |x: &Rational| -> Vec<Vec<BigInt>> {
        let (a0, digits) = expansion(x);
        let (b0, alt) = alternate_expansion(&a0, &digits);
        let mut out = Vec::new();
        for (head, tail) in [(a0, digits), (b0, alt)] {
            // Only expansions of the form [0; …] describe points of [0, 1].
            if head.is_zero() {
                out.push(tail);
            }
        }
        out
    };
    let candidates: Vec<Vec<BigInt>> = expansions_of(lo).into_iter().chain(expansions_of(hi)).collect();
    let mut word = CfWord::empty();
    loop {
        let k = word.len();
        let mut extended = None;
        let mut tried = Vec::new();
        for digits in &candidates {
            let Some(a) = digits.get(k).and_then(digit_u64) else {
                continue;
            };
            if tried.contains(&a) {
                continue;
            }
            tried.push(a);
            let cyl = cylinder_interval(&word.child(a))?;
            if cyl.contains_interval(lo, hi) {
                extended = Some(a);
                break;
            }
        }
        match extended {
            Some(a) => word = word.child(a),
            None => return Ok(word),
        }
        if lo == hi && word.len() > 4096 {
            return Ok(word);
        }
    }
}

/// Largest digit of the prefix forced by a ball in `[0, 1]`, or `None` when the
/// ball is not inside any depth-1 cylinder.
pub fn quotient_bound_certificate(ball: &Ball) -> Option<u64> {
    if ball.dim() != 1 {
        return None;
    }
    let (lo, hi) = ball.interval();
    cf_prefix_of_interval(&lo, &hi).ok()?.max_digit()
}
