//! White strategy steering the outcome away from rationals with small denominators.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{ball_at, legal_support_centers, Strategy, StrategyError};
use crate::continued_fractions::{alternate_expansion, expansion};
use crate::farey::{fractions_in, simplest_in};
use crate::game::{Ball, GameView, Point};
use crate::rational::{self, ratio, Rational};

/// Denominator cap as a function of Black's current radius `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum QCapRule {
    /// `max(1, ⌊scale/√ρ⌋)`. With `scale ≤ 1/4` two fractions under the cap
    /// are at least `16ρ` apart, so Black's ball holds at most one of them.
    Sqrt {
        #[serde(with = "crate::rational::serde_str")]
        scale: Rational,
    },
    Fixed(u64),
}

impl Default for QCapRule {
    fn default() -> Self {
        QCapRule::Sqrt { scale: ratio(1, 4) }
    }
}

impl QCapRule {
    pub fn cap(&self, rho: &Rational) -> BigInt {
        match self {
            QCapRule::Fixed(q) => BigInt::from(*q).max(BigInt::one()),
            QCapRule::Sqrt { scale } => rational::floor_sqrt(&(scale * scale / rho)).max(BigInt::one()),
        }
    }
}

/// Exact lower bound on `q·⟨q·x⟩` for every `x` in `ball` and every `q ≤ cap`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    /// Index of the certified ball in the transcript.
    pub index: usize,
    pub ball: Ball,
    #[serde(serialize_with = "serialize_bigint")]
    pub cap: BigInt,
    #[serde(with = "crate::rational::serde_str")]
    pub bound: Rational,
}

fn serialize_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// `min(1/2, min over p/q, q ≤ cap, of q²·dist([lo, hi], p/q))`.
///
/// A fraction with `q²·|x − p/q| < 1/2` is a convergent of `x`, so only
/// convergents of the two endpoints (both expansions) need to be inspected.
pub fn rational_certificate(lo: &Rational, hi: &Rational, cap: &BigInt) -> Rational {
    let half = ratio(1, 2);
    if simplest_in(lo, hi).denom() <= cap {
        return Rational::zero();
    }
    let mut bound = half;
    for (p, q) in convergents_up_to(lo, cap) {
        // p/q < lo  ⇔  p·den(lo) < num(lo)·q; the scaled gap is q·(num·q − p·den)/den.
        let gap = lo.numer() * &q - &p * lo.denom();
        if gap.is_positive() {
            bound = bound.min(Rational::new(&q * gap, lo.denom().clone()));
        }
    }
    for (p, q) in convergents_up_to(hi, cap) {
        let gap = &p * hi.denom() - hi.numer() * &q;
        if gap.is_positive() {
            bound = bound.min(Rational::new(&q * gap, hi.denom().clone()));
        }
    }
    bound
}

/// Convergent pairs `(p, q)` of both expansions of `x` with `q ≤ cap`.
fn convergents_up_to(x: &Rational, cap: &BigInt) -> Vec<(BigInt, BigInt)> {
    let (a0, digits) = expansion(x);
    let (b0, alt) = alternate_expansion(&a0, &digits);
    let mut out = Vec::new();
    for (head, tail) in [(a0, digits), (b0, alt)] {
        let (mut p, mut p_prev) = (head, BigInt::one());
        let (mut q, mut q_prev) = (BigInt::one(), BigInt::zero());
        out.push((p.clone(), q.clone()));
        for a in &tail {
            (p, p_prev) = (a * &p + &p_prev, p);
            (q, q_prev) = (a * &q + &q_prev, q);
            if &q > cap {
                break;
            }
            out.push((p.clone(), q.clone()));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct WhiteRationalAvoid {
    rule: QCapRule,
    certificates: Vec<Certificate>,
    pub extra_depth: u32,
}

impl WhiteRationalAvoid {
    pub fn new(rule: QCapRule) -> Self {
        WhiteRationalAvoid {
            rule,
            certificates: Vec::new(),
            extra_depth: 3,
        }
    }

    pub fn certificates(&self) -> &[Certificate] {
        &self.certificates
    }

    pub fn rule(&self) -> &QCapRule {
        &self.rule
    }
}

/// Smallest distance from `x` to the sorted set `danger`, `None` when empty.
fn clearance(x: &Rational, danger: &[Rational]) -> Option<Rational> {
    danger.iter().map(|d| (x - d).abs()).min()
}

/// Candidate maximizing clearance; ties go to the smallest candidate.
fn best_center(candidates: &[Rational], danger: &[Rational]) -> Option<Rational> {
    let mut best: Option<(Rational, Option<Rational>)> = None;
    for x in candidates {
        let score = clearance(x, danger);
        let better = match &best {
            None => true,
            Some((bx, bs)) => match (&score, bs) {
                (None, None) => x < bx,
                (None, Some(_)) => true,
                (Some(_), None) => false,
                (Some(s), Some(b)) => s > b || (s == b && x < bx),
            },
        };
        if better {
            best = Some((x.clone(), score));
        }
    }
    best.map(|(x, _)| x)
}

impl Strategy for WhiteRationalAvoid {
    fn name(&self) -> &str {
        "white-rational-avoid"
    }

    fn next_move(&mut self, view: &GameView) -> Result<Ball, StrategyError> {
        if view.config.dim != 1 {
            return Err(StrategyError::new("white-rational-avoid is one-dimensional"));
        }
        let current = view.current();
        let cap = self.rule.cap(&current.radius);
        let (lo, hi) = current.interval();
        let danger = fractions_in(&lo, &hi, &cap);
        let slack = view.center_slack();
        let c = &current.center.0[0];
        let candidates: Vec<Rational> = match legal_support_centers(view, self.extra_depth) {
            Some(points) => points.into_iter().map(|p| p.0[0].clone()).collect(),
            None => {
                let (left, right) = (c - &slack, c + &slack);
                let mut cands = vec![left.clone(), right.clone()];
                for pair in danger.windows(2) {
                    let mid = (&pair[0] + &pair[1]) * ratio(1, 2);
                    if left <= mid && mid <= right {
                        cands.push(mid);
                    }
                }
                cands
            }
        };
        let center = best_center(&candidates, &danger)
            .ok_or_else(|| StrategyError::new("no legal center in the support at this enumeration depth"))?;
        let ball = ball_at(view, Point::scalar(center))?;
        let (wlo, whi) = ball.interval();
        self.certificates.push(Certificate {
            index: view.balls.len(),
            bound: rational_certificate(&wlo, &whi, &cap),
            ball: ball.clone(),
            cap,
        });
        Ok(ball)
    }

    fn params(&self) -> serde_json::Value {
        serde_json::to_value(&self.rule).unwrap_or(serde_json::Value::Null)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Game, GameConfig};
    use crate::rational::int;
    use crate::strategies::Lazy;

    /// Independent brute force over every `q ≤ cap`.
    fn brute_bound(lo: &Rational, hi: &Rational, cap: i64) -> Rational {
        let mut best = ratio(1, 2);
        for q in 1..=cap {
            let qr = int(q);
            let (a, b) = (lo * &qr, hi * &qr);
            if a.ceil() <= b.floor() {
                return Rational::zero();
            }
            best = best.min(&qr * (&a - a.floor())).min(&qr * (b.ceil() - &b));
        }
        best
    }

    #[test]
    fn avoids_half_in_example_ball() {
        let cfg = GameConfig::new(ratio(1, 2), ratio(1, 2), 1).unwrap();
        let balls = [Ball::new(Point::scalar(ratio(1, 2)), ratio(1, 8)).unwrap()];
        let view = GameView {
            config: &cfg,
            balls: &balls,
            support: None,
        };
        let mut white = WhiteRationalAvoid::new(QCapRule::Fixed(2));
        let w = white.next_move(&view).unwrap();
        let d = (&w.center.0[0] - ratio(1, 2)).abs();
        assert!(d >= ratio(1, 16));
        assert_eq!(w.center.0[0], ratio(7, 16));
    }

    #[test]
    fn certificate_matches_brute_force() {
        let cases = [
            (ratio(7, 16), ratio(9, 16), 2),
            (ratio(3, 10), ratio(31, 100), 40),
            (ratio(1, 7), ratio(1, 7), 6),
            (ratio(100, 333), ratio(101, 333), 25),
            (ratio(-3, 5), ratio(-1, 2), 9),
            (ratio(2, 5), ratio(41, 100), 4),
        ];
        for (lo, hi, cap) in cases {
            assert_eq!(
                rational_certificate(&lo, &hi, &BigInt::from(cap)),
                brute_bound(&lo, &hi, cap),
                "{lo} {hi} {cap}"
            );
        }
    }

    #[test]
    fn caps_grow_like_inverse_root() {
        let rule = QCapRule::default();
        assert_eq!(rule.cap(&int(1)), BigInt::one());
        assert_eq!(rule.cap(&ratio(1, 1 << 20)), BigInt::from(256));
        assert_eq!(rule.cap(&ratio(1, 1 << 22)), BigInt::from(512));
    }

    #[test]
    fn lazy_black_outcome_avoids_small_denominators() {
        let game = Game::new(GameConfig::new(ratio(1, 2), ratio(1, 2), 1).unwrap()).unwrap();
        let start = Ball::new(Point::scalar(ratio(1, 2)), ratio(1, 2)).unwrap();
        let mut white = WhiteRationalAvoid::new(QCapRule::default());
        let t = game.play(&mut white, &mut Lazy, start, 60).unwrap();
        assert!(t.is_legal());
        let last = crate::game::limit_enclosure(&t).unwrap();
        let (lo, hi) = last.interval();
        assert!(brute_bound(&lo, &hi, 100) > Rational::zero());
    }
}
