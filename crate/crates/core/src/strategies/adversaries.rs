//! Baseline and adversarial strategies.

use num_bigint::BigInt;
use num_traits::Signed;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{ball_at, legal_support_centers, Strategy, StrategyError};
use crate::farey::simplest_in;
use crate::game::{Ball, GameView, Point};
use crate::rational::{self, Rational};

/// Resolution of random offsets: `2^-RANDOM_BITS` of the slack.
const RANDOM_BITS: u32 = 20;

/// Uniformly random legal move, with a bias toward the edge of the legal region.
///
/// Without a support the center is `c + slack·u/⌈√d⌉` for a dyadic `u ∈ [-1, 1]^d`.
#[derive(Debug, Clone)]
pub struct RandomLegal {
    rng: ChaCha8Rng,
    /// Probability of picking an extreme center.
    pub edge_bias: f64,
    pub extra_depth: u32,
}

impl RandomLegal {
    pub fn new(rng: ChaCha8Rng) -> Self {
        RandomLegal {
            rng,
            edge_bias: 0.25,
            extra_depth: 3,
        }
    }
}

impl Strategy for RandomLegal {
    fn name(&self) -> &str {
        "random"
    }

    fn next_move(&mut self, view: &GameView) -> Result<Ball, StrategyError> {
        if let Some(centers) = legal_support_centers(view, self.extra_depth) {
            if centers.is_empty() {
                return Err(StrategyError::new("no support point in the legal region"));
            }
            let pick = if self.rng.random_bool(self.edge_bias) {
                if self.rng.random_bool(0.5) {
                    centers.len() - 1
                } else {
                    0
                }
            } else {
                self.rng.random_range(0..centers.len())
            };
            return ball_at(view, centers[pick].clone());
        }
        let d = view.config.dim;
        let slack = view.center_slack();
        let root = Rational::from_integer(BigInt::from((d as f64).sqrt().ceil() as u64));
        let unit = 1i64 << RANDOM_BITS;
        let edge = self.rng.random_bool(self.edge_bias);
        let coords = view
            .current()
            .center
            .coords()
            .iter()
            .map(|c| {
                let k = if edge {
                    if self.rng.random_bool(0.5) {
                        unit
                    } else {
                        -unit
                    }
                } else {
                    self.rng.random_range(-unit..=unit)
                };
                c + &slack * rational::ratio(k, unit) / &root
            })
            .collect();
        ball_at(view, Point::new(coords))
    }
}

/// Moves toward a fixed target as far as the rules allow.
#[derive(Debug, Clone)]
pub struct BlackTarget {
    target: Point,
}

impl BlackTarget {
    pub fn new(target: Point) -> Self {
        BlackTarget { target }
    }
}

/// Closest point to `target` in `B(center, slack)`. Exact in one dimension; in
/// higher dimensions the step is shortened slightly so the result stays rational.
pub(crate) fn step_toward(center: &Point, target: &Point, slack: &Rational) -> Point {
    let dist_sq = center.dist_sq(target);
    if dist_sq <= slack * slack {
        return target.clone();
    }
    if center.dim() == 1 {
        let (c, t) = (&center.0[0], &target.0[0]);
        return Point::scalar(if t > c { c + slack } else { c - slack });
    }
    let (_, dist_hi) = rational::sqrt_bracket(&dist_sq);
    let s = slack / dist_hi;
    Point::new(
        center
            .coords()
            .iter()
            .zip(target.coords())
            .map(|(c, t)| c + (t - c) * &s)
            .collect(),
    )
}

impl Strategy for BlackTarget {
    fn name(&self) -> &str {
        "black-target"
    }

    fn next_move(&mut self, view: &GameView) -> Result<Ball, StrategyError> {
        if self.target.dim() != view.config.dim {
            return Err(StrategyError::new("target dimension mismatch"));
        }
        if let Some(centers) = legal_support_centers(view, 2) {
            // Enumeration is sorted, so the first minimizer is the smallest.
            let best = centers
                .into_iter()
                .min_by(|a, b| a.dist_sq(&self.target).cmp(&b.dist_sq(&self.target)))
                .ok_or_else(|| StrategyError::new("no support point in the legal region"))?;
            return ball_at(view, best);
        }
        let center = step_toward(&view.current().center, &self.target, &view.center_slack());
        ball_at(view, center)
    }

    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "target": self.target })
    }
}

/// One-dimensional Black that steers toward the simplest fraction it can reach,
/// trying to trap the outcome on a rational.
#[derive(Debug, Clone, Default)]
pub struct BlackChaseRationals;

impl Strategy for BlackChaseRationals {
    fn name(&self) -> &str {
        "black-chase-rationals"
    }

    fn next_move(&mut self, view: &GameView) -> Result<Ball, StrategyError> {
        if view.config.dim != 1 {
            return Err(StrategyError::new("black-chase-rationals is one-dimensional"));
        }
        let current = view.current();
        let slack = view.center_slack();
        let (lo, hi) = current.interval();
        // Prefer a fraction inside the current ball; aim at it from the legal region.
        let goal = simplest_in(&lo, &hi);
        let center = step_toward(&current.center, &Point::scalar(goal), &slack);
        debug_assert!((&center.0[0] - &current.center.0[0]).abs() <= slack);
        ball_at(view, center)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Game, GameConfig, Player};
    use crate::rational::{int, ratio};
    use rand::SeedableRng;

    fn view<'a>(cfg: &'a GameConfig, balls: &'a [Ball]) -> GameView<'a> {
        GameView {
            config: cfg,
            balls,
            support: None,
        }
    }

    #[test]
    fn target_step_examples() {
        let cfg = GameConfig::new(ratio(1, 2), ratio(1, 2), 1).unwrap();
        // Two balls so that Black is to move.
        let balls = [
            Ball::new(Point::scalar(int(1)), int(2)).unwrap(),
            Ball::new(Point::scalar(int(1)), int(1)).unwrap(),
        ];
        let mut black = BlackTarget::new(Point::scalar(int(0)));
        let next = black.next_move(&view(&cfg, &balls)).unwrap();
        assert_eq!(next.center, Point::scalar(ratio(1, 2)));
        let mut lazy = BlackTarget::new(Point::scalar(int(1)));
        assert_eq!(lazy.next_move(&view(&cfg, &balls)).unwrap().center, Point::scalar(int(1)));
    }

    #[test]
    fn two_dimensional_step_stays_legal() {
        let c = Point::new(vec![int(0), int(0)]);
        let t = Point::new(vec![int(3), int(4)]);
        let p = step_toward(&c, &t, &int(1));
        assert!(p.dist_sq(&c) <= int(1));
        assert!(rational::to_f64(&p.dist_sq(&c)) > 0.999_999);
    }

    #[test]
    fn random_and_chaser_play_legally() {
        let game = Game::new(GameConfig::new(ratio(1, 2), ratio(2, 3), 1).unwrap()).unwrap();
        let start = Ball::new(Point::scalar(ratio(1, 2)), ratio(1, 2)).unwrap();
        let mut white = RandomLegal::new(ChaCha8Rng::seed_from_u64(3));
        let mut black = BlackChaseRationals;
        let t = game.play(&mut white, &mut black, start, 30).unwrap();
        assert!(t.is_legal(), "{:?}", t.forfeit);
        game.verify(&t).unwrap();
        assert_eq!(crate::game::mover_at(1), Player::White);
    }
}
