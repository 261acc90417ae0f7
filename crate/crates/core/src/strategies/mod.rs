//! Move-producing strategies for both players.

mod adversaries;
mod avoid;
mod gradient;
mod windim;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::game::{Ball, GameView, Point};
use crate::rational::Rational;

pub use adversaries::{BlackChaseRationals, BlackTarget, RandomLegal};
pub use avoid::{rational_certificate, Certificate, QCapRule, WhiteRationalAvoid};
pub use gradient::{find_good_point, GradientPushParams, PushEvent, PushEventKind, WhiteGradientPush};
pub use windim::{BlackCantorZero, WindimParams};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct StrategyError(pub String);

impl StrategyError {
    pub fn new(msg: impl Into<String>) -> Self {
        StrategyError(msg.into())
    }
}

/// A player's rule for choosing the next ball.
pub trait Strategy {
    fn name(&self) -> &str;

    /// Next ball for the player whose turn it is in `view`.
    fn next_move(&mut self, view: &GameView) -> Result<Ball, StrategyError>;

    fn params(&self) -> serde_json::Value {
        serde_json::Value::Null
    }
}

/// Ball with the mover's required radius about `center`.
pub(crate) fn ball_at(view: &GameView, center: Point) -> Result<Ball, StrategyError> {
    Ball::new(center, view.required_radius()).map_err(|e| StrategyError::new(e.to_string()))
}

/// Support points that are legal centers for the mover, or `None` without a support.
pub(crate) fn legal_support_centers(view: &GameView, extra_depth: u32) -> Option<Vec<Point>> {
    let support = view.support?;
    let slack = view.center_slack();
    let current = view.current();
    if slack <= Rational::from_integer(0.into()) {
        return Some(vec![current.center.clone()]);
    }
    let region = Ball::new(current.center.clone(), slack.clone()).expect("positive slack");
    let depth = support.depth_for_radius(&slack) + extra_depth;
    Some(support.enumerate_in_ball(&region, depth))
}

/// Recenters on the previous center every turn.
#[derive(Debug, Clone, Default)]
pub struct Lazy;

impl Strategy for Lazy {
    fn name(&self) -> &str {
        "lazy"
    }

    fn next_move(&mut self, view: &GameView) -> Result<Ball, StrategyError> {
        ball_at(view, view.current().center.clone())
    }
}

pub const STRATEGY_NAMES: [&str; 7] = [
    "lazy",
    "random",
    "black-cantor-zero",
    "black-target",
    "black-chase-rationals",
    "white-rational-avoid",
    "white-gradient-push",
];

fn param<T: serde::de::DeserializeOwned>(params: &serde_json::Value, key: &str) -> Result<Option<T>, StrategyError> {
    match params.get(key) {
        None | Some(serde_json::Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| StrategyError::new(format!("parameter `{key}`: {e}"))),
    }
}

/// Builds a strategy from its name and a JSON parameter record.
pub fn by_name(name: &str, params: &serde_json::Value, seed: u64) -> Result<Box<dyn Strategy>, StrategyError> {
    let rational = |key: &str| -> Result<Option<Rational>, StrategyError> {
        param::<String>(params, key)?
            .map(|s| crate::rational::parse_rational(&s).map_err(|e| StrategyError::new(e.to_string())))
            .transpose()
    };
    match name {
        "lazy" => Ok(Box::new(Lazy)),
        "random" => Ok(Box::new(RandomLegal::new(ChaCha8Rng::seed_from_u64(seed)))),
        "black-cantor-zero" => {
            let n = param::<u32>(params, "N")?.unwrap_or(1);
            Ok(Box::new(BlackCantorZero::new(WindimParams::new(n).map_err(|e| StrategyError::new(e.to_string()))?)))
        }
        "black-target" => {
            let target: Vec<String> = param(params, "target")?.ok_or_else(|| StrategyError::new("black-target needs `target`"))?;
            let coords = target
                .iter()
                .map(|s| crate::rational::parse_rational(s).map_err(|e| StrategyError::new(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Box::new(BlackTarget::new(Point::new(coords))))
        }
        "black-chase-rationals" => Ok(Box::new(BlackChaseRationals)),
        "white-rational-avoid" => {
            let scale = rational("cap_scale")?;
            let rule = match param::<u64>(params, "fixed_cap")? {
                Some(cap) => QCapRule::Fixed(cap),
                None => QCapRule::Sqrt {
                    scale: scale.unwrap_or_else(|| crate::rational::ratio(1, 4)),
                },
            };
            Ok(Box::new(WhiteRationalAvoid::new(rule)))
        }
        "white-gradient-push" => {
            let p: GradientPushParams = serde_json::from_value(params.clone())
                .map_err(|e| StrategyError::new(format!("gradient-push parameters: {e}")))?;
            Ok(Box::new(WhiteGradientPush::new(p)?))
        }
        other => Err(StrategyError::new(format!("unknown strategy `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Game, GameConfig};
    use crate::rational::{int, ratio};

    #[test]
    fn lazy_game_is_concentric() {
        let game = Game::new(GameConfig::new(ratio(1, 2), ratio(1, 2), 1).unwrap()).unwrap();
        let start = Ball::new(Point::scalar(ratio(1, 3)), int(1)).unwrap();
        let t = game.play(&mut Lazy, &mut Lazy, start.clone(), 10).unwrap();
        assert!(t.is_legal());
        assert_eq!(t.balls.len(), 21);
        assert!(t.balls.iter().all(|b| b.center == start.center));
        let last = crate::game::limit_enclosure(&t).unwrap();
        assert_eq!(last.radius, ratio(1, 1 << 20));
        assert!(t.balls.iter().all(|b| b.contains_point(&last.center)));
    }

    #[test]
    fn registry_knows_every_name() {
        let params = serde_json::json!({"target": ["0"], "N": 1});
        for name in STRATEGY_NAMES {
            if name == "white-gradient-push" {
                continue;
            }
            assert!(by_name(name, &params, 7).is_ok(), "{name}");
        }
        assert!(by_name("nobody", &params, 0).is_err());
    }
}
