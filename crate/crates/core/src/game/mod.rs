//! Rules, legality and execution of the (α, β)-game.
//!
//! Board objects are closed Euclidean balls with exact rational centers and
//! radii. A game optionally carries a [`SupportOracle`]; when it does, every
//! center either player picks must lie in the support (the 𝒦-variant).

mod support;

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::{self, dist_sq, Rational};
use crate::strategies::{Strategy, StrategyError};

pub use support::{resolve_support, IfsSupport, Membership, SupportOracle, SUPPORT_IDS};

/// Depth handed to [`SupportOracle::contains`] when checking legality.
pub const MEMBERSHIP_DEPTH: u32 = 2048;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GameError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("radius must be positive")]
    NonPositiveRadius,
    #[error("invalid game parameters: {0}")]
    InvalidConfig(String),
    #[error("unknown support `{0}`")]
    UnknownSupport(String),
    #[error("initial ball rejected: {0}")]
    InitialBall(String),
    #[error("illegal transcript: {0}")]
    IllegalTranscript(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(pub Vec<Rational>);

impl Point {
    pub fn new(coords: Vec<Rational>) -> Self {
        Point(coords)
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![Rational::zero(); dim])
    }

    pub fn scalar(x: Rational) -> Self {
        Point(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rational::to_f64).collect()
    }

    pub fn dist_sq(&self, other: &Point) -> Rational {
        dist_sq(&self.0, &other.0)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", rational::Fraction(c))?;
        }
        write!(f, ")")
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        rational::serde_vec::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        rational::serde_vec::deserialize(d).map(Point)
    }
}

/// Closed Euclidean ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    #[serde(with = "rational::serde_str")]
    pub radius: Rational,
}

impl Ball {
    pub fn new(center: Point, radius: Rational) -> Result<Self, GameError> {
        if !radius.is_positive() {
            return Err(GameError::NonPositiveRadius);
        }
        Ok(Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Closed-ball membership, exact.
    pub fn contains_point(&self, p: &Point) -> bool {
        p.dim() == self.dim() && self.center.dist_sq(p) <= &self.radius * &self.radius
    }

    /// `[c - r, c + r]` for one-dimensional balls.
    pub fn interval(&self) -> (Rational, Rational) {
        let c = &self.center.0[0];
        (c - &self.radius, c + &self.radius)
    }
}

/// `inner ⊆ outer` for closed Euclidean balls:
/// `|c_in − c_out|² ≤ (r_out − r_in)²` and `r_in ≤ r_out`.
pub fn validate_containment(inner: &Ball, outer: &Ball) -> Result<bool, GameError> {
    if inner.dim() != outer.dim() {
        return Err(GameError::DimensionMismatch {
            expected: outer.dim(),
            got: inner.dim(),
        });
    }
    if inner.radius > outer.radius {
        return Ok(false);
    }
    let slack = &outer.radius - &inner.radius;
    Ok(inner.center.dist_sq(&outer.center) <= &slack * &slack)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    White,
    Black,
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::White => write!(f, "white"),
            Player::Black => write!(f, "black"),
        }
    }
}

/// Parameters of one game.
///
/// `rho`, when set, pins the first radius Black chooses; the badness
/// constants White can guarantee depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    #[serde(with = "rational::serde_str")]
    pub alpha: Rational,
    #[serde(with = "rational::serde_str")]
    pub beta: Rational,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<String>,
    pub max_rounds: u32,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub rho: Option<Rational>,
}

mod opt_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&rational::format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let raw = Option::<String>::deserialize(d)?;
        raw.map(|s| rational::parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

impl GameConfig {
    pub fn new(alpha: Rational, beta: Rational, dim: usize) -> Result<Self, GameError> {
        let cfg = GameConfig {
            alpha,
            beta,
            dim,
            support: None,
            max_rounds: 1 << 16,
            rho: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_support(mut self, id: impl Into<String>) -> Self {
        self.support = Some(id.into());
        self
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let unit = |x: &Rational| x.is_positive() && x < &Rational::one();
        if !unit(&self.alpha) {
            return Err(GameError::InvalidConfig("alpha must lie in (0, 1)".into()));
        }
        if !unit(&self.beta) {
            return Err(GameError::InvalidConfig("beta must lie in (0, 1)".into()));
        }
        if self.dim == 0 {
            return Err(GameError::InvalidConfig("dimension must be positive".into()));
        }
        if self.max_rounds == 0 {
            return Err(GameError::InvalidConfig("max_rounds must be positive".into()));
        }
        if let Some(rho) = &self.rho {
            if !rho.is_positive() {
                return Err(GameError::InvalidConfig("rho must be positive".into()));
            }
        }
        Ok(())
    }

    /// Radius factor applied by `mover` to the previous ball.
    pub fn factor(&self, mover: Player) -> &Rational {
        match mover {
            Player::White => &self.alpha,
            Player::Black => &self.beta,
        }
    }
}

/// Who places `balls[index]`: Black opens with `U(0)`, then White and Black alternate.
pub fn mover_at(index: usize) -> Player {
    if index % 2 == 1 {
        Player::White
    } else {
        Player::Black
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IllegalMove {
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("wrong radius: expected {expected}, got {got}")]
    WrongRadius { expected: String, got: String },
    #[error("center {0} lies outside the support")]
    OutsideSupport(String),
    #[error("support membership of center {0} could not be decided")]
    SupportUndetermined(String),
    #[error("proposed ball is not contained in the previous ball")]
    NotContained,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Forfeit {
    pub player: Player,
    /// Index into `balls` of the offending move, when a ball was produced.
    pub index: usize,
    pub reason: String,
}

/// Alternating record `U(0), W(0), U(1), …` with one legality flag per ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub config: GameConfig,
    pub balls: Vec<Ball>,
    pub legality: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forfeit: Option<Forfeit>,
}

impl Transcript {
    /// Black's balls `U(0), U(1), …`.
    pub fn black_balls(&self) -> impl Iterator<Item = &Ball> {
        self.balls.iter().step_by(2)
    }

    pub fn white_balls(&self) -> impl Iterator<Item = &Ball> {
        self.balls.iter().skip(1).step_by(2)
    }

    pub fn is_legal(&self) -> bool {
        self.forfeit.is_none() && self.legality.iter().all(|&ok| ok)
    }

    /// Completed rounds (pairs `W(k), U(k+1)`).
    pub fn rounds(&self) -> usize {
        self.balls.len().saturating_sub(1) / 2
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// What a strategy sees when asked for its next move.
pub struct GameView<'a> {
    pub config: &'a GameConfig,
    pub balls: &'a [Ball],
    pub support: Option<&'a dyn SupportOracle>,
}

impl GameView<'_> {
    pub fn mover(&self) -> Player {
        mover_at(self.balls.len())
    }

    pub fn current(&self) -> &Ball {
        self.balls.last().expect("game view always holds U(0)")
    }

    pub fn required_radius(&self) -> Rational {
        &self.current().radius * self.config.factor(self.mover())
    }

    /// Index `k` of the ball about to be played (`W(k)` or `U(k)`).
    pub fn round(&self) -> usize {
        self.balls.len() / 2
    }

    /// Radius of the legal-center region: centers may move by at most
    /// `ρ(previous) − ρ(proposed)`.
    pub fn center_slack(&self) -> Rational {
        &self.current().radius - self.required_radius()
    }
}

/// A configured game: parameters plus a resolved support oracle.
pub struct Game {
    config: GameConfig,
    support: Option<Box<dyn SupportOracle>>,
    membership_depth: u32,
}

impl fmt::Debug for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Game")
            .field("config", &self.config)
            .field("support", &self.support.as_ref().map(|s| s.id().to_string()))
            .finish()
    }
}

impl Game {
    /// Resolves `config.support` through the preset registry.
    pub fn new(config: GameConfig) -> Result<Self, GameError> {
        config.validate()?;
        let support = match &config.support {
            Some(id) => Some(resolve_support(id)?),
            None => None,
        };
        if let Some(s) = &support {
            if s.dim() != config.dim {
                return Err(GameError::DimensionMismatch {
                    expected: config.dim,
                    got: s.dim(),
                });
            }
        }
        Ok(Game {
            config,
            support,
            membership_depth: MEMBERSHIP_DEPTH,
        })
    }

    pub fn with_support(mut config: GameConfig, support: Box<dyn SupportOracle>) -> Result<Self, GameError> {
        config.support = Some(support.id().to_string());
        config.validate()?;
        if support.dim() != config.dim {
            return Err(GameError::DimensionMismatch {
                expected: config.dim,
                got: support.dim(),
            });
        }
        Ok(Game {
            config,
            support: Some(support),
            membership_depth: MEMBERSHIP_DEPTH,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn support(&self) -> Option<&dyn SupportOracle> {
        self.support.as_deref()
    }

    fn check_center(&self, center: &Point) -> Result<(), IllegalMove> {
        if let Some(s) = &self.support {
            match s.contains(center, self.membership_depth) {
                Membership::In => {}
                Membership::Out => return Err(IllegalMove::OutsideSupport(center.to_string())),
                Membership::Unresolved => {
                    return Err(IllegalMove::SupportUndetermined(center.to_string()))
                }
            }
        }
        Ok(())
    }

    /// Full legality check with a diagnostic.
    pub fn check_move(&self, previous: &Ball, proposed: &Ball, mover: Player) -> Result<(), IllegalMove> {
        if proposed.dim() != self.config.dim || previous.dim() != self.config.dim {
            return Err(IllegalMove::DimensionMismatch);
        }
        let expected = &previous.radius * self.config.factor(mover);
        if proposed.radius != expected {
            return Err(IllegalMove::WrongRadius {
                expected: rational::format_rational(&expected),
                got: rational::format_rational(&proposed.radius),
            });
        }
        match validate_containment(proposed, previous) {
            Ok(true) => {}
            Ok(false) => return Err(IllegalMove::NotContained),
            Err(_) => return Err(IllegalMove::DimensionMismatch),
        }
        self.check_center(&proposed.center)
    }

    pub fn legal_move(&self, previous: &Ball, proposed: &Ball, mover: Player) -> bool {
        self.check_move(previous, proposed, mover).is_ok()
    }

    fn check_initial(&self, initial: &Ball) -> Result<(), GameError> {
        if initial.dim() != self.config.dim {
            return Err(GameError::DimensionMismatch {
                expected: self.config.dim,
                got: initial.dim(),
            });
        }
        if !initial.radius.is_positive() {
            return Err(GameError::NonPositiveRadius);
        }
        if let Some(rho) = &self.config.rho {
            if &initial.radius != rho {
                return Err(GameError::InitialBall(format!(
                    "radius {} differs from configured rho {}",
                    rational::format_rational(&initial.radius),
                    rational::format_rational(rho)
                )));
            }
        }
        if let Some(s) = &self.support {
            self.check_center(&initial.center)
                .map_err(|e| GameError::InitialBall(e.to_string()))?;
            let r2 = &initial.radius * &initial.radius;
            if r2 > s.diameter_sq() {
                return Err(GameError::InitialBall(
                    "radius exceeds the diameter of the support".into(),
                ));
            }
        }
        Ok(())
    }

    /// Plays `rounds` rounds. An illegal move or a strategy failure ends the
    /// game early with the offender recorded in [`Transcript::forfeit`].
    pub fn play(
        &self,
        white: &mut dyn Strategy,
        black: &mut dyn Strategy,
        initial: Ball,
        rounds: u32,
    ) -> Result<Transcript, GameError> {
        self.check_initial(&initial)?;
        if rounds > self.config.max_rounds {
            return Err(GameError::InvalidConfig(format!(
                "{rounds} rounds exceeds max_rounds {}",
                self.config.max_rounds
            )));
        }
        let mut balls = vec![initial];
        let mut legality = vec![true];
        let mut forfeit = None;
        'game: for _ in 0..rounds {
            for _ in 0..2 {
                let mover = mover_at(balls.len());
                let view = GameView {
                    config: &self.config,
                    balls: &balls,
                    support: self.support(),
                };
                let strategy: &mut dyn Strategy = match mover {
                    Player::White => white,
                    Player::Black => black,
                };
                let proposed = match strategy.next_move(&view) {
                    Ok(ball) => ball,
                    Err(StrategyError(reason)) => {
                        forfeit = Some(Forfeit {
                            player: mover,
                            index: balls.len(),
                            reason,
                        });
                        break 'game;
                    }
                };
                let previous = balls.last().expect("nonempty");
                let verdict = self.check_move(previous, &proposed, mover);
                let ok = verdict.is_ok();
                balls.push(proposed);
                legality.push(ok);
                if let Err(reason) = verdict {
                    forfeit = Some(Forfeit {
                        player: mover,
                        index: balls.len() - 1,
                        reason: reason.to_string(),
                    });
                    break 'game;
                }
            }
        }
        Ok(Transcript {
            config: self.config.clone(),
            balls,
            legality,
            forfeit,
        })
    }

    /// Re-checks every invariant of a (possibly deserialized) transcript:
    /// nesting, the exact radius law, support membership and the flags.
    pub fn verify(&self, t: &Transcript) -> Result<(), GameError> {
        if t.balls.is_empty() {
            return Err(GameError::IllegalTranscript("no balls".into()));
        }
        if t.balls.len() != t.legality.len() {
            return Err(GameError::IllegalTranscript("one legality flag per ball required".into()));
        }
        if t.config != self.config {
            return Err(GameError::IllegalTranscript("config mismatch".into()));
        }
        self.check_initial(&t.balls[0])?;
        for (i, pair) in t.balls.windows(2).enumerate() {
            let index = i + 1;
            let verdict = self.check_move(&pair[0], &pair[1], mover_at(index));
            if verdict.is_ok() != t.legality[index] {
                return Err(GameError::IllegalTranscript(format!(
                    "legality flag {index} disagrees with the rules"
                )));
            }
            if let Err(reason) = verdict {
                if index + 1 != t.balls.len() {
                    return Err(GameError::IllegalTranscript(format!(
                        "play continued after illegal move {index}: {reason}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Innermost ball of a legal transcript; it contains the game's limit point.
pub fn limit_enclosure(t: &Transcript) -> Result<Ball, GameError> {
    if !t.is_legal() {
        return Err(GameError::IllegalTranscript(match &t.forfeit {
            Some(f) => format!("{} forfeited at move {}: {}", f.player, f.index, f.reason),
            None => "transcript contains an illegal move".into(),
        }));
    }
    t.balls
        .last()
        .cloned()
        .ok_or_else(|| GameError::IllegalTranscript("no balls".into()))
}

/// `ρ(U(0))·(αβ)^k·(α or 1)` for ball index `index`.
pub fn expected_radius(cfg: &GameConfig, initial_radius: &Rational, index: usize) -> Rational {
    let ab = &cfg.alpha * &cfg.beta;
    let k = (index / 2) as u32;
    let base = initial_radius * rational::pow(&ab, k);
    if index % 2 == 1 {
        base * &cfg.alpha
    } else {
        base
    }
}
