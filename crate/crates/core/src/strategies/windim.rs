use num_traits::One;

use super::{ball_at, Strategy, StrategyError};
use crate::game::{Ball, GameConfig, GameError, GameView, Point};
use crate::rational::{int, inv_pow, Rational};

/// Parameters of the Cantor-set game in which Black pins the outcome to 0.
///
/// `α = 1/3 + 3^{-N}` and `β = 1/(3^{N-1} + 1)`, so `αβ = 3^{-N}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindimParams {
    pub n: u32,
}

impl WindimParams {
    pub fn new(n: u32) -> Result<Self, GameError> {
        if n == 0 {
            return Err(GameError::InvalidConfig("N must be positive".into()));
        }
        Ok(WindimParams { n })
    }

    pub fn alpha(&self) -> Rational {
        inv_pow(3, 1) + inv_pow(3, self.n)
    }

    pub fn beta(&self) -> Rational {
        Rational::one() / (Rational::one() / inv_pow(3, self.n - 1) + int(1))
    }

    pub fn config(&self, max_rounds: u32) -> GameConfig {
        let mut cfg = GameConfig::new(self.alpha(), self.beta(), 1)
            .expect("windim parameters lie in (0, 1)")
            .with_support("cantor");
        cfg.max_rounds = max_rounds;
        cfg.rho = Some(Rational::one());
        cfg
    }

    /// `U(0) = B(0, 1)`.
    pub fn initial_ball(&self) -> Ball {
        Ball::new(Point::origin(1), Rational::one()).expect("unit ball")
    }

    /// `ρ(U(k)) = 3^{-Nk}`.
    pub fn black_radius(&self, k: u32) -> Rational {
        inv_pow(3, self.n * k)
    }

    /// `ρ(W(k)) = 3^{-(Nk+1)} + 3^{-N(k+1)}`.
    pub fn white_radius(&self, k: u32) -> Rational {
        inv_pow(3, self.n * k + 1) + inv_pow(3, self.n * (k + 1))
    }

    /// Rightmost center White can use in round `k`: `3^{-(Nk+1)}`.
    pub fn rightmost_white_center(&self, k: u32) -> Rational {
        inv_pow(3, self.n * k + 1)
    }
}

/// Black always recenters at 0.
#[derive(Debug, Clone)]
pub struct BlackCantorZero {
    params: WindimParams,
}

impl BlackCantorZero {
    pub fn new(params: WindimParams) -> Self {
        BlackCantorZero { params }
    }
}

impl Strategy for BlackCantorZero {
    fn name(&self) -> &str {
        "black-cantor-zero"
    }

    fn next_move(&mut self, view: &GameView) -> Result<Ball, StrategyError> {
        ball_at(view, Point::origin(view.config.dim))
    }

    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "N": self.params.n })
    }
}
