//! Schmidt's game with exact rational arithmetic, badly approximable linear
//! forms, continued-fraction cylinders, self-similar sets and the measures
//! they carry.

pub mod cli;
pub mod continued_fractions;
pub mod farey;
pub mod fractal_ifs;
pub mod friendly_measures;
pub mod game;
pub mod linear_forms;
pub mod rational;
pub mod strategies;
pub mod svg;

pub use rational::Rational;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Game(#[from] game::GameError),
    #[error(transparent)]
    Strategy(#[from] strategies::StrategyError),
    #[error(transparent)]
    LinearForms(#[from] linear_forms::LinearFormsError),
    #[error(transparent)]
    ContinuedFraction(#[from] continued_fractions::CfError),
    #[error(transparent)]
    Ifs(#[from] fractal_ifs::IfsError),
    #[error(transparent)]
    Measure(#[from] friendly_measures::MeasureError),
    #[error(transparent)]
    Rational(#[from] rational::ParseRationalError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}
