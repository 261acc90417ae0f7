//! White strategy pushing `|D_ν|` away from zero one stage at a time.
//!
//! The game is played on `ℝ^H`, a point being a matrix `(γ_ij)` in row-major
//! order. Stage `ν` waits for a Black ball `U(j_ν)` below a radius threshold,
//! then moves the center along `±∇D_ν` and, on a support, settles on a sampled
//! point where `|D_ν|` stays large.

use serde::{Deserialize, Serialize};

use super::adversaries::step_toward;
use super::{ball_at, Strategy, StrategyError};
use crate::game::{Ball, GameView, Player, Point, SupportOracle};
use crate::linear_forms::{
    self, ball_grid, check_orthonormal, d_nu_indexed, grad_d_nu_indexed, minor_sup_on_ball, RealMatrix, TheoremConstants,
};
use crate::rational::{self, Rational};

/// Below this gradient norm the push is skipped and White plays lazily.
pub const DEGENERATE_GRADIENT: f64 = 1e-12;

fn default_grid_depth() -> u32 {
    2
}

fn default_support_depth() -> u32 {
    4
}

fn default_theta() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientPushParams {
    pub psi: f64,
    pub epsilon0: f64,
    pub alpha1: f64,
    /// `μ_0`; defaults to `1/(2ψ)`.
    #[serde(default)]
    pub mu0: Option<f64>,
    /// Explicit `μ_1, …, μ_N`; otherwise `μ_ν = √α₁·K_{ν-1}`.
    #[serde(default)]
    pub mu_schedule: Option<Vec<f64>>,
    #[serde(default)]
    pub r: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3_min: Option<f64>,
    pub c4: Option<f64>,
    /// Orthonormal `Y_1, …, Y_N` in `ℝ^L`.
    pub ys: Vec<Vec<f64>>,
    #[serde(default = "default_grid_depth")]
    pub grid_depth: u32,
    /// Enumeration depth added on top of the support's natural depth.
    #[serde(default = "default_support_depth")]
    pub support_depth: u32,
    #[serde(default = "default_theta")]
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PushEventKind {
    /// `U(i_ν)` reached: first Black ball with `ρ < μ_ν ρ_0`.
    StageClosed { rho: f64 },
    /// `U(j_ν)` reached.
    Threshold { rho: f64, k: f64, mu: f64 },
    /// Every sampled `|M⃗_ν|` already clears the stage bound.
    Trivial { min_sample: f64, threshold: f64 },
    Push {
        rows: Vec<usize>,
        cols: Vec<usize>,
        sign: i8,
        grad_norm: f64,
        /// `|D_ν(A_M)|`.
        pushed_value: f64,
        /// `(15/32)·C₄·ρ(U(j_ν))·M̂_{ν-1}`.
        bound: f64,
        holds: bool,
        /// `|D_ν|` at the center actually played.
        played_value: f64,
    },
    Degenerate { grad_norm: f64 },
    Finished,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PushEvent {
    /// Index of the Black ball White is answering.
    pub index: usize,
    pub nu: usize,
    #[serde(flatten)]
    pub kind: PushEventKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    /// Waiting for `U(i_{ν-1})`.
    Close,
    /// Waiting for `U(j_ν)`.
    Threshold,
    Done,
}

#[derive(Debug, Clone)]
pub struct WhiteGradientPush {
    params: GradientPushParams,
    constants: TheoremConstants,
    m: usize,
    n: usize,
    nu: usize,
    phase: Phase,
    rho0: Option<f64>,
    /// `μ_ν` of the stage being closed.
    mu_closing: f64,
    rho_closed: f64,
    events: Vec<PushEvent>,
}

impl WhiteGradientPush {
    pub fn new(params: GradientPushParams) -> Result<Self, StrategyError> {
        let err = |e: linear_forms::LinearFormsError| StrategyError::new(e.to_string());
        let n = params.ys.len();
        let l = params.ys.first().map_or(0, Vec::len);
        if n == 0 || l <= n {
            return Err(StrategyError::new("need N ≥ 1 frame vectors in ℝ^L with L > N"));
        }
        check_orthonormal(&params.ys, l).map_err(err)?;
        let m = l - n;
        let mut constants = TheoremConstants::new(m, n, params.psi, params.epsilon0).map_err(err)?;
        let missing = [("c1", params.c1), ("c2", params.c2), ("c3_min", params.c3_min), ("c4", params.c4)]
            .iter()
            .filter(|(_, v)| v.is_none_or(|x| !(x > 0.0)))
            .map(|(k, _)| *k)
            .collect::<Vec<_>>();
        if !missing.is_empty() {
            return Err(StrategyError::new(format!("missing or non-positive constants: {}", missing.join(", "))));
        }
        constants.alpha1 = Some(params.alpha1);
        constants.c1 = params.c1;
        constants.c2 = params.c2;
        constants.c3_min = params.c3_min;
        constants.c4 = params.c4;
        constants.validate_alpha1().map_err(err)?;
        if !(params.theta > 0.0 && params.theta <= 1.0) {
            return Err(StrategyError::new("theta must lie in (0, 1]"));
        }
        if let Some(s) = &params.mu_schedule {
            if s.len() < n || s.iter().any(|&v| !(v > 0.0)) {
                return Err(StrategyError::new("mu_schedule needs N positive values"));
            }
        }
        let mu0 = params.mu0.unwrap_or(0.5 / params.psi);
        if !(mu0 > 0.0 && mu0 < 1.0 / params.psi) {
            return Err(StrategyError::new("μ_0 must lie in (0, 1/ψ)"));
        }
        Ok(WhiteGradientPush {
            params,
            constants,
            m,
            n,
            nu: 1,
            phase: Phase::Close,
            rho0: None,
            mu_closing: mu0,
            rho_closed: 0.0,
            events: Vec::new(),
        })
    }

    pub fn events(&self) -> &[PushEvent] {
        &self.events
    }

    pub fn constants(&self) -> &TheoremConstants {
        &self.constants
    }

    fn log(&mut self, index: usize, kind: PushEventKind) {
        self.events.push(PushEvent {
            index,
            nu: self.nu,
            kind,
        });
    }

    fn to_matrix(&self, p: &Point) -> RealMatrix {
        RealMatrix::new(self.m, self.n, p.to_f64())
    }

    /// Index sets with the largest `(ν-1)`-minor at `a`, extended by the pair
    /// maximizing `|∇D_ν|`.
    fn relabel(&self, a: &RealMatrix, nu: usize) -> (Vec<usize>, Vec<usize>) {
        let all = |k| linear_forms_subsets(self.n, k);
        let ys = &self.params.ys;
        let mut best = (Vec::new(), Vec::new(), -1.0);
        for rows in all(nu - 1) {
            for cols in all(nu - 1) {
                let v = d_nu_indexed(a, ys, &rows, &cols).abs();
                if v > best.2 {
                    best = (rows.clone(), cols.clone(), v);
                }
            }
        }
        let (rows, cols, _) = best;
        let mut ext = (Vec::new(), Vec::new(), -1.0);
        for r in (0..self.n).filter(|r| !rows.contains(r)) {
            for c in (0..self.n).filter(|c| !cols.contains(c)) {
                let mut rr = rows.clone();
                rr.push(r);
                let mut cc = cols.clone();
                cc.push(c);
                let g = norm(&grad_d_nu_indexed(a, ys, &rr, &cc));
                if g > ext.2 {
                    ext = (rr, cc, g);
                }
            }
        }
        (ext.0, ext.1)
    }

    fn threshold_move(&mut self, view: &GameView, index: usize, rho: f64, rho0: f64) -> Result<Ball, StrategyError> {
        let err = |e: linear_forms::LinearFormsError| StrategyError::new(e.to_string());
        let nu = self.nu;
        let ys = self.params.ys.clone();
        let current = view.current().clone();
        let center = self.to_matrix(&current.center);
        let k = rho / rho0;
        let mu = match &self.params.mu_schedule {
            Some(s) => s[nu - 1],
            None => self.params.alpha1.sqrt() * k,
        };
        self.log(index, PushEventKind::Threshold { rho, k, mu });
        self.constants.k.push(k);
        self.constants.c.push(k);
        self.constants.mu.push(mu);
        self.phase = Phase::Close;
        self.mu_closing = mu;

        let depth = self.params.grid_depth;
        let grid = ball_grid(&center, rho, depth).map_err(err)?;
        let m_prev = minor_sup_on_ball(&center, rho, &ys, nu - 1, depth).map_err(err)?.estimate;
        let mut min_sample = f64::INFINITY;
        let mut a_prime = center.clone();
        for g in &grid {
            let v = linear_forms::minor_vector(g, &ys, nu).map_err(err)?.norm();
            if v < min_sample {
                min_sample = v;
                a_prime = g.clone();
            }
        }
        let threshold = self.constants.psi_nu(nu) * rho0 * mu * m_prev;
        if min_sample > threshold {
            self.log(index, PushEventKind::Trivial { min_sample, threshold });
            return ball_at(view, current.center.clone());
        }

        let (rows, cols) = self.relabel(&a_prime, nu);
        let grad = grad_d_nu_indexed(&a_prime, &ys, &rows, &cols);
        let grad_norm = norm(&grad);
        if grad_norm < DEGENERATE_GRADIENT {
            self.log(index, PushEventKind::Degenerate { grad_norm });
            return ball_at(view, current.center.clone());
        }
        let sign: i8 = if d_nu_indexed(&center, &ys, &rows, &cols) >= 0.0 { 1 } else { -1 };
        let alpha1 = self.params.alpha1;
        let step = sign as f64 * (1.0 - alpha1) * rho / grad_norm;
        let a_m = center.offset(&grad, step);
        let pushed_value = d_nu_indexed(&a_m, &ys, &rows, &cols).abs();
        let bound = 15.0 / 32.0 * self.params.c4.unwrap_or(0.0) * rho * m_prev;

        let slack = view.center_slack();
        let played = match view.support {
            Some(support) => {
                let omega = Ball::new(current.center.clone(), slack.clone()).map_err(|e| StrategyError::new(e.to_string()))?;
                let depth = support.depth_for_radius(&slack) + self.params.support_depth;
                let (m, n) = (self.m, self.n);
                let poly = |p: &Point| d_nu_indexed(&RealMatrix::new(m, n, p.to_f64()), &ys, &rows, &cols);
                find_good_point(support, &poly, &omega, depth, self.params.theta)?
            }
            None => {
                let coords = a_m
                    .data
                    .iter()
                    .map(|&v| rational::from_f64(v).ok_or_else(|| StrategyError::new("non-finite push point")))
                    .collect::<Result<Vec<Rational>, _>>()?;
                step_toward(&current.center, &Point::new(coords), &slack)
            }
        };
        let played_value = d_nu_indexed(&self.to_matrix(&played), &ys, &rows, &cols).abs();
        self.log(
            index,
            PushEventKind::Push {
                rows,
                cols,
                sign,
                grad_norm,
                pushed_value,
                bound,
                holds: pushed_value > bound,
                played_value,
            },
        );
        ball_at(view, played)
    }
}

fn linear_forms_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|s: Vec<usize>| {
                let start = s.last().map_or(0, |&x| x + 1);
                (start..n).map(move |i| {
                    let mut t = s.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Strategy for WhiteGradientPush {
    fn name(&self) -> &str {
        "white-gradient-push"
    }

    fn next_move(&mut self, view: &GameView) -> Result<Ball, StrategyError> {
        if view.mover() != Player::White {
            return Err(StrategyError::new("white-gradient-push plays White only"));
        }
        if view.config.dim != self.m * self.n {
            return Err(StrategyError::new(format!(
                "game dimension {} differs from H = {}",
                view.config.dim,
                self.m * self.n
            )));
        }
        let alpha = rational::to_f64(&view.config.alpha);
        if (alpha - self.params.alpha1).abs() > 1e-12 * self.params.alpha1 {
            return Err(StrategyError::new(format!(
                "game α = {alpha} must equal α₁ = {}",
                self.params.alpha1
            )));
        }
        let rho0 = *self.rho0.get_or_insert_with(|| rational::to_f64(&view.balls[0].radius));
        let index = view.balls.len() - 1;
        let rho = rational::to_f64(&view.current().radius);
        loop {
            match self.phase {
                Phase::Done => break,
                Phase::Close => {
                    if rho < self.mu_closing * rho0 {
                        self.rho_closed = rho;
                        self.log(index, PushEventKind::StageClosed { rho });
                        if self.events.iter().any(|e| matches!(e.kind, PushEventKind::Threshold { .. })) {
                            self.nu += 1;
                        }
                        if self.nu > self.n {
                            self.nu = self.n;
                            self.log(index, PushEventKind::Finished);
                            self.phase = Phase::Done;
                        } else {
                            self.phase = Phase::Threshold;
                        }
                        continue;
                    }
                    break;
                }
                Phase::Threshold => {
                    let c = &self.constants;
                    let (c1, c2, c4) = (c.c1.unwrap_or(0.0), c.c2.unwrap_or(1.0), c.c4.unwrap_or(0.0));
                    let factor = c.psi_nu(self.nu).min(0.125 * c.psi_nu(self.n) * c4 / c2);
                    if rho < 0.5 * c1 * self.rho_closed * factor {
                        return self.threshold_move(view, index, rho, rho0);
                    }
                    break;
                }
            }
        }
        ball_at(view, view.current().center.clone())
    }

    fn params(&self) -> serde_json::Value {
        serde_json::to_value(&self.params).unwrap_or(serde_json::Value::Null)
    }
}

/// First enumerated support point in `omega` with `|poly| ≥ theta·max |poly|`.
pub fn find_good_point(
    support: &dyn SupportOracle,
    poly: &dyn Fn(&Point) -> f64,
    omega: &Ball,
    depth: u32,
    theta: f64,
) -> Result<Point, StrategyError> {
    let points = support.enumerate_in_ball(omega, depth);
    if points.is_empty() {
        return Err(StrategyError::new("no support point in the region at this depth"));
    }
    let values: Vec<f64> = points.iter().map(|p| poly(p).abs()).collect();
    let max = values.iter().copied().fold(0.0, f64::max);
    let pick = values
        .iter()
        .position(|&v| v >= theta * max)
        .expect("the maximizer qualifies");
    Ok(points[pick].clone())
}
