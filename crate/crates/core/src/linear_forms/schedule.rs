//! Stage windows `R^{...}`, exhaustive window searches, solution ranks and the
//! Cramer chain.

use num_traits::Zero;
use serde::Serialize;

use super::minors::{ball_grid, det, pairing_matrix, RealMatrix};
use super::{nearest_witness, IntegerWitness, LinearFormsError, LinearFormsMatrix, Side};
use crate::rational::{self, Rational};

/// Largest number of integer heads a window search will visit.
pub const MAX_WINDOW_POINTS: u128 = 50_000_000;

/// `R`, `M`, `N` with `λ = N/L`, `δ = R^{-NL²}`, `δᵀ = R^{-ML²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremSchedule {
    pub r: f64,
    pub m: usize,
    pub n: usize,
}

impl TheoremSchedule {
    pub fn new(r: f64, m: usize, n: usize) -> Result<Self, LinearFormsError> {
        if !(r > 1.0 && r.is_finite()) {
            return Err(LinearFormsError::Schedule(format!("R must exceed 1, got {r}")));
        }
        if m == 0 || n == 0 {
            return Err(LinearFormsError::Empty);
        }
        Ok(TheoremSchedule { r, m, n })
    }

    pub fn l(&self) -> usize {
        self.m + self.n
    }

    pub fn lambda(&self) -> f64 {
        self.n as f64 / self.l() as f64
    }

    pub fn delta(&self) -> f64 {
        self.r.powf(-((self.n * self.l() * self.l()) as f64))
    }

    pub fn delta_t(&self) -> f64 {
        self.r.powf(-((self.m * self.l() * self.l()) as f64))
    }
}

/// Bounds of stage `i`. Solutions are strict: `0 < ‖x‖_∞ < x_norm_bound`, `‖𝒜(X)‖_∞ < x_form_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub stage: u32,
    /// `δR^{M(λ+i)}`.
    pub x_norm_bound: f64,
    /// `δR^{-N(λ+i)-M}`.
    pub x_form_bound: f64,
    /// `δᵀR^{N(1+i)}`.
    pub y_norm_bound: f64,
    /// `δᵀR^{-M(1+i)-N}`.
    pub y_form_bound: f64,
    /// `R^{-L(λ+i)}`.
    pub radius_x: f64,
    /// `R^{-L(1+i)}`.
    pub radius_y: f64,
    /// `δᵀR^{Ni}`, the floor on `‖y‖_∞` once earlier stages are clear.
    pub y_norm_floor: f64,
}

pub fn schedule_windows(s: &TheoremSchedule, i: u32) -> Window {
    let (m, n, l) = (s.m as f64, s.n as f64, s.l() as f64);
    let (lam, i) = (s.lambda(), i as f64);
    let p = |e: f64| s.r.powf(e);
    Window {
        stage: i as u32,
        x_norm_bound: s.delta() * p(m * (lam + i)),
        x_form_bound: s.delta() * p(-n * (lam + i) - m),
        y_norm_bound: s.delta_t() * p(n * (1.0 + i)),
        y_form_bound: s.delta_t() * p(-m * (1.0 + i) - n),
        radius_x: p(-l * (lam + i)),
        radius_y: p(-l * (1.0 + i)),
        y_norm_floor: s.delta_t() * p(n * i),
    }
}

/// `δ^L R^{-NM-M²}`.
pub fn final_badness_bound(s: &TheoremSchedule) -> f64 {
    let (m, n) = (s.m as f64, s.n as f64);
    s.delta().powi(s.l() as i32) * s.r.powf(-n * m - m * m)
}

/// Largest integer strictly below `bound`.
fn strict_floor(bound: f64) -> i64 {
    if bound <= 0.0 {
        return 0;
    }
    let f = bound.floor();
    let k = if f == bound { f - 1.0 } else { f };
    k.min(i64::MAX as f64 / 4.0) as i64
}

/// Heads `h` with `0 < ‖h‖_∞ ≤ k` (first nonzero coordinate positive) and
/// `dist(G·h, ℤ) < form_bound` in every row.
fn search_heads(
    g: &RealMatrix,
    k: i64,
    form_bound: f64,
    first_only: bool,
) -> Result<Vec<Vec<i64>>, LinearFormsError> {
    let width = g.n;
    let total = ((2 * k.max(0) as u128 + 1).checked_pow(width as u32).unwrap_or(u128::MAX) - 1) / 2;
    if total > MAX_WINDOW_POINTS {
        return Err(LinearFormsError::Overflow(total, MAX_WINDOW_POINTS));
    }
    let mut out = Vec::new();
    if k == 0 {
        return Ok(out);
    }
    let mut h = vec![-k; width];
    // Odometer over [-k, k]^width keeping the half-space representative.
    h[width - 1] = -k - 1;
    loop {
        let mut pos = width - 1;
        loop {
            if h[pos] < k {
                h[pos] += 1;
                break;
            }
            if pos == 0 {
                return Ok(out);
            }
            h[pos] = -k;
            pos -= 1;
        }
        let first = h.iter().find(|&&c| c != 0);
        if first.is_none_or(|&c| c < 0) {
            continue;
        }
        let inside = (0..g.m).all(|i| {
            let v: f64 = (0..width).map(|j| g.get(i, j) * h[j] as f64).sum();
            (v - v.round()).abs() < form_bound
        });
        if inside {
            out.push(h.clone());
            if first_only {
                return Ok(out);
            }
        }
    }
}

fn side_matrix(a: &LinearFormsMatrix, side: Side) -> LinearFormsMatrix {
    match side {
        Side::X => a.clone(),
        Side::Y => a.transpose(),
    }
}

fn side_bounds(w: &Window, side: Side) -> (f64, f64) {
    match side {
        Side::X => (w.x_norm_bound, w.x_form_bound),
        Side::Y => (w.y_norm_bound, w.y_form_bound),
    }
}

/// Confirms a float hit exactly (rational entries) or keeps it (irrational entries).
fn confirm(a: &LinearFormsMatrix, side: Side, head: &[i64], bound: f64) -> Result<Option<IntegerWitness>, LinearFormsError> {
    let w = nearest_witness(a, side, head)?;
    if a.is_exact() {
        let values = super::form_values_exact(a, &w)?;
        let limit = rational::from_f64(bound).unwrap_or_else(Rational::zero);
        if values.iter().any(|v| v >= &limit) {
            return Ok(None);
        }
    }
    Ok(Some(w))
}

/// First integer solution of the stage window on the given side, if any.
pub fn window_has_solution(
    a: &LinearFormsMatrix,
    w: &Window,
    side: Side,
) -> Result<Option<IntegerWitness>, LinearFormsError> {
    let (nb, fb) = side_bounds(w, side);
    let g = side_matrix(a, side).to_real();
    // Widen the float filter slightly and decide exactly where possible.
    for head in search_heads(&g, strict_floor(nb), fb * (1.0 + 1e-9), !a.is_exact())? {
        if let Some(wit) = confirm(a, side, &head, fb)? {
            return Ok(Some(wit));
        }
    }
    Ok(None)
}

/// Every solution of the window, one per `±` pair.
pub fn all_window_solutions(
    a: &LinearFormsMatrix,
    w: &Window,
    side: Side,
) -> Result<Vec<IntegerWitness>, LinearFormsError> {
    let (nb, fb) = side_bounds(w, side);
    let g = side_matrix(a, side).to_real();
    let mut out = Vec::new();
    for head in search_heads(&g, strict_floor(nb), fb * (1.0 + 1e-9), false)? {
        if let Some(wit) = confirm(a, side, &head, fb)? {
            out.push(wit);
        }
    }
    Ok(out)
}

/// Rank of the span of the witnesses, by exact elimination.
pub fn solution_space_rank(ws: &[IntegerWitness]) -> usize {
    let mut rows: Vec<Vec<Rational>> = ws
        .iter()
        .map(|w| w.coords.iter().map(|&c| Rational::from_integer(c.into())).collect())
        .collect();
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let f = &rows[r][col] / &pivot;
                for c in col..cols {
                    let delta = &f * &rows[rank][c];
                    rows[r][c] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Outcome of testing the rank bound on a sampled ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaRankReport {
    pub stage: u32,
    pub samples: usize,
    /// The x-window is empty at every sample.
    pub hypothesis_holds: bool,
    /// Union of Y-window solutions over the samples.
    pub witnesses: Vec<IntegerWitness>,
    pub rank: usize,
    /// `rank ≤ N`; meaningful only when the hypothesis holds.
    pub conclusion_holds: bool,
}

fn grid_samples(center: &LinearFormsMatrix, radius: f64, depth: u32) -> Result<Vec<LinearFormsMatrix>, LinearFormsError> {
    ball_grid(&center.to_real(), radius, depth)?
        .into_iter()
        .map(|g| {
            let entries = g
                .data
                .iter()
                .map(|&v| rational::from_f64(v).ok_or_else(|| LinearFormsError::Entry(v.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            LinearFormsMatrix::new(g.m, g.n, entries)
        })
        .collect()
}

/// Samples the ball on a grid, checks that the stage-`i` x-window is empty at
/// every sample, and bounds the rank of all Y-window solutions found.
pub fn lemma_rank_check(
    center: &LinearFormsMatrix,
    radius: f64,
    s: &TheoremSchedule,
    i: u32,
    grid_depth: u32,
) -> Result<LemmaRankReport, LinearFormsError> {
    let w = schedule_windows(s, i);
    if radius >= w.radius_x {
        return Err(LinearFormsError::Schedule(format!(
            "ball radius {radius:e} is not below R^(-L(λ+i)) = {:e}",
            w.radius_x
        )));
    }
    let samples = grid_samples(center, radius, grid_depth)?;
    let mut hypothesis_holds = true;
    let mut witnesses: Vec<IntegerWitness> = Vec::new();
    for a in &samples {
        if window_has_solution(a, &w, Side::X)?.is_some() {
            hypothesis_holds = false;
        }
        for wit in all_window_solutions(a, &w, Side::Y)? {
            if !witnesses.contains(&wit) {
                witnesses.push(wit);
            }
        }
    }
    let rank = solution_space_rank(&witnesses);
    Ok(LemmaRankReport {
        stage: i,
        samples: samples.len(),
        hypothesis_holds,
        rank,
        conclusion_holds: rank <= s.n,
        witnesses,
    })
}

/// Numerical check of `|t_v D| ≤ Nδᵀ R^{-M(1+i)-N} max_u|D_uv|` and, for
/// witnesses with `‖y‖_∞ ≥ δᵀR^{Ni}`, of `|D| ≤ N√N R^{-L(1+i)} max|D_uv|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CramerReport {
    /// Witnesses span at most `N` dimensions, so a frame exists.
    pub applicable: bool,
    pub checked: usize,
    /// Largest `lhs / rhs` over the coefficient inequalities.
    pub worst_cramer_ratio: f64,
    pub last_checked: usize,
    /// Largest `lhs / rhs` over the determinant inequality.
    pub worst_last_ratio: f64,
    pub holds: bool,
}

/// Orthonormal frame of `N` vectors whose span contains the witnesses, or
/// `None` when the witnesses span more than `N` dimensions.
fn frame_through(ws: &[IntegerWitness], n: usize, l: usize) -> Option<Vec<Vec<f64>>> {
    let mut frame: Vec<Vec<f64>> = Vec::new();
    let reduce = |frame: &[Vec<f64>], mut v: Vec<f64>| -> Option<Vec<f64>> {
        for f in frame {
            let d: f64 = v.iter().zip(f).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(f) {
                *x -= d * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        (norm > 1e-9).then(|| v.into_iter().map(|x| x / norm).collect())
    };
    for w in ws {
        if let Some(u) = reduce(&frame, w.coords.iter().map(|&c| c as f64).collect()) {
            if frame.len() == n {
                return None;
            }
            frame.push(u);
        }
    }
    for k in 0..l {
        if frame.len() == n {
            break;
        }
        if let Some(u) = reduce(&frame, (0..l).map(|j| if j == k { 1.0 } else { 0.0 }).collect()) {
            frame.push(u);
        }
    }
    Some(frame)
}

pub fn cramer_check(
    a: &LinearFormsMatrix,
    witnesses: &[IntegerWitness],
    s: &TheoremSchedule,
    i: u32,
) -> Result<CramerReport, LinearFormsError> {
    let w = schedule_windows(s, i);
    let (n, l) = (s.n, s.l());
    let mut report = CramerReport {
        applicable: false,
        checked: 0,
        worst_cramer_ratio: 0.0,
        last_checked: 0,
        worst_last_ratio: 0.0,
        holds: true,
    };
    let Some(frame) = frame_through(witnesses, n, l) else {
        return Ok(report);
    };
    report.applicable = true;
    let g = a.to_real();
    let p = pairing_matrix(&g, &frame);
    let d = det(p.clone());
    let cof = |u: usize, v: usize| -> f64 {
        let minor: Vec<Vec<f64>> = (0..n)
            .filter(|&r| r != u)
            .map(|r| (0..n).filter(|&c| c != v).map(|c| p[r][c]).collect())
            .collect();
        det(minor).abs()
    };
    let cofs: Vec<Vec<f64>> = (0..n).map(|u| (0..n).map(|v| cof(u, v)).collect()).collect();
    let max_all = cofs.iter().flatten().copied().fold(0.0, f64::max);
    let nn = n as f64;
    for wit in witnesses {
        if wit.side != Side::Y || wit.coords.len() != l {
            return Err(LinearFormsError::Dimension {
                expected: l,
                got: wit.coords.len(),
            });
        }
        let y: Vec<f64> = wit.coords.iter().map(|&c| c as f64).collect();
        for v in 0..n {
            let t: f64 = y.iter().zip(&frame[v]).map(|(a, b)| a * b).sum();
            let max_col = (0..n).map(|u| cofs[u][v]).fold(0.0, f64::max);
            let rhs = nn * w.y_form_bound * max_col;
            let lhs = (t * d).abs();
            report.checked += 1;
            let ratio = if rhs > 0.0 { lhs / rhs } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
            report.worst_cramer_ratio = report.worst_cramer_ratio.max(ratio);
        }
        let ynorm = wit.head_norm(a) as f64;
        if ynorm >= w.y_norm_floor {
            let rhs = nn * nn.sqrt() * w.radius_y * max_all;
            let lhs = d.abs();
            report.last_checked += 1;
            let ratio = if rhs > 0.0 { lhs / rhs } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
            report.worst_last_ratio = report.worst_last_ratio.max(ratio);
        }
    }
    let tol = 1.0 + 1e-9;
    report.holds = report.worst_cramer_ratio <= tol && report.worst_last_ratio <= tol;
    Ok(report)
}
