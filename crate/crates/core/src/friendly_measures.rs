//! Measures defined on nested cells, with certified ball-mass brackets.
//!
//! Friendliness is checked empirically: each estimate is a bound over the
//! sampled centers and scales only.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::continued_fractions::{cylinder_interval, CfWord};
use crate::fractal_ifs::{least_squares, presets, similarity_dimension, ExactIfs, ExactSimilarity, Ifs, RBox};
use crate::game::{Ball, Point};
use crate::rational::{self, ratio, Rational};

pub const DEFAULT_DEPTH_CAP: u32 = 48;

/// Cells visited by a single bracket before giving up.
pub const MAX_VISITED: usize = 1 << 22;

pub const MEASURE_PRESETS: [&str; 5] = ["cf13", "cantor", "sierpinski", "lebesgue", "square"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("weights must be positive and sum to 1")]
    BadWeights,
    #[error("{0} weights for {1} maps")]
    WeightCount(usize, usize),
    #[error("a single map carries a point mass")]
    PointMass,
    #[error("IFS `{0}` has no exact cell tree")]
    Inexact(String),
    #[error("depth {0} exceeds the cap {1}")]
    DepthCap(u32, u32),
    #[error("bracket visited more than {MAX_VISITED} cells")]
    TooManyCells,
    #[error("lower bound vanished at center {center}, scale {scale}; increase the depth")]
    Degenerate { center: String, scale: String },
    #[error("zero polynomial on the ball")]
    ZeroPolynomial,
    #[error("dimension mismatch: measure on ℝ^{expected}, query in ℝ^{got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unknown measure preset `{0}`")]
    UnknownPreset(String),
}

#[derive(Debug, Clone)]
enum Tree {
    Cf { alphabet: Vec<u64> },
    Ifs(ExactIfs),
}

/// One node of the cell tree.
#[derive(Debug, Clone)]
pub struct Cell {
    pub word: Vec<usize>,
    pub region: RBox,
    pub mass: Rational,
    /// A point of the cell standing in for it in sampled queries.
    pub sample: Vec<Rational>,
    map: Option<ExactSimilarity>,
}

#[derive(Debug, Clone)]
pub struct CylinderMeasure {
    pub name: String,
    tree: Tree,
    weights: Vec<Rational>,
    pub depth_cap: u32,
}

/// Digits `{1, 3}` with mass `2^{-n}` on every depth-`n` cylinder.
pub fn cf13_measure() -> CylinderMeasure {
    CylinderMeasure {
        name: "cf13".into(),
        tree: Tree::Cf { alphabet: vec![1, 3] },
        weights: vec![ratio(1, 2), ratio(1, 2)],
        depth_cap: DEFAULT_DEPTH_CAP,
    }
}

/// Product-weight measure on the cells of an exact IFS. Without weights the
/// natural choice `ρ_i^s` is used, `s` the similarity dimension.
pub fn self_similar_measure(ifs: &Ifs, weights: Option<Vec<Rational>>) -> Result<CylinderMeasure, MeasureError> {
    let tree = ExactIfs::from_ifs(ifs).ok_or_else(|| MeasureError::Inexact(ifs.name.clone()))?;
    let k = tree.maps.len();
    if k < 2 {
        return Err(MeasureError::PointMass);
    }
    let weights = match weights {
        Some(w) => w,
        None => natural_weights(&tree, ifs),
    };
    if weights.len() != k {
        return Err(MeasureError::WeightCount(weights.len(), k));
    }
    if weights.iter().any(|w| !w.is_positive()) || weights.iter().sum::<Rational>() != Rational::one() {
        return Err(MeasureError::BadWeights);
    }
    Ok(CylinderMeasure {
        name: ifs.name.clone(),
        tree: Tree::Ifs(tree),
        weights,
        depth_cap: DEFAULT_DEPTH_CAP,
    })
}

fn natural_weights(tree: &ExactIfs, ifs: &Ifs) -> Vec<Rational> {
    let k = tree.maps.len();
    if tree.maps.iter().all(|m| m.ratio == tree.maps[0].ratio) {
        return vec![ratio(1, k as i64); k];
    }
    let s = similarity_dimension(ifs);
    let mut w: Vec<Rational> = ifs.maps[..k - 1]
        .iter()
        .map(|m| {
            let x = (m.ratio.powf(s) * (1u64 << 40) as f64).round() as i64;
            Rational::new(x.into(), (1i64 << 40).into())
        })
        .collect();
    let rest = Rational::one() - w.iter().sum::<Rational>();
    w.push(rest);
    w
}

/// Preset by name; `lebesgue` is the dyadic IFS with equal weights.
pub fn measure_by_name(name: &str) -> Result<CylinderMeasure, MeasureError> {
    let ifs = match name {
        "cf13" => return Ok(cf13_measure()),
        "lebesgue" => presets::dyadic(),
        "cantor" | "sierpinski" | "square" => presets::by_name(name).expect("known preset"),
        other => return Err(MeasureError::UnknownPreset(other.into())),
    };
    let mut m = self_similar_measure(&ifs, None)?;
    if name == "lebesgue" {
        m.name = "lebesgue".into();
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Overlap {
    Inside,
    Outside,
    Partial,
}

/// Query set for bracketing.
trait Region: Sync {
    fn classify(&self, b: &RBox) -> Overlap;
}

impl Region for Ball {
    fn classify(&self, b: &RBox) -> Overlap {
        if !b.intersects_ball(self) {
            Overlap::Outside
        } else if b.inside_ball(self) {
            Overlap::Inside
        } else {
            Overlap::Partial
        }
    }
}

/// Open slab `|n·x - c| < ε` around an affine hyperplane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slab {
    #[serde(with = "rational::serde_vec")]
    pub normal: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub offset: Rational,
    #[serde(with = "rational::serde_str")]
    pub eps: Rational,
}

impl Slab {
    fn range(&self, b: &RBox) -> (Rational, Rational) {
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for (n, (a, z)) in self.normal.iter().zip(b.lo.iter().zip(&b.hi)) {
            let (u, v) = (n * a, n * z);
            if u <= v {
                lo += u;
                hi += v;
            } else {
                lo += v;
                hi += u;
            }
        }
        (lo - &self.offset, hi - &self.offset)
    }
}

impl Region for Slab {
    fn classify(&self, b: &RBox) -> Overlap {
        let (lo, hi) = self.range(b);
        if lo >= self.eps || -&hi >= self.eps {
            Overlap::Outside
        } else if hi < self.eps && -lo < self.eps {
            Overlap::Inside
        } else {
            Overlap::Partial
        }
    }
}

struct Both<'a>(&'a Ball, &'a Slab);

impl Region for Both<'_> {
    fn classify(&self, b: &RBox) -> Overlap {
        match (self.0.classify(b), self.1.classify(b)) {
            (Overlap::Outside, _) | (_, Overlap::Outside) => Overlap::Outside,
            (Overlap::Inside, Overlap::Inside) => Overlap::Inside,
            _ => Overlap::Partial,
        }
    }
}

impl CylinderMeasure {
    pub fn dim(&self) -> usize {
        match &self.tree {
            Tree::Cf { .. } => 1,
            Tree::Ifs(t) => t.dim(),
        }
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn arity(&self) -> usize {
        self.weights.len()
    }

    pub fn root(&self) -> Cell {
        match &self.tree {
            Tree::Cf { .. } => Cell {
                word: Vec::new(),
                region: RBox::unit(1),
                mass: Rational::one(),
                sample: vec![ratio(1, 2)],
                map: None,
            },
            Tree::Ifs(t) => {
                let root = t.root();
                let sample = t.representatives(&root).swap_remove(0);
                Cell {
                    word: Vec::new(),
                    region: root.region,
                    mass: Rational::one(),
                    sample,
                    map: Some(root.map),
                }
            }
        }
    }

    pub fn children(&self, cell: &Cell) -> Vec<Cell> {
        (0..self.arity()).map(|i| self.child(cell, i)).collect()
    }

    fn child(&self, cell: &Cell, i: usize) -> Cell {
        let mut word = cell.word.clone();
        word.push(i);
        let mass = &cell.mass * &self.weights[i];
        match &self.tree {
            Tree::Cf { alphabet } => {
                let digits = word.iter().map(|&k| alphabet[k]).collect();
                let cyl = cylinder_interval(&CfWord::new(digits).expect("alphabet digits are positive"))
                    .expect("nonempty word");
                let sample = vec![cyl.midpoint()];
                Cell {
                    word,
                    region: RBox::new(vec![cyl.lo], vec![cyl.hi]),
                    mass,
                    sample,
                    map: None,
                }
            }
            Tree::Ifs(t) => {
                let map = cell.map.as_ref().expect("ifs cells carry maps").compose(&t.maps[i]);
                let region = map.image_box(&t.seed);
                let sample = map.apply(&t.fixed_points[0]);
                Cell {
                    word,
                    region,
                    mass,
                    sample,
                    map: Some(map),
                }
            }
        }
    }

    /// Mass of a word, as a product of weights.
    pub fn mass(&self, word: &[usize]) -> Rational {
        word.iter().map(|&i| &self.weights[i]).product()
    }

    /// Cell addressed by a word.
    pub fn cell(&self, word: &[usize]) -> Cell {
        word.iter().fold(self.root(), |c, &i| self.child(&c, i))
    }

    /// All cells of the given depth, in lexicographic word order.
    pub fn cells(&self, depth: u32) -> Result<Vec<Cell>, MeasureError> {
        self.check_depth(depth)?;
        let count = self.arity().checked_pow(depth).unwrap_or(usize::MAX);
        if count > MAX_VISITED {
            return Err(MeasureError::TooManyCells);
        }
        let mut level = vec![self.root()];
        for _ in 0..depth {
            level = level.iter().flat_map(|c| self.children(c)).collect();
        }
        Ok(level)
    }

    fn check_depth(&self, depth: u32) -> Result<(), MeasureError> {
        if depth > self.depth_cap {
            return Err(MeasureError::DepthCap(depth, self.depth_cap));
        }
        Ok(())
    }

    fn check_dim(&self, got: usize) -> Result<(), MeasureError> {
        if got != self.dim() {
            return Err(MeasureError::Dimension {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    /// `(lower, upper)`: mass of cells inside the region, and of cells meeting it.
    fn bracket(&self, region: &dyn Region, depth: u32) -> Result<(Rational, Rational), MeasureError> {
        self.check_depth(depth)?;
        let mut lower = Rational::zero();
        let mut partial = Rational::zero();
        let mut stack = vec![self.root()];
        let mut visited = 0usize;
        while let Some(cell) = stack.pop() {
            visited += 1;
            if visited > MAX_VISITED {
                return Err(MeasureError::TooManyCells);
            }
            match region.classify(&cell.region) {
                Overlap::Outside => {}
                Overlap::Inside => lower += &cell.mass,
                Overlap::Partial if cell.word.len() as u32 >= depth => partial += &cell.mass,
                Overlap::Partial => stack.extend(self.children(&cell)),
            }
        }
        let upper = &lower + partial;
        Ok((lower, upper))
    }

    /// Certified bracket `lower ≤ τ(ball) ≤ upper` from depth-`depth` cells.
    pub fn ball_mass(&self, ball: &Ball, depth: u32) -> Result<(Rational, Rational), MeasureError> {
        self.check_dim(ball.dim())?;
        self.bracket(ball, depth)
    }

    /// Bracket of `τ(ball ∩ slab)`.
    pub fn slab_mass(&self, ball: &Ball, slab: &Slab, depth: u32) -> Result<(Rational, Rational), MeasureError> {
        self.check_dim(ball.dim())?;
        self.check_dim(slab.normal.len())?;
        self.bracket(&Both(ball, slab), depth)
    }

    /// Sample points of random depth-`depth` cells; deterministic in `rng`.
    pub fn sample_centers(&self, count: usize, depth: u32, rng: &mut ChaCha8Rng) -> Result<Vec<Point>, MeasureError> {
        self.check_depth(depth)?;
        Ok((0..count)
            .map(|_| {
                let word: Vec<usize> = (0..depth).map(|_| rng.random_range(0..self.arity())).collect();
                Point::new(self.cell(&word).sample)
            })
            .collect())
    }
}

fn ball(center: &Point, radius: Rational) -> Ball {
    Ball::new(center.clone(), radius).expect("positive radius")
}

fn check_scales(scales: &[Rational]) -> Result<(), MeasureError> {
    if scales.is_empty() || scales.iter().any(|s| !s.is_positive()) {
        return Err(MeasureError::Invalid("scales must be positive and nonempty".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingSample {
    pub center: Vec<f64>,
    #[serde(with = "rational::serde_str")]
    pub scale: Rational,
    /// Lower bound of `τ(B(x, ρ/2))`.
    #[serde(with = "rational::serde_str")]
    pub half_lower: Rational,
    /// Upper bound of `τ(B(x, ρ))`.
    #[serde(with = "rational::serde_str")]
    pub full_upper: Rational,
    #[serde(with = "rational::serde_str")]
    pub ratio: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingReport {
    /// `min ratio`, a certified lower bound for `D` on the samples.
    pub estimate: f64,
    /// Per-scale minimum.
    pub per_scale: Vec<(f64, f64)>,
    pub samples: Vec<DoublingSample>,
}

/// Worst `lower(B(x,ρ/2)) / upper(B(x,ρ))` over centers and scales.
pub fn doubling_report(
    m: &CylinderMeasure,
    centers: &[Point],
    scales: &[Rational],
    depth: u32,
) -> Result<DoublingReport, MeasureError> {
    check_scales(scales)?;
    let half = ratio(1, 2);
    let jobs: Vec<(&Point, &Rational)> = centers.iter().flat_map(|c| scales.iter().map(move |s| (c, s))).collect();
    let samples = jobs
        .par_iter()
        .map(|&(c, s)| {
            let (half_lower, _) = m.ball_mass(&ball(c, s * &half), depth)?;
            let (_, full_upper) = m.ball_mass(&ball(c, s.clone()), depth)?;
            if half_lower.is_zero() {
                return Err(MeasureError::Degenerate {
                    center: format!("{:?}", c.to_f64()),
                    scale: rational::format_rational(s),
                });
            }
            let ratio = &half_lower / &full_upper;
            Ok(DoublingSample {
                center: c.to_f64(),
                scale: s.clone(),
                half_lower,
                full_upper,
                ratio,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let worst = samples
        .iter()
        .map(|s| &s.ratio)
        .min()
        .ok_or_else(|| MeasureError::Invalid("no sample centers".into()))?;
    let per_scale = scales
        .iter()
        .map(|s| {
            let min = samples.iter().filter(|x| &x.scale == s).map(|x| &x.ratio).min().expect("sampled");
            (rational::to_f64(s), rational::to_f64(min))
        })
        .collect();
    Ok(DoublingReport {
        estimate: rational::to_f64(worst),
        per_scale,
        samples,
    })
}

pub fn doubling_estimate(m: &CylinderMeasure, centers: &[Point], scales: &[Rational], depth: u32) -> Result<f64, MeasureError> {
    Ok(doubling_report(m, centers, scales, depth)?.estimate)
}

/// Radius of the ball on the left of the decay inequality, as a fraction of
/// the scale `ρ` on the right.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReading {
    pub r_over_rho: Rational,
}

impl Default for DecayReading {
    fn default() -> Self {
        DecayReading { r_over_rho: Rational::one() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub scale: f64,
    /// `ε/ρ`.
    pub eps_ratio: f64,
    /// Worst bracketed `upper τ(B(x,r) ∩ P^(ε)) / lower τ(B(x,ρ))` over centers and hyperplanes.
    pub worst_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub a: f64,
    /// `exp(intercept)` of the log-log fit.
    pub c_fit: f64,
    /// Smallest `C` with `ratio ≤ C (ε/ρ)^a` on every row.
    pub c_envelope: f64,
    pub residuals: Vec<f64>,
    pub rows: Vec<DecayRow>,
}

fn hyperplane_normals(dim: usize) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = (0..dim)
        .map(|k| (0..dim).map(|j| if j == k { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    if dim == 2 {
        out.push(vec![ratio(3, 5), ratio(4, 5)]);
        out.push(vec![ratio(4, 5), ratio(-3, 5)]);
    }
    out
}

/// Worst sampled decay ratio per `(ρ, ε)` and a log-log fit of ratio against `ε/ρ`.
///
/// Hyperplanes are unit-normal and pass at offsets `n·x + kρ/4`, `|k| ≤ 4`.
pub fn decay_estimate(
    m: &CylinderMeasure,
    centers: &[Point],
    scales: &[Rational],
    eps_ratios: &[Rational],
    depth: u32,
    reading: &DecayReading,
) -> Result<DecayFit, MeasureError> {
    check_scales(scales)?;
    if eps_ratios.len() < 2 || eps_ratios.iter().any(|e| !e.is_positive() || e > &Rational::one()) {
        return Err(MeasureError::Invalid("need at least two ε/ρ values in (0, 1]".into()));
    }
    let normals = hyperplane_normals(m.dim());
    let quarter = ratio(1, 4);
    let mut rows = Vec::new();
    for rho in scales {
        let r = rho * &reading.r_over_rho;
        let denominators = centers
            .par_iter()
            .map(|c| {
                let (lower, _) = m.ball_mass(&ball(c, rho.clone()), depth)?;
                if lower.is_zero() {
                    return Err(MeasureError::Degenerate {
                        center: format!("{:?}", c.to_f64()),
                        scale: rational::format_rational(rho),
                    });
                }
                Ok(lower)
            })
            .collect::<Result<Vec<_>, _>>()?;
        for e in eps_ratios {
            let eps = rho * e;
            let worst = centers
                .par_iter()
                .zip(&denominators)
                .map(|(c, lower)| {
                    let inner = ball(c, r.clone());
                    let mut worst = Rational::zero();
                    for n in &normals {
                        let base: Rational = n.iter().zip(c.coords()).map(|(a, b)| a * b).sum();
                        for k in -4..=4i64 {
                            let slab = Slab {
                                normal: n.clone(),
                                offset: &base + Rational::from_integer(k.into()) * &quarter * rho,
                                eps: eps.clone(),
                            };
                            let (_, upper) = m.slab_mass(&inner, &slab, depth)?;
                            worst = worst.max(upper / lower);
                        }
                    }
                    Ok(worst)
                })
                .collect::<Result<Vec<_>, MeasureError>>()?
                .into_iter()
                .max()
                .unwrap_or_else(Rational::zero);
            rows.push(DecayRow {
                scale: rational::to_f64(rho),
                eps_ratio: rational::to_f64(e),
                worst_ratio: rational::to_f64(&worst),
            });
        }
    }
    let fit: Vec<&DecayRow> = rows.iter().filter(|r| r.worst_ratio > 0.0).collect();
    let xs: Vec<f64> = fit.iter().map(|r| r.eps_ratio.ln()).collect();
    let ys: Vec<f64> = fit.iter().map(|r| r.worst_ratio.ln()).collect();
    let mut distinct = xs.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(MeasureError::Invalid("fewer than two positive ratios to fit".into()));
    }
    let (a, intercept) = least_squares(&xs, &ys);
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + a * x)).collect();
    let c_envelope = fit
        .iter()
        .map(|r| r.worst_ratio / r.eps_ratio.powf(a))
        .fold(0.0, f64::max);
    Ok(DecayFit {
        a,
        c_fit: intercept.exp(),
        c_envelope,
        residuals,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SublevelReport {
    /// Sampled `‖f‖_B`: max `|f|` over cell samples in the ball.
    pub sup_norm: f64,
    /// Mass of cells meeting the ball whose sample has `|f| < ε`, over `lower τ(B)`.
    pub ratio: f64,
    /// Same with every cell whose corner range of `|f|` dips below `ε`.
    pub ratio_upper: f64,
}

/// Cell-bracketed `τ({x ∈ B : |f(x)| < ε}) / τ(B)` with sampled sup norm.
pub fn sublevel_ratio(
    m: &CylinderMeasure,
    poly: &(dyn Fn(&[f64]) -> f64 + Sync),
    b: &Ball,
    eps: f64,
    depth: u32,
) -> Result<SublevelReport, MeasureError> {
    m.check_dim(b.dim())?;
    m.check_depth(depth)?;
    let (lower, _) = m.ball_mass(b, depth)?;
    if lower.is_zero() {
        return Err(MeasureError::Degenerate {
            center: format!("{:?}", b.center.to_f64()),
            scale: rational::format_rational(&b.radius),
        });
    }
    let mut sup: f64 = poly(&b.center.to_f64()).abs();
    let mut sampled = Rational::zero();
    let mut upper = Rational::zero();
    let mut stack = vec![m.root()];
    let mut visited = 0usize;
    while let Some(cell) = stack.pop() {
        visited += 1;
        if visited > MAX_VISITED {
            return Err(MeasureError::TooManyCells);
        }
        if b.classify(&cell.region) == Overlap::Outside {
            continue;
        }
        if (cell.word.len() as u32) < depth {
            stack.extend(m.children(&cell));
            continue;
        }
        let at_sample = poly(&cell.sample.iter().map(rational::to_f64).collect::<Vec<_>>()).abs();
        if b.contains_point(&Point::new(cell.sample.clone())) {
            sup = sup.max(at_sample);
        }
        if at_sample < eps {
            sampled += &cell.mass;
        }
        let corners = corner_values(&cell.region, poly);
        let (lo, hi) = corners.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, z), &v| (a.min(v), z.max(v)));
        let dips = at_sample < eps || lo.abs() < eps || hi.abs() < eps || (lo < 0.0 && hi > 0.0);
        if dips {
            upper += &cell.mass;
        }
    }
    if sup == 0.0 {
        return Err(MeasureError::ZeroPolynomial);
    }
    let lower = rational::to_f64(&lower);
    Ok(SublevelReport {
        sup_norm: sup,
        ratio: (rational::to_f64(&sampled) / lower).min(1.0),
        ratio_upper: rational::to_f64(&upper) / lower,
    })
}

fn corner_values(b: &RBox, poly: &dyn Fn(&[f64]) -> f64) -> Vec<f64> {
    let d = b.dim();
    (0..1usize << d)
        .map(|mask| {
            let p: Vec<f64> = (0..d)
                .map(|k| rational::to_f64(if mask >> k & 1 == 1 { &b.hi[k] } else { &b.lo[k] }))
                .collect();
            poly(&p)
        })
        .collect()
}

/// `(1/(2K))^{1/δ}·(1 - 10⁻⁶)`, strictly satisfying `K ε₀^δ < 1/2`.
pub fn epsilon0(k: f64, delta: f64) -> Result<f64, MeasureError> {
    if !(k > 0.0 && k.is_finite() && delta > 0.0 && delta.is_finite()) {
        return Err(MeasureError::Invalid("K and δ must be positive".into()));
    }
    Ok((1.0 / (2.0 * k)).powf(1.0 / delta) * (1.0 - 1e-6))
}
