//! Contracting similarities, attractor approximation, the open set condition
//! and dimension estimates.
//!
//! Two representations live side by side. [`Similarity`] is the general
//! floating point map `x ↦ ρΘx + y`. Maps whose ratio and translation are
//! rational and whose `Θ` is a signed permutation also carry an
//! [`ExactSimilarity`], which every exact consumer (game supports, measure
//! brackets) uses instead.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};

use crate::game::Ball;
use crate::rational::{self, ratio, Rational};

/// Upper bound on the number of cells [`iterate_attractor`] will materialize.
pub const MAX_CELLS: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IfsError {
    #[error("an IFS needs at least one map")]
    Empty,
    #[error("map {0} is not contracting")]
    NotContracting(usize),
    #[error("map {0} has a non-orthogonal linear part")]
    NotOrthogonal(usize),
    #[error("dimension mismatch in map {0}")]
    DimensionMismatch(usize),
    #[error("{0} cells exceed the cap of {MAX_CELLS}")]
    TooManyCells(usize),
    #[error("seed box is not mapped into itself by map {0}")]
    SeedNotInvariant(usize),
    #[error("degenerate scales: {0}")]
    DegenerateScales(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

/// Axis-aligned box with rational corners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RBox {
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
}

impl RBox {
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        RBox { lo, hi }
    }

    pub fn unit(dim: usize) -> Self {
        RBox::new(vec![Rational::zero(); dim], vec![Rational::one(); dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[Rational]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (lo, hi))| lo <= x && x <= hi)
    }

    pub fn contains_box(&self, other: &RBox) -> bool {
        self.lo.iter().zip(&other.lo).all(|(a, b)| a <= b)
            && self.hi.iter().zip(&other.hi).all(|(a, b)| b <= a)
    }

    /// Squared distance from `p` to the box (zero inside).
    pub fn dist_sq_to(&self, p: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (x, (lo, hi)) in p.iter().zip(self.lo.iter().zip(&self.hi)) {
            let d = if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                continue;
            };
            acc += &d * &d;
        }
        acc
    }

    /// Squared distance from `p` to the farthest corner.
    pub fn far_dist_sq(&self, p: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (x, (lo, hi)) in p.iter().zip(self.lo.iter().zip(&self.hi)) {
            let d = (x - lo).abs().max((hi - x).abs());
            acc += &d * &d;
        }
        acc
    }

    pub fn intersects_ball(&self, ball: &Ball) -> bool {
        let r = &ball.radius;
        let mut gaps = Vec::new();
        for (x, (lo, hi)) in ball.center.coords().iter().zip(self.lo.iter().zip(&self.hi)) {
            let d = if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                continue;
            };
            if &d > r {
                return false;
            }
            gaps.push(d);
        }
        gaps.len() <= 1 || gaps.iter().map(|d| d * d).sum::<Rational>() <= r * r
    }

    pub fn inside_ball(&self, ball: &Ball) -> bool {
        self.far_dist_sq(ball.center.coords()) <= &ball.radius * &ball.radius
    }

    pub fn center(&self) -> Vec<Rational> {
        let half = ratio(1, 2);
        self.lo.iter().zip(&self.hi).map(|(a, b)| (a + b) * &half).collect()
    }

    /// Interiors are disjoint.
    pub fn interiors_disjoint(&self, other: &RBox) -> bool {
        (0..self.dim()).any(|i| self.hi[i] <= other.lo[i] || other.hi[i] <= self.lo[i])
    }
}

/// `x ↦ ratio · P x + translation` with `P` a signed permutation:
/// `(P x)_i = signs[i] · x[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSimilarity {
    pub ratio: Rational,
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
    pub translation: Vec<Rational>,
}

impl ExactSimilarity {
    /// `x ↦ ratio · x + translation`.
    pub fn scaling(ratio: Rational, translation: Vec<Rational>) -> Self {
        let d = translation.len();
        ExactSimilarity {
            ratio,
            perm: (0..d).collect(),
            signs: vec![1; d],
            translation,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaling(Rational::one(), vec![Rational::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    fn linear(&self, x: &[Rational]) -> Vec<Rational> {
        (0..self.dim())
            .map(|i| {
                let v = &x[self.perm[i]] * &self.ratio;
                if self.signs[i] < 0 {
                    -v
                } else {
                    v
                }
            })
            .collect()
    }

    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        let mut y = self.linear(x);
        for (yi, ti) in y.iter_mut().zip(&self.translation) {
            *yi += ti;
        }
        y
    }

    pub fn invert(&self, y: &[Rational]) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.dim()];
        for i in 0..self.dim() {
            let z = (&y[i] - &self.translation[i]) / &self.ratio;
            x[self.perm[i]] = if self.signs[i] < 0 { -z } else { z };
        }
        x
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &ExactSimilarity) -> ExactSimilarity {
        let d = self.dim();
        let mut perm = vec![0; d];
        let mut signs = vec![1; d];
        for k in 0..d {
            perm[k] = inner.perm[self.perm[k]];
            signs[k] = self.signs[k] * inner.signs[self.perm[k]];
        }
        ExactSimilarity {
            ratio: &self.ratio * &inner.ratio,
            perm,
            signs,
            translation: self.apply(&inner.translation),
        }
    }

    pub fn image_box(&self, b: &RBox) -> RBox {
        let a = self.apply(&b.lo);
        let c = self.apply(&b.hi);
        let (lo, hi) = a
            .into_iter()
            .zip(c)
            .map(|(x, y)| if x <= y { (x, y) } else { (y, x) })
            .unzip();
        RBox::new(lo, hi)
    }

    /// Unique solution of `x = φ(x)`.
    pub fn fixed_point(&self) -> Vec<Rational> {
        // (I - rP) x = t, solved by Gauss-Jordan elimination over the rationals.
        let d = self.dim();
        let mut m = vec![vec![Rational::zero(); d + 1]; d];
        for i in 0..d {
            m[i][i] += Rational::one();
            let coeff = if self.signs[i] < 0 { self.ratio.clone() } else { -self.ratio.clone() };
            m[i][self.perm[i]] += coeff;
            m[i][d] = self.translation[i].clone();
        }
        for col in 0..d {
            let pivot = (col..d)
                .find(|&r| !m[r][col].is_zero())
                .expect("contracting similarity has a unique fixed point");
            m.swap(col, pivot);
            let inv = Rational::one() / &m[col][col];
            for v in m[col].iter_mut() {
                *v *= &inv;
            }
            for r in 0..d {
                if r != col && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for c in 0..=d {
                        let delta = &f * &m[col][c];
                        m[r][c] -= delta;
                    }
                }
            }
        }
        m.into_iter().map(|row| row[d].clone()).collect()
    }

    pub fn to_float(&self) -> Similarity {
        let d = self.dim();
        let mut theta = vec![vec![0.0; d]; d];
        for i in 0..d {
            theta[i][self.perm[i]] = f64::from(self.signs[i]);
        }
        Similarity {
            ratio: rational::to_f64(&self.ratio),
            orthogonal: theta,
            translation: self.translation.iter().map(rational::to_f64).collect(),
            exact: Some(self.clone()),
        }
    }
}

/// `x ↦ ratio · Θ x + translation` with `Θ` orthogonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Similarity {
    pub ratio: f64,
    pub orthogonal: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
    pub exact: Option<ExactSimilarity>,
}

impl Similarity {
    pub fn new(ratio: f64, orthogonal: Vec<Vec<f64>>, translation: Vec<f64>) -> Self {
        Similarity {
            ratio,
            orthogonal,
            translation,
            exact: None,
        }
    }

    /// Planar similarity with rotation angle `angle` (radians).
    pub fn planar(ratio: f64, angle: f64, translation: [f64; 2]) -> Self {
        let (s, c) = angle.sin_cos();
        Similarity::new(ratio, vec![vec![c, -s], vec![s, c]], translation.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.orthogonal
            .iter()
            .zip(&self.translation)
            .map(|(row, t)| self.ratio * row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + t)
            .collect()
    }

    fn is_orthogonal(&self) -> bool {
        let d = self.dim();
        if self.orthogonal.len() != d || self.orthogonal.iter().any(|r| r.len() != d) {
            return false;
        }
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = (0..d).map(|k| self.orthogonal[k][i] * self.orthogonal[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot - target).abs() > 1e-10 {
                    return false;
                }
            }
        }
        true
    }
}

/// Finite family of contracting similarities on `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ifs {
    pub name: String,
    pub maps: Vec<Similarity>,
    /// Box mapped into itself by every map; required for exact use.
    pub seed_box: Option<RBox>,
}

impl Ifs {
    pub fn new(name: impl Into<String>, maps: Vec<Similarity>) -> Result<Self, IfsError> {
        if maps.is_empty() {
            return Err(IfsError::Empty);
        }
        let d = maps[0].dim();
        for (i, m) in maps.iter().enumerate() {
            if m.dim() != d || d == 0 {
                return Err(IfsError::DimensionMismatch(i));
            }
            if !(m.ratio > 0.0 && m.ratio < 1.0) {
                return Err(IfsError::NotContracting(i));
            }
            if !m.is_orthogonal() {
                return Err(IfsError::NotOrthogonal(i));
            }
        }
        Ok(Ifs {
            name: name.into(),
            maps,
            seed_box: None,
        })
    }

    /// Builds an IFS from exact maps and a seed box they map into itself.
    pub fn exact(name: impl Into<String>, maps: Vec<ExactSimilarity>, seed: RBox) -> Result<Self, IfsError> {
        for (i, m) in maps.iter().enumerate() {
            if m.dim() != seed.dim() {
                return Err(IfsError::DimensionMismatch(i));
            }
            if !seed.contains_box(&m.image_box(&seed)) {
                return Err(IfsError::SeedNotInvariant(i));
            }
        }
        let mut ifs = Ifs::new(name, maps.iter().map(ExactSimilarity::to_float).collect())?;
        ifs.seed_box = Some(seed);
        Ok(ifs)
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.ratio).collect()
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios().into_iter().fold(0.0, f64::max)
    }

    /// Exact maps and seed box, when every map is exact.
    pub fn exact_parts(&self) -> Option<(Vec<ExactSimilarity>, RBox)> {
        let maps: Option<Vec<_>> = self.maps.iter().map(|m| m.exact.clone()).collect();
        Some((maps?, self.seed_box.clone()?))
    }
}

pub mod presets {
    //! Classical self-similar sets.
    use super::*;

    pub const NAMES: [&str; 5] = ["cantor", "koch", "sierpinski", "square", "dyadic"];

    /// Middle-third Cantor set `{x/3, x/3 + 2/3}`.
    pub fn cantor() -> Ifs {
        Ifs::exact(
            "cantor",
            vec![
                ExactSimilarity::scaling(ratio(1, 3), vec![ratio(0, 1)]),
                ExactSimilarity::scaling(ratio(1, 3), vec![ratio(2, 3)]),
            ],
            RBox::unit(1),
        )
        .expect("cantor preset")
    }

    /// Right-angled Sierpinski gasket on the triangle `(0,0), (1,0), (0,1)`.
    pub fn sierpinski() -> Ifs {
        let half = ratio(1, 2);
        let z = ratio(0, 1);
        Ifs::exact(
            "sierpinski",
            vec![
                ExactSimilarity::scaling(half.clone(), vec![z.clone(), z.clone()]),
                ExactSimilarity::scaling(half.clone(), vec![half.clone(), z.clone()]),
                ExactSimilarity::scaling(half.clone(), vec![z, half]),
            ],
            RBox::unit(2),
        )
        .expect("sierpinski preset")
    }

    /// Koch curve from `(0,0)` to `(1,0)`.
    pub fn koch() -> Ifs {
        let third = 1.0 / 3.0;
        let angle = std::f64::consts::FRAC_PI_3;
        Ifs::new(
            "koch",
            vec![
                Similarity::planar(third, 0.0, [0.0, 0.0]),
                Similarity::planar(third, angle, [third, 0.0]),
                Similarity::planar(third, -angle, [0.5, 3f64.sqrt() / 6.0]),
                Similarity::planar(third, 0.0, [2.0 * third, 0.0]),
            ],
        )
        .expect("koch preset")
    }

    /// Four half-scale copies of the unit square; the attractor is the square.
    pub fn square() -> Ifs {
        let half = ratio(1, 2);
        let z = ratio(0, 1);
        let maps = [(&z, &z), (&half, &z), (&z, &half), (&half, &half)]
            .into_iter()
            .map(|(x, y)| ExactSimilarity::scaling(half.clone(), vec![x.clone(), y.clone()]))
            .collect();
        Ifs::exact("square", maps, RBox::unit(2)).expect("square preset")
    }

    /// `{x/2, x/2 + 1/2}`; equal weights give Lebesgue measure on `[0,1]`.
    pub fn dyadic() -> Ifs {
        Ifs::exact(
            "dyadic",
            vec![
                ExactSimilarity::scaling(ratio(1, 2), vec![ratio(0, 1)]),
                ExactSimilarity::scaling(ratio(1, 2), vec![ratio(1, 2)]),
            ],
            RBox::unit(1),
        )
        .expect("dyadic preset")
    }

    pub fn by_name(name: &str) -> Result<Ifs, IfsError> {
        match name {
            "cantor" => Ok(cantor()),
            "koch" => Ok(koch()),
            "sierpinski" => Ok(sierpinski()),
            "square" => Ok(square()),
            "dyadic" => Ok(dyadic()),
            other => Err(IfsError::UnknownPreset(other.to_string())),
        }
    }
}

/// One exact cell `φ_w(seed box)` together with its composite map.
#[derive(Debug, Clone)]
pub struct ExactCell {
    pub word: Vec<usize>,
    pub map: ExactSimilarity,
    pub region: RBox,
}

/// Exact cell tree of an IFS whose maps are all exact.
#[derive(Debug, Clone)]
pub struct ExactIfs {
    pub maps: Vec<ExactSimilarity>,
    pub seed: RBox,
    pub fixed_points: Vec<Vec<Rational>>,
}

impl ExactIfs {
    pub fn from_ifs(ifs: &Ifs) -> Option<Self> {
        let (maps, seed) = ifs.exact_parts()?;
        let fixed_points = maps.iter().map(ExactSimilarity::fixed_point).collect();
        Some(ExactIfs {
            maps,
            seed,
            fixed_points,
        })
    }

    pub fn dim(&self) -> usize {
        self.seed.dim()
    }

    pub fn root(&self) -> ExactCell {
        ExactCell {
            word: Vec::new(),
            map: ExactSimilarity::identity(self.dim()),
            region: self.seed.clone(),
        }
    }

    /// Children `φ_w ∘ φ_i`, in map order.
    pub fn children(&self, cell: &ExactCell) -> Vec<ExactCell> {
        self.maps
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let map = cell.map.compose(m);
                let region = map.image_box(&self.seed);
                let mut word = cell.word.clone();
                word.push(i);
                ExactCell { word, map, region }
            })
            .collect()
    }

    /// All cells of a given depth, words in lexicographic order.
    pub fn cells(&self, depth: u32) -> Result<Vec<ExactCell>, IfsError> {
        let count = self.maps.len().checked_pow(depth).unwrap_or(usize::MAX);
        if count > MAX_CELLS {
            return Err(IfsError::TooManyCells(count));
        }
        let mut level = vec![self.root()];
        for _ in 0..depth {
            level = level.iter().flat_map(|c| self.children(c)).collect();
        }
        Ok(level)
    }

    /// Points of the attractor carried by a cell: images of the fixed points.
    pub fn representatives(&self, cell: &ExactCell) -> Vec<Vec<Rational>> {
        self.fixed_points.iter().map(|p| cell.map.apply(p)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorCell {
    pub word: Vec<usize>,
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Depth-`n` Hutchinson iterate of a seed ball.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractorApprox {
    pub depth: u32,
    pub seed_center: Vec<f64>,
    pub seed_radius: f64,
    pub cells: Vec<AttractorCell>,
}

impl AttractorApprox {
    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.cells.iter().map(|c| c.center.as_slice())
    }

    pub fn max_cell_diameter(&self) -> f64 {
        self.cells.iter().map(|c| 2.0 * c.radius).fold(0.0, f64::max)
    }
}

/// Smallest radius `r ≥ seed` about `center` with `φ_i(B(center, r)) ⊆ B(center, r)` for all maps.
fn invariant_radius(ifs: &Ifs, center: &[f64], seed: f64) -> f64 {
    ifs.maps.iter().fold(seed, |r, m| {
        let image = m.apply(center);
        let shift = image.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        r.max(shift / (1.0 - m.ratio))
    })
}

/// Cells `φ_w(seed)` for all words of length `depth`. A seed that is not
/// mapped into itself is enlarged about its center until it is.
pub fn iterate_attractor(ifs: &Ifs, depth: u32, seed: &Ball) -> Result<AttractorApprox, IfsError> {
    if seed.dim() != ifs.dim() {
        return Err(IfsError::DimensionMismatch(0));
    }
    let count = ifs.maps.len().checked_pow(depth).unwrap_or(usize::MAX);
    if count > MAX_CELLS {
        return Err(IfsError::TooManyCells(count));
    }
    let center = seed.center.to_f64();
    let radius = invariant_radius(ifs, &center, rational::to_f64(&seed.radius));
    let mut cells = vec![AttractorCell {
        word: Vec::new(),
        center: center.clone(),
        radius,
    }];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(cells.len() * ifs.maps.len());
        for (i, m) in ifs.maps.iter().enumerate() {
            for c in &cells {
                let mut word = Vec::with_capacity(c.word.len() + 1);
                word.push(i);
                word.extend_from_slice(&c.word);
                next.push(AttractorCell {
                    word,
                    center: m.apply(&c.center),
                    radius: m.ratio * c.radius,
                });
            }
        }
        cells = next;
    }
    Ok(AttractorApprox {
        depth,
        seed_center: center,
        seed_radius: radius,
        cells,
    })
}

/// Solution `s` of `Σ ρ_i^s = 1`.
pub fn similarity_dimension(ifs: &Ifs) -> f64 {
    let ratios = ifs.ratios();
    let m = ratios.len() as f64;
    let first = ratios[0];
    if ratios.iter().all(|&r| r == first) {
        return m.ln() / (1.0 / first).ln();
    }
    let moran = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0, m.ln() / (1.0 / ifs.max_ratio()).ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if moran(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscReport {
    pub holds: bool,
    /// `false` when float interval arithmetic was used; a negative answer may then be spurious.
    pub exact: bool,
    pub detail: String,
}

/// Checks `φ_i(U) ⊆ U` and pairwise disjointness of `φ_i(U)` for an open box `U`.
pub fn check_open_set_condition(ifs: &Ifs, candidate: &RBox) -> OscReport {
    if candidate.dim() != ifs.dim() {
        return OscReport {
            holds: false,
            exact: true,
            detail: "candidate dimension mismatch".into(),
        };
    }
    if (0..candidate.dim()).any(|i| candidate.lo[i] >= candidate.hi[i]) {
        return OscReport {
            holds: false,
            exact: true,
            detail: "candidate box is empty".into(),
        };
    }
    if let Some((maps, _)) = ifs.exact_parts().or_else(|| {
        let maps: Option<Vec<_>> = ifs.maps.iter().map(|m| m.exact.clone()).collect();
        maps.map(|m| (m, candidate.clone()))
    }) {
        let images: Vec<RBox> = maps.iter().map(|m| m.image_box(candidate)).collect();
        if let Some(i) = images.iter().position(|b| !candidate.contains_box(b)) {
            return OscReport {
                holds: false,
                exact: true,
                detail: format!("image {i} leaves the candidate"),
            };
        }
        for i in 0..images.len() {
            for j in i + 1..images.len() {
                if !images[i].interiors_disjoint(&images[j]) {
                    return OscReport {
                        holds: false,
                        exact: true,
                        detail: format!("images {i} and {j} overlap"),
                    };
                }
            }
        }
        return OscReport {
            holds: true,
            exact: true,
            detail: "exact rational check".into(),
        };
    }
    const SLACK: f64 = 1e-12;
    let lo: Vec<f64> = candidate.lo.iter().map(rational::to_f64).collect();
    let hi: Vec<f64> = candidate.hi.iter().map(rational::to_f64).collect();
    let d = lo.len();
    let images: Vec<(Vec<f64>, Vec<f64>)> = ifs
        .maps
        .iter()
        .map(|m| {
            let mut blo = vec![f64::INFINITY; d];
            let mut bhi = vec![f64::NEG_INFINITY; d];
            for corner in 0..(1usize << d) {
                let x: Vec<f64> = (0..d)
                    .map(|k| if corner >> k & 1 == 1 { hi[k] } else { lo[k] })
                    .collect();
                for (k, v) in m.apply(&x).into_iter().enumerate() {
                    blo[k] = blo[k].min(v);
                    bhi[k] = bhi[k].max(v);
                }
            }
            (blo, bhi)
        })
        .collect();
    for (i, (blo, bhi)) in images.iter().enumerate() {
        if (0..d).any(|k| blo[k] < lo[k] - SLACK || bhi[k] > hi[k] + SLACK) {
            return OscReport {
                holds: false,
                exact: false,
                detail: format!("bounding box of image {i} leaves the candidate"),
            };
        }
    }
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            let (a, b) = (&images[i], &images[j]);
            if !(0..d).any(|k| a.1[k] <= b.0[k] + SLACK || b.1[k] <= a.0[k] + SLACK) {
                return OscReport {
                    holds: false,
                    exact: false,
                    detail: format!("bounding boxes of images {i} and {j} overlap"),
                };
            }
        }
    }
    OscReport {
        holds: true,
        exact: false,
        detail: "float bounding-box check".into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxCountingFit {
    pub estimate: f64,
    pub intercept: f64,
    /// `(scale, occupied boxes)` per scale.
    pub counts: Vec<(f64, usize)>,
    pub residuals: Vec<f64>,
}

/// Least-squares slope of `log N(ε)` against `log(1/ε)` over the cell centers.
pub fn box_counting_dimension(approx: &AttractorApprox, scales: &[f64]) -> Result<BoxCountingFit, IfsError> {
    if scales.len() < 4 {
        return Err(IfsError::DegenerateScales("need at least 4 scales".into()));
    }
    if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(IfsError::DegenerateScales("scales must be positive".into()));
    }
    let min = scales.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = scales.iter().cloned().fold(0.0, f64::max);
    if max / min < 100.0 {
        return Err(IfsError::DegenerateScales("scales must span two decades".into()));
    }
    if min < approx.max_cell_diameter() {
        return Err(IfsError::DegenerateScales("smallest scale is below the cell size".into()));
    }
    let mut distinct: Vec<f64> = scales.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() != scales.len() {
        return Err(IfsError::DegenerateScales("duplicate scales".into()));
    }
    let counts: Vec<(f64, usize)> = scales
        .iter()
        .map(|&eps| {
            let boxes: HashSet<Vec<i64>> = approx
                .points()
                .map(|p| p.iter().map(|x| (x / eps).floor() as i64).collect())
                .collect();
            (eps, boxes.len())
        })
        .collect();
    let xs: Vec<f64> = counts.iter().map(|(e, _)| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|(_, n)| (*n as f64).ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    Ok(BoxCountingFit {
        estimate: slope,
        intercept,
        counts,
        residuals,
    })
}

/// `(slope, intercept)` of the least-squares line through the points.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Point;

    fn unit_seed(dim: usize) -> Ball {
        Ball::new(Point::new(vec![ratio(1, 2); dim]), ratio(1, 2)).unwrap()
    }

    #[test]
    fn cantor_depth_two_left_endpoints() {
        let approx = iterate_attractor(&presets::cantor(), 2, &unit_seed(1)).unwrap();
        let lefts: Vec<f64> = approx.cells.iter().map(|c| c.center[0] - c.radius).collect();
        let expected = [0.0, 2.0 / 9.0, 2.0 / 3.0, 8.0 / 9.0];
        assert_eq!(lefts.len(), 4);
        for (a, b) in lefts.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn depth_zero_is_seed_and_sierpinski_depth_one() {
        let approx = iterate_attractor(&presets::cantor(), 0, &unit_seed(1)).unwrap();
        assert_eq!(approx.cells.len(), 1);
        assert_eq!(approx.cells[0].center, vec![0.5]);
        let sier = iterate_attractor(&presets::sierpinski(), 1, &unit_seed(2)).unwrap();
        assert_eq!(sier.cells.len(), 3);
        assert!(sier.cells.iter().all(|c| (c.radius - sier.seed_radius / 2.0).abs() < 1e-15));
    }

    #[test]
    fn small_seed_is_enlarged() {
        let seed = Ball::new(Point::new(vec![ratio(1, 2)]), ratio(1, 100)).unwrap();
        let approx = iterate_attractor(&presets::cantor(), 1, &seed).unwrap();
        assert!(approx.seed_radius >= 0.5 - 1e-12);
    }

    #[test]
    fn similarity_dimensions() {
        assert!((similarity_dimension(&presets::cantor()) - 2f64.ln() / 3f64.ln()).abs() < 1e-15);
        assert!((similarity_dimension(&presets::koch()) - 4f64.ln() / 3f64.ln()).abs() < 1e-15);
        assert!((similarity_dimension(&presets::sierpinski()) - 3f64.ln() / 2f64.ln()).abs() < 1e-15);
        let mixed = Ifs::new(
            "mixed",
            vec![
                Similarity::new(0.5, vec![vec![1.0]], vec![0.0]),
                Similarity::new(0.25, vec![vec![1.0]], vec![0.75]),
            ],
        )
        .unwrap();
        let s = similarity_dimension(&mixed);
        assert!((0.5f64.powf(s) + 0.25f64.powf(s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn open_set_condition() {
        let unit = RBox::unit(1);
        let report = check_open_set_condition(&presets::cantor(), &unit);
        assert!(report.holds && report.exact);

        let twin = Ifs::exact(
            "twin",
            vec![
                ExactSimilarity::scaling(ratio(1, 3), vec![ratio(0, 1)]),
                ExactSimilarity::scaling(ratio(1, 3), vec![ratio(0, 1)]),
            ],
            RBox::unit(1),
        )
        .unwrap();
        assert!(!check_open_set_condition(&twin, &unit).holds);

        let report = check_open_set_condition(&presets::sierpinski(), &RBox::unit(2));
        assert!(report.holds && report.exact);

        let report = check_open_set_condition(&presets::koch(), &RBox::unit(2));
        assert!(!report.exact);
    }

    #[test]
    fn rejects_bad_maps() {
        assert_eq!(Ifs::new("empty", vec![]).unwrap_err(), IfsError::Empty);
        let expanding = Similarity::new(1.5, vec![vec![1.0]], vec![0.0]);
        assert_eq!(Ifs::new("x", vec![expanding]).unwrap_err(), IfsError::NotContracting(0));
        let skew = Similarity::new(0.5, vec![vec![1.0, 0.5], vec![0.0, 1.0]], vec![0.0, 0.0]);
        assert_eq!(Ifs::new("x", vec![skew]).unwrap_err(), IfsError::NotOrthogonal(0));
    }

    #[test]
    fn exact_maps_compose_and_invert() {
        let f = ExactSimilarity {
            ratio: ratio(1, 2),
            perm: vec![1, 0],
            signs: vec![-1, 1],
            translation: vec![ratio(1, 2), ratio(1, 4)],
        };
        let g = ExactSimilarity::scaling(ratio(1, 3), vec![ratio(1, 3), ratio(0, 1)]);
        let x = vec![ratio(2, 7), ratio(-5, 3)];
        assert_eq!(f.compose(&g).apply(&x), f.apply(&g.apply(&x)));
        assert_eq!(f.invert(&f.apply(&x)), x);
        let p = f.fixed_point();
        assert_eq!(f.apply(&p), p);
    }

    #[test]
    fn box_counting_cantor_and_controls() {
        let approx = iterate_attractor(&presets::cantor(), 10, &unit_seed(1)).unwrap();
        let scales: Vec<f64> = (1..=6).map(|k| 3f64.powi(-k)).collect();
        let fit = box_counting_dimension(&approx, &scales).unwrap();
        assert!((fit.estimate - 2f64.ln() / 3f64.ln()).abs() < 0.05);

        let square = iterate_attractor(&presets::square(), 8, &unit_seed(2)).unwrap();
        let scales: Vec<f64> = (0..=7).map(|k| 2f64.powi(-k)).collect();
        let fit = box_counting_dimension(&square, &scales).unwrap();
        assert!((fit.estimate - 2.0).abs() < 0.05);

        let point = Ifs::new("point", vec![Similarity::new(0.5, vec![vec![1.0]], vec![0.0])]).unwrap();
        let approx = iterate_attractor(&point, 30, &unit_seed(1)).unwrap();
        let fit = box_counting_dimension(&approx, &scales).unwrap();
        assert!(fit.estimate.abs() < 1e-12);
    }

    #[test]
    fn box_counting_rejects_degenerate_scales() {
        let approx = iterate_attractor(&presets::cantor(), 6, &unit_seed(1)).unwrap();
        assert!(box_counting_dimension(&approx, &[0.1, 0.05, 0.02]).is_err());
        assert!(box_counting_dimension(&approx, &[0.1, 0.09, 0.08, 0.07]).is_err());
        assert!(box_counting_dimension(&approx, &[0.5, 0.1, -0.01, 0.001]).is_err());
    }
}
