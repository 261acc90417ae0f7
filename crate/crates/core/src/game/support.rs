//! Support sets for the constrained game.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{Ball, GameError, Point};
use crate::fractal_ifs::{presets, ExactCell, ExactIfs, Ifs, RBox};
use crate::rational::{self, Rational};

/// Registered support ids accepted by [`resolve_support`].
pub const SUPPORT_IDS: [&str; 4] = ["cantor", "sierpinski", "interval", "square"];

/// Hard limit on depths derived from radii.
const MAX_DEPTH: u32 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    In,
    Out,
    /// The depth budget ran out before membership was decided.
    Unresolved,
}

/// Compact set that constrains ball centers.
pub trait SupportOracle: Send + Sync {
    fn id(&self) -> &str;

    fn dim(&self) -> usize;

    fn contains(&self, p: &Point, depth: u32) -> Membership;

    /// Cell representatives at `depth` lying in `ball`, sorted and deduplicated.
    /// Every returned point satisfies `contains == In`.
    fn enumerate_in_ball(&self, ball: &Ball, depth: u32) -> Vec<Point>;

    /// Upper bound on the squared diameter.
    fn diameter_sq(&self) -> Rational;

    /// Smallest depth whose cells have diameter at most `r`.
    fn depth_for_radius(&self, r: &Rational) -> u32;
}

/// Attractor of an exact IFS used as a support.
#[derive(Debug, Clone)]
pub struct IfsSupport {
    id: String,
    tree: ExactIfs,
    max_ratio: Rational,
    diameter_sq: Rational,
    lattice: Option<Lattice>,
}

/// Integer form of an IFS on the unit box whose maps are all `x ↦ (x + e_i)/b`.
///
/// A depth-`k` cell is `(a + [0,1]^d)/b^k` with `a ∈ ℤ^d`, so descent and
/// membership run on integers without any gcd work.
#[derive(Debug, Clone)]
struct Lattice {
    base: BigInt,
    digits: Vec<Vec<BigInt>>,
    /// Fixed points `e_i/(b - 1)`.
    fixed: Vec<Vec<Rational>>,
}

impl Lattice {
    fn from_tree(tree: &ExactIfs) -> Option<Self> {
        let d = tree.dim();
        if tree.seed != RBox::unit(d) {
            return None;
        }
        let first = tree.maps.first()?;
        if !first.ratio.numer().is_one() || first.ratio.denom() < &BigInt::from(2) {
            return None;
        }
        let base = first.ratio.denom().clone();
        let b = Rational::from_integer(base.clone());
        let mut digits = Vec::with_capacity(tree.maps.len());
        for m in &tree.maps {
            let plain = m.perm.iter().enumerate().all(|(i, &p)| p == i) && m.signs.iter().all(|&s| s > 0);
            if !plain || m.ratio != first.ratio {
                return None;
            }
            let e: Vec<Rational> = m.translation.iter().map(|t| t * &b).collect();
            if !e.iter().all(|v| v.is_integer()) {
                return None;
            }
            digits.push(e.into_iter().map(|v| v.to_integer()).collect());
        }
        let b_minus = &b - Rational::one();
        let fixed = digits
            .iter()
            .map(|e: &Vec<BigInt>| e.iter().map(|v| Rational::from_integer(v.clone()) / &b_minus).collect())
            .collect();
        Some(Lattice { base, digits, fixed })
    }

    fn contains(&self, p: &Point, depth: u32) -> Membership {
        let den = rational::common_denominator(p.coords());
        let num: Vec<BigInt> = p.coords().iter().map(|x| (x * Rational::from_integer(den.clone())).to_integer()).collect();
        if num.iter().any(|n| n.is_negative() || n > &den) {
            return Membership::Out;
        }
        self.explore(num, &den, &mut HashSet::new(), &mut HashSet::new(), depth)
    }

    /// Same search as [`IfsSupport::explore`] on numerators over a fixed denominator.
    fn explore(
        &self,
        x: Vec<BigInt>,
        den: &BigInt,
        path: &mut HashSet<Vec<BigInt>>,
        dead: &mut HashSet<Vec<BigInt>>,
        budget: u32,
    ) -> Membership {
        if path.contains(&x) {
            return Membership::In;
        }
        if dead.contains(&x) {
            return Membership::Out;
        }
        if budget == 0 {
            return Membership::Unresolved;
        }
        let scaled: Vec<BigInt> = x.iter().map(|v| v * &self.base).collect();
        path.insert(x.clone());
        let mut unresolved = false;
        for e in &self.digits {
            let shifted: Vec<BigInt> = scaled.iter().zip(e).map(|(v, e)| v - e * den).collect();
            if shifted.iter().any(|v| v.is_negative() || v > den) {
                continue;
            }
            match self.explore(shifted, den, path, dead, budget - 1) {
                Membership::In => {
                    path.remove(&x);
                    return Membership::In;
                }
                Membership::Unresolved => unresolved = true,
                Membership::Out => {}
            }
        }
        path.remove(&x);
        if unresolved {
            Membership::Unresolved
        } else {
            dead.insert(x);
            Membership::Out
        }
    }

    fn enumerate(&self, ball: &Ball, depth: u32) -> Vec<Point> {
        let cd = rational::common_denominator(ball.center.coords());
        let target = IntBall {
            num: ball
                .center
                .coords()
                .iter()
                .map(|x| (x * Rational::from_integer(cd.clone())).to_integer())
                .collect(),
            den: cd,
            r_num_sq: ball.radius.numer() * ball.radius.numer(),
            r_den_sq: ball.radius.denom() * ball.radius.denom(),
        };
        let mut out = BTreeSet::new();
        let root = vec![BigInt::zero(); self.fixed[0].len()];
        self.collect(root, BigInt::one(), 0, &target, depth, &mut out);
        out.into_iter().collect()
    }

    fn collect(
        &self,
        a: Vec<BigInt>,
        scale: BigInt,
        level: u32,
        target: &IntBall,
        depth: u32,
        out: &mut BTreeSet<Point>,
    ) {
        if !target.meets_cell(&a, &scale) {
            return;
        }
        if level == depth {
            // Representatives (a(b-1) + e)/(scale·(b-1)).
            let b_minus = &self.base - BigInt::one();
            let den = &scale * &b_minus;
            for e in &self.digits {
                let num: Vec<BigInt> = a.iter().zip(e).map(|(ai, ei)| ai * &b_minus + ei).collect();
                if target.holds(&num, &den) {
                    let s = Rational::from_integer(den.clone());
                    out.insert(Point::new(num.into_iter().map(|n| Rational::from_integer(n) / &s).collect()));
                }
            }
            return;
        }
        let child_scale = &scale * &self.base;
        for e in &self.digits {
            let child = a.iter().zip(e).map(|(ai, ei)| ai * &self.base + ei).collect();
            self.collect(child, child_scale.clone(), level + 1, target, depth, out);
        }
    }
}

/// Ball `B(num/den, r)` with `r² = r_num_sq/r_den_sq`.
struct IntBall {
    num: Vec<BigInt>,
    den: BigInt,
    r_num_sq: BigInt,
    r_den_sq: BigInt,
}

impl IntBall {
    /// The closed cell `(a + [0,1]^d)/scale` meets the ball.
    fn meets_cell(&self, a: &[BigInt], scale: &BigInt) -> bool {
        // Work in units of 1/(scale·den).
        let mut acc = BigInt::zero();
        for (ai, ci) in a.iter().zip(&self.num) {
            let lo = ai * &self.den;
            let hi = &lo + &self.den;
            let x = ci * scale;
            let gap = if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                continue;
            };
            acc += &gap * &gap;
        }
        let unit = scale * &self.den;
        acc * &self.r_den_sq <= &self.r_num_sq * &unit * &unit
    }

    /// The point `num/den` lies in the ball.
    fn holds(&self, num: &[BigInt], den: &BigInt) -> bool {
        let mut acc = BigInt::zero();
        for (ni, ci) in num.iter().zip(&self.num) {
            let gap = ni * &self.den - ci * den;
            acc += &gap * &gap;
        }
        let unit = den * &self.den;
        acc * &self.r_den_sq <= &self.r_num_sq * &unit * &unit
    }
}

impl IfsSupport {
    pub fn new(id: impl Into<String>, ifs: &Ifs) -> Result<Self, GameError> {
        let id = id.into();
        let tree = ExactIfs::from_ifs(ifs).ok_or_else(|| GameError::UnknownSupport(format!("{id} (not exact)")))?;
        let max_ratio = tree
            .maps
            .iter()
            .map(|m| m.ratio.clone())
            .max()
            .expect("IFS has maps");
        let diameter_sq = tree.seed.far_dist_sq(&tree.seed.lo);
        let lattice = Lattice::from_tree(&tree);
        Ok(IfsSupport {
            id,
            tree,
            max_ratio,
            diameter_sq,
            lattice,
        })
    }

    pub fn tree(&self) -> &ExactIfs {
        &self.tree
    }

    fn explore(
        &self,
        x: Vec<Rational>,
        path: &mut HashSet<Vec<Rational>>,
        dead: &mut HashSet<Vec<Rational>>,
        budget: u32,
    ) -> Membership {
        if path.contains(&x) {
            // A periodic address: the point is a fixed point of some composite map.
            return Membership::In;
        }
        if dead.contains(&x) {
            return Membership::Out;
        }
        if budget == 0 {
            return Membership::Unresolved;
        }
        path.insert(x.clone());
        let mut unresolved = false;
        for m in &self.tree.maps {
            if !m.image_box(&self.tree.seed).contains(&x) {
                continue;
            }
            match self.explore(m.invert(&x), path, dead, budget - 1) {
                Membership::In => {
                    path.remove(&x);
                    return Membership::In;
                }
                Membership::Unresolved => unresolved = true,
                Membership::Out => {}
            }
        }
        path.remove(&x);
        if unresolved {
            Membership::Unresolved
        } else {
            dead.insert(x);
            Membership::Out
        }
    }

    fn collect(&self, cell: &ExactCell, ball: &Ball, depth: u32, out: &mut BTreeSet<Point>) {
        if !cell.region.intersects_ball(ball) {
            return;
        }
        if cell.word.len() as u32 == depth {
            for p in self.tree.representatives(cell) {
                let p = Point::new(p);
                if ball.contains_point(&p) {
                    out.insert(p);
                }
            }
            return;
        }
        for child in self.tree.children(cell) {
            self.collect(&child, ball, depth, out);
        }
    }
}

impl SupportOracle for IfsSupport {
    fn id(&self) -> &str {
        &self.id
    }

    fn dim(&self) -> usize {
        self.tree.dim()
    }

    fn contains(&self, p: &Point, depth: u32) -> Membership {
        if p.dim() != self.dim() || !self.tree.seed.contains(p.coords()) {
            return Membership::Out;
        }
        if let Some(l) = &self.lattice {
            return l.contains(p, depth);
        }
        self.explore(p.coords().to_vec(), &mut HashSet::new(), &mut HashSet::new(), depth)
    }

    fn enumerate_in_ball(&self, ball: &Ball, depth: u32) -> Vec<Point> {
        if ball.dim() != self.dim() {
            return Vec::new();
        }
        if let Some(l) = &self.lattice {
            return l.enumerate(ball, depth);
        }
        let mut out = BTreeSet::new();
        self.collect(&self.tree.root(), ball, depth, &mut out);
        out.into_iter().collect()
    }

    fn diameter_sq(&self) -> Rational {
        self.diameter_sq.clone()
    }

    fn depth_for_radius(&self, r: &Rational) -> u32 {
        // diameter² · ratio^{2n} ≤ r², cross-multiplied so no step reduces fractions.
        let (p, q) = (self.max_ratio.numer(), self.max_ratio.denom());
        let (p_sq, q_sq) = (p * p, q * q);
        let mut lhs = self.diameter_sq.numer() * r.denom() * r.denom();
        let mut rhs = r.numer() * r.numer() * self.diameter_sq.denom();
        let mut n = 0;
        while lhs > rhs && n < MAX_DEPTH {
            lhs *= &p_sq;
            rhs *= &q_sq;
            n += 1;
        }
        n
    }
}

/// Resolves a registered support id.
pub fn resolve_support(id: &str) -> Result<Box<dyn SupportOracle>, GameError> {
    let ifs = match id {
        "cantor" => presets::cantor(),
        "sierpinski" => presets::sierpinski(),
        "interval" => presets::dyadic(),
        "square" => presets::square(),
        other => return Err(GameError::UnknownSupport(other.to_string())),
    };
    Ok(Box::new(IfsSupport::new(id, &ifs)?))
}

impl Membership {
    pub fn is_in(self) -> bool {
        self == Membership::In
    }
}
