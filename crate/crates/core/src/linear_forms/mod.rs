//! Systems of linear forms `A ∈ ℝ^{M×N}`: lattice distances, badness by
//! enumeration, extended vectors, minors and the staged window schedule.

mod badness;
mod constants;
mod minors;
mod schedule;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};

pub use badness::{badness_infimum, BadnessResult, TracePoint, MAX_BADNESS_POINTS};
pub use constants::TheoremConstants;
pub use minors::{
    ball_grid, binomial, check_orthonormal, d_nu, d_nu_indexed, grad_d_nu, grad_d_nu_indexed, max_binomial, minor_sup_on_ball,
    minor_vector, minor_vector_primed, pairing_matrix, ExtendedVectors, MinorSup, MinorVector, RealMatrix,
    ORTHONORMAL_TOLERANCE,
};
pub use schedule::{
    all_window_solutions, cramer_check, final_badness_bound, lemma_rank_check, schedule_windows, solution_space_rank,
    window_has_solution, CramerReport, LemmaRankReport, TheoremSchedule, Window, MAX_WINDOW_POINTS,
};

/// Bits of precision kept for irrational entries.
pub const IRRATIONAL_BITS: usize = 192;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinearFormsError {
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("row {0} has {1} entries, expected {2}")]
    Ragged(usize, usize, usize),
    #[error("invalid matrix entry `{0}`")]
    Entry(String),
    #[error("invalid matrix file: {0}")]
    Json(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("enumeration of {0} points exceeds the limit of {1}")]
    Overflow(u128, u128),
    #[error("cap must be at least 1")]
    ZeroCap,
    #[error("vectors are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),
    #[error("minor order {nu} out of range 0..={max}")]
    Order { nu: usize, max: usize },
    #[error("invalid schedule: {0}")]
    Schedule(String),
}

/// `A = (γ_ij)` with `M` rows and `N` columns.
///
/// Entries are rationals. Irrational literals (`phi`, `sqrt(k)`, `cbrt(k)`) are
/// stored as lower approximants with error below `2^-192` and flagged inexact.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFormsMatrix {
    m: usize,
    n: usize,
    entries: Vec<Rational>,
    exact: Vec<bool>,
}

impl LinearFormsMatrix {
    pub fn new(m: usize, n: usize, entries: Vec<Rational>) -> Result<Self, LinearFormsError> {
        if m == 0 || n == 0 {
            return Err(LinearFormsError::Empty);
        }
        if entries.len() != m * n {
            return Err(LinearFormsError::Dimension {
                expected: m * n,
                got: entries.len(),
            });
        }
        Ok(LinearFormsMatrix {
            m,
            n,
            exact: vec![true; entries.len()],
            entries,
        })
    }

    /// Builds a matrix from rows of literals, see [`parse_entry`].
    pub fn from_rows<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self, LinearFormsError> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(LinearFormsError::Empty);
        }
        let mut entries = Vec::with_capacity(m * n);
        let mut exact = Vec::with_capacity(m * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(LinearFormsError::Ragged(i, row.len(), n));
            }
            for s in row {
                let (v, e) = parse_entry(s.as_ref())?;
                entries.push(v);
                exact.push(e);
            }
        }
        Ok(LinearFormsMatrix { m, n, entries, exact })
    }

    /// JSON array of arrays of strings.
    pub fn from_json(text: &str) -> Result<Self, LinearFormsError> {
        let rows: Vec<Vec<String>> = serde_json::from_str(text).map_err(|e| LinearFormsError::Json(e.to_string()))?;
        Self::from_rows(&rows)
    }

    /// The 1×1 matrix `(φ)`.
    pub fn golden_ratio() -> Self {
        Self::from_rows(&[vec!["phi"]]).expect("valid literal")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `H = M·N`.
    pub fn h(&self) -> usize {
        self.m * self.n
    }

    /// `L = M + N`.
    pub fn l(&self) -> usize {
        self.m + self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn is_exact(&self) -> bool {
        self.exact.iter().all(|&e| e)
    }

    /// Upper bound on `|stored − true|` over all entries.
    pub fn entry_error(&self) -> f64 {
        if self.is_exact() {
            0.0
        } else {
            2f64.powi(-(IRRATIONAL_BITS as i32))
        }
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        let mut exact = Vec::with_capacity(self.entries.len());
        for j in 0..self.n {
            for i in 0..self.m {
                entries.push(self.entries[i * self.n + j].clone());
                exact.push(self.exact[i * self.n + j]);
            }
        }
        LinearFormsMatrix {
            m: self.n,
            n: self.m,
            entries,
            exact,
        }
    }

    pub fn to_real(&self) -> RealMatrix {
        RealMatrix::new(self.m, self.n, self.entries.iter().map(rational::to_f64).collect())
    }

    /// `A·x` exactly.
    pub fn apply(&self, x: &[i64]) -> Result<Vec<Rational>, LinearFormsError> {
        if x.len() != self.n {
            return Err(LinearFormsError::Dimension {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok((0..self.m)
            .map(|i| {
                x.iter()
                    .enumerate()
                    .fold(Rational::zero(), |acc, (j, &xj)| acc + self.get(i, j) * Rational::from_integer(xj.into()))
            })
            .collect())
    }
}

/// Parses a matrix entry: a rational literal, `phi`, `sqrt(k)` or `cbrt(k)`,
/// optionally negated. Returns the stored value and whether it is exact.
pub fn parse_entry(s: &str) -> Result<(Rational, bool), LinearFormsError> {
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, t),
    };
    let bad = || LinearFormsError::Entry(s.to_string());
    let radicand = |name: &str| -> Option<Result<BigInt, LinearFormsError>> {
        let inner = body.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')?;
        let k = inner.trim();
        if k.is_empty() || k.len() > 64 || !k.bytes().all(|b| b.is_ascii_digit()) {
            return Some(Err(bad()));
        }
        Some(k.parse::<BigInt>().map_err(|_| bad()))
    };
    let scale = BigInt::one() << IRRATIONAL_BITS;
    let (value, exact) = if body == "phi" {
        let root5 = (BigInt::from(5) << (2 * IRRATIONAL_BITS)).sqrt();
        (Rational::new(&scale + root5, &scale * 2), false)
    } else if let Some(k) = radicand("sqrt") {
        let k = k?;
        let root = k.sqrt();
        if &root * &root == k {
            (Rational::from_integer(root), true)
        } else {
            (Rational::new((k << (2 * IRRATIONAL_BITS)).sqrt(), scale), false)
        }
    } else if let Some(k) = radicand("cbrt") {
        let k = k?;
        let root = k.cbrt();
        if &root * &root * &root == k {
            (Rational::from_integer(root), true)
        } else {
            (Rational::new((k << (3 * IRRATIONAL_BITS)).cbrt(), scale), false)
        }
    } else {
        if body.starts_with(['-', '+']) {
            return Err(bad());
        }
        (rational::parse_rational(body).map_err(|_| bad())?, true)
    };
    Ok((if neg { -value } else { value }, exact))
}

/// `‖(⟨v_1⟩, …, ⟨v_D⟩)‖_∞`, the sup-distance to `ℤ^D`.
pub fn dist_to_lattice(v: &[f64]) -> f64 {
    v.iter().map(|x| (x - x.round()).abs()).fold(0.0, f64::max)
}

pub fn dist_to_lattice_exact(v: &[Rational]) -> Rational {
    v.iter().map(rational::dist_to_integer).max().unwrap_or_else(Rational::zero)
}

/// Which family of extended vectors a witness pairs with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `X = (x, tail) ∈ ℤ^N × ℤ^M`, paired with the `A_i`.
    X,
    /// `Y = (y, tail) ∈ ℤ^M × ℤ^N`, paired with the `B_j`.
    Y,
}

/// Integer vector in `ℤ^L` whose leading block is nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerWitness {
    pub side: Side,
    pub coords: Vec<i64>,
}

impl IntegerWitness {
    pub fn new(side: Side, coords: Vec<i64>, a: &LinearFormsMatrix) -> Result<Self, LinearFormsError> {
        let w = IntegerWitness { side, coords };
        w.check(a)?;
        if w.head(a).iter().all(|&c| c == 0) {
            return Err(LinearFormsError::Entry("witness head must be nonzero".into()));
        }
        Ok(w)
    }

    fn check(&self, a: &LinearFormsMatrix) -> Result<(), LinearFormsError> {
        if self.coords.len() != a.l() {
            return Err(LinearFormsError::Dimension {
                expected: a.l(),
                got: self.coords.len(),
            });
        }
        Ok(())
    }

    fn head_len(&self, a: &LinearFormsMatrix) -> usize {
        match self.side {
            Side::X => a.n(),
            Side::Y => a.m(),
        }
    }

    /// `x` or `y`.
    pub fn head<'a>(&'a self, a: &LinearFormsMatrix) -> &'a [i64] {
        &self.coords[..self.head_len(a)]
    }

    pub fn tail<'a>(&'a self, a: &LinearFormsMatrix) -> &'a [i64] {
        &self.coords[self.head_len(a)..]
    }

    pub fn head_norm(&self, a: &LinearFormsMatrix) -> u64 {
        self.head(a).iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }
}

/// `(|A_1·X|, …, |A_M·X|)` or `(|B_1·Y|, …, |B_N·Y|)`, exactly.
pub fn form_values_exact(a: &LinearFormsMatrix, w: &IntegerWitness) -> Result<Vec<Rational>, LinearFormsError> {
    w.check(a)?;
    let rows = match w.side {
        Side::X => a.clone(),
        Side::Y => a.transpose(),
    };
    let head = w.head(a);
    let tail = w.tail(a);
    let products = rows.apply(head)?;
    Ok(products
        .into_iter()
        .zip(tail)
        .map(|(v, &t)| (v + Rational::from_integer(t.into())).abs())
        .collect())
}

pub fn form_values(a: &LinearFormsMatrix, w: &IntegerWitness) -> Result<Vec<f64>, LinearFormsError> {
    Ok(form_values_exact(a, w)?.iter().map(rational::to_f64).collect())
}

/// Completes `head` with the tail that minimizes every form value, so that
/// `‖𝒜(X)‖_∞ = dist(Ax, ℤ^M)`.
pub fn nearest_witness(a: &LinearFormsMatrix, side: Side, head: &[i64]) -> Result<IntegerWitness, LinearFormsError> {
    let rows = match side {
        Side::X => a.clone(),
        Side::Y => a.transpose(),
    };
    let products = rows.apply(head)?;
    let mut coords = head.to_vec();
    for v in &products {
        let t = -rational::nearest_integer(v);
        coords.push(t.to_i64().ok_or_else(|| LinearFormsError::Entry("tail overflows i64".into()))?);
    }
    IntegerWitness::new(side, coords, a)
}

/// Exact `‖x‖_∞^N · dist(Ax, ℤ^M)^M` for one integer vector.
pub fn badness_at(a: &LinearFormsMatrix, x: &[i64]) -> Result<Rational, LinearFormsError> {
    let dist = dist_to_lattice_exact(&a.apply(x)?);
    let norm = x.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
    let norm = Rational::from_integer(BigInt::from(norm));
    Ok(rational::pow(&norm, a.n() as u32) * rational::pow(&dist, a.m() as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn lattice_distance_examples() {
        assert_eq!(dist_to_lattice(&[0.0, 0.0]), 0.0);
        assert_eq!(dist_to_lattice(&[0.5]), 0.5);
        assert!((dist_to_lattice(&[1.25, 2.9]) - 0.25).abs() < 1e-15);
        assert_eq!(dist_to_lattice_exact(&[ratio(5, 4), ratio(29, 10)]), ratio(1, 4));
    }

    #[test]
    fn irrational_literals() {
        let (phi, exact) = parse_entry("phi").unwrap();
        assert!(!exact);
        let f = rational::to_f64(&phi);
        assert!((f - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        // φ² = φ + 1 up to the approximation error.
        let err = rational::to_f64(&(&phi * &phi - &phi - int(1))).abs();
        assert!(err < 1e-50);
        assert_eq!(parse_entry("sqrt(9)").unwrap(), (int(3), true));
        assert_eq!(parse_entry("-cbrt(8)").unwrap(), (int(-2), true));
        let (c, exact) = parse_entry("cbrt(2)").unwrap();
        assert!(!exact && (rational::to_f64(&c) - 2f64.cbrt()).abs() < 1e-15);
        assert_eq!(parse_entry(" -3/4 ").unwrap(), (ratio(-3, 4), true));
        for bad in ["sqrt(-2)", "sqrt()", "phi2", "--1", "cbrt(x)", ""] {
            assert!(parse_entry(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn form_values_one_by_one() {
        let a = LinearFormsMatrix::from_rows(&[vec!["2/7"]]).unwrap();
        let w = IntegerWitness::new(Side::X, vec![3, -1], &a).unwrap();
        assert_eq!(form_values_exact(&a, &w).unwrap(), vec![ratio(1, 7)]);
        // Zero tail and unit x give the column entries.
        let b = LinearFormsMatrix::from_rows(&[vec!["1/2", "-1/3"], vec!["2", "5/4"]]).unwrap();
        let x = IntegerWitness::new(Side::X, vec![1, 0, 0, 0], &b).unwrap();
        assert_eq!(form_values_exact(&b, &x).unwrap(), vec![ratio(1, 2), int(2)]);
        let y = IntegerWitness::new(Side::Y, vec![0, 1, 0, 0], &b).unwrap();
        assert_eq!(form_values_exact(&b, &y).unwrap(), vec![int(2), ratio(5, 4)]);
        assert!(IntegerWitness::new(Side::X, vec![0, 0, 1, 1], &b).is_err());
        assert!(IntegerWitness::new(Side::X, vec![1, 1], &b).is_err());
    }

    #[test]
    fn nearest_tail_recovers_lattice_distance() {
        let a = LinearFormsMatrix::from_rows(&[vec!["3/11", "-5/13"], vec!["7/9", "1/6"]]).unwrap();
        for x in [[1i64, 0], [2, -3], [5, 4], [-7, 2]] {
            let best = nearest_witness(&a, Side::X, &x).unwrap();
            let best_val = form_values_exact(&a, &best).unwrap().into_iter().max().unwrap();
            assert_eq!(best_val, dist_to_lattice_exact(&a.apply(&x).unwrap()));
            // Exhaustive over nearby tails.
            let mut brute = None::<Rational>;
            for t0 in -10..=10 {
                for t1 in -10..=10 {
                    let w = IntegerWitness::new(Side::X, vec![x[0], x[1], t0, t1], &a).unwrap();
                    let v = form_values_exact(&a, &w).unwrap().into_iter().max().unwrap();
                    brute = Some(brute.map_or(v.clone(), |b| b.min(v)));
                }
            }
            assert_eq!(brute.unwrap(), best_val);
        }
    }

    #[test]
    fn transpose_round_trip() {
        let a = LinearFormsMatrix::from_rows(&[vec!["1", "2", "3"], vec!["4", "5", "sqrt(2)"]]).unwrap();
        let t = a.transpose();
        assert_eq!((t.m(), t.n()), (3, 2));
        assert_eq!(t.get(2, 1), a.get(1, 2));
        assert_eq!(t.transpose(), a);
        assert!(!a.is_exact());
    }

    #[test]
    fn json_matrix_file() {
        let a = LinearFormsMatrix::from_json(r#"[["1/2", "0.25"], ["phi", "-2"]]"#).unwrap();
        assert_eq!((a.m(), a.n()), (2, 2));
        assert_eq!(a.get(0, 1), &ratio(1, 4));
        assert!(LinearFormsMatrix::from_json(r#"[["1"], ["1", "2"]]"#).is_err());
        assert!(LinearFormsMatrix::from_json("[]").is_err());
        assert!(LinearFormsMatrix::from_json("{").is_err());
    }
}
