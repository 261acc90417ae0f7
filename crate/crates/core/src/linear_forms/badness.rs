//! Exhaustive minimum of `‖x‖_∞^N · dist(Ax, ℤ^M)^M`.
//!
//! Each row of `A·x mod 1` is tracked as a residue. Rational matrices with a
//! small common denominator `D` use residues mod `D` and are exact; anything
//! else uses 128-bit fixed point with wrapping arithmetic.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use super::{LinearFormsError, LinearFormsMatrix};
use crate::rational::{self, Rational};

/// Largest number of lattice points a single call will visit.
pub const MAX_BADNESS_POINTS: u128 = 100_000_000_000;

/// Values of the last coordinate processed per parallel task when `N = 1`.
const CHUNK: i64 = 1 << 14;

#[derive(Debug, Clone, Copy)]
struct Ring {
    /// `None` means arithmetic mod `2^128`.
    modulus: Option<u128>,
}

impl Ring {
    #[inline]
    fn add(self, a: u128, b: u128) -> u128 {
        match self.modulus {
            None => a.wrapping_add(b),
            Some(m) => {
                let s = a + b;
                if s >= m {
                    s - m
                } else {
                    s
                }
            }
        }
    }

    fn mul_int(self, r: u128, x: i64) -> u128 {
        match self.modulus {
            None => r.wrapping_mul(x as i128 as u128),
            Some(m) => {
                let xm = (x as i128).rem_euclid(m as i128) as u128;
                // Both factors are below 2^64.
                (xm * r) % m
            }
        }
    }

    #[inline]
    fn dist(self, r: u128) -> u128 {
        match self.modulus {
            None => r.min(r.wrapping_neg()),
            Some(m) => r.min(m - r),
        }
    }

    fn to_f64(self, d: u128) -> f64 {
        match self.modulus {
            None => d as f64 / 2f64.powi(128),
            Some(m) => d as f64 / m as f64,
        }
    }

    fn residue(self, v: &Rational) -> u128 {
        let frac = v - v.floor();
        match self.modulus {
            Some(m) => (frac * Rational::from_integer(BigInt::from(m)))
                .to_integer()
                .to_u128()
                .expect("residue below modulus"),
            None => {
                let scaled = (frac * Rational::from_integer(BigInt::one() << 128)).round().to_integer();
                // Rounding up to 2^128 wraps to 0.
                let wrapped: BigInt = scaled % (BigInt::one() << 128u32);
                wrapped.to_u128().expect("fits in 128 bits")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    /// `‖x‖_∞` at which the running minimum dropped.
    pub cap: u64,
    pub value: f64,
    pub witness: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BadnessResult {
    pub cap: u64,
    pub value: f64,
    pub witness: Vec<i64>,
    /// Exact value of the minimum for rational matrices.
    #[serde(skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub exact_value: Option<Rational>,
    /// Upper bound on the absolute error of `value`.
    pub error_bound: f64,
    /// Every strict decrease of the running minimum.
    pub trace: Vec<TracePoint>,
    /// Minimum of `dist(Ax, ℤ^M)` over each shell `‖x‖_∞ = s`, index `s - 1`.
    #[serde(skip)]
    pub shell_distances: Vec<f64>,
}

mod opt_rational {
    use super::*;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(v) => s.serialize_str(&rational::format_rational(v)),
            None => s.serialize_none(),
        }
    }
}

impl BadnessResult {
    /// Running minimum after shell `s`, for `1 ≤ s ≤ cap`.
    pub fn value_at(&self, s: u64) -> f64 {
        self.trace
            .iter()
            .take_while(|t| t.cap <= s)
            .last()
            .map_or(f64::INFINITY, |t| t.value)
    }

    /// `s^N · d_s^M` for shell `s` alone.
    pub fn shell_value(&self, s: u64, m: usize, n: usize) -> f64 {
        (s as f64).powi(n as i32) * self.shell_distances[(s - 1) as usize].powi(m as i32)
    }
}

/// Per-shell best residue distance and its witness.
#[derive(Clone)]
struct Shells {
    best: Vec<(u128, Vec<i64>)>,
}

impl Shells {
    fn new(cap: usize) -> Self {
        Shells {
            best: vec![(u128::MAX, Vec::new()); cap + 1],
        }
    }

    fn merge(mut self, other: Shells) -> Shells {
        for (mine, theirs) in self.best.iter_mut().zip(other.best) {
            if better(theirs.0, &theirs.1, mine.0, &mine.1) {
                *mine = theirs;
            }
        }
        self
    }
}

/// Smaller distance wins; ties go to the lexicographically smaller witness.
fn better(d: u128, w: &[i64], best: u128, best_w: &[i64]) -> bool {
    d < best || (d == best && !w.is_empty() && (best_w.is_empty() || w < best_w))
}

struct Scan<'a> {
    ring: Ring,
    /// `res[i][j]` is the residue of `γ_ij`.
    res: &'a [Vec<u128>],
    n: usize,
    cap: i64,
}

impl Scan<'_> {
    /// Walks the last coordinate over `lo..=hi` with the given prefix.
    fn inner(&self, prefix: &[i64], lo: i64, hi: i64, shells: &mut Shells) {
        if lo > hi {
            return;
        }
        let last = self.n - 1;
        let prefix_norm = prefix.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        let mut rows: Vec<u128> = self
            .res
            .iter()
            .map(|row| {
                let mut acc = self.ring.mul_int(row[last], lo);
                for (j, &x) in prefix.iter().enumerate() {
                    acc = self.ring.add(acc, self.ring.mul_int(row[j], x));
                }
                acc
            })
            .collect();
        let step: Vec<u128> = self.res.iter().map(|row| row[last]).collect();
        let mut witness = prefix.to_vec();
        witness.push(0);
        for x in lo..=hi {
            let shell = prefix_norm.max(x.unsigned_abs()) as usize;
            let d = rows.iter().map(|&r| self.ring.dist(r)).max().unwrap_or(0);
            let slot = &mut shells.best[shell];
            if d <= slot.0 {
                witness[last] = x;
                if better(d, &witness, slot.0, &slot.1) {
                    *slot = (d, witness.clone());
                }
            }
            for (r, s) in rows.iter_mut().zip(&step) {
                *r = self.ring.add(*r, *s);
            }
        }
    }

    /// Enumerates coordinates `prefix.len()..N-1`, keeping the first nonzero
    /// coordinate positive so that `x` and `-x` are visited once.
    fn walk(&self, prefix: &mut Vec<i64>, shells: &mut Shells) {
        let started = prefix.iter().any(|&c| c != 0);
        if prefix.len() == self.n - 1 {
            let lo = if started { -self.cap } else { 1 };
            self.inner(prefix, lo, self.cap, shells);
            return;
        }
        let lo = if started { -self.cap } else { 0 };
        for c in lo..=self.cap {
            prefix.push(c);
            self.walk(prefix, shells);
            prefix.pop();
        }
    }
}

fn choose_ring(a: &LinearFormsMatrix) -> Ring {
    if a.is_exact() {
        let d = rational::common_denominator(a.entries());
        if let Some(m) = d.to_u64() {
            return Ring {
                modulus: Some(m as u128),
            };
        }
    }
    Ring { modulus: None }
}

/// Minimum of `‖x‖_∞^N · dist(Ax, ℤ^M)^M` over integer `x` with `0 < ‖x‖_∞ ≤ cap`.
pub fn badness_infimum(a: &LinearFormsMatrix, cap: u64) -> Result<BadnessResult, LinearFormsError> {
    if cap == 0 {
        return Err(LinearFormsError::ZeroCap);
    }
    let (m, n) = (a.m(), a.n());
    let side = 2 * cap as u128 + 1;
    let points = side
        .checked_pow(n as u32)
        .map_or(u128::MAX, |p| (p - 1) / 2);
    if points > MAX_BADNESS_POINTS || cap > i64::MAX as u64 / 4 {
        return Err(LinearFormsError::Overflow(points, MAX_BADNESS_POINTS));
    }
    let ring = choose_ring(a);
    let res: Vec<Vec<u128>> = (0..m)
        .map(|i| (0..n).map(|j| ring.residue(a.get(i, j))).collect())
        .collect();
    let scan = Scan {
        ring,
        res: &res,
        n,
        cap: cap as i64,
    };
    let cap_us = cap as usize;
    let shells = if n == 1 {
        let chunks = (cap as i64 + CHUNK - 1) / CHUNK;
        (0..chunks)
            .into_par_iter()
            .fold(
                || Shells::new(cap_us),
                |mut acc, k| {
                    let lo = 1 + k * CHUNK;
                    let hi = ((k + 1) * CHUNK).min(cap as i64);
                    scan.inner(&[], lo, hi, &mut acc);
                    acc
                },
            )
            .reduce(|| Shells::new(cap_us), Shells::merge)
    } else {
        (0..=cap as i64)
            .into_par_iter()
            .fold(
                || Shells::new(cap_us),
                |mut acc, first| {
                    let mut prefix = vec![first];
                    scan.walk(&mut prefix, &mut acc);
                    acc
                },
            )
            .reduce(|| Shells::new(cap_us), Shells::merge)
    };

    // Residue error: stored entries are within 2^-192 of the true values and
    // each residue is rounded to 2^-129.
    let dist_error = match ring.modulus {
        Some(_) => 0.0,
        None => n as f64 * cap as f64 * (2f64.powi(-129) + a.entry_error()),
    };
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut best_value = f64::INFINITY;
    let mut best_shell = 0usize;
    let mut shell_distances = Vec::with_capacity(cap_us);
    let mut error_bound = 0.0f64;
    for s in 1..=cap_us {
        let (d, w) = &shells.best[s];
        let df = ring.to_f64(*d);
        shell_distances.push(df);
        let scale = (s as f64).powi(n as i32);
        let value = scale * df.powi(m as i32);
        if value < best_value {
            best_value = value;
            best_shell = s;
            error_bound = scale * ((df + dist_error).powi(m as i32) - df.powi(m as i32));
            trace.push(TracePoint {
                cap: s as u64,
                value,
                witness: w.clone(),
            });
        }
    }
    let witness = shells.best[best_shell].1.clone();
    let exact_value = match ring.modulus {
        Some(modulus) => {
            let d = Rational::new(BigInt::from(shells.best[best_shell].0), BigInt::from(modulus));
            let s = Rational::from_integer(BigInt::from(best_shell));
            Some(rational::pow(&s, n as u32) * rational::pow(&d, m as u32))
        }
        None => None,
    };
    Ok(BadnessResult {
        cap,
        value: best_value,
        witness,
        exact_value,
        error_bound,
        trace,
        shell_distances,
    })
}
