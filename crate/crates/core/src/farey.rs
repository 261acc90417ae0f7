//! Fractions with bounded denominator: simplest fractions and Farey walks.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// Fraction with the smallest denominator in the closed interval `[lo, hi]`.
pub fn simplest_in(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo <= hi, "empty interval");
    if !lo.is_positive() && !hi.is_negative() {
        return Rational::zero();
    }
    if hi.is_negative() {
        return -simplest_in(&-hi, &-lo);
    }
    // Walk both endpoints' expansions on integer pairs until they part ways.
    let (mut a, mut b) = (lo.numer().clone(), lo.denom().clone());
    let (mut c, mut d) = (hi.numer().clone(), hi.denom().clone());
    let mut digits = Vec::new();
    let last = loop {
        let (fl, rem) = a.div_mod_floor(&b);
        if rem.is_zero() {
            break fl;
        }
        let next = &fl + 1;
        if &next * &d <= c {
            break next;
        }
        // [lo, hi] − fl ⊂ (0, 1); recurse on [1/(hi − fl), 1/(lo − fl)].
        let c_rem = &c - &fl * &d;
        digits.push(fl);
        (a, b, c, d) = (d, c_rem, b, rem);
    };
    digits.push(last);
    let (mut p, mut p_prev) = (BigInt::one(), BigInt::zero());
    let (mut q, mut q_prev) = (BigInt::zero(), BigInt::one());
    for x in &digits {
        (p, p_prev) = (x * &p + &p_prev, p);
        (q, q_prev) = (x * &q + &q_prev, q);
    }
    Rational::new(p, q)
}

/// Neighbours of `x` in the Farey sequence of order `cap` extended to all of ℝ.
///
/// Requires `denom(x) ≤ cap`.
pub fn farey_neighbors(x: &Rational, cap: &BigInt) -> (Rational, Rational) {
    let (p, q) = (x.numer(), x.denom());
    assert!(q <= cap, "denominator exceeds the cap");
    // Predecessor a/b: p·b − q·a = 1 with b ≤ cap maximal; successor c/d: q·c − p·d = 1.
    let inv = if q.is_one() {
        BigInt::zero()
    } else {
        let g = p.mod_floor(q).extended_gcd(q);
        g.x.mod_floor(q)
    };
    let largest = |residue: BigInt| -> BigInt {
        let r = residue.mod_floor(q);
        &r + q * ((cap - &r).div_floor(q))
    };
    let b = largest(inv.clone());
    let a = (p * &b - 1u32).div_floor(q);
    let d = largest(-inv);
    let c = (p * &d + 1u32).div_floor(q);
    (Rational::new(a, b), Rational::new(c, d))
}

/// All fractions `p/q` with `q ≤ cap` in `[lo, hi]`, ascending.
pub fn fractions_in(lo: &Rational, hi: &Rational, cap: &BigInt) -> Vec<Rational> {
    if lo > hi || !cap.is_positive() {
        return Vec::new();
    }
    let seed = simplest_in(lo, hi);
    if seed.denom() > cap {
        return Vec::new();
    }
    let (pred, succ) = farey_neighbors(&seed, cap);
    let mut left = Vec::new();
    let (mut a, mut b) = (pred, seed.clone());
    while &a >= lo {
        left.push(a.clone());
        // Previous Farey term from the consecutive pair a < b.
        let k = (cap + b.denom()).div_floor(a.denom());
        let prev = Rational::new(&k * a.numer() - b.numer(), &k * a.denom() - b.denom());
        b = a;
        a = prev;
    }
    left.reverse();
    left.push(seed.clone());
    let (mut a, mut b) = (seed, succ);
    while &b <= hi {
        left.push(b.clone());
        let k = (cap + a.denom()).div_floor(b.denom());
        let next = Rational::new(&k * b.numer() - a.numer(), &k * b.denom() - a.denom());
        a = b;
        b = next;
    }
    left
}
