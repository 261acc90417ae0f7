use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use schmidt_core::continued_fractions::{cylinder_interval, CfWord};
use schmidt_core::farey::{fractions_in, simplest_in};
use schmidt_core::friendly_measures::{cf13_measure, measure_by_name};
use schmidt_core::game::{expected_radius, validate_containment, Ball, Game, GameConfig, Point};
use schmidt_core::linear_forms::{badness_infimum, LinearFormsMatrix};
use schmidt_core::rational::{format_rational, int, parse_rational, ratio, Rational};
use schmidt_core::strategies::{rational_certificate, RandomLegal};

fn small_ratio() -> impl Strategy<Value = Rational> {
    (1i64..40, 2i64..41).prop_filter_map("proper fraction", |(p, q)| (p < q).then(|| ratio(p, q)))
}

fn dist_to_int(x: &Rational) -> Rational {
    let f = x - x.floor();
    f.clone().min(Rational::one() - f)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn balls_nest_and_shrink_on_schedule(
        alpha in small_ratio(),
        beta in small_ratio(),
        dim in 1usize..=2,
        seed in any::<u64>(),
        rounds in 1u32..8,
    ) {
        let game = Game::new(GameConfig::new(alpha, beta, dim).unwrap()).unwrap();
        let mut white = RandomLegal::new(ChaCha8Rng::seed_from_u64(seed));
        let mut black = RandomLegal::new(ChaCha8Rng::seed_from_u64(seed ^ 0x5bd1));
        let start = Ball::new(Point::origin(dim), int(1)).unwrap();
        let t = game.play(&mut white, &mut black, start.clone(), rounds).unwrap();
        prop_assert!(t.is_legal());
        prop_assert_eq!(t.balls.len(), 2 * rounds as usize + 1);
        for (k, pair) in t.balls.windows(2).enumerate() {
            prop_assert!(validate_containment(&pair[1], &pair[0]).unwrap());
            prop_assert_eq!(&pair[1].radius, &expected_radius(game.config(), &start.radius, k + 1));
        }
    }

    #[test]
    fn transcripts_survive_json(seed in any::<u64>(), rounds in 1u32..6) {
        let game = Game::new(GameConfig::new(ratio(1, 2), ratio(1, 3), 1).unwrap()).unwrap();
        let mut white = RandomLegal::new(ChaCha8Rng::seed_from_u64(seed));
        let mut black = RandomLegal::new(ChaCha8Rng::seed_from_u64(!seed));
        let t = game.play(&mut white, &mut black, Ball::new(Point::origin(1), int(1)).unwrap(), rounds).unwrap();
        let back = schmidt_core::game::Transcript::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn lebesgue_brackets_hold_the_length(c in 0i64..=64, r in 1i64..=32, depth in 2u32..9) {
        let m = measure_by_name("lebesgue").unwrap();
        let (c, r) = (ratio(c, 64), ratio(r, 97));
        let ball = Ball::new(Point::scalar(c.clone()), r.clone()).unwrap();
        let exact = (&c + &r).min(int(1)) - (&c - &r).max(int(0));
        let (lo, hi) = m.ball_mass(&ball, depth).unwrap();
        prop_assert!(lo <= exact && exact <= hi, "{} not in [{}, {}]", exact, lo, hi);
        let (lo2, hi2) = m.ball_mass(&ball, depth + 1).unwrap();
        prop_assert!(lo <= lo2 && hi2 <= hi);
    }

    #[test]
    fn measure_brackets_refine(name in prop::sample::select(vec!["cf13", "cantor", "sierpinski"]), seed in any::<u64>(), depth in 2u32..7) {
        let m = measure_by_name(name).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = m.sample_centers(1, 8, &mut rng).unwrap().remove(0);
        let ball = Ball::new(center, ratio(1, 1 + (seed % 50) as i64)).unwrap();
        let (lo, hi) = m.ball_mass(&ball, depth).unwrap();
        let (lo2, hi2) = m.ball_mass(&ball, depth + 1).unwrap();
        prop_assert!(lo <= lo2 && lo2 <= hi2 && hi2 <= hi);
        prop_assert!(!lo.is_negative() && hi <= int(1));
    }

    #[test]
    fn masses_are_additive(word in prop::collection::vec(0usize..2, 0..14)) {
        let m = cf13_measure();
        let parent = m.mass(&word);
        let children: Rational = (0..m.arity())
            .map(|i| {
                let mut w = word.clone();
                w.push(i);
                m.mass(&w)
            })
            .sum();
        prop_assert_eq!(parent, children);
    }

    #[test]
    fn cylinder_length_matches_continuants(digits in prop::collection::vec(1u64..6, 1..10)) {
        let c = cylinder_interval(&CfWord::new(digits.clone()).unwrap()).unwrap();
        prop_assert_eq!(c.length(), c.length_from_continuants());
        let mut longer = digits;
        longer.push(1);
        let child = cylinder_interval(&CfWord::new(longer).unwrap()).unwrap();
        prop_assert!(c.contains_interval(&child.lo, &child.hi));
    }

    #[test]
    fn badness_matches_brute_force(p in -30i64..30, q in 1i64..30, cap in 1u64..40) {
        let gamma = ratio(p, q);
        let a = LinearFormsMatrix::new(1, 1, vec![gamma.clone()]).unwrap();
        let res = badness_infimum(&a, cap).unwrap();
        let brute = (1..=cap as i64)
            .map(|x| int(x) * dist_to_int(&(&gamma * int(x))))
            .min()
            .unwrap();
        prop_assert_eq!(res.exact_value, Some(brute));
    }

    #[test]
    fn certificates_match_brute_force(a in 0i64..1000, w in 1i64..50, cap in 1i64..60) {
        let (lo, hi) = (ratio(a, 1009), ratio(a + w, 1009));
        let mut best = ratio(1, 2);
        for q in 1..=cap {
            let (x, y) = (&lo * int(q), &hi * int(q));
            if x.ceil() <= y.floor() {
                best = Rational::zero();
                break;
            }
            best = best.min(int(q) * (&x - x.floor())).min(int(q) * (y.ceil() - &y));
        }
        prop_assert_eq!(rational_certificate(&lo, &hi, &BigInt::from(cap)), best);
    }

    #[test]
    fn simplest_fraction_is_simplest(a in -200i64..200, w in 0i64..40, d in 1i64..200) {
        let (lo, hi) = (ratio(a, d), ratio(a + w, d + 3));
        prop_assume!(lo <= hi);
        let s = simplest_in(&lo, &hi);
        prop_assert!(lo <= s && s <= hi);
        let q: i64 = s.denom().try_into().unwrap();
        for smaller in 1..q {
            prop_assert!(fractions_in(&lo, &hi, &BigInt::from(smaller)).is_empty());
        }
    }

    #[test]
    fn rationals_round_trip(p in any::<i64>(), q in 1i64..i64::MAX) {
        let r = Rational::new(BigInt::from(p), BigInt::from(q));
        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }
}

#[test]
fn fractions_in_lists_every_fraction() {
    let (lo, hi) = (ratio(1, 3), ratio(3, 5));
    let got = fractions_in(&lo, &hi, &BigInt::from(7));
    let mut brute: Vec<Rational> = (1..=7i64)
        .flat_map(|q| (0..=q).map(move |p| ratio(p, q)))
        .filter(|f| &lo <= f && f <= &hi)
        .collect();
    brute.sort();
    brute.dedup();
    assert_eq!(got, brute);
}
