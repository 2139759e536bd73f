mod common;

use hurwitz::football::{
    base_realize, check_lemmas, extend, normalize, realize, reduce_chain, reduce_step, Case, RealizeOptions,
};
use hurwitz::partition::{parse_datum, theorem2_applies, BranchDatum};
use hurwitz::{Permutation, RealizationCertificate};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn images(p: &Permutation) -> Vec<usize> {
    (1..=p.degree()).map(|x| p.apply(x) - 1).collect()
}

/// Checks a certificate without going through the library's verifier.
fn independently_valid(c: &RealizationCertificate) -> bool {
    let d = c.datum.degree() as usize;
    let perms: Vec<Vec<usize>> = c.in_datum_order().into_iter().map(images).collect();
    let types_ok = perms
        .iter()
        .zip(c.datum.partitions())
        .all(|(p, pi)| common::cycle_type(p) == pi.parts());
    let all: Vec<Vec<usize>> = c.tuple.perms().iter().map(images).collect();
    let product = all.iter().fold((0..d).collect::<Vec<_>>(), |acc, p| common::then(&acc, p));
    types_ok && product.iter().enumerate().all(|(i, &x)| i == x) && common::reaches_every_point(d, &all)
}

/// Theorem-2-eligible sphere candidates of degree `d`, independently enumerated.
fn eligible(d: u32) -> Vec<Vec<Vec<u32>>> {
    common::multisets_with_branching(d, 2 * d - 2)
        .into_iter()
        .filter(|m| {
            let min = m.iter().map(Vec::len).min().unwrap();
            d >= 3 && m.len() >= 3 && m.len() >= min + 2
        })
        .collect()
}

fn datum(d: u32, parts: &[Vec<u32>]) -> BranchDatum {
    parse_datum(&common::datum_text(d, parts)).unwrap()
}

fn eligible_datum() -> impl Strategy<Value = BranchDatum> {
    (3u32..=7)
        .prop_flat_map(|d| {
            let all = eligible(d);
            (Just(d), proptest::sample::select(all))
        })
        .prop_flat_map(|(d, parts)| (Just(d), Just(parts.clone()).prop_shuffle()))
        .prop_map(|(d, parts)| datum(d, &parts))
}

proptest! {
    #![proptest_config(Config { cases: 100, rng_seed: RngSeed::Fixed(0xf007), failure_persistence: None, ..Config::default() })]

    #[test]
    fn realize_gives_valid_certificates(x in eligible_datum()) {
        let c = realize(&x).unwrap();
        prop_assert!(c.verified);
        prop_assert!(independently_valid(&c), "{}", x);
        prop_assert_eq!(&c.datum, &x);
    }

    #[test]
    fn every_step_satisfies_the_lemmas(x in eligible_datum()) {
        let chain = reduce_chain(&x, &[]).unwrap();
        for (i, step) in chain.steps.iter().enumerate() {
            let (parent, child) = (&chain.data[i], &chain.data[i + 1]);
            prop_assert_eq!(check_lemmas(parent, step, child), Ok(()));
            prop_assert_eq!(child.degree() + 1, parent.degree());
        }
        let last = chain.last();
        prop_assert!(chain.steps.is_empty() || (last.degree() == 2 && last.k() == 2));
    }
}

#[test]
fn reduction_is_sound_through_degree_nine() {
    let mut steps = 0;
    for d in 3..=9 {
        for parts in eligible(d) {
            let x = datum(d, &parts);
            assert!(theorem2_applies(&x));
            if d == 3 && hurwitz::football::is_base_case(&x) {
                continue;
            }
            let (child, step) = reduce_step(&x, None).unwrap();
            assert!(child.is_candidate_sphere(), "{x} -> {child}");
            assert!(child.partitions().iter().all(|p| !p.is_trivial()));
            if child.degree() >= 3 {
                assert!(theorem2_applies(&child), "{x} -> {child}");
            }
            check_lemmas(&x, &step, &child).unwrap_or_else(|e| panic!("{x}: {e}"));
            steps += 1;
        }
    }
    assert!(steps > 1000);
}

#[test]
fn middle_partitions_have_fixed_points_when_pk_has_none() {
    for d in 3..=9 {
        for parts in eligible(d) {
            let x = datum(d, &parts);
            let n = normalize(&x).unwrap();
            let pk = &x.partitions()[n.pk_index];
            if pk.e() != 0 {
                continue;
            }
            for &i in &n.rest[1..] {
                assert!(x.partitions()[i].e() > 0, "{x}: partition {i}");
            }
        }
    }
}

#[test]
fn extend_example_from_degree_two() {
    let parent = parse_datum("3: 3; 2,1; 2,1").unwrap();
    let (child, step) = reduce_step(&parent, None).unwrap();
    assert_eq!(step.case_tag, Case::A);
    let base = base_realize(&child).unwrap();
    let shown: Vec<String> = base.tuple.perms().iter().map(|p| p.to_string()).collect();
    assert_eq!(shown, vec!["(1 2)", "(1 2)"]);
    let (lifted, _) = extend(&base, &step, &parent, &RealizeOptions::default()).unwrap();
    assert!(independently_valid(&lifted));
    // the reborn partition is a transposition through the new point
    let reborn = step.dropped_trivial[0];
    let p = lifted.in_datum_order()[reborn];
    assert_eq!(p.cycle_type().parts(), &[2, 1]);
    assert!(!p.fixes(3));
}

#[test]
fn full_enumeration_through_degree_six() {
    for d in 3..=6 {
        for parts in eligible(d) {
            let x = datum(d, &parts);
            let c = realize(&x).unwrap();
            assert!(independently_valid(&c), "{x}");
        }
    }
}
