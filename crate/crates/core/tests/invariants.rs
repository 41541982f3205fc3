mod common;

use lattice_strings::dsl::{emit_sequence, parse_loop_dsl};
use lattice_strings::lattice::{LatticeVector, Path, Step};
use lattice_strings::loops::{canonicalize, nonbacktracking_core, LoopSequence};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Erases cyclic backtracks one at a time at random positions.
fn erase_in_random_order(p: &Path, rng: &mut ChaCha8Rng) -> Path {
    let mut start = p.start.clone();
    let mut steps = p.steps.clone();
    loop {
        let n = steps.len();
        let spots: Vec<usize> = (0..n).filter(|&i| n >= 2 && steps[(i + 1) % n] == steps[i].inverse()).collect();
        if spots.is_empty() {
            return Path::new(start, steps);
        }
        let i = spots[rng.random_range(0..spots.len())];
        if i + 1 < n {
            steps.drain(i..i + 2);
        } else {
            // The pair wraps around: drop the last and first steps and move the start.
            start.apply(steps[0]);
            steps.pop();
            steps.remove(0);
        }
    }
}

fn closed_path(dim: usize) -> impl Strategy<Value = Path> {
    (any::<u64>(), 1usize..10).prop_map(move |(seed, half)| {
        common::random_closed_path(&mut ChaCha8Rng::seed_from_u64(seed), dim, half)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn core_is_independent_of_erasure_order(p in closed_path(2), seed in any::<u64>()) {
        let core = nonbacktracking_core(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let other = canonicalize(&erase_in_random_order(&p, &mut rng)).unwrap();
        prop_assert_eq!(core, other);
    }

    #[test]
    fn core_is_idempotent(p in closed_path(3)) {
        let core = nonbacktracking_core(&p).unwrap();
        prop_assert_eq!(nonbacktracking_core(&core.path()).unwrap(), core);
    }

    #[test]
    fn loop_lengths_are_even_and_not_two(p in closed_path(3)) {
        let n = nonbacktracking_core(&p).unwrap().len();
        prop_assert!(n.is_multiple_of(2) && n != 2);
    }

    #[test]
    fn canonical_form_ignores_rotation(p in closed_path(2), r in 0usize..64) {
        let core = nonbacktracking_core(&p).unwrap();
        prop_assume!(!core.is_null());
        let rotated = core.rotated_to(r % core.len() + 1);
        prop_assert_eq!(canonicalize(&rotated).unwrap(), core);
    }

    #[test]
    fn index_is_at_least_three_per_loop(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = common::random_sequence(&mut rng, 3, 24, 3);
        prop_assert!(s.index() >= 3 * s.size());
        prop_assert_eq!(s.length(), s.degrees().iter().sum::<usize>());
    }

    #[test]
    fn dsl_roundtrip(seed in any::<u64>(), dim in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = common::random_sequence(&mut rng, dim, 20, 3);
        let text = emit_sequence(&s);
        prop_assert_eq!(parse_loop_dsl(&text, dim).unwrap(), s);
    }

    #[test]
    fn canonical_key_is_translation_invariant(seed in any::<u64>(), dx in -5i32..5, dy in -5i32..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = common::random_sequence(&mut rng, 2, 20, 3);
        let t = s.translated(&LatticeVector::new(&[dx, dy]));
        prop_assert_eq!(s.canonical_key(), t.canonical_key());
        prop_assert_eq!(s.canonical_key().to_sequence().unwrap().canonical_key(), s.canonical_key());
    }
}

#[test]
fn full_backtrack_erases_to_null() {
    let p = Path::new(LatticeVector::origin(2), vec![Step::plus(1), Step::plus(2), Step::minus(2), Step::minus(1)]);
    assert!(nonbacktracking_core(&p).unwrap().is_null());
    assert_eq!(parse_loop_dsl("+1 +2 -2 -1", 2).unwrap(), LoopSequence::null(2));
}
