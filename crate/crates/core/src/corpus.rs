//! Small loop sequences built from plaquettes, doubled plaquettes and dominoes.

use rand::Rng;

use crate::dsl::parse_loop_dsl;
use crate::lattice::{LatticeVector, Path, Step};
use crate::loops::{nonbacktracking_core, Loop, LoopSequence};

fn single(text: &str) -> Loop {
    parse_loop_dsl(text, 2).expect("valid literal").loops()[0].clone()
}

/// The eight single-loop shapes used as building blocks in d = 2.
pub fn base_loops_2d() -> Vec<(&'static str, Loop)> {
    let shapes = [
        ("plaquette", "+1 +2 -1 -2"),
        ("doubled plaquette", "+1 +2 -1 -2 +1 +2 -1 -2"),
        ("horizontal domino", "+1 +1 +2 -1 -1 -2"),
        ("vertical domino", "+1 +2 +2 -1 -2 -2"),
    ];
    let mut out = Vec::new();
    for (name, text) in shapes {
        let l = single(text);
        out.push((name, l.inverse()));
        out.push((name, l));
    }
    out.sort_by_key(|(_, l)| l.len());
    out
}

/// Every sequence in the d = 2 test corpus with total length at most `max_length`.
///
/// Single loops of each shape and orientation, plus ordered pairs of
/// plaquettes at a few relative offsets, with equal or opposite orientation.
pub fn corpus_2d(max_length: usize) -> Vec<LoopSequence> {
    let mut out: Vec<LoopSequence> = base_loops_2d()
        .into_iter()
        .filter(|(_, l)| l.len() <= max_length)
        .map(|(_, l)| LoopSequence::single(l))
        .collect();
    if max_length >= 8 {
        let p = single("+1 +2 -1 -2");
        let offsets = [(0, 0), (1, 0), (-1, 0), (0, 1), (1, 1), (1, -1), (2, 0)];
        for q in [p.clone(), p.inverse()] {
            for (dx, dy) in offsets {
                let shifted = q.translated(&LatticeVector::new(&[dx, dy]));
                out.push(LoopSequence::new(2, vec![p.clone(), shifted]).expect("same dimension"));
            }
        }
    }
    out
}

/// Core of a random closed walk: `half` random steps, then the displacement
/// undone in shuffled order, from a start drawn in [−2, 2]^d.
pub fn random_loop<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_len: usize) -> Loop {
    assert!(max_len >= 4, "no loop is shorter than 4");
    loop {
        let half = rng.random_range(2..=max_len / 2);
        let mut steps = Vec::with_capacity(2 * half);
        let mut disp = vec![0i32; dim];
        for _ in 0..half {
            let a = rng.random_range(1..=dim);
            let plus = rng.random_bool(0.5);
            disp[a - 1] += if plus { 1 } else { -1 };
            steps.push(Step::new(a, plus));
        }
        let back_from = steps.len();
        for (a, &d) in disp.iter().enumerate() {
            for _ in 0..d.abs() {
                steps.push(Step::new(a + 1, d < 0));
            }
        }
        for i in (back_from + 1..steps.len()).rev() {
            let j = rng.random_range(back_from..=i);
            steps.swap(i, j);
        }
        if steps.len() > max_len {
            continue;
        }
        let start: Vec<i32> = (0..dim).map(|_| rng.random_range(-2..=2)).collect();
        let l = nonbacktracking_core(&Path::new(LatticeVector::new(&start), steps)).expect("closed by construction");
        if !l.is_null() {
            return l;
        }
    }
}

/// One to `max_loops` random loops with total length at most `max_len`.
pub fn random_sequence<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_len: usize, max_loops: usize) -> LoopSequence {
    let count = rng.random_range(1..=max_loops.max(1));
    let mut loops = Vec::new();
    let mut left = max_len;
    for _ in 0..count {
        if left < 4 {
            break;
        }
        let l = random_loop(rng, dim, left);
        left -= l.len();
        loops.push(l);
    }
    LoopSequence::new(dim, loops).expect("same dimension")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_sizes() {
        assert_eq!(corpus_2d(4).len(), 2);
        assert_eq!(corpus_2d(6).len(), 6);
        let all = corpus_2d(8);
        assert_eq!(all.len(), 22);
        assert!(all.iter().all(|s| s.length() <= 8));
        let keys: std::collections::HashSet<_> = all.iter().map(|s| s.canonical_key()).collect();
        assert_eq!(keys.len(), all.len());
    }
}
