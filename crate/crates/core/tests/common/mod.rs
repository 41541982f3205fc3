#![allow(dead_code)]

use lattice_strings::lattice::{LatticeVector, Path, Step};
use lattice_strings::loops::{nonbacktracking_core, Loop, LoopSequence};
use rand::Rng;

/// A random closed walk: `half` random steps, then the displacement undone in shuffled order.
pub fn random_closed_path<R: Rng>(rng: &mut R, dim: usize, half: usize) -> Path {
    let mut steps = Vec::new();
    let mut disp = vec![0i32; dim];
    for _ in 0..half {
        let a = rng.random_range(1..=dim);
        let plus = rng.random_bool(0.5);
        disp[a - 1] += if plus { 1 } else { -1 };
        steps.push(Step::new(a, plus));
    }
    let mut back: Vec<Step> = Vec::new();
    for (a, &d) in disp.iter().enumerate() {
        for _ in 0..d.abs() {
            back.push(Step::new(a + 1, d < 0));
        }
    }
    for i in (1..back.len()).rev() {
        back.swap(i, rng.random_range(0..=i));
    }
    steps.extend(back);
    let start: Vec<i32> = (0..dim).map(|_| rng.random_range(-2..=2)).collect();
    Path::new(LatticeVector::new(&start), steps)
}

/// A random non-null loop of length at most `max_len`.
pub fn random_loop<R: Rng>(rng: &mut R, dim: usize, max_len: usize) -> Loop {
    loop {
        let half = rng.random_range(2..=max_len / 2);
        let p = random_closed_path(rng, dim, half);
        if p.len() > max_len {
            continue;
        }
        let l = nonbacktracking_core(&p).unwrap();
        if !l.is_null() {
            return l;
        }
    }
}

/// A random sequence of one to `max_loops` loops, total length at most `max_len`.
pub fn random_sequence<R: Rng>(rng: &mut R, dim: usize, max_len: usize, max_loops: usize) -> LoopSequence {
    let count = rng.random_range(1..=max_loops);
    let mut loops = Vec::new();
    let mut budget = max_len;
    for _ in 0..count {
        if budget < 4 {
            break;
        }
        let l = random_loop(rng, dim, budget);
        budget -= l.len();
        loops.push(l);
    }
    LoopSequence::new(dim, loops).unwrap()
}

/// Forward cyclic distance from location `x` to location `y` on a loop of length `n`.
pub fn forward_distance(x: usize, y: usize, n: usize) -> usize {
    (y + n - x) % n
}

/// E[cos θ] under exp(4β cos θ) dθ on the circle, by Simpson's rule.
pub fn so2_plaquette_oracle(beta: f64) -> f64 {
    let m = 4000;
    let h = std::f64::consts::PI / m as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..=m {
        let t = j as f64 * h;
        let w = if j == 0 || j == m {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let e = (4.0 * beta * t.cos()).exp();
        num += w * t.cos() * e;
        den += w * e;
    }
    num / den
}
