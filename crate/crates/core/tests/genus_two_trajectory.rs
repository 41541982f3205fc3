//! Search for a ten-step vanishing trajectory of genus 2 through prescribed shapes.
//!
//! The start loop and the first two states are pinned up to translation.
//! Later states are only known by their shapes, so each is matched up to
//! translation, orientation and loop order, and every operation sequence
//! consistent with those shapes is collected.

use lattice_strings::dsl::{parse_loop, parse_loop_dsl};
use lattice_strings::loops::{Loop, LoopSequence};
use lattice_strings::ops::{visit_operations, Family, FamilyFilter, OperationStep, Sign};
use lattice_strings::rational::Rational;
use lattice_strings::trajectory::{Budget, Trajectory};

/// Steps of the canonical form; canonical loops start at their smallest vertex.
fn oriented_shape(l: &Loop) -> Vec<i32> {
    l.steps().iter().map(|s| s.signed()).collect()
}

fn shape(l: &Loop) -> Vec<i32> {
    oriented_shape(l).min(oriented_shape(&l.inverse()))
}

#[derive(Clone)]
enum Target {
    Exact(Vec<Vec<i32>>),
    Shapes(Vec<Vec<i32>>),
    Null,
}

impl Target {
    fn exact(text: &str) -> Self {
        let s = parse_loop_dsl(text, 2).unwrap();
        Target::Exact(sorted(s.loops().iter().map(oriented_shape).collect()))
    }

    fn shapes(texts: &[&str]) -> Self {
        Target::Shapes(sorted(texts.iter().map(|t| shape(&parse_loop(t, 2).unwrap())).collect()))
    }

    fn matches(&self, s: &LoopSequence) -> bool {
        match self {
            Target::Null => s.is_null(),
            Target::Exact(want) => sorted(s.loops().iter().map(oriented_shape).collect()) == *want,
            Target::Shapes(want) => sorted(s.loops().iter().map(shape).collect()) == *want,
        }
    }
}

fn sorted(mut v: Vec<Vec<i32>>) -> Vec<Vec<i32>> {
    v.sort();
    v
}

const PLAQUETTE: &str = "+1 +2 -1 -2";
const TALL: &str = "+1 +2 +2 -1 -2 -2";
const WIDE: &str = "+1 +1 +2 -1 -1 -2";
const WIDER: &str = "+1 +1 +1 +2 -1 -1 -1 -2";

fn search(
    state: &LoopSequence,
    plan: &[(Family, Option<Sign>, Target)],
    prefix: &mut Vec<OperationStep>,
    found: &mut Vec<Vec<OperationStep>>,
) {
    let Some(((family, sign, target), rest)) = plan.split_first() else {
        found.push(prefix.clone());
        return;
    };
    if *family == Family::Inaction {
        if target.matches(state) {
            prefix.push(OperationStep::inaction(state));
            search(state, rest, prefix, found);
            prefix.pop();
        }
        return;
    }
    let filter = FamilyFilter {
        twist: *family == Family::Twist,
        split: *family == Family::Split,
        merge: *family == Family::Merge,
        deform: *family == Family::Deform,
    };
    let mut next = Vec::new();
    visit_operations(state, filter, &mut |op, sg, result| {
        if Some(sg) == *sign && target.matches(&result) {
            next.push(OperationStep { op, sign: Some(sg), result });
        }
    });
    for step in next {
        let result = step.result.clone();
        prefix.push(step);
        search(&result, rest, prefix, found);
        prefix.pop();
    }
}

#[test]
fn ten_step_genus_two_trajectory_weight() {
    // Vertices (1,6) (4,6) (4,5) (2,5) (2,4) (1,4).
    let start = parse_loop_dsl("@(1,6) +1 +1 +1 -2 -1 -1 -2 -1 +2 +2", 2).unwrap();
    let neg = Some(Sign::Negative);
    let plan = vec![
        (Family::Deform, neg, Target::exact("@(1,6) +1 +1 +1 -2 -1 +2 -1 -2 -2 -1 +2 +2")),
        (Family::Twist, Some(Sign::Positive), Target::exact("@(1,6) +1 +1 -2 +1 +2 -1 -1 -2 -2 -1 +2 +2")),
        (Family::Split, neg, Target::shapes(&[PLAQUETTE, TALL])),
        (Family::Deform, neg, Target::shapes(&[PLAQUETTE, PLAQUETTE])),
        (Family::Deform, neg, Target::shapes(&[PLAQUETTE, WIDE])),
        (Family::Merge, neg, Target::shapes(&[WIDER])),
        (Family::Deform, neg, Target::shapes(&[WIDE])),
        (Family::Inaction, None, Target::shapes(&[WIDE])),
        (Family::Deform, neg, Target::shapes(&[PLAQUETTE])),
        (Family::Deform, neg, Target::Null),
    ];
    let mut found = Vec::new();
    search(&start, &plan, &mut Vec::new(), &mut found);
    assert!(!found.is_empty(), "no operation sequence matches the prescribed states");
    let expected = -Rational::new(1.into(), 221_184_000.into());
    for steps in found {
        let t = Trajectory { start: start.clone(), steps };
        assert!(t.is_vanishing());
        assert_eq!(t.budget(), Budget::new(6, 1, 1, 1));
        assert_eq!(t.budget().k(), 4);
        assert_eq!(t.genus(), Rational::from_integer(2.into()));
        let w = t.weight();
        assert_eq!(w.beta_power, 6);
        assert_eq!(w.coefficient, expected);
    }
}
