//! Distance-like behavior of MED across measures: symmetry, identity,
//! triangle inequality, and monotone response to growing judgment sets.

mod common;

use common::{doc, random_judgments, random_list, rng};
use med_core::mederr::{err_score, ErrParams};
use med_core::medmap::{map_score, TabuParams};
use med_core::{align, med, med_u, GradeScale, MeasureSpec, Passage, Trailtext};
use med_core::{dotprod::DotProductMeasure, Direction, RankedList};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn small_measures(scale: &GradeScale) -> Vec<(MeasureSpec, usize)> {
    vec![
        (MeasureSpec::Precision { k: 5 }, 5),
        (
            MeasureSpec::Ndcg {
                k: 5,
                scale: scale.clone(),
            },
            5,
        ),
        (MeasureSpec::Rbp { persistence: 0.9 }, 6),
        (
            MeasureSpec::Map {
                k: 5,
                tabu: TabuParams::new(3),
            },
            5,
        ),
        (
            MeasureSpec::Err(ErrParams::new(scale.top_f64(), 6, 6).unwrap()),
            6,
        ),
    ]
}

fn scale_for(measure: &MeasureSpec, graded: &GradeScale) -> GradeScale {
    match measure {
        MeasureSpec::Precision { .. } | MeasureSpec::Map { .. } => GradeScale::binary(),
        _ => graded.clone(),
    }
}

#[test]
fn med_is_symmetric_in_its_arguments() {
    let graded = GradeScale::new(2).unwrap();
    for (measure, depth) in small_measures(&graded) {
        let scale = scale_for(&measure, &graded);
        let mut rng = rng(301);
        for trial in 0..80 {
            let len_a = rng.random_range(3..=depth.min(9));
            let len_b = rng.random_range(3..=depth.min(9));
            let a = random_list(&mut rng, "t", 9, len_a);
            let b = random_list(&mut rng, "t", 9, len_b);
            let judged = random_judgments(&mut rng, "t", 9, 0.4, &scale);
            let ab = align(&a, &b, depth, &judged, &scale).unwrap();
            let ba = align(&b, &a, depth, &judged, &scale).unwrap();
            let forward = med(&ab, &measure).unwrap();
            let backward = med(&ba, &measure).unwrap();
            assert_eq!(
                forward.value,
                backward.value,
                "measure {} trial {trial}",
                measure.name()
            );
        }
    }
}

#[test]
fn identical_lists_are_at_distance_zero_or_the_tail() {
    let graded = GradeScale::new(2).unwrap();
    for (measure, depth) in small_measures(&graded) {
        let scale = scale_for(&measure, &graded);
        let mut rng = rng(311);
        for _ in 0..40 {
            let a = random_list(&mut rng, "t", 9, depth);
            let judged = random_judgments(&mut rng, "t", 9, 0.3, &scale);
            let pair = align(&a, &a, depth, &judged, &scale).unwrap();
            let outcome = med(&pair, &measure).unwrap();
            let expected = match measure {
                MeasureSpec::Rbp { persistence } => persistence.powi(depth as i32),
                _ => 0.0,
            };
            assert_eq!(outcome.value, expected, "measure {}", measure.name());
            assert_eq!(outcome.direction, Direction::A);
        }
    }
}

#[test]
fn triangle_inequality_holds_on_random_triples() {
    let graded = GradeScale::new(2).unwrap();
    for (measure, depth) in small_measures(&graded) {
        let scale = scale_for(&measure, &graded);
        let mut rng = rng(321);
        for trial in 0..200 {
            let lists: Vec<RankedList> = (0..3)
                .map(|_| {
                    let len = rng.random_range(3..=depth.min(9));
                    random_list(&mut rng, "t", 9, len)
                })
                .collect();
            let judged = random_judgments(&mut rng, "t", 9, 0.4, &scale);
            let dist = |x: &RankedList, y: &RankedList| {
                let pair = align(x, y, depth, &judged, &scale).unwrap();
                let outcome = med(&pair, &measure).unwrap();
                (outcome.value, outcome.epsilon.unwrap_or(0.0))
            };
            let (ab, eps_ab) = dist(&lists[0], &lists[1]);
            let (bc, eps_bc) = dist(&lists[1], &lists[2]);
            let (ac, _) = dist(&lists[0], &lists[2]);
            assert!(
                ac <= ab + bc + eps_ab + eps_bc + 1e-9,
                "measure {} trial {trial}: {ac} > {ab} + {bc}",
                measure.name()
            );
        }
    }
}

#[test]
fn growing_judgment_sets_never_increase_the_distance() {
    let graded = GradeScale::new(2).unwrap();
    let fractions = [0.0, 0.25, 0.5, 0.75, 1.0];
    for (measure, depth) in small_measures(&graded) {
        let scale = scale_for(&measure, &graded);
        let mut rng = rng(331);
        for trial in 0..60 {
            let len_a = rng.random_range(depth.min(4)..=depth.min(9));
            let len_b = rng.random_range(depth.min(4)..=depth.min(9));
            let a = random_list(&mut rng, "t", 9, len_a);
            let b = random_list(&mut rng, "t", 9, len_b);
            let full = random_judgments(&mut rng, "t", 9, 1.0, &scale);
            assert_eq!(full.len(), 9);
            let samples = full.nested_samples(&fractions, trial as u64);
            let mut last = f64::INFINITY;
            for sample in &samples {
                let pair = align(&a, &b, depth, sample, &scale).unwrap();
                let outcome = med(&pair, &measure).unwrap();
                assert!(
                    outcome.value <= last + 1e-12,
                    "measure {} trial {trial}: {} after {last}",
                    measure.name(),
                    outcome.value
                );
                last = outcome.value;
            }
        }
    }
}

#[test]
fn full_judgments_reduce_med_to_the_actual_score_difference() {
    let graded = GradeScale::new(2).unwrap();
    for (measure, depth) in small_measures(&graded) {
        let scale = scale_for(&measure, &graded);
        let mut rng = rng(341);
        for trial in 0..60 {
            // Lists exactly as deep as the alignment: a padding rank is an
            // unjudged free variable even when every document is judged.
            let a = random_list(&mut rng, "t", 9, depth);
            let b = random_list(&mut rng, "t", 9, depth);
            let judged = random_judgments(&mut rng, "t", 9, 1.0, &scale);
            let pair = align(&a, &b, depth, &judged, &scale).unwrap();
            let outcome = med(&pair, &measure).unwrap();

            let rel = |list: &RankedList| -> Vec<f64> {
                (1..=depth)
                    .map(|rank| match list.at_rank(rank) {
                        Some(d) => scale.grade_f64(judged.get("t", d).unwrap()),
                        None => 0.0,
                    })
                    .collect()
            };
            let rel_a = rel(&a);
            let rel_b = rel(&b);
            let actual = match &measure {
                MeasureSpec::Precision { k } => {
                    let m = DotProductMeasure::precision(*k).unwrap();
                    m.score(&rel_a) - m.score(&rel_b)
                }
                MeasureSpec::Ndcg { k, scale } => {
                    let m = DotProductMeasure::ndcg(*k, scale).unwrap();
                    m.score(&rel_a) - m.score(&rel_b)
                }
                MeasureSpec::Rbp { persistence } => {
                    let m = DotProductMeasure::rbp(*persistence, depth).unwrap();
                    m.score(&rel_a) - m.score(&rel_b)
                }
                MeasureSpec::Map { k, .. } => map_score(&rel_a, *k) - map_score(&rel_b, *k),
                MeasureSpec::Err(params) => {
                    err_score(&rel_a, params.depth()).unwrap()
                        - err_score(&rel_b, params.depth()).unwrap()
                }
                MeasureSpec::U { .. } => unreachable!(),
            };
            let expected = match measure {
                MeasureSpec::Rbp { persistence } => {
                    actual.abs() + persistence.powi(depth as i32)
                }
                _ => actual.abs(),
            };
            assert!(
                (outcome.value - expected).abs() < 1e-12,
                "measure {} trial {trial}: {} vs {expected}",
                measure.name(),
                outcome.value
            );
        }
    }
}

#[test]
fn deepening_rbp_never_increases_the_distance() {
    let scale = GradeScale::new(2).unwrap();
    let mut rng = rng(351);
    for trial in 0..100 {
        let depth = rng.random_range(3..=8);
        let len_a = rng.random_range(depth..=18);
        let len_b = rng.random_range(depth..=18);
        let a = random_list(&mut rng, "t", 24, len_a);
        let b = random_list(&mut rng, "t", 24, len_b);
        let judged = random_judgments(&mut rng, "t", 24, 0.3, &scale);
        let measure = MeasureSpec::Rbp { persistence: 0.9 };
        let shallow = med(
            &align(&a, &b, depth, &judged, &scale).unwrap(),
            &measure,
        )
        .unwrap();
        let deep = med(
            &align(&a, &b, depth + 10, &judged, &scale).unwrap(),
            &measure,
        )
        .unwrap();
        assert!(
            deep.value <= shallow.value + 1e-12,
            "trial {trial}: {} grew to {}",
            shallow.value,
            deep.value
        );
        assert!(
            shallow.value - deep.value <= 2.0 * 0.9f64.powi(depth as i32) + 1e-12,
            "trial {trial}: drop {} exceeds the tail bound",
            shallow.value - deep.value
        );
    }
}

#[test]
fn trailtext_distance_is_symmetric_with_zero_identity() {
    let mut rng = rng(361);
    for trial in 0..60 {
        let l = rng.random_range(50..=300);
        let build = |rng: &mut ChaCha8Rng| {
            let n = rng.random_range(1..=4);
            let passages = (0..n)
                .map(|_| {
                    Passage::new(
                        doc(rng.random_range(0..5)),
                        rng.random_range(0..30),
                        rng.random_range(20..=200),
                    )
                    .unwrap()
                })
                .collect();
            Trailtext::new("t", passages).unwrap()
        };
        let a = build(&mut rng);
        let b = build(&mut rng);
        let forward = med_u(&a, &b, l, 1.0).unwrap();
        let backward = med_u(&b, &a, l, 1.0).unwrap();
        assert_eq!(forward.value, backward.value, "trial {trial}");
        if a.text_len() >= l {
            let identity = med_u(&a, &a, l, 1.0).unwrap();
            assert_eq!(identity.value, 0.0, "trial {trial}");
        }
    }
}

#[test]
fn trailtext_distance_satisfies_the_triangle_inequality() {
    let mut rng = rng(371);
    for trial in 0..150 {
        let l = rng.random_range(50..=300);
        let build = |rng: &mut ChaCha8Rng| {
            let n = rng.random_range(1..=4);
            let passages = (0..n)
                .map(|_| {
                    Passage::new(
                        doc(rng.random_range(0..5)),
                        rng.random_range(0..30),
                        rng.random_range(l / 2..=l + 40),
                    )
                    .unwrap()
                })
                .collect();
            Trailtext::new("t", passages).unwrap()
        };
        let a = build(&mut rng);
        let b = build(&mut rng);
        let c = build(&mut rng);
        let ab = med_u(&a, &b, l, 1.0).unwrap().value;
        let bc = med_u(&b, &c, l, 1.0).unwrap().value;
        let ac = med_u(&a, &c, l, 1.0).unwrap().value;
        assert!(
            ac <= ab + bc + 1e-9,
            "trial {trial}: {ac} > {ab} + {bc}"
        );
    }
}
