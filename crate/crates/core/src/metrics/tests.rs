use super::*;
use crate::strand::test_shapes::{helix, straight};
use crate::strand::Strand;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random oriented points in a cube of side `extent` mm. Directions cluster
/// around a few axes so that angle thresholds matter.
pub(crate) fn random_samples(n: usize, extent: f64, seed: u64) -> Vec<PointSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axes = [Vec3::x(), Vec3::y(), Vec3::z(), -Vec3::z()];
    (0..n)
        .map(|_| {
            let position = Vec3::new(
                rng.random_range(0.0..extent),
                rng.random_range(0.0..extent),
                rng.random_range(0.0..extent),
            );
            let jitter = Vec3::new(
                rng.random_range(-0.8..0.8),
                rng.random_range(-0.8..0.8),
                rng.random_range(-0.8..0.8),
            );
            let direction = (axes[rng.random_range(0..axes.len())] + jitter).normalize();
            PointSample { position, direction }
        })
        .collect()
}

fn hair(strands: Vec<Strand>) -> Hairstyle {
    Hairstyle::new(strands).unwrap()
}

#[test]
fn straight_strand_sample_count() {
    // 100 mm along +z.
    let h = hair(vec![straight(256, 0.1 / 255.0)]);
    let s = point_samples(&h, 1.0).unwrap();
    assert_eq!(s.len(), 101);
    for p in &s {
        assert!((p.direction - Vec3::z()).norm() < 1e-12);
    }
    assert!((s[100].position.z - 100.0).abs() < 1e-9);
    assert!(point_samples(&h, 0.0).is_err());
}

#[test]
fn total_count_is_sum_over_strands() {
    let strands: Vec<Strand> = (1..6).map(|k| helix(0.002 * k as f64, 0.01, 1.5, 256)).collect();
    let spacing = 0.7;
    let expected: usize = strands
        .iter()
        .map(|s| (s.arc_length() * 1000.0 / spacing + 1e-9).floor() as usize + 1)
        .sum();
    assert_eq!(point_samples(&hair(strands), spacing).unwrap().len(), expected);
}

#[test]
fn helix_tangents_match_analytic() {
    let (r, pitch) = (0.005, 0.01);
    let h = hair(vec![helix(r, pitch, 3.0, 256)]);
    for s in point_samples(&h, 0.5).unwrap() {
        assert!((s.direction.norm() - 1.0).abs() < 1e-9);
        let t = std::f64::consts::TAU * (s.position.z / 1000.0) / pitch;
        let exact = Vec3::new(-r * t.sin(), r * t.cos(), pitch / std::f64::consts::TAU).normalize();
        let angle = s.direction.dot(&exact).clamp(-1.0, 1.0).acos().to_degrees();
        assert!(angle < 1.0, "angle {angle}");
    }
}

#[test]
fn identical_sets_score_100() {
    let s = random_samples(2000, 50.0, 1);
    for opts in [
        MatchOptions::default(),
        MatchOptions {
            one_to_one: true,
            unsigned: false,
        },
    ] {
        let r = precision_recall_f(&s, &s, &ThresholdPair::defaults(), opts).unwrap();
        for t in &r.scores {
            assert_eq!((t.precision, t.recall, t.fscore), (100.0, 100.0, 100.0));
        }
    }
}

#[test]
fn separated_sets_score_zero() {
    let a = random_samples(500, 50.0, 2);
    let b: Vec<PointSample> = a
        .iter()
        .map(|p| PointSample {
            position: p.position + Vec3::new(1000.0, 0.0, 0.0),
            ..*p
        })
        .collect();
    let r = precision_recall_f(&a, &b, &ThresholdPair::defaults(), MatchOptions::default()).unwrap();
    for t in &r.scores {
        assert_eq!((t.precision, t.recall, t.fscore), (0.0, 0.0, 0.0));
    }
}

#[test]
fn empty_inputs_rejected() {
    let a = random_samples(10, 5.0, 3);
    let t = ThresholdPair::defaults();
    assert!(precision_recall_f(&[], &a, &t, MatchOptions::default()).is_err());
    assert!(brute_force_prf(&a, &[], &t, MatchOptions::default()).is_err());
    assert!(ThresholdPair::new(0.0, 10.0).is_err());
    assert!(ThresholdPair::new(1.0, -1.0).is_err());
}

#[test]
fn grid_equals_brute_force_1k() {
    let a = random_samples(1000, 40.0, 4);
    let b = random_samples(1000, 40.0, 5);
    for unsigned in [false, true] {
        for one_to_one in [false, true] {
            let opts = MatchOptions { unsigned, one_to_one };
            let g = precision_recall_f(&a, &b, &ThresholdPair::defaults(), opts).unwrap();
            let f = brute_force_prf(&a, &b, &ThresholdPair::defaults(), opts).unwrap();
            assert_eq!(g, f);
            assert!(g.scores.iter().any(|s| s.precision > 0.0 && s.precision < 100.0));
        }
    }
}

#[test]
fn points_on_cell_boundaries() {
    // Coordinates at exact multiples of the threshold, pairs at exactly the
    // threshold distance.
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..20 {
        let x = 2.0 * i as f64;
        a.push(PointSample {
            position: Vec3::new(x, 4.0, -2.0),
            direction: Vec3::x(),
        });
        b.push(PointSample {
            position: Vec3::new(x + 2.0, 4.0, -2.0),
            direction: Vec3::x(),
        });
        b.push(PointSample {
            position: Vec3::new(x, 6.0 + 1e-12, -2.0),
            direction: Vec3::x(),
        });
    }
    let t = [ThresholdPair {
        distance: 2.0,
        angle: 20.0,
    }];
    let g = precision_recall_f(&a, &b, &t, MatchOptions::default()).unwrap();
    assert_eq!(g, brute_force_prf(&a, &b, &t, MatchOptions::default()).unwrap());
    assert_eq!(g.scores[0].precision, 100.0);
}

#[test]
fn unsigned_flag_ignores_orientation() {
    let a = random_samples(300, 20.0, 6);
    let flipped: Vec<PointSample> = a
        .iter()
        .map(|p| PointSample {
            direction: -p.direction,
            ..*p
        })
        .collect();
    let t = ThresholdPair::defaults();
    let signed = precision_recall_f(&a, &flipped, &t, MatchOptions::default()).unwrap();
    let unsigned = precision_recall_f(
        &a,
        &flipped,
        &t,
        MatchOptions {
            unsigned: true,
            one_to_one: false,
        },
    )
    .unwrap();
    assert!(signed.scores[0].precision < 100.0);
    assert!(unsigned.scores.iter().all(|s| s.fscore == 100.0));
}

#[test]
fn report_outputs() {
    let r = MetricsReport {
        scores: vec![ThresholdScore {
            threshold_mm: 2.0,
            threshold_deg: 20.0,
            precision: 50.0,
            recall: 25.0,
            fscore: f_score(50.0, 25.0),
        }],
    };
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("threshold_mm,threshold_deg,precision,recall,fscore\n"));
    assert!(text.contains("2.0,20.0,50.0,25.0,33.33"));
    assert!(r.to_table().contains("2/20"));
    assert_eq!(f_score(0.0, 0.0), 0.0);
}

fn sizes() -> impl Strategy<Value = (usize, usize, f64, u64)> {
    (1usize..400, 1usize..400, 3.0f64..60.0, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grid_matches_brute_force((n, m, extent, seed) in sizes(), unsigned in any::<bool>(), one_to_one in any::<bool>()) {
        let a = random_samples(n, extent, seed);
        let b = random_samples(m, extent, seed ^ 0xFFFF);
        let opts = MatchOptions { unsigned, one_to_one };
        let t = ThresholdPair::defaults();
        prop_assert_eq!(precision_recall_f(&a, &b, &t, opts).unwrap(), brute_force_prf(&a, &b, &t, opts).unwrap());
    }

    #[test]
    fn swap_exchanges_precision_and_recall((n, m, extent, seed) in sizes()) {
        let a = random_samples(n, extent, seed);
        let b = random_samples(m, extent, seed.wrapping_add(1));
        let t = ThresholdPair::defaults();
        let ab = precision_recall_f(&a, &b, &t, MatchOptions::default()).unwrap();
        let ba = precision_recall_f(&b, &a, &t, MatchOptions::default()).unwrap();
        for (x, y) in ab.scores.iter().zip(&ba.scores) {
            prop_assert_eq!(x.precision, y.recall);
            prop_assert_eq!(x.recall, y.precision);
            prop_assert_eq!(x.fscore, y.fscore);
        }
    }

    #[test]
    fn enlarging_thresholds_never_lowers_scores(
        (n, m, extent, seed) in sizes(),
        d in 0.5f64..6.0, a in 5.0f64..60.0, dd in 0.0f64..3.0, da in 0.0f64..30.0,
    ) {
        let p = random_samples(n, extent, seed);
        let g = random_samples(m, extent, seed.wrapping_mul(3));
        let t = [
            ThresholdPair { distance: d, angle: a },
            ThresholdPair { distance: d + dd, angle: a },
            ThresholdPair { distance: d, angle: a + da },
            ThresholdPair { distance: d + dd, angle: a + da },
        ];
        let r = precision_recall_f(&p, &g, &t, MatchOptions::default()).unwrap().scores;
        for (lo, hi) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            prop_assert!(r[hi].precision >= r[lo].precision);
            prop_assert!(r[hi].recall >= r[lo].recall);
            prop_assert!(r[hi].fscore >= r[lo].fscore);
        }
    }
}
