use hairkit_core::codec::{fit_codec, LatentCode, StrandCodec};
use hairkit_core::groom::{generate_sample, GuideSet, RandomSpec};
use hairkit_core::metrics::{evaluate_hair, MatchOptions, ThresholdPair};
use hairkit_core::scalp::{ScalpMask, ScalpSurface};
use hairkit_core::strand::{strand_data_loss, LossConfig, Strand};
use hairkit_core::texture::{bake, decode_hairstyle, push_pull, BakeOptions};
use hairkit_core::Vec3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn groomed(seed: u64, strands: usize) -> hairkit_core::strand::Hairstyle {
    let surface = ScalpSurface::default();
    let base = GuideSet::preset("short", &surface).unwrap();
    let mut spec = RandomSpec::default();
    spec.set_fixed("strand_count", strands as f64).unwrap();
    generate_sample(&base, &spec, seed).unwrap().hair
}

#[test]
fn groom_bake_fill_decode() {
    let surface = ScalpSurface::default();
    let hair = groomed(12, 800);
    assert_eq!(hair.len(), 800);
    assert!(hair
        .strands()
        .iter()
        .flat_map(|s| s.points())
        .all(|p| surface.signed_distance(p) > -1e-9));

    let codec = fit_codec(hair.strands(), &surface).unwrap();
    let (tex, density) = bake(&hair, &codec, &surface, &BakeOptions::default()).unwrap();
    assert!(tex.valid_count() > 0 && tex.valid_count() <= 800);
    let filled = push_pull(&tex, &ScalpMask::new(tex.resolution())).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let decoded = decode_hairstyle(&filled, &density, 800, &codec, &surface, &mut rng).unwrap();
    let report = evaluate_hair(
        &decoded,
        &hair,
        1.0,
        &ThresholdPair::defaults(),
        MatchOptions::default(),
    )
    .unwrap();
    assert!(report.scores[2].fscore > 80.0, "{}", report.to_table());
    assert!(report.scores.windows(2).all(|w| w[1].fscore >= w[0].fscore));
}

fn strand(coords: &[f64]) -> Strand {
    Strand::new(coords.chunks(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strand_loss_is_a_metric(
        a in prop::collection::vec(-1.0f64..1.0, 30),
        b in prop::collection::vec(-1.0f64..1.0, 30),
        c in prop::collection::vec(-1.0f64..1.0, 30),
    ) {
        let (a, b, c) = (strand(&a), strand(&b), strand(&c));
        let cfg = LossConfig::default();
        let ab = strand_data_loss(&a, &b, &cfg).unwrap();
        prop_assert_eq!(strand_data_loss(&a, &a, &cfg).unwrap(), 0.0);
        prop_assert!((ab - strand_data_loss(&b, &a, &cfg).unwrap()).abs() <= 1e-12 * ab.max(1.0));
        let ac = strand_data_loss(&a, &c, &cfg).unwrap();
        let cb = strand_data_loss(&c, &b, &cfg).unwrap();
        prop_assert!(ab <= ac + cb + 1e-12);
    }
}

#[test]
fn codes_round_trip_through_world_space() {
    let surface = ScalpSurface::default();
    let codec = fit_codec(groomed(13, 400).strands(), &surface).unwrap();
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(64));
    runner
        .run(
            &(prop::collection::vec(-3.0f64..3.0, 64), 0.3f64..0.7, 0.3f64..0.7),
            |(z, u, v)| {
                let frame = surface.uv_to_world([u, v]).unwrap();
                let z = LatentCode::from_slice(&z).unwrap();
                let back = codec.encode(&codec.decode(&z, &frame), &frame).unwrap();
                for (a, b) in z.0.iter().zip(&back.0) {
                    prop_assert!((a - b).abs() < 1e-8);
                }
                Ok(())
            },
        )
        .unwrap();
}
