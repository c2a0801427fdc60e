use hairkit_core::groom::GroomParams;
use hairkit_core::io::{Container, HairFile, HAIR_HEADER_LEN};
use hairkit_core::texture::{DensityMap, ScalpTexture};
use proptest::prelude::*;

fn hair_file(counts: &[u32]) -> HairFile {
    let total: u32 = counts.iter().sum();
    let points = (0..3 * total).map(|i| i as f32 * 0.25 - 7.0).collect();
    HairFile::new(counts.to_vec(), points, None).unwrap()
}

#[test]
fn files_survive_disk_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.hair");
    let h = hair_file(&[3, 5, 2]).with_attributes(vec![0.5, 1.0, 2.0]).unwrap();
    h.write(&path).unwrap();
    assert_eq!(HairFile::read(&path).unwrap(), h);
    assert_eq!(
        std::fs::metadata(&path).unwrap().len(),
        HairFile::encoded_len(3, 10, true)
    );

    let mut c = Container::new();
    let mut t = ScalpTexture::empty(8, 2);
    t.set_texel(3, 4, &[1.5, -1.0]);
    c.put_texture(&t).unwrap();
    c.put_density(&DensityMap::new(8, vec![0.5; 64]).unwrap()).unwrap();
    c.put_params(&GroomParams {
        seed: 4,
        ..GroomParams::default()
    });
    let cpath = dir.path().join("x.dlck");
    c.write(&cpath).unwrap();
    let back = Container::read(&cpath).unwrap();
    assert_eq!(back.texture().unwrap(), t);
    assert_eq!(back.params().unwrap().seed, 4);
    assert_eq!(back.codec().unwrap_err().code(), "missing_chunk");
}

#[test]
fn trailing_bytes_are_rejected() {
    let mut b = hair_file(&[4]).to_bytes();
    b.push(0);
    assert_eq!(HairFile::from_bytes(&b).unwrap_err().code(), "trailing_bytes");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hair_round_trip(counts in prop::collection::vec(1u32..20, 1..12)) {
        let h = hair_file(&counts);
        let bytes = h.to_bytes();
        prop_assert_eq!(bytes.len() as u64, HAIR_HEADER_LEN + 4 * counts.len() as u64 + 12 * h.total_points());
        prop_assert_eq!(HairFile::from_bytes(&bytes).unwrap(), h);
    }

    #[test]
    fn truncation_is_an_error_not_a_panic(counts in prop::collection::vec(1u32..10, 1..6), cut in 0usize..400) {
        let bytes = hair_file(&counts).to_bytes();
        let cut = cut.min(bytes.len() - 1);
        prop_assert!(HairFile::from_bytes(&bytes[..cut]).is_err());
        let mut c = Container::new();
        c.put_raw(*b"ABCD", bytes.clone());
        let cb = c.to_bytes();
        let cut = cut.min(cb.len() - 1);
        let r = Container::from_bytes(&cb[..cut]);
        prop_assert!(r.is_err());
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = HairFile::from_bytes(&bytes);
        let _ = Container::from_bytes(&bytes);
    }
}
