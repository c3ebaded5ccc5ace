use dmnn::dataset::{
    add_noise, boundary_target, decode_pbm, encode_pbm, gen_corpus, load_pairs, read_pbm,
    write_corpus, write_pbm, CorpusSpec, DatasetError, Manifest, ShapeKind,
};
use dmnn::lattice::Point;
use dmnn::morphology::BinaryImage;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_image(seed: u64, w: usize, h: usize) -> BinaryImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BinaryImage::from_fn(w, h, |_, _| rng.random_bool(0.5))
}

#[test]
fn pbm_round_trip_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let x = random_image(1, 56, 56);
    let path = dir.path().join("x.pbm");
    write_pbm(&x, &path).unwrap();
    assert_eq!(read_pbm(&path).unwrap(), x);
}

#[test]
fn plain_pbm_diagonal() {
    let img = decode_pbm(b"P1\n# comment\n2 2\n1 0\n0 1\n").unwrap();
    assert_eq!(img.to_points(), [Point::new(0, 0), Point::new(1, 1)].into_iter().collect());
    // digits need not be separated
    assert_eq!(decode_pbm(b"P1 2 2 1001").unwrap(), img);
}

#[test]
fn malformed_pbm_reports_offsets() {
    let offset = |b: &[u8]| match decode_pbm(b) {
        Err(DatasetError::Pbm { offset, .. }) => offset,
        other => panic!("expected a PBM error, got {other:?}"),
    };
    assert_eq!(offset(b"P2\n1 1\n0"), 0);
    assert_eq!(offset(b"P1\nx 1\n0"), 3);
    assert_eq!(offset(b"P1\n2 2\n1 0\n0"), 12);
    let raw = encode_pbm(&random_image(2, 20, 4), false);
    assert_eq!(offset(&raw[..raw.len() - 1]), raw.len() - 1);
    assert_eq!(offset(b"P1\n2 2\n1 0\n0 7"), 13);
}

#[test]
fn boundary_examples() {
    let empty = BinaryImage::new(8, 8);
    assert!(boundary_target(&empty).is_empty());
    let dot = BinaryImage::from_fn(8, 8, |x, y| (x, y) == (3, 4));
    assert_eq!(boundary_target(&dot), dot);
    let block = BinaryImage::from_fn(8, 8, |x, y| (2..6).contains(&x) && (2..6).contains(&y));
    let ring = boundary_target(&block);
    assert_eq!(ring.count_ones(), 12);
    assert!(!ring.get(3, 3) && !ring.get(4, 4) && ring.get(2, 2));
}

#[test]
fn noise_rate_is_respected() {
    let x = BinaryImage::new(400, 250);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    assert_eq!(add_noise(&x, 0.0, &mut rng), x);
    let rate = 0.05;
    let flipped = add_noise(&x, rate, &mut rng).count_ones() as f64;
    let n = x.area() as f64;
    let sigma = (n * rate * (1.0 - rate)).sqrt();
    assert!((flipped - n * rate).abs() <= 3.0 * sigma, "{flipped} flips of {n}");
    let a = add_noise(&x, rate, &mut ChaCha8Rng::seed_from_u64(9));
    let b = add_noise(&x, rate, &mut ChaCha8Rng::seed_from_u64(9));
    assert_eq!(a, b);
}

#[test]
fn corpus_on_disk() {
    for kind in [ShapeKind::Blobs, ShapeKind::DigitsFont] {
        let dir = tempfile::tempdir().unwrap();
        let spec = CorpusSpec::new(10, kind, 42);
        let m = write_corpus(&spec, dir.path()).unwrap();
        assert_eq!(m.files.len(), 10);
        let pbms = std::fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "pbm"))
            .count();
        assert_eq!(pbms, 20);
        let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        let back: Manifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);

        let pairs = load_pairs(dir.path()).unwrap();
        let generated = gen_corpus(&spec).unwrap();
        for (p, g) in pairs.iter().zip(&generated) {
            assert_eq!(p, &g.pair);
            assert_eq!(p.target, boundary_target(&g.clean));
            assert!(!g.clean.is_empty());
        }

        std::fs::remove_file(dir.path().join("manifest.json")).unwrap();
        assert_eq!(load_pairs(dir.path()).unwrap(), pairs);
    }
}

#[test]
fn noiseless_inputs_reproduce_targets() {
    let mut spec = CorpusSpec::new(6, ShapeKind::Blobs, 5);
    spec.noise_rate = 0.0;
    for g in gen_corpus(&spec).unwrap() {
        assert_eq!(boundary_target(&g.pair.input), g.pair.target);
    }
}

#[test]
fn bad_specs_and_empty_dirs() {
    let mut spec = CorpusSpec::new(3, ShapeKind::Blobs, 0);
    spec.noise_rate = 0.5;
    assert!(gen_corpus(&spec).is_err());
    assert!(gen_corpus(&CorpusSpec::new(0, ShapeKind::Blobs, 0)).is_err());
    let dir = tempfile::tempdir().unwrap();
    assert!(load_pairs(dir.path()).is_err());
}

proptest! {
    #[test]
    fn pbm_round_trips(seed in any::<u64>(), w in 1usize..70, h in 1usize..20, plain in any::<bool>()) {
        let x = random_image(seed, w, h);
        prop_assert_eq!(decode_pbm(&encode_pbm(&x, plain)).unwrap(), x);
    }
}
