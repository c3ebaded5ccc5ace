use dmnn::architecture::{
    compile, identity_params, init_params, param_neighbors, ArchitectureSpec, LayerParams,
    LayerSpec, ParamVector,
};
use dmnn::lattice::{PixelSet, Point, Window};
use dmnn::mcg::StructOp;
use dmnn::morphology::{dilate, erode, BinaryImage};
use dmnn::training::{
    lda_train, loss_absolute, loss_iou, mean_loss, slda_train, Loss, SamplePair, TrainConfig,
    TrainReport,
};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, p: f64) -> BinaryImage {
    BinaryImage::from_fn(w, h, |_, _| rng.random_bool(p))
}

fn set_params(se: PixelSet, window: Window) -> ParamVector {
    ParamVector::new(vec![LayerParams::Set(StructOp::new(se, window).unwrap())])
}

fn check_bookkeeping(r: &TrainReport) {
    let mut min = r.initial_loss.clone();
    let mut prev = r.initial_loss.clone();
    for row in &r.log {
        assert!(row.best_loss <= prev);
        if row.current_loss < min {
            min = row.current_loss.clone();
        }
        assert_eq!(row.best_loss, min);
        prev = row.best_loss.clone();
    }
    assert_eq!(r.best_loss, min);
    assert!(r.best_loss <= r.initial_loss);
}

#[test]
fn loss_examples() {
    let id = compile(
        &ArchitectureSpec::new(vec![LayerSpec::Erosion { d: 1 }]).unwrap(),
        &set_params(PixelSet::origin(), Window::origin()),
    )
    .unwrap()
    .graph;
    let x = BinaryImage::from_points(2, 2, &[Point::new(0, 0), Point::new(1, 1)].into_iter().collect());
    let y = BinaryImage::from_points(2, 2, &PixelSet::origin());
    assert_eq!(loss_absolute(&x, &y, &id).unwrap(), q(1, 4));
    assert_eq!(loss_absolute(&x, &x, &id).unwrap(), q(0, 1));
    assert_eq!(loss_absolute(&x, &x.complement(), &id).unwrap(), q(1, 1));
    assert_eq!(loss_iou(&x, &x, &id).unwrap(), q(0, 1));
    assert_eq!(loss_iou(&x, &y, &id).unwrap(), q(1, 2));
    assert_eq!(loss_iou(&y, &x.difference(&y), &id).unwrap(), q(1, 1));
    let empty = BinaryImage::new(2, 2);
    assert_eq!(loss_iou(&empty, &empty, &id).unwrap(), q(0, 1));
    assert!(loss_iou(&x, &BinaryImage::new(3, 2), &id).is_err());
}

#[test]
fn mean_loss_examples() {
    let arch = ArchitectureSpec::new(vec![LayerSpec::Erosion { d: 3 }]).unwrap();
    let id = identity_params(&arch);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = random_image(&mut rng, 8, 8, 0.5);
    let pairs = vec![
        SamplePair::new(x.clone(), x.clone()).unwrap(),
        SamplePair::new(x.clone(), x.complement()).unwrap(),
    ];
    assert_eq!(mean_loss(&id, &arch, &pairs[..1], Loss::Absolute).unwrap(), q(0, 1));
    assert_eq!(mean_loss(&id, &arch, &pairs, Loss::Absolute).unwrap(), q(1, 2));
    assert!(mean_loss(&id, &arch, &[], Loss::Absolute).is_err());
}

#[test]
fn lda_finds_the_dilation() {
    let o = Point::ORIGIN;
    let right = Point::new(1, 0);
    let w = Window::new([o, right].into_iter().collect());
    let b_star: PixelSet = [o, right].into_iter().collect();
    let arch = ArchitectureSpec::new(vec![LayerSpec::Dilation { d: 3 }]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pairs: Vec<SamplePair> = (0..4)
        .map(|_| {
            let x = random_image(&mut rng, 12, 12, 0.2);
            let y = dilate(&x, &b_star);
            SamplePair::new(x, y).unwrap()
        })
        .collect();

    // Oracle: the loss of every point of the 4-point lattice.
    let subsets: Vec<PixelSet> = (0..4u64).map(|m| w.set_of(m)).collect();
    let losses: Vec<BigRational> = subsets
        .iter()
        .map(|s| mean_loss(&set_params(s.clone(), w.clone()), &arch, &pairs, Loss::Absolute).unwrap())
        .collect();
    let argmin = (0..4).min_by_key(|&i| losses[i].clone()).unwrap();
    assert_eq!(subsets[argmin], b_star);
    assert!(losses[argmin].is_zero());

    let init = set_params(PixelSet::origin(), w.clone());
    let r = lda_train(&arch, init, &pairs, &TrainConfig::lda(2, Loss::Absolute, 0)).unwrap();
    assert_eq!(r.best_params, set_params(b_star, w));
    assert!(r.best_loss.is_zero());
    assert_eq!(r.epoch_of_best, 1);
    check_bookkeeping(&r);
}

#[test]
fn lda_reaches_realizable_erosion() {
    let target: PixelSet = [Point::ORIGIN, Point::new(1, 0), Point::new(0, 1)].into_iter().collect();
    let arch = ArchitectureSpec::new(vec![LayerSpec::Erosion { d: 3 }]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pairs: Vec<SamplePair> = (0..10)
        .map(|_| {
            let x = random_image(&mut rng, 32, 32, 0.7);
            let y = erode(&x, &target);
            SamplePair::new(x, y).unwrap()
        })
        .collect();
    let r = lda_train(&arch, identity_params(&arch), &pairs, &TrainConfig::lda(10, Loss::Absolute, 9)).unwrap();
    assert!(r.best_loss.is_zero());
    assert_eq!(r.best_params, set_params(target, Window::square(3)));
    check_bookkeeping(&r);
}

#[test]
fn slda_moves_once_per_batch() {
    let arch = ArchitectureSpec::new(vec![LayerSpec::Asf { d: 3 }, LayerSpec::SupGenSup { k: 2, d: 3 }]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pairs: Vec<SamplePair> = (0..7)
        .map(|_| {
            let x = random_image(&mut rng, 10, 10, 0.4);
            SamplePair::new(x.clone(), x).unwrap()
        })
        .collect();
    for b in 1..=7 {
        let cfg = TrainConfig::slda(1, b, 1, Loss::Iou, 5);
        let r = slda_train(&arch, identity_params(&arch), &pairs, &cfg).unwrap();
        assert_eq!(r.moves, 7usize.div_ceil(b));
        assert_eq!(r.log.len(), 1);
    }
}

#[test]
fn config_is_checked() {
    let arch = ArchitectureSpec::new(vec![LayerSpec::Erosion { d: 3 }]).unwrap();
    let x = BinaryImage::new(4, 4);
    let pairs = vec![SamplePair::new(x.clone(), x).unwrap()];
    let p = identity_params(&arch);
    assert!(slda_train(&arch, p.clone(), &pairs, &TrainConfig::slda(1, 2, 1, Loss::Iou, 0)).is_err());
    assert!(slda_train(&arch, p.clone(), &pairs, &TrainConfig::slda(0, 1, 1, Loss::Iou, 0)).is_err());
    assert!(slda_train(&arch, p.clone(), &pairs, &TrainConfig::slda(1, 1, 0, Loss::Iou, 0)).is_err());
    assert!(lda_train(&arch, p, &[], &TrainConfig::lda(1, Loss::Iou, 0)).is_err());
}

fn tiny_problem(seed: u64) -> (ArchitectureSpec, ParamVector, Vec<SamplePair>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = match rng.random_range(0..3) {
        0 => vec![LayerSpec::Asf { d: 3 }, LayerSpec::SupGenSup { k: 2, d: 3 }],
        1 => vec![LayerSpec::Erosion { d: 3 }, LayerSpec::Complement, LayerSpec::InfGenInf { k: 1, d: 3 }],
        _ => vec![LayerSpec::Opening { d: 3 }, LayerSpec::Dilation { d: 3 }],
    };
    let arch = ArchitectureSpec::new(layers).unwrap();
    let init = init_params(&arch, &mut rng, 2);
    let n = rng.random_range(1..=4);
    let pairs = (0..n)
        .map(|_| {
            let x = random_image(&mut rng, 9, 9, 0.5);
            let y = random_image(&mut rng, 9, 9, 0.3);
            SamplePair::new(x, y).unwrap()
        })
        .collect();
    (arch, init, pairs)
}

#[test]
fn slda_degenerates_to_lda() {
    for seed in 0..10 {
        let (arch, init, pairs) = tiny_problem(seed);
        let n = pairs.len();
        let lda = lda_train(&arch, init.clone(), &pairs, &TrainConfig::lda(4, Loss::Iou, seed)).unwrap();
        let slda = slda_train(&arch, init, &pairs, &TrainConfig::slda(4, n, 10_000, Loss::Iou, seed)).unwrap();
        let path = |r: &TrainReport| r.log.iter().map(|l| l.params.clone()).collect::<Vec<_>>();
        assert_eq!(path(&lda), path(&slda));
        assert_eq!(lda.best_params, slda.best_params);
        assert_eq!(lda.best_loss, slda.best_loss);
    }
}

#[test]
fn lda_moves_to_a_neighborhood_minimum() {
    let (arch, init, pairs) = tiny_problem(21);
    let r = lda_train(&arch, init.clone(), &pairs, &TrainConfig::lda(3, Loss::Absolute, 1)).unwrap();
    let mut c = init;
    for row in &r.log {
        let best = param_neighbors(&c)
            .iter()
            .map(|p| mean_loss(p, &arch, &pairs, Loss::Absolute).unwrap())
            .min()
            .unwrap();
        assert_eq!(row.current_loss, best);
        assert!(param_neighbors(&c).contains(&row.params));
        c = row.params.clone();
    }
}

#[test]
fn lda_best_is_zero_or_local_minimum() {
    // 2×2-window erosion lattice: 16 points, enumerated as the oracle.
    let w = Window::new([(0, 0), (1, 0), (0, 1), (1, 1)].into_iter().map(|(x, y)| Point::new(x, y)).collect());
    let arch = ArchitectureSpec::new(vec![LayerSpec::Erosion { d: 3 }]).unwrap();
    for seed in 0..8u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let truth = w.set_of(rng.random_range(0..16));
        let pairs: Vec<SamplePair> = (0..3)
            .map(|_| {
                let x = random_image(&mut rng, 10, 10, 0.6);
                let y = erode(&x, &truth);
                SamplePair::new(x, y).unwrap()
            })
            .collect();
        let exhaustive_min = (0..16u64)
            .map(|m| mean_loss(&set_params(w.set_of(m), w.clone()), &arch, &pairs, Loss::Absolute).unwrap())
            .min()
            .unwrap();
        assert!(exhaustive_min.is_zero());
        let init = set_params(w.set_of(rng.random_range(0..16)), w.clone());
        let r = lda_train(&arch, init, &pairs, &TrainConfig::lda(20, Loss::Absolute, seed)).unwrap();
        if !r.best_loss.is_zero() {
            for n in param_neighbors(&r.best_params) {
                assert!(mean_loss(&n, &arch, &pairs, Loss::Absolute).unwrap() >= r.best_loss);
            }
        }
    }
}

#[test]
fn reports_ignore_thread_count() {
    let (arch, init, pairs) = tiny_problem(7);
    let cfg = TrainConfig::slda(6, 2.min(pairs.len()), 5, Loss::Iou, 77);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| slda_train(&arch, init.clone(), &pairs, &cfg).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.best_params, b.best_params);
    assert_eq!(a.best_loss, b.best_loss);
    let losses = |r: &TrainReport| r.log.iter().map(|l| (l.current_loss.clone(), l.params.clone())).collect::<Vec<_>>();
    assert_eq!(losses(&a), losses(&b));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bookkeeping_holds(seed in any::<u64>(), lda in any::<bool>(), epochs in 1usize..6) {
        let (arch, init, pairs) = tiny_problem(seed);
        let n = pairs.len();
        let r = if lda {
            lda_train(&arch, init, &pairs, &TrainConfig::lda(epochs, Loss::Absolute, seed)).unwrap()
        } else {
            slda_train(&arch, init, &pairs, &TrainConfig::slda(epochs, 1 + (seed as usize % n), 3, Loss::Iou, seed)).unwrap()
        };
        check_bookkeeping(&r);
        prop_assert_eq!(r.log.len(), epochs);
        prop_assert!(r.best_loss <= BigRational::one());
    }
}
