use super::*;
use crate::transform::{dct2, idct2, tl_embed, tl_restrict, CoeffMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise(h: usize, w: usize, seed: u64) -> Plane {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Plane::from_fn(h, w, |_, _| rng.random::<f64>())
}

// smooth background with a few sharp features so that refinement is uneven
fn textured(h: usize, w: usize, seed: u64) -> Plane {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spots: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0.0..h as f64),
                rng.random_range(0.0..w as f64),
                rng.random_range(1.0..6.0),
            )
        })
        .collect();
    Plane::from_fn(h, w, |i, j| {
        let mut v = 0.3 + 0.2 * (i as f64 / h as f64) + 0.1 * (j as f64 / w as f64);
        for &(r, c, s) in &spots {
            let d2 = (i as f64 - r).powi(2) + (j as f64 - c).powi(2);
            if d2 < s * s {
                v += 0.3;
            }
        }
        v.min(1.0)
    })
}

fn counterexample_image() -> Plane {
    let mut c = Plane::zeros(32, 32);
    c.set(5, 5, 15.0);
    idct2(&CoeffMatrix::new(c))
}

fn assert_partition(leaves: &[Element], h: usize, w: usize) {
    let mut seen = alloc::vec![0u8; h * w];
    for e in leaves {
        assert!(e.row + e.height <= h && e.col + e.width <= w);
        for i in e.row..e.row + e.height {
            for j in e.col..e.col + e.width {
                seen[i * w + j] += 1;
            }
        }
    }
    assert!(seen.iter().all(|&c| c == 1), "leaves do not partition the channel");
    assert_eq!(leaves.iter().map(Element::area).sum::<usize>(), h * w);
}

fn snapshots<Q: LeafQueue>(mut r: Refiner<'_, Q>, tol: f64) -> Vec<Vec<Element>> {
    let mut out = alloc::vec![r.tree().leaves()];
    while let StepOutcome::Refined(_) = r.step(tol).unwrap() {
        out.push(r.tree().leaves());
    }
    out
}

#[test]
fn refine_element_geometry() {
    let parent = Element {
        row: 0,
        col: 0,
        height: 32,
        width: 32,
        level: 0,
    };
    let kids = refine_element(&parent).unwrap();
    let origins: Vec<_> = kids.iter().map(|k| k.origin()).collect();
    assert_eq!(origins, [(0, 0), (0, 16), (16, 0), (16, 16)]);
    for k in &kids {
        assert_eq!((k.height, k.width, k.level), (16, 16, 1));
        assert!(parent.contains(k));
    }
    for a in 0..4 {
        for b in a + 1..4 {
            assert!(!kids[a].overlaps(&kids[b]));
        }
    }
    assert_eq!(kids.iter().map(Element::area).sum::<usize>(), parent.area());

    let wide = Element::root(16, 64);
    for k in refine_element(&wide).unwrap() {
        assert_eq!(k.height * 64, k.width * 16);
    }
    let odd = Element { height: 3, ..parent };
    assert!(refine_element(&odd).is_err());
}

#[test]
fn order_of_uniform_four() {
    let kids = refine_element(&Element::root(32, 32)).unwrap();
    let shuffled = alloc::vec![kids[3], kids[1], kids[2], kids[0]];
    assert_eq!(order_elements(shuffled), kids.to_vec());
    assert_eq!(order_elements(alloc::vec![kids[2]]), alloc::vec![kids[2]]);
}

#[test]
fn partition_and_minimum_size_every_iteration() {
    for (h, w, seed) in [(64, 64, 1), (32, 128, 2), (128, 32, 3)] {
        let img = textured(h, w, seed);
        let r = Refiner::new(&img, NormKind::L2).unwrap();
        let snaps = snapshots(r, 1e-4);
        assert!(snaps.len() > 2);
        for (k, leaves) in snaps.iter().enumerate() {
            assert_partition(leaves, h, w);
            assert!(leaves.iter().all(|e| e.height.min(e.width) >= 8));
            if k > 0 {
                assert!(leaves.len() > snaps[k - 1].len());
            }
        }
    }
}

#[test]
fn nestedness_between_snapshots() {
    let img = textured(64, 64, 7);
    let snaps = snapshots(Refiner::new(&img, NormKind::L2).unwrap(), 1e-5);
    for a in 0..snaps.len() {
        for b in a + 1..snaps.len() {
            for coarse in &snaps[a] {
                let covered: usize = snaps[b].iter().filter(|f| coarse.contains(f)).map(Element::area).sum();
                assert_eq!(covered, coarse.area());
                assert!(snaps[b].iter().all(|f| coarse.contains(f) || !coarse.overlaps(f)));
            }
        }
    }
}

#[test]
fn heap_and_scan_produce_identical_sequences() {
    for seed in 0..6 {
        for (h, w) in [(32, 32), (64, 64), (32, 64)] {
            let img = if seed % 2 == 0 {
                textured(h, w, seed)
            } else {
                noise(h, w, seed)
            };
            for tol in [0.0, 1e-3, 1e-2] {
                let heap = snapshots(Refiner::new(&img, NormKind::L2).unwrap(), tol);
                let scan = snapshots(Refiner::with_queue(&img, NormKind::L2, ScanQueue::new()).unwrap(), tol);
                assert_eq!(heap, scan);
            }
        }
    }
}

// Independent re-implementation: full DCTs, recompute E and the maximum over all
// leaves from scratch every iteration.
fn naive_sequence(img: &Plane, tol: f64) -> Vec<Vec<Element>> {
    let (h, w) = img.dims();
    let frame = (h * w) as f64;
    let eta = |e: &Element| -> f64 {
        let block = img.sub(e.row, e.col, e.height, e.width);
        let tl = tl_restrict(&dct2(&block)).unwrap();
        let approx = idct2(&tl_embed(&tl, e.height, e.width).unwrap());
        let s: f64 = block
            .data()
            .iter()
            .zip(approx.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if e.height <= 8 && e.width <= 8 {
            0.0
        } else {
            (s / frame).sqrt()
        }
    };
    let root = Element::root(h, w);
    let e0 = eta(&root);
    let mut leaves = alloc::vec![(root, e0, e0)];
    let mut out = alloc::vec![order_elements(leaves.iter().map(|l| l.0).collect())];
    loop {
        let total = leaves.iter().map(|l| l.1 * l.1).sum::<f64>().sqrt();
        if total <= tol {
            break;
        }
        let max = leaves.iter().map(|l| l.2).fold(f64::NEG_INFINITY, f64::max);
        let marked: Vec<usize> = (0..leaves.len())
            .filter(|&i| leaves[i].2 == max && leaves[i].0.height.min(leaves[i].0.width) >= 16)
            .collect();
        if marked.is_empty() {
            break;
        }
        let mut next: Vec<_> = (0..leaves.len())
            .filter(|i| !marked.contains(i))
            .map(|i| leaves[i])
            .collect();
        for &i in &marked {
            let (e, pe, pt) = leaves[i];
            let kids = refine_element(&e).unwrap();
            let etas: Vec<f64> = kids.iter().map(&eta).collect();
            let s: f64 = etas.iter().map(|x| x * x).sum();
            let den = pe * pe + pt * pt;
            let t = if den == 0.0 { 0.0 } else { (s / den).sqrt() * pt };
            for (k, x) in kids.into_iter().zip(etas) {
                next.push((k, x, t));
            }
        }
        leaves = next;
        out.push(order_elements(leaves.iter().map(|l| l.0).collect()));
    }
    out
}

#[test]
fn matches_independent_naive_algorithm() {
    for seed in 0..4 {
        let img = textured(32, 32, 100 + seed);
        for tol in [1e-3, 3e-3, 1e-2] {
            let fast = snapshots(Refiner::new(&img, NormKind::L2).unwrap(), tol);
            let slow = naive_sequence(&img, tol);
            assert_eq!(fast, slow, "seed {seed} tol {tol}");
        }
    }
}

#[test]
fn constant_channel_stays_single_element() {
    let img = Plane::filled(64, 64, 0.6);
    for tol in [1e-12, 0.01, 1.0] {
        let m = run_adaptive(&img, tol, NormKind::L2).unwrap();
        assert_eq!(m.leaves, alloc::vec![Element::root(64, 64)]);
        assert_eq!(m.iterations, 0);
        assert_eq!(m.termination, Termination::Tolerance);
    }
}

#[test]
fn infinite_tolerance_does_nothing() {
    let img = noise(64, 64, 4);
    let m = run_adaptive(&img, f64::INFINITY, NormKind::L2).unwrap();
    assert_eq!(m.leaves.len(), 1);
    assert_eq!(m.iterations, 0);
    assert_eq!(m.blocks.len(), 1);
}

#[test]
fn counterexample_is_not_refined() {
    // the only frequency sits inside the kept block, so E(T_0) = 0 and the loop guard never fires
    let img = counterexample_image();
    let m = run_adaptive(&img, 1e-10, NormKind::L2).unwrap();
    assert_eq!(m.leaves.len(), 1);
    assert!(m.error <= 1e-12);
    assert_eq!(m.termination, Termination::Tolerance);
}

#[test]
fn marking_examples() {
    // the root is the single max leaf
    let img = noise(32, 32, 9);
    let mut r = Refiner::new(&img, NormKind::L2).unwrap();
    assert_eq!(r.step(0.0).unwrap(), StepOutcome::Refined(1));
    // siblings share one stored value; on a periodic image all four tie
    let periodic = Plane::from_fn(64, 64, |i, j| {
        0.5 + 0.4 * (((i % 32) * 7 + (j % 32) * 3) % 11) as f64 / 11.0
    });
    let mut r = Refiner::new(&periodic, NormKind::L2).unwrap();
    assert_eq!(r.step(0.0).unwrap(), StepOutcome::Refined(1));
    assert_eq!(r.step(0.0).unwrap(), StepOutcome::Refined(4));
    // 8-row children of a 16x64 channel cannot be split
    let wide = noise(16, 64, 10);
    let mut r = Refiner::new(&wide, NormKind::L2).unwrap();
    assert_eq!(r.step(0.0).unwrap(), StepOutcome::Refined(1));
    assert_eq!(r.step(0.0).unwrap(), StepOutcome::Saturated);
    let m = run_adaptive(&wide, 0.0, NormKind::L2).unwrap();
    assert_eq!(m.termination, Termination::Saturated);
    assert!(m.error > 0.0);
    // 8x64 root is not splittable at all
    let thin = noise(8, 64, 11);
    let mut r = Refiner::new(&thin, NormKind::L2).unwrap();
    assert_eq!(r.step(0.0).unwrap(), StepOutcome::Saturated);
}

#[test]
fn zero_tolerance_on_noise_reaches_jpeg_grid() {
    let img = noise(64, 64, 12);
    let m = run_adaptive(&img, 1e-9, NormKind::L2).unwrap();
    assert_eq!(m.leaves.len(), 64);
    assert!(m.leaves.iter().all(|e| e.height == 8 && e.width == 8));
}

#[test]
fn tolerance_is_met_when_reported() {
    for (seed, kind) in [(1, NormKind::L2), (2, NormKind::Bv), (3, NormKind::L2)] {
        let img = textured(128, 128, seed);
        for tol in [1e-3, 5e-3, 2e-2] {
            let m = run_adaptive(&img, tol, kind).unwrap();
            assert_partition(&m.leaves, 128, 128);
            assert_eq!(m.blocks.len(), m.leaves.len());
            if m.termination == Termination::Tolerance {
                assert!(m.error <= tol, "{kind:?} {tol}: {}", m.error);
            }
        }
    }
}

#[test]
fn running_sum_matches_recomputation() {
    let img = textured(128, 64, 5);
    let mut r = Refiner::new(&img, NormKind::L2).unwrap();
    while let StepOutcome::Refined(_) = r.step(1e-4).unwrap() {
        let (a, b) = (r.error(), r.exact_error());
        assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }
}

#[test]
fn invalid_inputs() {
    assert!(matches!(
        run_adaptive(&Plane::zeros(4, 4), 0.1, NormKind::L2),
        Err(Error::TooSmall { .. })
    ));
    assert!(matches!(
        run_adaptive(&Plane::zeros(24, 32), 0.1, NormKind::L2),
        Err(Error::NotPowerOfTwo { .. })
    ));
    assert!(run_adaptive(&Plane::zeros(32, 32), -1.0, NormKind::L2).is_err());
    assert!(run_adaptive(&Plane::zeros(32, 32), f64::NAN, NormKind::L2).is_err());
    let mut tree = MeshTree::new(32, 32);
    tree.refine(0).unwrap();
    assert!(tree.refine(0).is_err());
}

#[test]
fn uniform_mesh_is_the_jpeg_grid() {
    let img = noise(64, 128, 3);
    let m = uniform_mesh(&img, NormKind::L2).unwrap();
    assert_eq!(m.leaves.len(), 64);
    assert!(m.leaves.iter().all(|e| e.height == 8 && e.width == 16));
    assert_eq!(m.termination, Termination::Uniform);
    assert_partition(&m.leaves, 64, 128);

    let sq = uniform_mesh(&noise(64, 64, 4), NormKind::L2).unwrap();
    assert_eq!(sq.leaves.len(), 64);
    assert_eq!(sq.error, 0.0);
}
