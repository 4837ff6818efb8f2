use ajpeg_core::bitstream::CHANNELS;
use ajpeg_core::decoder::{place_records, reconstruct_channels};
use ajpeg_core::image::ycbcr_to_rgb;
use ajpeg_core::refiner::Termination;
use ajpeg_core::{decode, encode, CompressedImage, EncodeConfig, MeshMode, NormKind, RasterImage};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn smooth(h: usize, w: usize, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0.5..4.0),
                rng.random_range(0.5..4.0),
                rng.random_range(0.0..6.0),
            )
        })
        .collect();
    RasterImage::from_fn(h, w, |i, j| {
        let (y, x) = (i as f64 / h as f64, j as f64 / w as f64);
        let v = |k: usize| 0.5 + 0.4 * (f[k].0 * y + f[k].1 * x + f[k].2).sin();
        [v(0), v(1), v(2)]
    })
    .unwrap()
}

fn check_positions(img: &RasterImage, config: &EncodeConfig) {
    let out = encode(img, config).unwrap();
    let bytes = out.to_bytes().unwrap();
    let parsed = CompressedImage::deserialize(&bytes).unwrap();
    assert_eq!(parsed, out.compressed);
    for c in 0..CHANNELS {
        let (h, w) = parsed.channel_dims(c);
        let placed = place_records(&parsed.channels[c], h, w, c).unwrap();
        assert_eq!(placed, out.channels[c].leaves, "channel {c}");
    }
    let back = decode(&bytes).unwrap();
    assert_eq!((back.height(), back.width()), (img.height(), img.width()));
}

#[test]
fn decoder_recovers_encoder_meshes() {
    for (k, &(h, w)) in [(64, 64), (48, 80), (128, 32), (17, 9), (200, 120)].iter().enumerate() {
        let img = smooth(h, w, k as u64);
        for tau in [0.05, 0.01, 0.002] {
            check_positions(&img, &EncodeConfig::new(tau));
            check_positions(&img, &EncodeConfig::new(tau).with_norm(NormKind::Bv));
        }
        check_positions(&img, &EncodeConfig::uniform());
    }
}

#[test]
fn tolerance_termination_meets_tolerance() {
    let img = smooth(128, 128, 9);
    for tau in [0.03, 0.01, 0.003] {
        let config = EncodeConfig::new(tau);
        let out = encode(&img, &config).unwrap();
        for (c, m) in out.channels.iter().enumerate() {
            if m.termination == Termination::Tolerance {
                assert!(m.error <= config.channel_tolerance(c), "channel {c}: {}", m.error);
            }
        }
    }
}

#[test]
fn tighter_tolerance_improves_reconstruction() {
    let img = RasterImage::from_fn(128, 128, |i, j| {
        let v = 0.5 + 0.4 * ((i * i + 3 * j * j) as f64 / 300.0).sin();
        [v, 1.0 - v, 0.5]
    })
    .unwrap();
    let mse = |tau: f64| {
        let back = decode(&encode(&img, &EncodeConfig::new(tau)).unwrap().to_bytes().unwrap()).unwrap();
        back.data()
            .iter()
            .zip(img.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / img.data().len() as f64
    };
    let coarse = mse(0.05);
    let fine = mse(0.002);
    assert!(fine < coarse, "{fine} vs {coarse}");
}

#[test]
fn uniform_mode_is_the_block_grid() {
    let img = smooth(64, 128, 1);
    let out = encode(&img, &EncodeConfig::uniform()).unwrap();
    assert_eq!(out.element_counts(), [64, 16, 16]);
    assert!(out.channels[0].leaves.iter().all(|e| (e.height, e.width) == (8, 16)));
    assert_eq!(EncodeConfig::uniform().mesh, MeshMode::Uniform);
}

#[test]
fn decoded_channels_reassemble() {
    let img = smooth(32, 32, 4);
    let out = encode(&img, &EncodeConfig::new(0.01)).unwrap();
    let [y, cb, cr] = reconstruct_channels(&out.compressed).unwrap();
    assert_eq!(y.dims(), (32, 32));
    assert_eq!(cb.dims(), (16, 16));
    assert_eq!(cr.dims(), (16, 16));
    let cb = ajpeg_core::image::upsample_chroma(&cb, 32, 32).unwrap();
    let cr = ajpeg_core::image::upsample_chroma(&cr, 32, 32).unwrap();
    let rgb = ycbcr_to_rgb(&y, &cb, &cr).unwrap();
    assert_eq!(rgb, decode(&out.to_bytes().unwrap()).unwrap());
}

#[test]
fn rejects_bad_configs() {
    let img = smooth(16, 16, 0);
    assert!(encode(&img, &EncodeConfig::new(0.0)).is_err());
    assert!(encode(&img, &EncodeConfig::new(f64::NAN)).is_err());
    assert!(encode(&img, &EncodeConfig::new(0.1).with_chroma_tolerance(-1.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_images_round_trip(h in 1usize..70, w in 1usize..70, seed in any::<u64>(), tau in 0.001f64..0.2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let img = RasterImage::from_fn(h, w, |_, _| [rng.random(), rng.random(), rng.random()]).unwrap();
        check_positions(&img, &EncodeConfig::new(tau));
    }

    #[test]
    fn corrupted_streams_never_panic(seed in any::<u64>(), flips in 1usize..8) {
        let img = smooth(40, 40, seed % 7);
        let mut bytes = encode(&img, &EncodeConfig::new(0.01)).unwrap().to_bytes().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..flips {
            let i = rng.random_range(0..bytes.len());
            bytes[i] ^= 1 << rng.random_range(0..8);
        }
        let _ = decode(&bytes);
        let cut = rng.random_range(0..bytes.len());
        prop_assert!(decode(&bytes[..cut]).is_err());
    }
}
