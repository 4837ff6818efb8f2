//! Thread pool sizing and parallel encoding.

use ajpeg_core::codec::{assemble, encode_channel, prepare_channels};
use ajpeg_core::{EncodeConfig, EncodeOutput, RasterImage};
use rayon::prelude::*;

pub const THREADS_ENV: &str = "AJPEG_THREADS";

/// Thread count from `AJPEG_THREADS`, if set to a positive integer.
pub fn thread_limit() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
}

/// Runs `f` inside a pool capped by `AJPEG_THREADS` (default: rayon's choice).
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_limit() {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Same result as [`ajpeg_core::encode`], with the three channels meshed concurrently.
pub fn encode_parallel(img: &RasterImage, config: &EncodeConfig) -> ajpeg_core::Result<EncodeOutput> {
    config.validate()?;
    let prepared = prepare_channels(img)?;
    let results: Vec<_> = (0..3)
        .into_par_iter()
        .map(|c| {
            encode_channel(
                &prepared.channels[c],
                config.channel_tolerance(c),
                config.norm,
                config.mesh,
            )
        })
        .collect();
    let mut it = results.into_iter();
    let mut next = || it.next().expect("three channels");
    let channels = [next()?, next()?, next()?];
    let compressed = assemble(&prepared, config.norm, &channels)?;
    Ok(EncodeOutput { compressed, channels })
}
