//! Shared inputs for the kernel benchmarks.

use hcorosa_core::{
    apply_forward, generate_mask, ComplexSamples, MaskKind, MaskSpec, Phantom, SamplingMask, ScalarImage,
};

/// Shepp-Logan phantom at `n x n`.
pub fn phantom(n: usize) -> ScalarImage {
    Phantom::SheppLogan.render(n, n)
}

/// Random mask at 20% density, fixed seed.
pub fn mask(n: usize) -> SamplingMask {
    generate_mask(&MaskSpec::new(MaskKind::Random, n, n, 0.2, 7)).expect("valid mask spec")
}

/// Noiseless samples of the phantom on [`mask`].
pub fn samples(n: usize) -> ComplexSamples {
    apply_forward(&phantom(n), &mask(n)).expect("matching shapes")
}

/// Smooth weight field in `(0, 1)`.
pub fn gamma(n: usize) -> ScalarImage {
    ScalarImage::from_fn(n, n, |r, c| {
        0.5 + 0.4 * ((r as f64 * 0.1).sin() * (c as f64 * 0.07).cos())
    })
}
