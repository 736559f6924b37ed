//! Reconstruction of images from undersampled, noisy Fourier samples with
//! multiresolution, spatially adaptive Hessian regularization.

pub mod adaptwt;
pub mod diffops;
pub mod error;
pub mod formats;
pub mod fourier;
pub mod image;
pub mod metrics;
pub mod multires;
pub mod phantom;
pub mod proxops;
pub mod sampling;
pub mod solver;

pub use adaptwt::{
    compute_features, eval_adaptive_reg, eval_barrier, solve_weights, transform, AdaptiveWeights, FeatureTriple,
    TransformedWeights,
};
pub use diffops::{csd, eig_angle, eig_reconstruct, eig_vals, grad, grad_adjoint, hess, hess_adjoint};
pub use error::{Error, Result};
pub use fourier::{
    apply_adjoint, apply_forward, calibrate_noise_sigma, simulate_measurements, zero_fill_invert, ComplexSamples,
    SamplingMask, SamplingOperator,
};
pub use image::{inner_product, kron_scale, norm2, pointwise_norm, ScalarImage, SymMatImage, VectorImage2};
pub use metrics::{psnr, score, snr, ssim, ScorePair};
pub use multires::{
    hcorosa, hcorosa_detailed, interpolate, interpolate_adjoint, run_fixed_point, run_pyramid, HcorosaOutput,
    PyramidConfig,
};
pub use phantom::Phantom;
pub use proxops::{prox_x, prox_y, prox_z, scalar_soft_threshold, BoxRange};
pub use sampling::{generate as generate_mask, MaskKind, MaskSpec};
pub use solver::{
    eval_cost, normal_apply, reconstruct_adaptive, reconstruct_baseline, Baseline, ReconstructionReport, SolverConfig,
    SolverState,
};
