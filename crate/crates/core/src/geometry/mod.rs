//! Configuration geometry and closed-form kernels.

mod config;
mod kernels;
mod vec;

pub use config::{ConfigError, Configuration, PairwiseStats};
pub use kernels::{
    corrected_kernel, corrected_kernel_unchecked, oseen, oseen_laplacian, single_sphere_field,
    stokes_drag, CAlphaKernel, KernelDim, KernelError, KernelForm, FRAC_1_4PI, FRAC_1_8PI,
};
pub use vec::{Mat3, Vec3};
