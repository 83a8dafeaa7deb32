//! Special functions used by the Mie and translation kernels.

pub mod bessel;
pub mod harmonics;
pub mod wigner;

pub use bessel::{
    modified_sph_bessel_i, modified_sph_bessel_k, scaled_i_array, scaled_k_array, sph_bessel_j,
    sph_bessel_y, sph_hankel_plus, ScaledBesselValue, MAX_ORDER,
};
pub use harmonics::{lm_index, spherical_harmonics};
pub use wigner::{gaunt, wigner3j, wigner3j_family, ThreeJFamily};
