//! Multi-agent ergodic search planning with jointly optimized start
//! locations.
//!
//! The crate plans search trajectories for teams of robots so that the time
//! each team spends in a region matches the information mass of that region,
//! as measured by the spectral ergodic metric. Start locations can be fixed
//! or optimized together with the controls, subject to per-type sets of
//! viable start rectangles.
//!
//! Modules, bottom up:
//!
//! - [`spectral`]: cosine basis, coefficients, ergodic metric and gradient.
//! - [`maps`]: information maps, mixture generation, start regions.
//! - [`agents`]: motion and sensor models, rollout and its adjoint.
//! - [`allocation`]: frequency-band decomposition for heterogeneous teams.
//! - [`optimizer`]: projected gradient planning over starts and controls.

pub mod agents;
pub mod allocation;
mod error;
pub mod maps;
pub mod optimizer;
pub mod spectral;

pub use error::{Error, Result};

/// A position in the two-dimensional search domain.
pub type Point = [f64; 2];

/// Deterministic generator used for every random draw in the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}

/// Mixes a stream identifier into a seed (SplitMix64 finalizer), giving
/// independent derived seeds for restarts, trials and strategies.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
