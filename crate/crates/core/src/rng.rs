//! Counter-based random numbers for reproducible datasets.
//!
//! Word `k` of stream `seed` is the `k`-th output of SplitMix64 seeded with
//! `seed`:
//!
//! ```text
//! z = seed + (k + 1) * 0x9E3779B97F4A7C15            (wrapping)
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! word = z ^ (z >> 31)
//! ```
//!
//! A uniform in `(0, 1)` is `((word >> 11) + 0.5) / 2^53`. Standard normals
//! use the Box–Muller transform on uniforms `u1 = U(2p)`, `u2 = U(2p + 1)`:
//! `r = sqrt(−2 ln u1)`, `θ = 2π u2`, and normal `2p` is `r cos θ`, normal
//! `2p + 1` is `r sin θ`. Transcendentals come from `libm`, a pure Rust
//! port of musl's libm, so values are bit-identical on every platform.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Word `k` of the stream for `seed`.
pub fn word(seed: u64, k: u64) -> u64 {
    mix(seed.wrapping_add(k.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Seed for sub-stream `index` of `base`, e.g. one per sweep cell.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    word(base, index)
}

/// Uniform on the open interval `(0, 1)`.
pub fn uniform(seed: u64, k: u64) -> f64 {
    ((word(seed, k) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal number `k` of the stream for `seed`.
pub fn normal(seed: u64, k: u64) -> f64 {
    let pair = k / 2;
    let u1 = uniform(seed, 2 * pair);
    let u2 = uniform(seed, 2 * pair + 1);
    let r = (-2.0 * libm::log(u1)).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    if k.is_multiple_of(2) {
        r * libm::cos(theta)
    } else {
        r * libm::sin(theta)
    }
}

/// Fills `out` with normals `0, 1, 2, …` of the stream for `seed`.
pub fn fill_normal(seed: u64, out: &mut [f64]) {
    for (pair, chunk) in out.chunks_mut(2).enumerate() {
        let pair = pair as u64;
        let u1 = uniform(seed, 2 * pair);
        let u2 = uniform(seed, 2 * pair + 1);
        let r = (-2.0 * libm::log(u1)).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        chunk[0] = r * libm::cos(theta);
        if let Some(second) = chunk.get_mut(1) {
            *second = r * libm::sin(theta);
        }
    }
}
