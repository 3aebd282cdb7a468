//! Small complex-vector helpers shared by the solver and the referee.
//!
//! Channels and beamformers are plain `Vec<Cx>` of length `N` (antennas).
//! Inner products use the physics convention: `inner(a, b)` conjugates `a`.

use alloc::vec;
use alloc::vec::Vec;
// Inherent f64 methods shadow this under std (test builds).
#[allow(unused_imports)]
use num_traits::Float;

pub type Cx = num_complex::Complex<f64>;

/// Hermitian inner product `aᴴ b`.
pub fn inner(a: &[Cx], b: &[Cx]) -> Cx {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Squared Euclidean norm `‖v‖²`.
pub fn norm_sqr(v: &[Cx]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// Beamforming gain `|chᴴ w|²`.
pub fn gain(ch: &[Cx], w: &[Cx]) -> f64 {
    inner(ch, w).norm_sqr()
}

pub fn zeros(n: usize) -> Vec<Cx> {
    vec![Cx::new(0.0, 0.0); n]
}

pub fn scaled(v: &[Cx], s: f64) -> Vec<Cx> {
    v.iter().map(|x| x * s).collect()
}

/// `v - t · (uᴴv / ‖u‖²) · u`: partial deflation of `v` along `u`.
/// `t = 1` removes the component along `u` entirely (orthogonal projection).
pub fn deflate(v: &[Cx], u: &[Cx], t: f64) -> Vec<Cx> {
    let c = inner(u, v) * (t / norm_sqr(u));
    v.iter().zip(u).map(|(x, y)| x - c * y).collect()
}

/// Unit-norm copy of `v`, or `None` for the zero vector.
pub fn unit(v: &[Cx]) -> Option<Vec<Cx>> {
    let n = norm_sqr(v);
    if n <= 0.0 {
        return None;
    }
    Some(scaled(v, 1.0 / n.sqrt()))
}

/// Relative zero test used for JT/NJT branch decisions: a beam counts as
/// absent when its norm is below `1e-12` times the largest beam norm.
pub fn is_negligible(v: &[Cx], max_norm_sqr: f64) -> bool {
    norm_sqr(v) <= 1e-24 * max_norm_sqr
}
