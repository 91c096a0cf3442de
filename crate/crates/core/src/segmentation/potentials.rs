//! Unary and pairwise terms of the segmentation energy.

use super::gmm::GaussianMixture;
use super::linalg3::{dot, sub, Vec3};
use crate::scalar::Real;

/// Semantic cost `-ln U` with `U = c` for foreground and `1 - c` otherwise,
/// floored at `eps_prob`.
pub fn semantic_unary<T: Real>(c: T, foreground: bool, eps_prob: T) -> T {
    let u = if foreground { c } else { T::one() - c };
    -u.max(eps_prob).ln()
}

/// Colour costs `(-ln p_fg(x), -ln p_bg(x))`, densities floored at
/// `eps_prob`.
pub fn colour_unary<T: Real>(
    fg: &GaussianMixture<T>,
    bg: &GaussianMixture<T>,
    colour: Vec3<T>,
    eps_prob: T,
) -> (T, T) {
    let floor = eps_prob.ln();
    (
        -fg.log_density(colour).max(floor),
        -bg.log_density(colour).max(floor),
    )
}

/// Contrast-sensitive weight `exp(-‖c_i - c_j‖² / (2 · mean_sq))`.
pub fn pairwise_weight<T: Real>(ci: Vec3<T>, cj: Vec3<T>, mean_sq: T) -> T {
    let d = sub(ci, cj);
    (-dot(d, d) / (T::of(2.0) * mean_sq)).exp()
}

/// Mean squared colour distance over the given node pairs, or `eps` when it
/// is zero or there are no pairs.
pub fn mean_sq_distance<T: Real>(
    colours: &[Vec3<T>],
    pairs: impl Iterator<Item = (usize, usize)>,
    eps: T,
) -> T {
    let (sum, n) = pairs.fold((T::zero(), 0usize), |(s, n), (i, j)| {
        let d = sub(colours[i], colours[j]);
        (s + dot(d, d), n + 1)
    });
    if n == 0 || !(sum > T::zero()) {
        eps
    } else {
        sum / T::of_usize(n)
    }
}
