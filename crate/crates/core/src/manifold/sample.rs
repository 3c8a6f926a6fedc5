//! Seeded random sampling of points and tangent vectors.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{exp, norm, spd, ManifoldSpec, Point, Tangent};

/// The crate-wide deterministic generator.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_coords<R: Rng + ?Sized>(rng: &mut R, m: ManifoldSpec) -> DMatrix<f64> {
    let (r, c) = m.shape();
    let raw = DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal));
    match m {
        ManifoldSpec::SpdAffine { .. } => spd::symmetrize(&raw),
        ManifoldSpec::DiagSpd { .. } => DMatrix::from_diagonal(&raw.diagonal()),
        _ => raw,
    }
}

/// A uniformly oriented tangent vector at `base` with Riemannian norm exactly `length`.
pub fn random_tangent<R: Rng + ?Sized>(rng: &mut R, base: &Point, length: f64) -> Tangent {
    loop {
        let raw = Tangent::from_raw(base.clone(), gaussian_coords(rng, base.manifold()));
        let n = norm(&raw);
        if n > 1e-12 {
            return raw.scale(length / n);
        }
    }
}

/// A random point within geodesic distance `radius` of `center`.
pub fn random_point_in_ball<R: Rng + ?Sized>(rng: &mut R, center: &Point, radius: f64) -> Point {
    let r = radius * rng.gen::<f64>().sqrt();
    let v = random_tangent(rng, center, r);
    exp(center, &v).expect("tangent anchored at center")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::dist;

    #[test]
    fn tangent_has_requested_norm_and_points_stay_in_ball() {
        let mut rng = seeded(7);
        for m in [
            ManifoldSpec::Euclidean { dim: 3 },
            ManifoldSpec::PoincareBall { dim: 3 },
            ManifoldSpec::SpdAffine { n: 3 },
            ManifoldSpec::DiagSpd { n: 3 },
        ] {
            let c = m.origin();
            let v = random_tangent(&mut rng, &c, 0.7);
            assert!((norm(&v) - 0.7).abs() < 1e-12);
            for _ in 0..20 {
                let p = random_point_in_ball(&mut rng, &c, 1.5);
                assert!(dist(&c, &p).unwrap() <= 1.5 + 1e-9);
            }
        }
    }
}
