//! Random scattering sequences and their direct/reversed phase difference.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::vec3::Vec3;
use crate::geometry::{CellGeometry, Extent};
use crate::physics::{dk_domega, mean_free_path, VaporParams};

/// A sequence of N scatterers, lengths in units of ℓ.
///
/// `directions[0]` is the incident direction +z, `directions[m]` for
/// 1 ≤ m < N the unit vector from atom m to atom m+1, and `directions[N]`
/// the detection direction −z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub atoms: Vec<Vec3>,
    pub directions: Vec<Vec3>,
    pub lengths: Vec<f64>,
}

impl Path {
    pub fn order(&self) -> usize {
        self.atoms.len()
    }

    /// Exit attenuation e^{−z_N} towards the detector.
    pub fn weight(&self) -> f64 {
        (-self.atoms[self.order() - 1].z).exp()
    }
}

fn inside(p: Vec3, geom: &CellGeometry) -> bool {
    if p.z <= 0.0 {
        return false;
    }
    if let Extent::Finite(l) = geom.thickness {
        if p.z >= l {
            return false;
        }
    }
    if let Extent::Finite(r) = geom.radius {
        if p.x * p.x + p.y * p.y >= r * r {
            return false;
        }
    }
    true
}

fn isotropic<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let mu: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let s = (1.0 - mu * mu).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), mu)
}

/// First scatterer: depth with density e^{−z}, transverse position uniform
/// over the entrance face (the axis for an unbounded face). `None` when the
/// light crosses the whole cell unscattered.
pub(crate) fn first_atom<R: Rng + ?Sized>(geom: &CellGeometry, rng: &mut R) -> Option<Vec3> {
    let z: f64 = Exp1.sample(rng);
    let (x, y) = match geom.radius {
        Extent::Infinite => (0.0, 0.0),
        Extent::Finite(r) => {
            let rho = r * rng.random::<f64>().sqrt();
            let phi: f64 = rng.random_range(0.0..2.0 * PI);
            (rho * phi.cos(), rho * phi.sin())
        }
    };
    let p = Vec3::new(x, y, z);
    inside(p, geom).then_some(p)
}

/// Next scatterer after an isotropic emission and an Exp(1) flight.
/// Returns the direction, the length and the new atom if still inside.
pub(crate) fn next_atom<R: Rng + ?Sized>(from: Vec3, geom: &CellGeometry, rng: &mut R) -> (Vec3, f64, Option<Vec3>) {
    let dir = isotropic(rng);
    let len: f64 = Exp1.sample(rng);
    let p = from + dir * len;
    (dir, len, inside(p, geom).then_some(p))
}

/// Samples a path of exactly `order` atoms, or `None` when the light leaves
/// the medium first.
pub fn sample_path<R: Rng + ?Sized>(order: usize, geom: &CellGeometry, rng: &mut R) -> Option<Path> {
    assert!(order >= 1, "a path needs at least one atom");
    let mut atoms = vec![first_atom(geom, rng)?];
    let mut directions = vec![Vec3::Z];
    let mut lengths = Vec::with_capacity(order - 1);
    while atoms.len() < order {
        let (dir, len, next) = next_atom(atoms[atoms.len() - 1], geom, rng);
        atoms.push(next?);
        directions.push(dir);
        lengths.push(len);
    }
    directions.push(-Vec3::Z);
    Some(Path {
        atoms,
        directions,
        lengths,
    })
}

/// Coefficient vectors A₁…A_N of the atomic velocities in the phase
/// difference between the direct and reversed sequences, per unit group
/// delay: Δφ_velocity = κ Σ_m u_m·A_m with u_m = k v_m/Γ.
///
/// Each inner segment contributes its length times the frequency mismatch
/// of the two sequences on it. The entry and exit legs contribute
/// (z_N − z₁)(ω′ − ω): the direct sequence travels the longer leg at the
/// shifted outgoing frequency.
pub fn velocity_coefficients(path: &Path) -> Vec<Vec3> {
    coefficients(&path.atoms, &path.directions[..path.order()], &path.lengths)
}

/// Shared core; `dirs` holds k̂₀…k̂_{N−1} (the detection direction is
/// implicit) so prefixes of a longer walk need no copying.
pub(crate) fn coefficients(atoms: &[Vec3], dirs: &[Vec3], lengths: &[f64]) -> Vec<Vec3> {
    let n = atoms.len();
    let k = |m: usize| if m == n { -Vec3::Z } else { dirs[m] };
    let exit_leg = atoms[n - 1].z - atoms[0].z;
    (1..=n)
        .map(|m| {
            let shift = k(m) - k(m - 1);
            let mut a = shift * exit_leg;
            for (i, &len) in lengths[..n - 1].iter().enumerate() {
                let s = i + 1;
                let direct = if m <= s { shift } else { Vec3::ZERO };
                let reversed = if m == n {
                    -k(n - 1) - k(0)
                } else if m > s {
                    shift
                } else {
                    Vec3::ZERO
                };
                a += (direct - reversed) * len;
            }
            a
        })
        .collect()
}

/// Group-delay factor κ = (∂k/∂ω)·Γℓ converting frequency shifts in units
/// of Γ times lengths in units of ℓ into phase.
pub fn group_delay_factor(vapor: &VaporParams) -> f64 {
    dk_domega(vapor) * mean_free_path(vapor, None)
}

/// Phase difference between the direct and reversed sequences for reduced
/// atomic velocities u_m = k v_m/Γ, detected at `delta_theta` from exact
/// backscattering in the x–z plane.
pub fn path_dephasing(path: &Path, velocities: &[Vec3], vapor: &VaporParams, delta_theta: f64) -> f64 {
    assert_eq!(velocities.len(), path.order(), "one velocity per atom");
    let q = vapor.k_ell(None) * delta_theta;
    let geometric = q * (path.atoms[0].x - path.atoms[path.order() - 1].x);
    let kappa = group_delay_factor(vapor);
    let doppler: f64 = velocity_coefficients(path)
        .iter()
        .zip(velocities)
        .map(|(a, u)| a.dot(*u))
        .sum();
    geometric + kappa * doppler
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_atoms(theta: f64, x: f64, depth: f64) -> Path {
        let dir = Vec3::new(theta.sin(), 0.0, theta.cos());
        let a = Vec3::new(0.0, 0.0, depth);
        Path {
            atoms: vec![a, a + dir * x],
            directions: vec![Vec3::Z, dir, -Vec3::Z],
            lengths: vec![x],
        }
    }

    #[test]
    fn two_atom_variance_is_transverse() {
        // Σ|A_m|² = 4x² sin²θ: only the transverse separation dephases.
        for theta in [0.1, 0.8, 1.5, 2.5] {
            let p = two_atoms(theta, 1.7, 3.0);
            let s: f64 = velocity_coefficients(&p).iter().map(|a| a.norm_sqr()).sum();
            let expected = 4.0 * 1.7 * 1.7 * theta.sin().powi(2);
            assert!((s - expected).abs() < 1e-12, "{theta}: {s} vs {expected}");
        }
    }

    #[test]
    fn two_atom_segment_frequencies() {
        // The inner-segment part alone is x[(k̂₁−ẑ)·u₁ + (k̂₁+ẑ)·u₂].
        let theta = 0.6_f64;
        let p = two_atoms(theta, 2.0, 1.0);
        let flat = Path {
            atoms: vec![p.atoms[0], Vec3::new(p.atoms[1].x, 0.0, p.atoms[0].z)],
            ..p.clone()
        };
        let a = velocity_coefficients(&flat);
        let k1 = p.directions[1];
        assert!((a[0] - (k1 - Vec3::Z) * 2.0).norm() < 1e-14);
        assert!((a[1] - (k1 + Vec3::Z) * 2.0).norm() < 1e-14);
    }

    #[test]
    fn single_atom_never_dephases() {
        let p = Path {
            atoms: vec![Vec3::new(0.3, 0.0, 1.0)],
            directions: vec![Vec3::Z, -Vec3::Z],
            lengths: vec![],
        };
        assert_eq!(velocity_coefficients(&p), vec![Vec3::ZERO]);
    }

    #[test]
    fn zero_velocity_at_backscattering_has_no_phase() {
        let vapor = VaporParams::from_k_ell(1e4, 50.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for order in 2..=4 {
            if let Some(p) = sample_path(order, &CellGeometry::semi_infinite(), &mut rng) {
                let v = vec![Vec3::ZERO; order];
                assert_eq!(path_dephasing(&p, &v, &vapor, 0.0), 0.0);
            }
        }
    }

    #[test]
    fn group_delay_factor_value() {
        let vapor = VaporParams::from_k_ell(1e4, 50.0, 10.0).unwrap();
        assert!((group_delay_factor(&vapor) - (1.0 + 1.0 / 1e4)).abs() < 1e-12);
    }

    #[test]
    fn single_atom_paths_are_always_accepted() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = CellGeometry::semi_infinite();
        assert!((0..1000).all(|_| sample_path(1, &g, &mut rng).is_some()));
    }

    #[test]
    fn accepted_second_atoms_are_biased_inward() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = CellGeometry::semi_infinite();
        let (mut accepted, mut cos_sum) = (0, 0.0);
        let trials = 20_000;
        for _ in 0..trials {
            if let Some(p) = sample_path(2, &g, &mut rng) {
                accepted += 1;
                cos_sum += p.directions[1].z;
                assert!(p.atoms.iter().all(|a| a.z > 0.0));
            }
        }
        assert!(accepted < trials);
        assert!(cos_sum / (accepted as f64) < 1.0);
        assert!(cos_sum > 0.0);
    }

    #[test]
    fn cylinder_paths_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = CellGeometry::cylinder(0.5, 0.7).unwrap();
        for _ in 0..2000 {
            if let Some(p) = sample_path(3, &g, &mut rng) {
                for a in &p.atoms {
                    assert!(a.z > 0.0 && a.z < 0.7 && a.x.hypot(a.y) < 0.5);
                }
                assert!(p.lengths.iter().all(|&l| l > 0.0));
                assert!(p.directions.iter().all(|d| (d.norm() - 1.0).abs() < 1e-12));
            }
        }
    }
}
