use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

/// Positions of the `N` chain sites at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conformation {
    positions: Vec<Vec3>,
}

impl Conformation {
    /// Fails on fewer than two sites or non-finite coordinates. Coincident
    /// sites are allowed here and caught by energy evaluation.
    pub fn new(positions: Vec<Vec3>) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::InvalidParams(format!(
                "a conformation needs at least 2 sites, got {}",
                positions.len()
            )));
        }
        if let Some(i) = positions.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidParams(format!("site {i} has non-finite coordinates")));
        }
        Ok(Conformation { positions })
    }

    pub fn from_coords(coords: &[[f64; 3]]) -> Result<Self> {
        Self::new(coords.iter().map(|c| Vec3::new(c[0], c[1], c[2])).collect())
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.positions.len()
    }

    #[inline]
    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    #[inline]
    pub fn position(&self, i: usize) -> Vec3 {
        self.positions[i]
    }

    pub(crate) fn positions_mut(&mut self) -> &mut [Vec3] {
        &mut self.positions
    }

    pub fn into_positions(self) -> Vec<Vec3> {
        self.positions
    }

    #[inline]
    pub fn distance_sq(&self, i: usize, j: usize) -> f64 {
        (self.positions[i] - self.positions[j]).norm_squared()
    }

    /// Smallest pair distance together with the pair realising it.
    pub fn min_pair_distance(&self) -> (usize, usize, f64) {
        let n = self.n_sites();
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.distance_sq(i, j);
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        (best.0, best.1, best.2.sqrt())
    }

    pub fn center_of_mass(&self) -> Vec3 {
        self.positions.iter().sum::<Vec3>() / self.n_sites() as f64
    }

    pub fn translated(&self, shift: &Vec3) -> Self {
        Conformation {
            positions: self.positions.iter().map(|p| p + shift).collect(),
        }
    }

    pub fn transformed(&self, rotation: &nalgebra::Rotation3<f64>, shift: &Vec3) -> Self {
        Conformation {
            positions: self.positions.iter().map(|p| rotation * p + shift).collect(),
        }
    }

    /// Relabels sites `i -> N - 1 - i`.
    pub fn reversed(&self) -> Self {
        let mut positions = self.positions.clone();
        positions.reverse();
        Conformation { positions }
    }

    /// Sum of squared bond lengths `d^2_{i,i+1}` divided by the bond count.
    pub fn mean_bond_sq(&self) -> f64 {
        let n = self.n_sites();
        (0..n - 1).map(|i| self.distance_sq(i, i + 1)).sum::<f64>() / (n - 1) as f64
    }

    pub fn end_to_end_sq(&self) -> f64 {
        self.distance_sq(0, self.n_sites() - 1)
    }
}

/// Squared Euclidean distance between sites `i` and `j`.
pub fn pairwise_distance_sq(conf: &Conformation, i: usize, j: usize) -> f64 {
    conf.distance_sq(i, j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_site_distance_zero() {
        let c = Conformation::from_coords(&[[0.0, 0.0, 0.0], [1.0, 2.0, 2.0]]).unwrap();
        assert_eq!(pairwise_distance_sq(&c, 0, 0), 0.0);
        assert_eq!(pairwise_distance_sq(&c, 0, 1), 9.0);
        assert_eq!(pairwise_distance_sq(&c, 1, 0), 9.0);
    }

    #[test]
    fn matches_brute_force_double_loop() {
        let coords: Vec<[f64; 3]> = (0..7)
            .map(|i| {
                let x = i as f64;
                [x.sin() * 3.1, (1.7 * x).cos(), 0.3 * x * x]
            })
            .collect();
        let c = Conformation::from_coords(&coords).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let mut s = 0.0;
                for k in 0..3 {
                    let d = coords[i][k] - coords[j][k];
                    s += d * d;
                }
                assert!((pairwise_distance_sq(&c, i, j) - s).abs() <= 1e-12 * s.max(1.0));
            }
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Conformation::from_coords(&[[0.0, 0.0, 0.0], [f64::NAN, 0.0, 0.0]]).is_err());
        assert!(Conformation::from_coords(&[[0.0, 0.0, 0.0]]).is_err());
    }
}
