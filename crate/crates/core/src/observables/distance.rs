use crate::error::{Error, Result};
use crate::model::Conformation;

/// Full symmetric matrix of pair distances (not squared).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(conf: &Conformation) -> Self {
        let n = conf.n_sites();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = conf.distance_sq(i, j).sqrt();
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        DistanceMatrix { n, d }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

/// Upper-triangle distances and squared distances of one conformation, the
/// compact form used when many `D2`/`D4` evaluations share a snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGeometry {
    n: usize,
    dist: Vec<f64>,
    dist_sq: Vec<f64>,
}

impl PairGeometry {
    pub fn new(conf: &Conformation) -> Self {
        let n = conf.n_sites();
        let m = n * (n - 1) / 2;
        let mut dist = Vec::with_capacity(m);
        let mut dist_sq = Vec::with_capacity(m);
        let pos = conf.positions();
        for i in 0..n {
            for j in (i + 1)..n {
                let s = (pos[i] - pos[j]).norm_squared();
                dist_sq.push(s);
                dist.push(s.sqrt());
            }
        }
        PairGeometry { n, dist, dist_sq }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, other: &PairGeometry) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    fn norm(&self) -> f64 {
        // Ordered pairs: each unordered pair appears twice.
        2.0 / (self.n * self.n) as f64
    }

    pub fn d2(&self, other: &PairGeometry) -> Result<f64> {
        self.check(other)?;
        Ok(self.d2_unchecked(other))
    }

    pub fn d4(&self, other: &PairGeometry) -> Result<f64> {
        self.check(other)?;
        Ok(self.d4_unchecked(other))
    }

    #[inline]
    pub(crate) fn d2_unchecked(&self, other: &PairGeometry) -> f64 {
        let s: f64 = self
            .dist
            .iter()
            .zip(&other.dist)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        s * self.norm()
    }

    #[inline]
    pub(crate) fn d4_unchecked(&self, other: &PairGeometry) -> f64 {
        let s: f64 = self
            .dist_sq
            .iter()
            .zip(&other.dist_sq)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        s * self.norm()
    }
}

/// Mean squared difference of pair distances.
pub fn d2(a: &Conformation, b: &Conformation) -> Result<f64> {
    PairGeometry::new(a).d2(&PairGeometry::new(b))
}

/// Mean squared difference of squared pair distances.
pub fn d4(a: &Conformation, b: &Conformation) -> Result<f64> {
    PairGeometry::new(a).d4(&PairGeometry::new(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec3;
    use nalgebra::{Rotation3, Unit};
    use proptest::prelude::*;

    fn conf_from(v: &[f64]) -> Conformation {
        Conformation::new(v.chunks(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect()).unwrap()
    }

    fn triangle(side: f64) -> Conformation {
        Conformation::from_coords(&[
            [0.0, 0.0, 0.0],
            [side, 0.0, 0.0],
            [0.5 * side, 0.5 * 3f64.sqrt() * side, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn identical_is_zero() {
        let c = triangle(1.3);
        assert_eq!(d2(&c, &c).unwrap(), 0.0);
        assert_eq!(d4(&c, &c).unwrap(), 0.0);
    }

    #[test]
    fn equilateral_triangles() {
        // Six off-diagonal terms, each (1 - 2)^2 = 1, over N^2 = 9.
        let v = d2(&triangle(1.0), &triangle(2.0)).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_sites_d4() {
        let a = Conformation::from_coords(&[[0.0; 3], [1.0, 0.0, 0.0]]).unwrap();
        let b = Conformation::from_coords(&[[0.0; 3], [0.0, 2.0, 0.0]]).unwrap();
        assert!((d4(&a, &b).unwrap() - 4.5).abs() < 1e-12);
        assert!((d2(&a, &b).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let a = triangle(1.0);
        let b = Conformation::from_coords(&[[0.0; 3], [1.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(d4(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn distance_matrix_symmetric() {
        let c = triangle(2.0);
        let m = DistanceMatrix::new(&c);
        for i in 0..3 {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..3 {
                assert_eq!(m.get(i, j), m.get(j, i));
                if i != j {
                    assert!((m.get(i, j) - 2.0).abs() < 1e-12);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn rigid_motion_invariance(
            a in proptest::collection::vec(-5.0f64..5.0, 18),
            b in proptest::collection::vec(-5.0f64..5.0, 18),
            angle in 0.0f64..6.3,
            ax in -1.0f64..1.0, ay in -1.0f64..1.0,
            shift in proptest::collection::vec(-20.0f64..20.0, 3),
        ) {
            let (ca, cb) = (conf_from(&a), conf_from(&b));
            let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::new(ax, ay, 0.7)), angle);
            let moved = cb.transformed(&rot, &Vec3::new(shift[0], shift[1], shift[2]));
            let (x2, y2) = (d2(&ca, &cb).unwrap(), d2(&ca, &moved).unwrap());
            let (x4, y4) = (d4(&ca, &cb).unwrap(), d4(&ca, &moved).unwrap());
            prop_assert!((x2 - y2).abs() <= 1e-9 * x2.max(1.0));
            prop_assert!((x4 - y4).abs() <= 1e-9 * x4.max(1.0));
            // Symmetric and non-negative.
            prop_assert_eq!(d4(&cb, &ca).unwrap(), x4);
            prop_assert!(x2 >= 0.0 && x4 >= 0.0);
        }

        #[test]
        fn difference_of_squares_factorisation(
            a in proptest::collection::vec(-5.0f64..5.0, 15),
            b in proptest::collection::vec(-5.0f64..5.0, 15),
        ) {
            let (ca, cb) = (conf_from(&a), conf_from(&b));
            let (ma, mb) = (DistanceMatrix::new(&ca), DistanceMatrix::new(&cb));
            let n = 5;
            let mut factored = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let (x, y) = (ma.get(i, j), mb.get(i, j));
                    let lhs = x * x - y * y;
                    let rhs = (x - y) * (x + y);
                    prop_assert!((lhs - rhs).abs() <= 1e-12 * (x * x + y * y).max(1.0));
                    factored += (x - y).powi(2) * (x + y).powi(2);
                }
            }
            factored /= (n * n) as f64;
            let direct = d4(&ca, &cb).unwrap();
            prop_assert!((factored - direct).abs() <= 1e-9 * direct.max(1.0));
        }
    }
}
