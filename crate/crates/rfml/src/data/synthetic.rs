//! Deterministic synthetic benchmark surfaces.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::PointCloud;

/// Which surface to sample.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetKind {
    /// `(t cos t, h, t sin t)`, `t ~ U[1.5 pi, 4.5 pi]`, `h ~ U[0, 21]`.
    SwissRoll,
    /// Uniform on the radius-`r` sphere via normalized Gaussian triples.
    Sphere { radius: f64 },
    /// Sphere samples scaled by the semi-axes.
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// `(x, y, A exp(-(x^2+y^2)/2w^2))`, `x, y ~ U[-3w, 3w]`.
    Gaussian { amplitude: f64, width: f64 },
}

impl DatasetKind {
    pub fn name(&self) -> &'static str {
        match self {
            DatasetKind::SwissRoll => "swiss_roll",
            DatasetKind::Sphere { .. } => "sphere",
            DatasetKind::Ellipsoid { .. } => "ellipsoid",
            DatasetKind::Gaussian { .. } => "gaussian",
        }
    }

    /// Parses a kind name with its default shape parameters.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "swiss_roll" | "swissroll" | "swiss-roll" => Ok(DatasetKind::SwissRoll),
            "sphere" => Ok(DatasetKind::Sphere { radius: 1.0 }),
            "ellipsoid" => Ok(DatasetKind::Ellipsoid {
                a: 1.0,
                b: 1.0,
                c: 0.5,
            }),
            "gaussian" => Ok(DatasetKind::Gaussian {
                amplitude: 1.0,
                width: 1.0,
            }),
            other => Err(Error::InvalidParameter(format!(
                "unknown dataset kind '{other}' (expected swiss_roll|sphere|ellipsoid|gaussian)"
            ))),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        match self {
            DatasetKind::SwissRoll => Ok(()),
            DatasetKind::Sphere { radius } => positive("sphere radius", *radius),
            DatasetKind::Ellipsoid { a, b, c } => {
                positive("ellipsoid a", *a)?;
                positive("ellipsoid b", *b)?;
                positive("ellipsoid c", *c)
            }
            DatasetKind::Gaussian { amplitude, width } => {
                positive("gaussian amplitude", *amplitude)?;
                positive("gaussian width", *width)
            }
        }
    }
}

/// A fully specified dataset: kind, size, and seed determine every byte.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub n: usize,
    pub seed: u64,
}

/// Samples the surface. The draw order is fixed (one point at a time, each
/// coordinate in order), so output is a pure function of the spec.
pub fn generate(spec: &DatasetSpec) -> Result<PointCloud> {
    if spec.n == 0 {
        return Err(Error::InvalidParameter("dataset size must be positive".into()));
    }
    spec.kind.validate()?;
    let mut rng = SplitMix64::substream(spec.seed, spec.kind.name());
    let rows: Vec<Vec<f64>> = match spec.kind {
        DatasetKind::SwissRoll => (0..spec.n)
            .map(|_| {
                let t = rng.uniform(1.5 * std::f64::consts::PI, 4.5 * std::f64::consts::PI);
                let h = rng.uniform(0.0, 21.0);
                vec![t * t.cos(), h, t * t.sin()]
            })
            .collect(),
        DatasetKind::Sphere { radius } => (0..spec.n)
            .map(|_| {
                let v = unit_sphere_point(&mut rng);
                vec![radius * v[0], radius * v[1], radius * v[2]]
            })
            .collect(),
        DatasetKind::Ellipsoid { a, b, c } => (0..spec.n)
            .map(|_| {
                let v = unit_sphere_point(&mut rng);
                vec![a * v[0], b * v[1], c * v[2]]
            })
            .collect(),
        DatasetKind::Gaussian { amplitude, width } => (0..spec.n)
            .map(|_| {
                let x = rng.uniform(-3.0 * width, 3.0 * width);
                let y = rng.uniform(-3.0 * width, 3.0 * width);
                let z = amplitude * (-(x * x + y * y) / (2.0 * width * width)).exp();
                vec![x, y, z]
            })
            .collect(),
    };
    PointCloud::from_rows(&rows, None)
}

fn unit_sphere_point(rng: &mut SplitMix64) -> [f64; 3] {
    loop {
        let v = [rng.normal(), rng.normal(), rng.normal()];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > 1e-12 {
            return [v[0] / norm, v[1] / norm, v[2] / norm];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_points_on_sphere() {
        let spec = DatasetSpec {
            kind: DatasetKind::Sphere { radius: 1.0 },
            n: 1000,
            seed: 7,
        };
        let cloud = generate(&spec).unwrap();
        for i in 0..cloud.n_points() {
            let norm = cloud.data().row(i).norm();
            assert!((norm - 1.0).abs() <= 1e-12, "point {i}: |x| = {norm}");
        }
    }

    #[test]
    fn sphere_coordinate_means_near_zero() {
        let spec = DatasetSpec {
            kind: DatasetKind::Sphere { radius: 1.0 },
            n: 1000,
            seed: 7,
        };
        let cloud = generate(&spec).unwrap();
        for c in 0..3 {
            let mean = cloud.data().column(c).mean();
            assert!(mean.abs() <= 0.05, "coordinate {c} mean {mean}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = DatasetSpec {
            kind: DatasetKind::SwissRoll,
            n: 200,
            seed: 3,
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate(&DatasetSpec {
            kind: DatasetKind::SwissRoll,
            n: 10,
            seed: 1,
        })
        .unwrap();
        let b = generate(&DatasetSpec {
            kind: DatasetKind::SwissRoll,
            n: 10,
            seed: 2,
        })
        .unwrap();
        assert_ne!(a.data(), b.data());
    }

    #[test]
    fn ellipsoid_satisfies_implicit_equation() {
        let (a, b, c) = (1.0, 1.0, 0.5);
        let cloud = generate(&DatasetSpec {
            kind: DatasetKind::Ellipsoid { a, b, c },
            n: 500,
            seed: 11,
        })
        .unwrap();
        for i in 0..cloud.n_points() {
            let x = cloud.data()[(i, 0)] / a;
            let y = cloud.data()[(i, 1)] / b;
            let z = cloud.data()[(i, 2)] / c;
            let lhs = x * x + y * y + z * z;
            assert!((lhs - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn gaussian_heights_match_profile() {
        let cloud = generate(&DatasetSpec {
            kind: DatasetKind::Gaussian {
                amplitude: 2.0,
                width: 1.5,
            },
            n: 200,
            seed: 5,
        })
        .unwrap();
        for i in 0..cloud.n_points() {
            let x = cloud.data()[(i, 0)];
            let y = cloud.data()[(i, 1)];
            let z = cloud.data()[(i, 2)];
            let expect = 2.0 * (-(x * x + y * y) / (2.0 * 1.5 * 1.5)).exp();
            assert!((z - expect).abs() < 1e-12);
            assert!(x.abs() <= 4.5 && y.abs() <= 4.5);
        }
    }

    #[test]
    fn swiss_roll_parameter_range() {
        let cloud = generate(&DatasetSpec {
            kind: DatasetKind::SwissRoll,
            n: 300,
            seed: 9,
        })
        .unwrap();
        for i in 0..cloud.n_points() {
            let x = cloud.data()[(i, 0)];
            let z = cloud.data()[(i, 2)];
            let t = (x * x + z * z).sqrt();
            assert!(t >= 1.5 * std::f64::consts::PI - 1e-9);
            assert!(t <= 4.5 * std::f64::consts::PI + 1e-9);
            let h = cloud.data()[(i, 1)];
            assert!((0.0..=21.0).contains(&h));
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(generate(&DatasetSpec {
            kind: DatasetKind::Sphere { radius: 0.0 },
            n: 10,
            seed: 0,
        })
        .is_err());
        assert!(generate(&DatasetSpec {
            kind: DatasetKind::SwissRoll,
            n: 0,
            seed: 0,
        })
        .is_err());
        assert!(DatasetKind::parse("torus").is_err());
    }
}
