//! Named initial-data profiles.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};

/// Number of periodic images summed on each side for localized profiles.
const IMAGES: i32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum Profile {
    Zero,
    Constant {
        value: f64,
    },
    /// Periodized `amplitude · exp(-(x - center)² / (2 width²))`.
    GaussianBump {
        amplitude: f64,
        width: f64,
        center: f64,
    },
    /// `amplitude · sin(wavenumber · 2πx/L)`.
    Sine {
        amplitude: f64,
        wavenumber: f64,
    },
    /// Periodized `amplitude · exp(1/sharpness − sqrt((x−c)² + 1/sharpness²))`,
    /// a peakon with its corner rounded off at scale `1/sharpness`.
    PeakonSmooth {
        amplitude: f64,
        sharpness: f64,
        center: f64,
    },
    /// Samples on the grid; the length must equal the number of points.
    Tabulated {
        values: Vec<f64>,
    },
    /// `amplitude · Σ_{k=1}^{kmax} (a_k cos kx + b_k sin kx) / k^decay` with
    /// `a_k, b_k` uniform on `[-1, 1]` drawn from `seed`.
    RandomBand {
        amplitude: f64,
        kmax: usize,
        decay: f64,
        seed: u64,
    },
}

impl Profile {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParam(m));
        match self {
            Profile::GaussianBump { width, .. } if !(*width > 0.0) => {
                bad(format!("gaussian-bump width must be positive, got {width}"))
            }
            Profile::PeakonSmooth { sharpness, .. } if !(*sharpness > 0.0) => bad(format!(
                "peakon-smooth sharpness must be positive, got {sharpness}"
            )),
            Profile::RandomBand { kmax, .. } if *kmax == 0 => {
                bad("random-band kmax must be at least 1".to_string())
            }
            Profile::RandomBand { decay, .. } if !decay.is_finite() => {
                bad(format!("random-band decay must be finite, got {decay}"))
            }
            _ => Ok(()),
        }
    }

    pub fn sample(&self, grid: Grid) -> Result<Field> {
        self.validate()?;
        let length = grid.length();
        let images = |f: &dyn Fn(f64) -> f64, x: f64| -> f64 {
            (-IMAGES..=IMAGES).map(|j| f(x + j as f64 * length)).sum()
        };
        let field = match self {
            Profile::Zero => Field::zeros(grid),
            Profile::Constant { value } => Field::constant(grid, *value),
            Profile::GaussianBump {
                amplitude,
                width,
                center,
            } => Field::from_fn(grid, |x| {
                images(
                    &|y| amplitude * (-(y - center).powi(2) / (2.0 * width * width)).exp(),
                    x,
                )
            }),
            Profile::Sine {
                amplitude,
                wavenumber,
            } => Field::from_fn(grid, |x| {
                amplitude * (wavenumber * 2.0 * PI * x / length).sin()
            }),
            Profile::PeakonSmooth {
                amplitude,
                sharpness,
                center,
            } => {
                let eps = 1.0 / sharpness;
                Field::from_fn(grid, |x| {
                    images(
                        &|y| amplitude * (eps - ((y - center).powi(2) + eps * eps).sqrt()).exp(),
                        x,
                    )
                })
            }
            Profile::Tabulated { values } => Field::new(grid, values.clone())?,
            Profile::RandomBand {
                amplitude,
                kmax,
                decay,
                seed,
            } => {
                if *kmax as i64 > grid.dealias_cutoff() {
                    return Err(Error::InvalidParam(format!(
                        "random-band kmax = {kmax} exceeds the dealiased band of the grid ({})",
                        grid.dealias_cutoff()
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let coeffs: Vec<(f64, f64)> = (1..=*kmax)
                    .map(|_| (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
                    .collect();
                let k0 = 2.0 * PI / length;
                Field::from_fn(grid, |x| {
                    amplitude
                        * coeffs
                            .iter()
                            .enumerate()
                            .map(|(i, (a, b))| {
                                let k = (i + 1) as f64;
                                (a * (k * k0 * x).cos() + b * (k * k0 * x).sin()) * k.powf(-decay)
                            })
                            .sum::<f64>()
                })
            }
        };
        field.check_finite()?;
        Ok(field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_and_bump_samples() {
        let g = Grid::periodic(64).unwrap();
        let s = Profile::Sine {
            amplitude: -5.0,
            wavenumber: 1.0,
        }
        .sample(g)
        .unwrap();
        assert!((s.values()[16] + 5.0).abs() < 1e-12);
        let b = Profile::GaussianBump {
            amplitude: 0.5,
            width: 0.5,
            center: PI,
        }
        .sample(g)
        .unwrap();
        assert!((b.values()[32] - 0.5).abs() < 1e-12);
        let p = Profile::PeakonSmooth {
            amplitude: 1.0,
            sharpness: 10.0,
            center: PI,
        }
        .sample(g)
        .unwrap();
        assert!((p.values()[32] - 1.0).abs() < 0.01);
        assert!(Profile::Tabulated {
            values: vec![0.0; 3]
        }
        .sample(g)
        .is_err());
        assert!(Profile::GaussianBump {
            amplitude: 1.0,
            width: 0.0,
            center: 0.0
        }
        .sample(g)
        .is_err());
    }

    #[test]
    fn random_band_is_seeded() {
        let g = Grid::periodic(64).unwrap();
        let p = |seed| Profile::RandomBand {
            amplitude: 1.0,
            kmax: 8,
            decay: 2.0,
            seed,
        };
        let a = p(7).sample(g).unwrap();
        assert_eq!(a, p(7).sample(g).unwrap());
        assert_ne!(a, p(8).sample(g).unwrap());
        assert!(a.mean().abs() < 1e-12);
        assert!(Profile::RandomBand {
            amplitude: 1.0,
            kmax: 40,
            decay: 2.0,
            seed: 0
        }
        .sample(g)
        .is_err());
    }
}
