//! Dyadic frequency blocks, low-pass projections and Besov/Sobolev norms.
//!
//! Blocks use sharp cutoffs in the integer mode index `m` (wavenumber
//! `2πm/L`): `Δ_{-1}` keeps `|m| <= 1` and `Δ_q` keeps `2^q <= |m| < 2^{q+1}`.
//! With this convention `Δ_0` is always empty.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidParam(format!(
                "Besov index s must be finite, got {s}"
            )));
        }
        for (name, v) in [("p", p), ("r", r)] {
            if !(v >= 1.0) {
                return Err(Error::InvalidParam(format!(
                    "Besov {name} must lie in [1, ∞], got {v}"
                )));
            }
        }
        Ok(Self { s, p, r })
    }

    /// `B^s_{2,2}`, equivalent to `H^s`.
    pub fn sobolev(s: f64) -> Self {
        Self { s, p: 2.0, r: 2.0 }
    }

    pub fn with_s(self, s: f64) -> Self {
        Self { s, ..self }
    }
}

/// Largest block index on the grid, `⌈log₂(n/2)⌉`.
pub fn q_max(grid: Grid) -> i32 {
    let half = (grid.n_points() / 2) as f64;
    half.log2().ceil() as i32
}

/// Block index of integer mode `m`.
pub fn block_of_mode(m: i64) -> i32 {
    let a = m.unsigned_abs();
    if a <= 1 {
        -1
    } else {
        (63 - a.leading_zeros()) as i32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicDecomposition {
    grid: Grid,
    blocks: Vec<Field>,
}

impl DyadicDecomposition {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Blocks in order `q = -1, 0, 1, …, q_max`.
    pub fn blocks(&self) -> &[Field] {
        &self.blocks
    }

    pub fn block(&self, q: i32) -> Option<&Field> {
        usize::try_from(q + 1).ok().and_then(|i| self.blocks.get(i))
    }

    pub fn q_max(&self) -> i32 {
        self.blocks.len() as i32 - 2
    }

    pub fn reconstruct(&self) -> Field {
        let mut acc = Field::zeros(self.grid);
        for b in &self.blocks {
            acc = acc.add(b);
        }
        acc
    }
}

fn masked(spec: &Spectrum, keep: impl Fn(i64) -> bool) -> Field {
    let grid = spec.grid();
    let mut s = spec.clone();
    s.apply(|j| {
        if keep(grid.mode(j)) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    s.to_field()
}

pub fn decompose(f: &Field) -> DyadicDecomposition {
    let grid = f.grid();
    let spec = f.spectrum();
    let blocks = (-1..=q_max(grid))
        .map(|q| masked(&spec, |m| block_of_mode(m) == q))
        .collect();
    DyadicDecomposition { grid, blocks }
}

/// `S_q f = Σ_{p <= q-1} Δ_p f`; `S_0` keeps only `Δ_{-1}`.
pub fn low_pass(f: &Field, q: i32) -> Result<Field> {
    if q < 0 {
        return Err(Error::InvalidParam(format!(
            "low-pass index must be >= 0, got {q}"
        )));
    }
    let spec = f.spectrum();
    Ok(if q == 0 {
        masked(&spec, |m| m.abs() <= 1)
    } else {
        let cut = 1i64
            .checked_shl(q as u32)
            .filter(|c| *c > 0)
            .unwrap_or(i64::MAX);
        masked(&spec, |m| m.abs() < cut)
    })
}

fn block_lp_norms(f: &Field, p: f64) -> Vec<f64> {
    let grid = f.grid();
    let spec = f.spectrum();
    let qm = q_max(grid);
    if p == 2.0 {
        let mut energy = vec![0.0; (qm + 2) as usize];
        for (j, c) in spec.coeffs().iter().enumerate() {
            energy[(block_of_mode(grid.mode(j)) + 1) as usize] += c.norm_sqr();
        }
        energy.iter().map(|e| (grid.length() * e).sqrt()).collect()
    } else {
        (-1..=qm)
            .map(|q| masked(&spec, |m| block_of_mode(m) == q).lp_norm(p))
            .collect()
    }
}

fn sequence_norm(terms: impl Iterator<Item = f64>, r: f64) -> f64 {
    if r.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        terms.map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// `‖(2^{qs} ‖Δ_q f‖_{L^p})_{q >= -1}‖_{l^r}`.
pub fn besov_norm(f: &Field, spec: BesovSpec) -> f64 {
    let norms = block_lp_norms(f, spec.p);
    sequence_norm(
        norms
            .iter()
            .enumerate()
            .map(|(i, n)| 2f64.powf((i as f64 - 1.0) * spec.s) * n),
        spec.r,
    )
}

/// `(L Σ (1+k²)^s |f̂_k|²)^{1/2}`; at `s = 0` this is the discrete `L²` norm.
pub fn sobolev_norm(f: &Field, s: f64) -> f64 {
    let grid = f.grid();
    let spec = f.spectrum();
    let sum: f64 = spec
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let k = grid.wavenumber(j);
            (1.0 + k * k).powf(s) * c.norm_sqr()
        })
        .sum();
    (grid.length() * sum).sqrt()
}

/// `‖fg‖_{B^{s1}} / (‖f‖_{B^{s1}} ‖g‖_{B^{s2}})`.
pub fn moser_ratio(f: &Field, g: &Field, s1: f64, s2: f64, p: f64, r: f64) -> Result<f64> {
    f.same_grid(g)?;
    let a = BesovSpec::new(s1, p, r)?;
    let b = BesovSpec::new(s2, p, r)?;
    let nf = besov_norm(f, a);
    let ng = besov_norm(g, b);
    if nf == 0.0 || ng == 0.0 {
        return Err(Error::Precondition(
            "moser_ratio needs nonzero factors".into(),
        ));
    }
    Ok(besov_norm(&f.pointwise(g), a) / (nf * ng))
}

/// `‖S_{n+1} f − f‖_{B^{s−1}_{2,2}} / (2^{-n} ‖f‖_{B^s_{2,2}})`.
pub fn low_pass_decay_ratio(f: &Field, n: i32, s: f64) -> Result<f64> {
    let denom = 2f64.powi(-n) * besov_norm(f, BesovSpec::sobolev(s));
    if denom == 0.0 {
        return Err(Error::Precondition(
            "low-pass decay ratio of a zero field".into(),
        ));
    }
    let err = low_pass(f, n + 1)?.sub(f);
    Ok(besov_norm(&err, BesovSpec::sobolev(s - 1.0)) / denom)
}

/// Smallest constant `C` with `‖S_{n+1}f − f‖_{B^{s−1}} ≤ C 2^{-n} ‖f‖_{B^s}`
/// over the corpus and `n ∈ [0, n_top]`.
pub fn fit_low_pass_constant(corpus: &[Field], s: f64, n_top: i32) -> Result<f64> {
    let mut c: f64 = 0.0;
    for f in corpus {
        for n in 0..=n_top {
            c = c.max(low_pass_decay_ratio(f, n, s)?);
        }
    }
    Ok(c)
}
