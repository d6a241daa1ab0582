//! Uniform periodic grids, discrete Fourier analysis and the Fourier
//! multipliers used by the evolution operators.
//!
//! Spectral coefficients are normalized so that
//! `f(x_j) = sum_k f_hat[k] * exp(i k x_j)`, i.e. the forward transform
//! carries the `1/n` factor. With this convention the discrete Parseval
//! identity reads `sum_j |f_j|^2 dx = L * sum_k |f_hat[k]|^2`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Smallest admissible number of grid points.
pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_points: usize,
    length: f64,
}

impl Grid {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if !n_points.is_power_of_two() || n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= {MIN_POINTS}, got {n_points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        Ok(Self { n_points, length })
    }

    /// The torus `[0, 2π)`, where wavenumbers are plain integers.
    pub fn periodic(n_points: usize) -> Result<Self> {
        Self::new(n_points, 2.0 * PI)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.x(j))
    }

    /// Signed integer mode number of FFT slot `j`. The Nyquist slot maps to `+n/2`.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.n_points as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    pub fn nyquist_index(&self) -> usize {
        self.n_points / 2
    }

    /// Fundamental wavenumber `2π/L`.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Physical wavenumber of FFT slot `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        self.mode(j) as f64 * self.k0()
    }

    /// Largest mode kept by the 2/3 dealiasing rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n_points / 3) as i64
    }
}

/// Real samples of a periodic function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.n_points(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField { index });
        }
        Ok(Self { grid, values })
    }

    /// Wraps values produced by internal arithmetic. Callers check
    /// finiteness at module boundaries via [`Field::check_finite`].
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_points());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::from_raw(grid, vec![0.0; grid.n_points()])
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self::from_raw(grid, vec![c; grid.n_points()])
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(grid, grid.points().map(f).collect())
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFiniteField { index }),
            None => Ok(()),
        }
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination; panics on grid mismatch, which is a caller bug.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Field::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a - b)
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &Field) -> Field {
        self.zip_map(other, |a, b| a + c * b)
    }

    /// Plain pointwise product (no dealiasing).
    pub fn pointwise(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a * b)
    }

    /// Cyclic shift by `cells` grid cells: `out[j] = self[j - cells]`.
    pub fn shifted(&self, cells: usize) -> Field {
        let n = self.values.len();
        let mut out = vec![0.0; n];
        for (j, v) in self.values.iter().enumerate() {
            out[(j + cells) % n] = *v;
        }
        Field::from_raw(self.grid, out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Discrete `L^p` norm `(sum |v|^p dx)^(1/p)`; `p = ∞` gives the max norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        let dx = self.grid.dx();
        let sum: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (sum * dx).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        let dx = self.grid.dx();
        (self.values.iter().map(|v| v * v).sum::<f64>() * dx).sqrt()
    }

    /// Discrete `L^2` inner product.
    pub fn inner(&self, other: &Field) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.dx()
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::of(self)
    }
}

/// Fourier coefficients of a [`Field`] in FFT slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(field: &Field) -> Self {
        let n = field.grid.n_points();
        let mut buf: Vec<Complex64> = field
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        with_plans(n, |fwd, _| fwd.process(&mut buf));
        let scale = 1.0 / n as f64;
        for c in &mut buf {
            *c *= scale;
        }
        Self {
            grid: field.grid,
            coeffs: buf,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Multiplies slot `j` by `m(j)`.
    pub fn apply(&mut self, m: impl Fn(usize) -> Complex64) {
        for (j, c) in self.coeffs.iter_mut().enumerate() {
            *c *= m(j);
        }
    }

    /// Back to physical space, discarding the (round-off) imaginary part.
    pub fn to_field(&self) -> Field {
        let n = self.grid.n_points();
        let mut buf = self.coeffs.clone();
        with_plans(n, |_, inv| inv.process(&mut buf));
        Field::from_raw(self.grid, buf.into_iter().map(|c| c.re).collect())
    }

    /// `L * sum |f_hat|^2`, equal to the squared discrete `L^2` norm.
    pub fn energy(&self) -> f64 {
        self.grid.length() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Evaluates the trigonometric interpolant at an arbitrary point.
    /// The Nyquist coefficient contributes `c * cos(n/2 k0 x)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_weighted(x, |_| Complex64::new(1.0, 0.0), true)
    }

    /// Evaluates the interpolant of the spatial derivative at `x`.
    pub fn eval_derivative(&self, x: f64) -> f64 {
        let k0 = self.grid.k0();
        self.eval_weighted(x, |m| Complex64::new(0.0, m as f64 * k0), false)
    }

    fn eval_weighted(&self, x: f64, w: impl Fn(i64) -> Complex64, keep_nyquist: bool) -> f64 {
        let n = self.grid.n_points();
        let half = n / 2;
        let theta = self.grid.k0() * x;
        let step = Complex64::new(theta.cos(), theta.sin());
        let mut phase = Complex64::new(1.0, 0.0);
        let mut acc = (self.coeffs[0] * w(0)).re;
        for m in 1..half {
            phase *= step;
            // Periodic renormalization keeps the recurrence on the unit circle.
            if m % 64 == 0 {
                let a = theta * m as f64;
                phase = Complex64::new(a.cos(), a.sin());
            }
            let pos = self.coeffs[m] * w(m as i64) * phase;
            let neg = self.coeffs[n - m] * w(-(m as i64)) * phase.conj();
            acc += pos.re + neg.re;
        }
        if keep_nyquist {
            acc += self.coeffs[half].re * (theta * half as f64).cos();
        }
        acc
    }
}

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<HashMap<usize, Plans>> = RefCell::new(HashMap::new());
}

fn with_plans<R>(n: usize, f: impl FnOnce(&dyn Fft<f64>, &dyn Fft<f64>) -> R) -> R {
    let (fwd, inv) = PLANS.with(|cell| {
        let mut map = cell.borrow_mut();
        map.entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
            })
            .clone()
    });
    f(fwd.as_ref(), inv.as_ref())
}

/// Applies a real Fourier multiplier given as a function of the physical wavenumber.
pub fn real_multiplier(f: &Field, m: impl Fn(f64) -> f64) -> Field {
    let grid = f.grid();
    let mut spec = f.spectrum();
    spec.apply(|j| Complex64::new(m(grid.wavenumber(j)), 0.0));
    spec.to_field()
}

/// Spectral derivative `∂_x f`. The Nyquist mode is zeroed.
pub fn derivative(f: &Field) -> Field {
    let grid = f.grid();
    let nyq = grid.nyquist_index();
    let mut spec = f.spectrum();
    spec.apply(|j| {
        if j == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, grid.wavenumber(j))
        }
    });
    spec.to_field()
}

/// `(shift - ∂_x²)^{-1} f` for `shift ∈ {1, 4}`.
pub fn helmholtz_inverse(f: &Field, shift: f64) -> Result<Field> {
    if shift != 1.0 && shift != 4.0 {
        return Err(Error::UnsupportedShift(shift));
    }
    Ok(real_multiplier(f, |k| 1.0 / (shift + k * k)))
}

/// `(1 - ∂_x²) f`, the momentum density when `f = u`.
pub fn helmholtz(f: &Field, shift: f64) -> Field {
    real_multiplier(f, |k| shift + k * k)
}

/// Periodic analogue of `p * f` with `p(x) = e^{-|x|}/2`, realized as the
/// multiplier `1/(1 + k²)`.
pub fn green_convolve(f: &Field) -> Field {
    real_multiplier(f, |k| 1.0 / (1.0 + k * k))
}

/// 2/3-rule truncation: keeps modes with `|m| <= n/3`.
pub fn dealias(f: &Field) -> Field {
    let grid = f.grid();
    let cutoff = grid.dealias_cutoff();
    let mut spec = f.spectrum();
    spec.apply(|j| {
        if grid.mode(j).abs() <= cutoff {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    spec.to_field()
}

/// Pointwise product of the 2/3-truncated inputs.
pub fn dealiased_product(f: &Field, g: &Field) -> Result<Field> {
    f.same_grid(g)?;
    let a = dealias(f);
    if std::ptr::eq(f, g) {
        return Ok(a.pointwise(&a));
    }
    let b = dealias(g);
    Ok(a.pointwise(&b))
}
