//! Periodic convolution kernels for the nonlocal diffusion operator.
//!
//! The kernel is stored centered at index `(0, 0)`: `weights[(i, j)]` is the
//! weight for displacement `(i, j)` taken modulo the grid. Convolution is the
//! circular sum `(k * f)(x) = Σ_y w(x - y) f(y)`. The spectral path evaluates
//! it through a cached 2-D transform of the weights; the direct path is the
//! literal quadruple loop and serves as the reference.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Field, LatticeSpec};

/// Largest grid (in cells) the direct convolution accepts without override.
pub const DIRECT_GUARD_CELLS: usize = 64 * 64;

/// Gaussian kernel parameters. `epsilon` is the standard deviation in the
/// same length units as the lattice spacing `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    pub epsilon: f64,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
}

impl KernelSpec {
    pub fn new(epsilon: f64, nx: usize, ny: usize, h: f64) -> Result<Self> {
        let spec = Self { epsilon, nx, ny, h };
        spec.validate()?;
        Ok(spec)
    }

    pub fn for_lattice(epsilon: f64, lattice: &LatticeSpec) -> Result<Self> {
        Self::new(epsilon, lattice.n, lattice.n, lattice.h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Parameter(format!(
                "kernel epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::Parameter(format!("kernel spacing must be positive, got {}", self.h)));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::Dimension(format!(
                "kernel grid must be nonempty, got {}x{}",
                self.nx, self.ny
            )));
        }
        Ok(())
    }
}

/// Row-then-column complex 2-D FFT on a row-major `nx * ny` buffer.
/// The inverse is normalized, so `inverse(forward(x)) == x`.
#[derive(Clone)]
pub(crate) struct Fft2 {
    nx: usize,
    ny: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub(crate) fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            ny,
            row_fwd: planner.plan_fft_forward(ny),
            row_inv: planner.plan_fft_inverse(ny),
            col_fwd: planner.plan_fft_forward(nx),
            col_inv: planner.plan_fft_inverse(nx),
        }
    }

    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.row_fwd, &self.col_fwd);
    }

    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.row_inv, &self.col_inv);
        let scale = 1.0 / (self.nx * self.ny) as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    fn transform(&self, buf: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(buf.len(), self.nx * self.ny);
        let (nx, ny) = (self.nx, self.ny);
        let scratch_len = rows
            .get_inplace_scratch_len()
            .max(cols.get_inplace_scratch_len());
        let mut scratch = vec![Complex64::default(); scratch_len];

        rows.process_with_scratch(buf, &mut scratch[..rows.get_inplace_scratch_len()]);

        if nx > 1 {
            let mut t = vec![Complex64::default(); nx * ny];
            for i in 0..nx {
                for j in 0..ny {
                    t[j * nx + i] = buf[i * ny + j];
                }
            }
            cols.process_with_scratch(&mut t, &mut scratch[..cols.get_inplace_scratch_len()]);
            for j in 0..ny {
                for i in 0..nx {
                    buf[i * ny + j] = t[j * nx + i];
                }
            }
        }
    }
}

impl fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2").field("nx", &self.nx).field("ny", &self.ny).finish()
    }
}

/// A nonnegative, symmetric, circulant kernel together with its cached
/// spectrum.
#[derive(Clone, Debug)]
pub struct DiscreteKernel {
    weights: Field,
    spectrum: Vec<Complex64>,
    total_mass: f64,
    fft: Fft2,
}

/// Samples `exp(-|d|² / 2ε²)` at minimum-image displacements and normalizes
/// so the weights sum to one.
pub fn build_gaussian_kernel(spec: &KernelSpec) -> Result<DiscreteKernel> {
    spec.validate()?;
    let two_var = 2.0 * spec.epsilon * spec.epsilon;
    let h = spec.h;
    let raw = Field::from_fn(spec.nx, spec.ny, |i, j| {
        let di = min_image(i, spec.nx) as f64 * h;
        let dj = min_image(j, spec.ny) as f64 * h;
        (-(di * di + dj * dj) / two_var).exp()
    })?;
    let sum = raw.sum();
    DiscreteKernel::from_weights(raw.map(|w| w / sum))
}

#[inline]
fn min_image(i: usize, n: usize) -> usize {
    i.min(n - i)
}

impl DiscreteKernel {
    /// Wraps arbitrary weights. They must be finite, nonnegative and satisfy
    /// `w(i, j) == w(-i, -j)` exactly.
    pub fn from_weights(weights: Field) -> Result<Self> {
        let (nx, ny) = (weights.nx(), weights.ny());
        if let Some(bad) = weights.data().iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::Parameter(format!(
                "kernel weights must be finite and nonnegative, found {bad}"
            )));
        }
        for i in 0..nx {
            for j in 0..ny {
                let mirror = weights[((nx - i) % nx, (ny - j) % ny)];
                if weights[(i, j)] != mirror {
                    return Err(Error::Parameter(format!(
                        "kernel is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let fft = Fft2::new(nx, ny);
        let mut spectrum: Vec<Complex64> = weights.data().iter().map(|&w| Complex64::new(w, 0.0)).collect();
        fft.forward(&mut spectrum);
        let total_mass = weights.sum();
        Ok(Self {
            weights,
            spectrum,
            total_mass,
            fft,
        })
    }

    /// Discrete identity kernel (unit weight at the origin).
    pub fn delta(nx: usize, ny: usize) -> Result<Self> {
        let mut w = Field::zeros(nx, ny)?;
        w[(0, 0)] = 1.0;
        Self::from_weights(w)
    }

    /// Same shape, weights multiplied by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_weights(self.weights.scaled(c))
    }

    pub fn weights(&self) -> &Field {
        &self.weights
    }

    /// Forward transform of the weights, row-major like the weights.
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn nx(&self) -> usize {
        self.weights.nx()
    }

    pub fn ny(&self) -> usize {
        self.weights.ny()
    }

    fn ensure_matches(&self, f: &Field) -> Result<()> {
        if self.weights.same_shape(f) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "kernel is {}x{} but field is {}x{}",
                self.nx(),
                self.ny(),
                f.nx(),
                f.ny()
            )))
        }
    }

    /// Circular convolution through the cached spectrum.
    pub fn convolve_spectral(&self, f: &Field) -> Result<Field> {
        self.ensure_matches(f)?;
        let mut buf: Vec<Complex64> = f.data().iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fft.forward(&mut buf);
        for (z, k) in buf.iter_mut().zip(&self.spectrum) {
            *z *= k;
        }
        self.fft.inverse(&mut buf);

        let residual = buf.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
        let limit = 1e-10 * f.sup_norm();
        if residual > limit {
            return Err(Error::ImaginaryResidual { residual, limit });
        }
        Field::new(f.nx(), f.ny(), buf.into_iter().map(|z| z.re).collect())
    }

    /// Literal `O((nx·ny)²)` circular convolution. Refuses grids larger than
    /// [`DIRECT_GUARD_CELLS`]; see [`Self::convolve_direct_unguarded`].
    pub fn convolve_direct(&self, f: &Field) -> Result<Field> {
        if f.len() > DIRECT_GUARD_CELLS {
            return Err(Error::SizeGuard {
                nx: f.nx(),
                ny: f.ny(),
                limit: DIRECT_GUARD_CELLS,
            });
        }
        self.convolve_direct_unguarded(f)
    }

    pub fn convolve_direct_unguarded(&self, f: &Field) -> Result<Field> {
        self.ensure_matches(f)?;
        let (nx, ny) = (f.nx(), f.ny());
        let w = &self.weights;
        Field::from_fn(nx, ny, |xi, xj| {
            let mut acc = 0.0;
            for yi in 0..nx {
                let di = (xi + nx - yi) % nx;
                for yj in 0..ny {
                    let dj = (xj + ny - yj) % ny;
                    acc += w[(di, dj)] * f[(yi, yj)];
                }
            }
            acc
        })
    }

    /// Largest row sum `max_x Σ_y φ(x, y)` of the convolution operator. Every
    /// row of a circulant operator is a permutation of the weights, so this
    /// is their sum.
    pub fn mass_bound(&self) -> f64 {
        self.weights.sum()
    }
}

/// Alias of [`DiscreteKernel::mass_bound`].
pub fn kernel_mass_bound(k: &DiscreteKernel) -> f64 {
    k.mass_bound()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(nx: usize, ny: usize, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Field::from_fn(nx, ny, |_, _| rng.random::<f64>()).unwrap()
    }

    fn unit_gaussian(n: usize) -> DiscreteKernel {
        build_gaussian_kernel(&KernelSpec::new(1.0, n, n, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn reference_kernel_is_normalized() {
        let k = unit_gaussian(200);
        assert!((k.total_mass() - 1.0).abs() <= 1e-14);
        assert!((k.spectrum()[0].re - k.total_mass()).abs() <= 1e-14);
        assert!(k.weights().data().iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn gaussian_is_symmetric() {
        for (eps, nx, ny) in [(1.0, 8, 8), (2.5, 9, 14), (0.3, 5, 1)] {
            let k = build_gaussian_kernel(&KernelSpec::new(eps, nx, ny, 1.0).unwrap()).unwrap();
            let w = k.weights();
            assert_eq!(w[(1, 0)], w[(nx - 1, 0)]);
            for i in 0..nx {
                for j in 0..ny {
                    assert_eq!(w[(i, j)], w[((nx - i) % nx, (ny - j) % ny)]);
                }
            }
            let max_im = k.spectrum().iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
            assert!(max_im <= 1e-12, "imaginary spectrum {max_im}");
        }
    }

    #[test]
    fn gaussian_center_ratio() {
        let k = unit_gaussian(8);
        let ratio = k.weights()[(0, 0)] / k.weights()[(1, 0)];
        assert!((ratio - 0.5f64.exp()).abs() < 1e-14, "{ratio}");
        assert!((ratio - 1.64872).abs() < 1e-5);
    }

    #[test]
    fn epsilon_must_be_positive() {
        assert!(matches!(KernelSpec::new(0.0, 8, 8, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(KernelSpec::new(-1.0, 8, 8, 1.0), Err(Error::Parameter(_))));
        let bad = KernelSpec { epsilon: 0.0, nx: 4, ny: 4, h: 1.0 };
        assert!(build_gaussian_kernel(&bad).is_err());
    }

    #[test]
    fn asymmetric_weights_rejected() {
        let mut w = Field::zeros(4, 4).unwrap();
        w[(1, 0)] = 1.0;
        assert!(DiscreteKernel::from_weights(w).is_err());
        let mut w = Field::zeros(4, 4).unwrap();
        w[(0, 0)] = -1.0;
        assert!(DiscreteKernel::from_weights(w).is_err());
    }

    #[test]
    fn fft_round_trip() {
        for (nx, ny) in [(16, 16), (12, 7), (1, 9), (200, 3)] {
            let f = random_field(nx, ny, 3);
            let fft = Fft2::new(nx, ny);
            let mut buf: Vec<Complex64> = f.data().iter().map(|&x| Complex64::new(x, 0.0)).collect();
            fft.forward(&mut buf);
            fft.inverse(&mut buf);
            for (z, &x) in buf.iter().zip(f.data()) {
                assert!((z.re - x).abs() <= 1e-13 && z.im.abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn constants_preserved() {
        let k = unit_gaussian(16);
        let c = Field::constant(16, 16, 0.7).unwrap();
        let s = k.convolve_spectral(&c).unwrap();
        let d = k.convolve_direct(&c).unwrap();
        assert!(s.max_abs_diff(&c).unwrap() < 1e-14);
        assert!(d.max_abs_diff(&c).unwrap() < 1e-14);
    }

    #[test]
    fn delta_field_reproduces_translated_kernel() {
        let k = build_gaussian_kernel(&KernelSpec::new(1.3, 10, 12, 1.0).unwrap()).unwrap();
        let mut delta = Field::zeros(10, 12).unwrap();
        delta[(3, 5)] = 1.0;
        let expected = k.weights().shifted(3, 5);
        let d = k.convolve_direct(&delta).unwrap();
        assert_eq!(d, expected);
        let s = k.convolve_spectral(&delta).unwrap();
        assert!(s.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn spectral_matches_direct_on_random_field() {
        let k = unit_gaussian(16);
        let f = random_field(16, 16, 11);
        let d = k.convolve_direct(&f).unwrap();
        let s = k.convolve_spectral(&f).unwrap();
        assert!(s.max_abs_diff(&d).unwrap() <= 1e-12 * d.sup_norm());
    }

    #[test]
    fn direct_guard() {
        let k = unit_gaussian(65);
        let f = Field::zeros(65, 65).unwrap();
        assert!(matches!(k.convolve_direct(&f), Err(Error::SizeGuard { .. })));
        assert!(k.convolve_direct_unguarded(&f).is_ok());
    }

    #[test]
    fn dimension_mismatch() {
        let k = unit_gaussian(8);
        let f = Field::zeros(8, 9).unwrap();
        assert!(matches!(k.convolve_spectral(&f), Err(Error::Dimension(_))));
        assert!(matches!(k.convolve_direct(&f), Err(Error::Dimension(_))));
    }

    #[test]
    fn mass_bound_values() {
        let k = unit_gaussian(200);
        assert!((kernel_mass_bound(&k) - 1.0).abs() <= 1e-14);
        let k2 = unit_gaussian(16).scaled(2.0).unwrap();
        assert!((k2.mass_bound() - 2.0).abs() <= 1e-14);
        let z = DiscreteKernel::from_weights(Field::zeros(5, 5).unwrap()).unwrap();
        assert_eq!(z.mass_bound(), 0.0);
    }

    #[test]
    fn mass_bound_matches_explicit_row_sums() {
        let k = build_gaussian_kernel(&KernelSpec::new(0.8, 6, 5, 1.0).unwrap()).unwrap();
        let (nx, ny) = (6, 5);
        let mut worst = 0.0f64;
        for xi in 0..nx {
            for xj in 0..ny {
                let mut row = 0.0;
                for yi in 0..nx {
                    for yj in 0..ny {
                        row += k.weights()[((xi + nx - yi) % nx, (xj + ny - yj) % ny)];
                    }
                }
                worst = worst.max(row);
            }
        }
        assert!((worst - k.mass_bound()).abs() < 1e-14);
    }
}
