//! Spatial operators: the isotropic 9-point Laplacian and the nonlocal
//! operator `Γf = φ * f - (Σφ) f`, with the ranges of their Fourier symbols.

use crate::error::Result;
use crate::grid::Field;
use crate::kernel::DiscreteKernel;

const AXIS_WEIGHT: f64 = 0.2;
const DIAG_WEIGHT: f64 = 0.05;

/// Extremes of an operator's Fourier symbol over all wavevectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StencilSymbol {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// Isotropic 9-point Laplacian with periodic wrap, scaled by `h⁻²`.
///
/// Neighbor contributions are accumulated as differences from the center
/// value, so constant fields map to exactly zero.
pub fn laplacian9(f: &Field, h: f64) -> Field {
    let mut out = f.clone();
    laplacian9_into(f, h, out.data_mut());
    out
}

pub(crate) fn laplacian9_into(f: &Field, h: f64, out: &mut [f64]) {
    let (nx, ny) = (f.nx(), f.ny());
    let a = f.data();
    let inv_h2 = 1.0 / (h * h);
    for i in 0..nx {
        let up = ((i + nx - 1) % nx) * ny;
        let mid = i * ny;
        let down = ((i + 1) % nx) * ny;
        for j in 0..ny {
            let l = (j + ny - 1) % ny;
            let r = (j + 1) % ny;
            let c = a[mid + j];
            let axis = (a[up + j] - c) + (a[down + j] - c) + (a[mid + l] - c) + (a[mid + r] - c);
            let diag = (a[up + l] - c) + (a[up + r] - c) + (a[down + l] - c) + (a[down + r] - c);
            out[mid + j] = (AXIS_WEIGHT * axis + DIAG_WEIGHT * diag) * inv_h2;
        }
    }
}

/// Closed-form symbol of the unit-spacing stencil at wavevector `(a, b)`.
pub fn laplacian9_symbol(a: f64, b: f64) -> f64 {
    -1.0 + 0.4 * (a.cos() + b.cos()) + 0.2 * a.cos() * b.cos()
}

/// Symbol range of [`laplacian9`] at spacing `h`: `[-1.6 / h², 0]`.
///
/// With `x = cos a`, `y = cos b` the symbol is bilinear on `[-1, 1]²`, so its
/// extremes sit at the corners: `-1.6` at `(π, π)` and `0` at the origin.
pub fn laplacian9_symbol_range(h: f64) -> StencilSymbol {
    let inv_h2 = 1.0 / (h * h);
    StencilSymbol {
        min_eigenvalue: -1.6 * inv_h2,
        max_eigenvalue: 0.0,
    }
}

/// `Γf = (φ * f) - total_mass · f`. Uses the spectral path unless
/// `use_spectral` is false.
pub fn nonlocal_gamma(k: &DiscreteKernel, f: &Field, use_spectral: bool) -> Result<Field> {
    let conv = if use_spectral {
        k.convolve_spectral(f)?
    } else {
        k.convolve_direct(f)?
    };
    let m = k.total_mass();
    conv.zip_map(f, |c, x| c - m * x)
}

/// Symbol range of Γ found by scanning the cached spectrum: the minimum is
/// `min Re φ̂ - Σφ`, the maximum is `0` (attained at the zero wavevector).
pub fn gamma_symbol_range(k: &DiscreteKernel) -> StencilSymbol {
    let min_re = k.spectrum().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    StencilSymbol {
        min_eigenvalue: min_re - k.total_mass(),
        max_eigenvalue: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_gaussian_kernel, KernelSpec};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_annihilated_exactly() {
        for c in [1.0, 0.3, -7.123456789, 1e10] {
            let f = Field::constant(5, 7, c).unwrap();
            assert!(laplacian9(&f, 1.0).data().iter().all(|&x| x == 0.0));
            assert!(laplacian9(&f, 0.37).data().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn checkerboard_eigenvalue() {
        let a = Field::from_fn(8, 8, |i, j| if (i + j) % 2 == 0 { 1.0 } else { -1.0 }).unwrap();
        let l = laplacian9(&a, 1.0);
        let expected = a.scaled(-1.6);
        assert!(l.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn hand_assembled_delta() {
        let mut f = Field::zeros(4, 4).unwrap();
        f[(1, 1)] = 1.0;
        let l = laplacian9(&f, 2.0);
        assert_eq!(l[(1, 1)], -0.25);
        assert_eq!(l[(0, 1)], 0.2 / 4.0);
        assert_eq!(l[(1, 2)], 0.2 / 4.0);
        assert_eq!(l[(2, 2)], 0.05 / 4.0);
        assert_eq!(l[(0, 0)], 0.05 / 4.0);
        assert_eq!(l[(3, 3)], 0.0);
        assert_eq!(l[(1, 3)], 0.0);
    }

    #[test]
    fn plane_waves_match_symbol() {
        for (nx, ny) in [(8, 8), (6, 10), (32, 32)] {
            for p in 0..nx {
                for q in 0..ny {
                    let a = 2.0 * PI * p as f64 / nx as f64;
                    let b = 2.0 * PI * q as f64 / ny as f64;
                    let wave = Field::from_fn(nx, ny, |i, j| (a * i as f64 + b * j as f64).cos()).unwrap();
                    let s = laplacian9_symbol(a, b);
                    let got = laplacian9(&wave, 1.0);
                    assert!(got.max_abs_diff(&wave.scaled(s)).unwrap() < 1e-12, "({p},{q})");
                }
            }
        }
    }

    #[test]
    fn symbol_range_values() {
        let r = laplacian9_symbol_range(1.0);
        assert_eq!((r.min_eigenvalue, r.max_eigenvalue), (-1.6, 0.0));
        let r = laplacian9_symbol_range(2.0);
        assert_eq!((r.min_eigenvalue, r.max_eigenvalue), (-0.4, 0.0));

        // exhaustive scan of the discrete wavevectors
        for n in [4usize, 7, 16, 31] {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for p in 0..n {
                for q in 0..n {
                    let s = laplacian9_symbol(2.0 * PI * p as f64 / n as f64, 2.0 * PI * q as f64 / n as f64);
                    lo = lo.min(s);
                    hi = hi.max(s);
                }
            }
            assert!(lo >= -1.6 - 1e-15);
            assert!(hi <= 1e-15);
        }
        assert!((laplacian9_symbol(PI, PI) + 1.6).abs() < 1e-15);
    }

    #[test]
    fn gamma_annihilates_constants() {
        let k = build_gaussian_kernel(&KernelSpec::new(1.0, 16, 16, 1.0).unwrap()).unwrap();
        let c = Field::constant(16, 16, 0.9).unwrap();
        assert!(nonlocal_gamma(&k, &c, true).unwrap().sup_norm() < 1e-13);
        assert!(nonlocal_gamma(&k, &c, false).unwrap().sup_norm() < 1e-13);
    }

    #[test]
    fn gamma_matches_literal_pairwise_sum() {
        // Σ_y φ(x,y)(f(y) - f(x)) evaluated literally
        let k = build_gaussian_kernel(&KernelSpec::new(1.5, 6, 7, 1.0).unwrap()).unwrap();
        let f = Field::from_fn(6, 7, |i, j| ((i * 7 + j) as f64 * 0.37).sin()).unwrap();
        let g = nonlocal_gamma(&k, &f, true).unwrap();
        for xi in 0..6 {
            for xj in 0..7 {
                let mut acc = 0.0;
                for yi in 0..6 {
                    for yj in 0..7 {
                        let w = k.weights()[((xi + 6 - yi) % 6, (xj + 7 - yj) % 7)];
                        acc += w * (f[(yi, yj)] - f[(xi, xj)]);
                    }
                }
                assert!((acc - g[(xi, xj)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gamma_symbol_range_scan() {
        let k = build_gaussian_kernel(&KernelSpec::new(1.0, 200, 200, 1.0).unwrap()).unwrap();
        let r = gamma_symbol_range(&k);
        assert_eq!(r.max_eigenvalue, 0.0);
        assert!(r.min_eigenvalue >= -2.0);
        // brute-force scan of the Gaussian's transform by explicit DFT sums at the
        // extreme wavevector (π, π); separable so each axis sums independently
        let w = k.weights();
        let mut at_pi = 0.0;
        for i in 0..200 {
            for j in 0..200 {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                at_pi += sign * w[(i, j)];
            }
        }
        let scanned = k.spectrum().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        assert!((scanned - at_pi).abs() < 1e-12);
        assert!((r.min_eigenvalue - (at_pi - 1.0)).abs() < 1e-12);
    }

    fn pair(n: usize) -> impl Strategy<Value = (Field, Field)> {
        (
            prop::collection::vec(-1.0f64..1.0, n * n),
            prop::collection::vec(-1.0f64..1.0, n * n),
        )
            .prop_map(move |(a, b)| (Field::new(n, n, a).unwrap(), Field::new(n, n, b).unwrap()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn operators_conserve_mass((f, _) in pair(12), h in 0.25f64..2.0) {
            let k = build_gaussian_kernel(&KernelSpec::new(1.0, 12, 12, h).unwrap()).unwrap();
            let tol = 1e-10 * f.sup_norm() * 144.0 * h * h;
            prop_assert!(laplacian9(&f, h).mass(h).abs() <= tol);
            prop_assert!(nonlocal_gamma(&k, &f, true).unwrap().mass(h).abs() <= tol);
        }

        #[test]
        fn operators_are_linear((f, g) in pair(10), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let k = build_gaussian_kernel(&KernelSpec::new(0.9, 10, 10, 1.0).unwrap()).unwrap();
            let comb = f.lincomb(a, &g, b).unwrap();
            let lhs = laplacian9(&comb, 1.0);
            let rhs = laplacian9(&f, 1.0).lincomb(a, &laplacian9(&g, 1.0), b).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
            let lhs = nonlocal_gamma(&k, &comb, true).unwrap();
            let rhs = nonlocal_gamma(&k, &f, true).unwrap()
                .lincomb(a, &nonlocal_gamma(&k, &g, true).unwrap(), b).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
        }
    }
}
