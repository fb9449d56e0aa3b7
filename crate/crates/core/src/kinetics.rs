//! Gray-Scott reaction terms and a fixed-step RK4 reference for the
//! space-free system `u' = g1(u, v)`, `v' = g2(u, v)`.

use crate::error::{Error, Result};

/// Model and discretization parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Feed rate.
    pub f: f64,
    /// Kill rate.
    pub kappa: f64,
    pub d_u: f64,
    pub d_v: f64,
    pub dt: f64,
    /// Lattice spacing.
    pub h: f64,
}

impl Default for ModelParams {
    /// f = 0.04, κ = 0.0636, D_u = 1, D_v = 0.5 on a unit lattice with Δt = 1.
    fn default() -> Self {
        Self {
            f: 0.04,
            kappa: 0.0636,
            d_u: 1.0,
            d_v: 0.5,
            dt: 1.0,
            h: 1.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, value: f64, ok: bool| {
            if value.is_finite() && ok {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} = {value} is out of range")))
            }
        };
        check("f", self.f, self.f >= 0.0)?;
        check("kappa", self.kappa, self.kappa > 0.0)?;
        check("d_u", self.d_u, self.d_u >= 0.0)?;
        check("d_v", self.d_v, self.d_v >= 0.0)?;
        check("dt", self.dt, self.dt > 0.0)?;
        check("h", self.h, self.h > 0.0)?;
        Ok(())
    }

    /// `κ̃ = min(κ, 1)`, the decay rate in the total-mass estimate.
    pub fn kappa_tilde(&self) -> f64 {
        self.kappa.min(1.0)
    }
}

/// `g1(u, v) = -u v² + f (1 - u)`.
#[inline]
pub fn g1(u: f64, v: f64, p: &ModelParams) -> f64 {
    -u * v * v + p.f * (1.0 - u)
}

/// `g2(u, v) = u v² - (f + κ) v`.
#[inline]
pub fn g2(u: f64, v: f64, p: &ModelParams) -> f64 {
    u * v * v - (p.f + p.kappa) * v
}

/// Integrates the homogeneous system to `t_end` with classical RK4 at step
/// `p.dt / 100` (shortened so the last step lands on `t_end`).
pub fn homogeneous_reference(u0: f64, v0: f64, p: &ModelParams, t_end: f64) -> (f64, f64) {
    if t_end <= 0.0 {
        return (u0, v0);
    }
    let target = p.dt / 100.0;
    let steps = ((t_end / target) - 1e-9).ceil().max(1.0) as u64;
    integrate_rk4(u0, v0, p, t_end, steps)
}

/// RK4 with exactly `steps` equal steps over `[0, t_end]`.
pub fn integrate_rk4(u0: f64, v0: f64, p: &ModelParams, t_end: f64, steps: u64) -> (f64, f64) {
    let h = t_end / steps as f64;
    let rhs = |u: f64, v: f64| (g1(u, v, p), g2(u, v, p));
    let (mut u, mut v) = (u0, v0);
    for _ in 0..steps {
        let (k1u, k1v) = rhs(u, v);
        let (k2u, k2v) = rhs(u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        let (k3u, k3v) = rhs(u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        let (k4u, k4v) = rhs(u + h * k3u, v + h * k3v);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    (u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn g1_values() {
        let p = ModelParams::default();
        assert_eq!(g1(1.0, 0.0, &p), 0.0);
        assert_eq!(g1(0.0, 0.7, &p), p.f);
        assert!((g1(0.5, 0.25, &p) - (-0.01125)).abs() < 1e-16);
    }

    #[test]
    fn g2_values() {
        let p = ModelParams::default();
        assert_eq!(g2(1.0, 0.0, &p), 0.0);
        assert_eq!(g2(0.3, 0.0, &p), 0.0);
        assert!((g2(0.5, 0.25, &p) - 0.00535).abs() < 1e-16);
    }

    #[test]
    fn quasi_positivity_and_sum_structure() {
        let p = ModelParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let u: f64 = rng.random_range(0.0..2.0);
            let v: f64 = rng.random_range(0.0..2.0);
            assert_eq!(g1(0.0, v, &p), p.f);
            assert_eq!(g2(u, 0.0, &p), 0.0);
            let sum = g1(u, v, &p) + g2(u, v, &p);
            let expected = p.f * (1.0 - u) - (p.f + p.kappa) * v;
            assert!((sum - expected).abs() <= 1e-15 * (1.0 + u * v * v).max(1.0) * 4.0);
        }
    }

    #[test]
    fn validation() {
        assert!(ModelParams::default().validate().is_ok());
        let bad = ModelParams { kappa: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ModelParams { dt: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ModelParams { d_v: f64::NAN, ..Default::default() };
        assert!(bad.validate().is_err());
        assert_eq!(ModelParams { kappa: 2.0, ..Default::default() }.kappa_tilde(), 1.0);
    }

    #[test]
    fn reference_equilibrium() {
        let p = ModelParams::default();
        assert_eq!(homogeneous_reference(1.0, 0.0, &p, 37.5), (1.0, 0.0));
        assert_eq!(homogeneous_reference(0.3, 0.2, &p, 0.0), (0.3, 0.2));
    }

    #[test]
    fn reference_closed_form_without_v() {
        let p = ModelParams { dt: 0.1, ..Default::default() };
        for (u0, t) in [(0.2, 1.0), (0.0, 25.0), (3.0, 100.0)] {
            let (u, v) = homogeneous_reference(u0, 0.0, &p, t);
            let exact = 1.0 + (u0 - 1.0) * (-p.f * t).exp();
            assert!((u - exact).abs() < 1e-10);
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn reference_against_independent_solver() {
        // (u, v)(1) from (0.5, 0.25), computed with an adaptive 8th-order
        // Runge-Kutta integrator at rtol 1e-13
        let p = ModelParams { dt: 1e-2, ..Default::default() };
        let (u, v) = homogeneous_reference(0.5, 0.25, &p, 1.0);
        assert!((u - 0.4886632307591777).abs() < 1e-12, "{u}");
        assert!((v - 0.25538457232463413).abs() < 1e-12, "{v}");
    }

    #[test]
    fn reference_is_fourth_order() {
        let p = ModelParams::default();
        let t = 200.0;
        let a = integrate_rk4(0.5, 0.25, &p, t, 50);
        let b = integrate_rk4(0.5, 0.25, &p, t, 100);
        let c = integrate_rk4(0.5, 0.25, &p, t, 200);
        let e1 = (a.0 - b.0).hypot(a.1 - b.1);
        let e2 = (b.0 - c.0).hypot(b.1 - c.1);
        let order = (e1 / e2).log2();
        assert!(order >= 3.8, "observed order {order}");
    }
}
