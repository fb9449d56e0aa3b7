//! Built-in oracle and property checks, small enough to run in seconds.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Field, LatticeSpec};
use crate::integrator::{run, seed, step_local, step_mixed, RunStatus, SeedSpec, SimState, Variant};
use crate::io::config::parse_config;
use crate::io::snapshot::{decode_snapshot, encode_snapshot};
use crate::kernel::{build_gaussian_kernel, KernelSpec};
use crate::kinetics::{g1, g2, homogeneous_reference, ModelParams};
use crate::operators::{laplacian9, laplacian9_symbol, laplacian9_symbol_range, nonlocal_gamma};

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

type Check = fn() -> Result<String, String>;

const CHECKS: &[(&str, Check)] = &[
    ("spectral_vs_direct", spectral_vs_direct),
    ("laplacian_plane_waves", laplacian_plane_waves),
    ("kernel_normalized_symmetric", kernel_normalized_symmetric),
    ("operator_conservation", operator_conservation),
    ("translation_commutes", translation_commutes),
    ("quasi_positivity", quasi_positivity),
    ("equilibrium_fixed_point", equilibrium_fixed_point),
    ("reaction_only_convergence", reaction_only_convergence),
    ("stability_gate", stability_gate),
    ("snapshot_round_trip", snapshot_round_trip),
    ("short_mixed_run_audit", short_mixed_run_audit),
];

pub fn run_all() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, check)| match check() {
            Ok(detail) => CheckResult { name, passed: true, detail },
            Err(detail) => CheckResult { name, passed: false, detail },
        })
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_field(n: usize, rng: &mut ChaCha8Rng) -> Field {
    Field::from_fn(n, n, |_, _| rng.random::<f64>()).unwrap()
}

fn gaussian(n: usize) -> crate::kernel::DiscreteKernel {
    build_gaussian_kernel(&KernelSpec::new(1.0, n, n, 1.0).unwrap()).unwrap()
}

fn spectral_vs_direct() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for n in [8, 16] {
        let k = gaussian(n);
        for _ in 0..3 {
            let f = random_field(n, &mut rng);
            let d = k.convolve_direct(&f).map_err(|e| e.to_string())?;
            let s = k.convolve_spectral(&f).map_err(|e| e.to_string())?;
            worst = worst.max(s.max_abs_diff(&d).unwrap() / d.sup_norm());
        }
    }
    ensure(worst <= 1e-12, || format!("relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.2e}"))
}

fn laplacian_plane_waves() -> Result<String, String> {
    let n = 16;
    let mut worst = 0.0f64;
    let mut min_symbol = f64::INFINITY;
    for p in 0..n {
        for q in 0..n {
            let a = 2.0 * PI * p as f64 / n as f64;
            let b = 2.0 * PI * q as f64 / n as f64;
            let wave = Field::from_fn(n, n, |i, j| (a * i as f64 + b * j as f64).cos()).unwrap();
            let s = laplacian9_symbol(a, b);
            min_symbol = min_symbol.min(s);
            worst = worst.max(laplacian9(&wave, 1.0).max_abs_diff(&wave.scaled(s)).unwrap());
        }
    }
    ensure(worst <= 1e-12, || format!("symbol mismatch {worst:e}"))?;
    ensure((min_symbol + 1.6).abs() < 1e-12, || format!("min symbol {min_symbol}"))?;
    ensure(laplacian9_symbol_range(1.0).min_eigenvalue == -1.6, || "analytic range".into())?;
    Ok(format!("max error {worst:.2e}, min symbol {min_symbol}"))
}

fn kernel_normalized_symmetric() -> Result<String, String> {
    let k = gaussian(32);
    let w = k.weights();
    ensure((k.total_mass() - 1.0).abs() <= 1e-14, || format!("mass {}", k.total_mass()))?;
    for i in 0..32 {
        for j in 0..32 {
            ensure(w[(i, j)] == w[((32 - i) % 32, (32 - j) % 32)], || format!("asymmetric at ({i},{j})"))?;
        }
    }
    let max_im = k.spectrum().iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    let max_abs = k.spectrum().iter().fold(0.0f64, |m, z| m.max(z.norm()));
    ensure(max_im <= 1e-12, || format!("imaginary spectrum {max_im:e}"))?;
    ensure(max_abs <= k.total_mass() + 1e-12, || format!("|spectrum| {max_abs}"))?;
    Ok(format!("total mass {}", k.total_mass()))
}

fn operator_conservation() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let k = gaussian(16);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let f = random_field(16, &mut rng);
        let tol = 1e-10 * f.sup_norm() * 256.0;
        let lm = laplacian9(&f, 1.0).mass(1.0).abs();
        let gm = nonlocal_gamma(&k, &f, true).map_err(|e| e.to_string())?.mass(1.0).abs();
        ensure(lm <= tol && gm <= tol, || format!("residuals {lm:e}, {gm:e}"))?;
        worst = worst.max(lm).max(gm);
    }
    Ok(format!("max |mass| {worst:.2e}"))
}

fn translation_commutes() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let k = gaussian(16);
    let f = random_field(16, &mut rng);
    let a = k.convolve_spectral(&f.shifted(3, -5)).map_err(|e| e.to_string())?;
    let b = k.convolve_spectral(&f).map_err(|e| e.to_string())?.shifted(3, -5);
    let err = a.max_abs_diff(&b).unwrap();
    ensure(err <= 1e-12, || format!("shift mismatch {err:e}"))?;
    Ok(format!("max error {err:.2e}"))
}

fn quasi_positivity() -> Result<String, String> {
    let p = ModelParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        let u: f64 = rng.random_range(0.0..2.0);
        let v: f64 = rng.random_range(0.0..2.0);
        ensure(g1(0.0, v, &p) == p.f && g2(u, 0.0, &p) == 0.0, || format!("at ({u}, {v})"))?;
    }
    Ok("10000 samples".into())
}

fn equilibrium_fixed_point() -> Result<String, String> {
    let p = ModelParams::default();
    let lattice = LatticeSpec::unit(16).unwrap();
    let k = gaussian(16);
    let mut local = seed(&SeedSpec::uniform(), &lattice, 1.0).unwrap();
    let mut mixed = local.clone();
    for _ in 0..200 {
        local = step_local(&local, &p).map_err(|e| e.to_string())?;
        mixed = step_mixed(&mixed, &p, &k).map_err(|e| e.to_string())?;
    }
    let one = Field::constant(16, 16, 1.0).unwrap();
    let err = [&local, &mixed]
        .iter()
        .map(|s| s.u.max_abs_diff(&one).unwrap().max(s.v.sup_norm()))
        .fold(0.0, f64::max);
    ensure(err <= 1e-13, || format!("drift {err:e}"))?;
    Ok(format!("max drift {err:.2e} after 200 steps"))
}

fn euler_error(dt: f64, steps: u64) -> Result<f64, String> {
    let p = ModelParams { d_u: 0.0, d_v: 0.0, dt, ..Default::default() };
    let u = Field::constant(2, 2, 0.5).unwrap();
    let v = Field::constant(2, 2, 0.25).unwrap();
    let mut s = SimState::new(u, v, 0, dt).unwrap();
    for _ in 0..steps {
        s = step_local(&s, &p).map_err(|e| e.to_string())?;
    }
    let reference = homogeneous_reference(0.5, 0.25, &p, dt * steps as f64);
    Ok((s.u[(0, 0)] - reference.0).abs().max((s.v[(0, 0)] - reference.1).abs()))
}

fn reaction_only_convergence() -> Result<String, String> {
    let e1 = euler_error(0.01, 1000)?;
    let e2 = euler_error(0.005, 2000)?;
    let ratio = e1 / e2;
    ensure(e1 <= 1e-4, || format!("error {e1:e}"))?;
    ensure((1.8..=2.2).contains(&ratio), || format!("halving ratio {ratio}"))?;
    Ok(format!("error {e1:.2e}, halving ratio {ratio:.3}"))
}

fn stability_gate() -> Result<String, String> {
    use crate::integrator::stability_check;
    let p = ModelParams::default();
    let ok = stability_check(&p, Variant::Local, None, None).map_err(|e| e.to_string())?;
    let bad = stability_check(&ModelParams { dt: 1.3, ..p }, Variant::Local, None, None).map_err(|e| e.to_string())?;
    ensure(ok.passed && !bad.passed, || "gate decisions wrong".into())?;
    Ok("dt=1 passes, dt=1.3 fails".into())
}

fn snapshot_round_trip() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = SimState::new(random_field(6, &mut rng), random_field(6, &mut rng), 17, 0.5).unwrap();
    let bytes = encode_snapshot(&s).map_err(|e| e.to_string())?;
    let back = decode_snapshot(&bytes).map_err(|e| e.to_string())?;
    ensure(encode_snapshot(&back).unwrap() == bytes, || "round trip changed bytes".into())?;
    Ok(format!("{} bytes", bytes.len()))
}

fn short_mixed_run_audit() -> Result<String, String> {
    let config = parse_config(
        "variant = mixed\nL = 32\nn = 32\nt_end = 2000\nblock_side = 8\nreport_every = 50\n",
    )
    .map_err(|e| e.to_string())?;
    let outcome = run(&config, &mut ()).map_err(|e| e.to_string())?;
    ensure(outcome.status == RunStatus::Clean, || format!("status {:?}", outcome.status))?;
    Ok(format!("{} clean audits", outcome.reports.len()))
}
