//! Forward-Euler time stepping for the local and mixed models, the linear
//! stability gate, initial-condition seeding, and the run driver.
//!
//! Both updates are fully explicit: every operator and reaction term reads
//! the fields of the old time level only.
//!
//! ```text
//! local:  u' = u + Δt (D_u ℒu + g1),        v' = v + Δt (D_v ℒv + g2)
//! mixed:  u' = u + Δt (D_u (φ*u - u) + g1), v' = v + Δt (D_v ℒv + g2)
//! ```

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Field, LatticeSpec};
use crate::io::config::SimConfig;
use crate::kernel::{build_gaussian_kernel, DiscreteKernel};
use crate::kinetics::{g1, g2, ModelParams};
use crate::monitors::{audit, compute_bounds, InvariantReport, Violation};
use crate::operators::{gamma_symbol_range, laplacian9, laplacian9_symbol_range};

/// Any entry above this magnitude is treated as numerical blow-up.
pub const DIVERGENCE_SUP: f64 = 1e6;

/// Upper limit on `Δt · D · |λ_min|` for a stable explicit step.
pub const STABILITY_LIMIT: f64 = 2.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub u: Field,
    pub v: Field,
    pub step: u64,
    pub dt: f64,
}

impl SimState {
    pub fn new(u: Field, v: Field, step: u64, dt: f64) -> Result<Self> {
        u.ensure_same_shape(&v)?;
        Ok(Self { u, v, step, dt })
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn nx(&self) -> usize {
        self.u.nx()
    }

    pub fn ny(&self) -> usize {
        self.u.ny()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Local,
    Mixed,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Local => "local",
            Variant::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "local" => Ok(Variant::Local),
            "mixed" => Ok(Variant::Mixed),
            other => Err(format!("expected `local` or `mixed`, got `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedMode {
    Uniform,
    CenterSquare,
    CenterSquareNoise,
}

impl SeedMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SeedMode::Uniform => "uniform",
            SeedMode::CenterSquare => "center-square",
            SeedMode::CenterSquareNoise => "center-square-noise",
        }
    }
}

impl FromStr for SeedMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(SeedMode::Uniform),
            "center-square" => Ok(SeedMode::CenterSquare),
            "center-square-noise" => Ok(SeedMode::CenterSquareNoise),
            other => Err(format!(
                "expected `uniform`, `center-square` or `center-square-noise`, got `{other}`"
            )),
        }
    }
}

/// Initial-condition recipe. Outside the block the state is `(1, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedSpec {
    pub mode: SeedMode,
    pub block_side: usize,
    pub u_in: f64,
    pub v_in: f64,
    pub noise_amplitude: f64,
    pub rng_seed: u64,
}

impl Default for SeedSpec {
    fn default() -> Self {
        Self {
            mode: SeedMode::CenterSquareNoise,
            block_side: 20,
            u_in: 0.5,
            v_in: 0.25,
            noise_amplitude: 0.02,
            rng_seed: 1,
        }
    }
}

impl SeedSpec {
    pub fn uniform() -> Self {
        Self {
            mode: SeedMode::Uniform,
            ..Self::default()
        }
    }

    pub fn center_square(block_side: usize, u_in: f64, v_in: f64) -> Self {
        Self {
            mode: SeedMode::CenterSquare,
            block_side,
            u_in,
            v_in,
            noise_amplitude: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.mode != SeedMode::Uniform && self.block_side > n {
            return Err(Error::Parameter(format!(
                "seed block of side {} does not fit a {n}x{n} grid",
                self.block_side
            )));
        }
        if !(self.noise_amplitude.is_finite() && self.noise_amplitude >= 0.0) {
            return Err(Error::Parameter(format!(
                "noise amplitude must be nonnegative, got {}",
                self.noise_amplitude
            )));
        }
        if !(self.u_in.is_finite() && self.v_in.is_finite()) {
            return Err(Error::Parameter("seed block values must be finite".into()));
        }
        Ok(())
    }
}

/// Builds the initial state at step 0.
///
/// The noisy mode adds independent uniform draws from `[-a, a]` to `u` and
/// `v` inside the block (cells in row-major order, `u` before `v`) and clips
/// the result at zero.
pub fn seed(spec: &SeedSpec, lattice: &LatticeSpec, dt: f64) -> Result<SimState> {
    spec.validate(lattice.n)?;
    let n = lattice.n;
    let mut u = Field::constant(n, n, 1.0)?;
    let mut v = Field::zeros(n, n)?;
    if spec.mode != SeedMode::Uniform {
        let start = (n - spec.block_side) / 2;
        let block = start..start + spec.block_side;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
        let a = spec.noise_amplitude;
        let noisy = spec.mode == SeedMode::CenterSquareNoise && a > 0.0;
        for i in block.clone() {
            for j in block.clone() {
                let (mut du, mut dv) = (0.0, 0.0);
                if noisy {
                    du = rng.random_range(-a..=a);
                    dv = rng.random_range(-a..=a);
                }
                u[(i, j)] = (spec.u_in + du).max(0.0);
                v[(i, j)] = (spec.v_in + dv).max(0.0);
            }
        }
    }
    SimState::new(u, v, 0, dt)
}

/// Shared explicit update given the already-evaluated diffusion terms.
fn euler_update(s: &SimState, p: &ModelParams, diff_u: &[f64], diff_v: &[f64]) -> SimState {
    let dt = p.dt;
    let (u, v) = (s.u.data(), s.v.data());
    let mut nu = s.u.clone();
    let mut nv = s.v.clone();
    for (idx, (ou, ov)) in nu.data_mut().iter_mut().zip(nv.data_mut().iter_mut()).enumerate() {
        let (a, b) = (u[idx], v[idx]);
        *ou = a + dt * (p.d_u * diff_u[idx] + g1(a, b, p));
        *ov = b + dt * (p.d_v * diff_v[idx] + g2(a, b, p));
    }
    SimState {
        u: nu,
        v: nv,
        step: s.step + 1,
        dt,
    }
}

pub(crate) fn advance_local(s: &SimState, p: &ModelParams) -> SimState {
    let lu = laplacian9(&s.u, p.h);
    let lv = laplacian9(&s.v, p.h);
    euler_update(s, p, lu.data(), lv.data())
}

pub(crate) fn advance_mixed(s: &SimState, p: &ModelParams, k: &DiscreteKernel) -> Result<SimState> {
    let conv = k.convolve_spectral(&s.u)?;
    let gamma: Vec<f64> = conv.data().iter().zip(s.u.data()).map(|(c, x)| c - x).collect();
    let lv = laplacian9(&s.v, p.h);
    Ok(euler_update(s, p, &gamma, lv.data()))
}

/// Reason the state counts as diverged, if it does.
pub(crate) fn divergence_reason(s: &SimState) -> Option<String> {
    for (name, f) in [("u", &s.u), ("v", &s.v)] {
        if !f.is_finite() {
            return Some(format!("non-finite value in {name}"));
        }
        let sup = f.sup_norm();
        if sup > DIVERGENCE_SUP {
            return Some(format!("sup norm of {name} reached {sup:e}"));
        }
    }
    None
}

fn checked(next: SimState) -> Result<SimState> {
    match divergence_reason(&next) {
        Some(reason) => Err(Error::Divergence {
            step: next.step,
            reason,
        }),
        None => Ok(next),
    }
}

fn ensure_step_inputs(s: &SimState, p: &ModelParams) -> Result<()> {
    p.validate()?;
    s.u.ensure_same_shape(&s.v)
}

/// One forward-Euler step of the local model.
pub fn step_local(s: &SimState, p: &ModelParams) -> Result<SimState> {
    ensure_step_inputs(s, p)?;
    checked(advance_local(s, p))
}

/// One forward-Euler step of the mixed model; `u` diffuses through `k`.
pub fn step_mixed(s: &SimState, p: &ModelParams, k: &DiscreteKernel) -> Result<SimState> {
    ensure_step_inputs(s, p)?;
    checked(advance_mixed(s, p, k)?)
}

/// Per-species result of the linear stability bound.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeciesMargin {
    pub species: &'static str,
    pub operator: &'static str,
    pub diffusivity: f64,
    /// Most negative eigenvalue of the spatial operator.
    pub symbol_min: f64,
    /// `Δt · D · |symbol_min|`, stable when at most [`STABILITY_LIMIT`].
    pub amplification: f64,
}

impl SpeciesMargin {
    pub fn passed(&self) -> bool {
        self.amplification <= STABILITY_LIMIT
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub passed: bool,
    pub margins: Vec<SpeciesMargin>,
    /// `Δt · max ‖∂(g1, g2)/∂(u, v)‖_∞` over the sampled state. Informational.
    pub reaction_stiffness: Option<f64>,
}

impl fmt::Display for StabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "stability: {}", if self.passed { "pass" } else { "FAIL" })?;
        for m in &self.margins {
            writeln!(
                f,
                "  {} ({}): dt*D*|lambda_min| = {:.6} (limit {STABILITY_LIMIT}) {}",
                m.species,
                m.operator,
                m.amplification,
                if m.passed() { "ok" } else { "exceeded" }
            )?;
        }
        if let Some(s) = self.reaction_stiffness {
            writeln!(f, "  reaction: dt*|J|_inf = {s:.6} (informational)")?;
        }
        Ok(())
    }
}

/// Linear stability gate for the explicit step.
///
/// Each species needs `Δt · D · |λ_min| ≤ 2`, with `λ_min` the most negative
/// eigenvalue of its diffusion operator: `-1.6 / h²` for the 9-point
/// Laplacian, `min Re φ̂ - Σφ` for the nonlocal operator.
pub fn stability_check(
    p: &ModelParams,
    variant: Variant,
    kernel: Option<&DiscreteKernel>,
    state: Option<&SimState>,
) -> Result<StabilityReport> {
    let lap_min = laplacian9_symbol_range(p.h).min_eigenvalue;
    let u_margin = match variant {
        Variant::Local => margin("u", "laplacian9", p.d_u, lap_min, p.dt),
        Variant::Mixed => {
            let k = kernel.ok_or_else(|| {
                Error::Parameter("mixed variant needs a kernel for the stability check".into())
            })?;
            margin("u", "nonlocal", p.d_u, gamma_symbol_range(k).min_eigenvalue, p.dt)
        }
    };
    let v_margin = margin("v", "laplacian9", p.d_v, lap_min, p.dt);
    let passed = u_margin.passed() && v_margin.passed();
    Ok(StabilityReport {
        passed,
        margins: vec![u_margin, v_margin],
        reaction_stiffness: state.map(|s| p.dt * reaction_jacobian_bound(s, p)),
    })
}

fn margin(species: &'static str, operator: &'static str, d: f64, symbol_min: f64, dt: f64) -> SpeciesMargin {
    SpeciesMargin {
        species,
        operator,
        diffusivity: d,
        symbol_min,
        amplification: dt * d * symbol_min.abs(),
    }
}

fn reaction_jacobian_bound(s: &SimState, p: &ModelParams) -> f64 {
    s.u.data()
        .iter()
        .zip(s.v.data())
        .map(|(&u, &v)| {
            let row1 = (v * v + p.f).abs() + (2.0 * u * v).abs();
            let row2 = (v * v).abs() + (2.0 * u * v - p.f - p.kappa).abs();
            row1.max(row2)
        })
        .fold(0.0, f64::max)
}

/// Receives reports and snapshots as a run produces them.
pub trait RunObserver {
    fn on_report(&mut self, _report: &InvariantReport) -> Result<()> {
        Ok(())
    }

    fn on_snapshot(&mut self, _state: &SimState) -> Result<()> {
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        Ok(())
    }
}

impl RunObserver for () {}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Clean,
    /// At least one hard invariant breach was reported.
    Violations,
    Diverged { step: u64, reason: String },
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    /// Last finite state (the state before blow-up on divergence).
    pub final_state: SimState,
    pub reports: Vec<InvariantReport>,
    pub stability: StabilityReport,
    pub status: RunStatus,
}

/// Number of steps for a run of length `t_end`.
pub fn step_count(t_end: f64, dt: f64) -> u64 {
    (t_end / dt).round().max(0.0) as u64
}

/// Runs a configured simulation, auditing every `report_every` steps (and at
/// the final step) and emitting snapshots every `snapshot_every` steps (0
/// means final only).
///
/// Refuses to start when the stability gate fails, unless the configuration
/// waives it.
pub fn run(config: &SimConfig, observer: &mut dyn RunObserver) -> Result<RunOutcome> {
    config.validate()?;
    let p = config.params;
    let lattice = config.lattice;
    let kernel = match config.variant {
        Variant::Mixed => {
            let spec = config
                .kernel
                .ok_or_else(|| Error::Parameter("mixed variant requires a kernel".into()))?;
            Some(build_gaussian_kernel(&spec)?)
        }
        Variant::Local => None,
    };

    let mut state = seed(&config.seed, &lattice, p.dt)?;
    let stability = stability_check(&p, config.variant, kernel.as_ref(), Some(&state))?;
    if !stability.passed && !config.waive_stability {
        return Err(Error::Unstable(stability));
    }

    let bounds = compute_bounds(&state.u, &state.v, &p, &lattice)?;
    let n_steps = step_count(config.t_end, p.dt);
    let mut reports = Vec::new();
    let mut hard_violation = false;
    let auditing = |s: &SimState| audit(s, &bounds, &p, &lattice, config.variant, kernel.as_ref());

    let mut emit = |r: InvariantReport, obs: &mut dyn RunObserver, reports: &mut Vec<InvariantReport>| {
        hard_violation |= r.has_hard_violations();
        obs.on_report(&r)?;
        reports.push(r);
        Ok::<_, Error>(())
    };

    emit(auditing(&state), observer, &mut reports)?;
    if config.snapshot_every > 0 || n_steps == 0 {
        observer.on_snapshot(&state)?;
    }

    for n in 1..=n_steps {
        let next = match &kernel {
            Some(k) => advance_mixed(&state, &p, k)?,
            None => advance_local(&state, &p),
        };
        if let Some(reason) = divergence_reason(&next) {
            let mut r = auditing(&next);
            r.violations.push(Violation::Diverged);
            emit(r, observer, &mut reports)?;
            observer.finish()?;
            return Ok(RunOutcome {
                final_state: state,
                reports,
                stability,
                status: RunStatus::Diverged { step: n, reason },
            });
        }
        state = next;
        let last = n == n_steps;
        if n % config.report_every == 0 || last {
            emit(auditing(&state), observer, &mut reports)?;
        }
        if (config.snapshot_every > 0 && n % config.snapshot_every == 0) || last {
            observer.on_snapshot(&state)?;
        }
    }
    observer.finish()?;

    let status = if hard_violation {
        RunStatus::Violations
    } else {
        RunStatus::Clean
    };
    Ok(RunOutcome {
        final_state: state,
        reports,
        stability,
        status,
    })
}
