//! Runtime audits of a trajectory against the analytic estimates for the
//! Gray-Scott system: componentwise nonnegativity, the sup-norm bound
//! `‖u‖∞ ≤ max(‖u₀‖∞, 1)`, the total-mass bound
//! `∫(u + v) ≤ max(|Ω| / κ̃, ∫(u₀ + v₀))` with `κ̃ = min(κ, 1)`, and the
//! discrete conservation of both diffusion operators.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::{Field, LatticeSpec};
use crate::integrator::{SimState, Variant};
use crate::kernel::DiscreteKernel;
use crate::kinetics::ModelParams;
use crate::operators::{laplacian9, nonlocal_gamma};

/// Entries below `-NEGATIVITY_TOL` count as negative.
pub const NEGATIVITY_TOL: f64 = 1e-9;
/// Relative slack on the sup-norm and mass bounds.
pub const BOUND_SLACK: f64 = 1e-6;
/// Absolute slack on the sup-norm bound.
pub const SUP_ABS_SLACK: f64 = 1e-9;
/// Conservation residuals must stay below `RESIDUAL_TOL · (1 + sup u + sup v) · |Ω|`.
pub const RESIDUAL_TOL: f64 = 1e-8;

pub const CSV_HEADER: &str =
    "step,time,min_u,min_v,sup_u,sup_v,total_mass,sup_bound,mass_bound,gamma_residual,laplacian_residual,violations";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Violation {
    UNegative,
    VNegative,
    /// Sup-norm bound exceeded in the mixed model.
    SupU,
    /// Sup-norm bound exceeded in the local model; recorded, not enforced.
    SupUAdvisory,
    MassBound,
    GammaResidual,
    LaplacianResidual,
    Diverged,
}

impl Violation {
    pub fn name(self) -> &'static str {
        match self {
            Violation::UNegative => "u_negative",
            Violation::VNegative => "v_negative",
            Violation::SupU => "sup_u",
            Violation::SupUAdvisory => "sup_u_advisory",
            Violation::MassBound => "mass_bound",
            Violation::GammaResidual => "gamma_residual",
            Violation::LaplacianResidual => "laplacian_residual",
            Violation::Diverged => "diverged",
        }
    }

    pub fn is_advisory(self) -> bool {
        self == Violation::SupUAdvisory
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Run constants computed once from the initial data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub sup_bound: f64,
    pub mass_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantReport {
    pub step: u64,
    pub time: f64,
    pub min_u: f64,
    pub min_v: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub total_mass: f64,
    pub sup_bound: f64,
    pub mass_bound: f64,
    pub gamma_residual: f64,
    pub laplacian_residual: f64,
    pub violations: Vec<Violation>,
}

impl InvariantReport {
    pub fn has_hard_violations(&self) -> bool {
        self.violations.iter().any(|v| !v.is_advisory())
    }

    pub fn has(&self, v: Violation) -> bool {
        self.violations.contains(&v)
    }

    /// Largest residual that still passes the conservation check.
    pub fn residual_limit(&self, area: f64) -> f64 {
        RESIDUAL_TOL * (1.0 + self.sup_u + self.sup_v) * area
    }
}

/// `sup_bound = max(‖u₀‖∞, 1)`, `mass_bound = max(|Ω| / min(κ, 1), ∫(u₀ + v₀))`.
pub fn compute_bounds(u0: &Field, v0: &Field, p: &ModelParams, lattice: &LatticeSpec) -> Result<Bounds> {
    if !(p.kappa > 0.0) {
        return Err(Error::Parameter(format!("kappa must be positive, got {}", p.kappa)));
    }
    u0.ensure_same_shape(v0)?;
    let sup_bound = u0.sup_norm().max(1.0);
    let initial_mass = u0.mass(lattice.h) + v0.mass(lattice.h);
    let mass_bound = (lattice.area() / p.kappa_tilde()).max(initial_mass);
    Ok(Bounds { sup_bound, mass_bound })
}

/// Audits one state. Never fails; every breach is listed in `violations`.
///
/// The Γ residual is evaluated whenever a kernel is supplied and reported as
/// zero otherwise.
pub fn audit(
    s: &SimState,
    bounds: &Bounds,
    p: &ModelParams,
    lattice: &LatticeSpec,
    variant: Variant,
    kernel: Option<&DiscreteKernel>,
) -> InvariantReport {
    let h = lattice.h;
    let min_u = s.u.min_entry();
    let min_v = s.v.min_entry();
    let sup_u = s.u.sup_norm();
    let sup_v = s.v.sup_norm();
    let total_mass = s.u.mass(h) + s.v.mass(h);

    let gamma_residual = match kernel {
        Some(k) => nonlocal_gamma(k, &s.u, true)
            .map(|g| g.mass(h).abs())
            .unwrap_or(f64::NAN),
        None => 0.0,
    };
    let laplacian_residual = laplacian9(&s.v, p.h).mass(h).abs();

    let mut violations = Vec::new();
    // NaN-safe comparisons: a non-finite statistic counts as a breach
    if !(min_u >= -NEGATIVITY_TOL) {
        violations.push(Violation::UNegative);
    }
    if !(min_v >= -NEGATIVITY_TOL) {
        violations.push(Violation::VNegative);
    }
    if !(sup_u <= bounds.sup_bound * (1.0 + BOUND_SLACK) + SUP_ABS_SLACK) {
        violations.push(match variant {
            Variant::Mixed => Violation::SupU,
            Variant::Local => Violation::SupUAdvisory,
        });
    }
    if !(total_mass <= bounds.mass_bound * (1.0 + BOUND_SLACK)) {
        violations.push(Violation::MassBound);
    }
    let residual_limit = RESIDUAL_TOL * (1.0 + sup_u + sup_v) * lattice.area();
    if !(gamma_residual <= residual_limit) {
        violations.push(Violation::GammaResidual);
    }
    if !(laplacian_residual <= residual_limit) {
        violations.push(Violation::LaplacianResidual);
    }

    InvariantReport {
        step: s.step,
        time: s.time(),
        min_u,
        min_v,
        sup_u,
        sup_v,
        total_mass,
        sup_bound: bounds.sup_bound,
        mass_bound: bounds.mass_bound,
        gamma_residual,
        laplacian_residual,
        violations,
    }
}

/// Float rendering used in every CSV: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders one CSV row (no trailing newline).
pub fn report_row(r: &InvariantReport) -> String {
    let names: Vec<&str> = r.violations.iter().map(|v| v.name()).collect();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.step,
        fmt_f64(r.time),
        fmt_f64(r.min_u),
        fmt_f64(r.min_v),
        fmt_f64(r.sup_u),
        fmt_f64(r.sup_v),
        fmt_f64(r.total_mass),
        fmt_f64(r.sup_bound),
        fmt_f64(r.mass_bound),
        fmt_f64(r.gamma_residual),
        fmt_f64(r.laplacian_residual),
        names.join(";")
    )
}

/// CSV sink for invariant reports. The header goes out with the first row.
pub struct ReportWriter<W: Write> {
    inner: W,
    header_written: bool,
}

impl<W: Write> ReportWriter<W> {
    pub fn new(inner: W) -> Self {
        Self {
            inner,
            header_written: false,
        }
    }

    pub fn write_report_row(&mut self, r: &InvariantReport) -> std::io::Result<()> {
        if !self.header_written {
            writeln!(self.inner, "{CSV_HEADER}")?;
            self.header_written = true;
        }
        writeln!(self.inner, "{}", report_row(r))
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{seed, SeedSpec};
    use crate::kernel::{build_gaussian_kernel, KernelSpec};

    fn reference_setup() -> (ModelParams, LatticeSpec) {
        (ModelParams::default(), LatticeSpec::unit(200).unwrap())
    }

    #[test]
    fn reference_bounds() {
        let (p, lattice) = reference_setup();
        let s = seed(&SeedSpec::uniform(), &lattice, 1.0).unwrap();
        let b = compute_bounds(&s.u, &s.v, &p, &lattice).unwrap();
        assert_eq!(b.sup_bound, 1.0);
        assert!((b.mass_bound - 40000.0 / 0.0636).abs() < 1e-9);
        assert!((b.mass_bound - 628930.8).abs() < 0.1);
    }

    #[test]
    fn bound_branches() {
        let (p, lattice) = reference_setup();
        let u = Field::constant(200, 200, 3.0).unwrap();
        let v = Field::zeros(200, 200).unwrap();
        assert_eq!(compute_bounds(&u, &v, &p, &lattice).unwrap().sup_bound, 3.0);

        let p2 = ModelParams { kappa: 2.0, ..p };
        let b = compute_bounds(&u, &v, &p2, &lattice).unwrap();
        assert_eq!(b.mass_bound, (40000.0f64).max(120000.0));
        let u1 = Field::constant(200, 200, 0.5).unwrap();
        assert_eq!(compute_bounds(&u1, &v, &p2, &lattice).unwrap().mass_bound, 40000.0);

        let bad = ModelParams { kappa: 0.0, ..p };
        assert!(matches!(compute_bounds(&u, &v, &bad, &lattice), Err(Error::Parameter(_))));
    }

    #[test]
    fn bounds_monotone_under_scaling() {
        let lattice = LatticeSpec::unit(8).unwrap();
        let p = ModelParams::default();
        let u = Field::from_fn(8, 8, |i, j| (i * j) as f64 / 64.0).unwrap();
        let v = Field::zeros(8, 8).unwrap();
        let mut prev = 0.0;
        for c in [1.0, 1.5, 3.0, 10.0, 100.0] {
            let b = compute_bounds(&u.scaled(c), &v, &p, &lattice).unwrap();
            assert!(b.sup_bound >= prev);
            prev = b.sup_bound;
        }
    }

    #[test]
    fn equilibrium_audit_is_clean() {
        let (p, lattice) = reference_setup();
        let s = seed(&SeedSpec::uniform(), &lattice, 1.0).unwrap();
        let b = compute_bounds(&s.u, &s.v, &p, &lattice).unwrap();
        let k = build_gaussian_kernel(&KernelSpec::for_lattice(1.0, &lattice).unwrap()).unwrap();
        let r = audit(&s, &b, &p, &lattice, Variant::Mixed, Some(&k));
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert_eq!(r.total_mass, 40000.0);
        assert!(r.gamma_residual < 1e-13 * 40000.0);
        assert_eq!(r.laplacian_residual, 0.0);
    }

    #[test]
    fn negative_entry_flagged() {
        let lattice = LatticeSpec::unit(8).unwrap();
        let p = ModelParams::default();
        let mut s = seed(&SeedSpec::uniform(), &lattice, 1.0).unwrap();
        let b = compute_bounds(&s.u, &s.v, &p, &lattice).unwrap();
        s.u[(3, 3)] = -1e-6;
        let r = audit(&s, &b, &p, &lattice, Variant::Local, None);
        assert_eq!(r.violations, vec![Violation::UNegative]);
        assert_eq!(report_row(&r).rsplit(',').next(), Some("u_negative"));

        s.u[(3, 3)] = -1e-12;
        assert!(audit(&s, &b, &p, &lattice, Variant::Local, None).violations.is_empty());
    }

    #[test]
    fn sup_bound_enforced_only_for_mixed() {
        let lattice = LatticeSpec::unit(8).unwrap();
        let p = ModelParams::default();
        let mut s = seed(&SeedSpec::uniform(), &lattice, 1.0).unwrap();
        let b = compute_bounds(&s.u, &s.v, &p, &lattice).unwrap();
        s.u[(0, 0)] = 1.01;
        let local = audit(&s, &b, &p, &lattice, Variant::Local, None);
        assert_eq!(local.violations, vec![Violation::SupUAdvisory]);
        assert!(!local.has_hard_violations());
        let k = DiscreteKernel::delta(8, 8).unwrap();
        let mixed = audit(&s, &b, &p, &lattice, Variant::Mixed, Some(&k));
        assert_eq!(mixed.violations, vec![Violation::SupU]);
        assert!(mixed.has_hard_violations());
    }

    #[test]
    fn csv_rows() {
        let r = InvariantReport {
            step: 7,
            time: 7.0,
            min_u: 0.1,
            min_v: 0.0,
            sup_u: 1.0,
            sup_v: 0.25,
            total_mass: 123.5,
            sup_bound: 1.0,
            mass_bound: 1000.0,
            gamma_residual: 0.0,
            laplacian_residual: 1e-20,
            violations: vec![],
        };
        let row = report_row(&r);
        assert_eq!(row.split(',').count(), 12);
        assert!(row.ends_with(','));
        assert!(row.starts_with("7,7.0000000000000000e0,1.0000000000000001e-1,"));

        let mut two = r.clone();
        two.violations = vec![Violation::UNegative, Violation::MassBound];
        assert!(report_row(&two).ends_with(",u_negative;mass_bound"));

        let mut w = ReportWriter::new(Vec::new());
        w.write_report_row(&r).unwrap();
        w.write_report_row(&two).unwrap();
        let text = String::from_utf8(w.into_inner()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[0].split(',').count(), 12);
    }

    #[test]
    fn csv_floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 628930.8176100629, -1e-17, 5e-324] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
