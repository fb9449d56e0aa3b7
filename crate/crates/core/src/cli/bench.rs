//! Timing of the convolution paths and of single time steps.
//!
//! CSV columns: `size,op,mean_ns,reps`. `size` is the grid side.

use std::hint::black_box;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{Field, LatticeSpec};
use crate::integrator::{seed, step_local, step_mixed, SeedSpec};
use crate::io::config::SimConfig;
use crate::kernel::{build_gaussian_kernel, KernelSpec};
use crate::kinetics::ModelParams;

pub const SIZES: [usize; 3] = [16, 32, 64];
const MIN_REPS: u64 = 3;
const MAX_REPS: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub size: usize,
    pub op: &'static str,
    pub mean_ns: f64,
    pub reps: u64,
}

/// Repeats `op` until both `min_time` and `MIN_REPS` are reached and returns
/// the mean wall time per call in nanoseconds.
pub fn time_op(min_time: Duration, mut op: impl FnMut()) -> (f64, u64) {
    op(); // warm-up
    let start = Instant::now();
    let mut reps = 0;
    while reps < MIN_REPS || (start.elapsed() < min_time && reps < MAX_REPS) {
        op();
        reps += 1;
    }
    (start.elapsed().as_nanos() as f64 / reps as f64, reps)
}

pub fn run_bench(config: &SimConfig, sizes: &[usize], min_time: Duration) -> Result<Vec<BenchRow>> {
    let epsilon = config.kernel.map(|k| k.epsilon).unwrap_or(1.0);
    let mut rows = Vec::new();
    for &n in sizes {
        let lattice = LatticeSpec::unit(n)?;
        let params = ModelParams {
            h: lattice.h,
            ..config.params
        };
        let kernel = build_gaussian_kernel(&KernelSpec::for_lattice(epsilon, &lattice)?)?;
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let field = Field::from_fn(n, n, |_, _| rng.random::<f64>())?;

        let mut record = |op: &'static str, (mean_ns, reps): (f64, u64)| {
            rows.push(BenchRow {
                size: n,
                op,
                mean_ns,
                reps,
            })
        };
        record(
            "convolve_spectral",
            time_op(min_time, || {
                black_box(kernel.convolve_spectral(black_box(&field)).unwrap());
            }),
        );
        record(
            "convolve_direct",
            time_op(min_time, || {
                black_box(kernel.convolve_direct_unguarded(black_box(&field)).unwrap());
            }),
        );

        let seed_spec = SeedSpec {
            block_side: (n / 4).max(1),
            ..SeedSpec::default()
        };
        let state = seed(&seed_spec, &lattice, params.dt)?;
        record(
            "step_local",
            time_op(min_time, || {
                black_box(step_local(black_box(&state), &params).unwrap());
            }),
        );
        record(
            "step_mixed",
            time_op(min_time, || {
                black_box(step_mixed(black_box(&state), &params, &kernel).unwrap());
            }),
        );
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("size,op,mean_ns,reps\n");
    for r in rows {
        out.push_str(&format!("{},{},{:.1},{}\n", r.size, r.op, r.mean_ns, r.reps));
    }
    out
}
