//! File-backed run observer.
//!
//! Writes into one directory:
//! - `invariants.csv`: one row per audit
//! - `snapshot_<step>.gsf`: binary snapshots
//! - `u_<step>.pgm`, `v_<step>.pgm`: images, when enabled
//!
//! Step numbers are zero-padded to eight digits.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::integrator::{RunObserver, SimState};
use crate::io::pgm::{export_image, U_WINDOW, V_WINDOW};
use crate::io::snapshot::write_snapshot;
use crate::monitors::{InvariantReport, ReportWriter};

pub const INVARIANTS_FILE: &str = "invariants.csv";

pub struct OutputWriter {
    dir: PathBuf,
    emit_images: bool,
    reports: ReportWriter<BufWriter<File>>,
    snapshots: Vec<PathBuf>,
}

impl OutputWriter {
    pub fn create(dir: impl AsRef<Path>, emit_images: bool) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| Error::io("creating output directory", &dir, e))?;
        let csv = dir.join(INVARIANTS_FILE);
        let file = File::create(&csv).map_err(|e| Error::io("creating invariant log", &csv, e))?;
        Ok(Self {
            dir,
            emit_images,
            reports: ReportWriter::new(BufWriter::new(file)),
            snapshots: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Snapshot files written so far, in order.
    pub fn snapshots(&self) -> &[PathBuf] {
        &self.snapshots
    }

    pub fn snapshot_path(dir: &Path, step: u64) -> PathBuf {
        dir.join(format!("snapshot_{step:08}.gsf"))
    }
}

impl RunObserver for OutputWriter {
    fn on_report(&mut self, report: &InvariantReport) -> Result<()> {
        let path = self.dir.join(INVARIANTS_FILE);
        self.reports
            .write_report_row(report)
            .map_err(|e| Error::io("writing invariant log", path, e))
    }

    fn on_snapshot(&mut self, state: &SimState) -> Result<()> {
        let path = Self::snapshot_path(&self.dir, state.step);
        write_snapshot(state, &path)?;
        self.snapshots.push(path);
        if self.emit_images {
            let (lo, hi) = U_WINDOW;
            export_image(&state.u, self.dir.join(format!("u_{:08}.pgm", state.step)), lo, hi)?;
            let (lo, hi) = V_WINDOW;
            export_image(&state.v, self.dir.join(format!("v_{:08}.pgm", state.step)), lo, hi)?;
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        let path = self.dir.join(INVARIANTS_FILE);
        self.reports
            .flush()
            .map_err(|e| Error::io("flushing invariant log", path, e))
    }
}
