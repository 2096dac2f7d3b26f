//! CSV writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::network::Network;
use crate::state::State;

use super::converge::ConvergenceRow;
use super::sweep::SweepCell;

pub const SNAPSHOT_HEADER: &str = "t,arc_id,x,u,v,phi";
pub const DIAGNOSTICS_HEADER: &str = "t,total_mass,energy,max_abs_u,min_u,steady,blowup";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |x| x.to_string())
}

/// Streams snapshots of every arc into one CSV file.
pub struct SnapshotWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl SnapshotWriter {
    pub fn create(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let mut out = create(&path)?;
        writeln!(out, "{SNAPSHOT_HEADER}").map_err(|e| Error::io(&path, e))?;
        Ok(SnapshotWriter { path, out })
    }

    pub fn write(&mut self, state: &State, net: &Network, grid: &GridSpec) -> Result<()> {
        let t = state.time();
        for (i, (arc, g)) in net.arcs().iter().zip(&grid.arcs).enumerate() {
            for j in 0..g.points() {
                writeln!(
                    self.out,
                    "{t},{},{},{},{},{}",
                    arc.id,
                    g.x(j),
                    state.hyp.u[i][j],
                    state.hyp.v[i][j],
                    state.phi[i][j]
                )
                .map_err(|e| Error::io(&self.path, e))?;
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn write_diagnostics(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "{DIAGNOSTICS_HEADER}").map_err(io)?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.t, r.total_mass, r.energy, r.max_abs_u, r.min_u, r.steady, r.blowup
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn write_regime_map(path: &Path, cells: &[SweepCell]) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "lambda1,lambda2,regime,termination,blowup_time,note").map_err(io)?;
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            c.lambda1,
            c.lambda2,
            c.regime.map_or_else(|| "skipped".to_string(), |r| r.to_string()),
            c.termination.map_or_else(String::new, |t| format!("{t:?}").to_lowercase()),
            opt(c.blowup_time),
            c.note.replace(',', ";")
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn write_order_table(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "h,gamma_u,error_u,gamma_phi,error_phi,gamma_v,error_v").map_err(io)?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.h,
            opt(r.gamma_u),
            r.error_u,
            opt(r.gamma_phi),
            r.error_phi,
            opt(r.gamma_v),
            r.error_v
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}
