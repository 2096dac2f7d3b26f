//! Self-convergence tables on a ladder of halved steps.

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{l1_self_convergence_error, network_order};
use crate::error::{Error, Result};
use crate::state::State;

use super::config::RunConfig;
use super::sim::{Simulation, Termination};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    /// Space step of the first arc at this level.
    pub h: f64,
    /// Error summed over arcs against the next finer level.
    pub error_u: f64,
    pub error_phi: f64,
    pub error_v: f64,
    /// `min_i log2(e_i(h) / e_i(h/2))`; absent on the last row.
    pub gamma_u: Option<f64>,
    pub gamma_phi: Option<f64>,
    pub gamma_v: Option<f64>,
    /// Per-arc errors, in arc order.
    pub arc_error_u: Vec<f64>,
    pub arc_error_phi: Vec<f64>,
    pub arc_error_v: Vec<f64>,
}

/// Final state at `t_final` on level `level` (time step `k / 2^level`).
pub fn run_level(cfg: &RunConfig, level: u32) -> Result<(Simulation, State)> {
    let mut c = cfg.clone();
    c.k = cfg.k / f64::from(1u32 << level);
    c.steady_tol = None;
    let mut sim = Simulation::new(&c)?;
    let summary = sim.run(&c, &mut |_| {})?;
    if summary.termination == Termination::Blowup {
        return Err(Error::Config(format!(
            "level {level} blew up at t = {}",
            summary.final_time
        )));
    }
    let state = sim.state().clone();
    Ok((sim, state))
}

fn arc_errors(coarse: &[Vec<f64>], fine: &[Vec<f64>], h: &[f64]) -> Result<Vec<f64>> {
    coarse
        .iter()
        .zip(fine)
        .zip(h)
        .map(|((c, f), &h)| l1_self_convergence_error(c, f, h))
        .collect()
}

/// Runs `levels` grids in parallel and returns `levels - 1` rows.
pub fn converge(cfg: &RunConfig, levels: u32) -> Result<Vec<ConvergenceRow>> {
    if levels < 2 {
        return Err(Error::Config("a convergence study needs at least 2 levels".into()));
    }
    let runs: Vec<(Vec<f64>, State)> = (0..levels)
        .into_par_iter()
        .map(|l| {
            run_level(cfg, l).map(|(sim, st)| (sim.grid().arcs.iter().map(|g| g.h).collect(), st))
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<ConvergenceRow> = runs
        .windows(2)
        .map(|w| {
            let (h, a) = (&w[0].0, &w[0].1);
            let b = &w[1].1;
            let eu = arc_errors(&a.hyp.u, &b.hyp.u, h)?;
            let ep = arc_errors(&a.phi, &b.phi, h)?;
            let ev = arc_errors(&a.hyp.v, &b.hyp.v, h)?;
            Ok(ConvergenceRow {
                h: h[0],
                error_u: eu.iter().sum(),
                error_phi: ep.iter().sum(),
                error_v: ev.iter().sum(),
                gamma_u: None,
                gamma_phi: None,
                gamma_v: None,
                arc_error_u: eu,
                arc_error_phi: ep,
                arc_error_v: ev,
            })
        })
        .collect::<Result<_>>()?;
    for i in 0..rows.len().saturating_sub(1) {
        let (a, b) = (&rows[i], &rows[i + 1]);
        let gu = network_order(&a.arc_error_u, &b.arc_error_u);
        let gp = network_order(&a.arc_error_phi, &b.arc_error_phi);
        let gv = network_order(&a.arc_error_v, &b.arc_error_v);
        rows[i].gamma_u = Some(gu);
        rows[i].gamma_phi = Some(gp);
        rows[i].gamma_v = Some(gv);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::config::{InitialCondition, PhiRule, Profile};
    use crate::runner::presets::two_arc_full_dissipative;

    #[test]
    fn constant_steady_data_gives_zero_errors() {
        let mut cfg = two_arc_full_dissipative();
        cfg.k = 0.01;
        cfg.t_final = 0.5;
        cfg.initial = InitialCondition {
            default: Profile::Constant { c0: 20.0 },
            arcs: vec![],
            phi: PhiRule::EqualToU,
        };
        let rows = converge(&cfg, 3).unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert!(r.error_u < 1e-10 && r.error_phi < 1e-10 && r.error_v < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn one_level_is_rejected() {
        assert!(converge(&two_arc_full_dissipative(), 1).is_err());
    }
}
