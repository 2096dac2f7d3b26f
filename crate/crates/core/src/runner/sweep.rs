//! Regime map over the two velocities of the two-arc blow-up family.

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::Regime;
use crate::error::{Error, Result};
use crate::grid::DIVISIBILITY_TOL;
use crate::network::NetworkSpec;

use super::config::RunConfig;
use super::presets::blowup_two_arc;
use super::sim::{run_config, Termination};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSpec {
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub t_final: f64,
    /// Upper bound on the space step of arc 1.
    pub h1_max: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            lambda1: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            lambda2: vec![0.5, 1.0, 2.0, 3.0, 4.0],
            t_final: 20.0,
            h1_max: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepCell {
    pub lambda1: f64,
    pub lambda2: f64,
    /// `None` when the cell was skipped.
    pub regime: Option<Regime>,
    pub termination: Option<Termination>,
    pub blowup_time: Option<f64>,
    pub note: String,
}

/// Largest `k` not above `k_max` for which every arc holds a whole number
/// of cells of size `2 k lambda_i`.
pub fn fit_time_step(net: &NetworkSpec, k_max: f64) -> Option<f64> {
    let first = net.arcs.first()?;
    let n0 = (first.length / (2.0 * first.lambda * k_max)).ceil().max(2.0) as u64;
    (n0..n0.saturating_mul(64)).find_map(|n| {
        let k = first.length / (2.0 * first.lambda * n as f64);
        net.arcs
            .iter()
            .all(|a| {
                let r = a.length / (2.0 * a.lambda * k);
                r.round() >= 2.0 && (r - r.round()).abs() <= DIVISIBILITY_TOL * r
            })
            .then_some(k)
    })
}

/// The blow-up family at `(lambda1, lambda2)` with a fitted time step.
pub fn cell_config(lambda1: f64, lambda2: f64, spec: &SweepSpec) -> Result<RunConfig> {
    let mut cfg = blowup_two_arc(lambda1, lambda2)?;
    cfg.t_final = spec.t_final;
    cfg.steady_tol = Some(1e-8);
    let k_max = spec.h1_max / (2.0 * lambda1);
    cfg.k = fit_time_step(&cfg.network, k_max).ok_or_else(|| {
        Error::Config(format!(
            "no admissible time step for lambda = ({lambda1}, {lambda2})"
        ))
    })?;
    cfg.name = format!("sweep_{lambda1}_{lambda2}");
    Ok(cfg)
}

pub fn run_cell(lambda1: f64, lambda2: f64, spec: &SweepSpec) -> SweepCell {
    let skipped = |note: String| SweepCell {
        lambda1,
        lambda2,
        regime: None,
        termination: None,
        blowup_time: None,
        note,
    };
    let cfg = match cell_config(lambda1, lambda2, spec) {
        Ok(cfg) => cfg,
        Err(e) => return skipped(e.to_string()),
    };
    match run_config(&cfg) {
        Ok((_, summary)) => SweepCell {
            lambda1,
            lambda2,
            regime: Some(summary.regime),
            termination: Some(summary.termination),
            blowup_time: summary.blowup.map(|b| b.time),
            note: format!("k = {}", cfg.k),
        },
        Err(e) => skipped(e.to_string()),
    }
}

/// Every `(lambda1, lambda2)` cell, in row-major order of the inputs.
pub fn sweep(spec: &SweepSpec) -> Vec<SweepCell> {
    let pairs: Vec<(f64, f64)> = spec
        .lambda1
        .iter()
        .flat_map(|&a| spec.lambda2.iter().map(move |&b| (a, b)))
        .collect();
    pairs
        .par_iter()
        .map(|&(a, b)| run_cell(a, b, spec))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_steps_divide_both_arcs() {
        let spec = SweepSpec::default();
        for (a, b) in [(1.0, 2.0), (5.0, 4.0), (3.0, 0.5), (2.5, 1.5)] {
            let cfg = cell_config(a, b, &spec).unwrap();
            assert!(cfg.k <= spec.h1_max / (2.0 * a) * (1.0 + 1e-12));
            let net = cfg.network().unwrap();
            crate::grid::build_grid(&net, cfg.k).unwrap();
        }
    }

    #[test]
    fn inadmissible_family_is_skipped() {
        // xi_11 = 0.96 needs lambda2 >= 0.04 lambda1
        let cell = run_cell(50.0, 1.0, &SweepSpec::default());
        assert!(cell.regime.is_none());
    }
}
