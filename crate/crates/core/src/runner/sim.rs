//! Coupled time loop.
//!
//! Each step: hyperbolic update with `f^n`, chemoattractant solve with
//! `u^n` and `u^{n+1}`, then `f^{n+1}` from `phi^{n+1}` and `u^{n+1}`.

use serde::Serialize;

use crate::chemo::{network_source, CnSystem};
use crate::diagnostics::{
    classify_regime, discrete_mass, BlowupDetector, BlowupReport, DiagnosticsRecord, Regime,
};
use crate::error::Result;
use crate::grid::{build_grid_with_cfl, GridSpec};
use crate::network::Network;
use crate::scheme::{check_monotonicity, HyperbolicScheme, HyperbolicState};
use crate::state::State;
use crate::steady::steady_residual;

use super::config::{Model, RunConfig, DEFAULT_SAMPLES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Steady,
    Blowup,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub termination: Termination,
    pub steps: u64,
    pub final_time: f64,
    pub initial_mass: f64,
    /// Largest `|I(t) - I(0)| / I(0)` over steps before any blow-up.
    pub max_mass_drift: f64,
    pub last_residual: f64,
    pub blowup: Option<BlowupReport>,
    pub regime: Regime,
    pub records: Vec<DiagnosticsRecord>,
}

pub struct Simulation {
    net: Network,
    grid: GridSpec,
    scheme: HyperbolicScheme,
    cn: Option<CnSystem>,
    model: Model,
    lambda: Vec<f64>,
    state: State,
    next: State,
    f: Vec<Vec<f64>>,
    detector: BlowupDetector,
    warnings: Vec<String>,
}

impl Simulation {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let net = cfg.network()?;
        let grid = build_grid_with_cfl(&net, cfg.k, cfg.cfl)?;
        let (u, phi) = cfg.initial.sample(&net, &grid);
        let hyp = HyperbolicState::from_arrays(u, grid.zeros());
        let mut sim = Self::from_state(net, grid, cfg.model.clone(), State::new(hyp, phi))?;
        sim.detector = BlowupDetector::from_initial(&sim.state.hyp.u, cfg.blowup_factor);
        Ok(sim)
    }

    /// Starts from a given state. Under the full model the end values of
    /// `phi` are replaced so that the end relations hold.
    pub fn from_state(net: Network, grid: GridSpec, model: Model, mut state: State) -> Result<Self> {
        state.hyp.check_shape(&grid)?;
        let scheme = HyperbolicScheme::roe(&net, &grid);
        let cn = match model {
            Model::Full => {
                let cn = CnSystem::assemble(&net, &grid)?;
                cn.impose_end_relations(&mut state.phi)?;
                Some(cn)
            }
            _ => None,
        };
        let lambda: Vec<f64> = net.arcs().iter().map(|a| a.lambda).collect();
        let mut warnings = Vec::new();
        if !grid.is_consistent() {
            warnings.push(format!(
                "Courant number {} differs from 1/2; node conditions are not consistent",
                grid.cfl
            ));
        }
        for (arc, g) in net.arcs().iter().zip(&grid.arcs) {
            if !check_monotonicity(g.h, grid.k, arc.lambda) {
                warnings.push(format!(
                    "arc {}: h = {}, k = {} violates the monotonicity bounds",
                    arc.id, g.h, grid.k
                ));
            }
        }
        let detector = BlowupDetector::from_initial(&state.hyp.u, crate::diagnostics::BLOWUP_FACTOR);
        let mut sim = Simulation {
            f: grid.zeros(),
            next: state.clone(),
            state,
            net,
            grid,
            scheme,
            cn,
            model,
            lambda,
            detector,
            warnings,
        };
        sim.update_source();
        Ok(sim)
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn source(&self) -> &[Vec<f64>] {
        &self.f
    }

    pub fn set_blowup_factor(&mut self, factor: f64) {
        self.detector = BlowupDetector::from_initial(&self.state.hyp.u, factor);
    }

    fn update_source(&mut self) {
        let u = &self.state.hyp.u;
        match &self.model {
            Model::Full => network_source(&self.state.phi, u, &self.grid, &mut self.f),
            Model::Simplified { alpha } => {
                for (i, f) in self.f.iter_mut().enumerate() {
                    for (fj, uj) in f.iter_mut().zip(&u[i]) {
                        *fj = alpha[i] * uj;
                    }
                }
            }
            Model::Linear => {}
        }
    }

    /// Advances one step and returns the steady residual of that step.
    pub fn step(&mut self) -> Result<f64> {
        self.scheme
            .step_into(&self.state.hyp, &self.f, &mut self.next.hyp);
        if let Some(cn) = &self.cn {
            cn.phi_step_into(
                &self.state.phi,
                &self.state.hyp.u,
                &self.next.hyp.u,
                &mut self.next.phi,
            )?;
        }
        let residual = steady_residual(&self.state, &self.next, self.grid.k);
        std::mem::swap(&mut self.state, &mut self.next);
        self.update_source();
        Ok(residual)
    }

    /// Runs to `t_final`, a steady state or blow-up. `on_snapshot` sees the
    /// initial state, every `snapshot_every` time units and the final state.
    pub fn run(
        &mut self,
        cfg: &RunConfig,
        on_snapshot: &mut dyn FnMut(&State),
    ) -> Result<RunSummary> {
        let k = self.grid.k;
        let total = cfg.steps();
        let every = |dt: f64| ((dt / k).round() as u64).max(1);
        let snap_every = cfg.snapshot_every.map(every);
        let diag_every = every(
            cfg.diagnostics_every
                .unwrap_or(cfg.t_final / DEFAULT_SAMPLES as f64),
        );
        let initial_mass = discrete_mass(&self.state.hyp.u, &self.grid);
        let mass_scale = if initial_mass != 0.0 { initial_mass.abs() } else { 1.0 };
        let mut records = vec![self.record(false, false)];
        on_snapshot(&self.state);

        let mut termination = Termination::Completed;
        let mut blowup = None;
        let mut max_drift: f64 = 0.0;
        let mut residual = f64::NAN;
        let mut last_snap = 0;
        while self.state.hyp.step < total {
            residual = self.step()?;
            let n = self.state.hyp.step;
            if let Some(report) = self.detector.check(&self.state) {
                blowup = Some(report);
                termination = Termination::Blowup;
                records.push(self.record(false, true));
                break;
            }
            let mass = discrete_mass(&self.state.hyp.u, &self.grid);
            max_drift = max_drift.max((mass - initial_mass).abs() / mass_scale);
            let steady = cfg.steady_tol.is_some_and(|tol| residual < tol);
            if steady || n.is_multiple_of(diag_every) || n == total {
                records.push(self.record(steady, false));
            }
            if snap_every.is_some_and(|s| n.is_multiple_of(s)) {
                on_snapshot(&self.state);
                last_snap = n;
            }
            if steady {
                termination = Termination::Steady;
                break;
            }
        }
        if last_snap != self.state.hyp.step {
            on_snapshot(&self.state);
        }
        let mean = initial_mass / self.net.total_length();
        Ok(RunSummary {
            termination,
            steps: self.state.hyp.step,
            final_time: self.state.time(),
            initial_mass,
            max_mass_drift: max_drift,
            last_residual: residual,
            regime: classify_regime(blowup.is_some(), &self.state.hyp.u, mean),
            blowup,
            records,
        })
    }

    fn record(&self, steady: bool, blowup: bool) -> DiagnosticsRecord {
        DiagnosticsRecord::measure(&self.state, &self.grid, &self.lambda, steady, blowup)
    }
}

/// Builds and runs a configuration without snapshots.
pub fn run_config(cfg: &RunConfig) -> Result<(Simulation, RunSummary)> {
    let mut sim = Simulation::new(cfg)?;
    let summary = sim.run(cfg, &mut |_| {})?;
    Ok((sim, summary))
}
