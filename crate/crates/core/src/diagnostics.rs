//! Mass, energy, error norms, orders and run classification.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::state::State;

/// Default blow-up threshold as a multiple of the initial `max |u|`.
pub const BLOWUP_FACTOR: f64 = 1e6;
/// A boundary spike exceeds this multiple of the mean density.
pub const SPIKE_FACTOR: f64 = 10.0;
/// ... and sits within this many cells of an arc end.
pub const SPIKE_CELLS: usize = 2;

/// `h (w_0 / 2 + w_1 + ... + w_M + w_{M+1} / 2)`
pub fn trapezoid(w: &[f64], h: f64) -> f64 {
    let n = w.len();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return 0.0;
    }
    let inner: f64 = w[1..n - 1].iter().sum();
    h * (0.5 * (w[0] + w[n - 1]) + inner)
}

/// Total mass over the network.
pub fn discrete_mass(u: &[Vec<f64>], grid: &GridSpec) -> f64 {
    u.iter().zip(&grid.arcs).map(|(u, g)| trapezoid(u, g.h)).sum()
}

/// `sqrt(sum_i int (u^2 + v^2 / lambda_i^2))`, trapezoid in space.
pub fn discrete_energy(u: &[Vec<f64>], v: &[Vec<f64>], lambda: &[f64], grid: &GridSpec) -> f64 {
    let mut total = 0.0;
    for (i, g) in grid.arcs.iter().enumerate() {
        let l2 = lambda[i] * lambda[i];
        let density: Vec<f64> = u[i]
            .iter()
            .zip(&v[i])
            .map(|(u, v)| u * u + v * v / l2)
            .collect();
        total += trapezoid(&density, g.h);
    }
    total.sqrt()
}

/// L1 distance between a solution on step `h` and one on `h / 2`,
/// compared at the shared points `x_l = l h`, `l = 0..=M`.
pub fn l1_self_convergence_error(coarse: &[f64], fine: &[f64], h: f64) -> Result<f64> {
    if coarse.len() < 2 || fine.len() != 2 * coarse.len() - 1 {
        return Err(Error::Config(format!(
            "fine grid with {} points is not a 2-refinement of {} points",
            fine.len(),
            coarse.len()
        )));
    }
    let m = coarse.len() - 2;
    Ok(h * (0..=m).map(|l| (coarse[l] - fine[2 * l]).abs()).sum::<f64>())
}

/// `log2(e(h) / e(h/2))`. A vanishing fine error is reported as infinite order.
pub fn convergence_order(e_h: f64, e_half: f64) -> f64 {
    if e_half == 0.0 {
        return f64::INFINITY;
    }
    (e_h / e_half).log2()
}

/// Minimum of the per-arc orders.
pub fn network_order(e_h: &[f64], e_half: &[f64]) -> f64 {
    e_h.iter()
        .zip(e_half)
        .map(|(&a, &b)| convergence_order(a, b))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlowupReport {
    pub time: f64,
    /// Arc index (not id).
    pub arc: usize,
    pub index: usize,
    pub value: f64,
}

/// Fires on a non-finite density or on `|u|` above an absolute threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlowupDetector {
    pub threshold: f64,
}

impl BlowupDetector {
    /// Threshold `factor * max |u_0|`; zero data uses `factor` itself.
    pub fn from_initial(u0: &[Vec<f64>], factor: f64) -> Self {
        let max = max_abs(u0);
        BlowupDetector {
            threshold: factor * if max > 0.0 { max } else { 1.0 },
        }
    }

    pub fn check(&self, state: &State) -> Option<BlowupReport> {
        detect_blowup(&state.hyp.u, state.time(), self.threshold)
            .or_else(|| {
                // a non-finite v or phi will poison u on the next step anyway
                (!state.is_finite()).then(|| BlowupReport {
                    time: state.time(),
                    arc: 0,
                    index: 0,
                    value: f64::NAN,
                })
            })
    }
}

pub fn detect_blowup(u: &[Vec<f64>], time: f64, threshold: f64) -> Option<BlowupReport> {
    for (arc, w) in u.iter().enumerate() {
        for (index, &value) in w.iter().enumerate() {
            if !value.is_finite() || value.abs() > threshold {
                return Some(BlowupReport {
                    time,
                    arc,
                    index,
                    value,
                });
            }
        }
    }
    None
}

fn max_abs(u: &[Vec<f64>]) -> f64 {
    u.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Blowup,
    BoundarySpike,
    Stable,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Blowup => "blowup",
            Regime::BoundarySpike => "boundary_spike",
            Regime::Stable => "stable",
        })
    }
}

/// Classifies a finished run from its final density.
///
/// `mean` is the network-mean density `mu0 / sum L_i`.
pub fn classify_regime(blowup: bool, u: &[Vec<f64>], mean: f64) -> Regime {
    if blowup {
        return Regime::Blowup;
    }
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for (arc, w) in u.iter().enumerate() {
        for (j, &x) in w.iter().enumerate() {
            if x > best.0 {
                best = (x, arc, j);
            }
        }
    }
    let (max, arc, j) = best;
    let last = u.get(arc).map_or(0, |w| w.len().saturating_sub(1));
    let near_end = j <= SPIKE_CELLS || last - j <= SPIKE_CELLS;
    if mean > 0.0 && max > SPIKE_FACTOR * mean && near_end {
        Regime::BoundarySpike
    } else {
        Regime::Stable
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub total_mass: f64,
    pub energy: f64,
    pub max_abs_u: f64,
    pub min_u: f64,
    pub steady: bool,
    pub blowup: bool,
}

impl DiagnosticsRecord {
    pub fn measure(state: &State, grid: &GridSpec, lambda: &[f64], steady: bool, blowup: bool) -> Self {
        let u = &state.hyp.u;
        DiagnosticsRecord {
            t: state.time(),
            total_mass: discrete_mass(u, grid),
            energy: discrete_energy(u, &state.hyp.v, lambda, grid),
            max_abs_u: max_abs(u),
            min_u: u.iter().flatten().fold(f64::INFINITY, |m, &x| m.min(x)),
            steady,
            blowup,
        }
    }
}
