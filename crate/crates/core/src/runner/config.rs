//! JSON run configuration and initial data.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ArcGrid, GridSpec, CONSISTENT_CFL};
use crate::network::{ArcId, Network, NetworkSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    /// Chemoattractant evolved, `f = phi_x u`.
    Full,
    /// `f = alpha_i u` with one `alpha` per arc in arc-id order; `phi` is frozen.
    Simplified { alpha: Vec<f64> },
    /// `f = 0`; `phi` is frozen.
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant {
        c0: f64,
    },
    /// `c0 (1 + amplitude cos(2 pi periods x / L))`
    CosinePerturbation {
        c0: f64,
        amplitude: f64,
        #[serde(default = "one")]
        periods: u32,
    },
    /// `c0 (1 + amplitude exp(-(x - center)^2 / (2 width^2)))`
    GaussianBump {
        c0: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
}

fn one() -> u32 {
    1
}

impl Profile {
    pub fn density(&self, x: f64, length: f64) -> f64 {
        match *self {
            Profile::Constant { c0 } => c0,
            Profile::CosinePerturbation {
                c0,
                amplitude,
                periods,
            } => c0 * (1.0 + amplitude * (2.0 * PI * periods as f64 * x / length).cos()),
            Profile::GaussianBump {
                c0,
                amplitude,
                center,
                width,
            } => {
                let z = (x - center) / width;
                c0 * (1.0 + amplitude * (-0.5 * z * z).exp())
            }
        }
    }

    /// Exact integral over `[0, length]`.
    pub fn mass(&self, length: f64) -> f64 {
        match *self {
            Profile::Constant { c0 } => c0 * length,
            Profile::CosinePerturbation { c0, .. } => c0 * length,
            Profile::GaussianBump {
                c0,
                amplitude,
                center,
                width,
            } => {
                let s = std::f64::consts::SQRT_2 * width;
                let bump = 0.5 * (PI.sqrt() * s)
                    * (libm::erf((length - center) / s) + libm::erf(center / s));
                c0 * (length + amplitude * bump)
            }
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match *self {
            Profile::Constant { c0 } if !(c0 >= 0.0 && c0.is_finite()) => {
                bad(format!("c0 must be non-negative, got {c0}"))
            }
            Profile::CosinePerturbation { c0, amplitude, .. }
                if !(c0 >= 0.0 && c0.is_finite() && amplitude.abs() < 1.0) =>
            {
                bad(format!(
                    "cosine perturbation needs c0 >= 0 and |amplitude| < 1, got c0 = {c0}, amplitude = {amplitude}"
                ))
            }
            Profile::GaussianBump {
                c0,
                amplitude,
                width,
                ..
            } if !(c0 >= 0.0 && amplitude > -1.0 && width > 0.0) => bad(format!(
                "gaussian bump needs c0 >= 0, amplitude > -1, width > 0, got {c0}, {amplitude}, {width}"
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiRule {
    EqualToU,
    Constant { level: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcProfile {
    pub arc: ArcId,
    pub profile: Profile,
}

/// `v` always starts at zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    /// Profile of arcs not listed in `arcs`.
    pub default: Profile,
    #[serde(default)]
    pub arcs: Vec<ArcProfile>,
    #[serde(default = "equal_to_u")]
    pub phi: PhiRule,
}

fn equal_to_u() -> PhiRule {
    PhiRule::EqualToU
}

impl InitialCondition {
    pub fn uniform(profile: Profile) -> Self {
        InitialCondition {
            default: profile,
            arcs: vec![],
            phi: PhiRule::EqualToU,
        }
    }

    pub fn profile(&self, id: ArcId) -> &Profile {
        self.arcs
            .iter()
            .find(|a| a.arc == id)
            .map_or(&self.default, |a| &a.profile)
    }

    pub fn check(&self, net: &Network) -> Result<()> {
        self.default.check()?;
        for a in &self.arcs {
            net.arc_index(a.arc)?;
            a.profile.check()?;
        }
        Ok(())
    }

    /// `(u, phi)` sampled on the grid.
    pub fn sample(&self, net: &Network, grid: &GridSpec) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let u: Vec<Vec<f64>> = net
            .arcs()
            .iter()
            .zip(&grid.arcs)
            .map(|(arc, g): (_, &ArcGrid)| {
                let p = self.profile(arc.id);
                (0..g.points()).map(|j| p.density(g.x(j), arc.length)).collect()
            })
            .collect();
        let phi = match self.phi {
            PhiRule::EqualToU => u.clone(),
            PhiRule::Constant { level } => grid.arcs.iter().map(|g| vec![level; g.points()]).collect(),
        };
        (u, phi)
    }

    /// Exact mass of the formula.
    pub fn mass(&self, net: &Network) -> f64 {
        net.arcs()
            .iter()
            .map(|a| self.profile(a.id).mass(a.length))
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub name: String,
    pub network: NetworkSpec,
    /// Time step.
    pub k: f64,
    /// Courant number `k lambda / h`.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_final: f64,
    pub model: Model,
    pub initial: InitialCondition,
    /// Snapshot interval in time units; `None` keeps only the final state.
    #[serde(default)]
    pub snapshot_every: Option<f64>,
    /// Diagnostics sampling interval; `None` samples `DEFAULT_SAMPLES` times.
    #[serde(default)]
    pub diagnostics_every: Option<f64>,
    /// Blow-up when `max |u|` exceeds this multiple of the initial maximum.
    #[serde(default = "default_blowup")]
    pub blowup_factor: f64,
    /// Stop once `max |w^{n+1} - w^n| / k` falls below this; `None` never stops.
    #[serde(default = "default_steady")]
    pub steady_tol: Option<f64>,
}

pub const DEFAULT_SAMPLES: usize = 500;

fn default_cfl() -> f64 {
    CONSISTENT_CFL
}

fn default_blowup() -> f64 {
    crate::diagnostics::BLOWUP_FACTOR
}

fn default_steady() -> Option<f64> {
    Some(1e-8)
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Number of time steps to reach `t_final`.
    pub fn steps(&self) -> u64 {
        (self.t_final / self.k).round() as u64
    }

    /// Builds and validates the network and checks the model and initial data.
    pub fn network(&self) -> Result<Network> {
        let net = Network::new(self.network.clone())?;
        net.validate()?;
        if let Model::Simplified { alpha } = &self.model {
            if alpha.len() != net.n_arcs() {
                return Err(Error::Config(format!(
                    "simplified model needs {} values of alpha, got {}",
                    net.n_arcs(),
                    alpha.len()
                )));
            }
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!(
                "final time must be non-negative, got {}",
                self.t_final
            )));
        }
        if self.blowup_factor.is_nan() || self.blowup_factor <= 1.0 {
            return Err(Error::Config(format!(
                "blow-up factor must exceed 1, got {}",
                self.blowup_factor
            )));
        }
        self.initial.check(&net)?;
        Ok(net)
    }
}
