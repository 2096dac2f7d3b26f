//! Analytic stationary states.
//!
//! Simplified model (`phi_x = alpha_i` on each arc): with zero flux the
//! density is `u_i = C_i exp(alpha_i x / lambda_i^2)`. The node values
//! `C~_i = u_i(node) / lambda_i` span the kernel of
//! `M_ij = lambda_j (xi_ij - delta_ij)` and the free scale is fixed by the mass.
//!
//! Full model: constant by arc when every node is dissipative and `a_i / b_i`
//! is common.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::network::{node_coupling_matrix, validate_dissipative, Attachment, End, Network};
use crate::state::State;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplifiedStationary {
    pub alpha: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Normalized node values, in arc order.
    pub c_tilde: Vec<f64>,
    /// `C_i`, the density at `x = 0`.
    pub amplitude: Vec<f64>,
}

impl SimplifiedStationary {
    pub fn density(&self, arc: usize, x: f64) -> f64 {
        let l = self.lambda[arc];
        self.amplitude[arc] * (self.alpha[arc] * x / (l * l)).exp()
    }

    /// Exact mass of the profiles on arcs of the given lengths.
    pub fn mass(&self, lengths: &[f64]) -> f64 {
        lengths
            .iter()
            .enumerate()
            .map(|(i, &len)| self.amplitude[i] * profile_integral(self.alpha[i], self.lambda[i], len))
            .sum()
    }

    /// `(u, v)` at the grid points.
    pub fn sample(&self, grid: &GridSpec) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let u = grid
            .arcs
            .iter()
            .enumerate()
            .map(|(i, g)| (0..g.points()).map(|j| self.density(i, g.x(j))).collect())
            .collect();
        (u, grid.zeros())
    }
}

/// `int_0^L exp(alpha x / lambda^2) dx`
fn profile_integral(alpha: f64, lambda: f64, length: f64) -> f64 {
    let s = alpha / (lambda * lambda);
    if s == 0.0 {
        length
    } else {
        (s * length).exp_m1() / s
    }
}

/// Stationary profiles of the simplified model on a single node whose arcs
/// all end at the outer boundary on their other side.
pub fn simplified_stationary(net: &Network, alpha: &[f64], mu0: f64) -> Result<SimplifiedStationary> {
    let n = net.n_arcs();
    if alpha.len() != n {
        return Err(Error::Config(format!(
            "expected {n} values of alpha, got {}",
            alpha.len()
        )));
    }
    if net.nodes().len() != 1 {
        return Err(Error::SteadyState(format!(
            "closed form needs exactly one node, network has {}",
            net.nodes().len()
        )));
    }
    for (i, arc) in net.arcs().iter().enumerate() {
        if alpha[i].abs() >= arc.lambda {
            return Err(Error::Domain {
                what: "|alpha|",
                value: alpha[i].abs(),
                lo: 0.0,
                hi: arc.lambda,
            });
        }
        let outer = [End::Left, End::Right]
            .iter()
            .filter(|&&e| net.attachment(i, e) == Attachment::Outer)
            .count();
        if outer != 1 {
            return Err(Error::SteadyState(format!(
                "arc {} must join the node to the outer boundary",
                arc.id
            )));
        }
    }
    let node = &net.nodes()[0];
    let slots = net.node_slots(0);
    let m = node_coupling_matrix(node, net.arcs())?;
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sigma = &svd.singular_values;
    let scale = sigma.max().max(1.0);
    let null = sigma.iter().filter(|&&s| s <= crate::network::KERNEL_TOL * scale).count();
    if null != 1 {
        return Err(Error::SteadyState(format!(
            "kernel of the node matrix has dimension {null}, expected 1"
        )));
    }
    let (min_idx, _) = sigma
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let mut kernel: Vec<f64> = v_t.row(min_idx).iter().copied().collect();
    if kernel.iter().sum::<f64>() < 0.0 {
        kernel.iter_mut().for_each(|c| *c = -*c);
    }
    if kernel.iter().any(|&c| c < -1e-12) {
        return Err(Error::SteadyState(
            "kernel vector has mixed signs; no positive stationary density".into(),
        ));
    }

    // amplitude per unit kernel scale, in arc order
    let mut unit_amp = vec![0.0; n];
    let mut unit_tilde = vec![0.0; n];
    for (s, &(arc, end)) in slots.iter().enumerate() {
        let a = net.arc(arc);
        let node_value = a.lambda * kernel[s];
        unit_tilde[arc] = kernel[s];
        unit_amp[arc] = match end {
            End::Right => node_value * (-alpha[arc] * a.length / (a.lambda * a.lambda)).exp(),
            End::Left => node_value,
        };
    }
    let unit_mass: f64 = net
        .arcs()
        .iter()
        .enumerate()
        .map(|(i, a)| unit_amp[i] * profile_integral(alpha[i], a.lambda, a.length))
        .sum();
    let t = mu0 / unit_mass;
    Ok(SimplifiedStationary {
        alpha: alpha.to_vec(),
        lambda: net.arcs().iter().map(|a| a.lambda).collect(),
        c_tilde: unit_tilde.iter().map(|c| c * t).collect(),
        amplitude: unit_amp.iter().map(|c| c * t).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstantSteadyState {
    pub u: f64,
    pub v: f64,
    pub phi: f64,
}

/// The constant-by-arc state of the full model carrying mass `mu0`.
pub fn constant_steady_state(net: &Network, mu0: f64) -> Result<ConstantSteadyState> {
    for node in net.nodes() {
        let report = validate_dissipative(node);
        if !report.dissipative {
            return Err(Error::SteadyState(format!(
                "node {} is not dissipative (row sums {:?}); no non-trivial constant stationary solution",
                node.id, report.row_sums
            )));
        }
    }
    let first = &net.arcs()[0];
    if first.degradation <= 0.0 {
        return Err(Error::SteadyState(format!(
            "arc {}: degradation must be positive",
            first.id
        )));
    }
    let ratio = first.production / first.degradation;
    for arc in net.arcs() {
        let r = arc.production / arc.degradation;
        if !(arc.degradation > 0.0 && (r - ratio).abs() <= 1e-12 * ratio.abs().max(1.0)) {
            return Err(Error::SteadyState(format!(
                "a/b differs between arcs ({} on arc {}, {} on arc {})",
                ratio, first.id, r, arc.id
            )));
        }
    }
    let u = mu0 / net.total_length();
    Ok(ConstantSteadyState {
        u,
        v: 0.0,
        phi: ratio * u,
    })
}

/// `max |w^{n+1} - w^n| / k` over `u`, `v` and `phi`.
pub fn steady_residual(before: &State, after: &State, k: f64) -> f64 {
    let fields = [
        (&before.hyp.u, &after.hyp.u),
        (&before.hyp.v, &after.hyp.v),
        (&before.phi, &after.phi),
    ];
    let mut worst: f64 = 0.0;
    for (a, b) in fields {
        for (x, y) in a.iter().zip(b) {
            assert_eq!(x.len(), y.len());
            for (p, q) in x.iter().zip(y) {
                worst = worst.max((q - p).abs());
            }
        }
    }
    worst / k
}
