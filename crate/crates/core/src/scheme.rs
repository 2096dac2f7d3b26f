//! Second-order asymptotic-high-order (AHO) stepper for the hyperbolic part
//!
//! ```text
//! u_t + v_x = 0
//! v_t + lambda^2 u_x = f - v
//! ```
//!
//! written in `(u, v)` variables on every arc, with no-flux outer closures
//! and node closures that conserve the discrete total mass exactly.
//!
//! One step runs, in order: interior points, outer boundary ends, then every
//! node (outgoing characteristics from time-`n` data first, transmitted
//! characteristics second).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::network::{Attachment, End, Network};

/// Stencil weights of an AHO scheme in `u`-`v` variables, indexed by
/// `l + 1` for the offsets `l = -1, 0, 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeCoefficients {
    pub beta_uu: [f64; 3],
    pub beta_uv: [f64; 3],
    pub beta_vu: [f64; 3],
    pub beta_vv: [f64; 3],
    pub gamma_u: [f64; 3],
    pub gamma_v: [f64; 3],
}

/// 2x2 matrix, row major.
pub type Mat2 = [[f64; 2]; 2];

/// Source stencil `B^l` of the Roe scheme acting on `(u-, u+)`, for `l = -1, 0, 1`.
pub const ROE_B: [Mat2; 3] = [
    [[0.0, 0.0], [0.25, -0.25]],
    [[-0.25, 0.25], [0.25, -0.25]],
    [[-0.25, 0.25], [0.0, 0.0]],
];

/// Forcing stencil `D^l` of the Roe scheme, for `l = -1, 0, 1`.
pub const ROE_D: [Mat2; 3] = [
    [[0.0, 0.0], [0.0, 0.5]],
    [[0.5, 0.0], [0.0, 0.5]],
    [[0.5, 0.0], [0.0, 0.0]],
];

const L_MINUS: usize = 0;
const L_ZERO: usize = 1;
const L_PLUS: usize = 2;

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

impl SchemeCoefficients {
    /// Transforms characteristic-variable stencils `B^l`, `D^l` into `u`-`v`
    /// weights through `R M R^-1` with `R = ((1, 1), (-lambda, lambda))`.
    pub fn from_characteristic(lambda: f64, b: &[Mat2; 3], d: &[Mat2; 3]) -> Self {
        let r = [[1.0, 1.0], [-lambda, lambda]];
        let r_inv = [
            [0.5, -0.5 / lambda],
            [0.5, 0.5 / lambda],
        ];
        let mut c = SchemeCoefficients {
            beta_uu: [0.0; 3],
            beta_uv: [0.0; 3],
            beta_vu: [0.0; 3],
            beta_vv: [0.0; 3],
            gamma_u: [0.0; 3],
            gamma_v: [0.0; 3],
        };
        for l in 0..3 {
            let tb = mul(&mul(&r, &b[l]), &r_inv);
            c.beta_uu[l] = 2.0 * tb[0][0];
            c.beta_uv[l] = 2.0 * lambda * tb[0][1];
            c.beta_vu[l] = 2.0 * tb[1][0] / lambda;
            c.beta_vv[l] = 2.0 * tb[1][1];
            let td = mul(&mul(&r, &d[l]), &r_inv);
            c.gamma_u[l] = 2.0 * lambda * td[0][1];
            c.gamma_v[l] = 2.0 * td[1][1];
        }
        c
    }

    /// Node closure is second-order accurate.
    pub fn satisfies_node_second_order(&self) -> bool {
        self.beta_uu[L_PLUS] == self.beta_uu[L_MINUS]
            && self.beta_uv[L_PLUS] - self.beta_uv[L_MINUS] == 1.0
            && self.gamma_u[L_MINUS] - self.gamma_u[L_PLUS] == 1.0
    }

    /// Node closure is third-order accurate on stationary solutions.
    pub fn satisfies_node_stationary_third_order(&self) -> bool {
        self.beta_uu[L_PLUS] == 0.0
            && self.beta_uu[L_MINUS] == 0.0
            && self.beta_uv[L_PLUS] == 0.5
            && self.beta_uv[L_MINUS] == -0.5
            && self.gamma_u[L_PLUS] == -0.5
            && self.gamma_u[L_MINUS] == 0.5
    }
}

/// Roe weights. They do not depend on `lambda` in the normalization used
/// here, so they are returned as exact constants.
pub fn roe_aho_coefficients(lambda: f64) -> SchemeCoefficients {
    debug_assert!(lambda > 0.0);
    SchemeCoefficients {
        beta_uu: [0.0, 0.0, 0.0],
        beta_uv: [-0.5, 0.0, 0.5],
        beta_vu: [0.0, 0.0, 0.0],
        beta_vv: [-0.5, -1.0, -0.5],
        gamma_u: [0.5, 0.0, -0.5],
        gamma_v: [0.5, 1.0, 0.5],
    }
}

/// Monotonicity of the Roe AHO scheme: `h <= 4 lambda` and
/// `k <= 4h / (h + 4 lambda)`.
pub fn check_monotonicity(h: f64, k: f64, lambda: f64) -> bool {
    h <= 4.0 * lambda && k <= 4.0 * h / (h + 4.0 * lambda)
}

/// Cell density `u` and flux `v` on every arc at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperbolicState {
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub step: u64,
    pub time: f64,
}

impl HyperbolicState {
    pub fn zeros(grid: &GridSpec) -> Self {
        HyperbolicState {
            u: grid.zeros(),
            v: grid.zeros(),
            step: 0,
            time: 0.0,
        }
    }

    pub fn from_arrays(u: Vec<Vec<f64>>, v: Vec<Vec<f64>>) -> Self {
        HyperbolicState {
            u,
            v,
            step: 0,
            time: 0.0,
        }
    }

    /// `(u-, u+)` at point `j` of arc `i`.
    pub fn riemann(&self, i: usize, j: usize, lambda: f64) -> (f64, f64) {
        to_riemann(self.u[i][j], self.v[i][j], lambda)
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).flatten().all(|x| x.is_finite())
    }

    pub fn check_shape(&self, grid: &GridSpec) -> Result<()> {
        let ok = self.u.len() == grid.arcs.len()
            && self.v.len() == grid.arcs.len()
            && grid
                .arcs
                .iter()
                .enumerate()
                .all(|(i, g)| self.u[i].len() == g.points() && self.v[i].len() == g.points());
        if ok {
            Ok(())
        } else {
            Err(Error::Config("state does not match the grid".into()))
        }
    }
}

/// `(u-, u+) = ((u - v/lambda)/2, (u + v/lambda)/2)`
pub fn to_riemann(u: f64, v: f64, lambda: f64) -> (f64, f64) {
    let w = v / lambda;
    (0.5 * (u - w), 0.5 * (u + w))
}

/// `(u, v) = (u- + u+, lambda (u+ - u-))`
pub fn from_riemann(minus: f64, plus: f64, lambda: f64) -> (f64, f64) {
    (minus + plus, lambda * (plus - minus))
}

fn stencil(w: &[f64], j: usize, c: &[f64; 3]) -> f64 {
    c[L_MINUS] * w[j - 1] + c[L_ZERO] * w[j] + c[L_PLUS] * w[j + 1]
}

/// Interior update of one arc, `j = 1..=M`. End entries of the output are
/// left untouched.
#[allow(clippy::too_many_arguments)]
pub fn interior_update(
    u: &[f64],
    v: &[f64],
    f: &[f64],
    c: &SchemeCoefficients,
    lambda: f64,
    h: f64,
    k: f64,
    u_new: &mut [f64],
    v_new: &mut [f64],
) {
    let m = u.len() - 2;
    let adv = k / (2.0 * h);
    let visc = lambda * k / (2.0 * h);
    let half_k = 0.5 * k;
    for j in 1..=m {
        u_new[j] = u[j] - adv * (v[j + 1] - v[j - 1])
            + visc * (u[j + 1] - 2.0 * u[j] + u[j - 1])
            + half_k
                * (stencil(u, j, &c.beta_uu)
                    + (stencil(v, j, &c.beta_uv) + stencil(f, j, &c.gamma_u)) / lambda);
        v_new[j] = v[j] - lambda * lambda * adv * (u[j + 1] - u[j - 1])
            + visc * (v[j + 1] - 2.0 * v[j] + v[j - 1])
            + half_k
                * (lambda * stencil(u, j, &c.beta_vu)
                    + stencil(v, j, &c.beta_vv)
                    + stencil(f, j, &c.gamma_v));
    }
}

/// Density at a no-flux outer end chosen so that the arc's contribution to
/// the discrete mass balance cancels.
#[allow(clippy::too_many_arguments)]
pub fn outer_density(
    u: &[f64],
    v: &[f64],
    f: &[f64],
    c: &SchemeCoefficients,
    lambda: f64,
    h: f64,
    k: f64,
    end: End,
) -> f64 {
    let (bm, bp) = (L_MINUS, L_PLUS);
    match end {
        End::Left => {
            let (u0, u1, v0, v1, f0, f1) = (u[0], u[1], v[0], v[1], f[0], f[1]);
            (1.0 - lambda * k / h - k * c.beta_uu[bm]) * u0
                + k * (lambda / h + c.beta_uu[bp]) * u1
                - k * (1.0 / h - c.beta_uv[bp] / lambda) * v1
                - k * (1.0 / h + c.beta_uv[bm] / lambda) * v0
                + k / lambda * (c.gamma_u[bp] * f1 - c.gamma_u[bm] * f0)
        }
        End::Right => {
            let e = u.len() - 1;
            let (ue, ui, ve, vi, fe, fi) = (u[e], u[e - 1], v[e], v[e - 1], f[e], f[e - 1]);
            (1.0 - lambda * k / h - k * c.beta_uu[bp]) * ue
                + k * (lambda / h + c.beta_uu[bm]) * ui
                + k * (1.0 / h + c.beta_uv[bm] / lambda) * vi
                + k * (1.0 / h - c.beta_uv[bp] / lambda) * ve
                - k / lambda * (c.gamma_u[bp] * fe - c.gamma_u[bm] * fi)
        }
    }
}

/// Outgoing characteristic at a node end before normalization: `u+` at
/// `x = L` of an incoming arc, `u-` at `x = 0` of an outgoing arc. The
/// node value is this times `h_i / (h_i + sum_j h_j xi_ji)`.
#[allow(clippy::too_many_arguments)]
pub fn node_outgoing_characteristic(
    u: &[f64],
    v: &[f64],
    f: &[f64],
    c: &SchemeCoefficients,
    lambda: f64,
    h: f64,
    k: f64,
    end: End,
) -> f64 {
    let (bm, bp) = (L_MINUS, L_PLUS);
    let nu2 = 2.0 * k * lambda / h;
    match end {
        End::Right => {
            let e = u.len() - 1;
            let (me, pe) = to_riemann(u[e], v[e], lambda);
            let (mi, pi) = to_riemann(u[e - 1], v[e - 1], lambda);
            pe * (1.0 - k * c.beta_uu[bp] - k * c.beta_uv[bp])
                + me * (1.0 - nu2 - k * c.beta_uu[bp] + k * c.beta_uv[bp])
                + k * pi * (2.0 * lambda / h + c.beta_uu[bm] + c.beta_uv[bm])
                + k * mi * (c.beta_uu[bm] - c.beta_uv[bm])
                - k / lambda * (c.gamma_u[bp] * f[e] - c.gamma_u[bm] * f[e - 1])
        }
        End::Left => {
            let (m0, p0) = to_riemann(u[0], v[0], lambda);
            let (m1, p1) = to_riemann(u[1], v[1], lambda);
            p0 * (1.0 - nu2 - k * c.beta_uu[bm] - k * c.beta_uv[bm])
                + m0 * (1.0 - k * c.beta_uu[bm] + k * c.beta_uv[bm])
                + k * p1 * (c.beta_uu[bp] + c.beta_uv[bp])
                + k * m1 * (2.0 * lambda / h + c.beta_uu[bp] - c.beta_uv[bp])
                + k / lambda * (c.gamma_u[bp] * f[1] - c.gamma_u[bm] * f[0])
        }
    }
}

fn end_index(points: usize, end: End) -> usize {
    match end {
        End::Left => 0,
        End::Right => points - 1,
    }
}

#[derive(Clone, Debug)]
struct NodeClosure {
    /// `(arc, end)` per slot.
    slots: Vec<(usize, End)>,
    xi: Vec<Vec<f64>>,
    /// `h_s / (h_s + sum_r h_r xi_rs)` per slot.
    factor: Vec<f64>,
}

/// The hyperbolic stepper bound to a network and grid.
#[derive(Clone, Debug)]
pub struct HyperbolicScheme {
    lambda: Vec<f64>,
    grid: GridSpec,
    coeffs: Vec<SchemeCoefficients>,
    ends: Vec<[Attachment; 2]>,
    nodes: Vec<NodeClosure>,
}

impl HyperbolicScheme {
    /// Roe weights on every arc.
    pub fn roe(net: &Network, grid: &GridSpec) -> Self {
        let coeffs = net
            .arcs()
            .iter()
            .map(|a| roe_aho_coefficients(a.lambda))
            .collect();
        Self::new(net, grid, coeffs)
    }

    pub fn new(net: &Network, grid: &GridSpec, coeffs: Vec<SchemeCoefficients>) -> Self {
        assert_eq!(coeffs.len(), net.n_arcs());
        assert_eq!(grid.arcs.len(), net.n_arcs());
        let ends = (0..net.n_arcs())
            .map(|i| [net.attachment(i, End::Left), net.attachment(i, End::Right)])
            .collect();
        let nodes = net
            .nodes()
            .iter()
            .enumerate()
            .map(|(p, node)| {
                let slots = net.node_slots(p).to_vec();
                let n = slots.len();
                let factor = (0..n)
                    .map(|s| {
                        let hs = grid.arcs[slots[s].0].h;
                        let inflow: f64 = (0..n)
                            .map(|r| grid.arcs[slots[r].0].h * node.xi[r][s])
                            .sum();
                        hs / (hs + inflow)
                    })
                    .collect();
                NodeClosure {
                    slots,
                    xi: node.xi.clone(),
                    factor,
                }
            })
            .collect();
        HyperbolicScheme {
            lambda: net.arcs().iter().map(|a| a.lambda).collect(),
            grid: grid.clone(),
            coeffs,
            ends,
            nodes,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coefficients(&self, arc: usize) -> &SchemeCoefficients {
        &self.coeffs[arc]
    }

    /// Interior update on every arc; boundary entries of `next` keep their
    /// previous contents.
    #[allow(clippy::needless_range_loop)]
    pub fn interior_step(&self, state: &HyperbolicState, f: &[Vec<f64>], next: &mut HyperbolicState) {
        for i in 0..self.lambda.len() {
            interior_update(
                &state.u[i],
                &state.v[i],
                &f[i],
                &self.coeffs[i],
                self.lambda[i],
                self.grid.arcs[i].h,
                self.grid.k,
                &mut next.u[i],
                &mut next.v[i],
            );
        }
    }

    /// `(u, v)` at time `n + 1` at an outer end; `v` is zero.
    pub fn outer_boundary_step(
        &self,
        state: &HyperbolicState,
        f: &[Vec<f64>],
        arc: usize,
        end: End,
    ) -> Result<(f64, f64)> {
        if self.ends[arc][end as usize] != Attachment::Outer {
            return Err(Error::Structure(format!(
                "arc index {arc}: {end:?} end is attached to a node, not an outer boundary"
            )));
        }
        let u = outer_density(
            &state.u[arc],
            &state.v[arc],
            &f[arc],
            &self.coeffs[arc],
            self.lambda[arc],
            self.grid.arcs[arc].h,
            self.grid.k,
            end,
        );
        Ok((u, 0.0))
    }

    /// Time-`n+1` values `(u, v)` at every slot of node `p`, in slot order.
    pub fn node_step(&self, state: &HyperbolicState, f: &[Vec<f64>], p: usize) -> Vec<(f64, f64)> {
        let node = &self.nodes[p];
        let n = node.slots.len();
        let outgoing: Vec<f64> = node
            .slots
            .iter()
            .zip(&node.factor)
            .map(|(&(arc, end), factor)| {
                factor
                    * node_outgoing_characteristic(
                        &state.u[arc],
                        &state.v[arc],
                        &f[arc],
                        &self.coeffs[arc],
                        self.lambda[arc],
                        self.grid.arcs[arc].h,
                        self.grid.k,
                        end,
                    )
            })
            .collect();
        (0..n)
            .map(|s| {
                let (arc, end) = node.slots[s];
                let transmitted: f64 = (0..n).map(|r| node.xi[s][r] * outgoing[r]).sum();
                let (minus, plus) = match end {
                    End::Right => (transmitted, outgoing[s]),
                    End::Left => (outgoing[s], transmitted),
                };
                from_riemann(minus, plus, self.lambda[arc])
            })
            .collect()
    }

    /// One full step. `f` holds the forcing `phi_x u` at time `n`.
    pub fn step(&self, state: &HyperbolicState, f: &[Vec<f64>]) -> HyperbolicState {
        let mut next = state.clone();
        self.step_into(state, f, &mut next);
        next
    }

    /// [`HyperbolicScheme::step`] writing into a preallocated state of the
    /// same shape.
    #[allow(clippy::needless_range_loop)]
    pub fn step_into(&self, state: &HyperbolicState, f: &[Vec<f64>], next: &mut HyperbolicState) {
        self.interior_step(state, f, next);
        for arc in 0..self.lambda.len() {
            for end in [End::Left, End::Right] {
                if self.ends[arc][end as usize] == Attachment::Outer {
                    let j = end_index(next.u[arc].len(), end);
                    let u = outer_density(
                        &state.u[arc],
                        &state.v[arc],
                        &f[arc],
                        &self.coeffs[arc],
                        self.lambda[arc],
                        self.grid.arcs[arc].h,
                        self.grid.k,
                        end,
                    );
                    next.u[arc][j] = u;
                    next.v[arc][j] = 0.0;
                }
            }
        }
        for p in 0..self.nodes.len() {
            let values = self.node_step(state, f, p);
            for (&(arc, end), (u, v)) in self.nodes[p].slots.iter().zip(values) {
                let j = end_index(next.u[arc].len(), end);
                next.u[arc][j] = u;
                next.v[arc][j] = v;
            }
        }
        next.step = state.step + 1;
        next.time = next.step as f64 * self.grid.k;
    }
}
