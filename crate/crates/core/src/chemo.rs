//! Chemoattractant on the network.
//!
//! `phi_t - D phi_xx = a u - b phi` is advanced by Crank-Nicolson with
//! centered differences. Each arc end carries one algebraic row: the
//! second-order one-sided Neumann relation at outer ends and the
//! Kedem-Katchalsky relation
//!
//! ```text
//! eta phi_end = 4/3 phi_adj - 1/3 phi_adj2 + 2/3 (h/D) sum_j kappa_ij phi_j,end
//! eta = 1 + 2/3 (h/D) sum_j kappa_ij
//! ```
//!
//! at nodes. Both are imposed at the new time level, so one linear system
//! couples every arc.
//!
//! The system is solved by static condensation: interior points of an arc
//! form a constant tridiagonal block (factored once), which leaves a small
//! dense system in the `2N` end values (LU-factored once).

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::network::{Attachment, End, Network};

/// Thomas factorization of a constant symmetric tridiagonal matrix.
#[derive(Clone, Debug)]
struct Tridiagonal {
    off: f64,
    /// Modified super-diagonal `c'_j`.
    upper: Vec<f64>,
    /// `1 / (diag - off c'_{j-1})`.
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    fn new(m: usize, diag: f64, off: f64) -> Self {
        let mut upper = Vec::with_capacity(m);
        let mut inv_pivot = Vec::with_capacity(m);
        let mut prev = 0.0;
        for _ in 0..m {
            let pivot = diag - off * prev;
            let inv = 1.0 / pivot;
            prev = off * inv;
            upper.push(prev);
            inv_pivot.push(inv);
        }
        Tridiagonal {
            off,
            upper,
            inv_pivot,
        }
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let m = x.len();
        x[0] *= self.inv_pivot[0];
        for j in 1..m {
            x[j] = (x[j] - self.off * x[j - 1]) * self.inv_pivot[j];
        }
        for j in (0..m - 1).rev() {
            x[j] -= self.upper[j] * x[j + 1];
        }
    }
}

#[derive(Clone, Debug)]
struct ArcBlock {
    m: usize,
    /// `D k / (2 h^2)`
    r: f64,
    a: f64,
    b: f64,
    tri: Tridiagonal,
    /// Interior response to a unit left / right end value.
    g_left: Vec<f64>,
    g_right: Vec<f64>,
}

/// One boundary row: `eta phi_end - 4/3 phi_adj + 1/3 phi_adj2 - sum c phi_other = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryRow {
    pub eta: f64,
    /// `(reduced index of the other end, 2/3 (h/D) kappa)`.
    pub couplings: Vec<(usize, f64)>,
}

/// The time-invariant Crank-Nicolson operator of a network and grid.
#[derive(Clone, Debug)]
pub struct CnSystem {
    k: f64,
    blocks: Vec<ArcBlock>,
    /// Indexed `2 i + end`.
    rows: Vec<BoundaryRow>,
    reduced: LU<f64, Dyn, Dyn>,
    /// The reduced matrix with the interior frozen (`g = 0`), used to make
    /// initial data satisfy the end relations.
    ends_only: LU<f64, Dyn, Dyn>,
}

fn reduced_index(arc: usize, end: End) -> usize {
    2 * arc + end as usize
}

/// Builds the per-end relations of the network.
fn boundary_rows(net: &Network, grid: &GridSpec) -> Vec<BoundaryRow> {
    let mut rows = Vec::with_capacity(2 * net.n_arcs());
    for i in 0..net.n_arcs() {
        for end in [End::Left, End::Right] {
            let row = match net.attachment(i, end) {
                Attachment::Outer => BoundaryRow {
                    eta: 1.0,
                    couplings: vec![],
                },
                Attachment::Node { node, slot } => {
                    let spec = &net.nodes()[node];
                    let scale = 2.0 / 3.0 * grid.arcs[i].h / net.arc(i).diffusion;
                    let mut eta = 1.0;
                    let mut couplings = Vec::new();
                    for (r, &(other, other_end)) in net.node_slots(node).iter().enumerate() {
                        let kappa = spec.kappa(slot, r);
                        if kappa != 0.0 {
                            eta += scale * kappa;
                            couplings.push((reduced_index(other, other_end), scale * kappa));
                        }
                    }
                    BoundaryRow { eta, couplings }
                }
            };
            rows.push(row);
        }
    }
    rows
}

/// Positions of the two interior neighbours used by an end row, as
/// indices into the interior vector (`j - 1`).
fn adjacent(m: usize, end: End) -> (usize, usize) {
    match end {
        End::Left => (0, 1),
        End::Right => (m - 1, m - 2),
    }
}

impl CnSystem {
    pub fn assemble(net: &Network, grid: &GridSpec) -> Result<Self> {
        let n = net.n_arcs();
        let k = grid.k;
        let mut blocks = Vec::with_capacity(n);
        for (i, arc) in net.arcs().iter().enumerate() {
            let g = grid.arcs[i];
            if g.m < 2 {
                return Err(Error::Config(format!(
                    "arc {}: the chemoattractant stencil needs at least 2 interior points, got {}",
                    arc.id, g.m
                )));
            }
            let r = arc.diffusion * k / (2.0 * g.h * g.h);
            let diag = 1.0 + 2.0 * r + 0.5 * arc.degradation * k;
            let off = -r;
            let tri = Tridiagonal::new(g.m, diag, off);
            let mut g_left = vec![0.0; g.m];
            g_left[0] = r;
            tri.solve_in_place(&mut g_left);
            let mut g_right = vec![0.0; g.m];
            g_right[g.m - 1] = r;
            tri.solve_in_place(&mut g_right);
            blocks.push(ArcBlock {
                m: g.m,
                r,
                a: arc.production,
                b: arc.degradation,
                tri,
                g_left,
                g_right,
            });
        }
        let rows = boundary_rows(net, grid);

        let mut s = DMatrix::<f64>::zeros(2 * n, 2 * n);
        let mut e = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for (i, block) in blocks.iter().enumerate() {
            for end in [End::Left, End::Right] {
                let row = reduced_index(i, end);
                let (j1, j2) = adjacent(block.m, end);
                let spec = &rows[row];
                s[(row, row)] += spec.eta;
                e[(row, row)] += spec.eta;
                for (col, g) in [
                    (reduced_index(i, End::Left), &block.g_left),
                    (reduced_index(i, End::Right), &block.g_right),
                ] {
                    s[(row, col)] += -4.0 / 3.0 * g[j1] + 1.0 / 3.0 * g[j2];
                }
                for &(col, c) in &spec.couplings {
                    s[(row, col)] -= c;
                    e[(row, col)] -= c;
                }
            }
        }
        let reduced = s.lu();
        if !reduced.is_invertible() {
            return Err(Error::Config(
                "singular Crank-Nicolson system (degenerate parameters)".into(),
            ));
        }
        let ends_only = e.lu();
        Ok(CnSystem {
            k,
            blocks,
            rows,
            reduced,
            ends_only,
        })
    }

    pub fn boundary_row(&self, arc: usize, end: End) -> &BoundaryRow {
        &self.rows[reduced_index(arc, end)]
    }

    /// Diagonal and off-diagonal of the interior rows of an arc.
    pub fn interior_row(&self, arc: usize) -> (f64, f64) {
        let b = &self.blocks[arc];
        (1.0 + 2.0 * b.r + 0.5 * b.b * self.k, -b.r)
    }

    /// Advances `phi` from `t_n` to `t_{n+1}`; `u_old`, `u_new` are the cell
    /// densities at both levels.
    pub fn phi_step(
        &self,
        phi: &[Vec<f64>],
        u_old: &[Vec<f64>],
        u_new: &[Vec<f64>],
    ) -> Result<Vec<Vec<f64>>> {
        let mut out: Vec<Vec<f64>> = phi.to_vec();
        self.phi_step_into(phi, u_old, u_new, &mut out)?;
        Ok(out)
    }

    pub fn phi_step_into(
        &self,
        phi: &[Vec<f64>],
        u_old: &[Vec<f64>],
        u_new: &[Vec<f64>],
        out: &mut [Vec<f64>],
    ) -> Result<()> {
        let k = self.k;
        let n = self.blocks.len();
        let mut rhs = DVector::<f64>::zeros(2 * n);
        for (i, block) in self.blocks.iter().enumerate() {
            let (p, u0, u1) = (&phi[i], &u_old[i], &u_new[i]);
            let x = &mut out[i][1..=block.m];
            for (jj, xj) in x.iter_mut().enumerate() {
                let j = jj + 1;
                *xj = p[j]
                    + block.r * (p[j + 1] - 2.0 * p[j] + p[j - 1])
                    + 0.5 * k * block.a * (u1[j] + u0[j])
                    - 0.5 * k * block.b * p[j];
            }
            block.tri.solve_in_place(x);
            for end in [End::Left, End::Right] {
                let (j1, j2) = adjacent(block.m, end);
                rhs[reduced_index(i, end)] = 4.0 / 3.0 * x[j1] - 1.0 / 3.0 * x[j2];
            }
        }
        let ends = self
            .reduced
            .solve(&rhs)
            .ok_or_else(|| Error::Config("Crank-Nicolson solve failed".into()))?;
        for (i, block) in self.blocks.iter().enumerate() {
            let left = ends[reduced_index(i, End::Left)];
            let right = ends[reduced_index(i, End::Right)];
            let arc = &mut out[i];
            for ((x, gl), gr) in arc[1..=block.m].iter_mut().zip(&block.g_left).zip(&block.g_right) {
                *x += left * gl + right * gr;
            }
            arc[0] = left;
            arc[block.m + 1] = right;
        }
        Ok(())
    }

    /// Replaces the end values of `phi` so that every end relation holds,
    /// leaving interior values untouched.
    pub fn impose_end_relations(&self, phi: &mut [Vec<f64>]) -> Result<()> {
        let n = self.blocks.len();
        let mut rhs = DVector::<f64>::zeros(2 * n);
        for (i, block) in self.blocks.iter().enumerate() {
            for end in [End::Left, End::Right] {
                let (j1, j2) = adjacent(block.m, end);
                rhs[reduced_index(i, end)] =
                    4.0 / 3.0 * phi[i][j1 + 1] - 1.0 / 3.0 * phi[i][j2 + 1];
            }
        }
        let ends = self
            .ends_only
            .solve(&rhs)
            .ok_or_else(|| Error::Config("end relations are singular".into()))?;
        for (i, block) in self.blocks.iter().enumerate() {
            phi[i][0] = ends[reduced_index(i, End::Left)];
            phi[i][block.m + 1] = ends[reduced_index(i, End::Right)];
        }
        Ok(())
    }

    /// Largest residual of the end relations.
    pub fn end_residual(&self, phi: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, block) in self.blocks.iter().enumerate() {
            for end in [End::Left, End::Right] {
                let row = &self.rows[reduced_index(i, end)];
                let (j1, j2) = adjacent(block.m, end);
                let e = match end {
                    End::Left => 0,
                    End::Right => block.m + 1,
                };
                let mut res = row.eta * phi[i][e] - 4.0 / 3.0 * phi[i][j1 + 1]
                    + 1.0 / 3.0 * phi[i][j2 + 1];
                for &(col, c) in &row.couplings {
                    let (arc, end) = (col / 2, col % 2);
                    let idx = if end == 0 { 0 } else { self.blocks[arc].m + 1 };
                    res -= c * phi[arc][idx];
                }
                worst = worst.max(res.abs());
            }
        }
        worst
    }
}

/// Mass of `phi` under the quadrature `h (3/2 phi_1 + phi_2 + ... + phi_{M-1} + 3/2 phi_M)`.
///
/// With `u = 0`, `b = 0` and symmetric permeabilities this quantity is
/// invariant under [`CnSystem::phi_step`] whenever the end relations hold.
/// The trapezoid mass differs from it by `O(h^3)` terms at the ends.
pub fn conserved_phi_mass(phi: &[Vec<f64>], grid: &GridSpec) -> f64 {
    phi.iter()
        .zip(&grid.arcs)
        .map(|(p, g)| {
            let m = g.m;
            let inner: f64 = p[2..m].iter().sum();
            g.h * (1.5 * p[1] + inner + 1.5 * p[m])
        })
        .sum()
}

/// Second-order `phi_x`: centered in the interior, one-sided three-point at
/// both ends.
pub fn reconstruct_phi_gradient(phi: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = phi.len();
    if n < 4 {
        return Err(Error::Config(format!(
            "gradient reconstruction needs at least 2 interior points, got {}",
            n.saturating_sub(2)
        )));
    }
    let mut dx = vec![0.0; n];
    reconstruct_phi_gradient_into(phi, h, &mut dx);
    Ok(dx)
}

pub(crate) fn reconstruct_phi_gradient_into(phi: &[f64], h: f64, dx: &mut [f64]) {
    let e = phi.len() - 1;
    let inv = 1.0 / (2.0 * h);
    dx[0] = (-phi[2] + 4.0 * phi[1] - 3.0 * phi[0]) * inv;
    for j in 1..e {
        dx[j] = (phi[j + 1] - phi[j - 1]) * inv;
    }
    dx[e] = (phi[e - 2] - 4.0 * phi[e - 1] + 3.0 * phi[e]) * inv;
}

/// `f = phi_x u`, pointwise.
pub fn chemotactic_source(u: &[f64], phi_x: &[f64]) -> Vec<f64> {
    assert_eq!(u.len(), phi_x.len());
    u.iter().zip(phi_x).map(|(u, d)| u * d).collect()
}

/// Forcing `phi_x u` on every arc.
pub fn network_source(phi: &[Vec<f64>], u: &[Vec<f64>], grid: &GridSpec, f: &mut [Vec<f64>]) {
    for (i, g) in grid.arcs.iter().enumerate() {
        reconstruct_phi_gradient_into(&phi[i], g.h, &mut f[i]);
        for (fj, uj) in f[i].iter_mut().zip(&u[i]) {
            *fj *= uj;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::network::{ArcId, ArcSpec, NetworkSpec, NodeSpec};

    fn single(length: f64, lambda: f64, d: f64, a: f64, b: f64) -> Network {
        Network::new(NetworkSpec {
            arcs: vec![ArcSpec::new(1, length, lambda).with_chemo(d, a, b)],
            nodes: vec![],
            outer_incoming: vec![ArcId(1)],
            outer_outgoing: vec![ArcId(1)],
        })
        .unwrap()
    }

    #[test]
    fn tridiagonal_matches_dense_solve() {
        let (m, diag, off) = (7, 2.5, -0.75);
        let tri = Tridiagonal::new(m, diag, off);
        let dense = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                diag
            } else if i.abs_diff(j) == 1 {
                off
            } else {
                0.0
            }
        });
        let rhs: Vec<f64> = (0..m).map(|i| (i as f64).sin() + 0.3).collect();
        let mut x = rhs.clone();
        tri.solve_in_place(&mut x);
        let want = dense.lu().solve(&DVector::from_vec(rhs)).unwrap();
        for j in 0..m {
            assert!((x[j] - want[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn interior_row_example() {
        // M = 2, D = 1, b = 0, k = h^2: diagonal 2, off-diagonal -1/2
        let h = 1.0 / 3.0;
        let k = h * h;
        let lambda = h / (2.0 * k);
        let net = single(1.0, lambda, 1.0, 1.0, 0.0);
        let grid = build_grid(&net, k).unwrap();
        assert_eq!(grid.arcs[0].m, 2);
        let sys = CnSystem::assemble(&net, &grid).unwrap();
        let (d, o) = sys.interior_row(0);
        assert!((d - 2.0).abs() < 1e-14);
        assert!((o + 0.5).abs() < 1e-14);
        let row = sys.boundary_row(0, End::Left);
        assert_eq!(row.eta, 1.0);
        assert!(row.couplings.is_empty());
    }

    #[test]
    fn too_few_points_rejected() {
        let net = single(1.0, 1.0, 1.0, 1.0, 1.0);
        let grid = build_grid(&net, 0.25).unwrap();
        assert_eq!(grid.arcs[0].m, 1);
        assert!(CnSystem::assemble(&net, &grid).is_err());
        assert!(reconstruct_phi_gradient(&[0.0, 1.0, 2.0], 0.5).is_err());
    }

    #[test]
    fn constant_fixed_point() {
        let net = single(1.0, 2.0, 0.7, 1.0, 1.0);
        let grid = build_grid(&net, 0.01).unwrap();
        let sys = CnSystem::assemble(&net, &grid).unwrap();
        let u = vec![vec![3.5; grid.arcs[0].points()]];
        let phi = u.clone();
        let next = sys.phi_step(&phi, &u, &u).unwrap();
        for p in &next[0] {
            assert!((p - 3.5).abs() < 1e-13);
        }
    }

    #[test]
    fn gradient_exact_on_affine_and_quadratic() {
        let h = 0.1;
        let x: Vec<f64> = (0..11).map(|j| j as f64 * h).collect();
        let lin: Vec<f64> = x.iter().map(|x| 2.5 * x - 1.0).collect();
        for d in reconstruct_phi_gradient(&lin, h).unwrap() {
            assert!((d - 2.5).abs() < 1e-12);
        }
        let quad: Vec<f64> = x.iter().map(|x| x * x).collect();
        for (d, x) in reconstruct_phi_gradient(&quad, h).unwrap().iter().zip(&x) {
            assert!((d - 2.0 * x).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_converges_at_second_order() {
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let phi: Vec<f64> = (0..=n).map(|j| (j as f64 * h).sin()).collect();
            reconstruct_phi_gradient(&phi, h)
                .unwrap()
                .iter()
                .enumerate()
                .map(|(j, d)| (d - (j as f64 * h).cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(40) / err(80);
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn source_examples() {
        assert_eq!(
            chemotactic_source(&[1.0, 2.0, 3.0], &[0.5, 0.0, -0.5]),
            vec![0.5, 0.0, -1.5]
        );
        assert_eq!(chemotactic_source(&[0.0; 3], &[1.0, 2.0, 3.0]), vec![0.0; 3]);
        assert_eq!(
            chemotactic_source(&[1.0, 2.0], &[0.5, 0.5]),
            vec![0.5, 1.0]
        );
    }

    fn two_arc_kappa(kappa: f64) -> Network {
        Network::new(NetworkSpec {
            arcs: vec![
                ArcSpec::new(1, 1.0, 2.0).with_chemo(1.0, 1.0, 0.0),
                ArcSpec::new(2, 1.0, 1.0).with_chemo(0.5, 1.0, 0.0),
            ],
            nodes: vec![NodeSpec {
                id: 1,
                incoming: vec![ArcId(1)],
                outgoing: vec![ArcId(2)],
                xi: vec![vec![0.8, 0.2], vec![0.4, 0.6]],
                kappa: vec![vec![0.0, kappa], vec![kappa, 0.0]],
            }],
            outer_incoming: vec![ArcId(1)],
            outer_outgoing: vec![ArcId(2)],
        })
        .unwrap()
    }

    #[test]
    fn zero_kappa_node_rows_match_outer_rows() {
        let net = two_arc_kappa(0.0);
        let grid = build_grid(&net, 0.0125).unwrap();
        let sys = CnSystem::assemble(&net, &grid).unwrap();
        assert_eq!(sys.boundary_row(0, End::Right), sys.boundary_row(0, End::Left));
        assert_eq!(sys.boundary_row(1, End::Left).eta, 1.0);
    }

    #[test]
    fn kappa_couples_and_conserves() {
        let net = two_arc_kappa(2.0);
        let grid = build_grid(&net, 0.0125).unwrap();
        let sys = CnSystem::assemble(&net, &grid).unwrap();
        let mut phi = vec![
            vec![1.0; grid.arcs[0].points()],
            vec![0.0; grid.arcs[1].points()],
        ];
        sys.impose_end_relations(&mut phi).unwrap();
        assert!(sys.end_residual(&phi) < 1e-14);
        let zero = grid.zeros();
        let m0 = grid.arcs[0].m;
        let before = (phi[0][m0], phi[1][1]);
        let mass0 = conserved_phi_mass(&phi, &grid);
        let next = sys.phi_step(&phi, &zero, &zero).unwrap();
        let after = (next[0][m0], next[1][1]);
        assert!(after.0 < before.0);
        assert!(after.1 > before.1);
        let mass1 = conserved_phi_mass(&next, &grid);
        assert!((mass1 - mass0).abs() <= 1e-12 * mass0, "{mass0} -> {mass1}");
        assert!(sys.end_residual(&next) < 1e-13);
    }
}
