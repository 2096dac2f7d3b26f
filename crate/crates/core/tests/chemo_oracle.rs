use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use chemonet::chemo::CnSystem;
use chemonet::grid::{build_grid, GridSpec};
use chemonet::network::{End, Network};
use chemonet::runner::presets::twelve_arc_network;

/// Position of a point in the flat unknown vector.
fn offsets(grid: &GridSpec) -> Vec<usize> {
    let mut off = vec![0];
    for g in &grid.arcs {
        off.push(off.last().unwrap() + g.points());
    }
    off
}

/// One Crank-Nicolson step assembled as a single dense system over every
/// point of the network.
fn dense_step(net: &Network, grid: &GridSpec, phi: &[Vec<f64>], u0: &[Vec<f64>], u1: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let off = offsets(grid);
    let n = *off.last().unwrap();
    let k = grid.k;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (i, arc) in net.arcs().iter().enumerate() {
        let g = grid.arcs[i];
        let r = arc.diffusion * k / (2.0 * g.h * g.h);
        for j in 1..=g.m {
            let row = off[i] + j;
            a[(row, row - 1)] = -r;
            a[(row, row)] = 1.0 + 2.0 * r + 0.5 * k * arc.degradation;
            a[(row, row + 1)] = -r;
            rhs[row] = r * phi[i][j - 1] + (1.0 - 2.0 * r - 0.5 * k * arc.degradation) * phi[i][j]
                + r * phi[i][j + 1]
                + 0.5 * k * arc.production * (u0[i][j] + u1[i][j]);
        }
        // outer ends until a node claims them
        for (e, a1, a2) in [(0, 1, 2), (g.m + 1, g.m, g.m - 1)] {
            a[(off[i] + e, off[i] + e)] = 1.0;
            a[(off[i] + e, off[i] + a1)] = -4.0 / 3.0;
            a[(off[i] + e, off[i] + a2)] = 1.0 / 3.0;
        }
    }
    let end_point = |id, end: End| {
        let i = net.arc_index(id).unwrap();
        match end {
            End::Left => off[i],
            End::Right => off[i] + grid.arcs[i].m + 1,
        }
    };
    for node in net.nodes() {
        let slots: Vec<_> = node.slots().collect();
        for (s, &(id, end)) in slots.iter().enumerate() {
            let i = net.arc_index(id).unwrap();
            let c = 2.0 / 3.0 * grid.arcs[i].h / net.arc(i).diffusion;
            let row = end_point(id, end);
            for (t, &(other, other_end)) in slots.iter().enumerate() {
                let kap = node.kappa(s, t);
                a[(row, row)] += c * kap;
                a[(row, end_point(other, other_end))] -= c * kap;
            }
        }
    }
    let x = a.lu().solve(&rhs).unwrap();
    (0..grid.arcs.len())
        .map(|i| x.rows(off[i], grid.arcs[i].points()).iter().copied().collect())
        .collect()
}

fn field(grid: &GridSpec, seed: f64) -> Vec<Vec<f64>> {
    grid.arcs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            (0..g.points())
                .map(|j| 1.0 + 0.5 * (seed + 0.37 * j as f64 + 1.3 * i as f64).sin())
                .collect()
        })
        .collect()
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn condensed_solver_matches_dense_assembly_on_twelve_arcs() {
    let net = Network::new(twelve_arc_network()).unwrap();
    let grid = build_grid(&net, 0.01).unwrap();
    let cn = CnSystem::assemble(&net, &grid).unwrap();
    let (phi, u0, u1) = (field(&grid, 0.0), field(&grid, 1.0), field(&grid, 2.0));
    let fast = cn.phi_step(&phi, &u0, &u1).unwrap();
    let dense = dense_step(&net, &grid, &phi, &u0, &u1);
    assert!(max_diff(&fast, &dense) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn condensed_solver_matches_dense_assembly(
        kappa in prop::collection::vec(0.0f64..3.0, 16),
        seed in 0.0f64..10.0,
        cells in 3usize..40,
        diffusion in prop::collection::vec(0.2f64..3.0, 12),
    ) {
        let mut spec = twelve_arc_network();
        for (n, node) in spec.nodes.iter_mut().enumerate() {
            for r in 0..4 {
                for s in 0..4 {
                    node.kappa[r][s] = if r == s { 0.0 } else { kappa[4 * n + r.min(s)] * (1.0 + (r + s) as f64) };
                }
            }
        }
        for (arc, d) in spec.arcs.iter_mut().zip(&diffusion) {
            arc.diffusion = *d;
        }
        let net = Network::new(spec).unwrap();
        // L = 1 and lambda = 10 on every arc
        let grid = build_grid(&net, 1.0 / (20.0 * cells as f64)).unwrap();
        let cn = CnSystem::assemble(&net, &grid).unwrap();
        let (phi, u0, u1) = (field(&grid, seed), field(&grid, seed + 1.0), field(&grid, seed + 2.0));
        let fast = cn.phi_step(&phi, &u0, &u1).unwrap();
        let dense = dense_step(&net, &grid, &phi, &u0, &u1);
        prop_assert!(max_diff(&fast, &dense) < 1e-11);
    }
}
