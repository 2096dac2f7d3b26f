use proptest::prelude::*;

use chemonet::chemo::{conserved_phi_mass, CnSystem};
use chemonet::diagnostics::discrete_mass;
use chemonet::grid::{build_grid, GridSpec};
use chemonet::network::{two_arc_dissipative_family, ArcSpec, Network};
use chemonet::runner::presets::{two_arc_network, twelve_arc_network};
use chemonet::scheme::{HyperbolicScheme, HyperbolicState};

fn arrays(grid: &GridSpec, values: &[f64]) -> Vec<Vec<f64>> {
    let mut it = values.iter().cycle();
    grid.arcs
        .iter()
        .map(|g| (0..g.points()).map(|_| *it.next().unwrap()).collect())
        .collect()
}

fn two_arc(l1: f64, l2: f64, t: f64, n1: usize, n2: usize, k: f64) -> (Network, GridSpec) {
    let lo = ((l1 - l2) / l1).max(0.0);
    let xi = two_arc_dissipative_family(l1, l2, lo + (1.0 - lo) * t).unwrap();
    let net = Network::new(two_arc_network(
        [
            ArcSpec::new(1, n1 as f64 * 2.0 * k * l1, l1),
            ArcSpec::new(2, n2 as f64 * 2.0 * k * l2, l2),
        ],
        xi,
    ))
    .unwrap();
    let grid = build_grid(&net, k).unwrap();
    (net, grid)
}

fn twelve(cells: usize) -> (Network, GridSpec) {
    let net = Network::new(twelve_arc_network()).unwrap();
    let grid = build_grid(&net, 1.0 / (20.0 * cells as f64)).unwrap();
    (net, grid)
}

fn axpy(a: f64, x: &[Vec<f64>], y: &[Vec<f64>]) -> Vec<Vec<f64>> {
    x.iter()
        .zip(y)
        .map(|(x, y)| x.iter().zip(y).map(|(x, y)| a * x + y).collect())
        .collect()
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn one_step_preserves_cell_mass_on_two_arcs(
        l1 in 0.3f64..5.0, l2 in 0.3f64..5.0, t in 0.0f64..1.0,
        n1 in 3usize..40, n2 in 3usize..40,
        values in prop::collection::vec(-10.0f64..10.0, 37),
    ) {
        let (net, grid) = two_arc(l1, l2, t, n1, n2, 0.01);
        let scheme = HyperbolicScheme::roe(&net, &grid);
        let state = HyperbolicState::from_arrays(arrays(&grid, &values), arrays(&grid, &values[5..]));
        let f = arrays(&grid, &values[11..]);
        let next = scheme.step(&state, &f);
        let (m0, m1) = (discrete_mass(&state.u, &grid), discrete_mass(&next.u, &grid));
        let scale = state.u.iter().flatten().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((m1 - m0).abs() <= 1e-12 * scale, "{m0} -> {m1}");
    }

    #[test]
    fn one_step_preserves_cell_mass_on_twelve_arcs(
        cells in 3usize..12,
        values in prop::collection::vec(-10.0f64..10.0, 41),
    ) {
        let (net, grid) = twelve(cells);
        let scheme = HyperbolicScheme::roe(&net, &grid);
        let state = HyperbolicState::from_arrays(arrays(&grid, &values), arrays(&grid, &values[7..]));
        let f = arrays(&grid, &values[13..]);
        let next = scheme.step(&state, &f);
        let (m0, m1) = (discrete_mass(&state.u, &grid), discrete_mass(&next.u, &grid));
        let scale = state.u.iter().flatten().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((m1 - m0).abs() <= 1e-12 * scale, "{m0} -> {m1}");
    }

    #[test]
    fn hyperbolic_step_is_linear(
        cells in 3usize..8,
        a in -3.0f64..3.0,
        x in prop::collection::vec(-1.0f64..1.0, 23),
        y in prop::collection::vec(-1.0f64..1.0, 29),
    ) {
        let (net, grid) = twelve(cells);
        let scheme = HyperbolicScheme::roe(&net, &grid);
        let (ux, vx, fx) = (arrays(&grid, &x), arrays(&grid, &x[3..]), arrays(&grid, &x[9..]));
        let (uy, vy, fy) = (arrays(&grid, &y), arrays(&grid, &y[3..]), arrays(&grid, &y[9..]));
        let sx = scheme.step(&HyperbolicState::from_arrays(ux.clone(), vx.clone()), &fx);
        let sy = scheme.step(&HyperbolicState::from_arrays(uy.clone(), vy.clone()), &fy);
        let combined = scheme.step(
            &HyperbolicState::from_arrays(axpy(a, &ux, &uy), axpy(a, &vx, &vy)),
            &axpy(a, &fx, &fy),
        );
        prop_assert!(max_diff(&combined.u, &axpy(a, &sx.u, &sy.u)) < 1e-12);
        prop_assert!(max_diff(&combined.v, &axpy(a, &sx.v, &sy.v)) < 1e-12);
    }

    #[test]
    fn constants_are_fixed_points_at_dissipative_nodes(
        l1 in 0.3f64..5.0, l2 in 0.3f64..5.0, t in 0.0f64..1.0,
        n1 in 3usize..40, n2 in 3usize..40,
        c in 0.0f64..200.0,
    ) {
        let (net, grid) = two_arc(l1, l2, t, n1, n2, 0.01);
        let scheme = HyperbolicScheme::roe(&net, &grid);
        let u: Vec<Vec<f64>> = grid.arcs.iter().map(|g| vec![c; g.points()]).collect();
        let next = scheme.step(&HyperbolicState::from_arrays(u.clone(), grid.zeros()), &grid.zeros());
        prop_assert!(max_diff(&next.u, &u) <= 1e-12 * c.max(1.0));
        prop_assert!(max_diff(&next.v, &grid.zeros()) <= 1e-12 * c.max(1.0));
    }

    #[test]
    fn phi_step_conserves_the_quadrature_mass_with_symmetric_kappa(
        cells in 3usize..20,
        kappa in prop::collection::vec(0.0f64..4.0, 24),
        values in prop::collection::vec(0.0f64..5.0, 31),
    ) {
        let mut spec = twelve_arc_network();
        for (n, node) in spec.nodes.iter_mut().enumerate() {
            let mut idx = 0;
            for r in 0..4 {
                node.kappa[r][r] = 0.0;
                for s in r + 1..4 {
                    let x = kappa[6 * n + idx];
                    node.kappa[r][s] = x;
                    node.kappa[s][r] = x;
                    idx += 1;
                }
            }
        }
        for arc in &mut spec.arcs {
            arc.degradation = 0.0;
        }
        let net = Network::new(spec).unwrap();
        let grid = build_grid(&net, 1.0 / (20.0 * cells as f64)).unwrap();
        let cn = CnSystem::assemble(&net, &grid).unwrap();
        let mut phi = arrays(&grid, &values);
        cn.impose_end_relations(&mut phi).unwrap();
        prop_assert!(cn.end_residual(&phi) < 1e-12);
        let zero = grid.zeros();
        let m0 = conserved_phi_mass(&phi, &grid);
        for _ in 0..20 {
            phi = cn.phi_step(&phi, &zero, &zero).unwrap();
            prop_assert!(cn.end_residual(&phi) < 1e-11);
        }
        prop_assert!((conserved_phi_mass(&phi, &grid) - m0).abs() <= 1e-12 * m0.max(1.0));
    }
}
