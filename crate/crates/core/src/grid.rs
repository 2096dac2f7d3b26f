//! Space grids tied to the shared time step.
//!
//! Node consistency forces `h_i = k lambda_i / nu` on every arc, with the
//! Courant number `nu = 1/2` for the standard scheme (`h_i = 2 k lambda_i`).
//! Arc lengths must then be integer multiples of `h_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Network;

/// Relative tolerance for `L / h` being an integer.
pub const DIVISIBILITY_TOL: f64 = 1e-9;

/// Courant number `k lambda / h` for which the node closure is consistent.
pub const CONSISTENT_CFL: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcGrid {
    /// Space step.
    pub h: f64,
    /// Number of interior points; the arc carries `m + 2` points.
    pub m: usize,
}

impl ArcGrid {
    pub fn points(&self) -> usize {
        self.m + 2
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.h
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Shared time step.
    pub k: f64,
    /// Courant number `k lambda_i / h_i`, identical on all arcs.
    pub cfl: f64,
    pub arcs: Vec<ArcGrid>,
}

impl GridSpec {
    pub fn arc(&self, i: usize) -> &ArcGrid {
        &self.arcs[i]
    }

    pub fn total_points(&self) -> usize {
        self.arcs.iter().map(ArcGrid::points).sum()
    }

    /// Zero-filled per-arc arrays matching the grid.
    pub fn zeros(&self) -> Vec<Vec<f64>> {
        self.arcs.iter().map(|g| vec![0.0; g.points()]).collect()
    }

    pub fn is_consistent(&self) -> bool {
        (self.cfl - CONSISTENT_CFL).abs() <= 1e-14
    }
}

/// Grid with `h_i = 2 k lambda_i` on every arc.
pub fn build_grid(net: &Network, k: f64) -> Result<GridSpec> {
    build_grid_with_cfl(net, k, CONSISTENT_CFL)
}

/// Grid with `h_i = k lambda_i / cfl`. Only `cfl = 1/2` yields a consistent
/// node closure; other values exist to reproduce Courant-number studies.
pub fn build_grid_with_cfl(net: &Network, k: f64, cfl: f64) -> Result<GridSpec> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Config(format!("time step must be positive, got {k}")));
    }
    if !(cfl.is_finite() && cfl > 0.0) {
        return Err(Error::Config(format!(
            "Courant number must be positive, got {cfl}"
        )));
    }
    let arcs = net
        .arcs()
        .iter()
        .map(|arc| {
            let h = k * arc.lambda / cfl;
            let ratio = arc.length / h;
            let n = ratio.round();
            if n < 2.0 || (ratio - n).abs() > DIVISIBILITY_TOL * ratio {
                // L / h = n  <=>  k = cfl L / (lambda n)
                let suggestions = [ratio.floor(), ratio.ceil()]
                    .into_iter()
                    .filter(|&n| n >= 1.0)
                    .map(|n| cfl * arc.length / (arc.lambda * n))
                    .fold(Vec::new(), |mut acc, k| {
                        if !acc.contains(&k) {
                            acc.push(k);
                        }
                        acc
                    });
                let suggestions = if suggestions.is_empty() {
                    vec![cfl * arc.length / (arc.lambda * 2.0)]
                } else {
                    suggestions
                };
                return Err(Error::GridMismatch {
                    arc: arc.id,
                    ratio,
                    suggestions,
                });
            }
            let cells = n as usize;
            Ok(ArcGrid {
                h: arc.length / n,
                m: cells - 1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridSpec { k, cfl, arcs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{ArcId, ArcSpec, NetworkSpec};
    use proptest::prelude::*;

    fn single(length: f64, lambda: f64) -> Network {
        Network::new(NetworkSpec {
            arcs: vec![ArcSpec::new(1, length, lambda)],
            nodes: vec![],
            outer_incoming: vec![ArcId(1)],
            outer_outgoing: vec![ArcId(1)],
        })
        .unwrap()
    }

    #[test]
    fn grid_examples() {
        let g = build_grid(&single(4.0, 2.0), 0.005).unwrap();
        assert_eq!(g.arcs[0].m, 199);
        assert!((g.arcs[0].h - 0.02).abs() < 1e-16);

        let g = build_grid(&single(1.0, 10.0), 0.0005).unwrap();
        assert_eq!(g.arcs[0].m, 99);
        assert!((g.arcs[0].h - 0.01).abs() < 1e-16);
        assert_eq!(g.arcs[0].points(), 101);
    }

    #[test]
    fn mismatch_reports_nearest_steps() {
        // L / h = 1/0.6 lies between one and two cells
        match build_grid(&single(1.0, 3.0), 0.1) {
            Err(Error::GridMismatch { suggestions, .. }) => {
                assert_eq!(suggestions.len(), 2);
                assert!((suggestions[0] - 1.0 / 6.0).abs() < 1e-15);
                assert!((suggestions[1] - 1.0 / 12.0).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        match build_grid(&single(1.0, 3.0), 0.03) {
            Err(Error::GridMismatch { suggestions, .. }) => {
                // L / h = 5.55..: n = 5 or 6
                assert!((suggestions[0] - 1.0 / 30.0).abs() < 1e-15);
                assert!((suggestions[1] - 1.0 / 36.0).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_positive_step_rejected() {
        assert!(build_grid(&single(1.0, 1.0), 0.0).is_err());
        assert!(build_grid(&single(1.0, 1.0), -1.0).is_err());
    }

    proptest! {
        #[test]
        fn grid_invariants(cells in 2usize..2000, lambda in 0.1f64..20.0, length in 0.1f64..10.0) {
            let k = length / (2.0 * lambda * cells as f64);
            let g = build_grid(&single(length, lambda), k).unwrap();
            let a = g.arcs[0];
            prop_assert_eq!(a.m + 1, cells);
            prop_assert!(((a.m + 1) as f64 * a.h - length).abs() <= 2.0 * f64::EPSILON * length);
            prop_assert!((a.h / (2.0 * k) - lambda).abs() <= 1e-14 * lambda);
        }
    }
}
