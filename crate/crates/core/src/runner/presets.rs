//! Experiment presets.

use crate::error::{Error, Result};
use crate::network::{two_arc_dissipative_family, ArcId, ArcSpec, NetworkSpec, NodeSpec};

use super::config::{ArcProfile, InitialCondition, Model, PhiRule, Profile, RunConfig};

pub const PRESETS: [&str; 8] = [
    "two_arc_simplified",
    "two_arc_full_dissipative",
    "two_arc_full_nondissipative",
    "twelve_arc",
    "blowup_single_arc",
    "blowup_two_arc",
    "convergence_table2",
    "regime_sweep",
];

/// Relative size of the default cosine perturbation.
pub const PERTURBATION: f64 = 0.1;

/// Perturbation of the two-arc data with `mu0 = 160` (the same data feed the
/// constant steady state, the blow-up family and the regime map).
pub const TWO_ARC_PERTURBATION: f64 = 0.0035;

/// Perturbation of the single-arc blow-up data.
pub const SINGLE_ARC_PERTURBATION: f64 = 0.065;

/// Permeability used between every pair of arcs at a node.
pub const KAPPA: f64 = 1.0;

pub fn preset(name: &str) -> Result<RunConfig> {
    match name {
        "two_arc_simplified" => Ok(two_arc_simplified()),
        "two_arc_full_dissipative" => Ok(two_arc_full_dissipative()),
        "two_arc_full_nondissipative" => Ok(two_arc_full_nondissipative()),
        "twelve_arc" => Ok(twelve_arc()),
        "blowup_single_arc" => Ok(blowup_single_arc()),
        "blowup_two_arc" | "regime_sweep" => {
            let mut cfg = blowup_two_arc(1.0, 2.0)?;
            cfg.name = name.into();
            Ok(cfg)
        }
        "convergence_table2" => Ok(convergence_table2()),
        _ => Err(Error::Config(format!(
            "unknown preset '{name}'; available: {}",
            PRESETS.join(", ")
        ))),
    }
}

fn cosine(c0: f64) -> Profile {
    cosine_with(c0, PERTURBATION)
}

fn cosine_with(c0: f64, amplitude: f64) -> Profile {
    Profile::CosinePerturbation {
        c0,
        amplitude,
        periods: 1,
    }
}

fn kappa_all(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { KAPPA }).collect())
        .collect()
}

/// Arc 1 enters the node, arc 2 leaves it; both have a free outer end.
pub fn two_arc_network(arcs: [ArcSpec; 2], xi: [[f64; 2]; 2]) -> NetworkSpec {
    NetworkSpec {
        arcs: arcs.to_vec(),
        nodes: vec![NodeSpec {
            id: 1,
            incoming: vec![ArcId(1)],
            outgoing: vec![ArcId(2)],
            xi: xi.iter().map(|r| r.to_vec()).collect(),
            kappa: kappa_all(2),
        }],
        outer_incoming: vec![ArcId(1)],
        outer_outgoing: vec![ArcId(2)],
    }
}

fn base(name: &str, network: NetworkSpec, k: f64, t_final: f64, model: Model, c0: f64) -> RunConfig {
    RunConfig {
        name: name.into(),
        network,
        k,
        cfl: 0.5,
        t_final,
        model,
        initial: InitialCondition::uniform(cosine(c0)),
        snapshot_every: None,
        diagnostics_every: None,
        blowup_factor: crate::diagnostics::BLOWUP_FACTOR,
        steady_tol: Some(1e-8),
    }
}

pub fn two_arc_simplified() -> RunConfig {
    let net = two_arc_network(
        [ArcSpec::new(1, 4.0, 2.0), ArcSpec::new(2, 1.0, 1.0)],
        [[0.8, 0.2], [0.4, 0.6]],
    );
    // mu0 = 250 over a total length of 5
    base(
        "two_arc_simplified",
        net,
        0.005,
        100.0,
        Model::Simplified {
            alpha: vec![0.5, 0.5],
        },
        50.0,
    )
}

fn full_two_arc(name: &str, xi: [[f64; 2]; 2], t_final: f64) -> RunConfig {
    let net = two_arc_network(
        [
            ArcSpec::new(1, 6.0, 5.0).with_chemo(1.0, 1.0, 1.0),
            ArcSpec::new(2, 2.0, 4.0).with_chemo(1.0, 1.0, 1.0),
        ],
        xi,
    );
    // mu0 = 160 over a total length of 8
    let mut cfg = base(name, net, 0.001, t_final, Model::Full, 20.0);
    cfg.initial = InitialCondition::uniform(cosine_with(20.0, TWO_ARC_PERTURBATION));
    cfg
}

pub fn two_arc_full_dissipative() -> RunConfig {
    full_two_arc("two_arc_full_dissipative", [[0.8, 0.2], [0.25, 0.75]], 10.0)
}

pub fn two_arc_full_nondissipative() -> RunConfig {
    full_two_arc("two_arc_full_nondissipative", [[0.8, 0.24], [0.25, 0.7]], 30.0)
}

/// `(node, incoming, outgoing, [(i, j, xi_ij)])`
type NodeTable = (u32, [u32; 2], [u32; 2], [(u32, u32, f64); 16]);

/// Ring 1: N-W -> N-E, 2: N-E -> S-E, 3: S-E -> S-W, 4: S-W -> N-W; each
/// corner has one arc arriving from outside and one leaving.
const TWELVE_ARC_NODES: [NodeTable; 4] = [
    (
        1, // S-W
        [12, 3],
        [11, 4],
        [
            (12, 12, 0.1), (11, 12, 0.3), (3, 12, 0.3), (4, 12, 0.3),
            (12, 11, 0.2), (11, 11, 0.2), (3, 11, 0.3), (4, 11, 0.3),
            (12, 3, 0.2), (11, 3, 0.2), (3, 3, 0.4), (4, 3, 0.2),
            (12, 4, 0.5), (11, 4, 0.1), (3, 4, 0.2), (4, 4, 0.2),
        ],
    ),
    (
        2, // S-E
        [2, 10],
        [3, 9],
        [
            (3, 3, 0.1), (10, 3, 0.3), (9, 3, 0.3), (2, 3, 0.3),
            (3, 10, 0.2), (10, 10, 0.2), (9, 10, 0.3), (2, 10, 0.3),
            (3, 9, 0.2), (10, 9, 0.2), (9, 9, 0.4), (2, 9, 0.2),
            (3, 2, 0.5), (10, 2, 0.1), (9, 2, 0.2), (2, 2, 0.2),
        ],
    ),
    (
        3, // N-E
        [1, 8],
        [2, 7],
        [
            (1, 1, 0.1), (2, 1, 0.3), (8, 1, 0.3), (7, 1, 0.3),
            (1, 2, 0.2), (2, 2, 0.2), (8, 2, 0.3), (7, 2, 0.3),
            (1, 8, 0.2), (2, 8, 0.2), (8, 8, 0.4), (7, 8, 0.2),
            (1, 7, 0.5), (2, 7, 0.1), (8, 7, 0.2), (7, 7, 0.2),
        ],
    ),
    (
        4, // N-W
        [5, 4],
        [1, 6],
        [
            (5, 5, 0.1), (4, 5, 0.3), (1, 5, 0.3), (6, 5, 0.3),
            (5, 4, 0.2), (4, 4, 0.2), (1, 4, 0.3), (6, 4, 0.3),
            (5, 1, 0.2), (4, 1, 0.2), (1, 1, 0.4), (6, 1, 0.2),
            (5, 6, 0.5), (4, 6, 0.1), (1, 6, 0.2), (6, 6, 0.2),
        ],
    ),
];

pub fn twelve_arc_network() -> NetworkSpec {
    let nodes = TWELVE_ARC_NODES
        .iter()
        .map(|(id, inc, out, table)| {
            let slots: Vec<u32> = inc.iter().chain(out).copied().collect();
            let pos = |a: u32| slots.iter().position(|&s| s == a).expect("arc at node");
            let mut xi = vec![vec![0.0; 4]; 4];
            for &(i, j, x) in table {
                xi[pos(i)][pos(j)] = x;
            }
            NodeSpec {
                id: *id,
                incoming: inc.iter().map(|&a| ArcId(a)).collect(),
                outgoing: out.iter().map(|&a| ArcId(a)).collect(),
                xi,
                kappa: kappa_all(4),
            }
        })
        .collect();
    NetworkSpec {
        arcs: (1..=12)
            .map(|i| ArcSpec::new(i, 1.0, 10.0).with_chemo(1.0, 1.0, 1.0))
            .collect(),
        nodes,
        outer_incoming: [5, 8, 10, 12].map(ArcId).to_vec(),
        outer_outgoing: [6, 7, 9, 11].map(ArcId).to_vec(),
    }
}

pub fn twelve_arc() -> RunConfig {
    let mut cfg = base("twelve_arc", twelve_arc_network(), 0.0005, 30.0, Model::Full, 110.0);
    cfg.initial = InitialCondition {
        default: Profile::Constant { c0: 110.0 },
        arcs: vec![ArcProfile {
            arc: ArcId(5),
            profile: cosine(110.0),
        }],
        phi: PhiRule::EqualToU,
    };
    cfg
}

pub fn blowup_single_arc() -> RunConfig {
    let net = NetworkSpec {
        arcs: vec![ArcSpec::new(1, 1.0, 10.0).with_chemo(1.0, 1.0, 1.0)],
        nodes: vec![],
        outer_incoming: vec![ArcId(1)],
        outer_outgoing: vec![ArcId(1)],
    };
    // h = 0.001
    let mut cfg = base("blowup_single_arc", net, 5e-5, 0.2, Model::Full, 9000.0);
    cfg.initial = InitialCondition::uniform(cosine_with(9000.0, SINGLE_ARC_PERTURBATION));
    cfg.steady_tol = None;
    cfg
}

/// Two-arc blow-up family: `L = 6, 2`, dissipative `xi_11 = 0.96`, `mu0 = 160`.
pub fn blowup_two_arc(lambda1: f64, lambda2: f64) -> Result<RunConfig> {
    let xi = two_arc_dissipative_family(lambda1, lambda2, 0.96)?;
    let net = two_arc_network(
        [
            ArcSpec::new(1, 6.0, lambda1).with_chemo(1.0, 1.0, 1.0),
            ArcSpec::new(2, 2.0, lambda2).with_chemo(1.0, 1.0, 1.0),
        ],
        xi,
    );
    // h_1 = 0.01
    let k = 0.01 / (2.0 * lambda1);
    let mut cfg = base("blowup_two_arc", net, k, 8.0, Model::Full, 20.0);
    cfg.initial = InitialCondition::uniform(cosine_with(20.0, TWO_ARC_PERTURBATION));
    cfg.steady_tol = None;
    Ok(cfg)
}

/// Transparent node (`xi_11 = xi_22 = 0`) with `kappa = 1.5`. With
/// `a = b = D = 1` the constant state `u = 60.028` sits next to the onset of
/// the chemotactic instability, so at `T = 25` the solution is still in a
/// slow transient seeded by a cosine perturbation of arc 1 alone.
pub fn convergence_table2() -> RunConfig {
    let mut net = two_arc_network(
        [
            ArcSpec::new(1, 1.0, 4.0).with_chemo(1.0, 1.0, 1.0),
            ArcSpec::new(2, 1.0, 4.0).with_chemo(1.0, 1.0, 1.0),
        ],
        [[0.0, 1.0], [1.0, 0.0]],
    );
    net.nodes[0].kappa = vec![vec![0.0, 1.5], vec![1.5, 0.0]];
    // h = 0.025; mu0 = 120.056 over a total length of 2
    let mut cfg = base("convergence_table2", net, 0.003125, 25.0, Model::Full, 60.028);
    cfg.initial = InitialCondition {
        default: Profile::Constant { c0: 60.028 },
        arcs: vec![ArcProfile {
            arc: ArcId(1),
            profile: cosine(60.028),
        }],
        phi: PhiRule::EqualToU,
    };
    cfg.steady_tol = None;
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Network;

    #[test]
    fn every_preset_validates() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            let net = cfg.network().unwrap();
            crate::grid::build_grid_with_cfl(&net, cfg.k, cfg.cfl).unwrap();
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn preset_parameters() {
        let c = two_arc_simplified();
        assert_eq!(c.initial.mass(&Network::new(c.network.clone()).unwrap()), 250.0);

        let c = twelve_arc();
        let net = Network::new(c.network.clone()).unwrap();
        assert_eq!(net.n_arcs(), 12);
        assert_eq!(c.initial.mass(&net), 1320.0);
        let g = crate::grid::build_grid(&net, c.k).unwrap();
        assert!(g.arcs.iter().all(|a| (a.h - 0.01).abs() < 1e-15));
        let report = net.validate().unwrap();
        assert!(!report.all_dissipative());

        let c = convergence_table2();
        let net = Network::new(c.network.clone()).unwrap();
        assert!((c.initial.mass(&net) - 120.056).abs() < 1e-12);
        assert_eq!(c.t_final, 25.0);
    }

    #[test]
    fn twelve_arc_table_is_verbatim() {
        let spec = twelve_arc_network();
        let total: usize = TWELVE_ARC_NODES.iter().map(|n| n.3.len()).sum();
        assert_eq!(total, 64);
        // S-W: xi_{12,4} = 0.5 sits at slot (12 -> position 0, 4 -> position 3)
        assert_eq!(spec.nodes[0].xi[0][3], 0.5);
        // N-W: xi_{1,1} = 0.4
        assert_eq!(spec.nodes[3].xi[2][2], 0.4);
    }
}
