//! Graph topology, per-arc physics and node transmission data.
//!
//! Every arc is parametrized as `[0, L]`. An arc listed as *incoming* at a
//! node touches it with its right end (`x = L`); an *outgoing* arc touches it
//! with its left end (`x = 0`). Ends that touch no node are outer boundaries:
//! arcs in `outer_incoming` start at the outer boundary, arcs in
//! `outer_outgoing` end there.
//!
//! Inside a node, the transmission matrices `xi` and `kappa` are indexed by
//! *slot*: the concatenation of the incoming list followed by the outgoing
//! list.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance of the flux-conservation and row-sum checks.
pub const TRANSMISSION_TOL: f64 = 1e-12;
/// Singular values below this (relative to the largest) count as zero.
pub const KERNEL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArcId(pub u32);

impl fmt::Display for ArcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which end of an arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    /// `x = 0`
    Left,
    /// `x = L`
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSpec {
    pub id: ArcId,
    #[serde(alias = "L")]
    pub length: f64,
    /// Cell speed.
    pub lambda: f64,
    /// Chemoattractant diffusivity.
    #[serde(alias = "D", default = "one")]
    pub diffusion: f64,
    /// Chemoattractant production rate.
    #[serde(alias = "a", default = "one")]
    pub production: f64,
    /// Chemoattractant degradation rate.
    #[serde(alias = "b", default = "one")]
    pub degradation: f64,
}

fn one() -> f64 {
    1.0
}

impl ArcSpec {
    pub fn new(id: u32, length: f64, lambda: f64) -> Self {
        ArcSpec {
            id: ArcId(id),
            length,
            lambda,
            diffusion: 1.0,
            production: 1.0,
            degradation: 1.0,
        }
    }

    pub fn with_chemo(mut self, diffusion: f64, production: f64, degradation: f64) -> Self {
        self.diffusion = diffusion;
        self.production = production;
        self.degradation = degradation;
        self
    }

    fn check(&self) -> Result<()> {
        let positive = [
            ("length", self.length),
            ("lambda", self.lambda),
            ("diffusion", self.diffusion),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Structure(format!(
                    "arc {}: {name} must be positive, got {value}",
                    self.id
                )));
            }
        }
        for (name, value) in [
            ("production", self.production),
            ("degradation", self.degradation),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::Structure(format!(
                    "arc {}: {name} must be nonnegative, got {value}",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: u32,
    /// Arcs whose right end touches this node.
    #[serde(default)]
    pub incoming: Vec<ArcId>,
    /// Arcs whose left end touches this node.
    #[serde(default)]
    pub outgoing: Vec<ArcId>,
    /// Cell transmission coefficients, `xi[i][j]` by slot.
    pub xi: Vec<Vec<f64>>,
    /// Kedem-Katchalsky permeabilities by slot. Empty means all zero.
    #[serde(default)]
    pub kappa: Vec<Vec<f64>>,
}

impl NodeSpec {
    pub fn degree(&self) -> usize {
        self.incoming.len() + self.outgoing.len()
    }

    /// Slots in matrix order: `(arc id, end touching the node)`.
    pub fn slots(&self) -> impl Iterator<Item = (ArcId, End)> + '_ {
        self.incoming
            .iter()
            .map(|&id| (id, End::Right))
            .chain(self.outgoing.iter().map(|&id| (id, End::Left)))
    }

    pub fn kappa(&self, i: usize, j: usize) -> f64 {
        self.kappa
            .get(i)
            .and_then(|row| row.get(j))
            .copied()
            .unwrap_or(0.0)
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.degree();
        if n == 0 {
            return Err(Error::Structure(format!("node {} has no arcs", self.id)));
        }
        let square = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if !square(&self.xi) {
            return Err(Error::Structure(format!(
                "node {}: xi must be {n}x{n}",
                self.id
            )));
        }
        if !self.kappa.is_empty() && !square(&self.kappa) {
            return Err(Error::Structure(format!(
                "node {}: kappa must be {n}x{n} or omitted",
                self.id
            )));
        }
        Ok(())
    }

    fn lambdas(&self, arcs: &[ArcSpec]) -> Result<Vec<f64>> {
        self.slots()
            .map(|(id, _)| {
                arcs.iter()
                    .find(|a| a.id == id)
                    .map(|a| a.lambda)
                    .ok_or(Error::UnknownArc(id))
            })
            .collect()
    }
}

/// A column `j` of `xi` for which `sum_i lambda_i xi_ij != lambda_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnViolation {
    pub slot: usize,
    pub arc: ArcId,
    /// `sum_i lambda_i xi_ij - lambda_j`
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FluxReport {
    pub violations: Vec<ColumnViolation>,
}

impl FluxReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `sum_i lambda_i xi_ij = lambda_j` for every column of the node.
pub fn validate_flux_conservation(node: &NodeSpec, arcs: &[ArcSpec]) -> Result<FluxReport> {
    node.check_shape()?;
    let lambdas = node.lambdas(arcs)?;
    let ids: Vec<ArcId> = node.slots().map(|(id, _)| id).collect();
    let n = lambdas.len();
    let violations = (0..n)
        .filter_map(|j| {
            let flux: f64 = (0..n).map(|i| lambdas[i] * node.xi[i][j]).sum();
            let residual = flux - lambdas[j];
            (residual.abs() > TRANSMISSION_TOL * lambdas[j]).then_some(ColumnViolation {
                slot: j,
                arc: ids[j],
                residual,
            })
        })
        .collect();
    Ok(FluxReport { violations })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DissipativityReport {
    pub dissipative: bool,
    pub row_sums: Vec<f64>,
}

/// Rows of `xi` summing to one (with entries in `[0, 1]`) make the linear
/// problem energy-decaying.
pub fn validate_dissipative(node: &NodeSpec) -> DissipativityReport {
    let row_sums: Vec<f64> = node.xi.iter().map(|row| row.iter().sum()).collect();
    let in_range = node.xi.iter().flatten().all(|&x| (0.0..=1.0).contains(&x));
    let dissipative = in_range && row_sums.iter().all(|s| (s - 1.0).abs() <= TRANSMISSION_TOL);
    DissipativityReport {
        dissipative,
        row_sums,
    }
}

/// Structural and transmission checks that every node must pass before a
/// simulation: `xi` in `[0,1]`, flux conservation, and a symmetric,
/// nonnegative `kappa` with zero diagonal.
pub fn validate_node(node: &NodeSpec, arcs: &[ArcSpec]) -> Result<()> {
    node.check_shape()?;
    if let Some(x) = node
        .xi
        .iter()
        .flatten()
        .find(|x| !(0.0..=1.0).contains(*x))
    {
        return Err(Error::Validation(format!(
            "node {}: xi entry {x} outside [0, 1]",
            node.id
        )));
    }
    let flux = validate_flux_conservation(node, arcs)?;
    if let Some(v) = flux.violations.first() {
        return Err(Error::Validation(format!(
            "node {}: flux conservation fails on column of arc {} (residual {:e})",
            node.id, v.arc, v.residual
        )));
    }
    let n = node.degree();
    for i in 0..n {
        if node.kappa(i, i) != 0.0 {
            return Err(Error::Validation(format!(
                "node {}: kappa diagonal entry {i} must be zero",
                node.id
            )));
        }
        for j in 0..n {
            let k = node.kappa(i, j);
            if !(k.is_finite() && k >= 0.0) {
                return Err(Error::Validation(format!(
                    "node {}: kappa[{i}][{j}] = {k} must be nonnegative",
                    node.id
                )));
            }
            if k != node.kappa(j, i) {
                return Err(Error::Validation(format!(
                    "node {}: kappa is not symmetric at ({i}, {j})",
                    node.id
                )));
            }
        }
    }
    Ok(())
}

/// The dissipative 2x2 family for one incoming arc (speed `lambda1`) and one
/// outgoing arc (speed `lambda2`), parametrized by `xi11`.
pub fn two_arc_dissipative_family(lambda1: f64, lambda2: f64, xi11: f64) -> Result<[[f64; 2]; 2]> {
    let lo = f64::max(0.0, (lambda1 - lambda2) / lambda1);
    if !(lo..=1.0).contains(&xi11) {
        return Err(Error::Domain {
            what: "xi11",
            value: xi11,
            lo,
            hi: 1.0,
        });
    }
    let ratio = lambda1 / lambda2;
    let xi12 = 1.0 - xi11;
    // clamp round-off at the ends of the admissible interval
    let xi21 = (ratio * (1.0 - xi11)).clamp(0.0, 1.0);
    let xi22 = (1.0 - ratio * (1.0 - xi11)).clamp(0.0, 1.0);
    Ok([[xi11, xi12], [xi21, xi22]])
}

/// Matrix with entries `lambda_j (xi_ij - delta_ij)`. Its kernel holds the
/// node values `u_j / lambda_j` of zero-flux stationary states.
pub fn node_coupling_matrix(node: &NodeSpec, arcs: &[ArcSpec]) -> Result<DMatrix<f64>> {
    node.check_shape()?;
    let lambdas = node.lambdas(arcs)?;
    let n = lambdas.len();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        lambdas[j] * (node.xi[i][j] - delta)
    }))
}

/// Dimension of the kernel of [`node_coupling_matrix`], by numeric rank.
pub fn kernel_dimension(node: &NodeSpec, arcs: &[ArcSpec]) -> Result<usize> {
    let m = node_coupling_matrix(node, arcs)?;
    let n = m.ncols();
    let sv = m.singular_values();
    let scale = sv.max().max(1.0);
    let rank = sv.iter().filter(|&&s| s > KERNEL_TOL * scale).count();
    Ok(n - rank)
}

/// Where an arc end is attached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Attachment {
    Outer,
    Node { node: usize, slot: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub arcs: Vec<ArcSpec>,
    #[serde(default)]
    pub nodes: Vec<NodeSpec>,
    /// Arcs whose left end is an outer boundary.
    #[serde(default)]
    pub outer_incoming: Vec<ArcId>,
    /// Arcs whose right end is an outer boundary.
    #[serde(default)]
    pub outer_outgoing: Vec<ArcId>,
}

/// Node-level verdicts of a validated network.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkReport {
    pub dissipative: Vec<(u32, DissipativityReport)>,
}

impl NetworkReport {
    pub fn all_dissipative(&self) -> bool {
        self.dissipative.iter().all(|(_, r)| r.dissipative)
    }
}

/// A structurally checked network. Arcs are stored in id order; all
/// per-arc arrays elsewhere in the crate follow this order.
#[derive(Clone, Debug)]
pub struct Network {
    arcs: Vec<ArcSpec>,
    nodes: Vec<NodeSpec>,
    index: HashMap<ArcId, usize>,
    ends: Vec<[Attachment; 2]>,
    /// Per node, per slot: `(arc index, end)`.
    slots: Vec<Vec<(usize, End)>>,
}

impl Network {
    /// Checks arc parameters, end attachments and connectivity. Transmission
    /// conditions are checked separately by [`Network::validate`].
    pub fn new(spec: NetworkSpec) -> Result<Self> {
        let NetworkSpec {
            mut arcs,
            nodes,
            outer_incoming,
            outer_outgoing,
        } = spec;
        if arcs.is_empty() {
            return Err(Error::Structure("network has no arcs".into()));
        }
        arcs.sort_by_key(|a| a.id);
        let mut index = HashMap::with_capacity(arcs.len());
        for (i, arc) in arcs.iter().enumerate() {
            arc.check()?;
            if index.insert(arc.id, i).is_some() {
                return Err(Error::Structure(format!("duplicate arc id {}", arc.id)));
            }
        }
        let lookup = |id: ArcId| index.get(&id).copied().ok_or(Error::UnknownArc(id));

        let mut ends: Vec<[Option<Attachment>; 2]> = vec![[None, None]; arcs.len()];
        let mut attach = |arc: usize, end: End, what: Attachment| -> Result<()> {
            let e = &mut ends[arc][end as usize];
            if e.is_some() {
                return Err(Error::Structure(format!(
                    "arc {} {:?} end is attached twice",
                    arcs[arc].id, end
                )));
            }
            *e = Some(what);
            Ok(())
        };
        for &id in &outer_incoming {
            attach(lookup(id)?, End::Left, Attachment::Outer)?;
        }
        for &id in &outer_outgoing {
            attach(lookup(id)?, End::Right, Attachment::Outer)?;
        }
        let mut slots = Vec::with_capacity(nodes.len());
        for (p, node) in nodes.iter().enumerate() {
            node.check_shape()?;
            let mut node_slots = Vec::with_capacity(node.degree());
            for (slot, (id, end)) in node.slots().enumerate() {
                let arc = lookup(id)?;
                attach(arc, end, Attachment::Node { node: p, slot })?;
                node_slots.push((arc, end));
            }
            slots.push(node_slots);
        }
        let ends = ends
            .into_iter()
            .enumerate()
            .map(|(i, [l, r])| match (l, r) {
                (Some(l), Some(r)) => Ok([l, r]),
                _ => Err(Error::Structure(format!(
                    "arc {} has an unattached end",
                    arcs[i].id
                ))),
            })
            .collect::<Result<Vec<_>>>()?;

        let net = Network {
            arcs,
            nodes,
            index,
            ends,
            slots,
        };
        if !net.is_connected() {
            return Err(Error::Structure("network is not connected".into()));
        }
        Ok(net)
    }

    fn is_connected(&self) -> bool {
        let n = self.arcs.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(a) = stack.pop() {
            for att in self.ends[a] {
                if let Attachment::Node { node, .. } = att {
                    for &(b, _) in &self.slots[node] {
                        if !seen[b] {
                            seen[b] = true;
                            stack.push(b);
                        }
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Runs every node validator; flux conservation and `kappa` conditions
    /// are hard errors, dissipativity is reported.
    pub fn validate(&self) -> Result<NetworkReport> {
        let mut dissipative = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            validate_node(node, &self.arcs)?;
            dissipative.push((node.id, validate_dissipative(node)));
        }
        Ok(NetworkReport { dissipative })
    }

    pub fn arcs(&self) -> &[ArcSpec] {
        &self.arcs
    }

    pub fn arc(&self, i: usize) -> &ArcSpec {
        &self.arcs[i]
    }

    pub fn n_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn arc_index(&self, id: ArcId) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownArc(id))
    }

    pub fn attachment(&self, arc: usize, end: End) -> Attachment {
        self.ends[arc][end as usize]
    }

    /// `(arc index, end)` for each slot of node `p`.
    pub fn node_slots(&self, p: usize) -> &[(usize, End)] {
        &self.slots[p]
    }

    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|a| a.length).sum()
    }

    pub fn to_spec(&self) -> NetworkSpec {
        let mut outer_incoming = Vec::new();
        let mut outer_outgoing = Vec::new();
        for (i, arc) in self.arcs.iter().enumerate() {
            if self.ends[i][0] == Attachment::Outer {
                outer_incoming.push(arc.id);
            }
            if self.ends[i][1] == Attachment::Outer {
                outer_outgoing.push(arc.id);
            }
        }
        NetworkSpec {
            arcs: self.arcs.clone(),
            nodes: self.nodes.clone(),
            outer_incoming,
            outer_outgoing,
        }
    }
}
