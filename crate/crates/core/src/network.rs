//! Graph-structured electrical network: incidence, planar extension, node and
//! line impedances, and the network impedance matrix `L = Z_G + B·Z_O⁻¹·Bᵀ`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::linalg;
use crate::planar::{extend_planar_as, rotor_block, MatrixRole, PlanarMatrix};
use crate::{Result, VocError};

pub use crate::planar::extend_planar;

/// Converter-side parameters of one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeParams {
    /// Output capacitance, lumped with the line shunt capacitance (F).
    pub capacitance: f64,
    /// Load conductance (S).
    pub conductance: f64,
}

/// Series parameters of one Π line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineParams {
    /// Series resistance (Ω).
    pub resistance: f64,
    /// Series inductance (H).
    pub inductance: f64,
    /// Shunt capacitance (F). Kept for reference only; it is already part of
    /// the node capacitance.
    pub shunt_capacitance: f64,
}

/// Oriented edge between two distinct nodes, zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
}

/// Validated topology and parameters of a converter network.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    nodes: Vec<NodeParams>,
    edges: Vec<Edge>,
    lines: Vec<LineParams>,
}

fn positive(what: &'static str, index: usize, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(VocError::NonFinite { what, index });
    }
    if value <= 0.0 {
        return Err(VocError::NonPositive { what, index, value });
    }
    Ok(())
}

impl NetworkSpec {
    /// Builds a spec from zero-based `edges`, one [`LineParams`] per edge.
    pub fn new(nodes: Vec<NodeParams>, edges: Vec<(usize, usize)>, lines: Vec<LineParams>) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(VocError::EmptyNetwork);
        }
        if lines.len() != edges.len() {
            return Err(VocError::DimensionMismatch {
                what: "line parameters",
                expected: edges.len(),
                found: lines.len(),
            });
        }
        for (k, p) in nodes.iter().enumerate() {
            positive("capacitance", k, p.capacitance)?;
            positive("conductance", k, p.conductance)?;
        }
        let mut checked = Vec::with_capacity(edges.len());
        for (e, &(from, to)) in edges.iter().enumerate() {
            for node in [from, to] {
                if node >= n {
                    return Err(VocError::EdgeOutOfRange { edge: e, node, n });
                }
            }
            if from == to {
                return Err(VocError::SelfLoop { edge: e, node: from });
            }
            checked.push(Edge { from, to });
        }
        for (e, l) in lines.iter().enumerate() {
            positive("line resistance", e, l.resistance)?;
            positive("line inductance", e, l.inductance)?;
            if !(l.shunt_capacitance >= 0.0 && l.shunt_capacitance.is_finite()) {
                return Err(VocError::NonPositive {
                    what: "line shunt capacitance",
                    index: e,
                    value: l.shunt_capacitance,
                });
            }
        }
        Ok(Self { nodes, edges: checked, lines })
    }

    /// Identical nodes and identical lines.
    pub fn uniform(n: usize, edges: Vec<(usize, usize)>, node: NodeParams, line: LineParams) -> Result<Self> {
        let m = edges.len();
        Self::new(alloc::vec![node; n], edges, alloc::vec![line; m])
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[NodeParams] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn lines(&self) -> &[LineParams] {
        &self.lines
    }

    /// Copy with the load conductance of `node` replaced.
    pub fn with_conductance(&self, node: usize, conductance: f64) -> Result<Self> {
        if node >= self.n() {
            return Err(VocError::DimensionMismatch {
                what: "node index",
                expected: self.n(),
                found: node,
            });
        }
        positive("conductance", node, conductance)?;
        let mut out = self.clone();
        out.nodes[node].conductance = conductance;
        Ok(out)
    }

    /// Copy with every line inductance multiplied by `scale`.
    pub fn with_inductance_scale(&self, scale: f64) -> Result<Self> {
        positive("inductance scale", 0, scale)?;
        let mut out = self.clone();
        for l in &mut out.lines {
            l.inductance *= scale;
        }
        Ok(out)
    }
}

/// Signed `n × m` incidence: `+1` where the edge leaves a node, `−1` where it
/// enters.
pub fn build_incidence(spec: &NetworkSpec) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(spec.n(), spec.m());
    for (e, edge) in spec.edges.iter().enumerate() {
        b[(edge.from, e)] = 1.0;
        b[(edge.to, e)] = -1.0;
    }
    b
}

/// `(Z_G, Z_O)` with node blocks `G·I₂ + C·ω·J₂` and line blocks
/// `R_O·I₂ + L_O·ω·J₂`.
pub fn build_impedances(spec: &NetworkSpec, omega: f64) -> (PlanarMatrix, PlanarMatrix) {
    let z_g = PlanarMatrix::block_diagonal(
        spec.nodes
            .iter()
            .map(|p| rotor_block(p.conductance, p.capacitance * omega)),
        MatrixRole::Impedance,
    );
    let z_o = PlanarMatrix::block_diagonal(
        spec.lines
            .iter()
            .map(|l| rotor_block(l.resistance, l.inductance * omega)),
        MatrixRole::Impedance,
    );
    (z_g, z_o)
}

/// `L = Z_G + B·Z_O⁻¹·Bᵀ`.
pub fn network_impedance(z_g: &PlanarMatrix, z_o: &PlanarMatrix, b: &PlanarMatrix) -> Result<PlanarMatrix> {
    if z_o.rows() == 0 {
        return Ok(PlanarMatrix::new(z_g.matrix().clone(), MatrixRole::Impedance));
    }
    let z_o_inv = linalg::inverse(z_o.matrix(), "line impedance Z_O")?;
    let l = z_g.matrix() + b.matrix() * z_o_inv * b.matrix().transpose();
    Ok(PlanarMatrix::new(l, MatrixRole::Impedance))
}

/// A [`NetworkSpec`] with every derived matrix evaluated at a fixed nominal
/// frequency. Immutable once built.
#[derive(Clone, Debug)]
pub struct Network {
    spec: NetworkSpec,
    omega: f64,
    incidence: DMatrix<f64>,
    b: PlanarMatrix,
    z_g: PlanarMatrix,
    z_o: PlanarMatrix,
    z_o_inv: DMatrix<f64>,
    l: PlanarMatrix,
    l_inv: DMatrix<f64>,
}

impl Network {
    pub fn build(spec: NetworkSpec, omega: f64) -> Result<Self> {
        if !omega.is_finite() || omega < 0.0 {
            return Err(VocError::Domain("nominal frequency must be finite and non-negative"));
        }
        let incidence = build_incidence(&spec);
        let b = extend_planar_as(&incidence, MatrixRole::IncidenceExtended);
        let (z_g, z_o) = build_impedances(&spec, omega);
        let z_o_inv = if spec.m() == 0 {
            DMatrix::zeros(0, 0)
        } else {
            linalg::inverse(z_o.matrix(), "line impedance Z_O")?
        };
        let l = network_impedance(&z_g, &z_o, &b)?;
        let l_inv = linalg::inverse(l.matrix(), "network impedance L")?;
        Ok(Self {
            spec,
            omega,
            incidence,
            b,
            z_g,
            z_o,
            z_o_inv,
            l,
            l_inv,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn m(&self) -> usize {
        self.spec.m()
    }

    pub fn incidence(&self) -> &DMatrix<f64> {
        &self.incidence
    }

    pub fn incidence_extended(&self) -> &PlanarMatrix {
        &self.b
    }

    pub fn z_g(&self) -> &PlanarMatrix {
        &self.z_g
    }

    pub fn z_o(&self) -> &PlanarMatrix {
        &self.z_o
    }

    pub fn z_o_inv(&self) -> &DMatrix<f64> {
        &self.z_o_inv
    }

    pub fn impedance(&self) -> &PlanarMatrix {
        &self.l
    }

    pub fn impedance_inv(&self) -> &DMatrix<f64> {
        &self.l_inv
    }

    /// Rebuilds with one node conductance changed (a load step).
    pub fn with_conductance(&self, node: usize, conductance: f64) -> Result<Self> {
        Self::build(self.spec.with_conductance(node, conductance)?, self.omega)
    }

    /// Whether `−L` is Hurwitz.
    pub fn is_stable(&self) -> Result<bool> {
        linalg::is_hurwitz(&(-self.l.matrix()))
    }

    /// Line currents on the slow manifold, `Z_O⁻¹·Bᵀ·v`.
    pub fn quasi_steady_currents(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.m() == 0 {
            return DVector::zeros(0);
        }
        &self.z_o_inv * (self.b.matrix().transpose() * v)
    }

    /// Steady voltages and line currents induced by the injected currents `u`
    /// in the rotating frame: `v = L⁻¹·u`, `i = Z_O⁻¹·Bᵀ·v`.
    pub fn steady_state(&self, u: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        if u.len() != 2 * self.n() {
            return Err(VocError::DimensionMismatch {
                what: "injected current",
                expected: 2 * self.n(),
                found: u.len(),
            });
        }
        let v = linalg::solve(self.l.matrix(), u, "network impedance L")?;
        let i = self.quasi_steady_currents(&v);
        Ok((v, i))
    }

    /// Relative residual of the rotating-frame steady-state equations
    /// `Z_G·v + B·i = u`, `Z_O·i = Bᵀ·v`.
    pub fn steady_state_residual(&self, u: &DVector<f64>, v: &DVector<f64>, i: &DVector<f64>) -> f64 {
        let node = self.z_g.matrix() * v + self.b.matrix() * i - u;
        let line = self.z_o.matrix() * i - self.b.matrix().transpose() * v;
        let res = libm::sqrt(node.norm_squared() + line.norm_squared());
        let scale = libm::sqrt(u.norm_squared() + v.norm_squared() + i.norm_squared());
        if scale == 0.0 {
            res
        } else {
            res / scale
        }
    }
}
