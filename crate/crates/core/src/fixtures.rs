//! Shared test networks.

use core::f64::consts::PI;

use crate::controller::{ControllerGains, Setpoints};
use crate::dynamics::{ClosedLoop, ModelKind};
use crate::network::{LineParams, Network, NetworkSpec, NodeParams};

pub const OMEGA: f64 = 2.0 * PI * 50.0;
pub const PHASE: f64 = 1.178;

pub fn table_node() -> NodeParams {
    NodeParams {
        capacitance: 1e-3,
        conductance: 0.5,
    }
}

pub fn table_line() -> LineParams {
    LineParams {
        resistance: 0.2,
        inductance: 5e-5,
        shunt_capacitance: 1e-8,
    }
}

/// Three identical converters on a ring.
pub fn ring_network() -> Network {
    let spec = NetworkSpec::uniform(3, alloc::vec![(0, 1), (1, 2), (2, 0)], table_node(), table_line()).unwrap();
    Network::build(spec, OMEGA).unwrap()
}

pub fn ring_setpoints(net: &Network) -> Setpoints {
    Setpoints::derive(net, alloc::vec![20.0; 3], alloc::vec![PHASE; 3]).unwrap()
}

pub fn ring_gains() -> ControllerGains {
    ControllerGains::uniform(3, 0.1, 0.03).unwrap()
}

pub fn ring_loop(kind: ModelKind) -> ClosedLoop {
    let net = ring_network();
    let sp = ring_setpoints(&net);
    ClosedLoop::new(kind, net, sp, ring_gains()).unwrap()
}
