use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};

use crate::controller::{ControllerGains, Setpoints};
use crate::linalg;
use crate::network::{Network, NetworkSpec};
use crate::Result;

/// Default bound on the line time constant (s).
pub const DEFAULT_TAU_STAR: f64 = 1e-3;

const BISECTION_REL_TOL: f64 = 1e-6;
const BISECTION_MAX_ITER: usize = 200;

/// Line time-constant check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Assumption1 {
    /// `max_e L_O/√(L_O²ω*² + R_O²)`; zero without lines.
    pub tau: f64,
    pub tau_star: f64,
    /// Line attaining `tau`.
    pub worst_edge: Option<usize>,
    pub ok: bool,
}

pub fn check_assumption1(spec: &NetworkSpec, omega: f64, tau_star: f64) -> Assumption1 {
    let mut tau = 0.0;
    let mut worst_edge = None;
    for (e, l) in spec.lines().iter().enumerate() {
        let t = l.inductance / libm::hypot(l.inductance * omega, l.resistance);
        if t > tau {
            tau = t;
            worst_edge = Some(e);
        }
    }
    Assumption1 {
        tau,
        tau_star,
        worst_edge,
        ok: tau < tau_star,
    }
}

/// Every certificate quantity together with the verdicts derived from them.
///
/// Each flag is exactly `left < right` on the reported numbers; a non-finite
/// side makes the flag false.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub tau: f64,
    pub tau_star: f64,
    /// `max_k C/√(C²ω*² + G²)`.
    pub epsilon: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub zeta: f64,
    pub gamma_max: f64,
    pub alpha_max: f64,
    pub alpha_star: f64,
    /// `ξ₁ξ₂/(ξ₁ζ + β₁β₂)`, NaN unless `ξ₁ > 0`.
    pub cond_13c_rhs: f64,
    pub assumption1_ok: bool,
    pub cond_13a_ok: bool,
    pub cond_13b_ok: bool,
    pub cond_13c_ok: bool,
}

impl StabilityReport {
    pub fn condition1_ok(&self) -> bool {
        self.cond_13a_ok && self.cond_13b_ok && self.cond_13c_ok
    }

    pub fn all_ok(&self) -> bool {
        self.assumption1_ok && self.condition1_ok()
    }
}

/// `ξ₁ = −λ_max(Pᵀ·M·P)` where `P` is an orthonormal basis of `range(Π)` and
/// `M = Π·(γ_max𝓘 − Π_dq·L⁻¹) + (γ_max𝓘 − Π_dq·L⁻¹)ᵀ·Π`.
pub fn projected_xi1(
    pi: &DMatrix<f64>,
    pi_dq: &DMatrix<f64>,
    l_inv: &DMatrix<f64>,
    gamma_max: f64,
    basis: &DMatrix<f64>,
) -> f64 {
    let dim = pi.nrows();
    let a = DMatrix::identity(dim, dim) * gamma_max - pi_dq * l_inv;
    let m = pi * &a + a.transpose() * pi;
    let reduced = basis.transpose() * m * basis;
    -linalg::lambda_max_sym(&reduced)
}

pub fn compute_condition1(
    network: &Network,
    sp: &Setpoints,
    gains: &ControllerGains,
    tau_star: f64,
) -> Result<StabilityReport> {
    let omega = network.omega();
    let a1 = check_assumption1(network.spec(), omega, tau_star);
    let epsilon = network
        .spec()
        .nodes()
        .iter()
        .map(|p| p.capacitance / libm::hypot(p.capacitance * omega, p.conductance))
        .fold(0.0, f64::max);

    let l = network.impedance().matrix();
    let l_inv = network.impedance_inv();
    let xi2 = 2.0 * linalg::lambda_min_sym(l);
    let zeta = linalg::spectral_norm(l_inv);
    let gamma_max = gains.gamma_max();
    let beta1 = 1.0;
    let beta2 = zeta * zeta + gamma_max * zeta;

    let pi = sp.current_projector();
    let basis = linalg::range_basis(pi.matrix(), 0.5);
    let xi1 = projected_xi1(pi.matrix(), sp.voltage_projector().matrix(), l_inv, gamma_max, &basis);

    let alpha_star = compute_alpha_star(sp, gains);
    let alpha_max = gains.alpha_max();
    let cond_13c_rhs = if xi1 > 0.0 {
        xi1 * xi2 / (xi1 * zeta + beta1 * beta2)
    } else {
        f64::NAN
    };
    Ok(StabilityReport {
        tau: a1.tau,
        tau_star,
        epsilon,
        xi1,
        xi2,
        beta1,
        beta2,
        zeta,
        gamma_max,
        alpha_max,
        alpha_star,
        cond_13c_rhs,
        assumption1_ok: a1.ok,
        cond_13a_ok: alpha_max < alpha_star,
        cond_13b_ok: 0.0 < xi1,
        cond_13c_ok: epsilon < cond_13c_rhs,
    })
}

/// Share of node `k` in `u*`: `ρₖ = r*ₖ²/‖u*‖²`.
fn rho(sp: &Setpoints, k: usize) -> f64 {
    let r = sp.amplitude()[k];
    r * r / sp.u_dq().norm_squared()
}

/// Node block of `M₁ + M₁ᵀ − (P·M₁ + M₁ᵀ·P)` with `P = u*·u*ᵀ/‖u*‖²`,
/// evaluated at `rₖ = r*ₖ`.
pub fn d1_block(sp: &Setpoints, k: usize, gamma: f64) -> Matrix2<f64> {
    let (s, c) = libm::sincos(sp.phase()[k]);
    let p = Matrix2::new(c * c, c * s, c * s, s * s) * rho(sp, k);
    (Matrix2::identity() - p) * (2.0 * gamma)
}

/// Node block of `P·M₂ + M₂ᵀ·P` for an angle deviation `delta`.
pub fn d2_block(sp: &Setpoints, k: usize, alpha: f64, delta: f64) -> Matrix2<f64> {
    let (s, c) = libm::sincos(sp.phase()[k]);
    let off = s * s - c * c;
    Matrix2::new(2.0 * c * s, off, off, -2.0 * c * s) * (alpha * delta * rho(sp, k))
}

fn node_psd(sp: &Setpoints, k: usize, gamma: f64, alpha: f64) -> bool {
    let d1 = d1_block(sp, k, gamma);
    [PI, -PI]
        .iter()
        .all(|&delta| linalg::lambda_min_sym2(&(d1 - d2_block(sp, k, alpha, delta))) >= 0.0)
}

/// Largest `αₖ` keeping `D₁ₖ − D₂ₖ ⪰ 0` for every `|θₖ − θ*ₖ| ≤ π`, per node.
///
/// A node whose `D₁ₖ` is only semidefinite (the whole of `u*` sits on it)
/// admits no positive gain and gets 0.
pub fn alpha_star_per_node(sp: &Setpoints, gains: &ControllerGains) -> Vec<f64> {
    (0..sp.n())
        .map(|k| {
            let gamma = gains.gamma()[k];
            let d1 = d1_block(sp, k, gamma);
            if linalg::lambda_min_sym2(&d1) <= 1e-12 * 2.0 * gamma {
                return 0.0;
            }
            let mut lo = 0.0;
            let mut hi = gamma;
            let mut iter = 0;
            while node_psd(sp, k, gamma, hi) && iter < BISECTION_MAX_ITER {
                lo = hi;
                hi *= 2.0;
                iter += 1;
            }
            while hi - lo > BISECTION_REL_TOL * hi && iter < BISECTION_MAX_ITER {
                let mid = 0.5 * (lo + hi);
                if node_psd(sp, k, gamma, mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
                iter += 1;
            }
            lo
        })
        .collect()
}

/// `α* = minₖ α*ₖ`.
pub fn compute_alpha_star(sp: &Setpoints, gains: &ControllerGains) -> f64 {
    alpha_star_per_node(sp, gains).into_iter().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{ring_gains, ring_network, ring_setpoints, table_line, table_node, OMEGA};
    use crate::network::{LineParams, NodeParams};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ring_report() -> StabilityReport {
        let net = ring_network();
        let sp = ring_setpoints(&net);
        compute_condition1(&net, &sp, &ring_gains(), DEFAULT_TAU_STAR).unwrap()
    }

    #[test]
    fn table_values() {
        let r = ring_report();
        assert_relative_eq!(r.tau, 2.4923248614500e-4, max_relative = 1e-10);
        assert_relative_eq!(r.epsilon, 1.6934660319297e-3, max_relative = 1e-10);
        assert_relative_eq!(r.xi2, 1.0, max_relative = 1e-10);
        assert_relative_eq!(r.zeta, 1.6934660319297, max_relative = 1e-9);
        assert_relative_eq!(r.beta2, 3.0371738044926, max_relative = 1e-9);
        assert_relative_eq!(r.xi1, -0.2000999367376, max_relative = 1e-8);
        assert_relative_eq!(r.alpha_star, 0.15593936024674, max_relative = 2e-6);
        assert_eq!(r.beta1, 1.0);
        assert!(r.assumption1_ok && r.cond_13a_ok);
        assert!(!r.cond_13b_ok && !r.cond_13c_ok && r.cond_13c_rhs.is_nan());
    }

    #[test]
    fn assumption1_examples() {
        let spec = NetworkSpec::uniform(2, alloc::vec![(0, 1)], table_node(), table_line()).unwrap();
        let a = check_assumption1(&spec, OMEGA, DEFAULT_TAU_STAR);
        assert_relative_eq!(a.tau, 2.4923248614500e-4, max_relative = 1e-10);
        assert_eq!(a.worst_edge, Some(0));
        let remark = LineParams {
            inductance: 7.66e-6,
            ..table_line()
        };
        let spec = NetworkSpec::uniform(2, alloc::vec![(0, 1)], table_node(), remark).unwrap();
        assert_relative_eq!(
            check_assumption1(&spec, OMEGA, 1e-3).tau,
            3.8297227836008e-5,
            max_relative = 1e-10
        );
        let stiff = LineParams {
            resistance: 1e9,
            ..table_line()
        };
        let spec = NetworkSpec::uniform(2, alloc::vec![(0, 1)], table_node(), stiff).unwrap();
        let a = check_assumption1(&spec, OMEGA, 1e-12);
        assert!(a.tau < 1e-13 && a.ok);
    }

    fn single(omega: f64, g: f64, gamma: f64) -> StabilityReport {
        let spec = NetworkSpec::new(
            alloc::vec![NodeParams {
                capacitance: 1e-3,
                conductance: g
            }],
            alloc::vec![],
            alloc::vec![],
        )
        .unwrap();
        let net = Network::build(spec, omega).unwrap();
        let sp = Setpoints::derive(&net, alloc::vec![20.0], alloc::vec![0.0]).unwrap();
        let gains = ControllerGains::uniform(1, gamma, 0.03).unwrap();
        compute_condition1(&net, &sp, &gains, DEFAULT_TAU_STAR).unwrap()
    }

    #[test]
    fn single_conductive_node_closed_form() {
        // L⁻¹ = 𝓘/G, M = 2(γ_max − 1/G)·Π
        let r = single(0.0, 1.0, 0.1);
        assert_relative_eq!(r.xi1, 2.0 * (1.0 - 0.1), epsilon = 1e-12);
        assert_relative_eq!(r.xi2, 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.zeta, 1.0, epsilon = 1e-12);
        assert_eq!(r.tau, 0.0);
        assert_eq!(r.alpha_star, 0.0);
        assert!(r.cond_13b_ok && r.cond_13c_ok && !r.cond_13a_ok);
        let r = single(0.0, 1.0, 3.0);
        assert!(!r.cond_13b_ok);
    }

    #[test]
    fn single_table_node() {
        // ξ₁ = 2(G/|z|² − γ), |z|² = G² + C²ω²
        let r = single(OMEGA, 0.5, 0.1);
        let z2 = 0.25 + (1e-3 * OMEGA) * (1e-3 * OMEGA);
        assert_relative_eq!(r.xi1, 2.0 * (0.5 / z2 - 0.1), max_relative = 1e-10);
        assert_relative_eq!(r.cond_13c_rhs, 0.353118472239318, max_relative = 1e-9);
    }

    #[test]
    fn huge_amplitude_gain_breaks_13b() {
        let net = ring_network();
        let sp = ring_setpoints(&net);
        let gains = ControllerGains::uniform(3, 1e3, 0.03).unwrap();
        let r = compute_condition1(&net, &sp, &gains, DEFAULT_TAU_STAR).unwrap();
        assert!(!r.cond_13b_ok);
        assert_relative_eq!(r.xi1, -2000.0000999367, max_relative = 1e-9);
    }

    #[test]
    fn xi1_recheck_with_independent_basis() {
        let net = ring_network();
        let sp = ring_setpoints(&net);
        let r = compute_condition1(&net, &sp, &ring_gains(), DEFAULT_TAU_STAR).unwrap();
        // Gram–Schmidt on the columns of Π instead of its eigenvectors
        let pi = sp.current_projector().matrix().clone();
        let qr = pi.clone().qr();
        let q = qr.q().columns(0, 5).into_owned();
        let a = DMatrix::identity(6, 6) * 0.1 - sp.voltage_projector().matrix() * net.impedance_inv();
        let m = &pi * &a + a.transpose() * &pi;
        let form = q.transpose() * (m + DMatrix::identity(6, 6) * r.xi1) * &q;
        assert!(linalg::lambda_max_sym(&form) <= 1e-10);
        assert!(linalg::lambda_max_sym(&form) >= -1e-10);
    }

    #[test]
    fn alpha_zero_leaves_d1() {
        let net = ring_network();
        let sp = ring_setpoints(&net);
        for k in 0..3 {
            assert_eq!(d2_block(&sp, k, 0.0, PI), Matrix2::zeros());
            let d1 = d1_block(&sp, k, 0.1);
            assert!(d1.trace() > 0.0 && d1.determinant() > 0.0);
        }
    }

    #[test]
    fn zero_phase_structure() {
        // θ* = 0: D₂ = Δ·α·ρ·[[0, −1], [−1, 0]]
        let spec = NetworkSpec::uniform(2, alloc::vec![(0, 1)], table_node(), table_line()).unwrap();
        let net = Network::build(spec, OMEGA).unwrap();
        let sp = Setpoints::derive(&net, alloc::vec![20.0, 10.0], alloc::vec![0.0, 0.0]).unwrap();
        let d2 = d2_block(&sp, 0, 0.03, 0.5);
        let rho = 400.0 / 500.0;
        assert_relative_eq!(d2[(0, 0)], 0.0, epsilon = 1e-15);
        assert_relative_eq!(d2[(0, 1)], -0.5 * 0.03 * rho, epsilon = 1e-15);
        assert_relative_eq!(d2[(1, 0)], -0.5 * 0.03 * rho, epsilon = 1e-15);
        let gains = ControllerGains::uniform(2, 0.1, 0.03).unwrap();
        let per = alpha_star_per_node(&sp, &gains);
        for (k, rho) in [(0usize, 0.8f64), (1, 0.2)] {
            let closed = 2.0 * 0.1 * libm::sqrt(1.0 - rho) / (PI * rho);
            assert_relative_eq!(per[k], closed, max_relative = 2e-6);
        }
    }

    proptest! {
        #[test]
        fn alpha_star_matches_closed_form(
            amps in proptest::collection::vec(1.0f64..50.0, 3),
            phases in proptest::collection::vec(-3.1f64..3.1, 3),
            gammas in proptest::collection::vec(0.01f64..2.0, 3),
        ) {
            let net = ring_network();
            let sp = Setpoints::derive(&net, amps.clone(), phases).unwrap();
            let gains = ControllerGains::new(gammas.clone(), alloc::vec![0.03; 3]).unwrap();
            let total: f64 = amps.iter().map(|a| a * a).sum();
            let per = alpha_star_per_node(&sp, &gains);
            for k in 0..3 {
                let rho = amps[k] * amps[k] / total;
                let closed = 2.0 * gammas[k] * libm::sqrt(1.0 - rho) / (PI * rho);
                prop_assert!((per[k] - closed).abs() <= 2e-6 * closed, "{} vs {}", per[k], closed);
                // the bound is sharp: just above it the block loses definiteness
                prop_assert!(!node_psd(&sp, k, gammas[k], closed * (1.0 + 1e-4)));
            }
        }

        #[test]
        fn flags_agree_with_printed_sides(gamma in 0.001f64..5.0, g in 0.05f64..5.0) {
            let spec = NetworkSpec::new(
                alloc::vec![NodeParams { capacitance: 1e-3, conductance: g }],
                alloc::vec![],
                alloc::vec![],
            ).unwrap();
            let net = Network::build(spec, OMEGA).unwrap();
            let sp = Setpoints::derive(&net, alloc::vec![20.0], alloc::vec![0.4]).unwrap();
            let gains = ControllerGains::uniform(1, gamma, 0.03).unwrap();
            let r = compute_condition1(&net, &sp, &gains, DEFAULT_TAU_STAR).unwrap();
            prop_assert_eq!(r.cond_13a_ok, r.alpha_max < r.alpha_star);
            prop_assert_eq!(r.cond_13b_ok, 0.0 < r.xi1);
            prop_assert_eq!(r.cond_13c_ok, r.epsilon < r.cond_13c_rhs);
            prop_assert!(r.xi2 > 0.0 && r.beta1 == 1.0);
        }

        #[test]
        fn xi1_nonpositive_beyond_one_node(
            amps in proptest::collection::vec(1.0f64..50.0, 3),
            phases in proptest::collection::vec(-3.1f64..3.1, 3),
            gamma in 0.001f64..2.0,
        ) {
            // range(Π) meets ker(Π_dq·L⁻¹) in dimension ≥ n − 1, where the
            // projected form equals 2·γ_max
            let net = ring_network();
            let sp = Setpoints::derive(&net, amps, phases).unwrap();
            let gains = ControllerGains::uniform(3, gamma, 0.03).unwrap();
            let r = compute_condition1(&net, &sp, &gains, DEFAULT_TAU_STAR).unwrap();
            prop_assert!(r.xi1 <= -2.0 * gamma * (1.0 - 1e-9));
        }
    }

}
