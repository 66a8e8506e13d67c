//! Running suprema and time integrals turning per-state measurements into
//! the total energy `sup 𝓔 + ∫𝓓` and the norm proxy `S`.

use serde::{Deserialize, Serialize};

use super::{decay_fit, Measurement};

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub chi: f64,
    /// Total energy `sup_{s≤t} 𝓔(s) + ∫_0^t 𝓓`.
    #[serde(rename = "E_disc")]
    pub e_disc: f64,
    /// Instantaneous dissipation `𝓓(t)`.
    #[serde(rename = "D_disc")]
    pub d_disc: f64,
    #[serde(rename = "S_proxy")]
    pub s_proxy: f64,
    pub conserved: f64,
    pub max_q: f64,
    pub h_l2: f64,
    pub h_h45: f64,
    /// Decay rate of `‖q‖²_{H⁴}` over the trailing half of `[0, t]`.
    pub beta_hat: f64,
    /// `inf_Γ ∂_N q_t`.
    pub qt_sign: f64,
}

impl DiagnosticsRow {
    pub const HEADER: &'static str = "t,chi,E_disc,D_disc,S_proxy,conserved,max_q,h_l2,h_h45,beta_hat,qt_sign";

    pub fn csv_line(&self) -> String {
        [
            self.t,
            self.chi,
            self.e_disc,
            self.d_disc,
            self.s_proxy,
            self.conserved,
            self.max_q,
            self.h_l2,
            self.h_h45,
            self.beta_hat,
            self.qt_sign,
        ]
        .iter()
        .map(|v| format!("{v:e}"))
        .collect::<Vec<_>>()
        .join(",")
    }
}

/// Components of `S` kept separately so that each can be audited.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NormComponents {
    pub sup_q_h4: f64,
    pub sup_qt_h2: f64,
    pub int_q_h4: f64,
    pub int_qt_h2: f64,
    /// `sup e^{βs}‖q‖²_{H⁴}`.
    pub sup_weighted_q_h4: f64,
    pub int_v_tangential: f64,
    pub sup_h_h6: f64,
    pub sup_ht_h4: f64,
    pub int_ht_h5: f64,
    pub sup_h_h45: f64,
}

impl NormComponents {
    pub fn total(&self, chi: f64) -> f64 {
        self.sup_q_h4
            + self.sup_qt_h2
            + self.int_q_h4
            + self.int_qt_h2
            + self.sup_weighted_q_h4
            + self.int_v_tangential
            + chi * (self.sup_h_h6 + self.sup_ht_h4 + self.int_ht_h5)
            + self.sup_h_h45 * self.sup_h_h45
    }
}

/// Accumulates measurements in time order.
#[derive(Clone, Debug)]
pub struct Tracker {
    beta: f64,
    norm: NormComponents,
    sup_energy: f64,
    int_dissipation: f64,
    last: Option<Measurement>,
    h4_history: Vec<(f64, f64)>,
}

impl Tracker {
    /// `beta = 2λ − η` weights the exponential term of `S`.
    pub fn new(beta: f64) -> Self {
        Tracker {
            beta,
            norm: NormComponents::default(),
            sup_energy: 0.0,
            int_dissipation: 0.0,
            last: None,
            h4_history: Vec::new(),
        }
    }

    pub fn norm(&self) -> &NormComponents {
        &self.norm
    }

    pub fn push(&mut self, m: Measurement, qt_sign: f64) -> DiagnosticsRow {
        let n = &mut self.norm;
        n.sup_q_h4 = n.sup_q_h4.max(m.q_h4_sq);
        n.sup_qt_h2 = n.sup_qt_h2.max(m.qt_h2_sq);
        n.sup_weighted_q_h4 = n.sup_weighted_q_h4.max((self.beta * m.t).exp() * m.q_h4_sq);
        n.sup_h_h6 = n.sup_h_h6.max(m.h_h6_sq);
        n.sup_ht_h4 = n.sup_ht_h4.max(m.ht_h4_sq);
        n.sup_h_h45 = n.sup_h_h45.max(m.h_h45_sq);
        self.sup_energy = self.sup_energy.max(m.energy.total());
        if let Some(prev) = &self.last {
            let half = 0.5 * (m.t - prev.t);
            n.int_q_h4 += half * (prev.q_h4_sq + m.q_h4_sq);
            n.int_qt_h2 += half * (prev.qt_h2_sq + m.qt_h2_sq);
            n.int_v_tangential += half * (prev.v_tangential + m.v_tangential);
            n.int_ht_h5 += half * (prev.ht_h5_sq + m.ht_h5_sq);
            self.int_dissipation += half * (prev.dissipation.total() + m.dissipation.total());
        }
        if m.q_h4_sq > 0.0 {
            self.h4_history.push((m.t, m.q_h4_sq));
        }
        let start = self.h4_history.partition_point(|&(t, _)| t < 0.5 * m.t);
        let window = &self.h4_history[start..];
        let beta_hat = if window.len() >= 3 {
            decay_fit(window).map(|s| -s).unwrap_or(0.0)
        } else {
            0.0
        };
        let row = DiagnosticsRow {
            t: m.t,
            chi: m.chi,
            e_disc: self.sup_energy + self.int_dissipation,
            d_disc: m.dissipation.total(),
            s_proxy: self.norm.total(m.chi),
            conserved: m.conserved,
            max_q: m.max_q,
            h_l2: m.h_l2,
            h_h45: m.h_h45_sq.sqrt(),
            beta_hat,
            qt_sign,
        };
        self.last = Some(m);
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{DissipationParts, EnergyParts};

    fn sample(t: f64, q: f64) -> Measurement {
        Measurement {
            t,
            chi: 1.0,
            energy: EnergyParts {
                velocity_tangential: q,
                ..Default::default()
            },
            dissipation: DissipationParts {
                velocity_tangential: q,
                ..Default::default()
            },
            q_h4_sq: q,
            q_l2: q.sqrt(),
            qt_h2_sq: q,
            v_tangential: q,
            h_h6_sq: 0.0,
            h_h45_sq: 0.0,
            ht_h4_sq: 0.0,
            ht_h5_sq: 0.0,
            h_l2: 0.0,
            conserved: 1.0,
            max_q: q,
            min_q: 0.0,
            qt_sign_pde: 0.0,
        }
    }

    #[test]
    fn zero_trajectory_has_zero_norm() {
        let mut tr = Tracker::new(1.0);
        for i in 0..5 {
            let row = tr.push(sample(i as f64 * 0.1, 0.0), 0.0);
            assert_eq!(row.s_proxy, 0.0);
            assert_eq!(row.e_disc, 0.0);
        }
    }

    #[test]
    fn sup_terms_never_decrease() {
        let mut tr = Tracker::new(2.0 * 5.78 - 0.578);
        let mut prev = NormComponents::default();
        for i in 0..40 {
            let t = i as f64 * 0.05;
            tr.push(sample(t, (-2.0 * 5.78 * t).exp()), 0.0);
            let n = tr.norm().clone();
            assert!(n.sup_q_h4 >= prev.sup_q_h4);
            assert!(n.sup_weighted_q_h4 >= prev.sup_weighted_q_h4);
            prev = n;
        }
    }

    #[test]
    fn eigenmode_weighted_term() {
        // e^{βt}·e^{−2λt} = e^{−ηt}: the sup stays at the initial value
        let (lambda, eta) = (5.78, 0.578);
        let mut tr = Tracker::new(2.0 * lambda - eta);
        for i in 0..40 {
            let t = i as f64 * 0.05;
            tr.push(sample(t, 3.0 * (-2.0 * lambda * t).exp()), 0.0);
        }
        assert!((tr.norm().sup_weighted_q_h4 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn running_rate_recovers_exponent() {
        let mut tr = Tracker::new(0.0);
        let mut row = None;
        for i in 0..200 {
            let t = i as f64 * 0.01;
            row = Some(tr.push(sample(t, (-4.0 * t).exp()), 0.0));
        }
        assert!((row.unwrap().beta_hat - 4.0).abs() < 1e-9);
    }

    #[test]
    fn csv_line_round_trips() {
        let mut tr = Tracker::new(1.0);
        let row = tr.push(sample(0.1, 0.3), -2.5e-7);
        let parsed: Vec<f64> = row.csv_line().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(parsed.len(), DiagnosticsRow::HEADER.split(',').count());
        assert_eq!(parsed[0], 0.1);
        assert_eq!(parsed[10], -2.5e-7);
    }
}
