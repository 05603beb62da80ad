//! Cut selection, quasi-probability expansions of cut gates, and fragment
//! planning.

mod coupling;
mod fragments;
mod oracle;
mod qpd;
mod select;

pub use coupling::CouplingMap;
pub use fragments::{fragment_circuits, Fragment, Slot, SlotRole};
pub use oracle::{
    conformance_report, cx_channel_error, terms_choi, ucry_channel_error, ucry_matrix,
    wire_table_choi, ChannelReport, CHANNEL_TOL,
};
pub use qpd::{
    expand_cut_cx, expand_cut_cz, expand_cut_ucry, gamma, identity_wire_table, merge_settings,
    post_processing_terms, printed_wire_table, qpd_overhead, sampling_variance_bound, CutSetting,
    CutStrategy, QpdTerm, Weighting, WireRow,
};
pub use select::{sparse_cut_select, CutCandidate, DistanceMode};

use serde::Serialize;

use crate::circuit::{Circuit, GateOp};
use crate::error::{Error, Result};

/// Everything needed to turn a circuit into subexperiments.
#[derive(Debug, Clone, Serialize)]
pub struct CutPlan {
    pub strategy: CutStrategy,
    /// Ascending gate indices of the cut gates.
    pub cut_indices: Vec<usize>,
    pub terms_per_cut: Vec<Vec<QpdTerm>>,
    pub settings_per_cut: Vec<Vec<CutSetting>>,
    pub fragments: Vec<Fragment>,
    pub gamma_total: f64,
}

impl CutPlan {
    pub fn new(circuit: &Circuit, cut_indices: &[usize], strategy: CutStrategy) -> Result<Self> {
        let mut cuts = cut_indices.to_vec();
        cuts.sort_unstable();
        if cuts.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::PlanMismatch("duplicate cut index".into()));
        }
        let mut terms_per_cut = Vec::with_capacity(cuts.len());
        for &c in &cuts {
            let terms = match circuit.ops().get(c) {
                Some(GateOp::CX { .. }) => expand_cut_cx(strategy),
                Some(GateOp::CZ(..)) => expand_cut_cz(strategy),
                Some(op) => {
                    return Err(Error::PlanMismatch(format!("op {c} ({op}) cannot be cut")))
                }
                None => {
                    return Err(Error::IndexOutOfRange {
                        index: c,
                        limit: circuit.len(),
                    })
                }
            };
            terms_per_cut.push(terms);
        }
        let settings_per_cut = terms_per_cut
            .iter()
            .map(|t| merge_settings(t))
            .collect::<Result<Vec<_>>>()?;
        let gamma_total = terms_per_cut.iter().map(|t| gamma(t)).product();
        Ok(CutPlan {
            strategy,
            fragments: fragment_circuits(circuit, &cuts)?,
            cut_indices: cuts,
            terms_per_cut,
            settings_per_cut,
            gamma_total,
        })
    }

    pub fn from_candidates(
        circuit: &Circuit,
        picked: &[CutCandidate],
        strategy: CutStrategy,
    ) -> Result<Self> {
        let idx: Vec<usize> = picked.iter().map(|c| c.gate_index).collect();
        CutPlan::new(circuit, &idx, strategy)
    }

    pub fn num_cuts(&self) -> usize {
        self.cut_indices.len()
    }

    /// Π settings per cut, `6^M` for CX cuts.
    pub fn subexperiment_count(&self) -> usize {
        self.settings_per_cut.iter().map(Vec::len).product()
    }

    /// Signed terms summed in post-processing.
    pub fn post_processing_term_count(&self) -> usize {
        self.terms_per_cut.iter().map(Vec::len).product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{build_encoder_circuit, data_to_angles};

    #[test]
    fn plan_counts() {
        let data: Vec<f64> = (0..24).map(|i| (i as f64 / 12.0) - 1.0).collect();
        let c = build_encoder_circuit(&data_to_angles(&data, 3, 3).unwrap()).unwrap();
        let picked = sparse_cut_select(
            &c,
            &[0, 1, 2],
            &[3, 4, 5],
            3,
            DistanceMode::VirtualAbs,
            None,
        )
        .unwrap();
        for m in 0..=3 {
            let plan = CutPlan::from_candidates(&c, &picked[..m], CutStrategy::GateCut).unwrap();
            assert_eq!(plan.subexperiment_count(), 6usize.pow(m as u32));
            assert!((plan.gamma_total - 3f64.powi(m as i32)).abs() < 1e-12);
            let p = CutPlan::from_candidates(&c, &picked[..m], CutStrategy::PauliTable).unwrap();
            assert_eq!(p.subexperiment_count(), 6usize.pow(m as u32));
            assert_eq!(p.post_processing_term_count(), 10usize.pow(m as u32));
        }
        assert!(CutPlan::new(&c, &[0], CutStrategy::GateCut).is_err());
        assert!(CutPlan::new(&c, &[picked[0].gate_index; 2], CutStrategy::GateCut).is_err());
    }
}
