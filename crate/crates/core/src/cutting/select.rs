use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::coupling::CouplingMap;
use crate::circuit::{Circuit, GateOp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DistanceMode {
    /// `|i - j|` on virtual indices.
    #[default]
    VirtualAbs,
    /// BFS hop count on the coupling map under its layout.
    PhysicalShortestPath,
}

impl DistanceMode {
    pub fn name(self) -> &'static str {
        match self {
            DistanceMode::VirtualAbs => "virtual_abs",
            DistanceMode::PhysicalShortestPath => "physical_shortest_path",
        }
    }
}

impl FromStr for DistanceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "virtual_abs" => Ok(DistanceMode::VirtualAbs),
            "physical_shortest_path" => Ok(DistanceMode::PhysicalShortestPath),
            _ => Err(Error::UnknownOption(s.to_string())),
        }
    }
}

/// A two-qubit gate coupling the address and data registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutCandidate {
    pub gate_index: usize,
    pub control: usize,
    pub target: usize,
    pub distance: usize,
}

/// Greedy longest-distance cut selection.
///
/// Every two-qubit gate with one endpoint in each register is a candidate;
/// candidates are ranked by descending distance, ties broken by ascending
/// gate index, and the first `max_cuts` are returned.
pub fn sparse_cut_select(
    circuit: &Circuit,
    addr: &[usize],
    data: &[usize],
    max_cuts: usize,
    mode: DistanceMode,
    coupling: Option<&CouplingMap>,
) -> Result<Vec<CutCandidate>> {
    if let Some(&q) = addr.iter().find(|q| data.contains(q)) {
        return Err(Error::OverlappingSets(q));
    }
    let coupling =
        match mode {
            DistanceMode::PhysicalShortestPath => Some(coupling.ok_or_else(|| {
                Error::Config("physical_shortest_path needs a coupling map".into())
            })?),
            DistanceMode::VirtualAbs => None,
        };
    let mut pool = Vec::new();
    for (gate_index, op) in circuit.ops().iter().enumerate() {
        let (control, target) = match *op {
            GateOp::CX { control, target } => (control, target),
            GateOp::CZ(a, b) => (a, b),
            _ => continue,
        };
        let crosses = (addr.contains(&control) && data.contains(&target))
            || (data.contains(&control) && addr.contains(&target));
        if !crosses {
            continue;
        }
        let distance = match coupling {
            Some(map) => map.distance(control, target)?,
            None => control.abs_diff(target),
        };
        pool.push(CutCandidate {
            gate_index,
            control,
            target,
            distance,
        });
    }
    pool.sort_by(|a, b| {
        b.distance
            .cmp(&a.distance)
            .then(a.gate_index.cmp(&b.gate_index))
    });
    pool.truncate(max_cuts);
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{build_encoder_circuit, data_to_angles};

    fn encoder(na: usize, nd: usize) -> Circuit {
        let n = (1 << na) * nd;
        let data: Vec<f64> = (0..n).map(|i| (i as f64 / n as f64) - 0.5).collect();
        build_encoder_circuit(&data_to_angles(&data, na, nd).unwrap()).unwrap()
    }

    #[test]
    fn two_address_encoder_cuts_the_sixth_gate() {
        let c = encoder(2, 1);
        let picked =
            sparse_cut_select(&c, &[0, 1], &[2], 1, DistanceMode::VirtualAbs, None).unwrap();
        assert_eq!(picked.len(), 1);
        assert_eq!(picked[0].gate_index, 5);
        assert_eq!(
            (picked[0].control, picked[0].target, picked[0].distance),
            (0, 2, 2)
        );
    }

    #[test]
    fn three_by_three_top_candidate_couples_q0_q5() {
        let c = encoder(3, 3);
        let a = [0, 1, 2];
        let d = [3, 4, 5];
        let top = sparse_cut_select(&c, &a, &d, 1, DistanceMode::VirtualAbs, None).unwrap()[0];
        assert_eq!((top.control, top.target, top.distance), (0, 5, 5));
        let map = CouplingMap::heavy_hex_sample();
        let top = sparse_cut_select(
            &c,
            &a,
            &d,
            1,
            DistanceMode::PhysicalShortestPath,
            Some(&map),
        )
        .unwrap()[0];
        assert_eq!((top.control, top.target, top.distance), (0, 5, 5));
    }

    #[test]
    fn pool_is_complete_and_ordered() {
        let c = encoder(3, 2);
        let all = sparse_cut_select(
            &c,
            &[0, 1, 2],
            &[3, 4],
            usize::MAX,
            DistanceMode::VirtualAbs,
            None,
        )
        .unwrap();
        assert_eq!(all.len(), c.two_qubit_gate_count());
        assert!(all.windows(2).all(|w| w[0].distance > w[1].distance
            || (w[0].distance == w[1].distance && w[0].gate_index < w[1].gate_index)));
        assert!(
            sparse_cut_select(&c, &[0, 1, 2], &[3, 4], 0, DistanceMode::VirtualAbs, None)
                .unwrap()
                .is_empty()
        );
        // Gates inside one register never qualify.
        let inner = Circuit::from_ops(
            3,
            0,
            vec![GateOp::CX {
                control: 0,
                target: 1,
            }],
        )
        .unwrap();
        assert!(
            sparse_cut_select(&inner, &[0, 1], &[2], 5, DistanceMode::VirtualAbs, None)
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn errors() {
        let c = encoder(1, 1);
        assert!(matches!(
            sparse_cut_select(&c, &[0, 1], &[1], 1, DistanceMode::VirtualAbs, None),
            Err(Error::OverlappingSets(1))
        ));
        assert!(
            sparse_cut_select(&c, &[0], &[1], 1, DistanceMode::PhysicalShortestPath, None).is_err()
        );
        assert!("manhattan".parse::<DistanceMode>().is_err());
    }
}
