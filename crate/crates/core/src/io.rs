//! JSON serialization for channels and circuits. Matrices serialize as
//! nested arrays of `[re, im]` pairs; floating-point values round-trip
//! exactly through serde_json's shortest-representation printing.

use crate::channel::QuantumChannel;
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::register::{QubitLabel, QubitRegister};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

type MatrixDoc = Vec<Vec<[f64; 2]>>;

fn matrix_to_doc(m: &DMatrix<Complex64>) -> MatrixDoc {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn matrix_from_doc(doc: &MatrixDoc) -> Result<DMatrix<Complex64>> {
    let rows = doc.len();
    if rows == 0 {
        return Err(Error::Serialization("empty matrix".into()));
    }
    let cols = doc[0].len();
    if doc.iter().any(|r| r.len() != cols) {
        return Err(Error::Serialization("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| {
        Complex64::new(doc[i][j][0], doc[i][j][1])
    }))
}

#[derive(Serialize, Deserialize)]
struct ChannelDoc {
    schema_version: u32,
    labels: Vec<u32>,
    kraus: Vec<MatrixDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<BTreeMap<String, String>>,
}

/// Serialize a channel, with optional provenance (constructor, parameters).
pub fn channel_to_json(
    channel: &QuantumChannel,
    provenance: Option<BTreeMap<String, String>>,
) -> String {
    let doc = ChannelDoc {
        schema_version: SCHEMA_VERSION,
        labels: channel.register().labels().iter().map(|l| l.0).collect(),
        kraus: channel.kraus().iter().map(matrix_to_doc).collect(),
        provenance,
    };
    serde_json::to_string_pretty(&doc).expect("channel document serializes")
}

pub fn channel_from_json(json: &str) -> Result<QuantumChannel> {
    let doc: ChannelDoc =
        serde_json::from_str(json).map_err(|e| Error::Serialization(e.to_string()))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::Serialization(format!(
            "unsupported schema version {}",
            doc.schema_version
        )));
    }
    let register = QubitRegister::from_labels(doc.labels.into_iter().map(QubitLabel).collect())?;
    let kraus = doc
        .kraus
        .iter()
        .map(matrix_from_doc)
        .collect::<Result<Vec<_>>>()?;
    QuantumChannel::new(register, kraus)
}

#[derive(Serialize, Deserialize)]
struct GateDoc {
    qubits: Vec<u32>,
    unitary: MatrixDoc,
}

#[derive(Serialize, Deserialize)]
struct CircuitDoc {
    schema_version: u32,
    labels: Vec<u32>,
    layers: Vec<Vec<GateDoc>>,
}

pub fn circuit_to_json(circuit: &Circuit) -> String {
    let doc = CircuitDoc {
        schema_version: SCHEMA_VERSION,
        labels: circuit.register().labels().iter().map(|l| l.0).collect(),
        layers: circuit
            .layers()
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|g| GateDoc {
                        qubits: g.qubits().iter().map(|q| q.0).collect(),
                        unitary: matrix_to_doc(g.unitary()),
                    })
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("circuit document serializes")
}

pub fn circuit_from_json(json: &str) -> Result<Circuit> {
    let doc: CircuitDoc =
        serde_json::from_str(json).map_err(|e| Error::Serialization(e.to_string()))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::Serialization(format!(
            "unsupported schema version {}",
            doc.schema_version
        )));
    }
    let register = QubitRegister::from_labels(doc.labels.into_iter().map(QubitLabel).collect())?;
    let layers = doc
        .layers
        .iter()
        .map(|layer| {
            layer
                .iter()
                .map(|g| {
                    Gate::new(
                        g.qubits.iter().map(|&q| QubitLabel(q)).collect(),
                        matrix_from_doc(&g.unitary)?,
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Circuit::new(register, layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::ErrorMaskDistribution;

    #[test]
    fn channel_json_round_trip_is_exact() {
        let dist = ErrorMaskDistribution::all_or_nothing(2, 1.0 / 3.0).unwrap();
        let e = QuantumChannel::simple_error(QubitRegister::new(2), &dist).unwrap();
        let json = channel_to_json(&e, None);
        let back = channel_from_json(&json).unwrap();
        assert_eq!(back.kraus().len(), e.kraus().len());
        for (a, b) in e.kraus().iter().zip(back.kraus()) {
            // serde_json prints shortest round-trip floats, so entries come
            // back bit-identical
            assert_eq!(a, b);
        }
    }

    #[test]
    fn schema_version_mismatch_rejected() {
        let e = QuantumChannel::identity(QubitRegister::new(1));
        let json = channel_to_json(&e, None).replace("\"schema_version\": 1", "\"schema_version\": 99");
        assert!(channel_from_json(&json).is_err());
    }
}
