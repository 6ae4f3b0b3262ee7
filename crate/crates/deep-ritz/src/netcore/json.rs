use serde::{Deserialize, Serialize};

use super::network::{Layer, ParallelNetwork, SubNetwork};
use crate::error::{invalid, Result};

#[derive(Serialize, Deserialize)]
struct SubnetJson {
    #[serde(rename = "A")]
    a: Vec<Vec<Vec<f64>>>,
    b: Vec<Vec<f64>>,
}

/// On-disk form: `{m, W, L, d, coefficients, subnets: [{A, b}], provenance?}`.
#[derive(Serialize, Deserialize)]
struct NetJson {
    m: usize,
    #[serde(rename = "W")]
    width: usize,
    #[serde(rename = "L")]
    depth: usize,
    d: usize,
    coefficients: Vec<f64>,
    subnets: Vec<SubnetJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<serde_json::Value>,
}

impl ParallelNetwork {
    pub fn to_json(&self, provenance: Option<serde_json::Value>) -> serde_json::Value {
        let shape = self.shape();
        let doc = NetJson {
            m: shape.m,
            width: shape.width,
            depth: shape.depth,
            d: shape.d,
            coefficients: self.coefficients().to_vec(),
            subnets: self.subnets().iter().map(|s| SubnetJson { a: s.layer_matrices(), b: s.layer_biases() }).collect(),
            provenance,
        };
        serde_json::to_value(doc).expect("network serializes")
    }

    pub fn to_json_string(&self, provenance: Option<serde_json::Value>) -> String {
        serde_json::to_string_pretty(&self.to_json(provenance)).expect("network serializes")
    }

    /// Parses the JSON form; returns the network and any provenance block.
    pub fn from_json(value: &serde_json::Value) -> Result<(Self, Option<serde_json::Value>)> {
        let doc: NetJson = serde_json::from_value(value.clone())?;
        if doc.subnets.len() != doc.m {
            return Err(invalid(format!("m = {} but {} subnets listed", doc.m, doc.subnets.len())));
        }
        let subnets = doc
            .subnets
            .iter()
            .map(|s| {
                if s.a.len() != s.b.len() {
                    return Err(invalid("each subnet needs one bias per matrix"));
                }
                let layers = s.a.iter().zip(&s.b).map(|(a, b)| Layer::from_rows(a, b.clone())).collect::<Result<Vec<_>>>()?;
                SubNetwork::new(layers, doc.width)
            })
            .collect::<Result<Vec<_>>>()?;
        let net = ParallelNetwork::new(subnets, doc.coefficients)?;
        let shape = net.shape();
        if shape.depth != doc.depth || shape.d != doc.d {
            return Err(invalid("declared L or d disagrees with the listed layers"));
        }
        Ok((net, doc.provenance))
    }

    pub fn from_json_str(s: &str) -> Result<(Self, Option<serde_json::Value>)> {
        Self::from_json(&serde_json::from_str(s)?)
    }
}
