//! The JSON graph file format.
//!
//! ```json
//! { "vertices": ["v1", "v2"],
//!   "links": [{"id": "e1", "tail": "v1", "head": "v2"}],
//!   "plaquettes": [],
//!   "link_values": {"e1": 1.0} }
//! ```
//!
//! Array order fixes matrix row and column indices. `plaquettes` and
//! `link_values` are optional.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::chain_complex::{LinkDecl, LinkValues, OrientedGraph, PlaquetteDecl};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: Vec<String>,
    pub links: Vec<LinkDecl>,
    #[serde(default)]
    pub plaquettes: Vec<PlaquetteDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_values: Option<BTreeMap<String, f64>>,
}

impl GraphDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_graph(graph: &OrientedGraph, values: Option<&LinkValues>) -> Self {
        Self {
            vertices: graph.vertices().to_vec(),
            links: graph.link_decls(),
            plaquettes: graph.plaquette_decls(),
            link_values: values.map(|v| {
                graph
                    .links()
                    .iter()
                    .zip(v.as_vector().iter())
                    .map(|(l, &x)| (l.id.clone(), x))
                    .collect()
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph documents always serialize")
    }

    pub fn graph(&self) -> Result<OrientedGraph> {
        OrientedGraph::new(
            self.vertices.clone(),
            self.links.clone(),
            self.plaquettes.clone(),
        )
    }

    /// Link values in link order. Every link needs a value and every key must
    /// name a link.
    pub fn link_values(&self, graph: &OrientedGraph) -> Result<Option<LinkValues>> {
        let Some(map) = &self.link_values else {
            return Ok(None);
        };
        if let Some(unknown) = map.keys().find(|k| graph.link_position(k).is_none()) {
            return Err(Error::MalformedGraph(format!(
                "link_values names unknown link `{unknown}`"
            )));
        }
        let values = graph
            .links()
            .iter()
            .map(|l| {
                map.get(&l.id).copied().ok_or_else(|| {
                    Error::MalformedGraph(format!("link_values is missing link `{}`", l.id))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        LinkValues::new(DVector::from_vec(values)).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fixture_round_trip() {
        let doc = GraphDocument::from_json(fixtures::SIX_VERTEX_JSON).unwrap();
        let g = doc.graph().unwrap();
        let values = doc.link_values(&g).unwrap().unwrap();
        let again = GraphDocument::from_graph(&g, Some(&values));
        assert_eq!(again, doc);
        assert_eq!(GraphDocument::from_json(&again.to_json()).unwrap(), doc);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = GraphDocument::from_json("{\"vertices\": [\"v1\",\n 3]}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn incomplete_link_values_rejected() {
        let text =
            r#"{"vertices":["a","b"],"links":[{"id":"x","tail":"a","head":"b"}],"link_values":{}}"#;
        let doc = GraphDocument::from_json(text).unwrap();
        let g = doc.graph().unwrap();
        assert!(doc.link_values(&g).is_err());
    }
}
