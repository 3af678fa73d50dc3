use serde::{Deserialize, Serialize};

use super::{Edge, EdgeKind, NarrativeGraph, NarrativeNode, NodeId, TropeType};
use crate::error::{DocumentError, GraphError};

/// Wire form of a graph: flat node and edge lists keyed by string ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub nodes: Vec<NodeDocument>,
    pub edges: Vec<EdgeDocument>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDocument {
    pub id: String,
    pub trope: TropeType,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDocument {
    pub src: String,
    pub dst: String,
    pub kind: EdgeKind,
}

impl From<&NarrativeGraph> for GraphDocument {
    fn from(g: &NarrativeGraph) -> Self {
        GraphDocument {
            nodes: g
                .nodes
                .iter()
                .map(|n| NodeDocument {
                    id: n.id.0.clone(),
                    trope: n.trope,
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeDocument {
                    src: g.nodes[e.src].id.0.clone(),
                    dst: g.nodes[e.dst].id.0.clone(),
                    kind: e.kind,
                })
                .collect(),
        }
    }
}

impl From<NarrativeGraph> for GraphDocument {
    fn from(g: NarrativeGraph) -> Self {
        GraphDocument::from(&g)
    }
}

impl TryFrom<GraphDocument> for NarrativeGraph {
    type Error = GraphError;

    fn try_from(doc: GraphDocument) -> Result<Self, Self::Error> {
        let nodes: Vec<NarrativeNode> = doc
            .nodes
            .into_iter()
            .map(|n| NarrativeNode {
                id: NodeId(n.id),
                trope: n.trope,
            })
            .collect();
        let lookup = |id: &str| {
            nodes
                .iter()
                .position(|n| n.id.as_str() == id)
                .ok_or_else(|| GraphError::Dangling(id.to_owned()))
        };
        let edges = doc
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    src: lookup(&e.src)?,
                    dst: lookup(&e.dst)?,
                    kind: e.kind,
                })
            })
            .collect::<Result<Vec<_>, GraphError>>()?;
        NarrativeGraph::new(nodes, edges)
    }
}

impl NarrativeGraph {
    pub fn to_document(&self) -> GraphDocument {
        GraphDocument::from(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("graph documents serialize")
    }

    pub fn from_json(text: &str) -> Result<NarrativeGraph, DocumentError> {
        let doc: GraphDocument = serde_json::from_str(text).map_err(DocumentError::from_json)?;
        NarrativeGraph::try_from(doc).map_err(DocumentError::Integrity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = NarrativeGraph::default_graph();
        let text = g.to_json();
        assert_eq!(NarrativeGraph::from_json(&text).unwrap(), g);
    }

    #[test]
    fn key_order_is_stable() {
        let text = serde_json::to_string(&NarrativeGraph::default_graph()).unwrap();
        assert_eq!(
            text,
            r#"{"nodes":[{"id":"n0","trope":"HERO"},{"id":"n1","trope":"CONFLICT"},{"id":"n2","trope":"ENEMY"}],"edges":[{"src":"n0","dst":"n1","kind":"PLAIN"},{"src":"n1","dst":"n2","kind":"PLAIN"}]}"#
        );
    }

    #[test]
    fn dangling_edge_is_integrity_error() {
        let text = r#"{"nodes":[{"id":"a","trope":"HERO"}],"edges":[{"src":"a","dst":"b","kind":"PLAIN"}]}"#;
        assert!(matches!(
            NarrativeGraph::from_json(text),
            Err(DocumentError::Integrity(GraphError::Dangling(_)))
        ));
    }

    #[test]
    fn unknown_trope_is_parse_error_with_location() {
        let text = "{\"nodes\":[\n{\"id\":\"a\",\"trope\":\"WIZARD\"}],\"edges\":[]}";
        match NarrativeGraph::from_json(text) {
            Err(DocumentError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_document_rejected() {
        assert!(matches!(
            NarrativeGraph::from_json(r#"{"nodes":[],"edges":[]}"#),
            Err(DocumentError::Integrity(GraphError::Empty))
        ));
    }
}
