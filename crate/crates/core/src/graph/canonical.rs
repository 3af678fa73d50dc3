use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EdgeKind, NarrativeGraph, TropeType};

/// Id-free description of a graph element. Node tokens sort before edge tokens.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Token {
    Node(TropeType),
    Edge(TropeType, EdgeKind, TropeType),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Node(t) => write!(f, "{t}"),
            Token::Edge(s, k, d) => write!(f, "({s},{},{d})", k.code()),
        }
    }
}

/// Hex SHA-256 of a graph's canonical token sequence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GraphDigest(pub String);

impl fmt::Display for GraphDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl NarrativeGraph {
    /// Sorted node tropes followed by sorted `(src, kind, dst)` edge triples.
    pub fn canonical_tokens(&self) -> Vec<Token> {
        let mut nodes: Vec<Token> = self.nodes.iter().map(|n| Token::Node(n.trope)).collect();
        let mut edges: Vec<Token> = self
            .edges
            .iter()
            .map(|e| Token::Edge(self.trope(e.src), e.kind, self.trope(e.dst)))
            .collect();
        nodes.sort_unstable();
        edges.sort_unstable();
        nodes.extend(edges);
        nodes
    }

    pub fn edit_distance(&self, other: &NarrativeGraph) -> usize {
        levenshtein(&self.canonical_tokens(), &other.canonical_tokens())
    }

    pub fn canonical_hash(&self) -> GraphDigest {
        let mut hasher = Sha256::new();
        for token in self.canonical_tokens() {
            hasher.update(token.to_string().as_bytes());
            hasher.update(b";");
        }
        GraphDigest(hex::encode(hasher.finalize()))
    }
}

/// Token-level Levenshtein distance (unit insert, delete and substitute costs).
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let above = row[j + 1];
            let cost = if x == y { diag } else { diag + 1 };
            row[j + 1] = cost.min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}
