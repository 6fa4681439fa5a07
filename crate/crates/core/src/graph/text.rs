//! Plain-text graph format, one line per node:
//!
//! ```text
//! node 0 : 1@1 3@0
//! node 1 : 2@1 0@0
//! ```
//!
//! Entries are `neighbor@entryport` in local port order. Blank lines and
//! lines starting with `#` are ignored.

use super::{NodeId, Port, PortGraph};
use crate::error::{Error, Result};

impl PortGraph {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for u in self.nodes() {
            out.push_str(&format!("node {u} :"));
            for h in self.ports(u) {
                out.push_str(&format!(" {}@{}", h.to, h.entry));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format and validates every graph invariant.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<Option<Vec<(usize, Port)>>> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let (head, tail) = line
                .split_once(':')
                .ok_or_else(|| err("expected `node <id> : ...`".into()))?;
            let mut head_words = head.split_whitespace();
            if head_words.next() != Some("node") {
                return Err(err("line must start with `node`".into()));
            }
            let id: usize = head_words
                .next()
                .ok_or_else(|| err("missing node id".into()))?
                .parse()
                .map_err(|_| err("node id is not an integer".into()))?;
            if head_words.next().is_some() {
                return Err(err("unexpected token before `:`".into()));
            }
            let mut row = Vec::new();
            for entry in tail.split_whitespace() {
                let (v, q) = entry
                    .split_once('@')
                    .ok_or_else(|| err(format!("entry `{entry}` is not `neighbor@port`")))?;
                let v: usize = v
                    .parse()
                    .map_err(|_| err(format!("bad neighbor in `{entry}`")))?;
                let q: Port = q
                    .parse()
                    .map_err(|_| err(format!("bad entry port in `{entry}`")))?;
                row.push((v, q));
            }
            if rows.len() <= id {
                rows.resize(id + 1, None);
            }
            if rows[id].is_some() {
                return Err(err(format!("node {id} listed twice")));
            }
            rows[id] = Some(row);
        }
        let adj = rows
            .into_iter()
            .enumerate()
            .map(|(id, row)| {
                row.ok_or_else(|| Error::Parse {
                    line: 0,
                    message: format!("node {} missing", NodeId::from(id)),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PortGraph::from_adjacency(adj)
    }
}
