//! File formats: whitespace edge lists, signal and flow CSVs, node lists,
//! and the JSON artifacts the pipeline emits. Parsers are pure functions
//! over text; thin wrappers attach file paths to errors.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::{DetectionResult, ExpandedPartition};
use crate::graph::{Graph, NodeSet};
use crate::measures::Partition;
use crate::FailureKind;

/// A format violation at a specific line (line 0 = whole file).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {error}", path.display())]
    Malformed { path: PathBuf, error: ParseError },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
}

impl IoError {
    pub fn kind(&self) -> FailureKind {
        FailureKind::Validation
    }
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

fn malformed(path: &Path, error: ParseError) -> IoError {
    IoError::Malformed { path: path.to_path_buf(), error }
}

/// Edges plus the implied vertex count (max id + 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeListData {
    pub edges: Vec<(usize, usize)>,
    pub node_count: usize,
}

/// Parses a whitespace edge list: `u v` per line, an optional third token
/// that must be the unit weight, `#` comments, blank lines allowed.
pub fn parse_edge_list(text: &str) -> Result<EdgeListData, ParseError> {
    let mut edges = Vec::new();
    let mut node_count = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 && tokens.len() != 3 {
            return Err(ParseError::new(line, "expected 'u v' or 'u v 1'"));
        }
        let u: usize = tokens[0]
            .parse()
            .map_err(|_| ParseError::new(line, format!("bad vertex id '{}'", tokens[0])))?;
        let v: usize = tokens[1]
            .parse()
            .map_err(|_| ParseError::new(line, format!("bad vertex id '{}'", tokens[1])))?;
        if let Some(w) = tokens.get(2) {
            let weight: f64 = w
                .parse()
                .map_err(|_| ParseError::new(line, format!("bad edge weight '{w}'")))?;
            if weight != 1.0 {
                return Err(ParseError::new(
                    line,
                    format!("only unit edge weights are supported, got {w}"),
                ));
            }
        }
        node_count = node_count.max(u + 1).max(v + 1);
        edges.push((u, v));
    }
    if edges.is_empty() {
        return Err(ParseError::new(0, "edge list holds no edges"));
    }
    Ok(EdgeListData { edges, node_count })
}

pub fn load_graph(path: &Path) -> Result<Graph, IoError> {
    let text = read_text(path)?;
    let data = parse_edge_list(&text).map_err(|e| malformed(path, e))?;
    Graph::from_edge_list(&data.edges, data.node_count)
        .map_err(|e| IoError::Invalid { path: path.to_path_buf(), message: e.to_string() })
}

/// Parses a `node,value` CSV (header optional); returns pairs sorted by
/// node id.
pub fn parse_signal_csv(text: &str) -> Result<Vec<(usize, f64)>, ParseError> {
    let mut pairs: Vec<(usize, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        if content == "node,value" {
            continue;
        }
        let (node, value) = content
            .split_once(',')
            .ok_or_else(|| ParseError::new(line, "expected 'node,value'"))?;
        let node: usize = node
            .trim()
            .parse()
            .map_err(|_| ParseError::new(line, format!("bad vertex id '{node}'")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| ParseError::new(line, format!("bad value '{value}'")))?;
        if !value.is_finite() {
            return Err(ParseError::new(line, format!("value for node {node} is not finite")));
        }
        pairs.push((node, value));
    }
    pairs.sort_by_key(|&(node, _)| node);
    if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(ParseError::new(0, format!("duplicate value for node {}", w[0].0)));
    }
    Ok(pairs)
}

pub fn format_signal_csv(pairs: &[(usize, f64)]) -> String {
    let mut out = String::from("node,value\n");
    for &(node, value) in pairs {
        out.push_str(&format!("{node},{value}\n"));
    }
    out
}

pub fn load_signal(path: &Path) -> Result<Vec<(usize, f64)>, IoError> {
    let text = read_text(path)?;
    parse_signal_csv(&text).map_err(|e| malformed(path, e))
}

pub fn write_signal(path: &Path, pairs: &[(usize, f64)]) -> Result<(), IoError> {
    write_text(path, &format_signal_csv(pairs))
}

/// Parses one vertex id per line, `#` comments allowed, duplicates rejected.
pub fn parse_node_list(text: &str) -> Result<Vec<usize>, ParseError> {
    let mut ids = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let id: usize = content
            .parse()
            .map_err(|_| ParseError::new(line, format!("bad vertex id '{content}'")))?;
        ids.push(id);
    }
    let mut sorted = ids.clone();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(ParseError::new(0, format!("duplicate vertex id {}", w[0])));
    }
    Ok(ids)
}

pub fn format_node_list(ids: &[usize]) -> String {
    let mut out = String::new();
    for id in ids {
        out.push_str(&format!("{id}\n"));
    }
    out
}

pub fn load_node_list(path: &Path) -> Result<Vec<usize>, IoError> {
    let text = read_text(path)?;
    parse_node_list(&text).map_err(|e| malformed(path, e))
}

pub fn write_node_list(path: &Path, ids: &[usize]) -> Result<(), IoError> {
    write_text(path, &format_node_list(ids))
}

/// One flow measurement of one vertex at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRecord {
    pub node: usize,
    pub timestamp: String,
    pub flow: f64,
}

/// Parses a `node,timestamp,flow` CSV (header optional).
pub fn parse_flow_csv(text: &str) -> Result<Vec<FlowRecord>, ParseError> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        if content == "node,timestamp,flow" {
            continue;
        }
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(ParseError::new(line, "expected 'node,timestamp,flow'"));
        }
        let node: usize = fields[0]
            .parse()
            .map_err(|_| ParseError::new(line, format!("bad vertex id '{}'", fields[0])))?;
        if fields[1].is_empty() {
            return Err(ParseError::new(line, "empty timestamp"));
        }
        let flow: f64 = fields[2]
            .parse()
            .map_err(|_| ParseError::new(line, format!("bad flow value '{}'", fields[2])))?;
        if !flow.is_finite() {
            return Err(ParseError::new(line, format!("flow for node {node} is not finite")));
        }
        records.push(FlowRecord { node, timestamp: fields[1].to_string(), flow });
    }
    Ok(records)
}

pub fn load_flow_csv(path: &Path) -> Result<Vec<FlowRecord>, IoError> {
    let text = read_text(path)?;
    parse_flow_csv(&text).map_err(|e| malformed(path, e))
}

/// Extracts the single-time slice at `timestamp`, sorted by node id.
pub fn slice_flow(
    records: &[FlowRecord],
    timestamp: &str,
) -> Result<Vec<(usize, f64)>, ParseError> {
    let mut pairs: Vec<(usize, f64)> = records
        .iter()
        .filter(|r| r.timestamp == timestamp)
        .map(|r| (r.node, r.flow))
        .collect();
    pairs.sort_by_key(|&(node, _)| node);
    if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(ParseError::new(
            0,
            format!("duplicate measurement for node {} at {timestamp}", w[0].0),
        ));
    }
    if pairs.is_empty() {
        return Err(ParseError::new(0, format!("no measurements at timestamp {timestamp}")));
    }
    Ok(pairs)
}

/// Serialized community structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub communities: Vec<Vec<usize>>,
    pub expanded: Option<Vec<Vec<usize>>>,
    pub modularity: f64,
}

impl PartitionFile {
    pub fn from_detection(d: &DetectionResult) -> Self {
        PartitionFile {
            communities: d.partition.communities().iter().map(|c| c.ids().to_vec()).collect(),
            expanded: Some(
                d.expanded.communities().iter().map(|c| c.ids().to_vec()).collect(),
            ),
            modularity: d.modularity,
        }
    }

    /// Rebuilds the validated structures on a graph with `n` vertices.
    pub fn to_partitions(
        &self,
        n: usize,
    ) -> Result<(Partition, Option<ExpandedPartition>), String> {
        let communities: Vec<NodeSet> = self
            .communities
            .iter()
            .map(|ids| NodeSet::from_unsorted(ids.clone()))
            .collect();
        let partition = Partition::new(communities, n).map_err(|e| e.to_string())?;
        let expanded = match &self.expanded {
            None => None,
            Some(lists) => {
                let sets: Vec<NodeSet> =
                    lists.iter().map(|ids| NodeSet::from_unsorted(ids.clone())).collect();
                Some(
                    ExpandedPartition::new(sets, partition.clone())
                        .map_err(|e| e.to_string())?,
                )
            }
        };
        Ok((partition, expanded))
    }
}

/// Timing breakdown of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeBreakdown {
    pub detect: f64,
    pub fit: f64,
    pub total: f64,
}

/// The reconstruction report emitted by a full pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub approx: Vec<f64>,
    pub rmae: f64,
    pub rrmse: f64,
    pub communities: usize,
    pub time_s: TimeBreakdown,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let body = serde_json::to_string_pretty(value)
        .map_err(|source| IoError::Json { path: path.to_path_buf(), source })?;
    write_text(path, &format!("{body}\n"))
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| IoError::Json { path: path.to_path_buf(), source })
}

/// Plot-data CSV: `node,community,expanded_memberships`, the last column a
/// semicolon-joined list of expanded community indices covering the node.
pub fn format_communities_csv(d: &DetectionResult) -> String {
    let n = d.partition.vertex_count();
    let membership = d.partition.membership(n);
    let mut covering = vec![Vec::new(); n];
    for (j, community) in d.expanded.communities().iter().enumerate() {
        for v in community.iter() {
            covering[v].push(j.to_string());
        }
    }
    let mut out = String::from("node,community,expanded_memberships\n");
    for v in 0..n {
        out.push_str(&format!("{v},{},{}\n", membership[v], covering[v].join(";")));
    }
    out
}

/// Loader for the plot-data CSV; returns (node, community, expanded
/// membership indices) rows.
pub fn parse_communities_csv(
    text: &str,
) -> Result<Vec<(usize, usize, Vec<usize>)>, ParseError> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content == "node,community,expanded_memberships" {
            continue;
        }
        let fields: Vec<&str> = content.split(',').collect();
        if fields.len() != 3 {
            return Err(ParseError::new(line, "expected 'node,community,expanded_memberships'"));
        }
        let node: usize = fields[0]
            .parse()
            .map_err(|_| ParseError::new(line, format!("bad vertex id '{}'", fields[0])))?;
        let community: usize = fields[1]
            .parse()
            .map_err(|_| ParseError::new(line, format!("bad community index '{}'", fields[1])))?;
        let mut memberships = Vec::new();
        if !fields[2].is_empty() {
            for token in fields[2].split(';') {
                memberships.push(token.parse().map_err(|_| {
                    ParseError::new(line, format!("bad membership index '{token}'"))
                })?);
            }
        }
        rows.push((node, community, memberships));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::{detect_communities, CommunityParams};
    use crate::datasets;

    #[test]
    fn edge_list_basic_and_comments() {
        let text = "# demo\n0 1\n\n1 2 1\n 2 3 1.0\n";
        let data = parse_edge_list(text).unwrap();
        assert_eq!(data.edges, vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(data.node_count, 4);
    }

    #[test]
    fn edge_list_rejects_bad_rows() {
        assert_eq!(parse_edge_list("0 1 2 3").unwrap_err().line, 1);
        assert_eq!(parse_edge_list("0 x").unwrap_err().line, 1);
        let weighted = parse_edge_list("0 1 0.5").unwrap_err();
        assert!(weighted.message.contains("unit edge weights"));
        assert_eq!(parse_edge_list("# nothing\n").unwrap_err().line, 0);
    }

    #[test]
    fn signal_csv_round_trip() {
        let pairs = vec![(0, 1.5), (3, -0.25), (7, 1.0 / 3.0)];
        let text = format_signal_csv(&pairs);
        assert!(text.starts_with("node,value\n"));
        assert_eq!(parse_signal_csv(&text).unwrap(), pairs);
    }

    #[test]
    fn signal_csv_sorts_and_rejects_duplicates() {
        assert_eq!(
            parse_signal_csv("3,1.0\n1,2.0\n").unwrap(),
            vec![(1, 2.0), (3, 1.0)]
        );
        let err = parse_signal_csv("1,2.0\n1,3.0\n").unwrap_err();
        assert!(err.message.contains("duplicate"));
        assert!(parse_signal_csv("1,nan\n").is_err());
        assert!(parse_signal_csv("1;2.0\n").is_err());
    }

    #[test]
    fn node_list_round_trip() {
        let ids = vec![5, 2, 19];
        let text = format_node_list(&ids);
        assert_eq!(parse_node_list(&text).unwrap(), ids);
        assert!(parse_node_list("1\n1\n").unwrap_err().message.contains("duplicate"));
        assert_eq!(parse_node_list("# only comments\n").unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn flow_csv_slicing() {
        let text = "node,timestamp,flow\n\
                    4,2021-05-01T08:15,12.5\n\
                    2,2021-05-01T08:15,3.25\n\
                    2,2021-05-01T08:30,4.0\n";
        let records = parse_flow_csv(text).unwrap();
        assert_eq!(records.len(), 3);
        let slice = slice_flow(&records, "2021-05-01T08:15").unwrap();
        assert_eq!(slice, vec![(2, 3.25), (4, 12.5)]);
        let other = slice_flow(&records, "2021-05-01T08:30").unwrap();
        assert_eq!(other, vec![(2, 4.0)]);
        assert!(slice_flow(&records, "2021-05-01T09:00")
            .unwrap_err()
            .message
            .contains("no measurements"));
    }

    #[test]
    fn flow_csv_rejects_bad_rows() {
        assert!(parse_flow_csv("1,t").is_err());
        assert!(parse_flow_csv("x,t,1.0").is_err());
        assert!(parse_flow_csv("1,,1.0").is_err());
        assert!(parse_flow_csv("1,t,inf").is_err());
        let records = parse_flow_csv("1,t,2.0\n1,t,3.0\n").unwrap();
        assert!(slice_flow(&records, "t").unwrap_err().message.contains("duplicate"));
    }

    #[test]
    fn partition_file_round_trip() {
        let g = datasets::karate_club();
        let w = NodeSet::from_sorted(vec![0, 33]);
        let detection = detect_communities(&g, &w, &CommunityParams::default()).unwrap();
        let file = PartitionFile::from_detection(&detection);
        let json = serde_json::to_string_pretty(&file).unwrap();
        let back: PartitionFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, file);
        let (partition, expanded) = back.to_partitions(34).unwrap();
        assert_eq!(partition, detection.partition);
        assert_eq!(expanded.unwrap(), detection.expanded);
    }

    #[test]
    fn partition_file_validates_on_load() {
        let file = PartitionFile {
            communities: vec![vec![0, 1], vec![1, 2]],
            expanded: None,
            modularity: 0.0,
        };
        assert!(file.to_partitions(3).is_err());
    }

    #[test]
    fn run_report_matches_declared_schema() {
        let report = RunReport {
            approx: vec![0.5, -1.0],
            rmae: 0.1,
            rrmse: 0.05,
            communities: 2,
            time_s: TimeBreakdown { detect: 0.01, fit: 0.02, total: 0.03 },
        };
        let json = serde_json::to_string(&report).unwrap();
        assert_eq!(
            json,
            "{\"approx\":[0.5,-1.0],\"rmae\":0.1,\"rrmse\":0.05,\"communities\":2,\
             \"time_s\":{\"detect\":0.01,\"fit\":0.02,\"total\":0.03}}"
        );
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn communities_csv_round_trip() {
        let g = datasets::karate_club();
        let w = NodeSet::from_sorted(vec![0, 33]);
        let detection = detect_communities(&g, &w, &CommunityParams::default()).unwrap();
        let text = format_communities_csv(&detection);
        let rows = parse_communities_csv(&text).unwrap();
        assert_eq!(rows.len(), 34);
        let membership = detection.partition.membership(34);
        for (node, community, memberships) in &rows {
            assert_eq!(*community, membership[*node]);
            for j in memberships {
                assert!(detection.expanded.communities()[*j].contains(*node));
            }
            assert!(!memberships.is_empty());
        }
    }
}
