//! Edge-list CSV (`u,v` header, one undirected edge per row, self-loop as
//! `u = v`) plus a JSON sidecar carrying the layout and leftover stubs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{MultiGraph, TorusLattice};
use crate::degree_model::DegreeSequence;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeListSidecar {
    pub d: usize,
    pub k: usize,
    pub m: usize,
    pub leftover: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Prescribed degrees; when absent the realized degrees are used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prescribed: Option<Vec<u32>>,
}

impl EdgeListSidecar {
    pub fn from_graph(graph: &MultiGraph, seed: Option<u64>) -> Self {
        EdgeListSidecar {
            d: graph.lattice().d(),
            k: graph.lattice().k(),
            m: graph.m(),
            leftover: graph.leftover().to_vec(),
            seed,
            prescribed: Some(graph.prescribed().degrees().to_vec()),
        }
    }

    pub fn lattice(&self) -> Result<TorusLattice> {
        TorusLattice::new(self.d, self.k)
    }
}

pub fn write_edge_list<W: Write>(graph: &MultiGraph, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["u", "v"])?;
    for &(u, v) in graph.edges() {
        w.write_record([u.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses an edge list against the layout in `sidecar`. Rows are numbered
/// from 1 after the header.
pub fn read_edge_list<R: Read>(reader: R, sidecar: &EdgeListSidecar) -> Result<MultiGraph> {
    let lattice = sidecar.lattice()?;
    let n = lattice.compartments() * sidecar.m;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "u" || &headers[1] != "v" {
        return Err(Error::EdgeList { row: 0, msg: "expected header \"u,v\"".into() });
    }
    let mut edges = Vec::new();
    for (idx, record) in r.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::EdgeList { row, msg: e.to_string() })?;
        if record.len() != 2 {
            return Err(Error::EdgeList { row, msg: format!("expected 2 fields, got {}", record.len()) });
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::EdgeList { row, msg: format!("{s:?} is not a vertex id") })
        };
        let (u, v) = (parse(&record[0])?, parse(&record[1])?);
        if u >= n || v >= n {
            return Err(Error::EdgeList { row, msg: format!("vertex out of range in ({u}, {v})") });
        }
        if !lattice.adjacent(u / sidecar.m, v / sidecar.m) {
            return Err(Error::EdgeList {
                row,
                msg: format!(
                    "locality violation: compartments {} and {} are not adjacent",
                    u / sidecar.m,
                    v / sidecar.m
                ),
            });
        }
        edges.push((u, v));
    }
    let degrees = match &sidecar.prescribed {
        Some(p) => p.clone(),
        None => {
            let mut deg = vec![0u32; n];
            for &(u, v) in &edges {
                deg[u] += 1;
                deg[v] += 1;
            }
            deg
        }
    };
    let prescribed = DegreeSequence::new(degrees, lattice, sidecar.m)?;
    MultiGraph::from_parts(prescribed, edges, sidecar.leftover.clone())
}

/// Sidecar path for an edge-list CSV: same stem, `.json` extension.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn save_edge_list(graph: &MultiGraph, csv_path: &Path, seed: Option<u64>) -> Result<()> {
    write_edge_list(graph, BufWriter::new(File::create(csv_path)?))?;
    let sidecar = EdgeListSidecar::from_graph(graph, seed);
    let mut out = BufWriter::new(File::create(sidecar_path(csv_path))?);
    serde_json::to_writer(&mut out, &sidecar)?;
    out.flush()?;
    Ok(())
}

pub fn load_edge_list(csv_path: &Path) -> Result<MultiGraph> {
    let sidecar: EdgeListSidecar =
        serde_json::from_reader(BufReader::new(File::open(sidecar_path(csv_path))?))?;
    read_edge_list(BufReader::new(File::open(csv_path)?), &sidecar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree_model::{sample_degree_sequence, DegreeDistribution};
    use crate::rng;
    use crate::torus_graph::generate;

    #[test]
    fn empty_graph_is_header_only() {
        let lattice = TorusLattice::new(1, 3).unwrap();
        let seq = DegreeSequence::new(vec![0; 6], lattice, 2).unwrap();
        let g = generate(&seq, &mut rng::master(7));
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "u,v\n");
        let back = read_edge_list(&buf[..], &EdgeListSidecar::from_graph(&g, Some(7))).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn generated_graph_round_trips_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let lattice = TorusLattice::new(2, 4).unwrap();
        let mut r = rng::master(8);
        let dist = DegreeDistribution::poisson(2.5).unwrap();
        let seq = sample_degree_sequence(&dist, lattice, 6, &mut r).unwrap();
        let g = generate(&seq, &mut r);
        save_edge_list(&g, &path, Some(8)).unwrap();
        let back = load_edge_list(&path).unwrap();
        assert_eq!(back.edges(), g.edges());
        assert_eq!(back.prescribed(), g.prescribed());
        assert_eq!(back.leftover(), g.leftover());
    }

    #[test]
    fn non_adjacent_edge_names_row() {
        let sidecar = EdgeListSidecar {
            d: 1,
            k: 5,
            m: 2,
            leftover: vec![0; 5],
            seed: None,
            prescribed: None,
        };
        // vertex 0 is in compartment 0, vertex 5 in compartment 2
        let text = "u,v\n0,1\n2,3\n0,5\n";
        match read_edge_list(text.as_bytes(), &sidecar) {
            Err(Error::EdgeList { row, msg }) => {
                assert_eq!(row, 3);
                assert!(msg.contains("locality"));
            }
            other => panic!("expected locality error, got {other:?}"),
        }
        let malformed = "u,v\n0,x\n";
        assert!(matches!(
            read_edge_list(malformed.as_bytes(), &sidecar),
            Err(Error::EdgeList { row: 1, .. })
        ));
    }
}
