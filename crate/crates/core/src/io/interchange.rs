//! Line-delimited JSON interchange for hierarchies and call graphs.
//!
//! A file is one header record followed by type records, then node records,
//! then edge records. Hierarchy files carry only types, call graph files
//! only nodes and edges, and a bundle carries all three. Every record is a
//! single line tagged with `"record"`:
//!
//! ```text
//! {"record":"header","schema_version":1,"core_project":"jre","projects":["app","jre","lib"]}
//! {"record":"type","id":"T1","fq_name":"java.util.Iterator","parents":["T0"],"project":"jre","package":"java.util","core":true,"declares":["next():java.lang.Object"]}
//! {"record":"node","id":0,"type":"T0","signature":"hashCode():int"}
//! {"record":"edge","source":7,"target":4,"receiver":"T1"}
//! ```
//!
//! Node ids must be dense and ascending from 0. Readers stream the file line
//! by line.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CallEdge, CallGraph, MethodNode, MethodSignature, NodeId, TypeHierarchy, TypeId, TypeNode};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase", deny_unknown_fields)]
enum Record {
    Header {
        schema_version: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        core_project: Option<String>,
        #[serde(default)]
        projects: Vec<String>,
    },
    Type {
        id: TypeId,
        fq_name: String,
        #[serde(default)]
        parents: Vec<TypeId>,
        project: String,
        package: String,
        #[serde(default)]
        core: bool,
        #[serde(default)]
        declares: Vec<MethodSignature>,
    },
    Node {
        id: u32,
        #[serde(rename = "type")]
        ty: TypeId,
        signature: MethodSignature,
    },
    Edge {
        source: u32,
        target: u32,
        receiver: TypeId,
    },
}

impl Record {
    fn rank(&self) -> u8 {
        match self {
            Record::Header { .. } => 0,
            Record::Type { .. } => 1,
            Record::Node { .. } => 2,
            Record::Edge { .. } => 3,
        }
    }
}

fn header(h: Option<&TypeHierarchy>) -> Record {
    Record::Header {
        schema_version: SCHEMA_VERSION,
        core_project: h.map(|h| h.core_project().to_string()),
        projects: h
            .map(|h| {
                h.types()
                    .iter()
                    .map(|t| t.project.clone())
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect()
            })
            .unwrap_or_default(),
    }
}

fn type_record(t: &TypeNode) -> Record {
    Record::Type {
        id: t.id.clone(),
        fq_name: t.fq_name.clone(),
        parents: t.parents.clone(),
        project: t.project.clone(),
        package: t.package.clone(),
        core: t.is_core,
        declares: t.declared.clone(),
    }
}

fn emit<W: Write>(out: &mut W, record: &Record) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    out.write_all(b"\n")
}

pub fn write_hierarchy<W: Write>(out: &mut W, h: &TypeHierarchy) -> std::io::Result<()> {
    emit(out, &header(Some(h)))?;
    for t in h.types() {
        emit(out, &type_record(t))?;
    }
    Ok(())
}

fn write_graph_body<W: Write>(out: &mut W, cg: &CallGraph) -> std::io::Result<()> {
    for (i, n) in cg.nodes().iter().enumerate() {
        emit(
            out,
            &Record::Node {
                id: i as u32,
                ty: n.defining_type.clone(),
                signature: n.signature.clone(),
            },
        )?;
    }
    for e in cg.edges() {
        emit(
            out,
            &Record::Edge {
                source: e.source.0,
                target: e.target.0,
                receiver: e.receiver.clone(),
            },
        )?;
    }
    Ok(())
}

pub fn write_call_graph<W: Write>(out: &mut W, cg: &CallGraph) -> std::io::Result<()> {
    emit(out, &header(None))?;
    write_graph_body(out, cg)
}

/// Hierarchy and call graph in one file.
pub fn write_bundle<W: Write>(out: &mut W, h: &TypeHierarchy, cg: &CallGraph) -> std::io::Result<()> {
    write_hierarchy(out, h)?;
    write_graph_body(out, cg)
}

struct RecordReader<R> {
    source: String,
    lines: std::io::Lines<R>,
    line: usize,
    last_rank: u8,
}

impl<R: BufRead> RecordReader<R> {
    fn new(source: &str, reader: R) -> Self {
        RecordReader {
            source: source.to_string(),
            lines: reader.lines(),
            line: 0,
            last_rank: 0,
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Format {
            path: self.source.clone(),
            line: self.line,
            message: message.into(),
        }
    }

    /// Reads the header and checks the schema version.
    fn header(&mut self) -> Result<(Option<String>, Vec<String>)> {
        match self.next()? {
            Some(Record::Header {
                schema_version,
                core_project,
                projects,
            }) => {
                if schema_version != SCHEMA_VERSION {
                    return Err(Error::SchemaVersion {
                        found: schema_version,
                        expected: SCHEMA_VERSION,
                    });
                }
                Ok((core_project, projects))
            }
            Some(_) => Err(self.error("first record must be the header")),
            None => Err(self.error("empty file, expected a header record")),
        }
    }

    fn next(&mut self) -> Result<Option<Record>> {
        loop {
            let Some(line) = self.lines.next() else {
                return Ok(None);
            };
            self.line += 1;
            let line = line.map_err(|e| Error::io(&self.source, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(&line).map_err(|e| self.error(e.to_string()))?;
            let rank = record.rank();
            if rank == 0 && self.line > 1 {
                return Err(self.error("header record must come first and only once"));
            }
            if rank < self.last_rank {
                return Err(self.error("records out of order: expected header, types, nodes, edges"));
            }
            self.last_rank = rank;
            return Ok(Some(record));
        }
    }
}

pub fn read_hierarchy<R: BufRead>(source: &str, reader: R) -> Result<TypeHierarchy> {
    let mut rr = RecordReader::new(source, reader);
    let (core_project, projects) = rr.header()?;
    let core_project = core_project.ok_or_else(|| rr.error("header lacks core_project"))?;
    let projects: BTreeSet<String> = projects.into_iter().collect();
    let mut types = Vec::new();
    while let Some(record) = rr.next()? {
        match record {
            Record::Type {
                id,
                fq_name,
                parents,
                project,
                package,
                core,
                declares,
            } => {
                if !projects.is_empty() && !projects.contains(&project) {
                    return Err(rr.error(format!("type `{id}` uses project `{project}` missing from the header")));
                }
                types.push(TypeNode {
                    id,
                    fq_name,
                    parents,
                    declared: declares,
                    project,
                    package,
                    is_core: core,
                });
            }
            _ => break,
        }
    }
    TypeHierarchy::new(core_project, types)
}

pub fn read_call_graph<R: BufRead>(source: &str, reader: R, h: &TypeHierarchy) -> Result<CallGraph> {
    let mut rr = RecordReader::new(source, reader);
    rr.header()?;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    while let Some(record) = rr.next()? {
        match record {
            Record::Header { .. } | Record::Type { .. } => {}
            Record::Node { id, ty, signature } => {
                if id as usize != nodes.len() {
                    return Err(rr.error(format!("node id {id} out of sequence, expected {}", nodes.len())));
                }
                let decl = h
                    .get(&ty)
                    .ok_or_else(|| rr.error(format!("node {id} references unknown type `{ty}`")))?;
                if !decl.declares(&signature) {
                    return Err(rr.error(format!("node {id}: type `{ty}` does not declare `{signature}`")));
                }
                nodes.push(MethodNode::new(ty, signature));
            }
            Record::Edge {
                source,
                target,
                receiver,
            } => {
                for end in [source, target] {
                    if end as usize >= nodes.len() {
                        return Err(rr.error(format!("edge references unknown node {end}")));
                    }
                }
                if h.get(&receiver).is_none() {
                    return Err(rr.error(format!("edge receiver references unknown type `{receiver}`")));
                }
                edges.push(CallEdge {
                    source: NodeId(source),
                    target: NodeId(target),
                    receiver,
                });
            }
        }
    }
    CallGraph::from_parts(h, nodes, edges)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn load_hierarchy(path: impl AsRef<Path>) -> Result<TypeHierarchy> {
    let path = path.as_ref();
    read_hierarchy(&path.display().to_string(), open(path)?)
}

pub fn load_call_graph(path: impl AsRef<Path>, h: &TypeHierarchy) -> Result<CallGraph> {
    let path = path.as_ref();
    read_call_graph(&path.display().to_string(), open(path)?, h)
}

fn save_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    f(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

pub fn save_hierarchy(path: impl AsRef<Path>, h: &TypeHierarchy) -> Result<()> {
    save_with(path.as_ref(), |out| write_hierarchy(out, h))
}

pub fn save_call_graph(path: impl AsRef<Path>, cg: &CallGraph) -> Result<()> {
    save_with(path.as_ref(), |out| write_call_graph(out, cg))
}

pub fn save_bundle(path: impl AsRef<Path>, h: &TypeHierarchy, cg: &CallGraph) -> Result<()> {
    save_with(path.as_ref(), |out| write_bundle(out, h, cg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    fn bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
        let mut v = Vec::new();
        f(&mut v).unwrap();
        v
    }

    #[test]
    fn hierarchy_round_trip() {
        let h = fixture::canonical_hierarchy();
        let text = bytes(|o| write_hierarchy(o, &h));
        let back = read_hierarchy("mem", text.as_slice()).unwrap();
        assert_eq!(back, h);
        assert_eq!(bytes(|o| write_hierarchy(o, &back)), text);
    }

    #[test]
    fn call_graph_and_bundle_round_trip() {
        let (h, cg) = fixture::canonical();
        let text = bytes(|o| write_call_graph(o, &cg));
        assert_eq!(read_call_graph("mem", text.as_slice(), &h).unwrap(), cg);

        let bundle = bytes(|o| write_bundle(o, &h, &cg));
        let h2 = read_hierarchy("mem", bundle.as_slice()).unwrap();
        let cg2 = read_call_graph("mem", bundle.as_slice(), &h2).unwrap();
        assert_eq!((h2, cg2), (h, cg));
    }

    #[test]
    fn first_line_is_the_header() {
        let h = fixture::canonical_hierarchy();
        let text = String::from_utf8(bytes(|o| write_hierarchy(o, &h))).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            r#"{"record":"header","schema_version":1,"core_project":"jre","projects":["app","jre","lib"]}"#
        );
    }

    #[test]
    fn unknown_schema_version() {
        let text = r#"{"record":"header","schema_version":7,"core_project":"jre"}"#;
        match read_hierarchy("mem", text.as_bytes()) {
            Err(Error::SchemaVersion { found: 7, expected: 1 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let msg = read_hierarchy("mem", text.as_bytes()).unwrap_err().to_string();
        assert!(msg.contains('7') && msg.contains('1'), "{msg}");
    }

    #[test]
    fn unknown_type_in_call_graph_is_positioned() {
        let h = fixture::canonical_hierarchy();
        let text = concat!(
            "{\"record\":\"header\",\"schema_version\":1}\n",
            "{\"record\":\"node\",\"id\":0,\"type\":\"T0\",\"signature\":\"hashCode():int\"}\n",
            "{\"record\":\"node\",\"id\":1,\"type\":\"T77\",\"signature\":\"hashCode():int\"}\n",
        );
        match read_call_graph("g.jsonl", text.as_bytes(), &h) {
            Err(Error::Format { path, line, message }) => {
                assert_eq!(path, "g.jsonl");
                assert_eq!(line, 3);
                assert!(message.contains("T77"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_and_misordered_records() {
        let h = fixture::canonical_hierarchy();
        let cases = [
            "{\"record\":\"node\",\"id\":0,\"type\":\"T0\",\"signature\":\"hashCode():int\"}\n",
            "{\"record\":\"header\",\"schema_version\":1}\nnot json\n",
            "{\"record\":\"header\",\"schema_version\":1}\n{\"record\":\"node\",\"id\":3,\"type\":\"T0\",\"signature\":\"hashCode():int\"}\n",
            "{\"record\":\"header\",\"schema_version\":1}\n{\"record\":\"node\",\"id\":0,\"type\":\"T0\",\"signature\":\"hashCode():int\"}\n{\"record\":\"edge\",\"source\":0,\"target\":0,\"receiver\":\"T0\"}\n{\"record\":\"node\",\"id\":1,\"type\":\"T1\",\"signature\":\"next():java.lang.Object\"}\n",
            "{\"record\":\"header\",\"schema_version\":1}\n{\"record\":\"node\",\"id\":0,\"type\":\"T0\",\"signature\":\"bogus\"}\n",
            "{\"record\":\"header\",\"schema_version\":1}\n{\"record\":\"edge\",\"source\":0,\"target\":1,\"receiver\":\"T0\"}\n",
            "",
        ];
        for text in cases {
            let err = read_call_graph("mem", text.as_bytes(), &h).unwrap_err();
            assert!(err.is_validation(), "{text:?}: {err}");
        }
    }

    #[test]
    fn hierarchy_validation_errors_surface() {
        let text = concat!(
            "{\"record\":\"header\",\"schema_version\":1,\"core_project\":\"jre\"}\n",
            "{\"record\":\"type\",\"id\":\"A\",\"fq_name\":\"A\",\"parents\":[\"A\"],\"project\":\"x\",\"package\":\"p\"}\n",
        );
        assert!(matches!(
            read_hierarchy("mem", text.as_bytes()),
            Err(Error::InvalidHierarchy(_))
        ));
    }

    #[test]
    fn files_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let (h, cg) = fixture::canonical();
        let hp = dir.path().join("h.jsonl");
        let gp = dir.path().join("g.jsonl");
        save_hierarchy(&hp, &h).unwrap();
        save_call_graph(&gp, &cg).unwrap();
        let h2 = load_hierarchy(&hp).unwrap();
        assert_eq!(load_call_graph(&gp, &h2).unwrap(), cg);
        assert!(matches!(
            load_hierarchy(dir.path().join("missing")),
            Err(Error::Io { .. })
        ));
    }
}
