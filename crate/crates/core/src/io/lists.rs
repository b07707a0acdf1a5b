//! Plain-text exclusion lists and vulnerability assignments.
//!
//! Exclusion list, one `signature<TAB>origin` entry per line, origin written
//! by fully qualified name:
//!
//! ```text
//! # declared-size 2
//! next():java.lang.Object<TAB>java.util.Iterator
//! ```
//!
//! Assignment file, one node id per line:
//!
//! ```text
//! # seed=42 requested=3
//! 4
//! 9
//! 17
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{CallGraph, NodeId, TypeHierarchy};
use crate::origins::ExclusionList;
use crate::vuln::VulnerabilityAssignment;

const DECLARED_SIZE: &str = "declared-size";

pub fn format_exclusion_list(list: &ExclusionList, h: &TypeHierarchy) -> Result<String> {
    let mut out = format!("# {DECLARED_SIZE} {}\n", list.declared_size());
    for (sig, origin) in list.entries() {
        let t = h.lookup(origin)?;
        out.push_str(&format!("{sig}\t{}\n", t.fq_name));
    }
    Ok(out)
}

pub fn parse_exclusion_list(source: &str, text: &str, h: &TypeHierarchy) -> Result<ExclusionList> {
    let by_name: HashMap<&str, _> = h.types().iter().map(|t| (t.fq_name.as_str(), &t.id)).collect();
    let mut declared = None;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let at = |message: String| Error::Format {
            path: source.to_string(),
            line: i + 1,
            message,
        };
        let line = line.trim_end_matches('\r');
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(n) = comment.trim().strip_prefix(DECLARED_SIZE) {
                declared = Some(
                    n.trim()
                        .parse::<usize>()
                        .map_err(|e| at(format!("bad declared size: {e}")))?,
                );
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (sig, fq) = line
            .split_once('\t')
            .ok_or_else(|| at("expected `signature<TAB>origin type`".into()))?;
        let sig = sig.parse().map_err(|e: Error| at(e.to_string()))?;
        let id = by_name
            .get(fq.trim())
            .ok_or_else(|| Error::UnknownTypeName(fq.trim().to_string()))?;
        entries.push((sig, (*id).clone()));
    }
    let mut list = ExclusionList::new(declared.unwrap_or(entries.len()));
    for (sig, id) in entries {
        list.insert(sig, id);
    }
    Ok(list)
}

pub fn save_exclusion_list(path: impl AsRef<Path>, list: &ExclusionList, h: &TypeHierarchy) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_exclusion_list(list, h)?).map_err(|e| Error::io(path, e))
}

pub fn load_exclusion_list(path: impl AsRef<Path>, h: &TypeHierarchy) -> Result<ExclusionList> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_exclusion_list(&path.display().to_string(), &text, h)
}

pub fn format_assignment(a: &VulnerabilityAssignment) -> String {
    let mut out = format!("# seed={} requested={}\n", a.seed, a.requested);
    for n in &a.nodes {
        out.push_str(&format!("{}\n", n.0));
    }
    out
}

/// Node ids are checked against `cg`.
pub fn parse_assignment(source: &str, text: &str, cg: &CallGraph) -> Result<VulnerabilityAssignment> {
    let mut seed = 0;
    let mut requested = None;
    let mut nodes = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let at = |message: String| Error::Format {
            path: source.to_string(),
            line: i + 1,
            message,
        };
        let line = line.trim();
        if let Some(comment) = line.strip_prefix('#') {
            for field in comment.split_whitespace() {
                match field.split_once('=') {
                    Some(("seed", v)) => seed = v.parse().map_err(|e| at(format!("bad seed: {e}")))?,
                    Some(("requested", v)) => {
                        requested = Some(v.parse().map_err(|e| at(format!("bad requested count: {e}")))?)
                    }
                    _ => {}
                }
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let id = NodeId(line.parse().map_err(|e| at(format!("bad node id `{line}`: {e}")))?);
        cg.node(id)?;
        nodes.insert(id);
    }
    Ok(VulnerabilityAssignment {
        requested: requested.unwrap_or(nodes.len()),
        nodes,
        seed,
    })
}

pub fn save_assignment(path: impl AsRef<Path>, a: &VulnerabilityAssignment) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_assignment(a)).map_err(|e| Error::io(path, e))
}

pub fn load_assignment(path: impl AsRef<Path>, cg: &CallGraph) -> Result<VulnerabilityAssignment> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_assignment(&path.display().to_string(), &text, cg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::{self, sig};
    use crate::origins::{build_exclusion_list, find_origins, origin_edge_frequencies};

    #[test]
    fn exclusion_list_round_trip() {
        let (h, cg) = fixture::canonical();
        let table = origin_edge_frequencies(&cg, &find_origins(&cg, &h).unwrap()).unwrap();
        let list = build_exclusion_list(&table, 2);
        let text = format_exclusion_list(&list, &h).unwrap();
        assert!(text.starts_with("# declared-size 2\n"));
        let back = parse_exclusion_list("mem", &text, &h).unwrap();
        assert_eq!(back, list);
        assert_eq!(format_exclusion_list(&back, &h).unwrap(), text);
    }

    #[test]
    fn exclusion_list_by_fq_name() {
        let h = fixture::canonical_hierarchy();
        let list = parse_exclusion_list("mem", "next():java.lang.Object\tjava.util.Iterator\n", &h).unwrap();
        let iter = h.find_by_fq_name("java.util.Iterator").unwrap();
        assert!(list.contains(&sig("next"), &iter.id));
        assert_eq!(list.declared_size(), 1);
    }

    #[test]
    fn exclusion_list_unknown_type() {
        let h = fixture::canonical_hierarchy();
        match parse_exclusion_list("mem", "next():java.lang.Object\tno.such.Type\n", &h) {
            Err(Error::UnknownTypeName(name)) => assert_eq!(name, "no.such.Type"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_exclusion_list("mem", "missing tab\n", &h),
            Err(Error::Format { line: 1, .. })
        ));
    }

    #[test]
    fn assignment_round_trip() {
        let (_, cg) = fixture::canonical();
        let a = VulnerabilityAssignment {
            nodes: [NodeId(2), NodeId(5)].into_iter().collect(),
            seed: 42,
            requested: 3,
        };
        let text = format_assignment(&a);
        assert_eq!(text, "# seed=42 requested=3\n2\n5\n");
        assert_eq!(parse_assignment("mem", &text, &cg).unwrap(), a);
        assert!(matches!(
            parse_assignment("mem", "99\n", &cg),
            Err(Error::UnknownNode(_))
        ));
        assert!(matches!(parse_assignment("mem", "x\n", &cg), Err(Error::Format { .. })));
    }
}
