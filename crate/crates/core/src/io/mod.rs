//! Reading and writing graphs, lists and reports.

mod interchange;
mod lists;
mod report;

pub use interchange::{
    load_call_graph, load_hierarchy, read_call_graph, read_hierarchy, save_bundle, save_call_graph, save_hierarchy,
    write_bundle, write_call_graph, write_hierarchy, SCHEMA_VERSION,
};
pub use lists::{
    format_assignment, format_exclusion_list, load_assignment, load_exclusion_list, parse_assignment,
    parse_exclusion_list, save_assignment, save_exclusion_list,
};
pub use report::{write_derivatives_csv, write_frequency_csv, write_localness_csv};

use crate::error::Result;
use crate::graph::TypeHierarchy;

/// Moves every type whose qualified name starts with one of `prefixes` into
/// the core project.
pub fn reclassify_core(h: &TypeHierarchy, prefixes: &[String]) -> Result<TypeHierarchy> {
    let types = h
        .types()
        .iter()
        .cloned()
        .map(|mut t| {
            if prefixes.iter().any(|p| t.fq_name.starts_with(p.as_str())) {
                t.is_core = true;
                t.project = h.core_project().to_string();
            }
            t
        })
        .collect();
    TypeHierarchy::new(h.core_project(), types)
}
