//! Domain model shared by every analysis: type hierarchies, method
//! signatures and call graphs.
//!
//! Everything in here is immutable once built. Constructors validate their
//! input and the analyses in the sibling modules are plain functions over
//! `&TypeHierarchy` / `&CallGraph`.

mod callgraph;
mod hierarchy;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use callgraph::{CallEdge, CallGraph, CallGraphBuilder, MethodNode, NodeId, ReverseAdjacency};
pub use hierarchy::{validate_hierarchy, TypeHierarchy, Violation, ViolationRule};

/// Opaque identifier of a type inside one hierarchy.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TypeId(String);

impl TypeId {
    pub fn new(id: impl Into<String>) -> Self {
        TypeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<String> for TypeId {
    fn from(s: String) -> Self {
        TypeId::new(s)
    }
}

impl From<&str> for TypeId {
    fn from(s: &str) -> Self {
        TypeId(s.to_string())
    }
}

/// A method signature: name, ordered parameter types and return type.
///
/// Equality is structural, so the same signature declared by two unrelated
/// types compares equal. The textual form is `name(P1,P2):R`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MethodSignature {
    name: String,
    params: Vec<String>,
    return_type: String,
}

impl MethodSignature {
    pub fn new<I, S>(name: impl Into<String>, params: I, return_type: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let sig = MethodSignature {
            name: name.into(),
            params: params.into_iter().map(Into::into).collect(),
            return_type: return_type.into(),
        };
        let ok = is_token(&sig.name) && sig.params.iter().all(|p| is_token(p)) && is_token(&sig.return_type);
        if ok {
            Ok(sig)
        } else {
            Err(Error::MalformedSignature(sig.to_string()))
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn return_type(&self) -> &str {
        &self.return_type
    }
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && !s.contains(['(', ')', ',', ':']) && !s.contains(char::is_whitespace)
}

impl fmt::Display for MethodSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}):{}", self.name, self.params.join(","), self.return_type)
    }
}

impl FromStr for MethodSignature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::MalformedSignature(s.to_string());
        let open = s.find('(').ok_or_else(bad)?;
        let close = s.rfind("):").ok_or_else(bad)?;
        if close < open {
            return Err(bad());
        }
        let name = &s[..open];
        let inner = &s[open + 1..close];
        let ret = &s[close + 2..];
        let params: Vec<&str> = if inner.is_empty() {
            Vec::new()
        } else {
            inner.split(',').collect()
        };
        MethodSignature::new(name, params, ret).map_err(|_| bad())
    }
}

impl TryFrom<String> for MethodSignature {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MethodSignature> for String {
    fn from(sig: MethodSignature) -> String {
        sig.to_string()
    }
}

/// A type (class or interface) with its direct parents and the signatures
/// it declares.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeNode {
    pub id: TypeId,
    pub fq_name: String,
    pub parents: Vec<TypeId>,
    pub declared: Vec<MethodSignature>,
    pub project: String,
    pub package: String,
    pub is_core: bool,
}

impl TypeNode {
    pub fn new(id: impl Into<String>, fq_name: impl Into<String>) -> Self {
        TypeNode {
            id: TypeId::new(id),
            fq_name: fq_name.into(),
            parents: Vec::new(),
            declared: Vec::new(),
            project: String::new(),
            package: String::new(),
            is_core: false,
        }
    }

    pub fn in_project(mut self, project: impl Into<String>, package: impl Into<String>) -> Self {
        self.project = project.into();
        self.package = package.into();
        self
    }

    pub fn core(mut self) -> Self {
        self.is_core = true;
        self
    }

    pub fn with_parents<I, S>(mut self, parents: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.parents = parents.into_iter().map(|p| TypeId::new(p)).collect();
        self
    }

    pub fn declaring<I>(mut self, sigs: I) -> Self
    where
        I: IntoIterator<Item = MethodSignature>,
    {
        self.declared.extend(sigs);
        self
    }

    pub fn declares(&self, sig: &MethodSignature) -> bool {
        self.declared.contains(sig)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_text_form() {
        let sig: MethodSignature = "put(java.lang.Object,int):void".parse().unwrap();
        assert_eq!(sig.name(), "put");
        assert_eq!(sig.params(), ["java.lang.Object", "int"]);
        assert_eq!(sig.return_type(), "void");
        assert_eq!(sig.to_string(), "put(java.lang.Object,int):void");

        let nullary: MethodSignature = "next():java.lang.Object".parse().unwrap();
        assert!(nullary.params().is_empty());
    }

    #[test]
    fn signature_rejects_garbage() {
        for bad in ["", "():int", "next()", "next:int", "a(b,):int", "a b():int", "next():"] {
            assert!(bad.parse::<MethodSignature>().is_err(), "{bad:?} parsed");
        }
        assert!(MethodSignature::new("", Vec::<String>::new(), "int").is_err());
    }

    #[test]
    fn signature_equality_is_structural() {
        let a = MethodSignature::new("next", Vec::<String>::new(), "Object").unwrap();
        let b: MethodSignature = "next():Object".parse().unwrap();
        assert_eq!(a, b);
        let covariant: MethodSignature = "next():String".parse().unwrap();
        assert_ne!(a, covariant);
    }

    #[test]
    fn signature_serde_is_textual() {
        let sig: MethodSignature = "f(int):int".parse().unwrap();
        let json = serde_json::to_string(&sig).unwrap();
        assert_eq!(json, "\"f(int):int\"");
        let back: MethodSignature = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sig);
        assert!(serde_json::from_str::<MethodSignature>("\"nope\"").is_err());
    }
}
