use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::RingError;

/// Role a variable plays in a synthesis problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarClass {
    /// Program state `x`.
    Program,
    /// Unknown template coefficient `y`.
    Coefficient,
    /// Guard flag `z`, multiplied by the guard at every step.
    GuardFlag,
    /// Unknown guard-template coefficient `w`.
    GuardCoeff,
    /// Auxiliary variable, e.g. the Rabinowitsch `t` or a retained initial value.
    Auxiliary,
}

#[derive(Debug)]
struct Inner {
    names: Vec<String>,
    classes: Vec<VarClass>,
    index: HashMap<String, usize>,
}

/// Ordered, immutable list of distinct variable names with their classes.
///
/// Cloning is cheap; contexts compare equal when names and classes agree.
#[derive(Clone)]
pub struct VarContext(Arc<Inner>);

pub(crate) fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl VarContext {
    pub fn new<S: Into<String>>(vars: impl IntoIterator<Item = (S, VarClass)>) -> Result<Self, RingError> {
        let mut names = Vec::new();
        let mut classes = Vec::new();
        let mut index = HashMap::new();
        for (name, class) in vars {
            let name = name.into();
            if !valid_identifier(&name) {
                return Err(RingError::InvalidContext(format!("`{name}` is not a valid identifier")));
            }
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(RingError::InvalidContext(format!("duplicate variable `{name}`")));
            }
            names.push(name);
            classes.push(class);
        }
        Ok(VarContext(Arc::new(Inner { names, classes, index })))
    }

    /// Context where every variable is a program variable.
    pub fn program<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, RingError> {
        Self::new(names.into_iter().map(|n| (n, VarClass::Program)))
    }

    pub fn len(&self) -> usize {
        self.0.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.names.is_empty()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.0.names[idx]
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn class(&self, idx: usize) -> VarClass {
        self.0.classes[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize, RingError> {
        self.index_of(name).ok_or_else(|| RingError::UnknownVariable(name.to_string()))
    }

    pub fn indices_of_class(&self, class: VarClass) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.class(i) == class).collect()
    }

    pub fn program_indices(&self) -> Vec<usize> {
        self.indices_of_class(VarClass::Program)
    }

    /// New context with `extra` appended after the existing variables.
    pub fn extend<S: Into<String>>(&self, extra: impl IntoIterator<Item = (S, VarClass)>) -> Result<Self, RingError> {
        let base = self.0.names.iter().cloned().zip(self.0.classes.iter().copied());
        let extra: Vec<(String, VarClass)> = extra.into_iter().map(|(n, c)| (n.into(), c)).collect();
        Self::new(base.chain(extra))
    }

    /// Sub-context made of the variables at `keep` (in that order).
    pub fn restrict(&self, keep: &[usize]) -> Self {
        Self::new(keep.iter().map(|&i| (self.0.names[i].clone(), self.0.classes[i])))
            .expect("restriction of a valid context is valid")
    }

    /// Same names in the same order with every class replaced through `f`.
    pub fn reclassify(&self, f: impl Fn(usize, VarClass) -> VarClass) -> Self {
        Self::new((0..self.len()).map(|i| (self.0.names[i].clone(), f(i, self.0.classes[i]))))
            .expect("reclassified context is valid")
    }

    /// Same classes, variables renamed through `rename`.
    pub fn rename(&self, rename: impl Fn(usize, &str) -> String) -> Result<Self, RingError> {
        Self::new((0..self.len()).map(|i| (rename(i, &self.0.names[i]), self.0.classes[i])))
    }

    /// A name starting with `stem` that does not occur in this context.
    pub fn fresh_name(&self, stem: &str) -> String {
        let mut candidate = stem.to_string();
        while self.index_of(&candidate).is_some() {
            candidate.push('_');
        }
        candidate
    }

    pub fn same(&self, other: &VarContext) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.names == other.0.names && self.0.classes == other.0.classes)
    }
}

impl PartialEq for VarContext {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}

impl Eq for VarContext {}

impl fmt::Debug for VarContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.0.names.iter().zip(&self.0.classes))
            .finish()
    }
}
