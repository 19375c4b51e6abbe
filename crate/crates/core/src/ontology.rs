//! Class membership and edit-to-mention resolution.
//!
//! Membership of an entity in a class follows its `instanceOf` edges and then
//! the reflexive-transitive closure of `subclassOf`. Cycles in the class
//! hierarchy are tolerated: every class on a cycle ends up with the same
//! closure.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::intern::Interner;
use crate::observations::Mention;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    InstanceOf,
    SubclassOf,
}

impl FromStr for Relation {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "instanceOf" | "P31" => Ok(Relation::InstanceOf),
            "subclassOf" | "P279" => Ok(Relation::SubclassOf),
            _ => Err(()),
        }
    }
}

/// Incrementally collects `instanceOf` / `subclassOf` statements.
#[derive(Debug, Default)]
pub struct OntologyBuilder {
    names: Interner,
    instance_of: HashMap<u32, BTreeSet<u32>>,
    subclass_of: HashMap<u32, BTreeSet<u32>>,
    classes: HashSet<u32>,
    skipped: u64,
}

impl OntologyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, subject: &str, relation: Relation, target: &str) {
        let s = self.names.intern(subject);
        let t = self.names.intern(target);
        self.classes.insert(t);
        match relation {
            Relation::InstanceOf => {
                self.instance_of.entry(s).or_default().insert(t);
            }
            Relation::SubclassOf => {
                self.classes.insert(s);
                self.subclass_of.entry(s).or_default().insert(t);
            }
        }
    }

    /// Adds a statement with a textual relation; unknown relations are
    /// counted and ignored. Returns whether the statement was accepted.
    pub fn add_statement(&mut self, subject: &str, relation: &str, target: &str) -> bool {
        match relation.parse() {
            Ok(r) if !subject.is_empty() && !target.is_empty() => {
                self.add(subject, r, target);
                true
            }
            _ => {
                self.skipped += 1;
                false
            }
        }
    }

    pub fn build(self) -> OntologyIndex {
        let mut classes: Vec<u32> = self.classes.into_iter().collect();
        classes.sort_unstable();

        let mut mark = vec![u32::MAX; self.names.len()];
        let mut closure = HashMap::with_capacity(classes.len());
        let mut stack = Vec::new();
        for (stamp, &class) in classes.iter().enumerate() {
            let stamp = stamp as u32;
            let mut reach = vec![class];
            mark[class as usize] = stamp;
            stack.push(class);
            while let Some(c) = stack.pop() {
                if let Some(supers) = self.subclass_of.get(&c) {
                    for &s in supers {
                        if mark[s as usize] != stamp {
                            mark[s as usize] = stamp;
                            reach.push(s);
                            stack.push(s);
                        }
                    }
                }
            }
            reach.sort_unstable();
            closure.insert(class, reach.into_boxed_slice());
        }

        let entity_classes = self
            .instance_of
            .iter()
            .map(|(&e, direct)| {
                let mut all: Vec<u32> = direct
                    .iter()
                    .flat_map(|c| closure[c].iter().copied())
                    .collect();
                all.sort_unstable();
                all.dedup();
                (e, all.into_boxed_slice())
            })
            .collect();

        OntologyIndex {
            names: self.names,
            instance_of: self.instance_of,
            subclass_of: self.subclass_of,
            closure,
            entity_classes,
            skipped: self.skipped,
        }
    }
}

/// Immutable snapshot of class membership.
#[derive(Debug, Default)]
pub struct OntologyIndex {
    names: Interner,
    instance_of: HashMap<u32, BTreeSet<u32>>,
    subclass_of: HashMap<u32, BTreeSet<u32>>,
    closure: HashMap<u32, Box<[u32]>>,
    entity_classes: HashMap<u32, Box<[u32]>>,
    skipped: u64,
}

/// Build an index from `(entity, relation, target)` triples.
pub fn build_index<I, S>(statements: I) -> OntologyIndex
where
    I: IntoIterator<Item = (S, S, S)>,
    S: AsRef<str>,
{
    let mut builder = OntologyBuilder::new();
    for (s, r, t) in statements {
        builder.add_statement(s.as_ref(), r.as_ref(), t.as_ref());
    }
    builder.build()
}

impl OntologyIndex {
    /// Statements dropped for an unknown relation or empty token.
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn num_classes(&self) -> usize {
        self.closure.len()
    }

    pub fn num_typed_entities(&self) -> usize {
        self.instance_of.len()
    }

    fn names_of(&self, keys: &[u32]) -> BTreeSet<String> {
        keys.iter().map(|&k| self.names.resolve(k).to_owned()).collect()
    }

    /// Reflexive-transitive superclasses of `class`. Always contains `class`.
    pub fn closure(&self, class: &str) -> BTreeSet<String> {
        match self.names.get(class).and_then(|k| self.closure.get(&k)) {
            Some(keys) => self.names_of(keys),
            None => BTreeSet::from([class.to_owned()]),
        }
    }

    pub fn direct_superclasses(&self, class: &str) -> BTreeSet<String> {
        self.names
            .get(class)
            .and_then(|k| self.subclass_of.get(&k))
            .map(|s| s.iter().map(|&k| self.names.resolve(k).to_owned()).collect())
            .unwrap_or_default()
    }

    pub fn direct_classes(&self, entity: &str) -> BTreeSet<String> {
        self.names
            .get(entity)
            .and_then(|k| self.instance_of.get(&k))
            .map(|s| s.iter().map(|&k| self.names.resolve(k).to_owned()).collect())
            .unwrap_or_default()
    }

    /// Every class `entity` belongs to, through `instanceOf` and the
    /// subclass closure. Empty for untyped or unknown entities.
    pub fn classes_of(&self, entity: &str) -> BTreeSet<String> {
        self.class_keys_of(entity)
            .map(|keys| self.names_of(keys))
            .unwrap_or_default()
    }

    fn class_keys_of(&self, entity: &str) -> Option<&[u32]> {
        let key = self.names.get(entity)?;
        self.entity_classes.get(&key).map(|b| &**b)
    }

    /// Entities typed (directly or through subclasses) as `class`.
    pub fn members_of(&self, class: &str) -> BTreeSet<String> {
        let Some(class) = self.names.get(class) else {
            return BTreeSet::new();
        };
        self.entity_classes
            .iter()
            .filter(|(_, cs)| cs.binary_search(&class).is_ok())
            .map(|(&e, _)| self.names.resolve(e).to_owned())
            .collect()
    }
}

/// `(entity, property) → targets`, used to evaluate composite classes.
#[derive(Debug, Default, Clone)]
pub struct PropertyGraph {
    edges: HashMap<(String, String), BTreeSet<String>>,
}

impl PropertyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, entity: &str, property: &str, target: &str) {
        self.edges
            .entry((entity.to_owned(), property.to_owned()))
            .or_default()
            .insert(target.to_owned());
    }

    pub fn has(&self, entity: &str, property: &str, target: &str) -> bool {
        // Tuple keys cannot be borrowed as (&str, &str), so this allocates.
        self.edges
            .get(&(entity.to_owned(), property.to_owned()))
            .is_some_and(|t| t.contains(target))
    }

    pub fn len(&self) -> usize {
        self.edges.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

impl<S: AsRef<str>> FromIterator<(S, S, S)> for PropertyGraph {
    fn from_iter<T: IntoIterator<Item = (S, S, S)>>(iter: T) -> Self {
        let mut g = PropertyGraph::new();
        for (e, p, t) in iter {
            g.insert(e.as_ref(), p.as_ref(), t.as_ref());
        }
        g
    }
}

/// A class, optionally narrowed by required `(property, target)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CompositeClassSpec {
    pub base: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub filters: Vec<(String, String)>,
}

impl CompositeClassSpec {
    pub fn single(base: impl Into<String>) -> Self {
        CompositeClassSpec {
            base: base.into(),
            filters: Vec::new(),
        }
    }

    pub fn with_filter(mut self, property: impl Into<String>, target: impl Into<String>) -> Self {
        self.filters.push((property.into(), target.into()));
        self
    }

    /// Class token used for mentions: the base class, or e.g.
    /// `Q515[P17=Q142]` for composites.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CompositeClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.base)?;
        if !self.filters.is_empty() {
            f.write_str("[")?;
            for (i, (p, v)) in self.filters.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{p}={v}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

impl FromStr for CompositeClassSpec {
    type Err = Error;

    /// Parses the [`Display`](fmt::Display) form.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidClassSpec(s.to_owned());
        let (base, rest) = match s.find('[') {
            Some(i) => (&s[..i], Some(&s[i + 1..])),
            None => (s, None),
        };
        if base.is_empty() || base.contains([']', '=', ',']) {
            return Err(bad());
        }
        let mut spec = CompositeClassSpec::single(base);
        if let Some(rest) = rest {
            let inner = rest.strip_suffix(']').ok_or_else(bad)?;
            for pair in inner.split(',') {
                let (p, v) = parse_filter(pair).ok_or_else(bad)?;
                spec.filters.push((p, v));
            }
        }
        Ok(spec)
    }
}

/// `P17=Q142` → `("P17", "Q142")`.
pub fn parse_filter(s: &str) -> Option<(String, String)> {
    let (p, v) = s.split_once('=')?;
    let (p, v) = (p.trim(), v.trim());
    (!p.is_empty() && !v.is_empty()).then(|| (p.to_owned(), v.to_owned()))
}

/// Entities of `spec.base` satisfying every filter.
pub fn members_of_composite(
    index: &OntologyIndex,
    spec: &CompositeClassSpec,
    graph: &PropertyGraph,
) -> BTreeSet<String> {
    index
        .members_of(&spec.base)
        .into_iter()
        .filter(|e| spec.filters.iter().all(|(p, v)| graph.has(e, p, v)))
        .collect()
}

/// One edit of the knowledge graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditRecord {
    pub subject: String,
    pub property: String,
    pub object: String,
    pub timestamp: i64,
    pub user: String,
}

/// Decides whether an object token names an entity or is a literal value.
#[derive(Clone, Debug, Default)]
pub enum LiteralRule {
    /// Entities look like `Q123`.
    #[default]
    ItemIds,
    /// Entities are tokens fully matching the pattern.
    Pattern(Regex),
    /// Every non-empty object is an entity.
    None,
}

impl LiteralRule {
    pub fn pattern(pattern: &str) -> Result<Self, regex::Error> {
        Regex::new(&format!("^(?:{pattern})$")).map(LiteralRule::Pattern)
    }

    pub fn is_entity(&self, token: &str) -> bool {
        match self {
            LiteralRule::ItemIds => {
                let b = token.as_bytes();
                b.len() > 1 && b[0] == b'Q' && b[1..].iter().all(u8::is_ascii_digit)
            }
            LiteralRule::Pattern(re) => re.is_match(token),
            LiteralRule::None => !token.is_empty(),
        }
    }
}

enum Target {
    Single { class: u32, label: String },
    Composite { members: HashSet<u32>, label: String },
}

/// Turns edits into mentions against a fixed ontology snapshot.
pub struct Resolver<'a> {
    index: &'a OntologyIndex,
    targets: Option<Vec<Target>>,
    literals: LiteralRule,
}

impl<'a> Resolver<'a> {
    /// Resolver emitting a mention for every class of every entity.
    pub fn new(index: &'a OntologyIndex) -> Self {
        Resolver {
            index,
            targets: None,
            literals: LiteralRule::default(),
        }
    }

    /// Restrict output to the given classes. Composite specs are evaluated
    /// once against `graph`.
    pub fn with_classes(mut self, specs: &[CompositeClassSpec], graph: &PropertyGraph) -> Self {
        let index = self.index;
        let targets = specs
            .iter()
            .filter_map(|spec| {
                let label = spec.label();
                if spec.filters.is_empty() {
                    let class = index.names.get(&spec.base)?;
                    Some(Target::Single { class, label })
                } else {
                    let members = members_of_composite(index, spec, graph)
                        .iter()
                        .filter_map(|e| index.names.get(e))
                        .collect();
                    Some(Target::Composite { members, label })
                }
            })
            .collect();
        self.targets = Some(targets);
        self
    }

    pub fn with_literal_rule(mut self, rule: LiteralRule) -> Self {
        self.literals = rule;
        self
    }

    fn emit_entity(&self, entity: &str, timestamp: i64, emit: &mut impl FnMut(&str, &str, i64)) -> usize {
        let Some(key) = self.index.names.get(entity) else {
            return 0;
        };
        let Some(classes) = self.index.entity_classes.get(&key) else {
            return 0;
        };
        let mut count = 0;
        match &self.targets {
            None => {
                for &c in classes.iter() {
                    emit(entity, self.index.names.resolve(c), timestamp);
                    count += 1;
                }
            }
            Some(targets) => {
                for target in targets {
                    let (hit, label) = match target {
                        Target::Single { class, label } => (classes.binary_search(class).is_ok(), label),
                        Target::Composite { members, label } => (members.contains(&key), label),
                    };
                    if hit {
                        emit(entity, label, timestamp);
                        count += 1;
                    }
                }
            }
        }
        count
    }

    /// Emit `(entity, class, timestamp)` for the subject and, unless it is a
    /// literal, the object of one edit. Returns the number emitted.
    pub fn resolve_fields(
        &self,
        subject: &str,
        object: &str,
        timestamp: i64,
        mut emit: impl FnMut(&str, &str, i64),
    ) -> usize {
        let mut count = self.emit_entity(subject, timestamp, &mut emit);
        if self.literals.is_entity(object) {
            count += self.emit_entity(object, timestamp, &mut emit);
        }
        count
    }

    pub fn resolve(&self, edit: &EditRecord) -> Vec<Mention> {
        let mut out = Vec::new();
        self.resolve_fields(&edit.subject, &edit.object, edit.timestamp, |e, c, t| {
            out.push(Mention {
                entity: e.to_owned(),
                class: c.to_owned(),
                timestamp: t,
            })
        });
        out
    }
}

/// Mentions of all edits, in edit order.
pub fn resolve_edits<'e, I>(edits: I, resolver: &Resolver<'_>) -> Vec<Mention>
where
    I: IntoIterator<Item = &'e EditRecord>,
{
    edits.into_iter().flat_map(|e| resolver.resolve(e)).collect()
}
