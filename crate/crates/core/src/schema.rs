//! The relational catalog: one relation per class with typed attributes,
//! a primary key and functional dependencies.
//!
//! Catalog text format, one block per class:
//!
//! ```text
//! class "Scheduling Services" {
//!     Schedule-ID: integer, Sdate: date, Stime: text, Slocation: text;
//!     key(Schedule-ID);
//!     fd(Sdate, Stime -> Slocation)
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, ParseError, Result};
use crate::lexer::Cursor;
use crate::value::ValueKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeDef {
    pub name: String,
    pub kind: ValueKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionalDependency {
    pub determinant: BTreeSet<String>,
    pub dependents: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSchema {
    name: String,
    attributes: Vec<AttributeDef>,
    primary_key: BTreeSet<String>,
    fds: Vec<FunctionalDependency>,
}

impl ClassSchema {
    /// Validates the class and prepends the key dependency `key -> all`.
    pub fn new(
        name: impl Into<String>,
        attributes: Vec<AttributeDef>,
        primary_key: impl IntoIterator<Item = String>,
        fds: Vec<FunctionalDependency>,
    ) -> Result<Self> {
        let name = name.into();
        let mut seen = BTreeSet::new();
        for a in &attributes {
            if !seen.insert(a.name.as_str()) {
                return Err(Error::DuplicateAttribute {
                    class: name,
                    attribute: a.name.clone(),
                });
            }
        }
        let primary_key: BTreeSet<String> = primary_key.into_iter().collect();
        if primary_key.is_empty() {
            return Err(Error::MissingKey(name));
        }
        let check = |attr: &String| {
            if seen.contains(attr.as_str()) {
                Ok(())
            } else {
                Err(Error::UnknownAttribute {
                    class: name.clone(),
                    attribute: attr.clone(),
                })
            }
        };
        primary_key.iter().try_for_each(check)?;
        for fd in &fds {
            if fd.determinant.is_empty() || fd.dependents.is_empty() {
                return Err(Error::EmptyDependency(name));
            }
            fd.determinant.iter().chain(&fd.dependents).try_for_each(check)?;
        }

        let key_fd = FunctionalDependency {
            determinant: primary_key.clone(),
            dependents: attributes.iter().map(|a| a.name.clone()).collect(),
        };
        let mut all_fds = vec![key_fd];
        all_fds.extend(fds);
        Ok(Self {
            name,
            attributes,
            primary_key,
            fds: all_fds,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn attributes(&self) -> &[AttributeDef] {
        &self.attributes
    }

    pub fn attribute_names(&self) -> BTreeSet<String> {
        self.attributes.iter().map(|a| a.name.clone()).collect()
    }

    pub fn primary_key(&self) -> &BTreeSet<String> {
        &self.primary_key
    }

    pub fn fds(&self) -> &[FunctionalDependency] {
        &self.fds
    }

    pub fn kind_of(&self, attr: &str) -> Result<ValueKind> {
        self.attributes
            .iter()
            .find(|a| a.name == attr)
            .map(|a| a.kind)
            .ok_or_else(|| Error::UnknownAttribute {
                class: self.name.clone(),
                attribute: attr.to_string(),
            })
    }

    pub fn check_attrs<'a>(&self, attrs: impl IntoIterator<Item = &'a String>) -> Result<()> {
        for a in attrs {
            self.kind_of(a)?;
        }
        Ok(())
    }

    /// Closure of `attrs` under this class's dependencies.
    pub fn closure(&self, attrs: &BTreeSet<String>) -> Result<BTreeSet<String>> {
        self.check_attrs(attrs)?;
        let mut closed = attrs.clone();
        loop {
            let before = closed.len();
            for fd in &self.fds {
                if fd.determinant.is_subset(&closed) {
                    closed.extend(fd.dependents.iter().cloned());
                }
            }
            if closed.len() == before {
                return Ok(closed);
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Catalog {
    classes: BTreeMap<String, ClassSchema>,
}

impl Catalog {
    pub fn new(classes: impl IntoIterator<Item = ClassSchema>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for c in classes {
            if map.contains_key(c.name()) {
                return Err(Error::DuplicateClass(c.name().to_string()));
            }
            map.insert(c.name().to_string(), c);
        }
        Ok(Self { classes: map })
    }

    /// Parses the catalog text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cur = Cursor::new(text)?;
        let mut classes: Vec<ClassSchema> = Vec::new();
        while !cur.at_end() {
            classes.push(parse_class(&mut cur)?);
        }
        Self::new(classes)
    }

    pub fn class(&self, name: &str) -> Result<&ClassSchema> {
        self.classes
            .get(name)
            .ok_or_else(|| Error::UnknownClass(name.to_string()))
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassSchema> {
        self.classes.values()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    /// Union of all attribute names across classes.
    pub fn all_attributes(&self) -> BTreeSet<String> {
        self.classes.values().flat_map(|c| c.attribute_names()).collect()
    }

    pub fn attribute_closure(&self, class: &str, attrs: &BTreeSet<String>) -> Result<BTreeSet<String>> {
        self.class(class)?.closure(attrs)
    }
}

fn parse_class(cur: &mut Cursor) -> Result<ClassSchema> {
    cur.expect_keyword("class")?;
    let name = cur.name(true)?;
    cur.expect_sym("{")?;

    let mut attributes = Vec::new();
    loop {
        let attr = cur.name(true)?;
        cur.expect_sym(":")?;
        let (line, column) = cur.position();
        let kind_name = cur.name(false)?;
        let kind = ValueKind::from_name(&kind_name)
            .ok_or_else(|| ParseError::new(line, column, format!("unknown kind `{kind_name}`")))?;
        attributes.push(AttributeDef { name: attr, kind });
        if !cur.eat_sym(",") {
            break;
        }
    }
    cur.expect_sym(";")?;

    cur.expect_keyword("key")?;
    let key = parse_name_list(cur, ")")?;
    let mut fds = Vec::new();
    while cur.eat_sym(";") {
        if cur.eat_keyword("fd") {
            let determinant = parse_name_list(cur, "->")?;
            let mut dependents = vec![cur.name(true)?];
            while cur.eat_sym(",") {
                dependents.push(cur.name(true)?);
            }
            cur.expect_sym(")")?;
            fds.push(FunctionalDependency {
                determinant: determinant.into_iter().collect(),
                dependents: dependents.into_iter().collect(),
            });
        }
    }
    cur.expect_sym("}")?;
    ClassSchema::new(name, attributes, key, fds)
}

/// `( name, name ... <terminator>`
fn parse_name_list(cur: &mut Cursor, terminator: &str) -> Result<Vec<String>> {
    cur.expect_sym("(")?;
    let mut names = vec![cur.name(true)?];
    while cur.eat_sym(",") {
        names.push(cur.name(true)?);
    }
    cur.expect_sym(terminator)?;
    Ok(names)
}
