//! Select-project queries `<class, attributes, predicate, content>` and the
//! textual form `SELECT <attrs> FROM <class> [WHERE <dnf>]`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::lexer::{render_name, Cursor};
use crate::predicate::{parse_dnf, Dnf};
use crate::schema::{Catalog, ClassSchema};
use crate::value::Tuple;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Query {
    class: String,
    attrs: BTreeSet<String>,
    pred: Dnf,
    content: Vec<Tuple>,
}

impl Query {
    /// Builds a validated query with empty content.
    pub fn new(catalog: &Catalog, class: &str, attrs: BTreeSet<String>, pred: Dnf) -> Result<Self> {
        let schema = catalog.class(class)?;
        if attrs.is_empty() {
            return Err(Error::EmptyProjection);
        }
        schema.check_attrs(&attrs)?;
        check_predicate(schema, &pred)?;
        Ok(Self::unchecked(class, attrs, pred))
    }

    pub(crate) fn unchecked(class: &str, attrs: BTreeSet<String>, pred: Dnf) -> Self {
        Self {
            class: class.to_string(),
            attrs,
            pred,
            content: Vec::new(),
        }
    }

    pub fn parse(text: &str, catalog: &Catalog) -> Result<Self> {
        let mut cur = Cursor::new(text)?;
        cur.expect_keyword("select")?;
        let mut names = vec![cur.name(true)?];
        while cur.eat_sym(",") {
            names.push(cur.name(true)?);
        }
        cur.expect_keyword("from")?;
        let class = cur.name(true)?;
        let schema = catalog.class(&class)?;
        schema.check_attrs(&names)?;
        let pred = if cur.eat_keyword("where") {
            parse_dnf(&mut cur, schema)?
        } else {
            Dnf::always()
        };
        if !cur.at_end() {
            return Err(cur.error("unexpected trailing input").into());
        }
        Ok(Self::unchecked(&class, names.into_iter().collect(), pred))
    }

    pub fn format(&self) -> String {
        self.to_string()
    }

    pub fn class(&self) -> &str {
        &self.class
    }

    pub fn attrs(&self) -> &BTreeSet<String> {
        &self.attrs
    }

    pub fn pred(&self) -> &Dnf {
        &self.pred
    }

    pub fn content(&self) -> &[Tuple] {
        &self.content
    }

    /// Attributes occurring in the selection predicate.
    pub fn predicate_attrs(&self) -> BTreeSet<String> {
        self.pred.attrs()
    }

    /// The answered query; content is filled once.
    pub fn with_content(mut self, content: Vec<Tuple>) -> Self {
        self.content = content;
        self
    }
}

fn check_predicate(schema: &ClassSchema, pred: &Dnf) -> Result<()> {
    for d in pred.disjuncts() {
        for (attr, iv) in d.ranges() {
            let kind = schema.kind_of(attr)?;
            for v in [iv.lower().value(), iv.upper().value()].into_iter().flatten() {
                if v.kind() != kind {
                    return Err(Error::KindMismatch {
                        attribute: attr.clone(),
                        expected: kind.name(),
                        found: v.kind().name(),
                    });
                }
            }
        }
    }
    Ok(())
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let attrs: Vec<String> = self.attrs.iter().map(|a| render_name(a, '"')).collect();
        write!(f, "SELECT {} FROM {}", attrs.join(", "), render_name(&self.class, '\''))?;
        if !self.pred.is_true() {
            write!(f, " WHERE {}", self.pred)?;
        }
        Ok(())
    }
}
