//! In-memory relational store loaded from CSV. It serves remainder queries
//! and doubles as the correctness oracle for cached answers.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::query::Query;
use crate::schema::{Catalog, ClassSchema};
use crate::value::{Tuple, Value};

/// File name holding a class's rows: spaces become underscores.
pub fn csv_file_name(class: &str) -> String {
    format!("{}.csv", class.replace(' ', "_"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    class: String,
    rows: Vec<Tuple>,
}

impl Relation {
    /// Builds a relation after validating every row against the schema.
    /// `row` numbers in errors are 1-based data rows.
    pub fn from_rows(schema: &ClassSchema, rows: Vec<Tuple>) -> Result<Self> {
        let mut keys = BTreeSet::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.attributes().len() {
                return Err(Error::HeaderMismatch {
                    class: schema.name().to_string(),
                    message: format!("row {} has {} values", i + 1, row.len()),
                });
            }
            for attr in schema.attributes() {
                let v = row.get(&attr.name).ok_or_else(|| Error::MissingValue(attr.name.clone()))?;
                if v.kind() != attr.kind {
                    return Err(Error::KindMismatch {
                        attribute: attr.name.clone(),
                        expected: attr.kind.name(),
                        found: v.kind().name(),
                    });
                }
            }
            let key: Vec<&Value> = schema.primary_key().iter().map(|k| &row[k]).collect();
            if !keys.insert(key) {
                return Err(Error::DuplicateKey {
                    class: schema.name().to_string(),
                    row: i + 1,
                });
            }
        }
        Ok(Self {
            class: schema.name().to_string(),
            rows,
        })
    }

    pub fn load_csv(class: &str, csv_text: &str, catalog: &Catalog) -> Result<Self> {
        let schema = catalog.class(class)?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(csv_text.as_bytes());
        let csv_err = |row: usize, column: usize, message: String| Error::Csv {
            class: class.to_string(),
            row,
            column,
            message,
        };
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| csv_err(0, 0, e.to_string()))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let declared = schema.attribute_names();
        let given: BTreeSet<String> = headers.iter().cloned().collect();
        if given != declared || headers.len() != declared.len() {
            return Err(Error::HeaderMismatch {
                class: class.to_string(),
                message: format!("expected {declared:?}, found {headers:?}"),
            });
        }
        let kinds = headers.iter().map(|h| schema.kind_of(h)).collect::<Result<Vec<_>>>()?;

        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| csv_err(i + 1, 0, e.to_string()))?;
            if record.len() != headers.len() {
                return Err(csv_err(i + 1, record.len(), "wrong number of fields".into()));
            }
            let mut row = Tuple::new();
            for (j, cell) in record.iter().enumerate() {
                let v = Value::parse(kinds[j], cell)
                    .ok_or_else(|| csv_err(i + 1, j + 1, format!("`{cell}` is not a valid {}", kinds[j].name())))?;
                row.insert(headers[j].clone(), v);
            }
            rows.push(row);
        }
        Self::from_rows(schema, rows)
    }

    /// Renders the relation as CSV with columns in declaration order.
    pub fn to_csv(&self, schema: &ClassSchema) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let names: Vec<&str> = schema.attributes().iter().map(|a| a.name.as_str()).collect();
        let csv_err = |e: csv::Error| Error::Csv {
            class: self.class.clone(),
            row: 0,
            column: 0,
            message: e.to_string(),
        };
        w.write_record(&names).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(names.iter().map(|n| row[*n].to_string())).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn class(&self) -> &str {
        &self.class
    }

    pub fn rows(&self) -> &[Tuple] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BackendStats {
    pub queries_served: u64,
    pub tuples_scanned: u64,
    pub tuples_returned: u64,
}

#[derive(Debug)]
pub struct Backend {
    catalog: Arc<Catalog>,
    relations: BTreeMap<String, Relation>,
    queries_served: AtomicU64,
    tuples_scanned: AtomicU64,
    tuples_returned: AtomicU64,
}

impl Backend {
    pub fn new(catalog: Arc<Catalog>) -> Self {
        Self {
            catalog,
            relations: BTreeMap::new(),
            queries_served: AtomicU64::new(0),
            tuples_scanned: AtomicU64::new(0),
            tuples_returned: AtomicU64::new(0),
        }
    }

    /// Loads `<class>.csv` for every class of the catalog from `dir`.
    pub fn load_dir(catalog: Arc<Catalog>, dir: &Path) -> Result<Self> {
        let mut backend = Self::new(catalog.clone());
        for schema in catalog.classes() {
            let text = std::fs::read_to_string(dir.join(csv_file_name(schema.name())))?;
            backend.insert(Relation::load_csv(schema.name(), &text, &catalog)?);
        }
        Ok(backend)
    }

    pub fn insert(&mut self, relation: Relation) {
        self.relations.insert(relation.class.clone(), relation);
    }

    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn relation(&self, class: &str) -> Result<&Relation> {
        self.catalog.class(class)?;
        self.relations
            .get(class)
            .ok_or_else(|| Error::RelationNotLoaded(class.to_string()))
    }

    /// Answers `q` with set semantics and records the work in the stats.
    pub fn execute(&self, q: &Query) -> Result<Vec<Tuple>> {
        let rel = self.relation(q.class())?;
        let out = evaluate(rel, q)?;
        self.queries_served.fetch_add(1, Ordering::Relaxed);
        self.tuples_scanned.fetch_add(rel.len() as u64, Ordering::Relaxed);
        self.tuples_returned.fetch_add(out.len() as u64, Ordering::Relaxed);
        Ok(out)
    }

    /// Same result as [`Backend::execute`] without touching the stats.
    pub fn oracle(&self, q: &Query) -> Result<Vec<Tuple>> {
        evaluate(self.relation(q.class())?, q)
    }

    pub fn stats(&self) -> BackendStats {
        BackendStats {
            queries_served: self.queries_served.load(Ordering::Relaxed),
            tuples_scanned: self.tuples_scanned.load(Ordering::Relaxed),
            tuples_returned: self.tuples_returned.load(Ordering::Relaxed),
        }
    }
}

fn evaluate(rel: &Relation, q: &Query) -> Result<Vec<Tuple>> {
    let mut out = BTreeSet::new();
    for row in &rel.rows {
        if q.pred().eval(row)? {
            out.insert(q.attrs().iter().map(|a| (a.clone(), row[a].clone())).collect::<Tuple>());
        }
    }
    Ok(out.into_iter().collect())
}
