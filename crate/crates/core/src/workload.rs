//! Workload files plus seeded generators for queries and health-care data.

use std::collections::BTreeSet;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backend::{csv_file_name, Backend, Relation};
use crate::error::{Error, Result};
use crate::predicate::{CompareOp, ComparePredicate, Conjunct, Dnf};
use crate::query::Query;
use crate::schema::Catalog;
use crate::value::{Tuple, Value};

/// Parses one query per line; blank lines and `#` comments are skipped.
pub fn parse_workload(text: &str, catalog: &Catalog, path: &str) -> Result<Vec<Query>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let q = Query::parse(trimmed, catalog).map_err(|e| Error::Workload {
            path: path.to_string(),
            line: i + 1,
            source: Box::new(e),
        })?;
        out.push(q);
    }
    Ok(out)
}

pub fn read_workload(path: &Path, catalog: &Catalog) -> Result<Vec<Query>> {
    let text = std::fs::read_to_string(path)?;
    parse_workload(&text, catalog, &path.display().to_string())
}

pub fn format_workload(queries: &[Query]) -> String {
    queries.iter().map(|q| q.format() + "\n").collect()
}

/// Seeded generator of select-project queries whose constants are drawn
/// from the loaded data. Only satisfiable predicates are produced.
pub struct QueryGenerator<'a> {
    backend: &'a Backend,
    classes: Vec<String>,
    rng: ChaCha8Rng,
    history: Vec<Query>,
}

impl<'a> QueryGenerator<'a> {
    /// `classes` restricts generation; empty means every loaded class.
    pub fn new(backend: &'a Backend, seed: u64, classes: &[String]) -> Result<Self> {
        let classes: Vec<String> = if classes.is_empty() {
            backend.catalog().classes().map(|c| c.name().to_string()).collect()
        } else {
            classes.to_vec()
        };
        for c in &classes {
            if backend.relation(c)?.is_empty() {
                return Err(Error::Config(format!("class `{c}` has no rows to sample")));
            }
        }
        if classes.is_empty() {
            return Err(Error::Config("no classes to generate queries for".into()));
        }
        Ok(Self {
            backend,
            classes,
            rng: ChaCha8Rng::seed_from_u64(seed),
            history: Vec::new(),
        })
    }

    pub fn next_query(&mut self) -> Query {
        if !self.history.is_empty() && self.rng.gen_bool(0.2) {
            let q = self.history.choose(&mut self.rng).expect("non-empty").clone();
            return q;
        }
        let class = self.classes.choose(&mut self.rng).expect("non-empty").clone();
        let schema = self.backend.catalog().class(&class).expect("validated class");
        let rows = self.backend.relation(&class).expect("validated class").rows();
        let names: Vec<&str> = schema.attributes().iter().map(|a| a.name.as_str()).collect();

        let width = self.rng.gen_range(1..=3.min(names.len()));
        let attrs: BTreeSet<String> = names
            .choose_multiple(&mut self.rng, width)
            .map(|s| s.to_string())
            .collect();

        let pred = if self.rng.gen_bool(0.05) {
            Dnf::always()
        } else {
            let n = self.rng.gen_range(1..=3);
            let disjuncts: Vec<Conjunct> = (0..n).map(|_| self.conjunct(&names, rows)).collect();
            Dnf::from_conjuncts(disjuncts)
        };
        let q = Query::new(self.backend.catalog(), &class, attrs, pred).expect("generated from the schema");
        self.history.push(q.clone());
        q
    }

    fn conjunct(&mut self, names: &[&str], rows: &[Tuple]) -> Conjunct {
        loop {
            let atoms = self.rng.gen_range(1..=2);
            let preds: Vec<ComparePredicate> = (0..atoms)
                .map(|_| {
                    let attr = *names.choose(&mut self.rng).expect("non-empty");
                    let row = rows.choose(&mut self.rng).expect("non-empty");
                    let op = *CompareOp::ALL.choose(&mut self.rng).expect("non-empty");
                    ComparePredicate::new(attr, op, row[attr].clone())
                })
                .collect();
            if let Some(c) = Conjunct::from_atoms(&preds) {
                return c;
            }
        }
    }

    pub fn take(&mut self, count: usize) -> Vec<Query> {
        (0..count).map(|_| self.next_query()).collect()
    }
}

pub const HEALTHCARE_CATALOG: &str = r#"# Health-care Web services community
class "Patient referral service" {
    Patient-ID: integer, Paddress: text, Ptelephone: text, Pfirst-name: text,
    Plast-name: text, PAge: integer, Pinsurance-Type: text;
    key(Patient-ID)
}
class "Scheduling Services" {
    Schedule-ID: integer, Sdate: date, Stime: text, Slocation: text;
    key(Schedule-ID)
}
"#;

const FIRST: &[&str] = &[
    "Amina", "Bruno", "Chen", "Dana", "Elif", "Farid", "Grace", "Hugo", "Ines", "Jonas", "Kemal", "Lina",
    "Marta", "Nadia", "Omar", "Priya", "Rafael", "Sara", "Tomas", "Yusuf",
];
const LAST: &[&str] = &[
    "Abbas", "Berger", "Costa", "Dubois", "Evans", "Fischer", "Garcia", "Haddad", "Ivanova", "Jensen",
    "Kowalski", "Lopez", "Meyer", "Nowak", "Okafor", "Petit", "Rossi", "Silva", "Tanaka", "Weber",
];
const STREETS: &[&str] = &["Main St", "Oak Ave", "Harbor Rd", "Hill St", "Lake Dr", "Mill Ln"];
const INSURANCE: &[&str] = &["Personal", "Group", "Medicare", "Medicaid"];
const LOCATIONS: &[&str] = &[
    "Ward A", "Ward B", "Cardiology", "Radiology", "Pediatrics", "Outpatient", "Lab", "Clinic North",
];

/// Generates `rows` patients and `rows` appointments for the health-care
/// catalog.
pub fn synthetic_dataset(seed: u64, rows: usize) -> (Catalog, Vec<Relation>) {
    let catalog = Catalog::parse(HEALTHCARE_CATALOG).expect("built-in catalog parses");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng, xs: &[&str]| xs.choose(rng).expect("non-empty").to_string();

    let patients = (1..=rows as i64)
        .map(|id| {
            tuple([
                ("Patient-ID", Value::Integer(id)),
                ("Paddress", Value::text(format!("{} {}", rng.gen_range(1..500), pick(&mut rng, STREETS)))),
                ("Ptelephone", Value::text(format!("555-{:04}", rng.gen_range(0..10_000)))),
                ("Pfirst-name", Value::text(format!("{}{id}", pick(&mut rng, FIRST)))),
                ("Plast-name", Value::text(pick(&mut rng, LAST))),
                ("PAge", Value::Integer(rng.gen_range(0..96))),
                ("Pinsurance-Type", Value::text(pick(&mut rng, INSURANCE))),
            ])
        })
        .collect();
    let start = NaiveDate::from_ymd_opt(2010, 10, 1).expect("valid date");
    let appointments = (1..=rows as i64)
        .map(|id| {
            tuple([
                ("Schedule-ID", Value::Integer(id)),
                ("Sdate", Value::Date(start + Duration::days(rng.gen_range(0..120)))),
                ("Stime", Value::text(format!("{:02}:{:02}", rng.gen_range(8..18), 15 * rng.gen_range(0..4)))),
                ("Slocation", Value::text(pick(&mut rng, LOCATIONS))),
            ])
        })
        .collect();

    let rel = |name: &str, rows| Relation::from_rows(catalog.class(name).expect("declared"), rows).expect("valid rows");
    let relations = vec![rel("Patient referral service", patients), rel("Scheduling Services", appointments)];
    (catalog, relations)
}

fn tuple<const N: usize>(pairs: [(&str, Value); N]) -> Tuple {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Writes `catalog.txt` and one CSV per class into `dir`.
pub fn write_dataset(dir: &Path, seed: u64, rows: usize) -> Result<()> {
    let (catalog, relations) = synthetic_dataset(seed, rows);
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("catalog.txt"), HEALTHCARE_CATALOG)?;
    for rel in relations {
        let schema = catalog.class(rel.class())?;
        std::fs::write(dir.join(csv_file_name(rel.class())), rel.to_csv(schema)?)?;
    }
    Ok(())
}
