#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use semcache::workload::synthetic_dataset;
use semcache::{Backend, Catalog, Query};

pub const PATIENT: &str = "Patient referral service";
pub const SCHEDULING: &str = "Scheduling Services";

pub const WARMUP: [&str; 4] = [
    "SELECT Plast-name FROM 'Patient referral service' WHERE PAge > 20 AND PAge < 60",
    "SELECT Pfirst-name, Plast-name FROM 'Patient referral service' WHERE PAge > 10",
    "SELECT Schedule-ID FROM 'Scheduling Services' WHERE Sdate = '2010-12-28'",
    "SELECT Slocation FROM 'Scheduling Services' WHERE Sdate > '2010-12-10'",
];

pub const PERSONAL_OVER_5: &str = "SELECT Pfirst-name, Plast-name FROM 'Patient referral service' \
                            WHERE PAge > 5 AND Pinsurance-Type = 'Personal'";

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/healthcare")
}

pub fn fixture_backend(catalog_file: &str) -> Backend {
    let dir = fixture_dir();
    let catalog = Catalog::parse(&std::fs::read_to_string(dir.join(catalog_file)).unwrap()).unwrap();
    Backend::load_dir(Arc::new(catalog), &dir).unwrap()
}

pub fn synthetic_backend(seed: u64, rows: usize) -> Backend {
    let (catalog, relations) = synthetic_dataset(seed, rows);
    let mut b = Backend::new(Arc::new(catalog));
    relations.into_iter().for_each(|r| b.insert(r));
    b
}

pub fn parse(backend: &Backend, text: &str) -> Query {
    Query::parse(text, backend.catalog()).unwrap()
}
