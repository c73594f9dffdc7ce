//! Shared fixtures for unit tests.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::predicate::Dnf;
use crate::schema::Catalog;
use crate::value::{Tuple, Value};

pub const PATIENT: &str = "Patient referral service";
pub const SCHEDULING: &str = "Scheduling Services";

pub fn catalog() -> Arc<Catalog> {
    Arc::new(
        Catalog::parse(
            r#"
            class "Patient referral service" {
                Patient-ID: integer, Paddress: text, Ptelephone: text, Pfirst-name: text,
                Plast-name: text, PAge: integer, Pinsurance-Type: text;
                key(Patient-ID)
            }
            class "Scheduling Services" {
                Schedule-ID: integer, Sdate: date, Stime: text, Slocation: text;
                key(Schedule-ID)
            }
            "#,
        )
        .unwrap(),
    )
}

pub fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn pred(class: &str, text: &str) -> Dnf {
    Dnf::parse(text, catalog().class(class).unwrap()).unwrap()
}

pub fn patient(id: i64, age: i64, insurance: &str) -> Tuple {
    [
        ("Patient-ID", Value::Integer(id)),
        ("Paddress", Value::text(format!("{id} Main St"))),
        ("Ptelephone", Value::text(format!("555-{id:04}"))),
        ("Pfirst-name", Value::text(format!("First{id}"))),
        ("Plast-name", Value::text(format!("Last{}", id % 7))),
        ("PAge", Value::Integer(age)),
        ("Pinsurance-Type", Value::text(insurance)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Patients 1..=n with ages cycling through 0..90.
pub fn patients(n: i64) -> Vec<Tuple> {
    (1..=n)
        .map(|i| patient(i, (i * 7) % 90, if i % 3 == 0 { "Personal" } else { "Group" }))
        .collect()
}

pub fn appointment(id: i64, date: (i32, u32, u32), location: &str) -> Tuple {
    [
        ("Schedule-ID", Value::Integer(id)),
        ("Sdate", Value::date(date.0, date.1, date.2)),
        ("Stime", Value::text(format!("{:02}:00", 8 + id % 9))),
        ("Slocation", Value::text(location)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}
