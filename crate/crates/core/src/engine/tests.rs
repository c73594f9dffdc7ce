use super::*;
use crate::backend::Relation;
use crate::testutil::{appointment, catalog, patients, PATIENT, SCHEDULING};

fn backend() -> Backend {
    let cat = catalog();
    let mut b = Backend::new(cat.clone());
    b.insert(Relation::from_rows(cat.class(PATIENT).unwrap(), patients(300)).unwrap());
    let appts = (1..=60)
        .map(|i| appointment(i, (2010, 12, 1 + (i % 30) as u32), ["Ward A", "Ward B", "Clinic"][(i % 3) as usize]))
        .collect();
    b.insert(Relation::from_rows(cat.class(SCHEDULING).unwrap(), appts).unwrap());
    b
}

fn engine(pages: usize) -> Engine {
    Engine::new(backend(), CacheConfig { total_pages: pages, ..CacheConfig::default() }).unwrap()
}

fn q(e: &Engine, text: &str) -> Query {
    Query::parse(text, e.catalog()).unwrap()
}

fn check(e: &mut Engine, text: &str) -> AnswerReport {
    let query = q(e, text);
    let report = e.answer(&query).unwrap();
    assert_eq!(report.answer, e.backend().oracle(&query).unwrap(), "{text}");
    report
}

const S1: &str = "SELECT Plast-name FROM 'Patient referral service' WHERE PAge > 20 AND PAge < 60";
const S2: &str = "SELECT Pfirst-name, Plast-name FROM 'Patient referral service' WHERE PAge > 10";
const S3: &str = "SELECT Schedule-ID FROM 'Scheduling Services' WHERE Sdate = '2010-12-28'";
const S4: &str = "SELECT Slocation FROM 'Scheduling Services' WHERE Sdate > '2010-12-10'";
const PERSONAL_OVER_5: &str = "SELECT Pfirst-name, Plast-name FROM 'Patient referral service' \
                        WHERE PAge > 5 AND Pinsurance-Type = 'Personal'";

#[test]
fn cold_query_is_a_miss_and_caches() {
    let mut e = engine(64);
    let r = check(&mut e, S1);
    assert_eq!(r.case, CaseType::Case5);
    assert_eq!(r.segment_used, None);
    assert_eq!(r.local_tuples, 0);
    assert_eq!(r.inserted_segments.len(), 1);
    assert_eq!(e.cache().len(), 1);
    let s = e.stats();
    assert_eq!((s.queries, s.misses), (1, 1));
}

#[test]
fn repeat_is_a_full_hit_without_backend() {
    let mut e = engine(64);
    check(&mut e, S1);
    let before = e.backend().stats();
    let r = check(&mut e, S1);
    assert_eq!(r.case, CaseType::Case1);
    assert_eq!((r.backend_tuples, r.feedback_tuples), (0, 0));
    assert!(r.local_tuples > 0);
    assert_eq!(e.backend().stats(), before);
    assert_eq!(e.stats().full_hits, 1);
}

#[test]
fn personal_over_five_is_case_two() {
    let mut e = engine(64);
    check(&mut e, S2);
    let r = check(&mut e, PERSONAL_OVER_5);
    assert_eq!(r.case, CaseType::Case2);
    assert!(r.trace.starts_with("CASE=2 SEG=S1 "), "{}", r.trace);
    // The coalesced segment now answers the query locally.
    assert_eq!(check(&mut e, PERSONAL_OVER_5).case, CaseType::Case1);
}

#[test]
fn warmup_then_repeat_is_all_hits() {
    let mut e = engine(64);
    for t in [S1, S2, S3, S4] {
        check(&mut e, t);
    }
    let total = e.stats().backend_tuples_total;
    for t in [S1, S2, S3, S4] {
        let r = check(&mut e, t);
        assert_eq!(r.case, CaseType::Case1, "{t}");
    }
    assert_eq!(e.stats().backend_tuples_total, total);
    assert_eq!(e.stats().full_hits, 4);
    assert!(e.cache().check_disjointness().is_none());
}

#[test]
fn attribute_extension_cases() {
    let mut e = engine(64);
    check(&mut e, S4);
    let r = check(&mut e, "SELECT Slocation, Stime FROM 'Scheduling Services' WHERE Sdate > '2010-12-10'");
    assert_eq!(r.case, CaseType::Case3);
    let r = check(&mut e, "SELECT Stime, Sdate FROM 'Scheduling Services' WHERE Sdate > '2010-12-01'");
    assert_ne!(r.case, CaseType::Case5);
    let mut e = engine(64);
    check(&mut e, S2);
    let r = check(&mut e, "SELECT Plast-name, Ptelephone FROM 'Patient referral service' WHERE PAge > 5");
    assert_eq!(r.case, CaseType::Case4);
}

#[test]
fn heavy_eviction_stays_correct() {
    let mut e = Engine::new(
        backend(),
        CacheConfig { total_pages: 2, page_capacity_bytes: 512, ..CacheConfig::default() },
    )
    .unwrap();
    for t in [S1, S2, S3, S4, PERSONAL_OVER_5, S1, S4, S2] {
        check(&mut e, t);
    }
    assert!(e.stats().evictions > 0 || e.cache().len() <= 2);
}

#[test]
fn blowup_cap_one_stays_correct() {
    let mut e = Engine::new(backend(), CacheConfig { blowup_cap: 1, ..CacheConfig::default() }).unwrap();
    for t in [S1, S2, PERSONAL_OVER_5, S2, S1, S3, S4, S3] {
        check(&mut e, t);
    }
}

#[test]
fn corrupted_page_degrades_to_backend() {
    let mut e = engine(64);
    check(&mut e, S1);
    let first = e.cache().entries().next().unwrap().first_page;
    e.cache_mut().page_mut(first).corrupt();
    let r = check(&mut e, S1);
    assert_eq!(r.case, CaseType::Case5);
}

#[test]
fn unknown_class_is_an_error() {
    let mut e = engine(8);
    let bogus = Query::unchecked("Nope", BTreeSet::from(["x".to_string()]), Dnf::always());
    assert!(matches!(e.answer(&bogus), Err(Error::UnknownClass(_))));
}

#[test]
fn assemble_joins_on_key() {
    let cat = catalog();
    let query = Query::parse("SELECT Slocation, Stime FROM 'Scheduling Services' WHERE Sdate > '2010-12-10'", &cat).unwrap();
    let key = cat.class(SCHEDULING).unwrap().primary_key().clone();
    let row = |id: i64, attr: &str, v: &str| -> Tuple {
        [("Schedule-ID".to_string(), crate::value::Value::Integer(id)), (attr.to_string(), crate::value::Value::text(v))]
            .into_iter()
            .collect()
    };
    let outcome = RewriteOutcome { case: CaseType::Case3, lq: None, aq: None, rq1: None, rq2: None };
    let f = Fetched {
        local: (1..=3).map(|i| row(i, "Slocation", "A")).collect(),
        rq1: Some((2..=4).map(|i| row(i, "Stime", &format!("{i}:00"))).collect()),
        ..Fetched::default()
    };
    let got = assemble(&outcome, &query, &key, &f).unwrap();
    assert_eq!(got.len(), 2);
    assert!(got.iter().all(|t| t.len() == 2 && t["Slocation"] == crate::value::Value::text("A")));
}

#[test]
fn stats_json_shape() {
    let mut e = engine(64);
    check(&mut e, S1);
    check(&mut e, S1);
    let json = e.stats().to_json();
    assert_eq!(json["queries"], 2);
    assert_eq!(json["hit_ratio"], 0.5);
    assert_eq!(json["case_counts"]["1"], 1);
    assert_eq!(json["case_counts"]["5"], 1);
    for k in ["full_hits", "partial_hits", "misses", "backend_tuples_total", "saved_tuples_estimate", "evictions"] {
        assert!(json.get(k).is_some(), "{k}");
    }
    assert_eq!(EngineStats { queries: 3, full_hits: 1, ..Default::default() }.hit_ratio(), 0.3333);
}

#[test]
fn dump_and_load_continue_identically() {
    let mut a = engine(64);
    for t in [S1, S2, S3] {
        check(&mut a, t);
    }
    let image = a.dump();
    let mut b = Engine::load(backend(), &image).unwrap();
    assert_eq!(b.dump(), image);
    for t in [S4, PERSONAL_OVER_5, S1] {
        let ra = check(&mut a, t);
        let rb = check(&mut b, t);
        assert_eq!(ra, rb);
    }
    assert_eq!(a.stats(), b.stats());
}
