//! Store invariants under random insert, touch and evict sequences.

mod common;

use common::synthetic_backend;
use proptest::prelude::*;
use semcache::workload::QueryGenerator;
use semcache::{Backend, CacheConfig, Query, SemanticCache};

#[derive(Clone, Debug)]
enum Op {
    Insert(usize),
    Touch(usize),
    Evict(usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (0..40usize).prop_map(Op::Insert),
        1 => (0..8usize).prop_map(Op::Touch),
        1 => (0..=10usize).prop_map(Op::Evict),
    ]
}

fn fixture() -> (Backend, Vec<Query>) {
    let backend = synthetic_backend(21, 150);
    let queries = QueryGenerator::new(&backend, 21, &[]).unwrap().take(40);
    (backend, queries)
}

fn check_content(cache: &SemanticCache) -> Result<(), TestCaseError> {
    for e in cache.entries() {
        let rows = cache.scan_segment(e.id).unwrap();
        prop_assert_eq!(rows.len(), e.tuple_count);
        for t in rows {
            prop_assert!(t.keys().eq(e.attrs.iter()), "tuple attrs differ from {:?}", e.attrs);
            prop_assert!(e.pred.eval(&t).unwrap());
        }
        let key = cache.catalog().class(&e.class).unwrap().primary_key();
        prop_assert!(key.is_subset(&e.attrs));
        prop_assert!(e.pred.attrs().is_subset(&e.attrs));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn invariants_hold_after_every_operation(ops in prop::collection::vec(op(), 1..40), pages in 4..16usize) {
        let (backend, queries) = fixture();
        let config = CacheConfig { total_pages: pages, page_capacity_bytes: 512, ..CacheConfig::default() };
        let mut cache = SemanticCache::new(backend.catalog().clone(), config).unwrap();
        let mut now = 0;
        for op in ops {
            now += 1;
            match op {
                Op::Insert(i) => {
                    let q = &queries[i];
                    let attrs = cache.required_attrs(q.class(), q.attrs(), q.pred()).unwrap();
                    let rows = backend.oracle(&Query::new(backend.catalog(), q.class(), attrs, q.pred().clone()).unwrap()).unwrap();
                    cache.insert_segment(q.class(), q.attrs(), q.pred(), &rows, now).unwrap();
                }
                Op::Touch(i) => {
                    let id = cache.entries().nth(i).map(|e| e.id);
                    if let Some(id) = id {
                        cache.touch(id, now).unwrap();
                    }
                }
                Op::Evict(n) => {
                    let mut by_age: Vec<_> = cache.entries().map(|e| (e.timestamp, e.id)).collect();
                    by_age.sort();
                    let evicted = cache.evict_until(n.min(pages));
                    let prefix: Vec<_> = by_age.iter().take(evicted.len()).map(|(_, id)| *id).collect();
                    prop_assert_eq!(evicted, prefix);
                    prop_assert!(cache.free_pages() >= n.min(pages));
                }
            }
            prop_assert!(cache.check_disjointness().is_none());
            prop_assert!(cache.check_page_accounting());
            let used: usize = cache.entries().map(|e| e.page_count).sum();
            prop_assert_eq!(used + cache.free_pages(), pages);
        }
        check_content(&cache)?;
        let image = cache.dump(b"x");
        let (back, extra) = SemanticCache::load(&image, cache.catalog().clone()).unwrap();
        prop_assert_eq!(extra, b"x".to_vec());
        prop_assert_eq!(back.dump(b"x"), image);
    }
}

#[test]
fn inserted_content_matches_residual_region() {
    let (backend, queries) = fixture();
    let mut cache = SemanticCache::new(backend.catalog().clone(), CacheConfig::default()).unwrap();
    for (i, q) in queries.iter().enumerate() {
        let attrs = cache.required_attrs(q.class(), q.attrs(), q.pred()).unwrap();
        let rows = backend.oracle(&Query::new(backend.catalog(), q.class(), attrs, q.pred().clone()).unwrap()).unwrap();
        if let Some(id) = cache.insert_segment(q.class(), q.attrs(), q.pred(), &rows, i as u64).unwrap().stored() {
            let e = cache.entry(id).unwrap();
            let expected = backend
                .oracle(&Query::new(backend.catalog(), &e.class, e.attrs.clone(), e.pred.clone()).unwrap())
                .unwrap();
            let mut got = cache.scan_segment(id).unwrap();
            got.sort();
            assert_eq!(got, expected, "segment {} holds exactly its region", e.id);
        }
    }
    assert!(cache.len() > 3);
}
