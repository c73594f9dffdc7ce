use super::*;
use crate::testutil::{appointment, catalog, patients, pred, set, PATIENT, SCHEDULING};
use crate::value::Value;

fn cache(pages: usize) -> SemanticCache {
    SemanticCache::new(
        catalog(),
        CacheConfig {
            total_pages: pages,
            ..CacheConfig::default()
        },
    )
    .unwrap()
}

fn small_pages(pages: usize, bytes: usize) -> SemanticCache {
    SemanticCache::new(
        catalog(),
        CacheConfig {
            total_pages: pages,
            page_capacity_bytes: bytes,
            ..CacheConfig::default()
        },
    )
    .unwrap()
}

fn insert(c: &mut SemanticCache, class: &str, attrs: &[&str], p: &str, now: u64) -> InsertOutcome {
    let tuples = if class == PATIENT {
        patients(200)
    } else {
        (1..=40)
            .map(|i| appointment(i, (2010, 12, 20 + (i % 10) as u32), "Ward A"))
            .collect()
    };
    c.insert_segment(class, &set(attrs), &pred(class, p), &tuples, now).unwrap()
}

/// The four warm-up queries of the health-care example.
fn warmup(c: &mut SemanticCache) -> Vec<SegmentId> {
    vec![
        insert(c, PATIENT, &["Plast-name"], "PAge > 20 AND PAge < 60", 1),
        insert(c, PATIENT, &["Pfirst-name", "Plast-name"], "PAge > 10", 2),
        insert(c, SCHEDULING, &["Schedule-ID"], "Sdate = '2010-12-28'", 3),
        insert(c, SCHEDULING, &["Slocation"], "Sdate > '2010-12-10'", 4),
    ]
    .into_iter()
    .map(|o| o.stored().unwrap())
    .collect()
}

#[test]
fn config_must_be_positive() {
    for cfg in [
        CacheConfig { total_pages: 0, ..CacheConfig::default() },
        CacheConfig { page_capacity_bytes: 0, ..CacheConfig::default() },
        CacheConfig { blowup_cap: 0, ..CacheConfig::default() },
    ] {
        assert!(matches!(SemanticCache::new(catalog(), cfg), Err(Error::Config(_))));
    }
    assert_eq!(CacheConfig::default().page_capacity_bytes, 4096);
    assert_eq!(CacheConfig::default().blowup_cap, 64);
}

#[test]
fn allocate_pages_counts() {
    let mut c = cache(10);
    assert_eq!(c.allocate_pages(3).unwrap(), vec![0, 1, 2]);
    assert_eq!(c.free_pages(), 7);
    assert!(c.allocate_pages(0).unwrap().is_empty());
    assert!(matches!(
        cache(10).allocate_pages(11),
        Err(Error::InsufficientSpace { needed: 11, free: 10 })
    ));
}

#[test]
fn deallocate_frees_chain() {
    let mut c = small_pages(16, 256);
    let id = insert(&mut c, PATIENT, &["Plast-name"], "PAge < 30", 1).stored().unwrap();
    let pages = c.entry(id).unwrap().page_count;
    assert!(pages >= 2);
    let free = c.free_pages();
    c.deallocate_segment(id).unwrap();
    assert_eq!(c.free_pages(), free + pages);
    assert!(c.entry(id).is_none());
    assert!(matches!(c.deallocate_segment(id), Err(Error::UnknownSegment(n)) if n == id.to_string()));
}

#[test]
fn disjoint_follows_both_conditions() {
    let mut c = cache(32);
    let ids = warmup(&mut c);
    let e = |i: usize| c.entry(ids[i]).unwrap().clone();
    assert!(disjoint(&e(0), &e(2)));

    let mut a = e(1);
    a.pred = pred(PATIENT, "PAge > 10");
    let mut b = a.clone();
    b.pred = pred(PATIENT, "PAge <= 10");
    assert!(disjoint(&a, &b));

    // The raw warm-up predicates of S1 and S2 overlap at PAge = 30.
    let mut s1 = a.clone();
    s1.pred = pred(PATIENT, "PAge > 20 AND PAge < 60");
    assert!(!disjoint(&s1, &a));

    let mut no_common = a.clone();
    no_common.attrs = set(&["Paddress"]);
    let mut other = s1.clone();
    other.attrs = set(&["PAge"]);
    assert!(disjoint(&no_common, &other));
}

#[test]
fn warmup_builds_disjoint_index() {
    let mut c = cache(32);
    let ids = warmup(&mut c);
    assert_eq!(c.len(), 4);
    let e: Vec<_> = ids.iter().map(|i| c.entry(*i).unwrap()).collect();
    assert_eq!(e.iter().map(|e| e.name()).collect::<Vec<_>>(), ["S1", "S2", "S3", "S4"]);
    assert_eq!(e[0].pred, pred(PATIENT, "PAge > 20 AND PAge < 60"));
    assert_eq!(e[1].pred, pred(PATIENT, "PAge > 10 AND PAge <= 20 OR PAge >= 60"));
    assert_eq!(e[2].pred, pred(SCHEDULING, "Sdate = '2010-12-28'"));
    assert_eq!(
        e[3].pred,
        pred(SCHEDULING, "Sdate > '2010-12-10' AND Sdate < '2010-12-28' OR Sdate > '2010-12-28'")
    );
    assert!(e[0].attrs.is_superset(&set(&["Plast-name", "Patient-ID", "PAge"])));
    assert!(e[3].attrs.is_superset(&set(&["Slocation", "Schedule-ID", "Sdate"])));
    assert!(c.check_disjointness().is_none());
}

#[test]
fn subsumed_insert_is_rejected() {
    let mut c = cache(32);
    insert(&mut c, PATIENT, &["Plast-name"], "PAge > 10", 1);
    let out = insert(&mut c, PATIENT, &["Plast-name"], "PAge > 20 AND PAge < 60", 2);
    assert_eq!(out, InsertOutcome::Rejected(RejectReason::Covered));
    assert_eq!(c.len(), 1);
}

#[test]
fn residual_subtracts_existing_segment() {
    let mut c = cache(32);
    insert(&mut c, PATIENT, &["Plast-name"], "PAge > 20 AND PAge < 60", 1);
    let id = insert(&mut c, PATIENT, &["Plast-name"], "PAge > 0", 2).stored().unwrap();
    let e = c.entry(id).unwrap();
    assert_eq!(e.pred, pred(PATIENT, "PAge > 0 AND PAge <= 20 OR PAge >= 60"));
    let rows = c.scan_segment(id).unwrap();
    assert!(!rows.is_empty());
    for t in &rows {
        let age = t["PAge"].clone();
        assert!(age <= Value::Integer(20) || age >= Value::Integer(60));
        assert!(age > Value::Integer(0));
    }
    let expected = patients(200)
        .into_iter()
        .filter(|t| e.pred.eval(t).unwrap())
        .count();
    assert_eq!(rows.len(), expected);
    assert_eq!(e.tuple_count, expected);
}

#[test]
fn empty_result_is_rejected() {
    let mut c = cache(8);
    let out = c
        .insert_segment(PATIENT, &set(&["PAge"]), &pred(PATIENT, "PAge > 10"), &[], 1)
        .unwrap();
    assert_eq!(out, InsertOutcome::Rejected(RejectReason::Empty));
    assert_eq!(c.free_pages(), 8);
}

#[test]
fn blowup_during_residual_rejects() {
    let mut c = SemanticCache::new(catalog(), CacheConfig { blowup_cap: 1, ..CacheConfig::default() }).unwrap();
    insert(&mut c, PATIENT, &["Plast-name"], "PAge > 20 AND PAge < 60 AND Pinsurance-Type = 'Group'", 1);
    let out = insert(&mut c, PATIENT, &["Plast-name"], "PAge > 0 AND Patient-ID < 150", 2);
    assert_eq!(out, InsertOutcome::Rejected(RejectReason::Blowup));
}

#[test]
fn oversized_inserts_are_rejected() {
    let mut c = small_pages(2, 64);
    let out = insert(&mut c, PATIENT, &["Plast-name", "Paddress"], "PAge >= 0", 1);
    assert_eq!(out, InsertOutcome::Rejected(RejectReason::TooLarge));
    let mut tiny = small_pages(4, 8);
    let out = insert(&mut tiny, PATIENT, &["Plast-name"], "PAge >= 0", 1);
    assert_eq!(out, InsertOutcome::Rejected(RejectReason::TupleTooLarge));
    assert_eq!(tiny.free_pages(), 4);
}

#[test]
fn lookup_candidates_orders_by_recency() {
    let mut c = cache(32);
    let ids = warmup(&mut c);
    let q = Query::parse("SELECT Slocation FROM 'Scheduling Services'", c.catalog()).unwrap();
    let names = |c: &SemanticCache| c.lookup_candidates(&q).iter().map(|e| e.id).collect::<Vec<_>>();
    assert_eq!(names(&c), vec![ids[3], ids[2]]);
    c.touch(ids[2], 10).unwrap();
    assert_eq!(names(&c), vec![ids[2], ids[3]]);

    let empty = cache(4);
    assert!(empty.lookup_candidates(&q).is_empty());
}

#[test]
fn touch_updates_timestamp() {
    let mut c = cache(32);
    let ids = warmup(&mut c);
    c.touch(ids[0], 7).unwrap();
    assert_eq!(c.entry(ids[0]).unwrap().timestamp, 7);
    c.touch(ids[0], 9).unwrap();
    assert_eq!(c.entry(ids[0]).unwrap().timestamp, 9);
    assert!(matches!(c.touch(SegmentId(99), 1), Err(Error::UnknownSegment(_))));
}

#[test]
fn evict_until_is_lru() {
    let mut c = small_pages(4, 64);
    let mut ids = Vec::new();
    for (i, p) in ["PAge < 5", "PAge >= 5 AND PAge < 10", "PAge >= 10 AND PAge < 15", "PAge >= 15 AND PAge < 20"]
        .iter()
        .enumerate()
    {
        let tuples: Vec<_> = patients(200).into_iter().filter(|t| pred(PATIENT, p).eval(t).unwrap()).take(1).collect();
        let out = c.insert_segment(PATIENT, &set(&["PAge"]), &pred(PATIENT, p), &tuples, i as u64 + 1).unwrap();
        ids.push(out.stored().unwrap());
    }
    assert_eq!(c.free_pages(), 0);
    assert!(c.entries().all(|e| e.page_count == 1));
    // Visit T1 < T2 < T3 < T4 order reshuffled: S2 oldest, then S4.
    c.touch(ids[0], 10).unwrap();
    c.touch(ids[2], 11).unwrap();
    assert_eq!(c.evict_until(2), vec![ids[1], ids[3]]);
    assert!(c.evict_until(2).is_empty());
    assert_eq!(c.evict_until(4), vec![ids[0], ids[2]]);
    assert!(c.is_empty());
    assert_eq!(c.evictions(), 4);
}

#[test]
fn insert_evicts_when_full() {
    let mut c = small_pages(3, 128);
    let a = insert(&mut c, PATIENT, &["PAge"], "PAge = 3", 1).stored().unwrap();
    let b = insert(&mut c, PATIENT, &["PAge"], "PAge = 4", 2).stored().unwrap();
    let d = insert(&mut c, PATIENT, &["PAge"], "PAge = 5", 3).stored().unwrap();
    assert_eq!(c.free_pages(), 0);
    c.touch(a, 4).unwrap();
    let e = insert(&mut c, PATIENT, &["PAge"], "PAge = 6", 5).stored().unwrap();
    assert!(c.entry(b).is_none());
    assert!(c.entry(a).is_some() && c.entry(d).is_some() && c.entry(e).is_some());
}

#[test]
fn scan_round_trips_and_spans_pages() {
    let mut c = small_pages(64, 200);
    let tuples = patients(5);
    let id = c
        .insert_segment(PATIENT, &set(&["Plast-name", "Pfirst-name"]), &pred(PATIENT, "TRUE"), &tuples, 1)
        .unwrap()
        .stored()
        .unwrap();
    let mut got = c.scan_segment(id).unwrap();
    got.sort();
    let attrs = &c.entry(id).unwrap().attrs;
    let mut want: Vec<_> = tuples.iter().map(|t| project(t, attrs).unwrap()).collect();
    want.sort();
    assert_eq!(got, want);

    let mut c = small_pages(64, 200);
    let many = patients(60);
    let big = c
        .insert_segment(PATIENT, &set(&["Paddress", "Ptelephone"]), &pred(PATIENT, "Patient-ID > 5"), &many, 2)
        .unwrap()
        .stored()
        .unwrap();
    let e = c.entry(big).unwrap().clone();
    assert!(e.page_count >= 3);
    let mut concat = Vec::new();
    let mut p = Some(e.first_page);
    for _ in 0..e.page_count {
        let page = &c.pages()[p.unwrap() as usize];
        concat.extend(page.rows(&e.attrs).unwrap());
        p = page.next();
    }
    assert_eq!(c.scan_segment(big).unwrap(), concat);
    assert_eq!(concat.len(), 55);

    c.deallocate_segment(big).unwrap();
    assert!(matches!(c.scan_segment(big), Err(Error::UnknownSegment(_))));
}

#[test]
fn scan_detects_corruption() {
    let mut c = cache(8);
    let id = insert(&mut c, PATIENT, &["Plast-name"], "PAge < 30", 1).stored().unwrap();
    let first = c.entry(id).unwrap().first_page;
    c.page_mut(first).corrupt();
    assert!(matches!(c.scan_segment(id), Err(Error::Checksum { page }) if page == first));
}

#[test]
fn absorb_replaces_victims() {
    let mut c = cache(32);
    let ids = warmup(&mut c);
    let merged = pred(PATIENT, "PAge > 10");
    let tuples: Vec<_> = patients(200).into_iter().filter(|t| merged.eval(t).unwrap()).collect();
    let attrs = set(&["Plast-name", "Pfirst-name"]);
    let id = c.absorb(PATIENT, &ids[..2], &attrs, &merged, &tuples, 9).unwrap().stored().unwrap();
    assert!(c.entry(ids[0]).is_none() && c.entry(ids[1]).is_none());
    let e = c.entry(id).unwrap();
    assert_eq!(e.pred, merged);
    assert_eq!(e.tuple_count, tuples.len());
    assert_eq!(c.len(), 3);

    let overlap = c.absorb(PATIENT, &[], &attrs, &pred(PATIENT, "PAge > 50"), &[], 10);
    assert!(matches!(overlap, Err(Error::Overlap(n)) if n == id.to_string()));
    let bad = c.absorb(PATIENT, &[id], &attrs, &pred(PATIENT, "PAge > 80"), &tuples, 10);
    assert!(matches!(bad, Err(Error::ContentViolation)));
    let empty = c.absorb(PATIENT, &[id], &attrs, &pred(PATIENT, "PAge > 500"), &[], 11).unwrap();
    let e = c.entry(empty.stored().unwrap()).unwrap();
    assert_eq!((e.tuple_count, e.page_count), (0, 1));
    assert!(c.scan_segment(e.id).unwrap().is_empty());
}

#[test]
fn required_attrs_covers_overlapping_predicates() {
    let mut c = cache(32);
    warmup(&mut c);
    let got = c.required_attrs(SCHEDULING, &set(&["Stime"]), &pred(SCHEDULING, "Slocation = 'Ward A'")).unwrap();
    assert_eq!(got, set(&["Schedule-ID", "Sdate", "Slocation", "Stime"]));
}

#[test]
fn dump_load_round_trips() {
    let mut c = small_pages(40, 256);
    warmup(&mut c);
    c.evict_until(38);
    insert(&mut c, PATIENT, &["Ptelephone"], "Pinsurance-Type = 'Personal'", 7);
    let image = c.dump(b"state");
    let (back, extra) = SemanticCache::load(&image, catalog()).unwrap();
    assert_eq!(extra, b"state");
    assert_eq!(back.dump(b"state"), image);
    assert_eq!(back.entries().collect::<Vec<_>>(), c.entries().collect::<Vec<_>>());
    assert_eq!(back.free_pages(), c.free_pages());
    for e in c.entries() {
        assert_eq!(back.scan_segment(e.id).unwrap(), c.scan_segment(e.id).unwrap());
    }
}

#[test]
fn load_rejects_damage() {
    let mut c = cache(8);
    insert(&mut c, PATIENT, &["Plast-name"], "PAge < 30", 1);
    let image = c.dump(&[]);
    let mut flipped = image.clone();
    let mid = flipped.len() - 20;
    flipped[mid] ^= 0x40;
    assert!(matches!(SemanticCache::load(&flipped, catalog()), Err(Error::CorruptImage(_))));
    assert!(SemanticCache::load(&image[..10], catalog()).is_err());
    assert!(SemanticCache::load(b"nope", catalog()).is_err());
}
