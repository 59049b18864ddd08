use super::*;

fn web(count: usize) -> TrafficClassParams {
    TrafficClassParams {
        class: TrafficClass::Web,
        object_count: count,
        size: SizeDistribution::LogNormal {
            median: 6.0,
            max: 19_929,
            std_dev: 56.6,
        },
        popularity: Popularity {
            mean: 10_984.0,
            max: 658_686.0,
            std_dev: 53.8,
            alpha: 0.8,
        },
        request_weight: None,
    }
}

fn median(mut v: Vec<u32>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

#[test]
fn web_class_median() {
    let cat = generate_catalog(&[web(195)], 1).unwrap();
    assert_eq!(cat.len(), 195);
    let m = median(cat.objects().iter().map(|o| o.size_chunks).collect());
    assert!((m - 6.0).abs() <= 1.0, "median {m}");
    assert!(cat.objects().iter().all(|o| (1..=19_929).contains(&o.size_chunks)));
    // a large sample pins the fitted median tightly
    let cat = generate_catalog(&[web(20_000)], 2).unwrap();
    let m = median(cat.objects().iter().map(|o| o.size_chunks).collect());
    assert!((m - 6.0).abs() <= 0.5, "median {m}");
}

#[test]
fn scaled_mix() {
    let params = default_classes(0.001);
    let by = |c| params.iter().find(|p| p.class == c).unwrap();
    assert_eq!(by(TrafficClass::Web).object_count, 195);
    let p2p = by(TrafficClass::P2p);
    assert_eq!(p2p.object_count, 1);
    assert_eq!(p2p.size, SizeDistribution::Fixed { fixed: 687 });
    let cat = generate_catalog(&params, 5).unwrap();
    let p2p_obj: Vec<_> = cat.objects().iter().filter(|o| o.class == TrafficClass::P2p).collect();
    assert_eq!(p2p_obj.len(), 1);
    assert_eq!(p2p_obj[0].size_chunks, 687);
}

#[test]
fn fixed_size_class() {
    let p = TrafficClassParams {
        class: TrafficClass::Other,
        object_count: 50,
        size: SizeDistribution::Fixed { fixed: 4 },
        popularity: Popularity {
            mean: 1.0,
            max: 1.0,
            std_dev: 0.0,
            alpha: 0.8,
        },
        request_weight: None,
    };
    let cat = generate_catalog(&[p], 0).unwrap();
    assert!(cat.objects().iter().all(|o| o.size_chunks == 4));
    assert_eq!(cat.total_chunks(), 200);
}

#[test]
fn infeasible_distribution() {
    let mut p = web(10);
    p.size = SizeDistribution::LogNormal {
        median: 50.0,
        max: 10,
        std_dev: 3.0,
    };
    assert!(generate_catalog(&[p], 0).is_err());
    assert!(generate_catalog(&[], 0).is_err());
}

#[test]
fn catalog_is_deterministic() {
    let params = default_classes(0.001);
    assert_eq!(generate_catalog(&params, 9).unwrap(), generate_catalog(&params, 9).unwrap());
}

#[test]
fn catalog_scales_linearly() {
    let mut p = web(2_000);
    p.size = SizeDistribution::LogNormal {
        median: 6.0,
        max: 200,
        std_dev: 10.0,
    };
    let small = generate_catalog(&[p.clone()], 3).unwrap().total_chunks() as f64;
    p.object_count = 8_000;
    let big = generate_catalog(&[p], 3).unwrap().total_chunks() as f64;
    let ratio = big / small;
    assert!((ratio - 4.0).abs() <= 0.8, "ratio {ratio}");
}

#[test]
fn single_object_trace() {
    let cat = Catalog::from_objects(vec![CatalogObject {
        id: ObjectId::new("only").unwrap(),
        class: TrafficClass::Web,
        size_chunks: 3,
    }])
    .unwrap();
    let t = generate_requests(&cat, &[web(1)], 1, 5, 0).unwrap();
    assert_eq!(t.receivers.len(), 1);
    assert!(t.receivers[0].iter().all(|o| o.as_str() == "only"));
    assert_eq!(t.receivers[0].len(), 5);
}

#[test]
fn traces_are_deterministic_and_valid() {
    let params = default_classes(0.001);
    let cat = generate_catalog(&params, 1).unwrap();
    let a = generate_requests(&cat, &params, 10, 50, 4).unwrap();
    let b = generate_requests(&cat, &params, 10, 50, 4).unwrap();
    assert_eq!(a, b);
    a.validate(&cat).unwrap();
    assert_eq!(a.request_count(), 500);
    assert_ne!(a, generate_requests(&cat, &params, 10, 50, 5).unwrap());
}

#[test]
fn web_dominates_default_mix() {
    let params = default_classes(0.001);
    let cat = generate_catalog(&params, 1).unwrap();
    let t = generate_requests(&cat, &params, 20, 500, 8).unwrap();
    let web = t
        .receivers
        .iter()
        .flatten()
        .filter(|o| cat.get(o).unwrap().class == TrafficClass::Web)
        .count();
    assert!(web as f64 >= 0.8 * t.request_count() as f64);
}

#[test]
fn class_shares_match_weights() {
    let mut params = default_classes(0.001);
    let weights = [0.5, 0.1, 0.15, 0.25];
    for (p, w) in params.iter_mut().zip(weights) {
        p.request_weight = Some(w);
    }
    let cat = generate_catalog(&params, 1).unwrap();
    let t = generate_requests(&cat, &params, 100, 1_000, 2).unwrap();
    let n = t.request_count() as f64;
    for (p, w) in params.iter().zip(weights) {
        let got = t
            .receivers
            .iter()
            .flatten()
            .filter(|o| cat.get(o).unwrap().class == p.class)
            .count() as f64
            / n;
        assert!((got - w).abs() <= 0.02 * w, "{}: {got} vs {w}", p.class);
    }
}

#[test]
fn csv_round_trip() {
    let params = default_classes(0.0005);
    let cat = generate_catalog(&params, 1).unwrap();
    assert_eq!(Catalog::from_csv(&cat.to_csv()).unwrap(), cat);
    let t = generate_requests(&cat, &params, 4, 6, 1).unwrap();
    let back = Trace::from_csv(&t.to_csv()).unwrap();
    assert_eq!(back.receivers, t.receivers);
    assert!(Trace::from_csv("receiver_id,seq_no,object_id\n0,1,a\n").is_err());
    assert!(Catalog::from_csv("wrong header\n").is_err());
}
