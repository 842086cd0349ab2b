//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line. Run with `cargo test -p workgraph-core --test acceptance --
//! --nocapture` to see the lines.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use workgraph_core::aggregate::{percentages, tally, Assignment};
use workgraph_core::agreement::{
    bootstrap_ci, mean_wup, percentile_interval, weighted_kappa, wup, AnnotationSet, MeanWupMode,
};
use workgraph_core::classify::{batch_classify, detect_hallucination, Strategy};
use workgraph_core::currency::Currency;
use workgraph_core::ingest::{load_snapshot, save_snapshot, RobotSubclass};
use workgraph_core::market::{combine, compute_segment, MarketConfig};
use workgraph_core::ontology::{
    ActivityNode, ActivitySnapshot, Direction, NodeId, NodeKind, SpecializationEdge,
};
use workgraph_core::search::HashEmbedder;
use workgraph_core::synth;
use workgraph_core::viz::{build_sunburst, emit_svg, AngularWeighting};

/// Evaluate a criterion's sub-checks, print one PASS/FAIL line, and
/// fail the test afterwards if anything broke.
fn criterion(name: &str, checks: Vec<(String, bool)>) {
    let failed: Vec<&(String, bool)> = checks.iter().filter(|(_, ok)| !ok).collect();
    if failed.is_empty() {
        println!("acceptance {name}: PASS");
    } else {
        let details: Vec<&str> = failed.iter().map(|(what, _)| what.as_str()).collect();
        println!("acceptance {name}: FAIL ({})", details.join("; "));
    }
    assert!(
        failed.is_empty(),
        "criterion {name} failed: {:?}",
        failed.iter().map(|(what, _)| what).collect::<Vec<_>>()
    );
}

fn within(value: f64, target: f64, tolerance: f64) -> bool {
    (value - target).abs() <= tolerance
}

#[test]
fn criterion_01_medical_robots_golden_table() {
    let start = Instant::now();
    let subclass = |name: &str, units: u64, low: i64, high: i64| RobotSubclass {
        name: name.into(),
        units,
        price_low: Currency::from_major(low),
        price_high: Currency::from_major(high),
        segments: vec!["Medical".into()],
        ontology_node: name.into(),
    };
    let diagnostics = subclass("Diagnostics", 3293, 100_000, 150_000);
    let surgical = subclass("Surgical", 6612, 600_000, 2_500_000);
    let rehab = subclass("Rehab", 5759, 69_000, 120_000);
    let other = subclass("Other", 995, 100_000, 150_000);

    let revenue = Currency::from_major(13_200_000_000);
    let members: Vec<(&RobotSubclass, f64)> = vec![
        (&diagnostics, 3293.0),
        (&surgical, 6612.0),
        (&rehab, 5759.0),
        (&other, 995.0),
    ];
    let segment = compute_segment("Medical", revenue, &members).unwrap();
    let row = |name: &str| segment.rows.iter().find(|r| r.subclass == name).unwrap();

    let billion = 1e9;
    let mut checks = vec![
        (
            format!("relative Diagnostics {:.4} vs 1.32", row("Diagnostics").relative_price),
            within(row("Diagnostics").relative_price, 1.32, 0.01),
        ),
        (
            format!("relative Surgical {:.4} vs 16.40", row("Surgical").relative_price),
            within(row("Surgical").relative_price, 16.40, 0.01),
        ),
        (
            format!("relative Rehab {:.4} vs 1.00", row("Rehab").relative_price),
            within(row("Rehab").relative_price, 1.00, 0.01),
        ),
        (
            format!("relative Other {:.4} vs 1.32", row("Other").relative_price),
            within(row("Other").relative_price, 1.32, 0.01),
        ),
        (
            format!("x {:.1} vs 110100 (±1%)", segment.adjustment_factor),
            within(segment.adjustment_factor, 110_100.0, 1_101.0),
        ),
    ];
    // Note on the Other row: the golden table's 0.2B is the residual of
    // its own rounded column (13.2 − 0.5 − 11.9 − 0.6); the stated
    // formula x·P′·U gives ≈ 0.145B for 995 units at relative price
    // 1.3228, which misses the ±0.05B band. The check is asserted as
    // published and is expected to stay red.
    for (name, target) in [
        ("Diagnostics", 0.5),
        ("Surgical", 11.9),
        ("Rehab", 0.6),
        ("Other", 0.2),
    ] {
        let got = row(name).revenue.as_major_f64() / billion;
        checks.push((
            format!("revenue {name} {got:.4}B vs {target}B (±0.05B)"),
            within(got, target, 0.05),
        ));
    }
    let total = segment.total_row_revenue().as_major_f64();
    checks.push((
        format!("total {:.4}B vs 13.2B (±0.1%)", total / billion),
        within(total, 13.2 * billion, 0.001 * 13.2 * billion),
    ));
    checks.push((
        format!("runtime {:?} < 1s", start.elapsed()),
        start.elapsed() < Duration::from_secs(1),
    ));
    criterion("1 (medical robots golden table)", checks);
}

#[test]
fn criterion_02_market_split() {
    let config = MarketConfig::default();
    let snapshot = ActivitySnapshot::new(
        "t",
        "act",
        vec![ActivityNode::new("act", "Act", NodeKind::Generic)],
        vec![],
    );
    let software =
        std::collections::BTreeMap::from([("Act".to_string(), config.software_market())]);
    let robot =
        std::collections::BTreeMap::from([("Act".to_string(), config.robotics_market)]);
    let view = combine(&snapshot, &software, &robot, &config).unwrap();
    criterion(
        "2 (market split)",
        vec![
            (
                format!("software market {} vs 140.29B exactly", config.software_market()),
                config.software_market() == Currency::from_minor(14_029_000_000_000),
            ),
            (
                format!("rounded split {:?} vs (75, 25)", view.rounded_split()),
                view.rounded_split() == (75, 25),
            ),
        ],
    );
}

#[test]
fn criterion_03_aggregation_oracle_equivalence() {
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    for seed in 0..200u64 {
        let dag = synth::random_dag(seed, 60, 0.35);
        let items = 1 + (seed as usize * 7) % 200;
        let assignments = synth::random_assignments(&dag, items, seed ^ 0xabcd);
        let tallies = tally(&dag, &assignments).unwrap();

        // Brute-force oracle: per item, union of ancestor cones.
        let mut oracle: std::collections::HashMap<NodeId, f64> = Default::default();
        let mut per_item: std::collections::HashMap<&str, (f64, HashSet<NodeId>)> =
            Default::default();
        for a in &assignments {
            let entry = per_item.entry(a.item.as_str()).or_default();
            entry.0 += a.weight;
            entry.1.insert(a.node.clone());
            entry
                .1
                .extend(dag.closure(&a.node, Direction::Ancestors).unwrap());
        }
        for (_, (weight, cone)) in per_item {
            for node in cone {
                *oracle.entry(node).or_insert(0.0) += weight;
            }
        }
        for node in dag.nodes() {
            let got = tallies.get(&node.id).aggregated;
            let expected = oracle.get(&node.id).copied().unwrap_or(0.0);
            worst = worst.max((got - expected).abs());
        }
        let total: f64 = assignments.iter().map(|a| a.weight).sum();
        worst = worst.max((tallies.get(dag.root()).aggregated - total).abs());
    }
    checks.push((format!("max |tally − oracle| = {worst:.2e}"), worst < 1e-9));
    checks.push((
        format!("runtime {:?} < 30s", start.elapsed()),
        start.elapsed() < Duration::from_secs(30),
    ));
    criterion("3 (aggregation oracle equivalence, 200 random DAGs)", checks);
}

#[test]
fn criterion_04_double_count_demonstration() {
    let diamond = synth::diamond();
    let tallies = tally(&diamond, &[Assignment::unit("x", "d")]).unwrap();
    let shares = percentages(&tallies, tallies.get(diamond.root()).aggregated).unwrap();
    let ring = shares[&NodeId::new("b")] + shares[&NodeId::new("c")];
    criterion(
        "4 (double-count demonstration)",
        vec![
            (format!("child ring sums to {:.0}%", ring * 100.0), ring == 2.0),
            (
                format!("root reports {:.0}%", shares[&NodeId::new("act")] * 100.0),
                shares[&NodeId::new("act")] == 1.0,
            ),
        ],
    );
}

#[test]
fn criterion_05_wu_palmer_properties() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut checks = Vec::new();

    // Hand examples at 1e-12.
    let g = |id: &str, t: &str| ActivityNode::new(id, t, NodeKind::Generic);
    let chain = ActivitySnapshot::new(
        "t",
        "act",
        vec![g("act", "Act"), g("a", "A"), g("b", "B")],
        vec![SpecializationEdge::new("act", "a"), SpecializationEdge::new("a", "b")],
    );
    let identity = wup(&chain, &"b".into(), &"b".into()).unwrap().s;
    let parent_child = wup(&chain, &"a".into(), &"b".into()).unwrap().s;
    let siblings = ActivitySnapshot::new(
        "t",
        "act",
        vec![g("act", "Act"), g("a", "A"), g("b", "B"), g("c", "C")],
        vec![
            SpecializationEdge::new("act", "a"),
            SpecializationEdge::new("a", "b"),
            SpecializationEdge::new("a", "c"),
        ],
    );
    let sibling_pair = wup(&siblings, &"b".into(), &"c".into()).unwrap().s;
    checks.push((format!("wup(x,x) = {identity}"), (identity - 1.0).abs() < 1e-12));
    checks.push((
        format!("chain wup = {parent_child}"),
        (parent_child - 0.8).abs() < 1e-12,
    ));
    checks.push((
        format!("sibling wup = {sibling_pair}"),
        (sibling_pair - 2.0 / 3.0).abs() < 1e-12,
    ));

    // Symmetry and identity on random structures.
    let mut symmetry_ok = true;
    let mut identity_ok = true;
    for seed in 0..10u64 {
        let dag = synth::random_dag(seed, 40, 0.3);
        let ids: Vec<NodeId> = dag.nodes().map(|n| n.id.clone()).collect();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed + 500);
        for _ in 0..50 {
            let a = &ids[rng.random_range(0..ids.len())];
            let b = &ids[rng.random_range(0..ids.len())];
            let ab = wup(&dag, a, b).unwrap().s;
            let ba = wup(&dag, b, a).unwrap().s;
            symmetry_ok &= ab == ba;
            identity_ok &= (a == b) == (ab == 1.0);
        }
    }
    checks.push(("symmetry on random pairs".to_string(), symmetry_ok));
    checks.push(("s = 1 iff identical".to_string(), identity_ok));

    // Tree oracle: 500 random pairs per tree over trees up to 50 nodes.
    let mut oracle_ok = true;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(909);
    for seed in 0..5u64 {
        let tree = synth::random_tree(seed, 50);
        let ids: Vec<NodeId> = tree.nodes().map(|n| n.id.clone()).collect();
        for _ in 0..500 {
            let a = &ids[rng.random_range(0..ids.len())];
            let b = &ids[rng.random_range(0..ids.len())];
            let got = wup(&tree, a, b).unwrap().s;
            // On a tree the winning ancestor is the deepest common one.
            let ancestors_a: HashSet<NodeId> = {
                let mut s: HashSet<NodeId> =
                    tree.closure(a, Direction::Ancestors).unwrap().into_iter().collect();
                s.insert(a.clone());
                s
            };
            let mut expected: f64 = 0.0;
            let da = tree.depth(a).unwrap() as f64;
            let db = tree.depth(b).unwrap() as f64;
            let mut cone_b: Vec<NodeId> =
                tree.closure(b, Direction::Ancestors).unwrap().into_iter().collect();
            cone_b.push(b.clone());
            for c in cone_b {
                if ancestors_a.contains(&c) {
                    expected =
                        expected.max(2.0 * tree.depth(&c).unwrap() as f64 / (da + db));
                }
            }
            oracle_ok &= (got - expected).abs() < 1e-12;
        }
    }
    checks.push(("tree-oracle equality (500 pairs × 5 trees)".to_string(), oracle_ok));
    criterion("5 (Wu-Palmer properties)", checks);
}

#[test]
fn criterion_06_weighted_kappa_and_bootstrap() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut checks = Vec::new();
    let g = |id: &str, t: &str| ActivityNode::new(id, t, NodeKind::Generic);

    // Perfect agreement.
    let chain = ActivitySnapshot::new(
        "t",
        "act",
        vec![g("act", "Act"), g("a", "A"), g("b", "B")],
        vec![SpecializationEdge::new("act", "a"), SpecializationEdge::new("a", "b")],
    );
    let one = AnnotationSet::with_items("x", [("i1", "b"), ("i2", "a")]);
    let kappa_perfect = weighted_kappa(&chain, &one, &one.clone()).unwrap();
    checks.push((format!("perfect agreement κ = {kappa_perfect}"), kappa_perfect == 1.0));

    // Hand-constructed κ = 0.
    let two_labels = ActivitySnapshot::new(
        "t",
        "act",
        vec![g("act", "Act"), g("l1", "L1"), g("l2", "L2")],
        vec![SpecializationEdge::new("act", "l1"), SpecializationEdge::new("act", "l2")],
    );
    let a = AnnotationSet::with_items("a", [("i1", "l1"), ("i2", "l2")]);
    let b = AnnotationSet::with_items("b", [("i1", "l1"), ("i2", "l1")]);
    let kappa_zero = weighted_kappa(&two_labels, &a, &b).unwrap();
    checks.push((format!("hand case κ = {kappa_zero}"), kappa_zero == 0.0));

    // Independent uniform annotations over 500 items, small label set.
    let mut nodes = vec![g("act", "Act")];
    let mut edges = Vec::new();
    for i in 0..4 {
        nodes.push(g(&format!("l{i}"), &format!("L{i}")));
        edges.push(SpecializationEdge::new("act", format!("l{i}")));
    }
    let labels = ActivitySnapshot::new("t", "act", nodes, edges);
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(31);
    let mut draw = |name: &str| {
        AnnotationSet::with_items(
            name,
            (0..500).map(|i| {
                (format!("i{i}"), format!("l{}", rng.random_range(0..4)))
            }),
        )
    };
    let ra = draw("ra");
    let rb = draw("rb");
    let kappa_random = weighted_kappa(&labels, &ra, &rb).unwrap();
    checks.push((
        format!("independent uniform |κ| = {:.4} < 0.05", kappa_random.abs()),
        kappa_random.abs() < 0.05,
    ));

    // Bootstrap reproducibility and nearest-rank order statistics.
    let metric = |sets: &[AnnotationSet]| {
        mean_wup(&labels, sets, MeanWupMode::PairwiseAll).map(|m| m.mean)
    };
    let sets = vec![ra.clone(), rb.clone()];
    let ci1 = bootstrap_ci(metric, &sets, 1000, 0.95, 7).unwrap();
    let ci2 = bootstrap_ci(metric, &sets, 1000, 0.95, 7).unwrap();
    checks.push((
        format!("bootstrap bit-reproducible [{:.6}, {:.6}]", ci1.low, ci1.high),
        ci1 == ci2,
    ));
    let ranks: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
    let bounds = percentile_interval(&ranks, 0.95);
    checks.push((
        format!("nearest-rank bounds {bounds:?} = (25, 976)"),
        bounds == (25.0, 976.0),
    ));
    criterion("6 (weighted kappa and bootstrap)", checks);
}

#[test]
fn criterion_07_classification_determinism_and_hallucinations() {
    let mut checks = Vec::new();
    let snapshot = synth::layered_snapshot(400, 70);
    let records = synth::app_records(100, 71);
    let model = synth::scripted_replies(&snapshot, &records, 72);
    let embedder = HashEmbedder::default();

    let serial =
        batch_classify(&snapshot, &records, Strategy::Spfo, &model, &embedder, None, 1).unwrap();
    let parallel =
        batch_classify(&snapshot, &records, Strategy::Spfo, &model, &embedder, None, 8).unwrap();
    let bytes_serial = serde_json::to_vec(&serial.results).unwrap();
    let bytes_parallel = serde_json::to_vec(&parallel.results).unwrap();
    checks.push((
        "parallelism 1 vs 8 byte-identical on 100 records".to_string(),
        bytes_serial == bytes_parallel,
    ));

    // Exact-title hallucination over case and whitespace near-misses.
    let g = ActivityNode::new("act", "Act", NodeKind::Generic);
    let mk = |id: &str, t: &str| ActivityNode::new(id, t, NodeKind::Atomic);
    let s = ActivitySnapshot::new(
        "t",
        "act",
        vec![
            g,
            mk("am", "Analyze Market"),
            mk("wr", "Write report"),
            mk("ws", "Weld metal "),
        ],
        vec![
            SpecializationEdge::new("act", "am"),
            SpecializationEdge::new("act", "wr"),
            SpecializationEdge::new("act", "ws"),
        ],
    );
    let cases: [(&str, bool); 20] = [
        ("Analyze Market", false),
        ("Write report", false),
        ("Weld metal ", false),
        ("Act", false),
        ("analyze market", true),
        ("ANALYZE MARKET", true),
        ("Analyze  Market", true),
        (" Analyze Market", true),
        ("Analyze Market ", true),
        ("Analyze Markets", true),
        ("AnalyzeMarket", true),
        ("Write Report", true),
        ("write report", true),
        ("Write report ", true),
        ("Weld metal", true),
        ("weld metal ", true),
        ("", true),
        ("act", true),
        ("Act ", true),
        ("Analyze\tMarket", true),
    ];
    let mut table_ok = true;
    for (title, expected) in cases {
        let got = detect_hallucination(&s, title);
        if got != expected {
            table_ok = false;
            checks.push((format!("hallucination({title:?}) = {got}, want {expected}"), false));
        }
    }
    checks.push(("20-case hallucination table".to_string(), table_ok));
    criterion("7 (classification determinism and hallucination)", checks);
}

#[test]
fn criterion_08_snapshot_round_trip_at_scale() {
    let mut checks = Vec::new();
    let snapshot = synth::layered_snapshot(40_000, 80);
    checks.push((
        format!("synthetic snapshot has {} nodes (≥ 40000)", snapshot.len()),
        snapshot.len() >= 40_000,
    ));
    let report = snapshot.validate();
    checks.push((format!("validate: {report}"), report.is_clean()));

    let bytes = save_snapshot(&snapshot);
    let loaded = load_snapshot(&bytes).unwrap();
    checks.push(("load(save(s)) = s at value level".to_string(), loaded == snapshot));
    let bytes_again = save_snapshot(&loaded);
    checks.push(("save(load(save(s))) byte-stable".to_string(), bytes_again == bytes));

    // Constructed path-length extremes: chains of 6 and 14 nodes.
    let mut nodes = vec![ActivityNode::new("act", "Act", NodeKind::Generic)];
    let mut edges = Vec::new();
    for (prefix, len) in [("s", 6usize), ("l", 14usize)] {
        let mut prev = "act".to_string();
        for i in 1..len {
            let id = format!("{prefix}{i}");
            nodes.push(ActivityNode::new(id.clone(), id.to_uppercase(), NodeKind::Generic));
            edges.push(SpecializationEdge::new(prev.clone(), id.clone()));
            prev = id;
        }
    }
    let two_chains = ActivitySnapshot::new("t", "act", nodes, edges);
    let stats = two_chains.stats();
    checks.push((
        format!(
            "constructed chains: min {} max {} (want 6/14)",
            stats.min_path_len, stats.max_path_len
        ),
        stats.min_path_len == 6 && stats.max_path_len == 14,
    ));
    criterion("8 (snapshot round-trip at 40k nodes)", checks);
}

#[test]
fn criterion_09_sunburst_determinism_and_conservation() {
    let mut checks = Vec::new();
    let diamond = synth::diamond();
    let tallies = tally(&diamond, &[Assignment::unit("x", "d")]).unwrap();
    let model =
        build_sunburst(&diamond, &tallies, 5, 1.0, AngularWeighting::DescendantActivities)
            .unwrap();
    let svg1 = emit_svg(&model);
    let svg2 = emit_svg(&model);
    checks.push(("emit_svg twice is byte-identical".to_string(), svg1 == svg2));

    let mut conservation_ok = true;
    for (i, parent) in model.arcs.iter().enumerate() {
        let child_span: f64 = model
            .arcs
            .iter()
            .filter(|a| a.parent == Some(i))
            .map(|a| a.span_deg())
            .sum();
        if child_span > 0.0 && (child_span - parent.span_deg()).abs() > 1e-6 {
            conservation_ok = false;
        }
    }
    checks.push(("children sum to parents within 1e-6°".to_string(), conservation_ok));

    let dashed = model.arcs.iter().filter(|a| a.dashed).count();
    checks.push((format!("{dashed} dashed arcs (want exactly 2)"), dashed == 2));
    criterion("9 (sunburst determinism and conservation)", checks);
}

#[test]
fn criterion_10_scale_smoke_test() {
    let start = Instant::now();
    let snapshot = synth::layered_snapshot(40_000, 90);
    let records = synth::app_records(13_000, 91);
    let model = synth::scripted_replies(&snapshot, &records, 92);
    let embedder = HashEmbedder::default();

    let outcome =
        batch_classify(&snapshot, &records, Strategy::Spfo, &model, &embedder, None, 8).unwrap();
    let assignments: Vec<Assignment> = outcome
        .results
        .iter()
        .filter(|r| !r.hallucinated)
        .map(|r| Assignment::unit(r.record.clone(), r.node_id.clone().unwrap()))
        .collect();
    let tallies = tally(&snapshot, &assignments).unwrap();
    let sunburst =
        build_sunburst(&snapshot, &tallies, 5, 0.2, AngularWeighting::DescendantActivities)
            .unwrap();
    let svg = emit_svg(&sunburst);
    let elapsed = start.elapsed();

    criterion(
        "10 (scale smoke test)",
        vec![
            (
                format!("classified {}/13000", outcome.results.len()),
                outcome.results.len() == 13_000,
            ),
            (
                format!("root aggregate {}", tallies.get(snapshot.root()).aggregated),
                tallies.get(snapshot.root()).aggregated == 13_000.0,
            ),
            (format!("svg bytes {}", svg.len()), !svg.is_empty()),
            (
                format!("elapsed {elapsed:?} < 60s"),
                elapsed < Duration::from_secs(60),
            ),
        ],
    );
}
