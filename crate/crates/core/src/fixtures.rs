//! Deterministic example systems shared by tests, benchmarks and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gmpe::{Component, Point, SeismicModel};
use crate::netgraph::{Network, TerminalSpec};

/// Reference two-component system geometry: epicentral distances 3.46 km and
/// 9.28 km, inter-component distance 11.12 km, capacity median 0.98 g with
/// log-std 0.69. Terminals are perfect.
pub const REFERENCE_R1: f64 = 3.46;
pub const REFERENCE_R2: f64 = 9.28;
pub const REFERENCE_DELTA: f64 = 11.12;
pub const REFERENCE_CAPACITY_MEDIAN: f64 = 0.98;
pub const REFERENCE_CAPACITY_LOG_STD: f64 = 0.69;

fn reference_positions() -> (Point, Point) {
    // place component 1 on the x-axis and solve component 2 from the two
    // distance constraints
    let p1 = Point::new(REFERENCE_R1, 0.0);
    let x2 = (REFERENCE_R1 * REFERENCE_R1 + REFERENCE_R2 * REFERENCE_R2
        - REFERENCE_DELTA * REFERENCE_DELTA)
        / (2.0 * REFERENCE_R1);
    let y2 = (REFERENCE_R2 * REFERENCE_R2 - x2 * x2).sqrt();
    (p1, Point::new(x2, y2))
}

fn reference_components() -> Vec<Component> {
    let (p1, p2) = reference_positions();
    vec![
        Component::perfect("O", Point::new(0.0, -5.0)),
        Component::new(
            "1",
            p1,
            REFERENCE_CAPACITY_MEDIAN,
            REFERENCE_CAPACITY_LOG_STD,
        ),
        Component::new(
            "2",
            p2,
            REFERENCE_CAPACITY_MEDIAN,
            REFERENCE_CAPACITY_LOG_STD,
        ),
        Component::perfect("D", Point::new(0.0, 5.0)),
    ]
}

/// Two-component parallel system (either component alone keeps O and D
/// connected) at the reference geometry.
pub fn two_component_parallel() -> (Network, SeismicModel) {
    let net = Network::new(
        reference_components(),
        &[
            ("O".into(), "1".into()),
            ("O".into(), "2".into()),
            ("1".into(), "D".into()),
            ("2".into(), "D".into()),
        ],
    )
    .expect("fixture network is valid");
    (net, SeismicModel::new(Point::new(0.0, 0.0)))
}

/// Two-component series system (both components needed) at the reference
/// geometry.
pub fn two_component_series() -> (Network, SeismicModel) {
    let net = Network::new(
        reference_components(),
        &[
            ("O".into(), "1".into()),
            ("1".into(), "2".into()),
            ("2".into(), "D".into()),
        ],
    )
    .expect("fixture network is valid");
    (net, SeismicModel::new(Point::new(0.0, 0.0)))
}

/// Terminal spec for the two-component fixtures and for
/// [`synthetic_network`].
pub fn fixture_terminals() -> TerminalSpec {
    TerminalSpec::new(vec!["O".into()], vec!["D".into()])
}

/// Terminals of the synthetic network: two origin corners, two destination
/// corners.
pub fn synthetic_terminals() -> TerminalSpec {
    TerminalSpec::new(
        vec!["O1".into(), "O2".into()],
        vec!["D1".into(), "D2".into()],
    )
}

/// Seeded random geometric network: `n_components` random components in a
/// 50×50 km box around the epicenter plus four perfect corner terminals
/// (O1, O2 west; D1, D2 east). Each component links to its three nearest
/// peers, terminals to their two nearest components, and disconnected parts
/// are stitched through their closest cross pair, so the graph is always
/// connected when every node survives. Identical seeds yield identical
/// networks.
pub fn synthetic_network(n_components: usize, seed: u64) -> (Network, SeismicModel) {
    assert!(n_components >= 4, "too few components for a useful network");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = vec![
        Component::perfect("O1", Point::new(-28.0, -28.0)),
        Component::perfect("O2", Point::new(-28.0, 28.0)),
        Component::perfect("D1", Point::new(28.0, -28.0)),
        Component::perfect("D2", Point::new(28.0, 28.0)),
    ];
    for i in 0..n_components {
        let x = rng.gen::<f64>() * 50.0 - 25.0;
        let y = rng.gen::<f64>() * 50.0 - 25.0;
        nodes.push(Component::new(
            format!("c{i}"),
            Point::new(x, y),
            0.98,
            0.69,
        ));
    }

    let dist = |a: &Component, b: &Component| a.position.distance(&b.position);
    let mut edge_set: std::collections::BTreeSet<(usize, usize)> = Default::default();
    let add = |set: &mut std::collections::BTreeSet<(usize, usize)>, a: usize, b: usize| {
        if a != b {
            set.insert((a.min(b), a.max(b)));
        }
    };

    // component-to-component: 3 nearest neighbors
    for i in 4..nodes.len() {
        let mut order: Vec<usize> = (4..nodes.len()).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| dist(&nodes[i], &nodes[a]).total_cmp(&dist(&nodes[i], &nodes[b])));
        for &j in order.iter().take(3) {
            add(&mut edge_set, i, j);
        }
    }
    // terminals: 2 nearest components each
    for t in 0..4 {
        let mut order: Vec<usize> = (4..nodes.len()).collect();
        order.sort_by(|&a, &b| dist(&nodes[t], &nodes[a]).total_cmp(&dist(&nodes[t], &nodes[b])));
        for &j in order.iter().take(2) {
            add(&mut edge_set, t, j);
        }
    }
    // stitch disconnected parts through their closest cross pair
    loop {
        let comp = components(nodes.len(), &edge_set);
        let groups: std::collections::BTreeSet<usize> = comp.iter().copied().collect();
        if groups.len() <= 1 {
            break;
        }
        let first_group = comp[0];
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..nodes.len() {
            if comp[i] != first_group {
                continue;
            }
            for j in 0..nodes.len() {
                if comp[j] == first_group {
                    continue;
                }
                let d = dist(&nodes[i], &nodes[j]);
                if best.map_or(true, |(bd, _, _)| d < bd) {
                    best = Some((d, i, j));
                }
            }
        }
        let (_, i, j) = best.expect("two groups must have a cross pair");
        add(&mut edge_set, i, j);
    }

    let edges: Vec<(String, String)> = edge_set
        .iter()
        .map(|&(a, b)| (nodes[a].id.clone(), nodes[b].id.clone()))
        .collect();
    let net = Network::new(nodes, &edges).expect("synthetic network is valid");
    (net, SeismicModel::new(Point::new(0.0, 0.0)))
}

fn components(n: usize, edges: &std::collections::BTreeSet<(usize, usize)>) -> Vec<usize> {
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut Vec<usize>, x: usize) -> usize {
        if label[x] != x {
            let r = find(label, label[x]);
            label[x] = r;
        }
        label[x]
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut label, a), find(&mut label, b));
        label[ra] = rb;
    }
    (0..n).map(|i| find(&mut label, i)).collect()
}
