use capacity_lab::config::RunConfig;
use capacity_lab::cauchy::decade_grid;
use capacity_lab::curvature::{c2_exact, c2_truncated};
use capacity_lab::generators::{bead_chain_on_line, Family, FamilySpec, PartShape, StagedOptions};
use capacity_lab::geometry::{lambda_separated, Point};
use capacity_lab::verifier::{
    almost_additivity_check, cauchy_independence_check, mainc_check, marcinkiewicz_sums, AlmostAdditivityParams,
    CauchyIndependenceParams, MaincParams,
};
use proptest::prelude::*;

fn specs() -> Vec<FamilySpec> {
    vec![
        FamilySpec::Segment { length: 2.0, atoms: 9 },
        FamilySpec::Circle { radius: 0.5, atoms: 12 },
        FamilySpec::TwoSegments { length: 1.0, gap: 0.3, atoms: 6 },
        FamilySpec::CantorCorner { n: 2 },
        FamilySpec::CantorQuarters { n: 2 },
        FamilySpec::BeadChain { n: 6, radius_lo: 0.2, radius_hi: 3.0, lambda: 1.5, shape: PartShape::PointCloud, atoms: 5 },
        FamilySpec::StagedSquares { nk: vec![0, 1, 3], include_initial: true, options: None },
        FamilySpec::StagedSquaresWithDiscs { nk: vec![0, 1, 2], options: Some(StagedOptions::default()) },
        FamilySpec::Grid { ell: 1.0, n: 4, atoms_per_circle: 6 },
    ]
}

#[test]
fn manifests_are_byte_stable() {
    for spec in specs() {
        let a = serde_json::to_string(&spec.build(17).unwrap()).unwrap();
        let b = serde_json::to_string(&spec.build(17).unwrap()).unwrap();
        assert_eq!(a, b, "{spec:?}");
        let back: Family = serde_json::from_str(&a).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), a);
    }
}

#[test]
fn separated_families_pass_their_lambda() {
    for spec in specs() {
        let f = spec.build(5).unwrap();
        if let Some(l) = f.lambda {
            assert!(lambda_separated(&f.discs, l), "{spec:?}");
        }
    }
}

#[test]
fn mainc_on_staged_squares_with_initial_square() {
    let p = MaincParams {
        family: FamilySpec::StagedSquares { nk: vec![0, 1, 2], include_initial: true, options: None },
        max_centers: 60,
        per_decade: 3,
        iterations: 0,
    };
    let r = mainc_check(&p, 1).unwrap();
    assert!(r.passed(), "{:?}", r.bands);
    assert!(r.summary["c0_fitted"].is_finite());
}

#[test]
fn independence_ratio_grows_with_stage_gaps() {
    let ratio = |nk: Vec<u32>| {
        let p = CauchyIndependenceParams {
            family: FamilySpec::StagedSquares { nk, include_initial: false, options: None },
            eps: None,
        };
        let r = cauchy_independence_check(&p, 2).unwrap();
        assert!(r.passed());
        r.summary["independence_ratio"]
    };
    let shallow = ratio(vec![0, 1]);
    let deep = ratio(vec![0, 1, 3]);
    assert!(deep > shallow, "{shallow} {deep}");
}

#[test]
fn almost_additivity_ratios_are_positive() {
    let p = AlmostAdditivityParams { n: 8, iterations: 5, ..Default::default() };
    let r = almost_additivity_check(&p, 4).unwrap();
    assert!(r.passed(), "{:?}", r.bands);
    assert_eq!(r.bands.iter().filter(|b| !b.asserted).count(), p.exploratory_lambdas.len());
}

#[test]
fn truncation_grid_is_monotone_on_a_chain() {
    let chain = bead_chain_on_line(&[1.0, 0.4, 2.0, 0.7], 2.0, PartShape::CircleArc, 10, 3).unwrap();
    let mu = chain.measure().unwrap();
    let full = c2_exact(&mu).unwrap().value;
    let mut prev = full;
    for eps in decade_grid(&mu) {
        let v = c2_truncated(&mu, eps).unwrap().value;
        assert!(v <= prev);
        prev = v;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chains_are_separated(
        radii in proptest::collection::vec(0.05f64..5.0, 1..20),
        lambda in 1.01f64..5.0,
        seed in any::<u64>(),
    ) {
        let c = bead_chain_on_line(&radii, lambda, PartShape::PointCloud, 3, seed).unwrap();
        prop_assert!(lambda_separated(&c.discs, lambda));
        for (d, p) in c.discs.iter().zip(&c.parts) {
            prop_assert!(p.points().iter().all(|q| d.contains(*q)));
        }
    }

    #[test]
    fn marcinkiewicz_bound_holds(
        pairs in proptest::collection::vec((0.1f64..10.0, 0.0f64..=1.0), 2..60),
    ) {
        let radii: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let masses: Vec<f64> = pairs.iter().map(|p| p.0 * p.1).collect();
        let (s1, s2) = marcinkiewicz_sums(&radii, &masses).unwrap();
        let total: f64 = masses.iter().sum();
        prop_assert!(s1 <= total * (1.0 + 1e-12));
        prop_assert!(s2 <= total * (1.0 + 1e-12));
    }

    #[test]
    fn chain_curvature_is_motion_invariant(
        seed in 0u64..1000,
        theta in 0.0f64..6.2,
        dx in -10.0f64..10.0,
    ) {
        let c = bead_chain_on_line(&[1.0, 0.5, 1.5], 1.5, PartShape::CircleArc, 6, seed).unwrap();
        let mu = c.measure().unwrap();
        let moved = mu.rotate(theta).translate(Point::new(dx, -dx / 2.0));
        let a = c2_exact(&mu).unwrap().value;
        let b = c2_exact(&moved).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9 * a);
    }
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut names = std::collections::BTreeSet::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = RunConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        names.insert(cfg.experiment.name());
    }
    assert_eq!(names.len(), capacity_lab::verifier::EXPERIMENTS.len());
}
