//! Acceptance gate: eleven end-to-end criteria, one line of output each.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linset::construct::{build_scene, sample_params};
use linset::field::{Fe, FieldTower};
use linset::linalg::{enumerate_subspaces, gaussian_binomial, FqSubspace};
use linset::linearity::{algebraic_max_field, divisors, point_mask, Catalog};
use linset::linset::build_linear_set;
use linset::projection::{check_pi_line_bounds, ProjectionScene};
use linset::verify::{run_suite, SuiteConfig};

fn pass(n: u32, name: &str, start: Instant, limit: Duration) {
    let took = start.elapsed();
    assert!(took < limit, "criterion {n} ({name}): took {took:?}, limit {limit:?}");
    println!("criterion {n} ({name}): pass in {:.2}s", took.as_secs_f64());
}

#[test]
fn criterion_01_orbit_sizes() {
    let start = Instant::now();
    let rep = run_suite("orbits", &SuiteConfig::default()).unwrap();
    assert!(rep.pass, "{:?}", rep.violations);
    assert_eq!(rep.visited, 2 + 6 + 14 + 6 + 24 + 78);
    pass(1, "orbit sizes", start, Duration::from_secs(1));
}

#[test]
fn criterion_02_coset_counts() {
    let start = Instant::now();
    // recomputed directly from orbit sizes over the same grid
    for q in [2u32, 3] {
        for h in [2u32, 3, 4] {
            let tw = FieldTower::new(q, 1, h, None).unwrap();
            for a in 0..tw.order() as u32 {
                if tw.in_ground_field(Fe(a)) {
                    continue;
                }
                let orbit = linset::projection::type_orbit(&tw, Fe(a)).unwrap();
                let cosets = orbit.len() as u64 / (tw.q() - 1);
                let expected = if tw.degree_over_q(Fe(a)) == 2 { tw.q() } else { tw.q() * tw.q() + tw.q() };
                assert_eq!(cosets, expected, "q={q} h={h} alpha={a}");
            }
        }
    }
    pass(2, "coset counts", start, Duration::from_secs(1));
}

#[test]
fn criterion_03_vector_count_identity() {
    let start = Instant::now();
    let rep = run_suite("weights", &SuiteConfig::default()).unwrap();
    assert!(rep.pass, "{:?}", rep.violations);
    // 10^4 random at h=6 on top of the exhaustive h=4 corpus
    let exhaustive: u64 = (1..=4).map(|k| gaussian_binomial(2, 8, k) as u64).sum();
    assert_eq!(rep.visited, exhaustive + 10_000);
    pass(3, "vector-count identity", start, Duration::from_secs(30));
}

#[test]
fn criterion_04_weight_path_equivalence() {
    let start = Instant::now();
    // both weight routes on a fresh corpus, compared point by point
    let tw = FieldTower::new(2, 1, 6, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..2_000 {
        let k = rng.gen_range(1..=6);
        let rows: Vec<Vec<u8>> = (0..k).map(|_| (0..12).map(|_| rng.gen_range(0..2)).collect()).collect();
        let u = FqSubspace::from_flat_rows(&tw, 12, rows);
        let ls = build_linear_set(&tw, &u).unwrap();
        for p in ls.points.keys() {
            let by_reduction = linset::linset::field_reduction_weight(&tw, &u, p).unwrap();
            assert_eq!(ls.weight_of(p), Some(by_reduction));
        }
    }
    pass(4, "weight-path equivalence", start, Duration::from_secs(30));
}

#[test]
fn criterion_05_full_rank_linearity_collapse() {
    let start = Instant::now();
    // every rank-4 subspace of F_2^8: algebraic max = min weight = geometric max
    let tw = FieldTower::new(2, 1, 4, None).unwrap();
    let catalogs: Vec<(u32, Catalog)> = divisors(4)
        .into_iter()
        .filter(|&s| s > 1)
        .map(|s| (s, Catalog::build(&tw, s).unwrap()))
        .collect();
    let mut n = 0u128;
    enumerate_subspaces(&tw, 8, 4, None, |u| {
        n += 1;
        let ls = build_linear_set(&tw, u).unwrap();
        let amax = algebraic_max_field(&tw, u).unwrap();
        let mask = point_mask(&tw, &ls).unwrap();
        let gmax = catalogs
            .iter()
            .rev()
            .find(|(_, cat)| cat.lookup(mask).is_some())
            .map(|(s, _)| *s)
            .unwrap_or(1);
        assert_eq!(amax, ls.min_weight(), "subspace #{n}");
        assert_eq!(amax, gmax, "subspace #{n}");
    })
    .unwrap();
    assert_eq!(n, 200_787);
    pass(5, "full-rank linearity collapse", start, Duration::from_secs(300));
}

#[test]
fn criterion_06_construction_oracle_equivalence() {
    let start = Instant::now();
    let rep = run_suite("construction", &SuiteConfig::default()).unwrap();
    assert!(rep.pass, "{:?}", rep.violations);
    // grid: h=4 has (s=2,r=1); h=6 has (s=2,r=1), (s=2,r=2), (s=3,r=1); 5 trials each
    assert_eq!(rep.visited, 4 * 5);
    pass(6, "construction oracle equivalence", start, Duration::from_secs(120));
}

#[test]
fn criterion_07_all_weight_two_sets_are_sublines() {
    let start = Instant::now();
    let tw = FieldTower::new(2, 1, 4, None).unwrap();
    let catalog = Catalog::build(&tw, 2).unwrap();
    let mut seen = 0u64;
    enumerate_subspaces(&tw, 8, 4, None, |u| {
        let ls = build_linear_set(&tw, u).unwrap();
        if ls.min_weight() == 2 && ls.max_weight() == 2 {
            seen += 1;
            assert_eq!(ls.size(), 5);
            let rep = catalog.lookup(point_mask(&tw, &ls).unwrap()).expect("not a subline");
            // the minimal representative is an F_4-line: F_4-rank 2
            assert_eq!(rep.len(), 2);
        }
    })
    .unwrap();
    assert!(seen > 0);
    pass(7, "all-weight-2 sets are sublines", start, Duration::from_secs(300));
}

#[test]
fn criterion_08_main_theorem_exhaustive() {
    let start = Instant::now();
    let rep = run_suite("main-theorem", &SuiteConfig::default()).unwrap();
    assert!(rep.pass, "{:?}", rep.violations);
    assert_eq!(rep.visited, 1395 * 41664);
    let witnesses = rep.witnesses_histogram.get("witness s=3").copied().unwrap_or(0);
    assert!(witnesses > 0, "no qualifying sets found");
    assert_eq!(rep.witnesses_histogram.get("s>=w").copied(), Some(witnesses));
    pass(8, "main theorem q=2 h=6 k=5 w=2", start, Duration::from_secs(600));
}

#[test]
fn criterion_09_lower_bound() {
    let start = Instant::now();
    let rep = run_suite("lower-bound", &SuiteConfig::default()).unwrap();
    assert!(rep.pass, "{:?}", rep.violations);
    let expected: u64 = [2usize, 3, 4].iter().map(|&k| gaussian_binomial(2, 8, k) as u64).sum();
    assert_eq!(rep.visited, expected);
    assert!(rep.witnesses_histogram.keys().any(|k| k.contains("club attains")));
    pass(9, "lower bound with weight-1 point", start, Duration::from_secs(300));
}

#[test]
fn criterion_10_direction_trichotomy() {
    let start = Instant::now();
    let rep = run_suite("trichotomy", &SuiteConfig::default()).unwrap();
    assert!(rep.pass, "{:?}", rep.violations);
    assert_eq!(rep.visited, 1 << 16);
    let cases: u64 = ["r=1", "subfield", "r=q0"]
        .iter()
        .filter_map(|c| rep.witnesses_histogram.get(*c))
        .sum();
    assert_eq!(cases, 1 << 16, "every map in exactly one case");
    pass(10, "direction trichotomy 2^16 maps", start, Duration::from_secs(120));
}

#[test]
fn criterion_11_pi_line_bounds() {
    let start = Instant::now();
    // every Construction scene at h <= 6
    for h in [4u32, 6] {
        let tw = FieldTower::new(2, 1, h, None).unwrap();
        for s in (2..=h).filter(|s| h % s == 0) {
            for r in 1.. {
                if r * s as usize + 2 > h as usize {
                    break;
                }
                for seed in 0..3u64 {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let p = sample_params(&tw, s, r, &mut rng).unwrap();
                    let scene = build_scene(&tw, &p).unwrap();
                    let rep = check_pi_line_bounds(&tw, &scene).unwrap();
                    assert!(rep.violations.is_empty(), "h={h} s={s} r={r}: {:?}", rep.violations);
                }
            }
        }
    }
    // 100 random valid scenes at k=4, h=4
    let tw = FieldTower::new(2, 1, 4, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut built = 0;
    while built < 100 {
        let rand_rows = |rng: &mut ChaCha8Rng| -> Vec<Vec<Fe>> {
            (0..2)
                .map(|_| (0..4).map(|_| Fe(rng.gen_range(0..16))).collect())
                .collect()
        };
        let pi = rand_rows(&mut rng);
        let omega = rand_rows(&mut rng);
        if let Ok(scene) = ProjectionScene::new(&tw, 4, pi, omega) {
            built += 1;
            let rep = check_pi_line_bounds(&tw, &scene).unwrap();
            assert!(rep.violations.is_empty(), "random scene {built}: {:?}", rep.violations);
        }
    }
    pass(11, "pi-line bounds", start, Duration::from_secs(300));
}
