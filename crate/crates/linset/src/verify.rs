//! Verification suites: exhaustive and sampled checks of the library's
//! combinatorial identities, with machine-readable reports.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::{build_club, chi_subspace, sample_params, witness_subspace};
use crate::error::{Error, Result};
use crate::field::{Fe, FieldTower};
use crate::linalg::{enumerate_extensions, enumerate_subspaces, gaussian_binomial, FqSubspace, FqVector};
use crate::linearity::{algebraic_max_field, divisors, is_fqs_linear, witness_to_base, Catalog};
use crate::linset::{
    build_linear_set, point_id, vector_count_identity_holds, weights_agree_by_field_reduction, ProjPoint,
};
use crate::projection::{check_regulus, orbit_rep, type_orbit};

pub const SUITES: &[&str] = &[
    "orbits",
    "weights",
    "prop2",
    "trichotomy",
    "regulus",
    "construction",
    "lower-bound",
    "main-theorem",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Exhaustive,
    Sample,
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub q: Option<u32>,
    pub h: Option<u32>,
    pub k: Option<usize>,
    pub w: Option<u32>,
    pub scope: Scope,
    pub seed: u64,
    pub budget: u64,
    pub jobs: usize,
}

impl Default for SuiteConfig {
    fn default() -> SuiteConfig {
        SuiteConfig {
            q: None,
            h: None,
            k: None,
            w: None,
            scope: Scope::Exhaustive,
            seed: 1,
            budget: 100_000_000,
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub visited: u64,
    pub violations: Vec<String>,
    pub witnesses_histogram: BTreeMap<String, u64>,
    pub wall_time_secs: f64,
    pub pass: bool,
}

const MAX_RECORDED_VIOLATIONS: usize = 50;

struct Tally {
    visited: u64,
    violations: Vec<String>,
    histogram: BTreeMap<String, u64>,
}

impl Tally {
    fn new() -> Tally {
        Tally { visited: 0, violations: vec![], histogram: BTreeMap::new() }
    }

    fn violation(&mut self, msg: String) {
        if self.violations.len() < MAX_RECORDED_VIOLATIONS {
            self.violations.push(msg);
        }
    }

    fn bump(&mut self, key: &str) {
        *self.histogram.entry(key.to_string()).or_insert(0) += 1;
    }

    fn merge(&mut self, other: Tally) {
        self.visited += other.visited;
        for v in other.violations {
            self.violation(v);
        }
        for (k, n) in other.histogram {
            *self.histogram.entry(k).or_insert(0) += n;
        }
    }
}

fn finish(suite: &str, params: BTreeMap<String, String>, cfg: &SuiteConfig, tally: Tally, start: Instant) -> SuiteReport {
    SuiteReport {
        suite: suite.to_string(),
        params,
        seed: cfg.seed,
        visited: tally.visited,
        pass: tally.violations.is_empty(),
        violations: tally.violations,
        witnesses_histogram: tally.histogram,
        wall_time_secs: start.elapsed().as_secs_f64(),
    }
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InfeasibleScope(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    match name {
        "orbits" => suite_orbits(cfg),
        "weights" => suite_weights(cfg),
        "prop2" => suite_prop2(cfg),
        "trichotomy" => suite_trichotomy(cfg),
        "regulus" => suite_regulus(cfg),
        "construction" => suite_construction(cfg),
        "lower-bound" => suite_lower_bound(cfg),
        "main-theorem" => suite_main_theorem(cfg),
        other => Err(Error::UnknownSuite(other.to_string())),
    }
}

/// Orbit and coset sizes: |S_α| is q²-q for degree 2 and q³-q otherwise,
/// |S̄_α| = |S_α|/(q-1) is q or q²+q, and the orbits partition F_{q^h}\F_q.
fn suite_orbits(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let qs: Vec<u32> = cfg.q.map(|q| vec![q]).unwrap_or_else(|| vec![2, 3]);
    let hs: Vec<u32> = cfg.h.map(|h| vec![h]).unwrap_or_else(|| vec![2, 3, 4]);
    let mut params = BTreeMap::new();
    params.insert("q".into(), format!("{qs:?}"));
    params.insert("h".into(), format!("{hs:?}"));
    let mut tally = Tally::new();
    for &q in &qs {
        for &h in &hs {
            let tw = FieldTower::new(q, 1, h, None)?;
            let q64 = tw.q();
            let mut covered: BTreeSet<u32> = BTreeSet::new();
            let mut orbit_of_rep: HashMap<u32, BTreeSet<u32>> = HashMap::new();
            for a in 0..tw.order() as u32 {
                let alpha = Fe(a);
                if tw.in_ground_field(alpha) {
                    continue;
                }
                tally.visited += 1;
                let orbit = type_orbit(&tw, alpha)?;
                let deg = tw.degree_over_q(alpha);
                let expected = if deg == 2 { q64 * q64 - q64 } else { q64 * q64 * q64 - q64 };
                if orbit.len() as u64 != expected {
                    tally.violation(format!("q={q} h={h} alpha={a}: |S_a| = {} != {expected}", orbit.len()));
                }
                let cosets = orbit.len() as u64 / (q64 - 1);
                let expected_cosets = if deg == 2 { q64 } else { q64 * q64 + q64 };
                if cosets != expected_cosets {
                    tally.violation(format!("q={q} h={h} alpha={a}: cosets = {cosets} != {expected_cosets}"));
                }
                tally.bump(&format!("q={q} h={h} orbit_size={}", orbit.len()));
                let set: BTreeSet<u32> = orbit.iter().map(|x| x.0).collect();
                if !set.contains(&a) {
                    tally.violation(format!("q={q} h={h} alpha={a}: not in its own orbit"));
                }
                let rep = orbit_rep(&tw, alpha)?.0;
                match orbit_of_rep.get(&rep) {
                    Some(prev) if prev != &set => {
                        tally.violation(format!("q={q} h={h} alpha={a}: orbit disagrees with rep {rep}"))
                    }
                    None => {
                        if set.iter().any(|x| covered.contains(x)) {
                            tally.violation(format!("q={q} h={h} alpha={a}: orbit overlaps another"));
                        }
                        covered.extend(&set);
                        orbit_of_rep.insert(rep, set);
                    }
                    _ => {}
                }
            }
            if covered.len() as u64 != tw.order() - q64 {
                tally.violation(format!("q={q} h={h}: orbits cover {} of {} elements", covered.len(), tw.order() - q64));
            }
        }
    }
    Ok(finish("orbits", params, cfg, tally, start))
}

fn random_subspace(tw: &FieldTower, r: usize, k: usize, rng: &mut ChaCha8Rng) -> FqSubspace {
    let n = r * tw.h() as usize;
    loop {
        let rows: Vec<Vec<u8>> = (0..k)
            .map(|_| (0..n).map(|_| rng.gen_range(0..tw.q()) as u8).collect())
            .collect();
        let sub = FqSubspace::from_flat_rows(tw, n, rows);
        if sub.rank() == k {
            return sub;
        }
    }
}

fn check_weight_identities(tw: &FieldTower, u: &FqSubspace, label: &str, tally: &mut Tally) {
    tally.visited += 1;
    match build_linear_set(tw, u) {
        Ok(ls) => {
            if !vector_count_identity_holds(&ls) {
                tally.violation(format!("{label}: vector-count identity fails"));
            }
            match weights_agree_by_field_reduction(tw, u, &ls) {
                Ok(true) => {}
                Ok(false) => tally.violation(format!("{label}: weight routes disagree")),
                Err(e) => tally.violation(format!("{label}: field reduction failed: {e}")),
            }
        }
        Err(e) => tally.violation(format!("{label}: build failed: {e}")),
    }
}

/// Weight identities on every rank ≤ 4 subspace at h = 4 and on random
/// subspaces at h = 6, both routes compared.
fn suite_weights(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let q = cfg.q.unwrap_or(2);
    let samples = cfg.budget.min(10_000);
    let mut params = BTreeMap::new();
    params.insert("q".into(), q.to_string());
    params.insert("exhaustive".into(), "h=4 k<=4".into());
    params.insert("samples".into(), format!("{samples} at h=6 k<=6"));
    let mut tally = Tally::new();
    if cfg.scope == Scope::Exhaustive {
        let tw = FieldTower::new(q, 1, 4, None)?;
        for k in 1..=4usize {
            let mut count = 0u128;
            enumerate_subspaces(&tw, 8, k, None, |u| {
                count += 1;
                check_weight_identities(&tw, u, &format!("h=4 k={k} #{count}"), &mut tally);
            })?;
            let expected = gaussian_binomial(tw.q() as u128, 8, k);
            if count != expected {
                tally.violation(format!("h=4 k={k}: visited {count} != {expected}"));
            }
            tally.bump(&format!("exhaustive k={k}"));
        }
    }
    let tw6 = FieldTower::new(q, 1, 6, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..samples {
        let k = rng.gen_range(1..=6);
        let u = random_subspace(&tw6, 2, k, &mut rng);
        check_weight_identities(&tw6, &u, &format!("h=6 sample {i} k={k}"), &mut tally);
    }
    Ok(finish("weights", params, cfg, tally, start))
}

/// Size bounds for strictly F_{q^s}-linear sets of full rank h on the line:
/// |L| ∈ [q^{h-s}+1, (q^h-1)/(q^s-1)].
fn suite_prop2(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let q = cfg.q.unwrap_or(2);
    let h = cfg.h.unwrap_or(4);
    let mut params = BTreeMap::new();
    params.insert("q".into(), q.to_string());
    params.insert("h".into(), h.to_string());
    let tw = FieldTower::new(q, 1, h, None)?;
    let mut tally = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for s in divisors(h) {
        if s == 1 || s == h {
            continue;
        }
        let tower2 = crate::linearity::subfield_tower(&tw, s)?;
        let k2 = (h / s) as usize;
        let d2 = 2 * k2;
        let lo = (tw.q() as u128).pow(h - s) + 1;
        let hi = ((tw.q() as u128).pow(h) - 1) / ((tw.q() as u128).pow(s) - 1);
        let check = |t: &mut Tally, w2: &FqSubspace, label: String| {
            t.visited += 1;
            let u = match witness_to_base(&tw, &tower2, w2.rows()) {
                Ok(u) => u,
                Err(e) => return t.violation(format!("{label}: lift failed: {e}")),
            };
            match algebraic_max_field(&tw, &u) {
                Ok(m) if m == s => {
                    let ls = match build_linear_set(&tw, &u) {
                        Ok(ls) => ls,
                        Err(e) => return t.violation(format!("{label}: build failed: {e}")),
                    };
                    let size = ls.size() as u128;
                    if !(lo..=hi).contains(&size) {
                        t.violation(format!("{label}: |L| = {size} outside [{lo}, {hi}]"));
                    }
                    t.bump(&format!("s={s} size={size}"));
                }
                Ok(_) => t.bump(&format!("s={s} not strict")),
                Err(e) => t.violation(format!("{label}: linearity failed: {e}")),
            }
        };
        let exhaustive_count = gaussian_binomial(tower2.q() as u128, d2, k2);
        if cfg.scope == Scope::Exhaustive && exhaustive_count <= 1_000_000 {
            // rank-k2 F_{q^s}-subspaces of (F_{q^h})^2 live in a flat space
            // of dimension d2 over the subfield tower
            let mut n = 0u128;
            enumerate_subspaces(&tower2, d2, k2, None, |w2| {
                n += 1;
                check(&mut tally, w2, format!("s={s} #{n}"));
            })?;
            if n != exhaustive_count {
                tally.violation(format!("s={s}: visited {n} != {exhaustive_count}"));
            }
        } else {
            let samples = cfg.budget.min(500);
            for i in 0..samples {
                let w2 = random_subspace(&tower2, 2, k2, &mut rng);
                check(&mut tally, &w2, format!("s={s} sample {i}"));
            }
        }
    }
    Ok(finish("prop2", params, cfg, tally, start))
}

/// Direction trichotomy over every F_q-linear map on F_{q^h}, with the
/// linear-set cross-check.
fn suite_trichotomy(cfg: &SuiteConfig) -> Result<SuiteReport> {
    use crate::directions::{check_trichotomy, directions_match_linear_set, GraphMap, TrichotomyCase};
    let start = Instant::now();
    let q = cfg.q.unwrap_or(2);
    let h = cfg.h.unwrap_or(4);
    let tw = FieldTower::new(q, 1, h, None)?;
    let total = tw.order().pow(h);
    let mut params = BTreeMap::new();
    params.insert("q".into(), q.to_string());
    params.insert("h".into(), h.to_string());
    params.insert("maps".into(), total.to_string());
    let indices: Vec<u64> = if cfg.scope == Scope::Exhaustive && total <= 1 << 20 {
        (0..total).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        (0..cfg.budget.min(100_000)).map(|_| rng.gen_range(0..total)).collect()
    };
    let tally = with_pool(cfg.jobs, || {
        indices
            .par_chunks(4096)
            .map(|chunk| {
                let mut t = Tally::new();
                for &idx in chunk {
                    t.visited += 1;
                    let f = match GraphMap::from_linear_index(&tw, idx) {
                        Ok(f) => f,
                        Err(e) => {
                            t.violation(format!("map {idx}: {e}"));
                            continue;
                        }
                    };
                    match check_trichotomy(&tw, &f) {
                        Ok(rep) => {
                            let case = match rep.case {
                                TrichotomyCase::Generic => "r=1",
                                TrichotomyCase::Subfield => "subfield",
                                TrichotomyCase::Affine => "r=q0",
                            };
                            t.bump(case);
                            if rep.count.r > 2 && rep.count.r < tw.order() && !rep.fr_linearity_verified {
                                t.violation(format!("map {idx}: r = {} without linearity proof", rep.count.r));
                            }
                        }
                        Err(e) => t.violation(format!("map {idx}: {e}")),
                    }
                    match directions_match_linear_set(&tw, &f) {
                        Ok(true) => {}
                        Ok(false) => t.violation(format!("map {idx}: directions != linear set")),
                        Err(e) => t.violation(format!("map {idx}: cross-check failed: {e}")),
                    }
                    // strictly F_{q^s}-linear graphs obey the line-set size
                    // bounds |L| ∈ [q^{h-s}+1, (q^h-1)/(q^s-1)]
                    if let Ok(u) = f.graph_subspace(&tw) {
                        match (algebraic_max_field(&tw, &u), build_linear_set(&tw, &u)) {
                            (Ok(s), Ok(ls)) if s < h => {
                                let lo = (tw.q() as u128).pow(h - s) + 1;
                                let hi = ((tw.q() as u128).pow(h) - 1) / ((tw.q() as u128).pow(s) - 1);
                                if !(lo..=hi).contains(&(ls.size() as u128)) {
                                    t.violation(format!(
                                        "map {idx}: strictly s = {s} but |L| = {} outside [{lo}, {hi}]",
                                        ls.size()
                                    ));
                                }
                                t.bump(&format!("strict s={s}"));
                            }
                            (Ok(s), Ok(_)) => t.bump(&format!("strict s={s}")),
                            (Err(e), _) | (_, Err(e)) => t.violation(format!("map {idx}: size bound check failed: {e}")),
                        }
                    }
                }
                t
            })
            .reduce(Tally::new, |mut a, b| {
                a.merge(b);
                a
            })
    })?;
    Ok(finish("trichotomy", params, cfg, tally, start))
}

fn construction_grid(h: u32) -> Vec<(u32, usize)> {
    let mut grid = vec![];
    for s in 2..=h {
        if h % s != 0 {
            continue;
        }
        for r in 1.. {
            let k = r * s as usize + 2;
            if k > h as usize {
                break;
            }
            grid.push((s, r));
        }
    }
    grid
}

/// Regulus and partition structure of Π-lines on Construction scenes.
fn suite_regulus(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let q = cfg.q.unwrap_or(2);
    let hs: Vec<u32> = cfg.h.map(|h| vec![h]).unwrap_or_else(|| vec![4, 6]);
    let mut params = BTreeMap::new();
    params.insert("q".into(), q.to_string());
    params.insert("h".into(), format!("{hs:?}"));
    let mut tally = Tally::new();
    for &h in &hs {
        let tw = FieldTower::new(q, 1, h, None)?;
        for (s, r) in construction_grid(h) {
            for trial in 0..3u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (trial.wrapping_mul(0x9E3779B9)));
                let p = sample_params(&tw, s, r, &mut rng)?;
                let scene = crate::construct::build_scene(&tw, &p)?;
                let rep = check_regulus(&tw, &scene)?;
                tally.visited += rep.triples_checked;
                tally.bump(&format!("h={h} s={s} r={r} reguli={}", rep.reguli_same_type));
                if rep.partitions_verified > 0 {
                    tally.bump(&format!("h={h} s={s} r={r} partitions"));
                }
                for v in rep.violations {
                    tally.violation(format!("h={h} s={s} r={r} trial={trial}: {v}"));
                }
            }
        }
    }
    Ok(finish("regulus", params, cfg, tally, start))
}

/// Construction oracle equivalence: scene projection, closed form, and the
/// F_{q^s} witness all agree; size and spectrum as predicted.
fn suite_construction(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let q = cfg.q.unwrap_or(2);
    let hs: Vec<u32> = cfg.h.map(|h| vec![h]).unwrap_or_else(|| vec![4, 6]);
    let mut params = BTreeMap::new();
    params.insert("q".into(), q.to_string());
    params.insert("h".into(), format!("{hs:?}"));
    params.insert("trials".into(), "5".into());
    let mut tally = Tally::new();
    for &h in &hs {
        let tw = FieldTower::new(q, 1, h, None)?;
        for (s, r) in construction_grid(h) {
            for trial in 0..5u64 {
                tally.visited += 1;
                let label = format!("h={h} s={s} r={r} trial={trial}");
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(trial));
                let p = sample_params(&tw, s, r, &mut rng)?;
                let scene = crate::construct::build_scene(&tw, &p)?;
                let projected = scene.project_sigma(&tw)?;
                let closed = build_linear_set(&tw, &chi_subspace(&tw, &p)?)?;
                if !projected.same_points(&closed) {
                    tally.violation(format!("{label}: scene and closed form disagree"));
                    continue;
                }
                let rs = r as u32 * s;
                let expected_size = (tw.q().pow(rs) + 1) as usize;
                if projected.size() != expected_size {
                    tally.violation(format!("{label}: size {} != {expected_size}", projected.size()));
                }
                let mut expected: BTreeMap<u32, usize> = BTreeMap::new();
                expected.insert(rs, 1);
                *expected.entry(2).or_insert(0) += (tw.q().pow(rs)) as usize;
                if projected.weight_spectrum() != expected {
                    tally.violation(format!("{label}: spectrum {:?} != {expected:?}", projected.weight_spectrum()));
                }
                let w = witness_subspace(&tw, &p)?;
                if !is_fqs_linear(&tw, &w, s)? {
                    tally.violation(format!("{label}: witness is not F_q^{s}-linear"));
                } else if !build_linear_set(&tw, &w)?.same_points(&projected) {
                    tally.violation(format!("{label}: witness has different points"));
                } else {
                    tally.bump(&format!("h={h} s={s} r={r} witness"));
                }
            }
        }
    }
    Ok(finish("construction", params, cfg, tally, start))
}

/// Any linear set with a weight-1 point has at least q^{k-1}+1 points, and
/// clubs attain the bound.
fn suite_lower_bound(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let q = cfg.q.unwrap_or(2);
    let h = cfg.h.unwrap_or(4);
    let ks: Vec<usize> = cfg.k.map(|k| vec![k]).unwrap_or_else(|| vec![2, 3, 4]);
    let mut params = BTreeMap::new();
    params.insert("q".into(), q.to_string());
    params.insert("h".into(), h.to_string());
    params.insert("k".into(), format!("{ks:?}"));
    let tw = FieldTower::new(q, 1, h, None)?;
    let mut tally = Tally::new();
    for &k in &ks {
        let bound = (tw.q().pow(k as u32 - 1) + 1) as usize;
        let mut attained = false;
        let mut n = 0u128;
        enumerate_subspaces(&tw, 2 * h as usize, k, Some(1_000_000), |u| {
            n += 1;
            tally.visited += 1;
            let ls = match build_linear_set(&tw, u) {
                Ok(ls) => ls,
                Err(e) => return tally.violation(format!("k={k} #{n}: {e}")),
            };
            if ls.min_weight() == 1 {
                if ls.size() < bound {
                    tally.violation(format!("k={k} #{n}: {} points < bound {bound}", ls.size()));
                }
                if ls.size() == bound {
                    attained = true;
                }
            }
        })?;
        let expected = gaussian_binomial(tw.q() as u128, 2 * h as usize, k);
        if n != expected {
            tally.violation(format!("k={k}: visited {n} != {expected}"));
        }
        if !attained && k > 1 {
            tally.violation(format!("k={k}: bound {bound} never attained"));
        }
        tally.bump(&format!("k={k} bound={bound}"));
        // the club meets the bound exactly
        if (k as u32 - 1) == 1 || h % (k as u32 - 1) == 0 {
            match build_club(&tw, k as u32 - 1, k as u32).and_then(|u| build_linear_set(&tw, &u)) {
                Ok(ls) if ls.size() == bound => tally.bump(&format!("k={k} club attains")),
                Ok(ls) => tally.violation(format!("k={k}: club has {} points != {bound}", ls.size())),
                Err(e) => tally.violation(format!("k={k}: club build failed: {e}")),
            }
        }
    }
    Ok(finish("lower-bound", params, cfg, tally, start))
}

/// One point of weight k-w, all others weight w: the set must be an
/// F_{q^s}-linear set for some s > 1 dividing k-w. Exhaustive at q = 2 by
/// fixing the heavy point at <(0,1)> and enumerating extensions.
fn suite_main_theorem(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let q = cfg.q.unwrap_or(2);
    let h = cfg.h.unwrap_or(6);
    let k = cfg.k.unwrap_or(5);
    let w = cfg.w.unwrap_or(2);
    if q != 2 {
        return Err(Error::InfeasibleScope("main-theorem suite runs at q = 2".into()));
    }
    let heavy_w = k as u32 - w;
    if w < 2 || heavy_w < 2 {
        return Err(Error::InfeasibleScope("need w >= 2 and k - w >= 2".into()));
    }
    let tw = FieldTower::new(q, 1, h, None)?;
    let n = 2 * h as usize;
    if n > 16 {
        return Err(Error::InfeasibleScope("flat dimension above the u16 fast path".into()));
    }
    let mut params = BTreeMap::new();
    params.insert("q".into(), q.to_string());
    params.insert("h".into(), h.to_string());
    params.insert("k".into(), k.to_string());
    params.insert("w".into(), w.to_string());

    // witness fields allowed by the conclusion: s | k-w, s > 1, and F_{q^s}
    // must embed in F_{q^h}
    let s_candidates: Vec<u32> = divisors(heavy_w)
        .into_iter()
        .filter(|&s| s > 1 && h % s == 0)
        .collect();
    if s_candidates.is_empty() {
        return Err(Error::InfeasibleScope(format!("no admissible s for k-w = {heavy_w}, h = {h}")));
    }
    let catalogs: Vec<(u32, Catalog)> = s_candidates
        .iter()
        .map(|&s| Catalog::build(&tw, s).map(|c| (s, c)))
        .collect::<Result<_>>()?;

    // point id for every 12-bit flat vector
    let pid_table: Vec<u8> = (0..1usize << n)
        .map(|idx| {
            let flat: Vec<u8> = (0..n).map(|i| ((idx >> i) & 1) as u8).collect();
            if flat.iter().all(|&d| d == 0) {
                return 0u8;
            }
            let v = FqVector::from_flat(&tw, &flat);
            point_id(&tw, &ProjPoint::from_vector(&tw, &v).unwrap()) as u8
        })
        .collect();
    let heavy_line = ProjPoint::from_vector(&tw, &FqVector::new(vec![Fe::ZERO, Fe::ONE]))?.flattened_line(&tw);

    // the heavy point has weight k-w exactly when V ∩ line has that rank
    let mut fixed_subs: Vec<FqSubspace> = vec![];
    enumerate_subspaces(&tw, h as usize, heavy_w as usize, None, |abstract_sub| {
        // lift the abstract rows through the line's basis (q = 2: XOR)
        let rows: Vec<Vec<u8>> = abstract_sub
            .rows()
            .iter()
            .map(|arow| {
                let mut row = vec![0u8; n];
                for (j, &d) in arow.iter().enumerate() {
                    if d != 0 {
                        for (x, &b) in row.iter_mut().zip(&heavy_line.rows()[j]) {
                            *x ^= b;
                        }
                    }
                }
                row
            })
            .collect();
        fixed_subs.push(FqSubspace::from_flat_rows(&tw, n, rows));
    })?;
    let expected_fixed = gaussian_binomial(2, h as usize, heavy_w as usize);
    if fixed_subs.len() as u128 != expected_fixed {
        return Err(Error::InfeasibleScope(format!(
            "heavy-subspace count {} != {expected_fixed}",
            fixed_subs.len()
        )));
    }
    let per_fixed = {
        // rank-k V over a rank-(k-w) fixed with V ∩ line = fixed: count the
        // complements in the quotient that avoid the line's image
        let m = (k as u32 - heavy_w) as usize;
        let quot = n - heavy_w as usize;
        let line_img = h as usize - heavy_w as usize;
        let mut num = 1u128;
        let mut den = 1u128;
        for i in 0..m {
            num *= (1u128 << quot) - (1u128 << (line_img + i));
            den *= (1u128 << m) - (1u128 << i);
        }
        num / den
    };
    if cfg.scope == Scope::Sample {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let keep = ((cfg.budget / per_fixed.max(1) as u64).max(1) as usize).min(fixed_subs.len());
        let mut idx: Vec<usize> = (0..fixed_subs.len()).collect();
        for i in (1..idx.len()).rev() {
            idx.swap(i, rng.gen_range(0..=i));
        }
        idx.truncate(keep);
        idx.sort_unstable();
        fixed_subs = idx.into_iter().map(|i| fixed_subs[i].clone()).collect();
    }
    params.insert("heavy_subspaces".into(), fixed_subs.len().to_string());
    params.insert("extensions_each".into(), per_fixed.to_string());

    let heavy_count = (1u16 << heavy_w) - 1;
    let light_count = (1u16 << w) - 1;
    let tally = with_pool(cfg.jobs, || {
        fixed_subs
            .par_iter()
            .enumerate()
            .map(|(fi, fixed)| {
                let mut t = Tally::new();
                let mut counts = vec![0u16; (1usize << h) + 1];
                let res = enumerate_extensions(&tw, fixed, k, &heavy_line, |v| {
                    t.visited += 1;
                    let rows: Vec<u16> = v
                        .rows()
                        .iter()
                        .map(|r| r.iter().enumerate().fold(0u16, |acc, (i, &d)| acc | ((d as u16) << i)))
                        .collect();
                    for c in counts.iter_mut() {
                        *c = 0;
                    }
                    // gray-code walk over the 2^k - 1 nonzero combinations
                    let mut cur = 0u16;
                    let mut prev_gray = 0u32;
                    let mut ok = true;
                    let mut mask = 0u128;
                    for m in 1u32..(1 << k) {
                        let gray = m ^ (m >> 1);
                        cur ^= rows[(gray ^ prev_gray).trailing_zeros() as usize];
                        prev_gray = gray;
                        let pid = pid_table[cur as usize] as usize;
                        counts[pid] += 1;
                        mask |= 1u128 << pid;
                    }
                    if counts[0] != heavy_count {
                        return;
                    }
                    for &c in counts.iter().skip(1) {
                        if c != 0 && c != light_count {
                            ok = false;
                            break;
                        }
                    }
                    if !ok {
                        return;
                    }
                    // hypothesis holds: some admissible s must give a witness
                    let mut found = None;
                    for (s, cat) in &catalogs {
                        if cat.lookup(mask).is_some() {
                            found = Some(*s);
                            break;
                        }
                    }
                    match found {
                        Some(s) => {
                            t.bump(&format!("witness s={s}"));
                            if s >= w {
                                t.bump("s>=w");
                            }
                            if s >= heavy_w {
                                t.bump("s>=k-w");
                            }
                        }
                        None => t.violation(format!("fixed #{fi}: qualifying set with no witness, mask {mask:#x}")),
                    }
                });
                match res {
                    Ok(c) if c != per_fixed => {
                        t.violation(format!("fixed #{fi}: extension count {c} != {per_fixed}"))
                    }
                    Err(e) => t.violation(format!("fixed #{fi}: enumeration failed: {e}")),
                    _ => {}
                }
                t
            })
            .reduce(Tally::new, |mut a, b| {
                a.merge(b);
                a
            })
    })?;
    Ok(finish("main-theorem", params, cfg, tally, start))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(name: &str, cfg: &SuiteConfig) -> SuiteReport {
        let rep = run_suite(name, cfg).unwrap();
        assert!(rep.pass, "{name}: {:?}", rep.violations);
        rep
    }

    #[test]
    fn orbits_suite_passes() {
        let rep = quick("orbits", &SuiteConfig::default());
        assert_eq!(rep.visited, (4 - 2) + (8 - 2) + (16 - 2) + (9 - 3) + (27 - 3) + (81 - 3));
    }

    #[test]
    fn weights_suite_sample_only() {
        let cfg = SuiteConfig { scope: Scope::Sample, budget: 200, ..SuiteConfig::default() };
        let rep = quick("weights", &cfg);
        assert_eq!(rep.visited, 200);
    }

    #[test]
    fn prop2_suite_h4() {
        let rep = quick("prop2", &SuiteConfig::default());
        // 357 F_4-subspaces of rank 2 in a 4-dim F_4-space
        assert_eq!(rep.visited, 357);
    }

    #[test]
    fn trichotomy_suite_h3() {
        let cfg = SuiteConfig { h: Some(3), jobs: 1, ..SuiteConfig::default() };
        let rep = quick("trichotomy", &cfg);
        assert_eq!(rep.visited, 512);
    }

    #[test]
    fn regulus_suite_h4() {
        let cfg = SuiteConfig { h: Some(4), ..SuiteConfig::default() };
        let rep = quick("regulus", &cfg);
        assert!(rep.visited > 0);
    }

    #[test]
    fn construction_suite_h4() {
        let cfg = SuiteConfig { h: Some(4), ..SuiteConfig::default() };
        quick("construction", &cfg);
    }

    #[test]
    fn lower_bound_suite_small_k() {
        let cfg = SuiteConfig { k: Some(2), ..SuiteConfig::default() };
        let rep = quick("lower-bound", &cfg);
        assert_eq!(rep.visited, gaussian_binomial(2, 8, 2) as u64);
    }

    #[test]
    fn main_theorem_suite_h4() {
        // k = 4, w = 2: heavy weight 2, every point weight 2, witness s = 2
        let cfg = SuiteConfig { h: Some(4), k: Some(4), w: Some(2), ..SuiteConfig::default() };
        let rep = quick("main-theorem", &cfg);
        assert!(rep.witnesses_histogram.contains_key("witness s=2"));
    }

    #[test]
    fn unknown_suite_rejected() {
        let cfg = SuiteConfig::default();
        assert!(matches!(run_suite("nope", &cfg), Err(Error::UnknownSuite(_))));
    }
}
