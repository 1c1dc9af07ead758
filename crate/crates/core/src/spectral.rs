//! The spectral cut player.
//!
//! Split nodes are addressed by their edge index `0..m`. The flow matrix
//! `F_t` is never formed: `W_t r = (Δ_t F_t Δ_t)^d r` is evaluated by
//! applying the lazy matchings `N_i = ((d-1)/d) I + (1/d) M_i` in sequence.

use crate::error::{input, internal, Error, Result};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::Serialize;

/// Default minimum active-set size for [`find_source_target_sets`].
pub const MIN_ACTIVE: usize = 16;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MatchingRound {
    pub round: usize,
    /// Disjoint (source, sink) pairs of split-node indices.
    pub pairs: Vec<(usize, usize)>,
    /// `G_E` edge ids of the unit path routing each pair.
    pub routes: Vec<Vec<usize>>,
}

impl MatchingRound {
    pub fn new(round: usize, pairs: Vec<(usize, usize)>) -> Self {
        MatchingRound { round, pairs, routes: Vec::new() }
    }
}

pub fn sample_unit_vector(dim: usize, rng: &mut crate::rng::Rng) -> Result<Vec<f64>> {
    if dim == 0 {
        return input("cannot sample a unit vector in dimension 0");
    }
    loop {
        let mut r: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            r.iter_mut().for_each(|x| *x /= norm);
            return Ok(r);
        }
    }
}

fn lazy_in_place(pairs: &[(usize, usize)], x: &mut [f64], d: f64) {
    let w = 1.0 / d;
    for &(a, b) in pairs {
        let (xa, xb) = (x[a], x[b]);
        let s = (xb - xa) * w;
        x[a] = xa + s;
        x[b] = xb - s;
    }
}

// N² for a single matching: stay weight ((d-1)² + 1)/d², swap weight 2(d-1)/d².
fn lazy_twice_in_place(pairs: &[(usize, usize)], x: &mut [f64], d: f64) {
    let w = 2.0 * (d - 1.0) / (d * d);
    for &(a, b) in pairs {
        let (xa, xb) = (x[a], x[b]);
        let s = (xb - xa) * w;
        x[a] = xa + s;
        x[b] = xb - s;
    }
}

pub fn apply_lazy_matching(m: &MatchingRound, x: &[f64], d: u64) -> Vec<f64> {
    let mut y = x.to_vec();
    lazy_in_place(&m.pairs, &mut y, d as f64);
    y
}

fn center_in_place(active: &[usize], x: &mut [f64], scratch: &mut [bool]) {
    let mean = active.iter().map(|&i| x[i]).sum::<f64>() / active.len() as f64;
    for &i in active {
        scratch[i] = true;
    }
    for (i, xi) in x.iter_mut().enumerate() {
        if scratch[i] {
            *xi -= mean;
        } else {
            *xi = 0.0;
        }
    }
    for &i in active {
        scratch[i] = false;
    }
}

pub fn apply_centering(active: &[usize], x: &[f64]) -> Result<Vec<f64>> {
    if active.is_empty() {
        return input("centering needs a nonempty active set");
    }
    if let Some(&bad) = active.iter().find(|&&i| i >= x.len()) {
        return input(format!("active index {bad} out of range"));
    }
    let mut y = x.to_vec();
    center_in_place(active, &mut y, &mut vec![false; x.len()]);
    Ok(y)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult {
    /// Full-length vector, zero outside the active set.
    pub u: Vec<f64>,
    pub active: Vec<usize>,
    pub r: Vec<f64>,
}

/// `u = W_t r` with `W_t = (Δ_t F_t Δ_t)^d`, `F_t = N_t⋯N_1 N_1⋯N_t`.
/// Since `W_t` is symmetric, `u_e = <W_t(x_e), r>`.
pub fn project_power(
    matchings: &[MatchingRound],
    active: &[usize],
    r: &[f64],
    d: u64,
) -> Result<ProjectionResult> {
    let m = r.len();
    if active.is_empty() {
        return input("projection needs a nonempty active set");
    }
    if let Some(&bad) = active.iter().find(|&&i| i >= m) {
        return input(format!("active index {bad} out of range for m={m}"));
    }
    for mr in matchings {
        if let Some(&(a, b)) = mr.pairs.iter().find(|&&(a, b)| a >= m || b >= m) {
            return input(format!("matching pair ({a},{b}) out of range for m={m}"));
        }
    }
    let df = d as f64;
    let mut x = r.to_vec();
    let mut scratch = vec![false; m];
    // Δ is idempotent, so one centering between repetitions suffices.
    center_in_place(active, &mut x, &mut scratch);
    for _ in 0..d {
        if let Some((first, rest)) = matchings.split_first() {
            for mr in rest.iter().rev() {
                lazy_in_place(&mr.pairs, &mut x, df);
            }
            lazy_twice_in_place(&first.pairs, &mut x, df);
            for mr in rest {
                lazy_in_place(&mr.pairs, &mut x, df);
            }
        }
        center_in_place(active, &mut x, &mut scratch);
    }
    Ok(ProjectionResult { u: x, active: active.to_vec(), r: r.to_vec() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SourceTargetSets {
    pub a_left: Vec<usize>,
    pub a_right: Vec<usize>,
    pub eta: f64,
}

/// Source/target sets for the values `u[i]` of split nodes `ids[i]`.
///
/// Orient so the negative side `L` is the smaller one. If the `⌊k/8⌋`
/// largest-magnitude entries of `L` carry 1/80 of the mass, cut at η = 0.
/// Otherwise `L` is light, the positive side carries the mass and the
/// threshold η = sqrt(P/(6k)) leaves at least half the entries below it.
pub fn find_source_target_sets(ids: &[usize], u: &[f64], min_k: usize) -> Result<SourceTargetSets> {
    let k = u.len();
    if ids.len() != k {
        return input("ids and values differ in length");
    }
    if k < min_k.max(1) {
        return Err(Error::TooSmall { k, min: min_k });
    }
    let maxabs = u.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let sum: f64 = u.iter().sum();
    if sum.abs() > 1e-9 * k as f64 * maxabs.max(1.0) {
        return input(format!("values must sum to zero, got {sum:e}"));
    }
    let neg = u.iter().filter(|&&x| x < 0.0).count();
    let first = if 2 * neg <= k { 1.0 } else { -1.0 };
    for sign in [first, -first] {
        let v: Vec<f64> = u.iter().map(|&x| sign * x).collect();
        for attempt in [zero_cut(ids, &v), threshold_cut(ids, &v)].into_iter().flatten() {
            if rst_holds_f64(ids, &v, &attempt) {
                return Ok(orient(attempt, sign));
            }
        }
    }
    for sign in [1.0, -1.0] {
        let v: Vec<f64> = u.iter().map(|&x| sign * x).collect();
        if let Some(s) = scan_cut(ids, &v) {
            return Ok(orient(s, sign));
        }
    }
    internal("no source/target split satisfies the four conditions")
}

fn orient(mut s: SourceTargetSets, sign: f64) -> SourceTargetSets {
    s.eta *= sign;
    if s.eta == 0.0 {
        s.eta = 0.0;
    }
    s.a_left.sort_unstable();
    s.a_right.sort_unstable();
    s
}

fn by_value_desc(ids: &[usize], v: &[f64], idx: &mut [usize]) {
    idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(ids[a].cmp(&ids[b])));
}

fn zero_cut(ids: &[usize], v: &[f64]) -> Option<SourceTargetSets> {
    let k = v.len();
    let mut left: Vec<usize> = (0..k).filter(|&i| v[i] < 0.0).collect();
    if 2 * left.len() > k {
        return None;
    }
    left.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(ids[a].cmp(&ids[b])));
    left.truncate(k / 8);
    Some(SourceTargetSets {
        a_left: left.iter().map(|&i| ids[i]).collect(),
        a_right: (0..k).filter(|&i| v[i] >= 0.0).map(|i| ids[i]).collect(),
        eta: 0.0,
    })
}

fn threshold_cut(ids: &[usize], v: &[f64]) -> Option<SourceTargetSets> {
    let k = v.len();
    let p: f64 = v.iter().map(|x| x * x).sum();
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[k.div_ceil(2) - 1];
    let eta = (p / (6.0 * k as f64)).sqrt().max(median);
    Some(cut_at(ids, v, eta))
}

fn cut_at(ids: &[usize], v: &[f64], eta: f64) -> SourceTargetSets {
    let k = v.len();
    let mut elig: Vec<usize> = (0..k).filter(|&i| v[i] > eta && far_enough(v[i], eta)).collect();
    by_value_desc(ids, v, &mut elig);
    elig.truncate(k / 8);
    SourceTargetSets {
        a_left: elig.iter().map(|&i| ids[i]).collect(),
        a_right: (0..k).filter(|&i| v[i] <= eta).map(|i| ids[i]).collect(),
        eta,
    }
}

// |v - η| ≥ |v|/3 with a relative guard against rounding.
fn far_enough(v: f64, eta: f64) -> bool {
    3.0 * (v - eta).abs() >= v.abs() * (1.0 + 1e-12)
}

fn scan_cut(ids: &[usize], v: &[f64]) -> Option<SourceTargetSets> {
    let k = v.len();
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let median = {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        s[k.div_ceil(2) - 1]
    };
    sorted
        .into_iter()
        .filter(|&eta| eta >= median)
        .map(|eta| cut_at(ids, v, eta))
        .find(|s| rst_holds_f64(ids, v, s))
}

/// Floating-point evaluation of the four conditions with a small relative
/// margin on the mass clause. `v` is indexed like `ids`.
fn rst_holds_f64(ids: &[usize], v: &[f64], s: &SourceTargetSets) -> bool {
    let k = v.len();
    let pos: std::collections::HashMap<usize, usize> =
        ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let val = |id: &usize| pos.get(id).map(|&i| v[i]);
    let (Some(left), Some(right)) = (
        s.a_left.iter().map(val).collect::<Option<Vec<f64>>>(),
        s.a_right.iter().map(val).collect::<Option<Vec<f64>>>(),
    ) else {
        return false;
    };
    if 2 * right.len() < k || 8 * left.len() > k {
        return false;
    }
    let sep = left.iter().all(|&x| x >= s.eta) && right.iter().all(|&x| x <= s.eta)
        || left.iter().all(|&x| x <= s.eta) && right.iter().all(|&x| x >= s.eta);
    let far = left.iter().all(|&x| far_enough(x, s.eta) || x == 0.0);
    let total: f64 = v.iter().map(|x| x * x).sum();
    let mass: f64 = left.iter().map(|x| x * x).sum();
    sep && far && 80.0 * mass >= total * (1.0 + 1e-9)
        || sep && far && total == 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use proptest::prelude::*;

    #[test]
    fn unit_vectors() {
        let mut rng = rng_from(3);
        let r = sample_unit_vector(1, &mut rng).unwrap();
        assert!((r[0].abs() - 1.0).abs() < 1e-15);
        let r = sample_unit_vector(100, &mut rng).unwrap();
        let n: f64 = r.iter().map(|x| x * x).sum();
        assert!((n - 1.0).abs() < 1e-12);
        assert!(sample_unit_vector(0, &mut rng).is_err());
        let a = sample_unit_vector(10, &mut rng_from(9)).unwrap();
        let b = sample_unit_vector(10, &mut rng_from(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coordinate_second_moment() {
        let mut rng = rng_from(11);
        let dim = 20;
        let samples = 10_000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..samples {
            let r = sample_unit_vector(dim, &mut rng).unwrap();
            acc += r[0] * r[0];
            acc2 += r[0].powi(4);
        }
        let mean = acc / samples as f64;
        let sd = ((acc2 / samples as f64 - mean * mean) / samples as f64).sqrt();
        assert!((mean - 1.0 / dim as f64).abs() <= 3.0 * sd, "{mean} vs {}", 1.0 / dim as f64);
    }

    #[test]
    fn lazy_matching_examples() {
        let x = vec![1.0, 0.0, 0.0];
        assert_eq!(apply_lazy_matching(&MatchingRound::default(), &x, 4), x);
        let m = MatchingRound::new(1, vec![(0, 1)]);
        assert_eq!(apply_lazy_matching(&m, &x, 2), vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn centering_examples() {
        let x = vec![2.0, 2.0, 5.0];
        assert_eq!(apply_centering(&[0, 1], &x).unwrap(), vec![0.0, 0.0, 0.0]);
        let y = apply_centering(&[0, 2], &x).unwrap();
        assert_eq!(y, vec![-1.5, 0.0, 1.5]);
        assert_eq!(apply_centering(&[0, 2], &y).unwrap(), y);
        assert!(apply_centering(&[], &x).is_err());
    }

    #[test]
    fn projection_without_matchings_is_centering() {
        let r = sample_unit_vector(12, &mut rng_from(1)).unwrap();
        let active: Vec<usize> = (0..12).collect();
        let p = project_power(&[], &active, &r, 8).unwrap();
        let c = apply_centering(&active, &r).unwrap();
        for (a, b) in p.u.iter().zip(&c) {
            assert!((a - b).abs() < 1e-14);
        }
        let flat = vec![1.0 / (12f64).sqrt(); 12];
        let p = project_power(&[], &active, &flat, 8).unwrap();
        assert!(p.u.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn rst_degenerate_and_spike() {
        let ids: Vec<usize> = (0..16).collect();
        let s = find_source_target_sets(&ids, &[0.0; 16], MIN_ACTIVE).unwrap();
        assert!(s.a_left.is_empty());
        assert!(s.a_right.len() >= 8);
        assert_eq!(s.eta, 0.0);
        let mut u = vec![-1.0; 16];
        u[0] = 15.0;
        let s = find_source_target_sets(&ids, &u, MIN_ACTIVE).unwrap();
        assert_eq!(s.a_left, vec![0]);
        assert_eq!(s.a_right, (1..16).collect::<Vec<_>>());
        assert_eq!(s.eta, 0.0);
    }

    #[test]
    fn rst_errors() {
        let ids: Vec<usize> = (0..8).collect();
        assert!(matches!(
            find_source_target_sets(&ids, &[0.0; 8], MIN_ACTIVE),
            Err(Error::TooSmall { k: 8, min: 16 })
        ));
        let ids: Vec<usize> = (0..16).collect();
        assert!(matches!(find_source_target_sets(&ids, &[1.0; 16], MIN_ACTIVE), Err(Error::Input(_))));
    }

    proptest! {
        #[test]
        fn projection_is_linear(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let mut rng = rng_from(seed);
            let m = 20;
            let matchings = vec![
                MatchingRound::new(1, vec![(0, 5), (3, 7), (11, 2)]),
                MatchingRound::new(2, vec![(5, 3), (9, 19)]),
            ];
            let active: Vec<usize> = (0..m).filter(|i| i % 7 != 4).collect();
            let r1 = sample_unit_vector(m, &mut rng).unwrap();
            let r2 = sample_unit_vector(m, &mut rng).unwrap();
            let mix: Vec<f64> = r1.iter().zip(&r2).map(|(x, y)| a * x + b * y).collect();
            let u1 = project_power(&matchings, &active, &r1, 4).unwrap().u;
            let u2 = project_power(&matchings, &active, &r2, 4).unwrap().u;
            let um = project_power(&matchings, &active, &mix, 4).unwrap().u;
            for i in 0..m {
                prop_assert!((um[i] - (a * u1[i] + b * u2[i])).abs() < 1e-9);
            }
            let s: f64 = active.iter().map(|&i| um[i]).sum();
            prop_assert!(s.abs() < 1e-9 * m as f64);
        }

        #[test]
        fn rst_conditions_hold(vals in prop::collection::vec(-1000i64..1000, 16..80)) {
            let mut u: Vec<f64> = vals.iter().map(|&x| x as f64).collect();
            let s: f64 = u.iter().sum();
            u[0] -= s;
            let ids: Vec<usize> = (0..u.len()).map(|i| 3 * i + 1).collect();
            let sets = find_source_target_sets(&ids, &u, MIN_ACTIVE).unwrap();
            prop_assert!(crate::oracles::check_rst_conditions(&ids, &u, &sets));
        }
    }
}
