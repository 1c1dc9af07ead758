//! Exact evaluation of the source/target set conditions.

use crate::spectral::SourceTargetSets;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};
use std::collections::{HashMap, HashSet};

pub fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// The four conditions on floating-point inputs, each value converted
/// exactly to a rational first.
pub fn check_rst_conditions(ids: &[usize], u: &[f64], sets: &SourceTargetSets) -> bool {
    let q: Vec<BigRational> = u.iter().map(|&x| exact(x)).collect();
    check_rst_conditions_rational(ids, &q, &sets.a_left, &sets.a_right, &exact(sets.eta))
}

pub fn check_rst_conditions_rational(
    ids: &[usize],
    u: &[BigRational],
    a_left: &[usize],
    a_right: &[usize],
    eta: &BigRational,
) -> bool {
    let k = u.len();
    let pos: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let lookup = |set: &[usize]| -> Option<Vec<BigRational>> {
        let mut seen = HashSet::new();
        set.iter()
            .map(|id| if seen.insert(*id) { pos.get(id).map(|&i| u[i].clone()) } else { None })
            .collect()
    };
    let (Some(left), Some(right)) = (lookup(a_left), lookup(a_right)) else {
        return false;
    };
    let right_ids: HashSet<&usize> = a_right.iter().collect();
    if a_left.iter().any(|id| right_ids.contains(id)) {
        return false;
    }
    // (2) sizes
    if 2 * right.len() < k || 8 * left.len() > k {
        return false;
    }
    // (1) η separates, in either orientation
    let below = |xs: &[BigRational]| xs.iter().all(|x| x <= eta);
    let above = |xs: &[BigRational]| xs.iter().all(|x| x >= eta);
    if !((below(&left) && above(&right)) || (above(&left) && below(&right))) {
        return false;
    }
    // (3) 9 (u - η)² ≥ u²
    let nine = BigRational::from_integer(BigInt::from_u8(9).unwrap());
    if left.iter().any(|x| {
        let diff = x - eta;
        &nine * &diff * &diff < x * x
    }) {
        return false;
    }
    // (4) 80 Σ_left u² ≥ Σ u²
    let sq = |xs: &[BigRational]| xs.iter().fold(BigRational::zero(), |a, x| a + x * x);
    let eighty = BigRational::from_integer(BigInt::from_u8(80).unwrap());
    eighty * sq(&left) >= sq(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spike_example() {
        let ids: Vec<usize> = (0..16).collect();
        let mut u = vec![-1.0; 16];
        u[0] = 15.0;
        let good = SourceTargetSets { a_left: vec![0], a_right: (1..16).collect(), eta: 0.0 };
        assert!(check_rst_conditions(&ids, &u, &good));
        let too_small = SourceTargetSets { a_left: vec![0], a_right: (1..8).collect(), eta: 0.0 };
        assert!(!check_rst_conditions(&ids, &u, &too_small));
        let not_sep = SourceTargetSets { a_left: vec![0], a_right: (1..16).collect(), eta: 20.0 };
        assert!(!check_rst_conditions(&ids, &u, &not_sep));
        let light = SourceTargetSets { a_left: vec![1], a_right: (2..16).collect(), eta: 0.0 };
        assert!(!check_rst_conditions(&ids, &u, &light));
        let overlap = SourceTargetSets { a_left: vec![0], a_right: (0..16).collect(), eta: 0.0 };
        assert!(!check_rst_conditions(&ids, &u, &overlap));
    }

    #[test]
    fn all_zero() {
        let ids: Vec<usize> = (0..16).collect();
        let s = SourceTargetSets { a_left: vec![], a_right: (0..8).collect(), eta: 0.0 };
        assert!(check_rst_conditions(&ids, &[0.0; 16], &s));
    }

    #[test]
    fn distance_clause() {
        let ids: Vec<usize> = (0..16).collect();
        let mut u = vec![-1.0; 16];
        u[0] = 15.0;
        // η just below 15: |15 - η| < 5
        let s = SourceTargetSets { a_left: vec![0], a_right: (1..16).collect(), eta: 11.0 };
        assert!(!check_rst_conditions(&ids, &u, &s));
        let s = SourceTargetSets { a_left: vec![0], a_right: (1..16).collect(), eta: 10.0 };
        assert!(check_rst_conditions(&ids, &u, &s));
    }
}
