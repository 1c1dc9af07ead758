//! Explicit matrices for small instances: `M_t`, `N_t`, `Δ_t`, `F_t`, `W_t`.

use crate::error::{Error, Result};
use crate::spectral::MatchingRound;
use nalgebra::DMatrix;

pub const DENSE_CAP: usize = 64;

fn cap_check(m: usize, cap: usize) -> Result<()> {
    if m > cap {
        return Err(Error::OverCap { size: m, cap });
    }
    Ok(())
}

pub fn matching_matrix(m: usize, pairs: &[(usize, usize)]) -> DMatrix<f64> {
    let mut mat = DMatrix::<f64>::identity(m, m);
    for &(a, b) in pairs {
        mat[(a, a)] = 0.0;
        mat[(b, b)] = 0.0;
        mat[(a, b)] = 1.0;
        mat[(b, a)] = 1.0;
    }
    mat
}

pub fn lazy_matrix(m: usize, pairs: &[(usize, usize)], d: u64) -> DMatrix<f64> {
    let d = d as f64;
    DMatrix::<f64>::identity(m, m) * ((d - 1.0) / d) + matching_matrix(m, pairs) / d
}

pub fn centering_matrix(m: usize, active: &[usize]) -> DMatrix<f64> {
    let k = active.len() as f64;
    let mut mat = DMatrix::<f64>::zeros(m, m);
    for &i in active {
        for &j in active {
            mat[(i, j)] = if i == j { 1.0 - 1.0 / k } else { -1.0 / k };
        }
    }
    mat
}

#[derive(Clone, Debug)]
pub struct DenseFlowMatrix {
    pub f: DMatrix<f64>,
}

/// `F_0 = I`, `F_{t+1} = N_{t+1} F_t N_{t+1}`.
pub fn dense_flow_matrix(matchings: &[MatchingRound], m: usize, d: u64, cap: usize) -> Result<DenseFlowMatrix> {
    cap_check(m, cap)?;
    let mut f = DMatrix::<f64>::identity(m, m);
    for mr in matchings {
        let n = lazy_matrix(m, &mr.pairs, d);
        f = &n * f * &n;
    }
    Ok(DenseFlowMatrix { f })
}

/// `W = (Δ F Δ)^d` and `ψ = tr(W²)`.
pub fn dense_w_and_potential(f: &DenseFlowMatrix, active: &[usize], d: u64, cap: usize) -> Result<(DMatrix<f64>, f64)> {
    let m = f.f.nrows();
    cap_check(m, cap)?;
    let delta = centering_matrix(m, active);
    let base = &delta * &f.f * &delta;
    let mut w = DMatrix::<f64>::identity(m, m);
    for _ in 0..d {
        w = &w * &base;
    }
    let psi = (&w * &w).trace();
    Ok((w, psi))
}

/// `ψ` via the eigenvalues of `Δ F Δ`: `Σ λ^{2d}`.
pub fn potential_by_eigen(f: &DenseFlowMatrix, active: &[usize], d: u64) -> f64 {
    let m = f.f.nrows();
    let delta = centering_matrix(m, active);
    let base = &delta * &f.f * &delta;
    symmetric_eigenvalues(&base).iter().map(|l| l.powi(2 * d as i32)).sum()
}

pub fn symmetric_eigenvalues(mat: &DMatrix<f64>) -> Vec<f64> {
    let sym = (mat + mat.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest absolute eigenvalue of the symmetric matrix `Δ F Δ`.
pub fn top_singular_value(f: &DMatrix<f64>, active: &[usize]) -> f64 {
    let delta = centering_matrix(f.nrows(), active);
    let base = &delta * f * &delta;
    symmetric_eigenvalues(&base).iter().fold(0.0, |a, l| a.max(l.abs()))
}

/// The constant in `N^{4d} = I - λ(I - M)`.
pub fn lazy_walk_lambda(d: u64) -> f64 {
    0.5 - 0.5 * (1.0 - 2.0 / d as f64).powi(4 * d as i32)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PotentialTrace {
    pub psi: Vec<f64>,
    pub k: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_without_matchings() {
        let f = dense_flow_matrix(&[], 5, 4, DENSE_CAP).unwrap();
        assert_eq!(f.f, DMatrix::identity(5, 5));
    }

    #[test]
    fn one_pair() {
        // N = [[3/4,1/4],[1/4,3/4]] needs d = 4; at d = 2 N is already J/2
        let ms = [MatchingRound::new(1, vec![(0, 1)])];
        let f = dense_flow_matrix(&ms, 2, 4, DENSE_CAP).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[5.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 5.0 / 8.0]);
        assert!(max_abs_diff(&f.f, &want) < 1e-15);
        let f = dense_flow_matrix(&ms, 2, 2, DENSE_CAP).unwrap();
        assert!(max_abs_diff(&f.f, &DMatrix::from_element(2, 2, 0.5)) < 1e-15);
    }

    #[test]
    fn initial_potential_is_m_minus_one() {
        let m = 10;
        let f = dense_flow_matrix(&[], m, 4, DENSE_CAP).unwrap();
        let all: Vec<usize> = (0..m).collect();
        let (w, psi) = dense_w_and_potential(&f, &all, 4, DENSE_CAP).unwrap();
        assert!(max_abs_diff(&w, &centering_matrix(m, &all)) < 1e-12);
        assert!((psi - (m as f64 - 1.0)).abs() < 1e-10);
        let (_, psi1) = dense_w_and_potential(&f, &[3], 4, DENSE_CAP).unwrap();
        assert_eq!(psi1, 0.0);
    }

    #[test]
    fn cap_refuses() {
        assert!(matches!(dense_flow_matrix(&[], 65, 2, DENSE_CAP), Err(Error::OverCap { .. })));
    }

    #[test]
    fn lambda_bound() {
        for d in [2u64, 4, 8, 16, 32, 64] {
            assert!(lazy_walk_lambda(d) >= (1.0 - (-8f64).exp()) / 2.0 - 1e-15);
        }
    }
}
