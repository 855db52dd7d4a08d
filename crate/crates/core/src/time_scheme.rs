//! Quadrature-based time schemes on sub-time nodes `0 = c_0 < ... < c_q = 1`.
//!
//! Row `i` of the weight matrix integrates over `[t_n, t_n + c_i dt]`:
//! `a_ij = int_0^{c_i} l_j(s) ds` with `l_j` the Lagrange basis on the nodes.
//! Weights are integrated exactly over the rationals and converted to `f64`.

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;

use crate::error::{Error, Result};

type Q = Ratio<i128>;

const SINGULAR_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct TimeScheme {
    order: usize,
    nodes: Vec<f64>,
    /// Transport weights, `q x (q + 1)`.
    weights: Vec<Vec<f64>>,
    /// Relaxation-source weights, `q x (q + 1)`. Equal to `weights` for the
    /// quadrature family; the first-order scheme treats the source implicitly.
    source: Vec<Vec<f64>>,
}

impl TimeScheme {
    /// Builds the scheme from exact rational nodes.
    pub fn from_nodes(nodes: &[Ratio<i64>]) -> Result<Self> {
        let nodes: Vec<Q> = nodes.iter().map(|c| Q::new(*c.numer() as i128, *c.denom() as i128)).collect();
        validate_nodes(&nodes)?;
        let q = nodes.len() - 1;
        let mut weights = vec![vec![0.0; q + 1]; q];
        for (i, row) in weights.iter_mut().enumerate() {
            let upper = nodes[i + 1];
            for (j, w) in row.iter_mut().enumerate() {
                let w_exact = integrate(&lagrange_basis(&nodes, j), upper);
                *w = ratio_to_f64(w_exact);
            }
        }
        Ok(Self {
            order: q + 1,
            nodes: nodes.iter().map(|c| ratio_to_f64(*c)).collect(),
            source: weights.clone(),
            weights,
        })
    }

    /// Floating-point nodes are snapped to the nearest small rational first.
    pub fn from_float_nodes(nodes: &[f64]) -> Result<Self> {
        let exact = nodes
            .iter()
            .map(|&c| {
                Ratio::<i64>::approximate_float(c)
                    .ok_or_else(|| Error::InvalidNodes(format!("node {c} is not representable")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_nodes(&exact)
    }

    /// Forward Euler transport with an implicit relaxation source.
    pub fn forward_euler() -> Self {
        Self {
            order: 1,
            nodes: vec![0.0, 1.0],
            weights: vec![vec![1.0, 0.0]],
            source: vec![vec![0.0, 1.0]],
        }
    }

    /// Crank-Nicolson, nodes `{0, 1}`.
    pub fn crank_nicolson() -> Self {
        Self::from_nodes(&[Ratio::from_integer(0), Ratio::from_integer(1)]).expect("valid nodes")
    }

    /// Third order, nodes `{0, 1/2, 1}`.
    pub fn third_order() -> Self {
        Self::from_nodes(&[Ratio::from_integer(0), Ratio::new(1, 2), Ratio::from_integer(1)]).expect("valid nodes")
    }

    pub fn for_order(order: usize) -> Result<Self> {
        match order {
            1 => Ok(Self::forward_euler()),
            2 => Ok(Self::crank_nicolson()),
            3 => Ok(Self::third_order()),
            _ => Err(Error::Config(format!("time order must be 1, 2 or 3, got {order}"))),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of sub-time nodes after `t_n` (`q`).
    pub fn q(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn n_stages(&self) -> usize {
        self.nodes.len()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn source_weights(&self) -> &[Vec<f64>] {
        &self.source
    }

    /// Column 0 of the source weights.
    pub fn a0(&self) -> Vec<f64> {
        self.source.iter().map(|row| row[0]).collect()
    }

    /// The `q x q` block of source weights acting on stages `1..=q`.
    pub fn active_source(&self) -> DMatrix<f64> {
        let q = self.q();
        DMatrix::from_fn(q, q, |i, l| self.source[i][l + 1])
    }

    /// The `(q+1) x (q+1)` source matrix with an explicit zero row for stage 0.
    pub fn padded_source(&self) -> DMatrix<f64> {
        let n = self.n_stages();
        DMatrix::from_fn(n, n, |i, j| if i == 0 { 0.0 } else { self.source[i - 1][j] })
    }

    /// `(Id + mu A)^{-1}` for the padded source matrix.
    pub fn source_matrix_inverse(&self, mu: f64) -> Result<DMatrix<f64>> {
        invert_shifted(self.padded_source(), mu)
    }

    /// `(Id + mu A)^{-1}` restricted to the active stages.
    pub fn active_inverse(&self, mu: f64) -> Result<DMatrix<f64>> {
        invert_shifted(self.active_source(), mu)
    }

    /// `A^{-1} a_0` on the active block: the disequilibrium carried by each
    /// stage in the relaxed limit.
    pub fn relaxed_correction(&self) -> Result<Vec<f64>> {
        let a = self.active_source();
        let lu = a.clone().lu();
        if lu.determinant().abs() < SINGULAR_TOL {
            return Err(Error::SingularMatrix("active source block".into()));
        }
        let rhs = DVector::from_vec(self.a0());
        let x = lu.solve(&rhs).ok_or_else(|| Error::SingularMatrix("active source block".into()))?;
        Ok(x.iter().copied().collect())
    }
}

fn invert_shifted(a: DMatrix<f64>, mu: f64) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let m = DMatrix::identity(n, n) + a * mu;
    // det scaled by the matrix magnitude so huge mu does not hide singularity
    let scale = m.iter().fold(1.0_f64, |s, v| s.max(v.abs())).powi(n as i32);
    let lu = m.lu();
    if (lu.determinant() / scale).abs() < SINGULAR_TOL {
        return Err(Error::DegenerateMu { mu });
    }
    lu.try_inverse().ok_or(Error::DegenerateMu { mu })
}

fn validate_nodes(nodes: &[Q]) -> Result<()> {
    if nodes.len() < 2 || nodes.len() > 4 {
        return Err(Error::InvalidNodes(format!("need between 2 and 4 nodes, got {}", nodes.len())));
    }
    if nodes[0] != Q::from_integer(0) || *nodes.last().unwrap() != Q::from_integer(1) {
        return Err(Error::InvalidNodes("endpoints must be 0 and 1".into()));
    }
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidNodes("nodes must be strictly increasing".into()));
    }
    Ok(())
}

/// Monomial coefficients (lowest degree first) of the `j`-th Lagrange basis polynomial.
fn lagrange_basis(nodes: &[Q], j: usize) -> Vec<Q> {
    let mut poly = vec![Q::from_integer(1)];
    for (m, &cm) in nodes.iter().enumerate() {
        if m == j {
            continue;
        }
        let denom = nodes[j] - cm;
        let mut next = vec![Q::from_integer(0); poly.len() + 1];
        for (k, &p) in poly.iter().enumerate() {
            next[k + 1] += p / denom;
            next[k] -= p * cm / denom;
        }
        poly = next;
    }
    poly
}

fn integrate(poly: &[Q], upper: Q) -> Q {
    let mut total = Q::from_integer(0);
    let mut power = upper;
    for (k, &c) in poly.iter().enumerate() {
        total += c * power / Q::from_integer(k as i128 + 1);
        power *= upper;
    }
    total
}

fn ratio_to_f64(r: Q) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-15
    }

    #[test]
    fn two_nodes_give_crank_nicolson() {
        let s = TimeScheme::crank_nicolson();
        assert_eq!(s.weights(), &[vec![0.5, 0.5]]);
        assert_eq!(s.order(), 2);
    }

    #[test]
    fn three_nodes_give_third_order_rows() {
        let s = TimeScheme::third_order();
        let w = s.weights();
        let expected = [[5.0 / 24.0, 1.0 / 3.0, -1.0 / 24.0], [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]];
        for (row, exp) in w.iter().zip(expected) {
            for (a, b) in row.iter().zip(exp) {
                assert!(close(*a, b), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn rows_are_consistent() {
        let nodes = [0.0, 0.25, 0.6, 1.0];
        let s = TimeScheme::from_float_nodes(&nodes).unwrap();
        for (row, c) in s.weights().iter().zip(&s.nodes()[1..]) {
            let sum: f64 = row.iter().sum();
            assert!((sum - c).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(matches!(TimeScheme::from_float_nodes(&[0.0, 0.7, 0.5, 1.0]), Err(Error::InvalidNodes(_))));
        assert!(matches!(TimeScheme::from_float_nodes(&[0.1, 1.0]), Err(Error::InvalidNodes(_))));
        assert!(matches!(TimeScheme::from_float_nodes(&[0.0, 0.9]), Err(Error::InvalidNodes(_))));
        assert!(TimeScheme::from_float_nodes(&[0.0, 0.2, 0.4, 0.6, 1.0]).is_err());
    }

    #[test]
    fn zero_mu_inverse_is_identity() {
        let s = TimeScheme::third_order();
        let inv = s.source_matrix_inverse(0.0).unwrap();
        assert_eq!(inv, DMatrix::identity(3, 3));
    }

    #[test]
    fn relaxed_correction_values() {
        let cn = TimeScheme::crank_nicolson().relaxed_correction().unwrap();
        assert!(close(cn[0], 1.0));
        let third = TimeScheme::third_order().relaxed_correction().unwrap();
        assert!((third[0] - 0.5).abs() < 1e-14);
        assert!((third[1] + 1.0).abs() < 1e-14);
        let euler = TimeScheme::forward_euler().relaxed_correction().unwrap();
        assert_eq!(euler, vec![0.0]);
    }

    #[test]
    fn forward_euler_transport_is_explicit() {
        let s = TimeScheme::forward_euler();
        assert_eq!(s.weights()[0], vec![1.0, 0.0]);
        assert_eq!(s.a0(), vec![0.0]);
    }

    #[test]
    fn negative_mu_can_be_singular() {
        // Id + mu A with mu = -2 kills the Crank-Nicolson active block (1 - 2 * 1/2 = 0)
        let s = TimeScheme::crank_nicolson();
        assert!(matches!(s.active_inverse(-2.0), Err(Error::DegenerateMu { .. })));
    }
}
