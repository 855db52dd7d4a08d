//! Upwind difference operators `delta` with `delta u / dx ~ du/dx`.
//!
//! Coefficients are generated for the negative-wind case on offsets `-r..=s`;
//! the positive-wind operator is the mirror `alpha+_j = -alpha-_{-j}`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::grid::Grid;

type Q = Ratio<i128>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Delta {
    D1,
    D2,
    D31,
    D32,
}

impl Delta {
    pub const ALL: [Delta; 4] = [Delta::D1, Delta::D2, Delta::D31, Delta::D32];

    /// `(r, s)` for negative wind.
    pub fn extents(self) -> (usize, usize) {
        match self {
            Delta::D1 => (0, 1),
            Delta::D2 => (1, 2),
            Delta::D31 => (2, 2),
            Delta::D32 => (1, 3),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Delta::D1 => "d1",
            Delta::D2 => "d2",
            Delta::D31 => "d31",
            Delta::D32 => "d32",
        }
    }

    /// Default operator for a spatial order.
    pub fn for_order(order: usize) -> Result<Self> {
        match order {
            1 => Ok(Delta::D1),
            2 => Ok(Delta::D2),
            3 => Ok(Delta::D32),
            _ => Err(Error::Config(format!("space order must be 1, 2 or 3, got {order}"))),
        }
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Delta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "d1" | "delta1" => Ok(Delta::D1),
            "d2" | "delta2" => Ok(Delta::D2),
            "d31" | "delta31" => Ok(Delta::D31),
            "d32" | "delta32" => Ok(Delta::D32),
            other => Err(Error::Config(format!("unknown delta variant '{other}'"))),
        }
    }
}

/// Coefficients on a contiguous offset range starting at `lo`.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub lo: isize,
    pub coeffs: Vec<f64>,
}

impl Stencil {
    pub fn hi(&self) -> isize {
        self.lo + self.coeffs.len() as isize - 1
    }

    pub fn offsets(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(k, &c)| (self.lo + k as isize, c))
    }

    #[inline]
    pub fn eval(&self, i: usize, grid: &Grid, u: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate() {
            acc += c * u(grid.wrap(i as isize + self.lo + k as isize));
        }
        acc
    }

    fn mirrored(&self) -> Stencil {
        let coeffs: Vec<f64> = self.coeffs.iter().rev().map(|c| -c).collect();
        Stencil { lo: -self.hi(), coeffs }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StencilOperator {
    variant: Option<Delta>,
    r: usize,
    s: usize,
    /// Negative-wind coefficients on `-r..=s`.
    alpha: Stencil,
    /// Negative-wind flux coefficients: `f_{i+1/2} = sum beta_k u_{i+k}`.
    beta: Stencil,
    alpha_pos: Stencil,
    beta_pos: Stencil,
    err_const: f64,
}

impl StencilOperator {
    pub fn new(variant: Delta) -> Self {
        let (r, s) = variant.extents();
        let mut op = Self::from_extents(r, s).expect("tabulated extents are admissible");
        op.variant = Some(variant);
        op
    }

    pub fn from_extents(r: usize, s: usize) -> Result<Self> {
        let alpha = Stencil { lo: -(r as isize), coeffs: stencil_coefficients(r, s)? };
        let beta = flux_coefficients(&alpha)?;
        let alpha_pos = alpha.mirrored();
        let beta_pos = flux_coefficients(&alpha_pos)?;
        Ok(Self { variant: None, r, s, alpha, beta, alpha_pos, beta_pos, err_const: error_constant(r, s) })
    }

    pub fn variant(&self) -> Option<Delta> {
        self.variant
    }

    pub fn extents(&self) -> (usize, usize) {
        (self.r, self.s)
    }

    pub fn order(&self) -> usize {
        self.r + self.s
    }

    /// Truncation-error constant: `delta u/dx - u' = c dx^{r+s} u^{(r+s+1)} + ...` for negative wind.
    pub fn error_constant(&self) -> f64 {
        self.err_const
    }

    /// Widest offset reached in either direction.
    pub fn half_width(&self) -> usize {
        self.r.max(self.s)
    }

    pub fn alpha(&self, wind: f64) -> &Stencil {
        if wind > 0.0 { &self.alpha_pos } else { &self.alpha }
    }

    pub fn beta(&self, wind: f64) -> &Stencil {
        if wind > 0.0 { &self.beta_pos } else { &self.beta }
    }

    /// `sum_j alpha+_j e^{i j theta}`.
    pub fn fourier_symbol(&self, theta: f64) -> Complex64 {
        self.alpha_pos
            .offsets()
            .map(|(j, c)| Complex64::from_polar(c, j as f64 * theta))
            .sum()
    }
}

/// Negative-wind coefficients on `-r..=s`.
pub fn stencil_coefficients(r: usize, s: usize) -> Result<Vec<f64>> {
    if !(r..=r + 2).contains(&s) {
        return Err(Error::UnstableStencil {
            r,
            s,
            reason: format!("upwind stability needs r <= s <= r + 2, got s - r = {}", s as isize - r as isize),
        });
    }
    let fr = factorial(r);
    let fs = factorial(s);
    let mut alpha = vec![Q::from_integer(0); r + s + 1];
    let mut center = Q::from_integer(0);
    for j in -(r as i128)..=(s as i128) {
        if j == 0 {
            continue;
        }
        let sign = if (j + 1).rem_euclid(2) == 0 { 1 } else { -1 };
        let denom = factorial((r as i128 + j) as usize) * factorial((s as i128 - j) as usize);
        let a = Q::new(sign * fr * fs, j * denom);
        alpha[(j + r as i128) as usize] = a;
        center -= a;
    }
    alpha[r] = center;
    Ok(alpha.into_iter().map(|q| *q.numer() as f64 / *q.denom() as f64).collect())
}

/// Flux form of a consistent stencil: `beta_j = sum_{l >= j} alpha_l`,
/// supported on `lo+1..=hi`, so that `delta u_i = f_{i+1/2} - f_{i-1/2}`.
pub fn flux_coefficients(alpha: &Stencil) -> Result<Stencil> {
    let sum: f64 = alpha.coeffs.iter().sum();
    let scale = alpha.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs())).max(1.0);
    if sum.abs() > 1e-12 * scale {
        return Err(Error::InconsistentCoefficients { sum });
    }
    let n = alpha.coeffs.len();
    let mut beta = vec![0.0; n - 1];
    let mut acc = 0.0;
    for k in (1..n).rev() {
        acc += alpha.coeffs[k];
        beta[k - 1] = acc;
    }
    Ok(Stencil { lo: alpha.lo + 1, coeffs: beta })
}

pub fn error_constant(r: usize, s: usize) -> f64 {
    let sign = if s % 2 == 1 { 1.0 } else { -1.0 };
    sign * (factorial(r) * factorial(s)) as f64 / factorial(r + s + 1) as f64
}

/// Pure stencil increments `delta u_i` (no velocity factor). Zero wind gives zeros.
pub fn apply_delta(field: &[f64], op: &StencilOperator, wind: f64, grid: &Grid) -> Vec<f64> {
    if wind == 0.0 {
        return vec![0.0; field.len()];
    }
    let st = op.alpha(wind);
    (0..field.len()).map(|i| st.eval(i, grid, |k| field[k])).collect()
}

/// Interface values `u_{i+1/2}` from the flux form.
pub fn interface_values(field: &[f64], op: &StencilOperator, wind: f64, grid: &Grid) -> Vec<f64> {
    let st = op.beta(wind);
    (0..field.len()).map(|i| st.eval(i, grid, |k| field[k])).collect()
}

fn factorial(n: usize) -> i128 {
    (1..=n as i128).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_coeffs(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-15, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn tabulated_coefficients() {
        assert_coeffs(&stencil_coefficients(0, 1).unwrap(), &[-1.0, 1.0]);
        assert_coeffs(&stencil_coefficients(1, 2).unwrap(), &[-1.0 / 3.0, -0.5, 1.0, -1.0 / 6.0]);
        assert_coeffs(&stencil_coefficients(2, 2).unwrap(), &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0]);
        assert_coeffs(
            &stencil_coefficients(1, 3).unwrap(),
            &[-0.25, -5.0 / 6.0, 1.5, -0.5, 1.0 / 12.0],
        );
    }

    #[test]
    fn rejects_unstable_extents() {
        assert!(matches!(stencil_coefficients(2, 1), Err(Error::UnstableStencil { .. })));
        assert!(matches!(stencil_coefficients(0, 3), Err(Error::UnstableStencil { .. })));
    }

    #[test]
    fn d2_flux_matches_closed_form() {
        let op = StencilOperator::new(Delta::D2);
        let b = op.beta(-1.0);
        assert_eq!(b.lo, 0);
        assert_coeffs(&b.coeffs, &[2.0 / 6.0, 5.0 / 6.0, -1.0 / 6.0]);
    }

    #[test]
    fn d32_fluxes_both_winds() {
        let op = StencilOperator::new(Delta::D32);
        let neg = op.beta(-1.0);
        assert_eq!(neg.lo, 0);
        assert_coeffs(&neg.coeffs, &[1.0 / 4.0, 13.0 / 12.0, -5.0 / 12.0, 1.0 / 12.0]);
        let pos = op.beta(1.0);
        assert_eq!(pos.lo, -2);
        assert_coeffs(&pos.coeffs, &[1.0 / 12.0, -5.0 / 12.0, 13.0 / 12.0, 1.0 / 4.0]);
    }

    #[test]
    fn d1_symbol() {
        let op = StencilOperator::new(Delta::D1);
        assert!(op.fourier_symbol(0.0).norm() < 1e-15);
        assert!((op.fourier_symbol(std::f64::consts::PI) - Complex64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn d31_symbol_is_imaginary() {
        let op = StencilOperator::new(Delta::D31);
        for k in 0..32 {
            let t = k as f64 * 0.2;
            let g = op.fourier_symbol(t);
            assert!(g.re.abs() < 1e-14);
            let want = 4.0 / 3.0 * t.sin() - (2.0 * t).sin() / 6.0;
            assert!((g.im - want).abs() < 1e-14);
        }
    }

    #[test]
    fn error_constants() {
        assert!((error_constant(0, 1) - 0.5).abs() < 1e-15);
        assert!((error_constant(1, 2) + 1.0 / 12.0).abs() < 1e-15);
        assert!((error_constant(2, 2) + 1.0 / 30.0).abs() < 1e-15);
        assert!((error_constant(1, 3) - 1.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn zero_wind_is_zero() {
        let g = Grid::periodic(8, 0.0, 1.0).unwrap();
        let u: Vec<f64> = (0..8).map(|i| i as f64).collect();
        assert!(apply_delta(&u, &StencilOperator::new(Delta::D2), 0.0, &g).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn parses_names() {
        assert_eq!("d31".parse::<Delta>().unwrap(), Delta::D31);
        assert!("d4".parse::<Delta>().is_err());
    }
}
