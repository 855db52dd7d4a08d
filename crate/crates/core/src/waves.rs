//! Relaxation wave models: lattice speeds, Maxwellians and speed bounds.

use crate::error::{Error, Result};
use crate::grid::SolutionField;

/// The conservation law `u_t + f(u)_x = 0` being relaxed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Law {
    Advection,
    Burgers,
    BuckleyLeverett,
    Euler { gamma: f64 },
}

impl Law {
    pub fn components(&self) -> usize {
        match self {
            Law::Euler { .. } => 3,
            _ => 1,
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.components() == 1
    }

    /// Scalar flux; panics on systems.
    pub fn scalar_flux(&self, u: f64) -> f64 {
        match self {
            Law::Advection => u,
            Law::Burgers => 0.5 * u * u,
            Law::BuckleyLeverett => u * u / (u * u + (1.0 - u) * (1.0 - u)),
            Law::Euler { .. } => panic!("scalar_flux called on a system"),
        }
    }

    /// Analytic `f'(u)` for scalar laws.
    pub fn scalar_derivative(&self, u: f64) -> f64 {
        match self {
            Law::Advection => 1.0,
            Law::Burgers => u,
            Law::BuckleyLeverett => {
                let d = 2.0 * u * u - 2.0 * u + 1.0;
                2.0 * u * (1.0 - u) / (d * d)
            }
            Law::Euler { .. } => panic!("scalar_derivative called on a system"),
        }
    }

    /// Flux of one node state. `node` is only used for error reporting.
    pub fn flux_into(&self, node: usize, u: &[f64], out: &mut [f64]) -> Result<()> {
        match *self {
            Law::Euler { gamma } => {
                let s = EulerState::from_conserved(u, gamma);
                s.check(node)?;
                out.copy_from_slice(&s.flux());
            }
            _ => out[0] = self.scalar_flux(u[0]),
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerState {
    pub rho: f64,
    pub momentum: f64,
    pub energy: f64,
    pub gamma: f64,
}

impl EulerState {
    pub fn from_conserved(u: &[f64], gamma: f64) -> Self {
        Self { rho: u[0], momentum: u[1], energy: u[2], gamma }
    }

    pub fn from_primitive(rho: f64, velocity: f64, pressure: f64, gamma: f64) -> Self {
        Self {
            rho,
            momentum: rho * velocity,
            energy: pressure / (gamma - 1.0) + 0.5 * rho * velocity * velocity,
            gamma,
        }
    }

    pub fn conserved(&self) -> [f64; 3] {
        [self.rho, self.momentum, self.energy]
    }

    pub fn velocity(&self) -> f64 {
        self.momentum / self.rho
    }

    pub fn pressure(&self) -> f64 {
        (self.gamma - 1.0) * (self.energy - 0.5 * self.momentum * self.momentum / self.rho)
    }

    pub fn sound_speed(&self) -> f64 {
        (self.gamma * self.pressure() / self.rho).sqrt()
    }

    pub fn mach(&self) -> f64 {
        self.velocity() / self.sound_speed()
    }

    pub fn is_admissible(&self) -> bool {
        self.rho > 0.0 && self.pressure() > 0.0 && self.energy.is_finite() && self.momentum.is_finite()
    }

    pub fn check(&self, node: usize) -> Result<()> {
        if !(self.rho > 0.0) {
            return Err(Error::OutOfDomain { node, reason: format!("density {}", self.rho) });
        }
        let p = self.pressure();
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::OutOfDomain { node, reason: format!("pressure {p}") });
        }
        Ok(())
    }

    pub fn flux(&self) -> [f64; 3] {
        let u = self.velocity();
        let p = self.pressure();
        [self.momentum, self.momentum * u + p, (self.energy + p) * u]
    }
}

/// Van Leer splitting `f = f+ + f-`.
pub fn van_leer_split(s: &EulerState) -> ([f64; 3], [f64; 3]) {
    let f = s.flux();
    let m = s.mach();
    if m >= 1.0 {
        return (f, [0.0; 3]);
    }
    if m <= -1.0 {
        return ([0.0; 3], f);
    }
    let g = s.gamma;
    let u = s.velocity();
    let c = s.sound_speed();
    let q = -s.rho * (u - c) * (u - c) / (4.0 * c);
    let r = (g - 1.0) * u - 2.0 * c;
    let minus = [q, q * r / g, q * r * r / (2.0 * (g * g - 1.0))];
    let plus = [f[0] - minus[0], f[1] - minus[1], f[2] - minus[2]];
    (plus, minus)
}

pub fn two_wave_maxwellian(u: f64, f: f64, a: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) {
        return Err(Error::InvalidSpeed(a));
    }
    Ok((0.5 * (u + f / a), 0.5 * (u - f / a)))
}

/// Rows are `(M1, M2, M3)` for speeds `(a, 0, -a)`.
pub fn three_wave_maxwellian(s: &EulerState, a: f64) -> Result<[[f64; 3]; 3]> {
    if !(a > 0.0) {
        return Err(Error::InvalidSpeed(a));
    }
    s.check(0)?;
    Ok(three_wave_unchecked(s, a))
}

fn three_wave_unchecked(s: &EulerState, a: f64) -> [[f64; 3]; 3] {
    let (fp, fm) = van_leer_split(s);
    let u = s.conserved();
    let m1 = [fp[0] / a, fp[1] / a, fp[2] / a];
    let m3 = [-fm[0] / a, -fm[1] / a, -fm[2] / a];
    let m2 = [u[0] - m1[0] - m3[0], u[1] - m1[1] - m3[1], u[2] - m1[2] - m3[2]];
    [m1, m2, m3]
}

/// Bound on the eigenvalues of the split fluxes for one state.
pub fn split_speed(s: &EulerState) -> f64 {
    let u = s.velocity().abs();
    let c = s.sound_speed();
    let m = u / c;
    if m <= 1.0 {
        (u + c) * (s.gamma + 3.0) / (2.0 * s.gamma + m * (3.0 - s.gamma))
    } else {
        u + c
    }
}

pub fn speed_bound(field: &SolutionField, gamma: f64, safety: f64) -> Result<f64> {
    let mut a = 0.0_f64;
    for i in 0..field.grid().n_nodes() {
        let s = EulerState::from_conserved(field.node(i), gamma);
        s.check(i)?;
        a = a.max(split_speed(&s));
    }
    Ok(safety * a)
}

/// `safety * max_i |f'(u_i)|` for scalar laws.
pub fn scalar_speed(law: &Law, field: &SolutionField, safety: f64) -> f64 {
    let m = field.values().iter().fold(0.0_f64, |m, &u| m.max(law.scalar_derivative(u).abs()));
    safety * m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WaveKind {
    TwoWave,
    ThreeWave,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveModel {
    kind: WaveKind,
    law: Law,
    a: f64,
}

impl WaveModel {
    pub fn new(kind: WaveKind, law: Law, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidSpeed(a));
        }
        if kind == WaveKind::ThreeWave && !matches!(law, Law::Euler { .. }) {
            return Err(Error::Unsupported("the three-wave model is built on the Euler splitting".into()));
        }
        Ok(Self { kind, law, a })
    }

    pub fn kind(&self) -> WaveKind {
        self.kind
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn set_speed(&mut self, a: f64) -> Result<()> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidSpeed(a));
        }
        self.a = a;
        Ok(())
    }

    pub fn velocities(&self) -> usize {
        match self.kind {
            WaveKind::TwoWave => 2,
            WaveKind::ThreeWave => 3,
        }
    }

    pub fn components(&self) -> usize {
        self.law.components()
    }

    pub fn speeds(&self) -> Vec<f64> {
        match self.kind {
            WaveKind::TwoWave => vec![self.a, -self.a],
            WaveKind::ThreeWave => vec![self.a, 0.0, -self.a],
        }
    }

    /// Writes `M(u)` for one node, velocity-major, into `out` (`k * p` values).
    pub fn maxwellian_into(&self, node: usize, u: &[f64], out: &mut [f64]) -> Result<()> {
        let p = self.components();
        match self.kind {
            WaveKind::TwoWave => {
                let mut f = [0.0; 3];
                self.law.flux_into(node, u, &mut f[..p])?;
                for c in 0..p {
                    out[c] = 0.5 * (u[c] + f[c] / self.a);
                    out[p + c] = 0.5 * (u[c] - f[c] / self.a);
                }
            }
            WaveKind::ThreeWave => {
                let Law::Euler { gamma } = self.law else { unreachable!() };
                let s = EulerState::from_conserved(u, gamma);
                s.check(node)?;
                for (v, row) in three_wave_unchecked(&s, self.a).iter().enumerate() {
                    out[v * 3..v * 3 + 3].copy_from_slice(row);
                }
            }
        }
        Ok(())
    }

    pub fn maxwellian(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.velocities() * self.components()];
        self.maxwellian_into(0, u, &mut out)?;
        Ok(out)
    }

    /// `P F = sum_v F_v` for one node.
    pub fn project(&self, f: &[f64]) -> Vec<f64> {
        let p = self.components();
        let mut u = vec![0.0; p];
        for fv in f.chunks_exact(p) {
            for (a, b) in u.iter_mut().zip(fv) {
                *a += b;
            }
        }
        u
    }

    /// `sum_v lambda_v F_v` for one node.
    pub fn flux_project(&self, f: &[f64]) -> Vec<f64> {
        let p = self.components();
        let mut out = vec![0.0; p];
        for (fv, lam) in f.chunks_exact(p).zip(self.speeds()) {
            for (a, b) in out.iter_mut().zip(fv) {
                *a += lam * b;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_wave_advection_midline() {
        let (m1, m2) = two_wave_maxwellian(0.5, 0.5, 1.01).unwrap();
        assert!((m1 - 0.5 * (0.5 + 0.5 / 1.01)).abs() < 1e-16);
        assert!((m1 + m2 - 0.5).abs() < 1e-16);
        assert!((1.01 * (m1 - m2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_wave_rejects_bad_speed() {
        assert_eq!(two_wave_maxwellian(1.0, 1.0, 0.0), Err(Error::InvalidSpeed(0.0)));
    }

    #[test]
    fn burgers_maxwellian() {
        let (m1, _) = two_wave_maxwellian(1.0, Law::Burgers.scalar_flux(1.0), 1.515).unwrap();
        assert!((m1 - 0.5 * (1.0 + 0.5 / 1.515)).abs() < 1e-16);
    }

    #[test]
    fn van_leer_supersonic_branches() {
        let g = 1.4;
        let c0 = (g * 1.0_f64 / 1.0).sqrt();
        let right = EulerState::from_primitive(1.0, 2.0 * c0, 1.0, g);
        let (fp, fm) = van_leer_split(&right);
        assert_eq!(fm, [0.0; 3]);
        assert_eq!(fp, right.flux());
        let left = EulerState::from_primitive(1.0, -2.0 * c0, 1.0, g);
        let (fp, fm) = van_leer_split(&left);
        assert_eq!(fp, [0.0; 3]);
        assert_eq!(fm, left.flux());
    }

    #[test]
    fn still_gas_q_value() {
        let s = EulerState::from_primitive(1.0, 0.0, 1.0, 1.4);
        let (fp, fm) = van_leer_split(&s);
        assert!((fm[0] + 1.4_f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((fm[0] + 0.2958039891549808).abs() < 1e-12);
        // mass and energy split antisymmetrically, momentum symmetrically
        assert!((fp[0] + fm[0]).abs() < 1e-15);
        assert!((fp[1] - fm[1]).abs() < 1e-15);
        let m = three_wave_maxwellian(&s, 2.0).unwrap();
        let f: Vec<f64> = (0..3).map(|c| 2.0 * m[0][c] - 2.0 * m[2][c]).collect();
        assert!(f[0].abs() < 1e-15 && (f[1] - 1.0).abs() < 1e-15 && f[2].abs() < 1e-15);
    }

    #[test]
    fn speed_bound_still_gas() {
        // u = 0, c = 1
        let s = EulerState { rho: 1.4, momentum: 0.0, energy: 1.0 / 0.4, gamma: 1.4 };
        assert!((s.sound_speed() - 1.0).abs() < 1e-15);
        assert!((split_speed(&s) - 11.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn speed_bound_continuous_at_sonic_point() {
        let s = EulerState::from_primitive(1.4, 1.0, 1.0, 1.4);
        assert!((s.mach() - 1.0).abs() < 1e-15);
        let sub = 2.0 * 4.4 / (2.8 + 1.6);
        assert!((split_speed(&s) - sub).abs() < 1e-14);
        assert!((sub - 2.0).abs() < 1e-15);
    }

    #[test]
    fn three_wave_rejects_negative_density() {
        let s = EulerState { rho: -1.0, momentum: 0.0, energy: 1.0, gamma: 1.4 };
        assert!(matches!(three_wave_maxwellian(&s, 2.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn three_wave_needs_euler() {
        assert!(WaveModel::new(WaveKind::ThreeWave, Law::Burgers, 1.0).is_err());
    }
}
