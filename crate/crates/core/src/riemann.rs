//! Exact solution of the Euler Riemann problem for an ideal gas.

use crate::error::{Error, Result};

/// Primitive state `(rho, u, p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl Primitive {
    pub const fn new(rho: f64, u: f64, p: f64) -> Self {
        Self { rho, u, p }
    }

    fn sound(&self, gamma: f64) -> f64 {
        (gamma * self.p / self.rho).sqrt()
    }
}

/// Star-region pressure and velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarState {
    pub p: f64,
    pub u: f64,
}

const TOL: f64 = 1e-12;

/// Pressure function of one side and its derivative.
fn side(p: f64, s: &Primitive, gamma: f64) -> (f64, f64) {
    let c = s.sound(gamma);
    if p > s.p {
        let a = 2.0 / ((gamma + 1.0) * s.rho);
        let b = (gamma - 1.0) / (gamma + 1.0) * s.p;
        let q = (a / (p + b)).sqrt();
        ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (b + p)))
    } else {
        let e = (gamma - 1.0) / (2.0 * gamma);
        let r = (p / s.p).powf(e);
        let d = (p / s.p).powf(-(gamma + 1.0) / (2.0 * gamma)) / (s.rho * c);
        (2.0 * c / (gamma - 1.0) * (r - 1.0), d)
    }
}

fn pressure_fn(p: f64, l: &Primitive, r: &Primitive, gamma: f64) -> (f64, f64) {
    let (fl, dl) = side(p, l, gamma);
    let (fr, dr) = side(p, r, gamma);
    (fl + fr + (r.u - l.u), dl + dr)
}

/// Star state by Newton iteration from the two-rarefaction guess, with a bisection fallback.
pub fn star_state(l: &Primitive, r: &Primitive, gamma: f64) -> Result<StarState> {
    if !(l.rho > 0.0 && l.p > 0.0 && r.rho > 0.0 && r.p > 0.0) {
        return Err(Error::Config("Riemann data must have positive density and pressure".into()));
    }
    let (cl, cr) = (l.sound(gamma), r.sound(gamma));
    if 2.0 * (cl + cr) / (gamma - 1.0) <= r.u - l.u {
        return Err(Error::Vacuum);
    }
    let e = (gamma - 1.0) / (2.0 * gamma);
    let guess = ((cl + cr - 0.5 * (gamma - 1.0) * (r.u - l.u)) / (cl / l.p.powf(e) + cr / r.p.powf(e))).powf(1.0 / e);
    let mut p = guess.max(TOL);
    let mut converged = false;
    for _ in 0..100 {
        let (f, df) = pressure_fn(p, l, r, gamma);
        let next = p - f / df;
        if !next.is_finite() || next <= 0.0 {
            break;
        }
        let change = 2.0 * (next - p).abs() / (next + p);
        p = next;
        if change < TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        p = bisect_pressure(l, r, gamma);
    }
    let (fl, _) = side(p, l, gamma);
    let (fr, _) = side(p, r, gamma);
    Ok(StarState { p, u: 0.5 * (l.u + r.u) + 0.5 * (fr - fl) })
}

/// Root of the pressure function by bisection; it is increasing in `p`.
pub fn bisect_pressure(l: &Primitive, r: &Primitive, gamma: f64) -> f64 {
    let mut lo = 1e-14;
    let mut hi = 10.0 * l.p.max(r.p);
    while pressure_fn(hi, l, r, gamma).0 < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if pressure_fn(mid, l, r, gamma).0 > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < TOL * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Exact solution at `(x, t)` for an interface at `x0`.
pub fn sod_exact(x: f64, t: f64, x0: f64, l: &Primitive, r: &Primitive, gamma: f64) -> Result<Primitive> {
    if !(t > 0.0) {
        return Err(Error::Config(format!("time must be positive, got {t}")));
    }
    let star = star_state(l, r, gamma)?;
    Ok(sample(&star, (x - x0) / t, l, r, gamma))
}

/// Samples the self-similar solution at `xi = (x - x0) / t`.
pub fn sample(star: &StarState, xi: f64, l: &Primitive, r: &Primitive, gamma: f64) -> Primitive {
    let g1 = (gamma - 1.0) / (gamma + 1.0);
    if xi <= star.u {
        let c = l.sound(gamma);
        if star.p > l.p {
            let s = l.u - c * ((gamma + 1.0) / (2.0 * gamma) * star.p / l.p + (gamma - 1.0) / (2.0 * gamma)).sqrt();
            if xi <= s {
                *l
            } else {
                let ratio = star.p / l.p;
                Primitive::new(l.rho * (ratio + g1) / (ratio * g1 + 1.0), star.u, star.p)
            }
        } else {
            let c_star = c * (star.p / l.p).powf((gamma - 1.0) / (2.0 * gamma));
            if xi <= l.u - c {
                *l
            } else if xi >= star.u - c_star {
                Primitive::new(l.rho * (star.p / l.p).powf(1.0 / gamma), star.u, star.p)
            } else {
                let k = 2.0 / (gamma + 1.0) + g1 / c * (l.u - xi);
                let k = k.max(0.0);
                Primitive::new(
                    l.rho * k.powf(2.0 / (gamma - 1.0)),
                    2.0 / (gamma + 1.0) * (c + 0.5 * (gamma - 1.0) * l.u + xi),
                    l.p * k.powf(2.0 * gamma / (gamma - 1.0)),
                )
            }
        }
    } else {
        let c = r.sound(gamma);
        if star.p > r.p {
            let s = r.u + c * ((gamma + 1.0) / (2.0 * gamma) * star.p / r.p + (gamma - 1.0) / (2.0 * gamma)).sqrt();
            if xi >= s {
                *r
            } else {
                let ratio = star.p / r.p;
                Primitive::new(r.rho * (ratio + g1) / (ratio * g1 + 1.0), star.u, star.p)
            }
        } else {
            let c_star = c * (star.p / r.p).powf((gamma - 1.0) / (2.0 * gamma));
            if xi >= r.u + c {
                *r
            } else if xi <= star.u + c_star {
                Primitive::new(r.rho * (star.p / r.p).powf(1.0 / gamma), star.u, star.p)
            } else {
                let k = 2.0 / (gamma + 1.0) - g1 / c * (r.u - xi);
                let k = k.max(0.0);
                Primitive::new(
                    r.rho * k.powf(2.0 / (gamma - 1.0)),
                    2.0 / (gamma + 1.0) * (-c + 0.5 * (gamma - 1.0) * r.u + xi),
                    r.p * k.powf(2.0 * gamma / (gamma - 1.0)),
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const L: Primitive = Primitive::new(1.0, 0.0, 1.0);
    const R: Primitive = Primitive::new(0.125, 0.0, 0.1);

    #[test]
    fn sod_star_pressure() {
        let s = star_state(&L, &R, 1.4).unwrap();
        assert!((s.p - 0.30313).abs() < 1e-5);
        assert!((s.u - 0.92745).abs() < 1e-5);
    }

    #[test]
    fn early_time_recovers_data() {
        let a = sod_exact(0.2, 1e-9, 0.5, &L, &R, 1.4).unwrap();
        let b = sod_exact(0.8, 1e-9, 0.5, &L, &R, 1.4).unwrap();
        assert_eq!((a, b), (L, R));
    }

    #[test]
    fn vacuum_is_reported() {
        let l = Primitive::new(1.0, -10.0, 0.1);
        let r = Primitive::new(1.0, 10.0, 0.1);
        assert_eq!(star_state(&l, &r, 1.4), Err(Error::Vacuum));
    }
}
