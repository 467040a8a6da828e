//! Heisenberg-picture solution of Hamiltonian protection of a displaced
//! oscillator ground state, measured through a quadrature coupled to a pointer.
//!
//! In the rotated, displaced frame `q = (q'−c_q)cosθ + (p'−c_p)sinθ`,
//! `p = −(q'−c_q)sinθ + (p'−c_p)cosθ` the total Hamiltonian is
//! `½(p² + q²) + g(q + c_θ)P`, giving the linear equations
//! `d/dt (q, p, Q, P) = (p, −q − gP, g(q + c_θ), 0)`.
//! Their flow is an affine map on `(q, p, Q, P)` that depends only on
//! `(t, g, c_θ)`, never on the initial state.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::rk4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorConfig {
    pub c_q: f64,
    pub c_p: f64,
    pub theta: f64,
    pub g: f64,
}

impl OscillatorConfig {
    pub fn new(c_q: f64, c_p: f64, theta: f64, g: f64) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "g must be positive, got {g}"
            )));
        }
        if ![c_q, c_p, theta].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter(
                "c_q, c_p and theta must be finite".into(),
            ));
        }
        Ok(Self { c_q, c_p, theta, g })
    }

    /// `c_θ = c_q cosθ + c_p sinθ`.
    pub fn c_theta(&self) -> f64 {
        self.c_q * self.theta.cos() + self.c_p * self.theta.sin()
    }

    /// Primed system coordinates to the rotated, displaced frame.
    pub fn to_rotated(&self, q_prime: f64, p_prime: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let (dq, dp) = (q_prime - self.c_q, p_prime - self.c_p);
        (dq * c + dp * s, -dq * s + dp * c)
    }

    pub fn from_rotated(&self, q: f64, p: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (self.c_q + q * c - p * s, self.c_p + q * s + p * c)
    }
}

/// `x ↦ L x + s` on `(q, p, Q, P)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinePhaseMap {
    pub linear: Matrix4<f64>,
    pub shift: Vector4<f64>,
}

/// Row labels of an [`AffinePhaseMap`].
pub const COORDINATES: [&str; 4] = ["q", "p", "Q", "P"];

fn canonical_form() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j[(0, 1)] = 1.0;
    j[(1, 0)] = -1.0;
    j[(2, 3)] = 1.0;
    j[(3, 2)] = -1.0;
    j
}

impl AffinePhaseMap {
    pub fn identity() -> Self {
        Self {
            linear: Matrix4::identity(),
            shift: Vector4::zeros(),
        }
    }

    pub fn apply(&self, x: &Vector4<f64>) -> Vector4<f64> {
        self.linear * x + self.shift
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &AffinePhaseMap) -> AffinePhaseMap {
        AffinePhaseMap {
            linear: next.linear * self.linear,
            shift: next.linear * self.shift + next.shift,
        }
    }

    /// `max |Lᵀ J L − J|` for the canonical form on `(q,p) ⊕ (Q,P)`.
    pub fn symplectic_error(&self) -> f64 {
        let j = canonical_form();
        (self.linear.transpose() * j * self.linear - j).abs().max()
    }

    /// Largest absolute difference over all coefficients, shift included.
    pub fn max_difference(&self, other: &AffinePhaseMap) -> f64 {
        (self.linear - other.linear)
            .abs()
            .max()
            .max((self.shift - other.shift).abs().max())
    }

    /// Upper-left `(q, p)` block.
    pub fn system_block(&self) -> Matrix2<f64> {
        self.linear.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn to_json(&self) -> AffineMapJson {
        let mut linear = [[0.0; 4]; 4];
        for (i, row) in linear.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.linear[(i, j)];
            }
        }
        AffineMapJson {
            coordinates: COORDINATES.map(String::from),
            linear,
            shift: [self.shift[0], self.shift[1], self.shift[2], self.shift[3]],
        }
    }

    /// Moments of the image of a Gaussian with the given mean and covariance.
    pub fn push_gaussian(
        &self,
        mean: &Vector4<f64>,
        cov: &Matrix4<f64>,
    ) -> (Vector4<f64>, Matrix4<f64>) {
        (
            self.apply(mean),
            self.linear * cov * self.linear.transpose(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMapJson {
    pub coordinates: [String; 4],
    pub linear: [[f64; 4]; 4],
    pub shift: [f64; 4],
}

/// Trigonometric data of the flow at time `t`, kept separate so that periodic
/// times can be supplied exactly.
#[derive(Debug, Clone, Copy)]
struct FlowTrig {
    sin: f64,
    cos: f64,
    one_minus_cos: f64,
    /// `g t`, the coefficient of `c_θ` in the pointer shift.
    gt: f64,
    /// `g² (sin t − t)`, the coefficient of `P(0)` in `Q(t)`.
    pointer_p: f64,
}

impl FlowTrig {
    fn at(t: f64, g: f64) -> Self {
        let (sin, cos) = t.sin_cos();
        let half = (0.5 * t).sin();
        let sin_minus_t = if t.abs() < 1e-2 {
            // Series avoids cancellation for small t.
            let t2 = t * t;
            -t * t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0)))
        } else {
            sin - t
        };
        Self {
            sin,
            cos,
            one_minus_cos: 2.0 * half * half,
            gt: g * t,
            pointer_p: g * g * sin_minus_t,
        }
    }

    fn build(&self, g: f64, c_theta: f64) -> AffinePhaseMap {
        let (s, c, omc) = (self.sin, self.cos, self.one_minus_cos);
        #[rustfmt::skip]
        let linear = Matrix4::new(
            c,      s,        0.0, -g * omc,
            -s,     c,        0.0, -g * s,
            g * s,  g * omc,  1.0, self.pointer_p,
            0.0,    0.0,      0.0, 1.0,
        );
        AffinePhaseMap {
            linear,
            shift: Vector4::new(0.0, 0.0, self.gt * c_theta, 0.0),
        }
    }
}

/// Exact flow of the coupled system from time 0 to `t`:
/// `q(t) = q_t + g(cos t − 1)P`, `p(t) = p_t − g sin t·P`,
/// `Q(t) = Q + g(c_θ t + p − p_t) + g²(sin t − t)P`, `P(t) = P`.
pub fn heisenberg_map(t: f64, g: f64, c_theta: f64) -> AffinePhaseMap {
    FlowTrig::at(t, g).build(g, c_theta)
}

/// Flow over `n` full oscillator periods, `t = 2πn`, with `sin t = 0` and
/// `cos t = 1` substituted exactly.
pub fn periodic_map(periods: u32, g: f64, c_theta: f64) -> AffinePhaseMap {
    let t = 2.0 * PI * periods as f64;
    FlowTrig {
        sin: 0.0,
        cos: 1.0,
        one_minus_cos: 0.0,
        gt: g * t,
        pointer_p: -g * g * t,
    }
    .build(g, c_theta)
}

/// Flow until the end of the measurement, `t = 1/g`.
pub fn completion_map(g: f64, c_theta: f64) -> Result<AffinePhaseMap> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "g must be positive, got {g}"
        )));
    }
    let mut trig = FlowTrig::at(1.0 / g, g);
    trig.gt = 1.0;
    Ok(trig.build(g, c_theta))
}

/// Integrates the equations of motion with fixed-step RK4 and assembles the
/// affine map from the four unit initial conditions plus the inhomogeneous
/// response from the origin.
pub fn ode_oracle(t: f64, g: f64, c_theta: f64, step: f64) -> Result<AffinePhaseMap> {
    let max_step = 1e-3 * 1f64.min(1.0 / g);
    if !(step > 0.0) || step > max_step * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "ODE step {step} exceeds 1e-3·min(1, 1/g) = {max_step}"
        )));
    }
    ode_oracle_with_profile(t, |_| g, c_theta, step)
}

/// As [`ode_oracle`], with a time-dependent coupling `g(t)`.
pub fn ode_oracle_with_profile<F: Fn(f64) -> f64>(
    t: f64,
    coupling: F,
    c_theta: f64,
    step: f64,
) -> Result<AffinePhaseMap> {
    if t < 0.0 || !(step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "invalid horizon {t} or step {step}"
        )));
    }
    let homogeneous = |t: f64, x: &[f64; 4]| {
        let g = coupling(t);
        [x[1], -x[0] - g * x[3], g * x[0], 0.0]
    };
    let mut linear = Matrix4::zeros();
    for col in 0..4 {
        let mut e = [0.0; 4];
        e[col] = 1.0;
        let out = rk4(homogeneous, e, t, step);
        for row in 0..4 {
            linear[(row, col)] = out[row];
        }
    }
    let forced = |t: f64, x: &[f64; 4]| {
        let g = coupling(t);
        [x[1], -x[0] - g * x[3], g * (x[0] + c_theta), 0.0]
    };
    let s = rk4(forced, [0.0; 4], t, step);
    Ok(AffinePhaseMap {
        linear,
        shift: Vector4::new(s[0], s[1], s[2], s[3]),
    })
}

/// The three limiting regimes of the completed measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "regime", content = "n", rename_all = "kebab-case")]
pub enum RegimeCase {
    /// `g → ∞`: an impulsive von Neumann measurement of `q + c_θ`.
    VonNeumann,
    /// `g = 1/(2πn)`: the measurement spans exactly `n` oscillator periods.
    Semiprotected(u32),
    /// `g → 0`: the protected limit.
    Protected,
}

impl RegimeCase {
    /// The `g` fixed by the regime, if any.
    pub fn coupling(&self) -> Option<f64> {
        match self {
            RegimeCase::Semiprotected(n) => Some(1.0 / (2.0 * PI * *n as f64)),
            _ => None,
        }
    }

    /// Completed-measurement map in this regime.
    ///
    /// `VonNeumann`: `q' = q, p' = p − P, Q' = Q + q + c_θ`.
    /// `Semiprotected(n)`: `q' = q, p' = p, Q' = Q + c_θ − gP`, exactly.
    /// `Protected`: `(q', p')` freely rotated by `1/g`, `Q' = Q + c_θ`; `g`
    /// only sets the rotation angle.
    pub fn limit_map(&self, g: f64, c_theta: f64) -> Result<AffinePhaseMap> {
        match *self {
            RegimeCase::VonNeumann => {
                #[rustfmt::skip]
                let linear = Matrix4::new(
                    1.0, 0.0, 0.0, 0.0,
                    0.0, 1.0, 0.0, -1.0,
                    1.0, 0.0, 1.0, 0.0,
                    0.0, 0.0, 0.0, 1.0,
                );
                Ok(AffinePhaseMap {
                    linear,
                    shift: Vector4::new(0.0, 0.0, c_theta, 0.0),
                })
            }
            RegimeCase::Semiprotected(n) => {
                if n == 0 {
                    return Err(Error::InvalidParameter(
                        "semiprotected n must be >= 1".into(),
                    ));
                }
                let g = 1.0 / (2.0 * PI * n as f64);
                let mut m = periodic_map(n, g, c_theta);
                // g·2πn ≡ 1 in this regime.
                m.shift[2] = c_theta;
                m.linear[(2, 3)] = -g;
                Ok(m)
            }
            RegimeCase::Protected => {
                if !(g > 0.0 && g.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "g must be positive, got {g}"
                    )));
                }
                let (s, c) = (1.0 / g).sin_cos();
                #[rustfmt::skip]
                let linear = Matrix4::new(
                    c,   s,   0.0, 0.0,
                    -s,  c,   0.0, 0.0,
                    0.0, 0.0, 1.0, 0.0,
                    0.0, 0.0, 0.0, 1.0,
                );
                Ok(AffinePhaseMap {
                    linear,
                    shift: Vector4::new(0.0, 0.0, c_theta, 0.0),
                })
            }
        }
    }
}

/// The exact map at the full-period time `t = 2πn` nearest `1/g`, compared
/// with the protected-limit map. `sin(1/g)` has no limit as `g → 0`, so the
/// period subsequence is the representative used for the limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtectedLimitReport {
    pub periods: u32,
    pub time: f64,
    pub exact: AffinePhaseMap,
    pub limit: AffinePhaseMap,
    /// Largest coefficient difference between `exact` and `limit`.
    pub residual: f64,
}

pub fn protected_limit_report(g: f64, c_theta: f64) -> Result<ProtectedLimitReport> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "g must be positive, got {g}"
        )));
    }
    let periods = ((1.0 / g) / (2.0 * PI)).round().max(1.0) as u32;
    let exact = periodic_map(periods, g, c_theta);
    // Along t = 2πn the free rotation is the identity.
    let mut limit = RegimeCase::Protected.limit_map(g, c_theta)?;
    limit
        .linear
        .fixed_view_mut::<2, 2>(0, 0)
        .copy_from(&Matrix2::identity());
    Ok(ProtectedLimitReport {
        periods,
        time: 2.0 * PI * periods as f64,
        residual: exact.max_difference(&limit),
        exact,
        limit,
    })
}

/// Gaussian preparation of the pointer `(Q, P)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerPrep {
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    pub cov: f64,
}

/// Tolerance on the uncertainty bound `det Σ ≥ 1/4`.
pub const UNCERTAINTY_TOL: f64 = 1e-12;

impl PointerPrep {
    pub fn new(mean_q: f64, mean_p: f64, var_q: f64, var_p: f64, cov: f64) -> Result<Self> {
        let prep = Self {
            mean_q,
            mean_p,
            var_q,
            var_p,
            cov,
        };
        prep.validate()?;
        Ok(prep)
    }

    pub fn validate(&self) -> Result<()> {
        let det = self.var_q * self.var_p - self.cov * self.cov;
        if !(self.var_q > 0.0 && self.var_p > 0.0) || det < 0.25 - UNCERTAINTY_TOL {
            return Err(Error::UncertaintyViolation(det));
        }
        Ok(())
    }

    /// Minimum-uncertainty state with `Var(Q) = var_q`, uncorrelated.
    pub fn minimum_uncertainty(mean_q: f64, mean_p: f64, var_q: f64) -> Result<Self> {
        Self::new(mean_q, mean_p, var_q, 0.25 / var_q, 0.0)
    }

    /// Minimum-uncertainty state sharply peaked in `Q − gP`, with
    /// `Var(Q − gP) = variance`. Obtained from the uncorrelated state in the
    /// sheared pair `(Q − gP, P)`.
    pub fn sharp_in_q_minus_gp(g: f64, variance: f64) -> Result<Self> {
        let var_p = 0.25 / variance;
        Self::new(0.0, 0.0, variance + g * g * var_p, var_p, g * var_p)
    }

    pub fn covariance(&self) -> Matrix2<f64> {
        Matrix2::new(self.var_q, self.cov, self.cov, self.var_p)
    }

    pub fn mean(&self) -> Vector2<f64> {
        Vector2::new(self.mean_q, self.mean_p)
    }
}

/// Mean and variance of the final pointer position `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadingDistribution {
    pub mean: f64,
    pub variance: f64,
}

/// Moments of the ground state in the rotated frame: mean 0, covariance I/2.
pub const SYSTEM_VARIANCE: f64 = 0.5;

/// Joint Gaussian moments of system (ground state) and pointer.
pub fn joint_moments(prep: &PointerPrep) -> (Vector4<f64>, Matrix4<f64>) {
    let mean = Vector4::new(0.0, 0.0, prep.mean_q, prep.mean_p);
    let mut cov = Matrix4::zeros();
    cov[(0, 0)] = SYSTEM_VARIANCE;
    cov[(1, 1)] = SYSTEM_VARIANCE;
    cov.fixed_view_mut::<2, 2>(2, 2)
        .copy_from(&prep.covariance());
    (mean, cov)
}

/// Propagates the Gaussian preparation through `map` and reads off `Q`.
pub fn reading_through(map: &AffinePhaseMap, prep: &PointerPrep) -> Result<ReadingDistribution> {
    prep.validate()?;
    let (mean, cov) = joint_moments(prep);
    let (m, c) = map.push_gaussian(&mean, &cov);
    Ok(ReadingDistribution {
        mean: m[2],
        variance: c[(2, 2)],
    })
}

/// Reading distribution of the completed measurement in a limiting regime.
pub fn pointer_reading_distribution(
    config: &OscillatorConfig,
    regime: RegimeCase,
    prep: &PointerPrep,
) -> Result<ReadingDistribution> {
    let map = regime.limit_map(config.g, config.c_theta())?;
    reading_through(&map, prep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_time_is_identity() {
        let m = heisenberg_map(0.0, 0.7, 1.3);
        assert_eq!(m.linear, Matrix4::identity());
        assert_eq!(m.shift, Vector4::zeros());
    }

    #[test]
    fn full_period_returns_system() {
        for &g in &[0.1, 1.0, 3.0] {
            let m = heisenberg_map(2.0 * PI, g, 0.8);
            let sys = m.system_block();
            assert!((sys - Matrix2::identity()).abs().max() < 1e-15);
            assert!(m.linear[(0, 3)].abs() < 1e-14 && m.linear[(1, 3)].abs() < 1e-14);
            // Q shift 2πg·c_θ and P coefficient −2πg².
            assert!((m.shift[2] - 2.0 * PI * g * 0.8).abs() < 1e-14);
            assert!((m.linear[(2, 3)] + 2.0 * PI * g * g).abs() < 1e-13);
        }
    }

    #[test]
    fn semiprotected_single_period() {
        let g = 1.0 / (2.0 * PI);
        let m = RegimeCase::Semiprotected(1).limit_map(g, 0.42).unwrap();
        assert_eq!(m.system_block(), Matrix2::identity());
        assert_eq!(m.shift[2], 0.42);
        assert_eq!(m.linear[(2, 3)], -g);
        assert_eq!(m.linear[(2, 0)], 0.0);
        assert_eq!(m.linear[(2, 1)], 0.0);
        // Agrees with the generic closed form up to rounding.
        assert!(m.max_difference(&heisenberg_map(1.0 / g, g, 0.42)) < 1e-14);
    }

    #[test]
    fn large_coupling_approaches_von_neumann() {
        let g = 1e6;
        let m = completion_map(g, 0.3).unwrap();
        let vn = RegimeCase::VonNeumann.limit_map(g, 0.3).unwrap();
        assert!(m.max_difference(&vn) < 1e-4);
    }

    #[test]
    fn small_coupling_approaches_protected_limit() {
        let report = protected_limit_report(1e-4, 0.3).unwrap();
        assert!(report.residual < 10.0 * 1e-4, "{}", report.residual);
        let coarser = protected_limit_report(1e-3, 0.3).unwrap();
        assert!(report.residual < coarser.residual);
    }

    #[test]
    fn free_oscillator_rotates() {
        let m = ode_oracle(1.3, 1e-9, 0.0, 1e-3).unwrap();
        let (s, c) = 1.3f64.sin_cos();
        assert!((m.linear[(0, 0)] - c).abs() < 1e-12 && (m.linear[(0, 1)] - s).abs() < 1e-12);
        assert!((m.linear[(2, 2)] - 1.0).abs() < 1e-12 && (m.linear[(3, 3)] - 1.0).abs() < 1e-12);
        let quarter = ode_oracle(PI / 2.0, 1e-12, 0.0, 1e-3).unwrap();
        // q ↦ p(0), p ↦ −q(0).
        assert!((quarter.linear[(0, 1)] - 1.0).abs() < 1e-12);
        assert!((quarter.linear[(1, 0)] + 1.0).abs() < 1e-12);
        assert!(quarter.linear[(0, 0)].abs() < 1e-12);
    }

    #[test]
    fn ode_oracle_matches_closed_form() {
        let g = 0.05;
        let ode = ode_oracle(1.0 / g, g, 0.7, 1e-3).unwrap();
        let exact = completion_map(g, 0.7).unwrap();
        assert!(ode.max_difference(&exact) < 1e-8);
    }

    #[test]
    fn ode_oracle_rejects_large_step() {
        assert!(ode_oracle(1.0, 5.0, 0.0, 1e-3).is_err());
        assert!(ode_oracle(1.0, 0.5, 0.0, 1e-3).is_ok());
    }

    #[test]
    fn smooth_switching_keeps_reading_near_c_theta() {
        // Sine-squared ramp of the coupling over the whole interval, with the
        // same total integral as a constant g over 1/g.
        let g = 0.01;
        let t_end = 1.0 / g;
        let profile = |t: f64| 2.0 * g * (PI * t / t_end).sin().powi(2);
        let m = ode_oracle_with_profile(t_end, profile, 0.9, 1e-2).unwrap();
        assert!((m.shift[2] - 0.9).abs() < 1e-3);
        assert!(m.linear[(2, 0)].abs() < 0.05 && m.linear[(2, 1)].abs() < 0.05);
    }

    #[test]
    fn reading_distributions() {
        let cfg = OscillatorConfig::new(0.4, -0.2, 0.6, 1e-3).unwrap();
        let ct = cfg.c_theta();
        let sharp = PointerPrep::minimum_uncertainty(0.0, 0.0, 0.01).unwrap();
        let prot = pointer_reading_distribution(&cfg, RegimeCase::Protected, &sharp).unwrap();
        assert_eq!(prot.mean, ct);
        assert!((prot.variance - 0.01).abs() < 1e-15);

        let semi = RegimeCase::Semiprotected(1);
        let g = semi.coupling().unwrap();
        let prep = PointerPrep::sharp_in_q_minus_gp(g, 1e-4).unwrap();
        let r = pointer_reading_distribution(&cfg, semi, &prep).unwrap();
        assert_eq!(r.mean, ct);
        assert!((r.variance - 1e-4).abs() < 1e-12);

        let vn = pointer_reading_distribution(&cfg, RegimeCase::VonNeumann, &sharp).unwrap();
        assert!((vn.variance - (0.01 + SYSTEM_VARIANCE)).abs() < 1e-15);
    }

    #[test]
    fn uncertainty_bound_enforced() {
        assert!(matches!(
            PointerPrep::new(0.0, 0.0, 0.1, 0.1, 0.0),
            Err(Error::UncertaintyViolation(_))
        ));
        let cfg = OscillatorConfig::new(0.0, 0.0, 0.0, 1.0).unwrap();
        let bad = PointerPrep {
            mean_q: 0.0,
            mean_p: 0.0,
            var_q: 0.2,
            var_p: 1.0,
            cov: 0.0,
        };
        assert!(pointer_reading_distribution(&cfg, RegimeCase::Protected, &bad).is_err());
    }

    #[test]
    fn frame_round_trip() {
        let cfg = OscillatorConfig::new(0.3, -1.1, 2.2, 1.0).unwrap();
        let (q, p) = cfg.to_rotated(0.9, 0.5);
        let (a, b) = cfg.from_rotated(q, p);
        assert!((a - 0.9).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
        // a_θ = c_θ + q in the rotated frame.
        let a_theta = 0.9 * 2.2f64.cos() + 0.5 * 2.2f64.sin();
        assert!((a_theta - (cfg.c_theta() + q)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn flow_is_symplectic(t in 0.0f64..50.0, g in 1e-3f64..10.0, c in -2.0f64..2.0) {
            prop_assert!(heisenberg_map(t, g, c).symplectic_error() < 1e-10);
        }

        #[test]
        fn flow_composes(t1 in 0.0f64..20.0, t2 in 0.0f64..20.0, g in 1e-3f64..5.0, c in -2.0f64..2.0) {
            let composed = heisenberg_map(t1, g, c).then(&heisenberg_map(t2, g, c));
            let direct = heisenberg_map(t1 + t2, g, c);
            prop_assert!(composed.max_difference(&direct) < 1e-10 * (1.0 + g * g * (t1 + t2)));
        }
    }
}
