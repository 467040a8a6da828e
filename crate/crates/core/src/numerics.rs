//! Adaptive Gauss–Kronrod quadrature and fixed-step Runge–Kutta integration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights for the odd-indexed abscissae.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of a converged quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Globally adaptive G7–K15 quadrature on a finite interval.
///
/// The interval is first split into `initial_intervals` equal panels so that
/// features narrower than the interval are not missed by the first rule.
#[derive(Debug, Clone, Copy)]
pub struct GaussKronrod {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    pub initial_intervals: usize,
}

impl Default for GaussKronrod {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-12,
            max_intervals: 20_000,
            initial_intervals: 1,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

impl GaussKronrod {
    pub fn with_tolerance(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn initial_intervals(mut self, n: usize) -> Self {
        self.initial_intervals = n.max(1);
        self
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Integral> {
        if !(a.is_finite() && b.is_finite()) || b < a {
            return Err(Error::InvalidParameter(format!(
                "quadrature interval [{a}, {b}] must be finite and ordered"
            )));
        }
        if a == b {
            return Ok(Integral {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            });
        }
        let n0 = self.initial_intervals;
        let width = (b - a) / n0 as f64;
        let mut heap = BinaryHeap::with_capacity(2 * n0);
        for k in 0..n0 {
            let lo = a + k as f64 * width;
            let hi = if k + 1 == n0 { b } else { lo + width };
            heap.push(kronrod_panel(&f, lo, hi));
        }
        let mut evaluations = 15 * n0;
        loop {
            let (value, error) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
            if error <= self.abs_tol.max(self.rel_tol * value.abs()) {
                return Ok(Integral {
                    value,
                    error,
                    evaluations,
                });
            }
            if heap.len() >= self.max_intervals {
                return Err(Error::Quadrature(format!(
                    "error estimate {error:.3e} above tolerance after {} panels",
                    heap.len()
                )));
            }
            let worst = heap.pop().expect("non-empty panel set");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                return Err(Error::Quadrature(format!(
                    "panel [{}, {}] cannot be subdivided further",
                    worst.a, worst.b
                )));
            }
            heap.push(kronrod_panel(&f, worst.a, mid));
            heap.push(kronrod_panel(&f, mid, worst.b));
            evaluations += 30;
        }
    }
}

/// Classical fourth-order Runge–Kutta for a linear system `dx/dt = f(t, x)`.
///
/// Integrates from `t = 0` to `t_end` with `ceil(t_end / max_step)` equal steps.
pub fn rk4<const N: usize, F>(f: F, x0: [f64; N], t_end: f64, max_step: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if t_end <= 0.0 {
        return x0;
    }
    let steps = (t_end / max_step).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let axpy = |x: &[f64; N], k: &[f64; N], s: f64| {
        let mut out = *x;
        for i in 0..N {
            out[i] += s * k[i];
        }
        out
    };
    let mut x = x0;
    for n in 0..steps {
        let t = n as f64 * h;
        let k1 = f(t, &x);
        let k2 = f(t + 0.5 * h, &axpy(&x, &k1, 0.5 * h));
        let k3 = f(t + 0.5 * h, &axpy(&x, &k2, 0.5 * h));
        let k4 = f(t + h, &axpy(&x, &k3, h));
        for i in 0..N {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let r = GaussKronrod::default()
            .integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0)
            .unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0) + 3.0;
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn narrow_gaussian_needs_initial_panels() {
        let s: f64 = 1e-3;
        let f = |x: f64| (-(x - 0.123).powi(2) / (2.0 * s * s)).exp();
        let exact = s * (2.0 * std::f64::consts::PI).sqrt();
        let r = GaussKronrod::with_tolerance(1e-12)
            .initial_intervals(2000)
            .integrate(f, -1.0, 1.0)
            .unwrap();
        assert!((r.value - exact).abs() < 1e-11);
    }

    #[test]
    fn reports_non_convergence() {
        let q = GaussKronrod {
            max_intervals: 4,
            abs_tol: 1e-15,
            ..GaussKronrod::default()
        };
        assert!(matches!(
            q.integrate(|x: f64| (1.0 / x.abs().max(1e-300)).sqrt(), -1.0, 1.0),
            Err(Error::Quadrature(_))
        ));
    }

    #[test]
    fn rk4_matches_exponential() {
        let x = rk4(|_, x: &[f64; 1]| [-x[0]], [1.0], 2.0, 1e-3);
        assert!((x[0] - (-2.0f64).exp()).abs() < 1e-13);
    }
}
