//! Real wavepacket ansatz `U₀` built from an interface mode, and its divergence residual `b`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::mode::InterfaceMode;
use crate::profile::{DielectricProfile, Side};
use crate::quadrature::{composite_gauss, composite_gauss_split, panels_for};

type EnvFn = dyn Fn(f64) -> (f64, f64) + Send + Sync;

/// Envelope `𝒜` with its derivative.
#[derive(Clone)]
pub struct Envelope {
    label: String,
    f: Arc<EnvFn>,
    zero: bool,
}

impl fmt::Debug for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Envelope({})", self.label)
    }
}

impl Envelope {
    /// `𝒜(y) = exp(−c y²)`.
    pub fn gaussian(c: f64) -> Self {
        Self {
            label: format!("exp(-{c} y^2)"),
            f: Arc::new(move |y| {
                let e = (-c * y * y).exp();
                (e, -2.0 * c * y * e)
            }),
            zero: false,
        }
    }

    pub fn constant(a: f64) -> Self {
        Self { label: format!("{a}"), f: Arc::new(move |_| (a, 0.0)), zero: a == 0.0 }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `f` returns `(𝒜(y), 𝒜'(y))`.
    pub fn from_fn(label: impl Into<String>, f: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        Self { label: label.into(), f: Arc::new(f), zero: false }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn value(&self, y: f64) -> f64 {
        (self.f)(y).0
    }

    pub fn derivative(&self, y: f64) -> f64 {
        (self.f)(y).1
    }

    pub fn eval(&self, y: f64) -> (f64, f64) {
        (self.f)(y)
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum AnsatzError {
    #[error("eps must lie in (0, 1), got {0}")]
    Eps(f64),
    #[error("quadrature self-check failed for {norm}: relative change {change:.3e} when halving resolution")]
    Accuracy { norm: &'static str, change: f64 },
    #[error("domain truncates the envelope: tail mass fraction {0:.3e} exceeds 1e-8")]
    TruncatedDomain(f64),
    #[error("could not find a window holding the envelope; is it square integrable?")]
    Unbounded,
    #[error("invalid domain {0:?}")]
    Domain([f64; 4]),
}

/// Samples on one side of the interface, uniform spacing.
#[derive(Debug, Clone)]
struct SideSamples {
    x0: f64,
    h: f64,
    w1: Vec<f64>,
    w2: Vec<f64>,
}

impl SideSamples {
    fn x_end(&self) -> f64 {
        self.x0 + self.h * (self.w1.len() - 1) as f64
    }

    /// Cubic Lagrange interpolation through four neighbouring samples.
    fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.w1.len();
        let tol = 1e-12 * self.h;
        if n == 0 || x < self.x0 - tol || x > self.x_end() + tol {
            return (0.0, 0.0);
        }
        let t = ((x - self.x0) / self.h).clamp(0.0, (n - 1) as f64);
        if n < 4 {
            let j = (t.floor() as usize).min(n.saturating_sub(2));
            if n == 1 {
                return (self.w1[0], self.w2[0]);
            }
            let s = t - j as f64;
            return (
                (1.0 - s) * self.w1[j] + s * self.w1[j + 1],
                (1.0 - s) * self.w2[j] + s * self.w2[j + 1],
            );
        }
        let j = (t.floor() as usize).clamp(1, n - 3) - 1;
        let s = t - j as f64;
        let l = [
            -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
            s * (s - 2.0) * (s - 3.0) / 2.0,
            -s * (s - 1.0) * (s - 3.0) / 2.0,
            s * (s - 1.0) * (s - 2.0) / 6.0,
        ];
        let mut a = 0.0;
        let mut b = 0.0;
        for k in 0..4 {
            a += l[k] * self.w1[j + k];
            b += l[k] * self.w2[j + k];
        }
        (a, b)
    }
}

/// `U₀` and `b` for a fixed mode, envelope and `ε`. Immutable and shareable.
#[derive(Debug, Clone)]
pub struct AnsatzField {
    mode: Arc<InterfaceMode>,
    profile: DielectricProfile,
    envelope: Envelope,
    eps: f64,
    minus: SideSamples,
    plus: SideSamples,
}

impl AnsatzField {
    pub fn new(mode: Arc<InterfaceMode>, profile: DielectricProfile, envelope: Envelope, eps: f64) -> Result<Self, AnsatzError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(AnsatzError::Eps(eps));
        }
        let g = &mode.grid;
        let i0 = g.interface_index();
        let mut mw1 = mode.w1[..i0].to_vec();
        let mut mw2 = mode.w2_imag[..i0].to_vec();
        mw1.push(mode.w1_left);
        mw2.push(mode.w2_imag_left);
        let minus = SideSamples { x0: g.x(0), h: g.spacing, w1: mw1, w2: mw2 };
        let plus = SideSamples {
            x0: 0.0,
            h: g.spacing,
            w1: mode.w1[i0..].to_vec(),
            w2: mode.w2_imag[i0..].to_vec(),
        };
        Ok(Self { mode, profile, envelope, eps, minus, plus })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn mode(&self) -> &InterfaceMode {
        &self.mode
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    pub fn profile(&self) -> &DielectricProfile {
        &self.profile
    }

    /// Same mode and envelope at another `ε`.
    pub fn with_eps(&self, eps: f64) -> Result<Self, AnsatzError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(AnsatzError::Eps(eps));
        }
        Ok(Self { eps, ..self.clone() })
    }

    /// `(w₁, w̃₂)` at `x1` taken from the given side's samples.
    pub fn mode_on(&self, side: Side, x1: f64) -> (f64, f64) {
        match side {
            Side::Minus => self.minus.eval(x1),
            Side::Plus => self.plus.eval(x1),
        }
    }

    pub fn eval_u0_on(&self, side: Side, x: [f64; 2]) -> [f64; 2] {
        if self.envelope.is_zero() {
            return [0.0, 0.0];
        }
        let (w1, w2) = self.mode_on(side, x[0]);
        let a = self.envelope.value(self.eps * x[1]);
        let (s, c) = (self.mode.k0 * x[1]).sin_cos();
        let f = 2.0 * self.eps * a;
        [f * w1 * c, -f * w2 * s]
    }

    pub fn eval_b_on(&self, side: Side, x: [f64; 2]) -> f64 {
        if self.envelope.is_zero() {
            return 0.0;
        }
        let (_, w2) = self.mode_on(side, x[0]);
        let da = self.envelope.derivative(self.eps * x[1]);
        let e1 = self.profile.eps1_on(side).value(x[0]);
        let s = (self.mode.k0 * x[1]).sin();
        -2.0 * self.eps * self.eps * e1 * da * w2 * s
    }

    pub fn eval_u0(&self, x: [f64; 2]) -> [f64; 2] {
        self.eval_u0_on(Side::of(x[0]), x)
    }

    pub fn eval_b(&self, x: [f64; 2]) -> f64 {
        self.eval_b_on(Side::of(x[0]), x)
    }

    /// A domain holding the whole packet: the mode grid in `x1`, and an
    /// `x2` window outside which `|𝒜|` and `|𝒜'|` fall below `1e-10` of their peak.
    pub fn covering_domain(&self) -> Result<NormDomain, AnsatzError> {
        let g = &self.mode.grid;
        let x1 = (g.left, g.right);
        if self.envelope.is_zero() {
            return Ok(NormDomain { x1, x2: (-1.0, 1.0) });
        }
        let env = |y: f64| {
            let (a, d) = self.envelope.eval(y);
            a.abs().max(d.abs())
        };
        let mut y = 1e-6;
        let peak_on = |lo: f64, hi: f64| (0..=256).map(|i| env(lo + (hi - lo) * i as f64 / 256.0)).fold(0.0, f64::max);
        while y < 1e12 {
            let inner = peak_on(-y, y);
            let outer = peak_on(y, 4.0 * y).max(peak_on(-4.0 * y, -y));
            if inner > 0.0 && outer <= 1e-10 * inner {
                let half = y / self.eps;
                return Ok(NormDomain { x1, x2: (-half, half) });
            }
            y *= 2.0;
        }
        Err(AnsatzError::Unbounded)
    }
}

/// Rectangle `x1 × x2` for norm quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormDomain {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnsatzNorms {
    #[serde(rename = "U0_L2")]
    pub u0_l2: f64,
    #[serde(rename = "U0_L4")]
    pub u0_l4: f64,
    #[serde(rename = "b_L2")]
    pub b_l2: f64,
    #[serde(rename = "b_L1log")]
    pub b_l1log: f64,
}

struct X1Point {
    w: f64,
    x: f64,
    w1: f64,
    w2: f64,
    e1: f64,
}

fn x1_points(field: &AnsatzField, lo: f64, hi: f64, res: f64) -> Vec<X1Point> {
    let mut pieces = Vec::new();
    if lo < 0.0 {
        pieces.push((Side::Minus, lo, hi.min(0.0)));
    }
    if hi > 0.0 {
        pieces.push((Side::Plus, lo.max(0.0), hi));
    }
    let mut out = Vec::new();
    for (side, a, b) in pieces {
        // sign changes of w̃₂ are kinks of |w̃₂|
        let samples = match side {
            Side::Minus => &field.minus,
            Side::Plus => &field.plus,
        };
        let breaks: Vec<f64> = samples
            .w2
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] * w[1] < 0.0)
            .map(|(i, w)| samples.x0 + samples.h * (i as f64 + w[0] / (w[0] - w[1])))
            .collect();
        for (x, w) in composite_gauss_split(a, b, &breaks, res) {
            let (w1, w2) = field.mode_on(side, x);
            out.push(X1Point { w, x, w1, w2, e1: field.profile.eps1_on(side).value(x) });
        }
    }
    out
}

fn norms_at(field: &AnsatzField, d: &NormDomain, res: f64) -> AnsatzNorms {
    let eps = field.eps;
    let k0 = field.mode.k0;
    let xs = x1_points(field, d.x1.0, d.x1.1, res);
    // zeros of sin(k0 x2) are kinks of |sin|
    let period = std::f64::consts::PI / k0;
    let breaks: Vec<f64> = ((d.x2.0 / period).ceil() as i64..=(d.x2.1 / period).floor() as i64)
        .map(|j| j as f64 * period)
        .collect();
    let ys: Vec<(f64, f64, f64, f64, f64)> = composite_gauss_split(d.x2.0, d.x2.1, &breaks, res)
        .into_iter()
        .map(|(y, w)| {
            let (a, da) = field.envelope.eval(eps * y);
            (w, y, a, da, (k0 * y).sin())
        })
        .collect();

    // separable parts
    let (mut p11, mut p22, mut q1111, mut q1122, mut q2222, mut pb) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for p in &xs {
        let (a, b) = (p.w1 * p.w1, p.w2 * p.w2);
        p11 += p.w * a;
        p22 += p.w * b;
        q1111 += p.w * a * a;
        q1122 += p.w * a * b;
        q2222 += p.w * b * b;
        pb += p.w * p.e1 * p.e1 * b;
    }
    let (mut acc, mut ass, mut acccc, mut accss, mut assss, mut dss) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for &(w, y, a, da, s) in &ys {
        let c = (k0 * y).cos();
        let a2 = a * a;
        acc += w * a2 * c * c;
        ass += w * a2 * s * s;
        acccc += w * a2 * a2 * c.powi(4);
        accss += w * a2 * a2 * c * c * s * s;
        assss += w * a2 * a2 * s.powi(4);
        dss += w * da * da * s * s;
    }
    let e2 = eps * eps;
    let u0_l2 = (4.0 * e2 * (p11 * acc + p22 * ass)).max(0.0).sqrt();
    let u0_l4 = (16.0 * e2 * e2 * (q1111 * acccc + 2.0 * q1122 * accss + q2222 * assss)).max(0.0).powf(0.25);
    let b_l2 = (4.0 * e2 * e2 * pb * dss).max(0.0).sqrt();

    let mut l1 = 0.0;
    for p in &xs {
        let fx = (p.e1 * p.w2).abs() * p.w;
        if fx == 0.0 {
            continue;
        }
        for &(w, y, _, da, s) in &ys {
            let g = (da * s).abs();
            if g != 0.0 {
                l1 += fx * w * g * (2.0 + (p.x * p.x + y * y).sqrt()).ln();
            }
        }
    }
    AnsatzNorms { u0_l2, u0_l4, b_l2, b_l1log: 2.0 * e2 * l1 }
}

fn check_domain(d: &NormDomain) -> Result<(), AnsatzError> {
    let ok = [d.x1.0, d.x1.1, d.x2.0, d.x2.1].iter().all(|v| v.is_finite()) && d.x1.0 < d.x1.1 && d.x2.0 < d.x2.1;
    if ok {
        Ok(())
    } else {
        Err(AnsatzError::Domain([d.x1.0, d.x1.1, d.x2.0, d.x2.1]))
    }
}

/// Fraction of `∫𝒜(εx2)² dx2` lying outside `x2` range of the domain.
pub fn envelope_tail_fraction(field: &AnsatzField, d: &NormDomain, res: f64) -> f64 {
    let eps = field.eps;
    let mass = |a: f64, b: f64| -> f64 {
        composite_gauss(a, b, panels_for(b - a, res))
            .into_iter()
            .map(|(y, w)| w * field.envelope.value(eps * y).powi(2))
            .sum()
    };
    let width = d.x2.1 - d.x2.0;
    let inside = mass(d.x2.0, d.x2.1);
    let total = inside + mass(d.x2.0 - 3.0 * width, d.x2.0) + mass(d.x2.1, d.x2.1 + 3.0 * width);
    if total == 0.0 {
        0.0
    } else {
        (total - inside) / total
    }
}

/// The four norms, with the tail-mass precondition and a resolution self-check.
///
/// `resolution` is the number of Gauss panels per unit length.
pub fn norms(field: &AnsatzField, domain: &NormDomain, resolution: f64) -> Result<AnsatzNorms, AnsatzError> {
    check_domain(domain)?;
    let tail = envelope_tail_fraction(field, domain, resolution);
    if tail > 1e-8 {
        return Err(AnsatzError::TruncatedDomain(tail));
    }
    let fine = norms_at(field, domain, resolution);
    let coarse = norms_at(field, domain, 0.5 * resolution);
    let pairs = [
        ("U0_L2", fine.u0_l2, coarse.u0_l2),
        ("U0_L4", fine.u0_l4, coarse.u0_l4),
        ("b_L2", fine.b_l2, coarse.b_l2),
        ("b_L1log", fine.b_l1log, coarse.b_l1log),
    ];
    for (norm, f, c) in pairs {
        if f != 0.0 {
            let change = (f - c).abs() / f.abs();
            if change > 1e-4 {
                return Err(AnsatzError::Accuracy { norm, change });
            }
        }
    }
    Ok(fine)
}

/// Norms restricted to a domain that may cut the packet (no tail or self-check).
pub fn norms_on(field: &AnsatzField, domain: &NormDomain, resolution: f64) -> Result<AnsatzNorms, AnsatzError> {
    check_domain(domain)?;
    Ok(norms_at(field, domain, resolution))
}

/// Default density of Gauss panels per unit length.
pub const DEFAULT_RESOLUTION: f64 = 16.0;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::mode::fundamental_mode;
    use std::sync::OnceLock;

    fn mode() -> Arc<InterfaceMode> {
        static M: OnceLock<Arc<InterfaceMode>> = OnceLock::new();
        M.get_or_init(|| {
            let g = Grid1D::new(-20.0, 20.0, 0.005).unwrap();
            Arc::new(fundamental_mode(&DielectricProfile::fig1(), 3.0, &g).unwrap().unwrap())
        })
        .clone()
    }

    fn field(env: Envelope, eps: f64) -> AnsatzField {
        AnsatzField::new(mode(), DielectricProfile::fig1(), env, eps).unwrap()
    }

    #[test]
    fn zero_envelope_gives_zero_everything() {
        let f = field(Envelope::zero(), 3e-4);
        assert_eq!(f.eval_u0([0.3, 1.1]), [0.0, 0.0]);
        assert_eq!(f.eval_b([-0.3, 1.1]), 0.0);
        let d = f.covering_domain().unwrap();
        let n = norms(&f, &d, 8.0).unwrap();
        assert_eq!((n.u0_l2, n.u0_l4, n.b_l2, n.b_l1log), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn carrier_zero_kills_second_component() {
        let f = field(Envelope::gaussian(5e6), 3e-4);
        let x2 = std::f64::consts::PI / f.mode().k0;
        // sin(k0 x2) is not exactly zero in floating point; x2 = 0 is
        assert_eq!(f.eval_u0([0.7, 0.0])[1], 0.0);
        assert!(f.eval_u0([0.7, x2])[1].abs() < 1e-15);
    }

    #[test]
    fn constant_envelope_has_no_residual() {
        let f = field(Envelope::constant(1.0), 3e-4);
        for &x in &[[-1.0, 0.3], [0.0, 2.0], [2.0, -5.0]] {
            assert_eq!(f.eval_b(x), 0.0);
        }
    }

    #[test]
    fn gaussian_residual_vanishes_on_axis() {
        let f = field(Envelope::gaussian(5e6), 3e-4);
        for &x1 in &[-3.0, -0.01, 0.0, 0.5, 4.0] {
            assert_eq!(f.eval_b([x1, 0.0]), 0.0);
        }
    }

    #[test]
    fn normal_displacement_is_continuous() {
        let f = field(Envelope::gaussian(5e6), 3e-4);
        let m = f.eval_u0_on(Side::Minus, [0.0, 0.0])[0];
        let p = f.eval_u0_on(Side::Plus, [0.0, 0.0])[0];
        let (em, ep) = (1.0, 2.0);
        assert!((em * m - ep * p).abs() <= 1e-3 * (em * m).abs(), "{m} {p}");
        let m2 = f.eval_u0_on(Side::Minus, [0.0, 0.4])[1];
        let p2 = f.eval_u0_on(Side::Plus, [0.0, 0.4])[1];
        assert!((m2 - p2).abs() <= 1e-3 * m2.abs());
    }

    #[test]
    fn residual_matches_finite_difference_divergence() {
        let eps = 0.05;
        let f = field(Envelope::gaussian(1.0), eps);
        let d = |x: [f64; 2]| {
            let e1 = f.profile().eps1(x[0]);
            let u = f.eval_u0(x);
            [e1 * u[0], e1 * u[1]]
        };
        let mut errs = Vec::new();
        for &h in &[0.04, 0.02] {
            let mut worst = 0.0f64;
            for &x in &[[-1.3, 0.7], [-0.5, 2.1], [0.6, -1.4], [2.0, 3.3]] {
                let div = (d([x[0] + h, x[1]])[0] - d([x[0] - h, x[1]])[0]) / (2.0 * h)
                    + (d([x[0], x[1] + h])[1] - d([x[0], x[1] - h])[1]) / (2.0 * h);
                worst = worst.max((div - f.eval_b(x)).abs());
            }
            errs.push(worst);
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.7, "errors {errs:?}");
    }

    #[test]
    fn norm_ratios_under_halving_eps() {
        let f1 = field(Envelope::gaussian(5e6), 4e-4);
        let f2 = f1.with_eps(2e-4).unwrap();
        let n1 = norms(&f1, &f1.covering_domain().unwrap(), DEFAULT_RESOLUTION).unwrap();
        let n2 = norms(&f2, &f2.covering_domain().unwrap(), DEFAULT_RESOLUTION).unwrap();
        let r = n2.u0_l2 / n1.u0_l2;
        assert!((r / 0.5f64.sqrt() - 1.0).abs() < 0.02, "{r}");
        let r = n2.b_l2 / n1.b_l2;
        assert!((r / 0.5f64.powf(1.5) - 1.0).abs() < 0.02, "{r}");
    }

    #[test]
    fn truncated_domain_is_rejected() {
        let f = field(Envelope::gaussian(5e6), 1e-4);
        let d = NormDomain { x1: (-6.0, 6.0), x2: (-6.0, 6.0) };
        assert!(matches!(norms(&f, &d, 8.0), Err(AnsatzError::TruncatedDomain(_))));
        assert!(norms_on(&f, &d, 8.0).is_ok());
    }

    #[test]
    fn coarse_resolution_fails_self_check() {
        let f = field(Envelope::gaussian(5e6), 1e-3);
        let d = f.covering_domain().unwrap();
        assert!(matches!(norms(&f, &d, 0.5), Err(AnsatzError::Accuracy { .. })));
    }

    #[test]
    fn eps_out_of_range() {
        assert!(AnsatzField::new(mode(), DielectricProfile::fig1(), Envelope::zero(), 1.0).is_err());
    }
}
