//! Piecewise-smooth dielectric coefficients with a single jump at `x1 = 0`.

use std::fmt;
use std::sync::Arc;

use crate::expr::{Expr, ParseError};

type CoeffFn = dyn Fn(f64) -> (f64, f64) + Send + Sync;

/// Which half-space a point or object belongs to. `x1 = 0` is on the plus side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn of(x1: f64) -> Self {
        if x1 < 0.0 {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }
}

/// A smooth scalar coefficient on one side, with its derivative.
#[derive(Clone)]
pub struct Coefficient {
    label: String,
    f: Arc<CoeffFn>,
    constant: Option<f64>,
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coefficient({})", self.label)
    }
}

impl Coefficient {
    pub fn constant(c: f64) -> Self {
        Self {
            label: format!("{c}"),
            f: Arc::new(move |_| (c, 0.0)),
            constant: Some(c),
        }
    }

    /// `f` returns `(value, derivative)`.
    pub fn from_fn(label: impl Into<String>, f: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        Self { label: label.into(), f: Arc::new(f), constant: None }
    }

    pub fn parse(source: &str) -> Result<Self, ParseError> {
        let expr = Expr::parse(source)?;
        let label = expr.source().to_string();
        // fold constant expressions so ε₃ ≡ 0 is detectable
        let probe = [-3.7, 0.0, 1.3, 11.0];
        let c0 = expr.eval_dual(0.0);
        let constant = probe
            .iter()
            .all(|&x| {
                let d = expr.eval_dual(x);
                d.d == 0.0 && d.v == c0.v
            })
            .then_some(c0.v);
        Ok(Self {
            label,
            f: Arc::new(move |x| {
                let d = expr.eval_dual(x);
                (d.v, d.d)
            }),
            constant,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.f)(x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.f)(x).1
    }

    pub fn eval(&self, x: f64) -> (f64, f64) {
        (self.f)(x)
    }

    /// `Some(c)` when the coefficient is known to be the constant `c`.
    pub fn as_constant(&self) -> Option<f64> {
        self.constant
    }

    /// The coefficient `x -> self(-x)`.
    pub fn reflected(&self) -> Self {
        let f = Arc::clone(&self.f);
        Self {
            label: format!("reflect({})", self.label),
            f: Arc::new(move |x| {
                let (v, d) = f(-x);
                (v, -d)
            }),
            constant: self.constant,
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("{name} is not bounded below by a positive constant: value {value} at x1 = {x}")]
    NotPositive { name: &'static str, x: f64, value: f64 },
    #[error("{name} or its derivative is not finite at x1 = {x}")]
    NotFinite { name: &'static str, x: f64 },
    #[error("unknown built-in profile '{0}' (available: fig1, fig1-linear)")]
    UnknownBuiltin(String),
    #[error("expression for {name}: {source}")]
    Expression {
        name: &'static str,
        #[source]
        source: ParseError,
    },
}

/// `ε₁` and `ε₃` on both half-lines.
#[derive(Debug, Clone)]
pub struct DielectricProfile {
    pub eps1_minus: Coefficient,
    pub eps1_plus: Coefficient,
    pub eps3_minus: Coefficient,
    pub eps3_plus: Coefficient,
}

impl DielectricProfile {
    pub fn new(eps1_minus: Coefficient, eps1_plus: Coefficient, eps3_minus: Coefficient, eps3_plus: Coefficient) -> Self {
        Self { eps1_minus, eps1_plus, eps3_minus, eps3_plus }
    }

    /// `ε₁ = 1` for `x1 < 0`, `ε₁ = 1 + exp(-x1)` for `x1 ≥ 0`, `ε₃ = 1`.
    pub fn fig1() -> Self {
        Self {
            eps1_minus: Coefficient::constant(1.0),
            eps1_plus: Coefficient::from_fn("1 + exp(-x)", |x| {
                let e = (-x).exp();
                (1.0 + e, -e)
            }),
            eps3_minus: Coefficient::constant(1.0),
            eps3_plus: Coefficient::constant(1.0),
        }
    }

    pub fn builtin(name: &str) -> Result<Self, ProfileError> {
        match name {
            "fig1" => Ok(Self::fig1()),
            "fig1-linear" => Ok(Self::fig1().without_kerr()),
            other => Err(ProfileError::UnknownBuiltin(other.to_string())),
        }
    }

    /// Piecewise-constant profile, mostly useful for checks.
    pub fn piecewise_constant(eps1_minus: f64, eps1_plus: f64, eps3: f64) -> Self {
        Self {
            eps1_minus: Coefficient::constant(eps1_minus),
            eps1_plus: Coefficient::constant(eps1_plus),
            eps3_minus: Coefficient::constant(eps3),
            eps3_plus: Coefficient::constant(eps3),
        }
    }

    pub fn from_expressions(eps1_minus: &str, eps1_plus: &str, eps3_minus: &str, eps3_plus: &str) -> Result<Self, ProfileError> {
        let p = |name, s: &str| Coefficient::parse(s).map_err(|source| ProfileError::Expression { name, source });
        Ok(Self {
            eps1_minus: p("eps1_minus", eps1_minus)?,
            eps1_plus: p("eps1_plus", eps1_plus)?,
            eps3_minus: p("eps3_minus", eps3_minus)?,
            eps3_plus: p("eps3_plus", eps3_plus)?,
        })
    }

    /// Same `ε₁`, with the cubic coefficient switched off.
    pub fn without_kerr(mut self) -> Self {
        self.eps3_minus = Coefficient::constant(0.0);
        self.eps3_plus = Coefficient::constant(0.0);
        self
    }

    /// True when `ε₃ ≡ 0` on both sides.
    pub fn is_linear(&self) -> bool {
        self.eps3_minus.as_constant() == Some(0.0) && self.eps3_plus.as_constant() == Some(0.0)
    }

    /// The profile seen through `x1 -> -x1`.
    pub fn mirrored(&self) -> Self {
        Self {
            eps1_minus: self.eps1_plus.reflected(),
            eps1_plus: self.eps1_minus.reflected(),
            eps3_minus: self.eps3_plus.reflected(),
            eps3_plus: self.eps3_minus.reflected(),
        }
    }

    pub fn eps1_on(&self, side: Side) -> &Coefficient {
        match side {
            Side::Minus => &self.eps1_minus,
            Side::Plus => &self.eps1_plus,
        }
    }

    pub fn eps3_on(&self, side: Side) -> &Coefficient {
        match side {
            Side::Minus => &self.eps3_minus,
            Side::Plus => &self.eps3_plus,
        }
    }

    pub fn eps1(&self, x1: f64) -> f64 {
        self.eps1_on(Side::of(x1)).value(x1)
    }

    pub fn eps1_prime(&self, x1: f64) -> f64 {
        self.eps1_on(Side::of(x1)).derivative(x1)
    }

    pub fn eps3(&self, x1: f64) -> f64 {
        self.eps3_on(Side::of(x1)).value(x1)
    }

    /// Relative jump `(ε₁⁺(0) − ε₁⁻(0)) / ε₁⁻(0)`.
    pub fn nu(&self) -> f64 {
        let m = self.eps1_minus.value(0.0);
        (self.eps1_plus.value(0.0) - m) / m
    }

    /// Checks positivity and finiteness on the given sample points.
    ///
    /// `ε₃` may be identically zero (the linear medium); otherwise it must be positive.
    pub fn validate_on(&self, xs: impl IntoIterator<Item = f64>) -> Result<(), ProfileError> {
        let linear = self.is_linear();
        for x in xs {
            let side = Side::of(x);
            let mut checks = vec![("eps1", self.eps1_on(side), true)];
            if !linear {
                checks.push(("eps3", self.eps3_on(side), true));
            }
            for (name, c, positive) in checks {
                let (v, d) = c.eval(x);
                if !v.is_finite() || !d.is_finite() {
                    return Err(ProfileError::NotFinite { name, x });
                }
                if positive && v <= 0.0 {
                    return Err(ProfileError::NotPositive { name, x, value: v });
                }
            }
        }
        // the one-sided limits at the interface
        for side in [Side::Minus, Side::Plus] {
            let v = self.eps1_on(side).value(0.0);
            if !(v.is_finite() && v > 0.0) {
                return Err(ProfileError::NotPositive { name: "eps1", x: 0.0, value: v });
            }
        }
        Ok(())
    }
}
