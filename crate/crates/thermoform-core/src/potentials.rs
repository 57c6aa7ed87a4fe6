//! Potentials on the shift space: cylinder-evaluable real functions with
//! variation-bound metadata, plus the log-derivative potentials of the
//! builtin interval maps.
//!
//! `variation_bound(n)` upper-bounds `V_n`, the oscillation over pairs of
//! points agreeing in their first `n` symbols. The bounds for the non-affine
//! families are validated envelopes (see the empirical tests), not derived
//! constants; pressure routines consume them as bracket slack only.

use crate::error::{Error, Result};
use crate::maps::IntervalMapModel;
use crate::symbolic::{SymbolicPoint, TruncatedChain, Word};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum Regularity {
    LocallyConstant { depth: usize },
    WeaklyHoelder { a: f64, theta: f64 },
    SummableVariations,
    WaltersOnly,
    NonHoelder,
}

#[derive(Clone)]
enum Kind {
    Constant(f64),
    /// Value determined by the first `depth` symbols.
    Table { depth: usize, values: Arc<BTreeMap<Word, f64>>, default: f64 },
    /// `-log|f'(pi(.))|` for an interval model, evaluated by pulling a seed
    /// back through `eval_depth` inverse branches.
    LogDeriv { model: Arc<IntervalMapModel>, eval_depth: usize },
}

/// A potential `phi` (times a scalar) with regularity metadata.
#[derive(Clone)]
pub struct Potential {
    pub name: String,
    pub regularity: Regularity,
    /// `sup phi` when finite; required by the weak-Gibbs lower-bound
    /// machinery.
    pub sup_bound: Option<f64>,
    kind: Kind,
    scale: f64,
    var_a: f64,
    var_theta: f64,
    /// Polynomial variation envelope `var_poly_c / n` used instead of the
    /// geometric one when set (intermittent potentials).
    var_poly_c: Option<f64>,
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Potential({}, scale {})", self.name, self.scale)
    }
}

impl Potential {
    pub fn constant(c: f64) -> Self {
        Potential {
            name: format!("constant({c})"),
            regularity: Regularity::LocallyConstant { depth: 0 },
            sup_bound: Some(c),
            kind: Kind::Constant(c),
            scale: 1.0,
            var_a: 0.0,
            var_theta: 0.0,
            var_poly_c: None,
        }
    }

    /// Locally-constant potential read off a table indexed by depth-`depth`
    /// words; words missing from the table evaluate to `default`.
    pub fn table(depth: usize, values: BTreeMap<Word, f64>, default: f64) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidParameter("table depth must be >= 1".into()));
        }
        if values.keys().any(|w| w.len() != depth) {
            return Err(Error::InvalidParameter(
                "table keys must all have the declared depth".into(),
            ));
        }
        let sup = values.values().copied().fold(default, f64::max);
        let (lo, hi) = values
            .values()
            .copied()
            .fold((default, default), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Ok(Potential {
            name: format!("table(depth {depth})"),
            regularity: Regularity::LocallyConstant { depth },
            sup_bound: Some(sup),
            kind: Kind::Table { depth, values: Arc::new(values), default },
            scale: 1.0,
            var_a: hi - lo,
            var_theta: 1.0, // only consulted for n < depth
            var_poly_c: None,
        })
    }

    /// `-log|f'|` composed with the digit coding of `model`. The concrete
    /// families carry validated variation envelopes and regularity tags.
    pub fn log_deriv(model: &IntervalMapModel) -> Self {
        let name = format!("-log|d {}|", model.name);
        let m = Arc::new(model.clone());
        let mut var_poly_c = None;
        let (regularity, sup_bound, var_a, var_theta, depth): (Regularity, Option<f64>, f64, f64, usize) =
            if model.name.starts_with("nary") {
                let n = model.truncation() as f64;
                (Regularity::LocallyConstant { depth: 1 }, Some(-n.ln()), 0.0, 0.0, 4)
            } else if model.name == "luroth" {
                (Regularity::LocallyConstant { depth: 1 }, Some(-(2f64).ln()), 0.0, 0.0, 4)
            } else if model.name == "gauss" {
                (Regularity::WeaklyHoelder { a: 3.4, theta: 0.42 }, Some(0.0), 3.4, 0.42, 48)
            } else if model.name == "modified-gauss" {
                (Regularity::WeaklyHoelder { a: 3.4, theta: 0.45 }, Some(0.0), 3.4, 0.45, 48)
            } else if model.name.starts_with("mp-induced") {
                // sup of -log|f_ind'| is -log(inf |f'| on block 0)
                let (lo, hi) = model.interval_of(0);
                let inf = model.deriv_in_branch(0, lo).min(model.deriv_in_branch(0, hi));
                (Regularity::WeaklyHoelder { a: 3.0, theta: 0.72 }, Some(-inf.ln()), 3.0, 0.72, 48)
            } else {
                // intermittent original map: non-Hoelder at the fixed point,
                // variations decay like c/n only
                let alpha = model.alpha().unwrap_or(0.5);
                var_poly_c = Some((1.0 + alpha) / alpha * 1.25);
                (Regularity::NonHoelder, Some(0.0), 0.0, 0.0, 64)
            };
        Potential {
            name,
            regularity,
            sup_bound,
            kind: Kind::LogDeriv { model: m, eval_depth: depth },
            scale: 1.0,
            var_a,
            var_theta,
            var_poly_c,
        }
    }

    /// Multiply by a scalar; evaluation and variation bounds scale exactly.
    pub fn scaled(&self, t: f64) -> Potential {
        let mut p = self.clone();
        p.scale *= t;
        p.sup_bound = match (t >= 0.0, self.sup_bound) {
            (true, Some(s)) => Some(t * s),
            _ => None, // a negative scale turns sup into inf; drop the bound
        };
        p
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Upper bound for `V_n(phi)`, nonincreasing in `n`.
    pub fn variation_bound(&self, n: usize) -> f64 {
        let raw = match (&self.kind, self.var_poly_c) {
            (Kind::Constant(_), _) => 0.0,
            (Kind::Table { depth, .. }, _) => {
                if n >= *depth {
                    0.0
                } else {
                    self.var_a
                }
            }
            (_, Some(c)) => c / n.max(1) as f64,
            (Kind::LogDeriv { .. }, None) => {
                if self.var_a == 0.0 {
                    0.0
                } else {
                    self.var_a * self.var_theta.powi(n as i32)
                }
            }
        };
        self.scale.abs() * raw
    }

    /// Sum of `variation_bound(m)` for `m = 1..=n` (sup-bracket slack of an
    /// n-term Birkhoff sum over an n-cylinder).
    pub fn variation_sum(&self, n: usize) -> f64 {
        (1..=n).map(|m| self.variation_bound(m)).sum()
    }

    /// Tail sum `sum_{j > k} variation_bound(j)` (depth-k coding slack per
    /// step). Infinite for merely polynomial envelopes.
    pub fn variation_tail(&self, k: usize) -> f64 {
        match (&self.kind, self.var_poly_c) {
            (Kind::Constant(_), _) => 0.0,
            (Kind::Table { depth, .. }, _) => {
                if k >= *depth {
                    0.0
                } else {
                    self.scale.abs() * self.var_a * (*depth - k) as f64
                }
            }
            (_, Some(_)) => f64::INFINITY,
            (Kind::LogDeriv { .. }, None) => {
                if self.var_a == 0.0 {
                    0.0
                } else {
                    self.scale.abs() * self.var_a * self.var_theta.powi(k as i32 + 1)
                        / (1.0 - self.var_theta)
                }
            }
        }
    }

    pub fn model(&self) -> Option<&IntervalMapModel> {
        match &self.kind {
            Kind::LogDeriv { model, .. } => Some(model),
            _ => None,
        }
    }

    pub fn eval_depth(&self) -> usize {
        match &self.kind {
            Kind::LogDeriv { eval_depth, .. } => *eval_depth,
            Kind::Table { depth, .. } => *depth,
            Kind::Constant(_) => 1,
        }
    }

    /// Evaluate at a symbolic point (reads finitely many leading symbols).
    pub fn evaluate(&self, point: &SymbolicPoint) -> f64 {
        self.evaluate_shifted(point, 0)
    }

    /// Evaluate at the shifted point `sigma^j(point)`.
    pub fn evaluate_shifted(&self, point: &SymbolicPoint, j: usize) -> f64 {
        self.scale * self.evaluate_raw_shifted(point, j)
    }

    fn evaluate_raw_shifted(&self, point: &SymbolicPoint, j: usize) -> f64 {
        match &self.kind {
            Kind::Constant(c) => *c,
            Kind::Table { depth, values, default } => {
                let w = Word::new((j..j + depth).map(|k| point.symbol_at(k)).collect());
                values.get(&w).copied().unwrap_or(*default)
            }
            Kind::LogDeriv { model, eval_depth } => {
                let x = shifted_point_value(model, point, j, *eval_depth);
                -(model.deriv_in_branch(point.symbol_at(j), x)).ln()
            }
        }
    }
}

/// Interval-map value of a symbolic point: pull the midpoint of the deepest
/// partition block back through `depth` inverse branches. Error is at most
/// the diameter of the depth-`depth` cylinder.
pub fn point_value(model: &IntervalMapModel, point: &SymbolicPoint, depth: usize) -> f64 {
    shifted_point_value(model, point, 0, depth)
}

fn shifted_point_value(
    model: &IntervalMapModel,
    point: &SymbolicPoint,
    j: usize,
    depth: usize,
) -> f64 {
    let deep = point.symbol_at(j + depth);
    let (lo, hi) = model.interval_of(deep);
    let mut x = 0.5 * (lo + hi);
    for k in (0..depth).rev() {
        x = model.inverse_branch(point.symbol_at(j + k), x);
    }
    x
}

/// Evaluation mode for `eval_on_cylinder`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Representative,
    SupBracket,
}

/// A point value or a two-sided bracket over a cylinder.
#[derive(Debug, Clone, Copy)]
pub enum CylinderValue {
    Scalar(f64),
    Bracket { lo: f64, hi: f64 },
}

impl CylinderValue {
    pub fn lo(&self) -> f64 {
        match self {
            CylinderValue::Scalar(v) => *v,
            CylinderValue::Bracket { lo, .. } => *lo,
        }
    }

    pub fn hi(&self) -> f64 {
        match self {
            CylinderValue::Scalar(v) => *v,
            CylinderValue::Bracket { hi, .. } => *hi,
        }
    }
}

/// Evaluate a potential on the cylinder of `word`: at the canonical extension
/// (representative mode) or as a two-sided bracket. For log-derivative
/// potentials the bracket comes from the cylinder-interval geometry, which is
/// tighter than the generic `rep +- variation_bound(len)` fallback.
pub fn eval_on_cylinder(
    phi: &Potential,
    chain: &TruncatedChain,
    word: &Word,
    mode: EvalMode,
) -> Result<CylinderValue> {
    let point = SymbolicPoint::canonical(chain, word.clone())?;
    let rep = phi.evaluate(&point);
    match mode {
        EvalMode::Representative => Ok(CylinderValue::Scalar(rep)),
        EvalMode::SupBracket => {
            if let Some(model) = phi.model() {
                let iv = model.cylinder_interval(word)?;
                let id = word.first().unwrap();
                let f = |x: f64| -phi.scale() * (model.deriv_in_branch(id, x)).ln();
                let mut vals = [f(iv.a), f(iv.midpoint()), f(iv.b), rep];
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                Ok(CylinderValue::Bracket { lo: vals[0], hi: vals[3] })
            } else {
                let v = phi.variation_bound(word.len());
                Ok(CylinderValue::Bracket { lo: rep - v, hi: rep + v })
            }
        }
    }
}

/// Birkhoff sum `sum_{j=0}^{len-1} phi(sigma^j x)` at the canonical extension
/// of `word`. For log-derivative potentials the shift values are the
/// intermediate stages of one right-to-left inverse-branch pass.
pub fn birkhoff_sum(phi: &Potential, chain: &TruncatedChain, word: &Word) -> Result<f64> {
    let n = word.len();
    if n == 0 {
        return Ok(0.0);
    }
    let point = SymbolicPoint::canonical(chain, word.clone())?;
    let raw: f64 = if let Some(model) = phi.model() {
        let depth = phi.eval_depth();
        let total = n + depth;
        let deep = point.symbol_at(total);
        let (lo, hi) = model.interval_of(deep);
        let mut x = 0.5 * (lo + hi);
        let mut values = vec![0.0f64; n];
        for k in (0..total).rev() {
            x = model.inverse_branch(point.symbol_at(k), x);
            if k < n {
                values[k] = x;
            }
        }
        values
            .iter()
            .enumerate()
            .map(|(j, &xj)| -model.deriv_in_branch(word.symbols()[j], xj).ln())
            .sum()
    } else {
        (0..n).map(|j| phi.evaluate_raw_shifted(&point, j)).sum()
    };
    Ok(phi.scale() * raw)
}

/// Birkhoff sum over the periodic extension of `word` (the orbit sum of
/// periodic-orbit pressure). The word must be cyclically admissible.
pub fn birkhoff_sum_periodic(phi: &Potential, chain: &TruncatedChain, word: &Word) -> Result<f64> {
    let n = word.len();
    let point = SymbolicPoint::periodic(chain, word.clone())?;
    let raw: f64 = (0..n).map(|j| phi.evaluate_raw_shifted(&point, j)).sum();
    Ok(phi.scale() * raw)
}
