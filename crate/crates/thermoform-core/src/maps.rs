//! Concrete interval maps with Markov partitions: N-ary, Gauss, the
//! non-Bernoulli modified Gauss map, Lüroth, and Manneville–Pomeau together
//! with its induced (jump) transformation.
//!
//! Each model exposes its partition geometry, branch derivatives and inverse
//! branches, the induced transition chain, digit coding, cylinder-interval
//! geometry, and numeric audits of the Markov-transformation properties.
//! Cylinder endpoints are exact big-rationals for the affine models (Lüroth,
//! N-ary) and guarded floating point elsewhere.

use crate::error::{Error, Result};
use crate::symbolic::{TailDescriptor, TruncatedChain, Word};
use num_bigint::BigInt;
use serde::Serialize;
use std::sync::Arc;

/// Exact rational with `BigInt` numerator/denominator (denominator > 0).
/// Not reduced; used only for affine-branch endpoint arithmetic.
#[derive(Debug, Clone)]
pub struct BigRatio {
    pub num: BigInt,
    pub den: BigInt,
}

impl BigRatio {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den > 0);
        BigRatio { num: BigInt::from(num), den: BigInt::from(den) }
    }

    pub fn to_f64(&self) -> f64 {
        // scale down to keep both parts in f64 range
        let nb = self.num.bits() as i64;
        let db = self.den.bits() as i64;
        let shift = (nb.max(db) - 900).max(0) as u64;
        let n = (&self.num >> shift).to_string().parse::<f64>().unwrap_or(f64::NAN);
        let d = (&self.den >> shift).to_string().parse::<f64>().unwrap_or(f64::NAN);
        n / d
    }

    pub fn sub(&self, other: &BigRatio) -> BigRatio {
        BigRatio {
            num: &self.num * &other.den - &other.num * &self.den,
            den: &self.den * &other.den,
        }
    }

    pub fn eq_exact(&self, other: &BigRatio) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }

    /// `(num + k*den) / (m*den)` — the image under the affine inverse branch
    /// `y -> (y + k)/m`.
    fn affine_pullback(&self, k: i64, m: i64) -> BigRatio {
        BigRatio {
            num: &self.num + BigInt::from(k) * &self.den,
            den: BigInt::from(m) * &self.den,
        }
    }
}

/// The interval `[a, b]` realized by a finite word under the digit coding.
#[derive(Debug, Clone)]
pub struct CylinderInterval {
    pub word: Word,
    pub a: f64,
    pub b: f64,
    /// Exact endpoints for affine models.
    pub exact: Option<(BigRatio, BigRatio)>,
}

impl CylinderInterval {
    pub fn diameter(&self) -> f64 {
        self.b - self.a
    }

    pub fn diameter_exact(&self) -> Option<BigRatio> {
        self.exact.as_ref().map(|(a, b)| b.sub(a))
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Nary { n: u32 },
    Gauss,
    ModifiedGauss,
    Luroth,
    MpOriginal { alpha: f64, a0: f64 },
    /// Jump transformation of the intermittent map: block `j` is
    /// `(a_j, a_{j-1})` and its branch is `F^(j+1)`, mapping onto `(0,1)`.
    MpInduced { alpha: f64, cuts: Arc<Vec<f64>> },
}

/// An interval map with Markov partition, branch calculus, and digit coding.
#[derive(Debug, Clone)]
pub struct IntervalMapModel {
    pub name: String,
    kind: Kind,
    /// Number of partition blocks represented (truncation level for the
    /// countable families).
    truncation: u32,
}

const NEWTON_TOL: f64 = 1e-15;

/// Solve `z + z^(1+alpha) = target` on `[0, hi]` (monotone convex lhs) by
/// Newton from the right; converges monotonically.
fn mp_left_inverse(alpha: f64, target: f64, hi: f64) -> f64 {
    let g = |z: f64| z + z.powf(1.0 + alpha) - target;
    let gp = |z: f64| 1.0 + (1.0 + alpha) * z.powf(alpha);
    let mut z = hi.min(target).max(0.0);
    for _ in 0..80 {
        let v = g(z);
        if v.abs() <= NEWTON_TOL * (1.0 + target.abs()) {
            break;
        }
        let step = v / gp(z);
        z -= step;
        if z < 0.0 {
            z = 0.0;
        }
        if step.abs() <= f64::EPSILON * z.abs() {
            break;
        }
    }
    z
}

impl IntervalMapModel {
    pub fn nary(n: u32) -> Self {
        assert!(n >= 2);
        IntervalMapModel { name: format!("nary{n}"), kind: Kind::Nary { n }, truncation: n }
    }

    pub fn gauss(truncation: u32) -> Self {
        IntervalMapModel { name: "gauss".into(), kind: Kind::Gauss, truncation }
    }

    pub fn modified_gauss(truncation: u32) -> Self {
        IntervalMapModel {
            name: "modified-gauss".into(),
            kind: Kind::ModifiedGauss,
            truncation,
        }
    }

    pub fn luroth(truncation: u32) -> Self {
        IntervalMapModel { name: "luroth".into(), kind: Kind::Luroth, truncation }
    }

    /// Intermittent map `F(x) = x + x^(1+alpha) mod 1` on two symbols plus its
    /// induced Markov transformation with `blocks` truncated blocks.
    pub fn mp_pair(alpha: f64, blocks: u32) -> Result<(IntervalMapModel, IntervalMapModel)> {
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "intermittency exponent must lie in (0,1), got {alpha}"
            )));
        }
        // a0 + a0^(1+alpha) = 1, then F(a_{j+1}) = a_j backward orbit
        let a0 = mp_left_inverse(alpha, 1.0, 1.0);
        let mut cuts = Vec::with_capacity(blocks as usize + 1);
        cuts.push(a0);
        for j in 0..blocks as usize {
            let prev = cuts[j];
            cuts.push(mp_left_inverse(alpha, prev, prev));
        }
        let original = IntervalMapModel {
            name: format!("mp(alpha={alpha})"),
            kind: Kind::MpOriginal { alpha, a0 },
            truncation: 2,
        };
        let induced = IntervalMapModel {
            name: format!("mp-induced(alpha={alpha})"),
            kind: Kind::MpInduced { alpha, cuts: Arc::new(cuts) },
            truncation: blocks,
        };
        Ok((original, induced))
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// Display digit for a symbol id (continued-fraction style families start
    /// at digit 1).
    pub fn digit(&self, id: u32) -> u32 {
        match self.kind {
            Kind::Gauss | Kind::ModifiedGauss | Kind::Luroth => id + 1,
            _ => id,
        }
    }

    /// Symbol id for a display digit.
    pub fn id_of_digit(&self, digit: u32) -> u32 {
        match self.kind {
            Kind::Gauss | Kind::ModifiedGauss | Kind::Luroth => digit - 1,
            _ => digit,
        }
    }

    /// Partition interval of a symbol id (open interval endpoints).
    pub fn interval_of(&self, id: u32) -> (f64, f64) {
        match &self.kind {
            Kind::Nary { n } => {
                let n = *n as f64;
                (id as f64 / n, (id as f64 + 1.0) / n)
            }
            Kind::Gauss | Kind::ModifiedGauss | Kind::Luroth => {
                let d = (id + 1) as f64;
                (1.0 / (d + 1.0), 1.0 / d)
            }
            Kind::MpOriginal { a0, .. } => {
                if id == 0 {
                    (0.0, *a0)
                } else {
                    (*a0, 1.0)
                }
            }
            Kind::MpInduced { cuts, .. } => {
                let j = id as usize;
                let hi = if j == 0 { 1.0 } else { cuts[j - 1] };
                (cuts[j], hi)
            }
        }
    }

    /// Image `f(P_id)` of a partition interval.
    pub fn branch_image(&self, id: u32) -> (f64, f64) {
        match &self.kind {
            Kind::Nary { .. } | Kind::Gauss | Kind::Luroth => (0.0, 1.0),
            Kind::ModifiedGauss => {
                let d = id + 1;
                if d == 1 {
                    (0.0, 1.0)
                } else {
                    (1.0 / d as f64, 1.0)
                }
            }
            Kind::MpOriginal { .. } => (0.0, 1.0),
            Kind::MpInduced { .. } => (0.0, 1.0),
        }
    }

    /// Forward map. For the induced model this applies `F` `R(id)` times.
    pub fn forward(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Nary { n } => {
                let y = x * *n as f64;
                y - y.floor()
            }
            Kind::Gauss => {
                let y = 1.0 / x;
                y - y.floor()
            }
            Kind::ModifiedGauss => {
                let d = (1.0 / x).floor();
                let g = if d <= 1.0 { 1.0 } else { 1.0 - 1.0 / d };
                g * (1.0 / x - d) + if d <= 1.0 { 0.0 } else { 1.0 / d }
            }
            Kind::Luroth => {
                let d = (1.0 / x).floor();
                d * (d + 1.0) * x - d
            }
            Kind::MpOriginal { alpha, .. } => {
                let y = x + x.powf(1.0 + alpha);
                if y >= 1.0 {
                    y - 1.0
                } else {
                    y
                }
            }
            Kind::MpInduced { alpha, .. } => {
                let id = self.block_of(x);
                let mut y = x;
                for _ in 0..self.iterations_per_branch(id) {
                    y += y.powf(1.0 + alpha);
                    if y >= 1.0 {
                        y -= 1.0;
                    }
                }
                y
            }
        }
    }

    /// Absolute derivative `|f'(x)|` of the branch at `x`.
    pub fn deriv_abs(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Gauss | Kind::ModifiedGauss | Kind::Luroth if x <= 0.0 => f64::INFINITY,
            _ => self.deriv_in_branch(self.block_of(x.max(f64::MIN_POSITIVE)), x),
        }
    }

    /// Branch derivative with the branch index given explicitly; valid on the
    /// branch closure (used by audits that probe endpoints).
    pub fn deriv_in_branch(&self, id: u32, x: f64) -> f64 {
        match &self.kind {
            Kind::Nary { n } => *n as f64,
            Kind::Gauss => 1.0 / (x * x),
            Kind::ModifiedGauss => {
                let d = (id + 1) as f64;
                let g = if id == 0 { 1.0 } else { 1.0 - 1.0 / d };
                g / (x * x)
            }
            Kind::Luroth => {
                let d = (id + 1) as f64;
                d * (d + 1.0)
            }
            Kind::MpOriginal { alpha, .. } => 1.0 + (1.0 + alpha) * x.powf(*alpha),
            Kind::MpInduced { alpha, .. } => {
                let mut y = x;
                let mut prod = 1.0;
                for _ in 0..self.iterations_per_branch(id) {
                    prod *= 1.0 + (1.0 + alpha) * y.powf(*alpha);
                    y += y.powf(1.0 + alpha);
                    if y >= 1.0 {
                        y -= 1.0;
                    }
                }
                prod
            }
        }
    }

    /// Branch forward map with the branch index given explicitly; valid on
    /// the branch closure.
    pub fn forward_in_branch(&self, id: u32, x: f64) -> f64 {
        match &self.kind {
            Kind::Nary { n } => (*n as f64) * x - id as f64,
            Kind::Gauss => 1.0 / x - (id + 1) as f64,
            Kind::ModifiedGauss => {
                let d = (id + 1) as f64;
                if id == 0 {
                    1.0 / x - 1.0
                } else {
                    (1.0 - 1.0 / d) * (1.0 / x - d) + 1.0 / d
                }
            }
            Kind::Luroth => {
                let d = (id + 1) as f64;
                d * (d + 1.0) * x - d
            }
            Kind::MpOriginal { alpha, .. } => x + x.powf(1.0 + alpha) - id as f64,
            Kind::MpInduced { alpha, .. } => {
                let mut y = x;
                for _ in 0..self.iterations_per_branch(id) {
                    y += y.powf(1.0 + alpha);
                    if y >= 1.0 {
                        y -= 1.0;
                    }
                }
                y
            }
        }
    }

    /// Partition block containing `x`.
    pub fn block_of(&self, x: f64) -> u32 {
        match &self.kind {
            Kind::Nary { n } => ((x * *n as f64).floor() as u32).min(n - 1),
            Kind::Gauss | Kind::ModifiedGauss | Kind::Luroth => {
                let d = (1.0 / x).floor().max(1.0) as u32;
                self.id_of_digit(d.min(self.truncation))
            }
            Kind::MpOriginal { a0, .. } => u32::from(x > *a0),
            Kind::MpInduced { cuts, .. } => {
                // a_j < x <= a_{j-1}; cuts[j] = a_j, a_{-1} = 1
                let mut lo = 0usize;
                let mut hi = cuts.len() - 1;
                if x > cuts[0] {
                    return 0;
                }
                while lo + 1 < hi {
                    let mid = (lo + hi) / 2;
                    if x > cuts[mid] {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi as u32
            }
        }
    }

    /// Number of applications of the base map realized by branch `id`
    /// (1 except for the induced model, where block `j` applies `F` `j+1`
    /// times: `j` passes down the staircase plus the full right branch).
    pub fn iterations_per_branch(&self, id: u32) -> u32 {
        match &self.kind {
            Kind::MpInduced { .. } => id + 1,
            _ => 1,
        }
    }

    /// Return-time bookkeeping for induced models (None otherwise).
    pub fn return_time(&self, id: u32) -> Option<u32> {
        match &self.kind {
            Kind::MpInduced { .. } => Some(self.iterations_per_branch(id)),
            _ => None,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match &self.kind {
            Kind::MpOriginal { alpha, .. } | Kind::MpInduced { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    /// Backward-orbit cut points `a_j` of the intermittent staircase.
    pub fn mp_cuts(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::MpInduced { cuts, .. } => Some(cuts),
            _ => None,
        }
    }

    /// Inverse branch of symbol `id` applied to `y` in the branch image.
    pub fn inverse_branch(&self, id: u32, y: f64) -> f64 {
        match &self.kind {
            Kind::Nary { n } => (y + id as f64) / *n as f64,
            Kind::Gauss => 1.0 / ((id + 1) as f64 + y),
            Kind::ModifiedGauss => {
                let d = (id + 1) as f64;
                if id == 0 {
                    1.0 / (1.0 + y)
                } else {
                    let g = 1.0 - 1.0 / d;
                    g / (y + g * d - 1.0 / d)
                }
            }
            Kind::Luroth => {
                let d = (id + 1) as f64;
                (y + d) / (d * (d + 1.0))
            }
            Kind::MpOriginal { alpha, a0 } => {
                if id == 0 {
                    mp_left_inverse(*alpha, y, *a0)
                } else {
                    // z + z^(1+alpha) = 1 + y on [a0, 1]
                    let g = |z: f64| z + z.powf(1.0 + *alpha) - 1.0 - y;
                    let gp = |z: f64| 1.0 + (1.0 + *alpha) * z.powf(*alpha);
                    let mut z = 1.0f64;
                    for _ in 0..80 {
                        let v = g(z);
                        if v.abs() <= NEWTON_TOL * 2.0 {
                            break;
                        }
                        z -= v / gp(z);
                        z = z.clamp(*a0, 1.0);
                    }
                    z
                }
            }
            Kind::MpInduced { alpha, cuts } => {
                // one right-branch pullback into (a0, 1), then id left pullbacks
                let a0 = cuts[0];
                let orig = IntervalMapModel {
                    name: String::new(),
                    kind: Kind::MpOriginal { alpha: *alpha, a0 },
                    truncation: 2,
                };
                let mut z = orig.inverse_branch(1, y);
                for _ in 0..id {
                    z = mp_left_inverse(*alpha, z, z);
                }
                z
            }
        }
    }

    /// The induced transition chain of the Markov partition.
    pub fn chain(&self) -> TruncatedChain {
        match &self.kind {
            Kind::Nary { n } => TruncatedChain::full_shift(*n),
            Kind::Gauss => TruncatedChain::full_shift_countable(self.truncation, TailDescriptor::GaussLike),
            Kind::Luroth => {
                TruncatedChain::full_shift_countable(self.truncation, TailDescriptor::LurothLike)
            }
            Kind::ModifiedGauss => TruncatedChain::strictly_decreasing_from_second(
                self.truncation,
                Some(TailDescriptor::GaussLike),
            ),
            Kind::MpOriginal { .. } => TruncatedChain::full_shift(2),
            Kind::MpInduced { alpha, .. } => TruncatedChain::full_shift_countable(
                self.truncation,
                TailDescriptor::InducedPolynomial { alpha: *alpha, c: 4.0 },
            ),
        }
    }

    /// Closed-form invariant density (w.r.t. Lebesgue), when known.
    pub fn acip_density(&self, x: f64) -> Option<f64> {
        match &self.kind {
            Kind::Gauss => Some(1.0 / ((1.0 + x) * std::f64::consts::LN_2)),
            Kind::Nary { .. } | Kind::Luroth => Some(1.0),
            _ => None,
        }
    }

    /// Closed-form invariant measure of `[a,b]`, when known.
    pub fn acip_measure(&self, a: f64, b: f64) -> Option<f64> {
        match &self.kind {
            Kind::Gauss => Some(((1.0 + b) / (1.0 + a)).ln() / std::f64::consts::LN_2),
            Kind::Nary { .. } | Kind::Luroth => Some(b - a),
            _ => None,
        }
    }

    fn exact_affine_coeffs(&self, id: u32) -> Option<(i64, i64)> {
        // inverse branch y -> (y + k)/m
        match &self.kind {
            Kind::Nary { n } => Some((id as i64, *n as i64)),
            Kind::Luroth => {
                let d = (id + 1) as i64;
                Some((d, d * (d + 1)))
            }
            _ => None,
        }
    }

    /// Interval of the cylinder fixing the word's digits, computed by
    /// composing inverse branches right to left from the last branch image.
    pub fn cylinder_interval(&self, word: &Word) -> Result<CylinderInterval> {
        if word.is_empty() {
            return Err(Error::InvalidParameter("cylinder word must be nonempty".into()));
        }
        let chain = self.chain();
        if !chain.is_admissible_word(word) {
            let s = word.symbols();
            for p in s.windows(2) {
                if !chain.is_admissible_pair(p[0], p[1]) {
                    return Err(Error::Inadmissible { a: p[0], b: p[1] });
                }
            }
            return Err(Error::InvalidParameter(format!("word {word} out of alphabet")));
        }
        let syms = word.symbols();
        let last = *syms.last().unwrap();
        let (mut lo, mut hi) = self.interval_of(last);
        for &s in syms[..syms.len() - 1].iter().rev() {
            let (a, b) = (self.inverse_branch(s, lo), self.inverse_branch(s, hi));
            lo = a.min(b);
            hi = a.max(b);
        }
        // exact endpoints for affine models
        let exact = if self.exact_affine_coeffs(0).is_some() {
            let d_last = match &self.kind {
                Kind::Luroth => (last + 1) as i64,
                _ => last as i64,
            };
            let (mut elo, mut ehi) = match &self.kind {
                Kind::Luroth => (
                    BigRatio::new(1, d_last + 1),
                    BigRatio::new(1, d_last),
                ),
                _ => {
                    let n = self.truncation as i64;
                    (BigRatio::new(d_last, n), BigRatio::new(d_last + 1, n))
                }
            };
            for &s in syms[..syms.len() - 1].iter().rev() {
                let (k, m) = self.exact_affine_coeffs(s).unwrap();
                elo = elo.affine_pullback(k, m);
                ehi = ehi.affine_pullback(k, m);
            }
            Some((elo, ehi))
        } else {
            None
        };
        Ok(CylinderInterval { word: word.clone(), a: lo, b: hi, exact })
    }

    /// `|(f^m)'|` at the cylinder's midpoint representative, where `m` is the
    /// word length, computed through the inverse-branch composition (stable:
    /// only contractions are iterated). Returns `(product, representative)`.
    pub fn derivative_product(&self, word: &Word) -> Result<(f64, f64)> {
        let syms = word.symbols();
        if syms.is_empty() {
            return Err(Error::InvalidParameter("word must be nonempty".into()));
        }
        let (lo, hi) = self.interval_of(*syms.last().unwrap());
        // tail representative: midpoint of the deepest partition block image
        let mut y = 0.5 * (lo + hi);
        let mut inv_prod = self.deriv_abs(y).recip();
        for &s in syms[..syms.len() - 1].iter().rev() {
            y = self.inverse_branch(s, y);
            inv_prod *= self.deriv_abs(y).recip();
        }
        Ok((inv_prod.recip(), y))
    }

    /// Lebesgue-full union check helper: total length of represented blocks.
    pub fn represented_length(&self) -> f64 {
        (0..self.truncation).map(|id| {
            let (a, b) = self.interval_of(id);
            b - a
        }).sum()
    }
}

/// Theorem-E exponent rescaling at the indifferent fixed point: the density
/// blows up like `x^(-alpha)` at 0, so radius decay `u` is seen by the
/// measure as `(1-alpha)u` there.
pub fn utilde(alpha: f64, u: f64, x: f64) -> f64 {
    assert!(u >= 0.0);
    if x == 0.0 {
        (1.0 - alpha) * u
    } else {
        u
    }
}

/// One row of `distortion_check`: ratio comparison at iterate `j`.
#[derive(Debug, Clone, Serialize)]
pub struct DistortionRow {
    pub iterate: usize,
    pub ratio_base: f64,
    pub ratio_image: f64,
    pub log_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistortionReport {
    pub rows: Vec<DistortionRow>,
    pub max_log_deviation: f64,
}

/// Compare `lambda(A)/lambda(P)` with `lambda(f^j A)/lambda(f^j P)` for the
/// middle `subset_fraction` of the cylinder `P` of `word`, `j = 1..=m`.
/// The sub-interval is taken as the image of the middle fraction of the base
/// interval under the word's inverse-branch composition, so all iterates are
/// computed through contractions only.
pub fn distortion_check(
    model: &IntervalMapModel,
    word: &Word,
    subset_fraction: f64,
) -> Result<DistortionReport> {
    if !(0.0 < subset_fraction && subset_fraction < 1.0) {
        return Err(Error::InvalidParameter("subset_fraction must lie in (0,1)".into()));
    }
    let syms = word.symbols();
    let m = syms.len();
    let (base_lo, base_hi) = model.interval_of(*syms.last().unwrap());
    let mid = 0.5 * (base_lo + base_hi);
    let half = 0.5 * subset_fraction * (base_hi - base_lo);
    let (sub_lo, sub_hi) = (mid - half, mid + half);

    // pull (P, A) back together through the inverse branches; rows[j] holds
    // the pair after pulling back j of the m-1 leading symbols, i.e. the
    // geometry of f^(m-1-j) applied to the full cylinder
    let mut p = (base_lo, base_hi);
    let mut a = (sub_lo, sub_hi);
    let mut stages = vec![(p, a)];
    for &s in syms[..m - 1].iter().rev() {
        let map = |(x, y): (f64, f64)| {
            let (u, v) = (model.inverse_branch(s, x), model.inverse_branch(s, y));
            (u.min(v), u.max(v))
        };
        p = map(p);
        a = map(a);
        stages.push((p, a));
    }
    stages.reverse(); // stages[0] = deepest (the cylinder itself)
    let full = stages[0];
    let ratio0 = (full.1 .1 - full.1 .0) / (full.0 .1 - full.0 .0);
    let mut rows = Vec::new();
    let mut max_dev = 0.0f64;
    for (j, (pp, aa)) in stages.iter().enumerate().skip(1) {
        let rj = (aa.1 - aa.0) / (pp.1 - pp.0);
        let dev = (rj / ratio0).ln().abs();
        max_dev = max_dev.max(dev);
        rows.push(DistortionRow {
            iterate: j,
            ratio_base: ratio0,
            ratio_image: rj,
            log_deviation: dev,
        });
    }
    Ok(DistortionReport { rows, max_log_deviation: max_dev })
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditItem {
    pub property: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MarkovAudit {
    pub items: Vec<AuditItem>,
    pub all_core_pass: bool,
}

/// Numeric audit of the Markov-transformation properties: partition measure,
/// Markov images, expansion bounds, eventual expansion, transitivity,
/// return-sum diagnostics, and branch-derivative regularity.
pub fn markov_property_audit(model: &IntervalMapModel, samples_per_branch: usize) -> MarkovAudit {
    let mut items = Vec::new();
    let a = model.truncation();
    let countable = model.chain().full_alphabet_countable;

    // (a) partition fills [0,1] up to the truncated tail
    let covered = model.represented_length();
    let tail = 1.0 - covered;
    let pass_a = if countable { tail >= -1e-12 && tail < 0.5 } else { tail.abs() < 1e-9 };
    items.push(AuditItem {
        property: "partition-full-measure".into(),
        pass: pass_a,
        detail: if countable {
            format!("covered {covered:.12}, tail mass {tail:.3e} assumed via tail model")
        } else {
            format!("covered {covered:.12}")
        },
    });

    // (b) branch images are unions of partition blocks
    let mut worst_b = 0.0f64;
    for id in 0..a {
        let (ilo, ihi) = model.branch_image(id);
        for other in 0..a {
            let (plo, phi) = model.interval_of(other);
            let inside = plo >= ilo - 1e-9 && phi <= ihi + 1e-9;
            let outside = phi <= ilo + 1e-9 || plo >= ihi - 1e-9;
            if !(inside || outside) {
                let cut = (ilo - plo).abs().min((ihi - phi).abs());
                worst_b = worst_b.max(cut);
            }
        }
    }
    items.push(AuditItem {
        property: "markov-images".into(),
        pass: worst_b < 1e-9,
        detail: format!("worst block/image misalignment {worst_b:.3e}"),
    });

    // (c) |f'| >= sigma > 0
    let mut sigma = f64::INFINITY;
    for id in 0..a.min(64) {
        let (lo, hi) = model.interval_of(id);
        for k in 0..samples_per_branch {
            let x = lo + (hi - lo) * (k as f64 + 0.5) / samples_per_branch as f64;
            sigma = sigma.min(model.deriv_abs(x));
        }
    }
    items.push(AuditItem {
        property: "derivative-bounded-below".into(),
        pass: sigma > 0.0,
        detail: format!("sigma >= {sigma:.6}"),
    });

    // (d) eventual uniform expansion |(f^n0)'| >= gamma > 1 for n0 <= 2,
    // probing branch closures so endpoint infima are seen
    let mut gamma_best = 0.0f64;
    let mut pass_d = false;
    for n0 in 1..=2usize {
        let mut worst = f64::INFINITY;
        for id in 0..a.min(64) {
            let (lo, hi) = model.interval_of(id);
            for k in 0..=samples_per_branch {
                let mut x = lo + (hi - lo) * k as f64 / samples_per_branch as f64;
                let mut prod = model.deriv_in_branch(id, x);
                x = model.forward_in_branch(id, x).clamp(0.0, 1.0);
                for _ in 1..n0 {
                    prod *= model.deriv_abs(x);
                    x = if x > 0.0 && x < 1.0 { model.forward(x) } else { x };
                }
                worst = worst.min(prod);
            }
        }
        if worst > 1.0 + 1e-9 {
            pass_d = true;
            gamma_best = worst;
            break;
        }
        gamma_best = worst;
    }
    items.push(AuditItem {
        property: "eventual-expansion".into(),
        pass: pass_d,
        detail: if pass_d {
            format!("gamma >= {gamma_best:.6}")
        } else {
            format!("no uniform expansion found up to n0=2 (inf |(f^n0)'| = {gamma_best:.6}); indifferent fixed point suspected")
        },
    });

    // (e) transitivity via the symbolic chain
    let props = crate::symbolic::check_properties(&model.chain(), 64);
    items.push(AuditItem {
        property: "topological-mixing".into(),
        pass: props.mixing_witness_power.is_some(),
        detail: format!(
            "witness power {:?}, BI={}, BIP={}",
            props.mixing_witness_power, props.big_images, props.big_images_and_preimages
        ),
    });

    // (f) recurrence/return-time diagnostics (finite, spelled-out window)
    let (flo, fhi) = model.interval_of(0);
    let block_len = fhi - flo;
    let window = 24usize;
    let return_mass: f64 = (0..window).map(|_| block_len).sum();
    let integr = match model.return_time(0) {
        Some(_) => {
            let s: f64 = (0..a)
                .map(|id| {
                    let (lo, hi) = model.interval_of(id);
                    (id as f64) * (hi - lo)
                })
                .sum();
            format!("sum_j j*lambda(P_j) (truncated) = {s:.6}")
        }
        None => "return times identically 1".into(),
    };
    items.push(AuditItem {
        property: "return-sums".into(),
        pass: true,
        detail: format!(
            "diagnostic window {window}: preimage-mass lower bound {return_mass:.4} (grows linearly); {integr}{}",
            if countable { "; tail assumed via tail model" } else { "" }
        ),
    });

    // (g) branch-derivative regularity |f'(x)/f'(y) - 1| <= c |x-y|^alpha
    let alpha_reg = model.alpha().unwrap_or(1.0).min(1.0);
    let mut c_fit = 0.0f64;
    for id in 0..a.min(64) {
        let (lo, hi) = model.interval_of(id);
        for k in 1..samples_per_branch {
            let x = lo + (hi - lo) * 0.5;
            let y = lo + (hi - lo) * (k as f64 + 0.5) / samples_per_branch as f64;
            if (x - y).abs() < 1e-14 {
                continue;
            }
            let lhs = (model.deriv_abs(x) / model.deriv_abs(y) - 1.0).abs();
            c_fit = c_fit.max(lhs / (x - y).abs().powf(alpha_reg));
        }
    }
    items.push(AuditItem {
        property: "derivative-regularity".into(),
        pass: c_fit.is_finite(),
        detail: format!("fitted Hoelder constant c <= {c_fit:.4} at exponent {alpha_reg}"),
    });

    let all_core_pass = items.iter().all(|i| i.pass);
    MarkovAudit { items, all_core_pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nary_cylinder_is_decimal_digits() {
        let m = IntervalMapModel::nary(10);
        let iv = m.cylinder_interval(&Word::new(vec![3, 1, 4])).unwrap();
        assert!((iv.a - 0.314).abs() < 1e-12);
        assert!((iv.b - 0.315).abs() < 1e-12);
        let (ea, eb) = iv.exact.as_ref().unwrap();
        assert!(ea.eq_exact(&BigRatio::new(314, 1000)));
        assert!(eb.eq_exact(&BigRatio::new(315, 1000)));
    }

    #[test]
    fn gauss_cylinders() {
        let m = IntervalMapModel::gauss(50);
        let iv1 = m.cylinder_interval(&Word::new(vec![0])).unwrap(); // digit 1
        assert!((iv1.a - 0.5).abs() < 1e-12 && (iv1.b - 1.0).abs() < 1e-12);
        let iv11 = m.cylinder_interval(&Word::new(vec![0, 0])).unwrap(); // digits 1,1
        assert!((iv11.a - 0.5).abs() < 1e-12);
        assert!((iv11.b - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn luroth_diameter_product_exact() {
        let m = IntervalMapModel::luroth(50);
        // digits 2,3,1 are ids 1,2,0
        let iv = m.cylinder_interval(&Word::new(vec![1, 2, 0])).unwrap();
        let diam = iv.diameter_exact().unwrap();
        // product 1/(2*3) * 1/(3*4) * 1/(1*2)
        assert!(diam.eq_exact(&BigRatio::new(1, 6 * 12 * 2)));
        assert!((iv.diameter() - 1.0 / 144.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_products() {
        let nary = IntervalMapModel::nary(10);
        let (p, _) = nary.derivative_product(&Word::new(vec![3, 1, 4])).unwrap();
        assert!((p - 1000.0).abs() < 1e-9);

        // Gauss: product between prod(d^2) and prod((d+1)^2)
        let g = IntervalMapModel::gauss(50);
        let w = Word::new(vec![0, 2, 1]); // digits 1,3,2
        let (p, _) = g.derivative_product(&w).unwrap();
        let lo = (1.0f64 * 3.0 * 2.0).powi(2);
        let hi = (2.0f64 * 4.0 * 3.0).powi(2);
        assert!(p >= lo && p <= hi, "p={p} not in [{lo},{hi}]");

        // modified Gauss with the g(d) factors
        let mg = IntervalMapModel::modified_gauss(50);
        let (p, _) = mg.derivative_product(&w).unwrap();
        let gf = |d: f64| if d == 1.0 { 1.0 } else { 1.0 - 1.0 / d };
        let lo = gf(1.0) * gf(3.0) * gf(2.0) * (1.0f64 * 3.0 * 2.0).powi(2);
        let hi = gf(1.0) * gf(3.0) * gf(2.0) * (2.0f64 * 4.0 * 3.0).powi(2);
        assert!(p >= lo && p <= hi, "p={p} not in [{lo},{hi}]");
    }

    #[test]
    fn conjugacy_forward_maps_cylinder_into_shifted() {
        for m in [
            IntervalMapModel::gauss(30),
            IntervalMapModel::modified_gauss(30),
            IntervalMapModel::luroth(30),
            IntervalMapModel::nary(3),
        ] {
            let chain = m.chain();
            let words = [vec![0, 0, 1], vec![2, 1, 0], vec![1, 0, 2]];
            for w in words {
                let w = Word::new(w);
                if !chain.is_admissible_word(&w) {
                    continue;
                }
                let iv = m.cylinder_interval(&w).unwrap();
                let shifted = m.cylinder_interval(&Word::new(w.symbols()[1..].to_vec())).unwrap();
                for x in [iv.a + 1e-9, iv.midpoint(), iv.b - 1e-9] {
                    let y = m.forward(x);
                    assert!(
                        y >= shifted.a - 1e-10 && y <= shifted.b + 1e-10,
                        "{}: f({x}) = {y} outside [{}, {}]",
                        m.name, shifted.a, shifted.b
                    );
                }
            }
        }
    }

    #[test]
    fn diameter_times_derivative_bounded() {
        let g = IntervalMapModel::gauss(30);
        for w in [vec![0, 0, 0, 0], vec![1, 2, 1, 2], vec![4, 0, 3, 1]] {
            let w = Word::new(w);
            let iv = g.cylinder_interval(&w).unwrap();
            let (p, _) = g.derivative_product(&w).unwrap();
            let prod = iv.diameter() * p;
            assert!(prod > 0.2 && prod < 5.0, "distortion constant blown: {prod}");
        }
    }

    #[test]
    fn distortion_affine_is_zero() {
        let m = IntervalMapModel::nary(3);
        let r = distortion_check(&m, &Word::new(vec![0, 1, 2, 1]), 0.5).unwrap();
        assert!(r.max_log_deviation < 1e-12);
    }

    #[test]
    fn distortion_gauss_bounded() {
        let m = IntervalMapModel::gauss(30);
        let mut prev = 0.0f64;
        for depth in [4usize, 6, 8] {
            let w = Word::new(vec![0; depth]);
            let r = distortion_check(&m, &w, 0.5).unwrap();
            assert!(r.max_log_deviation < 1.5);
            prev = prev.max(r.max_log_deviation);
        }
        assert!(prev < 1.5);
    }

    #[test]
    fn distortion_mp_unbounded_and_cylinder_ratio_exponent() {
        let alpha = 0.5;
        let (mp, ind) = IntervalMapModel::mp_pair(alpha, 256).unwrap();

        // deviation on all-zero words keeps growing with depth (the bounded
        // distortion of genuine Markov transformations fails here)
        let mut devs = Vec::new();
        for depth in [8usize, 16, 32] {
            let w = Word::new(vec![0; depth]);
            let r = distortion_check(&mp, &w, 0.5).unwrap();
            devs.push(r.max_log_deviation);
        }
        assert!(devs[1] > devs[0] * 1.3 && devs[2] > devs[1] * 1.3, "devs = {devs:?}");

        // nested all-zero cylinder ratios lambda(P(n+1,0))/lambda(P(n,0)) =
        // a_n/a_{n-1} decay like (n/(n+1))^(1/alpha): the fitted coefficient
        // of -log(ratio) ~ c/n recovers c = 1/alpha within 10%
        let cuts = ind.mp_cuts().unwrap();
        for n in [100usize, 150, 200] {
            let ratio = cuts[n] / cuts[n - 1];
            let coeff = (n as f64) * (-ratio.ln());
            let target = 1.0 / alpha;
            assert!(
                (coeff - target).abs() / target < 0.10,
                "n={n}: coefficient {coeff} vs {target}"
            );
        }
    }

    #[test]
    fn mp_model_cuts_and_tail() {
        let alpha = 0.5;
        let (mp, ind) = IntervalMapModel::mp_pair(alpha, 256).unwrap();
        let a0 = mp.interval_of(0).1;
        assert!((a0 + a0.powf(1.5) - 1.0).abs() < 1e-12);

        // lambda(P_j) * (alpha (j+1))^(1+1/alpha) two-sided bounded
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for j in 1..=200u32 {
            let (a, b) = ind.interval_of(j);
            let v = (b - a) * (alpha * (j as f64 + 1.0)).powf(1.0 + 1.0 / alpha);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        assert!(lo > 0.0 && hi / lo < 10.0, "tail ratio spread {lo}..{hi}");

        // sum_j j * lambda(P_j) converges (partial sums Cauchy at the tail)
        let partial: f64 = (0..256u32)
            .map(|j| {
                let (a, b) = ind.interval_of(j);
                j as f64 * (b - a)
            })
            .sum();
        let tail_rate: f64 = (200..256u32)
            .map(|j| {
                let (a, b) = ind.interval_of(j);
                j as f64 * (b - a)
            })
            .sum();
        assert!(partial.is_finite() && tail_rate < 0.02 * partial);
    }

    #[test]
    fn utilde_cases() {
        assert_eq!(utilde(0.5, 1.0, 0.3), 1.0);
        assert_eq!(utilde(0.5, 1.0, 0.0), 0.5);
        assert_eq!(utilde(0.5, 0.0, 0.0), 0.0);
        assert_eq!(utilde(0.5, 0.0, 0.7), 0.0);
    }

    #[test]
    fn audit_gauss_and_modified_gauss() {
        let g = markov_property_audit(&IntervalMapModel::gauss(40), 16);
        assert!(g.all_core_pass);
        let mg = markov_property_audit(&IntervalMapModel::modified_gauss(40), 16);
        assert!(mg.all_core_pass);
        // BI witness: images are (0,1) or (1/i, 1)
        let m = IntervalMapModel::modified_gauss(40);
        assert_eq!(m.branch_image(0), (0.0, 1.0));
        let (lo, hi) = m.branch_image(4); // digit 5
        assert!((lo - 0.2).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn audit_mp_fails_uniform_expansion_honestly() {
        let (mp, _) = IntervalMapModel::mp_pair(0.5, 16).unwrap();
        let audit = markov_property_audit(&mp, 64);
        let exp = audit.items.iter().find(|i| i.property == "eventual-expansion").unwrap();
        assert!(!exp.pass);
    }

    #[test]
    fn induced_branches_cover_and_return_times() {
        let (_, ind) = IntervalMapModel::mp_pair(0.5, 32).unwrap();
        assert_eq!(ind.return_time(0), Some(1));
        assert_eq!(ind.return_time(5), Some(6));
        // inverse branch of block j lands in block j and maps forward to y
        for j in [0u32, 1, 3, 7] {
            for y in [0.2, 0.5, 0.9] {
                let x = ind.inverse_branch(j, y);
                assert_eq!(ind.block_of(x), j, "block mismatch at j={j} y={y}");
                assert!((ind.forward(x) - y).abs() < 1e-9);
            }
        }
    }
}
