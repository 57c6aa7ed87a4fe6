//! Topological and Gurevich pressure with error brackets, by three
//! cross-validating routes: cylinder sums, periodic-orbit sums, and the
//! leading eigenvalue of a depth-k weighted transition matrix.
//!
//! All estimates carry `[lo, hi]` brackets combining (i) representative
//! error, charged as the variation tail `sum_{j>k} V_j` per coding step,
//! (ii) sup-bracket slack `sum_{m<=n} V_m` where the sup over a cylinder is
//! replaced by a representative value, and (iii) truncation tails of the
//! countable alphabet, bounded through each family's tail model. A diverged
//! flag models the `+infinity` region of the gap function.

use crate::error::{Error, Result};
use crate::potentials::{birkhoff_sum, birkhoff_sum_periodic, Potential, Regularity};
use crate::symbolic::{check_properties, collect_words, Symbol, TruncatedChain, Word};
use serde::Serialize;
use std::cell::RefCell;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    CylinderSum,
    PeriodicOrbit,
    TransferMatrix,
}

/// A pressure value with an explicit bracket. `diverged` means the countable
/// tail (or the overflow cap) certifies the quantity as `+infinity` at this
/// parameter; `value`/`hi` are then not meaningful.
#[derive(Debug, Clone, Serialize)]
pub struct PressureEstimate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub depth_n: usize,
    pub method: Method,
    pub truncation_a: u32,
    pub diverged: bool,
}

impl PressureEstimate {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn diverged_at(a: u32, method: Method) -> Self {
        PressureEstimate {
            value: f64::INFINITY,
            lo: f64::INFINITY,
            hi: f64::INFINITY,
            depth_n: 0,
            method,
            truncation_a: a,
            diverged: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PressureConfig {
    /// Cylinder/orbit sum depth.
    pub depth_n: usize,
    /// Block-coding depth for the weighted matrix.
    pub depth_k: usize,
    /// Depth of the exhaustive cylinder sum used for non-Hoelder potentials
    /// on finite alphabets.
    pub direct_depth_n: usize,
    pub word_cap: u64,
    /// Cap on the log of the running sum; beyond it the estimate is treated
    /// as diverged.
    pub overflow_log: f64,
    pub power_iters: usize,
    pub power_tol: f64,
}

impl Default for PressureConfig {
    fn default() -> Self {
        PressureConfig {
            depth_n: 12,
            depth_k: 1,
            direct_depth_n: 18,
            word_cap: 1 << 26,
            overflow_log: 700.0,
            power_iters: 2000,
            power_tol: 1e-12,
        }
    }
}

/// Euler-Maclaurin tail `sum_{k >= x0} k^(-e)` for `e > 1`.
fn tail_sum_power(e: f64, x0: f64) -> f64 {
    if e <= 1.0 {
        return f64::INFINITY;
    }
    x0.powf(1.0 - e) / (e - 1.0) + 0.5 * x0.powf(-e) + e * x0.powf(-e - 1.0) / 12.0
}

/// Euler-Maclaurin tail `sum_{k >= x0} (k(k+1))^(-t)` for `t > 1/2`, with the
/// integral expanded as a binomial series in `1/u`.
fn tail_sum_luroth(t: f64, x0: f64) -> f64 {
    if t <= 0.5 {
        return f64::INFINITY;
    }
    let f = |u: f64| (u * (u + 1.0)).powf(-t);
    let fp = |u: f64| -t * (2.0 * u + 1.0) * (u * (u + 1.0)).powf(-t - 1.0);
    let mut integral = 0.0;
    let mut coeff = 1.0f64;
    for m in 0..10 {
        let e = 2.0 * t + m as f64;
        let term = coeff * x0.powf(1.0 - e) / (e - 1.0);
        integral += term;
        if term.abs() < 1e-22 {
            break;
        }
        coeff *= -(t + m as f64) / (m as f64 + 1.0);
    }
    integral + 0.5 * f(x0) - fp(x0) / 12.0
}

/// Truncation-tail bracket `(lo, center, hi)` for the per-symbol weight sum
/// `sum_{id >= A} sup e^{t phi}` of a builtin log-derivative potential.
/// `None` when the alphabet is genuinely finite.
pub fn weight_tail_bracket(
    chain: &TruncatedChain,
    phi: &Potential,
    t: f64,
    a: u32,
) -> Option<(f64, f64, f64)> {
    if !chain.full_alphabet_countable {
        return None;
    }
    let t = t * phi.scale();
    let name = phi.model().map(|m| m.name.clone()).unwrap_or_default();
    let a = a as f64;
    let brk = if name == "luroth" {
        if t <= 0.5 {
            (f64::INFINITY, f64::INFINITY, f64::INFINITY)
        } else {
            let c = tail_sum_luroth(t, a + 1.0);
            let margin = t * (2.0 * a + 3.0) * ((a + 1.0) * (a + 2.0)).powf(-t - 1.0) + 1e-18;
            (c - margin, c, c + margin)
        }
    } else if name == "gauss" {
        let hi = tail_sum_power(2.0 * t, a + 1.0);
        let lo = tail_sum_power(2.0 * t, a + 2.0);
        (lo, 0.5 * (lo + hi), hi)
    } else if name == "modified-gauss" {
        let gfac = (1.0 - 1.0 / (a + 1.0)).powf(-t);
        let hi = gfac * tail_sum_power(2.0 * t, a + 1.0);
        let lo = tail_sum_power(2.0 * t, a + 2.0);
        (lo, 0.5 * (lo + hi), hi)
    } else if name.starts_with("mp-induced") {
        let alpha = phi.model().and_then(|m| m.alpha()).unwrap_or(0.5);
        let e = t * (1.0 + 1.0 / alpha);
        let hi = 4.0 * alpha.powf(-e.min(1e6)) * tail_sum_power(e, a + 1.0);
        (0.0, 0.5 * hi, hi)
    } else {
        // countable family without a tail model: unknown, treated as diverged
        (0.0, f64::INFINITY, f64::INFINITY)
    };
    Some(brk)
}

/// Depth-k block coding of the weighted transition structure, prepend
/// orientation: `raw[i*dim + j]` holds the unscaled potential value at the
/// representative of the (k+1)-word `state_j[0] . state_i` when state `j` is
/// a valid predecessor block of state `i`, else `-inf`.
pub struct RepMatrix {
    pub states: Vec<Word>,
    pub k: usize,
    pub truncation_a: u32,
    raw: Vec<f64>,
    dim: usize,
}

impl RepMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entrywise `exp(t_scaled * raw)`.
    pub fn weights(&self, t_scaled: f64) -> Vec<f64> {
        self.raw
            .iter()
            .map(|&r| if r.is_finite() { (t_scaled * r).exp() } else { 0.0 })
            .collect()
    }

    /// Per-state weight `exp(t * S_k(state))` at the canonical extension.
    pub fn state_weights(
        &self,
        chain: &TruncatedChain,
        phi: &Potential,
        t: f64,
    ) -> Result<Vec<f64>> {
        self.states
            .iter()
            .map(|w| Ok((t * birkhoff_sum(phi, chain, w)?).exp()))
            .collect()
    }
}

/// Build the depth-k representative matrix.
pub fn rep_matrix(
    chain: &TruncatedChain,
    phi: &Potential,
    k: usize,
    cap: u64,
) -> Result<RepMatrix> {
    if k == 0 {
        return Err(Error::InvalidParameter("coding depth must be >= 1".into()));
    }
    let states = collect_words(chain, k, None, None, cap)?;
    let dim = states.len();
    let index: BTreeMap<&Word, usize> = states.iter().zip(0..).collect();
    let mut raw = vec![f64::NEG_INFINITY; dim * dim];
    let scale_guard = if phi.scale() == 0.0 { 1.0 } else { phi.scale() };
    for (i, u) in states.iter().enumerate() {
        for b in 0..chain.alphabet_size() {
            if !chain.is_admissible_pair(b, u.symbols()[0]) {
                continue;
            }
            let mut pv = vec![b];
            pv.extend_from_slice(&u.symbols()[..k - 1]);
            let pw = Word::new(pv);
            if let Some(&j) = index.get(&pw) {
                let mut rv = vec![b];
                rv.extend_from_slice(u.symbols());
                let rep = Word::new(rv);
                let p = crate::symbolic::SymbolicPoint::canonical(chain, rep)?;
                raw[i * dim + j] = phi.evaluate(&p) / scale_guard;
            }
        }
    }
    Ok(RepMatrix { states, k, truncation_a: chain.alphabet_size(), raw, dim })
}

/// Tail-lumped depth-1 weight matrix for countable log-derivative families:
/// the truncated symbols are folded into one absorbing state whose incoming
/// weights are the Euler-Maclaurin tail sums and whose own representative is
/// a point just beyond the truncation. This sharpens the leading eigenvalue
/// from `O(tail)` to roughly `O(tail^2)` truncation error; rigorous brackets
/// still come from the unlumped matrix plus the tail bound.
fn lumped_weights(chain: &TruncatedChain, phi: &Potential, t: f64) -> Option<(Vec<f64>, usize)> {
    if !chain.full_alphabet_countable {
        return None;
    }
    let model = phi.model()?;
    let ts = t * phi.scale();
    let a = chain.alphabet_size();
    let name = model.name.clone();
    let a_dig = match name.as_str() {
        "gauss" | "modified-gauss" | "luroth" => a as f64, // digits run 1..=a
        _ => a as f64,
    };

    // representative point values of the depth-1 states
    let xs: Vec<f64> = (0..a)
        .map(|s| {
            let p = crate::symbolic::SymbolicPoint::canonical(chain, Word::new(vec![s]))
                .expect("single symbols are admissible");
            crate::potentials::point_value(model, &p, phi.eval_depth())
        })
        .collect();
    // lump representative: a point inside the truncated region
    let x_lump = match name.as_str() {
        "gauss" | "modified-gauss" | "luroth" => 1.0 / (a_dig + 2.0),
        s if s.starts_with("mp-induced") => {
            let cuts = model.mp_cuts()?;
            0.5 * cuts[(a as usize - 1).min(cuts.len() - 1)]
        }
        _ => return None,
    };

    // tail of prepend weights sum_{digit D > a_dig} e^{t phi(D . x)}
    let tail_in = |x: f64| -> f64 {
        match name.as_str() {
            "gauss" => tail_sum_power(2.0 * ts, a_dig + 1.0 + x),
            "modified-gauss" => {
                (1.0 - 1.0 / (a_dig + 1.0)).powf(-ts) * tail_sum_power(2.0 * ts, a_dig + 1.0 + x)
            }
            "luroth" => tail_sum_luroth(ts, a_dig + 1.0),
            s if s.starts_with("mp-induced") => {
                let alpha = model.alpha().unwrap_or(0.5);
                let e = ts * (1.0 + 1.0 / alpha);
                // calibrate the asymptotic block-size law at the boundary
                let cuts = model.mp_cuts().unwrap();
                let j = (a as usize - 1).min(cuts.len() - 2);
                let lam = cuts[j.saturating_sub(1).max(0)] - cuts[j];
                let cal = lam.powf(ts) * (alpha * (j as f64 + 1.0)).powf(e);
                cal * alpha.powf(-e) * tail_sum_power(e, a_dig + 1.0)
            }
            _ => f64::INFINITY,
        }
    };

    if !tail_in(x_lump).is_finite() {
        return None;
    }

    let dim = a as usize + 1;
    let lump = a as usize;
    let mut w = vec![0.0f64; dim * dim];
    for i in 0..a as usize {
        for b in 0..a {
            if chain.is_admissible_pair(b, i as u32) {
                let x = model.inverse_branch(b, xs[i]);
                w[i * dim + b as usize] = (-ts * model.deriv_in_branch(b, x).ln()).exp();
            }
        }
        // truncated predecessors lumped into one column
        w[i * dim + lump] = tail_in(xs[i]);
    }
    // lump row: prepending a represented symbol to a truncated point; for
    // the strictly-decreasing family only the unrestricted symbol reaches it
    let into_lump = |b: u32| -> bool {
        if name == "modified-gauss" {
            b == 0
        } else {
            true
        }
    };
    for b in 0..a {
        if into_lump(b) {
            let x = model.inverse_branch(b, x_lump);
            w[lump * dim + b as usize] = (-ts * model.deriv_in_branch(b, x).ln()).exp();
        }
    }
    w[lump * dim + lump] = tail_in(x_lump);
    Some((w, dim))
}

/// Leading eigendata of the weighted transfer matrix.
#[derive(Debug, Clone)]
pub struct TransferLeading {
    pub lambda: f64,
    pub log_lambda: f64,
    pub eigvec: Vec<f64>,
    pub states: Vec<Word>,
    pub residual: f64,
    pub iterations: usize,
}

fn power_iterate(
    w: &[f64],
    dim: usize,
    iters: usize,
    tol: f64,
    transpose: bool,
) -> Result<(f64, Vec<f64>, f64, usize)> {
    let mut v = vec![1.0f64; dim];
    let mut lambda = 1.0f64;
    let mut residual = f64::INFINITY;
    let mut used = 0;
    for it in 0..iters {
        let mut next = vec![0.0f64; dim];
        if transpose {
            for (j, &vj) in v.iter().enumerate() {
                if vj == 0.0 {
                    continue;
                }
                let row = &w[j * dim..(j + 1) * dim];
                for (nx, &e) in next.iter_mut().zip(row) {
                    *nx += e * vj;
                }
            }
        } else {
            for (i, nx) in next.iter_mut().enumerate() {
                let row = &w[i * dim..(i + 1) * dim];
                *nx = row.iter().zip(&v).map(|(&e, &vj)| e * vj).sum();
            }
        }
        let norm = next.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if norm == 0.0 {
            return Err(Error::NonConvergence { iterations: it, residual: f64::INFINITY });
        }
        for x in &mut next {
            *x /= norm;
        }
        lambda = norm;
        residual = next.iter().zip(&v).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        v = next;
        used = it + 1;
        if residual < tol {
            break;
        }
    }
    if !residual.is_finite() {
        return Err(Error::NonConvergence { iterations: used, residual });
    }
    Ok((lambda, v, residual, used))
}

/// Power iteration for the leading eigenvalue/eigenfunction of the depth-k
/// transfer matrix of `t*phi`. `lambda` estimates `exp(P_G(t phi))` up to the
/// representative and truncation brackets reported by the pressure routines;
/// `eigvec` estimates the eigenfunction on depth-k cylinders.
pub fn transfer_operator_leading(
    chain: &TruncatedChain,
    phi: &Potential,
    t: f64,
    depth_k: usize,
    iterations: usize,
    tol: f64,
    cap: u64,
) -> Result<TransferLeading> {
    // lumped truncation for depth-1 countable families
    if depth_k == 1 {
        if let Some((w, dim)) = lumped_weights(chain, phi, t) {
            let (lambda, mut v, residual, used) = power_iterate(&w, dim, iterations, tol, false)?;
            if used == iterations && residual > tol.max(1e-9) * 1e3 {
                return Err(Error::NonConvergence { iterations: used, residual });
            }
            v.truncate(dim - 1);
            let states = collect_words(chain, 1, None, None, cap)?;
            return Ok(TransferLeading {
                lambda,
                log_lambda: lambda.ln(),
                eigvec: v,
                states,
                residual,
                iterations: used,
            });
        }
    }
    let m = rep_matrix(chain, phi, depth_k, cap)?;
    let w = m.weights(t * phi.scale());
    let (lambda, v, residual, used) = power_iterate(&w, m.dim, iterations, tol, false)?;
    if used == iterations && residual > tol.max(1e-9) * 1e3 {
        return Err(Error::NonConvergence { iterations: used, residual });
    }
    Ok(TransferLeading {
        lambda,
        log_lambda: lambda.ln(),
        eigvec: v,
        states: m.states,
        residual,
        iterations: used,
    })
}

/// Left (adjoint) leading eigenvector; used to assemble RPF measures.
pub fn transfer_adjoint_leading(
    chain: &TruncatedChain,
    phi: &Potential,
    t: f64,
    depth_k: usize,
    iterations: usize,
    tol: f64,
    cap: u64,
) -> Result<TransferLeading> {
    if depth_k == 1 {
        if let Some((w, dim)) = lumped_weights(chain, phi, t) {
            let (lambda, mut v, residual, used) = power_iterate(&w, dim, iterations, tol, true)?;
            v.truncate(dim - 1);
            let states = collect_words(chain, 1, None, None, cap)?;
            return Ok(TransferLeading {
                lambda,
                log_lambda: lambda.ln(),
                eigvec: v,
                states,
                residual,
                iterations: used,
            });
        }
    }
    let m = rep_matrix(chain, phi, depth_k, cap)?;
    let w = m.weights(t * phi.scale());
    let (lambda, v, residual, used) = power_iterate(&w, m.dim, iterations, tol, true)?;
    Ok(TransferLeading {
        lambda,
        log_lambda: lambda.ln(),
        eigvec: v,
        states: m.states,
        residual,
        iterations: used,
    })
}

/// Cylinder-sum pressure `(1/n) log sum_{|w|=n} exp(sup_C S_n(t phi))`,
/// evaluated through the depth-k matrix with sup-bracket and truncation
/// slack.
pub fn pressure_cylinder_sum(
    chain: &TruncatedChain,
    phi: &Potential,
    t: f64,
    n: usize,
    cfg: &PressureConfig,
) -> Result<PressureEstimate> {
    if n < 1 {
        return Err(Error::InvalidParameter("cylinder depth must be >= 1".into()));
    }
    let a = chain.alphabet_size();
    let ts = t * phi.scale();
    let tail = weight_tail_bracket(chain, phi, t, a);
    if matches!(tail, Some((_, _, hi)) if !hi.is_finite()) {
        return Ok(PressureEstimate::diverged_at(a, Method::CylinderSum));
    }
    let k = cfg.depth_k.min(n);
    let m = rep_matrix(chain, phi, k, cfg.word_cap)?;
    let w = m.weights(ts);
    let mut v = m.state_weights(chain, phi, t)?;
    let mut log_scale = 0.0f64;
    for _ in 0..n - k {
        let mut next = vec![0.0f64; m.dim];
        // prepend step: new-state weight sums over its continuations
        for (j, &vj) in v.iter().enumerate() {
            if vj == 0.0 {
                continue;
            }
            let row = &w[j * m.dim..(j + 1) * m.dim];
            for (nx, &e) in next.iter_mut().zip(row) {
                *nx += e * vj;
            }
        }
        let norm = next.iter().fold(0.0f64, |mx, &x| mx.max(x));
        if norm == 0.0 {
            return Err(Error::InvalidParameter("weighted sum vanished".into()));
        }
        log_scale += norm.ln();
        for x in &mut next {
            *x /= norm;
        }
        v = next;
        if log_scale > cfg.overflow_log {
            return Ok(PressureEstimate::diverged_at(a, Method::CylinderSum));
        }
    }
    let total: f64 = v.iter().sum();
    let nf = n as f64;

    // single-block sums take the sharp tail estimate directly
    if let Some((tlo, tc, thi)) = tail {
        if n == 1 && k == 1 {
            let s = total * log_scale.exp();
            let sup_slack = ts.abs() * phi.variation_sum(n);
            return Ok(PressureEstimate {
                value: (s + tc).ln() / nf,
                lo: (s + tlo).ln() / nf - sup_slack / nf,
                hi: (s + thi).ln() / nf + sup_slack / nf,
                depth_n: n,
                method: Method::CylinderSum,
                truncation_a: a,
                diverged: false,
            });
        }
    }
    let mut tail_log_hi = 0.0;
    if let Some((_, _, thi)) = tail {
        let wmin = min_incoming_sum(&w, m.dim);
        tail_log_hi = if wmin > 0.0 {
            (n - k) as f64 * (1.0 + thi / wmin).ln()
        } else {
            f64::INFINITY
        };
    }
    let log_sum = total.max(f64::MIN_POSITIVE).ln() + log_scale;
    if log_sum > cfg.overflow_log {
        return Ok(PressureEstimate::diverged_at(a, Method::CylinderSum));
    }
    let rep_slack = ts.abs() * phi.variation_tail(k) * (n.saturating_sub(k)) as f64;
    let sup_slack = ts.abs() * phi.variation_sum(n);
    Ok(PressureEstimate {
        value: log_sum / nf,
        lo: (log_sum - rep_slack) / nf,
        hi: (log_sum + rep_slack + sup_slack + tail_log_hi) / nf,
        depth_n: n,
        method: Method::CylinderSum,
        truncation_a: a,
        diverged: false,
    })
}

/// Minimum over current states of the truncated per-step prepend sum.
fn min_incoming_sum(w: &[f64], dim: usize) -> f64 {
    let mut min = f64::INFINITY;
    for j in 0..dim {
        let s: f64 = w[j * dim..(j + 1) * dim].iter().sum();
        min = min.min(s);
    }
    min
}

/// Exhaustive cylinder-sum pressure for finite alphabets by depth-first
/// enumeration in reversed word order (suffix point values are shared along
/// the stack). This is the route for non-Hoelder potentials, whose variation
/// tails are not summable; the sup-bracket slack `sum_{m<=n} V_m / n` still
/// vanishes as n grows.
pub fn pressure_cylinder_sum_direct(
    chain: &TruncatedChain,
    phi: &Potential,
    t: f64,
    n: usize,
    cfg: &PressureConfig,
) -> Result<PressureEstimate> {
    let a = chain.alphabet_size();
    if chain.full_alphabet_countable {
        return Err(Error::InvalidParameter(
            "direct enumeration requires a genuinely finite alphabet".into(),
        ));
    }
    let projected = (a as f64).powi(n as i32);
    if projected > cfg.word_cap as f64 {
        return Err(Error::ResourceCap { projected, cap: cfg.word_cap });
    }
    let ts = t * phi.scale();
    let model = phi.model();
    let scale_guard = if phi.scale() == 0.0 { 1.0 } else { phi.scale() };
    let seeds: Vec<f64> = (0..a)
        .map(|s| match model {
            Some(m) => {
                let p = crate::symbolic::SymbolicPoint::canonical(chain, Word::new(vec![s]))
                    .expect("single symbols are admissible");
                crate::potentials::point_value(m, &p, phi.eval_depth())
            }
            None => 0.0,
        })
        .collect();
    let sym_values: Vec<f64> = (0..a)
        .map(|s| {
            let p = crate::symbolic::SymbolicPoint::canonical(chain, Word::new(vec![s]))
                .expect("single symbols are admissible");
            phi.evaluate(&p) / scale_guard
        })
        .collect();

    // stack entries: (symbol, point value, partial raw birkhoff sum)
    let mut total = 0.0f64;
    let mut stack: Vec<(u32, f64, f64)> = Vec::with_capacity(n);
    let mut next_try: Vec<u32> = vec![0];
    loop {
        let d = stack.len();
        if d == n {
            let (_, _, s) = stack[n - 1];
            total += (ts * s).exp();
            stack.pop();
            next_try.pop();
            continue;
        }
        let start = next_try[d];
        let mut chosen = None;
        for s in start..a {
            // reversed admissibility: the new symbol precedes the previous
            let ok = match stack.last() {
                None => true,
                Some(&(prev, _, _)) => chain.is_admissible_pair(s, prev),
            };
            if ok {
                chosen = Some(s);
                break;
            }
        }
        match chosen {
            Some(s) => {
                next_try[d] = s + 1;
                let (x, acc) = match stack.last() {
                    None => (seeds[s as usize], 0.0),
                    Some(&(_, xp, sp)) => {
                        let x = match model {
                            Some(m) => m.inverse_branch(s, xp),
                            None => 0.0,
                        };
                        (x, sp)
                    }
                };
                let term = match model {
                    Some(m) => -m.deriv_in_branch(s, x).ln(),
                    None => sym_values[s as usize],
                };
                stack.push((s, x, acc + term));
                next_try.push(0);
            }
            None => {
                if d == 0 {
                    break;
                }
                stack.pop();
                next_try.pop();
            }
        }
    }
    let log_sum = total.ln();
    if log_sum > cfg.overflow_log {
        return Ok(PressureEstimate::diverged_at(a, Method::CylinderSum));
    }
    let sup_slack = ts.abs() * phi.variation_sum(n);
    let nf = n as f64;
    Ok(PressureEstimate {
        value: log_sum / nf,
        lo: (log_sum - sup_slack) / nf,
        hi: (log_sum + 2.0 * sup_slack) / nf,
        depth_n: n,
        method: Method::CylinderSum,
        truncation_a: a,
        diverged: false,
    })
}

/// Gurevich pressure `(1/n) log Z_n(t phi, base)` over periodic words, by
/// direct enumeration when affordable and by matrix powers otherwise.
/// Base-independence is verified against a second symbol.
pub fn pressure_gurevich(
    chain: &TruncatedChain,
    phi: &Potential,
    t: f64,
    base: Symbol,
    n: usize,
    cfg: &PressureConfig,
) -> Result<PressureEstimate> {
    let props = check_properties(chain, 64);
    if props.mixing_witness_power.is_none() {
        return Err(Error::NotMixing(if props.mixing_conclusive {
            "transition matrix has no strictly positive power".into()
        } else {
            "mixing inconclusive within the power bound".into()
        }));
    }
    if base.0 >= chain.alphabet_size() {
        return Err(Error::InvalidParameter("base symbol outside the alphabet".into()));
    }
    let a = chain.alphabet_size();
    let ts = t * phi.scale();
    let tail = weight_tail_bracket(chain, phi, t, a);
    if matches!(tail, Some((_, _, hi)) if !hi.is_finite()) {
        return Ok(PressureEstimate::diverged_at(a, Method::PeriodicOrbit));
    }

    let direct_sum = |b: Symbol| -> Result<Option<f64>> {
        let mut z = 0.0f64;
        for w in crate::symbolic::enumerate_words(chain, n, Some(b), None, cfg.word_cap)? {
            if !chain.is_admissible_pair(w.last().unwrap(), w.first().unwrap()) {
                continue;
            }
            z += (t * birkhoff_sum_periodic(phi, chain, &w)?).exp();
        }
        Ok(if z > 0.0 { Some(z.ln()) } else { None })
    };

    let projected = (a as f64).powi(n as i32 - 1);
    let (log_z, method) = if projected <= (1 << 22) as f64 {
        let z = direct_sum(base)?.ok_or_else(|| {
            Error::InvalidParameter("no periodic words through the base symbol".into())
        })?;
        (z, Method::PeriodicOrbit)
    } else {
        let m = rep_matrix(chain, phi, cfg.depth_k.min(n), cfg.word_cap)?;
        (matrix_power_trace_from(&m, ts, n, Some(base))?, Method::TransferMatrix)
    };

    let k = cfg.depth_k.min(n);
    let rep_slack = match method {
        Method::PeriodicOrbit => ts.abs() * phi.variation_bound(phi.eval_depth()) * n as f64,
        _ => ts.abs() * phi.variation_tail(k) * n as f64,
    };
    let mut tail_log_hi = 0.0;
    if let Some((_, _, thi)) = tail {
        let m1 = rep_matrix(chain, phi, 1, cfg.word_cap)?;
        let wmin = min_incoming_sum(&m1.weights(ts), m1.dim());
        tail_log_hi = if wmin > 0.0 { n as f64 * (1.0 + thi / wmin).ln() } else { f64::INFINITY };
    }
    if log_z > cfg.overflow_log {
        return Ok(PressureEstimate::diverged_at(a, method));
    }
    // finite-n limit allowance: Z_n deviates from lambda^n by at most the
    // product of the eigenvector spreads and the state count (rank-one
    // picture of W^n), so the bracket widens by log(that)/n
    let limit_allowance = {
        let m1 = rep_matrix(chain, phi, 1, cfg.word_cap)?;
        let w1 = m1.weights(ts);
        let spread = |v: &[f64]| -> f64 {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for &x in v {
                if x > 0.0 {
                    lo = lo.min(x);
                    hi = hi.max(x);
                }
            }
            if lo > 0.0 && hi > 0.0 {
                (hi / lo).ln()
            } else {
                0.0
            }
        };
        let right = power_iterate(&w1, m1.dim(), cfg.power_iters, cfg.power_tol, false)?;
        let left = power_iterate(&w1, m1.dim(), cfg.power_iters, cfg.power_tol, true)?;
        ((m1.dim() as f64).ln() + spread(&right.1) + spread(&left.1) + 2.0) / n as f64
    };
    let nf = n as f64;
    let est = PressureEstimate {
        value: log_z / nf,
        lo: (log_z - rep_slack) / nf - limit_allowance,
        hi: (log_z + rep_slack + tail_log_hi) / nf + limit_allowance,
        depth_n: n,
        method,
        truncation_a: a,
        diverged: false,
    };

    // base-independence spot check
    if let Some(other) = (0..a).find(|&s| s != base.0) {
        let z_other = match method {
            Method::PeriodicOrbit => direct_sum(Symbol(other))?.map(|z| z / nf),
            _ => {
                let m = rep_matrix(chain, phi, cfg.depth_k.min(n), cfg.word_cap)?;
                Some(matrix_power_trace_from(&m, ts, n, Some(Symbol(other)))? / nf)
            }
        };
        if let Some(zo) = z_other {
            let allowance = est.width() + (2.0 * (a as f64).ln() + 8.0) / nf;
            if (zo - est.value).abs() > allowance {
                return Err(Error::InvalidParameter(format!(
                    "periodic-orbit sums disagree across base symbols: {} vs {zo} (allowance {allowance})",
                    est.value
                )));
            }
        }
    }
    Ok(est)
}

/// `log sum_{states u, u_0 = base} (W^n)[u][u]` by binary powering with
/// rescaling; `base = None` takes the full trace.
fn matrix_power_trace_from(m: &RepMatrix, ts: f64, n: usize, base: Option<Symbol>) -> Result<f64> {
    let dim = m.dim;
    let mut w = m.weights(ts);
    let mut logw = 0.0f64;
    let normalize = |mat: &mut [f64], log: &mut f64| {
        let mx = mat.iter().fold(0.0f64, |a, &b| a.max(b));
        if mx > 0.0 {
            for x in mat.iter_mut() {
                *x /= mx;
            }
            *log += mx.ln();
        }
    };
    let matmul = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0f64; dim * dim];
        for i in 0..dim {
            for l in 0..dim {
                let v = a[i * dim + l];
                if v == 0.0 {
                    continue;
                }
                let row = &b[l * dim..(l + 1) * dim];
                let out = &mut c[i * dim..(i + 1) * dim];
                for (o, &bb) in out.iter_mut().zip(row) {
                    *o += v * bb;
                }
            }
        }
        c
    };
    normalize(&mut w, &mut logw);
    let mut result: Option<(Vec<f64>, f64)> = None;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = Some(match result {
                None => (w.clone(), logw),
                Some((r, lr)) => {
                    let mut c = matmul(&r, &w);
                    let mut lc = lr + logw;
                    normalize(&mut c, &mut lc);
                    (c, lc)
                }
            });
        }
        e >>= 1;
        if e > 0 {
            let mut sq = matmul(&w, &w);
            let mut ls = 2.0 * logw;
            normalize(&mut sq, &mut ls);
            w = sq;
            logw = ls;
        }
    }
    let (r, lr) = result.expect("n >= 1");
    let mut tr = 0.0f64;
    for (i, state) in m.states.iter().enumerate() {
        if base.map_or(true, |b| state.symbols()[0] == b.0) {
            tr += r[i * dim + i];
        }
    }
    if tr <= 0.0 {
        return Err(Error::InvalidParameter("trace vanished in matrix powering".into()));
    }
    Ok(tr.ln() + lr)
}

/// Pressure engine with a cached base pressure `P(phi)`; produces
/// `G(t) = P(t phi) - t P(phi)` with combined brackets.
pub struct PressureContext {
    pub chain: TruncatedChain,
    pub phi: Potential,
    pub cfg: PressureConfig,
    p_base: RefCell<Option<PressureEstimate>>,
}

impl PressureContext {
    pub fn new(chain: TruncatedChain, phi: Potential, cfg: PressureConfig) -> Self {
        PressureContext { chain, phi, cfg, p_base: RefCell::new(None) }
    }

    /// `P(t phi)` by the default route for the potential's regularity class:
    /// exhaustive cylinder sums for non-Hoelder potentials, transfer
    /// eigenvalue otherwise.
    pub fn pressure(&self, t: f64) -> Result<PressureEstimate> {
        match self.phi.regularity {
            Regularity::NonHoelder => pressure_cylinder_sum_direct(
                &self.chain,
                &self.phi,
                t,
                self.cfg.direct_depth_n,
                &self.cfg,
            ),
            _ => self.transfer_pressure(t),
        }
    }

    fn transfer_pressure(&self, t: f64) -> Result<PressureEstimate> {
        let a = self.chain.alphabet_size();
        let ts = t * self.phi.scale();
        let tail = weight_tail_bracket(&self.chain, &self.phi, t, a);
        if matches!(tail, Some((_, _, hi)) if !hi.is_finite()) {
            return Ok(PressureEstimate::diverged_at(a, Method::TransferMatrix));
        }
        let k = self.cfg.depth_k;
        let lead = transfer_operator_leading(
            &self.chain,
            &self.phi,
            t,
            k,
            self.cfg.power_iters,
            self.cfg.power_tol,
            self.cfg.word_cap,
        )?;
        // rigorous truncation bracket from the plain (unlumped) matrix: the
        // truncated eigenvalue is a lower bound, and the tail inflates it by
        // at most (1 + T / min incoming sum)
        let mut lo_anchor = lead.log_lambda;
        let mut hi_anchor = lead.log_lambda;
        let rep_slack = ts.abs() * self.phi.variation_tail(k);
        if let Some((_, _, thi)) = tail {
            let m1 = rep_matrix(&self.chain, &self.phi, 1, self.cfg.word_cap)?;
            let w1 = m1.weights(ts);
            let (plain_lambda, _, _, _) =
                power_iterate(&w1, m1.dim(), self.cfg.power_iters, self.cfg.power_tol, false)?;
            let wmin = min_incoming_sum(&w1, m1.dim());
            let tail_log_hi =
                if wmin > 0.0 { (1.0 + thi / wmin).ln() } else { f64::INFINITY };
            lo_anchor = lo_anchor.min(plain_lambda.ln());
            hi_anchor = hi_anchor.max(plain_lambda.ln() + tail_log_hi);
        }
        let resid = lead.residual.max(self.cfg.power_tol) * 4.0;
        Ok(PressureEstimate {
            value: lead.log_lambda,
            lo: lo_anchor - rep_slack - resid,
            hi: hi_anchor + rep_slack + resid,
            depth_n: lead.iterations,
            method: Method::TransferMatrix,
            truncation_a: a,
            diverged: false,
        })
    }

    /// Cached `P(phi)` (the `t = 1` normalization point).
    pub fn base_pressure(&self) -> Result<PressureEstimate> {
        if let Some(p) = self.p_base.borrow().as_ref() {
            return Ok(p.clone());
        }
        let p = self.pressure(1.0)?;
        *self.p_base.borrow_mut() = Some(p.clone());
        Ok(p)
    }

    /// Gap function `G(t) = P(t phi) - t P(phi)` with combined brackets.
    pub fn gap(&self, t: f64) -> Result<PressureEstimate> {
        let pt = self.pressure(t)?;
        if pt.diverged {
            return Ok(pt);
        }
        let p1 = self.base_pressure()?;
        if p1.diverged {
            return Err(Error::InvalidParameter(
                "base pressure diverged; potential is not normalizable".into(),
            ));
        }
        Ok(PressureEstimate {
            value: pt.value - t * p1.value,
            lo: pt.lo - t * p1.hi,
            hi: pt.hi - t * p1.lo,
            depth_n: pt.depth_n,
            method: pt.method,
            truncation_a: pt.truncation_a,
            diverged: false,
        })
    }

    /// Left endpoint of the parameter range where the gap is finite (0 for
    /// genuinely finite alphabets).
    pub fn singular_threshold(&self) -> f64 {
        if weight_tail_bracket(&self.chain, &self.phi, 1e-9, self.chain.alphabet_size())
            .map_or(true, |(_, _, h)| h.is_finite())
        {
            return 0.0;
        }
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let fin = weight_tail_bracket(&self.chain, &self.phi, mid, self.chain.alphabet_size())
                .map_or(true, |(_, _, h)| h.is_finite());
            if fin {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::IntervalMapModel;

    fn cfg() -> PressureConfig {
        PressureConfig::default()
    }

    #[test]
    fn full_two_shift_constant_potential_is_exact_zero() {
        let chain = TruncatedChain::full_shift(2);
        let phi = Potential::constant(-(2f64).ln());
        for n in [1usize, 3, 7] {
            let p = pressure_cylinder_sum(&chain, &phi, 1.0, n, &cfg()).unwrap();
            assert!(p.value.abs() < 1e-12, "n={n}: {}", p.value);
            assert!(p.lo <= 0.0 && p.hi >= 0.0);
        }
    }

    #[test]
    fn full_two_shift_closed_form_in_t() {
        let chain = TruncatedChain::full_shift(2);
        let phi = Potential::constant(-(2f64).ln());
        for t in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let p = pressure_cylinder_sum(&chain, &phi, t, 6, &cfg()).unwrap();
            let expect = (1.0 - t) * (2f64).ln();
            assert!((p.value - expect).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn luroth_series_matches_direct_summation() {
        let model = IntervalMapModel::luroth(10_000);
        let chain = model.chain();
        let phi = Potential::log_deriv(&model);
        let t = 0.75;
        let p = pressure_cylinder_sum(&chain, &phi, t, 1, &cfg()).unwrap();
        // independent oracle: high-precision partial sum + integral tail
        let mut s = 0.0f64;
        let mut c = 0.0f64;
        for k in 1..=10_000_000u64 {
            let term = ((k as f64) * (k as f64 + 1.0)).powf(-t);
            let y = term - c;
            let tt = s + y;
            c = (tt - s) - y;
            s = tt;
        }
        let x0 = 10_000_001.0f64;
        let tail_mid = x0.powf(1.0 - 2.0 * t) / (2.0 * t - 1.0);
        let oracle = (s + tail_mid).ln();
        assert!((p.value - oracle).abs() < 1e-8, "cylinder sum {} vs oracle {oracle}", p.value);
        assert!(p.lo <= oracle && oracle <= p.hi);
    }

    #[test]
    fn luroth_gap_vanishes_at_one() {
        let model = IntervalMapModel::luroth(10_000);
        let chain = model.chain();
        let phi = Potential::log_deriv(&model);
        let p = pressure_cylinder_sum(&chain, &phi, 1.0, 1, &cfg()).unwrap();
        assert!(p.value.abs() < 1e-6, "P_G at t=1: {}", p.value);
    }

    #[test]
    fn gurevich_counting_and_entropy() {
        let chain = TruncatedChain::full_shift(2);
        let phi = Potential::constant(0.0);
        for n in [4usize, 8, 12] {
            let p = pressure_gurevich(&chain, &phi, 1.0, Symbol(0), n, &cfg()).unwrap();
            let expect = ((2f64).powi(n as i32 - 1)).ln() / n as f64;
            assert!((p.value - expect).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn gurevich_gauss_acip_normalized() {
        let model = IntervalMapModel::gauss(200);
        let chain = model.chain();
        let phi = Potential::log_deriv(&model);
        let p = pressure_gurevich(&chain, &phi, 1.0, Symbol(0), 3, &cfg()).unwrap();
        assert!(p.lo <= 0.0 && 0.0 <= p.hi, "P_G bracket [{}, {}] misses 0", p.lo, p.hi);
    }

    #[test]
    fn gurevich_rejects_non_mixing() {
        let chain = TruncatedChain::from_dense(vec![vec![false, true], vec![true, false]]).unwrap();
        let phi = Potential::constant(0.0);
        assert!(matches!(
            pressure_gurevich(&chain, &phi, 1.0, Symbol(0), 6, &cfg()),
            Err(Error::NotMixing(_))
        ));
    }

    #[test]
    fn transfer_leading_examples() {
        // row-stochastic: lambda = 1, constant eigenvector
        let chain = TruncatedChain::full_shift(2);
        let phi = Potential::constant(-(2f64).ln());
        let lead = transfer_operator_leading(&chain, &phi, 1.0, 1, 500, 1e-13, 1 << 20).unwrap();
        assert!((lead.lambda - 1.0).abs() < 1e-10);
        assert!((lead.eigvec[0] - lead.eigvec[1]).abs() < 1e-10);

        // t = 0: spectral radius of the 0/1 matrix (golden mean shift)
        let golden = TruncatedChain::from_dense(vec![vec![true, true], vec![true, false]]).unwrap();
        let lead = transfer_operator_leading(&golden, &phi, 0.0, 1, 500, 1e-13, 1 << 20).unwrap();
        assert!((lead.lambda - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn transfer_gauss_eigendata() {
        let model = IntervalMapModel::gauss(200);
        let chain = model.chain();
        let phi = Potential::log_deriv(&model);
        let lead = transfer_operator_leading(&chain, &phi, 1.0, 1, 4000, 1e-13, 1 << 20).unwrap();
        assert!((lead.lambda - 1.0).abs() < 1e-3, "lambda = {}", lead.lambda);
        // eigenvector proportional to 1/(1+x) at cylinder representatives
        let g = |x: f64| 1.0 / (1.0 + x);
        let val = |id: u32| {
            crate::potentials::point_value(
                &model,
                &crate::symbolic::SymbolicPoint::canonical(&chain, Word::new(vec![id])).unwrap(),
                40,
            )
        };
        let ref_ratio = lead.eigvec[0] / g(val(0));
        let mut worst = 0.0f64;
        for id in 0..60u32 {
            let ratio = lead.eigvec[id as usize] / g(val(id));
            worst = worst.max((ratio / ref_ratio - 1.0).abs());
        }
        assert!(worst < 0.02, "eigenvector deviates from the density by {worst}");
    }

    #[test]
    fn gauss_gap_diverges_at_half() {
        let model = IntervalMapModel::gauss(200);
        let chain = model.chain();
        let phi = Potential::log_deriv(&model);
        let ctx = PressureContext::new(chain, phi, cfg());
        assert!(ctx.gap(0.5).unwrap().diverged);
        assert!(ctx.gap(0.45).unwrap().diverged);
        assert!((ctx.singular_threshold() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn gap_vanishes_at_one_within_bracket() {
        for model in [
            IntervalMapModel::gauss(300),
            IntervalMapModel::luroth(300),
            IntervalMapModel::modified_gauss(300),
        ] {
            let chain = model.chain();
            let phi = Potential::log_deriv(&model);
            let name = model.name.clone();
            let ctx = PressureContext::new(chain, phi, cfg());
            let g = ctx.gap(1.0).unwrap();
            assert!(g.lo <= 0.0 && 0.0 <= g.hi, "{name}: [{}, {}]", g.lo, g.hi);
        }
    }

    #[test]
    fn methods_agree_within_brackets() {
        let model = IntervalMapModel::gauss(60);
        let chain = model.chain();
        let phi = Potential::log_deriv(&model);
        for t in [0.8, 1.0] {
            let cyl = pressure_cylinder_sum(&chain, &phi, t, 10, &cfg()).unwrap();
            let orb = pressure_gurevich(&chain, &phi, t, Symbol(0), 3, &cfg()).unwrap();
            let ctx = PressureContext::new(chain.clone(), phi.clone(), cfg());
            let tm = ctx.pressure(t).unwrap();
            let overlap = |a: &PressureEstimate, b: &PressureEstimate| a.lo <= b.hi && b.lo <= a.hi;
            assert!(overlap(&cyl, &tm), "t={t}: cyl [{},{}] tm [{},{}]", cyl.lo, cyl.hi, tm.lo, tm.hi);
            assert!(overlap(&orb, &tm), "t={t}: orb [{},{}] tm [{},{}]", orb.lo, orb.hi, tm.lo, tm.hi);
        }
    }

    #[test]
    fn monotone_in_truncation() {
        let t = 0.8;
        let mut prev = f64::NEG_INFINITY;
        for a in [50u32, 100, 400, 1000] {
            let model = IntervalMapModel::luroth(a);
            let chain = model.chain();
            let phi = Potential::log_deriv(&model);
            let m = rep_matrix(&chain, &phi, 1, 1 << 22).unwrap();
            let s: f64 = m.state_weights(&chain, &phi, t).unwrap().iter().sum();
            assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn mp_pressure_direct_shape() {
        let (mp, _) = IntervalMapModel::mp_pair(0.5, 64).unwrap();
        let chain = mp.chain();
        let phi = Potential::log_deriv(&mp);
        let ctx = PressureContext::new(chain, phi, cfg());
        let p0 = ctx.pressure(0.0).unwrap();
        assert!((p0.value - (2f64).ln()).abs() < 1e-9);
        let p_mid = ctx.pressure(0.7).unwrap();
        let p1 = ctx.pressure(1.0).unwrap();
        assert!(p0.value > p_mid.value && p_mid.value > p1.value);
        assert!(p1.lo <= 0.0 && 0.0 <= p1.hi, "P(phi) bracket [{}, {}]", p1.lo, p1.hi);
    }
}
