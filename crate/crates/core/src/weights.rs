//! Weight constants, exponential brackets, and deviation decay rates.

use statrs::function::gamma::gamma;

use crate::cellfn::CellFn;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::measure;
use crate::numeric::{log_exp_mean, Accumulator};
use crate::profile;
use crate::space::{CellSet, Space};

/// Constants for decay-based bounds.
///
/// `c1` scales the envelope, `c2` is the decay rate, `alpha` the
/// evaluation point of bracket bounds, and `c_f` an optional sharper
/// envelope scale taking the place of `c1`.
#[derive(Clone, Copy, Debug)]
pub struct JnParams {
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    pub c_f: Option<f64>,
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} = {x} must be positive and finite")))
    }
}

/// Mean of g over the cells of a set, where g is given pointwise.
fn weighted_mean_of(
    space: &Space,
    cells: &CellSet,
    mut g: impl FnMut(u32) -> f64,
) -> (f64, f64) {
    let mut num = Accumulator::new();
    let mut den = Accumulator::new();
    for &(lo, hi) in cells.runs() {
        for i in lo..hi {
            let w = space.weight(i);
            num.add(w * g(i));
            den.add(w);
        }
    }
    (num.value(), den.value())
}

/// Muckenhoupt constant of a positive weight function:
/// sup over generators of mean(w) * mean(w^(-1/(p-1)))^(p-1).
pub fn ap_constant(w: &CellFn, family: &Family, p: f64, space: &Space) -> Result<f64> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if family.is_empty() {
        return Err(Error::InvalidParams("A_p constant over an empty family".into()));
    }
    if let Some(i) = w.values().iter().position(|&v| v <= 0.0) {
        return Err(Error::NonpositiveWeight(i));
    }
    let q = -1.0 / (p - 1.0);
    let classes = profile::distribution_classes(w.values(), family, space);
    let mut best = f64::NEG_INFINITY;
    for info in &classes.classes {
        let cells = family.member(info.representative);
        let (num_w, den) = weighted_mean_of(space, cells, |i| w.get(i));
        let (num_q, _) = weighted_mean_of(space, cells, |i| w.get(i).powf(q));
        let v = (num_w / den) * (num_q / den).powf(p - 1.0);
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// Muckenhoupt constant of exp(f), evaluated in log space so that large
/// exponents cannot overflow.
fn ap_of_exp(f: &CellFn, family: &Family, p: f64, space: &Space) -> Result<f64> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if family.is_empty() {
        return Err(Error::InvalidParams("A_p constant over an empty family".into()));
    }
    let q = -1.0 / (p - 1.0);
    let classes = profile::distribution_classes(f.values(), family, space);
    let mut best = f64::NEG_INFINITY;
    for info in &classes.classes {
        let cells = family.member(info.representative);
        let total = space.measure(cells);
        let la = log_exp_mean(
            cells.iter().map(|i| (f.get(i), space.weight(i))),
            total,
        );
        let lb = log_exp_mean(
            cells.iter().map(|i| (q * f.get(i), space.weight(i))),
            total,
        );
        let v = la + (p - 1.0) * lb;
        if v > best {
            best = v;
        }
    }
    Ok(best.exp())
}

/// Exponential bracket: sup over generators of mean(exp|f - mean(f)|).
pub fn exp_bracket(f: &CellFn, family: &Family, space: &Space) -> Result<f64> {
    scaled_exp_bracket(f, family, 1.0, space)
}

/// Exponential bracket at rate alpha, normalized by the seminorm:
/// sup over generators of mean(exp(alpha |f - mean(f)| / seminorm)).
pub fn exp_bracket_at(f: &CellFn, family: &Family, alpha: f64, space: &Space) -> Result<f64> {
    check_positive("alpha", alpha)?;
    let bmo = measure::bmo_seminorm(f, family, 1.0, space)?.value;
    if bmo == 0.0 {
        return Err(Error::ZeroSeminorm);
    }
    scaled_exp_bracket(f, family, alpha / bmo, space)
}

/// sup over generators of mean(exp(rate * |f - mean(f)|)).
fn scaled_exp_bracket(f: &CellFn, family: &Family, rate: f64, space: &Space) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::InvalidParams("bracket over an empty family".into()));
    }
    let classes = profile::distribution_classes(f.values(), family, space);
    let mut best = f64::NEG_INFINITY;
    for info in &classes.classes {
        let cells = family.member(info.representative);
        let total = space.measure(cells);
        let m = measure::mean(f, cells, space)?;
        let v = log_exp_mean(
            cells.iter().map(|i| (rate * (f.get(i) - m).abs(), space.weight(i))),
            total,
        );
        if v > best {
            best = v;
        }
    }
    Ok(best.exp())
}

/// Two-sided comparison between the exponential bracket of f and the
/// Muckenhoupt constant of exp(f) at p = 2.
#[derive(Clone, Copy, Debug)]
pub struct A2ChainReport {
    pub a2_constant: f64,
    pub exp_bracket: f64,
    /// exp_bracket - sqrt(a2_constant); nonnegative up to slack.
    pub lower_margin: f64,
    /// 2 * a2_constant - exp_bracket; nonnegative up to slack.
    pub upper_margin: f64,
    pub ok: bool,
}

/// Slack for the two-sided bracket comparison.
pub const A2_CHAIN_SLACK: f64 = 1e-9;

/// Checks sqrt(a2) <= exp_bracket <= 2 * a2 for the weight exp(f).
pub fn a2_chain_check(f: &CellFn, family: &Family, space: &Space) -> Result<A2ChainReport> {
    let a2 = ap_of_exp(f, family, 2.0, space)?;
    let bracket = exp_bracket(f, family, space)?;
    let lower_margin = bracket - a2.sqrt();
    let upper_margin = 2.0 * a2 - bracket;
    let slack = A2_CHAIN_SLACK * bracket.max(1.0);
    Ok(A2ChainReport {
        a2_constant: a2,
        exp_bracket: bracket,
        lower_margin,
        upper_margin,
        ok: lower_margin >= -slack && upper_margin >= -slack,
    })
}

/// Outcome of checking an exponential decay envelope against every
/// generator's deviation distribution.
#[derive(Clone, Copy, Debug)]
pub struct JnReport {
    pub ok: bool,
    /// Smallest envelope-minus-distribution gap encountered.
    pub worst_margin: f64,
    /// Lowest generator index in the class attaining the worst margin.
    pub worst_gen: usize,
    /// Breakpoint attaining the worst margin.
    pub worst_t: f64,
    pub c1: f64,
    pub c2: f64,
    pub seminorm: f64,
}

/// Relative slack applied to all envelope comparisons.
pub const ENVELOPE_SLACK: f64 = 1e-12;

/// Checks mu_f(t, G) <= c1 * exp(-c2 * t / seminorm) for all t >= 0 and
/// every generator.
///
/// The distribution is a right-continuous step function, so the check
/// runs over the left limits at breakpoints: the supremum of each
/// constant piece against a decreasing envelope sits at the right end
/// of the piece. Piece values and left limits enumerate the same
/// fractions, which keeps this check aligned with the breakpoint scan
/// of `empirical_decay_rate`.
pub fn decay_report(
    f: &CellFn,
    family: &Family,
    c1: f64,
    c2: f64,
    space: &Space,
) -> Result<JnReport> {
    check_positive("c1", c1)?;
    check_positive("c2", c2)?;
    let bmo = measure::bmo_seminorm(f, family, 1.0, space)?.value;
    if bmo == 0.0 {
        return Err(Error::ZeroSeminorm);
    }
    let classes = profile::distribution_classes(f.values(), family, space);
    let mut ok = true;
    let mut worst = (f64::INFINITY, 0usize, 0.0f64);
    for info in &classes.classes {
        let dist = measure::distribution(f, family.member(info.representative), space)?;
        let pts = dist.points();
        for k in 0..pts.len() {
            let t = pts[k].0;
            let lim = if k == 0 {
                if t == 0.0 {
                    continue;
                }
                1.0
            } else {
                pts[k - 1].1
            };
            let envelope = c1 * (-c2 * t / bmo).exp();
            let margin = envelope - lim;
            if margin < worst.0 {
                worst = (margin, info.first_gen, t);
            }
            if lim > envelope * (1.0 + ENVELOPE_SLACK) {
                ok = false;
            }
        }
    }
    if worst.0 == f64::INFINITY {
        worst = (c1 - 1.0, 0, 0.0);
    }
    Ok(JnReport {
        ok,
        worst_margin: worst.0,
        worst_gen: worst.1,
        worst_t: worst.2,
        c1,
        c2,
        seminorm: bmo,
    })
}

/// Largest decay rate under which every generator satisfies the
/// envelope with scale c1, computed from the distribution breakpoints.
///
/// Infinite when no generator has a positive breakpoint. Requires c1 at
/// least the largest fraction of mass strictly above zero deviation.
pub fn empirical_decay_rate(
    f: &CellFn,
    family: &Family,
    c1: f64,
    space: &Space,
) -> Result<f64> {
    check_positive("c1", c1)?;
    let bmo = measure::bmo_seminorm(f, family, 1.0, space)?.value;
    if bmo == 0.0 {
        return Err(Error::ZeroSeminorm);
    }
    let classes = profile::distribution_classes(f.values(), family, space);
    let mut dists = Vec::with_capacity(classes.classes.len());
    let mut mass_above_zero = 0.0f64;
    for info in &classes.classes {
        let dist = measure::distribution(f, family.member(info.representative), space)?;
        mass_above_zero = mass_above_zero.max(dist.eval(0.0));
        dists.push(dist);
    }
    if c1 < mass_above_zero {
        return Err(Error::InvalidParams(format!(
            "c1 = {c1} below the largest positive-deviation fraction {mass_above_zero}"
        )));
    }
    let mut rate = f64::INFINITY;
    for dist in &dists {
        let pts = dist.points();
        for k in 0..pts.len() {
            let t = pts[k].0;
            let lim = if k == 0 { 1.0 } else { pts[k - 1].1 };
            if t > 0.0 && lim > 0.0 {
                let candidate = bmo / t * (c1 / lim).ln();
                if candidate < rate {
                    rate = candidate;
                }
            }
        }
    }
    Ok(rate)
}

/// Bracket bound derived from a verified decay envelope.
#[derive(Clone, Copy, Debug)]
pub struct BracketBound {
    /// 1 + scale / (c2 / alpha - 1).
    pub bound: f64,
    /// Measured exp_bracket_at(alpha).
    pub bracket: f64,
    pub ok: bool,
}

/// Bounds the exponential bracket at params.alpha by the layer-cake
/// integral of the decay envelope. The envelope premise is verified
/// first; the rate comparison alpha < c2 comes second.
pub fn bracket_from_decay(
    f: &CellFn,
    family: &Family,
    params: &JnParams,
    space: &Space,
) -> Result<BracketBound> {
    let scale = params.c_f.unwrap_or(params.c1);
    check_positive("alpha", params.alpha)?;
    check_positive("envelope scale", scale)?;
    let premise = decay_report(f, family, scale, params.c2, space)?;
    if !premise.ok {
        return Err(Error::JnNotVerified(format!(
            "envelope fails at generator {} and t = {}",
            premise.worst_gen, premise.worst_t
        )));
    }
    if params.alpha >= params.c2 {
        return Err(Error::AlphaTooLarge {
            alpha: params.alpha,
            limit: params.c2,
        });
    }
    let bound = 1.0 + scale / (params.c2 / params.alpha - 1.0);
    let bracket = exp_bracket_at(f, family, params.alpha, space)?;
    Ok(BracketBound {
        bound,
        bracket,
        ok: bracket <= bound * (1.0 + ENVELOPE_SLACK),
    })
}

/// Pointwise decay check of the distribution against the bracket
/// envelope: mu_f(t, G) <= bracket(alpha) * exp(-alpha t / seminorm)
/// evaluated at every breakpoint.
#[derive(Clone, Copy, Debug)]
pub struct DecayCheck {
    pub ok: bool,
    pub worst_margin: f64,
    pub bracket: f64,
}

/// Markov bound in the other direction: the measured bracket at alpha
/// dominates the distribution at every breakpoint.
pub fn decay_from_bracket(
    f: &CellFn,
    family: &Family,
    alpha: f64,
    space: &Space,
) -> Result<DecayCheck> {
    let bracket = exp_bracket_at(f, family, alpha, space)?;
    let bmo = measure::bmo_seminorm(f, family, 1.0, space)?.value;
    let classes = profile::distribution_classes(f.values(), family, space);
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for info in &classes.classes {
        let dist = measure::distribution(f, family.member(info.representative), space)?;
        for &(t, frac) in dist.points() {
            let envelope = bracket * (-alpha * t / bmo).exp();
            worst = worst.min(envelope - frac);
            if frac > envelope * (1.0 + ENVELOPE_SLACK) {
                ok = false;
            }
        }
    }
    Ok(DecayCheck {
        ok,
        worst_margin: worst,
        bracket,
    })
}

/// Seminorm comparison across exponents under a verified envelope.
#[derive(Clone, Copy, Debug)]
pub struct NormEquivalence {
    pub ok: bool,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// Comparison constant (c1 * p * Gamma(p))^(1/p) / c2.
    pub k_p: f64,
    pub bmo_1: f64,
    pub bmo_p: f64,
}

/// Comparison constant of the p-seminorm against the 1-seminorm under a
/// decay envelope with constants (c1, c2).
pub fn comparison_constant(c1: f64, c2: f64, p: f64) -> Result<f64> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    check_positive("c1", c1)?;
    check_positive("c2", c2)?;
    Ok((c1 * p * gamma(p)).powf(1.0 / p) / c2)
}

/// Verifies bmo_1 <= bmo_p <= K(p) * bmo_1 once the decay envelope for
/// (params.c1, params.c2) holds.
pub fn norm_equivalence_check(
    f: &CellFn,
    family: &Family,
    p: f64,
    params: &JnParams,
    space: &Space,
) -> Result<NormEquivalence> {
    let premise = decay_report(f, family, params.c1, params.c2, space)?;
    if !premise.ok {
        return Err(Error::JnNotVerified(format!(
            "envelope fails at generator {} and t = {}",
            premise.worst_gen, premise.worst_t
        )));
    }
    let k_p = comparison_constant(params.c1, params.c2, p)?;
    let bmo_1 = premise.seminorm;
    let bmo_p = measure::bmo_seminorm(f, family, p, space)?.value;
    let lower_ok = bmo_1 <= bmo_p * (1.0 + ENVELOPE_SLACK);
    let upper_ok = bmo_p <= k_p * bmo_1 * (1.0 + ENVELOPE_SLACK);
    Ok(NormEquivalence {
        ok: lower_ok && upper_ok,
        lower_ok,
        upper_ok,
        k_p,
        bmo_1,
        bmo_p,
    })
}

/// Log-spaced rates below the decay rate: c2 / 2^n up to c2 / 2.
pub fn default_alpha_grid(c2: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| c2 / f64::powi(2.0, (n - k) as i32)).collect()
}

/// Aggregate bracket diagnostics for one function.
#[derive(Clone, Debug)]
pub struct BracketReport {
    /// Muckenhoupt constant of exp(f) at the given exponent.
    pub ap_constant: f64,
    pub exp_bracket: f64,
    /// (alpha, exp_bracket_at(alpha)) along the grid.
    pub bracket_curve: Vec<(f64, f64)>,
    pub chain_ok: bool,
}

/// Assembles the A_p constant, the bracket, the bracket curve along an
/// alpha grid, and the two-sided chain check.
pub fn bracket_report(
    f: &CellFn,
    family: &Family,
    p: f64,
    grid: &[f64],
    space: &Space,
) -> Result<BracketReport> {
    let ap = ap_of_exp(f, family, p, space)?;
    let chain = a2_chain_check(f, family, space)?;
    let mut bracket_curve = Vec::with_capacity(grid.len());
    for &alpha in grid {
        bracket_curve.push((alpha, exp_bracket_at(f, family, alpha, space)?));
    }
    Ok(BracketReport {
        ap_constant: ap,
        exp_bracket: chain.exp_bracket,
        bracket_curve,
        chain_ok: chain.ok,
    })
}
