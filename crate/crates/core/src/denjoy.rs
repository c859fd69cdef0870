//! Fattening, doubles, covering decompositions, and family audits.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cellfn::CellFn;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::measure;
use crate::numeric::Accumulator;
use crate::space::{CellSet, Space};
use crate::weights::{self, JnReport, ENVELOPE_SLACK};

/// Relative slack for measure comparisons in doubles and bounds.
pub const MEASURE_SLACK: f64 = 1e-12;

/// Structure parameters of a family audit.
///
/// `a` is the fattening factor, `b` the measure budget of a double,
/// `eps_shrink` the smallness threshold for the fine-cover checks
/// (defaults to the smallest member measure), and `j_max` the iteration
/// cap on growth chains.
#[derive(Clone, Copy, Debug)]
pub struct DenjoyParams {
    pub a: f64,
    pub b: f64,
    pub eps_shrink: Option<f64>,
    pub j_max: usize,
}

impl DenjoyParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || a <= 1.0 || b < a {
            return Err(Error::InvalidParams(format!(
                "need 1 < a <= b, got a = {a}, b = {b}"
            )));
        }
        Ok(Self {
            a,
            b,
            eps_shrink: None,
            j_max: 64,
        })
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps_shrink = Some(eps);
        self
    }

    pub fn with_j_max(mut self, j_max: usize) -> Self {
        self.j_max = j_max;
        self
    }
}

/// Constants attached to a doubling structure.
#[derive(Clone, Copy, Debug)]
pub struct JnConstants {
    /// Height factor b^2 / a + b.
    pub k: f64,
    /// Measure factor b^2 (b + 1).
    pub big_k: f64,
    /// Envelope scale sqrt(e).
    pub c1: f64,
    /// Envelope rate 1 / (2 k K e).
    pub c2: f64,
}

/// Decay constants determined by the structure parameters alone.
pub fn jn_constants(params: &DenjoyParams) -> JnConstants {
    let k = params.b * params.b / params.a + params.b;
    let big_k = params.b * params.b * (params.b + 1.0);
    let c1 = std::f64::consts::E.sqrt();
    let c2 = 1.0 / (2.0 * k * big_k * std::f64::consts::E);
    JnConstants { k, big_k, c1, c2 }
}

/// Union of all members that meet the seed and weigh at most a times
/// the seed. The comparison is non-strict.
pub fn fatten(family: &Family, seed: &CellSet, a: f64, space: &Space) -> Result<CellSet> {
    if seed.is_empty() {
        return Err(Error::EmptySet);
    }
    let budget = a * space.measure(seed);
    let qualifying: Vec<&CellSet> = family
        .members()
        .iter()
        .filter(|m| m.intersects(seed) && space.measure(m) <= budget)
        .collect();
    Ok(CellSet::union_all(qualifying))
}

/// Smallest-measure member containing the fattening of a generator
/// within the measure budget b, lowest index on ties.
pub fn find_double(
    family: &Family,
    g: usize,
    params: &DenjoyParams,
    space: &Space,
) -> Result<Option<usize>> {
    if g >= family.len() {
        return Err(Error::UnknownGenerator(format!("#{g}")));
    }
    let omega = fatten(family, family.member(g), params.a, space)?;
    let budget = params.b * space.measure(family.member(g)) * (1.0 + MEASURE_SLACK);
    let mut best: Option<(f64, usize)> = None;
    for h in 0..family.len() {
        let mu = space.measure(family.member(h));
        if mu <= budget && omega.is_subset_of(family.member(h)) {
            match best {
                Some((bmu, _)) if bmu <= mu => {}
                _ => best = Some((mu, h)),
            }
        }
    }
    Ok(best.map(|(_, h)| h))
}

/// Member of the active set with maximal measure whose double escapes
/// the active set, found by walking the double chain from the largest
/// member. Active indices must be ascending.
pub fn maximal_pick(
    family: &Family,
    active: &[usize],
    params: &DenjoyParams,
    space: &Space,
) -> Result<usize> {
    if active.is_empty() {
        return Err(Error::InvalidParams("maximal pick over an empty active set".into()));
    }
    let mut cur = active[0];
    let mut best = space.measure(family.member(cur));
    for &g in &active[1..] {
        let mu = space.measure(family.member(g));
        if mu > best {
            best = mu;
            cur = g;
        }
    }
    // Doubles of a maximal member keep maximal measure while they stay
    // active, so the chain only moves along maximal members.
    for _ in 0..params.j_max {
        let dbl = find_double(family, cur, params, space)?
            .ok_or_else(|| Error::MissingDouble(family.id(cur).to_string()))?;
        if active.binary_search(&dbl).is_err() {
            return Ok(cur);
        }
        if dbl == cur {
            return Err(Error::NoMaximalPick(params.j_max));
        }
        cur = dbl;
    }
    Err(Error::NoMaximalPick(params.j_max))
}

/// One selected generator with its double.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CzPair {
    pub picked: usize,
    pub double: usize,
}

/// Covering decomposition of a base generator at height alpha.
#[derive(Clone, Debug)]
pub struct CzResult {
    pub g0: usize,
    pub alpha: f64,
    pub k: f64,
    pub big_k: f64,
    /// Pairwise disjoint picks with their doubles, in selection order.
    pub selected: Vec<CzPair>,
    /// Cells of the base generator outside every selected double.
    pub good_set: CellSet,
    pub base_mean: f64,
    /// Largest deviation from the base mean on the good set.
    pub max_dev_good: f64,
    /// Largest deviation of a double mean from the base mean.
    pub max_double_mean_dev: f64,
    /// Total measure of the selected doubles, with multiplicity.
    pub double_measure_sum: f64,
    pub bound_height_ok: bool,
    pub bound_means_ok: bool,
    pub bound_measure_ok: bool,
    pub margin_height: f64,
    pub margin_means: f64,
    pub margin_measure: f64,
}

impl CzResult {
    pub fn all_bounds_ok(&self) -> bool {
        self.bound_height_ok && self.bound_means_ok && self.bound_measure_ok
    }
}

fn require_normalized(f: &CellFn, family: &Family, space: &Space) -> Result<f64> {
    let s = measure::bmo_seminorm(f, family, 1.0, space)?.value;
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { seminorm: s });
    }
    Ok(s)
}

/// Covering decomposition of the deviation |f - mean(f, G0)| at height
/// alpha over the members meeting G0.
///
/// Requires the 1-seminorm of f to be 1 within 1e-9 and alpha > 1.
/// Candidates are the members meeting G0 with measure strictly below
/// (a/b) of the base; every candidate must have a double. Selection
/// repeatedly takes a maximal pick among the still-active members whose
/// mean deviation exceeds alpha, then retires everything meeting it.
/// Retired members stay inside the pick's double by maximality, so the
/// selected doubles cover every removed candidate.
pub fn cz_decompose(
    f: &CellFn,
    g0: usize,
    family: &Family,
    params: &DenjoyParams,
    alpha: f64,
    space: &Space,
) -> Result<CzResult> {
    if g0 >= family.len() {
        return Err(Error::UnknownGenerator(format!("#{g0}")));
    }
    require_normalized(f, family, space)?;
    if !alpha.is_finite() || alpha <= 1.0 {
        return Err(Error::AlphaTooSmall { alpha, limit: 1.0 });
    }
    let consts = jn_constants(params);
    let base = family.member(g0);
    let base_measure = space.measure(base);
    let base_mean = measure::mean(f, base, space)?;
    let h: Vec<f64> = f.values().iter().map(|v| (v - base_mean).abs()).collect();

    let candidate_budget = params.a / params.b * base_measure;
    let candidates: Vec<usize> = (0..family.len())
        .filter(|&g| {
            family.member(g).intersects(base)
                && space.measure(family.member(g)) < candidate_budget
        })
        .collect();
    let mut doubles: HashMap<usize, usize> = HashMap::new();
    for &g in &candidates {
        let dbl = find_double(family, g, params, space)?
            .ok_or_else(|| Error::MissingDouble(family.id(g).to_string()))?;
        doubles.insert(g, dbl);
    }
    let mean_dev = |cells: &CellSet| -> f64 {
        let mut num = Accumulator::new();
        let mut den = Accumulator::new();
        for i in cells.iter() {
            let w = space.weight(i);
            num.add(w * h[i as usize]);
            den.add(w);
        }
        num.value() / den.value()
    };
    let mut active: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&g| mean_dev(family.member(g)) > alpha)
        .collect();

    let mut selected = Vec::new();
    while !active.is_empty() {
        let picked = maximal_pick(family, &active, params, space)?;
        let double = match doubles.get(&picked) {
            Some(&d) => d,
            None => find_double(family, picked, params, space)?
                .ok_or_else(|| Error::MissingDouble(family.id(picked).to_string()))?,
        };
        selected.push(CzPair { picked, double });
        let picked_member = family.member(picked).clone();
        active.retain(|&g| g != picked && !family.member(g).intersects(&picked_member));
    }

    let double_union =
        CellSet::union_all(selected.iter().map(|p| family.member(p.double)));
    let good_set = base.difference(&double_union);
    let max_dev_good = good_set
        .iter()
        .map(|i| h[i as usize])
        .fold(0.0f64, f64::max);
    let mut max_double_mean_dev = 0.0f64;
    let mut double_measure_sum = Accumulator::new();
    for pair in &selected {
        let member = family.member(pair.double);
        let dev = (measure::mean(f, member, space)? - base_mean).abs();
        max_double_mean_dev = max_double_mean_dev.max(dev);
        double_measure_sum.add(space.measure(member));
    }
    let double_measure_sum = double_measure_sum.value();

    let height_budget = consts.k * alpha;
    let measure_budget = consts.big_k / alpha * base_measure;
    Ok(CzResult {
        g0,
        alpha,
        k: consts.k,
        big_k: consts.big_k,
        bound_height_ok: max_dev_good <= height_budget * (1.0 + MEASURE_SLACK),
        bound_means_ok: max_double_mean_dev <= height_budget * (1.0 + MEASURE_SLACK),
        bound_measure_ok: double_measure_sum <= measure_budget * (1.0 + MEASURE_SLACK),
        margin_height: height_budget - max_dev_good,
        margin_means: height_budget - max_double_mean_dev,
        margin_measure: measure_budget - double_measure_sum,
        selected,
        good_set,
        base_mean,
        max_dev_good,
        max_double_mean_dev,
        double_measure_sum,
    })
}

/// One tail bound of the iterated decomposition.
#[derive(Clone, Copy, Debug)]
pub struct IterBoundRow {
    pub n: u32,
    /// Height n * k * alpha.
    pub threshold: f64,
    /// Measure of the cells of G0 deviating beyond the threshold.
    pub tail_measure: f64,
    /// (K / alpha)^n times the base measure.
    pub bound: f64,
    pub ok: bool,
}

/// Geometric tail bounds for deviations over the base generator:
/// the set above n * k * alpha shrinks by a factor K / alpha per step.
///
/// Requires a normalized f and alpha > K so the factor is below one.
pub fn iterated_cz_check(
    f: &CellFn,
    g0: usize,
    family: &Family,
    params: &DenjoyParams,
    alpha: f64,
    n_max: u32,
    space: &Space,
) -> Result<Vec<IterBoundRow>> {
    if g0 >= family.len() {
        return Err(Error::UnknownGenerator(format!("#{g0}")));
    }
    require_normalized(f, family, space)?;
    let consts = jn_constants(params);
    if !alpha.is_finite() || alpha <= consts.big_k {
        return Err(Error::AlphaTooSmall {
            alpha,
            limit: consts.big_k,
        });
    }
    let base = family.member(g0);
    let base_measure = space.measure(base);
    let base_mean = measure::mean(f, base, space)?;
    let mut rows = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let threshold = n as f64 * consts.k * alpha;
        let mut tail = Accumulator::new();
        for i in base.iter() {
            if (f.get(i) - base_mean).abs() > threshold {
                tail.add(space.weight(i));
            }
        }
        let tail_measure = tail.value();
        let bound = (consts.big_k / alpha).powi(n as i32) * base_measure;
        rows.push(IterBoundRow {
            n,
            threshold,
            tail_measure,
            bound,
            ok: tail_measure <= bound * (1.0 + MEASURE_SLACK),
        });
    }
    Ok(rows)
}

/// Decay envelope check with the constants induced by the structure
/// parameters.
pub fn jn_verify(
    f: &CellFn,
    family: &Family,
    params: &DenjoyParams,
    space: &Space,
) -> Result<JnReport> {
    let consts = jn_constants(params);
    weights::decay_report(f, family, consts.c1, consts.c2, space)
}

/// Audit of the four structure properties over one family.
#[derive(Clone, Debug)]
pub struct DenjoyAudit {
    /// Smallness threshold used by shrinking and weak differentiation.
    pub eps_shrink: f64,
    pub shrinking_ok: bool,
    /// Cells of the domain missed by every small member.
    pub shrinking_failures: CellSet,
    pub doubling_ok: bool,
    /// Double of each generator, in family order.
    pub doubles: Vec<Option<usize>>,
    pub growth_ok: bool,
    /// Generators whose fattening chain never reaches the target.
    pub growth_failures: Vec<usize>,
    /// Largest chain length used by a passing generator.
    pub growth_max_iterations: usize,
    /// None when no probe function was supplied.
    pub weak_diff_ok: Option<bool>,
    /// Covered cells where the probe exceeds every small-member mean.
    pub weak_diff_failures: CellSet,
    pub overall: bool,
}

fn audit_core(
    family: &Family,
    domain: &CellSet,
    params: &DenjoyParams,
    probe: Option<&CellFn>,
    space: &Space,
) -> DenjoyAudit {
    let measures = family.measures(space);
    let eps_shrink = params.eps_shrink.unwrap_or_else(|| {
        measures
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    });

    // Shrinking: every domain cell lies in a member of small measure.
    let small: Vec<usize> = (0..family.len())
        .filter(|&g| measures[g] <= eps_shrink)
        .collect();
    let small_union = CellSet::union_all(small.iter().map(|&g| family.member(g)));
    let shrinking_failures = domain.difference(&small_union);
    let shrinking_ok = shrinking_failures.is_empty();

    // Doubling: every member has a double.
    let doubles: Vec<Option<usize>> = (0..family.len())
        .map(|g| find_double(family, g, params, space).unwrap_or(None))
        .collect();
    let doubling_ok = doubles.iter().all(Option::is_some);

    // Growth: fattening chains from each member reach a fixed share of
    // the largest intersecting member.
    let mut growth_failures = Vec::new();
    let mut growth_max_iterations = 0usize;
    for g in 0..family.len() {
        let mut target = 0.0f64;
        for (g0, &mu) in measures.iter().enumerate() {
            if family.member(g0).intersects(family.member(g)) {
                target = target.max(mu);
            }
        }
        target *= params.a / params.b;
        let mut current = family.member(g).clone();
        let mut passed = false;
        for j in 0..=params.j_max {
            if space.measure(&current) >= target * (1.0 - MEASURE_SLACK) {
                growth_max_iterations = growth_max_iterations.max(j);
                passed = true;
                break;
            }
            if j == params.j_max {
                break;
            }
            let next = fatten(family, &current, params.a, space).unwrap_or_else(|_| current.clone());
            if next == current {
                break;
            }
            current = next;
        }
        if !passed {
            growth_failures.push(g);
        }
    }
    let growth_ok = growth_failures.is_empty();

    // Weak differentiation: on covered cells the probe is dominated by
    // the best small-member mean of its absolute value.
    let (weak_diff_ok, weak_diff_failures) = match probe {
        None => (None, CellSet::empty()),
        Some(f) => {
            let mut best = vec![f64::NEG_INFINITY; space.len()];
            for &g in &small {
                let cells = family.member(g);
                let mut num = Accumulator::new();
                let mut den = Accumulator::new();
                for i in cells.iter() {
                    let w = space.weight(i);
                    num.add(w * f.get(i).abs());
                    den.add(w);
                }
                let m = num.value() / den.value();
                for i in cells.iter() {
                    if m > best[i as usize] {
                        best[i as usize] = m;
                    }
                }
            }
            let failures: Vec<u32> = domain
                .iter()
                .filter(|&i| {
                    best[i as usize] > f64::NEG_INFINITY
                        && f.get(i).abs() > best[i as usize] * (1.0 + MEASURE_SLACK)
                })
                .collect();
            let failures = CellSet::from_indices(failures);
            (Some(failures.is_empty()), failures)
        }
    };

    let overall = shrinking_ok && doubling_ok && growth_ok && weak_diff_ok.unwrap_or(true);
    DenjoyAudit {
        eps_shrink,
        shrinking_ok,
        shrinking_failures,
        doubling_ok,
        doubles,
        growth_ok,
        growth_failures,
        growth_max_iterations,
        weak_diff_ok,
        weak_diff_failures,
        overall,
    }
}

/// Audits shrinking, doubling, growth, and optionally weak
/// differentiation of a probe function over the whole space.
pub fn denjoy_audit(
    family: &Family,
    params: &DenjoyParams,
    probe: Option<&CellFn>,
    space: &Space,
) -> DenjoyAudit {
    audit_core(family, &space.full_set(), params, probe, space)
}

/// Localized audit around one generator.
#[derive(Clone, Debug)]
pub struct LocalAudit {
    /// Indices of the induced subfamily, ascending.
    pub induced: Vec<usize>,
    /// Core audit of the induced family over the cells of g0.
    pub audit: DenjoyAudit,
    pub engulfing_ok: bool,
    pub engulfing_failures: usize,
    /// True when the induced family has at most one member.
    pub degenerate: bool,
    pub overall: bool,
}

/// Audits the family induced near a generator: members meeting g0 with
/// measure at most a times the base, checked over the cells of g0, plus
/// an engulfing test that pairs and sampled triples of induced members
/// fit inside one full-family member of measure at most b times the
/// base.
pub fn local_denjoy_audit(
    family: &Family,
    g0: usize,
    params: &DenjoyParams,
    probe: Option<&CellFn>,
    seed: u64,
    space: &Space,
) -> Result<LocalAudit> {
    if g0 >= family.len() {
        return Err(Error::UnknownGenerator(format!("#{g0}")));
    }
    let base = family.member(g0);
    let base_measure = space.measure(base);
    let induced: Vec<usize> = (0..family.len())
        .filter(|&g| {
            family.member(g).intersects(base)
                && space.measure(family.member(g)) <= params.a * base_measure
        })
        .collect();
    let sub = family.subfamily(&induced);
    let audit = audit_core(&sub, base, params, probe, space);

    let degenerate = induced.len() <= 1;
    let budget = params.b * base_measure * (1.0 + MEASURE_SLACK);
    let engulfed = |union: &CellSet| -> bool {
        family
            .members()
            .iter()
            .any(|m| space.measure(m) <= budget && union.is_subset_of(m))
    };
    let mut engulfing_failures = 0usize;
    if !degenerate {
        for i in 0..sub.len() {
            for j in i + 1..sub.len() {
                let union = sub.member(i).union(sub.member(j));
                if !engulfed(&union) {
                    engulfing_failures += 1;
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let pick = |rng: &mut ChaCha8Rng| rng.gen_range(0..sub.len());
            let (x, y, z) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let union = CellSet::union_all([sub.member(x), sub.member(y), sub.member(z)]);
            if !engulfed(&union) {
                engulfing_failures += 1;
            }
        }
    }
    let engulfing_ok = engulfing_failures == 0;
    let overall = audit.overall && (degenerate || engulfing_ok);
    Ok(LocalAudit {
        induced,
        audit,
        engulfing_ok,
        engulfing_failures,
        degenerate,
        overall,
    })
}

/// Fine-cover check: members of measure strictly below eps must cover
/// the target.
pub fn fine_cover_check(
    family: &Family,
    eps: f64,
    target: &CellSet,
    space: &Space,
) -> Result<crate::structure::CoverReport> {
    if target.is_empty() {
        return Err(Error::EmptyTarget);
    }
    space.check_set(target)?;
    let small: Vec<usize> = (0..family.len())
        .filter(|&g| space.measure(family.member(g)) < eps)
        .collect();
    let used: Vec<usize> = small
        .iter()
        .copied()
        .filter(|&g| family.member(g).intersects(target))
        .collect();
    let union = CellSet::union_all(used.iter().map(|&g| family.member(g)));
    let uncovered = target.difference(&union);
    Ok(crate::structure::CoverReport {
        covered: uncovered.is_empty(),
        uncovered_mass: space.measure(&uncovered),
        uncovered,
        used,
    })
}

/// Maximal-mean function: at each cell the largest member mean of |f|
/// over the members containing the cell, zero on uncovered cells.
pub fn maximal_function(f: &CellFn, family: &Family, space: &Space) -> CellFn {
    let mut best = vec![0.0f64; space.len()];
    for g in 0..family.len() {
        let cells = family.member(g);
        let mut num = Accumulator::new();
        let mut den = Accumulator::new();
        for i in cells.iter() {
            let w = space.weight(i);
            num.add(w * f.get(i).abs());
            den.add(w);
        }
        let m = num.value() / den.value();
        for i in cells.iter() {
            if m > best[i as usize] {
                best[i as usize] = m;
            }
        }
    }
    CellFn::new(best).expect("means of finite values are finite")
}

/// Weak L1 inequality for the maximal-mean function.
#[derive(Clone, Copy, Debug)]
pub struct WeakL1Report {
    pub ok: bool,
    /// Smallest bound-minus-level-measure gap over the alpha grid.
    pub worst_margin: f64,
    pub l1_norm: f64,
}

/// Checks measure{maximal > alpha} <= (b / alpha) * l1norm(f) on the
/// given grid of positive levels.
pub fn weak_l1_check(
    f: &CellFn,
    family: &Family,
    b: f64,
    alphas: &[f64],
    space: &Space,
) -> Result<WeakL1Report> {
    if alphas.iter().any(|&a| !a.is_finite() || a <= 0.0) {
        return Err(Error::InvalidParams("weak L1 levels must be positive".into()));
    }
    let maximal = maximal_function(f, family, space);
    let mut l1 = Accumulator::new();
    for i in 0..space.len() as u32 {
        l1.add(space.weight(i) * f.get(i).abs());
    }
    let l1_norm = l1.value();
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for &alpha in alphas {
        let mut level = Accumulator::new();
        for i in 0..space.len() as u32 {
            if maximal.get(i) > alpha {
                level.add(space.weight(i));
            }
        }
        let level_measure = level.value();
        let bound = b / alpha * l1_norm;
        worst = worst.min(bound - level_measure);
        if level_measure > bound * (1.0 + ENVELOPE_SLACK) {
            ok = false;
        }
    }
    Ok(WeakL1Report {
        ok,
        worst_margin: worst,
        l1_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn uniform_space(n: usize) -> Space {
        Space::new((0..n).map(|i| format!("c{i}")).collect(), vec![1.0; n]).unwrap()
    }

    /// Full dyadic interval family on 2^depth cells, coarse to fine.
    fn dyadic_family(depth: u32) -> Family {
        let n = 1u32 << depth;
        let mut ids = Vec::new();
        let mut members = Vec::new();
        for level in 0..=depth {
            let width = n >> level;
            for k in 0..(1u32 << level) {
                ids.push(format!("l{level}k{k}"));
                members.push(CellSet::single_run(k * width, (k + 1) * width));
            }
        }
        Family::new(ids, members).unwrap()
    }

    #[test]
    fn constants_for_small_parameter_pairs() {
        let c = jn_constants(&DenjoyParams::new(2.0, 5.0).unwrap());
        assert_eq!(c.k, 17.5);
        assert_eq!(c.big_k, 150.0);
        assert_eq!(c.c1, E.sqrt());
        assert!((c.c2 - 1.0 / (5250.0 * E)).abs() < 1e-20);
        let c = jn_constants(&DenjoyParams::new(2.0, 6.0).unwrap());
        assert_eq!(c.k, 24.0);
        assert_eq!(c.big_k, 252.0);
        assert!((c.c2 - 1.0 / (12096.0 * E)).abs() < 1e-20);
    }

    #[test]
    fn params_validate_domain() {
        assert!(DenjoyParams::new(1.0, 5.0).is_err());
        assert!(DenjoyParams::new(2.0, 1.5).is_err());
        assert!(DenjoyParams::new(1.5, 1.5).is_ok());
    }

    #[test]
    fn fatten_unions_small_intersecting_members() {
        let space = uniform_space(4);
        let family = Family::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into(), "e".into()],
            vec![
                CellSet::single_run(0, 1),
                CellSet::single_run(1, 2),
                CellSet::single_run(0, 2),
                CellSet::single_run(2, 4),
                CellSet::single_run(0, 4),
            ],
        )
        .unwrap();
        let seed = CellSet::single_run(0, 1);
        let omega = fatten(&family, &seed, 2.0, &space).unwrap();
        assert_eq!(omega, CellSet::single_run(0, 2));
        assert!(matches!(
            fatten(&family, &CellSet::empty(), 2.0, &space),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn dyadic_doubles_are_parents() {
        let space = uniform_space(4);
        let family = dyadic_family(2);
        let params = DenjoyParams::new(2.0, 6.0).unwrap();
        // Root is its own double.
        assert_eq!(find_double(&family, 0, &params, &space).unwrap(), Some(0));
        // A leaf fattens into its parent.
        let leaf = family.index_of("l2k0").unwrap();
        let parent = family.index_of("l1k0").unwrap();
        assert_eq!(
            find_double(&family, leaf, &params, &space).unwrap(),
            Some(parent)
        );
        assert!(find_double(&family, 99, &params, &space).is_err());
    }

    #[test]
    fn maximal_pick_walks_double_chain() {
        let space = uniform_space(4);
        let family = dyadic_family(2);
        let params = DenjoyParams::new(2.0, 6.0).unwrap();
        let l2k0 = family.index_of("l2k0").unwrap();
        let l2k1 = family.index_of("l2k1").unwrap();
        let l1k0 = family.index_of("l1k0").unwrap();
        // Two leaves tie on measure; the first one's double escapes.
        assert_eq!(
            maximal_pick(&family, &[l2k0, l2k1], &params, &space).unwrap(),
            l2k0
        );
        // With the parent active, the chain starts at the parent.
        let mut active = vec![l1k0, l2k0];
        active.sort_unstable();
        assert_eq!(
            maximal_pick(&family, &active, &params, &space).unwrap(),
            l1k0
        );
        assert!(maximal_pick(&family, &[], &params, &space).is_err());
    }

    fn spike_function() -> CellFn {
        // Seminorm 1 on the depth 3 dyadic family: the pair {0, 1} has
        // mean 1 and mean deviation 1, every other member is below.
        CellFn::new(vec![2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn cz_requires_normalization_and_height() {
        let space = uniform_space(8);
        let family = dyadic_family(3);
        let params = DenjoyParams::new(2.0, 6.0).unwrap();
        let constant = CellFn::constant(8, 3.0).unwrap();
        assert!(matches!(
            cz_decompose(&constant, 0, &family, &params, 2.0, &space),
            Err(Error::NotNormalized { .. })
        ));
        let f = spike_function();
        assert!(matches!(
            cz_decompose(&f, 0, &family, &params, 1.0, &space),
            Err(Error::AlphaTooSmall { .. })
        ));
    }

    #[test]
    fn cz_selects_the_spike_cell() {
        let space = uniform_space(8);
        let family = dyadic_family(3);
        let params = DenjoyParams::new(2.0, 6.0).unwrap();
        let f = spike_function();
        let r = cz_decompose(&f, 0, &family, &params, 1.01, &space).unwrap();
        let single0 = family.index_of("l3k0").unwrap();
        let pair0 = family.index_of("l2k0").unwrap();
        assert_eq!(
            r.selected,
            vec![CzPair { picked: single0, double: pair0 }]
        );
        assert_eq!(r.good_set, CellSet::single_run(2, 8));
        assert_eq!(r.base_mean, 0.25);
        assert_eq!(r.max_dev_good, 0.25);
        assert_eq!(r.max_double_mean_dev, 0.75);
        assert_eq!(r.double_measure_sum, 2.0);
        assert!(r.all_bounds_ok());
        // Deterministic on repeat.
        let again = cz_decompose(&f, 0, &family, &params, 1.01, &space).unwrap();
        assert_eq!(again.selected, r.selected);
    }

    #[test]
    fn cz_with_high_alpha_selects_nothing() {
        let space = uniform_space(8);
        let family = dyadic_family(3);
        let params = DenjoyParams::new(2.0, 6.0).unwrap();
        let f = spike_function();
        let r = cz_decompose(&f, 0, &family, &params, 2.0, &space).unwrap();
        assert!(r.selected.is_empty());
        assert_eq!(r.good_set, CellSet::single_run(0, 8));
        assert_eq!(r.max_dev_good, 1.75);
        assert!(r.all_bounds_ok());
    }

    #[test]
    fn iterated_rows_shrink_geometrically() {
        let space = uniform_space(8);
        let family = dyadic_family(3);
        let params = DenjoyParams::new(2.0, 6.0).unwrap();
        let f = spike_function();
        let rows = iterated_cz_check(&f, 0, &family, &params, 253.0, 3, &space).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.ok && r.tail_measure == 0.0));
        assert!(matches!(
            iterated_cz_check(&f, 0, &family, &params, 252.0, 3, &space),
            Err(Error::AlphaTooSmall { .. })
        ));
    }

    #[test]
    fn audit_passes_on_dyadic_family() {
        let space = uniform_space(8);
        let family = dyadic_family(3);
        let params = DenjoyParams::new(2.0, 6.0).unwrap();
        let probe = spike_function();
        let audit = denjoy_audit(&family, &params, Some(&probe), &space);
        assert_eq!(audit.eps_shrink, 1.0);
        assert!(audit.shrinking_ok);
        assert!(audit.doubling_ok);
        assert!(audit.growth_ok);
        assert_eq!(audit.weak_diff_ok, Some(true));
        assert!(audit.overall);
        assert!(audit.growth_max_iterations <= 3);
    }

    #[test]
    fn audit_flags_missing_fine_cover() {
        let space = uniform_space(8);
        let family = Family::new(
            vec!["half".into(), "all".into()],
            vec![CellSet::single_run(0, 4), CellSet::single_run(0, 8)],
        )
        .unwrap();
        let params = DenjoyParams::new(2.0, 6.0).unwrap();
        let audit = denjoy_audit(&family, &params, None, &space);
        assert!(!audit.shrinking_ok);
        assert_eq!(audit.shrinking_failures, CellSet::single_run(4, 8));
        assert!(!audit.overall);
    }

    #[test]
    fn local_audit_engulfs_near_a_pair() {
        let space = uniform_space(8);
        let family = dyadic_family(3);
        let params = DenjoyParams::new(2.0, 6.0).unwrap();
        let pair0 = family.index_of("l2k0").unwrap();
        let r = local_denjoy_audit(&family, pair0, &params, None, 7, &space).unwrap();
        // Induced: the quad, the pair itself, and its two cells.
        let expected: Vec<usize> = vec![
            family.index_of("l1k0").unwrap(),
            pair0,
            family.index_of("l3k0").unwrap(),
            family.index_of("l3k1").unwrap(),
        ];
        assert_eq!(r.induced, expected);
        assert!(!r.degenerate);
        assert!(r.engulfing_ok);
        assert!(r.audit.shrinking_ok);
        assert!(r.overall);
    }

    #[test]
    fn fine_cover_needs_strictly_small_members() {
        let space = uniform_space(4);
        let family = dyadic_family(2);
        let all = space.full_set();
        let r = fine_cover_check(&family, 2.0, &all, &space).unwrap();
        assert!(r.covered);
        let r = fine_cover_check(&family, 1.0, &all, &space).unwrap();
        assert!(!r.covered);
        assert_eq!(r.uncovered_mass, 4.0);
        assert!(matches!(
            fine_cover_check(&family, 1.0, &CellSet::empty(), &space),
            Err(Error::EmptyTarget)
        ));
    }

    #[test]
    fn maximal_function_and_weak_l1() {
        let space = uniform_space(4);
        let f = CellFn::new(vec![1.0, 2.0, 3.0, 6.0]).unwrap();
        let family = Family::new(
            vec!["lo".into(), "hi".into(), "all".into()],
            vec![
                CellSet::single_run(0, 2),
                CellSet::single_run(2, 4),
                CellSet::single_run(0, 4),
            ],
        )
        .unwrap();
        let m = maximal_function(&f, &family, &space);
        assert_eq!(m.values(), &[3.0, 3.0, 4.5, 4.5]);
        let r = weak_l1_check(&f, &family, 1.0, &[2.0, 4.0], &space).unwrap();
        assert!(r.ok);
        assert_eq!(r.l1_norm, 12.0);
        // Tight budget fails at level 4: the level set has measure 2
        // but the bound is only 0.3.
        let r = weak_l1_check(&f, &family, 0.1, &[4.0], &space).unwrap();
        assert!(!r.ok);
    }

    #[test]
    fn jn_verify_uses_induced_constants() {
        let space = uniform_space(4);
        let family = Family::new(vec!["all".into()], vec![space.full_set()]).unwrap();
        let f = CellFn::new(vec![1.0, 2.0, 3.0, 6.0]).unwrap();
        let params = DenjoyParams::new(2.0, 5.0).unwrap();
        let r = jn_verify(&f, &family, &params, &space).unwrap();
        assert!(r.ok);
        assert_eq!(r.c1, E.sqrt());
        assert!((r.c2 - 1.0 / (5250.0 * E)).abs() < 1e-20);
    }
}
