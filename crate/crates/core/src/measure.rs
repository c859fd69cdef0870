//! Means, oscillations, seminorms, and deviation distributions.

use rayon::prelude::*;

use crate::cellfn::CellFn;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::numeric::Accumulator;
use crate::profile;
use crate::space::{CellSet, Space};

/// Seminorm value together with the lowest generator index attaining it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Seminorm {
    pub value: f64,
    pub argmax: usize,
}

/// Right-continuous step function t -> relative measure of cells whose
/// deviation from the mean strictly exceeds t.
///
/// Points hold (breakpoint, fraction strictly above it) in ascending
/// breakpoint order; the final fraction is exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct StepDist {
    points: Vec<(f64, f64)>,
}

impl StepDist {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Fraction of measure with deviation strictly above t.
    pub fn eval(&self, t: f64) -> f64 {
        let pos = self.points.partition_point(|&(tk, _)| tk <= t);
        if pos == 0 {
            1.0
        } else {
            self.points[pos - 1].1
        }
    }

    /// Left limit at t: fraction of measure with deviation at least t
    /// when t is positive.
    pub fn left_limit(&self, t: f64) -> f64 {
        let pos = self.points.partition_point(|&(tk, _)| tk < t);
        if pos == 0 {
            1.0
        } else {
            self.points[pos - 1].1
        }
    }
}

#[inline]
fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

fn nonempty(cells: &CellSet) -> Result<()> {
    if cells.is_empty() {
        Err(Error::EmptyGenerator)
    } else {
        Ok(())
    }
}

/// Weighted mean of f over a nonempty cell set.
pub fn mean(f: &CellFn, cells: &CellSet, space: &Space) -> Result<f64> {
    nonempty(cells)?;
    let mut num = Accumulator::new();
    let mut den = Accumulator::new();
    let mut first = f64::NAN;
    let mut constant = true;
    for &(lo, hi) in cells.runs() {
        let ws = &space.weights()[lo as usize..hi as usize];
        let vs = &f.values()[lo as usize..hi as usize];
        for (&w, &v) in ws.iter().zip(vs) {
            if first.is_nan() {
                first = v;
            }
            constant &= v == first;
            num.add(w * v);
            den.add(w);
        }
    }
    // The mean of a constant is that constant; the quotient below can
    // land an ulp away when the weights round.
    if constant {
        return Ok(first);
    }
    Ok(num.value() / den.value())
}

#[inline]
fn dev_power(d: f64, p: f64) -> f64 {
    if p == 1.0 {
        d
    } else if p == 2.0 {
        d * d
    } else {
        d.powf(p)
    }
}

/// p-th power mean of |f - mean| over a nonempty cell set.
fn central_moment(f: &CellFn, cells: &CellSet, p: f64, space: &Space) -> Result<f64> {
    let m = mean(f, cells, space)?;
    let mut num = Accumulator::new();
    let mut den = Accumulator::new();
    for &(lo, hi) in cells.runs() {
        let ws = &space.weights()[lo as usize..hi as usize];
        let vs = &f.values()[lo as usize..hi as usize];
        for (&w, &v) in ws.iter().zip(vs) {
            num.add(w * dev_power((v - m).abs(), p));
            den.add(w);
        }
    }
    Ok(num.value() / den.value())
}

/// p-oscillation of f over a cell set: the L^p mean of |f - mean|.
pub fn oscillation_p(f: &CellFn, cells: &CellSet, p: f64, space: &Space) -> Result<f64> {
    check_exponent(p)?;
    Ok(central_moment(f, cells, p, space)?.powf(1.0 / p))
}

/// Supremum of the p-oscillation over the family, with the lowest
/// attaining generator index.
///
/// Generators with proportional weighted value profiles share one
/// oscillation, so the scan runs once per equivalence class.
pub fn bmo_seminorm(f: &CellFn, family: &Family, p: f64, space: &Space) -> Result<Seminorm> {
    check_exponent(p)?;
    if family.is_empty() {
        return Err(Error::InvalidParams("seminorm over an empty family".into()));
    }
    let classes = profile::distribution_classes(f.values(), family, space);
    let values = class_values(&classes, |rep| oscillation_p(f, family.member(rep), p, space))?;
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for (info, &v) in classes.classes.iter().zip(&values) {
        if v > best.0 || (v == best.0 && info.first_gen < best.1) {
            best = (v, info.first_gen);
        }
    }
    Ok(Seminorm {
        value: best.0,
        argmax: best.1,
    })
}

/// Per-generator means of f, in family order.
pub fn family_means(f: &CellFn, family: &Family, space: &Space) -> Result<Vec<f64>> {
    let classes = profile::distribution_classes(f.values(), family, space);
    let values = class_values(&classes, |rep| mean(f, family.member(rep), space))?;
    Ok(classes.class_of_gen.iter().map(|&c| values[c]).collect())
}

/// Runs a per-class statistic on each class representative, in parallel
/// when the class count warrants it.
fn class_values<F>(classes: &profile::DistributionClasses, stat: F) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    if classes.classes.len() >= 32 {
        classes
            .classes
            .par_iter()
            .map(|info| stat(info.representative))
            .collect()
    } else {
        classes
            .classes
            .iter()
            .map(|info| stat(info.representative))
            .collect()
    }
}

/// One row of a local integral report.
#[derive(Clone, Debug)]
pub struct LocalIntegralRow {
    pub gen: usize,
    pub measure: f64,
    pub mean_abs_p: f64,
    pub integral: f64,
}

/// Per-generator measure, mean of |f|^p, and integral of |f|^p.
pub fn local_integral_report(
    f: &CellFn,
    family: &Family,
    p: f64,
    space: &Space,
) -> Result<Vec<LocalIntegralRow>> {
    check_exponent(p)?;
    let classes = profile::distribution_classes(f.values(), family, space);
    let means = class_values(&classes, |rep| {
        let cells = family.member(rep);
        let mut num = Accumulator::new();
        let mut den = Accumulator::new();
        for &(lo, hi) in cells.runs() {
            let ws = &space.weights()[lo as usize..hi as usize];
            let vs = &f.values()[lo as usize..hi as usize];
            for (&w, &v) in ws.iter().zip(vs) {
                num.add(w * dev_power(v.abs(), p));
                den.add(w);
            }
        }
        Ok(num.value() / den.value())
    })?;
    Ok((0..family.len())
        .map(|g| {
            let measure = space.measure(family.member(g));
            let mean_abs_p = means[classes.class_of_gen[g]];
            LocalIntegralRow {
                gen: g,
                measure,
                mean_abs_p,
                integral: measure * mean_abs_p,
            }
        })
        .collect())
}

/// Distribution of |f - mean| over a nonempty cell set, normalized by
/// the measure of the set.
pub fn distribution(f: &CellFn, cells: &CellSet, space: &Space) -> Result<StepDist> {
    nonempty(cells)?;
    let m = mean(f, cells, space)?;
    let mut devs: Vec<(f64, f64)> = Vec::with_capacity(cells.len());
    for &(lo, hi) in cells.runs() {
        let ws = &space.weights()[lo as usize..hi as usize];
        let vs = &f.values()[lo as usize..hi as usize];
        for (&w, &v) in ws.iter().zip(vs) {
            devs.push(((v - m).abs(), w));
        }
    }
    devs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let total = space.measure(cells);
    // Group equal deviations, then accumulate the strictly-above mass
    // from the top down.
    let mut groups: Vec<(f64, f64)> = Vec::new();
    for (d, w) in devs {
        match groups.last_mut() {
            Some((gd, gw)) if *gd == d => *gw += w,
            _ => groups.push((d, w)),
        }
    }
    let mut points = vec![(0.0, 0.0); groups.len()];
    let mut above = Accumulator::new();
    for (k, &(d, w)) in groups.iter().enumerate().rev() {
        points[k] = (d, (above.value() / total).clamp(0.0, 1.0));
        above.add(w);
    }
    if let Some(last) = points.last_mut() {
        last.1 = 0.0;
    }
    Ok(StepDist { points })
}

/// Layer-cake evaluation of the normalized p-th deviation moment from a
/// step distribution. Equals oscillation_p to the p-th power.
pub fn moment_from_distribution(dist: &StepDist, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let pts = dist.points();
    if pts.is_empty() {
        return Ok(0.0);
    }
    let mut acc = Accumulator::new();
    acc.add(dev_power(pts[0].0, p));
    for k in 0..pts.len() - 1 {
        acc.add(pts[k].1 * (dev_power(pts[k + 1].0, p) - dev_power(pts[k].0, p)));
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_cell() -> (Space, CellFn) {
        let space = Space::new(
            (0..4).map(|i| format!("c{i}")).collect(),
            vec![1.0; 4],
        )
        .unwrap();
        let f = CellFn::new(vec![1.0, 2.0, 3.0, 6.0]).unwrap();
        (space, f)
    }

    #[test]
    fn mean_of_four_values() {
        let (space, f) = four_cell();
        let all = space.full_set();
        assert_eq!(mean(&f, &all, &space).unwrap(), 3.0);
        assert!(matches!(
            mean(&f, &CellSet::empty(), &space),
            Err(Error::EmptyGenerator)
        ));
    }

    #[test]
    fn oscillation_one_of_four_values() {
        // Deviations from 3 are (2, 1, 0, 3), so the mean deviation is 1.5.
        let (space, f) = four_cell();
        let all = space.full_set();
        assert_eq!(oscillation_p(&f, &all, 1.0, &space).unwrap(), 1.5);
        assert!(oscillation_p(&f, &all, 0.5, &space).is_err());
    }

    #[test]
    fn distribution_of_four_values() {
        let (space, f) = four_cell();
        let d = distribution(&f, &space.full_set(), &space).unwrap();
        assert_eq!(
            d.points(),
            &[(0.0, 0.75), (1.0, 0.5), (2.0, 0.25), (3.0, 0.0)]
        );
        assert_eq!(d.eval(-1.0), 1.0);
        assert_eq!(d.eval(0.0), 0.75);
        assert_eq!(d.eval(1.5), 0.5);
        assert_eq!(d.eval(3.0), 0.0);
        assert_eq!(d.left_limit(0.0), 1.0);
        assert_eq!(d.left_limit(1.0), 0.75);
        assert_eq!(d.left_limit(3.0), 0.25);
        assert_eq!(d.left_limit(4.0), 0.0);
    }

    #[test]
    fn layer_cake_matches_direct_moment() {
        // Second moment of (2, 1, 0, 3) under uniform weights is 14/4 = 3.5.
        let (space, f) = four_cell();
        let d = distribution(&f, &space.full_set(), &space).unwrap();
        assert_eq!(moment_from_distribution(&d, 2.0).unwrap(), 3.5);
        let osc = oscillation_p(&f, &space.full_set(), 2.0, &space).unwrap();
        assert!((osc * osc - 3.5).abs() < 1e-15);
    }

    #[test]
    fn seminorm_picks_lowest_argmax() {
        let space = Space::new(
            (0..4).map(|i| format!("c{i}")).collect(),
            vec![1.0; 4],
        )
        .unwrap();
        let f = CellFn::new(vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        // Members 0 and 1 have identical oscillation 0.5, member 2 has 0.
        let family = Family::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                CellSet::from_indices(vec![0, 1]),
                CellSet::from_indices(vec![2, 3]),
                CellSet::from_indices(vec![1, 3]),
            ],
        )
        .unwrap();
        let s = bmo_seminorm(&f, &family, 1.0, &space).unwrap();
        assert_eq!(s.value, 0.5);
        assert_eq!(s.argmax, 0);
    }

    #[test]
    fn constant_function_has_zero_seminorm() {
        let space = Space::new(vec!["a".into(), "b".into()], vec![1.0, 3.0]).unwrap();
        let f = CellFn::constant(2, 4.25).unwrap();
        let family = Family::new(vec!["g".into()], vec![space.full_set()]).unwrap();
        assert_eq!(bmo_seminorm(&f, &family, 2.0, &space).unwrap().value, 0.0);
    }

    #[test]
    fn local_integrals_scale_with_measure() {
        let (space, f) = four_cell();
        let family = Family::new(
            vec!["g0".into(), "g1".into()],
            vec![CellSet::single_run(0, 2), CellSet::single_run(0, 4)],
        )
        .unwrap();
        let rows = local_integral_report(&f, &family, 1.0, &space).unwrap();
        assert_eq!(rows[0].measure, 2.0);
        assert_eq!(rows[0].mean_abs_p, 1.5);
        assert_eq!(rows[0].integral, 3.0);
        assert_eq!(rows[1].integral, 12.0);
    }
}
