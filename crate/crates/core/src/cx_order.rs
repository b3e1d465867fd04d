//! Decision procedures for the convex order `lhs <=_cx rhs` between finitely
//! supported distributions.
//!
//! Four independent routes are provided:
//!
//! * [`cx_compare_oracle`]: equal means plus stop-loss dominance at every
//!   point of the merged support. This is exact for finite supports and is
//!   used as the reference for the other three.
//! * [`ohlin_check`]: the single-crossing sufficient condition.
//! * [`levin_steckin_check`]: endpoint, total-integral and partial-integral
//!   conditions on the distribution functions over `[a, b]`.
//! * [`szostok_decision`]: parity of the number of sign changes of
//!   `F_rhs - F_lhs` plus a chain of inequalities on the areas between them.
//!
//! All procedures take the pair in the orientation "lhs <=_cx rhs" and use
//! left-continuous distribution functions `F(x) = P(X < x)`.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::distributions::{DiscreteDistribution, StepCdf};
use crate::error::{Error, Result};
use crate::rational::{serde_str, Rational};

/// Number of sign changes in `values` after discarding zeros.
pub fn sign_changes(values: &[Rational]) -> usize {
    let mut last: Option<bool> = None;
    let mut changes = 0;
    for v in values {
        if v.is_zero() {
            continue;
        }
        let positive = v.is_positive();
        if let Some(prev) = last {
            if prev != positive {
                changes += 1;
            }
        }
        last = Some(positive);
    }
    changes
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CxVerdict {
    pub holds: bool,
    pub means_equal: bool,
    /// Smallest `t` with `stop_loss(lhs, t) > stop_loss(rhs, t)`; only set
    /// when the means agree and the order fails.
    #[serde(with = "serde_str::option")]
    pub witness: Option<Rational>,
    /// `mean(rhs) - mean(lhs)`.
    #[serde(with = "serde_str")]
    pub mean_gap: Rational,
}

/// Merged, sorted, deduplicated support of both distributions.
fn merged_support(lhs: &DiscreteDistribution, rhs: &DiscreteDistribution) -> Vec<Rational> {
    let mut pts: Vec<Rational> = lhs.support().chain(rhs.support()).cloned().collect();
    pts.sort();
    pts.dedup();
    pts
}

pub fn cx_compare_oracle(lhs: &DiscreteDistribution, rhs: &DiscreteDistribution) -> CxVerdict {
    let mean_gap = rhs.mean() - lhs.mean();
    if !mean_gap.is_zero() {
        return CxVerdict {
            holds: false,
            means_equal: false,
            witness: None,
            mean_gap,
        };
    }
    // Both stop-loss transforms are piecewise linear with kinks only on the
    // merged support and agree outside its hull, so these points suffice.
    let witness = merged_support(lhs, rhs)
        .into_iter()
        .find(|t| lhs.stop_loss(t) > rhs.stop_loss(t));
    CxVerdict {
        holds: witness.is_none(),
        means_equal: true,
        witness,
        mean_gap,
    }
}

/// Merged support plus one midpoint per gap plus one point beyond each end.
/// Step distribution functions are constant between support points, so
/// sampling here sees every value the difference takes.
pub fn evaluation_grid(lhs: &DiscreteDistribution, rhs: &DiscreteDistribution) -> Vec<Rational> {
    let pts = merged_support(lhs, rhs);
    let one = Rational::one();
    let mut grid = Vec::with_capacity(2 * pts.len() + 1);
    grid.push(&pts[0] - &one);
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            grid.push((&pts[i - 1] + p) / Rational::from_integer(2.into()));
        }
        grid.push(p.clone());
    }
    grid.push(&pts[pts.len() - 1] + &one);
    grid
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OhlinReport {
    pub applies: bool,
    #[serde(with = "serde_str::option")]
    pub crossing: Option<Rational>,
    pub identical: bool,
}

/// Ohlin's single-crossing test: equal means and a point `x0` with
/// `F_lhs <= F_rhs` below it and `F_lhs >= F_rhs` above it (both nonstrict).
/// `x0` itself is unconstrained. The reported crossing is the last grid point
/// where `F_lhs < F_rhs`.
pub fn ohlin_check(lhs: &DiscreteDistribution, rhs: &DiscreteDistribution) -> OhlinReport {
    let grid = evaluation_grid(lhs, rhs);
    let diffs: Vec<Rational> = grid.iter().map(|x| lhs.cdf(x) - rhs.cdf(x)).collect();
    let identical = diffs.iter().all(Zero::is_zero);
    if identical {
        return OhlinReport {
            applies: true,
            crossing: None,
            identical: true,
        };
    }
    let means_equal = lhs.mean() == rhs.mean();
    let last_negative = diffs.iter().rposition(Signed::is_negative);
    let first_positive = diffs.iter().position(Signed::is_positive);
    let single_crossing = match (last_negative, first_positive) {
        (Some(neg), Some(pos)) => neg < pos,
        _ => true,
    };
    let applies = means_equal && single_crossing;
    OhlinReport {
        applies,
        crossing: if applies {
            last_negative.map(|i| grid[i].clone())
        } else {
            None
        },
        identical: false,
    }
}

/// `F_rhs - F_lhs` as a step function: `values[k]` is its constant value on
/// `(points[k], points[k + 1]]`, and it vanishes left of `points[0]`.
struct CdfDifference {
    points: Vec<Rational>,
    values: Vec<Rational>,
    lhs_segments: Vec<Rational>,
    rhs_segments: Vec<Rational>,
}

impl CdfDifference {
    fn new(lhs: &DiscreteDistribution, rhs: &DiscreteDistribution, extra: &[Rational]) -> Self {
        let mut points = merged_support(lhs, rhs);
        points.extend(extra.iter().cloned());
        points.sort();
        points.dedup();
        let right_ends = &points[1..];
        let lhs_segments: Vec<Rational> = right_ends.iter().map(|x| lhs.cdf(x)).collect();
        let rhs_segments: Vec<Rational> = right_ends.iter().map(|x| rhs.cdf(x)).collect();
        let values = lhs_segments
            .iter()
            .zip(&rhs_segments)
            .map(|(l, r)| r - l)
            .collect();
        Self {
            points,
            values,
            lhs_segments,
            rhs_segments,
        }
    }

    fn width(&self, k: usize) -> Rational {
        &self.points[k + 1] - &self.points[k]
    }

    /// Right end of the last segment of each sign run that is followed by a
    /// run of the opposite sign; zero segments in between are skipped.
    fn sign_change_points(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        let mut last: Option<(bool, usize)> = None;
        for (k, v) in self.values.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let positive = v.is_positive();
            if let Some((prev, end)) = last {
                if prev != positive {
                    out.push(self.points[end + 1].clone());
                }
            }
            last = Some((positive, k));
        }
        out
    }

    fn first_nonzero_sign(&self) -> Option<Ordering> {
        self.values
            .iter()
            .find(|v| !v.is_zero())
            .map(|v| v.cmp(&Rational::zero()))
    }
}

/// Points where `F_rhs - F_lhs` changes sign.
pub fn crossing_points(lhs: StepCdf<'_>, rhs: StepCdf<'_>) -> Vec<Rational> {
    CdfDifference::new(lhs.distribution(), rhs.distribution(), &[]).sign_change_points()
}

fn check_interval(
    lhs: &DiscreteDistribution,
    rhs: &DiscreteDistribution,
    a: &Rational,
    b: &Rational,
) -> Result<()> {
    if a >= b {
        return Err(Error::Precondition(format!("interval [{a}, {b}] is empty")));
    }
    for d in [lhs, rhs] {
        if d.min_support() < a || d.max_support() > b {
            return Err(Error::Precondition(format!(
                "support [{}, {}] escapes [{a}, {b}]",
                d.min_support(),
                d.max_support()
            )));
        }
    }
    Ok(())
}

/// Values of `F` at the endpoints of `[a, b]`, read as a function of bounded
/// variation on the closed interval: `F(a) = P(X < a)` and `F(b) = P(X <= b)`,
/// so atoms at either endpoint are charged to the integral.
fn endpoint_values(d: &DiscreteDistribution, a: &Rational, b: &Rational) -> (Rational, Rational) {
    (d.cdf(a), d.cdf(b) + d.mass_at(b))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevinSteckinReport {
    pub endpoints_equal: bool,
    pub integrals_equal: bool,
    pub partial_integrals_dominated: bool,
    /// First grid point where `int_a^x F_lhs > int_a^x F_rhs`.
    #[serde(with = "serde_str::option")]
    pub first_violation: Option<Rational>,
}

impl LevinSteckinReport {
    pub fn holds(&self) -> bool {
        self.endpoints_equal && self.integrals_equal && self.partial_integrals_dominated
    }
}

/// Levin–Stečkin conditions on `[a, b]`. Integrals are exact sums over the
/// constant segments; the partial-integral condition is checked at every
/// grid point, which suffices because the integrals are piecewise linear.
pub fn levin_steckin_check(
    lhs: StepCdf<'_>,
    rhs: StepCdf<'_>,
    a: &Rational,
    b: &Rational,
) -> Result<LevinSteckinReport> {
    let (ld, rd) = (lhs.distribution(), rhs.distribution());
    check_interval(ld, rd, a, b)?;
    let (la, lb) = endpoint_values(ld, a, b);
    let (ra, rb) = endpoint_values(rd, a, b);
    if la != ra {
        return Err(Error::Precondition(format!(
            "F_lhs(a) = {la} but F_rhs(a) = {ra}"
        )));
    }
    let diff = CdfDifference::new(ld, rd, &[a.clone(), b.clone()]);
    let mut lhs_integral = Rational::zero();
    let mut rhs_integral = Rational::zero();
    let mut first_violation = None;
    for k in 0..diff.values.len() {
        let w = diff.width(k);
        lhs_integral += &diff.lhs_segments[k] * &w;
        rhs_integral += &diff.rhs_segments[k] * &w;
        let x = &diff.points[k + 1];
        if first_violation.is_none() && x < b && lhs_integral > rhs_integral {
            first_violation = Some(x.clone());
        }
    }
    Ok(LevinSteckinReport {
        endpoints_equal: lb == rb,
        integrals_equal: lhs_integral == rhs_integral,
        partial_integrals_dominated: first_violation.is_none(),
        first_violation,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SzostokReport {
    #[serde(with = "serde_str::vec")]
    pub sign_change_points: Vec<Rational>,
    /// `A_0..A_m`: integrals of `|F_rhs - F_lhs|` between consecutive sign
    /// changes, with `a` and `b` as outer ends.
    #[serde(with = "serde_str::vec")]
    pub areas: Vec<Rational>,
    pub parity_ok: bool,
    pub partial_sums_ok: bool,
    pub decision: bool,
}

impl SzostokReport {
    pub fn sign_change_count(&self) -> usize {
        self.sign_change_points.len()
    }
}

/// Szostok's sign-change decision on `[a, b]` for `F = F_rhs - F_lhs`.
///
/// Requires equal endpoint values, `int_a^b F = 0` and `F >= 0` before the
/// first sign change; violations are returned as [`Error::Precondition`].
/// With `m` sign changes: `m = 0` means `F` vanishes and the order holds,
/// even `m > 0` means it fails, odd `m` holds iff
/// `A_0 + A_2 + ... + A_{2j} >= A_1 + A_3 + ... + A_{2j+1}` for every
/// `2j + 1 <= m - 2`.
pub fn szostok_decision(
    lhs: StepCdf<'_>,
    rhs: StepCdf<'_>,
    a: &Rational,
    b: &Rational,
) -> Result<SzostokReport> {
    let (ld, rd) = (lhs.distribution(), rhs.distribution());
    check_interval(ld, rd, a, b)?;
    let (la, lb) = endpoint_values(ld, a, b);
    let (ra, rb) = endpoint_values(rd, a, b);
    if la != ra || lb != rb {
        return Err(Error::Precondition("endpoint values differ".into()));
    }
    let diff = CdfDifference::new(ld, rd, &[a.clone(), b.clone()]);
    let total: Rational = (0..diff.values.len())
        .map(|k| &diff.values[k] * diff.width(k))
        .sum();
    if !total.is_zero() {
        return Err(Error::Precondition(format!(
            "integral of F_rhs - F_lhs over [{a}, {b}] is {total}, not 0"
        )));
    }
    if diff.first_nonzero_sign() == Some(Ordering::Less) {
        return Err(Error::Precondition(
            "F_rhs - F_lhs is negative before its first sign change".into(),
        ));
    }

    let sign_change_points = diff.sign_change_points();
    let mut areas = vec![Rational::zero(); sign_change_points.len() + 1];
    let mut segment = 0;
    for k in 0..diff.values.len() {
        while segment < sign_change_points.len() && diff.points[k] >= sign_change_points[segment] {
            segment += 1;
        }
        areas[segment] += diff.values[k].abs() * diff.width(k);
    }

    let m = sign_change_points.len();
    let parity_ok = m == 0 || m % 2 == 1;
    let mut partial_sums_ok = true;
    if m % 2 == 1 {
        let mut even_sum = Rational::zero();
        let mut odd_sum = Rational::zero();
        for pair in areas.chunks(2).take((m - 1) / 2) {
            even_sum += &pair[0];
            odd_sum += &pair[1];
            if even_sum < odd_sum {
                partial_sums_ok = false;
                break;
            }
        }
    }
    Ok(SzostokReport {
        sign_change_points,
        areas,
        parity_ok,
        partial_sums_ok,
        decision: parity_ok && partial_sums_ok,
    })
}
