//! The non-binomial pair for which the convolution-vs-mixture ordering fails.
//!
//! `X ~ 1/2 (d_1 + d_3)`, `Y ~ 1/2 (d_0 + d_4)`: the law of `X + Y` is not
//! dominated by the equal mixture of the laws of `X_1 + X_2` and `Y_1 + Y_2`.

use serde::{Deserialize, Serialize};

use crate::cx_order::{
    crossing_points, cx_compare_oracle, levin_steckin_check, szostok_decision, CxVerdict,
    LevinSteckinReport,
};
use crate::distributions::{convolve, mixture, DiscreteDistribution};
use crate::error::{Error, Result};
use crate::rasa::ConvexTestFunction;
use crate::rational::{int, rat, serde_str, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub lhs: DiscreteDistribution,
    pub rhs: DiscreteDistribution,
    #[serde(with = "serde_str::vec")]
    pub sign_change_points: Vec<Rational>,
    #[serde(with = "serde_str::vec")]
    pub areas: Vec<Rational>,
    pub szostok_decision: bool,
    pub levin_steckin: LevinSteckinReport,
    pub oracle_verdict: CxVerdict,
    pub witness_function: ConvexTestFunction,
    #[serde(with = "serde_str")]
    pub witness_lhs_expectation: Rational,
    #[serde(with = "serde_str")]
    pub witness_rhs_expectation: Rational,
}

fn two_point(a: i64, b: i64) -> DiscreteDistribution {
    DiscreteDistribution::from_atoms(vec![(int(a), rat(1, 2)), (int(b), rat(1, 2))])
        .expect("two equal atoms form a distribution")
}

/// `(law of X + Y, 1/2 law of X_1 + X_2 + 1/2 law of Y_1 + Y_2)`.
pub fn build_counterexample() -> (DiscreteDistribution, DiscreteDistribution) {
    let x = two_point(1, 3);
    let y = two_point(0, 4);
    let lhs = convolve(&x, &y);
    let rhs = mixture(
        &[rat(1, 2), rat(1, 2)],
        &[convolve(&x, &x), convolve(&y, &y)],
    )
    .expect("equal weights sum to one");
    (lhs, rhs)
}

/// Runs every decision procedure on the pair and checks each against the
/// known exact values. A mismatch is an error.
pub fn analyze_counterexample() -> Result<CounterexampleReport> {
    let (lhs, rhs) = build_counterexample();
    let (a, b) = (int(0), int(8));

    let sign_change_points = crossing_points(lhs.step_cdf(), rhs.step_cdf());
    let szostok = szostok_decision(lhs.step_cdf(), rhs.step_cdf(), &a, &b)?;
    let levin_steckin = levin_steckin_check(lhs.step_cdf(), rhs.step_cdf(), &a, &b)?;
    let oracle_verdict = cx_compare_oracle(&lhs, &rhs);

    let corner = oracle_verdict
        .witness
        .clone()
        .ok_or_else(|| Error::Precondition("oracle produced no witness".into()))?;
    let witness_function = ConvexTestFunction::angle(corner);
    let witness_lhs_expectation = lhs.expect(|t| witness_function.eval(t));
    let witness_rhs_expectation = rhs.expect(|t| witness_function.eval(t));

    let report = CounterexampleReport {
        lhs,
        rhs,
        sign_change_points,
        areas: szostok.areas.clone(),
        szostok_decision: szostok.decision,
        levin_steckin,
        oracle_verdict,
        witness_function,
        witness_lhs_expectation,
        witness_rhs_expectation,
    };
    let mismatches = report.mismatches();
    if mismatches.is_empty() {
        Ok(report)
    } else {
        Err(Error::Precondition(format!(
            "counterexample mismatch: {}",
            mismatches.join("; ")
        )))
    }
}

impl CounterexampleReport {
    /// Descriptions of every field that differs from the expected exact value.
    pub fn mismatches(&self) -> Vec<String> {
        let quarter = rat(1, 4);
        let eighth = rat(1, 8);
        let expected_lhs =
            DiscreteDistribution::from_atoms([1, 3, 5, 7].map(|s| (int(s), quarter.clone())))
                .expect("valid");
        let expected_rhs = DiscreteDistribution::from_atoms(vec![
            (int(0), eighth.clone()),
            (int(2), eighth.clone()),
            (int(4), rat(1, 2)),
            (int(6), eighth.clone()),
            (int(8), eighth.clone()),
        ])
        .expect("valid");

        let mut out = Vec::new();
        let mut check = |ok: bool, what: &str| {
            if !ok {
                out.push(what.to_string());
            }
        };
        check(self.lhs == expected_lhs, "lhs law");
        check(self.rhs == expected_rhs, "rhs law");
        check(
            self.sign_change_points == vec![int(1), int(4), int(7)],
            "sign change points",
        );
        check(
            self.areas == vec![eighth.clone(), rat(3, 8), rat(3, 8), eighth],
            "segment areas",
        );
        check(!self.szostok_decision, "sign-change decision");
        check(!self.levin_steckin.holds(), "partial-integral conditions");
        check(!self.oracle_verdict.holds, "stop-loss verdict");
        check(self.oracle_verdict.witness == Some(int(4)), "witness point");
        check(
            self.witness_function == ConvexTestFunction::angle(int(4)),
            "witness function",
        );
        check(
            self.witness_lhs_expectation == int(1),
            "witness lhs expectation",
        );
        check(
            self.witness_rhs_expectation == rat(3, 4),
            "witness rhs expectation",
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laws() {
        let (lhs, rhs) = build_counterexample();
        assert_eq!(lhs.mean(), int(4));
        assert_eq!(rhs.mean(), int(4));
        assert_eq!(lhs.len(), 4);
        assert_eq!(rhs.mass_at(&int(4)), rat(1, 2));
    }

    #[test]
    fn report_matches() {
        let r = analyze_counterexample().unwrap();
        assert!(r.mismatches().is_empty());
        assert!(r.witness_lhs_expectation > r.witness_rhs_expectation);
    }

    #[test]
    fn first_segment_and_total_integral() {
        let (lhs, rhs) = build_counterexample();
        // F_rhs - F_lhs on (0, 1] is 1/8 - 0
        assert_eq!(rhs.cdf(&rat(1, 2)) - lhs.cdf(&rat(1, 2)), rat(1, 8));
        // int_0^8 (F_rhs - F_lhs) = E lhs - E rhs
        let integral: Rational = (0..8)
            .map(|k| rhs.cdf(&int(k + 1)) - lhs.cdf(&int(k + 1)))
            .sum();
        assert_eq!(integral, int(0));
    }

    #[test]
    fn json_shape() {
        let r = analyze_counterexample().unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["oracle_verdict"]["holds"], false);
        assert_eq!(v["oracle_verdict"]["witness"], "4");
        assert_eq!(v["areas"], serde_json::json!(["1/8", "3/8", "3/8", "1/8"]));
        assert_eq!(v["witness_function"]["kind"], "angle");
    }
}
