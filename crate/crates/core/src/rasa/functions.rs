//! Exactly evaluable convex test functions.

use std::fmt;

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, pow, rat, serde_str, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexTestFunction {
    /// `t -> max(t - c, 0)`.
    Angle {
        #[serde(with = "serde_str")]
        corner: Rational,
    },
    /// `t -> t^k` with `k` even.
    Monomial { degree: u32 },
    /// `t -> intercept + slopes[0] t + sum_j (slopes[j+1] - slopes[j]) max(t - breakpoints[j], 0)`.
    PiecewiseLinear(PiecewiseLinear),
    /// `t -> alpha + beta t`.
    Affine {
        #[serde(with = "serde_str")]
        alpha: Rational,
        #[serde(with = "serde_str")]
        beta: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    #[serde(with = "serde_str")]
    intercept: Rational,
    #[serde(with = "serde_str::vec")]
    breakpoints: Vec<Rational>,
    #[serde(with = "serde_str::vec")]
    slopes: Vec<Rational>,
}

impl PiecewiseLinear {
    /// `slopes` has one more entry than `breakpoints`; breakpoints strictly
    /// increase and slopes must not decrease.
    pub fn new(
        intercept: Rational,
        breakpoints: Vec<Rational>,
        slopes: Vec<Rational>,
    ) -> Result<Self> {
        if slopes.len() != breakpoints.len() + 1 {
            return Err(Error::Precondition(format!(
                "{} slopes for {} breakpoints",
                slopes.len(),
                breakpoints.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition(
                "breakpoints must strictly increase".into(),
            ));
        }
        if slopes.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Precondition("slopes must be nondecreasing".into()));
        }
        Ok(Self {
            intercept,
            breakpoints,
            slopes,
        })
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        let mut value = &self.intercept + &self.slopes[0] * t;
        for (j, b) in self.breakpoints.iter().enumerate() {
            if t > b {
                value += (&self.slopes[j + 1] - &self.slopes[j]) * (t - b);
            }
        }
        value
    }

    /// Random convex function with breakpoints in `(0, 1)` on a `1/24` mesh
    /// and integer-over-4 slopes.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let count = rng.gen_range(1..=4);
        let mut cuts: Vec<i64> = (0..count).map(|_| rng.gen_range(1..24)).collect();
        cuts.sort_unstable();
        cuts.dedup();
        let breakpoints: Vec<Rational> = cuts.iter().map(|&c| rat(c, 24)).collect();
        let mut slope = rat(rng.gen_range(-12..=4), 4);
        let mut slopes = vec![slope.clone()];
        for _ in 0..breakpoints.len() {
            slope += rat(rng.gen_range(1..=8), 4);
            slopes.push(slope.clone());
        }
        let intercept = rat(rng.gen_range(-8..=8), 4);
        Self::new(intercept, breakpoints, slopes).expect("generated slopes are nondecreasing")
    }
}

impl ConvexTestFunction {
    pub fn angle(corner: Rational) -> Self {
        Self::Angle { corner }
    }

    pub fn monomial(degree: u32) -> Result<Self> {
        if degree < 2 || !degree.is_multiple_of(2) {
            return Err(Error::OutOfRange {
                name: "degree",
                value: degree.to_string(),
                range: "even integers >= 2",
            });
        }
        Ok(Self::Monomial { degree })
    }

    pub fn affine(alpha: Rational, beta: Rational) -> Self {
        Self::Affine { alpha, beta }
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        match self {
            Self::Angle { corner } => {
                let d = t - corner;
                if d.is_positive() {
                    d
                } else {
                    Rational::zero()
                }
            }
            Self::Monomial { degree } => pow(t, *degree as usize),
            Self::PiecewiseLinear(p) => p.eval(t),
            Self::Affine { alpha, beta } => alpha + beta * t,
        }
    }
}

impl fmt::Display for ConvexTestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Angle { corner } => write!(f, "angle({corner})"),
            Self::Monomial { degree } => write!(f, "t^{degree}"),
            Self::PiecewiseLinear(p) => write!(f, "pl({} breakpoints)", p.breakpoints.len()),
            Self::Affine { alpha, beta } => write!(f, "{alpha}+{beta}t"),
        }
    }
}

/// Which members of the built-in family to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySelection {
    pub angles: bool,
    pub monomials: bool,
    pub affine: bool,
    /// Number of seeded random piecewise-linear functions.
    pub random_piecewise: usize,
}

impl Default for FamilySelection {
    fn default() -> Self {
        Self {
            angles: true,
            monomials: true,
            affine: true,
            random_piecewise: 16,
        }
    }
}

/// The built-in family for sums scaled by `denominator` (2n for the
/// two-variable form, mn in general): angles at every `k / denominator`,
/// `t^2, t^4, t^6`, one affine function, and `random` seeded piecewise-linear
/// functions drawn from `rng`.
pub fn test_family<R: Rng + ?Sized>(
    denominator: usize,
    selection: &FamilySelection,
    rng: &mut R,
) -> Vec<ConvexTestFunction> {
    let mut out = Vec::new();
    if selection.angles {
        out.extend(
            (0..=denominator).map(|k| ConvexTestFunction::angle(rat(k as i64, denominator as i64))),
        );
    }
    if selection.monomials {
        out.extend([2, 4, 6].map(|d| ConvexTestFunction::Monomial { degree: d }));
    }
    if selection.affine {
        out.push(ConvexTestFunction::affine(int(1), rat(-3, 2)));
    }
    out.extend(
        (0..selection.random_piecewise)
            .map(|_| ConvexTestFunction::PiecewiseLinear(PiecewiseLinear::random(rng))),
    );
    out
}
