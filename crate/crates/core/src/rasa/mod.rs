//! Bernstein forms and the binomial convex-order relations behind them.
//!
//! For parameters `x_1..x_m` in `[0, 1]` the quadratic (m = 2) or m-linear
//! Bernstein form
//!
//! ```text
//! sum_{i_1..i_m} ( sum_l prod_j b_{n,i_j}(x_l) - m prod_j b_{n,i_j}(x_j) ) f((i_1+..+i_m)/(mn))
//! ```
//!
//! equals `m (E f(R) - E f(L))`, where `L` is the scaled sum of independent
//! `B(n, x_j)` and `R` the equal-weight mixture of scaled m-fold sums of
//! `B(n, x_l)`. Nonnegativity for every convex `f` is the statement
//! `L <=_cx R`, which this module checks exactly through [`crate::cx_order`].
//! Parameters equal to 0 or 1 produce Dirac masses directly.

mod functions;

pub use functions::{test_family, ConvexTestFunction, FamilySelection, PiecewiseLinear};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cx_order::{cx_compare_oracle, sign_changes, CxVerdict};
use crate::distributions::{
    bernoulli, binomial, check_probability, convolve, convolve_power, mixture, scale,
    uniform_mixture, DiscreteDistribution,
};
use crate::error::{Error, Result};
use crate::rational::{binomial_coefficient, int, pow, serde_str, Rational};

/// Bernstein fundamental polynomial `C(n, i) x^i (1 - x)^(n - i)`.
pub fn bernstein(n: usize, i: usize, x: &Rational) -> Result<Rational> {
    if n == 0 || i > n {
        return Err(Error::OutOfRange {
            name: "i",
            value: format!("{i} (n = {n})"),
            range: "0 <= i <= n, n >= 1",
        });
    }
    check_probability("x", x)?;
    Ok(bernstein_unchecked(n, i, x))
}

fn bernstein_unchecked(n: usize, i: usize, x: &Rational) -> Rational {
    Rational::from_integer(binomial_coefficient(n, i))
        * pow(x, i)
        * pow(&(Rational::one() - x), n - i)
}

fn bernstein_row(n: usize, x: &Rational) -> Vec<Rational> {
    (0..=n).map(|i| bernstein_unchecked(n, i, x)).collect()
}

fn check_degree(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::OutOfRange {
            name: "n",
            value: "0".into(),
            range: "n >= 1",
        });
    }
    Ok(())
}

fn check_params(xs: &[Rational]) -> Result<()> {
    if xs.len() < 2 {
        return Err(Error::Precondition(format!(
            "need at least two parameters, got {}",
            xs.len()
        )));
    }
    xs.iter().try_for_each(|x| check_probability("x", x))
}

/// Value of the two-variable form as the literal double sum over `(i, j)`.
pub fn rasa_form(n: usize, x: &Rational, y: &Rational, f: &ConvexTestFunction) -> Result<Rational> {
    check_degree(n)?;
    check_probability("x", x)?;
    check_probability("y", y)?;
    let bx = bernstein_row(n, x);
    let by = bernstein_row(n, y);
    let two = int(2);
    let denom = int(2 * n as i64);
    let mut total = Rational::zero();
    for i in 0..=n {
        for j in 0..=n {
            let weight = &bx[i] * &bx[j] + &by[i] * &by[j] - &two * &bx[i] * &by[j];
            if weight.is_zero() {
                continue;
            }
            total += weight * f.eval(&(int((i + j) as i64) / &denom));
        }
    }
    Ok(total)
}

/// The m-variable form with its weights collected by `k = i_1 + .. + i_m`,
/// so that the value for any `f` is `sum_k coefficients[k] f(k / (mn))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BernsteinForm {
    pub n: usize,
    pub m: usize,
    pub coefficients: Vec<Rational>,
}

impl BernsteinForm {
    /// Enumerates all `(n + 1)^m` index tuples and accumulates the weight
    /// `sum_l prod_j b_{n,i_j}(x_l) - m prod_j b_{n,i_j}(x_j)` of each.
    pub fn new(n: usize, xs: &[Rational]) -> Result<Self> {
        check_degree(n)?;
        check_params(xs)?;
        let m = xs.len();
        let rows: Vec<Vec<Rational>> = xs.iter().map(|x| bernstein_row(n, x)).collect();
        let mut coefficients = vec![Rational::zero(); m * n + 1];
        let m_rat = int(m as i64);
        let mut idx = vec![0usize; m];
        loop {
            let mut weight = Rational::zero();
            for row in &rows {
                weight += idx.iter().map(|&i| &row[i]).product::<Rational>();
            }
            let mixed: Rational = idx.iter().zip(&rows).map(|(&i, row)| &row[i]).product();
            weight -= &m_rat * mixed;
            coefficients[idx.iter().sum::<usize>()] += weight;

            // odometer over {0..n}^m
            let mut pos = 0;
            while pos < m {
                idx[pos] += 1;
                if idx[pos] <= n {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == m {
                break;
            }
        }
        Ok(Self { n, m, coefficients })
    }

    /// Grid point `k / (mn)` at which coefficient `k` is applied.
    pub fn node(&self, k: usize) -> Rational {
        Rational::new(k.into(), (self.m * self.n).into())
    }

    pub fn value(&self, f: &ConvexTestFunction) -> Rational {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| c * f.eval(&self.node(k)))
            .sum()
    }

    /// Value given `f` already evaluated at every node.
    pub fn value_on_nodes(&self, f_at_nodes: &[Rational]) -> Rational {
        self.coefficients
            .iter()
            .zip(f_at_nodes)
            .map(|(c, v)| c * v)
            .sum()
    }
}

/// The m-variable form for a single `f`.
pub fn rasa_form_general(n: usize, xs: &[Rational], f: &ConvexTestFunction) -> Result<Rational> {
    Ok(BernsteinForm::new(n, xs)?.value(f))
}

/// A pair `(L, R)` whose convex ordering `L <=_cx R` is equivalent to the
/// nonnegativity of the Bernstein form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RasaPair {
    pub lhs: DiscreteDistribution,
    pub rhs: DiscreteDistribution,
    pub n: usize,
    pub m: usize,
    #[serde(with = "serde_str::vec")]
    pub params: Vec<Rational>,
}

impl RasaPair {
    /// `m (E_rhs f - E_lhs f)`, which must equal the Bernstein form.
    pub fn expectation_gap(&self, f: &ConvexTestFunction) -> Rational {
        int(self.m as i64) * (self.rhs.expect(|t| f.eval(t)) - self.lhs.expect(|t| f.eval(t)))
    }
}

/// Unscaled laws of `X_(1) + .. + X_(m)` and of the mixture of the m-fold
/// sums `X_(l),1 + .. + X_(l),m`.
pub fn unscaled_pair(
    n: usize,
    xs: &[Rational],
) -> Result<(DiscreteDistribution, DiscreteDistribution)> {
    check_degree(n)?;
    check_params(xs)?;
    let parts: Vec<DiscreteDistribution> =
        xs.iter().map(|x| binomial(n, x)).collect::<Result<_>>()?;
    let sum = parts[1..]
        .iter()
        .fold(parts[0].clone(), |acc, p| convolve(&acc, p));
    let m = xs.len();
    let self_sums: Vec<DiscreteDistribution> = parts.iter().map(|p| convolve_power(p, m)).collect();
    Ok((sum, uniform_mixture(&self_sums)?))
}

pub fn generalized_pair(n: usize, xs: &[Rational]) -> Result<RasaPair> {
    let (sum, mix) = unscaled_pair(n, xs)?;
    let m = xs.len();
    let factor = int((m * n) as i64);
    Ok(RasaPair {
        lhs: scale(&sum, &factor)?,
        rhs: scale(&mix, &factor)?,
        n,
        m,
        params: xs.to_vec(),
    })
}

/// `L = (X + Y) / 2n` against `R = 1/2 [(X_1 + X_2) / 2n] + 1/2 [(Y_1 + Y_2) / 2n]`.
pub fn rasa_pair(n: usize, x: &Rational, y: &Rational) -> Result<RasaPair> {
    check_degree(n)?;
    check_probability("x", x)?;
    check_probability("y", y)?;
    let bx = binomial(n, x)?;
    let by = binomial(n, y)?;
    let factor = int(2 * n as i64);
    let half = Rational::new(1.into(), 2.into());
    let lhs = scale(&convolve(&bx, &by), &factor)?;
    let rhs = mixture(
        &[half.clone(), half],
        &[
            scale(&convolve(&bx, &bx), &factor)?,
            scale(&convolve(&by, &by), &factor)?,
        ],
    )?;
    Ok(RasaPair {
        lhs,
        rhs,
        n,
        m: 2,
        params: vec![x.clone(), y.clone()],
    })
}

/// `X + Y <=_cx 1/2 (F_{X_1+X_2} + F_{Y_1+Y_2})` on unscaled binomial sums.
pub fn verify_theorem_main(n: usize, x: &Rational, y: &Rational) -> Result<CxVerdict> {
    let (sum, mix) = unscaled_pair(n, &[x.clone(), y.clone()])?;
    Ok(cx_compare_oracle(&sum, &mix))
}

/// Exact law of a sum of independent Bernoulli variables.
pub fn poisson_binomial(ps: &[Rational]) -> Result<DiscreteDistribution> {
    let (first, rest) = ps
        .split_first()
        .ok_or_else(|| Error::Precondition("empty probability list".into()))?;
    rest.iter().try_fold(bernoulli(first)?, |acc, p| {
        Ok(convolve(&acc, &bernoulli(p)?))
    })
}

/// Hoeffding's comparison: Poisson-binomial `<=_cx B(n, mean(ps))`.
pub fn verify_hoeffding(ps: &[Rational]) -> Result<CxVerdict> {
    let sum = poisson_binomial(ps)?;
    let p_bar = ps.iter().sum::<Rational>() / int(ps.len() as i64);
    Ok(cx_compare_oracle(&sum, &binomial(ps.len(), &p_bar)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "0")]
    Zero,
}

impl Sign {
    pub fn of(v: &Rational) -> Self {
        if v.is_positive() {
            Sign::Positive
        } else if v.is_negative() {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
            Sign::Zero => '0',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiPattern {
    /// `psi_k` for `k = 0..=mn`.
    #[serde(with = "serde_str::vec")]
    pub values: Vec<Rational>,
    pub pattern: Vec<Sign>,
    pub change_count: usize,
}

impl PsiPattern {
    pub fn pattern_string(&self) -> String {
        self.pattern.iter().map(|s| s.symbol()).collect()
    }

    /// `sum_k C(mn, k) psi_k`, which vanishes because both sides are
    /// probability mass functions.
    pub fn weighted_sum(&self) -> Rational {
        let total = self.values.len() - 1;
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| Rational::from_integer(binomial_coefficient(total, k)) * v)
            .sum()
    }
}

/// `psi_k = (1/m) sum_i x_i^k (1 - x_i)^(mn - k) - xbar^k (1 - xbar)^(mn - k)`.
pub fn psi_sign_pattern(n: usize, xs: &[Rational]) -> Result<PsiPattern> {
    check_degree(n)?;
    check_params(xs)?;
    if xs.iter().all(|x| x == &xs[0]) {
        return Err(Error::Degenerate(
            "all parameters equal, psi vanishes identically".into(),
        ));
    }
    let m = xs.len();
    let total = m * n;
    let m_rat = int(m as i64);
    let x_bar = xs.iter().sum::<Rational>() / &m_rat;
    let kernel = |x: &Rational, k: usize| pow(x, k) * pow(&(Rational::one() - x), total - k);
    let values: Vec<Rational> = (0..=total)
        .map(|k| xs.iter().map(|x| kernel(x, k)).sum::<Rational>() / &m_rat - kernel(&x_bar, k))
        .collect();
    let pattern = values.iter().map(Sign::of).collect();
    let change_count = sign_changes(&values);
    Ok(PsiPattern {
        values,
        pattern,
        change_count,
    })
}

/// Verdicts for the three relations among `S = X_(1) + .. + X_(m)`,
/// `S* ~ B(mn, xbar)` and the mixture `M` of m-fold sums.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralizedVerdict {
    /// `S <=_cx S*`.
    pub sum_vs_binomial: CxVerdict,
    /// `S* <=_cx M`.
    pub binomial_vs_mixture: CxVerdict,
    /// `S <=_cx M`.
    pub sum_vs_mixture: CxVerdict,
}

impl GeneralizedVerdict {
    pub fn all_hold(&self) -> bool {
        self.sum_vs_binomial.holds && self.binomial_vs_mixture.holds && self.sum_vs_mixture.holds
    }
}

pub fn verify_generalized(n: usize, xs: &[Rational]) -> Result<GeneralizedVerdict> {
    let (sum, mix) = unscaled_pair(n, xs)?;
    let x_bar = xs.iter().sum::<Rational>() / int(xs.len() as i64);
    let central = binomial(xs.len() * n, &x_bar)?;
    Ok(GeneralizedVerdict {
        sum_vs_binomial: cx_compare_oracle(&sum, &central),
        binomial_vs_mixture: cx_compare_oracle(&central, &mix),
        sum_vs_mixture: cx_compare_oracle(&sum, &mix),
    })
}
