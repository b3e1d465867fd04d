//! Finitely supported probability distributions on the rationals.
//!
//! A [`DiscreteDistribution`] is a sorted list of `(support, mass)` atoms with
//! strictly increasing support, strictly positive masses and total mass
//! exactly one. Constructors re-sort and merge, so two distributions compare
//! equal exactly when they describe the same measure.
//!
//! Distribution functions follow the left-continuous convention
//! `F(x) = P(X < x)`: the atom at `s` is *not* counted in `F(s)`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{
    binomial_coefficient, format_rational, int, is_in_unit_interval, parse_rational, pow, Rational,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiscreteDistribution {
    atoms: Vec<(Rational, Rational)>,
}

impl DiscreteDistribution {
    /// Builds a distribution from unsorted atoms. Repeated support points are
    /// merged and zero masses dropped; negative masses, an empty list, or a
    /// total other than one are rejected.
    pub fn from_atoms<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (support, mass) in atoms {
            if mass.is_negative() {
                return Err(Error::InvalidDistribution(format!(
                    "negative mass {} at {}",
                    mass, support
                )));
            }
            *merged.entry(support).or_insert_with(Rational::zero) += mass;
        }
        let total: Rational = merged.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        Ok(Self::from_map(merged))
    }

    /// `merged` must already carry total mass one.
    fn from_map(merged: BTreeMap<Rational, Rational>) -> Self {
        let atoms: Vec<_> = merged.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        debug_assert!(atoms.iter().map(|(_, m)| m).sum::<Rational>().is_one());
        Self { atoms }
    }

    pub fn atoms(&self) -> &[(Rational, Rational)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    /// Always false: a probability distribution has at least one atom.
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &Rational> {
        self.atoms.iter().map(|(s, _)| s)
    }

    pub fn min_support(&self) -> &Rational {
        &self.atoms[0].0
    }

    pub fn max_support(&self) -> &Rational {
        &self.atoms[self.atoms.len() - 1].0
    }

    /// Mass of the atom at `point`, zero if `point` is not in the support.
    pub fn mass_at(&self, point: &Rational) -> Rational {
        self.atoms
            .binary_search_by(|(s, _)| s.cmp(point))
            .map(|i| self.atoms[i].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn mean(&self) -> Rational {
        self.atoms.iter().map(|(s, m)| s * m).sum()
    }

    /// `E f(X)` for an exactly evaluable `f`.
    pub fn expect<F>(&self, f: F) -> Rational
    where
        F: Fn(&Rational) -> Rational,
    {
        self.atoms.iter().map(|(s, m)| f(s) * m).sum()
    }

    /// `P(X < x)`.
    pub fn cdf(&self, x: &Rational) -> Rational {
        self.atoms
            .iter()
            .take_while(|(s, _)| s < x)
            .map(|(_, m)| m)
            .sum()
    }

    /// Stop-loss transform `E (X - t)_+`.
    pub fn stop_loss(&self, t: &Rational) -> Rational {
        self.atoms
            .iter()
            .filter(|(s, _)| s > t)
            .map(|(s, m)| (s - t) * m)
            .sum()
    }

    pub fn step_cdf(&self) -> StepCdf<'_> {
        StepCdf { dist: self }
    }

    /// Parses the line format `<support> <mass>` with `#` comments, or the
    /// JSON form `{"atoms": [["s", "m"], ...]}` when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            return serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()));
        }
        let mut atoms = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected `<support> <mass>`, got {:?}",
                    lineno + 1,
                    line
                )));
            }
            let support = parse_rational(fields[0])?;
            let mass = parse_rational(fields[1])?;
            atoms.push((support, mass));
        }
        if atoms.is_empty() {
            return Err(Error::Parse("no atoms".into()));
        }
        Self::from_atoms(atoms)
    }

    /// Line format, sorted by support.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, m) in &self.atoms {
            out.push_str(&format!("{} {}\n", format_rational(s), format_rational(m)));
        }
        out
    }
}

impl fmt::Display for DiscreteDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (s, m)) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({s}, {m})")?;
        }
        write!(f, "}}")
    }
}

#[derive(Serialize, Deserialize)]
struct AtomsJson {
    atoms: Vec<(String, String)>,
}

impl Serialize for DiscreteDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AtomsJson {
            atoms: self
                .atoms
                .iter()
                .map(|(a, m)| (format_rational(a), format_rational(m)))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscreteDistribution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = AtomsJson::deserialize(d)?;
        let atoms = raw
            .atoms
            .iter()
            .map(|(s, m)| Ok((parse_rational(s)?, parse_rational(m)?)))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        DiscreteDistribution::from_atoms(atoms).map_err(D::Error::custom)
    }
}

/// Evaluation view of a distribution as the left-continuous step function
/// `F(x) = P(X < x)`.
#[derive(Debug, Clone, Copy)]
pub struct StepCdf<'a> {
    dist: &'a DiscreteDistribution,
}

impl<'a> StepCdf<'a> {
    pub fn distribution(&self) -> &'a DiscreteDistribution {
        self.dist
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.dist.cdf(x)
    }

    /// Jump points, i.e. the support.
    pub fn jumps(&self) -> impl Iterator<Item = &'a Rational> {
        self.dist.support()
    }
}

pub fn dirac(c: Rational) -> DiscreteDistribution {
    DiscreteDistribution {
        atoms: vec![(c, Rational::one())],
    }
}

pub fn bernoulli(p: &Rational) -> Result<DiscreteDistribution> {
    check_probability("p", p)?;
    if p.is_zero() {
        return Ok(dirac(int(0)));
    }
    if p.is_one() {
        return Ok(dirac(int(1)));
    }
    Ok(DiscreteDistribution {
        atoms: vec![(int(0), Rational::one() - p), (int(1), p.clone())],
    })
}

/// Binomial law B(n, p). `p` in {0, 1} degenerates to a Dirac mass at 0 or n.
pub fn binomial(n: usize, p: &Rational) -> Result<DiscreteDistribution> {
    if n == 0 {
        return Err(Error::OutOfRange {
            name: "n",
            value: "0".into(),
            range: "n >= 1",
        });
    }
    check_probability("p", p)?;
    let q = Rational::one() - p;
    let atoms = (0..=n)
        .map(|k| {
            let mass =
                Rational::from_integer(binomial_coefficient(n, k)) * pow(p, k) * pow(&q, n - k);
            (int(k as i64), mass)
        })
        .filter(|(_, m)| !m.is_zero())
        .collect();
    Ok(DiscreteDistribution { atoms })
}

/// Law of the sum of independent draws from `a` and `b`.
pub fn convolve(a: &DiscreteDistribution, b: &DiscreteDistribution) -> DiscreteDistribution {
    let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
    for (sa, ma) in &a.atoms {
        for (sb, mb) in &b.atoms {
            *merged.entry(sa + sb).or_insert_with(Rational::zero) += ma * mb;
        }
    }
    DiscreteDistribution::from_map(merged)
}

/// `k`-fold self-convolution, `k >= 1`.
pub fn convolve_power(d: &DiscreteDistribution, k: usize) -> DiscreteDistribution {
    assert!(k >= 1, "convolution power must be at least 1");
    let mut acc = d.clone();
    for _ in 1..k {
        acc = convolve(&acc, d);
    }
    acc
}

/// The measure `sum_i weights[i] * parts[i]`.
pub fn mixture(
    weights: &[Rational],
    parts: &[DiscreteDistribution],
) -> Result<DiscreteDistribution> {
    if weights.len() != parts.len() {
        return Err(Error::InvalidMixture(format!(
            "{} weights for {} parts",
            weights.len(),
            parts.len()
        )));
    }
    if weights.is_empty() {
        return Err(Error::InvalidMixture("no parts".into()));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
        return Err(Error::InvalidMixture(format!("non-positive weight {w}")));
    }
    let total: Rational = weights.iter().sum();
    if !total.is_one() {
        return Err(Error::InvalidMixture(format!("weights sum to {total}")));
    }
    let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
    for (w, part) in weights.iter().zip(parts) {
        for (s, m) in &part.atoms {
            *merged.entry(s.clone()).or_insert_with(Rational::zero) += w * m;
        }
    }
    Ok(DiscreteDistribution::from_map(merged))
}

/// Equal-weight mixture of `parts`.
pub fn uniform_mixture(parts: &[DiscreteDistribution]) -> Result<DiscreteDistribution> {
    let w = Rational::new(1.into(), parts.len().max(1).into());
    mixture(&vec![w; parts.len()], parts)
}

/// Law of `X / a` for `a > 0`.
pub fn scale(d: &DiscreteDistribution, a: &Rational) -> Result<DiscreteDistribution> {
    if !a.is_positive() {
        return Err(Error::OutOfRange {
            name: "a",
            value: a.to_string(),
            range: "a > 0",
        });
    }
    Ok(DiscreteDistribution {
        atoms: d.atoms.iter().map(|(s, m)| (s / a, m.clone())).collect(),
    })
}

pub fn mean(d: &DiscreteDistribution) -> Rational {
    d.mean()
}

pub fn cdf(d: &DiscreteDistribution, x: &Rational) -> Rational {
    d.cdf(x)
}

pub fn stop_loss(d: &DiscreteDistribution, t: &Rational) -> Rational {
    d.stop_loss(t)
}

pub(crate) fn check_probability(name: &'static str, p: &Rational) -> Result<()> {
    if is_in_unit_interval(p) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: p.to_string(),
            range: "[0, 1]",
        })
    }
}
