//! Deterministic parallel verification over parameter grids.
//!
//! Grid points are `(n, m, x)` with `x` a nondecreasing m-tuple drawn from
//! the rationals in `[0, 1]` with denominator at most `denom`. Points are
//! evaluated on a worker pool and reported in lexicographic order of
//! `(n, m, x)` regardless of scheduling.

use std::ops::RangeInclusive;
use std::time::Instant;

use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rasa::{
    generalized_pair, test_family, verify_generalized, BernsteinForm, ConvexTestFunction,
    FamilySelection,
};
use crate::rational::{format_rational, serde_str, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub n: RangeInclusive<usize>,
    pub m: RangeInclusive<usize>,
    pub denom: usize,
    pub family: FamilySelection,
    pub seed: u64,
    pub jobs: usize,
    /// Record per-point wall time. Off by default so that reports are
    /// byte-identical across runs.
    pub timing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: 1..=6,
            m: 2..=2,
            denom: 10,
            family: FamilySelection::default(),
            seed: 0,
            jobs: 1,
            timing: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || *self.n.start() == 0 {
            return Err(Error::Precondition(format!(
                "n range {}..{} must be nonempty and start at 1 or more",
                self.n.start(),
                self.n.end()
            )));
        }
        if self.m.is_empty() || *self.m.start() < 2 {
            return Err(Error::Precondition(format!(
                "m range {}..{} must be nonempty and start at 2 or more",
                self.m.start(),
                self.m.end()
            )));
        }
        if self.denom < 2 {
            return Err(Error::Precondition(format!(
                "denominator bound {} is below 2",
                self.denom
            )));
        }
        if self.jobs == 0 {
            return Err(Error::Precondition("jobs must be at least 1".into()));
        }
        Ok(())
    }
}

/// All rationals in `[0, 1]` with denominator at most `denom`, ascending.
pub fn unit_grid(denom: usize) -> Vec<Rational> {
    let mut pts: Vec<Rational> = (1..=denom)
        .flat_map(|q| (0..=q).map(move |p| Rational::new(p.into(), q.into())))
        .collect();
    pts.sort();
    pts.dedup();
    pts
}

/// Nondecreasing `m`-tuples over `points` (given ascending), in
/// lexicographic order.
pub fn sorted_tuples(points: &[Rational], m: usize) -> Vec<Vec<Rational>> {
    fn extend(
        points: &[Rational],
        start: usize,
        left: usize,
        cur: &mut Vec<Rational>,
        out: &mut Vec<Vec<Rational>>,
    ) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..points.len() {
            cur.push(points[i].clone());
            extend(points, i, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    extend(points, 0, m, &mut Vec::with_capacity(m), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridRow {
    pub n: usize,
    pub m: usize,
    #[serde(with = "serde_str::vec")]
    pub x: Vec<Rational>,
    /// Sum of independent binomials `<=_cx B(mn, xbar)`.
    pub verdict_a: bool,
    /// `B(mn, xbar) <=_cx` mixture of m-fold sums.
    pub verdict_b: bool,
    /// Sum `<=_cx` mixture.
    pub verdict_c: bool,
    /// Minimum of the Bernstein form over the test-function family.
    #[serde(with = "serde_str")]
    pub min_form: Rational,
    /// Form value equals `m (E_rhs f - E_lhs f)` for every family member.
    pub bridge: bool,
    pub wall_time_us: Option<u64>,
}

impl GridRow {
    pub fn passed(&self) -> bool {
        self.verdict_a
            && self.verdict_b
            && self.verdict_c
            && !self.min_form.is_negative()
            && self.bridge
    }
}

/// Family for one `(n, m)` cell, seeded from the run seed and the cell so
/// that cells are independent of evaluation order.
pub fn cell_family(config: &SweepConfig, n: usize, m: usize) -> Vec<ConvexTestFunction> {
    let cell_seed = config.seed ^ ((n as u64) << 32) ^ ((m as u64) << 48);
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed);
    test_family(m * n, &config.family, &mut rng)
}

/// Checks one grid point against a precomputed family (and its values at
/// the nodes `k / (mn)`).
pub fn evaluate_point(
    n: usize,
    x: &[Rational],
    family: &[ConvexTestFunction],
    node_values: &[Vec<Rational>],
    timing: bool,
) -> Result<GridRow> {
    let started = Instant::now();
    let verdicts = verify_generalized(n, x)?;
    let form = BernsteinForm::new(n, x)?;
    let pair = generalized_pair(n, x)?;
    let mut min_form: Option<Rational> = None;
    let mut bridge = true;
    for (f, values) in family.iter().zip(node_values) {
        let value = form.value_on_nodes(values);
        bridge &= value == pair.expectation_gap(f);
        if min_form.as_ref().is_none_or(|cur| &value < cur) {
            min_form = Some(value);
        }
    }
    Ok(GridRow {
        n,
        m: x.len(),
        x: x.to_vec(),
        verdict_a: verdicts.sum_vs_binomial.holds,
        verdict_b: verdicts.binomial_vs_mixture.holds,
        verdict_c: verdicts.sum_vs_mixture.holds,
        min_form: min_form.unwrap_or_else(Rational::zero),
        bridge,
        wall_time_us: timing.then(|| started.elapsed().as_micros() as u64),
    })
}

pub fn run_sweep(config: &SweepConfig) -> Result<Vec<GridRow>> {
    config.validate()?;
    let points = unit_grid(config.denom);
    let mut work = Vec::new();
    for n in config.n.clone() {
        for m in config.m.clone() {
            let family = cell_family(config, n, m);
            let nodes: Vec<Rational> = (0..=m * n)
                .map(|k| Rational::new(k.into(), (m * n).into()))
                .collect();
            let node_values: Vec<Vec<Rational>> = family
                .iter()
                .map(|f| nodes.iter().map(|t| f.eval(t)).collect())
                .collect();
            let cell = std::sync::Arc::new((family, node_values));
            for x in sorted_tuples(&points, m) {
                work.push((n, x, cell.clone()));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    pool.install(|| {
        work.par_iter()
            .map(|(n, x, cell)| evaluate_point(*n, x, &cell.0, &cell.1, config.timing))
            .collect()
    })
}

pub const CSV_HEADER: [&str; 9] = [
    "n",
    "m",
    "x",
    "verdict_a",
    "verdict_b",
    "verdict_c",
    "min_form",
    "bridge",
    "wall_time_us",
];

pub fn rows_to_csv(rows: &[GridRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        let x =
            r.x.iter()
                .map(format_rational)
                .collect::<Vec<_>>()
                .join(";");
        w.write_record([
            r.n.to_string(),
            r.m.to_string(),
            x,
            r.verdict_a.to_string(),
            r.verdict_b.to_string(),
            r.verdict_c.to_string(),
            format_rational(&r.min_form),
            r.bridge.to_string(),
            r.wall_time_us.map(|t| t.to_string()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
