//! Sharp partial-identification bounds over the transportation polytope.
//!
//! Two marginals pin down the row and column sums of the joint law of
//! (reference outcome, new outcome) but nothing else. Each bound here is
//! the exact minimum and maximum of a linear functional of the joint —
//! benefit mass, harm mass, tie mass, or the weighted combination
//! `benefit - w * harm` — over every coupling consistent with the
//! marginals, together with witness couplings attaining each endpoint.
//!
//! The solver clears denominators and runs an exact integer
//! transportation simplex. Ties among optimal vertices are broken by
//! folding a lexicographic penalty into the objective: among optima, the
//! returned witness is the coupling whose cell masses, read in
//! (row index, column index) order, are lexicographically smallest. That
//! makes witnesses reproducible across runs and platforms.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::coupling::Coupling;
use crate::error::{Error, Result};
use crate::model::{check_compatible, Marginal};
use crate::rational::Rational;
use crate::transport::{solve_max, TransportInstance};

/// Default support cap for the brute-force oracle.
pub const DEFAULT_ORACLE_LIMIT: usize = 6;

/// The linear functional being bounded, as a reward per (row, col) cell.
/// Row is the reference outcome, column the new outcome; benefit and harm
/// use strict comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairwiseObjective {
    /// P(new > ref)
    Benefit,
    /// P(new < ref)
    Harm,
    /// P(new = ref)
    Tie,
    /// P(new > ref) - w * P(new < ref), w >= 0
    Weighted(Rational),
}

impl PairwiseObjective {
    fn validate(&self) -> Result<()> {
        if let PairwiseObjective::Weighted(w) = self {
            if w.is_negative() {
                return Err(Error::NegativeWeight { weight: w.clone() });
            }
        }
        Ok(())
    }

    fn reward(&self, row_outcome: usize, col_outcome: usize) -> Rational {
        use std::cmp::Ordering::*;
        match (self, col_outcome.cmp(&row_outcome)) {
            (PairwiseObjective::Benefit, Greater) => Rational::one(),
            (PairwiseObjective::Harm, Less) => Rational::one(),
            (PairwiseObjective::Tie, Equal) => Rational::one(),
            (PairwiseObjective::Weighted(_), Greater) => Rational::one(),
            (PairwiseObjective::Weighted(w), Less) => -w,
            _ => Rational::zero(),
        }
    }
}

/// Closed interval of attainable values with witness couplings that
/// attain each endpoint exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalBound {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_witness: Coupling,
    pub hi_witness: Coupling,
}

impl IntervalBound {
    pub fn contains(&self, value: &Rational) -> bool {
        &self.lo <= value && value <= &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

/// Sharp bounds on P(new > ref).
pub fn benefit_bounds(new_marginal: &Marginal, ref_marginal: &Marginal) -> Result<IntervalBound> {
    sharp_bounds(new_marginal, ref_marginal, &PairwiseObjective::Benefit)
}

/// Sharp bounds on P(new < ref).
pub fn harm_bounds(new_marginal: &Marginal, ref_marginal: &Marginal) -> Result<IntervalBound> {
    sharp_bounds(new_marginal, ref_marginal, &PairwiseObjective::Harm)
}

/// Sharp bounds on P(new = ref).
pub fn tie_bounds(new_marginal: &Marginal, ref_marginal: &Marginal) -> Result<IntervalBound> {
    sharp_bounds(new_marginal, ref_marginal, &PairwiseObjective::Tie)
}

/// Sharp bounds on P(benefit) - w * P(harm), solved as one optimization
/// over the polytope rather than interval arithmetic on separate bounds.
pub fn objective_bounds(
    new_marginal: &Marginal,
    ref_marginal: &Marginal,
    weight: &Rational,
) -> Result<IntervalBound> {
    sharp_bounds(
        new_marginal,
        ref_marginal,
        &PairwiseObjective::Weighted(weight.clone()),
    )
}

/// Sharp bounds for any pairwise objective.
pub fn sharp_bounds(
    new_marginal: &Marginal,
    ref_marginal: &Marginal,
    objective: &PairwiseObjective,
) -> Result<IntervalBound> {
    objective.validate()?;
    check_compatible(new_marginal.space(), ref_marginal.space())?;

    // Zero-mass outcomes are dropped so the flow network has no empty
    // rows or columns.
    let rows = ref_marginal.support();
    let cols = new_marginal.support();
    let rewards: Vec<Vec<Rational>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| objective.reward(r, c)).collect())
        .collect();

    let scaled = ScaledInstance::build(ref_marginal, new_marginal, &rows, &cols, &rewards);
    let (hi, hi_witness) = scaled.solve_endpoint(Direction::Max);
    let (lo, lo_witness) = scaled.solve_endpoint(Direction::Min);
    Ok(IntervalBound {
        lo,
        hi,
        lo_witness,
        hi_witness,
    })
}

#[derive(Clone, Copy)]
enum Direction {
    Min,
    Max,
}

/// Integer-cleared data shared by the min and max solves.
struct ScaledInstance<'a> {
    ref_marginal: &'a Marginal,
    rows: &'a [usize],
    cols: &'a [usize],
    rewards: &'a [Vec<Rational>],
    total: BigInt,
    supply: Vec<BigInt>,
    demand: Vec<BigInt>,
    scaled_rewards: Vec<Vec<BigInt>>,
    lex_weight: Vec<Vec<BigInt>>,
    big: BigInt,
}

impl<'a> ScaledInstance<'a> {
    fn build(
        ref_marginal: &'a Marginal,
        new_marginal: &'a Marginal,
        rows: &'a [usize],
        cols: &'a [usize],
        rewards: &'a [Vec<Rational>],
    ) -> Self {
        let mut total = BigInt::one();
        for &r in rows {
            total = total.lcm(ref_marginal.mass(r).denom());
        }
        for &c in cols {
            total = total.lcm(new_marginal.mass(c).denom());
        }
        let scale = |mass: &Rational| mass.numer() * (&total / mass.denom());
        let supply: Vec<BigInt> = rows.iter().map(|&r| scale(ref_marginal.mass(r))).collect();
        let demand: Vec<BigInt> = cols.iter().map(|&c| scale(new_marginal.mass(c))).collect();

        let mut reward_denoms = BigInt::one();
        for row in rewards {
            for r in row {
                reward_denoms = reward_denoms.lcm(r.denom());
            }
        }
        let scaled_rewards: Vec<Vec<BigInt>> = rewards
            .iter()
            .map(|row| {
                row.iter()
                    .map(|r| r.numer() * (&reward_denoms / r.denom()))
                    .collect()
            })
            .collect();

        // Lexicographic penalty: cell masses never exceed `total`, so
        // base-(total + 1) digits order couplings exactly as their cell
        // vectors do, and `big` dominates any penalty difference.
        let cell_count = rows.len() * cols.len();
        let base = &total + BigInt::one();
        let mut powers = Vec::with_capacity(cell_count);
        let mut power = BigInt::one();
        for _ in 0..cell_count {
            powers.push(power.clone());
            power *= &base;
        }
        let big = power;
        let lex_weight: Vec<Vec<BigInt>> = (0..rows.len())
            .map(|i| {
                (0..cols.len())
                    .map(|j| powers[cell_count - 1 - (i * cols.len() + j)].clone())
                    .collect()
            })
            .collect();

        ScaledInstance {
            ref_marginal,
            rows,
            cols,
            rewards,
            total,
            supply,
            demand,
            scaled_rewards,
            lex_weight,
            big,
        }
    }

    fn solve_endpoint(&self, direction: Direction) -> (Rational, Coupling) {
        let cost: Vec<Vec<BigInt>> = (0..self.rows.len())
            .map(|i| {
                (0..self.cols.len())
                    .map(|j| {
                        let signed = match direction {
                            Direction::Max => self.scaled_rewards[i][j].clone(),
                            Direction::Min => -self.scaled_rewards[i][j].clone(),
                        };
                        signed * &self.big - &self.lex_weight[i][j]
                    })
                    .collect()
            })
            .collect();
        let flow = solve_max(&TransportInstance {
            supply: self.supply.clone(),
            demand: self.demand.clone(),
            reward: cost,
        });

        let mut value = Rational::zero();
        let mut cells = BTreeMap::new();
        for (i, flow_row) in flow.iter().enumerate() {
            for (j, amount) in flow_row.iter().enumerate() {
                if amount.is_zero() {
                    continue;
                }
                let mass = Rational::from_big_ints(amount.clone(), self.total.clone());
                value += &(&self.rewards[i][j] * &mass);
                cells.insert((self.rows[i], self.cols[j]), mass);
            }
        }
        let witness =
            Coupling::from_validated_parts(Arc::clone(self.ref_marginal.space()), cells);
        (value, witness)
    }
}

/// Affine function of the free stratum mass p1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineInP1 {
    pub intercept: Rational,
    pub slope: Rational,
}

impl AffineInP1 {
    fn zero() -> Self {
        AffineInP1 {
            intercept: Rational::zero(),
            slope: Rational::zero(),
        }
    }

    fn add(&mut self, other: &AffineInP1) {
        self.intercept += &other.intercept;
        self.slope += &other.slope;
    }

    pub fn eval(&self, p1: &Rational) -> Rational {
        &self.intercept + &(&self.slope * p1)
    }

    /// (min, max) over a closed p1 interval.
    pub fn extremes(&self, lo: &Rational, hi: &Rational) -> (Rational, Rational) {
        let at_lo = self.eval(lo);
        let at_hi = self.eval(hi);
        if at_lo <= at_hi {
            (at_lo, at_hi)
        } else {
            (at_hi, at_lo)
        }
    }
}

/// Closed-form principal-strata family for a pair of two-point marginals.
///
/// With reference support {r_lo < r_hi} and new support {n_lo < n_hi},
/// the joint law has four cells p1 = P(r_lo, n_lo), p2 = P(r_lo, n_hi),
/// p3 = P(r_hi, n_lo), p4 = P(r_hi, n_hi). The marginals fix all four as
/// affine functions of the single free mass p1, and benefit, harm, and
/// tie are affine in p1 as well.
#[derive(Debug, Clone)]
pub struct TwoPointStrata {
    ref_marginal: Marginal,
    new_marginal: Marginal,
    ref_support: [usize; 2],
    new_support: [usize; 2],
    pub p1_lo: Rational,
    pub p1_hi: Rational,
    strata: [AffineInP1; 4],
    pub benefit: AffineInP1,
    pub harm: AffineInP1,
    pub tie: AffineInP1,
}

/// Build the strata family. Both marginals must have exactly two support
/// points.
pub fn two_point_strata(
    new_marginal: &Marginal,
    ref_marginal: &Marginal,
) -> Result<TwoPointStrata> {
    check_compatible(new_marginal.space(), ref_marginal.space())?;
    let ref_support = ref_marginal.support();
    let new_support = new_marginal.support();
    if ref_support.len() != 2 {
        return Err(Error::NotTwoPoint {
            side: "reference",
            points: ref_support.len(),
        });
    }
    if new_support.len() != 2 {
        return Err(Error::NotTwoPoint {
            side: "new",
            points: new_support.len(),
        });
    }
    let ref_support = [ref_support[0], ref_support[1]];
    let new_support = [new_support[0], new_support[1]];
    let ref_lo_mass = ref_marginal.mass(ref_support[0]).clone();
    let new_lo_mass = new_marginal.mass(new_support[0]).clone();

    // p2 = ref_lo - p1, p3 = new_lo - p1, p4 = 1 - ref_lo - new_lo + p1;
    // nonnegativity of all four gives the p1 interval.
    let strata = [
        AffineInP1 {
            intercept: Rational::zero(),
            slope: Rational::one(),
        },
        AffineInP1 {
            intercept: ref_lo_mass.clone(),
            slope: -Rational::one(),
        },
        AffineInP1 {
            intercept: new_lo_mass.clone(),
            slope: -Rational::one(),
        },
        AffineInP1 {
            intercept: Rational::one() - &ref_lo_mass - &new_lo_mass,
            slope: Rational::one(),
        },
    ];
    let p1_lo = Rational::zero().max(&ref_lo_mass + &new_lo_mass - Rational::one());
    let p1_hi = ref_lo_mass.min(new_lo_mass);

    let mut benefit = AffineInP1::zero();
    let mut harm = AffineInP1::zero();
    let mut tie = AffineInP1::zero();
    for (k, stratum) in strata.iter().enumerate() {
        let row = ref_support[k / 2];
        let col = new_support[k % 2];
        match col.cmp(&row) {
            std::cmp::Ordering::Greater => benefit.add(stratum),
            std::cmp::Ordering::Less => harm.add(stratum),
            std::cmp::Ordering::Equal => tie.add(stratum),
        }
    }

    Ok(TwoPointStrata {
        ref_marginal: ref_marginal.clone(),
        new_marginal: new_marginal.clone(),
        ref_support,
        new_support,
        p1_lo,
        p1_hi,
        strata,
        benefit,
        harm,
        tie,
    })
}

impl TwoPointStrata {
    /// The stratum masses p1..p4 as affine functions of p1 (1-based).
    pub fn stratum(&self, index: usize) -> &AffineInP1 {
        &self.strata[index - 1]
    }

    pub fn p1_range(&self) -> (&Rational, &Rational) {
        (&self.p1_lo, &self.p1_hi)
    }

    /// Materialize the coupling at a specific p1.
    pub fn coupling_at(&self, p1: &Rational) -> Result<Coupling> {
        if p1 < &self.p1_lo || p1 > &self.p1_hi {
            return Err(Error::StratumOutOfRange {
                p1: p1.clone(),
                lo: self.p1_lo.clone(),
                hi: self.p1_hi.clone(),
            });
        }
        let space = self.ref_marginal.space();
        let cells: Vec<((String, String), Rational)> = self
            .strata
            .iter()
            .enumerate()
            .map(|(k, stratum)| {
                let row = self.ref_support[k / 2];
                let col = self.new_support[k % 2];
                (
                    (space.id(row).to_string(), space.id(col).to_string()),
                    stratum.eval(p1),
                )
            })
            .filter(|(_, mass)| mass.is_positive())
            .collect();
        Coupling::new(&self.ref_marginal, &self.new_marginal, cells)
    }

    pub fn benefit_extremes(&self) -> (Rational, Rational) {
        self.benefit.extremes(&self.p1_lo, &self.p1_hi)
    }

    pub fn harm_extremes(&self) -> (Rational, Rational) {
        self.harm.extremes(&self.p1_lo, &self.p1_hi)
    }
}

/// Brute-force oracle: exact min/max of the objective by enumerating the
/// vertices of the transportation polytope through recursive support
/// reduction (generalized northwest-corner runs: saturate any active
/// cell, cross out the exhausted line, recurse). Completely independent
/// of the simplex path; intended for tests.
pub fn oracle_bounds(
    new_marginal: &Marginal,
    ref_marginal: &Marginal,
    objective: &PairwiseObjective,
) -> Result<IntervalBound> {
    oracle_bounds_with_limit(new_marginal, ref_marginal, objective, DEFAULT_ORACLE_LIMIT)
}

pub fn oracle_bounds_with_limit(
    new_marginal: &Marginal,
    ref_marginal: &Marginal,
    objective: &PairwiseObjective,
    limit: usize,
) -> Result<IntervalBound> {
    objective.validate()?;
    check_compatible(new_marginal.space(), ref_marginal.space())?;
    let rows = ref_marginal.support();
    let cols = new_marginal.support();
    if rows.len() > limit || cols.len() > limit {
        return Err(Error::TooLarge { limit });
    }
    let rewards: Vec<Vec<Rational>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| objective.reward(r, c)).collect())
        .collect();

    let supplies: Vec<Rational> = rows.iter().map(|&r| ref_marginal.mass(r).clone()).collect();
    let demands: Vec<Rational> = cols.iter().map(|&c| new_marginal.mass(c).clone()).collect();

    let mut memo: HashMap<OracleState, OracleRec> = HashMap::new();
    let root = OracleState {
        supplies,
        demands,
    };
    explore(&root, &rewards, &mut memo);

    let space = Arc::clone(ref_marginal.space());
    let lo_witness = Coupling::from_validated_parts(
        Arc::clone(&space),
        replay(&root, &rewards, &memo, Endpoint::Lo, &rows, &cols),
    );
    let hi_witness = Coupling::from_validated_parts(
        space,
        replay(&root, &rewards, &memo, Endpoint::Hi, &rows, &cols),
    );
    let rec = memo.get(&root).expect("root explored");
    Ok(IntervalBound {
        lo: rec.lo.clone(),
        hi: rec.hi.clone(),
        lo_witness,
        hi_witness,
    })
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct OracleState {
    supplies: Vec<Rational>,
    demands: Vec<Rational>,
}

impl OracleState {
    fn is_terminal(&self) -> bool {
        self.supplies.iter().all(Rational::is_zero)
    }

    fn saturate(&self, i: usize, j: usize) -> (Rational, OracleState) {
        let amount = self.supplies[i].clone().min(self.demands[j].clone());
        let mut next = self.clone();
        next.supplies[i] = &next.supplies[i] - &amount;
        next.demands[j] = &next.demands[j] - &amount;
        (amount, next)
    }
}

#[derive(Clone)]
struct OracleRec {
    lo: Rational,
    hi: Rational,
    lo_move: Option<(usize, usize)>,
    hi_move: Option<(usize, usize)>,
}

fn explore(
    state: &OracleState,
    rewards: &[Vec<Rational>],
    memo: &mut HashMap<OracleState, OracleRec>,
) -> OracleRec {
    if let Some(rec) = memo.get(state) {
        return rec.clone();
    }
    if state.is_terminal() {
        let rec = OracleRec {
            lo: Rational::zero(),
            hi: Rational::zero(),
            lo_move: None,
            hi_move: None,
        };
        memo.insert(state.clone(), rec.clone());
        return rec;
    }
    let mut best: Option<OracleRec> = None;
    for i in 0..state.supplies.len() {
        if state.supplies[i].is_zero() {
            continue;
        }
        for j in 0..state.demands.len() {
            if state.demands[j].is_zero() {
                continue;
            }
            let (amount, next) = state.saturate(i, j);
            let sub = explore(&next, rewards, memo);
            let gain = &rewards[i][j] * &amount;
            let cand_lo = &gain + &sub.lo;
            let cand_hi = &gain + &sub.hi;
            match &mut best {
                None => {
                    best = Some(OracleRec {
                        lo: cand_lo,
                        hi: cand_hi,
                        lo_move: Some((i, j)),
                        hi_move: Some((i, j)),
                    })
                }
                Some(rec) => {
                    if cand_lo < rec.lo {
                        rec.lo = cand_lo;
                        rec.lo_move = Some((i, j));
                    }
                    if cand_hi > rec.hi {
                        rec.hi = cand_hi;
                        rec.hi_move = Some((i, j));
                    }
                }
            }
        }
    }
    let rec = best.expect("non-terminal state has an active cell");
    memo.insert(state.clone(), rec.clone());
    rec
}

enum Endpoint {
    Lo,
    Hi,
}

fn replay(
    root: &OracleState,
    rewards: &[Vec<Rational>],
    memo: &HashMap<OracleState, OracleRec>,
    endpoint: Endpoint,
    rows: &[usize],
    cols: &[usize],
) -> BTreeMap<(usize, usize), Rational> {
    let mut cells = BTreeMap::new();
    let mut state = root.clone();
    let mut value = Rational::zero();
    loop {
        let rec = memo.get(&state).expect("state explored");
        let step = match endpoint {
            Endpoint::Lo => rec.lo_move,
            Endpoint::Hi => rec.hi_move,
        };
        let Some((i, j)) = step else { break };
        let (amount, next) = state.saturate(i, j);
        value += &(&rewards[i][j] * &amount);
        cells.insert((rows[i], cols[j]), amount);
        state = next;
    }
    debug_assert_eq!(
        &value,
        match endpoint {
            Endpoint::Lo => &memo.get(root).unwrap().lo,
            Endpoint::Hi => &memo.get(root).unwrap().hi,
        }
    );
    cells
}
