//! Explicit joint counterfactual laws and the trial simulator.
//!
//! A [`Coupling`] is a joint distribution of two potential outcomes whose
//! projections match given marginals; a [`MultiwayJoint`] extends this to
//! any number of treatments. Neither object is ever identified by data —
//! they are hypothetical overlays used to probe what the identified
//! marginals leave open. The seeded [`Population`] sampler and
//! [`simulate_rct`] turn a joint law into a finite brute-force oracle.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::bounds::{benefit_bounds, harm_bounds, tie_bounds, IntervalBound};
use crate::error::{Error, Result};
use crate::model::{check_compatible, Marginal, OutcomeSpace, TreatmentId};
use crate::rational::Rational;
use crate::rng::stream_value;

/// Joint distribution over (reference outcome, new outcome) pairs with
/// fixed marginals. Rows are the reference treatment, columns the new one.
/// Only cells with positive mass are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coupling {
    space: Arc<OutcomeSpace>,
    cells: BTreeMap<(usize, usize), Rational>,
}

/// Exact benefit / harm / tie masses of one coupling. Always sums to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingStats {
    pub benefit: Rational,
    pub harm: Rational,
    pub tie: Rational,
}

impl Coupling {
    /// Validate explicit cells against the two marginals.
    pub fn new<I, S>(ref_marginal: &Marginal, new_marginal: &Marginal, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((S, S), Rational)>,
        S: AsRef<str>,
    {
        check_compatible(ref_marginal.space(), new_marginal.space())?;
        let space = ref_marginal.space();
        let mut indexed: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for ((row_id, col_id), mass) in cells {
            let row = space.index_of(row_id.as_ref()).ok_or_else(|| Error::UnknownOutcome {
                outcome: row_id.as_ref().to_string(),
            })?;
            let col = space.index_of(col_id.as_ref()).ok_or_else(|| Error::UnknownOutcome {
                outcome: col_id.as_ref().to_string(),
            })?;
            if mass.is_negative() {
                return Err(Error::NegativeMass {
                    outcome: format!("({}, {})", row_id.as_ref(), col_id.as_ref()),
                    mass,
                });
            }
            if indexed.insert((row, col), mass).is_some() {
                return Err(Error::DuplicateOutcome {
                    outcome: format!("({}, {})", row_id.as_ref(), col_id.as_ref()),
                });
            }
        }
        indexed.retain(|_, mass| mass.is_positive());

        let total: Rational = indexed.values().sum();
        if total != Rational::one() {
            return Err(Error::MassNotOne { total });
        }
        for axis in 0..2 {
            let (label, marginal) = if axis == 0 {
                ("row (reference)", ref_marginal)
            } else {
                ("column (new)", new_marginal)
            };
            let mut sums = vec![Rational::zero(); space.len()];
            for (&(row, col), mass) in &indexed {
                let idx = if axis == 0 { row } else { col };
                sums[idx] += mass;
            }
            for (idx, actual) in sums.into_iter().enumerate() {
                if &actual != marginal.mass(idx) {
                    return Err(Error::MarginalMismatch {
                        axis: label.to_string(),
                        outcome: space.id(idx).to_string(),
                        actual,
                        expected: marginal.mass(idx).clone(),
                    });
                }
            }
        }
        Ok(Coupling {
            space: Arc::clone(space),
            cells: indexed,
        })
    }

    /// Cells already known to form a valid coupling (solver output,
    /// joint projections). Zero cells are dropped for canonical form.
    pub(crate) fn from_validated_parts(
        space: Arc<OutcomeSpace>,
        cells: BTreeMap<(usize, usize), Rational>,
    ) -> Self {
        let mut cells = cells;
        cells.retain(|_, mass| mass.is_positive());
        debug_assert_eq!(cells.values().sum::<Rational>(), Rational::one());
        Coupling { space, cells }
    }

    /// Quantile coupling: cumulative masses matched in the same outcome
    /// order, the extreme of positive rank correlation.
    pub fn comonotone(ref_marginal: &Marginal, new_marginal: &Marginal) -> Result<Self> {
        Self::greedy_match(ref_marginal, new_marginal, false)
    }

    /// Reference quantiles matched against new quantiles in reverse
    /// order, the extreme of negative rank correlation.
    pub fn antimonotone(ref_marginal: &Marginal, new_marginal: &Marginal) -> Result<Self> {
        Self::greedy_match(ref_marginal, new_marginal, true)
    }

    fn greedy_match(
        ref_marginal: &Marginal,
        new_marginal: &Marginal,
        reverse_new: bool,
    ) -> Result<Self> {
        check_compatible(ref_marginal.space(), new_marginal.space())?;
        let rows = ref_marginal.support();
        let mut cols = new_marginal.support();
        if reverse_new {
            cols.reverse();
        }
        // Two-pointer greedy: allocate min of the two open quantile
        // blocks; the exhausted side advances. Support masses are
        // positive, so every allocation is positive and each (row, col)
        // pair occurs at most once.
        let mut cells = BTreeMap::new();
        let mut row_left = ref_marginal.mass(rows[0]).clone();
        let mut col_left = new_marginal.mass(cols[0]).clone();
        let (mut r, mut c) = (0usize, 0usize);
        loop {
            let amount = row_left.clone().min(col_left.clone());
            cells.insert((rows[r], cols[c]), amount.clone());
            row_left = row_left - &amount;
            col_left = col_left - &amount;
            if row_left.is_zero() && r + 1 < rows.len() {
                r += 1;
                row_left = ref_marginal.mass(rows[r]).clone();
            }
            if col_left.is_zero() && c + 1 < cols.len() {
                c += 1;
                col_left = new_marginal.mass(cols[c]).clone();
            }
            if row_left.is_zero() && col_left.is_zero() {
                break;
            }
        }
        Ok(Coupling {
            space: Arc::clone(ref_marginal.space()),
            cells,
        })
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    /// Positive cells as ((row outcome id, col outcome id), mass).
    pub fn cells(&self) -> impl Iterator<Item = ((&str, &str), &Rational)> {
        self.cells
            .iter()
            .map(|(&(row, col), mass)| ((self.space.id(row), self.space.id(col)), mass))
    }

    pub fn cell_indices(&self) -> impl Iterator<Item = ((usize, usize), &Rational)> {
        self.cells.iter().map(|(&k, v)| (k, v))
    }

    pub fn mass_at(&self, row_id: &str, col_id: &str) -> Rational {
        let Some(row) = self.space.index_of(row_id) else {
            return Rational::zero();
        };
        let Some(col) = self.space.index_of(col_id) else {
            return Rational::zero();
        };
        self.cells.get(&(row, col)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn row_marginal(&self) -> Marginal {
        self.axis_marginal(0)
    }

    pub fn col_marginal(&self) -> Marginal {
        self.axis_marginal(1)
    }

    fn axis_marginal(&self, axis: usize) -> Marginal {
        let mut mass = vec![Rational::zero(); self.space.len()];
        for (&(row, col), value) in &self.cells {
            mass[if axis == 0 { row } else { col }] += value;
        }
        Marginal::from_validated(Arc::clone(&self.space), mass)
    }

    /// Exact benefit (column strictly better), harm (column strictly
    /// worse), and tie masses.
    pub fn stats(&self) -> CouplingStats {
        let mut stats = CouplingStats {
            benefit: Rational::zero(),
            harm: Rational::zero(),
            tie: Rational::zero(),
        };
        for (&(row, col), mass) in &self.cells {
            match col.cmp(&row) {
                std::cmp::Ordering::Greater => stats.benefit += mass,
                std::cmp::Ordering::Less => stats.harm += mass,
                std::cmp::Ordering::Equal => stats.tie += mass,
            }
        }
        stats
    }
}

impl CouplingStats {
    pub fn total(&self) -> Rational {
        &(&self.benefit + &self.harm) + &self.tie
    }
}

/// Joint law over one potential outcome per treatment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiwayJoint {
    space: Arc<OutcomeSpace>,
    treatments: Vec<TreatmentId>,
    marginals: Vec<Marginal>,
    cells: BTreeMap<Vec<usize>, Rational>,
}

impl MultiwayJoint {
    /// Validate explicit cells against every per-treatment marginal of
    /// the scenario.
    pub fn new<I, S>(
        scenario: &crate::model::Scenario,
        treatments: Vec<TreatmentId>,
        cells: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<S>, Rational)>,
        S: AsRef<str>,
    {
        let mut marginals = Vec::with_capacity(treatments.len());
        for (pos, id) in treatments.iter().enumerate() {
            if treatments[..pos].contains(id) {
                return Err(Error::DuplicateTreatment { treatment: id.clone() });
            }
            marginals.push(scenario.marginal(id)?.clone());
        }
        let space = Arc::clone(&scenario.space);
        for marginal in &marginals {
            check_compatible(marginal.space(), &space)?;
        }

        let mut indexed: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        for (tuple, mass) in cells {
            if tuple.len() != treatments.len() {
                return Err(Error::TupleLengthMismatch {
                    actual: tuple.len(),
                    expected: treatments.len(),
                });
            }
            let mut indices = Vec::with_capacity(tuple.len());
            for id in &tuple {
                indices.push(space.index_of(id.as_ref()).ok_or_else(|| Error::UnknownOutcome {
                    outcome: id.as_ref().to_string(),
                })?);
            }
            let rendered = || {
                let ids: Vec<&str> = tuple.iter().map(AsRef::as_ref).collect();
                format!("({})", ids.join(", "))
            };
            if mass.is_negative() {
                return Err(Error::NegativeMass {
                    outcome: rendered(),
                    mass,
                });
            }
            if indexed.insert(indices, mass).is_some() {
                return Err(Error::DuplicateOutcome { outcome: rendered() });
            }
        }
        indexed.retain(|_, mass| mass.is_positive());

        let total: Rational = indexed.values().sum();
        if total != Rational::one() {
            return Err(Error::MassNotOne { total });
        }
        for (pos, (id, marginal)) in treatments.iter().zip(&marginals).enumerate() {
            let mut sums = vec![Rational::zero(); space.len()];
            for (tuple, mass) in &indexed {
                sums[tuple[pos]] += mass;
            }
            for (idx, actual) in sums.into_iter().enumerate() {
                if &actual != marginal.mass(idx) {
                    return Err(Error::MarginalMismatch {
                        axis: id.clone(),
                        outcome: space.id(idx).to_string(),
                        actual,
                        expected: marginal.mass(idx).clone(),
                    });
                }
            }
        }
        Ok(MultiwayJoint {
            space,
            treatments,
            marginals,
            cells: indexed,
        })
    }

    /// Independent product of the scenario marginals for the given
    /// treatments; useful as a baseline joint law.
    pub fn product(
        scenario: &crate::model::Scenario,
        treatments: Vec<TreatmentId>,
    ) -> Result<Self> {
        let mut marginals = Vec::new();
        for id in &treatments {
            marginals.push(scenario.marginal(id)?.clone());
        }
        let mut cells: Vec<(Vec<usize>, Rational)> = vec![(Vec::new(), Rational::one())];
        for marginal in &marginals {
            let mut next = Vec::new();
            for (prefix, mass) in &cells {
                for idx in marginal.support() {
                    let mut tuple = prefix.clone();
                    tuple.push(idx);
                    next.push((tuple, mass * marginal.mass(idx)));
                }
            }
            cells = next;
        }
        let space = Arc::clone(&scenario.space);
        let cells_by_id: Vec<(Vec<String>, Rational)> = cells
            .into_iter()
            .map(|(tuple, mass)| {
                (
                    tuple.iter().map(|&i| space.id(i).to_string()).collect(),
                    mass,
                )
            })
            .collect();
        Self::new(scenario, treatments, cells_by_id)
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn treatments(&self) -> &[TreatmentId] {
        &self.treatments
    }

    pub fn cells(&self) -> impl Iterator<Item = (Vec<&str>, &Rational)> {
        self.cells
            .iter()
            .map(|(tuple, mass)| (tuple.iter().map(|&i| self.space.id(i)).collect(), mass))
    }

    fn position(&self, treatment: &str) -> Result<usize> {
        self.treatments
            .iter()
            .position(|t| t == treatment)
            .ok_or_else(|| Error::UnknownTreatment {
                treatment: treatment.to_string(),
            })
    }

    /// One-dimensional projection; equals the scenario marginal by
    /// construction.
    pub fn projection(&self, treatment: &str) -> Result<Marginal> {
        let pos = self.position(treatment)?;
        Ok(self.marginals[pos].clone())
    }

    /// Marginalize onto (reference, new); the result is a valid coupling
    /// of the corresponding projections.
    pub fn pairwise_coupling(&self, ref_treatment: &str, new_treatment: &str) -> Result<Coupling> {
        if ref_treatment == new_treatment {
            return Err(Error::IdenticalTreatments {
                treatment: ref_treatment.to_string(),
            });
        }
        let ref_pos = self.position(ref_treatment)?;
        let new_pos = self.position(new_treatment)?;
        let mut cells: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for (tuple, mass) in &self.cells {
            *cells
                .entry((tuple[ref_pos], tuple[new_pos]))
                .or_insert_with(Rational::zero) += mass;
        }
        Ok(Coupling::from_validated_parts(Arc::clone(&self.space), cells))
    }

    /// Check that the pairwise stats of this joint lie inside the sharp
    /// intervals computed from its own projections. Mathematically this
    /// always holds for a valid joint; the report makes the containment
    /// explicit, endpoint attainment included.
    pub fn verify_bounds_contain(
        &self,
        new_treatment: &str,
        ref_treatment: &str,
    ) -> Result<ContainmentReport> {
        let ref_marginal = self.projection(ref_treatment)?;
        let new_marginal = self.projection(new_treatment)?;
        let coupling = self.pairwise_coupling(ref_treatment, new_treatment)?;
        let stats = coupling.stats();
        let benefit = benefit_bounds(&new_marginal, &ref_marginal)?;
        let harm = harm_bounds(&new_marginal, &ref_marginal)?;
        let tie = tie_bounds(&new_marginal, &ref_marginal)?;
        let benefit_ok = benefit.contains(&stats.benefit);
        let harm_ok = harm.contains(&stats.harm);
        let tie_ok = tie.contains(&stats.tie);
        Ok(ContainmentReport {
            new_treatment: new_treatment.to_string(),
            ref_treatment: ref_treatment.to_string(),
            stats,
            benefit,
            harm,
            tie,
            benefit_ok,
            harm_ok,
            tie_ok,
        })
    }
}

/// Result of [`MultiwayJoint::verify_bounds_contain`].
#[derive(Debug, Clone)]
pub struct ContainmentReport {
    pub new_treatment: TreatmentId,
    pub ref_treatment: TreatmentId,
    pub stats: CouplingStats,
    pub benefit: IntervalBound,
    pub harm: IntervalBound,
    pub tie: IntervalBound,
    pub benefit_ok: bool,
    pub harm_ok: bool,
    pub tie_ok: bool,
}

impl ContainmentReport {
    pub fn contained(&self) -> bool {
        self.benefit_ok && self.harm_ok && self.tie_ok
    }
}

/// A finite population of individuals with one potential outcome per
/// treatment, drawn i.i.d. from a joint law with a seeded generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    space: Arc<OutcomeSpace>,
    treatments: Vec<TreatmentId>,
    individuals: Vec<Vec<usize>>,
    seed: u64,
}

/// Draw `n` individuals by inverse-CDF sampling over the joint's cells.
/// Individual `i` consumes exactly output `i` of the SplitMix64 stream,
/// so parallel and serial sampling agree bit for bit.
pub fn sample_population(joint: &MultiwayJoint, n: usize, seed: u64) -> Result<Population> {
    if n == 0 {
        return Err(Error::EmptyPopulation);
    }
    // Exact 64-bit thresholds: cell k covers draws in
    // [floor(cum_{k-1} * 2^64), floor(cum_k * 2^64)).
    let two64 = BigInt::from(1u8) << 64;
    let mut thresholds: Vec<(u128, &Vec<usize>)> = Vec::with_capacity(joint.cells.len());
    let mut cumulative = Rational::zero();
    for (tuple, mass) in &joint.cells {
        cumulative += mass;
        let scaled = (cumulative.numer() * &two64) / cumulative.denom();
        thresholds.push((scaled.to_u128().expect("cumulative <= 1"), tuple));
    }

    let individuals = (0..n)
        .map(|i| {
            let draw = stream_value(seed, i as u64) as u128;
            let tuple = thresholds
                .iter()
                .find(|(bound, _)| draw < *bound)
                .map(|(_, tuple)| *tuple)
                .unwrap_or(thresholds.last().expect("joint has cells").1);
            tuple.clone()
        })
        .collect();

    Ok(Population {
        space: Arc::clone(&joint.space),
        treatments: joint.treatments.clone(),
        individuals,
        seed,
    })
}

impl Population {
    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn treatments(&self) -> &[TreatmentId] {
        &self.treatments
    }

    pub fn individual(&self, index: usize) -> Vec<&str> {
        self.individuals[index]
            .iter()
            .map(|&i| self.space.id(i))
            .collect()
    }

    fn position(&self, treatment: &str) -> Result<usize> {
        self.treatments
            .iter()
            .position(|t| t == treatment)
            .ok_or_else(|| Error::UnknownTreatment {
                treatment: treatment.to_string(),
            })
    }

    /// Exact population fractions of benefit / harm / tie for the pair,
    /// counting individuals directly.
    pub fn empirical_stats(&self, ref_treatment: &str, new_treatment: &str) -> Result<CouplingStats> {
        let ref_pos = self.position(ref_treatment)?;
        let new_pos = self.position(new_treatment)?;
        let (mut benefit, mut harm, mut tie) = (0u64, 0u64, 0u64);
        for tuple in &self.individuals {
            match tuple[new_pos].cmp(&tuple[ref_pos]) {
                std::cmp::Ordering::Greater => benefit += 1,
                std::cmp::Ordering::Less => harm += 1,
                std::cmp::Ordering::Equal => tie += 1,
            }
        }
        let n = self.individuals.len() as i64;
        let frac = |count: u64| Rational::new(count as i64, n);
        Ok(CouplingStats {
            benefit: frac(benefit),
            harm: frac(harm),
            tie: frac(tie),
        })
    }
}

/// One arm of a simulated two-arm trial. `empirical` is absent when the
/// coin left the arm empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialArm {
    pub treatment: TreatmentId,
    pub size: usize,
    pub empirical: Option<Marginal>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialSummary {
    pub arms: [TrialArm; 2],
    pub seed: u64,
}

/// Assign each individual to one of two arms by an independent seeded
/// fair coin (top bit of stream output `i`), observe the potential
/// outcome of the assigned arm, and report empirical marginals as exact
/// count fractions.
pub fn simulate_rct(
    population: &Population,
    arm_a: &str,
    arm_b: &str,
    seed: u64,
) -> Result<TrialSummary> {
    if arm_a == arm_b {
        return Err(Error::IdenticalTreatments {
            treatment: arm_a.to_string(),
        });
    }
    let pos_a = population.position(arm_a)?;
    let pos_b = population.position(arm_b)?;

    let space_len = population.space.len();
    let mut counts = [vec![0u64; space_len], vec![0u64; space_len]];
    let mut sizes = [0usize; 2];
    for (i, tuple) in population.individuals.iter().enumerate() {
        let coin = stream_value(seed, i as u64) >> 63;
        let (arm, pos) = if coin == 1 { (0, pos_a) } else { (1, pos_b) };
        counts[arm][tuple[pos]] += 1;
        sizes[arm] += 1;
    }

    let build_arm = |arm: usize, treatment: &str| {
        let empirical = (sizes[arm] > 0).then(|| {
            let mass = counts[arm]
                .iter()
                .map(|&c| Rational::new(c as i64, sizes[arm] as i64))
                .collect();
            Marginal::from_validated(Arc::clone(&population.space), mass)
        });
        TrialArm {
            treatment: treatment.to_string(),
            size: sizes[arm],
            empirical,
        }
    };

    Ok(TrialSummary {
        arms: [build_arm(0, arm_a), build_arm(1, arm_b)],
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn tb() -> crate::model::Scenario {
        fixtures::tb_scenario()
    }

    #[test]
    fn max_benefit_coupling_is_valid_and_scores_two_thirds() {
        let scenario = tb();
        let ref_m = scenario.marginal("a1").unwrap();
        let new_m = scenario.marginal("a2").unwrap();
        let coupling = Coupling::new(
            ref_m,
            new_m,
            [
                (("y1", "y2"), Rational::new(1, 6)),
                (("y4", "y2"), Rational::new(1, 3)),
                (("y4", "y5"), Rational::new(1, 2)),
            ],
        )
        .unwrap();
        let stats = coupling.stats();
        assert_eq!(stats.benefit, Rational::new(2, 3));
        assert_eq!(stats.harm, Rational::new(1, 3));
        assert_eq!(stats.tie, Rational::zero());
        assert_eq!(stats.total(), Rational::one());
    }

    #[test]
    fn min_benefit_coupling_scores_one_half() {
        let scenario = tb();
        let coupling = Coupling::new(
            scenario.marginal("a1").unwrap(),
            scenario.marginal("a2").unwrap(),
            [
                (("y1", "y5"), Rational::new(1, 6)),
                (("y4", "y2"), Rational::new(1, 2)),
                (("y4", "y5"), Rational::new(1, 3)),
            ],
        )
        .unwrap();
        assert_eq!(coupling.stats().benefit, Rational::new(1, 2));
    }

    #[test]
    fn wrong_row_sums_are_rejected() {
        let scenario = tb();
        let err = Coupling::new(
            scenario.marginal("a1").unwrap(),
            scenario.marginal("a2").unwrap(),
            [
                (("y1", "y2"), Rational::new(1, 2)),
                (("y4", "y5"), Rational::new(1, 2)),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::MarginalMismatch { .. }), "{err}");
    }

    #[test]
    fn comonotone_with_itself_is_diagonal() {
        let scenario = tb();
        let a2 = scenario.marginal("a2").unwrap();
        let coupling = Coupling::comonotone(a2, a2).unwrap();
        assert_eq!(coupling.mass_at("y2", "y2"), Rational::new(1, 2));
        assert_eq!(coupling.mass_at("y5", "y5"), Rational::new(1, 2));
        assert_eq!(coupling.stats().tie, Rational::one());
    }

    #[test]
    fn antimonotone_matches_reverse_quantiles() {
        let scenario = tb();
        let coupling = Coupling::antimonotone(
            scenario.marginal("a1").unwrap(),
            scenario.marginal("a2").unwrap(),
        )
        .unwrap();
        assert_eq!(coupling.mass_at("y1", "y5"), Rational::new(1, 6));
        assert_eq!(coupling.mass_at("y1", "y2"), Rational::zero());
        assert_eq!(coupling.mass_at("y4", "y2"), Rational::new(1, 2));
        assert_eq!(coupling.mass_at("y4", "y5"), Rational::new(1, 3));
        assert_eq!(coupling.stats().benefit, Rational::new(1, 2));
    }

    #[test]
    fn comonotone_couplings_reproduce_their_marginals() {
        let scenario = tb();
        let a2 = scenario.marginal("a2").unwrap();
        let a3 = scenario.marginal("a3").unwrap();
        let coupling = Coupling::comonotone(a2, a3).unwrap();
        assert_eq!(&coupling.row_marginal(), a2);
        assert_eq!(&coupling.col_marginal(), a3);
        // Quantile layout by hand: y2 (1/2) meets y3 (5/6); the rest of
        // y3 meets y5; y6 takes the tail of y5.
        assert_eq!(coupling.mass_at("y2", "y3"), Rational::new(1, 2));
        assert_eq!(coupling.mass_at("y5", "y3"), Rational::new(1, 3));
        assert_eq!(coupling.mass_at("y5", "y6"), Rational::new(1, 6));
        assert!(coupling.stats().harm < Rational::new(1, 2));
    }

    #[test]
    fn rank_correlated_joint_validates_and_projects() {
        let scenario = tb();
        let joint = fixtures::rank_correlated_joint(&scenario).unwrap();
        for id in ["a1", "a2", "a3"] {
            assert_eq!(&joint.projection(id).unwrap(), scenario.marginal(id).unwrap());
        }
        for (ref_t, new_t) in [("a1", "a2"), ("a2", "a3"), ("a3", "a1")] {
            let stats = joint.pairwise_coupling(ref_t, new_t).unwrap().stats();
            assert_eq!(stats.benefit, Rational::new(2, 3), "{new_t} over {ref_t}");
        }
    }

    #[test]
    fn broken_cells_fail_marginal_validation() {
        let scenario = tb();
        // Swap the 1/6 and 1/3 masses on the first two cells.
        let err = MultiwayJoint::new(
            &scenario,
            vec!["a1".into(), "a2".into(), "a3".into()],
            vec![
                (vec!["y4", "y5", "y6"], Rational::new(1, 3)),
                (vec!["y4", "y5", "y3"], Rational::new(1, 6)),
                (vec!["y4", "y2", "y3"], Rational::new(1, 3)),
                (vec!["y1", "y2", "y3"], Rational::new(1, 6)),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::MarginalMismatch { .. }), "{err}");
    }

    #[test]
    fn product_joint_projects_to_its_marginals() {
        let scenario = tb();
        let joint =
            MultiwayJoint::product(&scenario, vec!["a1".into(), "a2".into(), "a3".into()])
                .unwrap();
        for id in ["a1", "a2", "a3"] {
            assert_eq!(&joint.projection(id).unwrap(), scenario.marginal(id).unwrap());
        }
    }

    #[test]
    fn sampling_stays_in_support_and_is_deterministic() {
        let scenario = tb();
        let joint = fixtures::rank_correlated_joint(&scenario).unwrap();
        let population = sample_population(&joint, 6, 7).unwrap();
        let support: Vec<Vec<&str>> = joint.cells().map(|(tuple, _)| tuple).collect();
        for i in 0..population.len() {
            assert!(support.contains(&population.individual(i)));
        }
        assert_eq!(population, sample_population(&joint, 6, 7).unwrap());
        assert_ne!(population, sample_population(&joint, 6, 8).unwrap());
    }

    #[test]
    fn point_mass_joint_samples_identically() {
        let scenario = tb();
        let space = &scenario.space;
        let mut degenerate = crate::model::Scenario::new(Arc::clone(space));
        degenerate.treatments.insert(
            "only".into(),
            Marginal::point_mass(space, "y6").unwrap(),
        );
        let joint = MultiwayJoint::new(
            &degenerate,
            vec!["only".into()],
            vec![(vec!["y6"], Rational::one())],
        )
        .unwrap();
        let population = sample_population(&joint, 50, 3).unwrap();
        for i in 0..50 {
            assert_eq!(population.individual(i), vec!["y6"]);
        }
    }

    #[test]
    fn zero_population_is_an_error() {
        let scenario = tb();
        let joint = fixtures::rank_correlated_joint(&scenario).unwrap();
        assert_eq!(
            sample_population(&joint, 0, 1).unwrap_err(),
            Error::EmptyPopulation
        );
    }

    #[test]
    fn single_individual_trial_leaves_one_arm_empty() {
        let scenario = tb();
        let joint = fixtures::rank_correlated_joint(&scenario).unwrap();
        let population = sample_population(&joint, 1, 11).unwrap();
        let summary = simulate_rct(&population, "a1", "a2", 5).unwrap();
        let sizes: Vec<usize> = summary.arms.iter().map(|a| a.size).collect();
        assert_eq!(sizes.iter().sum::<usize>(), 1);
        for arm in &summary.arms {
            match arm.size {
                0 => assert!(arm.empirical.is_none()),
                _ => {
                    let empirical = arm.empirical.as_ref().unwrap();
                    assert_eq!(empirical.support().len(), 1, "point mass expected");
                }
            }
        }
    }

    #[test]
    fn trial_rerun_is_bit_identical() {
        let scenario = tb();
        let joint = fixtures::rank_correlated_joint(&scenario).unwrap();
        let population = sample_population(&joint, 500, 42).unwrap();
        let one = simulate_rct(&population, "a1", "a2", 43).unwrap();
        let two = simulate_rct(&population, "a1", "a2", 43).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn containment_report_holds_for_the_rank_correlated_law() {
        let scenario = tb();
        let joint = fixtures::rank_correlated_joint(&scenario).unwrap();
        let report = joint.verify_bounds_contain("a2", "a1").unwrap();
        assert!(report.contained());
        assert_eq!(report.stats.benefit, Rational::new(2, 3));
        assert_eq!(report.benefit.hi, Rational::new(2, 3), "upper endpoint attained");
    }

    #[test]
    fn containment_holds_at_the_antimonotone_edge() {
        let scenario = tb();
        let ref_m = scenario.marginal("a1").unwrap();
        let new_m = scenario.marginal("a2").unwrap();
        let coupling = Coupling::antimonotone(ref_m, new_m).unwrap();
        let stats = coupling.stats();
        let bounds = benefit_bounds(new_m, ref_m).unwrap();
        assert_eq!(stats.benefit, bounds.lo, "lower endpoint attained");
    }
}
