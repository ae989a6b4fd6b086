//! Outcome spaces, marginals, utilities, and scenarios.
//!
//! The position of an outcome in its space IS the order relation: index 0
//! is the worst outcome, the last index the best. Everything downstream
//! (bounds, verdicts, rankings) compares outcomes through these indices.
//! All types are immutable after construction and safe to share.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type TreatmentId = String;
pub type UtilityId = String;

/// A totally ordered, finite set of outcome labels (worst first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSpace {
    ids: Vec<String>,
    display: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl OutcomeSpace {
    /// Space whose display text equals the outcome id.
    pub fn new<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        let display = ids.clone();
        Self::build(ids, display)
    }

    /// Space with separate human-readable display text per outcome.
    pub fn with_labels<I, S, T>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let (ids, display) = pairs
            .into_iter()
            .map(|(id, label)| (id.into(), label.into()))
            .unzip();
        Self::build(ids, display)
    }

    fn build(ids: Vec<String>, display: Vec<String>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut index = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateLabel { label: id.clone() });
            }
        }
        Ok(OutcomeSpace { ids, display, index })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty spaces
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn display_label(&self, index: usize) -> &str {
        &self.display[index]
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.ids.iter().map(String::as_str)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id).ok_or_else(|| Error::UnknownOutcome {
            outcome: id.to_string(),
        })
    }

    /// Same outcomes in the same order; display text is not identity.
    pub fn is_compatible(&self, other: &OutcomeSpace) -> bool {
        self.ids == other.ids
    }
}

pub(crate) fn check_compatible(a: &OutcomeSpace, b: &OutcomeSpace) -> Result<()> {
    if a.is_compatible(b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

/// Distribution of one treatment's potential outcome. Masses are exact,
/// nonnegative, and sum to exactly 1; omitted outcomes carry mass 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marginal {
    space: Arc<OutcomeSpace>,
    mass: Vec<Rational>,
}

impl Marginal {
    pub fn from_pairs<I, S>(space: &Arc<OutcomeSpace>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Rational)>,
        S: AsRef<str>,
    {
        let mut mass = vec![Rational::zero(); space.len()];
        let mut seen = BTreeSet::new();
        for (id, value) in entries {
            let idx = space.require(id.as_ref())?;
            if !seen.insert(idx) {
                return Err(Error::DuplicateOutcome {
                    outcome: id.as_ref().to_string(),
                });
            }
            if value.is_negative() {
                return Err(Error::NegativeMass {
                    outcome: id.as_ref().to_string(),
                    mass: value,
                });
            }
            mass[idx] = value;
        }
        let total: Rational = mass.iter().sum();
        if total != Rational::one() {
            return Err(Error::MassNotOne { total });
        }
        Ok(Marginal {
            space: Arc::clone(space),
            mass,
        })
    }

    pub fn point_mass(space: &Arc<OutcomeSpace>, id: &str) -> Result<Self> {
        Self::from_pairs(space, [(id, Rational::one())])
    }

    /// Internal constructor for masses already known to satisfy the
    /// invariants (projections of validated joints, empirical counts).
    pub(crate) fn from_validated(space: Arc<OutcomeSpace>, mass: Vec<Rational>) -> Self {
        debug_assert_eq!(mass.len(), space.len());
        debug_assert_eq!(mass.iter().sum::<Rational>(), Rational::one());
        debug_assert!(mass.iter().all(|m| !m.is_negative()));
        Marginal { space, mass }
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn mass(&self, index: usize) -> &Rational {
        &self.mass[index]
    }

    pub fn mass_of(&self, id: &str) -> Option<&Rational> {
        self.space.index_of(id).map(|i| &self.mass[i])
    }

    /// Outcome indices with strictly positive mass, in space order.
    pub fn support(&self) -> Vec<usize> {
        (0..self.mass.len())
            .filter(|&i| self.mass[i].is_positive())
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.mass.iter().enumerate()
    }

    /// P(Y <= outcome at `index`).
    pub fn cumulative(&self, index: usize) -> Rational {
        self.mass[..=index].iter().sum()
    }

    /// First-order stochastic dominance: `self` is at least as good as
    /// `other` at every cumulative level.
    pub fn dominates(&self, other: &Marginal) -> bool {
        self.space.is_compatible(&other.space)
            && (0..self.space.len()).all(|i| self.cumulative(i) <= other.cumulative(i))
    }
}

/// Order-preserving map from outcomes to rational utilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utility {
    space: Arc<OutcomeSpace>,
    values: Vec<Rational>,
}

impl Utility {
    pub fn from_pairs<I, S>(space: &Arc<OutcomeSpace>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Rational)>,
        S: AsRef<str>,
    {
        let mut values: Vec<Option<Rational>> = vec![None; space.len()];
        for (id, value) in entries {
            let idx = space.require(id.as_ref())?;
            if values[idx].is_some() {
                return Err(Error::DuplicateOutcome {
                    outcome: id.as_ref().to_string(),
                });
            }
            values[idx] = Some(value);
        }
        let mut resolved = Vec::with_capacity(space.len());
        for (idx, value) in values.into_iter().enumerate() {
            match value {
                Some(v) => resolved.push(v),
                None => {
                    return Err(Error::MissingOutcome {
                        outcome: space.id(idx).to_string(),
                    })
                }
            }
        }
        for i in 0..resolved.len().saturating_sub(1) {
            if resolved[i] > resolved[i + 1] {
                return Err(Error::NotOrderPreserving {
                    worse: space.id(i).to_string(),
                    better: space.id(i + 1).to_string(),
                });
            }
        }
        Ok(Utility {
            space: Arc::clone(space),
            values: resolved,
        })
    }

    /// Utility 1, 2, ... assigned by position in the space.
    pub fn rank(space: &Arc<OutcomeSpace>) -> Self {
        Utility {
            space: Arc::clone(space),
            values: (1..=space.len() as i64).map(Rational::from_int).collect(),
        }
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn value(&self, index: usize) -> &Rational {
        &self.values[index]
    }

    pub fn value_of(&self, id: &str) -> Option<&Rational> {
        self.space.index_of(id).map(|i| &self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.values.iter().enumerate()
    }
}

/// A full problem instance: one shared outcome space, identified marginals
/// per treatment, candidate utilities, and an optional standard of care.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub space: Arc<OutcomeSpace>,
    pub treatments: BTreeMap<TreatmentId, Marginal>,
    pub utilities: BTreeMap<UtilityId, Utility>,
    pub standard_of_care: Option<TreatmentId>,
}

impl Scenario {
    pub fn new(space: Arc<OutcomeSpace>) -> Self {
        Scenario {
            space,
            treatments: BTreeMap::new(),
            utilities: BTreeMap::new(),
            standard_of_care: None,
        }
    }

    pub fn marginal(&self, treatment: &str) -> Result<&Marginal> {
        self.treatments
            .get(treatment)
            .ok_or_else(|| Error::UnknownTreatment {
                treatment: treatment.to_string(),
            })
    }

    pub fn utility(&self, utility: &str) -> Result<&Utility> {
        self.utilities
            .get(utility)
            .ok_or_else(|| Error::UnknownUtility {
                utility: utility.to_string(),
            })
    }

    pub fn treatment_ids(&self) -> Vec<TreatmentId> {
        self.treatments.keys().cloned().collect()
    }

    /// Check every scenario invariant. Findings are data, not failures;
    /// an empty report means the scenario is valid. Ordering is
    /// deterministic: treatments by id, then utilities, then the
    /// standard-of-care reference.
    pub fn validate(&self) -> Vec<Finding> {
        let mut findings = Vec::new();
        for (id, marginal) in &self.treatments {
            if !marginal.space().is_compatible(&self.space) {
                findings.push(Finding::SpaceMismatch {
                    kind: ComponentKind::Treatment,
                    id: id.clone(),
                });
            }
        }
        for (id, utility) in &self.utilities {
            if !utility.space().is_compatible(&self.space) {
                findings.push(Finding::SpaceMismatch {
                    kind: ComponentKind::Utility,
                    id: id.clone(),
                });
            }
        }
        if let Some(soc) = &self.standard_of_care {
            if !self.treatments.contains_key(soc) {
                findings.push(Finding::UnknownTreatment { id: soc.clone() });
            }
        }
        findings
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    Treatment,
    Utility,
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentKind::Treatment => write!(f, "treatment"),
            ComponentKind::Utility => write!(f, "utility"),
        }
    }
}

/// A single violated invariant found by [`Scenario::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Finding {
    SpaceMismatch { kind: ComponentKind, id: String },
    UnknownTreatment { id: String },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::SpaceMismatch { kind, id } => {
                write!(f, "SpaceMismatch: {kind} '{id}' uses a different outcome space")
            }
            Finding::UnknownTreatment { id } => {
                write!(f, "UnknownTreatment: standard_of_care '{id}' is not a treatment")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn six_space() -> Arc<OutcomeSpace> {
        Arc::new(OutcomeSpace::new(["y1", "y2", "y3", "y4", "y5", "y6"]).unwrap())
    }

    #[test]
    fn space_order_is_positional() {
        let space = six_space();
        assert_eq!(space.len(), 6);
        assert_eq!(space.id(0), "y1");
        assert_eq!(space.id(5), "y6");
        assert_eq!(space.index_of("y4"), Some(3));
        assert_eq!(space.index_of("zz"), None);
    }

    #[test]
    fn singleton_space_is_fine() {
        let space = OutcomeSpace::new(["alive"]).unwrap();
        assert_eq!(space.len(), 1);
    }

    #[test]
    fn duplicate_and_empty_labels_rejected() {
        assert_eq!(
            OutcomeSpace::new(["y1", "y1"]).unwrap_err(),
            Error::DuplicateLabel { label: "y1".into() }
        );
        assert_eq!(
            OutcomeSpace::new(Vec::<String>::new()).unwrap_err(),
            Error::EmptySpace
        );
    }

    #[test]
    fn marginal_fills_omitted_outcomes_with_zero() {
        let space = six_space();
        let m = Marginal::from_pairs(
            &space,
            [("y1", Rational::new(1, 6)), ("y4", Rational::new(5, 6))],
        )
        .unwrap();
        assert_eq!(m.mass_of("y1").unwrap(), &Rational::new(1, 6));
        assert_eq!(m.mass_of("y2").unwrap(), &Rational::zero());
        assert_eq!(m.support(), vec![0, 3]);
    }

    #[test]
    fn point_mass_marginal() {
        let space = six_space();
        let m = Marginal::point_mass(&space, "y6").unwrap();
        assert_eq!(m.support(), vec![5]);
    }

    #[test]
    fn marginal_sum_checked_exactly() {
        let space = six_space();
        let err = Marginal::from_pairs(
            &space,
            [("y1", Rational::new(1, 2)), ("y4", Rational::new(1, 3))],
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::MassNotOne {
                total: Rational::new(5, 6)
            }
        );
    }

    #[test]
    fn marginal_rejects_negative_and_unknown() {
        let space = six_space();
        assert!(matches!(
            Marginal::from_pairs(
                &space,
                [("y1", Rational::new(-1, 6)), ("y4", Rational::new(7, 6))],
            ),
            Err(Error::NegativeMass { .. })
        ));
        assert!(matches!(
            Marginal::from_pairs(&space, [("nope", Rational::one())]),
            Err(Error::UnknownOutcome { .. })
        ));
    }

    #[test]
    fn utility_accepts_weakly_monotone_values() {
        let space = six_space();
        let mu2 = Utility::from_pairs(
            &space,
            [
                ("y1", Rational::from_int(0)),
                ("y2", Rational::from_int(3)),
                ("y3", Rational::from_int(4)),
                ("y4", Rational::from_int(5)),
                ("y5", Rational::from_int(9)),
                ("y6", Rational::from_int(10)),
            ],
        )
        .unwrap();
        assert_eq!(mu2.value_of("y5").unwrap(), &Rational::from_int(9));

        let flat = Utility::from_pairs(
            &space,
            space.ids().map(|id| (id.to_string(), Rational::one())).collect::<Vec<_>>(),
        );
        assert!(flat.is_ok(), "repeated values are allowed");
    }

    #[test]
    fn utility_order_violation_names_the_pair() {
        let space = six_space();
        let mut values = vec![
            ("y1", Rational::from_int(5)),
            ("y2", Rational::from_int(3)),
        ];
        values.extend(
            ["y3", "y4", "y5", "y6"]
                .into_iter()
                .map(|id| (id, Rational::from_int(6))),
        );
        assert_eq!(
            Utility::from_pairs(&space, values).unwrap_err(),
            Error::NotOrderPreserving {
                worse: "y1".into(),
                better: "y2".into()
            }
        );
    }

    #[test]
    fn utility_requires_full_coverage() {
        let space = six_space();
        assert_eq!(
            Utility::from_pairs(&space, [("y1", Rational::zero())]).unwrap_err(),
            Error::MissingOutcome { outcome: "y2".into() }
        );
    }

    #[test]
    fn rank_utility_counts_positions() {
        let space = six_space();
        let mu1 = Utility::rank(&space);
        assert_eq!(mu1.value_of("y1").unwrap(), &Rational::from_int(1));
        assert_eq!(mu1.value_of("y6").unwrap(), &Rational::from_int(6));
    }

    #[test]
    fn validate_flags_space_mismatch_and_bad_soc() {
        let space = six_space();
        let other = Arc::new(OutcomeSpace::new(["z1", "z2"]).unwrap());
        let mut scenario = Scenario::new(Arc::clone(&space));
        scenario.treatments.insert(
            "a1".into(),
            Marginal::point_mass(&other, "z1").unwrap(),
        );
        scenario.standard_of_care = Some("aX".into());
        let findings = scenario.validate();
        assert_eq!(
            findings,
            vec![
                Finding::SpaceMismatch {
                    kind: ComponentKind::Treatment,
                    id: "a1".into()
                },
                Finding::UnknownTreatment { id: "aX".into() },
            ]
        );
    }

    #[test]
    fn dominance_is_cumulative_comparison() {
        let space = six_space();
        let low = Marginal::from_pairs(
            &space,
            [("y1", Rational::new(1, 2)), ("y3", Rational::new(1, 2))],
        )
        .unwrap();
        let high = Marginal::from_pairs(
            &space,
            [("y3", Rational::new(1, 2)), ("y6", Rational::new(1, 2))],
        )
        .unwrap();
        assert!(high.dominates(&low));
        assert!(!low.dominates(&high));
        assert!(high.dominates(&high));
    }

    fn monotone_values() -> impl Strategy<Value = Vec<i64>> {
        proptest::collection::vec(0i64..20, 6).prop_map(|steps| {
            steps
                .into_iter()
                .scan(0i64, |acc, s| {
                    *acc += s;
                    Some(*acc)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn monotone_vectors_build_utilities(values in monotone_values()) {
            let space = six_space();
            let pairs: Vec<(String, Rational)> = space
                .ids()
                .zip(values.iter())
                .map(|(id, v)| (id.to_string(), Rational::from_int(*v)))
                .collect();
            prop_assert!(Utility::from_pairs(&space, pairs).is_ok());
        }

        #[test]
        fn non_monotone_vectors_are_rejected(
            values in monotone_values(),
            at in 0usize..5,
            bump in 1i64..10,
        ) {
            let mut broken = values;
            broken[at] = broken[at + 1] + bump;
            let space = six_space();
            let pairs: Vec<(String, Rational)> = space
                .ids()
                .zip(broken.iter())
                .map(|(id, v)| (id.to_string(), Rational::from_int(*v)))
                .collect();
            prop_assert!(matches!(
                Utility::from_pairs(&space, pairs),
                Err(Error::NotOrderPreserving { .. })
            ));
        }
    }
}
