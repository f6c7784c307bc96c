//! Symbolic replay of the M&m iteration along a prescribed ordering.
//!
//! Every trajectory entry becomes an [`AffineForm`] in the unknown starting
//! point `x`. A [`DrivingList`] says in which order the entries sit on the
//! real line; replaying it yields a totally ordered [`Chain`] of forms, and
//! the strict inequalities between neighbours reduce to an open interval of
//! starting points that share the ordering.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::AffineForm;
use crate::interval::RInterval;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("driving list is not a permutation of 1..={0}")]
    NotAPermutation(usize),
    #[error("driving list has length {0}; at least 4 entries are needed")]
    TooShort(usize),
    #[error("seeds out of order in driving list: need 1 < 2 < 3 by position")]
    SeedsOutOfOrder,
    #[error("median of an empty chain")]
    EmptyChain,
    #[error("inequality chain is contradictory")]
    EmptyInterval,
    #[error("inequality chain leaves x unbounded")]
    Unbounded,
}

/// Trajectory indices `1..=L` listed in increasing order of value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct DrivingList(Vec<usize>);

impl DrivingList {
    /// Validates that `order` is a permutation of `1..=L` in which the seed
    /// indices appear as `1, 2, 3` (the seeds are `0 < x < 1`).
    pub fn new(order: Vec<usize>) -> Result<Self, ChainError> {
        let len = order.len();
        if len < 3 {
            return Err(ChainError::TooShort(len));
        }
        let mut seen = vec![false; len + 1];
        for &i in &order {
            if i == 0 || i > len || seen[i] {
                return Err(ChainError::NotAPermutation(len));
            }
            seen[i] = true;
        }
        let seeds: Vec<usize> = order.iter().copied().filter(|&i| i <= 3).collect();
        if seeds != [1, 2, 3] {
            return Err(ChainError::SeedsOutOfOrder);
        }
        Ok(DrivingList(order))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// For each trajectory index `i` (1-based), its 1-based position in the list.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len() + 1];
        for (p, &i) in self.0.iter().enumerate() {
            pos[i] = p + 1;
        }
        pos
    }
}

impl<'de> Deserialize<'de> for DrivingList {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        DrivingList::new(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub form: AffineForm,
    pub source: usize,
}

/// Forms listed in their prescribed increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Chain {
    entries: Vec<ChainEntry>,
}

impl Chain {
    pub fn new(entries: Vec<ChainEntry>) -> Self {
        Chain { entries }
    }

    /// Chain from bare forms, with sources numbered 1, 2, … in order.
    pub fn from_forms(forms: Vec<AffineForm>) -> Self {
        Chain {
            entries: forms
                .into_iter()
                .enumerate()
                .map(|(k, form)| ChainEntry {
                    form,
                    source: k + 1,
                })
                .collect(),
        }
    }

    pub fn entries(&self) -> &[ChainEntry] {
        &self.entries
    }

    pub fn forms(&self) -> impl Iterator<Item = &AffineForm> {
        self.entries.iter().map(|e| &e.form)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The result of replaying a driving list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicRun {
    /// The full chain, before deduplication.
    pub chain: Chain,
    /// Median in force when the last point was produced.
    pub m_form: AffineForm,
    /// `x_4, …, x_L` as forms in `x`.
    pub step_forms: Vec<AffineForm>,
    /// Median forms `M_3, …, M_{L-1}`; `M_{n-1}` produced `x_n`.
    pub medians: Vec<AffineForm>,
    pub len: usize,
}

impl SymbolicRun {
    /// Form of trajectory entry `n` (1-based).
    pub fn point_form(&self, n: usize) -> AffineForm {
        match n {
            1 => AffineForm::constant(Rational::zero()),
            2 => AffineForm::identity(),
            3 => AffineForm::constant(Rational::one()),
            _ => self.step_forms[n - 4].clone(),
        }
    }
}

fn median_of_forms<'a>(len: usize, at: impl Fn(usize) -> &'a AffineForm) -> AffineForm {
    if len % 2 == 1 {
        at(len / 2).clone()
    } else {
        (at(len / 2 - 1) + at(len / 2)).half()
    }
}

/// Middle entry of an odd chain, or the half-sum of the two middle entries.
pub fn symbolic_median(c: &Chain) -> Result<AffineForm, ChainError> {
    if c.is_empty() {
        return Err(ChainError::EmptyChain);
    }
    Ok(median_of_forms(c.len(), |k| &c.entries[k].form))
}

/// Fenwick tree over positions, counting which have been occupied.
pub(crate) struct Occupancy(Vec<u32>);

impl Occupancy {
    pub(crate) fn new(n: usize) -> Self {
        Occupancy(vec![0; n + 1])
    }

    pub(crate) fn mark(&mut self, mut pos: usize) {
        while pos < self.0.len() {
            self.0[pos] += 1;
            pos += pos & pos.wrapping_neg();
        }
    }

    /// Number of marked positions `< pos`.
    pub(crate) fn count_before(&self, pos: usize) -> usize {
        let mut p = pos - 1;
        let mut total = 0;
        while p > 0 {
            total += self.0[p] as usize;
            p -= p & p.wrapping_neg();
        }
        total
    }
}

/// Replays the iteration symbolically, inserting each new form where the
/// driving list puts it.
///
/// The insertion slot of `x_n` is its rank among the indices `≤ n` in the
/// driving list, found with a Fenwick tree over list positions.
pub fn replay_driving_list(d: &DrivingList) -> Result<SymbolicRun, ChainError> {
    let len = d.len();
    if len < 4 {
        return Err(ChainError::TooShort(len));
    }
    let positions = d.positions();

    let mut forms: Vec<AffineForm> = Vec::with_capacity(len + 1);
    forms.push(AffineForm::constant(Rational::zero())); // unused slot 0
    forms.push(AffineForm::constant(Rational::zero()));
    forms.push(AffineForm::identity());
    forms.push(AffineForm::constant(Rational::one()));

    // Order of indices 1..n-1 in the chain so far.
    let mut order: Vec<u32> = vec![1, 2, 3];
    order.reserve(len - 3);
    let mut occupied = Occupancy::new(len);
    for &pos in &positions[1..=3] {
        occupied.mark(pos);
    }

    let mut sum = &AffineForm::identity() + &AffineForm::constant(Rational::one());
    let mut medians = Vec::with_capacity(len - 3);
    for (n, &pos) in positions.iter().enumerate().skip(4) {
        let median = median_of_forms(order.len(), |k| &forms[order[k] as usize]);
        let next = &median.scale_int(n as i64) - &sum;
        sum = &sum + &next;
        let slot = occupied.count_before(pos);
        occupied.mark(pos);
        order.insert(slot, n as u32);
        forms.push(next);
        medians.push(median);
    }

    let m_form = medians
        .last()
        .cloned()
        .expect("at least one step was replayed");
    let chain = Chain {
        entries: order
            .iter()
            .map(|&i| ChainEntry {
                form: forms[i as usize].clone(),
                source: i as usize,
            })
            .collect(),
    };
    let step_forms = forms.split_off(4);
    Ok(SymbolicRun {
        chain,
        m_form,
        step_forms,
        medians,
        len,
    })
}

/// Drops entries structurally equal to their predecessor, keeping the first.
pub fn dedupe_chain(c: Chain) -> Chain {
    let mut entries: Vec<ChainEntry> = Vec::with_capacity(c.entries.len());
    for e in c.entries {
        if entries.last().is_some_and(|last| last.form == e.form) {
            continue;
        }
        entries.push(e);
    }
    Chain { entries }
}

/// Intersection of strict one-variable constraints `f(x) > 0`.
#[derive(Debug, Clone, Default)]
pub struct StrictBounds {
    lower: Option<Rational>,
    upper: Option<Rational>,
    contradictory: bool,
}

impl StrictBounds {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the constraint `f(x) > 0`.
    pub fn require_positive(&mut self, f: &AffineForm) {
        if f.a.is_zero() {
            if !f.b.is_positive() {
                self.contradictory = true;
            }
            return;
        }
        let root = -&(&f.b / &f.a);
        if f.a.is_positive() {
            if self.lower.as_ref().is_none_or(|lo| root > *lo) {
                self.lower = Some(root);
            }
        } else if self.upper.as_ref().is_none_or(|hi| root < *hi) {
            self.upper = Some(root);
        }
    }

    /// Adds `f(x) < g(x)`.
    pub fn require_less(&mut self, f: &AffineForm, g: &AffineForm) {
        self.require_positive(&(g - f));
    }

    pub fn finish(self) -> Result<RInterval, ChainError> {
        if self.contradictory {
            return Err(ChainError::EmptyInterval);
        }
        match (self.lower, self.upper) {
            (Some(lo), Some(hi)) => {
                if lo >= hi {
                    Err(ChainError::EmptyInterval)
                } else {
                    Ok(RInterval::open(lo, hi).expect("lo < hi"))
                }
            }
            _ => Err(ChainError::Unbounded),
        }
    }
}

/// Reduces the strict chain `f_1 < f_2 < …` to the open interval of `x`
/// satisfying every adjacent inequality.
pub fn reduce_chain(c: &Chain) -> Result<RInterval, ChainError> {
    let mut bounds = StrictBounds::new();
    for w in c.entries.windows(2) {
        bounds.require_less(&w[0].form, &w[1].form);
    }
    bounds.finish()
}
