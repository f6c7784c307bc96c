//! Permutations of trajectory orderings and the transitions between
//! neighbouring atoms.
//!
//! A driving list is itself a permutation: position `k` maps to the index
//! of the `k`-th smallest value. Transitions are read with products taken
//! left to right, so `π₂ = σ π₁` means `π₂ = π₁ ∘ σ` as functions and
//! `σ = π₁⁻¹ ∘ π₂` acts on positions. Swapping the last two entries of the
//! ordering is the transposition of the last two positions, and moving the
//! first of three entries to the back is `(1,2,3)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::Atom;
use crate::chain::DrivingList;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("permutations have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("not a bijection on 1..={0}")]
    NotABijection(usize),
    #[error("cycle entries overlap or fall outside 1..={0}")]
    BadCycles(usize),
}

/// A bijection on `{1, …, n}`, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    /// From 1-based images: `images[i - 1]` is the image of `i`.
    pub fn from_images(images: &[usize]) -> Result<Self, PermError> {
        let n = images.len();
        let mut seen = vec![false; n];
        let mut map = Vec::with_capacity(n);
        for &v in images {
            if v == 0 || v > n || seen[v - 1] {
                return Err(PermError::NotABijection(n));
            }
            seen[v - 1] = true;
            map.push(v - 1);
        }
        Ok(Permutation { map })
    }

    /// Position ↦ trajectory index, read off the driving list.
    pub fn from_driving_list(d: &DrivingList) -> Self {
        Permutation {
            map: d.as_slice().iter().map(|&idx| idx - 1).collect(),
        }
    }

    /// Rebuilds a permutation of `{1, …, n}` from disjoint cycles.
    pub fn from_cycles(n: usize, cycles: &CycleForm) -> Result<Self, PermError> {
        let mut map: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in &cycles.0 {
            for (k, &v) in cycle.iter().enumerate() {
                if v == 0 || v > n || touched[v - 1] {
                    return Err(PermError::BadCycles(n));
                }
                touched[v - 1] = true;
                map[v - 1] = cycle[(k + 1) % cycle.len()] - 1;
            }
        }
        Ok(Permutation { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Image of `i` (1-based).
    pub fn apply(&self, i: usize) -> usize {
        self.map[i - 1] + 1
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { map: inv }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Self, PermError> {
        if self.len() != other.len() {
            return Err(PermError::LengthMismatch(self.len(), other.len()));
        }
        Ok(Permutation {
            map: other.map.iter().map(|&v| self.map[v]).collect(),
        })
    }

    /// Disjoint cycles, each starting at its smallest element, sorted by
    /// that element; fixed points omitted.
    pub fn cycles(&self) -> CycleForm {
        let mut seen = vec![false; self.map.len()];
        let mut out = Vec::new();
        for start in 0..self.map.len() {
            if seen[start] || self.map[start] == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i + 1);
                i = self.map[i];
            }
            out.push(cycle);
        }
        CycleForm(out)
    }
}

/// Canonical disjoint-cycle notation (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CycleForm(pub Vec<Vec<usize>>);

impl CycleForm {
    /// Brings arbitrary cycle notation to canonical form: rotate each cycle
    /// to its minimum, drop 1-cycles, sort by first element.
    pub fn normalized(cycles: Vec<Vec<usize>>) -> Self {
        let mut out: Vec<Vec<usize>> = cycles
            .into_iter()
            .filter(|c| c.len() > 1)
            .map(|mut c| {
                let k = c
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, &v)| v)
                    .map(|(k, _)| k)
                    .unwrap_or(0);
                c.rotate_left(k);
                c
            })
            .collect();
        out.sort_by_key(|c| c[0]);
        CycleForm(out)
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::fmt::Display for CycleForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return f.write_str("()");
        }
        for c in &self.0 {
            let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            write!(f, "({})", parts.join(","))?;
        }
        Ok(())
    }
}

pub fn cycle_decomposition(p: &Permutation) -> CycleForm {
    p.cycles()
}

/// `σ` with `p1 ∘ σ = p2`.
pub fn sigma_between(p1: &Permutation, p2: &Permutation) -> Result<Permutation, PermError> {
    p1.inverse().compose(p2)
}

/// `π₁ ∘ σ₁ ∘ … ∘ σₖ`: the permutation reached from `first` after the given
/// transitions.
pub fn apply_sigmas(first: &Permutation, sigmas: &[CycleForm]) -> Result<Permutation, PermError> {
    sigmas.iter().try_fold(first.clone(), |acc, c| {
        acc.compose(&Permutation::from_cycles(first.len(), c)?)
    })
}

/// Transitions between consecutive atoms of one subinterval.
pub fn sigma_sequence(atoms: &[&Atom]) -> Result<Vec<CycleForm>, PermError> {
    let perms: Vec<Permutation> = atoms
        .iter()
        .map(|a| Permutation::from_driving_list(&a.driving))
        .collect();
    perms
        .windows(2)
        .map(|w| sigma_between(&w[0], &w[1]).map(|s| s.cycles()))
        .collect()
}

/// One row of a σ table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaRow {
    pub j: usize,
    pub cycles: CycleForm,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dl(v: Vec<usize>) -> DrivingList {
        DrivingList::new(v).unwrap()
    }

    #[test]
    fn swapping_last_two_positions() {
        let p1 = Permutation::from_driving_list(&dl(vec![1, 2, 5, 4, 3]));
        let p2 = Permutation::from_driving_list(&dl(vec![1, 2, 5, 3, 4]));
        let s = sigma_between(&p1, &p2).unwrap();
        assert_eq!(s.cycles(), CycleForm(vec![vec![4, 5]]));
        assert_eq!(p1.compose(&s).unwrap(), p2);
    }

    #[test]
    fn rotating_three_positions() {
        let p1 = Permutation::from_driving_list(&dl(vec![1, 2, 4, 3, 5]));
        let p2 = Permutation::from_driving_list(&dl(vec![1, 2, 3, 5, 4]));
        let s = sigma_between(&p1, &p2).unwrap();
        assert_eq!(s.cycles().to_string(), "(3,4,5)");
        assert_eq!(apply_sigmas(&p1, &[s.cycles()]).unwrap(), p2);
    }

    #[test]
    fn equal_permutations_give_identity() {
        let p = Permutation::from_driving_list(&dl(vec![1, 2, 4, 3]));
        let s = sigma_between(&p, &p).unwrap();
        assert!(s.is_identity());
        assert!(s.cycles().is_identity());
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let a = Permutation::identity(73);
        let b = Permutation::identity(75);
        assert_eq!(
            sigma_between(&a, &b),
            Err(PermError::LengthMismatch(73, 75))
        );
    }

    #[test]
    fn canonical_cycles() {
        // 137 -> 138 -> 139 -> 137 and a product of two transpositions
        let mut images: Vec<usize> = (1..=150).collect();
        images[136] = 138;
        images[137] = 139;
        images[138] = 137;
        let p = Permutation::from_images(&images).unwrap();
        assert_eq!(p.cycles().to_string(), "(137,138,139)");

        let mut images: Vec<usize> = (1..=150).collect();
        images.swap(138, 140);
        images.swap(139, 141);
        let p = Permutation::from_images(&images).unwrap();
        assert_eq!(p.cycles().to_string(), "(139,141)(140,142)");
        assert_eq!(
            CycleForm::normalized(vec![vec![142, 140], vec![141, 139], vec![7]]),
            p.cycles()
        );
        assert!(Permutation::identity(9).cycles().is_identity());
    }

    #[test]
    fn bad_inputs() {
        assert!(Permutation::from_images(&[1, 1, 3]).is_err());
        assert!(Permutation::from_images(&[0, 1]).is_err());
        assert!(Permutation::from_cycles(3, &CycleForm(vec![vec![1, 2], vec![2, 3]])).is_err());
        assert!(Permutation::from_cycles(3, &CycleForm(vec![vec![1, 4]])).is_err());
    }

    fn perm_strategy() -> impl Strategy<Value = Permutation> {
        (1usize..40).prop_flat_map(|n| {
            Just((1..=n).collect::<Vec<_>>())
                .prop_shuffle()
                .prop_map(|v| Permutation::from_images(&v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn cycles_round_trip(p in perm_strategy()) {
            let c = cycle_decomposition(&p);
            prop_assert_eq!(Permutation::from_cycles(p.len(), &c).unwrap(), p.clone());
            prop_assert_eq!(CycleForm::normalized(c.0.clone()), c);
        }

        #[test]
        fn sigma_reconstructs(p in perm_strategy(), seed in any::<u64>()) {
            // a second permutation of the same length, derived from the first
            let n = p.len();
            let shift = (seed as usize) % n;
            let images: Vec<usize> = (0..n).map(|i| p.apply((i + shift) % n + 1)).collect();
            let q = Permutation::from_images(&images).unwrap();
            let s = sigma_between(&p, &q).unwrap();
            prop_assert_eq!(p.compose(&s).unwrap(), q.clone());
            prop_assert_eq!(apply_sigmas(&p, &[s.cycles()]).unwrap(), q);
        }
    }
}
