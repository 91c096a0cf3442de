//! Track selection by greedy maximization of a facility-location objective
//! with a discriminative confidence term:
//!
//! `E(D) = Σ_i max_{j∈D} w_ij − δ·|D| + λ·Σ_{j∈D} Φ(j)`, with `E(∅) = 0`.
//!
//! Every function is generic over [`Scalar`], so instances can be solved in
//! exact rational arithmetic as well as in floating point.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::mining::Track;
use crate::scalar::Scalar;

/// Enumeration limit for [`brute_force_select`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionInstance<T> {
    n: usize,
    /// Row-major `n × n` similarity matrix.
    w: Vec<T>,
    phi: Vec<T>,
    delta: T,
    lambda: T,
    budget: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult<T> {
    /// Selected indices in the order they were added.
    pub selected: Vec<usize>,
    pub objective_value: T,
    /// Marginal gain of each addition (empty for [`brute_force_select`]).
    pub gain_trace: Vec<T>,
}

/// Inner product of two feature vectors.
pub fn similarity<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::Dimension(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y))
}

impl<T: Scalar> SelectionInstance<T> {
    pub fn new(w: Vec<Vec<T>>, phi: Vec<T>, delta: T, lambda: T, budget: usize) -> Result<Self> {
        let n = phi.len();
        if w.len() != n || w.iter().any(|row| row.len() != n) {
            return Err(Error::Selection(format!(
                "similarity matrix must be {n}x{n}"
            )));
        }
        let flat: Vec<T> = w.into_iter().flatten().collect();
        for i in 0..n {
            for j in 0..i {
                if flat[i * n + j] != flat[j * n + i] {
                    return Err(Error::Selection(format!("w not symmetric at ({i}, {j})")));
                }
            }
        }
        if flat.iter().any(|v| !v.is_finite_value()) {
            return Err(Error::Selection("non-finite similarity".into()));
        }
        if let Some(p) = phi.iter().find(|&&p| !(p >= T::zero() && p <= T::one())) {
            return Err(Error::Selection(format!("phi {p:?} outside [0, 1]")));
        }
        if !(delta >= T::zero()) || !(lambda >= T::zero()) {
            return Err(Error::Selection("delta and lambda must be >= 0".into()));
        }
        if n > 0 && !(1..=n).contains(&budget) {
            return Err(Error::Selection(format!("budget {budget} outside 1..={n}")));
        }
        Ok(SelectionInstance {
            n,
            w: flat,
            phi,
            delta,
            lambda,
            budget: if n == 0 { 0 } else { budget },
        })
    }

    /// Builds an instance from mined tracks: `w_ij = <F_i, F_j>`,
    /// `Φ(i)` = track confidence. `budget = None` means `K = n`.
    pub fn from_tracks(
        tracks: &[Track<T>],
        delta: T,
        lambda: T,
        budget: Option<usize>,
    ) -> Result<Self> {
        let n = tracks.len();
        let mut w = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let s = similarity(&tracks[i].feature, &tracks[j].feature)?;
                w[i][j] = s;
                w[j][i] = s;
            }
        }
        let phi = tracks
            .iter()
            .map(|t| t.phi.max_of(T::zero()).min_of(T::one()))
            .collect();
        Self::new(
            w,
            phi,
            delta,
            lambda,
            budget.unwrap_or(n).min(n).max(n.min(1)),
        )
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn w(&self, i: usize, j: usize) -> T {
        self.w[i * self.n + j]
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn any_negative_similarity(&self) -> bool {
        self.w.iter().any(|&v| v < T::zero())
    }

    /// Coverage term `Σ_i max_{j∈D} w_ij` (0 for the empty set).
    pub fn coverage(&self, set: &[usize]) -> T {
        if set.is_empty() {
            return T::zero();
        }
        (0..self.n).fold(T::zero(), |acc, i| {
            let best = set[1..]
                .iter()
                .fold(self.w(i, set[0]), |m, &j| m.max_of(self.w(i, j)));
            acc + best
        })
    }

    /// Increase of the coverage term when `j` joins a set whose per-client
    /// best similarity is `best` (`None` = empty set).
    pub fn coverage_gain(&self, best: Option<&[T]>, j: usize) -> T {
        (0..self.n).fold(T::zero(), |acc, i| {
            let wij = self.w(i, j);
            acc + match best {
                None => wij,
                Some(b) => (wij - b[i]).max_of(T::zero()),
            }
        })
    }

    fn gain(&self, best: Option<&[T]>, j: usize) -> T {
        self.coverage_gain(best, j) - self.delta + self.lambda * self.phi[j]
    }
}

/// `E(D) = H(D) + P(D)` evaluated from scratch.
pub fn objective<T: Scalar>(inst: &SelectionInstance<T>, set: &[usize]) -> T {
    let cost = set.iter().fold(T::zero(), |acc, &j| {
        acc + inst.lambda * inst.phi[j] - inst.delta
    });
    inst.coverage(set) + cost
}

fn absorb<T: Scalar>(inst: &SelectionInstance<T>, best: &mut Option<Vec<T>>, j: usize) {
    match best {
        None => *best = Some((0..inst.n).map(|i| inst.w(i, j)).collect()),
        Some(b) => {
            for (i, bi) in b.iter_mut().enumerate() {
                *bi = bi.max_of(inst.w(i, j));
            }
        }
    }
}

/// Naive greedy: add the element of largest marginal gain (smallest index on
/// ties) until the budget is reached or no gain is positive.
pub fn greedy_select<T: Scalar>(inst: &SelectionInstance<T>) -> SelectionResult<T> {
    let mut in_set = vec![false; inst.n];
    let mut best: Option<Vec<T>> = None;
    let mut result = SelectionResult {
        selected: Vec::new(),
        objective_value: T::zero(),
        gain_trace: Vec::new(),
    };
    while result.selected.len() < inst.budget {
        let mut choice: Option<(usize, T)> = None;
        for j in (0..inst.n).filter(|&j| !in_set[j]) {
            let g = inst.gain(best.as_deref(), j);
            if choice.is_none_or(|(_, bg)| g > bg) {
                choice = Some((j, g));
            }
        }
        match choice {
            Some((j, g)) if g > T::zero() => {
                in_set[j] = true;
                absorb(inst, &mut best, j);
                result.selected.push(j);
                result.gain_trace.push(g);
                result.objective_value = result.objective_value + g;
            }
            _ => break,
        }
    }
    result
}

struct Candidate<T> {
    bound: T,
    index: usize,
    /// Selection size at which `bound` was computed.
    round: usize,
}

impl<T: Scalar> PartialEq for Candidate<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Candidate<T> {}

impl<T: Scalar> PartialOrd for Candidate<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Candidate<T> {
    /// Larger bound first, then smaller index.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .partial_cmp(&other.bound)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Lazy greedy with stale upper bounds in a max-heap. Produces the same
/// ordered selection as [`greedy_select`]. Stale gains are valid upper
/// bounds only when the coverage term is submodular, which needs `w ≥ 0`;
/// instances with negative similarities are handed to the naive loop.
pub fn lazy_greedy_select<T: Scalar>(inst: &SelectionInstance<T>) -> SelectionResult<T> {
    if inst.any_negative_similarity() {
        return greedy_select(inst);
    }
    let mut best: Option<Vec<T>> = None;
    let mut heap: BinaryHeap<Candidate<T>> = (0..inst.n)
        .map(|j| Candidate {
            bound: inst.gain(None, j),
            index: j,
            round: 0,
        })
        .collect();
    let mut result = SelectionResult {
        selected: Vec::new(),
        objective_value: T::zero(),
        gain_trace: Vec::new(),
    };
    while result.selected.len() < inst.budget {
        let Some(top) = heap.pop() else { break };
        let round = result.selected.len();
        if top.round == round {
            if !(top.bound > T::zero()) {
                break;
            }
            absorb(inst, &mut best, top.index);
            result.selected.push(top.index);
            result.gain_trace.push(top.bound);
            result.objective_value = result.objective_value + top.bound;
        } else {
            heap.push(Candidate {
                bound: inst.gain(best.as_deref(), top.index),
                index: top.index,
                round,
            });
        }
    }
    result
}

/// Exact maximizer of `E` over all subsets of size at most `K`, ties broken
/// by the lexicographically smallest sorted index list.
pub fn brute_force_select<T: Scalar>(inst: &SelectionInstance<T>) -> Result<SelectionResult<T>> {
    if inst.n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n: inst.n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best_set: Vec<usize> = Vec::new();
    let mut best_val = T::zero();
    for mask in 1u32..(1u32 << inst.n) {
        if mask.count_ones() as usize > inst.budget {
            continue;
        }
        let set: Vec<usize> = (0..inst.n).filter(|&j| mask & (1 << j) != 0).collect();
        let val = objective(inst, &set);
        if val > best_val || (val == best_val && set < best_set) {
            best_val = val;
            best_set = set;
        }
    }
    Ok(SelectionResult {
        selected: best_set,
        objective_value: best_val,
        gain_trace: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    fn two_node(delta: Q, budget: usize) -> SelectionInstance<Q> {
        SelectionInstance::new(
            vec![vec![q(1, 1), q(1, 2)], vec![q(1, 2), q(1, 1)]],
            vec![q(9, 10), q(1, 5)],
            delta,
            q(1, 1),
            budget,
        )
        .unwrap()
    }

    #[test]
    fn similarity_cases() {
        assert_eq!(similarity(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(
            similarity(&[q(3, 5), q(4, 5)], &[q(4, 5), q(3, 5)]).unwrap(),
            q(24, 25)
        );
        assert!((similarity(&[0.6, 0.8], &[0.8, 0.6]).unwrap() - 0.96f64).abs() < 1e-15);
        assert!(matches!(
            similarity(&[1.0], &[1.0, 2.0]),
            Err(Error::Dimension(1, 2))
        ));
    }

    #[test]
    fn objective_by_hand() {
        let inst = two_node(q(3, 10), 2);
        assert_eq!(objective(&inst, &[]), q(0, 1));
        assert_eq!(objective(&inst, &[0]), q(21, 10));
        assert_eq!(objective(&inst, &[0, 1]), q(5, 2));
    }

    #[test]
    fn greedy_two_node() {
        let inst = two_node(q(3, 10), 2);
        let r = greedy_select(&inst);
        assert_eq!(r.selected, vec![0, 1]);
        assert_eq!(r.gain_trace, vec![q(21, 10), q(2, 5)]);
        assert_eq!(r.objective_value, q(5, 2));
        assert_eq!(lazy_greedy_select(&inst), r);
        let b = brute_force_select(&inst).unwrap();
        assert_eq!(b.selected, vec![0, 1]);
        assert_eq!(b.objective_value, q(5, 2));
    }

    #[test]
    fn greedy_respects_cost_and_budget() {
        let expensive = two_node(q(10, 1), 2);
        assert!(greedy_select(&expensive).selected.is_empty());
        assert!(brute_force_select(&expensive).unwrap().selected.is_empty());
        let single = two_node(q(3, 10), 1);
        assert_eq!(greedy_select(&single).selected, vec![0]);
    }

    #[test]
    fn brute_force_edge_cases() {
        // no cost, non-negative w, K = n: everything is selected
        let inst = SelectionInstance::new(
            vec![
                vec![0.5, 0.1, 0.0],
                vec![0.1, 0.2, 0.3],
                vec![0.0, 0.3, 0.9],
            ],
            vec![0.0; 3],
            0.0,
            0.0,
            3,
        )
        .unwrap();
        assert_eq!(brute_force_select(&inst).unwrap().selected, vec![0, 1, 2]);
        let one = SelectionInstance::new(vec![vec![0.5]], vec![0.5], 0.1, 1.0, 1).unwrap();
        assert_eq!(brute_force_select(&one).unwrap().selected, vec![0]);
        let big =
            SelectionInstance::new(vec![vec![0.0; 21]; 21], vec![0.0; 21], 0.0, 0.0, 21).unwrap();
        assert!(matches!(
            brute_force_select(&big),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn invalid_instances() {
        let asym = SelectionInstance::new(
            vec![vec![1.0, 0.2], vec![0.3, 1.0]],
            vec![0.5, 0.5],
            0.3,
            1.0,
            2,
        );
        assert!(asym.is_err());
        let bad_phi = SelectionInstance::new(vec![vec![1.0]], vec![1.5], 0.3, 1.0, 1);
        assert!(bad_phi.is_err());
        let bad_k = SelectionInstance::new(vec![vec![1.0]], vec![0.5], 0.3, 1.0, 2);
        assert!(bad_k.is_err());
        let empty = SelectionInstance::<f64>::new(vec![], vec![], 0.3, 1.0, 0).unwrap();
        assert!(greedy_select(&empty).selected.is_empty());
    }
}
