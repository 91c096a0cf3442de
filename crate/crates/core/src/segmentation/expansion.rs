//! Multi-label energy minimization by alpha-expansion moves.

use super::maxflow::FlowNetwork;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pairwise MRF energy
/// `E(x) = Σ_i U_i(x_i) + Σ_{(i,j)} w_ij · d(x_i, x_j)`.
///
/// `d` defaults to the Potts distance `[a != b]`; a custom label distance
/// must be a metric for expansion moves to be graph-representable.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel<T> {
    labels: usize,
    /// Row `i` holds the cost of each label for node `i`.
    unary: Vec<Vec<T>>,
    edges: Vec<(usize, usize, T)>,
    distance: Option<Vec<Vec<T>>>,
}

impl<T: Scalar> EnergyModel<T> {
    pub fn new(labels: usize, unary: Vec<Vec<T>>, edges: Vec<(usize, usize, T)>) -> Result<Self> {
        if labels == 0 {
            return Err(Error::InvalidValue(
                "energy model needs at least one label".into(),
            ));
        }
        let n = unary.len();
        if let Some(row) = unary.iter().find(|r| r.len() != labels) {
            return Err(Error::SizeMismatch {
                expected: format!("{labels} unary costs"),
                actual: format!("{}", row.len()),
            });
        }
        if unary.iter().flatten().any(|v| !v.is_finite_value()) {
            return Err(Error::InvalidValue("non-finite unary cost".into()));
        }
        for &(i, j, w) in &edges {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidValue(format!("bad edge ({i}, {j})")));
            }
            if !(w >= T::zero()) || !w.is_finite_value() {
                return Err(Error::NotMetric(format!("edge weight {w:?} must be >= 0")));
            }
        }
        Ok(EnergyModel {
            labels,
            unary,
            edges,
            distance: None,
        })
    }

    /// Replaces the Potts distance with a custom label distance.
    pub fn with_distance(mut self, distance: Vec<Vec<T>>) -> Result<Self> {
        check_metric(&distance, self.labels)?;
        self.distance = Some(distance);
        Ok(self)
    }

    pub fn label_count(&self) -> usize {
        self.labels
    }

    pub fn node_count(&self) -> usize {
        self.unary.len()
    }

    pub fn unary(&self) -> &[Vec<T>] {
        &self.unary
    }

    pub fn edges(&self) -> &[(usize, usize, T)] {
        &self.edges
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> T {
        match &self.distance {
            Some(d) => d[a][b],
            None if a == b => T::zero(),
            None => T::one(),
        }
    }

    /// Per-node label with the smallest unary cost (smallest label on ties).
    pub fn unary_argmin(&self) -> Vec<usize> {
        self.unary
            .iter()
            .map(|row| (1..row.len()).fold(0, |best, l| if row[l] < row[best] { l } else { best }))
            .collect()
    }
}

fn check_metric<T: Scalar>(d: &[Vec<T>], labels: usize) -> Result<()> {
    if d.len() != labels || d.iter().any(|r| r.len() != labels) {
        return Err(Error::NotMetric(format!(
            "distance must be {labels}x{labels}"
        )));
    }
    for a in 0..labels {
        if d[a][a] != T::zero() {
            return Err(Error::NotMetric(format!("d({a}, {a}) != 0")));
        }
        for b in 0..labels {
            if d[a][b] != d[b][a] || d[a][b] < T::zero() {
                return Err(Error::NotMetric(format!(
                    "d({a}, {b}) not symmetric non-negative"
                )));
            }
            for c in 0..labels {
                if d[a][b] + d[b][c] < d[a][c] {
                    return Err(Error::NotMetric(format!(
                        "triangle ({a}, {b}, {c}) violated"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Exact energy of a complete labeling.
pub fn energy_of<T: Scalar>(model: &EnergyModel<T>, labeling: &[usize]) -> T {
    let unary = model
        .unary
        .iter()
        .zip(labeling)
        .fold(T::zero(), |acc, (row, &l)| acc + row[l]);
    model.edges.iter().fold(unary, |acc, &(i, j, w)| {
        let (a, b) = (labeling[i], labeling[j]);
        if a == b {
            acc
        } else {
            acc + w * model.distance(a, b)
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion<T> {
    pub labeling: Vec<usize>,
    pub energy: T,
    /// Energy of the initial labeling followed by the energy after each
    /// accepted move; strictly decreasing.
    pub trace: Vec<T>,
    pub cycles: usize,
}

/// Best labeling reachable from `current` in one `alpha` expansion move.
fn expansion_move<T: Scalar>(
    model: &EnergyModel<T>,
    current: &[usize],
    alpha: usize,
) -> Vec<usize> {
    let n = model.node_count();
    let (source, sink) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2);
    // x_i = 1 switches node i to alpha; coefficient of x_i in the move energy
    let mut linear: Vec<T> = (0..n)
        .map(|i| model.unary[i][alpha] - model.unary[i][current[i]])
        .collect();
    for &(i, j, w) in &model.edges {
        let (li, lj) = (current[i], current[j]);
        let a = w * model.distance(li, lj);
        let b = w * model.distance(li, alpha);
        let c = w * model.distance(alpha, lj);
        // E(x_i, x_j) = A + (C - A) x_i + (D - C) x_j + (B + C - A - D)(1 - x_i) x_j, D = 0
        linear[i] = linear[i] + (c - a);
        linear[j] = linear[j] - c;
        net.add_edge(i, j, b + c - a);
    }
    for (i, &k) in linear.iter().enumerate() {
        if k > T::zero() {
            net.add_edge(source, i, k);
        } else {
            net.add_edge(i, sink, T::zero() - k);
        }
    }
    let cut = net.max_flow(source, sink);
    (0..n)
        .map(|i| {
            if cut.source_side[i] {
                current[i]
            } else {
                alpha
            }
        })
        .collect()
}

/// Alpha-expansion from `init`. Cycles over labels, keeps a move only when
/// it strictly lowers the energy, and stops after a full cycle without
/// improvement.
pub fn alpha_expansion<T: Scalar>(model: &EnergyModel<T>, init: &[usize]) -> Result<Expansion<T>> {
    if init.len() != model.node_count() {
        return Err(Error::SizeMismatch {
            expected: format!("{} labels", model.node_count()),
            actual: format!("{}", init.len()),
        });
    }
    if let Some(&l) = init.iter().find(|&&l| l >= model.labels) {
        return Err(Error::InvalidValue(format!("label {l} out of range")));
    }
    if let Some(d) = &model.distance {
        check_metric(d, model.labels)?;
    }
    let mut labeling = init.to_vec();
    let mut energy = energy_of(model, &labeling);
    let mut trace = vec![energy];
    let mut cycles = 0;
    loop {
        cycles += 1;
        let mut improved = false;
        for alpha in 0..model.labels {
            let candidate = expansion_move(model, &labeling, alpha);
            let e = energy_of(model, &candidate);
            if e < energy {
                labeling = candidate;
                energy = e;
                trace.push(e);
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(Expansion {
        labeling,
        energy,
        trace,
        cycles,
    })
}

/// Exhaustive minimum over all labelings; the first minimizer in
/// lexicographic order is returned. Refuses more than `limit` labelings.
pub fn exhaustive_minimum<T: Scalar>(
    model: &EnergyModel<T>,
    limit: usize,
) -> Result<(Vec<usize>, T)> {
    let n = model.node_count();
    let total = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(model.labels));
    match total {
        Some(t) if t <= limit => {}
        _ => return Err(Error::TooLarge { n, limit }),
    }
    let mut labeling = vec![0; n];
    let mut best = (labeling.clone(), energy_of(model, &labeling));
    loop {
        // odometer increment, last node fastest
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(best);
            }
            k -= 1;
            labeling[k] += 1;
            if labeling[k] < model.labels {
                break;
            }
            labeling[k] = 0;
        }
        let e = energy_of(model, &labeling);
        if e < best.1 {
            best = (labeling.clone(), e);
        }
    }
}
