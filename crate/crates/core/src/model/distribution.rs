use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance on the total probability mass of a distribution.
pub const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

/// A finite value distribution, atoms sorted strictly ascending by value.
///
/// Values may be negative; shifted sub-problems rely on that.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    atoms: Vec<Atom>,
}

impl DiscreteDistribution {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let dist = Self::new_unchecked(atoms);
        let violations = dist.violations();
        if violations.is_empty() {
            Ok(dist)
        } else {
            Err(Error::InvalidInstance(violations))
        }
    }

    /// Builds a distribution without checking its invariants; pair with [`violations`](Self::violations).
    pub fn new_unchecked(atoms: Vec<(f64, f64)>) -> Self {
        Self {
            atoms: atoms
                .into_iter()
                .map(|(value, prob)| Atom { value, prob })
                .collect(),
        }
    }

    pub fn deterministic(value: f64) -> Self {
        Self::new_unchecked(vec![(value, 1.0)])
    }

    /// Uniform over the given values, which must be strictly increasing.
    pub fn uniform(values: &[f64]) -> Result<Self> {
        let p = 1.0 / values.len() as f64;
        Self::new(values.iter().map(|&v| (v, p)).collect())
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.atoms.is_empty() {
            out.push("distribution has no atoms".to_string());
            return out;
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if !a.value.is_finite() {
                out.push(format!("atom {i} has non-finite value {}", a.value));
            }
            if !(a.prob > 0.0 && a.prob <= 1.0) {
                out.push(format!("atom {i} has probability {} outside (0,1]", a.prob));
            }
        }
        for (i, w) in self.atoms.windows(2).enumerate() {
            if w[1].value <= w[0].value {
                out.push(format!(
                    "atom values not strictly increasing at {}: {} then {}",
                    i + 1,
                    w[0].value,
                    w[1].value
                ));
            }
        }
        let sum = self.total_mass();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            out.push(format!("probabilities sum {sum} ≠ 1"));
        }
        out
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.prob).sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.prob * a.value).sum()
    }

    pub fn min_value(&self) -> f64 {
        self.atoms[0].value
    }

    pub fn max_value(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].value
    }

    /// `Pr[v > price]`.
    pub fn tail_above(&self, price: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.value > price)
            .map(|a| a.prob)
            .sum()
    }

    /// `Pr[v = price]`.
    pub fn mass_at(&self, price: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.value == price)
            .map(|a| a.prob)
            .sum()
    }

    /// Inverse-CDF sample from a uniform draw in `[0, 1)`; returns the atom index.
    pub fn sample_index(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, a) in self.atoms.iter().enumerate() {
            acc += a.prob;
            if u < acc {
                return i;
            }
        }
        self.atoms.len() - 1
    }

    /// Applies `f` to every atom value, merging atoms that land on the same value.
    pub fn map_values(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        let mut atoms: Vec<(f64, f64)> = self.atoms.iter().map(|a| (f(a.value), a.prob)).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        Self::new_unchecked(merged)
    }
}

impl Serialize for DiscreteDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.atoms.iter().map(|a| [a.value, a.prob]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DiscreteDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(deserializer)?;
        Ok(Self::new_unchecked(pairs.into_iter().map(|[v, p]| (v, p)).collect()))
    }
}
