//! Ironed virtual values for discrete distributions and the revenue-to-welfare transform.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DiscreteDistribution, Instance, ProductionInstance};

/// Ironed virtual value of every atom of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IronedTransform {
    #[serde(skip)]
    pub source: DiscreteDistribution,
    /// `(value, ironed virtual value)` per atom, ascending by value.
    pub mapping: Vec<(f64, f64)>,
}

impl IronedTransform {
    pub fn ironed(&self, value: f64) -> Option<f64> {
        self.mapping.iter().find(|&&(v, _)| v == value).map(|&(_, phi)| phi)
    }

    /// The distribution of the ironed virtual value, with colliding values merged.
    pub fn distribution(&self) -> DiscreteDistribution {
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(self.mapping.len());
        for (&(_, phi), a) in self.mapping.iter().zip(self.source.atoms()) {
            match atoms.last_mut() {
                Some(last) if last.0 == phi => last.1 += a.prob,
                _ => atoms.push((phi, a.prob)),
            }
        }
        DiscreteDistribution::new_unchecked(atoms)
    }
}

/// Raw discrete virtual values `(R(q_i) − R(q_{i+1})) / (q_i − q_{i+1})` with `q_i = Pr[v ≥ v_i]`.
pub fn virtual_values(d: &DiscreteDistribution) -> Vec<f64> {
    let pts = revenue_points(d);
    let k = d.len();
    // pts[j] is the point of atom k-j; atom i spans pts[k-1-i] .. pts[k-i]
    (0..k)
        .map(|i| {
            let (a, b) = (pts[k - 1 - i], pts[k - i]);
            (b.1 - a.1) / (b.0 - a.0)
        })
        .collect()
}

/// `(0,0)` then `(q_i, q_i·v_i)` from the top atom down.
fn revenue_points(d: &DiscreteDistribution) -> Vec<(f64, f64)> {
    let mut pts = vec![(0.0, 0.0)];
    let mut q = 0.0;
    for a in d.atoms().iter().rev() {
        q += a.prob;
        pts.push((q, q * a.value));
    }
    pts
}

/// Concavifies the revenue curve in quantile space; each atom gets the slope of the hull
/// segment over its quantile interval.
pub fn iron(d: &DiscreteDistribution) -> Result<IronedTransform> {
    let mut bad = d.violations();
    if let Some(a) = d.atoms().iter().find(|a| a.value < 0.0) {
        bad.push(format!("negative value {} has no revenue semantics", a.value));
    }
    if !bad.is_empty() {
        return Err(Error::InvalidInstance(bad));
    }
    let pts = revenue_points(d);
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..pts.len() {
        while hull.len() >= 2 {
            let (o, a) = (pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]]);
            let b = pts[i];
            let cross = (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let k = d.len();
    let mut phi = vec![0.0; k];
    for w in hull.windows(2) {
        let (a, b) = (pts[w[0]], pts[w[1]]);
        let slope = (b.1 - a.1) / (b.0 - a.0);
        // points w[0]+1 ..= w[1] close the quantile intervals of atoms k-1-w[0] down to k-w[1]
        for j in w[0] + 1..=w[1] {
            phi[k - j] = slope;
        }
    }
    Ok(IronedTransform {
        source: d.clone(),
        mapping: d.atoms().iter().map(|a| a.value).zip(phi).collect(),
    })
}

/// Replaces every value by its ironed virtual value; structure and probabilities are unchanged.
pub fn revenue_transform(inst: &Instance) -> Result<Instance> {
    let map = |ds: &[DiscreteDistribution]| -> Result<Vec<DiscreteDistribution>> {
        ds.iter().map(|d| Ok(iron(d)?.distribution())).collect()
    };
    Ok(match inst {
        Instance::Laminar(l) => Instance::Laminar(l.with_distributions(map(l.elements())?)?),
        Instance::Production(p) => Instance::Production(ProductionInstance {
            elements: map(&p.elements)?,
            ..p.clone()
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_uniform() {
        let t = iron(&DiscreteDistribution::uniform(&[1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(t.mapping, vec![(1.0, 0.0), (2.0, 2.0)]);
    }

    #[test]
    fn deterministic_is_identity() {
        let t = iron(&DiscreteDistribution::deterministic(5.0)).unwrap();
        assert_eq!(t.mapping, vec![(5.0, 5.0)]);
    }

    #[test]
    fn non_regular_example_is_ironed() {
        let d = DiscreteDistribution::new(vec![(1.0, 0.45), (2.0, 0.1), (10.0, 0.45)]).unwrap();
        let raw = virtual_values(&d);
        assert!(raw[1] < raw[0], "{raw:?}");
        let t = iron(&d).unwrap();
        assert!((t.mapping[0].1 + 70.0 / 11.0).abs() < 1e-9);
        assert_eq!(t.mapping[0].1, t.mapping[1].1);
        assert!((t.mapping[2].1 - 10.0).abs() < 1e-12);
        let merged = t.distribution();
        assert_eq!(merged.len(), 2);
        assert!((merged.atoms()[0].prob - 0.55).abs() < 1e-12);
    }

    #[test]
    fn negative_values_rejected() {
        let d = DiscreteDistribution::uniform(&[-1.0, 1.0]).unwrap();
        assert!(matches!(iron(&d), Err(Error::InvalidInstance(_))));
    }
}
