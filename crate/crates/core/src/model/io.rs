use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BinSpec, DiscreteDistribution, LaminarInstance, ProductionInstance};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDoc {
    pub dist: DiscreteDistribution,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDoc {
    /// `cumulative[j][i]`: units of type `j` available by the start of day `i`.
    pub cumulative: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductionDoc {
    pub elements: Vec<ElementDoc>,
    pub types: Vec<usize>,
    pub days: Vec<usize>,
    pub production: ScheduleDoc,
    pub shipping: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaminarDoc {
    pub elements: Vec<ElementDoc>,
    pub bins: BinSpec,
}

/// One instance document as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceDoc {
    Production(ProductionDoc),
    Laminar(LaminarDoc),
}

impl InstanceDoc {
    fn dists(elements: &[ElementDoc]) -> Vec<DiscreteDistribution> {
        elements.iter().map(|e| e.dist.clone()).collect()
    }

    /// Every invariant violation, each prefixed by the offending field.
    pub fn violations(&self) -> Vec<String> {
        match self {
            InstanceDoc::Production(p) => ProductionInstance {
                elements: Self::dists(&p.elements),
                types: p.types.clone(),
                days: p.days.clone(),
                production: p.production.cumulative.clone(),
                shipping: p.shipping,
            }
            .violations(),
            InstanceDoc::Laminar(l) => LaminarInstance::violations(&Self::dists(&l.elements), &l.bins),
        }
    }

    pub fn into_instance(self) -> Result<Instance> {
        match self {
            InstanceDoc::Production(p) => Ok(Instance::Production(ProductionInstance::new(
                Self::dists(&p.elements),
                p.types,
                p.days,
                p.production.cumulative,
                p.shipping,
            )?)),
            InstanceDoc::Laminar(l) => Ok(Instance::Laminar(LaminarInstance::new(
                Self::dists(&l.elements),
                &l.bins,
            )?)),
        }
    }
}

fn element_docs(d: &[DiscreteDistribution]) -> Vec<ElementDoc> {
    d.iter().map(|dist| ElementDoc { dist: dist.clone() }).collect()
}

/// A validated instance in either form.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Production(ProductionInstance),
    Laminar(LaminarInstance),
}

impl Instance {
    /// The laminar form; production instances are converted.
    pub fn to_laminar(&self) -> Result<LaminarInstance> {
        match self {
            Instance::Production(p) => p.to_laminar(),
            Instance::Laminar(l) => Ok(l.clone()),
        }
    }

    pub fn as_production(&self) -> Option<&ProductionInstance> {
        match self {
            Instance::Production(p) => Some(p),
            Instance::Laminar(_) => None,
        }
    }

    pub fn num_elements(&self) -> usize {
        match self {
            Instance::Production(p) => p.num_buyers(),
            Instance::Laminar(l) => l.num_elements(),
        }
    }

    pub fn to_doc(&self) -> InstanceDoc {
        match self {
            Instance::Production(p) => InstanceDoc::Production(ProductionDoc {
                elements: element_docs(&p.elements),
                types: p.types.clone(),
                days: p.days.clone(),
                production: ScheduleDoc {
                    cumulative: p.production.clone(),
                },
                shipping: p.shipping,
            }),
            Instance::Laminar(l) => InstanceDoc::Laminar(LaminarDoc {
                elements: element_docs(l.elements()),
                bins: l.to_spec(),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("instance documents always serialize")
    }
}

impl From<ProductionInstance> for Instance {
    fn from(p: ProductionInstance) -> Self {
        Instance::Production(p)
    }
}

impl From<LaminarInstance> for Instance {
    fn from(l: LaminarInstance) -> Self {
        Instance::Laminar(l)
    }
}

pub fn parse_doc(json: &str) -> Result<InstanceDoc> {
    Ok(serde_json::from_str(json)?)
}

pub fn parse_instance(json: &str) -> Result<Instance> {
    parse_doc(json)?.into_instance()
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    parse_instance(&text)
}

/// Validates a raw document without building the instance.
pub fn validate_json(json: &str) -> Result<Vec<String>> {
    Ok(parse_doc(json)?.violations())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    const PROD: &str = r#"{
        "kind": "production",
        "elements": [{"dist": [[1.0, 1.0]]}, {"dist": [[0.0, 0.5], [2.0, 0.5]]}],
        "types": [0, 1],
        "days": [0, 0],
        "production": {"cumulative": [[1], [1]]},
        "shipping": 1
    }"#;

    #[test]
    fn production_round_trip() {
        let inst = parse_instance(PROD).unwrap();
        let again = parse_instance(&inst.to_json()).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn laminar_round_trip_is_fixed_point() {
        let json = r#"{"kind":"laminar","elements":[{"dist":[[1,1]]},{"dist":[[2,1]]}],
            "bins":{"cap":1,"children":[{"cap":4,"children":[{"element":0},{"element":1}]}]}}"#;
        let first = parse_instance(json).unwrap();
        let text = first.to_json();
        let second = parse_instance(&text).unwrap();
        assert_eq!(first, second);
        assert_eq!(text, second.to_json());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = PROD.replace("\"shipping\": 1", "\"shipping\": 1, \"extra\": 0");
        assert!(parse_instance(&bad).is_err());
        let bad = r#"{"kind":"laminar","elements":[{"dist":[[1,1]],"w":1}],"bins":{"cap":1,"children":[{"element":0}]}}"#;
        assert!(parse_instance(bad).is_err());
        let bad = r#"{"kind":"laminar","elements":[{"dist":[[1,1]]}],"bins":{"cap":1,"children":[{"element":0,"x":2}]}}"#;
        assert!(parse_instance(bad).is_err());
    }

    #[test]
    fn violations_are_reported_not_thrown() {
        let bad = PROD.replace("[[0.0, 0.5], [2.0, 0.5]]", "[[0.0, 0.5], [2.0, 0.6]]");
        let v = validate_json(&bad).unwrap();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("probabilities sum 1.1 ≠ 1"), "{v:?}");
        assert!(matches!(parse_instance(&bad), Err(Error::InvalidInstance(_))));
    }
}
