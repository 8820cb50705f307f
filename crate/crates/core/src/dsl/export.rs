//! Machine-readable JSON form of a compiled model.

use serde::Serialize;

use super::compile::Model;
use crate::hierarchy::Decomposition;
use crate::ltis::LinSystem;
use crate::wd::{LabeledBox, WiringDiagram};

#[derive(Serialize)]
struct Named<'a, T: Serialize> {
    name: &'a str,
    #[serde(flatten)]
    value: &'a T,
}

#[derive(Serialize)]
struct Export<'a> {
    boxes: &'a [LabeledBox],
    systems: Vec<Named<'a, LinSystem>>,
    diagrams: Vec<Named<'a, WiringDiagram>>,
    implementations: Vec<&'a Decomposition>,
}

fn named<T: Serialize>(items: &[(String, T)]) -> Vec<Named<'_, T>> {
    items.iter().map(|(name, value)| Named { name, value }).collect()
}

pub fn to_json_value(model: &Model) -> serde_json::Value {
    let e = Export {
        boxes: &model.boxes,
        systems: named(&model.systems),
        diagrams: named(&model.diagrams),
        implementations: model.implementations.iter().map(|(_, d)| d).collect(),
    };
    serde_json::to_value(e).expect("model values serialize")
}

pub fn to_json(model: &Model) -> String {
    serde_json::to_string_pretty(&to_json_value(model)).expect("model values serialize")
}
