use std::collections::BTreeMap;

use super::ParetoBoundary;
use crate::model::StrategyProfile;

/// CSV text with header `I1_bits,I2_bits,strategy_id` (plus `stage` when given)
/// and the map from strategy id to profile for the sidecar file.
pub fn boundary_csv(
    boundary: &ParetoBoundary,
    stage: Option<usize>,
) -> (String, BTreeMap<String, StrategyProfile>) {
    let mut csv = String::from("I1_bits,I2_bits,strategy_id");
    if stage.is_some() {
        csv.push_str(",stage");
    }
    csv.push('\n');
    let mut strategies = BTreeMap::new();
    for (k, (p, s)) in boundary
        .points()
        .iter()
        .zip(boundary.strategies())
        .enumerate()
    {
        let id = match s {
            Some(profile) => {
                let id = format!("s{k}");
                strategies.insert(id.clone(), profile.clone());
                id
            }
            None => String::new(),
        };
        csv.push_str(&format!("{},{},{}", p.get(0), p.get(1), id));
        if let Some(st) = stage {
            csv.push_str(&format!(",{st}"));
        }
        csv.push('\n');
    }
    (csv, strategies)
}
