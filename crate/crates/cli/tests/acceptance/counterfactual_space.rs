use anyhow::ensure;

use scenario_forge::behavior::ClassifierParams;
use scenario_forge::counterfactual::{pipeline, ContextFilter, Tables};

use crate::cf_oracle;

pub fn run() -> anyhow::Result<String> {
    let p = ClassifierParams::default();
    let tables = Tables::embedded();
    let maps = cf_oracle::maps();
    let cases = cf_oracle::random_cases(200, 0);
    let mut mismatches = Vec::new();
    let mut sets = 0;
    for case in &cases {
        let map = &maps.iter().find(|m| m.0 == case.map).expect("known map").1;
        let got = pipeline(&case.gt, &case.traj, map, &tables, &p)?.space;
        let want = cf_oracle::oracle(&case.gt, &ContextFilter::new(&case.traj, map, &p));
        sets += want.len();
        if got != want {
            mismatches.push(case.label.clone());
        }
    }
    ensure!(mismatches.is_empty(), "{} of {} cases differ, first {}", mismatches.len(), cases.len(), mismatches[0]);
    Ok(format!("{} cases on {} maps, {sets} sets", cases.len(), maps.len()))
}
