use anyhow::ensure;

use scenario_forge::behavior::{describe, BehaviorSet, ClassifierParams};

use crate::golden;

pub fn run() -> anyhow::Result<String> {
    let p = ClassifierParams::default();
    let cases = golden::cases();
    ensure!(cases.len() >= 25, "only {} cases", cases.len());
    let mut wrong = Vec::new();
    for c in &cases {
        let expected = BehaviorSet::parse(&c.expected.join(","))?;
        let got = describe(&c.traj, &c.map, &p);
        if got != expected {
            wrong.push(format!("{}: got {:?}", c.name, got.sorted_texts()));
        }
    }
    ensure!(wrong.is_empty(), "{} mismatches: {}", wrong.len(), wrong.join("; "));
    Ok(format!("{} trajectories", cases.len()))
}
