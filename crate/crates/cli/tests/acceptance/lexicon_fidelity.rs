use std::collections::BTreeSet;

use anyhow::ensure;
use sha2::{Digest, Sha256};

use scenario_forge::behavior::BehaviorToken;
use scenario_forge::counterfactual::{CompatibilityMatrix, PhiTable, COMPATIBILITY_JSON, PHI_JSON};

use crate::lexicon;

pub fn run() -> anyhow::Result<String> {
    let phi = PhiTable::embedded();
    let rows = lexicon::phi_rows();
    ensure!(phi.rows().len() == rows.len(), "{} alternative rows shipped, {} expected", phi.rows().len(), rows.len());
    for (t, row) in &rows {
        let got: BTreeSet<&str> = phi.alternatives(BehaviorToken::from_text(t)?).iter().map(|x| x.text()).collect();
        ensure!(&got == row, "alternatives of {t:?} differ: {got:?}");
    }

    let m = CompatibilityMatrix::embedded();
    let pairs = lexicon::incompatible_pairs();
    let mut checked = 0;
    for a in BehaviorToken::ALL {
        for b in BehaviorToken::ALL {
            ensure!(m.incompatible(a, b) == m.incompatible(b, a), "asymmetric pair {} / {}", a.text(), b.text());
            ensure!(
                m.incompatible(a, b) == lexicon::is_incompatible(&pairs, a.text(), b.text()),
                "compatibility of {} / {} differs",
                a.text(),
                b.text()
            );
            checked += 1;
        }
    }
    let hex = |s: &str| format!("{:x}", Sha256::digest(s.as_bytes()));
    ensure!(hex(PHI_JSON) == "25b2c45ff67aef45ea8e6c3be70fb73b371dfc7a5edec77be60b1ec659fff468", "alternatives data changed");
    ensure!(
        hex(COMPATIBILITY_JSON) == "d63c8df6622a25bdc5357b7e3efd028ecc529ba544032c35354d7fc668481b4c",
        "compatibility data changed"
    );
    Ok(format!("{} alternative rows, {checked} ordered pairs, {} incompatible pairs", rows.len(), pairs.len()))
}
