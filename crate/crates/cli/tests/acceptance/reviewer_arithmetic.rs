use anyhow::ensure;

use scenario_forge::fixtures::{straight_path, DT};
use scenario_forge::geometry::Point;
use scenario_forge::reviewer::adjust;
use scenario_forge::synth::GuidanceConfig;
use scenario_forge::trajectory::Trajectory;
use scenario_forge::validation::{CollisionFinding, NodeReport, OffRoad};

fn report(aligned: bool, off_road: bool, collision: bool) -> NodeReport {
    let c = if collision { vec![CollisionFinding { frame: 3, partner: 9 }] } else { Vec::new() };
    NodeReport::new(aligned, c, OffRoad { off_road, fraction: if off_road { 0.8 } else { 0.0 } })
}

fn cf(cf_weight: f64, on_road_weight: Option<f64>, no_collision_weight: Option<f64>) -> GuidanceConfig {
    GuidanceConfig::Cf { cf_weight, on_road_weight, no_collision_weight }
}

fn traj(y: f64) -> Trajectory {
    straight_path(Point::new(20.0, y), 0.0, 10.0, 81, DT)
}

/// Feeds one node's reports through `adjust` and compares every config, the start included.
fn replay(start: GuidanceConfig, steps: &[(NodeReport, Trajectory)], expected: &[GuidanceConfig]) -> anyhow::Result<()> {
    let mut cur = start;
    let mut seen = vec![cur.clone()];
    for (r, t) in steps {
        cur = adjust(&cur, r, t).0;
        seen.push(cur.clone());
    }
    ensure!(seen == expected, "config sequence {seen:?} != {expected:?}");
    Ok(())
}

pub fn run() -> anyhow::Result<String> {
    // Two cars asked to change lanes. Both miss at first; the second car then lands its
    // change and is pinned to that trajectory while the ego keeps raising its weight.
    let (ego_t, car_t) = (traj(0.0), traj(3.5));
    replay(
        GuidanceConfig::default(),
        &[(report(false, false, false), ego_t.clone()), (report(false, false, false), ego_t.clone()), (report(true, false, false), ego_t.clone())],
        &[cf(2.5, None, None), cf(3.5, None, None), cf(4.5, None, None), GuidanceConfig::pre_traj(ego_t.clone())],
    )?;
    replay(
        GuidanceConfig::default(),
        &[(report(false, false, false), car_t.clone()), (report(true, false, false), car_t.clone()), (report(true, false, false), ego_t.clone())],
        &[cf(2.5, None, None), cf(3.5, None, None), GuidanceConfig::pre_traj(car_t.clone()), GuidanceConfig::pre_traj(car_t.clone())],
    )?;
    ensure!(matches!(GuidanceConfig::pre_traj(car_t.clone()), GuidanceConfig::PreTraj { pre_traj_weight, .. } if pre_traj_weight == 1e4));

    // Ego misses its behavior twice while a third car drifts off the road twice.
    replay(
        GuidanceConfig::default(),
        &[(report(false, false, false), ego_t.clone()), (report(false, false, false), ego_t.clone())],
        &[cf(2.5, None, None), cf(3.5, None, None), cf(4.5, None, None)],
    )?;
    replay(
        GuidanceConfig::default(),
        &[(report(true, true, false), car_t.clone()), (report(true, true, false), car_t.clone())],
        &[cf(2.5, None, None), cf(2.5, Some(1e3), None), cf(2.5, Some(3e3), None)],
    )?;

    // Multiple failures apply together; a pinned trajectory that fails gains weight.
    replay(GuidanceConfig::default(), &[(report(false, false, true), ego_t.clone())], &[cf(2.5, None, None), cf(3.5, None, Some(1e3))])?;
    let pinned = GuidanceConfig::pre_traj(car_t.clone());
    replay(
        pinned.clone(),
        &[(report(true, false, true), car_t.clone()), (report(true, false, false), car_t.clone())],
        &[pinned, GuidanceConfig::PreTraj { pre_traj_weight: 3e4, reference: car_t.clone() }, GuidanceConfig::PreTraj { pre_traj_weight: 3e4, reference: car_t }],
    )?;
    Ok("both worked sequences and the mixed cases replay exactly".to_string())
}
