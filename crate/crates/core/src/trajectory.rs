//! Timestamped planar trajectories, kinematic derivatives and oriented-box overlap tests.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{normalize_heading, wrap_angle, Point};

#[derive(Debug, Error, PartialEq)]
pub enum TrajectoryError {
    #[error("trajectory has no samples")]
    Empty,
    #[error("timestamps must be strictly increasing (sample {0})")]
    NonIncreasingTime(usize),
    #[error("sample {0} has a non-finite value")]
    NonFinite(usize),
    #[error("operation needs at least {needed} samples, trajectory has {got}")]
    TooShort { needed: usize, got: usize },
    #[error("sample index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("footprint dimensions must be strictly positive")]
    BadFootprint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Sample {
    pub fn new(t: f64, x: f64, y: f64, heading: f64) -> Self {
        Self { t, x, y, heading }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    samples: Vec<Sample>,
    dt: f64,
}

impl Trajectory {
    /// Builds a trajectory, wrapping headings to [−π, π). `dt` is the nominal interval.
    pub fn new(mut samples: Vec<Sample>, dt: f64) -> Result<Self, TrajectoryError> {
        if samples.is_empty() {
            return Err(TrajectoryError::Empty);
        }
        for (i, s) in samples.iter_mut().enumerate() {
            if ![s.t, s.x, s.y, s.heading].iter().all(|v| v.is_finite()) {
                return Err(TrajectoryError::NonFinite(i));
            }
            s.heading = normalize_heading(s.heading);
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(TrajectoryError::NonIncreasingTime(i + 1));
        }
        Ok(Self { samples, dt })
    }

    /// Builds a trajectory from positions only; each heading follows the
    /// displacement to the next sample (the last one repeats its predecessor).
    pub fn from_positions(points: &[(f64, f64, f64)], dt: f64) -> Result<Self, TrajectoryError> {
        let n = points.len();
        let samples = (0..n)
            .map(|i| {
                let (t, x, y) = points[i];
                let heading = if n < 2 {
                    0.0
                } else {
                    let (a, b) = if i + 1 < n { (points[i], points[i + 1]) } else { (points[n - 2], points[n - 1]) };
                    (b.2 - a.2).atan2(b.1 - a.1)
                };
                Sample::new(t, x, y, heading)
            })
            .collect();
        Self::new(samples, dt)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        &self.samples[self.samples.len() - 1]
    }

    pub fn positions(&self) -> impl Iterator<Item = Point> + '_ {
        self.samples.iter().map(Sample::position)
    }

    fn require(&self, needed: usize) -> Result<(), TrajectoryError> {
        if self.samples.len() < needed {
            Err(TrajectoryError::TooShort { needed, got: self.samples.len() })
        } else {
            Ok(())
        }
    }

    pub fn speeds(&self) -> Result<Vec<f64>, TrajectoryError> {
        speeds(self)
    }
}

/// Finite-difference speed per interval (length T−1).
pub fn speeds(traj: &Trajectory) -> Result<Vec<f64>, TrajectoryError> {
    traj.require(2)?;
    Ok(traj
        .samples
        .windows(2)
        .map(|w| w[0].position().distance(w[1].position()) / (w[1].t - w[0].t))
        .collect())
}

/// Distance between the first and last positions.
pub fn total_displacement(traj: &Trajectory) -> f64 {
    traj.first().position().distance(traj.last().position())
}

/// Moving average of the interval speeds over `window`, then consecutive differences.
pub fn smoothed_speed_deltas(traj: &Trajectory, window: usize) -> Result<Vec<f64>, TrajectoryError> {
    let window = window.max(1);
    traj.require(window + 1)?;
    let v = speeds(traj)?;
    let avg: Vec<f64> = v.windows(window).map(|w| w.iter().sum::<f64>() / window as f64).collect();
    Ok(avg.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Sum of per-step heading changes, each wrapped to (−π, π]. Positive is leftward.
pub fn cumulative_heading_change(traj: &Trajectory) -> Result<f64, TrajectoryError> {
    traj.require(2)?;
    Ok(traj.samples.windows(2).map(|w| wrap_angle(w[1].heading - w[0].heading)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub length: f64,
    pub width: f64,
}

impl Footprint {
    pub fn new(length: f64, width: f64) -> Result<Self, TrajectoryError> {
        if length > 0.0 && width > 0.0 && length.is_finite() && width.is_finite() {
            Ok(Self { length, width })
        } else {
            Err(TrajectoryError::BadFootprint)
        }
    }
}

impl Default for Footprint {
    fn default() -> Self {
        Self { length: 4.5, width: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub center: Point,
    pub heading: f64,
    pub half_length: f64,
    pub half_width: f64,
}

impl OrientedBox {
    pub fn new(center: Point, heading: f64, half_length: f64, half_width: f64) -> Self {
        Self { center, heading, half_length, half_width }
    }

    /// Unit vectors along the box length and width.
    pub fn axes(&self) -> [Point; 2] {
        let fwd = Point::from_heading(self.heading);
        [fwd, Point::new(-fwd.y, fwd.x)]
    }

    /// Corners counter-clockwise starting front-left.
    pub fn corners(&self) -> [Point; 4] {
        let [u, v] = self.axes();
        let (l, w) = (self.half_length, self.half_width);
        [
            self.center + u * l + v * w,
            self.center - u * l + v * w,
            self.center - u * l - v * w,
            self.center + u * l - v * w,
        ]
    }

    fn project(&self, axis: Point) -> (f64, f64) {
        let c = self.center.dot(axis);
        let [u, v] = self.axes();
        let r = self.half_length * u.dot(axis).abs() + self.half_width * v.dot(axis).abs();
        (c - r, c + r)
    }
}

pub fn oriented_box_at(traj: &Trajectory, index: usize, fp: Footprint) -> Result<OrientedBox, TrajectoryError> {
    let s = traj
        .samples
        .get(index)
        .ok_or(TrajectoryError::IndexOutOfRange { index, len: traj.len() })?;
    Ok(OrientedBox::new(s.position(), s.heading, fp.length / 2.0, fp.width / 2.0))
}

/// Separating-axis overlap test over the two edge normals of each box. Touching counts as overlap.
pub fn sat_overlap(a: &OrientedBox, b: &OrientedBox) -> bool {
    let scale = 1.0 + a.center.norm().max(b.center.norm());
    let tol = 1e-12 * scale;
    a.axes().into_iter().chain(b.axes()).all(|axis| {
        let (amin, amax) = a.project(axis);
        let (bmin, bmax) = b.project(axis);
        amax + tol >= bmin && bmax + tol >= amin
    })
}
