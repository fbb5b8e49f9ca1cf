use std::f64::consts::PI;

use anyhow::ensure;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scenario_forge::geometry::Point;
use scenario_forge::trajectory::{sat_overlap, OrientedBox};

const MARGIN: f64 = 1e-3;
const GRID: usize = 61;

#[derive(Clone, Copy)]
struct Rect {
    c: (f64, f64),
    h: f64,
    hl: f64,
    hw: f64,
}

impl Rect {
    fn resized(self, d: f64) -> Rect {
        Rect { hl: self.hl + d, hw: self.hw + d, ..self }
    }

    fn contains(&self, p: (f64, f64)) -> bool {
        let (dx, dy) = (p.0 - self.c.0, p.1 - self.c.1);
        let (s, c) = self.h.sin_cos();
        (dx * c + dy * s).abs() <= self.hl && (-dx * s + dy * c).abs() <= self.hw
    }

    /// Grid over the box, edges and corners included.
    fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (s, c) = self.h.sin_cos();
        (0..GRID).flat_map(move |i| {
            (0..GRID).map(move |j| {
                let u = -self.hl + 2.0 * self.hl * i as f64 / (GRID - 1) as f64;
                let v = -self.hw + 2.0 * self.hw * j as f64 / (GRID - 1) as f64;
                (self.c.0 + u * c - v * s, self.c.1 + u * s + v * c)
            })
        })
    }
}

fn sampled_overlap(a: Rect, b: Rect) -> bool {
    a.samples().any(|p| b.contains(p)) || b.samples().any(|p| a.contains(p))
}

fn random_rect(rng: &mut ChaCha8Rng) -> Rect {
    Rect {
        c: (rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)),
        h: rng.random_range(-PI..PI),
        hl: rng.random_range(0.3..3.0),
        hw: rng.random_range(0.3..1.5),
    }
}

pub fn run() -> anyhow::Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (mut compared, mut overlapping, mut skipped) = (0, 0, 0);
    for i in 0..1000 {
        let (a, b) = (random_rect(&mut rng), random_rect(&mut rng));
        // Pairs whose answer flips within the margin are too close to call by sampling.
        if sampled_overlap(a.resized(MARGIN), b.resized(MARGIN)) != sampled_overlap(a.resized(-MARGIN), b.resized(-MARGIN)) {
            skipped += 1;
            continue;
        }
        let want = sampled_overlap(a, b);
        let ob = |r: Rect| OrientedBox::new(Point::new(r.c.0, r.c.1), r.h, r.hl, r.hw);
        let got = sat_overlap(&ob(a), &ob(b));
        ensure!(got == want, "pair {i}: SAT says {got}, sampling says {want}");
        compared += 1;
        overlapping += usize::from(want);
    }
    ensure!(skipped <= 50, "{skipped} pairs fell inside the margin");
    ensure!(overlapping > 100 && compared - overlapping > 100, "unbalanced draw: {overlapping} of {compared} overlap");
    Ok(format!("{compared} pairs agree, {overlapping} overlapping, {skipped} within {MARGIN} m"))
}
