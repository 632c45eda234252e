//! Cell layout and user motion.
//!
//! Seven hexagonal cells: one at the origin and six neighbours at
//! `sqrt(3) * radius` on bearings 30 + k*60 degrees. Users move at constant
//! velocity inside an axis-aligned rectangle and bounce specularly off its
//! edges.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use rand_core::RngCore;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::handover::NUM_CELLS;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

/// Rectangle centred on the origin, given by its half-extents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub half_width_m: f64,
    pub half_height_m: f64,
}

impl Rect {
    pub fn new(half_width_m: f64, half_height_m: f64) -> Self {
        Self { half_width_m, half_height_m }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x.abs() <= self.half_width_m && p.y.abs() <= self.half_height_m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellLayout {
    pub centers: [Point; NUM_CELLS],
    pub radius_m: f64,
}

pub fn build_layout(radius_m: f64) -> CellLayout {
    debug_assert!(radius_m > 0.0);
    let ring = libm::sqrt(3.0) * radius_m;
    let centers = core::array::from_fn(|i| {
        if i == 0 {
            Point::ORIGIN
        } else {
            let bearing = (30.0 + 60.0 * (i - 1) as f64).to_radians();
            Point::new(ring * libm::cos(bearing), ring * libm::sin(bearing))
        }
    });
    CellLayout { centers, radius_m }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UeKinematics {
    pub position: Point,
    /// In `[0, 2pi)`.
    pub heading_rad: f64,
    pub speed_mps: f64,
}

/// Draws `n` users uniformly over `rect` with uniform headings.
pub fn place_users<R: RngCore>(n: usize, rect: Rect, speed_mps: f64, rng: &mut R) -> Vec<UeKinematics> {
    let xs = Uniform::new_inclusive(-rect.half_width_m, rect.half_width_m).expect("rect extents are finite");
    let ys = Uniform::new_inclusive(-rect.half_height_m, rect.half_height_m).expect("rect extents are finite");
    let headings = Uniform::new(0.0, TAU).expect("valid heading range");
    (0..n)
        .map(|_| {
            let x = xs.sample(rng);
            let y = ys.sample(rng);
            UeKinematics { position: Point::new(x, y), heading_rad: headings.sample(rng), speed_mps }
        })
        .collect()
}

fn normalize_heading(h: f64) -> f64 {
    let mut r = libm::fmod(h, TAU);
    if r < 0.0 {
        r += TAU;
    }
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Advances `ue` by `dt_ms`, mirror-reflecting off the edges of `rect`.
///
/// Several reflections within one step are unfolded iteratively, so the
/// result is exact for arbitrarily large steps.
pub fn step(ue: UeKinematics, dt_ms: f64, rect: Rect) -> UeKinematics {
    let dist = ue.speed_mps * dt_ms / 1000.0;
    if dist == 0.0 {
        return ue;
    }
    let (sin_h, cos_h) = libm::sincos(ue.heading_rad);
    let mut x = ue.position.x + dist * cos_h;
    let mut y = ue.position.y + dist * sin_h;
    let (hw, hh) = (rect.half_width_m, rect.half_height_m);

    let mut flip_x = false;
    let mut flip_y = false;
    // Each fold strictly shrinks the overshoot, so this terminates.
    loop {
        let mut folded = false;
        if x > hw {
            x = 2.0 * hw - x;
            flip_x = !flip_x;
            folded = true;
        } else if x < -hw {
            x = -2.0 * hw - x;
            flip_x = !flip_x;
            folded = true;
        }
        if y > hh {
            y = 2.0 * hh - y;
            flip_y = !flip_y;
            folded = true;
        } else if y < -hh {
            y = -2.0 * hh - y;
            flip_y = !flip_y;
            folded = true;
        }
        if !folded {
            break;
        }
    }

    let mut heading = ue.heading_rad;
    if flip_x {
        heading = PI - heading;
    }
    if flip_y {
        heading = -heading;
    }
    UeKinematics { position: Point::new(x, y), heading_rad: normalize_heading(heading), ..ue }
}

/// Index of the cell centre closest to `p` (ties to the lowest id).
pub fn nearest_cell(layout: &CellLayout, p: Point) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in layout.centers.iter().enumerate() {
        let d = c.distance(p);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}
