//! Built-in synthetic test images, all with values in `[0, 1]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::image::ScalarImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phantom {
    SheppLogan,
    /// Smoothly shaded ellipses with sharp boundaries.
    Shaded,
    /// Ramps, a smooth bump and a few flat inserts.
    Ramps,
}

impl Phantom {
    pub const ALL: [Phantom; 3] = [Phantom::SheppLogan, Phantom::Shaded, Phantom::Ramps];

    pub fn name(&self) -> &'static str {
        match self {
            Phantom::SheppLogan => "shepp-logan",
            Phantom::Shaded => "shaded",
            Phantom::Ramps => "ramps",
        }
    }

    pub fn render(&self, rows: usize, cols: usize) -> ScalarImage {
        match self {
            Phantom::SheppLogan => shepp_logan(rows, cols),
            Phantom::Shaded => shaded(rows, cols),
            Phantom::Ramps => ramps(rows, cols),
        }
    }
}

impl fmt::Display for Phantom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Phantom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Phantom::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown phantom '{s}'")))
    }
}

/// Pixel centre in `[-1, 1]^2`, `y` pointing up.
fn coords(r: usize, c: usize, rows: usize, cols: usize) -> (f64, f64) {
    let x = (2.0 * c as f64 + 1.0) / cols as f64 - 1.0;
    let y = 1.0 - (2.0 * r as f64 + 1.0) / rows as f64;
    (x, y)
}

/// Normalized squared radius of `(x, y)` in an ellipse, `< 1` inside.
fn ellipse_r2(x: f64, y: f64, cx: f64, cy: f64, a: f64, b: f64, deg: f64) -> f64 {
    let (s, c) = deg.to_radians().sin_cos();
    let (dx, dy) = (x - cx, y - cy);
    let u = c * dx + s * dy;
    let v = -s * dx + c * dy;
    (u / a).powi(2) + (v / b).powi(2)
}

/// Modified (high-contrast) Shepp-Logan head.
pub fn shepp_logan(rows: usize, cols: usize) -> ScalarImage {
    const E: [(f64, f64, f64, f64, f64, f64); 10] = [
        (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
        (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
        (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
        (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
        (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
        (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
        (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
        (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
        (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
        (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
    ];
    ScalarImage::from_fn(rows, cols, |r, c| {
        let (x, y) = coords(r, c, rows, cols);
        let v: f64 = E
            .iter()
            .filter(|e| ellipse_r2(x, y, e.3, e.4, e.1, e.2, e.5) <= 1.0)
            .map(|e| e.0)
            .sum();
        v.clamp(0.0, 1.0)
    })
}

pub fn shaded(rows: usize, cols: usize) -> ScalarImage {
    ScalarImage::from_fn(rows, cols, |r, c| {
        let (x, y) = coords(r, c, rows, cols);
        let outer = ellipse_r2(x, y, 0.0, 0.0, 0.8, 0.9, 0.0);
        if outer > 1.0 {
            return 0.0;
        }
        // bright rim fading smoothly toward the centre
        let mut v = 0.25 + 0.35 * outer;
        let lobe = ellipse_r2(x, y, -0.3, 0.15, 0.28, 0.45, 20.0);
        if lobe < 1.0 {
            v = 0.55 + 0.35 * (1.0 - lobe) * (1.0 - lobe);
        }
        let lobe2 = ellipse_r2(x, y, 0.32, 0.1, 0.22, 0.38, -25.0);
        if lobe2 < 1.0 {
            v = 0.15 + 0.25 * (2.5 * y).sin().abs();
        }
        let spot = ellipse_r2(x, y, 0.05, -0.55, 0.18, 0.12, 0.0);
        if spot < 1.0 {
            v = 0.8 + 0.2 * (1.0 - spot);
        }
        v.clamp(0.0, 1.0)
    })
}

pub fn ramps(rows: usize, cols: usize) -> ScalarImage {
    ScalarImage::from_fn(rows, cols, |r, c| {
        let (x, y) = coords(r, c, rows, cols);
        if x.abs() > 0.85 || y.abs() > 0.85 {
            return 0.0;
        }
        let mut v = 0.2 + 0.25 * (x + 0.85) / 1.7 + 0.15 * (y + 0.85) / 1.7;
        let bump = (-((x - 0.3).powi(2) + (y - 0.3).powi(2)) / 0.08).exp();
        v += 0.35 * bump;
        if ellipse_r2(x, y, -0.4, -0.35, 0.25, 0.25, 0.0) < 1.0 {
            v = 0.85;
        }
        if (x - 0.35).abs() < 0.2 && (y + 0.45).abs() < 0.12 {
            v = 0.1 + 0.5 * (x - 0.15) / 0.4;
        }
        if ellipse_r2(x, y, -0.45, 0.45, 0.12, 0.22, 30.0) < 1.0 {
            v = 0.05;
        }
        v.clamp(0.0, 1.0)
    })
}
