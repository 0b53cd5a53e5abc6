//! Potential of uniformly charged flat triangles, in units of `1/(4 pi eps0)`
//! per coulomb.

use crate::Vec3;

/// Sources closer than this many panel diameters are integrated by
/// subdivision instead of the centroid point approximation.
const NEAR_FACTOR: f64 = 2.5;
const MAX_DEPTH: u32 = 6;

/// Precomputed triangle geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub corners: [Vec3; 3],
    pub centroid: Vec3,
    pub area: f64,
    pub diameter: f64,
}

impl Panel {
    pub fn new(corners: [Vec3; 3]) -> Self {
        let [a, b, c] = corners;
        let diameter = (b - a).norm().max((c - b).norm()).max((a - c).norm());
        Self {
            corners,
            centroid: (a + b + c) / 3.0,
            area: 0.5 * (b - a).cross(&(c - a)).norm(),
            diameter,
        }
    }

    /// Radius of the disc with the same area.
    pub fn disc_radius(&self) -> f64 {
        (self.area / std::f64::consts::PI).sqrt()
    }

    /// Potential at the panel's own centroid per unit charge, using the
    /// equivalent uniformly charged disc: `2 / a`.
    pub fn self_potential(&self) -> f64 {
        2.0 / self.disc_radius()
    }

    fn split(&self) -> [Panel; 4] {
        let [a, b, c] = self.corners;
        let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
        [
            Panel::new([a, ab, ca]),
            Panel::new([ab, b, bc]),
            Panel::new([ca, bc, c]),
            Panel::new([ab, bc, ca]),
        ]
    }

    /// Potential at `p` per unit charge spread uniformly over the panel.
    pub fn potential(&self, p: &Vec3) -> f64 {
        self.potential_depth(p, 0)
    }

    fn potential_depth(&self, p: &Vec3, depth: u32) -> f64 {
        let d = (p - self.centroid).norm();
        if d > NEAR_FACTOR * self.diameter || depth >= MAX_DEPTH {
            return if d > 0.0 { 1.0 / d } else { 0.0 };
        }
        self.split().iter().map(|s| s.potential_depth(p, depth + 1)).sum::<f64>() * 0.25
    }

    /// Potential and its gradient with respect to `p` in one pass.
    pub fn potential_and_gradient(&self, p: &Vec3) -> (f64, Vec3) {
        self.both_depth(p, 0)
    }

    fn both_depth(&self, p: &Vec3, depth: u32) -> (f64, Vec3) {
        let r = p - self.centroid;
        let d = r.norm();
        if d > NEAR_FACTOR * self.diameter || depth >= MAX_DEPTH {
            return if d > 0.0 { (1.0 / d, -r / (d * d * d)) } else { (0.0, Vec3::zeros()) };
        }
        let (mut phi, mut grad) = (0.0, Vec3::zeros());
        for s in self.split() {
            let (a, b) = s.both_depth(p, depth + 1);
            phi += a;
            grad += b;
        }
        (0.25 * phi, 0.25 * grad)
    }

    /// Gradient (with respect to `p`) of [`Panel::potential`].
    pub fn gradient(&self, p: &Vec3) -> Vec3 {
        self.gradient_depth(p, 0)
    }

    fn gradient_depth(&self, p: &Vec3, depth: u32) -> Vec3 {
        let r = p - self.centroid;
        let d = r.norm();
        if d > NEAR_FACTOR * self.diameter || depth >= MAX_DEPTH {
            return if d > 0.0 { -r / (d * d * d) } else { Vec3::zeros() };
        }
        self.split()
            .iter()
            .map(|s| s.gradient_depth(p, depth + 1))
            .sum::<Vec3>()
            * 0.25
    }
}
