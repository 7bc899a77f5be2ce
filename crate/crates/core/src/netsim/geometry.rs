use libm::{fabs, sqrt};

/// A point or displacement in meters.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// The rectangle nodes move in. With `torus` set, distances wrap around the
/// edges.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
    pub torus: bool,
}

impl Default for Arena {
    fn default() -> Self {
        Self {
            width: 1000.0,
            height: 1000.0,
            torus: false,
        }
    }
}

impl Arena {
    pub fn contains(&self, p: Vec2) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    pub fn distance(&self, a: Vec2, b: Vec2) -> f64 {
        let mut dx = fabs(a.x - b.x);
        let mut dy = fabs(a.y - b.y);
        if self.torus {
            dx = dx.min(self.width - dx);
            dy = dy.min(self.height - dy);
        }
        sqrt(dx * dx + dy * dy)
    }

    pub fn within(&self, a: Vec2, b: Vec2, range: f64) -> bool {
        self.distance(a, b) <= range
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_wraps() {
        let flat = Arena { width: 100.0, height: 100.0, torus: false };
        let torus = Arena { torus: true, ..flat };
        let (a, b) = (Vec2::new(1.0, 50.0), Vec2::new(99.0, 50.0));
        assert_eq!(flat.distance(a, b), 98.0);
        assert_eq!(torus.distance(a, b), 2.0);
        assert!(torus.within(a, b, 2.0));
        assert!(!flat.within(a, b, 2.0));
    }
}
