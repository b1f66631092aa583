//! Bounded domains, the boundary-distance weight, its smooth regularization,
//! dyadic boundary layers, and uniform grids with interior/exterior tagging.

use crate::quad::gauss_legendre;
use crate::{Error, Result};
use std::collections::HashMap;

pub type Point = [f64; 2];

/// The bounded open sets supported by the toolkit. `convex()` is derived:
/// intervals and disks are convex, annuli are not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainSpec {
    Interval { a: f64, b: f64 },
    Disk { center: Point, radius: f64 },
    Annulus { center: Point, r_in: f64, r_out: f64 },
}

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DomainSpec::Interval { a, b } => a < b,
            DomainSpec::Disk { radius, .. } => radius > 0.0,
            DomainSpec::Annulus { r_in, r_out, .. } => 0.0 < r_in && r_in < r_out,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("degenerate domain {self:?}")))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn convex(&self) -> bool {
        !matches!(self, DomainSpec::Annulus { .. })
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            DomainSpec::Interval { a, b } => b - a,
            DomainSpec::Disk { radius, .. } => 2.0 * radius,
            DomainSpec::Annulus { r_out, .. } => 2.0 * r_out,
        }
    }

    /// Largest value of the boundary distance over the closure.
    pub fn inradius(&self) -> f64 {
        match *self {
            DomainSpec::Interval { a, b } => 0.5 * (b - a),
            DomainSpec::Disk { radius, .. } => radius,
            DomainSpec::Annulus { r_in, r_out, .. } => 0.5 * (r_out - r_in),
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        distance(self, x) > 0.0
    }
}

fn norm2(x: Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1]).sqrt()
}

/// Distance to the boundary for points inside the domain, 0 on the
/// complement of the open set.
pub fn distance(dom: &DomainSpec, x: Point) -> f64 {
    let d = match *dom {
        DomainSpec::Interval { a, b } => (x[0] - a).min(b - x[0]),
        DomainSpec::Disk { center, radius } => {
            radius - norm2([x[0] - center[0], x[1] - center[1]])
        }
        DomainSpec::Annulus {
            center,
            r_in,
            r_out,
        } => {
            let r = norm2([x[0] - center[0], x[1] - center[1]]);
            (r - r_in).min(r_out - r)
        }
    };
    d.max(0.0)
}

// Normalized C^inf bump on (-1, 1) used as mollifier profile.
fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Smooth function comparable to the boundary distance: the distance field
/// mollified at the local scale d_x/4. The equivalence constant is at most 2
/// (in practice about 5/4) because the mollification window never moves a
/// point by more than d_x/4 in each coordinate.
pub fn regularized_distance(dom: &DomainSpec, x: Point) -> Result<f64> {
    let d = distance(dom, x);
    if d <= 0.0 {
        return Err(Error::Numerics(format!(
            "regularized_distance: point {x:?} is not interior"
        )));
    }
    let scale = 0.25 * d;
    let (xs, ws) = gauss_legendre(16);
    if dom.dim() == 1 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (s, w) in xs.iter().zip(ws.iter()) {
            let b = bump(*s) * w;
            num += b * distance(dom, [x[0] + scale * s, 0.0]);
            den += b;
        }
        Ok(num / den)
    } else {
        let mut num = 0.0;
        let mut den = 0.0;
        for (s1, w1) in xs.iter().zip(ws.iter()) {
            for (s2, w2) in xs.iter().zip(ws.iter()) {
                let b = bump(*s1) * bump(*s2) * w1 * w2;
                num += b * distance(dom, [x[0] + scale * s1, x[1] + scale * s2]);
                den += b;
            }
        }
        Ok(num / den)
    }
}

// Quintic smoothstep: 0 at t<=0, 1 at t>=1, C^2 across the joins.
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// Support constants of the dyadic layers: layer n is supported where
/// C1*e^{-n} < d_x < C2*e^{-n} and equals 1 where e^{-n} <= d_x <= e^{1-n}.
pub const ZETA_C1: f64 = 0.606_530_659_712_633_4; // e^{-1/2}
pub const ZETA_C2: f64 = 4.481_689_070_338_064_5; // e^{3/2}

// Profile in the log-distance coordinate t = -ln d_x - n: supported on
// (-3/2, 1/2), identically 1 on [-1, 0], so the integer translates cover
// every t with at least one full-height layer.
fn zeta_profile(t: f64) -> f64 {
    if t <= -1.5 || t >= 0.5 {
        0.0
    } else if t < -1.0 {
        smoothstep(2.0 * (t + 1.5))
    } else if t <= 0.0 {
        1.0
    } else {
        smoothstep(1.0 - 2.0 * t)
    }
}

/// Dyadic boundary layer: nonnegative, supported on the shell
/// {ZETA_C1*e^{-n} < d_x < ZETA_C2*e^{-n}}, with the translates over n
/// summing to at least 1 at every interior point.
pub fn zeta_layer(dom: &DomainSpec, n: i64, x: Point) -> f64 {
    let d = distance(dom, x);
    if d <= 0.0 {
        return 0.0;
    }
    zeta_profile(-d.ln() - n as f64)
}

/// Uniform Cartesian grid over the domain: interior lattice nodes carry the
/// unknowns, everything else is the exterior where fields are fixed to 0.
/// Nodes sit on the integer lattice anchor + i*h so that refining h -> h/2
/// nests the node set.
#[derive(Debug, Clone)]
pub struct Grid {
    pub domain: DomainSpec,
    pub h: f64,
    pub anchor: Point,
    /// Coordinates of the interior nodes, in lattice iteration order.
    pub nodes: Vec<Point>,
    /// Integer lattice coordinates of the interior nodes.
    pub lattice: Vec<[i64; 2]>,
    /// Lattice coordinate -> interior index.
    pub index: HashMap<[i64; 2], usize>,
    /// Lattice sites inside the bounding box that fell outside the open set;
    /// kept for tail-mass bookkeeping (field values there are always 0).
    pub exterior_band: Vec<[i64; 2]>,
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn point(&self, z: [i64; 2]) -> Point {
        [
            self.anchor[0] + z[0] as f64 * self.h,
            self.anchor[1] + z[1] as f64 * self.h,
        ]
    }

    /// Interior index of lattice site z, if interior.
    pub fn interior_index(&self, z: [i64; 2]) -> Option<usize> {
        self.index.get(&z).copied()
    }

    pub fn distances(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|&x| distance(&self.domain, x))
            .collect()
    }
}

pub fn make_grid(dom: &DomainSpec, h: f64) -> Result<Grid> {
    dom.validate()?;
    if !(h > 0.0) || h >= dom.diameter() {
        return Err(Error::Config(format!("degenerate grid spacing h={h}")));
    }
    // Nodes are offset by h/2 from the anchor so the boundary is never a
    // node and d_x stays positive on every interior node.
    let anchor = match *dom {
        DomainSpec::Interval { a, .. } => [a + h / 2.0, 0.0],
        DomainSpec::Disk { center, .. } | DomainSpec::Annulus { center, .. } => {
            [center[0] + h / 2.0, center[1] + h / 2.0]
        }
    };
    let mut nodes = Vec::new();
    let mut lattice = Vec::new();
    let mut exterior_band = Vec::new();
    let mut index = HashMap::new();
    match *dom {
        DomainSpec::Interval { a, b } => {
            let imax = ((b - a) / h).ceil() as i64 + 1;
            for i in 0..=imax {
                let x = [anchor[0] + i as f64 * h, 0.0];
                if distance(dom, x) > 0.0 {
                    index.insert([i, 0], nodes.len());
                    nodes.push(x);
                    lattice.push([i, 0]);
                } else if x[0] <= b + h {
                    exterior_band.push([i, 0]);
                }
            }
        }
        DomainSpec::Disk { .. } | DomainSpec::Annulus { .. } => {
            let r = match *dom {
                DomainSpec::Disk { radius, .. } => radius,
                DomainSpec::Annulus { r_out, .. } => r_out,
                _ => unreachable!(),
            };
            let imax = (r / h).ceil() as i64 + 1;
            for i in -imax..=imax {
                for j in -imax..=imax {
                    let z = [i, j];
                    let x = [
                        anchor[0] + i as f64 * h,
                        anchor[1] + j as f64 * h,
                    ];
                    if distance(dom, x) > 0.0 {
                        index.insert(z, nodes.len());
                        nodes.push(x);
                        lattice.push(z);
                    } else {
                        exterior_band.push(z);
                    }
                }
            }
        }
    }
    if nodes.len() < 8 {
        return Err(Error::Config(format!(
            "grid too coarse: only {} interior nodes (need >= 8)",
            nodes.len()
        )));
    }
    Ok(Grid {
        domain: *dom,
        h,
        anchor,
        nodes,
        lattice,
        index,
        exterior_band,
    })
}

/// Per-node boundary weight psi (= d_x) and its smooth regularization, with
/// the realized equivalence constant max(d/psi_tilde, psi_tilde/d).
#[derive(Debug, Clone)]
pub struct WeightField {
    pub psi: Vec<f64>,
    pub psi_tilde: Vec<f64>,
    pub equivalence_n: f64,
}

impl WeightField {
    pub fn new(grid: &Grid) -> Result<WeightField> {
        let psi = grid.distances();
        let mut psi_tilde = Vec::with_capacity(psi.len());
        let mut n = 1.0f64;
        for (&x, &d) in grid.nodes.iter().zip(psi.iter()) {
            let pt = regularized_distance(&grid.domain, x)?;
            n = n.max(d / pt).max(pt / d);
            psi_tilde.push(pt);
        }
        Ok(WeightField {
            psi,
            psi_tilde,
            equivalence_n: n,
        })
    }
}
