//! Symmetric alpha-stable Levy measures (spherical decomposition), the
//! nondegeneracy constant, and discretization of the nonlocal operator with
//! zero exterior condition as a symmetric M-matrix.

use crate::geometry::{Grid, Point};
use crate::quad::gauss_legendre;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::gamma;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Angular part of the Levy measure on the unit sphere.
#[derive(Debug, Clone)]
pub enum AngularDensity {
    None,
    /// Constant density per radian (d=2).
    Uniform(f64),
    /// Table of density values at angles 2*pi*k/len, linearly interpolated.
    Table(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct SphericalMeasure {
    /// (unit direction, mass). In d=1 directions are [+-1, 0].
    pub atoms: Vec<(Point, f64)>,
    pub density: AngularDensity,
    pub symmetrized: bool,
}

impl SphericalMeasure {
    pub fn from_atoms(atoms: Vec<(Point, f64)>) -> SphericalMeasure {
        SphericalMeasure {
            atoms,
            density: AngularDensity::None,
            symmetrized: false,
        }
        .symmetrize()
    }

    /// Spherical part of the isotropic measure c(d,alpha)|y|^{-d-alpha}dy.
    pub fn isotropic(d: usize, alpha: f64) -> SphericalMeasure {
        let c = isotropic_constant(d, alpha);
        match d {
            1 => SphericalMeasure {
                atoms: vec![([1.0, 0.0], c), ([-1.0, 0.0], c)],
                density: AngularDensity::None,
                symmetrized: true,
            },
            2 => SphericalMeasure {
                atoms: vec![],
                density: AngularDensity::Uniform(c),
                symmetrized: true,
            },
            _ => panic!("only d in {{1,2}} supported"),
        }
    }

    /// Replace mu by its symmetrization (mu + mu o (-id))/2.
    pub fn symmetrize(&self) -> SphericalMeasure {
        let mut atoms = Vec::new();
        for &(th, m) in &self.atoms {
            atoms.push((th, 0.5 * m));
            atoms.push(([-th[0], -th[1]], 0.5 * m));
        }
        // Merge coincident directions.
        let mut merged: Vec<(Point, f64)> = Vec::new();
        'outer: for (th, m) in atoms {
            for e in merged.iter_mut() {
                if (e.0[0] - th[0]).abs() < 1e-12 && (e.0[1] - th[1]).abs() < 1e-12 {
                    e.1 += m;
                    continue 'outer;
                }
            }
            merged.push((th, m));
        }
        let density = match &self.density {
            AngularDensity::None => AngularDensity::None,
            AngularDensity::Uniform(c) => AngularDensity::Uniform(*c),
            AngularDensity::Table(t) => {
                let n = t.len();
                let sym: Vec<f64> = (0..n).map(|k| 0.5 * (t[k] + t[(k + n / 2) % n])).collect();
                AngularDensity::Table(sym)
            }
        };
        SphericalMeasure {
            atoms: merged,
            density,
            symmetrized: true,
        }
    }

    /// Density value at angle phi (d=2 continuous part).
    fn density_at(&self, phi: f64) -> f64 {
        match &self.density {
            AngularDensity::None => 0.0,
            AngularDensity::Uniform(c) => *c,
            AngularDensity::Table(t) => {
                let n = t.len() as f64;
                let u = (phi.rem_euclid(2.0 * PI)) / (2.0 * PI) * n;
                let k = u.floor() as usize % t.len();
                let frac = u - u.floor();
                let k1 = (k + 1) % t.len();
                t[k] * (1.0 - frac) + t[k1] * frac
            }
        }
    }

    /// Total mass Lambda_1.
    pub fn total_mass(&self) -> f64 {
        let atom_mass: f64 = self.atoms.iter().map(|a| a.1).sum();
        let dens_mass = match &self.density {
            AngularDensity::None => 0.0,
            AngularDensity::Uniform(c) => 2.0 * PI * c,
            AngularDensity::Table(t) => {
                t.iter().sum::<f64>() * 2.0 * PI / t.len() as f64
            }
        };
        atom_mass + dens_mass
    }
}

/// Constant c(d, alpha) in the isotropic Levy density c|y|^{-d-alpha}, chosen
/// so the operator is exactly -(-Laplace)^{alpha/2}.
pub fn isotropic_constant(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    2f64.powf(alpha) * gamma((df + alpha) / 2.0)
        / (PI.powf(df / 2.0) * gamma(-alpha / 2.0).abs())
}

/// Constant C(d, alpha) with (-Laplace)^{alpha/2} (1-|x|^2)_+^{alpha/2} =
/// C(d, alpha) on the unit ball.
pub fn getoor_constant(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    2f64.powf(alpha) * gamma(alpha / 2.0 + 1.0) * gamma((df + alpha) / 2.0) / gamma(df / 2.0)
}

/// Exact solution of (-Laplace)^{alpha/2} u = 1 on the unit ball, u = 0
/// outside: u(x) = (1-|x|^2)_+^{alpha/2} / C(d, alpha).
pub fn getoor_ball_solution(alpha: f64, d: usize, x: Point) -> f64 {
    let r2 = if d == 1 {
        x[0] * x[0]
    } else {
        x[0] * x[0] + x[1] * x[1]
    };
    (1.0 - r2).max(0.0).powf(alpha / 2.0) / getoor_constant(d, alpha)
}

/// Lambda_0 = inf over a direction net of int |rho . theta|^alpha mu(dtheta).
pub fn nondegeneracy_constant(mu: &SphericalMeasure, alpha: f64, d: usize) -> f64 {
    if d == 1 {
        return mu.atoms.iter().map(|a| a.1).sum();
    }
    let net = 720;
    let dens_net = 1440;
    let mut best = f64::INFINITY;
    for k in 0..net {
        let rho = 2.0 * PI * k as f64 / net as f64;
        let mut v: f64 = mu
            .atoms
            .iter()
            .map(|&(th, m)| {
                let proj = (rho.cos() * th[0] + rho.sin() * th[1]).abs();
                m * proj.powf(alpha)
            })
            .sum();
        if !matches!(mu.density, AngularDensity::None) {
            let dphi = 2.0 * PI / dens_net as f64;
            let mut acc = 0.0;
            for j in 0..dens_net {
                let phi = j as f64 * dphi;
                acc += mu.density_at(phi) * (rho - phi).cos().abs().powf(alpha);
            }
            v += acc * dphi;
        }
        best = best.min(v);
    }
    best
}

#[derive(Debug, Clone)]
pub struct StableOperatorSpec {
    pub alpha: f64,
    pub spherical: SphericalMeasure,
    /// Piecewise-constant positive modulation: (breakpoint time, value).
    pub time_modulation: Option<Vec<(f64, f64)>>,
}

impl StableOperatorSpec {
    pub fn isotropic(d: usize, alpha: f64) -> StableOperatorSpec {
        StableOperatorSpec {
            alpha,
            spherical: SphericalMeasure::isotropic(d, alpha),
            time_modulation: None,
        }
    }

    pub fn modulation_at(&self, t: f64) -> f64 {
        match &self.time_modulation {
            None => 1.0,
            Some(brk) => {
                let mut v = brk.first().map(|b| b.1).unwrap_or(1.0);
                for &(t0, m) in brk {
                    if t >= t0 {
                        v = m;
                    }
                }
                v
            }
        }
    }
}

/// Discrete nonlocal operator on the exterior-zero grid. `entries` is the
/// (bit-exactly symmetric) dense matrix; `kernel` keeps the translation-
/// invariant lattice weights so the Dirichlet form can be evaluated
/// independently; `tail_diagonal` is the analytically integrated measure of
/// the far field beyond the kernel range, already folded into the diagonal.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub interior_size: usize,
    pub entries: DMatrix<f64>,
    pub kernel: Vec<([i64; 2], f64)>,
    pub tail: f64,
    pub tail_diagonal: Vec<f64>,
    pub modulation: Option<Vec<(f64, f64)>>,
}

// int_a^b r^{-1-alpha} dr
fn i0(a: f64, b: f64, alpha: f64) -> f64 {
    (a.powf(-alpha) - b.powf(-alpha)) / alpha
}

// int_a^b r^{-alpha} dr
fn i1(a: f64, b: f64, alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-12 {
        (b / a).ln()
    } else {
        (b.powf(1.0 - alpha) - a.powf(1.0 - alpha)) / (1.0 - alpha)
    }
}

/// Second-difference weights of the 1D radial scheme with one-sided mass w:
/// K[m-1] multiplies u(x + m h) + u(x - m h) - 2 u(x), plus the analytic
/// tail mass T beyond M h (which multiplies -u). The near field (0, h) is
/// handled by a second-order Taylor correction folded into K[0].
fn radial_weights(alpha: f64, h: f64, m_max: usize, w: f64) -> (Vec<f64>, f64) {
    let mut k = vec![0.0; m_max];
    for m in 1..=m_max {
        let mh = m as f64 * h;
        let mut val = 0.0;
        if m > 1 {
            // Rising half of the hat on [(m-1)h, mh].
            let a = mh - h;
            val += (i1(a, mh, alpha) - a * i0(a, mh, alpha)) / h;
        }
        if m < m_max {
            // Falling half on [mh, (m+1)h].
            let b = mh + h;
            val += (b * i0(mh, b, alpha) - i1(mh, b, alpha)) / h;
        }
        if m == 1 {
            // The interval (0, h) enters through the second-order Taylor
            // correction: int_0^h r^{1-alpha} dr * u'' folds into the first
            // second-difference weight as h^{-alpha}/(2-alpha).
            val += h.powf(-alpha) / (2.0 - alpha);
        }
        k[m - 1] = w * val;
    }
    let tail = 2.0 * w * (m_max as f64 * h).powf(-alpha) / alpha;
    (k, tail)
}

// Measure of lattice cell C(z) = zh + [-h/2, h/2]^2 under the continuous
// angular density: int_{C(z)} mu(y/|y|) |y|^{-2-alpha} dy by tensor Gauss.
fn cell_mass(mu: &SphericalMeasure, alpha: f64, h: f64, z: [i64; 2], ng: usize) -> f64 {
    let (xs, ws) = gauss_legendre(ng);
    let cx = z[0] as f64 * h;
    let cy = z[1] as f64 * h;
    let half = 0.5 * h;
    let mut acc = 0.0;
    for (s1, w1) in xs.iter().zip(ws.iter()) {
        for (s2, w2) in xs.iter().zip(ws.iter()) {
            let y1 = cx + half * s1;
            let y2 = cy + half * s2;
            let r = (y1 * y1 + y2 * y2).sqrt();
            let phi = y2.atan2(y1);
            acc += w1 * w2 * mu.density_at(phi) * r.powf(-2.0 - alpha);
        }
    }
    acc * half * half
}

// Half the boundary of the square [-R, R]^2 seen from the origin at angle
// phi: distance to the square boundary along direction phi.
fn square_radius(r_half: f64, phi: f64) -> f64 {
    r_half / phi.cos().abs().max(phi.sin().abs())
}

pub fn assemble_operator(spec: &StableOperatorSpec, grid: &Grid) -> Result<OperatorMatrix> {
    let alpha = spec.alpha;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Config(format!("alpha={alpha} outside (0,2)")));
    }
    let mu = if spec.spherical.symmetrized {
        spec.spherical.clone()
    } else {
        spec.spherical.symmetrize()
    };
    let d = grid.dim();
    let lam0 = nondegeneracy_constant(&mu, alpha, d);
    let lam1 = mu.total_mass();
    if !(lam1 > 0.0) || lam0 < 1e-10 * lam1 {
        return Err(Error::Config(format!(
            "degenerate spherical measure: Lambda0={lam0}, Lambda1={lam1}"
        )));
    }
    let h = grid.h;
    let m_max = (grid.domain.diameter() / h).ceil() as usize + 1;

    // Translation-invariant lattice kernel k(z) = k(-z) >= 0 plus scalar
    // far-field tail (per the radial r^{-1-alpha} profile, valid because the
    // kernel range M h covers the domain diameter).
    let mut kernel: HashMap<[i64; 2], f64> = HashMap::new();
    let mut tail = 0.0;

    if d == 1 {
        let w: f64 = mu
            .atoms
            .iter()
            .find(|a| a.0[0] > 0.0)
            .map(|a| a.1)
            .unwrap_or(0.0);
        if w <= 0.0 {
            return Err(Error::Config("d=1 measure has no atoms at +-1".into()));
        }
        let (k, t) = radial_weights(alpha, h, m_max, w);
        for (m, &km) in k.iter().enumerate() {
            let m = m as i64 + 1;
            *kernel.entry([m, 0]).or_insert(0.0) += km;
            *kernel.entry([-m, 0]).or_insert(0.0) += km;
        }
        tail += t;
    } else {
        // Axis-aligned atoms ride the 1D radial scheme along their axis.
        for &(th, m) in &mu.atoms {
            let axis = if th[1].abs() < 1e-9 && (th[0].abs() - 1.0).abs() < 1e-9 {
                [1i64, 0i64]
            } else if th[0].abs() < 1e-9 && (th[1].abs() - 1.0).abs() < 1e-9 {
                [0, 1]
            } else {
                return Err(Error::Config(
                    "d=2 atoms must align with the grid axes".into(),
                ));
            };
            // Each symmetric pair contributes one-sided mass m; only process
            // the positive representative to avoid double counting.
            if (axis == [1, 0] && th[0] < 0.0) || (axis == [0, 1] && th[1] < 0.0) {
                continue;
            }
            let (k, t) = radial_weights(alpha, h, m_max, m);
            for (i, &km) in k.iter().enumerate() {
                let s = i as i64 + 1;
                *kernel.entry([axis[0] * s, axis[1] * s]).or_insert(0.0) += km;
                *kernel.entry([-axis[0] * s, -axis[1] * s]).or_insert(0.0) += km;
            }
            tail += t;
        }
        if !matches!(mu.density, AngularDensity::None) {
            let mm = m_max as i64;
            for i in -mm..=mm {
                for j in -mm..=mm {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    let ng = if i.abs().max(j.abs()) <= 3 { 20 } else { 8 };
                    let v = cell_mass(&mu, alpha, h, [i, j], ng);
                    *kernel.entry([i, j]).or_insert(0.0) += v;
                }
            }
            // Origin cell: second moments against axis second differences
            // (polar closed form in r, angular quadrature). The cross moment
            // Q12 is dropped to preserve the M-matrix sign structure; it
            // vanishes for axis-symmetric densities.
            let nphi = 1440;
            let dphi = 2.0 * PI / nphi as f64;
            let mut q11 = 0.0;
            let mut q22 = 0.0;
            let mut tail_dens = 0.0;
            for k in 0..nphi {
                let phi = (k as f64 + 0.5) * dphi;
                let dens = mu.density_at(phi);
                let r0 = square_radius(0.5 * h, phi);
                let rad = r0.powf(2.0 - alpha) / (2.0 - alpha);
                q11 += dens * phi.cos().powi(2) * rad * dphi;
                q22 += dens * phi.sin().powi(2) * rad * dphi;
                // Far field beyond the covered square [-(M+1/2)h, (M+1/2)h]^2.
                let rbig = square_radius((m_max as f64 + 0.5) * h, phi);
                tail_dens += dens * rbig.powf(-alpha) / alpha * dphi;
            }
            let h2 = h * h;
            *kernel.entry([1, 0]).or_insert(0.0) += 0.5 * q11 / h2;
            *kernel.entry([-1, 0]).or_insert(0.0) += 0.5 * q11 / h2;
            *kernel.entry([0, 1]).or_insert(0.0) += 0.5 * q22 / h2;
            *kernel.entry([0, -1]).or_insert(0.0) += 0.5 * q22 / h2;
            tail += tail_dens;
        }
    }

    let mut kernel: Vec<([i64; 2], f64)> = kernel.into_iter().collect();
    kernel.sort_by_key(|e| e.0);
    let total_kernel_mass: f64 = kernel.iter().map(|e| e.1).sum();

    let n = grid.len();
    let mut a = DMatrix::zeros(n, n);
    let diag = -(total_kernel_mass + tail);
    for i in 0..n {
        a[(i, i)] = diag;
        let zi = grid.lattice[i];
        for &(z, kz) in &kernel {
            if let Some(j) = grid.interior_index([zi[0] + z[0], zi[1] + z[1]]) {
                a[(i, j)] += kz;
            }
        }
    }
    Ok(OperatorMatrix {
        interior_size: n,
        entries: a,
        kernel,
        tail,
        tail_diagonal: vec![tail; n],
        modulation: spec.time_modulation.clone(),
    })
}

impl OperatorMatrix {
    pub fn modulation_at(&self, t: f64) -> f64 {
        match &self.modulation {
            None => 1.0,
            Some(brk) => {
                let mut v = brk.first().map(|b| b.1).unwrap_or(1.0);
                for &(t0, m) in brk {
                    if t >= t0 {
                        v = m;
                    }
                }
                v
            }
        }
    }
}

pub fn apply_operator(a: &OperatorMatrix, u: &DVector<f64>, t: f64) -> DVector<f64> {
    assert_eq!(u.len(), a.interior_size, "field/operator size mismatch");
    &a.entries * u * a.modulation_at(t)
}

/// Evaluates u^T A v and, independently, the double-sum quadrature of the
/// bilinear Dirichlet-form identity
///   -1/2 sum_x sum_z k(z) (u(x+z)-u(x)) (v(x+z)-v(x)) - T sum_x u v
/// with x ranging over the full lattice (zero extension). Returns both.
pub fn dirichlet_form(
    a: &OperatorMatrix,
    grid: &Grid,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> (f64, f64) {
    let matrix_side = u.dot(&(&a.entries * v));

    let range = a
        .kernel
        .iter()
        .map(|e| e.0[0].abs().max(e.0[1].abs()))
        .max()
        .unwrap_or(0);
    let (mut lo, mut hi) = ([i64::MAX; 2], [i64::MIN; 2]);
    for z in &grid.lattice {
        for c in 0..2 {
            lo[c] = lo[c].min(z[c]);
            hi[c] = hi[c].max(z[c]);
        }
    }
    let at = |z: [i64; 2], f: &DVector<f64>| -> f64 {
        grid.interior_index(z).map(|i| f[i]).unwrap_or(0.0)
    };
    let mut form = 0.0;
    for x0 in (lo[0] - range)..=(hi[0] + range) {
        for x1 in (lo[1] - range)..=(hi[1] + range) {
            let x = [x0, x1];
            let ux = at(x, u);
            let vx = at(x, v);
            for &(z, kz) in &a.kernel {
                let y = [x0 + z[0], x1 + z[1]];
                let du = at(y, u) - ux;
                let dv = at(y, v) - vx;
                form -= 0.5 * kz * du * dv;
            }
        }
    }
    for i in 0..grid.len() {
        form -= a.tail * u[i] * v[i];
    }
    (matrix_side, form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_grid, DomainSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    const BALL1: DomainSpec = DomainSpec::Interval { a: -1.0, b: 1.0 };

    // High-resolution quadrature of the singular integral
    //   w int_0^inf (u(x+r) + u(x-r) - 2u(x)) r^{-1-alpha} dr
    // for u = (1-x^2)_+^{alpha/2}; independent oracle for the Getoor form.
    fn singular_integral_oracle(alpha: f64, x: f64) -> f64 {
        let w = isotropic_constant(1, alpha);
        let u = |y: f64| (1.0 - y * y).max(0.0).powf(alpha / 2.0);
        let delta = |r: f64| u(x + r) + u(x - r) - 2.0 * u(x);
        let eps: f64 = 1e-4;
        // Near field: delta ~ u''(x) r^2.
        let hh = 1e-5;
        let upp = (u(x + hh) + u(x - hh) - 2.0 * u(x)) / (hh * hh);
        let mut total = upp * eps.powf(2.0 - alpha) / (2.0 - alpha);
        // Piecewise smooth regions split at the kinks r = 1 -+ x.
        let brk = [eps, (1.0 - x.abs()).max(eps), 1.0 + x.abs()];
        total += crate::quad::composite_gauss(
            |r| delta(r) * r.powf(-1.0 - alpha),
            brk[0],
            brk[1],
            800,
            12,
        );
        total += crate::quad::composite_gauss(
            |r| delta(r) * r.powf(-1.0 - alpha),
            brk[1],
            brk[2],
            800,
            12,
        );
        // Beyond 1+|x| both translates are exterior: delta = -2u(x).
        total += -2.0 * u(x) * (1.0 + x.abs()).powf(-alpha) / alpha;
        w * total
    }

    #[test]
    fn getoor_constant_confirmed_by_quadrature() {
        for alpha in [0.6, 1.0, 1.4] {
            let c = getoor_constant(1, alpha);
            for x in [-0.7, -0.3, 0.0, 0.4, 0.8] {
                let lu = singular_integral_oracle(alpha, x);
                assert!(
                    (lu + c).abs() < 3e-3 * c,
                    "alpha={alpha} x={x}: quadrature {lu} vs -C={}",
                    -c
                );
            }
        }
    }

    #[test]
    fn getoor_solution_shape() {
        assert_eq!(getoor_ball_solution(1.2, 1, [1.0, 0.0]), 0.0);
        // d=1, alpha=1: C = 2 Gamma(3/2) Gamma(1) / Gamma(1/2) = 1, u(0) = 1.
        let c = getoor_constant(1, 1.0);
        assert!((c - 1.0).abs() < 1e-12, "C(1,1)={c}");
        assert!((getoor_ball_solution(1.0, 1, [0.0, 0.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nondegeneracy_closed_forms() {
        // d=1 pair of atoms with mass c each.
        let mu = SphericalMeasure::from_atoms(vec![([1.0, 0.0], 0.7), ([-1.0, 0.0], 0.7)]);
        assert!((nondegeneracy_constant(&mu, 1.3, 1) - 1.4).abs() < 1e-12);
        // d=2 uniform density: Lambda0 = m int |cos|^alpha, rho-independent.
        let alpha = 1.5;
        let m = 0.8;
        let mu = SphericalMeasure {
            atoms: vec![],
            density: AngularDensity::Uniform(m),
            symmetrized: true,
        };
        let reference = m * crate::quad::composite_gauss(
            |p: f64| p.cos().abs().powf(alpha),
            0.0,
            2.0 * PI,
            256,
            8,
        );
        let got = nondegeneracy_constant(&mu, alpha, 2);
        assert!((got - reference).abs() < 1e-4 * reference, "{got} vs {reference}");
        // Single-axis atoms in d=2 are degenerate.
        let bad = SphericalMeasure::from_atoms(vec![([1.0, 0.0], 1.0), ([-1.0, 0.0], 1.0)]);
        assert!(nondegeneracy_constant(&bad, alpha, 2) < 1e-10);
        let spec = StableOperatorSpec {
            alpha,
            spherical: bad,
            time_modulation: None,
        };
        let grid = make_grid(
            &DomainSpec::Disk {
                center: [0.0, 0.0],
                radius: 1.0,
            },
            0.25,
        )
        .unwrap();
        assert!(assemble_operator(&spec, &grid).is_err(), "degenerate measure must be rejected");
    }

    #[test]
    fn assembled_operator_is_symmetric_m_matrix() {
        let grid = make_grid(&BALL1, 2.0 / 65.0).unwrap();
        let spec = StableOperatorSpec::isotropic(1, 1.2);
        let a = assemble_operator(&spec, &grid).unwrap();
        let n = a.interior_size;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                assert_eq!(
                    a.entries[(i, j)].to_bits(),
                    a.entries[(j, i)].to_bits(),
                    "A must be bit-exactly symmetric"
                );
                if i != j {
                    assert!(a.entries[(i, j)] >= 0.0, "off-diagonal must be >= 0");
                }
                row += a.entries[(i, j)];
            }
            assert!(row <= 1e-12, "row sum must be <= 0, got {row}");
        }
        // Constant field: (A 1)_i <= 0.
        let ones = DVector::from_element(n, 1.0);
        let au = apply_operator(&a, &ones, 0.0);
        for i in 0..n {
            assert!(au[i] <= 1e-12);
        }
    }

    #[test]
    fn getoor_profile_matches_operator_action() {
        // A u ~ -C * 1 at interior nodes away from the boundary.
        let grid = make_grid(&BALL1, 2.0 / 257.0).unwrap();
        let spec = StableOperatorSpec::isotropic(1, 1.0);
        let a = assemble_operator(&spec, &grid).unwrap();
        let c = getoor_constant(1, 1.0);
        let u = DVector::from_iterator(
            grid.len(),
            grid.nodes
                .iter()
                .map(|&x| (1.0 - x[0] * x[0]).max(0.0).powf(0.5)),
        );
        let au = apply_operator(&a, &u, 0.0);
        for (i, &x) in grid.nodes.iter().enumerate() {
            if x[0].abs() < 0.6 {
                assert!(
                    (au[i] + c).abs() < 0.02 * c,
                    "x={} Au={} expected {}",
                    x[0],
                    au[i],
                    -c
                );
            }
        }
    }

    #[test]
    fn operator_scaling_invariance() {
        // Exact entrywise scale relation A_h(D) = 2^alpha A_{2h}(2D).
        let alpha = 1.4;
        let g1 = make_grid(&BALL1, 1.0 / 16.0).unwrap();
        let g2 = make_grid(&DomainSpec::Interval { a: -2.0, b: 2.0 }, 1.0 / 8.0).unwrap();
        let a1 = assemble_operator(&StableOperatorSpec::isotropic(1, alpha), &g1).unwrap();
        let a2 = assemble_operator(&StableOperatorSpec::isotropic(1, alpha), &g2).unwrap();
        assert_eq!(a1.interior_size, a2.interior_size);
        let s = 2f64.powf(alpha);
        let mut worst = 0.0f64;
        for i in 0..a1.interior_size {
            for j in 0..a1.interior_size {
                let d = (a1.entries[(i, j)] - s * a2.entries[(i, j)]).abs();
                let m = a1.entries[(i, j)].abs().max(1e-300);
                if a1.entries[(i, j)] != 0.0 {
                    worst = worst.max(d / m);
                }
            }
        }
        assert!(worst < 1e-10, "scale relation violated: rel err {worst}");
        // d=2 isotropic version of the same relation.
        let dsk1 = DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 };
        let dsk2 = DomainSpec::Disk { center: [0.0, 0.0], radius: 2.0 };
        let g1 = make_grid(&dsk1, 0.2).unwrap();
        let g2 = make_grid(&dsk2, 0.4).unwrap();
        let a1 = assemble_operator(&StableOperatorSpec::isotropic(2, alpha), &g1).unwrap();
        let a2 = assemble_operator(&StableOperatorSpec::isotropic(2, alpha), &g2).unwrap();
        let mut worst = 0.0f64;
        for i in 0..a1.interior_size {
            let d = (a1.entries[(i, i)] - s * a2.entries[(i, i)]).abs() / a1.entries[(i, i)].abs();
            worst = worst.max(d);
        }
        assert!(worst < 1e-6, "2D scale relation violated: {worst}");
    }

    #[test]
    fn atoms_match_two_axis_assemblies() {
        // d=2 operator with atoms at +-e1, +-e2 equals the sum of the two
        // axis-wise kernels: check entries against the 1D radial weights.
        let alpha = 0.8;
        let dsk = DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 };
        let grid = make_grid(&dsk, 0.2).unwrap();
        let w = 0.6;
        let mu = SphericalMeasure::from_atoms(vec![
            ([1.0, 0.0], w),
            ([-1.0, 0.0], w),
            ([0.0, 1.0], w),
            ([0.0, -1.0], w),
        ]);
        let spec = StableOperatorSpec {
            alpha,
            spherical: mu,
            time_modulation: None,
        };
        let a = assemble_operator(&spec, &grid).unwrap();
        let m_max = (dsk.diameter() / grid.h).ceil() as usize + 1;
        let (k1, t1) = radial_weights(alpha, grid.h, m_max, w);
        for &(z, kz) in &a.kernel {
            let m = z[0].abs().max(z[1].abs()) as usize;
            assert!(z[0] == 0 || z[1] == 0, "only axis offsets expected");
            assert!((kz - k1[m - 1]).abs() < 1e-14, "kernel mismatch at {z:?}");
        }
        assert!((a.tail - 2.0 * t1).abs() < 1e-14);
    }

    #[test]
    fn modulation_scales_output() {
        let grid = make_grid(&BALL1, 1.0 / 16.0).unwrap();
        let mut spec = StableOperatorSpec::isotropic(1, 1.0);
        spec.time_modulation = Some(vec![(0.0, 1.0), (1.0, 2.0)]);
        let a = assemble_operator(&spec, &grid).unwrap();
        let u = DVector::from_fn(grid.len(), |i, _| (i as f64 * 0.37).sin());
        let v1 = apply_operator(&a, &u, 0.5);
        let v2 = apply_operator(&a, &u, 1.5);
        for i in 0..u.len() {
            assert!((v2[i] - 2.0 * v1[i]).abs() < 1e-12);
        }
        let zero = DVector::zeros(grid.len());
        assert_eq!(apply_operator(&a, &zero, 0.0).norm(), 0.0);
    }

    #[test]
    fn operator_self_adjoint_on_random_fields() {
        let grid = make_grid(&BALL1, 1.0 / 32.0).unwrap();
        let a = assemble_operator(&StableOperatorSpec::isotropic(1, 1.5), &grid).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let u = DVector::from_fn(grid.len(), |_, _| rng.gen::<f64>() - 0.5);
            let v = DVector::from_fn(grid.len(), |_, _| rng.gen::<f64>() - 0.5);
            let lhs = u.dot(&(&a.entries * &v));
            let rhs = v.dot(&(&a.entries * &u));
            assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn dirichlet_form_identity_and_sign() {
        let grid = make_grid(&BALL1, 1.0 / 24.0).unwrap();
        let a = assemble_operator(&StableOperatorSpec::isotropic(1, 1.1), &grid).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..25 {
            let u = DVector::from_fn(grid.len(), |_, _| rng.gen::<f64>() - 0.5);
            let v = DVector::from_fn(grid.len(), |_, _| rng.gen::<f64>() - 0.5);
            let (lhs, rhs) = dirichlet_form(&a, &grid, &u, &v);
            assert!(
                (lhs - rhs).abs() <= 1e-8 * u.norm() * v.norm(),
                "identity violated: {lhs} vs {rhs}"
            );
            let (quad, _) = dirichlet_form(&a, &grid, &u, &u);
            assert!(quad <= 1e-12, "u^T A u must be <= 0, got {quad}");
        }
        // Far-separated supports of opposite sign: cross kernel only.
        let n = grid.len();
        let mut u = DVector::zeros(n);
        let mut v = DVector::zeros(n);
        u[2] = 1.0;
        v[n - 3] = -1.0;
        let (lhs, rhs) = dirichlet_form(&a, &grid, &u, &v);
        let zi = grid.lattice[2];
        let zj = grid.lattice[n - 3];
        let dz = [zj[0] - zi[0], zj[1] - zi[1]];
        let kz = a
            .kernel
            .iter()
            .find(|e| e.0 == dz)
            .map(|e| e.1)
            .unwrap_or(0.0);
        assert!(lhs <= 0.0, "cross value must be <= 0");
        assert!((lhs - (-1.0) * kz).abs() < 1e-14, "value set by cross kernel");
        assert!((lhs - rhs).abs() < 1e-12);
        // Bilinearity.
        let u = DVector::from_fn(n, |i, _| (i as f64).sin());
        let v1 = DVector::from_fn(n, |i, _| (i as f64 * 0.3).cos());
        let v2 = DVector::from_fn(n, |i, _| (i as f64 * 0.7).sin());
        let (l12, _) = dirichlet_form(&a, &grid, &u, &(&v1 + &v2));
        let (l1, _) = dirichlet_form(&a, &grid, &u, &v1);
        let (l2, _) = dirichlet_form(&a, &grid, &u, &v2);
        assert!((l12 - l1 - l2).abs() < 1e-10);
    }
}
