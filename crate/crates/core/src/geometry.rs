//! Points of the unit ball, Möbius involutions φ_z, the matrix A_z, the
//! pseudo-hyperbolic metric and the reproducing kernels.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{domain, Result};
use crate::scalar::Float;
use crate::special_fn::WeightParam;

/// Points with |z| > 1 - BOUNDARY_TOL count as boundary points.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Point<F: Float> {
    coords: Vec<Complex<F>>,
    norm_sq: F,
}

pub fn inner<F: Float>(z: &[Complex<F>], w: &[Complex<F>]) -> Complex<F> {
    z.iter().zip(w).fold(Complex::new(F::zero(), F::zero()), |acc, (a, b)| acc + a * b.conj())
}

impl<F: Float> Point<F> {
    pub fn new(coords: Vec<Complex<F>>) -> Result<Self> {
        if coords.is_empty() {
            return domain("a point needs at least one coordinate");
        }
        let norm_sq = coords.iter().fold(F::zero(), |a, c| a + c.norm_sqr());
        if norm_sq.sqrt() > F::one() + F::c(BOUNDARY_TOL) {
            return domain(format!("|z| = {} lies outside the closed ball", norm_sq.sqrt()));
        }
        Ok(Point { coords, norm_sq })
    }

    pub fn origin(n: usize) -> Self {
        Point { coords: vec![Complex::new(F::zero(), F::zero()); n], norm_sq: F::zero() }
    }

    /// A point from real coordinates (x_1, y_1, x_2, y_2, …).
    pub fn from_reals(xy: &[F]) -> Result<Self> {
        Self::new(xy.chunks(2).map(|c| Complex::new(c[0], *c.get(1).unwrap_or(&F::zero()))).collect())
    }

    pub fn coords(&self) -> &[Complex<F>] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm_sq(&self) -> F {
        self.norm_sq
    }

    pub fn is_interior(&self) -> bool {
        self.norm_sq.sqrt() <= F::one() - F::c(BOUNDARY_TOL)
    }

    fn require_interior(&self, what: &str) -> Result<()> {
        if !self.is_interior() {
            return domain(format!("{what} needs an interior point, |z| = {}", self.norm_sq.sqrt()));
        }
        Ok(())
    }
}

/// The involution φ_z exchanging 0 and z.
#[derive(Debug, Clone)]
pub struct MobiusMap<F: Float> {
    center: Point<F>,
}

impl<F: Float> MobiusMap<F> {
    pub fn new(center: Point<F>) -> Result<Self> {
        center.require_interior("Möbius map")?;
        Ok(MobiusMap { center })
    }

    pub fn center(&self) -> &Point<F> {
        &self.center
    }

    /// φ_z(w) = (z - P_z w - s_z Q_z w)/(1 - ⟨w,z⟩), s_z = (1-|z|²)^{1/2}.
    pub fn apply(&self, w: &Point<F>) -> Result<Point<F>> {
        let z = self.center.coords();
        if w.dim() != z.len() {
            return Err(crate::Error::DimensionMismatch { expected: z.len(), found: w.dim() });
        }
        let zz = self.center.norm_sq;
        if zz == F::zero() {
            return Point::new(w.coords().iter().map(|c| -c).collect());
        }
        let wz = inner(w.coords(), z);
        let sz = (F::one() - zz).sqrt();
        let den = Complex::new(F::one(), F::zero()) - wz;
        let coords = z
            .iter()
            .zip(w.coords())
            .map(|(zi, wi)| {
                let p = zi * wz / zz;
                let q = wi - p;
                (zi - p - q * sz) / den
            })
            .collect();
        clamp_point(coords)
    }
}

fn clamp_point<F: Float>(coords: Vec<Complex<F>>) -> Result<Point<F>> {
    let norm_sq = coords.iter().fold(F::zero(), |a, c| a + c.norm_sqr());
    // Round-off may push boundary images a few ulps outside.
    if norm_sq > F::one() && norm_sq < F::one() + F::c(4.0 * BOUNDARY_TOL) {
        return Ok(Point { coords, norm_sq });
    }
    Point::new(coords)
}

pub fn mobius_apply<F: Float>(map: &MobiusMap<F>, w: &Point<F>) -> Result<Point<F>> {
    map.apply(w)
}

/// A_z = (1-|z|²) P_z + (1-|z|²)^{1/2} Q_z, so that
/// (1 - ⟨w,z⟩)(z - φ_z(w)) = A_z w.
pub fn a_matrix<F: Float>(z: &Point<F>) -> Result<DMatrix<Complex<F>>> {
    z.require_interior("A_z")?;
    let n = z.dim();
    let zz = z.norm_sq();
    if zz == F::zero() {
        return Ok(DMatrix::identity(n, n));
    }
    let a = F::one() - zz;
    let b = a.sqrt();
    let c = z.coords();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let p = c[i] * c[j].conj() / zz;
        let id = if i == j { F::one() } else { F::zero() };
        p * a + (Complex::new(id, F::zero()) - p) * b
    }))
}

/// K^{(t)}_w(z) = (1 - ⟨z,w⟩)^{-(n+1+t)}; the Hardy kernel (1-⟨z,w⟩)^{-n} at t = -1.
pub fn bergman_kernel<F: Float>(n: usize, t: &WeightParam<F>, z: &Point<F>, w: &Point<F>) -> Result<Complex<F>> {
    if z.dim() != n || w.dim() != n {
        return Err(crate::Error::DimensionMismatch { expected: n, found: z.dim().max(w.dim()) });
    }
    let base = Complex::new(F::one(), F::zero()) - inner(z.coords(), w.coords());
    if base.norm() <= F::c(BOUNDARY_TOL) {
        return domain("kernel is singular at z = w on the boundary");
    }
    let expo = F::cu(n + 1) + *t.t();
    Ok(base.powf(-expo))
}

/// ρ(z,w) = |φ_z(w)|, computed as sqrt(1 - (1-|z|²)(1-|w|²)/|1-⟨z,w⟩|²).
pub fn pseudo_metric<F: Float>(z: &Point<F>, w: &Point<F>) -> Result<F> {
    if !z.is_interior() && !w.is_interior() {
        return domain("pseudo-hyperbolic distance needs an interior point");
    }
    let (a, b) = if z.is_interior() { (z, w) } else { (w, z) };
    let map = MobiusMap::new(a.clone())?;
    let d = map.apply(b)?.norm_sq().sqrt();
    Ok(d.min(F::one()))
}

/// d(z,w) = |1 - ⟨z,w⟩|^{1/2}.
pub fn d_metric<F: Float>(z: &Point<F>, w: &Point<F>) -> F {
    (Complex::new(F::one(), F::zero()) - inner(z.coords(), w.coords())).norm().sqrt()
}

/// Real Jacobian of φ_z at w: ((1-|z|²)/|1-⟨w,z⟩|²)^{n+1}.
pub fn mobius_jacobian<F: Float>(z: &Point<F>, w: &Point<F>) -> F {
    let den = (Complex::new(F::one(), F::zero()) - inner(w.coords(), z.coords())).norm_sqr();
    ((F::one() - z.norm_sq()) / den).powi(z.dim() as i32 + 1)
}
