//! Projective branch descriptions `(p : q : s)` satisfying `p·v − q·i = s`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{Scalar, DEFAULT_TOL};

pub type C64 = Complex64;

/// Homogeneous triad of a two-terminal linear element. `(0, 0, ·)` is excluded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triad {
    p: C64,
    q: C64,
    s: C64,
}

/// Which affine charts contain a triad.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Patch {
    /// `p ≠ 0`: an impedance description exists.
    pub z: bool,
    /// `q ≠ 0`: an admittance description exists.
    pub y: bool,
}

/// Impedance/admittance views of a triad; `None` where the chart misses it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassicalViews {
    pub z: Option<C64>,
    pub v_s: Option<C64>,
    pub y: Option<C64>,
    pub i_s: Option<C64>,
}

/// Classical element forms accepted by [`Triad::from_classical`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalElement {
    /// `v = z·i + v_s`
    Impedance { z: C64, v_s: C64 },
    /// `i = y·v − i_s`
    Admittance { y: C64, i_s: C64 },
    /// Voltage source with series impedance.
    VoltageSource { v: C64, z: C64 },
    /// Current source with shunt admittance.
    CurrentSource { i: C64, y: C64 },
}

fn is_zero_rel(x: C64, scale: f64, tol: f64) -> bool {
    x.norm() <= tol * scale
}

impl Triad {
    pub fn new(p: C64, q: C64, s: C64) -> Result<Self> {
        if !(Scalar::is_finite(p) && Scalar::is_finite(q) && Scalar::is_finite(s)) {
            return Err(Error::NonFinite);
        }
        if p.norm() == 0.0 && q.norm() == 0.0 {
            return Err(Error::ExcludedPoint);
        }
        Ok(Triad { p, q, s })
    }

    pub fn real(p: f64, q: f64, s: f64) -> Result<Self> {
        Triad::new(C64::new(p, 0.0), C64::new(q, 0.0), C64::new(s, 0.0))
    }

    pub fn short() -> Self {
        Triad::real(1.0, 0.0, 0.0).unwrap()
    }

    pub fn open() -> Self {
        Triad::real(0.0, 1.0, 0.0).unwrap()
    }

    pub fn from_classical(kind: ClassicalElement) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        match kind {
            ClassicalElement::Impedance { z, v_s } => Triad::new(one, z, v_s),
            ClassicalElement::VoltageSource { v, z } => Triad::new(one, z, v),
            ClassicalElement::Admittance { y, i_s } => Triad::new(y, one, i_s),
            ClassicalElement::CurrentSource { i, y } => Triad::new(y, one, i),
        }
    }

    pub fn p(&self) -> C64 {
        self.p
    }

    pub fn q(&self) -> C64 {
        self.q
    }

    pub fn s(&self) -> C64 {
        self.s
    }

    /// `max(|p|, |q|)`, never zero.
    pub fn pq_scale(&self) -> f64 {
        self.p.norm().max(self.q.norm())
    }

    /// `|p|² + |q|²`, never zero.
    pub fn pq_norm_sqr(&self) -> f64 {
        self.p.norm_sqr() + self.q.norm_sqr()
    }

    pub fn scaled(&self, mu: C64) -> Result<Self> {
        Triad::new(self.p * mu, self.q * mu, self.s * mu)
    }

    pub fn with_source(&self, s: C64) -> Result<Self> {
        Triad::new(self.p, self.q, s)
    }

    /// Representative with the larger-modulus coordinate of `(p, q)` equal to 1
    /// (`p` wins ties).
    pub fn normalize(&self) -> Self {
        let anchor = if self.p.norm() >= self.q.norm() { self.p } else { self.q };
        Triad {
            p: self.p / anchor,
            q: self.q / anchor,
            s: self.s / anchor,
        }
    }

    /// The source-free point `(p : q)` on the projective line.
    pub fn project_source_free(&self) -> (C64, C64) {
        (self.p, self.q)
    }

    pub fn patch_with_tol(&self, tol: f64) -> Patch {
        let scale = self.pq_scale();
        Patch {
            z: !is_zero_rel(self.p, scale, tol),
            y: !is_zero_rel(self.q, scale, tol),
        }
    }

    pub fn patch(&self) -> Patch {
        self.patch_with_tol(DEFAULT_TOL)
    }

    pub fn classical_views_with_tol(&self, tol: f64) -> ClassicalViews {
        let patch = self.patch_with_tol(tol);
        let mut views = ClassicalViews::default();
        if patch.z {
            views.z = Some(self.q / self.p);
            views.v_s = Some(self.s / self.p);
        }
        if patch.y {
            views.y = Some(self.p / self.q);
            views.i_s = Some(self.s / self.q);
        }
        views
    }

    pub fn classical_views(&self) -> ClassicalViews {
        self.classical_views_with_tol(DEFAULT_TOL)
    }

    /// Projective equality: `other = μ·self` for some nonzero μ, judged with
    /// relative tolerance. Returns μ when it holds.
    pub fn ratio_to(&self, other: &Triad, tol: f64) -> Option<C64> {
        let mu = (self.p.conj() * other.p + self.q.conj() * other.q) / self.pq_norm_sqr();
        let scale = other.pq_scale().max(other.s.norm());
        let ok = [
            (other.p, self.p),
            (other.q, self.q),
            (other.s, self.s),
        ]
        .iter()
        .all(|&(o, s)| (o - mu * s).norm() <= tol * scale);
        (ok && mu.norm() > 0.0).then_some(mu)
    }

    pub fn projectively_eq(&self, other: &Triad, tol: f64) -> bool {
        self.ratio_to(other, tol).is_some()
    }
}

/// One triad per branch, in branch order.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    triads: Vec<Triad>,
}

impl Configuration {
    pub fn new(triads: Vec<Triad>) -> Self {
        Configuration { triads }
    }

    pub fn len(&self) -> usize {
        self.triads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triads.is_empty()
    }

    pub fn triads(&self) -> &[Triad] {
        &self.triads
    }

    pub fn triad(&self, k: usize) -> &Triad {
        &self.triads[k]
    }

    pub fn set_triad(&mut self, k: usize, t: Triad) {
        self.triads[k] = t;
    }

    pub fn with_triad(&self, k: usize, t: Triad) -> Self {
        let mut out = self.clone();
        out.triads[k] = t;
        out
    }

    pub fn push(&mut self, t: Triad) {
        self.triads.push(t);
    }

    pub fn p(&self) -> Vec<C64> {
        self.triads.iter().map(Triad::p).collect()
    }

    pub fn q(&self) -> Vec<C64> {
        self.triads.iter().map(Triad::q).collect()
    }

    pub fn s(&self) -> Vec<C64> {
        self.triads.iter().map(Triad::s).collect()
    }

    /// Branchwise rescaling `(p, q, s) ↦ d_k (p, q, s)`.
    pub fn rescaled(&self, d: &[C64]) -> Result<Self> {
        if d.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} scale factors for {} branches",
                d.len(),
                self.len()
            )));
        }
        Ok(Configuration {
            triads: self
                .triads
                .iter()
                .zip(d)
                .map(|(t, &mu)| t.scaled(mu))
                .collect::<Result<_>>()?,
        })
    }

    /// Same configuration with every excitation replaced.
    pub fn with_sources(&self, s: &[C64]) -> Result<Self> {
        if s.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} excitations for {} branches",
                s.len(),
                self.len()
            )));
        }
        Ok(Configuration {
            triads: self
                .triads
                .iter()
                .zip(s)
                .map(|(t, &x)| t.with_source(x))
                .collect::<Result<_>>()?,
        })
    }

    /// 0-based branches outside the impedance chart (`p = 0`).
    pub fn outside_z_patch(&self, tol: f64) -> Vec<usize> {
        (0..self.len()).filter(|&k| !self.triads[k].patch_with_tol(tol).z).collect()
    }

    /// 0-based branches outside the admittance chart (`q = 0`).
    pub fn outside_y_patch(&self, tol: f64) -> Vec<usize> {
        (0..self.len()).filter(|&k| !self.triads[k].patch_with_tol(tol).y).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn random_triad(rng: &mut StdRng) -> Triad {
        Triad::new(
            c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
        )
        .unwrap()
    }

    fn random_mu(rng: &mut StdRng) -> C64 {
        let modulus = 10f64.powf(rng.gen_range(-3.0..3.0));
        C64::from_polar(modulus, rng.gen_range(0.0..std::f64::consts::TAU))
    }

    #[test]
    fn excluded_point_rejected() {
        assert_eq!(Triad::real(0.0, 0.0, 1.0), Err(Error::ExcludedPoint));
        assert_eq!(Triad::real(f64::NAN, 1.0, 0.0), Err(Error::NonFinite));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(Triad::real(2.0, 0.0, 4.0).unwrap().normalize(), Triad::real(1.0, 0.0, 2.0).unwrap());
        let t = Triad::new(c(0.0, 0.0), c(0.0, -3.0), c(3.0, 0.0)).unwrap().normalize();
        assert!(close(t.p(), c(0.0, 0.0), 1e-15));
        assert!(close(t.q(), c(1.0, 0.0), 1e-15));
        assert!(close(t.s(), c(0.0, 1.0), 1e-15));
    }

    #[test]
    fn normalize_is_projective() {
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..100 {
            let t = random_triad(&mut rng);
            let (a, b) = (t.normalize(), t.scaled(random_mu(&mut rng)).unwrap().normalize());
            assert!(close(a.p(), b.p(), 1e-12) && close(a.q(), b.q(), 1e-12) && close(a.s(), b.s(), 1e-12));
        }
    }

    #[test]
    fn source_free_projection() {
        assert_eq!(Triad::real(1.0, 2.0, 5.0).unwrap().project_source_free(), (c(1.0, 0.0), c(2.0, 0.0)));
        // ideal sources become short/open circuits
        assert_eq!(Triad::real(1.0, 0.0, 3.0).unwrap().project_source_free(), (c(1.0, 0.0), c(0.0, 0.0)));
        assert_eq!(Triad::real(0.0, 1.0, 3.0).unwrap().project_source_free(), (c(0.0, 0.0), c(1.0, 0.0)));
    }

    #[test]
    fn patches() {
        assert_eq!(Triad::real(1.0, 1.0, 0.0).unwrap().patch(), Patch { z: true, y: true });
        assert_eq!(Triad::open().patch(), Patch { z: false, y: true });
        assert_eq!(Triad::short().patch(), Patch { z: true, y: false });
        // relative threshold: tiny p against large q is treated as zero
        assert!(!Triad::real(1e-12, 1.0, 0.0).unwrap().patch().z);
    }

    #[test]
    fn views_of_regular_element() {
        let v = Triad::real(1.0, 2.0, 3.0).unwrap().classical_views();
        assert_eq!(v.z, Some(c(2.0, 0.0)));
        assert_eq!(v.v_s, Some(c(3.0, 0.0)));
        assert_eq!(v.y, Some(c(0.5, 0.0)));
        assert_eq!(v.i_s, Some(c(1.5, 0.0)));
        assert!(close(v.v_s.unwrap(), v.z.unwrap() * v.i_s.unwrap(), 1e-15));
        assert!(close(v.z.unwrap(), 1.0 / v.y.unwrap(), 1e-15));
    }

    #[test]
    fn views_of_ideal_current_source() {
        let v = Triad::real(0.0, 1.0, 0.7).unwrap().classical_views();
        assert_eq!((v.z, v.v_s), (None, None));
        assert_eq!(v.y, Some(c(0.0, 0.0)));
        assert_eq!(v.i_s, Some(c(0.7, 0.0)));
    }

    #[test]
    fn views_are_projective_invariants() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..200 {
            let t = random_triad(&mut rng);
            let (a, b) = (t.classical_views(), t.scaled(random_mu(&mut rng)).unwrap().classical_views());
            for (x, y) in [(a.z, b.z), (a.v_s, b.v_s), (a.y, b.y), (a.i_s, b.i_s)] {
                let (x, y) = (x.unwrap(), y.unwrap());
                assert!((x - y).norm() <= 1e-12 * x.norm().max(1.0));
            }
        }
    }

    #[test]
    fn from_classical_examples() {
        let z = Triad::from_classical(ClassicalElement::Impedance { z: c(2.0, 0.0), v_s: c(0.0, 0.0) }).unwrap();
        assert_eq!(z, Triad::real(1.0, 2.0, 0.0).unwrap());
        let v = Triad::from_classical(ClassicalElement::VoltageSource { v: c(1.0, 0.0), z: c(0.0, 0.0) }).unwrap();
        assert_eq!(v, Triad::real(1.0, 0.0, 1.0).unwrap());
        let i = Triad::from_classical(ClassicalElement::CurrentSource { i: c(1.0, 0.0), y: c(0.5, 0.0) }).unwrap();
        assert_eq!(i, Triad::real(0.5, 1.0, 1.0).unwrap());
        let views = i.classical_views();
        assert_eq!((views.y, views.i_s), (Some(c(0.5, 0.0)), Some(c(1.0, 0.0))));
    }

    #[test]
    fn classical_round_trip() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let t = random_triad(&mut rng);
            let v = t.classical_views();
            let back_z = Triad::from_classical(ClassicalElement::Impedance { z: v.z.unwrap(), v_s: v.v_s.unwrap() }).unwrap();
            let back_y = Triad::from_classical(ClassicalElement::Admittance { y: v.y.unwrap(), i_s: v.i_s.unwrap() }).unwrap();
            assert!(t.projectively_eq(&back_z, 1e-12));
            assert!(t.projectively_eq(&back_y, 1e-12));
        }
    }

    #[test]
    fn ratio_detects_non_equivalence() {
        let t = Triad::real(1.0, 2.0, 3.0).unwrap();
        assert!(t.ratio_to(&Triad::real(1.0, 2.0, 4.0).unwrap(), 1e-12).is_none());
        let mu = t.ratio_to(&t.scaled(c(0.0, 2.0)).unwrap(), 1e-12).unwrap();
        assert!(close(mu, c(0.0, 2.0), 1e-14));
    }
}
