//! Abstract controlled sources: a controlled branch whose characteristic
//! also involves the current and voltage of a controlling branch,
//!
//! ```text
//! p₁v₁ − q₁i₁ = s₁
//! αv₁ + βi₁ + p₂v₂ − q₂i₂ = s₂
//! ```
//!
//! Ideal VCVS, CCVS, VCCS and CCCS are corners of this family.

use crate::config::{Triad, C64};
use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, Scalar};

/// Control relation between two branches of a circuit (0-based positions).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub controlled: usize,
    pub controlling: usize,
    /// Voltage gain.
    pub alpha: C64,
    /// Transimpedance gain.
    pub beta: C64,
}

impl Coupling {
    pub fn new(controlled: usize, controlling: usize, alpha: C64, beta: C64) -> Result<Self> {
        if controlled == controlling {
            return Err(Error::InvalidCoupling(format!(
                "branch {} cannot control itself",
                controlled + 1
            )));
        }
        if !(Scalar::is_finite(alpha) && Scalar::is_finite(beta)) {
            return Err(Error::NonFinite);
        }
        Ok(Coupling {
            controlled,
            controlling,
            alpha,
            beta,
        })
    }
}

/// Checks a set of couplings over `m` branches: indices in range, each
/// branch controlled at most once, and no branch both controlled and
/// controlling.
pub fn validate_couplings(couplings: &[Coupling], m: usize) -> Result<()> {
    let mut controlled = vec![false; m];
    for c in couplings {
        for b in [c.controlled, c.controlling] {
            if b >= m {
                return Err(Error::UnknownBranch((b + 1).to_string()));
            }
        }
        if c.controlled == c.controlling {
            return Err(Error::InvalidCoupling(format!(
                "branch {} cannot control itself",
                c.controlled + 1
            )));
        }
        if controlled[c.controlled] {
            return Err(Error::InvalidCoupling(format!(
                "branch {} is controlled more than once",
                c.controlled + 1
            )));
        }
        controlled[c.controlled] = true;
    }
    if let Some(c) = couplings.iter().find(|c| controlled[c.controlling]) {
        return Err(Error::InvalidCoupling(format!(
            "chained control: controlling branch {} is itself controlled",
            c.controlling + 1
        )));
    }
    Ok(())
}

/// One controlling/controlled branch pair with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlledPair {
    pub controlling: Triad,
    pub controlled: Triad,
    pub alpha: C64,
    pub beta: C64,
}

/// `2×2` lower-triangular blocks.
pub type Block = [[C64; 2]; 2];

impl ControlledPair {
    pub fn new(controlling: Triad, controlled: Triad, alpha: C64, beta: C64) -> Result<Self> {
        if !(Scalar::is_finite(alpha) && Scalar::is_finite(beta)) {
            return Err(Error::NonFinite);
        }
        let pair = ControlledPair {
            controlling,
            controlled,
            alpha,
            beta,
        };
        if !pair.has_full_rank() {
            return Err(Error::InvalidCoupling("[P Q] block is rank deficient".into()));
        }
        Ok(pair)
    }

    fn has_full_rank(&self) -> bool {
        let (p, q) = self.coupled_blocks();
        let row = |r: usize| [p[r][0], p[r][1], q[r][0], q[r][1]];
        let (r0, r1) = (row(0), row(1));
        (0..4).any(|a| (a + 1..4).any(|b| (r0[a] * r1[b] - r0[b] * r1[a]).norm() > 0.0))
    }

    /// `P = (p₁ 0; α p₂)`, `Q = (q₁ 0; −β q₂)`.
    pub fn coupled_blocks(&self) -> (Block, Block) {
        let z = C64::new(0.0, 0.0);
        let (c, d) = (&self.controlling, &self.controlled);
        (
            [[c.p(), z], [self.alpha, d.p()]],
            [[c.q(), z], [-self.beta, d.q()]],
        )
    }

    /// Coefficients `(γ, δ)` of the controlling variable in the controlled
    /// branch's parametrization.
    pub fn gamma_delta(&self) -> (C64, C64) {
        let (c, d) = (&self.controlling, &self.controlled);
        let coupling = self.alpha * c.q() + self.beta * c.p();
        let norm = d.pq_norm_sqr();
        (
            d.q().conj() * coupling / norm,
            -d.p().conj() * coupling / norm,
        )
    }

    /// `P̂ = (p₁ 0; γ p₂)`, `Q̂ = (q₁ 0; δ q₂)`: `i = P̂u`, `v = Q̂u` solve the
    /// source-free characteristic for every `u`.
    pub fn hat_blocks(&self) -> (Block, Block) {
        let z = C64::new(0.0, 0.0);
        let (c, d) = (&self.controlling, &self.controlled);
        let (gamma, delta) = self.gamma_delta();
        (
            [[c.p(), z], [gamma, d.p()]],
            [[c.q(), z], [delta, d.q()]],
        )
    }

    /// Particular solution `(i₀, v₀)` of the characteristic with excitations.
    pub fn origin(&self) -> ([C64; 2], [C64; 2]) {
        let (c, d) = (&self.controlling, &self.controlled);
        let s1 = c.s() / c.pq_norm_sqr();
        let (i1, v1) = (-c.q().conj() * s1, c.p().conj() * s1);
        let s2 = (d.s() - self.beta * i1 - self.alpha * v1) / d.pq_norm_sqr();
        ([i1, -d.q().conj() * s2], [v1, d.p().conj() * s2])
    }

    /// `−Q·i + P·v − s` for a candidate pair of branch values.
    pub fn characteristic_residual(&self, i: [C64; 2], v: [C64; 2]) -> [C64; 2] {
        let (p, q) = self.coupled_blocks();
        let s = [self.controlling.s(), self.controlled.s()];
        let mut out = [C64::new(0.0, 0.0); 2];
        for r in 0..2 {
            out[r] = -(q[r][0] * i[0] + q[r][1] * i[1]) + p[r][0] * v[0] + p[r][1] * v[1] - s[r];
        }
        out
    }
}

/// Small-signal Π-model: a triangle of branches 1, 2, 3 where branch 2
/// merges the controlled source with its parallel impedance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiModel {
    pub p: [C64; 3],
    pub q: [C64; 3],
    pub alpha: C64,
    pub beta: C64,
}

/// Outcome of the Z-parameter existence test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZParamReport {
    pub exists: bool,
    /// Closed-form determinant.
    pub det: C64,
    /// Determinant of the assembled `6×6` system.
    pub assembled_det: C64,
    /// Sum of the moduli of the closed-form terms.
    pub scale: f64,
}

impl PiModel {
    pub fn new(p: [C64; 3], q: [C64; 3], alpha: C64, beta: C64) -> Result<Self> {
        let values = p.iter().chain(&q).chain([&alpha, &beta]);
        if values.clone().any(|x| !Scalar::is_finite(*x)) {
            return Err(Error::NonFinite);
        }
        if (0..3).any(|k| p[k].norm() == 0.0 && q[k].norm() == 0.0) {
            return Err(Error::ExcludedPoint);
        }
        Ok(PiModel { p, q, alpha, beta })
    }

    fn terms(&self) -> [C64; 5] {
        let (p, q) = (&self.p, &self.q);
        [
            p[0] * p[1] * q[2],
            p[0] * q[1] * p[2],
            q[0] * p[1] * p[2],
            self.alpha * q[0] * p[2],
            self.beta * p[0] * p[2],
        ]
    }

    /// `p₁p₂q₃ + p₁q₂p₃ + q₁p₂p₃ + αq₁p₃ + βp₁p₃`.
    pub fn closed_form_det(&self) -> C64 {
        self.terms().iter().sum()
    }

    /// Full system in `(v₁, v₂, v₃, i₁, i₂, i₃)`: two cut rows, one cycle
    /// row and the three characteristics.
    pub fn assembled_system(&self) -> DenseMatrix<C64> {
        let c = |x: f64| C64::new(x, 0.0);
        let (p, q) = (&self.p, &self.q);
        let z = c(0.0);
        DenseMatrix::from_rows(&[
            vec![z, z, z, c(1.0), z, c(1.0)],
            vec![z, z, z, z, c(1.0), c(-1.0)],
            vec![c(1.0), c(-1.0), c(-1.0), z, z, z],
            vec![p[0], z, z, -q[0], z, z],
            vec![self.alpha, p[1], z, self.beta, -q[1], z],
            vec![z, z, p[2], z, z, -q[2]],
        ])
        .expect("rows have equal length")
    }

    pub fn zparam_existence(&self, tol: f64) -> Result<ZParamReport> {
        let det = self.closed_form_det();
        let assembled_det = self.assembled_system().determinant()?;
        let scale: f64 = self.terms().iter().map(|t| t.norm()).sum();
        Ok(ZParamReport {
            exists: det.norm() > tol * scale,
            det,
            assembled_det,
            scale,
        })
    }
}
