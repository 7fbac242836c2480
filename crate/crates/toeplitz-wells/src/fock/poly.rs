//! Polynomials in (z, conj z) times the model ground Gaussian, with exact
//! symbolic ladder calculus.
//!
//! An element represents p(z, conj z) · e^{-¼ Σ a_j |z_j|²} through the
//! coefficient map of p. Differentiation, multiplication by coordinates, and
//! the ladder operators b_j = -2∂_{z_j} + ½ a_j conj(z_j) and
//! b_j⁺ = 2∂_{conj z_j} + ½ a_j z_j act exactly on coefficients, so ladder
//! identities ([b_j, b_j⁺] = -2a_j, 𝓛 = Σ b_j b_j⁺ ≥ 0 with holomorphic
//! kernel) are checkable without quadrature.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{ln_factorial, FockTruncation};
use crate::error::{Error, Result};

/// Monomial key: exponents of z and of conj(z), one entry per dimension.
type Key = (Vec<u32>, Vec<u32>);

/// p(z, conj z) · e^{-¼ Σ a_j |z_j|²} as the coefficient map of p.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyGauss {
    n: usize,
    a: Vec<f64>,
    terms: BTreeMap<Key, Complex64>,
}

/// Which ladder operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    /// b_j = -2∂_{z_j} + ½ a_j conj(z_j); raises the 𝓛-eigenvalue by 2a_j.
    Lower,
    /// b_j⁺ = 2∂_{conj z_j} + ½ a_j z_j; annihilates the holomorphic kernel.
    Raise,
}

const EPS_DROP: f64 = 0.0;

impl PolyGauss {
    /// The ground Gaussian itself (p = 1).
    pub fn ground(trunc: &FockTruncation) -> Self {
        let n = trunc.n();
        let mut terms = BTreeMap::new();
        terms.insert((vec![0; n], vec![0; n]), Complex64::new(1.0, 0.0));
        Self { n, a: trunc.weights().to_vec(), terms }
    }

    /// Zero element.
    pub fn zero(trunc: &FockTruncation) -> Self {
        Self { n: trunc.n(), a: trunc.weights().to_vec(), terms: BTreeMap::new() }
    }

    /// Build from explicit monomial terms (z-exponents, conj z-exponents, coefficient).
    pub fn from_terms(
        trunc: &FockTruncation,
        terms: &[(Vec<u32>, Vec<u32>, Complex64)],
    ) -> Result<Self> {
        let n = trunc.n();
        let mut map = BTreeMap::new();
        for (kz, kc, c) in terms {
            if kz.len() != n || kc.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "term exponents must have length {n}"
                )));
            }
            *map.entry((kz.clone(), kc.clone())).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let mut out = Self { n, a: trunc.weights().to_vec(), terms: map };
        out.prune();
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &Complex64)> {
        self.terms.iter()
    }

    /// Largest coefficient magnitude; zero polynomial gives 0.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() > EPS_DROP);
    }

    fn add_term(&mut self, key: Key, c: Complex64) {
        if c.norm() == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                // Exact cancellation keeps the support tight.
                if o.get().norm() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.a, other.a, "mismatched weights");
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), *c);
        }
        out.prune();
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out.prune();
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Multiply by z_j.
    pub fn mul_z(&self, j: usize) -> Self {
        self.shift(j, 1, 0)
    }

    /// Multiply by conj(z_j).
    pub fn mul_zbar(&self, j: usize) -> Self {
        self.shift(j, 0, 1)
    }

    fn shift(&self, j: usize, dz: u32, dc: u32) -> Self {
        let mut out = Self { n: self.n, a: self.a.clone(), terms: BTreeMap::new() };
        for ((kz, kc), c) in &self.terms {
            let mut kz = kz.clone();
            let mut kc = kc.clone();
            kz[j] += dz;
            kc[j] += dc;
            out.add_term((kz, kc), *c);
        }
        out
    }

    /// ∂/∂z_j of the full product; the Gaussian contributes -¼ a_j conj(z_j).
    pub fn d_z(&self, j: usize) -> Self {
        let mut out = Self { n: self.n, a: self.a.clone(), terms: BTreeMap::new() };
        for ((kz, kc), c) in &self.terms {
            if kz[j] > 0 {
                let mut k2 = kz.clone();
                k2[j] -= 1;
                out.add_term((k2, kc.clone()), c * (kz[j] as f64));
            }
            let mut kc2 = kc.clone();
            kc2[j] += 1;
            out.add_term((kz.clone(), kc2), c * (-0.25 * self.a[j]));
        }
        out.prune();
        out
    }

    /// ∂/∂conj(z_j) of the full product; the Gaussian contributes -¼ a_j z_j.
    pub fn d_zbar(&self, j: usize) -> Self {
        let mut out = Self { n: self.n, a: self.a.clone(), terms: BTreeMap::new() };
        for ((kz, kc), c) in &self.terms {
            if kc[j] > 0 {
                let mut k2 = kc.clone();
                k2[j] -= 1;
                out.add_term((kz.clone(), k2), c * (kc[j] as f64));
            }
            let mut kz2 = kz.clone();
            kz2[j] += 1;
            out.add_term((kz2, kc.clone()), c * (-0.25 * self.a[j]));
        }
        out.prune();
        out
    }

    /// Evaluate the full product (polynomial times Gaussian) at z.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.n);
        let weight: f64 = z
            .iter()
            .zip(&self.a)
            .map(|(zj, aj)| -0.25 * aj * zj.norm_sqr())
            .sum();
        let mut acc = Complex64::new(0.0, 0.0);
        for ((kz, kc), c) in &self.terms {
            let mut t = *c;
            for j in 0..self.n {
                t *= z[j].powu(kz[j]) * z[j].conj().powu(kc[j]);
            }
            acc += t;
        }
        acc * weight.exp()
    }

    /// Exact L²(dz) inner product ⟨self, other⟩ via Gaussian moments:
    /// ∫ z^m conj(z)^l e^{-½a|z|²} dz = δ_{ml} m! π (2/a)^{m+1} per dimension.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.a, other.a, "mismatched weights");
        let mut acc = Complex64::new(0.0, 0.0);
        for ((pkz, pkc), pc) in &self.terms {
            for ((qkz, qkc), qc) in &other.terms {
                // Integrand monomial per dim: z^(pkz+qkc) conj(z)^(pkc+qkz).
                let mut term = pc * qc.conj();
                let mut nonzero = true;
                for j in 0..self.n {
                    let mz = pkz[j] + qkc[j];
                    let mc = pkc[j] + qkz[j];
                    if mz != mc {
                        nonzero = false;
                        break;
                    }
                    let m = mz;
                    let ln_moment = ln_factorial(m)
                        + std::f64::consts::PI.ln()
                        + ((m + 1) as f64) * (2.0 / self.a[j]).ln();
                    term *= ln_moment.exp();
                }
                if nonzero {
                    acc += term;
                }
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    /// Apply one ladder operator.
    pub fn ladder_apply(&self, which: Ladder, j: usize) -> Self {
        assert!(j < self.n, "dimension index out of range");
        match which {
            // b_j (pe^G) = (-2 ∂_{z_j} p + a_j conj(z_j) p) e^G; the -2 d_z
            // below already carries half the conj(z_j) factor from the
            // Gaussian, the multiplication term supplies the other half.
            Ladder::Lower => {
                let lhs = self.d_z(j).scale(Complex64::new(-2.0, 0.0));
                let rhs = self.mul_zbar(j).scale(Complex64::new(0.5 * self.a[j], 0.0));
                lhs.add(&rhs)
            }
            // b_j⁺ (pe^G) = 2 (∂_{conj z_j} p) e^G; the Gaussian part cancels.
            Ladder::Raise => {
                let full = self.d_zbar(j).scale(Complex64::new(2.0, 0.0));
                let back = self.mul_z(j).scale(Complex64::new(0.5 * self.a[j], 0.0));
                full.add(&back)
            }
        }
    }

    /// The model Landau operator 𝓛 = Σ_j b_j b_j⁺ applied symbolically.
    pub fn landau_apply(&self) -> Self {
        let mut acc = Self { n: self.n, a: self.a.clone(), terms: BTreeMap::new() };
        for j in 0..self.n {
            let term = self.ladder_apply(Ladder::Raise, j).ladder_apply(Ladder::Lower, j);
            acc = acc.add(&term);
        }
        acc
    }
}

/// Lowest eigenvalues of 𝓛 = Σ b_j b_j⁺ with multiplicities: the set
/// {Σ 2 α_j a_j : α ∈ ℤ₊ⁿ} in ascending order. The ladder construction in
/// the tests verifies each value by exhibiting an exact eigenfunction.
pub fn model_laplacian_spectrum(trunc: &FockTruncation, levels: usize) -> Result<Vec<f64>> {
    if levels == 0 {
        return Err(Error::InvalidArgument("levels must be at least 1".into()));
    }
    let a = trunc.weights();
    let a_min = a.iter().cloned().fold(f64::INFINITY, f64::min);
    let a_max = a.iter().cloned().fold(0.0, f64::max);
    // Ladder steps are at least 2 a_min, so values above 2 a_max (levels-1)
    // cannot displace anything from the lowest `levels` slots.
    let cap = ((levels as f64) * a_max / a_min).ceil() as u32 + 1;
    let mut values = Vec::new();
    let mut alpha = vec![0u32; trunc.n()];
    enumerate_box(&mut alpha, 0, cap, &mut |alpha| {
        let v: f64 = alpha.iter().zip(a).map(|(&aj, &wj)| 2.0 * (aj as f64) * wj).sum();
        values.push(v);
    });
    values.sort_by(|x, y| x.partial_cmp(y).unwrap());
    values.truncate(levels);
    if values.len() < levels {
        return Err(Error::InvalidArgument(
            "internal enumeration bound too small for requested levels".into(),
        ));
    }
    Ok(values)
}

fn enumerate_box(alpha: &mut Vec<u32>, dim: usize, cap: u32, f: &mut impl FnMut(&[u32])) {
    if dim == alpha.len() {
        f(alpha);
        return;
    }
    for v in 0..=cap {
        alpha[dim] = v;
        enumerate_box(alpha, dim + 1, cap, f);
    }
    alpha[dim] = 0;
}

/// Ladder action on a bare polynomial p(z, conj z) with no Gaussian factor:
/// b_j p = -2 ∂_{z_j} p + ½ a_j conj(z_j) p and
/// b_j⁺ p = 2 ∂_{conj z_j} p + ½ a_j z_j p.
///
/// Terms are (z-exponents, conj z-exponents, coefficient) triples.
pub fn bare_ladder_apply(
    which: Ladder,
    j: usize,
    a_j: f64,
    terms: &[(Vec<u32>, Vec<u32>, Complex64)],
) -> Vec<(Vec<u32>, Vec<u32>, Complex64)> {
    let mut out: BTreeMap<Key, Complex64> = BTreeMap::new();
    let mut add = |key: Key, c: Complex64| {
        let e = out.entry(key).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
    };
    for (kz, kc, c) in terms {
        match which {
            Ladder::Lower => {
                if kz[j] > 0 {
                    let mut k2 = kz.clone();
                    k2[j] -= 1;
                    add((k2, kc.clone()), -2.0 * (kz[j] as f64) * c);
                }
                let mut kc2 = kc.clone();
                kc2[j] += 1;
                add((kz.clone(), kc2), 0.5 * a_j * c);
            }
            Ladder::Raise => {
                if kc[j] > 0 {
                    let mut k2 = kc.clone();
                    k2[j] -= 1;
                    add((kz.clone(), k2), 2.0 * (kc[j] as f64) * c);
                }
                let mut kz2 = kz.clone();
                kz2[j] += 1;
                add((kz2, kc.clone()), 0.5 * a_j * c);
            }
        }
    }
    out.into_iter()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|((kz, kc), c)| (kz, kc, c))
        .collect()
}
