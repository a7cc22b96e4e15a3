//! Dense truncated multivariate Taylor jets.
//!
//! A [`Jet`] stores the Taylor coefficients `c_α` of a scalar function around
//! a base point, for every multi-index `α` of total degree `≤ order`, so that
//! `f(z0 + h) = Σ c_α h^α + O(|h|^{order+1})`. Partial derivatives are
//! recovered as `∂^α f(z0) = α! · c_α`.
//!
//! Coefficients are laid out in graded-lexicographic order. Because the
//! layout is degree-major, the coefficient vector of a lower-order space is a
//! prefix of the higher-order one, which makes truncation a slice.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use super::JetError;

/// Highest total derivative order a seeded jet may carry.
pub const MAX_ORDER: usize = 4;
/// Highest number of seed variables (two per coordinate, dimension ≤ 8).
pub const MAX_VARS: usize = 16;

/// Monomial layout plus the precomputed tables used by jet arithmetic.
pub struct JetSpace {
    nvars: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    degrees: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)` with `monomials[i] + monomials[j] == monomials[k]`.
    mul_table: Vec<(u32, u32, u32)>,
    /// Per variable: `(source, target, factor)` for differentiation into the
    /// space of order `order - 1`.
    deriv: Vec<Vec<(u32, u32, f64)>>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("nvars", &self.nvars)
            .field("order", &self.order)
            .field("len", &self.monomials.len())
            .finish()
    }
}

fn enumerate_monomials(nvars: usize, order: usize) -> Vec<Vec<u8>> {
    fn fill(rest: usize, var: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if var + 1 == cur.len() {
            cur[var] = rest as u8;
            out.push(cur.clone());
            return;
        }
        for e in (0..=rest).rev() {
            cur[var] = e as u8;
            fill(rest - e, var + 1, cur, out);
        }
        cur[var] = 0;
    }
    let mut out = Vec::new();
    if nvars == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut cur = vec![0u8; nvars];
    for d in 0..=order {
        fill(d, 0, &mut cur, &mut out);
    }
    out
}

impl JetSpace {
    fn build(nvars: usize, order: usize) -> Self {
        let monomials = enumerate_monomials(nvars, order);
        let degrees: Vec<usize> = monomials
            .iter()
            .map(|m| m.iter().map(|&e| e as usize).sum())
            .collect();
        let index: HashMap<Vec<u8>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();

        let mut mul_table = Vec::new();
        let mut sum = vec![0u8; nvars];
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if degrees[i] + degrees[j] > order {
                    // Degree-major layout: every later `b` is at least as heavy.
                    break;
                }
                for v in 0..nvars {
                    sum[v] = a[v] + b[v];
                }
                let k = index[&sum];
                mul_table.push((i as u32, j as u32, k as u32));
            }
        }

        let mut deriv = vec![Vec::new(); nvars];
        if order > 0 {
            // Target space has order - 1 and its layout is a prefix of ours.
            for (src, m) in monomials.iter().enumerate() {
                for (v, table) in deriv.iter_mut().enumerate() {
                    if m[v] == 0 {
                        continue;
                    }
                    let mut lowered = m.clone();
                    lowered[v] -= 1;
                    let dst = index[&lowered];
                    table.push((src as u32, dst as u32, m[v] as f64));
                }
            }
        }

        JetSpace {
            nvars,
            order,
            monomials,
            degrees,
            index,
            mul_table,
            deriv,
        }
    }

    /// Shared space for `nvars` variables truncated at total degree `order`.
    pub fn get(nvars: usize, order: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet space cache poisoned");
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(JetSpace::build(nvars, order)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Vec<u8>] {
        &self.monomials
    }

    /// Position of a multi-index; trailing zeros may be omitted.
    pub fn position(&self, multi_index: &[u8]) -> Option<usize> {
        if multi_index.len() > self.nvars {
            if multi_index[self.nvars..].iter().any(|&e| e != 0) {
                return None;
            }
            return self.index.get(&multi_index[..self.nvars]).copied();
        }
        let mut full = multi_index.to_vec();
        full.resize(self.nvars, 0);
        self.index.get(&full).copied()
    }
}

/// Truncated Taylor expansion of a scalar in `nvars` seed variables.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for (m, c) in self.space.monomials.iter().zip(&self.coeffs) {
            if *c != 0.0 {
                map.entry(m, c);
            }
        }
        map.finish()
    }
}

/// One jet per value, each seeded as an independent variable.
///
/// `seed(&[a, b], 2)` yields `a + h₁` and `b + h₂` truncated at order 2.
pub fn seed(values: &[f64], order: usize) -> Result<Vec<Jet>, JetError> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(JetError::OrderOutOfRange(order));
    }
    if values.is_empty() {
        return Err(JetError::NoVariables);
    }
    if values.len() > MAX_VARS {
        return Err(JetError::TooManyVariables(values.len()));
    }
    let space = JetSpace::get(values.len(), order);
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(&space, i, v))
        .collect())
}

/// Partial derivative `∂^α f` at the base point.
pub fn extract(jet: &Jet, multi_index: &[u8]) -> Result<f64, JetError> {
    jet.derivative_value(multi_index)
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Jet {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = value;
        Jet {
            space: space.clone(),
            coeffs,
        }
    }

    pub fn zero(space: &Arc<JetSpace>) -> Jet {
        Jet::constant(space, 0.0)
    }

    /// `value + h_var`.
    pub fn variable(space: &Arc<JetSpace>, var: usize, value: f64) -> Jet {
        assert!(var < space.nvars, "seed variable {var} out of range");
        let mut jet = Jet::constant(space, value);
        if space.order > 0 {
            // Degree-one monomials follow the constant in variable order.
            jet.coeffs[1 + var] = 1.0;
        }
        jet
    }

    pub fn from_coeffs(space: &Arc<JetSpace>, coeffs: Vec<f64>) -> Jet {
        assert_eq!(coeffs.len(), space.len(), "coefficient count mismatch");
        Jet {
            space: space.clone(),
            coeffs,
        }
    }

    /// A constant living in the same space as `self`.
    pub fn konst(&self, value: f64) -> Jet {
        Jet::constant(&self.space, value)
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.space.order
    }

    pub fn nvars(&self) -> usize {
        self.space.nvars
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Constant term, i.e. the function value at the base point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw Taylor coefficient `c_α`.
    pub fn coeff(&self, multi_index: &[u8]) -> Result<f64, JetError> {
        let degree: usize = multi_index.iter().map(|&e| e as usize).sum();
        if degree > self.order() {
            return Err(JetError::DegreeExceedsOrder {
                degree,
                order: self.order(),
            });
        }
        self.space
            .position(multi_index)
            .map(|i| self.coeffs[i])
            .ok_or(JetError::BadMultiIndex(multi_index.to_vec()))
    }

    /// `α! · c_α`.
    pub fn derivative_value(&self, multi_index: &[u8]) -> Result<f64, JetError> {
        let c = self.coeff(multi_index)?;
        let factorial: f64 = multi_index
            .iter()
            .map(|&e| (1..=e as u32).product::<u32>() as f64)
            .product();
        Ok(c * factorial)
    }

    /// First partial with respect to seed variable `var` at the base point.
    pub fn gradient(&self, var: usize) -> f64 {
        if self.order() == 0 {
            0.0
        } else {
            self.coeffs[1 + var]
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn check_space(&self, other: &Jet) {
        assert!(
            Arc::ptr_eq(&self.space, &other.space),
            "jet space mismatch: {:?} vs {:?}",
            self.space,
            other.space
        );
    }

    /// Drop every term of degree above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let space = JetSpace::get(self.nvars(), order);
        Jet {
            coeffs: self.coeffs[..space.len()].to_vec(),
            space,
        }
    }

    /// `∂f/∂h_var` as a jet of one lower order.
    pub fn differentiate(&self, var: usize) -> Jet {
        assert!(var < self.nvars(), "variable {var} out of range");
        assert!(self.order() > 0, "cannot differentiate an order-0 jet");
        let space = JetSpace::get(self.nvars(), self.order() - 1);
        let mut coeffs = vec![0.0; space.len()];
        for &(src, dst, factor) in &self.space.deriv[var] {
            coeffs[dst as usize] += factor * self.coeffs[src as usize];
        }
        Jet { space, coeffs }
    }

    /// Substitute `h_i = inner_i − inner_i(0)` and re-expand in the space of
    /// the inner jets. The result is accurate to `min(self.order, inner.order)`
    /// and is truncated accordingly.
    pub fn compose(&self, inner: &[Jet]) -> Jet {
        assert_eq!(inner.len(), self.nvars(), "compose arity mismatch");
        let target = inner[0].space.clone();
        for j in inner {
            assert!(Arc::ptr_eq(&j.space, &target), "compose: inner spaces differ");
        }
        let order = self.order().min(target.order);
        let target = JetSpace::get(target.nvars, order);
        let deltas: Vec<Jet> = inner
            .iter()
            .map(|j| {
                let mut d = j.truncate(order);
                d.coeffs[0] = 0.0;
                d
            })
            .collect();
        // powers[v][e] = delta_v^e
        let powers: Vec<Vec<Jet>> = deltas
            .iter()
            .map(|d| {
                let mut p = vec![Jet::constant(&target, 1.0)];
                for e in 1..=order {
                    let next = &p[e - 1] * d;
                    p.push(next);
                }
                p
            })
            .collect();
        let mut out = Jet::zero(&target);
        for (m, (mono, &c)) in self
            .space
            .monomials
            .iter()
            .zip(&self.coeffs)
            .enumerate()
        {
            if c == 0.0 || self.space.degrees[m] > order {
                continue;
            }
            let mut term = Jet::constant(&target, c);
            for (v, &e) in mono.iter().enumerate() {
                if e > 0 {
                    term = &term * &powers[v][e as usize];
                }
            }
            out += &term;
        }
        out
    }

    /// `Σ_k d[k] (self − self(0))^k`, the expansion of a univariate function
    /// whose scaled derivatives at the base value are `d`.
    fn apply_series(&self, d: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let q = self.order().min(d.len() - 1);
        let mut out = self.konst(d[q]);
        for k in (0..q).rev() {
            out = &out * &h;
            out.coeffs[0] += d[k];
        }
        out
    }

    fn series_len(&self) -> usize {
        self.order() + 1
    }

    /// Power with real exponent via the generalized binomial series.
    /// NaN-valued when the base is not positive (unless `p` is an integer).
    pub fn powf(&self, p: f64) -> Jet {
        if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
            return self.powi(p as i32);
        }
        let a = self.value();
        let mut d = Vec::with_capacity(self.series_len());
        let mut binom = 1.0;
        for k in 0..self.series_len() {
            if k > 0 {
                binom *= (p - (k as f64 - 1.0)) / k as f64;
            }
            d.push(binom * a.powf(p - k as f64));
        }
        self.apply_series(&d)
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut out = self.konst(1.0);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                out = &out * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let d: Vec<f64> = (0..self.series_len())
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign / a.powi(k as i32 + 1)
            })
            .collect();
        self.apply_series(&d)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut fact = 1.0;
        let d: Vec<f64> = (0..self.series_len())
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                e / fact
            })
            .collect();
        self.apply_series(&d)
    }

    pub fn ln(&self) -> Jet {
        let a = self.value();
        let d: Vec<f64> = (0..self.series_len())
            .map(|k| {
                if k == 0 {
                    a.ln()
                } else {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    sign / (k as f64 * a.powi(k as i32))
                }
            })
            .collect();
        self.apply_series(&d)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.apply_series(&trig_series(s, c, self.series_len()))
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        // cos(a + h) = sin(a + π/2 + h)
        self.apply_series(&trig_series(c, -s, self.series_len()))
    }

    pub fn checked_div(&self, rhs: &Jet) -> Result<Jet, JetError> {
        if rhs.value() == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        Ok(self * &rhs.recip())
    }

    pub fn checked_sqrt(&self) -> Result<Jet, JetError> {
        if !(self.value() > 0.0) {
            return Err(JetError::NonPositive {
                op: "sqrt",
                value: self.value(),
            });
        }
        Ok(self.sqrt())
    }

    pub fn checked_ln(&self) -> Result<Jet, JetError> {
        if !(self.value() > 0.0) {
            return Err(JetError::NonPositive {
                op: "log",
                value: self.value(),
            });
        }
        Ok(self.ln())
    }

    /// Real power; integer exponents accept any non-zero base.
    pub fn checked_powf(&self, p: f64) -> Result<Jet, JetError> {
        let integral = p.fract() == 0.0;
        if integral && (p >= 0.0 || self.value() != 0.0) {
            return Ok(self.powf(p));
        }
        if integral {
            return Err(JetError::DivisionByZero);
        }
        if !(self.value() > 0.0) {
            return Err(JetError::NonPositive {
                op: "power",
                value: self.value(),
            });
        }
        Ok(self.powf(p))
    }
}

/// Scaled derivatives of `sin` at a point where `sin = s`, `cos = c`.
fn trig_series(s: f64, c: f64, len: usize) -> Vec<f64> {
    let cycle = [s, c, -s, -c];
    let mut fact = 1.0;
    (0..len)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            cycle[k % 4] / fact
        })
        .collect()
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.check_space(rhs);
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.check_space(rhs);
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.check_space(rhs);
        let mut coeffs = vec![0.0; self.coeffs.len()];
        let a = &self.coeffs;
        let b = &rhs.coeffs;
        for &(i, j, k) in &self.space.mul_table {
            let x = a[i as usize];
            if x != 0.0 {
                coeffs[k as usize] += x * b[j as usize];
            }
        }
        Jet {
            space: self.space.clone(),
            coeffs,
        }
    }
}

impl Div<&Jet> for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self * &rhs.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.check_space(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        self.check_space(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += rhs;
        out
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + (-rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| c * rhs).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $f:ident),*) => {$(
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $f(self, rhs: Jet) -> Jet { (&self).$f(&rhs) }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $f(self, rhs: &Jet) -> Jet { (&self).$f(rhs) }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $f(self, rhs: Jet) -> Jet { self.$f(&rhs) }
        }
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $f(self, rhs: f64) -> Jet { (&self).$f(rhs) }
        }
    )*};
}

forward_owned!(Add::add, Sub::sub, Mul::mul);

impl Div<Jet> for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        &self / &rhs
    }
}

impl Div<&Jet> for Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        &self / rhs
    }
}

impl Div<f64> for &Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self * (1.0 / rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        &self * (1.0 / rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self += &rhs;
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self -= &rhs;
    }
}
