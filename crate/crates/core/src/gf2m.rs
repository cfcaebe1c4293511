//! Arithmetic in GF(2^m) for small m, in the polynomial basis.
//!
//! An element is stored as the bit mask of its polynomial coefficients with
//! the coefficient of x^0 in bit 0.

use std::fmt;

use thiserror::Error;

use crate::bitlinalg::BitMatrix;

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

/// x^8 + x^4 + x^3 + x^2 + 1, primitive over GF(2).
pub const DEFAULT_MODULUS: u32 = 0x11D;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("extension degree {0} outside 1..={MAX_DEGREE}")]
    Degree(u32),
    #[error("modulus {modulus:#x} has degree {found}, expected {expected}")]
    ModulusDegree {
        modulus: u32,
        found: u32,
        expected: u32,
    },
    #[error("modulus {0:#x} is reducible over GF(2)")]
    Reducible(u32),
}

/// Degree of a nonzero polynomial given as a bit mask.
fn degree(p: u32) -> u32 {
    31 - p.leading_zeros()
}

/// Remainder of `a` modulo `b` as polynomials over GF(2).
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
fn is_irreducible(modulus: u32) -> bool {
    let d = degree(modulus);
    (2u32..(1 << (d / 2 + 1))).all(|f| poly_rem(modulus, f) != 0)
}

/// Extension degree and reduction polynomial of GF(2^m).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldParams {
    m: u32,
    modulus: u32,
}

impl FieldParams {
    /// Validates that `modulus` has degree `m` and is irreducible.
    pub fn new(m: u32, modulus: u32) -> Result<Self, FieldError> {
        if m == 0 || m > MAX_DEGREE {
            return Err(FieldError::Degree(m));
        }
        if modulus == 0 || degree(modulus) != m {
            return Err(FieldError::ModulusDegree {
                modulus,
                found: if modulus == 0 { 0 } else { degree(modulus) },
                expected: m,
            });
        }
        if !is_irreducible(modulus) {
            return Err(FieldError::Reducible(modulus));
        }
        Ok(Self { m, modulus })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Field size 2^m.
    pub fn order(&self) -> u32 {
        1 << self.m
    }

    pub fn element(&self, value: u32) -> FieldElement {
        assert!(value < self.order(), "value {value:#x} not below 2^{}", self.m);
        FieldElement { value, field: *self }
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    /// x^k reduced by the modulus.
    pub fn alpha_pow(&self, k: u32) -> FieldElement {
        let x = if self.m == 1 { self.one() } else { self.element(2) };
        (0..k).fold(self.one(), |acc, _| acc * x)
    }

    /// Every element, in increasing value order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order()).map(move |v| self.element(v))
    }
}

impl Default for FieldParams {
    fn default() -> Self {
        Self {
            m: 8,
            modulus: DEFAULT_MODULUS,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    field: FieldParams,
}

impl FieldElement {
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn params(&self) -> &FieldParams {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    /// Multiplicative inverse by exhaustive search; `None` for zero.
    pub fn inverse(&self) -> Option<FieldElement> {
        if self.is_zero() {
            return None;
        }
        self.field.elements().find(|&b| mul(*self, b).value == 1)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#04x}", self.value)
    }
}

pub fn add(a: FieldElement, b: FieldElement) -> FieldElement {
    assert_eq!(a.field, b.field, "elements from different fields");
    FieldElement {
        value: a.value ^ b.value,
        field: a.field,
    }
}

/// Shift-and-add multiplication with reduction by the modulus.
pub fn mul(a: FieldElement, b: FieldElement) -> FieldElement {
    assert_eq!(a.field, b.field, "elements from different fields");
    let top = 1u32 << a.field.m;
    let mut x = a.value;
    let mut y = b.value;
    let mut acc = 0;
    while y != 0 {
        if y & 1 == 1 {
            acc ^= x;
        }
        y >>= 1;
        x <<= 1;
        if x & top != 0 {
            x ^= a.field.modulus;
        }
    }
    FieldElement {
        value: acc,
        field: a.field,
    }
}

/// Coefficient vector of `a`, x^0 first, as a 1×m row.
pub fn expand_bits(a: FieldElement) -> BitMatrix {
    let mut row = BitMatrix::zeros(1, a.field.m as usize);
    for i in 0..a.field.m {
        if (a.value >> i) & 1 == 1 {
            row.set(0, i as usize, true);
        }
    }
    row
}

/// Evaluates the degree-0 linearized polynomial f(x) = message·x at `point`.
pub fn eval_linearized(message: FieldElement, point: FieldElement) -> FieldElement {
    mul(message, point)
}

impl std::ops::Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> Self {
        add(self, rhs)
    }
}

impl std::ops::Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> Self {
        mul(self, rhs)
    }
}
