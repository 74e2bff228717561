use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2^61 - 1.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// An element of the prime field of order `Z`, always held in `[0, Z)`.
///
/// `Z` must be prime and below 2^63. The production field is [`Fe`]; the test
/// suite instantiates small fields such as `Fp<17>` for exhaustive checks.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fp<const Z: u64>(u64);

/// Production field element, modulus 2^61 - 1.
pub type Fe = Fp<MERSENNE_61>;

impl<const Z: u64> Fp<Z> {
    pub const MODULUS: u64 = Z;
    pub const ZERO: Self = Fp(0);
    pub const ONE: Self = Fp(1);

    /// Reduces an arbitrary integer into the field.
    pub fn new(value: u64) -> Self {
        Fp(value % Z)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Uniform element of `[0, Z)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Fp(rng.gen_range(0..Z))
    }

    /// Uniform element of `[1, Z)`.
    pub fn random_nonzero<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Fp(rng.gen_range(1..Z))
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(Z - 2))
    }

    #[inline]
    fn reduce_wide(x: u128) -> u64 {
        if Z == MERSENNE_61 {
            // x < 2^122, so two folds bring it below 2^62 and one subtraction finishes.
            let folded = (x & MERSENNE_61 as u128) + (x >> 61);
            let folded = (folded & MERSENNE_61 as u128) + (folded >> 61);
            let r = folded as u64;
            if r >= MERSENNE_61 {
                r - MERSENNE_61
            } else {
                r
            }
        } else {
            (x % Z as u128) as u64
        }
    }
}

impl<const Z: u64> From<u64> for Fp<Z> {
    fn from(value: u64) -> Self {
        Fp::new(value)
    }
}

impl<const Z: u64> fmt::Debug for Fp<Z> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const Z: u64> fmt::Display for Fp<Z> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const Z: u64> Add for Fp<Z> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let s = self.0 + rhs.0;
        Fp(if s >= Z { s - Z } else { s })
    }
}

impl<const Z: u64> Sub for Fp<Z> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Fp(if self.0 >= rhs.0 { self.0 - rhs.0 } else { self.0 + Z - rhs.0 })
    }
}

impl<const Z: u64> Neg for Fp<Z> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::ZERO - self
    }
}

impl<const Z: u64> Mul for Fp<Z> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Fp(Self::reduce_wide(self.0 as u128 * rhs.0 as u128))
    }
}

impl<const Z: u64> AddAssign for Fp<Z> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<const Z: u64> SubAssign for Fp<Z> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<const Z: u64> MulAssign for Fp<Z> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<const Z: u64> Sum for Fp<Z> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl<const Z: u64> Product for Fp<Z> {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ONE, |a, b| a * b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type F17 = Fp<17>;

    #[test]
    fn add_examples() {
        assert_eq!(Fe::new(0) + Fe::new(7), Fe::new(7));
        assert_eq!(Fe::new(MERSENNE_61 - 1) + Fe::new(1), Fe::ZERO);
        assert_eq!(Fe::new(3) + Fe::new(4), Fe::new(7));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(Fe::new(1) * Fe::new(9), Fe::new(9));
        assert_eq!(Fe::new(0) * Fe::new(9), Fe::ZERO);
        assert_eq!(Fe::new(2).pow(3), Fe::new(8));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Fe::ONE.inv().unwrap(), Fe::ONE);
        let minus_one = Fe::new(MERSENNE_61 - 1);
        assert_eq!(minus_one.inv().unwrap(), minus_one);
        assert_eq!(Fe::ZERO.inv(), Err(Error::DivisionByZero));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x = Fe::random_nonzero(&mut rng);
            assert_eq!(x * x.inv().unwrap(), Fe::ONE);
        }
    }

    #[test]
    fn pow_edges() {
        let x = Fe::new(123_456_789);
        assert_eq!(x.pow(0), Fe::ONE);
        assert_eq!(x.pow(1), x);
        assert_eq!(Fe::ZERO.pow(0), Fe::ONE);
    }

    #[test]
    fn mersenne_reduction_matches_generic_modulo() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let a = rng.gen_range(0..MERSENNE_61);
            let b = rng.gen_range(0..MERSENNE_61);
            let expect = ((a as u128 * b as u128) % MERSENNE_61 as u128) as u64;
            assert_eq!((Fe::new(a) * Fe::new(b)).value(), expect);
        }
        let top = Fe::new(MERSENNE_61 - 1);
        assert_eq!(top * top, Fe::ONE);
    }

    // Exhaustive field axioms in the mirror field, against integer arithmetic mod 17.
    #[test]
    fn mirror_field_axioms_exhaustive() {
        for a in 0..17u64 {
            for b in 0..17u64 {
                let (fa, fb) = (F17::new(a), F17::new(b));
                assert_eq!((fa + fb).value(), (a + b) % 17);
                assert_eq!((fa * fb).value(), (a * b) % 17);
                assert_eq!((fa - fb).value(), (a + 17 - b) % 17);
                assert_eq!(fa + fb, fb + fa);
                assert_eq!(fa * fb, fb * fa);
                for c in 0..17u64 {
                    let fc = F17::new(c);
                    assert_eq!((fa + fb) + fc, fa + (fb + fc));
                    assert_eq!((fa * fb) * fc, fa * (fb * fc));
                    assert_eq!(fa * (fb + fc), fa * fb + fa * fc);
                }
            }
            if a != 0 {
                let inv = F17::new(a).inv().unwrap();
                let brute = (1..17).find(|y| (a * y) % 17 == 1).unwrap();
                assert_eq!(inv.value(), brute);
            }
        }
    }

    proptest! {
        #[test]
        fn production_field_axioms(a in 0..MERSENNE_61, b in 0..MERSENNE_61, c in 0..MERSENNE_61) {
            let (a, b, c) = (Fe::new(a), Fe::new(b), Fe::new(c));
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!(a - a, Fe::ZERO);
            prop_assert!(a.value() < MERSENNE_61);
        }
    }
}
