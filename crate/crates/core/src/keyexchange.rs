//! Modified Diffie-Hellman exchange with the two verification gates: the
//! common-key check and the encryption-key check.
//!
//! All arithmetic is on [`BigUint`], so shares and keys never wrap regardless
//! of the size of the modulus or the secret exponents.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyExchangeError {
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(BigUint),
    #[error("generator {generator} outside [1, {modulus})")]
    GeneratorOutOfRange { generator: BigUint, modulus: BigUint },
    #[error("key share {share} is not below modulus {modulus}")]
    ShareOutOfRange { share: BigUint, modulus: BigUint },
    #[error("{0} must be at least 1")]
    ZeroOperand(&'static str),
}

/// Group parameters: modulus `N` and generator `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParams {
    modulus: BigUint,
    generator: BigUint,
    prime_checked: bool,
}

impl PublicParams {
    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn generator(&self) -> &BigUint {
        &self.generator
    }

    /// Whether the modulus passed the primality test. Composite moduli are
    /// accepted; this flag is how callers tell the two apart.
    pub fn prime_checked(&self) -> bool {
        self.prime_checked
    }
}

/// A secret exponent (`alpha`, `beta`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SecretExponent(BigUint);

impl SecretExponent {
    pub fn new(value: impl Into<BigUint>) -> Self {
        Self(value.into())
    }

    /// Draws a uniformly random exponent of at most `bits` bits.
    pub fn random<R: RngCore + ?Sized>(bits: u32, rng: &mut R) -> Self {
        let nbytes = bits.div_ceil(8) as usize;
        let mut buf = vec![0u8; nbytes];
        rng.fill_bytes(&mut buf);
        let excess = nbytes as u32 * 8 - bits;
        if let Some(top) = buf.first_mut() {
            *top &= 0xffu8.checked_shr(excess).unwrap_or(0);
        }
        Self(BigUint::from_bytes_be(&buf))
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

/// A public share `g^secret mod N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KeyShare(BigUint);

impl KeyShare {
    /// Wraps a share received from the other party, checking it lies in `[0, N)`.
    pub fn received(value: impl Into<BigUint>, params: &PublicParams) -> Result<Self, KeyExchangeError> {
        let value = value.into();
        if value >= params.modulus {
            return Err(KeyExchangeError::ShareOutOfRange {
                share: value,
                modulus: params.modulus.clone(),
            });
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

/// The common secret both parties derive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SharedKey(BigUint);

impl SharedKey {
    /// Wraps an externally supplied value (e.g. one typed in by an operator).
    /// No range check is possible without the params it was derived under.
    pub fn from_value(value: impl Into<BigUint>) -> Self {
        Self(value.into())
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

/// `c1` together with the encryption key `k2` it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationToken {
    c1: BigUint,
    k2: BigUint,
}

impl VerificationToken {
    pub fn c1(&self) -> &BigUint {
        &self.c1
    }

    pub fn k2(&self) -> &BigUint {
        &self.k2
    }
}

/// Validates `N` and `g` and runs the primality test on `N`.
pub fn make_params(modulus: impl Into<BigUint>, generator: impl Into<BigUint>) -> Result<PublicParams, KeyExchangeError> {
    let modulus = modulus.into();
    let generator = generator.into();
    if modulus < BigUint::from(2u32) {
        return Err(KeyExchangeError::ModulusTooSmall(modulus));
    }
    if generator.is_zero() || generator >= modulus {
        return Err(KeyExchangeError::GeneratorOutOfRange { generator, modulus });
    }
    let prime_checked = is_prime(&modulus);
    Ok(PublicParams {
        modulus,
        generator,
        prime_checked,
    })
}

/// `g^secret mod N`.
pub fn public_share(params: &PublicParams, secret: &SecretExponent) -> KeyShare {
    KeyShare(mod_pow(&params.generator, &secret.0, &params.modulus))
}

/// `other_share^own_secret mod N`.
pub fn shared_key(
    params: &PublicParams,
    other_share: &KeyShare,
    own_secret: &SecretExponent,
) -> Result<SharedKey, KeyExchangeError> {
    if other_share.0 >= params.modulus {
        return Err(KeyExchangeError::ShareOutOfRange {
            share: other_share.0.clone(),
            modulus: params.modulus.clone(),
        });
    }
    Ok(SharedKey(mod_pow(&other_share.0, &own_secret.0, &params.modulus)))
}

/// Common-key gate: exact equality of the locally derived key and the entered one.
pub fn verify_common(cmk_local: &SharedKey, cmk_entered: &BigUint) -> bool {
    &cmk_local.0 == cmk_entered
}

/// Builds `c1 = k2 * cmk2`, the only value for which the encryption-key gate
/// recovers `k2`.
pub fn issue_token(k2: &BigUint, cmk2: &SharedKey) -> Result<VerificationToken, KeyExchangeError> {
    if k2.is_zero() {
        return Err(KeyExchangeError::ZeroOperand("k2"));
    }
    if cmk2.0.is_zero() {
        return Err(KeyExchangeError::ZeroOperand("cmk2"));
    }
    Ok(VerificationToken {
        c1: k2 * &cmk2.0,
        k2: k2.clone(),
    })
}

/// Encryption-key gate: `k2_entered == c1 / cmk2` with exact division.
/// A nonzero remainder (or `cmk2 == 0`) rejects.
pub fn verify_encryption_key(k2_entered: &BigUint, token: &VerificationToken, cmk2: &SharedKey) -> bool {
    if cmk2.0.is_zero() {
        return false;
    }
    let (quotient, remainder) = token.c1.div_rem(&cmk2.0);
    remainder.is_zero() && &quotient == k2_entered
}

/// Right-to-left square-and-multiply.
pub fn mod_pow(base: &BigUint, exponent: &BigUint, modulus: &BigUint) -> BigUint {
    if modulus.is_one() {
        return BigUint::zero();
    }
    if let (Some(b), Some(m)) = (base.to_u64(), modulus.to_u64()) {
        return BigUint::from(mod_pow_u64(b, exponent, m));
    }
    let mut result = BigUint::one();
    let mut acc = base % modulus;
    let bits = exponent.bits();
    for i in 0..bits {
        if exponent.bit(i) {
            result = (&result * &acc) % modulus;
        }
        if i + 1 < bits {
            acc = (&acc * &acc) % modulus;
        }
    }
    result
}

fn mod_pow_u64(base: u64, exponent: &BigUint, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut result: u128 = 1;
    let mut acc = base as u128 % m;
    let bits = exponent.bits();
    for i in 0..bits {
        if exponent.bit(i) {
            result = result * acc % m;
        }
        if i + 1 < bits {
            acc = acc * acc % m;
        }
    }
    result as u64
}

const SMALL_PRIMES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Miller-Rabin with the first 13 primes as witnesses is exact below this bound.
const DETERMINISTIC_BOUND: &str = "3317044064679887385961981";

/// Primality test. Exact for `n < 3.3e24`; above that it is a Miller-Rabin
/// probable-prime test over 24 fixed prime bases.
pub fn is_prime(n: &BigUint) -> bool {
    if n < &BigUint::from(2u32) {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = BigUint::from(p);
        if n == &p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let bound: BigUint = DETERMINISTIC_BOUND.parse().expect("valid literal");
    let witnesses = if n < &bound { &SMALL_PRIMES[..13] } else { &SMALL_PRIMES[..] };

    let one = BigUint::one();
    let n_minus_one = n - &one;
    let twos = n_minus_one.trailing_zeros().unwrap_or(0);
    let odd = &n_minus_one >> twos;
    'witness: for &a in witnesses {
        let mut x = mod_pow(&BigUint::from(a), &odd, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..twos {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
