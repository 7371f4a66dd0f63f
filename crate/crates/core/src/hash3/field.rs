//! Arithmetic in `GF(2^n)` for `1 <= n <= 64`.

/// Low-order coefficients of a fixed irreducible polynomial of degree `n`
/// for each `n` in `1..=64`; the leading `x^n` term is implicit. Entry
/// `n - 1` belongs to degree `n`. Changing an entry changes every recorded
/// transcript, so the table is frozen.
pub const IRREDUCIBLE: [u64; 64] = [
    0x1, 0x3, 0x3, 0x3, 0x5, 0x3, 0x3, 0x1b, // 1..=8
    0x3, 0x9, 0x5, 0x9, 0x1b, 0x21, 0x3, 0x2b, // 9..=16
    0x9, 0x9, 0x27, 0x9, 0x5, 0x3, 0x21, 0x1b, // 17..=24
    0x9, 0x1b, 0x27, 0x3, 0x5, 0x3, 0x9, 0x8d, // 25..=32
    0x401, 0x81, 0x5, 0x201, 0x53, 0x63, 0x11, 0x39, // 33..=40
    0x9, 0x81, 0x59, 0x21, 0x1b, 0x3, 0x21, 0x2d, // 41..=48
    0x201, 0x1d, 0x4b, 0x9, 0x47, 0x201, 0x81, 0x95, // 49..=56
    0x11, 0x80001, 0x95, 0x3, 0x27, 0x20000001, 0x3, 0x1b, // 57..=64
];

pub fn reduction_low(n: u32) -> u64 {
    IRREDUCIBLE[(n - 1) as usize]
}

#[inline]
fn xtime(a: u64, n: u32, poly: u64) -> u64 {
    let carry = (a >> (n - 1)) & 1;
    let shifted = if n == 64 { a << 1 } else { (a << 1) & ((1u64 << n) - 1) };
    if carry == 1 {
        shifted ^ poly
    } else {
        shifted
    }
}

/// Product of `a` and `b` in `GF(2^n)`.
pub fn gf2n_mul(a: u64, b: u64, n: u32) -> u64 {
    debug_assert!((1..=64).contains(&n));
    let poly = reduction_low(n);
    let (mut a, mut b, mut acc) = (a, b, 0u64);
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a = xtime(a, n, poly);
    }
    acc
}

pub fn gf2n_pow(mut a: u64, mut e: u128, n: u32) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = gf2n_mul(acc, a, n);
        }
        a = gf2n_mul(a, a, n);
        e >>= 1;
    }
    acc
}

/// Multiplicative inverse via `a^(2^n - 2)`; `None` for zero.
pub fn gf2n_inv(a: u64, n: u32) -> Option<u64> {
    (a != 0).then(|| gf2n_pow(a, (1u128 << n) - 2, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Polynomials over GF(2) of degree < 128 as bitmasks.
    fn deg(p: u128) -> i32 {
        127 - p.leading_zeros() as i32
    }

    fn poly_mod(mut a: u128, b: u128) -> u128 {
        let db = deg(b);
        while a != 0 && deg(a) >= db {
            a ^= b << (deg(a) - db);
        }
        a
    }

    fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            let r = poly_mod(a, b);
            a = b;
            b = r;
        }
        a
    }

    fn clmul_mod(a: u128, b: u128, f: u128) -> u128 {
        let mut acc = 0u128;
        let mut a = a;
        let mut b = b;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a = poly_mod(a << 1, f);
        }
        acc
    }

    fn x_pow_2k(k: u32, f: u128) -> u128 {
        let mut r = 2u128; // x
        for _ in 0..k {
            r = clmul_mod(r, r, f);
        }
        r
    }

    fn full_poly(n: u32) -> u128 {
        (1u128 << n) | reduction_low(n) as u128
    }

    fn prime_factors(mut n: u32) -> Vec<u32> {
        let mut out = vec![];
        let mut p = 2;
        while n > 1 {
            if n % p == 0 {
                out.push(p);
                while n % p == 0 {
                    n /= p;
                }
            }
            p += 1;
        }
        out
    }

    #[test]
    fn table_entries_pass_rabin_test() {
        for n in 1..=64u32 {
            let f = full_poly(n);
            assert_eq!(x_pow_2k(n, f), poly_mod(2, f), "n={n}");
            for q in prime_factors(n) {
                let h = x_pow_2k(n / q, f) ^ poly_mod(2, f);
                assert_eq!(poly_gcd(f, h), 1, "n={n} q={q}");
            }
        }
    }

    #[test]
    fn table_entries_have_no_small_factor() {
        for n in 1..=16u32 {
            let f = full_poly(n);
            for d in 1..=n / 2 {
                for low in 0..(1u128 << d) {
                    let g = (1u128 << d) | low;
                    assert_ne!(poly_mod(f, g), 0, "n={n} divisible by {g:#b}");
                }
            }
        }
    }

    #[test]
    fn gf8_example() {
        assert_eq!(gf2n_mul(0b110, 0b011, 3), 0b001);
        // Schoolbook oracle: (x^2+x)(x+1) = x^3 + x = (x+1) + x = 1 mod x^3+x+1.
        let f = full_poly(3);
        assert_eq!(clmul_mod(0b110, 0b011, f), 0b001);
    }

    #[test]
    fn matches_schoolbook_on_all_small_fields() {
        for n in 1..=6u32 {
            let f = full_poly(n);
            for a in 0..(1u64 << n) {
                for b in 0..(1u64 << n) {
                    assert_eq!(gf2n_mul(a, b, n) as u128, clmul_mod(a as u128, b as u128, f));
                }
            }
        }
    }

    #[test]
    fn inverses_exist() {
        for n in 1..=8u32 {
            for a in 1..(1u64 << n) {
                let inv = gf2n_inv(a, n).unwrap();
                assert_eq!(gf2n_mul(a, inv, n), 1, "n={n} a={a}");
            }
            assert_eq!(gf2n_inv(0, n), None);
        }
    }

    fn elems() -> impl Strategy<Value = (u32, u64, u64, u64)> {
        (1u32..=64).prop_flat_map(|n| {
            let m = crate::dist::mask(n);
            (Just(n), any::<u64>(), any::<u64>(), any::<u64>())
                .prop_map(move |(n, a, b, c)| (n, a & m, b & m, c & m))
        })
    }

    proptest! {
        #[test]
        fn field_axioms((n, a, b, c) in elems()) {
            prop_assert_eq!(gf2n_mul(a, b, n), gf2n_mul(b, a, n));
            prop_assert_eq!(gf2n_mul(gf2n_mul(a, b, n), c, n), gf2n_mul(a, gf2n_mul(b, c, n), n));
            prop_assert_eq!(gf2n_mul(a, b ^ c, n), gf2n_mul(a, b, n) ^ gf2n_mul(a, c, n));
            prop_assert_eq!(gf2n_mul(a, 1, n), a);
            prop_assert_eq!(gf2n_mul(a, 0, n), 0);
            prop_assert!(gf2n_mul(a, b, n) <= crate::dist::mask(n));
        }

        #[test]
        fn schoolbook_agrees((n, a, b, _c) in elems()) {
            prop_assert_eq!(gf2n_mul(a, b, n) as u128, clmul_mod(a as u128, b as u128, full_poly(n)));
        }
    }
}
