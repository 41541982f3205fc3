//! Catalan numbers and the explicit coefficient and growth bounds.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::loops::LoopSequence;
use crate::rational::Rational;

/// The n-th Catalan number, from C_{n+1} = 2(2n+1)/(n+2) · C_n.
pub fn catalan(n: usize) -> BigInt {
    let mut c = BigInt::one();
    for j in 0..n {
        c = c * (2 * (2 * j + 1)) / (j + 2);
    }
    c
}

/// K = 2048·d.
pub fn k_constant(dim: usize) -> u64 {
    2048 * dim as u64
}

/// K^{(5+k)i + ι(s)} · |s|^{2k} · ∏_r C_{δ_r − 1}.
pub fn coeff_bound(s: &LoopSequence, i: u32, k: u32) -> Rational {
    let kk = BigInt::from(k_constant(s.dim()));
    let exp = (5 + k as usize) * i as usize + s.index();
    let len = BigInt::from(s.length());
    let len_pow = if k == 0 { BigInt::one() } else if len.is_zero() { BigInt::zero() } else { num_traits::pow(len, 2 * k as usize) };
    let cat: BigInt = s.degrees().iter().map(|&d| catalan(d - 1)).product();
    Rational::from_integer(num_traits::pow(kk, exp) * len_pow * cat)
}

/// (2^{2k+13} · d)^{|s|}.
pub fn growth_bound(s: &LoopSequence, k: u32) -> Rational {
    let base = (BigInt::one() << (2 * k as usize + 13)) * BigInt::from(s.dim());
    Rational::from_integer(num_traits::pow(base, s.length()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_loop_dsl;

    #[test]
    fn first_catalan_numbers() {
        let v: Vec<BigInt> = (0..8).map(catalan).collect();
        let want: Vec<BigInt> = [1, 1, 2, 5, 14, 42, 132, 429].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(v, want);
    }

    #[test]
    fn plaquette_bound_at_order_zero() {
        let p = parse_loop_dsl("+1 +2 -1 -2", 2).unwrap();
        let want = BigInt::from(4096u64).pow(3) * BigInt::from(5);
        assert_eq!(coeff_bound(&p, 0, 0), Rational::from_integer(want));
    }
}
