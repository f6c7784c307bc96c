use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

/// The function `x ↦ a·x + b` with exact rational coefficients.
///
/// Equality is structural: two forms are equal iff both coefficients are.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineForm {
    pub a: Rational,
    pub b: Rational,
}

impl AffineForm {
    pub fn new(a: Rational, b: Rational) -> Self {
        AffineForm { a, b }
    }

    pub fn constant(b: Rational) -> Self {
        AffineForm {
            a: Rational::zero(),
            b,
        }
    }

    /// The identity form `x`.
    pub fn identity() -> Self {
        AffineForm {
            a: Rational::one(),
            b: Rational::zero(),
        }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        &(&self.a * x) + &self.b
    }

    pub fn scale_int(&self, k: i64) -> Self {
        AffineForm {
            a: self.a.mul_int(k),
            b: self.b.mul_int(k),
        }
    }

    pub fn half(&self) -> Self {
        AffineForm {
            a: self.a.half(),
            b: self.b.half(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.a.is_zero()
    }

    /// The unique point where `self` and `other` agree, or `None` for parallel
    /// (including identical) forms.
    pub fn intersection(&self, other: &AffineForm) -> Option<Rational> {
        let da = &self.a - &other.a;
        if da.is_zero() {
            return None;
        }
        Some(&(&other.b - &self.b) / &da)
    }
}

pub fn affine_eval(f: &AffineForm, x: &Rational) -> Rational {
    f.eval(x)
}

pub fn affine_intersection(f: &AffineForm, g: &AffineForm) -> Option<Rational> {
    f.intersection(g)
}

impl Add for &AffineForm {
    type Output = AffineForm;
    fn add(self, rhs: &AffineForm) -> AffineForm {
        AffineForm {
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
        }
    }
}

impl Sub for &AffineForm {
    type Output = AffineForm;
    fn sub(self, rhs: &AffineForm) -> AffineForm {
        AffineForm {
            a: &self.a - &rhs.a,
            b: &self.b - &rhs.b,
        }
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.a.is_zero() {
            return write!(f, "{}", self.b);
        }
        write!(f, "{}·x", self.a)?;
        if self.b.is_negative() {
            write!(f, " - {}", -&self.b)
        } else if !self.b.is_zero() {
            write!(f, " + {}", self.b)
        } else {
            Ok(())
        }
    }
}

impl fmt::Debug for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn form(a: &str, b: &str) -> AffineForm {
        AffineForm::new(q(a), q(b))
    }

    #[test]
    fn eval_examples() {
        assert_eq!(form("333/8", "-325/16").eval(&q("341/666")), q("1"));
        assert_eq!(form("-225/2", "76").eval(&q("2/3")), q("1"));
        for x in ["0", "-7/3", "123456789/1000000007"] {
            assert_eq!(AffineForm::identity().eval(&q(x)), q(x));
        }
    }

    #[test]
    fn intersection_examples() {
        let f = form("333/8", "-325/16");
        let g = form("-2840973/32", "2909701/64");
        let h = form("2842297/32", "-2910929/64");
        assert_eq!(f.intersection(&g), Some(q("2911001/5684610")));
        assert_eq!(g.intersection(&h), Some(q("339/662")));
        assert_eq!(form("5", "1").intersection(&form("5", "2")), None);
        assert_eq!(f.intersection(&f), None);
    }

    #[test]
    fn display_reads_naturally() {
        assert_eq!(form("333/8", "-325/16").to_string(), "333/8·x - 325/16");
        assert_eq!(form("0", "1/2").to_string(), "1/2");
        assert_eq!(form("3", "0").to_string(), "3·x");
    }

    #[test]
    fn json_shape() {
        let f = form("-225/2", "76");
        assert_eq!(
            serde_json::to_string(&f).unwrap(),
            r#"{"a":"-225/2","b":"76"}"#
        );
        let back: AffineForm = serde_json::from_str(r#"{"a": "-450/4", "b": "76/1"}"#).unwrap();
        assert_eq!(back, f);
    }

    proptest! {
        #[test]
        fn intersection_is_a_common_point(
            a1 in -1000i64..1000, b1 in -1000i64..1000, a2 in -1000i64..1000, b2 in -1000i64..1000,
            d1 in 1i64..64, d2 in 1i64..64,
        ) {
            let f = AffineForm::new(Rational::frac(a1, d1), Rational::frac(b1, d2));
            let g = AffineForm::new(Rational::frac(a2, d2), Rational::frac(b2, d1));
            match f.intersection(&g) {
                Some(x) => prop_assert_eq!(f.eval(&x), g.eval(&x)),
                None => prop_assert_eq!(&f.a, &g.a),
            }
        }
    }
}
