use crate::Real;

/// Which triangle rule to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    /// 3-point interior rule, exact to degree 2.
    Degree2,
    /// 6-point Dunavant rule, exact to degree 4.
    Degree4,
    /// 7-point Radon rule, exact to degree 5.
    Degree5,
}

/// Quadrature on the reference triangle `(0,0), (1,0), (0,1)`.
///
/// Points are barycentric; weights are positive and sum to the reference
/// area `1/2`. On a physical triangle of area `A` multiply by `2A`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    pub kind: RuleKind,
    pub degree: usize,
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn new(kind: RuleKind) -> Self {
        let half = T::lit(0.5);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut orbit3 = |a: T, w: T| {
            let b = T::one() - a - a;
            for p in [[b, a, a], [a, b, a], [a, a, b]] {
                points.push(p);
                weights.push(w * half);
            }
        };
        let degree = match kind {
            RuleKind::Degree2 => {
                orbit3(T::one() / T::lit(6.0), T::one() / T::lit(3.0));
                2
            }
            RuleKind::Degree4 => {
                orbit3(T::lit(0.445_948_490_915_964_886_32), T::lit(0.223_381_589_678_011_465_70));
                orbit3(T::lit(0.091_576_213_509_770_743_46), T::lit(0.109_951_743_655_321_867_64));
                4
            }
            RuleKind::Degree5 => {
                let s15 = T::lit(15.0).sqrt();
                let (c21, c1200) = (T::lit(21.0), T::lit(1200.0));
                orbit3((T::lit(6.0) - s15) / c21, (T::lit(155.0) - s15) / c1200);
                orbit3((T::lit(6.0) + s15) / c21, (T::lit(155.0) + s15) / c1200);
                let third = T::one() / T::lit(3.0);
                points.push([third; 3]);
                weights.push(T::lit(9.0) / T::lit(40.0) * half);
                5
            }
        };
        Self {
            kind,
            degree,
            points,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integral over the reference triangle of `f(x, y)`.
    pub fn integrate_reference(&self, f: impl Fn(T, T) -> T) -> T {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(l, &w)| w * f(l[1], l[2]))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn weights_sum_to_reference_area() {
        for k in [RuleKind::Degree2, RuleKind::Degree4, RuleKind::Degree5] {
            let r = QuadratureRule::<f64>::new(k);
            assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for p in &r.points {
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn monomial_exactness() {
        for k in [RuleKind::Degree2, RuleKind::Degree4, RuleKind::Degree5] {
            let r = QuadratureRule::<f64>::new(k);
            for a in 0..=r.degree as u32 {
                for b in 0..=(r.degree as u32 - a) {
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    let got = r.integrate_reference(|x, y| x.powi(a as i32) * y.powi(b as i32));
                    assert!((got - exact).abs() < 1e-14, "{k:?} x^{a} y^{b}: {got} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn degree2_not_exact_for_cubics() {
        let r = QuadratureRule::<f64>::new(RuleKind::Degree2);
        let exact = factorial(3) / factorial(5);
        assert!((r.integrate_reference(|x, _| x.powi(3)) - exact).abs() > 1e-6);
    }
}
