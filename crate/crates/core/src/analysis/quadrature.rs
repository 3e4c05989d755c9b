//! Gauss–Legendre rules and their composite form.

use std::f64::consts::PI;

use rayon::prelude::*;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be at least 1");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Abscissae of the composite rule with `panels` equal panels on `[a, b]`,
    /// paired with their weights.
    pub fn composite_points(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        (0..panels)
            .flat_map(|k| {
                let left = a + k as f64 * h;
                self.nodes
                    .iter()
                    .zip(&self.weights)
                    .map(move |(x, w)| (left + 0.5 * h * (x + 1.0), 0.5 * h * w))
            })
            .collect()
    }

    /// Composite integral; evaluations run in parallel, the sum is taken in
    /// index order so the result does not depend on thread count.
    pub fn integrate<F, E>(&self, f: F, a: f64, b: f64, panels: usize) -> Result<f64, E>
    where
        F: Fn(f64) -> Result<f64, E> + Sync,
        E: Send,
    {
        let points = self.composite_points(a, b, panels);
        let values = points.par_iter().map(|(x, _)| f(*x)).collect::<Result<Vec<f64>, E>>()?;
        Ok(points.iter().zip(values).map(|((_, w), v)| w * v).sum())
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for order in 1..=12 {
            let rule = GaussLegendre::new(order);
            assert!((rule.weights().iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..(2 * order) {
                let got: f64 = rule
                    .nodes()
                    .iter()
                    .zip(rule.weights())
                    .map(|(x, w)| w * x.powi(deg as i32))
                    .sum();
                let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - want).abs() < 1e-12, "order {order} deg {deg}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn nodes_sorted_and_symmetric() {
        let rule = GaussLegendre::new(9);
        assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
        for (a, b) in rule.nodes().iter().zip(rule.nodes().iter().rev()) {
            assert!((a + b).abs() < 1e-15);
        }
    }

    #[test]
    fn composite_sine() {
        let rule = GaussLegendre::new(4);
        let got = rule.integrate(|x| Ok::<_, ()>(x.sin()), 0.0, PI, 8).unwrap();
        assert!((got - 2.0).abs() < 1e-10);
    }
}
