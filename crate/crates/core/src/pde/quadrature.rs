//! Gauss–Legendre rules on panels.

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "rule needs at least one node");
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite rule: `panels` equal panels of an `order`-point rule.
#[derive(Debug, Clone)]
pub struct Composite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: usize,
}

impl Composite {
    pub fn new(order: usize, panels: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Composite { nodes, weights, panels: panels.max(1) }
    }

    /// Abscissae and weights mapped onto `[a, b]`.
    pub fn points(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.panels * self.nodes.len());
        let h = (b - a) / self.panels as f64;
        for p in 0..self.panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + 0.5 * h * x, 0.5 * h * w));
            }
        }
        out
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        if b == a {
            return 0.0;
        }
        self.points(a, b).into_iter().map(|(x, w)| w * f(x)).sum()
    }
}
