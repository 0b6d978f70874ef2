//! Quadrature rules on triangles and on segments.

/// A quadrature rule on a triangle in barycentric coordinates. Weights sum to
/// one, so integrals are `area * Σ w_q f(x_q)`.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Six-point symmetric rule, exact for polynomials of degree 4.
    pub fn degree4() -> Self {
        const A1: f64 = 0.445_948_490_915_965;
        const B1: f64 = 0.108_103_018_168_070;
        const W1: f64 = 0.223_381_589_678_011;
        const A2: f64 = 0.091_576_213_509_771;
        const B2: f64 = 0.816_847_572_980_459;
        const W2: f64 = 0.109_951_743_655_322;
        let points = vec![
            [B1, A1, A1],
            [A1, B1, A1],
            [A1, A1, B1],
            [B2, A2, A2],
            [A2, B2, A2],
            [A2, A2, B2],
        ];
        let weights = vec![W1, W1, W1, W2, W2, W2];
        Self { points, weights }
    }

    /// Collapsed (Duffy) tensor Gauss-Legendre rule with `order` points per
    /// direction, exact for polynomials of degree `2*order - 2`.
    pub fn collapsed_gauss(order: usize) -> Self {
        let (x, w) = gauss_legendre_unit(order);
        let mut points = Vec::with_capacity(order * order);
        let mut weights = Vec::with_capacity(order * order);
        for (&u, &wu) in x.iter().zip(&w) {
            for (&v, &wv) in x.iter().zip(&w) {
                let xi = u;
                let eta = v * (1.0 - u);
                points.push([1.0 - xi - eta, xi, eta]);
                weights.push(2.0 * wu * wv * (1.0 - u));
            }
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]` (weights sum to one).
pub fn gauss_legendre_unit(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order {
        // Chebyshev guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
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
        dp = if d != 0.0 { d } else { dp };
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
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
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Three-point Gauss rule on `[0, 1]`, exact to degree 5.
pub fn edge_gauss3() -> ([f64; 3], [f64; 3]) {
    let d = 0.5 * (0.6f64).sqrt();
    ([0.5 - d, 0.5, 0.5 + d], [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])
}
