//! Closed-form P1 element and edge integrals.

pub type Point = [f64; 2];

/// Signed area and barycentric gradients of a triangle.
pub fn gradients(v: &[Point; 3]) -> (f64, [Point; 3]) {
    let area2 =
        (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    let mut g = [[0.0; 2]; 3];
    for k in 0..3 {
        let (p, q) = (v[(k + 1) % 3], v[(k + 2) % 3]);
        g[k] = [(p[1] - q[1]) / area2, (q[0] - p[0]) / area2];
    }
    (0.5 * area2, g)
}

/// `∫_T κ ∇φ_k·∇φ_l`
pub fn stiffness(v: &[Point; 3], kappa: f64) -> [[f64; 3]; 3] {
    let (area, g) = gradients(v);
    let mut k = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            k[a][b] = kappa * area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
        }
    }
    k
}

/// `∫_T κ φ_k φ_l`
pub fn mass(v: &[Point; 3], kappa: f64) -> [[f64; 3]; 3] {
    let (area, _) = gradients(v);
    let mut m = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            m[a][b] = kappa * area / 12.0 * if a == b { 2.0 } else { 1.0 };
        }
    }
    m
}

/// `∫_T f φ_k` by the edge-midpoint rule (exact for quadratic integrands).
pub fn load<F: Fn(f64, f64) -> f64 + ?Sized>(v: &[Point; 3], f: &F) -> [f64; 3] {
    let (area, _) = gradients(v);
    let mid = |a: usize, b: usize| f(0.5 * (v[a][0] + v[b][0]), 0.5 * (v[a][1] + v[b][1]));
    // midpoint opposite vertex k is where φ_k vanishes; φ_k = 1/2 at the other two
    let (f01, f12, f20) = (mid(0, 1), mid(1, 2), mid(2, 0));
    [
        area / 3.0 * 0.5 * (f01 + f20),
        area / 3.0 * 0.5 * (f01 + f12),
        area / 3.0 * 0.5 * (f12 + f20),
    ]
}

/// `∫_e φ_a φ_b` for the two endpoint hats of a straight edge.
pub fn edge_mass(length: f64) -> [[f64; 2]; 2] {
    [[length / 3.0, length / 6.0], [length / 6.0, length / 3.0]]
}

/// `∇φ_k·n` for each vertex of the triangle.
pub fn normal_derivatives(v: &[Point; 3], normal: Point) -> [f64; 3] {
    let (_, g) = gradients(v);
    g.map(|gk| gk[0] * normal[0] + gk[1] * normal[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_triangle_stiffness() {
        for h in [1.0, 0.01, 3.5] {
            let k = stiffness(&[[0.0, 0.0], [h, 0.0], [0.0, h]], 1.0);
            let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
            for a in 0..3 {
                for b in 0..3 {
                    assert!((k[a][b] - expect[a][b]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn mass_sums_to_area() {
        let m = mass(&[[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]], 3.0);
        let total: f64 = m.iter().flatten().sum();
        assert!((total - 3.0).abs() < 1e-14);
    }

    #[test]
    fn load_is_exact_for_linear_source() {
        let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        // ∫_T x φ_k over the reference triangle: (1/24)·(1, 2, 1)
        let b = load(&v, &|x: f64, _y: f64| x);
        assert!((b[0] - 1.0 / 24.0).abs() < 1e-15);
        assert!((b[1] - 2.0 / 24.0).abs() < 1e-15);
        assert!((b[2] - 1.0 / 24.0).abs() < 1e-15);
    }
}
