/// Analytic localization boundary of the single-particle model,
/// `V1c = e^{−|h|}·(2K·cosh|g| + 2·√(K² − V2²)·sinh|g|)` with `K = max(t, V2)`.
pub fn boundary_v1c(g: f64, h: f64, v2: f64, t: f64) -> f64 {
    let k = t.max(v2);
    let (g, h) = (g.abs(), h.abs());
    (-h).exp() * (2.0 * k * g.cosh() + 2.0 * (k * k - v2 * v2).max(0.0).sqrt() * g.sinh())
}
