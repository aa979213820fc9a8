//! Gauss rules on intervals and triangles, plus a log-log slope fit.

const GL4_X: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GL4_W: [f64; 4] = [0.347_854_845_137_453_8, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_8];

/// Composite 4-point Gauss-Legendre nodes and weights on `[a, b]`.
pub fn composite_gauss(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let panels = panels.max(1);
    let w = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(4 * panels);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * w;
        for (x, wt) in GL4_X.iter().zip(GL4_W) {
            out.push((mid + 0.5 * w * x, 0.5 * w * wt));
        }
    }
    out
}

/// Composite Gauss on `[a, b]` with panel edges forced at the given breakpoints.
pub fn composite_gauss_split(a: f64, b: f64, breaks: &[f64], per_unit: f64) -> Vec<(f64, f64)> {
    let mut edges: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges
        .windows(2)
        .flat_map(|w| composite_gauss(w[0], w[1], panels_for(w[1] - w[0], per_unit)))
        .collect()
}

/// Panel count for a target density in panels per unit length.
pub fn panels_for(len: f64, per_unit: f64) -> usize {
    ((len.abs() * per_unit).ceil() as usize).max(1)
}

/// Gauss-Legendre 2-point rule on `[0, 1]`.
pub const GL2_UNIT: [(f64, f64); 2] = [(0.211_324_865_405_187_1, 0.5), (0.788_675_134_594_812_9, 0.5)];

/// Gauss-Legendre 3-point rule on `[0, 1]`.
pub const GL3_UNIT: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// Degree-5 seven-point rule on a triangle: barycentric coordinates and weights summing to 1.
pub const TRI7: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_770;
    const B1: f64 = 0.470_142_064_105_115;
    const A2: f64 = 0.797_426_985_353_087;
    const B2: f64 = 0.101_286_507_323_456;
    const W1: f64 = 0.132_394_152_788_506;
    const W2: f64 = 0.125_939_180_544_827;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// Least-squares slope of `ln y` against `ln x`; `None` for fewer than two usable points.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    loglog_fit(x, y).map(|f| f.0)
}

/// Slope of the log-log least-squares line and its standard error.
///
/// Non-positive or non-finite points are skipped. The error is NaN with only
/// two usable points.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let rss: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let se = if pts.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    Some((slope, se))
}
