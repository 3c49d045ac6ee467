//! Derivative-free 1-D maximization: coarse bracket, golden-section, and a
//! final parabolic polish.
//!
//! The objectives here (log-likelihood over frequency, amplitude-fit
//! residual over the mixing weight) are smooth but can carry side ripples,
//! so a scan first localizes the dominant lobe and golden section then
//! contracts inside it.

/// Maximizes `f` on `[lo, hi]`.
///
/// `coarse` evaluation points bracket the best lobe (at least 3 are used),
/// golden section contracts the bracket until its width drops below
/// `tol * max(1, |lo| + |hi|)`, and a parabola through the last bracket
/// polishes the result. Returns `(argmax, max)`.
///
/// # Panics
/// Panics unless `lo < hi` and both are finite.
pub(crate) fn maximize(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, coarse: usize, tol: f64) -> (f64, f64) {
    assert!(lo.is_finite() && hi.is_finite() && lo < hi, "bad interval [{lo}, {hi}]");
    let coarse = coarse.max(3);
    let step = (hi - lo) / (coarse - 1) as f64;
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    let xs: Vec<f64> = (0..coarse).map(|i| lo + i as f64 * step).collect();
    for (i, &x) in xs.iter().enumerate() {
        let v = f(x);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut a = xs[best_i.saturating_sub(1)];
    let mut b = xs[(best_i + 1).min(coarse - 1)];

    // Golden-section contraction keeping the interior maximum bracketed.
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let scale = 1.0f64.max(lo.abs() + hi.abs());
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol * scale {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }

    let (mut xm, mut fm) = if fc > fd { (c, fc) } else { (d, fd) };
    // One parabolic step through (a, xm, b); keep it only if it helps.
    let fa = f(a);
    let fb = f(b);
    let denom = (xm - a) * (fm - fb) - (xm - b) * (fm - fa);
    if denom.abs() > 0.0 {
        let num = (xm - a) * (xm - a) * (fm - fb) - (xm - b) * (xm - b) * (fm - fa);
        let xv = xm - 0.5 * num / denom;
        if xv.is_finite() && xv > lo && xv < hi {
            let fv = f(xv);
            if fv > fm {
                xm = xv;
                fm = fv;
            }
        }
    }
    (xm, fm)
}
