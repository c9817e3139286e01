//! Goodness-of-fit machinery: Kolmogorov-Smirnov tests, normalization
//! audits, regime-agreement sweeps, histograms, and tabulated CDFs.
//!
//! Every check produces a [`GofReport`] carrying the statistic, the
//! critical value at the fixed significance level 0.01, and a pass flag
//! that is true exactly when the statistic is below the critical value.
//! Reports are pure functions of their inputs, so suites driven by seeded
//! samplers are fully deterministic.

use serde::Serialize;

use crate::config::NumericsConfig;
use crate::error::{require_finite, Error, Result};
use crate::quad;

/// Asymptotic Kolmogorov critical coefficient at significance 0.01:
/// `sqrt(-ln(0.005) / 2)`.
pub const KS_COEFF_AT_1PCT: f64 = 1.627_62;

/// Outcome of one statistical check.
#[derive(Debug, Clone, Serialize)]
pub struct GofReport {
    pub test_name: String,
    pub statistic: f64,
    pub critical_value: f64,
    pub n: usize,
    pub pass: bool,
    pub metadata: serde_json::Value,
}

impl GofReport {
    fn new(
        test_name: impl Into<String>,
        statistic: f64,
        critical_value: f64,
        n: usize,
        metadata: serde_json::Value,
    ) -> Self {
        GofReport {
            test_name: test_name.into(),
            statistic,
            critical_value,
            n,
            pass: statistic < critical_value,
            metadata,
        }
    }
}

fn check_sorted(name: &str, samples: &[f64]) -> Result<()> {
    if samples.len() < 100 {
        return Err(Error::Samples(format!(
            "{name}: need at least 100 samples, got {}",
            samples.len()
        )));
    }
    for w in samples.windows(2) {
        if !(w[0] <= w[1]) {
            return Err(Error::Samples(format!(
                "{name}: samples must be sorted ascending ({} then {})",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// One-sample Kolmogorov-Smirnov test of sorted `samples` against `cdf`.
pub fn ks_one_sample(
    test_name: &str,
    samples: &[f64],
    cdf: impl Fn(f64) -> Result<f64>,
    metadata: serde_json::Value,
) -> Result<GofReport> {
    check_sorted(test_name, samples)?;
    let n = samples.len();
    let mut stat = 0.0f64;
    let mut prev_f = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x)?;
        if !(-1e-9..=1.0 + 1e-9).contains(&f) {
            return Err(Error::Samples(format!(
                "{test_name}: cdf({x}) = {f} is not a probability"
            )));
        }
        if f < prev_f - 1e-9 {
            return Err(Error::Samples(format!(
                "{test_name}: cdf decreases at {x} ({prev_f} then {f})"
            )));
        }
        prev_f = f;
        let lo = i as f64 / n as f64;
        let hi = (i + 1) as f64 / n as f64;
        stat = stat.max(f - lo).max(hi - f);
    }
    let critical = KS_COEFF_AT_1PCT / (n as f64).sqrt();
    Ok(GofReport::new(test_name, stat, critical, n, metadata))
}

/// Two-sample Kolmogorov-Smirnov test between two sorted sample sets.
pub fn ks_two_sample(
    test_name: &str,
    a: &[f64],
    b: &[f64],
    metadata: serde_json::Value,
) -> Result<GofReport> {
    check_sorted(test_name, a)?;
    check_sorted(test_name, b)?;
    let (m, n) = (a.len(), b.len());
    let mut stat = 0.0f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < m && j < n {
        let x = a[i].min(b[j]);
        while i < m && a[i] <= x {
            i += 1;
        }
        while j < n && b[j] <= x {
            j += 1;
        }
        stat = stat.max((i as f64 / m as f64 - j as f64 / n as f64).abs());
    }
    let critical = KS_COEFF_AT_1PCT * ((m + n) as f64 / (m as f64 * n as f64)).sqrt();
    Ok(GofReport::new(test_name, stat, critical, m.min(n), metadata))
}

/// Distance of a Gaussian-tailed density from unit mass over
/// `[domain_lower, infinity)`; `scale` hints the integrand's width to the
/// variable change.
pub fn normalization_audit(
    density: impl Fn(f64) -> f64,
    domain_lower: f64,
    scale: f64,
    cfg: &NumericsConfig,
) -> Result<f64> {
    let mass = quad::integrate_semi_infinite(density, domain_lower, scale, cfg)?.value;
    Ok((mass - 1.0).abs())
}

/// Sup-difference of two one-parameter families at one sweep point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepPoint {
    pub param: f64,
    pub sup_difference: f64,
}

/// A regime-agreement sweep: per-parameter sup-differences over the probe
/// grid, plus whether they shrink monotonically along the sweep order.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub points: Vec<SweepPoint>,
    pub monotone: bool,
}

/// Evaluates two families (`param`, `probe`) -> value over `params x
/// probes` and reports the sup-difference per parameter. `params` should
/// be ordered toward the agreement limit, so `monotone` flags whether the
/// discrepancy indeed shrinks along it.
pub fn sweep_regime_agreement(
    law_a: impl Fn(f64, f64) -> Result<f64>,
    law_b: impl Fn(f64, f64) -> Result<f64>,
    params: &[f64],
    probes: &[f64],
) -> Result<SweepSummary> {
    if params.is_empty() || probes.is_empty() {
        return Err(Error::Grid("sweep needs at least one parameter and one probe".into()));
    }
    let mut points = Vec::with_capacity(params.len());
    for &p in params {
        let mut sup = 0.0f64;
        for &y in probes {
            let d = (law_a(p, y)? - law_b(p, y)?).abs();
            require_finite(&[("sup-difference", d)])?;
            sup = sup.max(d);
        }
        points.push(SweepPoint { param: p, sup_difference: sup });
    }
    let monotone =
        points.windows(2).all(|w| w[1].sup_difference <= w[0].sup_difference + 1e-15);
    Ok(SweepSummary { points, monotone })
}

/// Tabulated CDF of a density on `[lo, hi]`: Simpson mass per cell,
/// cumulative sum, normalized to end at one, evaluated by linear
/// interpolation. Intended for smooth densities whose CDF lacks a closed
/// form; outside the table the CDF clamps to 0 and 1.
#[derive(Debug, Clone)]
pub struct CdfTable {
    lo: f64,
    step: f64,
    cum: Vec<f64>,
}

impl CdfTable {
    pub fn from_density(
        density: impl Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        cells: usize,
    ) -> Result<CdfTable> {
        require_finite(&[("lo", lo), ("hi", hi)])?;
        if !(hi > lo) {
            return Err(Error::Grid(format!("table needs lo < hi, got [{lo}, {hi}]")));
        }
        if cells < 16 {
            return Err(Error::Grid(format!("table needs at least 16 cells, got {cells}")));
        }
        let step = (hi - lo) / cells as f64;
        let mut cum = Vec::with_capacity(cells + 1);
        cum.push(0.0);
        let mut left = density(lo);
        let mut total = 0.0;
        for i in 0..cells {
            let a = lo + i as f64 * step;
            let mid = density(a + 0.5 * step);
            let right = density(a + step);
            for (tag, val) in [("left", left), ("mid", mid), ("right", right)] {
                if !val.is_finite() || val < -1e-12 {
                    return Err(Error::Grid(format!(
                        "density {tag} value {val} near {a} is not a finite nonnegative number"
                    )));
                }
            }
            total += step * (left + 4.0 * mid + right) / 6.0;
            cum.push(total);
            left = right;
        }
        if total <= 0.0 {
            return Err(Error::Grid("density carries no mass over the table range".into()));
        }
        for c in &mut cum {
            *c /= total;
        }
        Ok(CdfTable { lo, step, cum })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pos = (x - self.lo) / self.step;
        if pos <= 0.0 {
            return 0.0;
        }
        let cells = self.cum.len() - 1;
        if pos >= cells as f64 {
            return 1.0;
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        self.cum[i] + frac * (self.cum[i + 1] - self.cum[i])
    }
}

/// Fixed-width counting histogram; adds outside `[lo, hi)` are tallied in
/// `outside` and still count toward the total, so bin frequencies stay
/// honest for sub-probability comparisons.
#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub outside: u64,
    pub total: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Histogram> {
        require_finite(&[("lo", lo), ("hi", hi)])?;
        if !(hi > lo) || bins == 0 {
            return Err(Error::Grid(format!(
                "histogram needs lo < hi and at least one bin, got [{lo}, {hi}] with {bins}"
            )));
        }
        Ok(Histogram { lo, hi, counts: vec![0; bins], outside: 0, total: 0 })
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn add(&mut self, x: f64) {
        self.total += 1;
        if x < self.lo || x >= self.hi || !x.is_finite() {
            self.outside += 1;
            return;
        }
        let i = ((x - self.lo) / self.bin_width()) as usize;
        let i = i.min(self.counts.len() - 1);
        self.counts[i] += 1;
    }

    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let w = self.bin_width();
        (self.lo + i as f64 * w, self.lo + (i + 1) as f64 * w)
    }
}

/// Compares histogram bin frequencies against a density: the statistic is
/// the largest binomial z-score across bins whose expected count reaches
/// 10 (below that the normal approximation is meaningless), the critical
/// value is `z_crit`. The expected bin mass is a Simpson integral of the
/// density, so the density need not integrate to one over the histogram
/// range; out-of-range mass is simply never compared.
pub fn histogram_density_report(
    test_name: &str,
    hist: &Histogram,
    density: impl Fn(f64) -> f64,
    z_crit: f64,
    metadata: serde_json::Value,
) -> Result<GofReport> {
    if hist.total == 0 {
        return Err(Error::Samples(format!("{test_name}: histogram is empty")));
    }
    let n = hist.total as f64;
    let mut stat = 0.0f64;
    for (i, &count) in hist.counts.iter().enumerate() {
        let (a, b) = hist.bin_edges(i);
        let p = (b - a) * (density(a) + 4.0 * density(0.5 * (a + b)) + density(b)) / 6.0;
        if !(0.0..=1.0 + 1e-9).contains(&p) {
            return Err(Error::Grid(format!(
                "{test_name}: bin [{a}, {b}] has non-probability mass {p}"
            )));
        }
        let expected = n * p;
        if expected < 10.0 {
            continue;
        }
        let se = (n * p * (1.0 - p)).sqrt();
        stat = stat.max((count as f64 - expected).abs() / se);
    }
    Ok(GofReport::new(test_name, stat, z_crit, hist.total as usize, metadata))
}
