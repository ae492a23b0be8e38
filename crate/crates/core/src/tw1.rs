//! Tracy-Widom (beta = 1) distribution: CDF and quantile function.
//!
//! The distribution is shipped as a committed table generated offline by
//! integrating the Painleve II (Hastings-McLeod) representation; runtime only
//! interpolates. Interpolation is monotone cubic (Fritsch-Carlson), so the
//! CDF stays strictly increasing between grid points.

use std::fmt::Write as _;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Clamp applied to CDF values outside the tabulated range.
pub const CDF_EPS: f64 = 1e-12;

/// Tabulated TW1 CDF on an ascending grid, with monotone cubic slopes
/// precomputed at load time.
#[derive(Debug, Clone)]
pub struct Tw1Table {
    s: Vec<f64>,
    f: Vec<f64>,
    slopes: Vec<f64>,
    provenance: String,
}

static SHIPPED: OnceLock<Tw1Table> = OnceLock::new();

impl Tw1Table {
    /// The table committed with the crate: s in [-10, 8], spacing 0.005.
    pub fn shipped() -> &'static Tw1Table {
        SHIPPED.get_or_init(|| {
            Tw1Table::parse(include_str!("../data/tw1_cdf.txt"))
                .expect("shipped TW1 table must parse")
        })
    }

    /// Parses the two-column "s F" text format. '#'-prefixed lines carry
    /// provenance and are preserved verbatim.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Vec::new();
        let mut f = Vec::new();
        let mut provenance = String::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let _ = writeln!(provenance, "{}", rest.trim());
                continue;
            }
            let mut it = line.split_whitespace();
            let (a, b) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(Error::InvalidTable(format!(
                        "line {}: expected two columns",
                        lineno + 1
                    )))
                }
            };
            let sv: f64 = a.parse().map_err(|_| {
                Error::InvalidTable(format!("line {}: bad s value '{a}'", lineno + 1))
            })?;
            let fv: f64 = b.parse().map_err(|_| {
                Error::InvalidTable(format!("line {}: bad F value '{b}'", lineno + 1))
            })?;
            s.push(sv);
            f.push(fv);
        }
        Self::from_grid(s, f, provenance)
    }

    /// Validates the grid invariants and precomputes interpolation slopes.
    pub fn from_grid(s: Vec<f64>, f: Vec<f64>, provenance: String) -> Result<Self> {
        if s.len() < 4 {
            return Err(Error::InvalidTable("fewer than 4 grid points".into()));
        }
        for i in 0..s.len() {
            if !s[i].is_finite() || !f[i].is_finite() {
                return Err(Error::InvalidTable(format!("non-finite row {i}")));
            }
            if f[i] <= 0.0 || f[i] >= 1.0 {
                return Err(Error::InvalidTable(format!(
                    "F out of (0,1) at row {i}: {}",
                    f[i]
                )));
            }
            if i > 0 {
                if s[i] <= s[i - 1] {
                    return Err(Error::InvalidTable(format!("s not ascending at row {i}")));
                }
                if f[i] <= f[i - 1] {
                    return Err(Error::InvalidTable(format!(
                        "F not strictly increasing at row {i}"
                    )));
                }
                if s[i] - s[i - 1] > 0.01 + 1e-12 && s[i - 1] >= -8.0 && s[i] <= 6.0 {
                    return Err(Error::InvalidTable(format!(
                        "grid spacing over 0.01 inside [-8, 6] at row {i}"
                    )));
                }
            }
        }
        if s[0] > -8.0 || *s.last().unwrap() < 6.0 {
            return Err(Error::InvalidTable("grid must cover [-8, 6]".into()));
        }
        if f[0] >= 1e-6 {
            return Err(Error::InvalidTable("left-tail mass above 1e-6".into()));
        }
        if *f.last().unwrap() <= 1.0 - 1e-6 {
            return Err(Error::InvalidTable("right-tail mass above 1e-6".into()));
        }
        let slopes = fritsch_carlson_slopes(&s, &f);
        Ok(Self {
            s,
            f,
            slopes,
            provenance,
        })
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn range(&self) -> (f64, f64) {
        (self.s[0], *self.s.last().unwrap())
    }

    /// CDF at `s`; outside the grid the value is clamped to
    /// [CDF_EPS, 1 - CDF_EPS].
    pub fn cdf(&self, s: f64) -> Result<f64> {
        if !s.is_finite() {
            return Err(Error::Domain(format!("cdf argument must be finite, got {s}")));
        }
        if s <= self.s[0] {
            return Ok(self.f[0].max(CDF_EPS));
        }
        if s >= *self.s.last().unwrap() {
            return Ok(self.f.last().unwrap().min(1.0 - CDF_EPS));
        }
        let i = match self.s.partition_point(|&x| x <= s) {
            0 => 0,
            k => k - 1,
        };
        let h = self.s[i + 1] - self.s[i];
        let t = (s - self.s[i]) / h;
        let (f0, f1) = (self.f[i], self.f[i + 1]);
        let (d0, d1) = (self.slopes[i], self.slopes[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = f0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + h * d0 * (t3 - 2.0 * t2 + t)
            + f1 * (-2.0 * t3 + 3.0 * t2)
            + h * d1 * (t3 - t2);
        Ok(v.clamp(CDF_EPS, 1.0 - CDF_EPS))
    }

    /// Quantile: s with cdf(s) = p, resolved to 1e-9 in s. Requests beyond
    /// the tabulated tail mass are clamped to the grid endpoint; the flag
    /// reports whether clamping happened.
    pub fn quantile_with_flag(&self, p: f64) -> Result<(f64, bool)> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile level must be in (0,1), got {p}")));
        }
        if p <= self.f[0] {
            return Ok((self.s[0], true));
        }
        if p >= *self.f.last().unwrap() {
            return Ok((*self.s.last().unwrap(), true));
        }
        let (mut lo, mut hi) = self.range();
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid)? < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 {
                break;
            }
        }
        Ok((0.5 * (lo + hi), false))
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.quantile_with_flag(p).map(|(s, _)| s)
    }

    /// Upper-alpha quantile tau_alpha = quantile(1 - alpha).
    pub fn upper_quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must be in (0,1), got {alpha}")));
        }
        self.quantile(1.0 - alpha)
    }
}

/// Shape-preserving slopes for monotone cubic interpolation.
fn fritsch_carlson_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    // Fritsch-Carlson limiter
    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            d[i] = 0.0;
            d[i + 1] = 0.0;
        } else {
            let a = d[i] / delta[i];
            let b = d[i + 1] / delta[i];
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                d[i] = t * a * delta[i];
                d[i + 1] = t * b * delta[i];
            }
        }
    }
    d
}
