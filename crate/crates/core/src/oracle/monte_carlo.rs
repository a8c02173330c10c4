//! Seeded, chunk-count-independent Monte-Carlo sampling of point pairs in
//! the ball.
//!
//! Samples are drawn in fixed blocks of [`BLOCK_SIZE`]; block `b` uses the
//! ChaCha8 stream `b` of the configured seed. Blocks are reduced in index
//! order, so results are bitwise identical for any `parallel_chunks`.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;

use super::report::OracleReport;
use crate::error::{Error, Result};
use crate::geometry::{eval_i, pair_moment, SphereBody};
use crate::quadrature;

pub const BLOCK_SIZE: u64 = 1 << 16;

/// Radial strata for the `1/r` moment; divides [`BLOCK_SIZE`].
pub const MOMENT_STRATA: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub sample_count: u64,
    pub seed: u64,
    pub bin_count: usize,
    pub parallel_chunks: usize,
}

/// Bins grow like `N^(1/5)`, balancing the `h^2` bias of a central
/// difference of histogram averages against its `1/(N h^3)` variance; at
/// least 50.
pub fn default_bin_count(sample_count: u64) -> usize {
    let scaled = (2.0 * (sample_count as f64).powf(0.2)).round() as usize;
    scaled.max(50)
}

impl McConfig {
    pub fn new(sample_count: u64, seed: u64) -> Self {
        Self {
            sample_count,
            seed,
            bin_count: default_bin_count(sample_count),
            parallel_chunks: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }

    pub fn with_bins(mut self, bin_count: usize) -> Self {
        self.bin_count = bin_count;
        self
    }

    pub fn with_parallel_chunks(mut self, parallel_chunks: usize) -> Self {
        self.parallel_chunks = parallel_chunks;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count < 10_000 {
            return Err(Error::Config(format!(
                "sample_count must be at least 10^4, got {}",
                self.sample_count
            )));
        }
        if self.bin_count < 50 {
            return Err(Error::Config(format!("bin_count must be at least 50, got {}", self.bin_count)));
        }
        if self.parallel_chunks == 0 {
            return Err(Error::Config("parallel_chunks must be positive".into()));
        }
        Ok(())
    }
}

/// Run `work(rng, count)` on every block in parallel, returning block results
/// in block order.
fn run_blocks<T, F>(cfg: &McConfig, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    cfg.validate()?;
    let blocks = cfg.sample_count.div_ceil(BLOCK_SIZE);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallel_chunks)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(b);
                let count = BLOCK_SIZE.min(cfg.sample_count - b * BLOCK_SIZE);
                work(&mut rng, count)
            })
            .collect()
    }))
}

/// Uniform point in the unit ball: isotropic direction, radius `u^(1/3)`.
#[inline]
fn point_in_unit_ball<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let dir: [f64; 3] = UnitSphere.sample(rng);
    let r = rng.random::<f64>().cbrt();
    [r * dir[0], r * dir[1], r * dir[2]]
}

#[inline]
fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Histogram of the distance between two independent uniform points.
///
/// Alongside counts, each bin carries the sums of `1/r` and `1/r^2` (in units
/// of `R`), from which `p(s)/s` and its sampling variance follow directly.
#[derive(Debug, Clone, PartialEq)]
pub struct PairHistogram {
    radius: f64,
    sample_count: u64,
    counts: Vec<u64>,
    inverse_sums: Vec<f64>,
    inverse_sq_sums: Vec<f64>,
    distance_sum: f64,
    distance_sq_sum: f64,
}

#[derive(Clone)]
struct BinAccumulator {
    counts: Vec<u64>,
    inverse_sums: Vec<f64>,
    inverse_sq_sums: Vec<f64>,
    distance_sum: f64,
    distance_sq_sum: f64,
}

impl BinAccumulator {
    fn new(bins: usize) -> Self {
        Self {
            counts: vec![0; bins],
            inverse_sums: vec![0.0; bins],
            inverse_sq_sums: vec![0.0; bins],
            distance_sum: 0.0,
            distance_sq_sum: 0.0,
        }
    }

    fn merge(&mut self, other: &BinAccumulator) {
        for j in 0..self.counts.len() {
            self.counts[j] += other.counts[j];
            self.inverse_sums[j] += other.inverse_sums[j];
            self.inverse_sq_sums[j] += other.inverse_sq_sums[j];
        }
        self.distance_sum += other.distance_sum;
        self.distance_sq_sum += other.distance_sq_sum;
    }
}

impl PairHistogram {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Physical bin width, `2R / bins`.
    pub fn bin_width(&self) -> f64 {
        2.0 * self.radius / self.counts.len() as f64
    }

    fn unit_width(&self) -> f64 {
        2.0 / self.counts.len() as f64
    }

    pub fn bin_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.bin_width()
    }

    /// Estimated density `p(s)` averaged over bin `j`, units `1/length`.
    pub fn density(&self, j: usize) -> f64 {
        self.counts[j] as f64 / (self.sample_count as f64 * self.bin_width())
    }

    /// `sum_j density_j * width`, which is 1 up to rounding.
    pub fn total_probability(&self) -> f64 {
        let w = self.bin_width();
        (0..self.counts.len()).map(|j| self.density(j) * w).sum()
    }

    pub fn mean_distance(&self) -> f64 {
        self.radius * self.distance_sum / self.sample_count as f64
    }

    pub fn mean_distance_standard_error(&self) -> f64 {
        let n = self.sample_count as f64;
        let mean = self.distance_sum / n;
        let var = (self.distance_sq_sum / n - mean * mean).max(0.0);
        self.radius * (var / n).sqrt()
    }

    /// Bin average of `p(s)/s` with `R = 1`, and its sampling variance.
    ///
    /// The variance is floored at the contribution of a single count so that
    /// sparsely populated bins never report a zero error.
    pub fn unit_p_over_s(&self, j: usize) -> (f64, f64) {
        let n = self.sample_count as f64;
        let h = self.unit_width();
        let m1 = self.inverse_sums[j] / n;
        let m2 = self.inverse_sq_sums[j] / n;
        let value = m1 / h;
        let var = (m2 - m1 * m1).max(0.0) / (n * h * h);
        let centre = (j as f64 + 0.5) * h;
        let floor = 1.0 / (centre * centre * n * n * h * h);
        (value, var.max(floor))
    }

    /// Reconstruct `I(s) = d/ds [p(s)/s]` at every bin centre: central
    /// differences inside, one-sided differences at the two end bins.
    pub fn kernel_i_estimate(&self) -> Vec<KernelEstimate> {
        let n = self.sample_count as f64;
        let h = self.unit_width();
        let r3 = self.radius.powi(3);
        let last = self.counts.len() - 1;
        (0..=last)
            .map(|j| {
                let (lo_bin, hi_bin) = (j.saturating_sub(1), (j + 1).min(last));
                let spacing = (hi_bin - lo_bin) as f64 * h;
                let (lo, var_lo) = self.unit_p_over_s(lo_bin);
                let (hi, var_hi) = self.unit_p_over_s(hi_bin);
                // multinomial covariance between distinct bins
                let cov = -(self.inverse_sums[lo_bin] / n) * (self.inverse_sums[hi_bin] / n) / (n * h * h);
                let var = ((var_lo + var_hi - 2.0 * cov) / (spacing * spacing)).max(0.0);
                KernelEstimate {
                    s: self.bin_center(j),
                    value: (hi - lo) / spacing / r3,
                    standard_error: var.sqrt() / r3,
                    lo_bin,
                    hi_bin,
                }
            })
            .collect()
    }

    /// Expected value of each [`kernel_i_estimate`](Self::kernel_i_estimate)
    /// entry if the true kernel were `candidate(s)` (physical units).
    ///
    /// `p(s)/s = integral_0^s I`, so the bin averages of `p/s`, and hence the
    /// difference quotients, follow from `candidate` by quadrature. This
    /// removes the discretisation bias of comparing against `I` at the centre.
    pub fn expected_kernel_estimate(&self, candidate: &dyn Fn(f64) -> f64) -> Result<Vec<f64>> {
        let r = self.radius;
        let r3 = r.powi(3);
        let h = self.unit_width();
        let unit_i = |u: f64| r3 * candidate(u * r);
        // G(x) = integral_0^x (x - u) I(u) du, so that bin averages of
        // integral_0^s I are (G(b) - G(a)) / h
        let bins = self.counts.len();
        let mut g = Vec::with_capacity(bins + 1);
        for k in 0..=bins {
            let x = k as f64 * h;
            g.push(if k == 0 {
                0.0
            } else {
                quadrature::integrate(|u| (x - u) * unit_i(u), 0.0, x, &[])?
            });
        }
        let avg = |j: usize| (g[j + 1] - g[j]) / h;
        Ok(self
            .kernel_i_estimate()
            .iter()
            .map(|e| {
                let spacing = (e.hi_bin - e.lo_bin) as f64 * h;
                (avg(e.hi_bin) - avg(e.lo_bin)) / spacing / r3
            })
            .collect())
    }
}

/// Monte-Carlo estimate of `I` at one bin centre and the bins it differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEstimate {
    pub s: f64,
    pub value: f64,
    pub standard_error: f64,
    pub lo_bin: usize,
    pub hi_bin: usize,
}

/// Histogram of `|r2 - r1|` for pairs uniform in the ball.
pub fn mc_pair_pdf(body: &SphereBody, cfg: &McConfig) -> Result<PairHistogram> {
    let bins = cfg.bin_count;
    let scale = bins as f64 / 2.0;
    let parts = run_blocks(cfg, |rng, count| {
        let mut acc = BinAccumulator::new(bins);
        for _ in 0..count {
            let r = distance(point_in_unit_ball(rng), point_in_unit_ball(rng));
            let j = ((r * scale) as usize).min(bins - 1);
            acc.counts[j] += 1;
            if r > 0.0 {
                let w = 1.0 / r;
                acc.inverse_sums[j] += w;
                acc.inverse_sq_sums[j] += w * w;
            }
            acc.distance_sum += r;
            acc.distance_sq_sum += r * r;
        }
        acc
    })?;
    let mut total = BinAccumulator::new(bins);
    for p in &parts {
        total.merge(p);
    }
    Ok(PairHistogram {
        radius: body.radius(),
        sample_count: cfg.sample_count,
        counts: total.counts,
        inverse_sums: total.inverse_sums,
        inverse_sq_sums: total.inverse_sq_sums,
        distance_sum: total.distance_sum,
        distance_sq_sum: total.distance_sq_sum,
    })
}

/// Compare the closed-form `I(s)` with its Monte-Carlo reconstruction at
/// every bin.
pub fn oracle_i(body: &SphereBody, cfg: &McConfig) -> Result<OracleReport> {
    oracle_i_against(body, cfg, &|s| eval_i(s, body).value)
}

/// As [`oracle_i`], against an arbitrary candidate closed form. Each bin's
/// estimate is compared with its expectation under the candidate, so the
/// check carries no discretisation bias; the reported x is the bin centre.
pub fn oracle_i_against(body: &SphereBody, cfg: &McConfig, closed_form: &dyn Fn(f64) -> f64) -> Result<OracleReport> {
    let hist = mc_pair_pdf(body, cfg)?;
    let expected = hist.expected_kernel_estimate(closed_form)?;
    let mut report = OracleReport::new("kernel_I_monte_carlo", 0.0, 0.0).with_sampling(cfg.seed, cfg.sample_count);
    for (e, cf) in hist.kernel_i_estimate().iter().zip(expected) {
        report.push(e.s, cf, e.value, Some(e.standard_error));
    }
    Ok(report)
}

#[derive(Clone, Copy, Default)]
struct Moments {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn add(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, o: &Moments) {
        self.count += o.count;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    /// Mean and the variance of the mean.
    fn mean_and_variance(&self) -> (f64, f64) {
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = (self.sum_sq / n - mean * mean).max(0.0);
        (mean, if self.count > 1 { var / (n - 1.0) } else { 0.0 })
    }
}

/// Monte-Carlo estimate of `integral over ball x ball of r^(n-1)`, compared
/// with the closed form.
///
/// For `n >= 1` this is `V^2` times the sample mean of `r^(n-1)` over uniform
/// pairs. For `n = 0` the second point is instead placed at an offset `d`
/// from the first with `|d|` stratified uniformly on `[0, 2R]` and isotropic
/// direction; the density `1 / (8 pi R |d|^2)` cancels the `1/r` singularity
/// and leaves the bounded weight `8 pi R |d|` on pairs inside the ball.
pub fn mc_pair_moment(n: i32, body: &SphereBody, cfg: &McConfig) -> Result<OracleReport> {
    let closed = pair_moment(n, body)?;
    let r = body.radius();
    let v_unit = 4.0 / 3.0 * PI;
    let (mean, variance, unit_factor) = if n == 0 {
        let parts = run_blocks(cfg, |rng, count| {
            let mut strata = [Moments::default(); MOMENT_STRATA];
            for i in 0..count as usize {
                let k = i % MOMENT_STRATA;
                let p = point_in_unit_ball(rng);
                let len = 2.0 * (k as f64 + rng.random::<f64>()) / MOMENT_STRATA as f64;
                let dir: [f64; 3] = UnitSphere.sample(rng);
                let q = [p[0] + len * dir[0], p[1] + len * dir[1], p[2] + len * dir[2]];
                let inside = q[0] * q[0] + q[1] * q[1] + q[2] * q[2] < 1.0;
                strata[k].add(if inside { 8.0 * PI * len } else { 0.0 });
            }
            strata
        })?;
        let mut strata = [Moments::default(); MOMENT_STRATA];
        for part in &parts {
            for (s, p) in strata.iter_mut().zip(part.iter()) {
                s.merge(p);
            }
        }
        let k = MOMENT_STRATA as f64;
        let (mut mean, mut var) = (0.0, 0.0);
        for s in &strata {
            let (m, v) = s.mean_and_variance();
            mean += m / k;
            var += v / (k * k);
        }
        // integral = V * E[weight]
        (mean, var, v_unit)
    } else {
        let power = n - 1;
        let parts = run_blocks(cfg, |rng, count| {
            let mut m = Moments::default();
            for _ in 0..count {
                let d = distance(point_in_unit_ball(rng), point_in_unit_ball(rng));
                m.add(d.powi(power));
            }
            m
        })?;
        let mut total = Moments::default();
        for p in &parts {
            total.merge(p);
        }
        let (mean, var) = total.mean_and_variance();
        (mean, var, v_unit * v_unit)
    };
    // physical scaling: V^2 R^(n-1) ~ R^(n+5)
    let scale = unit_factor * r.powi(n + 5);
    let mut report = OracleReport::new(format!("pair_moment_{n}"), 0.0, 0.0).with_sampling(cfg.seed, cfg.sample_count);
    report.push(n as f64, closed, mean * scale, Some(variance.sqrt() * scale));
    Ok(report)
}
