//! Daily flow dynamics and the template correlogram.
//!
//! For a series `x` and a template sampled at `k` points `p`, the correlation
//! at shift `l` is the Pearson coefficient between `x[l..l + k]` and `p`:
//!
//! ```text
//!            Σ (x[l+i] - x̄)(p[i] - p̄)
//! C(l, k) = ------------------------------------
//!           sqrt(Σ (x[l+i] - x̄)² · Σ (p[i] - p̄)²)
//! ```
//!
//! where `x̄` is the window mean and `p̄` the template mean. A window or
//! template with zero variance has no defined correlation (`None`).

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Smoothing window used when none is given: one week.
pub const DEFAULT_SMOOTHING_WINDOW: usize = 7;

/// Per-day values starting at `start_date`, with no gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries<T = f64> {
    start_date: NaiveDate,
    values: Vec<T>,
}

impl<T: Scalar> DailySeries<T> {
    pub fn new(start_date: NaiveDate, values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSeries("series must contain at least one day".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < T::zero()) {
            return Err(Error::InvalidSeries(format!("value {v} is negative or not finite")));
        }
        Ok(DailySeries { start_date, values })
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start_date
    }

    pub fn end_date(&self) -> NaiveDate {
        self.date_at(self.values.len() - 1)
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start_date + Duration::days(index as i64)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn total(&self) -> T {
        self.values.iter().copied().sum()
    }

    /// CSV with header `date,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,value\n");
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", self.date_at(i), v).unwrap();
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("date,value") => {}
            other => {
                return Err(Error::InvalidSeries(format!("expected header date,value, got {other:?}")))
            }
        }
        let mut start = None;
        let mut values = Vec::new();
        for line in lines {
            let (date, value) = line
                .split_once(',')
                .ok_or_else(|| Error::InvalidSeries(format!("bad row {line:?}")))?;
            let date = NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d")
                .map_err(|_| Error::InvalidSeries(format!("bad date in row {line:?}")))?;
            let value = value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidSeries(format!("bad value in row {line:?}")))?;
            let start = *start.get_or_insert(date);
            if date != start + Duration::days(values.len() as i64) {
                return Err(Error::InvalidSeries(format!("gap or disorder at {date}")));
            }
            values.push(T::lit(value));
        }
        let start = start.ok_or_else(|| Error::InvalidSeries("no rows".into()))?;
        DailySeries::new(start, values)
    }
}

/// Documents per day from the earliest to the latest document date.
pub fn build_daily_series<T: Scalar>(corpus: &Corpus) -> Result<DailySeries<T>> {
    let (first, last) = corpus.date_span().ok_or(Error::EmptyCorpus)?;
    let start = first.date_naive();
    let days = (last.date_naive() - start).num_days() as usize + 1;
    let mut counts = vec![0usize; days];
    for doc in corpus {
        counts[(doc.date() - start).num_days() as usize] += 1;
    }
    DailySeries::new(start, counts.into_iter().map(T::from_count).collect())
}

/// Centered moving average; the window is clipped at the series ends and the
/// mean taken over the days actually inside it.
pub fn smooth<T: Scalar>(series: &DailySeries<T>, window: usize) -> Result<DailySeries<T>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::InvalidWindow(window));
    }
    let half = window / 2;
    let n = series.len();
    let values = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let span = &series.values[lo..=hi];
            span.iter().copied().sum::<T>() / T::from_count(span.len())
        })
        .collect();
    Ok(DailySeries {
        start_date: series.start_date,
        values,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlPoint<T = f64> {
    /// Fraction of the operation's duration, in `[0, 1]`.
    pub position: T,
    pub amplitude: T,
    pub label: Option<String>,
}

impl<T: Scalar> ControlPoint<T> {
    pub fn new(position: T, amplitude: T, label: Option<&str>) -> Self {
        ControlPoint {
            position,
            amplitude,
            label: label.map(str::to_owned),
        }
    }
}

/// Piecewise-linear lifecycle curve of an information operation.
#[derive(Debug, Clone, PartialEq)]
pub struct LifecycleTemplate<T = f64> {
    points: Vec<ControlPoint<T>>,
}

impl<T: Scalar> LifecycleTemplate<T> {
    pub fn new(points: Vec<ControlPoint<T>>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidTemplate(m));
        if points.len() < 2 {
            return bad(format!("need at least 2 control points, got {}", points.len()));
        }
        if points[0].position != T::zero() || points[points.len() - 1].position != T::one() {
            return bad("positions must start at 0 and end at 1".into());
        }
        if points.windows(2).any(|w| w[0].position.partial_cmp(&w[1].position) != Some(Ordering::Less)) {
            return bad("positions must be strictly increasing".into());
        }
        if let Some(p) = points.iter().find(|p| !p.amplitude.is_finite() || p.amplitude < T::zero()) {
            return bad(format!("amplitude {} is negative or not finite", p.amplitude));
        }
        Ok(LifecycleTemplate { points })
    }

    /// The nine-phase operation lifecycle with amplitudes normalized to `[0, 1]`.
    pub fn nine_phase() -> Self {
        const PHASES: [(f64, f64, &str); 9] = [
            (0.00, 0.10, "background"),
            (0.15, 0.08, "calm"),
            (0.25, 0.30, "art preparation"),
            (0.35, 0.10, "calm"),
            (0.45, 0.15, "attack trigger"),
            (0.55, 1.00, "peak of high expectations"),
            (0.70, 0.25, "loss of illusions"),
            (0.85, 0.45, "public awareness"),
            (1.00, 0.30, "productivity / background"),
        ];
        let points = PHASES
            .iter()
            .map(|&(pos, amp, label)| ControlPoint::new(T::lit(pos), T::lit(amp), Some(label)))
            .collect();
        LifecycleTemplate::new(points).expect("built-in template is valid")
    }

    pub fn points(&self) -> &[ControlPoint<T>] {
        &self.points
    }

    /// Parses lines of `position amplitude [# label]`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let (data, label) = match line.split_once('#') {
                Some((d, l)) => (d.trim(), Some(l.trim()).filter(|l| !l.is_empty())),
                None => (line.trim(), None),
            };
            if data.is_empty() {
                continue;
            }
            let fields: Vec<&str> = data.split_whitespace().collect();
            let nums: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
            match nums.as_deref() {
                Some(&[pos, amp]) => points.push(ControlPoint::new(T::lit(pos), T::lit(amp), label)),
                _ => {
                    return Err(Error::InvalidTemplate(format!(
                        "line {}: expected \"position amplitude\", got {data:?}",
                        idx + 1
                    )))
                }
            }
        }
        LifecycleTemplate::new(points)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            match &p.label {
                Some(l) => writeln!(out, "{} {} # {}", p.position, p.amplitude, l).unwrap(),
                None => writeln!(out, "{} {}", p.position, p.amplitude).unwrap(),
            }
        }
        out
    }

    fn value_at(&self, x: T) -> T {
        let pts = &self.points;
        let j = pts.partition_point(|p| p.position <= x);
        if j > 0 && pts[j - 1].position == x {
            return pts[j - 1].amplitude;
        }
        let j = j.clamp(1, pts.len() - 1);
        let (a, b) = (&pts[j - 1], &pts[j]);
        let t = (x - a.position) / (b.position - a.position);
        a.amplitude + t * (b.amplitude - a.amplitude)
    }
}

impl<T: Scalar> Default for LifecycleTemplate<T> {
    fn default() -> Self {
        Self::nine_phase()
    }
}

/// Template evaluated at `k` uniformly spaced positions `i / (k - 1)`.
pub fn sample_template<T: Scalar>(template: &LifecycleTemplate<T>, k: usize) -> Result<Vec<T>> {
    if k < 2 {
        return Err(Error::InvalidScale(k));
    }
    let last = T::from_count(k - 1);
    Ok((0..k)
        .map(|i| template.value_at(T::from_count(i) / last))
        .collect())
}

/// Pearson correlation of two equal-length slices, `None` when either has
/// zero variance.
pub fn pearson<T: Scalar>(window: &[T], template: &[T]) -> Option<T> {
    assert_eq!(window.len(), template.len(), "pearson on unequal lengths");
    let constant = |s: &[T]| s.iter().all(|v| *v == s[0]);
    if window.is_empty() || constant(window) || constant(template) {
        return None;
    }
    let n = T::from_count(window.len());
    let mean_x = window.iter().copied().sum::<T>() / n;
    let mean_p = template.iter().copied().sum::<T>() / n;
    let (mut sxp, mut sxx, mut spp) = (T::zero(), T::zero(), T::zero());
    for (&x, &p) in window.iter().zip(template) {
        let dx = x - mean_x;
        let dp = p - mean_p;
        sxp = sxp + dx * dp;
        sxx = sxx + dx * dx;
        spp = spp + dp * dp;
    }
    let denom = (sxx * spp).sqrt();
    (denom > T::zero()).then(|| sxp / denom)
}

/// `C(shift, scale)` for one window of the series.
pub fn window_correlation<T: Scalar>(
    series: &DailySeries<T>,
    shift: usize,
    scale: usize,
    template_samples: &[T],
) -> Result<Option<T>> {
    if scale < 2 {
        return Err(Error::InvalidScale(scale));
    }
    if template_samples.len() != scale {
        return Err(Error::TemplateLength {
            expected: scale,
            got: template_samples.len(),
        });
    }
    if shift + scale > series.len() {
        return Err(Error::OutOfRange {
            shift,
            scale,
            len: series.len(),
        });
    }
    Ok(pearson(&series.values[shift..shift + scale], template_samples))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelogramCell<T = f64> {
    pub shift: usize,
    pub scale: usize,
    pub value: Option<T>,
}

/// Correlation values over a (shift, scale) grid. Only admissible cells,
/// those with `shift + scale <= len`, are stored, ordered by shift then scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlogram<T = f64> {
    start_date: NaiveDate,
    series_len: usize,
    shifts: Vec<usize>,
    scales: Vec<usize>,
    cells: Vec<CorrelogramCell<T>>,
}

impl<T: Scalar> Correlogram<T> {
    pub fn shifts(&self) -> &[usize] {
        &self.shifts
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub fn cells(&self) -> &[CorrelogramCell<T>] {
        &self.cells
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start_date
    }

    pub fn series_len(&self) -> usize {
        self.series_len
    }

    /// `None` for an absent cell, `Some(None)` for an undefined one.
    pub fn get(&self, shift: usize, scale: usize) -> Option<Option<T>> {
        self.cells
            .binary_search_by(|c| (c.shift, c.scale).cmp(&(shift, scale)))
            .ok()
            .map(|i| self.cells[i].value)
    }

    pub fn defined(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.cells
            .iter()
            .filter_map(|c| c.value.map(|v| (c.shift, c.scale, v)))
    }

    /// CSV with header `l,k,c`; undefined cells are `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,k,c\n");
        for c in &self.cells {
            match c.value {
                Some(v) => writeln!(out, "{},{},{}", c.shift, c.scale, v).unwrap(),
                None => writeln!(out, "{},{},NA", c.shift, c.scale).unwrap(),
            }
        }
        out
    }
}

/// Evaluates every admissible cell of the grid. The requested shifts and
/// scales are sorted and deduplicated.
pub fn correlogram<T: Scalar>(
    series: &DailySeries<T>,
    template: &LifecycleTemplate<T>,
    scales: &[usize],
    shifts: &[usize],
) -> Result<Correlogram<T>> {
    if scales.is_empty() {
        return Err(Error::EmptyGrid("scales"));
    }
    if shifts.is_empty() {
        return Err(Error::EmptyGrid("shifts"));
    }
    if let Some(&k) = scales.iter().find(|&&k| k < 2) {
        return Err(Error::InvalidScale(k));
    }
    let mut scales = scales.to_vec();
    scales.sort_unstable();
    scales.dedup();
    let mut shifts = shifts.to_vec();
    shifts.sort_unstable();
    shifts.dedup();

    let n = series.len();
    let samples: HashMap<usize, Vec<T>> = scales
        .iter()
        .filter(|&&k| k <= n)
        .map(|&k| Ok((k, sample_template(template, k)?)))
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = shifts
        .iter()
        .flat_map(|&l| scales.iter().map(move |&k| (l, k)))
        .filter(|&(l, k)| l + k <= n)
        .collect();
    let cells = pairs
        .par_iter()
        .map(|&(l, k)| CorrelogramCell {
            shift: l,
            scale: k,
            value: pearson(&series.values[l..l + k], &samples[&k]),
        })
        .collect();
    Ok(Correlogram {
        start_date: series.start_date,
        series_len: n,
        shifts,
        scales,
        cells,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Peak<T = f64> {
    pub shift: usize,
    pub scale: usize,
    pub value: T,
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
}

/// Defined cells at or above `threshold`, strongest first (ties: smaller
/// shift, then smaller scale), at most `top_n`.
pub fn detect_peaks<T: Scalar>(corr: &Correlogram<T>, threshold: T, top_n: usize) -> Vec<Peak<T>> {
    let mut hits: Vec<(usize, usize, T)> = corr.defined().filter(|&(_, _, v)| v >= threshold).collect();
    hits.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .expect("correlations are finite")
            .then(a.0.cmp(&b.0))
            .then(a.1.cmp(&b.1))
    });
    hits.truncate(top_n);
    hits.into_iter()
        .map(|(shift, scale, value)| Peak {
            shift,
            scale,
            value,
            window_start: corr.start_date + Duration::days(shift as i64),
            window_end: corr.start_date + Duration::days((shift + scale - 1) as i64),
        })
        .collect()
}

/// CSV with header `l,k,c,window_start,window_end`.
pub fn peaks_to_csv<T: Scalar>(peaks: &[Peak<T>]) -> String {
    let mut out = String::from("l,k,c,window_start,window_end\n");
    for p in peaks {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.shift, p.scale, p.value, p.window_start, p.window_end
        )
        .unwrap();
    }
    out
}
