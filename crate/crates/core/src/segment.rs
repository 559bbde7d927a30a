//! Piecewise-linear tables over one period and their segment-wise maximum.
//!
//! A table is a circular sequence of entries `(date, value, trend)`. Entry
//! `i` describes the function on `[date_i, date_{i+1})`, the last entry
//! wrapping around `p` back to the first date. A flat entry holds its value,
//! a slope entry decreases at rate one from its value.

use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::time::Time;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Trend {
    Flat,
    Slope,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trend::Flat => "flat",
            Trend::Slope => "slope",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Segment {
    pub date: Time,
    pub value: Time,
    pub trend: Trend,
}

impl Segment {
    pub fn new(date: impl Into<Time>, value: impl Into<Time>, trend: Trend) -> Self {
        Segment {
            date: date.into(),
            value: value.into(),
            trend,
        }
    }

    /// Value `elapsed` time units after the entry's date.
    pub fn value_after(&self, elapsed: Time) -> Time {
        match self.trend {
            Trend::Flat => self.value,
            Trend::Slope => self.value - elapsed,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SegmentError {
    #[error("segment table is empty")]
    Empty,
    #[error("period mismatch: {0} vs {1}")]
    PeriodMismatch(Time, Time),
    #[error("period must be positive")]
    NonPositivePeriod,
    #[error("entry date {0} outside [0, period)")]
    DateOutOfRange(Time),
    #[error("entry dates not strictly increasing at {0}")]
    NotIncreasing(Time),
    #[error("negative value at date {0}")]
    NegativeValue(Time),
    #[error("slope starting at {0} reaches zero before its segment ends")]
    SlopeExhausted(Time),
    #[error("tables are not aligned")]
    NotAligned,
    #[error("csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SegmentTable {
    period: Time,
    entries: Vec<Segment>,
}

/// Closed-open stretch `[start, end)` where the minimum is attained; `end`
/// may exceed the period when the window wraps. `start == end` marks a
/// single attained point.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Window {
    pub start: Time,
    pub end: Time,
}

impl Window {
    pub fn is_point(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, t: Time, period: Time) -> bool {
        let t = t.rem_euclid(period);
        let shifted = if t < self.start { t + period } else { t };
        if self.is_point() {
            shifted == self.start
        } else {
            shifted >= self.start && shifted < self.end
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MinWindows {
    pub value: Time,
    pub windows: Vec<Window>,
}

impl SegmentTable {
    pub fn new(period: Time, entries: Vec<Segment>) -> Result<Self, SegmentError> {
        let t = SegmentTable { period, entries };
        t.check()?;
        Ok(t)
    }

    /// Builds a table from dates that may lie outside `[0, p)`; they are
    /// reduced modulo `p` and sorted.
    pub fn from_unnormalized(period: Time, entries: Vec<Segment>) -> Result<Self, SegmentError> {
        let mut entries: Vec<Segment> = entries
            .into_iter()
            .map(|s| Segment {
                date: s.date.rem_euclid(period),
                ..s
            })
            .collect();
        entries.sort_by_key(|s| s.date);
        SegmentTable::new(period, entries)
    }

    pub fn constant(period: Time, value: Time) -> Self {
        SegmentTable {
            period,
            entries: vec![Segment::new(Time::ZERO, value, Trend::Flat)],
        }
    }

    /// The emitter's own distance: zero everywhere.
    pub fn zero(period: Time) -> Self {
        SegmentTable::constant(period, Time::ZERO)
    }

    fn check(&self) -> Result<(), SegmentError> {
        if !self.period.is_positive() {
            return Err(SegmentError::NonPositivePeriod);
        }
        if self.entries.is_empty() {
            return Err(SegmentError::Empty);
        }
        for (i, s) in self.entries.iter().enumerate() {
            if s.date.is_negative() || s.date >= self.period {
                return Err(SegmentError::DateOutOfRange(s.date));
            }
            if i > 0 && s.date <= self.entries[i - 1].date {
                return Err(SegmentError::NotIncreasing(s.date));
            }
            if s.value.is_negative() {
                return Err(SegmentError::NegativeValue(s.date));
            }
        }
        for i in 0..self.entries.len() {
            let s = self.entries[i];
            if s.trend == Trend::Slope && !(s.value - self.span(i)).is_positive() {
                return Err(SegmentError::SlopeExhausted(s.date));
            }
        }
        Ok(())
    }

    pub fn period(&self) -> Time {
        self.period
    }

    pub fn entries(&self) -> &[Segment] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dates(&self) -> Vec<Time> {
        self.entries.iter().map(|s| s.date).collect()
    }

    /// Length of the stretch covered by entry `i`.
    pub fn span(&self, i: usize) -> Time {
        let here = self.entries[i].date;
        match self.entries.get(i + 1) {
            Some(next) => next.date - here,
            None => self.entries[0].date + self.period - here,
        }
    }

    /// Limit of entry `i` as its stretch ends.
    pub fn end_limit(&self, i: usize) -> Time {
        self.entries[i].value_after(self.span(i))
    }

    fn covering(&self, t: Time) -> (usize, Time) {
        let t = t.rem_euclid(self.period);
        match self.entries.iter().rposition(|s| s.date <= t) {
            Some(i) => (i, t - self.entries[i].date),
            None => {
                let i = self.entries.len() - 1;
                (i, t + self.period - self.entries[i].date)
            }
        }
    }

    pub fn eval_at(&self, t: Time) -> Result<Time, SegmentError> {
        if self.entries.is_empty() {
            return Err(SegmentError::Empty);
        }
        let (i, elapsed) = self.covering(t);
        Ok(self.entries[i].value_after(elapsed))
    }

    /// Trend of the entry covering `t`.
    pub fn trend_at(&self, t: Time) -> Trend {
        self.entries[self.covering(t).0].trend
    }

    /// Inserts an entry at `t` without changing the function.
    pub fn split_at(&self, t: Time) -> SegmentTable {
        let t = t.rem_euclid(self.period);
        if self.entries.iter().any(|s| s.date == t) {
            return self.clone();
        }
        let (i, elapsed) = self.covering(t);
        let covering = self.entries[i];
        let inserted = Segment {
            date: t,
            value: covering.value_after(elapsed),
            trend: covering.trend,
        };
        let mut entries = self.entries.clone();
        let pos = entries.partition_point(|s| s.date < t);
        entries.insert(pos, inserted);
        SegmentTable {
            period: self.period,
            entries,
        }
    }

    fn split_all(&self, dates: &[Time]) -> SegmentTable {
        dates.iter().fold(self.clone(), |acc, &d| acc.split_at(d))
    }

    /// Rotates the function by `delta`: the result at `t + delta` equals
    /// this table at `t`. Used to change clock referential.
    pub fn shifted(&self, delta: Time) -> SegmentTable {
        let mut entries: Vec<Segment> = self
            .entries
            .iter()
            .map(|s| Segment {
                date: (s.date + delta).rem_euclid(self.period),
                ..*s
            })
            .collect();
        entries.sort_by_key(|s| s.date);
        SegmentTable {
            period: self.period,
            entries,
        }
    }

    /// Merges neighbouring entries that continue the same straight piece.
    /// Never merges across the period boundary, so an entry at date 0 is
    /// kept.
    pub fn canonicalize(&self) -> SegmentTable {
        let mut out: Vec<Segment> = Vec::with_capacity(self.entries.len());
        for s in &self.entries {
            if let Some(prev) = out.last() {
                if continues(prev, s) {
                    continue;
                }
            }
            out.push(*s);
        }
        SegmentTable {
            period: self.period,
            entries: out,
        }
    }

    /// The unique minimal description of the function on the circle:
    /// canonical form, plus absorption of the first entry into the last one
    /// when they are the same straight piece across the boundary.
    pub fn normal_form(&self) -> SegmentTable {
        let mut t = self.canonicalize();
        if t.entries.len() > 1 {
            let first = t.entries[0];
            let last = *t.entries.last().unwrap();
            let lifted = Segment {
                date: first.date + self.period,
                ..first
            };
            if continues(&last, &lifted) {
                t.entries.remove(0);
            }
        }
        if t.entries.len() == 1 && t.entries[0].trend == Trend::Flat {
            t.entries[0].date = Time::ZERO;
        }
        t
    }

    pub fn same_function(&self, other: &SegmentTable) -> bool {
        self.period == other.period && self.normal_form() == other.normal_form()
    }

    /// At every entry boundary the function restarts at or above where the
    /// previous stretch was heading.
    pub fn no_downward_jump(&self) -> bool {
        (0..self.entries.len()).all(|i| {
            let next = &self.entries[(i + 1) % self.entries.len()];
            next.value >= self.end_limit(i)
        })
    }

    /// Smallest value and the maximal stretches where it is reached.
    ///
    /// Flat entries at the minimum contribute their stretch. A slope whose
    /// end limit is the minimum contributes the single point where it ends,
    /// which the underlying distance reaches because arrivals are
    /// left-continuous in the departure date.
    pub fn min_windows(&self) -> Result<MinWindows, SegmentError> {
        if self.entries.is_empty() {
            return Err(SegmentError::Empty);
        }
        let p = self.period;
        let candidate = |i: usize| match self.entries[i].trend {
            Trend::Flat => self.entries[i].value,
            Trend::Slope => self.end_limit(i),
        };
        let value = (0..self.entries.len()).map(candidate).min().unwrap();

        let mut windows: Vec<Window> = Vec::new();
        let mut points: Vec<Time> = Vec::new();
        for i in 0..self.entries.len() {
            if candidate(i) != value {
                continue;
            }
            let s = self.entries[i];
            match s.trend {
                Trend::Flat => windows.push(Window {
                    start: s.date,
                    end: s.date + self.span(i),
                }),
                Trend::Slope => points.push((s.date + self.span(i)).rem_euclid(p)),
            }
        }
        windows.sort_by_key(|w| w.start);
        let mut merged: Vec<Window> = Vec::new();
        for w in windows {
            match merged.last_mut() {
                Some(last) if last.end == w.start => last.end = w.end,
                _ => merged.push(w),
            }
        }
        if merged.len() > 1 {
            let first = merged[0];
            let last = *merged.last().unwrap();
            if last.end == first.start + p {
                merged.pop();
                merged[0] = Window {
                    start: last.start,
                    end: first.end + p,
                };
                merged.sort_by_key(|w| w.start);
            }
        }
        if merged.len() == 1 && merged[0].end - merged[0].start == p {
            merged[0] = Window {
                start: Time::ZERO,
                end: p,
            };
        }
        for pt in points {
            if !merged.iter().any(|w| w.contains(pt, p)) {
                merged.push(Window { start: pt, end: pt });
            }
        }
        merged.sort_by_key(|w| (w.start, w.end));
        Ok(MinWindows {
            value,
            windows: merged,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,value,trend\n");
        for s in &self.entries {
            let _ = writeln!(out, "{},{},{}", s.date, s.value, s.trend);
        }
        out
    }

    pub fn from_csv(period: Time, text: &str) -> Result<Self, SegmentError> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx + 1;
            if line.is_empty() || line.starts_with('#') || line == "date,value,trend" {
                continue;
            }
            let err = |msg: &str| SegmentError::Csv {
                line: lineno,
                msg: msg.to_string(),
            };
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(err("expected three columns"));
            }
            let date: Time = cols[0].parse().map_err(|_| err("bad date"))?;
            let value: Time = cols[1].parse().map_err(|_| err("bad value"))?;
            let trend = match cols[2] {
                "flat" => Trend::Flat,
                "slope" => Trend::Slope,
                _ => return Err(err("trend must be flat or slope")),
            };
            entries.push(Segment { date, value, trend });
        }
        SegmentTable::new(period, entries)
    }

    /// `(t, value)` pairs at each entry start and each stretch end limit,
    /// ready for an external plotter.
    pub fn plot_points(&self) -> Vec<(Time, Time)> {
        let mut pts = Vec::new();
        let first = self.entries[0].date;
        if !first.is_zero() {
            pts.push((Time::ZERO, self.eval_at(Time::ZERO).unwrap_or(Time::ZERO)));
        }
        for i in 0..self.entries.len() {
            let s = self.entries[i];
            let end = s.date + self.span(i);
            pts.push((s.date, s.value));
            if end > self.period {
                let at_p = s.value_after(self.period - s.date);
                pts.push((self.period, at_p));
            } else {
                pts.push((end, self.end_limit(i)));
            }
        }
        pts
    }
}

fn continues(prev: &Segment, next: &Segment) -> bool {
    if prev.trend != next.trend {
        return false;
    }
    match prev.trend {
        Trend::Flat => prev.value == next.value,
        Trend::Slope => next.value == prev.value - (next.date - prev.date),
    }
}

/// Splits both tables at every date of the other one, and at 0.
pub fn align_tables(
    a: &SegmentTable,
    b: &SegmentTable,
) -> Result<(SegmentTable, SegmentTable), SegmentError> {
    if a.period != b.period {
        return Err(SegmentError::PeriodMismatch(a.period, b.period));
    }
    let mut dates: Vec<Time> = a.dates();
    dates.extend(b.dates());
    dates.push(Time::ZERO);
    dates.sort();
    dates.dedup();
    Ok((a.split_all(&dates), b.split_all(&dates)))
}

/// Splits aligned flat/slope pairs at their crossing point so that within
/// every stretch one table dominates the other.
pub fn decross(
    a: &SegmentTable,
    b: &SegmentTable,
) -> Result<(SegmentTable, SegmentTable), SegmentError> {
    if a.period != b.period {
        return Err(SegmentError::PeriodMismatch(a.period, b.period));
    }
    if a.dates() != b.dates() || a.entries.first().map(|s| s.date) != Some(Time::ZERO) {
        return Err(SegmentError::NotAligned);
    }
    let mut cuts = Vec::new();
    for i in 0..a.entries.len() {
        let (x, y) = (a.entries[i], b.entries[i]);
        let (flat, slope) = match (x.trend, y.trend) {
            (Trend::Flat, Trend::Slope) => (x, y),
            (Trend::Slope, Trend::Flat) => (y, x),
            _ => continue,
        };
        let delta = slope.value - flat.value;
        if delta.is_positive() && delta < a.span(i) {
            cuts.push(x.date + delta);
        }
    }
    Ok((a.split_all(&cuts), b.split_all(&cuts)))
}

/// Segment-wise maximum of two tables, in canonical form.
pub fn aggregate(a: &SegmentTable, b: &SegmentTable) -> Result<SegmentTable, SegmentError> {
    let (a, b) = align_tables(a, b)?;
    let (a, b) = decross(&a, &b)?;
    let entries = a
        .entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| {
            if x.value > y.value || (x.value == y.value && x.trend == Trend::Flat) {
                *x
            } else {
                *y
            }
        })
        .collect();
    Ok(SegmentTable {
        period: a.period,
        entries,
    }
    .canonicalize())
}
