use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{Error, Result};

/// Strictly increasing, finite sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidTrajectory("time grid is empty"));
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidTrajectory("time grid has non-finite points"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTrajectory("time grid is not strictly increasing"));
        }
        Ok(TimeGrid(points))
    }

    /// `samples` equally spaced points from `t0` to `t1` inclusive.
    pub fn uniform(t0: f64, t1: f64, samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(Error::param("samples", "at least two samples are required"));
        }
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::param("horizon", "end time must exceed start time"));
        }
        let n = samples - 1;
        let h = (t1 - t0) / n as f64;
        let mut pts: Vec<f64> = (0..n).map(|k| t0 + k as f64 * h).collect();
        pts.push(t1);
        TimeGrid::new(pts)
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn first(&self) -> f64 {
        self.0[0]
    }

    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for TimeGrid {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Sampled model state: one row of channel values per time point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    labels: Vec<String>,
}

impl Trajectory {
    pub fn new<S: AsRef<str>>(labels: &[S]) -> Self {
        Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            labels: labels.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    pub fn with_capacity<S: AsRef<str>>(labels: &[S], cap: usize) -> Self {
        let mut tr = Self::new(labels);
        tr.times.reserve(cap);
        tr.states.reserve(cap);
        tr
    }

    /// Builds a trajectory from per-channel columns sampled on `times`.
    pub fn from_columns<S: AsRef<str>>(times: &[f64], labels: &[S], columns: &[Vec<f64>]) -> Result<Self> {
        if labels.len() != columns.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                found: columns.len(),
            });
        }
        let mut tr = Self::with_capacity(labels, times.len());
        for (k, &t) in times.iter().enumerate() {
            let mut row = Vec::with_capacity(columns.len());
            for col in columns {
                row.push(*col.get(k).ok_or(Error::InvalidTrajectory("column shorter than time axis"))?);
            }
            tr.push(t, row)?;
        }
        Ok(tr)
    }

    /// Evaluates `f` at every grid point.
    pub fn tabulate<S, F>(grid: &[f64], labels: &[S], mut f: F) -> Result<Self>
    where
        S: AsRef<str>,
        F: FnMut(f64) -> Result<Vec<f64>>,
    {
        let mut tr = Self::with_capacity(labels, grid.len());
        for &t in grid {
            tr.push(t, f(t)?)?;
        }
        Ok(tr)
    }

    pub fn push(&mut self, t: f64, state: Vec<f64>) -> Result<()> {
        if state.len() != self.labels.len() {
            return Err(Error::DimensionMismatch {
                expected: self.labels.len(),
                found: state.len(),
            });
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::InvalidTrajectory("times must be strictly increasing"));
            }
        }
        self.times.push(t);
        self.states.push(state);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }

    pub fn column(&self, idx: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[idx]).collect()
    }

    pub fn channel(&self, name: &str) -> Option<Vec<f64>> {
        self.index_of(name).map(|i| self.column(i))
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        self.states.last().map(|s| s.as_slice())
    }

    /// Replaces the channel names; the count must match.
    pub fn relabel<S: AsRef<str>>(mut self, labels: &[S]) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return Err(Error::DimensionMismatch {
                expected: self.labels.len(),
                found: labels.len(),
            });
        }
        self.labels = labels.iter().map(|s| s.as_ref().to_string()).collect();
        Ok(self)
    }

    /// Appends a derived channel.
    pub fn add_channel(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.times.len() {
            return Err(Error::DimensionMismatch {
                expected: self.times.len(),
                found: values.len(),
            });
        }
        self.labels.push(name.to_string());
        for (row, v) in self.states.iter_mut().zip(values) {
            row.push(v);
        }
        Ok(())
    }

    /// Keeps only the named channels, in the order given.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.index_of(n.as_ref()).ok_or(Error::InvalidTrajectory("unknown channel")))
            .collect::<Result<_>>()?;
        let mut out = Self::with_capacity(names, self.len());
        out.times = self.times.clone();
        out.states = self
            .states
            .iter()
            .map(|s| idx.iter().map(|&i| s[i]).collect())
            .collect();
        Ok(out)
    }
}
