//! Flat parameter vectors with named segments.
//!
//! Optimizers treat the parameter as one flat `f64` array; problems that are
//! naturally matrix-shaped (e.g. the two factors of a matrix factorization)
//! address their pieces through named segments of that array.

use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, PartialEq, Eq)]
struct Segment {
    name: String,
    offset: usize,
    len: usize,
}

/// Immutable description of how a flat vector splits into named segments.
#[derive(Debug, PartialEq, Eq)]
pub struct Layout {
    segments: Vec<Segment>,
    total: usize,
}

impl Layout {
    /// Build a layout from `(name, len)` pairs, laid out contiguously in order.
    pub fn new(segments: &[(&str, usize)]) -> Arc<Layout> {
        let mut out = Vec::with_capacity(segments.len());
        let mut offset = 0;
        for (name, len) in segments {
            out.push(Segment {
                name: (*name).to_string(),
                offset,
                len: *len,
            });
            offset += len;
        }
        Arc::new(Layout {
            segments: out,
            total: offset,
        })
    }

    /// Single anonymous segment `"x"` covering the whole vector.
    pub fn flat(len: usize) -> Arc<Layout> {
        Layout::new(&[("x", len)])
    }

    pub fn total_len(&self) -> usize {
        self.total
    }

    pub fn segment_names(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().map(|s| s.name.as_str())
    }

    fn find(&self, name: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.name == name)
    }
}

/// A point in parameter space: flat `f64` storage plus a shared [`Layout`].
#[derive(Clone, Debug)]
pub struct ParamVector {
    layout: Arc<Layout>,
    data: Vec<f64>,
}

impl ParamVector {
    pub fn zeros(layout: Arc<Layout>) -> Self {
        let n = layout.total_len();
        ParamVector {
            layout,
            data: vec![0.0; n],
        }
    }

    pub fn new(layout: Arc<Layout>, data: Vec<f64>) -> Result<Self> {
        if layout.total_len() != data.len() {
            return Err(Error::LayoutMismatch(format!(
                "layout expects {} entries, got {}",
                layout.total_len(),
                data.len()
            )));
        }
        Ok(ParamVector { layout, data })
    }

    /// Vector with a single unnamed segment; convenient for flat problems.
    pub fn from_flat(data: Vec<f64>) -> Self {
        let layout = Layout::flat(data.len());
        ParamVector { layout, data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn same_layout(&self, other: &ParamVector) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout) || self.layout == other.layout
    }

    pub fn check_same_layout(&self, other: &ParamVector) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(Error::LayoutMismatch(format!(
                "incompatible layouts ({} vs {} entries)",
                self.len(),
                other.len()
            )))
        }
    }

    fn assert_same_layout(&self, other: &ParamVector) {
        assert!(
            self.same_layout(other),
            "parameter layout mismatch ({} vs {} entries)",
            self.len(),
            other.len()
        );
    }

    pub fn segment(&self, name: &str) -> Option<&[f64]> {
        let s = self.layout.find(name)?;
        Some(&self.data[s.offset..s.offset + s.len])
    }

    pub fn segment_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let s = self.layout.find(name)?;
        let (offset, len) = (s.offset, s.len);
        Some(&mut self.data[offset..offset + len])
    }

    pub fn dot(&self, other: &ParamVector) -> f64 {
        self.assert_same_layout(other);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// In-place `self += coef * other`.
    pub fn add_scaled(&mut self, coef: f64, other: &ParamVector) {
        self.assert_same_layout(other);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += coef * b;
        }
    }

    /// Returns `self + coef * other` without modifying either operand.
    pub fn combined(&self, coef: f64, other: &ParamVector) -> ParamVector {
        let mut out = self.clone();
        out.add_scaled(coef, other);
        out
    }

    pub fn scale_in_place(&mut self, c: f64) {
        for a in &mut self.data {
            *a *= c;
        }
    }

    pub fn scaled(&self, c: f64) -> ParamVector {
        let mut out = self.clone();
        out.scale_in_place(c);
        out
    }

    /// Squared Euclidean distance `‖self − other‖²`.
    pub fn dist_sq(&self, other: &ParamVector) -> f64 {
        self.assert_same_layout(other);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Largest absolute coordinate difference; handy for trajectory comparisons.
    pub fn max_abs_diff(&self, other: &ParamVector) -> f64 {
        self.assert_same_layout(other);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }
}
