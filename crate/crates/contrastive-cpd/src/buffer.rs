//! Append-only storage for the observed series.

use std::fmt;

/// Append-only series of scalar or fixed-dimension vector samples.
///
/// Samples are stored flat; `sample(i)` returns the `i`-th row as a slice.
/// The buffer never mutates past entries, so snapshot views handed to
/// concurrent fits stay valid for the duration of a step.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationBuffer {
    dim: usize,
    data: Vec<f64>,
}

/// Immutable view of a contiguous run of samples.
#[derive(Debug, Clone, Copy)]
pub struct Samples<'a> {
    data: &'a [f64],
    dim: usize,
}

/// Sample dimension mismatch on push.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("expected sample of dimension {expected}, got {got}")]
pub struct DimensionError {
    pub expected: usize,
    pub got: usize,
}

impl ObservationBuffer {
    /// Empty buffer for samples of dimension `dim` (`dim >= 1`).
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "sample dimension must be at least 1");
        Self { dim, data: Vec::new() }
    }

    /// Buffer of scalar samples.
    pub fn from_scalars(values: &[f64]) -> Self {
        Self { dim: 1, data: values.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of samples stored.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Append one sample.
    pub fn push(&mut self, sample: &[f64]) -> Result<(), DimensionError> {
        if sample.len() != self.dim {
            return Err(DimensionError { expected: self.dim, got: sample.len() });
        }
        self.data.extend_from_slice(sample);
        Ok(())
    }

    /// Append a scalar sample to a dimension-1 buffer.
    pub fn push_scalar(&mut self, value: f64) -> Result<(), DimensionError> {
        self.push(&[value])
    }

    /// The `i`-th sample.
    pub fn sample(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// View of samples `start..end`.
    pub fn view(&self, start: usize, end: usize) -> Samples<'_> {
        assert!(start <= end && end <= self.len());
        Samples { data: &self.data[start * self.dim..end * self.dim], dim: self.dim }
    }

    /// View of the whole buffer.
    pub fn as_samples(&self) -> Samples<'_> {
        Samples { data: &self.data, dim: self.dim }
    }
}

impl<'a> Samples<'a> {
    /// Wrap a flat slice holding `data.len() / dim` samples.
    pub fn new(data: &'a [f64], dim: usize) -> Self {
        assert!(dim >= 1 && data.len() % dim == 0);
        Self { data, dim }
    }

    /// Scalar samples, one per slice element.
    pub fn from_scalars(values: &'a [f64]) -> Self {
        Self { data: values, dim: 1 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Sub-view over samples `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Samples<'a> {
        Samples { data: &self.data[start * self.dim..end * self.dim], dim: self.dim }
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a [f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }
}

impl fmt::Display for ObservationBuffer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ObservationBuffer(dim={}, len={})", self.dim, self.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_and_view() {
        let mut buf = ObservationBuffer::new(2);
        buf.push(&[1.0, 2.0]).unwrap();
        buf.push(&[3.0, 4.0]).unwrap();
        buf.push(&[5.0, 6.0]).unwrap();
        assert_eq!(buf.len(), 3);
        assert_eq!(buf.sample(1), &[3.0, 4.0]);
        let v = buf.view(1, 3);
        assert_eq!(v.len(), 2);
        assert_eq!(v.get(0), &[3.0, 4.0]);
        assert_eq!(v.get(1), &[5.0, 6.0]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut buf = ObservationBuffer::new(2);
        let err = buf.push(&[1.0]).unwrap_err();
        assert_eq!(err, DimensionError { expected: 2, got: 1 });
    }

    #[test]
    fn scalar_helpers() {
        let buf = ObservationBuffer::from_scalars(&[0.5, -0.5]);
        assert_eq!(buf.dim(), 1);
        assert_eq!(buf.sample(0), &[0.5]);
        let s = Samples::from_scalars(&[1.0, 2.0, 3.0]);
        assert_eq!(s.iter().map(|x| x[0]).collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
    }
}
