/// Dense row-major rank-3 tensor; the last axis is contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn filled(d0: usize, d1: usize, d2: usize, value: f64) -> Self {
        Self {
            dims: [d0, d1, d2],
            data: vec![value; d0 * d1 * d2],
        }
    }

    pub fn zeros(d0: usize, d1: usize, d2: usize) -> Self {
        Self::filled(d0, d1, d2, 0.0)
    }

    /// Panics if `data.len()` disagrees with the dimensions.
    pub fn from_vec(d0: usize, d1: usize, d2: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), d0 * d1 * d2, "tensor data length");
        Self {
            dims: [d0, d1, d2],
            data,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.dims[1] + b) * self.dims[2] + c
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[self.index(a, b, c)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, value: f64) {
        let i = self.index(a, b, c);
        self.data[i] = value;
    }

    /// Contiguous slice along the last axis.
    #[inline]
    pub fn lane(&self, a: usize, b: usize) -> &[f64] {
        let start = self.index(a, b, 0);
        &self.data[start..start + self.dims[2]]
    }

    #[inline]
    pub fn lane_mut(&mut self, a: usize, b: usize) -> &mut [f64] {
        let start = self.index(a, b, 0);
        let k = self.dims[2];
        &mut self.data[start..start + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn same_shape(&self, other: &Tensor3) -> bool {
        self.dims == other.dims
    }
}
