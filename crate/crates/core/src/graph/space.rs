use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RangeError {
    #[error("thread space must have 1 to 3 dimensions, got {0}")]
    Dims(usize),
    #[error("thread space extent must be at least 1 (dimension {0})")]
    ZeroExtent(usize),
    #[error("coordinate {coord} out of range for dimension {dim} with extent {extent}")]
    Coord { dim: usize, coord: usize, extent: usize },
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("thread id {tid} out of range for block of {block_size}")]
    Tid { tid: usize, block_size: usize },
    #[error("delta offset {offset} in dimension {dim} must be smaller than extent {extent}")]
    Delta { dim: usize, offset: i64, extent: usize },
}

/// Block-level thread index space. Linearization is row-major with
/// dimension 0 fastest (`tid = x + ext_x * (y + ext_y * z)`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ThreadSpace {
    extents: Vec<usize>,
}

impl TryFrom<Vec<usize>> for ThreadSpace {
    type Error = RangeError;

    fn try_from(extents: Vec<usize>) -> Result<Self, RangeError> {
        ThreadSpace::new(extents)
    }
}

impl From<ThreadSpace> for Vec<usize> {
    fn from(s: ThreadSpace) -> Self {
        s.extents
    }
}

impl ThreadSpace {
    pub fn new(extents: Vec<usize>) -> Result<Self, RangeError> {
        if extents.is_empty() || extents.len() > 3 {
            return Err(RangeError::Dims(extents.len()));
        }
        if let Some(dim) = extents.iter().position(|&e| e == 0) {
            return Err(RangeError::ZeroExtent(dim));
        }
        Ok(Self { extents })
    }

    pub fn linear(n: usize) -> Self {
        Self::new(vec![n]).expect("1-D space with n >= 1")
    }

    pub fn dims(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn block_size(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn linearize(&self, coords: &[usize]) -> Result<usize, RangeError> {
        if coords.len() != self.dims() {
            return Err(RangeError::Arity { expected: self.dims(), got: coords.len() });
        }
        let mut tid = 0;
        for dim in (0..self.dims()).rev() {
            let (c, e) = (coords[dim], self.extents[dim]);
            if c >= e {
                return Err(RangeError::Coord { dim, coord: c, extent: e });
            }
            tid = tid * e + c;
        }
        Ok(tid)
    }

    pub fn delinearize(&self, tid: usize) -> Result<Vec<usize>, RangeError> {
        if tid >= self.block_size() {
            return Err(RangeError::Tid { tid, block_size: self.block_size() });
        }
        let mut rest = tid;
        Ok(self
            .extents
            .iter()
            .map(|&e| {
                let c = rest % e;
                rest /= e;
                c
            })
            .collect())
    }

    /// `tid`'s coordinate along `dim`. Panics if `tid` is out of range.
    pub fn coord(&self, tid: usize, dim: usize) -> usize {
        let stride: usize = self.extents[..dim].iter().product();
        (tid / stride) % self.extents[dim]
    }

    /// Thread at `coords(tid) + sign * offsets`, or `None` if any dimension
    /// leaves its extent.
    pub fn offset_tid(&self, tid: usize, offsets: &[i64], sign: i64) -> Option<usize> {
        if tid >= self.block_size() {
            return None;
        }
        let mut out = 0usize;
        let mut stride = 1usize;
        for (dim, &e) in self.extents.iter().enumerate() {
            let c = self.coord(tid, dim) as i64 + sign * offsets.get(dim).copied().unwrap_or(0);
            if c < 0 || c >= e as i64 {
                return None;
            }
            out += c as usize * stride;
            stride *= e;
        }
        Some(out)
    }
}

impl fmt::Display for ThreadSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.extents.iter().map(|e| e.to_string()).collect();
        f.write_str(&parts.join("x"))
    }
}

/// Per-dimension thread offset. Missing trailing dimensions are zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TidDelta {
    pub offsets: Vec<i64>,
}

impl TidDelta {
    pub fn new(offsets: Vec<i64>) -> Self {
        Self { offsets }
    }

    pub fn linear(offset: i64) -> Self {
        Self { offsets: vec![offset] }
    }

    pub fn is_zero(&self) -> bool {
        self.offsets.iter().all(|&o| o == 0)
    }

    /// Signed linear delta against `space`.
    pub fn to_linear(&self, space: &ThreadSpace) -> Result<i64, RangeError> {
        if self.offsets.len() > space.dims() {
            return Err(RangeError::Arity { expected: space.dims(), got: self.offsets.len() });
        }
        let mut stride = 1i64;
        let mut total = 0i64;
        for (dim, &e) in space.extents().iter().enumerate() {
            let o = self.offsets.get(dim).copied().unwrap_or(0);
            if o.unsigned_abs() >= e as u64 {
                return Err(RangeError::Delta { dim, offset: o, extent: e });
            }
            total += o * stride;
            stride *= e as i64;
        }
        Ok(total)
    }
}

impl fmt::Display for TidDelta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.offsets.len() == 1 {
            return write!(f, "{}", self.offsets[0]);
        }
        let parts: Vec<String> = self.offsets.iter().map(|o| o.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq3() -> ThreadSpace {
        ThreadSpace::new(vec![3, 3]).unwrap()
    }

    /// Row-major enumeration with x fastest, independent of `linearize`.
    fn enumerate(space: &ThreadSpace) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let e = space.extents();
        let ez = if e.len() > 2 { e[2] } else { 1 };
        let ey = if e.len() > 1 { e[1] } else { 1 };
        for z in 0..ez {
            for y in 0..ey {
                for x in 0..e[0] {
                    let mut c = vec![x, y, z];
                    c.truncate(e.len());
                    out.push(c);
                }
            }
        }
        out
    }

    #[test]
    fn linearize_examples() {
        let s = sq3();
        assert_eq!(s.linearize(&[0, 0]).unwrap(), 0);
        assert_eq!(s.linearize(&[2, 1]).unwrap(), 5);
        assert_eq!(s.delinearize(8).unwrap(), vec![2, 2]);
        let order = enumerate(&s);
        assert_eq!(order[5], vec![2, 1]);
        assert_eq!(order[8], vec![2, 2]);
        for (tid, c) in order.iter().enumerate() {
            assert_eq!(s.linearize(c).unwrap(), tid);
        }
    }

    #[test]
    fn range_errors() {
        let s = sq3();
        assert!(matches!(s.linearize(&[3, 0]), Err(RangeError::Coord { .. })));
        assert!(matches!(s.delinearize(9), Err(RangeError::Tid { .. })));
        assert!(ThreadSpace::new(vec![]).is_err());
        assert!(ThreadSpace::new(vec![2, 0]).is_err());
        assert!(ThreadSpace::new(vec![1, 1, 1, 1]).is_err());
    }

    /// Checks the linear-delta identity over every thread whose shifted
    /// coordinates stay in range.
    fn identity_holds(space: &ThreadSpace, d: &TidDelta, lin: i64) -> bool {
        enumerate(space).iter().all(|c| {
            let shifted: Vec<i64> =
                c.iter().enumerate().map(|(i, &x)| x as i64 + d.offsets.get(i).copied().unwrap_or(0)).collect();
            if shifted.iter().zip(space.extents()).any(|(&x, &e)| x < 0 || x >= e as i64) {
                return true;
            }
            let sc: Vec<usize> = shifted.iter().map(|&x| x as usize).collect();
            space.linearize(&sc).unwrap() as i64 == space.linearize(c).unwrap() as i64 + lin
        })
    }

    #[test]
    fn delta_examples() {
        let s = sq3();
        let up = TidDelta::new(vec![0, -1]);
        let right = TidDelta::new(vec![1, 0]);
        assert!(identity_holds(&s, &up, -3));
        assert!(identity_holds(&s, &right, 1));
        assert_eq!(up.to_linear(&s).unwrap(), -3);
        assert_eq!(right.to_linear(&s).unwrap(), 1);
        assert_eq!(TidDelta::new(vec![0, 0]).to_linear(&s).unwrap(), 0);
        assert!(matches!(TidDelta::new(vec![3, 0]).to_linear(&s), Err(RangeError::Delta { .. })));
    }

    #[test]
    fn offset_tid_is_per_dimension() {
        let s = sq3();
        // (2,0) shifted by +1 in x leaves the extent even though tid 3 exists.
        assert_eq!(s.offset_tid(2, &[1, 0], 1), None);
        assert_eq!(s.offset_tid(1, &[1, 0], 1), Some(2));
        assert_eq!(s.offset_tid(4, &[0, -1], 1), Some(1));
    }
}
