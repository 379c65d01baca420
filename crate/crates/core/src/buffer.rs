//! Typed byte buffers and element-wise reduction operators.
//!
//! Every buffer is packed little-endian regardless of host byte order, so a
//! buffer can go on the wire as-is.

use std::fmt;
use std::sync::Arc;

use crate::error::{FmiError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Datatype {
    Int32,
    Int64,
    Float64,
    Byte,
}

impl Datatype {
    /// Bytes per element.
    pub const fn width(self) -> usize {
        match self {
            Datatype::Int32 => 4,
            Datatype::Int64 | Datatype::Float64 => 8,
            Datatype::Byte => 1,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Datatype::Int32 => "int32",
            Datatype::Int64 => "int64",
            Datatype::Float64 => "float64",
            Datatype::Byte => "byte",
        }
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single element, used by custom reduction callables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Int32(i32),
    Int64(i64),
    Float64(f64),
    Byte(u8),
}

impl Scalar {
    pub fn datatype(self) -> Datatype {
        match self {
            Scalar::Int32(_) => Datatype::Int32,
            Scalar::Int64(_) => Datatype::Int64,
            Scalar::Float64(_) => Datatype::Float64,
            Scalar::Byte(_) => Datatype::Byte,
        }
    }

    fn read(dtype: Datatype, bytes: &[u8]) -> Scalar {
        match dtype {
            Datatype::Int32 => Scalar::Int32(i32::from_le_bytes(bytes.try_into().unwrap())),
            Datatype::Int64 => Scalar::Int64(i64::from_le_bytes(bytes.try_into().unwrap())),
            Datatype::Float64 => Scalar::Float64(f64::from_le_bytes(bytes.try_into().unwrap())),
            Datatype::Byte => Scalar::Byte(bytes[0]),
        }
    }

    fn write(self, out: &mut Vec<u8>) {
        match self {
            Scalar::Int32(v) => out.extend_from_slice(&v.to_le_bytes()),
            Scalar::Int64(v) => out.extend_from_slice(&v.to_le_bytes()),
            Scalar::Float64(v) => out.extend_from_slice(&v.to_le_bytes()),
            Scalar::Byte(v) => out.push(v),
        }
    }
}

/// Rust element types that map onto a [`Datatype`].
pub trait Element: Copy + Send + Sync + 'static {
    const DTYPE: Datatype;
    fn put_le(self, out: &mut Vec<u8>);
    fn get_le(bytes: &[u8]) -> Self;
}

macro_rules! element {
    ($t:ty, $dt:expr) => {
        impl Element for $t {
            const DTYPE: Datatype = $dt;
            fn put_le(self, out: &mut Vec<u8>) {
                out.extend_from_slice(&self.to_le_bytes());
            }
            fn get_le(bytes: &[u8]) -> Self {
                <$t>::from_le_bytes(bytes.try_into().unwrap())
            }
        }
    };
}

element!(i32, Datatype::Int32);
element!(i64, Datatype::Int64);
element!(f64, Datatype::Float64);
element!(u8, Datatype::Byte);

/// Raw bytes tagged with their element type and count.
#[derive(Clone, PartialEq, Eq)]
pub struct DataBuffer {
    bytes: Vec<u8>,
    dtype: Datatype,
    count: usize,
}

impl fmt::Debug for DataBuffer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DataBuffer")
            .field("dtype", &self.dtype)
            .field("count", &self.count)
            .field("len", &self.bytes.len())
            .finish()
    }
}

/// Packs a homogeneous element list little-endian.
pub fn buffer_of<T: Element>(values: &[T]) -> DataBuffer {
    let mut bytes = Vec::with_capacity(values.len() * T::DTYPE.width());
    for v in values {
        v.put_le(&mut bytes);
    }
    DataBuffer {
        bytes,
        dtype: T::DTYPE,
        count: values.len(),
    }
}

impl DataBuffer {
    /// Wraps raw bytes; the length must be a whole number of elements.
    pub fn from_bytes(dtype: Datatype, bytes: Vec<u8>) -> Result<Self> {
        if !bytes.len().is_multiple_of(dtype.width()) {
            return Err(FmiError::protocol(format!(
                "{} bytes is not a whole number of {dtype} elements",
                bytes.len()
            )));
        }
        let count = bytes.len() / dtype.width();
        Ok(DataBuffer {
            bytes,
            dtype,
            count,
        })
    }

    pub fn empty(dtype: Datatype) -> Self {
        DataBuffer {
            bytes: Vec::new(),
            dtype,
            count: 0,
        }
    }

    pub fn zeroed(dtype: Datatype, count: usize) -> Self {
        DataBuffer {
            bytes: vec![0; count * dtype.width()],
            dtype,
            count,
        }
    }

    pub fn dtype(&self) -> Datatype {
        self.dtype
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn len_bytes(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// Unpacks the elements; fails if `T` does not match the buffer's datatype.
    pub fn to_vec<T: Element>(&self) -> Result<Vec<T>> {
        if T::DTYPE != self.dtype {
            return Err(FmiError::protocol(format!(
                "buffer holds {} but {} was requested",
                self.dtype,
                T::DTYPE
            )));
        }
        Ok(self
            .bytes
            .chunks_exact(self.dtype.width())
            .map(T::get_le)
            .collect())
    }

    pub fn scalars(&self) -> impl Iterator<Item = Scalar> + '_ {
        let dtype = self.dtype;
        self.bytes
            .chunks_exact(dtype.width())
            .map(move |c| Scalar::read(dtype, c))
    }

    /// Elements `[start, start + len)` as a new buffer.
    pub fn slice(&self, start: usize, len: usize) -> DataBuffer {
        let w = self.dtype.width();
        DataBuffer {
            bytes: self.bytes[start * w..(start + len) * w].to_vec(),
            dtype: self.dtype,
            count: len,
        }
    }

    /// Concatenates buffers of one datatype; `dtype` covers the empty case.
    pub fn concat<'a>(dtype: Datatype, parts: impl IntoIterator<Item = &'a DataBuffer>) -> Result<DataBuffer> {
        let mut bytes = Vec::new();
        for p in parts {
            if p.dtype != dtype {
                return Err(FmiError::protocol(format!(
                    "cannot concatenate {} into {dtype}",
                    p.dtype
                )));
            }
            bytes.extend_from_slice(&p.bytes);
        }
        DataBuffer::from_bytes(dtype, bytes)
    }
}

type CustomFn = dyn Fn(Scalar, Scalar) -> Scalar + Send + Sync;

#[derive(Clone)]
enum OpKind {
    Sum,
    Prod,
    Min,
    Max,
    NoOp,
    Custom(Arc<CustomFn>),
}

/// An associative element-wise operator.
///
/// Non-commutative operators are always folded in ascending rank order by
/// the collectives.
#[derive(Clone)]
pub struct ReductionOp {
    name: String,
    kind: OpKind,
    commutative: bool,
}

impl fmt::Debug for ReductionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReductionOp")
            .field("name", &self.name)
            .field("commutative", &self.commutative)
            .finish()
    }
}

impl ReductionOp {
    fn builtin(name: &str, kind: OpKind, commutative: bool) -> Self {
        ReductionOp {
            name: name.to_string(),
            kind,
            commutative,
        }
    }

    /// Wrapping addition for integers.
    pub fn sum() -> Self {
        Self::builtin("sum", OpKind::Sum, true)
    }

    /// Wrapping multiplication for integers.
    pub fn prod() -> Self {
        Self::builtin("prod", OpKind::Prod, true)
    }

    pub fn min() -> Self {
        Self::builtin("min", OpKind::Min, true)
    }

    pub fn max() -> Self {
        Self::builtin("max", OpKind::Max, true)
    }

    /// Keeps the left operand. Used by the barrier, where values carry no meaning.
    pub fn noop() -> Self {
        Self::builtin("noop", OpKind::NoOp, false)
    }

    /// A user callable applied per element pair. The callable must return a
    /// scalar of the same datatype it was given.
    pub fn custom<F>(name: &str, commutative: bool, f: F) -> Self
    where
        F: Fn(Scalar, Scalar) -> Scalar + Send + Sync + 'static,
    {
        Self::builtin(name, OpKind::Custom(Arc::new(f)), commutative)
    }

    /// Looks up a built-in by name.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "sum" => Some(Self::sum()),
            "prod" => Some(Self::prod()),
            "min" => Some(Self::min()),
            "max" => Some(Self::max()),
            "noop" => Some(Self::noop()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_commutative(&self) -> bool {
        self.commutative
    }

    /// Applies the operator to one element pair.
    pub fn combine(&self, a: Scalar, b: Scalar) -> Scalar {
        use Scalar::*;
        match (&self.kind, a, b) {
            (OpKind::Custom(f), a, b) => f(a, b),
            (OpKind::NoOp, a, _) => a,
            (OpKind::Sum, Int32(x), Int32(y)) => Int32(x.wrapping_add(y)),
            (OpKind::Sum, Int64(x), Int64(y)) => Int64(x.wrapping_add(y)),
            (OpKind::Sum, Float64(x), Float64(y)) => Float64(x + y),
            (OpKind::Sum, Byte(x), Byte(y)) => Byte(x.wrapping_add(y)),
            (OpKind::Prod, Int32(x), Int32(y)) => Int32(x.wrapping_mul(y)),
            (OpKind::Prod, Int64(x), Int64(y)) => Int64(x.wrapping_mul(y)),
            (OpKind::Prod, Float64(x), Float64(y)) => Float64(x * y),
            (OpKind::Prod, Byte(x), Byte(y)) => Byte(x.wrapping_mul(y)),
            (OpKind::Min, Int32(x), Int32(y)) => Int32(x.min(y)),
            (OpKind::Min, Int64(x), Int64(y)) => Int64(x.min(y)),
            (OpKind::Min, Float64(x), Float64(y)) => Float64(x.min(y)),
            (OpKind::Min, Byte(x), Byte(y)) => Byte(x.min(y)),
            (OpKind::Max, Int32(x), Int32(y)) => Int32(x.max(y)),
            (OpKind::Max, Int64(x), Int64(y)) => Int64(x.max(y)),
            (OpKind::Max, Float64(x), Float64(y)) => Float64(x.max(y)),
            (OpKind::Max, Byte(x), Byte(y)) => Byte(x.max(y)),
            // apply_reduce checks datatypes before reaching here
            (_, a, _) => a,
        }
    }
}

/// Element-wise `op(a[i], b[i])`.
pub fn apply_reduce(op: &ReductionOp, a: &DataBuffer, b: &DataBuffer) -> Result<DataBuffer> {
    if a.dtype != b.dtype || a.count != b.count {
        return Err(FmiError::protocol(format!(
            "reduction operands differ: {} x {} vs {} x {}",
            a.count, a.dtype, b.count, b.dtype
        )));
    }
    let mut bytes = Vec::with_capacity(a.bytes.len());
    for (x, y) in a.scalars().zip(b.scalars()) {
        let r = op.combine(x, y);
        if r.datatype() != a.dtype {
            return Err(FmiError::protocol(format!(
                "operator {} returned {} for {} operands",
                op.name,
                r.datatype(),
                a.dtype
            )));
        }
        r.write(&mut bytes);
    }
    Ok(DataBuffer {
        bytes,
        dtype: a.dtype,
        count: a.count,
    })
}
