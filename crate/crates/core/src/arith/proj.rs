use super::ext::{ExtElem, ExtField};

/// A point [x : y] of P^1 over an extension field, normalized so the last
/// nonzero coordinate is 1: either [a : 1] or [1 : 0].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProjPoint {
    Affine(ExtElem),
    Infinity,
}

impl ProjPoint {
    /// Normalizes homogeneous coordinates; `None` when both vanish.
    pub fn from_coords(field: &ExtField, x: &ExtElem, y: &ExtElem) -> Option<Self> {
        if !y.is_zero() {
            Some(ProjPoint::Affine(field.mul(x, &field.inv(y))))
        } else if !x.is_zero() {
            Some(ProjPoint::Infinity)
        } else {
            None
        }
    }

    pub fn coords(&self, field: &ExtField) -> (ExtElem, ExtElem) {
        match self {
            ProjPoint::Affine(a) => (a.clone(), field.one()),
            ProjPoint::Infinity => (field.one(), field.zero()),
        }
    }

    /// Position in `enumerate_proj_line` order.
    pub fn index(&self, field: &ExtField) -> usize {
        match self {
            ProjPoint::Affine(a) => field.index_of(a),
            ProjPoint::Infinity => field.order() as usize,
        }
    }

    pub fn from_index(field: &ExtField, idx: usize) -> Self {
        if idx == field.order() as usize {
            ProjPoint::Infinity
        } else {
            ProjPoint::Affine(field.from_index(idx))
        }
    }

    /// Whether the point is defined over the prime field.
    pub fn is_rational(&self, field: &ExtField) -> bool {
        match self {
            ProjPoint::Affine(a) => field.is_in_prime_field(a),
            ProjPoint::Infinity => true,
        }
    }
}

/// The p^d + 1 points of P^1(F): affine points in index order, then [1:0].
pub fn enumerate_proj_line(field: &ExtField) -> Vec<ProjPoint> {
    field
        .elements()
        .map(ProjPoint::Affine)
        .chain(std::iter::once(ProjPoint::Infinity))
        .collect()
}
