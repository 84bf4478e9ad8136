use serde::{Deserialize, Serialize};

/// Domain of a Boolean decision variable.
///
/// Fixing only ever shrinks the domain. Nodes restore domains by keeping
/// their own copy, never by widening in place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoolDomain {
    Zero,
    One,
    Both,
}

impl BoolDomain {
    pub fn is_fixed(self) -> bool {
        self != BoolDomain::Both
    }

    pub fn contains(self, value: bool) -> bool {
        match self {
            BoolDomain::Both => true,
            BoolDomain::One => value,
            BoolDomain::Zero => !value,
        }
    }

    /// Largest value still in the domain, `ub(u)`.
    pub fn upper_bound(self) -> bool {
        self != BoolDomain::Zero
    }

    pub fn fixed(value: bool) -> Self {
        if value {
            BoolDomain::One
        } else {
            BoolDomain::Zero
        }
    }

    /// Restricts the domain to `value`. Returns `false` (leaving the domain
    /// untouched) when `value` is not in it.
    pub fn fix(&mut self, value: bool) -> bool {
        if !self.contains(value) {
            return false;
        }
        *self = BoolDomain::fixed(value);
        true
    }
}

/// Finite set of candidate indices, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntDomain {
    values: Vec<usize>,
}

impl IntDomain {
    /// `{0, 1, ..., size − 1}`
    pub fn full(size: usize) -> Self {
        IntDomain {
            values: (0..size).collect(),
        }
    }

    pub fn singleton(value: usize) -> Self {
        IntDomain {
            values: vec![value],
        }
    }

    pub fn from_values(mut values: Vec<usize>) -> Self {
        values.sort_unstable();
        values.dedup();
        IntDomain { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, value: usize) -> bool {
        self.values.binary_search(&value).is_ok()
    }

    /// The assigned value, when the domain is a singleton.
    pub fn value(&self) -> Option<usize> {
        match self.values.as_slice() {
            [v] => Some(*v),
            _ => None,
        }
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().copied()
    }

    /// Returns whether the value was present.
    pub fn remove(&mut self, value: usize) -> bool {
        match self.values.binary_search(&value) {
            Ok(pos) => {
                self.values.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    /// Restricts to `{value}`; returns `false` when `value` is absent.
    pub fn assign(&mut self, value: usize) -> bool {
        if !self.contains(value) {
            return false;
        }
        self.values = vec![value];
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bool_fixing_is_one_way() {
        let mut d = BoolDomain::Both;
        assert!(d.upper_bound());
        assert!(d.fix(false));
        assert_eq!(d, BoolDomain::Zero);
        assert!(!d.upper_bound());
        assert!(!d.fix(true));
        assert_eq!(d, BoolDomain::Zero);
        assert!(d.fix(false));
    }

    #[test]
    fn int_domain_ops() {
        let mut d = IntDomain::full(4);
        assert_eq!(d.len(), 4);
        assert!(d.remove(2));
        assert!(!d.remove(2));
        assert_eq!(d.values(), &[0, 1, 3]);
        assert!(!d.assign(2));
        assert!(d.assign(3));
        assert_eq!(d.value(), Some(3));
        assert_eq!(IntDomain::from_values(vec![3, 1, 3]).values(), &[1, 3]);
    }
}
