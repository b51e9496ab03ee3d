use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::model::rational::{format_rational, to_f64};

/// Assignment of values to tolerance indices.
///
/// Explicit entries take precedence over the `default`, which covers every
/// index not listed. All values are strictly positive except in the vector
/// returned by [`ToleranceVector::zero`], which is only meaningful for the
/// `tau = 0` constraint route.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ToleranceVector {
    values: BTreeMap<u32, BigRational>,
    default: Option<BigRational>,
}

impl ToleranceVector {
    pub fn new(pairs: impl IntoIterator<Item = (u32, BigRational)>) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, v) in pairs {
            check_index(i)?;
            if !v.is_positive() {
                return Err(Error::Tolerance(format!("tau[{i}] = {} is not positive", format_rational(&v))));
            }
            values.insert(i, v);
        }
        Ok(ToleranceVector { values, default: None })
    }

    /// Same value for every index.
    pub fn uniform(value: BigRational) -> Result<Self> {
        if !value.is_positive() {
            return Err(Error::Tolerance(format!("tolerance {} is not positive", format_rational(&value))));
        }
        Ok(ToleranceVector { values: BTreeMap::new(), default: Some(value) })
    }

    /// All tolerances zero.
    pub fn zero() -> Self {
        ToleranceVector { values: BTreeMap::new(), default: Some(BigRational::zero()) }
    }

    pub fn with_default(mut self, value: BigRational) -> Result<Self> {
        if !value.is_positive() {
            return Err(Error::Tolerance("default tolerance must be positive".into()));
        }
        self.default = Some(value);
        Ok(self)
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty() && self.default.as_ref().is_some_and(|d| d.is_zero())
    }

    pub fn get(&self, i: u32) -> Option<&BigRational> {
        self.values.get(&i).or(self.default.as_ref())
    }

    /// Value for index `i`, or an error naming the missing index.
    pub fn require(&self, i: u32) -> Result<&BigRational> {
        self.get(i).ok_or(Error::MissingTolerance(i))
    }

    pub fn get_f64(&self, i: u32) -> Option<f64> {
        self.get(i).map(to_f64)
    }

    pub fn explicit(&self) -> &BTreeMap<u32, BigRational> {
        &self.values
    }

    pub fn default_value(&self) -> Option<&BigRational> {
        self.default.as_ref()
    }

    /// Human-readable form such as `1=0.05,2=0.01,*=0.1`.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> =
            self.values.iter().map(|(i, v)| format!("{i}={}", format_rational(v))).collect();
        if let Some(d) = &self.default {
            parts.push(format!("*={}", format_rational(d)));
        }
        parts.join(",")
    }
}

fn check_index(i: u32) -> Result<()> {
    if i == 0 {
        Err(Error::Tolerance("tolerance indices start at 1".into()))
    } else {
        Ok(())
    }
}
