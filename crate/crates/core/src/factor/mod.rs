//! Discrete factors and the semiring algebra over them.

mod scalar;
mod semiring;
mod variable;

use std::collections::BTreeMap;
use std::fmt;

pub use scalar::Scalar;
pub use semiring::Semiring;
pub use variable::{Var, Variable};

pub(crate) use variable::same_variable;

use crate::error::{Error, Result};

/// Partial assignment of state indices keyed by variable name.
pub type Evidence = BTreeMap<String, usize>;

/// Whether factor entries hold values or their logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Linear,
    Log,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Linear => "linear",
            Domain::Log => "log",
        }
    }
}

/// A table over the joint states of its scope.
///
/// Entries are stored flat with the first scope variable varying slowest.
#[derive(Clone, PartialEq)]
pub struct Factor<T = f64> {
    scope: Vec<Var>,
    values: Vec<T>,
    domain: Domain,
}

pub(crate) fn strides_for(cards: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * cards[i + 1];
    }
    strides
}

fn scope_names(scope: &[Var]) -> String {
    let names: Vec<&str> = scope.iter().map(|v| v.name()).collect();
    format!("({})", names.join(", "))
}

/// Odometer over the joint states of a list of cardinalities.
pub(crate) struct Odometer {
    cards: Vec<usize>,
    state: Vec<usize>,
    done: bool,
}

impl Odometer {
    pub(crate) fn new(cards: Vec<usize>) -> Self {
        let done = cards.iter().any(|&c| c == 0);
        let state = vec![0; cards.len()];
        Odometer { cards, state, done }
    }

    /// Current state, or `None` once exhausted.
    pub(crate) fn current(&self) -> Option<&[usize]> {
        if self.done {
            None
        } else {
            Some(&self.state)
        }
    }

    /// Advance; returns the position of the digit that was incremented.
    pub(crate) fn advance(&mut self) -> Option<usize> {
        for i in (0..self.cards.len()).rev() {
            self.state[i] += 1;
            if self.state[i] < self.cards[i] {
                return Some(i);
            }
            self.state[i] = 0;
        }
        self.done = true;
        None
    }
}

impl<T: Scalar> Factor<T> {
    /// Linear-domain factor.
    pub fn new(scope: Vec<Var>, values: Vec<T>) -> Result<Self> {
        Self::with_domain(scope, values, Domain::Linear)
    }

    pub fn with_domain(scope: Vec<Var>, values: Vec<T>, domain: Domain) -> Result<Self> {
        for (i, v) in scope.iter().enumerate() {
            if scope[..i].iter().any(|w| w.name() == v.name()) {
                return Err(Error::Scope(format!("variable `{}` repeated in scope", v.name())));
            }
        }
        let expected: usize = scope.iter().map(|v| v.cardinality()).product();
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                factor: scope_names(&scope),
                found: values.len(),
                expected,
            });
        }
        if domain == Domain::Linear && values.iter().any(|&x| !(x >= T::zero())) {
            return Err(Error::InvalidModel(format!(
                "factor over {} has a negative or undefined entry",
                scope_names(&scope)
            )));
        }
        Ok(Factor { scope, values, domain })
    }

    /// Constant factor, all entries equal to `value`.
    pub fn constant(scope: Vec<Var>, value: T, domain: Domain) -> Result<Self> {
        let n = scope.iter().map(|v| v.cardinality()).product();
        Self::with_domain(scope, vec![value; n], domain)
    }

    /// All-ones linear factor.
    pub fn ones(scope: Vec<Var>) -> Result<Self> {
        Self::constant(scope, T::one(), Domain::Linear)
    }

    /// Build a factor by evaluating `f` at every joint state of `scope`.
    pub fn from_fn(scope: Vec<Var>, domain: Domain, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let mut values = Vec::new();
        let mut odo = Odometer::new(scope.iter().map(|v| v.cardinality()).collect());
        while let Some(s) = odo.current() {
            values.push(f(s));
            odo.advance();
        }
        Self::with_domain(scope, values, domain)
    }

    pub fn scope(&self) -> &[Var] {
        &self.scope
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.scope.iter().map(|v| v.cardinality()).collect()
    }

    pub fn strides(&self) -> Vec<usize> {
        strides_for(&self.cardinalities())
    }

    pub fn names(&self) -> Vec<&str> {
        self.scope.iter().map(|v| v.name()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.scope.iter().position(|v| v.name() == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    /// Flat index of a joint state given in scope order.
    pub fn index_of(&self, states: &[usize]) -> usize {
        let mut idx = 0;
        for (v, &s) in self.scope.iter().zip(states) {
            idx = idx * v.cardinality() + s;
        }
        idx
    }

    /// Joint state (scope order) of a flat index.
    pub fn states_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.scope.len()];
        for i in (0..self.scope.len()).rev() {
            let c = self.scope[i].cardinality();
            out[i] = index % c;
            index /= c;
        }
        out
    }

    pub fn get(&self, states: &[usize]) -> T {
        self.values[self.index_of(states)]
    }

    /// Entry at the restriction of a named assignment; every scope variable must be present.
    pub fn value_at(&self, assignment: &Evidence) -> Result<T> {
        let mut idx = 0;
        for v in &self.scope {
            let s = *assignment
                .get(v.name())
                .ok_or_else(|| Error::Argument(format!("assignment misses `{}`", v.name())))?;
            if s >= v.cardinality() {
                return Err(Error::Evidence(format!("state {s} out of range for `{}`", v.name())));
            }
            idx = idx * v.cardinality() + s;
        }
        Ok(self.values[idx])
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Factor {
            scope: self.scope.clone(),
            values: self.values.iter().map(|&x| f(x)).collect(),
            domain: self.domain,
        }
    }

    /// Sum of all entries.
    pub fn total(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &b| a + b)
    }

    /// Flat index of the first largest entry.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &x) in self.values.iter().enumerate() {
            if x > self.values[best] {
                best = i;
            }
        }
        best
    }

    fn check_shared(&self, other: &Self) -> Result<()> {
        for v in &other.scope {
            if let Some(p) = self.position(v.name()) {
                if !same_variable(&self.scope[p], v) {
                    return Err(Error::IncompatibleVariable(v.name().to_string()));
                }
            }
        }
        Ok(())
    }

    /// Factor product (× in the linear domain, + in the log domain).
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.combine(other, Semiring::SumProduct)
    }

    /// Combine two factors with the semiring's combine operator.
    ///
    /// The result scope lists this factor's variables, then the other's new ones.
    pub fn combine(&self, other: &Self, semiring: Semiring) -> Result<Self> {
        if self.domain != other.domain {
            return Err(Error::Argument("cannot combine factors from different domains".into()));
        }
        self.check_shared(other)?;
        let mut scope = self.scope.clone();
        for v in &other.scope {
            if self.position(v.name()).is_none() {
                scope.push(v.clone());
            }
        }
        let cards: Vec<usize> = scope.iter().map(|v| v.cardinality()).collect();
        let sa = self.strides();
        let sb = other.strides();
        // stride of each result variable inside each operand (0 if absent)
        let ma: Vec<usize> = scope.iter().map(|v| self.position(v.name()).map_or(0, |p| sa[p])).collect();
        let mb: Vec<usize> = scope.iter().map(|v| other.position(v.name()).map_or(0, |p| sb[p])).collect();
        let total: usize = cards.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut odo = Odometer::new(cards.clone());
        let (mut ia, mut ib) = (0usize, 0usize);
        while odo.current().is_some() {
            values.push(semiring.combine(self.domain, self.values[ia], other.values[ib]));
            match odo.advance() {
                Some(d) => {
                    ia += ma[d];
                    ib += mb[d];
                    for k in d + 1..cards.len() {
                        ia -= ma[k] * (cards[k] - 1);
                        ib -= mb[k] * (cards[k] - 1);
                    }
                }
                None => break,
            }
        }
        Ok(Factor { scope, values, domain: self.domain })
    }

    /// Aggregate out the named variables.
    pub fn eliminate(&self, vars: &[&str], semiring: Semiring) -> Result<Self> {
        for name in vars {
            if !self.contains(name) {
                return Err(Error::Scope(format!("`{name}` is not in scope {}", scope_names(&self.scope))));
            }
        }
        let keep: Vec<usize> = (0..self.scope.len()).filter(|&i| !vars.contains(&self.scope[i].name())).collect();
        let scope: Vec<Var> = keep.iter().map(|&i| self.scope[i].clone()).collect();
        let out_strides = strides_for(&scope.iter().map(|v| v.cardinality()).collect::<Vec<_>>());
        let mut map = vec![0usize; self.scope.len()];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = out_strides[k];
        }
        let size: usize = scope.iter().map(|v| v.cardinality()).product();
        let mut acc: Vec<Option<T>> = vec![None; size];
        let cards = self.cardinalities();
        let mut odo = Odometer::new(cards.clone());
        let mut flat = 0usize;
        let mut out = 0usize;
        while odo.current().is_some() {
            let x = self.values[flat];
            acc[out] = Some(match acc[out] {
                None => x,
                Some(a) => semiring.aggregate(self.domain, a, x).ok_or_else(|| {
                    Error::Unsupported("log-domain summation needs a floating-point scalar".into())
                })?,
            });
            flat += 1;
            match odo.advance() {
                Some(d) => {
                    out += map[d];
                    for k in d + 1..cards.len() {
                        out -= map[k] * (cards[k] - 1);
                    }
                }
                None => break,
            }
        }
        let values = acc.into_iter().map(|a| a.unwrap_or_else(T::zero)).collect();
        Ok(Factor { scope, values, domain: self.domain })
    }

    /// Aggregate out every variable except `keep`, which is returned in the given order.
    pub fn marginal(&self, keep: &[&str], semiring: Semiring) -> Result<Self> {
        let drop: Vec<&str> = self.names().into_iter().filter(|n| !keep.contains(n)).collect();
        self.eliminate(&drop, semiring)?.permute(keep)
    }

    /// Slice consistent with the evidence; evidence variables outside the scope are ignored.
    pub fn reduce(&self, evidence: &Evidence) -> Result<Self> {
        let mut fixed = vec![None; self.scope.len()];
        for (i, v) in self.scope.iter().enumerate() {
            if let Some(&s) = evidence.get(v.name()) {
                if s >= v.cardinality() {
                    return Err(Error::Evidence(format!("state {s} out of range for `{}`", v.name())));
                }
                fixed[i] = Some(s);
            }
        }
        if fixed.iter().all(Option::is_none) {
            return Ok(self.clone());
        }
        let keep: Vec<usize> = (0..self.scope.len()).filter(|&i| fixed[i].is_none()).collect();
        let scope: Vec<Var> = keep.iter().map(|&i| self.scope[i].clone()).collect();
        let strides = self.strides();
        let base: usize = fixed.iter().enumerate().map(|(i, s)| s.unwrap_or(0) * strides[i]).sum();
        let mut values = Vec::new();
        let mut odo = Odometer::new(keep.iter().map(|&i| self.scope[i].cardinality()).collect());
        while let Some(st) = odo.current() {
            let idx: usize = base + st.iter().zip(&keep).map(|(&s, &i)| s * strides[i]).sum::<usize>();
            values.push(self.values[idx]);
            odo.advance();
        }
        Ok(Factor { scope, values, domain: self.domain })
    }

    /// Reduce by state labels rather than indices.
    pub fn reduce_labels(&self, evidence: &[(&str, &str)]) -> Result<Self> {
        let mut ev = Evidence::new();
        for &(name, label) in evidence {
            let v = self
                .scope
                .iter()
                .find(|v| v.name() == name)
                .ok_or_else(|| Error::Evidence(format!("`{name}` is not in scope {}", scope_names(&self.scope))))?;
            ev.insert(name.to_string(), v.state_index(label)?);
        }
        self.reduce(&ev)
    }

    /// Zero every entry inconsistent with the evidence, keeping the scope.
    pub fn observe(&self, evidence: &Evidence) -> Result<Self> {
        let zero = match self.domain {
            Domain::Linear => T::zero(),
            Domain::Log => {
                return Err(Error::Unsupported("observe on log-domain factors".into()));
            }
        };
        let fixed: Vec<Option<usize>> = self.scope.iter().map(|v| evidence.get(v.name()).copied()).collect();
        for (v, s) in self.scope.iter().zip(&fixed) {
            if let Some(s) = s {
                if *s >= v.cardinality() {
                    return Err(Error::Evidence(format!("state {s} out of range for `{}`", v.name())));
                }
            }
        }
        let mut out = self.clone();
        for (i, x) in out.values.iter_mut().enumerate() {
            let st = self.states_of(i);
            if fixed.iter().zip(&st).any(|(f, &s)| f.is_some_and(|f| f != s)) {
                *x = zero;
            }
        }
        Ok(out)
    }

    /// Scale to unit sum; returns the original sum.
    pub fn normalize(&self) -> Result<(Self, T)> {
        if self.domain != Domain::Linear {
            return Err(Error::Argument("normalize expects a linear-domain factor".into()));
        }
        let z = self.total();
        if !(z > T::zero()) {
            return Err(Error::Degenerate(format!("factor over {} has no positive entry", scope_names(&self.scope))));
        }
        Ok((self.map(|x| x / z), z))
    }

    /// Entrywise `self / other`, broadcasting `other` over this scope; 0/0 is 0.
    pub fn divide(&self, other: &Self) -> Result<Self> {
        if self.domain != Domain::Linear || other.domain != Domain::Linear {
            return Err(Error::Argument("divide expects linear-domain factors".into()));
        }
        for v in &other.scope {
            if !self.contains(v.name()) {
                return Err(Error::Scope(format!("`{}` is not in scope {}", v.name(), scope_names(&self.scope))));
            }
        }
        self.check_shared(other)?;
        let expanded = Factor::<T>::ones(self.scope.clone())?.product(other)?;
        let mut values = Vec::with_capacity(self.len());
        for (&a, &b) in self.values.iter().zip(&expanded.values) {
            if b == T::zero() {
                if a == T::zero() {
                    values.push(T::zero());
                } else {
                    return Err(Error::DivisionByZero(scope_names(&self.scope)));
                }
            } else {
                values.push(a / b);
            }
        }
        Ok(Factor { scope: self.scope.clone(), values, domain: Domain::Linear })
    }

    /// Same table with the scope reordered.
    pub fn permute(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.scope.len() || order.iter().any(|n| !self.contains(n)) {
            return Err(Error::Scope(format!(
                "cannot reorder {} as ({})",
                scope_names(&self.scope),
                order.join(", ")
            )));
        }
        if order.iter().zip(&self.scope).all(|(n, v)| *n == v.name()) {
            return Ok(self.clone());
        }
        let scope: Vec<Var> = order.iter().map(|n| self.scope[self.position(n).unwrap()].clone()).collect();
        let strides = self.strides();
        let map: Vec<usize> = order.iter().map(|n| strides[self.position(n).unwrap()]).collect();
        let mut values = Vec::with_capacity(self.len());
        let mut odo = Odometer::new(scope.iter().map(|v| v.cardinality()).collect());
        while let Some(st) = odo.current() {
            values.push(self.values[st.iter().zip(&map).map(|(s, m)| s * m).sum::<usize>()]);
            odo.advance();
        }
        Ok(Factor { scope, values, domain: self.domain })
    }

    pub fn to_f64(&self) -> Factor<f64> {
        Factor {
            scope: self.scope.clone(),
            values: self.values.iter().map(|x| x.to_f64()).collect(),
            domain: self.domain,
        }
    }
}

impl Factor<f64> {
    /// Entrywise natural log.
    pub fn to_log(&self) -> Self {
        match self.domain {
            Domain::Log => self.clone(),
            Domain::Linear => Factor {
                scope: self.scope.clone(),
                values: self.values.iter().map(|x| x.ln()).collect(),
                domain: Domain::Log,
            },
        }
    }

    /// Entrywise exponential.
    pub fn to_linear(&self) -> Self {
        match self.domain {
            Domain::Linear => self.clone(),
            Domain::Log => Factor {
                scope: self.scope.clone(),
                values: self.values.iter().map(|x| x.exp()).collect(),
                domain: Domain::Linear,
            },
        }
    }

    /// Largest absolute entry difference after aligning scopes; infinite if scopes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let names = self.names();
        match other.permute(&names) {
            Ok(o) => self
                .values
                .iter()
                .zip(&o.values)
                .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() })
                .fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        }
    }
}

impl<T: Scalar> fmt::Debug for Factor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Factor{}[{}] {:?}", scope_names(&self.scope), self.domain.name(), self.values)
    }
}
