use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// Derivative counts per independent variable.
///
/// The length is the number of independent variables of the jet space the
/// index belongs to; the total order is the sum of the entries.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, d: usize) -> Self {
        let mut v = vec![0; dim];
        v[d] = 1;
        MultiIndex(v)
    }

    pub fn from_counts(counts: Vec<u8>) -> Self {
        MultiIndex(counts)
    }

    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().map(|&c| c as u32).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn raised(&self, d: usize) -> Self {
        let mut v = self.0.clone();
        v[d] += 1;
        MultiIndex(v)
    }

    pub fn add(&self, other: &MultiIndex) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other` when `other <= self` componentwise.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<Self> {
        if self.dim() != other.dim() {
            return None;
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    pub fn dominates(&self, other: &MultiIndex) -> bool {
        self.checked_sub(other).is_some()
    }

    /// All `β` with `β <= self` componentwise, including zero and `self`.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![Vec::with_capacity(self.dim())];
        for &c in &self.0 {
            let mut next = Vec::with_capacity(out.len() * (c as usize + 1));
            for prefix in &out {
                for k in 0..=c {
                    let mut p = prefix.clone();
                    p.push(k);
                    next.push(p);
                }
            }
            out = next;
        }
        out.into_iter().map(MultiIndex).collect()
    }

    /// Product of binomial coefficients `Π C(self_d, beta_d)`.
    pub fn binomial(&self, beta: &MultiIndex) -> u64 {
        self.0
            .iter()
            .zip(&beta.0)
            .map(|(&a, &b)| binomial(a as u64, b as u64))
            .product()
    }

    /// All multi-indices of the given dimension with total order exactly `k`.
    pub fn all_of_order(dim: usize, k: u32) -> Vec<MultiIndex> {
        fn rec(dim: usize, left: u32, prefix: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == dim {
                prefix.push(left as u8);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for c in (0..=left).rev() {
                prefix.push(c as u8);
                rec(dim, left - c, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if dim == 0 {
            if k == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(dim, k, &mut Vec::new(), &mut out);
        out
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A coordinate on the jet space: an independent variable, a jet of a field
/// component, or a free parameter.
///
/// The derived order puts jets first (by field id, then graded multi-index),
/// then independent variables, then parameters.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Symbol {
    Jet { field: u16, index: MultiIndex },
    Indep(u16),
    Param(Arc<str>),
}

impl Symbol {
    pub fn field(field: u16, dim: usize) -> Self {
        Symbol::Jet {
            field,
            index: MultiIndex::zero(dim),
        }
    }

    pub fn jet(field: u16, index: MultiIndex) -> Self {
        Symbol::Jet { field, index }
    }

    pub fn param(name: &str) -> Self {
        Symbol::Param(Arc::from(name))
    }

    pub fn jet_order(&self) -> Option<u32> {
        match self {
            Symbol::Jet { index, .. } => Some(index.order()),
            _ => None,
        }
    }

    /// Name-independent key used to derive per-symbol random samples.
    pub(crate) fn stable_key(&self) -> String {
        match self {
            Symbol::Jet { field, index } => format!("J{}:{:?}", field, index.counts()),
            Symbol::Indep(i) => format!("I{}", i),
            Symbol::Param(p) => format!("P{}", p),
        }
    }
}

/// Names for the independent variables and field components of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetSpace {
    indep: Vec<String>,
    fields: Vec<String>,
}

impl JetSpace {
    pub fn new(indep: Vec<String>, fields: Vec<String>) -> Self {
        JetSpace { indep, fields }
    }

    /// `t` and fields `x1..xn`.
    pub fn ode(n: usize) -> Self {
        JetSpace {
            indep: vec!["t".to_string()],
            fields: (1..=n).map(|i| format!("x{}", i)).collect(),
        }
    }

    pub fn indep_names(&self) -> &[String] {
        &self.indep
    }

    pub fn field_names(&self) -> &[String] {
        &self.fields
    }

    pub fn dim(&self) -> usize {
        self.indep.len()
    }

    pub fn indep_index(&self, name: &str) -> Option<usize> {
        self.indep.iter().position(|s| s == name)
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|s| s == name)
    }

    pub fn field_symbol(&self, name: &str) -> Option<Symbol> {
        self.field_index(name)
            .map(|i| Symbol::field(i as u16, self.dim()))
    }

    /// Resolve an identifier of the expression grammar.
    ///
    /// `name` alone is an independent variable, a field, or otherwise a
    /// parameter; `name_suffix` is a jet whose suffix spells out one
    /// independent-variable name per derivative.
    pub fn resolve(&self, ident: &str) -> Result<Symbol, String> {
        if let Some((base, suffix)) = ident.split_once('_') {
            let field = self
                .field_index(base)
                .ok_or_else(|| format!("unknown field `{}` in jet symbol `{}`", base, ident))?;
            let mut counts = vec![0u8; self.dim()];
            let mut rest = suffix;
            while !rest.is_empty() {
                // longest independent-variable name that prefixes the rest
                let best = self
                    .indep
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| rest.starts_with(n.as_str()))
                    .max_by_key(|(_, n)| n.len());
                match best {
                    Some((i, n)) => {
                        counts[i] += 1;
                        rest = &rest[n.len()..];
                    }
                    None => {
                        return Err(format!(
                            "cannot split derivative suffix `{}` of `{}` into independent variables",
                            suffix, ident
                        ))
                    }
                }
            }
            if suffix.is_empty() {
                return Err(format!("empty derivative suffix in `{}`", ident));
            }
            return Ok(Symbol::jet(field as u16, MultiIndex(counts)));
        }
        if let Some(i) = self.indep_index(ident) {
            return Ok(Symbol::Indep(i as u16));
        }
        if let Some(i) = self.field_index(ident) {
            return Ok(Symbol::field(i as u16, self.dim()));
        }
        Ok(Symbol::param(ident))
    }

    pub fn symbol_name(&self, s: &Symbol) -> String {
        match s {
            Symbol::Indep(i) => self
                .indep
                .get(*i as usize)
                .cloned()
                .unwrap_or_else(|| format!("indep{}", i)),
            Symbol::Param(p) => p.to_string(),
            Symbol::Jet { field, index } => {
                let mut name = self
                    .fields
                    .get(*field as usize)
                    .cloned()
                    .unwrap_or_else(|| format!("u{}", field));
                if !index.is_zero() {
                    name.push('_');
                    for (d, &c) in index.counts().iter().enumerate() {
                        let v = self
                            .indep
                            .get(d)
                            .cloned()
                            .unwrap_or_else(|| format!("indep{}", d));
                        for _ in 0..c {
                            name.push_str(&v);
                        }
                    }
                }
                name
            }
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sub_indices_cover_box() {
        let a = MultiIndex::from_counts(vec![2, 1]);
        let subs = a.sub_indices();
        assert_eq!(subs.len(), 6);
        assert!(subs.iter().all(|b| a.dominates(b)));
        assert_eq!(a.binomial(&MultiIndex::from_counts(vec![1, 1])), 2);
    }

    #[test]
    fn all_of_order_counts() {
        assert_eq!(MultiIndex::all_of_order(4, 2).len(), 10);
        assert_eq!(MultiIndex::all_of_order(1, 3).len(), 1);
        assert!(MultiIndex::all_of_order(3, 2).iter().all(|m| m.order() == 2));
    }

    #[test]
    fn resolve_jets() {
        let js = JetSpace::ode(2);
        assert_eq!(js.resolve("x1_tt").unwrap(), Symbol::jet(0, MultiIndex::from_counts(vec![2])));
        assert_eq!(js.resolve("t").unwrap(), Symbol::Indep(0));
        assert_eq!(js.resolve("a").unwrap(), Symbol::param("a"));
        assert!(js.resolve("x3_t").is_err());
        assert!(js.resolve("x1_s").is_err());
        let s = js.resolve("x2_ttt").unwrap();
        assert_eq!(js.symbol_name(&s), "x2_ttt");
    }

    #[test]
    fn resolve_multichar_indep_names() {
        let js = JetSpace::new(
            vec!["x0".into(), "x1".into()],
            vec!["F01".into()],
        );
        let s = js.resolve("F01_x0x1x1").unwrap();
        assert_eq!(s, Symbol::jet(0, MultiIndex::from_counts(vec![1, 2])));
        assert_eq!(js.symbol_name(&s), "F01_x0x1x1");
    }

    #[test]
    fn graded_order_on_multi_index() {
        let a = MultiIndex::from_counts(vec![0, 2]);
        let b = MultiIndex::from_counts(vec![1, 0]);
        assert!(a > b);
    }
}
