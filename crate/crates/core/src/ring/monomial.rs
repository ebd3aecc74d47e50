use std::cmp::Ordering;

/// Power product `Π x_i^{e_i}` stored sparsely as `(variable index, exponent)`
/// pairs sorted by index; zero exponents are never stored.
///
/// `Ord` is graded reverse lexicographic with variable 0 the largest.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<(u32, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(idx: usize) -> Self {
        Monomial(vec![(idx as u32, 1)])
    }

    pub fn var_pow(idx: usize, exp: u32) -> Self {
        if exp == 0 {
            Self::one()
        } else {
            Monomial(vec![(idx as u32, exp)])
        }
    }

    /// Build from arbitrary `(index, exponent)` pairs; duplicates are summed.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut v: Vec<(u32, u32)> = pairs.into_iter().filter(|p| p.1 > 0).map(|(i, e)| (i as u32, e)).collect();
        v.sort_unstable_by_key(|p| p.0);
        let mut out: Vec<(u32, u32)> = Vec::with_capacity(v.len());
        for (i, e) in v {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += e,
                _ => out.push((i, e)),
            }
        }
        Monomial(out)
    }

    /// Build from a dense exponent vector.
    pub fn from_dense(exps: &[u32]) -> Self {
        Monomial(
            exps.iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| (i as u32, e))
                .collect(),
        )
    }

    pub fn to_dense(&self, nvars: usize) -> Vec<u32> {
        let mut out = vec![0; nvars];
        for &(i, e) in &self.0 {
            out[i as usize] = e;
        }
        out
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|p| p.1).sum()
    }

    pub fn exponent(&self, idx: usize) -> u32 {
        self.0
            .binary_search_by_key(&(idx as u32), |p| p.0)
            .map(|k| self.0[k].1)
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().map(|&(i, e)| (i as usize, e))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.iter().all(|(i, e)| other.exponent(i) >= e)
    }

    /// Split into the part over variables selected by `pick` and the rest.
    pub fn split(&self, pick: impl Fn(usize) -> bool) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) = self.0.iter().partition(|p| pick(p.0 as usize));
        (Monomial(a), Monomial(b))
    }

    /// Re-index variables through `map` (old index → new index); the map must be injective
    /// on the support.
    pub fn remap(&self, map: impl Fn(usize) -> usize) -> Monomial {
        Monomial::from_pairs(self.iter().map(|(i, e)| (map(i), e)))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        // Equal degree: find the last variable where exponents differ; the
        // smaller exponent there makes the larger monomial.
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (a.len(), b.len());
        while i > 0 || j > 0 {
            let ai = if i > 0 { Some(a[i - 1]) } else { None };
            let bj = if j > 0 { Some(b[j - 1]) } else { None };
            match (ai, bj) {
                (Some(x), Some(y)) if x.0 == y.0 => {
                    if x.1 != y.1 {
                        return y.1.cmp(&x.1);
                    }
                    i -= 1;
                    j -= 1;
                }
                (Some(x), Some(y)) => {
                    // Variable with the higher index only present on one side.
                    return if x.0 > y.0 { Ordering::Less } else { Ordering::Greater };
                }
                (Some(_), None) => return Ordering::Less,
                (None, Some(_)) => return Ordering::Greater,
                (None, None) => unreachable!(),
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_grevlex(a: &[u32], b: &[u32]) -> Ordering {
        let da: u32 = a.iter().sum();
        let db: u32 = b.iter().sum();
        if da != db {
            return da.cmp(&db);
        }
        for k in (0..a.len()).rev() {
            if a[k] != b[k] {
                return b[k].cmp(&a[k]);
            }
        }
        Ordering::Equal
    }

    #[test]
    fn grevlex_examples() {
        // x1 > x2 > x3 in degree 1; x1*x3 < x2^2 in grevlex
        let x1 = Monomial::var(0);
        let x2 = Monomial::var(1);
        let x3 = Monomial::var(2);
        assert!(x1 > x2 && x2 > x3);
        assert!(Monomial::from_pairs([(0, 1), (2, 1)]) < Monomial::var_pow(1, 2));
        assert!(Monomial::one() < x3);
    }

    proptest! {
        #[test]
        fn sparse_order_matches_dense(a in proptest::collection::vec(0u32..4, 4), b in proptest::collection::vec(0u32..4, 4)) {
            let ma = Monomial::from_dense(&a);
            let mb = Monomial::from_dense(&b);
            prop_assert_eq!(ma.cmp(&mb), dense_grevlex(&a, &b));
        }

        #[test]
        fn order_is_multiplicative(a in proptest::collection::vec(0u32..4, 3), b in proptest::collection::vec(0u32..4, 3), c in proptest::collection::vec(0u32..4, 3)) {
            let (ma, mb, mc) = (Monomial::from_dense(&a), Monomial::from_dense(&b), Monomial::from_dense(&c));
            prop_assert_eq!(ma.cmp(&mb), ma.mul(&mc).cmp(&mb.mul(&mc)));
            prop_assert!(Monomial::one() <= ma);
        }
    }
}
