use std::cmp::Ordering;

/// Monomial order on the variables of a context, in context order
/// (variable 0 is the largest in every order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MonomialOrder {
    /// Graded reverse lexicographic.
    #[default]
    Grevlex,
    /// Pure lexicographic.
    Lex,
    /// Lex on the first `front` variables, ties broken by grevlex on the rest.
    /// An elimination order for the front block.
    Block { front: usize },
}

/// Compare dense exponent vectors. Slot 0 holds the total degree; variables
/// start at slot 1.
pub(crate) fn cmp_dense(order: MonomialOrder, a: &[u32], b: &[u32]) -> Ordering {
    match order {
        MonomialOrder::Grevlex => grevlex(a, b, 1),
        MonomialOrder::Lex => lex(a, b, 1, a.len()),
        MonomialOrder::Block { front } => {
            let split = 1 + front.min(a.len() - 1);
            match lex(a, b, 1, split) {
                Ordering::Equal => {
                    let da: u32 = a[split..].iter().sum();
                    let db: u32 = b[split..].iter().sum();
                    da.cmp(&db).then_with(|| rev_tail(a, b, split))
                }
                o => o,
            }
        }
    }
}

fn grevlex(a: &[u32], b: &[u32], from: usize) -> Ordering {
    a[0].cmp(&b[0]).then_with(|| rev_tail(a, b, from))
}

fn rev_tail(a: &[u32], b: &[u32], from: usize) -> Ordering {
    for k in (from..a.len()).rev() {
        if a[k] != b[k] {
            return b[k].cmp(&a[k]);
        }
    }
    Ordering::Equal
}

fn lex(a: &[u32], b: &[u32], from: usize, to: usize) -> Ordering {
    for k in from..to {
        if a[k] != b[k] {
            return a[k].cmp(&b[k]);
        }
    }
    Ordering::Equal
}
