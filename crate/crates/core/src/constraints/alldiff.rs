use super::domain::IntDomain;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AllDifferentOutcome {
    /// `(variable, removed values)`, in the order removals happened.
    pub pruned: Vec<(usize, Vec<usize>)>,
    pub failed: bool,
}

/// Binary decomposition of alldifferent: a singleton `{v}` removes `v` from
/// every other domain, repeated to a fixpoint. Fails on an empty domain or
/// two singletons sharing a value. Weaker than matching-based filtering:
/// three variables over `{1, 2}` are left untouched.
pub fn alldifferent_filter(domains: &mut [IntDomain]) -> AllDifferentOutcome {
    let mut out = AllDifferentOutcome::default();
    if domains.iter().any(IntDomain::is_empty) {
        out.failed = true;
        return out;
    }
    let mut done = vec![false; domains.len()];
    while let Some(i) = (0..domains.len()).find(|&i| !done[i] && domains[i].value().is_some()) {
        done[i] = true;
        let v = domains[i].value().unwrap();
        for j in 0..domains.len() {
            if j == i || !domains[j].contains(v) {
                continue;
            }
            domains[j].remove(v);
            match out.pruned.iter_mut().find(|(var, _)| *var == j) {
                Some((_, removed)) => removed.push(v),
                None => out.pruned.push((j, vec![v])),
            }
            if domains[j].is_empty() {
                out.failed = true;
                return out;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doms(v: &[&[usize]]) -> Vec<IntDomain> {
        v.iter()
            .map(|d| IntDomain::from_values(d.to_vec()))
            .collect()
    }

    #[test]
    fn singleton_removes_value() {
        let mut d = doms(&[&[1], &[1, 2]]);
        let out = alldifferent_filter(&mut d);
        assert!(!out.failed);
        assert_eq!(d[1].values(), &[2]);
        assert_eq!(out.pruned, vec![(1, vec![1])]);
    }

    #[test]
    fn clashing_singletons_fail() {
        assert!(alldifferent_filter(&mut doms(&[&[1], &[1]])).failed);
        assert!(alldifferent_filter(&mut doms(&[&[], &[1]])).failed);
    }

    #[test]
    fn binary_filtering_is_weak() {
        let mut d = doms(&[&[1, 2], &[1, 2], &[1, 2]]);
        let out = alldifferent_filter(&mut d);
        assert!(!out.failed);
        assert!(out.pruned.is_empty());
        assert_eq!(d, doms(&[&[1, 2], &[1, 2], &[1, 2]]));
    }

    #[test]
    fn cascades_to_fixpoint() {
        let mut d = doms(&[&[3], &[2, 3], &[1, 2, 3]]);
        let out = alldifferent_filter(&mut d);
        assert!(!out.failed);
        assert_eq!(d, doms(&[&[3], &[2], &[1]]));
    }
}
