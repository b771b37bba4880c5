//! Compositions `α = (α₁, α₂, …)` indexing the diagonal blocks of the
//! extended Fock space: `α_k` counts blocks of multiplicity `k`, the weight
//! `Σ k·α_k` is the chaos order, the size `|α| = Σ α_k` the number of free
//! variables.

/// A multiplicity pattern with trailing zeros stripped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Composition(Vec<usize>);

impl Composition {
    pub fn new(mut entries: Vec<usize>) -> Self {
        while entries.last() == Some(&0) {
            entries.pop();
        }
        Composition(entries)
    }

    pub fn empty() -> Self {
        Composition(Vec::new())
    }

    /// `α_k`, 1-based; zero beyond the stored length.
    pub fn entry(&self, k: usize) -> usize {
        assert!(k >= 1);
        self.0.get(k - 1).copied().unwrap_or(0)
    }

    /// Largest `k` with `α_k > 0` (0 for the empty composition).
    pub fn max_index(&self) -> usize {
        self.0.len()
    }

    /// Chaos order `n(α) = Σ k·α_k`.
    pub fn weight(&self) -> usize {
        self.0.iter().enumerate().map(|(i, &a)| (i + 1) * a).sum()
    }

    /// Number of free variables `|α| = Σ α_k`.
    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    /// `α + 1_k`.
    pub fn up(&self, k: usize) -> Composition {
        let mut v = self.0.clone();
        if v.len() < k {
            v.resize(k, 0);
        }
        v[k - 1] += 1;
        Composition::new(v)
    }

    /// `α − 1_k`, if `α_k ≥ 1`.
    pub fn down(&self, k: usize) -> Option<Composition> {
        if self.entry(k) == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[k - 1] -= 1;
        Some(Composition::new(v))
    }

    /// 1-based position `α₁ + ⋯ + α_k` of the last variable of block `k`
    /// in the canonical variable ordering.
    pub fn block_end(&self, k: usize) -> usize {
        (1..=k).map(|j| self.entry(j)).sum()
    }

    /// Variable positions (0-based) of each block, in canonical order.
    pub fn block_positions(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut pos = 0;
        for &count in &self.0 {
            out.push((pos..pos + count).collect());
            pos += count;
        }
        out
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }
}

impl std::fmt::Display for Composition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// All compositions of weight `n`, in descending lexicographic order on
/// `(α₁, α₂, …)` — so `(n)` comes first and `(0,…,0,1)` last. The count is
/// the number of integer partitions of `n`.
pub fn compositions_of(n: usize) -> Vec<Composition> {
    let mut parts = Vec::new();
    let mut out = Vec::new();
    collect_partitions(n, n, &mut parts, &mut out);
    out.sort_by(|a, b| b.0.cmp(&a.0));
    out
}

fn collect_partitions(
    remaining: usize,
    max_part: usize,
    parts: &mut Vec<usize>,
    out: &mut Vec<Composition>,
) {
    if remaining == 0 {
        let top = parts.iter().copied().max().unwrap_or(0);
        let mut alpha = vec![0usize; top];
        for &p in parts.iter() {
            alpha[p - 1] += 1;
        }
        out.push(Composition::new(alpha));
        return;
    }
    for part in (1..=remaining.min(max_part)).rev() {
        parts.push(part);
        collect_partitions(remaining - part, part, parts, out);
        parts.pop();
    }
}
