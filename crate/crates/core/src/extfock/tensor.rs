//! Dense tensors over grid-point index tuples: fully symmetric tensors on
//! `Xⁿ` and block-symmetric tensors indexed by a composition, with the
//! diagonal restriction `D_α` and the block symmetrization `S_α`.

use crate::grid::TestFunction;

use super::comp::Composition;

/// Iterate all index tuples of length `d` over `0..m` in row-major order.
pub fn tuples(m: usize, d: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = m.checked_pow(d as u32).expect("tensor too large");
    (0..total).map(move |mut idx| {
        let mut t = vec![0usize; d];
        for slot in (0..d).rev() {
            t[slot] = idx % m;
            idx /= m;
        }
        t
    })
}

fn flat_index(m: usize, t: &[usize]) -> usize {
    t.iter().fold(0, |acc, &i| acc * m + i)
}

/// A dense order-`n` tensor on the grid, assumed fully symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    m: usize,
    order: usize,
    data: Vec<f64>,
}

impl SymTensor {
    pub fn zeros(m: usize, order: usize) -> Self {
        SymTensor { m, order, data: vec![0.0; m.pow(order as u32)] }
    }

    pub fn scalar(m: usize, v: f64) -> Self {
        SymTensor { m, order: 0, data: vec![v] }
    }

    /// `φ₁ ⊗̂ ⋯ ⊗̂ φₙ`: symmetrized product of rank-one factors.
    pub fn sym_product(factors: &[&TestFunction]) -> Self {
        let n = factors.len();
        assert!(n >= 1);
        let m = factors[0].grid().len();
        let mut out = SymTensor::zeros(m, n);
        let perms = permutations(n);
        let scale = 1.0 / perms.len() as f64;
        for t in tuples(m, n) {
            let mut acc = 0.0;
            for perm in &perms {
                let mut prod = 1.0;
                for (slot, &p) in perm.iter().enumerate() {
                    prod *= factors[slot].value(t[p]);
                }
                acc += prod;
            }
            out.data[flat_index(m, &t)] = acc * scale;
        }
        out
    }

    /// `φ^⊗n` (already symmetric).
    pub fn power(phi: &TestFunction, n: usize) -> Self {
        let m = phi.grid().len();
        let mut out = SymTensor::zeros(m, n);
        for t in tuples(m, n) {
            out.data[flat_index(m, &t)] = t.iter().map(|&i| phi.value(i)).product();
        }
        out
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, t: &[usize]) -> f64 {
        self.data[flat_index(self.m, t)]
    }

    pub fn set(&mut self, t: &[usize], v: f64) {
        let i = flat_index(self.m, t);
        self.data[i] = v;
    }

    /// `φ ⊗̂ f`: symmetric tensor product with a new rank-one factor.
    pub fn sym_extend(&self, phi: &TestFunction) -> SymTensor {
        let n = self.order + 1;
        let mut out = SymTensor::zeros(self.m, n);
        let scale = 1.0 / n as f64;
        for t in tuples(self.m, n) {
            let mut acc = 0.0;
            for slot in 0..n {
                let mut rest = Vec::with_capacity(n - 1);
                rest.extend_from_slice(&t[..slot]);
                rest.extend_from_slice(&t[slot + 1..]);
                acc += phi.value(t[slot]) * self.get(&rest);
            }
            out.data[flat_index(self.m, &t)] = acc * scale;
        }
        out
    }
}

/// A tensor on `X^{|α|}` symmetric within each block of `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTensor {
    comp: Composition,
    m: usize,
    data: Vec<f64>,
}

impl BlockTensor {
    pub fn zeros(m: usize, comp: Composition) -> Self {
        let d = comp.size();
        BlockTensor { comp, m, data: vec![0.0; m.pow(d as u32)] }
    }

    pub fn scalar(m: usize, v: f64) -> Self {
        BlockTensor { comp: Composition::empty(), m, data: vec![v] }
    }

    pub fn comp(&self) -> &Composition {
        &self.comp
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.comp.size()
    }

    pub fn get(&self, t: &[usize]) -> f64 {
        self.data[flat_index(self.m, t)]
    }

    pub fn set(&mut self, t: &[usize], v: f64) {
        let i = flat_index(self.m, t);
        self.data[i] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    pub fn add_assign(&mut self, other: &BlockTensor, c: f64) {
        assert_eq!(self.comp, other.comp);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `S_α`: average over all products of within-block permutations; the
    /// orthogonal projection onto the block-symmetric subspace.
    pub fn symmetrize(&self) -> BlockTensor {
        let perms = block_permutations(&self.comp);
        if perms.len() == 1 {
            return self.clone();
        }
        let mut out = BlockTensor::zeros(self.m, self.comp.clone());
        let scale = 1.0 / perms.len() as f64;
        let d = self.order();
        for t in tuples(self.m, d) {
            let mut acc = 0.0;
            let mut u = vec![0usize; d];
            for perm in &perms {
                for i in 0..d {
                    u[i] = t[perm[i]];
                }
                acc += self.get(&u);
            }
            out.set(&t, acc * scale);
        }
        out
    }
}

/// All permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut cur, &mut out);
    out
}

fn heap_permute(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, cur, out);
        if k % 2 == 0 {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
}

/// Position permutations generated by permuting variables within each block.
fn block_permutations(comp: &Composition) -> Vec<Vec<usize>> {
    let blocks = comp.block_positions();
    let d = comp.size();
    let mut result: Vec<Vec<usize>> = vec![(0..d).collect()];
    for positions in blocks {
        if positions.len() <= 1 {
            continue;
        }
        let perms = permutations(positions.len());
        let mut next = Vec::with_capacity(result.len() * perms.len());
        for base in &result {
            for perm in &perms {
                let mut full = base.clone();
                for (slot, &p) in perm.iter().enumerate() {
                    full[positions[slot]] = base[positions[p]];
                }
                next.push(full);
            }
        }
        result = next;
    }
    result
}

/// `D_α`: restrict a symmetric order-`n` tensor to the diagonal pattern of
/// `α` — the j-th variable of block `k` enters the argument list `k` times,
/// blocks in increasing multiplicity order.
pub fn d_alpha(f: &SymTensor, comp: &Composition) -> BlockTensor {
    assert_eq!(comp.weight(), f.order(), "composition weight must match tensor order");
    let mut out = BlockTensor::zeros(f.m(), comp.clone());
    let d = comp.size();
    let mut arg = Vec::with_capacity(f.order());
    for t in tuples(f.m(), d) {
        arg.clear();
        let mut pos = 0;
        for (ki, &count) in comp.entries().iter().enumerate() {
            let mult = ki + 1;
            for _ in 0..count {
                for _ in 0..mult {
                    arg.push(t[pos]);
                }
                pos += 1;
            }
        }
        out.set(&t, f.get(&arg));
    }
    out
}
