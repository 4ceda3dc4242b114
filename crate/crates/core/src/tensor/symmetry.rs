use super::{SparseTensor, TensorBuilder};
use crate::error::{Error, Result};

/// Advances `xs` to the next lexicographic permutation. Returns false once
/// the sequence is the last (descending) permutation.
fn next_permutation(xs: &mut [u32]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// Calls `f` once for every distinct permutation of `idx`.
pub(crate) fn for_each_permutation(idx: &[u32], buf: &mut Vec<u32>, mut f: impl FnMut(&[u32])) {
    buf.clear();
    buf.extend_from_slice(idx);
    buf.sort_unstable();
    loop {
        f(buf);
        if !next_permutation(buf) {
            break;
        }
    }
}

/// Adds every entry's weight at each distinct permutation of its index
/// tuple. A tuple with repeated indices contributes once per distinct
/// arrangement, not once per element of the symmetric group.
pub fn symmetrize_square(t: &SparseTensor) -> Result<SparseTensor> {
    if !t.is_square() {
        return Err(Error::NotSquare(t.dims().to_vec()));
    }
    let m = t.order();
    // Total each orbit on its sorted tuple first so that every permutation
    // receives the identical value.
    let mut orbits = TensorBuilder::with_capacity(t.dims().to_vec(), t.nnz());
    let mut buf = Vec::with_capacity(m);
    for (idx, w) in t.iter() {
        buf.clear();
        buf.extend_from_slice(idx);
        buf.sort_unstable();
        orbits.push_unchecked(&buf, w);
    }
    let orbits = orbits.build();
    let mut builder = TensorBuilder::with_capacity(t.dims().to_vec(), orbits.nnz() * factorial(m));
    for (idx, w) in orbits.iter() {
        for_each_permutation(idx, &mut buf, |p| builder.push_unchecked(p, w));
    }
    Ok(builder.build().with_symmetric(true))
}

fn factorial(m: usize) -> usize {
    (1..=m).product()
}

/// Assigns each tensor mode to a class of objects. Modes in the same class
/// index the same entities and share one block of the embedded tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeClassMap {
    mode_classes: Vec<usize>,
    names: Vec<String>,
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl ModeClassMap {
    /// `classes[r]` names the class of mode `r`; `dims` are the mode sizes.
    pub fn new<S: AsRef<str>>(classes: &[S], dims: &[usize]) -> Result<Self> {
        if classes.len() != dims.len() {
            return Err(Error::ClassMap(format!(
                "{} classes given for a {}-mode tensor",
                classes.len(),
                dims.len()
            )));
        }
        let mut names: Vec<String> = Vec::new();
        let mut sizes = Vec::new();
        let mut mode_classes = Vec::with_capacity(dims.len());
        for (mode, (class, &dim)) in classes.iter().zip(dims).enumerate() {
            let class = class.as_ref().trim();
            if class.is_empty() {
                return Err(Error::ClassMap(format!("mode {mode} has an empty class name")));
            }
            match names.iter().position(|n| n == class) {
                Some(c) => {
                    if sizes[c] != dim {
                        return Err(Error::ClassMap(format!(
                            "mode {mode} has dimension {dim} but class '{class}' has dimension {}",
                            sizes[c]
                        )));
                    }
                    mode_classes.push(c);
                }
                None => {
                    names.push(class.to_string());
                    sizes.push(dim);
                    mode_classes.push(names.len() - 1);
                }
            }
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for &s in &sizes {
            offsets.push(acc);
            acc += s;
        }
        Ok(Self {
            mode_classes,
            names,
            sizes,
            offsets,
        })
    }

    /// Parses a comma-separated class list such as `a,b,b,c`.
    pub fn parse(spec: &str, dims: &[usize]) -> Result<Self> {
        let classes: Vec<&str> = spec.split(',').collect();
        Self::new(&classes, dims)
    }

    /// Every mode in its own class.
    pub fn distinct(dims: &[usize]) -> Self {
        let names: Vec<String> = (0..dims.len()).map(|r| format!("mode{r}")).collect();
        Self::new(&names, dims).expect("distinct classes always match")
    }

    pub fn class_names(&self) -> &[String] {
        &self.names
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn mode_class(&self, mode: usize) -> usize {
        self.mode_classes[mode]
    }

    /// Dimension of the embedded square tensor.
    pub fn total_dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Global index of local index `i` in mode `mode`.
    pub fn global_index(&self, mode: usize, i: usize) -> usize {
        self.offsets[self.mode_classes[mode]] + i
    }

    /// Class id and local index of a global index.
    pub fn locate(&self, global: usize) -> (usize, usize) {
        let c = self.offsets.partition_point(|&o| o <= global) - 1;
        (c, global - self.offsets[c])
    }
}

/// Embeds a rectangular tensor into a square tensor over all classes and
/// symmetrizes it. Entry `U(i_1, ..., i_m)` lands at the offset-shifted
/// tuple and all of its distinct permutations.
pub fn embed_rectangular(u: &SparseTensor, map: &ModeClassMap) -> Result<SparseTensor> {
    if map.mode_classes.len() != u.order() {
        return Err(Error::ClassMap(format!(
            "class map covers {} modes, tensor has {}",
            map.mode_classes.len(),
            u.order()
        )));
    }
    for (mode, &d) in u.dims().iter().enumerate() {
        let size = map.sizes[map.mode_classes[mode]];
        if size != d {
            return Err(Error::ClassMap(format!(
                "mode {mode} has dimension {d}, class '{}' has size {size}",
                map.names[map.mode_classes[mode]]
            )));
        }
    }
    let n = map.total_dim();
    let m = u.order();
    let mut builder = TensorBuilder::with_capacity(vec![n; m], u.nnz());
    let mut shifted = vec![0u32; m];
    for (idx, w) in u.iter() {
        for (r, &i) in idx.iter().enumerate() {
            shifted[r] = map.global_index(r, i as usize) as u32;
        }
        builder.push_unchecked(&shifted, w);
    }
    symmetrize_square(&builder.build())
}
