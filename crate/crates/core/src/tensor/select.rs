use super::{SparseTensor, TensorBuilder};

/// Relabeling produced by removing indices from a square tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexMap {
    pub old_to_new: Vec<Option<usize>>,
    pub new_to_old: Vec<usize>,
}

impl IndexMap {
    fn from_kept(n: usize, kept: &[usize]) -> Self {
        let mut old_to_new = vec![None; n];
        for (new, &old) in kept.iter().enumerate() {
            old_to_new[old] = Some(new);
        }
        Self {
            old_to_new,
            new_to_old: kept.to_vec(),
        }
    }
}

fn relabel(t: &SparseTensor, map: &IndexMap) -> SparseTensor {
    let m = t.order();
    let n = map.new_to_old.len();
    let mut builder = TensorBuilder::new(vec![n; m]);
    let mut buf = vec![0u32; m];
    'entries: for (idx, w) in t.iter() {
        for (slot, &i) in buf.iter_mut().zip(idx) {
            match map.old_to_new[i as usize] {
                Some(j) => *slot = j as u32,
                None => continue 'entries,
            }
        }
        builder.push_unchecked(&buf, w);
    }
    // Relabeling is monotone, so storage order is preserved.
    builder.build().with_symmetric(t.is_symmetric())
}

/// Drops indices that appear in no entry and relabels the rest densely.
///
/// Panics if `t` is not square.
pub fn remove_empty_indices(t: &SparseTensor) -> (SparseTensor, IndexMap) {
    let n = t.dim().expect("remove_empty_indices needs a square tensor");
    let mut used = vec![false; n];
    for (idx, _) in t.iter() {
        for &i in idx {
            used[i as usize] = true;
        }
    }
    let kept: Vec<usize> = (0..n).filter(|&i| used[i]).collect();
    let map = IndexMap::from_kept(n, &kept);
    (relabel(t, &map), map)
}

/// Entries whose indices all lie in `set`, relabeled by the sorted order
/// of `set`. Out-of-range members of `set` are ignored.
///
/// Panics if `t` is not square.
pub fn subtensor(t: &SparseTensor, set: &[usize]) -> SparseTensor {
    let n = t.dim().expect("subtensor needs a square tensor");
    let mut kept: Vec<usize> = set.iter().copied().filter(|&i| i < n).collect();
    kept.sort_unstable();
    kept.dedup();
    relabel(t, &IndexMap::from_kept(n, &kept))
}
