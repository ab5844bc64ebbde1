//! Indexed map over work items, parallel when the `parallel` feature is on.
//!
//! Output order always follows the item index, so reductions performed on the
//! returned vector are independent of the worker count.

/// Samples per Monte Carlo work item.
pub const CHUNK: usize = 1024;

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

/// Splits `total` samples into `CHUNK`-sized ranges.
pub fn chunks(total: usize) -> impl Iterator<Item = (usize, std::ops::Range<usize>)> + Clone {
    let n = total.div_ceil(CHUNK);
    (0..n).map(move |c| (c, c * CHUNK..((c + 1) * CHUNK).min(total)))
}

/// Pairwise tree reduction in a fixed order.
pub fn reduce_pairwise<T, F>(mut items: Vec<T>, merge: F) -> Option<T>
where
    F: Fn(T, T) -> T,
{
    if items.is_empty() {
        return None;
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(merge(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}
