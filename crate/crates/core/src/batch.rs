//! Row-batch scheduling shared by the streaming passes.
//!
//! Work is cut into fixed blocks of [`BLOCK_ROWS`] rows aligned to absolute
//! row indices, and block results are folded strictly in row order. Every
//! reduction therefore performs the same floating-point operations whatever
//! the batch size or thread count; `batch_rows` only bounds how many rows are
//! in flight at once.

use std::ops::Range;

use rayon::prelude::*;

use crate::{Error, Result};

/// Reduction granularity. Results are bitwise identical for any `batch_rows`.
pub(crate) const BLOCK_ROWS: usize = 256;

pub(crate) fn check_batch_rows(batch_rows: usize) -> Result<()> {
    if batch_rows == 0 {
        return Err(Error::Config("batch_rows must be positive".into()));
    }
    Ok(())
}

/// Contiguous row ranges of at most `block` rows covering `0..n`.
pub(crate) fn row_ranges(n: usize, block: usize) -> Vec<Range<usize>> {
    let block = block.max(1);
    (0..n).step_by(block).map(|start| start..(start + block).min(n)).collect()
}

/// Map every block (possibly in parallel), then fold the results in row order.
///
/// About `batch_rows` rows are mapped per round, never less than one block
/// per worker thread.
pub(crate) fn map_fold<T, M, F>(n: usize, batch_rows: usize, map: M, mut fold: F) -> Result<()>
where
    T: Send,
    M: Fn(Range<usize>) -> Result<T> + Sync,
    F: FnMut(Range<usize>, T) -> Result<()>,
{
    check_batch_rows(batch_rows)?;
    let ranges = row_ranges(n, BLOCK_ROWS);
    let window = (batch_rows / BLOCK_ROWS).max(rayon::current_num_threads()).max(1);
    for round in ranges.chunks(window) {
        let mapped: Vec<Result<T>> = if round.len() == 1 {
            vec![map(round[0].clone())]
        } else {
            round.par_iter().map(|r| map(r.clone())).collect()
        };
        for (range, item) in round.iter().zip(mapped) {
            fold(range.clone(), item?)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_cover_rows_exactly_once() {
        let r = row_ranges(10, 4);
        assert_eq!(r, vec![0..4, 4..8, 8..10]);
        assert!(row_ranges(0, 4).is_empty());
        assert_eq!(row_ranges(3, 100), vec![0..3]);
    }

    #[test]
    fn fold_sees_blocks_in_order_for_any_batch_size() {
        for batch_rows in [1, 5, 300, 10_000] {
            let mut seen = Vec::new();
            map_fold(
                3 * BLOCK_ROWS + 7,
                batch_rows,
                |r| Ok(r.start),
                |_, s| {
                    seen.push(s);
                    Ok(())
                },
            )
            .unwrap();
            assert_eq!(seen, vec![0, BLOCK_ROWS, 2 * BLOCK_ROWS, 3 * BLOCK_ROWS]);
        }
    }

    #[test]
    fn zero_batch_rows_rejected() {
        assert!(map_fold(5, 0, |_| Ok(()), |_, _| Ok(())).is_err());
    }
}
