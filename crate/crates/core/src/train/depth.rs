use crate::error::{Error, Result};

/// Relative BER improvement below which deeper networks stop paying off.
pub const DEFAULT_PLATEAU_THRESHOLD: f64 = 0.05;

/// First index `i` whose step to `i + 1` improves the BER by less than
/// `threshold` (relative), if any.
pub fn plateau_index(trace: &[f64], threshold: f64) -> Option<usize> {
    trace.windows(2).position(|w| {
        let (cur, next) = (w[0], w[1]);
        cur <= 0.0 || (cur - next) / cur < threshold
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DepthSearchResult {
    pub chosen: usize,
    /// `(L, validation BER)` for every depth that was trained.
    pub trace: Vec<(usize, f64)>,
    /// The training budget ran out before a plateau was found; `chosen` is
    /// the best depth seen.
    pub budget_exhausted: bool,
}

/// Greedy search over `L = l_min..=l_max`.
///
/// `ber_at(L)` trains a network of depth `L` and returns its validation BER.
/// Depths are tried in ascending order until the improvement to the next
/// depth falls below `threshold`; the last depth before the plateau wins. At
/// most `budget` depths are trained.
pub fn greedy_depth_search<F>(
    range: (usize, usize),
    budget: usize,
    threshold: f64,
    mut ber_at: F,
) -> Result<DepthSearchResult>
where
    F: FnMut(usize) -> Result<f64>,
{
    let (lo, hi) = range;
    if lo == 0 || lo > hi {
        return Err(Error::InvalidConfig(format!("depth range [{lo}, {hi}] is empty")));
    }
    if lo == hi {
        return Ok(DepthSearchResult {
            chosen: lo,
            trace: Vec::new(),
            budget_exhausted: false,
        });
    }
    let mut trace: Vec<(usize, f64)> = Vec::new();
    let mut bers: Vec<f64> = Vec::new();
    for l in lo..=hi {
        if trace.len() == budget {
            let best = trace
                .iter()
                .copied()
                .fold(None::<(usize, f64)>, |b, x| match b {
                    Some(b) if b.1 <= x.1 => Some(b),
                    _ => Some(x),
                })
                .map(|b| b.0)
                .unwrap_or(lo);
            return Ok(DepthSearchResult {
                chosen: best,
                trace,
                budget_exhausted: true,
            });
        }
        let ber = ber_at(l)?;
        trace.push((l, ber));
        bers.push(ber);
        if let Some(i) = plateau_index(&bers, threshold) {
            return Ok(DepthSearchResult {
                chosen: lo + i,
                trace,
                budget_exhausted: false,
            });
        }
    }
    Ok(DepthSearchResult {
        chosen: hi,
        trace,
        budget_exhausted: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_on_injected_trace() {
        let trace = [1e-1, 5e-2, 2e-2, 1e-2, 9.8e-3, 9.7e-3];
        assert_eq!(plateau_index(&trace, 0.05), Some(3));
        assert_eq!(plateau_index(&trace[..4], 0.05), None);
    }

    #[test]
    fn degenerate_range_skips_training() {
        let r = greedy_depth_search((7, 7), 10, 0.05, |_| panic!("no training expected")).unwrap();
        assert_eq!(r.chosen, 7);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn search_stops_at_plateau() {
        let bers = [1e-1, 5e-2, 2e-2, 1e-2, 9.8e-3];
        let r = greedy_depth_search((5, 9), 10, 0.05, |l| Ok(bers[l - 5])).unwrap();
        assert_eq!(r.chosen, 8);
        assert_eq!(r.trace.len(), 5);
    }

    #[test]
    fn budget_returns_best_so_far() {
        let bers = [1e-1, 5e-2, 2e-2, 1e-2, 5e-3];
        let r = greedy_depth_search((5, 9), 2, 0.05, |l| Ok(bers[l - 5])).unwrap();
        assert!(r.budget_exhausted);
        assert_eq!(r.chosen, 6);
    }
}
