//! Bandwidth selection: golden-section search over a scalar criterion.
//!
//! The search brackets the optimum, shrinks the bracket by the golden ratio,
//! and returns the best bandwidth over *every* criterion evaluation it made —
//! including the bracket endpoints — so monotone criteria resolve to an
//! endpoint instead of a premature interior stop. In integer mode candidate
//! bandwidths are rounded to whole neighbour counts and memoized, so the same
//! count is never re-fit twice.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// One `(bandwidth, criterion)` evaluation, in the order it was computed.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchStep {
    pub bandwidth: f64,
    pub criterion: f64,
}

/// Every evaluation the search performed, in order.
#[derive(Debug, Clone, Default)]
pub struct SearchTrace {
    pub steps: Vec<SearchStep>,
}

impl SearchTrace {
    fn record(&mut self, bandwidth: f64, criterion: f64) {
        self.steps.push(SearchStep { bandwidth, criterion });
    }

    /// The evaluation with the smallest criterion; ties go to the smaller
    /// bandwidth so repeated runs cannot flip between equivalent optima.
    pub fn best(&self) -> Option<&SearchStep> {
        self.steps.iter().min_by(|a, b| {
            a.criterion
                .total_cmp(&b.criterion)
                .then(a.bandwidth.total_cmp(&b.bandwidth))
        })
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (sqrt(5) - 1) / 2

/// Minimize `f` over `[lo, hi]` by golden-section search.
///
/// Returns `(best_bandwidth, best_criterion, trace)`. With `integer = true`
/// candidates are rounded to whole numbers and each value is evaluated at
/// most once; the bracket still shrinks in continuous space so the search
/// terminates. `tol` is the absolute bracket width at which to stop.
pub fn golden_section_search(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
    integer: bool,
) -> Result<(f64, f64, SearchTrace)> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::BadBracket { lo, hi });
    }
    if !(tol > 0.0) {
        return Err(Error::BadConfig(format!("search tolerance must be positive, got {tol}")));
    }

    let mut trace = SearchTrace::default();
    // Memoize by rounded candidate in integer mode so a neighbour count is
    // never fit twice; keys are the rounded bandwidth as integer millis to
    // stay hashable/orderable without float-key pitfalls.
    let mut cache: BTreeMap<i64, f64> = BTreeMap::new();
    let round = |b: f64| if integer { b.round() } else { b };
    let mut eval = |b: f64, trace: &mut SearchTrace| -> Result<f64> {
        let b = round(b);
        if integer {
            let key = b.round() as i64;
            if let Some(&c) = cache.get(&key) {
                return Ok(c);
            }
            let c = f(b)?;
            cache.insert(key, c);
            trace.record(b, c);
            Ok(c)
        } else {
            let c = f(b)?;
            trace.record(b, c);
            Ok(c)
        }
    };

    // Endpoints first: monotone criteria must be able to win at the edges.
    eval(lo, &mut trace)?;
    eval(hi, &mut trace)?;

    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1, &mut trace)?;
    let mut f2 = eval(x2, &mut trace)?;

    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1, &mut trace)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2, &mut trace)?;
        }
        if integer && (b - a) < 1.0 {
            break;
        }
    }

    let best = trace.best().expect("search evaluated at least the endpoints");
    Ok((best.bandwidth, best.criterion, trace))
}
