//! Finite-difference verification of analytic gradients.

use std::collections::BTreeMap;

use crate::error::NumericsError;
use crate::numerics::{Array, Gradients};

/// Outcome of a finite-difference sweep. The check itself never fails on a
/// mismatch; callers assert on `max_rel_err`.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub worst_param: String,
    pub worst_index: usize,
    pub worst_analytic: f64,
    pub worst_numeric: f64,
    pub entries_checked: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_err <= tol
    }
}

impl std::fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "max rel err {:.3e} at {}[{}] (analytic {:.6e}, numeric {:.6e}) over {} entries",
            self.max_rel_err,
            self.worst_param,
            self.worst_index,
            self.worst_analytic,
            self.worst_numeric,
            self.entries_checked
        )
    }
}

/// Compare `analytic` against central differences of `loss_fn` with step
/// `h`. Relative error per entry is `|a - n| / max(1, |a|, |n|)`.
///
/// `max_entries_per_param` bounds the work for large tensors by striding
/// through indices (0 checks every entry).
pub fn grad_check(
    params: &mut BTreeMap<String, Array>,
    analytic: &Gradients,
    h: f64,
    max_entries_per_param: usize,
    mut loss_fn: impl FnMut(&BTreeMap<String, Array>) -> Result<f64, NumericsError>,
) -> Result<GradCheckReport, NumericsError> {
    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        worst_param: String::new(),
        worst_index: 0,
        worst_analytic: 0.0,
        worst_numeric: 0.0,
        entries_checked: 0,
    };

    let names: Vec<String> = params.keys().cloned().collect();
    for name in names {
        let Some(agrad) = analytic.get(&name) else {
            continue;
        };
        let len = params[&name].len();
        let stride = if max_entries_per_param == 0 || len <= max_entries_per_param {
            1
        } else {
            len.div_ceil(max_entries_per_param)
        };
        let mut idx = 0;
        while idx < len {
            let orig = params.get(&name).unwrap().data()[idx];

            params.get_mut(&name).unwrap().data_mut()[idx] = orig + h;
            let plus = loss_fn(params)?;
            params.get_mut(&name).unwrap().data_mut()[idx] = orig - h;
            let minus = loss_fn(params)?;
            params.get_mut(&name).unwrap().data_mut()[idx] = orig;

            let numeric = (plus - minus) / (2.0 * h);
            let a = agrad.data()[idx];
            let rel = (a - numeric).abs() / 1.0_f64.max(a.abs()).max(numeric.abs());
            report.entries_checked += 1;
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst_param = name.clone();
                report.worst_index = idx;
                report.worst_analytic = a;
                report.worst_numeric = numeric;
            }
            idx += stride;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Tape;

    #[test]
    fn quadratic_gradient_verifies() {
        // loss = sum(x * x), analytic grad 2x
        let mut params = BTreeMap::new();
        params.insert("x".to_string(), Array::vector(vec![0.5, -1.5, 2.0]));

        let eval = |p: &BTreeMap<String, Array>| -> Result<(f64, Gradients), NumericsError> {
            let mut tape = Tape::new();
            let x = tape.param("x", &p["x"]);
            let sq = tape.mul(x, x)?;
            let loss = tape.sum(sq);
            let grads = tape.backward(loss)?;
            Ok((tape.value(loss).item(), grads))
        };

        let (_, analytic) = eval(&params).unwrap();
        let report = grad_check(&mut params, &analytic, 1e-5, 0, |p| {
            eval(p).map(|(l, _)| l)
        })
        .unwrap();
        assert_eq!(report.entries_checked, 3);
        assert!(report.passes(1e-8), "{report}");
    }

    #[test]
    fn wrong_gradient_is_flagged_not_thrown() {
        let mut params = BTreeMap::new();
        params.insert("x".to_string(), Array::vector(vec![1.0]));
        let mut bogus = Gradients::default();
        bogus.insert("x".to_string(), Array::vector(vec![100.0]));

        // true loss: x^2 with gradient 2 at x=1
        let report = grad_check(&mut params, &bogus, 1e-5, 0, |p| {
            let v = p["x"].data()[0];
            Ok(v * v)
        })
        .unwrap();
        assert!(!report.passes(1e-4));
        assert!((report.worst_numeric - 2.0).abs() < 1e-6);
        assert_eq!(report.worst_analytic, 100.0);
    }

    #[test]
    fn stride_subsamples_large_params() {
        let mut params = BTreeMap::new();
        params.insert("x".to_string(), Array::vector(vec![0.1; 100]));
        let mut analytic = Gradients::default();
        analytic.insert("x".to_string(), Array::vector(vec![0.2; 100]));
        let report = grad_check(&mut params, &analytic, 1e-5, 10, |p| {
            Ok(p["x"].data().iter().map(|v| v * v).sum())
        })
        .unwrap();
        assert!(report.entries_checked <= 10);
        assert!(report.passes(1e-8), "{report}");
    }
}
