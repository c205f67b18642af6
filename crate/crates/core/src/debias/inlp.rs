//! Iterative null-space projection.
//!
//! Repeatedly trains a linear gender classifier on the currently projected
//! data and removes its weight direction. The directions are kept
//! orthonormal, so the accumulated map is `P = I − QQᵀ`.

use ndarray::{Array1, Array2, Axis};

use super::{DebiasConfig, GenderLexicon};
use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::numerics::fit_logistic;

#[derive(Debug, Clone)]
pub struct InlpOutput {
    pub set: EmbeddingSet,
    /// `dim × dim` symmetric idempotent projection.
    pub projection: Array2<f64>,
    /// Removed directions, one per row.
    pub directions: Array2<f64>,
    /// Training accuracy of each classifier before its direction was removed.
    pub accuracies: Vec<f64>,
    pub missing: Vec<String>,
}

/// Gendered training data from the lexicon: masculine rows labelled `+1`,
/// feminine rows `-1`.
pub fn gender_training_data(set: &EmbeddingSet, lex: &GenderLexicon) -> (Array2<f64>, Vec<f64>, Vec<String>) {
    let (masc, fem, missing) = lex.gendered_examples(set);
    let rows: Vec<usize> = masc.iter().chain(&fem).copied().collect();
    let x = set.matrix().select(Axis(0), &rows);
    let y = masc.iter().map(|_| 1.0).chain(fem.iter().map(|_| -1.0)).collect();
    (x, y, missing)
}

pub fn inlp_debias(set: &EmbeddingSet, lex: &GenderLexicon, cfg: &DebiasConfig) -> Result<InlpOutput> {
    if cfg.m == 0 {
        return Err(Error::InvalidArgument("INLP needs m >= 1 iterations".into()));
    }
    let (x, y, missing) = gender_training_data(set, lex);
    let pos = y.iter().filter(|&&v| v > 0.0).count();
    if pos < 2 || y.len() - pos < 2 {
        return Err(Error::DegenerateLabels);
    }
    let dim = set.dim();
    let mut directions: Vec<Array1<f64>> = Vec::new();
    let mut accuracies = Vec::new();
    let mut projection = Array2::<f64>::eye(dim);

    for _ in 0..cfg.m.min(dim) {
        let projected = x.dot(&projection);
        let clf = fit_logistic(&projected, &y, &cfg.classifier)?;
        accuracies.push(clf.accuracy(&projected, &y));
        let mut w = clf.weights;
        // the weight lies in the span of projected data; enforce it exactly
        for _ in 0..2 {
            for d in &directions {
                let c = w.dot(d);
                w.scaled_add(-c, d);
            }
        }
        let norm = w.dot(&w).sqrt();
        if norm <= 1e-12 {
            break;
        }
        directions.push(w / norm);
        let q = Array2::from_shape_fn((directions.len(), dim), |(r, c)| directions[r][c]);
        projection = if directions.len() == dim {
            // Nothing is left; I − QQᵀ would only hold round-off.
            Array2::zeros((dim, dim))
        } else {
            Array2::<f64>::eye(dim) - q.t().dot(&q)
        };
    }

    let out = set.matrix().dot(&projection);
    let q = Array2::from_shape_fn((directions.len(), dim), |(r, c)| directions[r][c]);
    Ok(InlpOutput {
        set: set.with_matrix(out)?,
        projection,
        directions: q,
        accuracies,
        missing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{generate_synthetic, SyntheticSpec};
    use crate::numerics::{frobenius, OptimizerConfig};
    use ndarray::array;

    #[test]
    fn single_direction_projection() {
        // classes differ only along the first coordinate
        let set = EmbeddingSet::from_rows(
            "t",
            [
                ("he", vec![1.0, 0.2]),
                ("him", vec![2.0, -0.3]),
                ("she", vec![-1.0, 0.2]),
                ("her", vec![-2.0, -0.3]),
            ],
        )
        .unwrap();
        let lex = GenderLexicon {
            defining_pairs: vec![("he".into(), "she".into()), ("him".into(), "her".into())],
            ..Default::default()
        };
        let cfg = DebiasConfig::inlp(1);
        let out = inlp_debias(&set, &lex, &cfg).unwrap();
        let d = out.directions.row(0);
        assert!((d[0].abs() - 1.0).abs() < 1e-12, "{d}");
        let p = &out.projection;
        assert!(frobenius(&(p - &array![[0.0, 0.0], [0.0, 1.0]])) < 1e-12);
        let w = array![0.7, 0.4];
        let pw = p.dot(&w);
        assert_eq!(p.dot(&pw), pw);
    }

    #[test]
    fn projection_is_symmetric_idempotent() {
        for seed in 0..5 {
            let data = generate_synthetic(&SyntheticSpec::new(200, 10, 20, 1.0, seed)).unwrap();
            let out = inlp_debias(&data.set, &data.lexicon, &DebiasConfig::inlp(6)).unwrap();
            let p = &out.projection;
            assert!(frobenius(&(p - &p.t())) <= 1e-8);
            assert!(frobenius(&(p.dot(p) - p)) <= 1e-8);
            let rank = (p.diag().sum()).round() as usize;
            assert!(rank >= 10 - 6);
        }
    }

    #[test]
    fn guards_against_retrained_classifier() {
        for seed in 0..5 {
            let data = generate_synthetic(&SyntheticSpec::new(200, 10, 20, 1.0, seed)).unwrap();
            let (x, y, _) = gender_training_data(&data.set, &data.lexicon);
            let before = fit_logistic(&x, &y, &OptimizerConfig::logistic_default()).unwrap();
            assert!(before.accuracy(&x, &y) >= 0.95);
            let out = inlp_debias(&data.set, &data.lexicon, &DebiasConfig::inlp(10)).unwrap();
            let (xp, yp, _) = gender_training_data(&out.set, &data.lexicon);
            let after = fit_logistic(&xp, &yp, &OptimizerConfig::logistic_default()).unwrap();
            assert!(after.accuracy(&xp, &yp) <= 0.55);
        }
    }

    #[test]
    fn needs_two_examples_per_class() {
        let set = EmbeddingSet::from_rows("t", [("he", vec![1.0]), ("she", vec![-1.0])]).unwrap();
        let lex = GenderLexicon {
            defining_pairs: vec![("he".into(), "she".into())],
            ..Default::default()
        };
        assert!(matches!(
            inlp_debias(&set, &lex, &DebiasConfig::inlp(1)),
            Err(Error::DegenerateLabels)
        ));
    }
}
