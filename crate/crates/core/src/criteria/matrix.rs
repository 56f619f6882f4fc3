//! Chord-matrix diagnostics.
//!
//! For a triple `a < b < c` the matrix
//!
//! ```text
//!     | H(b,c)  H(a,c)  H(a,b) |
//! M = |   a       b       c    |
//!     |   1       1       1    |
//! ```
//!
//! is singular exactly when the three chords come from one function. Its
//! determinant equals the additivity residual, and when it is singular its
//! null space is spanned by `((b−c)/(c−a), 1, (a−b)/(c−a))`.

use super::{check_increasing, CriterionError, CriterionKind, CriterionReport, ReportBuilder, SamplePoint};
use crate::function::Bivariate;
use crate::sampling::{gen_triples, SamplingPlan};
use crate::scalar::{Scalar, ScalarError, Tolerance};

#[derive(Debug, Clone, PartialEq)]
pub struct ChordMatrix {
    pub entries: [[Scalar; 3]; 3],
    pub triple: (Scalar, Scalar, Scalar),
}

impl ChordMatrix {
    pub fn max_abs_entry(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|e| e.to_f64().abs())
            .fold(0.0, f64::max)
    }

    /// `M · v`.
    pub fn apply(&self, v: &[Scalar; 3]) -> Result<[Scalar; 3], ScalarError> {
        let row = |r: &[Scalar; 3]| -> Result<Scalar, ScalarError> {
            r[0].mul(&v[0])?.add(&r[1].mul(&v[1])?)?.add(&r[2].mul(&v[2])?)
        };
        Ok([row(&self.entries[0])?, row(&self.entries[1])?, row(&self.entries[2])?])
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn determinant(&self) -> Result<Scalar, ScalarError> {
        let m = &self.entries;
        let minor = |r: usize, s: usize| -> Result<Scalar, ScalarError> {
            m[1][r].mul(&m[2][s])?.sub(&m[1][s].mul(&m[2][r])?)
        };
        let t0 = m[0][0].mul(&minor(1, 2)?)?;
        let t1 = m[0][1].mul(&minor(0, 2)?)?;
        let t2 = m[0][2].mul(&minor(0, 1)?)?;
        t0.sub(&t1)?.add(&t2)
    }
}

/// Builds `M` for `0 ≤ a < b < c ≤ 1`.
pub fn chord_matrix<H: Bivariate + ?Sized>(
    h: &H,
    a: &Scalar,
    b: &Scalar,
    c: &Scalar,
) -> Result<ChordMatrix, CriterionError> {
    check_increasing(&[a, b, c], "0 ≤ a < b < c ≤ 1")?;
    let one = Scalar::one(a.mode());
    Ok(ChordMatrix {
        entries: [
            [h.eval(b, c)?, h.eval(a, c)?, h.eval(a, b)?],
            [a.clone(), b.clone(), c.clone()],
            [one.clone(), one.clone(), one],
        ],
        triple: (a.clone(), b.clone(), c.clone()),
    })
}

/// `((b−c)/(c−a), 1, (a−b)/(c−a))`.
pub fn canonical_null_vector(a: &Scalar, b: &Scalar, c: &Scalar) -> Result<[Scalar; 3], ScalarError> {
    let span = c.sub(a)?;
    Ok([b.sub(c)?.div(&span)?, Scalar::one(a.mode()), a.sub(b)?.div(&span)?])
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixDiagnostics {
    pub det: Scalar,
    pub rank: usize,
    /// Present when the rank is 2, scaled so the middle component is 1.
    pub nullspace_basis: Option<[Scalar; 3]>,
}

/// [`matrix_diagnostics_with`] at the default tolerance.
pub fn matrix_diagnostics(m: &ChordMatrix) -> Result<MatrixDiagnostics, ScalarError> {
    matrix_diagnostics_with(m, &Tolerance::default())
}

/// Determinant, rank and null-space basis of `M`.
///
/// Rank comes from Gauss–Jordan elimination. In exact mode a pivot is zero
/// only when it is exactly zero; in float mode pivots are chosen by
/// magnitude and treated as zero below `abs_tol + rel_tol·max|M|`.
pub fn matrix_diagnostics_with(m: &ChordMatrix, tol: &Tolerance) -> Result<MatrixDiagnostics, ScalarError> {
    let det = m.determinant()?;
    let scale = m.max_abs_entry();
    let negligible = |x: &Scalar| match x {
        Scalar::Exact(q) => q.is_zero(),
        Scalar::Float(v) => tol.passes_f64(*v, scale),
    };

    let mut rows = m.entries.clone();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..3 {
        if r == 3 {
            break;
        }
        // float: largest magnitude; exact: first nonzero
        let candidate = (r..3)
            .filter(|&i| !negligible(&rows[i][col]))
            .max_by(|&i, &j| {
                let (x, y) = (rows[i][col].to_f64().abs(), rows[j][col].to_f64().abs());
                match rows[i][col] {
                    Scalar::Float(_) => x.total_cmp(&y).then(j.cmp(&i)),
                    Scalar::Exact(_) => j.cmp(&i),
                }
            });
        let Some(p) = candidate else { continue };
        rows.swap(r, p);
        let pivot = rows[r][col].clone();
        for e in rows[r].iter_mut() {
            *e = e.div(&pivot)?;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r {
                let factor = row[col].clone();
                for (e, p) in row.iter_mut().zip(&pivot_row) {
                    *e = e.sub(&factor.mul(p)?)?;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    let rank = pivots.len();

    let nullspace_basis = if rank == 2 {
        let mode = det.mode();
        let free = (0..3).find(|c| !pivots.contains(c)).expect("rank 2 leaves one free column");
        let mut v = [Scalar::zero(mode), Scalar::zero(mode), Scalar::zero(mode)];
        v[free] = Scalar::one(mode);
        for (row, &col) in pivots.iter().enumerate() {
            v[col] = rows[row][free].neg();
        }
        if v[1].is_zero() {
            Some(v)
        } else {
            let mid = v[1].clone();
            Some([v[0].div(&mid)?, Scalar::one(mode), v[2].div(&mid)?])
        }
    } else {
        None
    };

    Ok(MatrixDiagnostics { det, rank, nullspace_basis })
}

/// Samples `det(M) = 0`, with `|det|` judged against
/// `abs_tol + rel_tol·max|M|³`. Accepted samples are cross-checked against
/// the closed-form null vector; a sample whose determinant passes but whose
/// `M·v` does not is inconclusive.
pub fn run_matrix<H: Bivariate + ?Sized>(
    h: &H,
    plan: &SamplingPlan,
    tol: &Tolerance,
) -> Result<CriterionReport, CriterionError> {
    let mut report = ReportBuilder::for_plan(CriterionKind::Matrix, plan, *tol);
    for (index, (a, b, c)) in gen_triples(plan)?.into_iter().enumerate() {
        let m = match chord_matrix(h, &a, &b, &c) {
            Ok(m) => m,
            Err(e) => {
                report.record_inconclusive(index, e);
                continue;
            }
        };
        let sample = || -> Result<(Scalar, f64, Option<f64>), ScalarError> {
            let det = m.determinant()?;
            let scale = m.max_abs_entry();
            let reference = scale.powi(3);
            let mut cert_failure = None;
            if tol.passes(&det, reference) {
                let mv = m.apply(&canonical_null_vector(&a, &b, &c)?)?;
                let worst = mv.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max);
                if !mv.iter().all(|x| tol.passes(x, scale)) {
                    cert_failure = Some(worst);
                }
            }
            Ok((det, reference, cert_failure))
        };
        match sample() {
            Ok((_, _, Some(worst))) => report.record_inconclusive(
                index,
                format!("det(M) passes but |M·v| = {worst:e} exceeds tolerance"),
            ),
            Ok((det, reference, None)) => report.record(index, SamplePoint::Triple { a, b, c }, det, reference),
            Err(e) => report.record_inconclusive(index, e),
        }
    }
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{algebraic_residual_triple, Verdict};
    use crate::expr::BivariateExpr;
    use crate::scalar::QSqrt2;
    use proptest::prelude::*;

    fn h(src: &str) -> BivariateExpr {
        BivariateExpr::parse(src).unwrap()
    }

    fn ex(s: &str) -> Scalar {
        Scalar::exact(s.parse::<QSqrt2>().unwrap())
    }

    fn half_triple() -> (Scalar, Scalar, Scalar) {
        (ex("0"), ex("1/2"), ex("1"))
    }

    #[test]
    fn layout() {
        let (a, b, c) = half_triple();
        let m = chord_matrix(&h("a + b"), &a, &b, &c).unwrap();
        assert_eq!(m.entries[0], [ex("3/2"), ex("1"), ex("1/2")]);
        assert_eq!(m.entries[1], [a.clone(), b.clone(), c.clone()]);
        assert_eq!(m.entries[2], [ex("1"), ex("1"), ex("1")]);
        assert!(chord_matrix(&h("a + b"), &b, &a, &c).is_err());
    }

    #[test]
    fn singular_for_square() {
        let (a, b, c) = half_triple();
        let d = matrix_diagnostics(&chord_matrix(&h("a + b"), &a, &b, &c).unwrap()).unwrap();
        assert!(d.det.is_zero());
        assert_eq!(d.rank, 2);
        let expected = [ex("-1/2"), ex("1"), ex("-1/2")];
        assert_eq!(d.nullspace_basis.unwrap(), expected);
        assert_eq!(canonical_null_vector(&a, &b, &c).unwrap(), expected);
    }

    #[test]
    fn regular_for_product() {
        let (a, b, c) = half_triple();
        let d = matrix_diagnostics(&chord_matrix(&h("a*b"), &a, &b, &c).unwrap()).unwrap();
        assert_eq!(d.det, ex("-1/4"));
        assert_eq!(d.rank, 3);
        assert!(d.nullspace_basis.is_none());
    }

    #[test]
    fn float_diagnostics() {
        let (a, b, c) = (Scalar::Float(0.1), Scalar::Float(0.35), Scalar::Float(0.8));
        let m = chord_matrix(&h("a^2 + a*b + b^2"), &a, &b, &c).unwrap();
        let d = matrix_diagnostics(&m).unwrap();
        assert_eq!(d.rank, 2);
        let v = d.nullspace_basis.unwrap();
        let w = canonical_null_vector(&a, &b, &c).unwrap();
        for k in 0..3 {
            assert!((v[k].to_f64() - w[k].to_f64()).abs() < 1e-12);
        }
    }

    #[test]
    fn run_matrix_verdicts() {
        let plan = SamplingPlan::float(21, 64);
        let tol = Tolerance::default();
        assert_eq!(run_matrix(&h("a^2 + a*b + b^2"), &plan, &tol).unwrap().verdict, Verdict::Accept);
        let r = run_matrix(&h("a*b"), &plan, &tol).unwrap();
        assert_eq!(r.verdict, Verdict::Reject);
        assert!(r.witness.is_some());
    }

    fn exact_point() -> impl Strategy<Value = QSqrt2> {
        (0i64..=12, 0i64..=5).prop_map(|(p, r)| {
            QSqrt2::new(
                num_rational::BigRational::new(p.into(), 24.into()),
                num_rational::BigRational::new(r.into(), 16.into()),
            )
        })
    }

    proptest! {
        // det(M) is the additivity residual, so the two routes agree exactly.
        #[test]
        fn determinant_equals_residual(x in exact_point(), y in exact_point(), z in exact_point(),
                                       c0 in -3i64..3, c1 in -3i64..3, c2 in -3i64..3) {
            let mut v = vec![x, y, z];
            v.sort();
            v.dedup();
            prop_assume!(v.len() == 3);
            let (a, b, c) = (Scalar::Exact(v[0].clone()), Scalar::Exact(v[1].clone()), Scalar::Exact(v[2].clone()));
            let hh = h(&format!("{c0}*a*b + {c1}*a^2 + {c2}*b"));
            let m = chord_matrix(&hh, &a, &b, &c).unwrap();
            let det = m.determinant().unwrap();
            prop_assert_eq!(det.clone(), algebraic_residual_triple(&hh, &a, &b, &c).unwrap());
            let d = matrix_diagnostics(&m).unwrap();
            prop_assert_eq!(d.rank, if det.is_zero() { 2 } else { 3 });
            if let Some(basis) = d.nullspace_basis {
                for comp in m.apply(&basis).unwrap() {
                    prop_assert!(comp.is_zero());
                }
            }
        }

        #[test]
        fn float_certificate(a in 0.0f64..0.3, b in 0.35f64..0.6, c in 0.65f64..1.0,
                             k in -2.0f64..2.0, q in -2.0f64..2.0) {
            // DQ of k·x³ + q·x²
            let hh = crate::function::FloatBivariate(move |a: f64, b: f64| k * (a * a + a * b + b * b) + q * (a + b));
            let m = chord_matrix(&hh, &Scalar::Float(a), &Scalar::Float(b), &Scalar::Float(c)).unwrap();
            let tol = Tolerance::default();
            let d = matrix_diagnostics_with(&m, &tol).unwrap();
            prop_assert_eq!(d.rank, 2);
            let scale = m.max_abs_entry();
            for comp in m.apply(&d.nullspace_basis.unwrap()).unwrap() {
                prop_assert!(comp.to_f64().abs() <= tol.abs_tol + tol.rel_tol * scale);
            }
        }
    }
}
