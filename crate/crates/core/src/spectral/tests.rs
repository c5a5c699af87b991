use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;

use super::*;
use crate::potentials::Family;
use crate::sampling::{hermitian_direction, hermitian_with_spectrum, random_unitary, rng, symmetric_with_spectrum};

type C = Complex<f64>;

fn herm(m: DMatrix<C>) -> HermitianMatrix {
    HermitianMatrix::new(m).unwrap()
}

fn real(rows: &[&[f64]]) -> RealSymmetric {
    let n = rows.len();
    HermitianMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j])).unwrap()
}

fn pauli_x() -> RealSymmetric {
    real(&[&[0.0, 1.0], &[1.0, 0.0]])
}

fn families() -> Vec<MatrixFamily> {
    vec![
        MatrixFamily::Umegaki,
        MatrixFamily::LogDet,
        MatrixFamily::Fermi,
        MatrixFamily::GammaNorm { gamma: 0.5 },
        MatrixFamily::GammaNorm { gamma: 0.3 },
        MatrixFamily::Alpha { alpha: 0.5 },
        MatrixFamily::Alpha { alpha: -0.7 },
    ]
}

fn range_for(f: MatrixFamily) -> (f64, f64) {
    match f {
        MatrixFamily::Fermi => (0.05, 0.95),
        _ => (0.1, 3.0),
    }
}

#[test]
fn eigen_examples() {
    let d = RealSymmetric::from_diagonal(&[1.0, 3.0, 2.0]).eigen().unwrap();
    assert_eq!(d.eigenvalues.as_slice(), &[3.0, 2.0, 1.0]);
    let id = RealSymmetric::identity(2).eigen().unwrap();
    assert_eq!(id.eigenvalues.as_slice(), &[1.0, 1.0]);
    let p = pauli_x().eigen().unwrap();
    assert!((p.eigenvalues[0] - 1.0).abs() < 1e-14);
    assert!((p.eigenvalues[1] + 1.0).abs() < 1e-14);
}

#[test]
fn eigen_phase_is_fixed() {
    let mut r = rng(3);
    for n in 2..6 {
        let x = herm(hermitian_with_spectrum(n, (-2.0, 2.0), &mut r));
        let dec = x.eigen().unwrap();
        for k in 0..n {
            let col = dec.vectors.column(k);
            let (idx, _) = col.iter().enumerate().fold(
                (0, -1.0),
                |acc, (i, v)| {
                    if v.norm() > acc.1 {
                        (i, v.norm())
                    } else {
                        acc
                    }
                },
            );
            assert!(col[idx].im.abs() < 1e-12 && col[idx].re > 0.0);
        }
        let w = dec.eigenvalues.as_slice().windows(2).all(|w| w[0] >= w[1]);
        assert!(w);
        // deterministic
        assert_eq!(dec, x.eigen().unwrap());
    }
}

#[test]
fn construction_symmetrizes_and_rejects() {
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0 + 1e-14, 2.0, 1.0]);
    let x = RealSymmetric::new(m).unwrap();
    assert!(x.correction() > 0.0 && x.correction() < 1e-13);
    assert_eq!(x.matrix()[(0, 1)], x.matrix()[(1, 0)]);
    let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.5, 1.0]);
    assert!(matches!(RealSymmetric::new(bad), Err(Error::Validation(_))));
    let rect = DMatrix::<f64>::zeros(2, 3);
    assert!(RealSymmetric::new(rect).is_err());
}

#[test]
fn positivity_classes() {
    let t = Tolerances::DEFAULT.spectral;
    let c = |d: &[f64]| PositivityClass::of(&DVector::from_column_slice(d), t);
    assert_eq!(c(&[2.0, 1.0]), PositivityClass::StrictlyPositive);
    assert_eq!(c(&[2.0, 0.0]), PositivityClass::PositiveSemidefinite);
    assert_eq!(c(&[2.0, -1e-13]), PositivityClass::PositiveSemidefinite);
    assert_eq!(c(&[2.0, -1e-6]), PositivityClass::Indefinite);
    assert_eq!(pauli_x().positivity().unwrap(), PositivityClass::Indefinite);
}

#[test]
fn potential_eval_examples() {
    let v = spectral_potential_eval(&PotentialSpec::neg_entropy(2), &RealSymmetric::identity(2)).unwrap();
    assert!((v.raw() + 2.0).abs() < 1e-14);
    let v = spectral_potential_eval(&PotentialSpec::burg(3), &RealSymmetric::identity(3)).unwrap();
    assert!(v.raw().abs() < 1e-14);
    let g = PotentialSpec::gamma_norm(0.5, 2).unwrap();
    let v = spectral_potential_eval(&g, &pauli_x()).unwrap();
    assert!((v.raw() - 1.0).abs() < 1e-14);
    let v = spectral_potential_eval(&PotentialSpec::burg(2), &pauli_x()).unwrap();
    assert!(v.is_infinite());
}

#[test]
fn gradient_examples() {
    let e = std::f64::consts::E;
    let g = spectral_grad(&PotentialSpec::neg_entropy(2), &RealSymmetric::from_diagonal(&[e, e * e])).unwrap();
    assert!((g.matrix() - DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]))).amax() < 1e-14);
    let mut r = rng(5);
    let x = herm(hermitian_with_spectrum(3, (-2.0, 2.0), &mut r));
    let g = spectral_grad(&PotentialSpec::gamma_norm(0.5, 3).unwrap(), &x).unwrap();
    assert!((g.matrix() - x.matrix()).map(|v| v.norm()).max() < 1e-13);
    let g = spectral_grad(&PotentialSpec::burg(2), &RealSymmetric::from_diagonal(&[2.0, 4.0])).unwrap();
    assert!((g.matrix() - DMatrix::from_diagonal(&DVector::from_vec(vec![-0.5, -0.25]))).amax() < 1e-15);
    assert!(spectral_grad(&PotentialSpec::burg(2), &pauli_x()).is_err());
}

#[test]
fn gradient_matches_directional_differences() {
    let mut r = rng(11);
    let specs = [
        PotentialSpec::neg_entropy(3),
        PotentialSpec::burg(3),
        PotentialSpec::fermi_dirac(3),
        PotentialSpec::exp_sum(3),
        PotentialSpec::alpha_power(0.4, 3).unwrap(),
    ];
    for spec in &specs {
        let range = match spec.family() {
            Family::FermiDirac => (0.2, 0.8),
            Family::ExpSum => (-1.0, 1.0),
            _ => (0.5, 2.0),
        };
        for _ in 0..5 {
            let x = herm(hermitian_with_spectrum(3, range, &mut r));
            let g = spectral_grad(spec, &x).unwrap();
            for _ in 0..4 {
                let d = hermitian_direction(3, &mut r);
                let h = 1e-5;
                let plus = herm(x.matrix() + &d * C::new(h, 0.0));
                let minus = herm(x.matrix() - &d * C::new(h, 0.0));
                let fd = (spectral_potential_eval(spec, &plus).unwrap().raw()
                    - spectral_potential_eval(spec, &minus).unwrap().raw())
                    / (2.0 * h);
                let an = re_trace_product(g.matrix(), &d);
                assert!((fd - an).abs() <= 1e-5 * an.abs().max(1.0), "{fd} vs {an}");
            }
        }
    }
}

#[test]
fn divergence_examples() {
    let half = RealSymmetric::from_diagonal(&[0.5, 0.5]);
    assert_eq!(matrix_div(MatrixFamily::Umegaki, &half, &half).unwrap().raw().abs(), 0.0);
    let v =
        matrix_div(MatrixFamily::LogDet, &RealSymmetric::from_diagonal(&[2.0]), &RealSymmetric::identity(1)).unwrap();
    assert!((v.raw() - (1.0 - 2f64.ln())).abs() < 1e-15);
    let v = matrix_div(
        MatrixFamily::Alpha { alpha: 0.5 },
        &RealSymmetric::from_diagonal(&[4.0]),
        &RealSymmetric::identity(1),
    )
    .unwrap();
    assert!((v.raw() - 1.0).abs() < 1e-14);
    let v = matrix_div(MatrixFamily::GammaNorm { gamma: 0.5 }, &pauli_x(), &RealSymmetric::identity(2)).unwrap();
    assert!((v.raw() - 2.0).abs() < 1e-14);
}

#[test]
fn divergence_domains() {
    let id = RealSymmetric::identity(2);
    let psd = RealSymmetric::from_diagonal(&[1.0, 0.0]);
    let inf = |f, a: &RealSymmetric, b: &RealSymmetric| matrix_div(f, a, b).unwrap().is_infinite();
    assert!(!inf(MatrixFamily::Umegaki, &psd, &id));
    assert!(inf(MatrixFamily::Umegaki, &id, &psd));
    assert!(inf(MatrixFamily::Umegaki, &pauli_x(), &id));
    assert!(inf(MatrixFamily::LogDet, &psd, &id));
    let inside = RealSymmetric::from_diagonal(&[0.3, 0.6]);
    assert!(!inf(MatrixFamily::Fermi, &id, &inside));
    assert!(!inf(MatrixFamily::Fermi, &psd, &inside));
    assert!(inf(MatrixFamily::Fermi, &inside, &id));
    assert!(inf(MatrixFamily::Fermi, &RealSymmetric::from_diagonal(&[1.5, 0.2]), &inside));
    assert!(!inf(MatrixFamily::GammaNorm { gamma: 0.5 }, &pauli_x(), &id));
    assert!(inf(MatrixFamily::GammaNorm { gamma: 0.5 }, &id, &psd));
    assert!(!inf(MatrixFamily::Alpha { alpha: 0.5 }, &psd, &id));
    assert!(inf(MatrixFamily::Alpha { alpha: -1.0 }, &psd, &id));
    assert!(matches!(
        matrix_div(MatrixFamily::Umegaki, &id, &RealSymmetric::identity(3)),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(matrix_div(MatrixFamily::Alpha { alpha: 1.5 }, &id, &id).is_err());
}

#[test]
fn generic_examples() {
    let a = RealSymmetric::from_diagonal(&[0.3, 1.7, 2.2]);
    let b = RealSymmetric::from_diagonal(&[1.1, 0.4, 0.9]);
    let g = matrix_div_generic(&PotentialSpec::neg_entropy(3), &a, &b).unwrap().raw();
    let c = matrix_div(MatrixFamily::Umegaki, &a, &b).unwrap().raw();
    assert!((g - c).abs() < 1e-10);

    let mut r = rng(8);
    let x = herm(hermitian_with_spectrum(3, (-2.0, 2.0), &mut r));
    let y = herm(hermitian_with_spectrum(3, (-2.0, 2.0), &mut r));
    let g = matrix_div_generic(&PotentialSpec::gamma_norm(0.5, 3).unwrap(), &x, &y).unwrap().raw();
    let diff = x.sub(&y).unwrap();
    assert!((g - 0.5 * diff.frobenius_norm().powi(2)).abs() < 1e-12);
    let p = herm(hermitian_with_spectrum(3, (0.2, 2.0), &mut r));
    assert!(matrix_div_generic(&PotentialSpec::neg_entropy(3), &p, &p).unwrap().raw().abs() < 1e-12);
    assert!(matrix_div_generic(&PotentialSpec::burg(2), &RealSymmetric::identity(2), &pauli_x()).is_err());
}

#[test]
fn closed_form_agrees_with_generic() {
    let mut r = rng(21);
    for f in families() {
        for n in 2..=5 {
            let spec = f.potential(n).unwrap();
            for _ in 0..8 {
                let a = herm(hermitian_with_spectrum(n, range_for(f), &mut r));
                let b = herm(hermitian_with_spectrum(n, range_for(f), &mut r));
                let c = matrix_div(f, &a, &b).unwrap().raw();
                let g = matrix_div_generic(&spec, &a, &b).unwrap().raw();
                assert!((c - g).abs() <= 1e-8 * (1.0 + c.abs()), "{} n={n}: {c} vs {g}", f.name());
            }
        }
    }
}

#[test]
fn real_symmetric_path_matches_complex() {
    let mut r = rng(30);
    for f in families() {
        let a = symmetric_with_spectrum(4, range_for(f), &mut r);
        let b = symmetric_with_spectrum(4, range_for(f), &mut r);
        let ar = RealSymmetric::new(a.clone()).unwrap();
        let br = RealSymmetric::new(b.clone()).unwrap();
        let ac = herm(a.map(|v| C::new(v, 0.0)));
        let bc = herm(b.map(|v| C::new(v, 0.0)));
        let vr = matrix_div(f, &ar, &br).unwrap().raw();
        let vc = matrix_div(f, &ac, &bc).unwrap().raw();
        assert!((vr - vc).abs() < 1e-11 * (1.0 + vr.abs()));
    }
}

#[test]
fn unitary_invariance() {
    let mut r = rng(40);
    for f in families() {
        let a = herm(hermitian_with_spectrum(4, range_for(f), &mut r));
        let b = herm(hermitian_with_spectrum(4, range_for(f), &mut r));
        let v = random_unitary(4, &mut r);
        let d0 = matrix_div(f, &a, &b).unwrap().raw();
        let d1 = matrix_div(f, &a.congruence(&v).unwrap(), &b.congruence(&v).unwrap()).unwrap().raw();
        assert!((d0 - d1).abs() < 1e-9 * (1.0 + d0.abs()));
    }
}

#[test]
fn logdet_congruence_identity() {
    let mut r = rng(50);
    for n in 2..=6 {
        let a = herm(hermitian_with_spectrum(n, (0.1, 3.0), &mut r));
        let b = herm(hermitian_with_spectrum(n, (0.1, 3.0), &mut r));
        let d = matrix_div(MatrixFamily::LogDet, &a, &b).unwrap().raw();
        let h = logdet_congruence_form(&a, &b).unwrap().raw();
        assert!((d - h).abs() < 1e-9 * (1.0 + d.abs()));
    }
}

#[test]
fn json_round_trip() {
    let mut r = rng(60);
    let x = herm(hermitian_with_spectrum(3, (-1.0, 1.0), &mut r));
    let s = serde_json::to_string(&x).unwrap();
    let back: HermitianMatrix = serde_json::from_str(&s).unwrap();
    assert_eq!(back, x);
    let real: RealSymmetric = serde_json::from_str(r#"{"re": [[1, 2], [2, 3]]}"#).unwrap();
    assert_eq!(real.matrix()[(0, 1)], 2.0);
    assert!(serde_json::from_str::<RealSymmetric>(r#"{"re": [[1, 2], [2, 3]], "im": [[0, 1], [-1, 0]]}"#).is_err());
    assert!(serde_json::from_str::<HermitianMatrix>(r#"{"re": [[1, 2], [3, 3]]}"#).is_err());
    assert!(serde_json::from_str::<HermitianMatrix>(r#"{"re": [[1, 2]]}"#).is_err());
    let f: MatrixFamily = serde_json::from_str(r#"{"family": "gammanorm", "gamma": 0.5}"#).unwrap();
    assert_eq!(f, MatrixFamily::GammaNorm { gamma: 0.5 });
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn information_axiom(seed in any::<u64>(), n in 2usize..5, k in 0usize..7) {
        let f = families()[k];
        let mut r = rng(seed);
        let a = herm(hermitian_with_spectrum(n, range_for(f), &mut r));
        let b = herm(hermitian_with_spectrum(n, range_for(f), &mut r));
        let d = matrix_div(f, &a, &b).unwrap().raw();
        prop_assert!(d > 1e-10);
        let z = matrix_div(f, &a, &a).unwrap().raw();
        prop_assert!(z.abs() <= 1e-10);
    }
}
