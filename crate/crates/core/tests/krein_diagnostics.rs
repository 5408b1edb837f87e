use ortho_block::krein::{accumulating_measure, krein_report, spectral_mapping_defect, truncated_spectrum};
use ortho_block::measures::stieltjes;
use ortho_block::{Measure, Polynomial};

fn x2_minus_1() -> Polynomial {
    Polynomial::from_real(&[-1.0, 0.0, 1.0])
}

#[test]
fn near_fraction_grows_with_size() {
    let mu = accumulating_measure(100);
    let h = x2_minus_1();
    let fractions: Vec<f64> = [25, 50, 100, 200]
        .iter()
        .map(|&s| krein_report(&mu, &h, s, 0.1).unwrap().near_fraction)
        .collect();
    for pair in fractions.windows(2) {
        assert!(pair[1] >= pair[0] - 0.05, "{fractions:?}");
    }
}

#[test]
fn spectral_mapping_defect_shrinks() {
    let mu = accumulating_measure(100);
    let h = x2_minus_1();
    for size in [25, 50, 100, 200] {
        let defect = spectral_mapping_defect(&mu, &h, size).unwrap();
        assert!(defect.is_finite());
        println!("size {size:>3}: defect {defect:.3e}, size*defect {:.3}", size as f64 * defect);
    }
}

#[test]
fn finite_section_of_discrete_measure_recovers_support() {
    let support: Vec<(f64, f64)> = (0..7).map(|k| (-0.9 + 0.3 * k as f64, 1.0 + k as f64)).collect();
    let tri = stieltjes(&support, 7).unwrap();
    let eigenvalues = truncated_spectrum(&tri, 7).unwrap();
    for (e, (x, _)) in eigenvalues.iter().zip(&support) {
        assert!((e - x).abs() <= 1e-12);
    }
}

#[test]
fn chebyshev_control_does_not_decay() {
    let report = krein_report(&Measure::chebyshev(120), &x2_minus_1(), 100, 0.1).unwrap();
    assert!(report.decay_tail() >= 0.5 * report.decay_head());
    // the spectrum fills [-1, 1], so most eigenvalues are far from +-1
    assert!(report.near_fraction < 0.5);
}

#[test]
fn reports_ignore_scaling_of_h() {
    let mu = accumulating_measure(40);
    let a = krein_report(&mu, &x2_minus_1(), 60, 0.1).unwrap();
    let b = krein_report(&mu, &x2_minus_1().scale(num_complex::Complex64::new(3.0, 0.0)), 60, 0.1).unwrap();
    assert_eq!(a.near_fraction, b.near_fraction);
    assert_eq!(a.eigenvalues, b.eigenvalues);
}
