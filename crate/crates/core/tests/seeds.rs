use dispersed::hash_seed;

// frozen from an independent Python implementation of the mixer
#[test]
fn golden_seeds() {
    assert_eq!(hash_seed(0, b"alpha"), 0.07159092162010494);
    assert_eq!(hash_seed(42, b"key-17"), 0.6999654114328461);
    assert_eq!(hash_seed(7, b""), 0.13785133084740098);
}

#[test]
fn seeds_pass_kolmogorov_smirnov() {
    let n = 1_000_000;
    let mut u: Vec<f64> = (0..n).map(|i: u64| hash_seed(0x5EED, &i.to_le_bytes())).collect();
    u.sort_by(f64::total_cmp);
    let d = u
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n as f64 - x).max(x - i as f64 / n as f64))
        .fold(0.0, f64::max);
    // 1% critical value
    assert!(d < 1.63 / (n as f64).sqrt(), "D = {d}");
}

#[test]
fn salts_decorrelate() {
    let n = 100_000u64;
    let (a, b): (Vec<f64>, Vec<f64>) = (0..n).map(|i| (hash_seed(1, &i.to_le_bytes()), hash_seed(2, &i.to_le_bytes()))).unzip();
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let (ma, mb) = (mean(&a), mean(&b));
    let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n as f64;
    let corr = cov * 12.0;
    assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "corr = {corr}");
}
