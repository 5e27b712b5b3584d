use super::signal::TruthVector;

/// `FDP = #false rejections / max(#rejections, 1)`,
/// `TDP = #true rejections / max(#signals, 1)`.
pub fn fdp_tdp(rejected: &[usize], truth: &TruthVector) -> (f64, f64) {
    let true_hits = rejected.iter().filter(|&&j| truth.theta[j]).count();
    let false_hits = rejected.len() - true_hits;
    let fdp = false_hits as f64 / rejected.len().max(1) as f64;
    let tdp = true_hits as f64 / truth.n_signals().max(1) as f64;
    (fdp, tdp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let t = TruthVector::from_mu(vec![1.0, 0.0, 0.0]);
        assert_eq!(fdp_tdp(&[0, 1], &t), (0.5, 1.0));
        assert_eq!(fdp_tdp(&[], &t), (0.0, 0.0));
        let null = TruthVector::from_mu(vec![0.0; 3]);
        assert_eq!(fdp_tdp(&[2], &null), (1.0, 0.0));
    }
}
