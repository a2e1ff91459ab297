//! Bundled bladder-cancer remission times (months).

const BLADDER_128: &str = include_str!("../data/bladder_cancer_128.csv");
const BLADDER_125: &str = include_str!("../data/bladder_cancer_125.csv");

fn parse(csv: &str) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse().expect("bundled data is numeric"))
        .collect()
}

/// The standard 128 remission times, in listing order.
pub fn bladder_cancer_128() -> Vec<f64> {
    parse(BLADDER_128)
}

/// The 125-row subset behind the worked example, in file order; consecutive
/// runs of 25 form the phase-I subgroups.
pub fn bladder_cancer_125() -> Vec<f64> {
    parse(BLADDER_125)
}

/// Looks up a bundled data set by name.
pub fn by_name(name: &str) -> Option<Vec<f64>> {
    match name {
        "bladder" | "bladder125" => Some(bladder_cancer_125()),
        "bladder128" => Some(bladder_cancer_128()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_ranges() {
        let a = bladder_cancer_128();
        let b = bladder_cancer_125();
        assert_eq!((a.len(), b.len()), (128, 125));
        assert_eq!(b.iter().cloned().fold(f64::INFINITY, f64::min), 0.2);
        assert_eq!(a.iter().cloned().fold(0.0, f64::max), 79.05);
        assert!(by_name("nope").is_none());
    }
}
