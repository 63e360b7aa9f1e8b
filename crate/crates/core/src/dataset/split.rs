use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{DatasetError, DatasetIndex};

/// Disjoint halves of the normal training set: one trains the reconstructive
/// network, the other the discriminative network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub recon_half: Vec<PathBuf>,
    pub disc_half: Vec<PathBuf>,
}

/// Even positions go to the reconstruction half, odd positions to the
/// discrimination half.
pub fn split_parity_paths(paths: &[PathBuf]) -> SplitPlan {
    let (even, odd): (Vec<_>, Vec<_>) = paths.iter().enumerate().partition(|(i, _)| i % 2 == 0);
    SplitPlan {
        recon_half: even.into_iter().map(|(_, p)| p.clone()).collect(),
        disc_half: odd.into_iter().map(|(_, p)| p.clone()).collect(),
    }
}

pub fn split_parity(index: &DatasetIndex) -> Result<SplitPlan, DatasetError> {
    if index.normal_train.is_empty() {
        return Err(DatasetError::EmptyTrainSet);
    }
    Ok(split_parity_paths(&index.normal_train))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn p(names: &[&str]) -> Vec<PathBuf> {
        names.iter().map(PathBuf::from).collect()
    }

    #[test]
    fn parity_definition() {
        let s = split_parity_paths(&p(&["a", "b", "c", "d"]));
        assert_eq!(s.recon_half, p(&["a", "c"]));
        assert_eq!(s.disc_half, p(&["b", "d"]));
        let s = split_parity_paths(&p(&["a"]));
        assert_eq!(s.recon_half, p(&["a"]));
        assert!(s.disc_half.is_empty());
    }

    #[test]
    fn empty_train_set() {
        let idx = DatasetIndex {
            class_name: "x".into(),
            normal_train: vec![],
            normal_test: vec![],
            anomalous_test: vec![],
        };
        assert!(matches!(
            split_parity(&idx),
            Err(DatasetError::EmptyTrainSet)
        ));
    }

    proptest! {
        #[test]
        fn halves_partition_the_input(n in 1usize..200) {
            let paths: Vec<PathBuf> = (0..n).map(|i| PathBuf::from(format!("{i:04}.png"))).collect();
            let s = split_parity_paths(&paths);
            let a: BTreeSet<_> = s.recon_half.iter().collect();
            let b: BTreeSet<_> = s.disc_half.iter().collect();
            prop_assert!(a.is_disjoint(&b));
            prop_assert_eq!(a.len() + b.len(), n);
            prop_assert!(s.recon_half.len().abs_diff(s.disc_half.len()) <= 1);
        }
    }
}
