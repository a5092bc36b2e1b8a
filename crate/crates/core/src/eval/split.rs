//! Balanced train/test splitting and k-fold partitioning.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Index partition produced by [`split_undersample`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Benign samples left over after balancing.
    pub leftover_benign: Vec<usize>,
}

/// 80:20 split of the malicious class with benign undersampling.
///
/// Malicious indices split 80:20 at random; the training set takes an
/// equal number of benign samples without replacement, and the test set
/// takes as many benign samples as it has malicious ones from the
/// remainder, so both sides come out balanced. Deterministic per seed.
pub fn split_undersample(is_malicious: &[bool], seed: u64) -> Result<Split> {
    let malicious: Vec<usize> = (0..is_malicious.len()).filter(|&i| is_malicious[i]).collect();
    let benign: Vec<usize> = (0..is_malicious.len()).filter(|&i| !is_malicious[i]).collect();
    if malicious.is_empty() || benign.is_empty() {
        return Err(Error::Partition(format!(
            "both classes required: {} malicious, {} benign",
            malicious.len(),
            benign.len()
        )));
    }
    if benign.len() < malicious.len() {
        return Err(Error::Partition(format!(
            "benign pool too small to balance: need {} benign, have {}",
            malicious.len(),
            benign.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut malicious = malicious;
    let mut benign = benign;
    malicious.shuffle(&mut rng);
    benign.shuffle(&mut rng);

    let train_mal = malicious.len() * 80 / 100;
    let test_mal = malicious.len() - train_mal;
    if train_mal == 0 || test_mal == 0 {
        return Err(Error::Partition(format!(
            "{} malicious samples cannot be split 80:20 with both sides non-empty",
            malicious.len()
        )));
    }

    let mut train: Vec<usize> = malicious[..train_mal].to_vec();
    let mut test: Vec<usize> = malicious[train_mal..].to_vec();
    train.extend_from_slice(&benign[..train_mal]);
    test.extend_from_slice(&benign[train_mal..train_mal + test_mal]);
    let leftover_benign = benign[train_mal + test_mal..].to_vec();

    Ok(Split {
        train,
        test,
        leftover_benign,
    })
}

/// One cross-validation fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub fit: Vec<usize>,
    pub validate: Vec<usize>,
}

/// Split `n` indices into `k` disjoint near-equal validation folds; the
/// first `n % k` folds get one extra element. Deterministic per seed.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k == 0 || n < k {
        return Err(Error::Partition(format!(
            "cannot make {k} folds out of {n} samples"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);

    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut cursor = 0;
    for fold_idx in 0..k {
        let size = base + usize::from(fold_idx < extra);
        let validate: Vec<usize> = indices[cursor..cursor + size].to_vec();
        let fit: Vec<usize> = indices[..cursor]
            .iter()
            .chain(&indices[cursor + size..])
            .copied()
            .collect();
        folds.push(Fold { fit, validate });
        cursor += size;
    }
    Ok(folds)
}
