// SPDX-License-Identifier: Apache-2.0

//! Stratified train/validation/test splits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-class fractions for (train, validation, test).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitFractions {
    /// 5% / 10% / 85%, used for the citation networks.
    pub const CITATION: SplitFractions = SplitFractions {
        train: 0.05,
        val: 0.10,
        test: 0.85,
    };
    /// 60% / 20% / 20%, used for the webpage networks.
    pub const WEBPAGE: SplitFractions = SplitFractions {
        train: 0.6,
        val: 0.2,
        test: 0.2,
    };

    fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::Split(format!("negative or non-finite fraction in {self:?}")));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Split(format!("fractions {self:?} do not sum to 1")));
        }
        if self.train <= 0.0 {
            return Err(Error::Split("train fraction must be positive".into()));
        }
        Ok(())
    }
}

/// Disjoint boolean masks over all nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMask {
    pub train: Vec<bool>,
    pub val: Vec<bool>,
    pub test: Vec<bool>,
}

impl SplitMask {
    pub fn len(&self) -> usize {
        self.train.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train.is_empty()
    }

    pub fn indices(mask: &[bool]) -> Vec<usize> {
        mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect()
    }
}

/// Shuffles the nodes of each class with a seeded generator and cuts them into
/// `floor(val·n_c)` validation nodes, `floor(test·n_c)` test nodes and the
/// remainder for training.
///
/// Fails when some class id below the largest one has no nodes at all, since
/// that class could never appear in the training set.
pub fn split_nodes(y: &[usize], fractions: SplitFractions, seed: u64) -> Result<SplitMask> {
    fractions.validate()?;
    let n = y.len();
    let classes = y.iter().max().map_or(0, |&m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &c) in y.iter().enumerate() {
        by_class[c].push(i);
    }
    if let Some(c) = by_class.iter().position(|v| v.is_empty()) {
        return Err(Error::Split(format!("class {c} has no nodes to place in the training set")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = SplitMask {
        train: vec![false; n],
        val: vec![false; n],
        test: vec![false; n],
    };
    for members in &mut by_class {
        members.shuffle(&mut rng);
        let nc = members.len() as f64;
        // A hair of slack so that 0.2 * 5 lands on 1 rather than 0.999...
        let n_val = (fractions.val * nc + 1e-9).floor() as usize;
        let n_test = (fractions.test * nc + 1e-9).floor() as usize;
        let n_train = members.len() - n_val - n_test;
        debug_assert!(n_train >= 1);
        for (k, &i) in members.iter().enumerate() {
            if k < n_train {
                mask.train[i] = true;
            } else if k < n_train + n_val {
                mask.val[i] = true;
            } else {
                mask.test[i] = true;
            }
        }
    }
    Ok(mask)
}
