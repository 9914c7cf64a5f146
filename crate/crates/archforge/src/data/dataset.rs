//! In-memory classification dataset.

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

#[derive(Debug, Clone)]
pub struct Dataset {
    /// `N x input_dim`, values already scaled to the model's input range.
    pub inputs: Matrix,
    /// Class index per row.
    pub labels: Vec<usize>,
    /// `N x class_count` one-hot targets.
    pub targets: Matrix,
    pub class_count: usize,
}

impl Dataset {
    /// Builds a dataset from raw inputs and labels; targets are one-hot.
    pub fn new(inputs: Matrix, labels: Vec<usize>, class_count: usize) -> Result<Dataset> {
        if inputs.rows() != labels.len() {
            return Err(Error::contract(format!(
                "dataset: {} rows vs {} labels",
                inputs.rows(),
                labels.len()
            )));
        }
        if class_count == 0 {
            return Err(Error::contract("dataset: class_count must be >= 1"));
        }
        let mut targets = Matrix::zeros(labels.len(), class_count);
        for (r, &label) in labels.iter().enumerate() {
            if label >= class_count {
                return Err(Error::contract(format!(
                    "dataset: label {label} out of range for {class_count} classes"
                )));
            }
            targets.set(r, label, 1.0);
        }
        Ok(Dataset {
            inputs,
            labels,
            targets,
            class_count,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.cols()
    }

    /// Rows at the given indices, in order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let inputs = self.inputs.select_rows(indices);
        let labels: Vec<usize> = indices.iter().map(|&i| self.labels[i]).collect();
        Dataset::new(inputs, labels, self.class_count).expect("subset of a valid dataset")
    }

    /// First `n` rows (clamped to the dataset size).
    pub fn take(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        let indices: Vec<usize> = (0..n).collect();
        self.subset(&indices)
    }

    /// Seeded permutation split: the first `ceil(fraction * N)` shuffled rows
    /// form the first part, the rest the second.
    pub fn split(&self, fraction: f64, rng: &mut Rng) -> Result<(Dataset, Dataset)> {
        if !(0.0 < fraction && fraction < 1.0) {
            return Err(Error::contract("split fraction must be in (0,1)"));
        }
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);
        let cut = ((fraction * n as f64).ceil() as usize).min(n);
        Ok((self.subset(&order[..cut]), self.subset(&order[cut..])))
    }
}

/// Pixel images (bytes) plus labels to a dataset with inputs scaled by 1/255.
pub fn to_dataset(pixels: &[Vec<u8>], labels: &[u8], class_count: usize) -> Result<Dataset> {
    if pixels.len() != labels.len() {
        return Err(Error::CountMismatch {
            images: pixels.len(),
            labels: labels.len(),
        });
    }
    if pixels.is_empty() {
        return Err(Error::contract("to_dataset: empty input"));
    }
    let dim = pixels[0].len();
    let mut inputs = Matrix::zeros(pixels.len(), dim);
    for (r, img) in pixels.iter().enumerate() {
        if img.len() != dim {
            return Err(Error::contract("to_dataset: ragged image rows"));
        }
        for (c, &px) in img.iter().enumerate() {
            inputs.set(r, c, px as f64 / 255.0);
        }
    }
    let labels: Vec<usize> = labels.iter().map(|&l| l as usize).collect();
    Dataset::new(inputs, labels, class_count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> Dataset {
        let inputs = Matrix::from_vec(n, 1, (0..n).map(|i| i as f64).collect());
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        Dataset::new(inputs, labels, 2).unwrap()
    }

    #[test]
    fn one_hot_targets() {
        let d = toy(4);
        assert_eq!(d.targets.row(0), &[1.0, 0.0]);
        assert_eq!(d.targets.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn label_out_of_range_rejected() {
        let inputs = Matrix::zeros(1, 1);
        assert!(Dataset::new(inputs, vec![2], 2).is_err());
    }

    #[test]
    fn split_sizes_and_partition() {
        let d = toy(10);
        let (a, b) = d.split(0.8, &mut Rng::new(3)).unwrap();
        assert_eq!(a.len(), 8);
        assert_eq!(b.len(), 2);
        let mut seen: Vec<f64> = a
            .inputs
            .as_slice()
            .iter()
            .chain(b.inputs.as_slice())
            .copied()
            .collect();
        seen.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(seen, (0..10).map(|i| i as f64).collect::<Vec<_>>());
    }

    #[test]
    fn split_rounds_up() {
        let d = toy(5);
        let (a, b) = d.split(0.8, &mut Rng::new(3)).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(b.len(), 1);
        let d = toy(3);
        let (a, _) = d.split(0.8, &mut Rng::new(3)).unwrap();
        assert_eq!(a.len(), 3); // ceil(2.4) = 3
    }

    #[test]
    fn split_is_seed_deterministic() {
        let d = toy(20);
        let (a1, _) = d.split(0.8, &mut Rng::new(7)).unwrap();
        let (a2, _) = d.split(0.8, &mut Rng::new(7)).unwrap();
        assert_eq!(a1.inputs.as_slice(), a2.inputs.as_slice());
    }

    #[test]
    fn pixel_scaling() {
        let d = to_dataset(&[vec![0, 255, 51]], &[1], 3).unwrap();
        assert_eq!(d.inputs.row(0), &[0.0, 1.0, 0.2]);
    }

    #[test]
    fn count_mismatch_reported() {
        let err = to_dataset(&[vec![0]], &[1, 2], 3).unwrap_err();
        assert!(matches!(
            err,
            crate::error::Error::CountMismatch { images: 1, labels: 2 }
        ));
    }
}
