//! Dataset ingestion: IDX (MNIST) parsing with optional gzip, normalization,
//! one-hot encoding, seeded splits, and a fast synthetic 2-D task.

mod dataset;
mod idx;
mod synthetic;

pub use dataset::{to_dataset, Dataset};
pub use idx::{
    load_idx_images, load_idx_labels, load_idx_pair, load_mnist, parse_idx_images,
    parse_idx_labels, write_idx_images, write_idx_labels, IMAGE_MAGIC, LABEL_MAGIC,
};
pub use synthetic::{
    inside_convex, label_point, polygon_area, synthetic_polygons, PENT, QUAD,
};
