//! Strong forests over the binary tree, Milliken-type searches, the
//! one-step homogenization lemmas and the regular-tree partition.

mod forest;
mod lemmas;
mod partition;
mod search;

pub use forest::{
    count_subforests, enum_subforests, level_functions, validate_selector, validate_strong_forest, Node, Selector,
    StrongForest, Subforests, MAX_FOREST_HEIGHT, MAX_LEN,
};
pub use lemmas::{homogenize_leaf_labels, homogenize_leaf_pairs, labels_constant, pairs_determined, LeafLabels, LeafPairs};
pub use partition::{
    tree_partition, verify_partition, BoundProvider, Partition, PartitionMode, RegularTree, SubTree, TreePairs,
};
pub use search::{hat_extend, is_monochromatic, milliken_number_search, monochromatize, Limits, SubforestColoring};
pub(crate) use search::find_bad_coloring;
