//! Molecule parsing and the five molecular feature groups.

pub mod descriptors;
pub mod featurize;
pub mod graph;
pub mod library;
pub mod pattern;
pub mod smiles;

pub use featurize::{featurize, featurize_cached, FeatureBlocks, FeatureGroup, FeatureMatrix, FeaturizeError, GroupSet};
pub use graph::{Atom, Bond, BondOrder, DistanceMatrix, Element, MoleculeGraph};
pub use pattern::{match_pattern, Pattern, PatternError};
pub use smiles::{parse_smiles, SmilesError};
