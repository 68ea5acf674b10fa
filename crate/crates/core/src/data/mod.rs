//! Domains, synthetic generators, file formats, manifests and minibatching.

pub mod domain;
pub mod io;
pub mod manifest;
pub mod sampler;
pub mod synthetic;

pub use domain::{LabeledDomain, MultiDomain, UnlabeledDomain};
pub use io::{
    load_dense_csv, load_sparse_sv, read_dense_csv, read_sparse_sv, write_dense_csv,
    write_sparse_sv, RawDomain,
};
pub use manifest::{DomainManifest, Format, ManifestEntry, Role};
pub use sampler::{BatchIndices, MinibatchIter, SingleDomainIter};
pub use synthetic::{gen_gaussian_shift, gen_rotated_moons, generate, DomainParam, Family, SyntheticSpec};
