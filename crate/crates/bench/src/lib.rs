//! Criterion benchmarks for the lattice kernels; see `benches/`.
