//! Criterion benchmark harness for the operator library. The targets
//! live in `benches/operator.rs`: whole-lattice sweeps in sequential and
//! parallel execution, the single-site stencil, and the fixed-order
//! inner-product reductions. Run them with `cargo bench -p
//! wilson-cg-bench`; each sweep reports element throughput, so sites/s
//! can be read straight off the criterion output and multiplied by the
//! 1464 flops/site ledger for a FLOP rate.
