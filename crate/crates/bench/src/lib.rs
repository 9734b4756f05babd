//! Shared fixtures for the criterion benchmarks.

use wsps_core::generator::{
    generate_instance, generate_synthetic_network, CapacityClass, InstanceSpec,
};
use wsps_core::model::Instance;

/// A reproducible mid-sized benchmark instance: 7 warehouses, 30
/// non-warehouse nodes, moderate capacities.
pub fn medium_instance() -> Instance {
    let net = generate_synthetic_network(60, 12, 0).expect("network");
    let spec = InstanceSpec {
        num_warehouses: 7,
        num_factories: 8,
        num_customers: 22,
        capacity_class: CapacityClass::Moderate,
        seed: 0,
    };
    generate_instance(&net, &spec).expect("instance")
}

/// A small instance for construction and evaluation micro-benchmarks.
pub fn small_instance() -> Instance {
    let net = generate_synthetic_network(20, 5, 1).expect("network");
    let spec = InstanceSpec {
        num_warehouses: 3,
        num_factories: 3,
        num_customers: 6,
        capacity_class: CapacityClass::Spacious,
        seed: 1,
    };
    generate_instance(&net, &spec).expect("instance")
}
