#pragma once

#include <stdexcept>
#include <string>

namespace dchain {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid graph input (self-loops, duplicates, disconnected, bad columns).
class GraphError : public Error {
public:
    using Error::Error;
};

/// Assignment does not describe a valid partition.
class PartitionError : public Error {
public:
    using Error::Error;
};

/// A relabeling would leave some district with no nodes.
class EmptyDistrictError : public PartitionError {
public:
    using PartitionError::PartitionError;
};

/// Rejection sampling exceeded its retry ceiling; the chain is likely stuck.
class StuckChainError : public Error {
public:
    using Error::Error;
};

/// No balanced cut was found for a merged region within the redraw budget.
class InfeasibleMergeError : public Error {
public:
    using Error::Error;
};

/// Seed construction exhausted its restart budget.
class SeedError : public Error {
public:
    using Error::Error;
};

/// Brute-force enumeration refused an input larger than its guard.
class SizeGuardError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace dchain
