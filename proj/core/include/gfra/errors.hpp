#ifndef GFRA_ERRORS_HPP
#define GFRA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gfra {

/// Malformed or truncated binary/CSV artifact. Message names the byte
/// offset or record index where decoding failed.
class format_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rejection sampling exhausted its retry budget; message names the
/// constraint that could not be satisfied.
class placement_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the validity range of an empirical model.
class model_range_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Training produced a non-finite loss; message names epoch and batch.
class divergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gfra

#endif
