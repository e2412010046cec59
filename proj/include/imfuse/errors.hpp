#pragma once
// Error types that callers (and the CLI exit-code mapping) need to tell apart.

#include <stdexcept>
#include <string>

namespace imfuse {

// Evaluation request outside [theta_min, theta_max], or a grid that does not
// cover a required region.
class out_of_domain_error : public std::domain_error {
public:
    explicit out_of_domain_error(const std::string& what) : std::domain_error(what) {}
};

// All-zero field: no candidate is plausible, no possibility contour exists.
class degenerate_field_error : public std::runtime_error {
public:
    explicit degenerate_field_error(const std::string& what) : std::runtime_error(what) {}
};

// Inputs live on different grids and no common grid was supplied.
class grid_mismatch_error : public std::invalid_argument {
public:
    explicit grid_mismatch_error(const std::string& what) : std::invalid_argument(what) {}
};

// Calibrator metadata does not match the rule/k that produced a fused field.
class provenance_error : public std::invalid_argument {
public:
    explicit provenance_error(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed CSV / claim syntax.
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace imfuse
