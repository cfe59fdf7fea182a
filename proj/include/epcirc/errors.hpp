#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace epcirc {

// Base for all numerical failures (CLI exit code 3 unless a precondition).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Violated operation precondition (CLI exit code 4).
struct precondition_error : numeric_error {
    using numeric_error::numeric_error;
};

// Config file problems (CLI exit code 2).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_coupling_error : precondition_error {
    using precondition_error::precondition_error;
};

struct param_domain_error : precondition_error {
    using precondition_error::precondition_error;
};

struct resolution_error : precondition_error {
    using precondition_error::precondition_error;
};

struct insufficient_data_error : precondition_error {
    using precondition_error::precondition_error;
};

struct normalization_error : precondition_error {
    using precondition_error::precondition_error;
};

struct degenerate_polynomial_error : numeric_error {
    using numeric_error::numeric_error;
};

struct near_singular_error : numeric_error {
    using numeric_error::numeric_error;
};

// Driving exactly at a resonance; carries the offending eigenvalue.
struct resonance_singularity_error : numeric_error {
    std::complex<double> eigenvalue;
    resonance_singularity_error(const std::string& msg, std::complex<double> s)
        : numeric_error(msg), eigenvalue(s) {}
};

struct iteration_limit_error : numeric_error {
    double residual_det = 0.0;
    double residual_ddet = 0.0;
    iteration_limit_error(const std::string& msg, double rd, double rdd)
        : numeric_error(msg), residual_det(rd), residual_ddet(rdd) {}
};

struct seed_failure_error : numeric_error {
    using numeric_error::numeric_error;
};

struct diabolic_point_error : numeric_error {
    using numeric_error::numeric_error;
};

struct degenerate_rank_error : numeric_error {
    using numeric_error::numeric_error;
};

struct fit_degenerate_error : numeric_error {
    using numeric_error::numeric_error;
};

}  // namespace epcirc
