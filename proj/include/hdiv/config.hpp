#pragma once

// Run configuration: a flat set of `key = value` entries, one per line with
// `#` comments, or the inline form `{key=value, key=value, ...}`.

#include "hdiv/cases.hpp"
#include "hdiv/linear_solver.hpp"
#include "hdiv/timestepping.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hdiv {

class ConfigError : public std::runtime_error
{
public:
   ConfigError(const std::string& field, int line, const std::string& message);
   const std::string& field() const { return field_; }
   int line() const { return line_; }

private:
   std::string field_;
   int line_;
};

struct RunConfig
{
   CaseParameters case_params;
   bool nu_given = false;          ///< false: the case default (1/re_tau for channels)
   int k = 2;
   std::array<int, 3> cells{8, 8, 8};
   std::optional<double> sigma;    ///< default 4 (k+1)^2
   Scheme scheme = Scheme::BackwardEuler;
   double dt = 1e-3;
   double t_end = 0.0;
   int record_every = 1;
   int snapshot_every = 0;
   int snapshot_samples = 0;       ///< per axis; 0 means N (k+1)
   int spectrum_every = 0;
   int spectrum_samples = 0;
   std::string output = "output";
   double div_tol = kDefaultDivTol;
   double linear_tol = 1e-10;
   GaugeMode gauge = GaugeMode::MeanZero;
   SolverKind solver = SolverKind::Direct;
   double solver_tol = 1e-13;
   int lu_reuse = 0;

   double effective_sigma() const { return sigma ? *sigma : default_penalty(k); }
   double effective_nu() const;
   SchemeConfig scheme_config() const;

   bool operator==(const RunConfig&) const = default;
};

/// Parses configuration text. Required: case, k, N (or cells), dt, t_end,
/// and nu for the lattice and manufactured cases.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Applies one `key=value` override on top of an existing configuration.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Every key with its resolved value, in a form parse_config accepts.
std::string config_to_text(const RunConfig& cfg);

/// Key/value pairs of config_to_text in order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

/// Throws ConfigError naming the first invalid field.
void validate_config(const RunConfig& cfg);

/// Spatial dimension of the configured case.
int config_dim(const RunConfig& cfg);

std::string format_double(double v);

} // namespace hdiv
