#pragma once

#include "sheafq/io.hpp"
#include "sheafq/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sheafq {

/// Outcome of one randomized property suite.
struct PropertyReport {
  std::string property;
  Index instances = 0;
  std::vector<std::string> failures;  ///< "instance k: what went wrong"
  double max_residual = 0.0;          ///< worst value of the suite's checked quantity
  double threshold = 0.0;             ///< tolerance the residual is compared against
  double seconds = 0.0;

  bool passed() const { return failures.empty(); }
  Json to_json() const;
};

/// kernel_decomposition, harmonic_injection, trivial_line_collapse,
/// moment_identities, stability_wall, theta_projection, diffusion_limit.
const std::vector<std::string>& property_names();

/// Throws PreconditionError for an unknown name.
PropertyReport run_property(const std::string& name, std::uint64_t seed = 0);
std::vector<PropertyReport> run_all_properties(std::uint64_t seed = 0);

}  // namespace sheafq
