#include "doctest.h"

#include "sheafq/properties.hpp"

using namespace sheafq;

TEST_CASE("every suite passes on several seeds") {
  for (std::uint64_t seed : {1u, 7u}) {
    for (const auto& r : run_all_properties(seed)) {
      INFO(r.property << " seed " << seed << ": " << (r.failures.empty() ? "" : r.failures.front()));
      CHECK(r.passed());
      CHECK(r.instances > 0);
      CHECK(r.max_residual <= r.threshold);
    }
  }
}

TEST_CASE("suite sizes") {
  CHECK(run_property("kernel_decomposition").instances == 100);
  CHECK(run_property("harmonic_injection").instances == 50);
  CHECK(run_property("theta_projection").instances == 10000);
  CHECK(run_property("diffusion_limit").instances == 50);
  CHECK(run_property("moment_identities").instances >= 1000);
}

TEST_CASE("report json and errors") {
  const auto r = run_property("stability_wall", 3);
  const Json j = r.to_json();
  for (const char* key : {"property", "instances", "failures", "max_residual"}) CHECK(j.contains(key));
  CHECK(j["property"] == "stability_wall");
  CHECK(j["failures"].is_array());
  CHECK_THROWS_AS(run_property("no_such_suite"), PreconditionError);
  CHECK(property_names().size() == 7);
}

TEST_CASE("same seed, same report") {
  const auto a = run_property("harmonic_injection", 11), b = run_property("harmonic_injection", 11);
  CHECK(a.max_residual == b.max_residual);
  CHECK(a.failures == b.failures);
}
