#include "doctest.h"

#include "sheafq/experiments.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

using namespace sheafq;
namespace fs = std::filesystem;

namespace {

fs::path scratch_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sheafq_test_experiments";
  fs::create_directories(dir);
  return dir / name;
}

RunConfig quick_config(Index epochs = 60) {
  RunConfig rc;
  rc.train.max_epochs = epochs;
  rc.train.patience = 30;
  return rc;
}

const DatasetBundle& bundle() {
  static const DatasetBundle b = generate_two_block(30, 0.1, 0.3, 0, {.num_splits = 3}).bundle;
  return b;
}

std::vector<ExperimentSpec> six_specs() {
  std::vector<ExperimentSpec> specs;
  for (const char* arch : {"square-3x3", "rect-3to2"})
    for (auto reg : {Regularizer::none, Regularizer::cent, Regularizer::theta})
      specs.push_back(ExperimentSpec::preset(arch, reg));
  return specs;
}

std::string emitted(const GridResult& r, OutputFormat f) {
  std::ostringstream os;
  emit_results(r, f, os);
  return os.str();
}

}  // namespace

TEST_CASE("presets and parsing") {
  const auto sq = ExperimentSpec::preset("square-3x3");
  CHECK(sq.d_v == 3);
  CHECK(sq.d_e == 3);
  const auto rect = ExperimentSpec::preset("rect-3to2", Regularizer::theta);
  CHECK(rect.d_e == 2);
  CHECK(rect.label() == "rect-3to2/theta");
  const auto id = ExperimentSpec::preset("identity");
  CHECK(id.identity_frozen);
  CHECK_THROWS_AS(ExperimentSpec::preset("hexagonal"), StructuralError);
  CHECK(parse_regularizer("cent") == Regularizer::cent);
  CHECK_THROWS_AS(parse_regularizer("l2"), StructuralError);
  CHECK(parse_format("csv") == OutputFormat::csv);
  CHECK_THROWS_AS(parse_format("xml"), StructuralError);
  auto broken = sq;
  broken.layers = -1;
  CHECK_THROWS(broken.validate());
  broken = sq;
  broken.seeds.clear();
  CHECK_THROWS(broken.validate());
}

TEST_CASE("parameter counts and the matched control") {
  const auto& data = bundle();
  for (const auto& spec : six_specs()) {
    Rng rng(0);
    CHECK(spec.parameter_count(data) == spec.make_model(data, rng).num_parameters());
  }
  // raw_theta only counts when the theta penalty is on.
  const auto rect = ExperimentSpec::preset("rect-3to2", Regularizer::theta);
  const auto control = parameter_matched_control(rect, data);
  CHECK(control.d_v == control.d_e);
  const Index target = rect.parameter_count(data);
  const Index got = control.parameter_count(data);
  for (Index h = 1; h <= 64; ++h) {
    auto other = control;
    other.hidden = h;
    CHECK(std::abs(other.parameter_count(data) - target) >= std::abs(got - target));
  }
  CHECK(control.label().find("matched") != std::string::npos);
}

TEST_CASE("mean, std and formatting") {
  const auto [m, s] = mean_std({0.7, 0.9, std::nan("")});
  CHECK(m == doctest::Approx(0.8));
  CHECK(s == doctest::Approx(0.1));
  CHECK(format_mean_std(0.8, 0.0501) == "80.00 ± 5.01");
  const auto [nm, ns] = mean_std({std::nan("")});
  CHECK(std::isnan(nm));
  CHECK(std::isnan(ns));
}

TEST_CASE("six-spec grid") {
  RunConfig rc = quick_config();
  rc.max_splits = 1;
  const auto result = run_grid(six_specs(), bundle(), rc);
  REQUIRE(result.table.size() == 6);
  CHECK(result.records.size() == 6);
  for (const auto& r : result.records) {
    CHECK(r.test_acc >= 0.0);
    CHECK(r.test_acc <= 1.0);
    CHECK(r.halt_reason != "nonfinite");
  }
  CHECK(result.table[4].spec == "rect-3to2/cent");
  CHECK(result.config.contains("train"));

  SUBCASE("reruns and thread counts give identical bytes") {
    RunConfig threaded = rc;
    threaded.threads = 3;
    const auto again = run_grid(six_specs(), bundle(), threaded);
    CHECK(emitted(again, OutputFormat::json) == emitted(result, OutputFormat::json));
    CHECK(emitted(again, OutputFormat::csv) == emitted(result, OutputFormat::csv));
  }
  SUBCASE("spec order does not change a cell") {
    auto reversed = six_specs();
    std::reverse(reversed.begin(), reversed.end());
    const auto other = run_grid(reversed, bundle(), rc);
    CHECK(record_to_json(other.records[5]) == record_to_json(result.records[0]));
  }
  SUBCASE("csv and json emission parse back to the same records") {
    for (auto [fmt, ext] : {std::pair{OutputFormat::json, ".json"}, std::pair{OutputFormat::csv, ".csv"}}) {
      const fs::path file = scratch_file(std::string("grid") + ext);
      emit_results(result, fmt, file);
      const auto back = parse_results(file);
      REQUIRE(back.size() == result.records.size());
      for (std::size_t k = 0; k < back.size(); ++k) CHECK(record_to_json(back[k]) == record_to_json(result.records[k]));
      GridResult again;
      again.records = back;
      again.config = result.config;
      again.table = result.table;
      CHECK(emitted(again, fmt) == emitted(result, fmt));
    }
  }
  SUBCASE("csv schema") {
    std::istringstream in(emitted(result, OutputFormat::csv));
    std::string header, line;
    std::getline(in, header);
    CHECK(header.rfind("spec,architecture,regularizer,split,seed,", 0) == 0);
    Index rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 6);
  }
  SUBCASE("parameter-matched control adds rows") {
    RunConfig with = rc;
    with.parameter_matched_control = true;
    const auto r = run_grid({ExperimentSpec::preset("rect-3to2", Regularizer::theta)}, bundle(), with);
    CHECK(r.table.size() == 2);
  }
}

TEST_CASE("rect ThetaMM beats the frozen identity baseline") {
  const auto result = run_grid({ExperimentSpec::preset("rect-3to2", Regularizer::theta), ExperimentSpec::preset("identity")},
                               bundle(), RunConfig{});
  REQUIRE(result.table.size() == 2);
  CHECK(result.table[0].runs == 3);
  INFO("rect " << result.table[0].test_text << " identity " << result.table[1].test_text);
  CHECK(result.table[0].mean_test - result.table[1].mean_test >= 0.20);
}

TEST_CASE("depth ablation") {
  const auto spec = ExperimentSpec::preset("rect-3to2", Regularizer::theta);
  RunConfig rc = quick_config(40);
  rc.max_splits = 1;
  SUBCASE("depths 2 and 4 are finite") {
    const auto r = run_depth_ablation(spec, bundle(), std::vector<Index>{2, 4}, rc);
    REQUIRE(r.rows.size() == 2);
    for (const auto& row : r.rows) {
      CHECK(row.halt_count == 0);
      CHECK(std::isfinite(row.mean_test));
    }
    CHECK(r.records[1].layers == 4);
  }
  SUBCASE("a forced step scale goes non-finite without stopping the sweep") {
    const std::vector<DepthSetting> settings{{2, 1.0}, {16, 1e25}, {32, 1.0}};
    const auto r = run_depth_ablation(spec, bundle(), settings, rc);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[1].halt_count == 1);
    CHECK(r.records[1].halt_reason == "nonfinite");
    CHECK(std::isnan(r.records[1].test_acc));
    CHECK(r.rows[2].halt_count == 0);

    std::ostringstream os;
    emit_ablation(r, OutputFormat::csv, os);
    std::istringstream in(os.str());
    std::string header, row;
    std::getline(in, header);
    CHECK(header.rfind("depth,mean_test,std_test,halt_count", 0) == 0);
    std::getline(in, row);
    std::getline(in, row);
    CHECK(row.rfind("16,nan,nan,1,", 0) == 0);

    // NaN accuracies survive the JSON round trip as null.
    const Json j = record_to_json(r.records[1]);
    CHECK(j["test_acc"].is_null());
    CHECK(std::isnan(record_from_json(j).test_acc));
  }
  SUBCASE("unsorted depths are refused") {
    CHECK_THROWS(run_depth_ablation(spec, bundle(), std::vector<Index>{4, 2}, rc));
  }
}

TEST_CASE("emission preconditions") {
  GridResult empty;
  std::ostringstream os;
  CHECK_THROWS_AS(emit_results(empty, OutputFormat::csv, os), StructuralError);
  CHECK_THROWS(emit_results(empty, OutputFormat::csv, fs::path("/nonexistent-dir/x/y.csv")));
}
