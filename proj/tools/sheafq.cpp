// sheafq command-line front end.

#include "sheafq/dataset.hpp"
#include "sheafq/diffusion.hpp"
#include "sheafq/experiments.hpp"
#include "sheafq/io.hpp"
#include "sheafq/moment.hpp"
#include "sheafq/properties.hpp"
#include "sheafq/random.hpp"
#include "sheafq/training.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace sheafq;

namespace {

constexpr int kParseExit = 2;
constexpr int kNumericExit = 3;
constexpr int kPropertyExit = 4;

struct Globals {
  std::uint64_t seed = 0;
  std::string out;  // empty: stdout
  std::string format = "json";
};

// Runs `emit` against --out, or stdout when --out is absent.
template <typename Fn>
void with_output(const Globals& g, Fn&& emit) {
  if (g.out.empty()) {
    emit(std::cout);
    std::cout.flush();
    return;
  }
  const fs::path p(g.out);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw std::runtime_error(g.out + ": cannot open for writing");
  emit(f);
  if (!f) throw std::runtime_error(g.out + ": write failed");
}

void write_text(const Globals& g, const std::string& text) {
  with_output(g, [&](std::ostream& os) { os << text; });
}

Json matrix_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::vector<std::string> properties;
};

int cmd_verify(const Globals& g, const VerifyArgs& a) {
  const auto names = a.properties.empty() ? property_names() : a.properties;
  std::vector<PropertyReport> reports;
  bool ok = true;
  for (const auto& name : names) {
    reports.push_back(run_property(name, g.seed));
    ok = ok && reports.back().passed();
    std::cerr << (reports.back().passed() ? "ok    " : "FAIL  ") << name << "  (" << reports.back().instances
              << " instances, max residual " << reports.back().max_residual << ")\n";
  }
  std::ostringstream os;
  if (parse_format(g.format) == OutputFormat::json) {
    Json doc = Json::array();
    for (const auto& r : reports) doc.push_back(r.to_json());
    os << doc.dump(2) << '\n';
  } else {
    os << "property,instances,failures,max_residual,threshold,seconds\n";
    for (const auto& r : reports)
      os << r.property << ',' << r.instances << ',' << r.failures.size() << ',' << format_significant(r.max_residual)
         << ',' << format_significant(r.threshold) << ',' << format_significant(r.seconds) << '\n';
  }
  write_text(g, os.str());
  return ok ? 0 : kPropertyExit;
}

// ---------------------------------------------------------------- diffuse

struct DiffuseArgs {
  std::string sheaf;
  std::string signal;
  Index channels = 1;
  std::string mode = "euler";
  Index layers = 10;
  double step = 0.0;  // 0: 1/λ_max
  double time = 1.0;
};

int cmd_diffuse(const Globals& g, const DiffuseArgs& a) {
  const auto sheaf = read_sheaf(a.sheaf);
  MatrixXd x0;
  if (a.signal.empty()) {
    Rng rng(g.seed);
    x0 = random_gaussian(sheaf.dims().total_vertex(), a.channels, rng);
  } else {
    x0 = read_signal_csv(a.signal);
  }
  if (x0.rows() != sheaf.dims().total_vertex())
    throw StructuralError("signal has " + std::to_string(x0.rows()) + " rows, sheaf has " +
                          std::to_string(sheaf.dims().total_vertex()) + " vertex coordinates");

  Json report;
  MatrixXd state;
  if (a.mode == "spectral") {
    const SpectralFlow<double> flow(sheaf);
    state = flow(x0, a.time);
    const auto basis = kernel_basis(sheaf);
    const MatrixXd limit = harmonic_projection(basis, x0);
    report = {{"mode", "spectral"},
              {"time", a.time},
              {"lambda_max", flow.lambda_max()},
              {"lambda_plus", flow.smallest_positive()},
              {"h0", basis.dimension()},
              {"energy_initial", dirichlet_energy(sheaf, x0)},
              {"energy_final", dirichlet_energy(sheaf, state)},
              {"distance_to_limit", (state - limit).norm()}};
  } else if (a.mode == "euler") {
    DiffusionConfig cfg;
    cfg.layers = a.layers;
    if (a.step > 0) cfg.step_size = a.step;
    auto r = euler_diffuse(sheaf, x0, cfg);
    Json energy = Json::array();
    for (const auto& [step, e] : r.energy) energy.push_back({step, finite_or_null(e)});
    report = {{"mode", "euler"},
              {"layers", a.layers},
              {"step_size", r.step_size},
              {"lambda_max", r.lambda_max},
              {"stable_step", r.stable_step},
              {"converged", r.converged},
              {"nonfinite_at", r.nonfinite_at ? Json(*r.nonfinite_at) : Json(nullptr)},
              {"energy", energy}};
    state = std::move(r.state);
  } else {
    throw CLI::ValidationError("--mode", "expected 'euler' or 'spectral'");
  }
  const auto probe = oversmoothing_probe(sheaf, x0);
  report["residual_to_constant"] = probe.residual_to_constant;
  report["sections_vanish"] = probe.sections_vanish;

  if (parse_format(g.format) == OutputFormat::csv) {
    with_output(g, [&](std::ostream& os) { write_signal_csv(state, os); });
  } else {
    report["state"] = matrix_json(state);
    write_text(g, report.dump(2) + "\n");
  }
  return report.contains("nonfinite_at") && !report["nonfinite_at"].is_null() ? kNumericExit : 0;
}

// ---------------------------------------------------------------- moment

struct MomentArgs {
  std::string sheaf;
  std::vector<double> theta;
};

int cmd_moment(const Globals& g, const MomentArgs& a) {
  const auto sheaf = read_sheaf(a.sheaf);
  const auto& dims = sheaf.dims();
  const auto& graph = sheaf.graph();
  const auto mu = moment_map(sheaf);
  const auto wall = stability_wall_diagnostic(dims, 100, g.seed);

  std::optional<ThetaVector<double>> theta;
  if (!a.theta.empty()) {
    theta = project_theta(VectorXd(Eigen::Map<const VectorXd>(a.theta.data(), static_cast<Index>(a.theta.size()))), dims);
  } else if (wall.escape_theta) {
    theta = wall.escape_theta;
  }

  const auto object_name = [&](Index i) {
    return i < dims.num_vertices() ? graph.vertex_id(i) : graph.edge_key(i - dims.num_vertices());
  };
  const auto central_residual = [](const MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    return (m - m.trace() / double(m.rows()) * MatrixXd::Identity(m.rows(), m.rows())).norm();
  };

  if (parse_format(g.format) == OutputFormat::csv) {
    std::ostringstream os;
    os << "object,kind,dim,trace,central_residual,theta\n";
    for (Index i = 0; i < mu.num_objects(); ++i) {
      const auto& m = mu.object(i);
      os << '"' << object_name(i) << "\"," << (i < dims.num_vertices() ? "vertex" : "edge") << ',' << m.rows()
         << ',' << format_significant(m.trace()) << ',' << format_significant(central_residual(m)) << ','
         << (theta ? format_significant((*theta)(i)) : "") << '\n';
    }
    write_text(g, os.str());
    return 0;
  }

  Json vertices = Json::object(), edges = Json::object();
  for (Index v = 0; v < dims.num_vertices(); ++v)
    vertices[graph.vertex_id(v)] = matrix_json(mu.vertex[static_cast<std::size_t>(v)]);
  for (Index e = 0; e < dims.num_edges(); ++e) edges[graph.edge_key(e)] = matrix_json(mu.edge[static_cast<std::size_t>(e)]);
  Json doc = {{"mu", {{"vertex", vertices}, {"edge", edges}}},
              {"trace_sum", mu.trace_sum()},
              {"cent_mm", cent_mm(mu)},
              {"wall",
               {{"uniform", wall.uniform},
                {"forced_trivial_weight_zero", wall.forced_trivial_weight_zero},
                {"max_abs_trivial_weight", wall.max_abs_trivial_weight},
                {"escape_weight", wall.escape_theta ? Json(wall.escape_weight) : Json(nullptr)}}}};
  if (theta) {
    doc["theta"] = std::vector<double>(theta->values().data(), theta->values().data() + theta->values().size());
    doc["theta_source"] = a.theta.empty() ? "escape" : "projected";
    doc["theta_trivial_weight"] = trivial_weight(*theta);
    doc["theta_mm"] = theta_mm(mu, *theta);
  }
  write_text(g, doc.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- shared experiment options

struct ModelArgs {
  std::string arch = "rect-3to2";
  std::string reg = "theta";
  Index layers = 4;
  Index hidden = 8;
  double dropout = 0.0;
  double lambda_cent = 2e-3;
  double lambda_theta = 1e-4;
};

struct TrainArgs {
  double lr = 0.01;
  double weight_decay = 5e-3;
  Index epochs = 1500;
  Index patience = 200;
  double step_scale = 1.0;
  double map_lr_scale = 1.0;
};

struct DataArgs {
  std::string dir;
  Index n_per_block = 30;
  double p_intra = 0.1;
  double p_inter = 0.3;
  double noise = 0.5;
  Index splits = 1;
};

void add_model_options(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--arch", m.arch, "square-3x3, rect-3to2 or identity")->capture_default_str();
  cmd->add_option("--reg", m.reg, "none, cent or theta")->capture_default_str();
  cmd->add_option("--layers", m.layers, "diffusion layers L")->capture_default_str();
  cmd->add_option("--hidden", m.hidden, "encoder channels per stalk coordinate")->capture_default_str();
  cmd->add_option("--lambda-cent", m.lambda_cent)->capture_default_str();
  cmd->add_option("--lambda-theta", m.lambda_theta)->capture_default_str();
}

void add_train_options(CLI::App* cmd, TrainArgs& t) {
  cmd->add_option("--lr", t.lr)->capture_default_str();
  cmd->add_option("--weight-decay", t.weight_decay)->capture_default_str();
  cmd->add_option("--epochs", t.epochs, "maximum epochs")->capture_default_str();
  cmd->add_option("--patience", t.patience)->capture_default_str();
  cmd->add_option("--step-scale", t.step_scale, "alpha = step_scale / lambda_max")->capture_default_str();
  cmd->add_option("--map-lr-scale", t.map_lr_scale)->capture_default_str();
}

void add_data_options(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--data", d.dir, "dataset directory; omitted: generate the two-block bundle");
  cmd->add_option("--n-per-block", d.n_per_block)->capture_default_str();
  cmd->add_option("--p-intra", d.p_intra)->capture_default_str();
  cmd->add_option("--p-inter", d.p_inter)->capture_default_str();
  cmd->add_option("--noise", d.noise, "feature noise of the generated bundle")->capture_default_str();
  cmd->add_option("--num-splits", d.splits, "splits of the generated bundle")->capture_default_str();
}

DatasetBundle obtain_data(const Globals& g, const DataArgs& d) {
  if (!d.dir.empty()) return load_dataset(d.dir);
  TwoBlockOptions opt;
  opt.feature_noise = d.noise;
  opt.num_splits = d.splits;
  return generate_two_block(d.n_per_block, d.p_intra, d.p_inter, g.seed, opt).bundle;
}

ExperimentSpec make_spec(const ModelArgs& m, double dropout) {
  auto spec = ExperimentSpec::preset(m.arch, parse_regularizer(m.reg));
  spec.layers = m.layers;
  spec.hidden = m.hidden;
  spec.dropout = dropout;
  spec.lambda_cent = m.lambda_cent;
  spec.lambda_theta = m.lambda_theta;
  spec.name.clear();
  return spec;
}

RunConfig make_run(const Globals& g, const TrainArgs& t) {
  RunConfig rc;
  rc.master_seed = g.seed;
  rc.train.learning_rate = t.lr;
  rc.train.weight_decay = t.weight_decay;
  rc.train.max_epochs = t.epochs;
  rc.train.patience = t.patience;
  rc.train.step_scale = t.step_scale;
  rc.train.map_lr_scale = t.map_lr_scale;
  return rc;
}

// ---------------------------------------------------------------- train

struct TrainCmdArgs {
  DataArgs data;
  ModelArgs model;
  TrainArgs train;
  double dropout = 0.7;
  Index split = 0;
  std::string checkpoint;
  std::string history;
};

int cmd_train(const Globals& g, const TrainCmdArgs& a) {
  const DatasetBundle data = obtain_data(g, a.data);
  auto spec = make_spec(a.model, a.dropout);
  const RunConfig rc = make_run(g, a.train);
  const auto run = run_single(spec, data, a.split, 0, rc, a.train.step_scale);
  const ResultRecord& r = run.record;

  if (!a.history.empty()) write_history_csv(run.result.history, a.history);
  if (!a.checkpoint.empty())
    write_json_file(checkpoint_to_json(run.result.model, {{"spec", spec.label()}, {"split", a.split}, {"seed", g.seed}}),
                    a.checkpoint);

  std::cerr << spec.label() << ": test " << r.test_acc << ", best val " << r.best_val_acc << " at epoch "
            << r.best_epoch << " (" << r.halt_reason << ")\n";
  if (parse_format(g.format) == OutputFormat::csv) {
    GridResult one;
    one.records = {r};
    with_output(g, [&](std::ostream& os) { emit_results(one, OutputFormat::csv, os); });
  } else {
    const auto s = summarize(data);
    Json doc = record_to_json(r);
    doc["dataset"] = {{"nodes", s.nodes}, {"edges", s.edges}, {"features", s.features}, {"classes", s.classes},
                      {"homophily", s.homophily}};
    doc["dropout"] = a.dropout;
    write_text(g, doc.dump(2) + "\n");
  }
  return std::isfinite(r.test_acc) ? 0 : kNumericExit;
}

// ---------------------------------------------------------------- grid

struct GridArgs {
  DataArgs data;
  ModelArgs model;
  TrainArgs train;
  std::vector<std::string> archs{"square-3x3", "rect-3to2"};
  std::vector<std::string> regs{"none", "cent", "theta"};
  std::vector<std::uint64_t> seeds{0};
  bool identity_baseline = false;
  bool matched_control = false;
  Index max_splits = 0;
  unsigned threads = 1;
  double dropout = 0.0;
  std::string table;
};

int cmd_grid(const Globals& g, const GridArgs& a) {
  const DatasetBundle data = obtain_data(g, a.data);
  std::vector<ExperimentSpec> specs;
  ModelArgs m = a.model;
  for (const auto& arch : a.archs)
    for (const auto& reg : a.regs) {
      m.arch = arch;
      m.reg = reg;
      specs.push_back(make_spec(m, a.dropout));
      specs.back().seeds = a.seeds;
    }
  if (a.identity_baseline) {
    m.arch = "identity";
    m.reg = "none";
    specs.push_back(make_spec(m, a.dropout));
    specs.back().seeds = a.seeds;
  }
  RunConfig rc = make_run(g, a.train);
  rc.max_splits = a.max_splits;
  rc.threads = a.threads;
  rc.parameter_matched_control = a.matched_control;
  const auto result = run_grid(specs, data, rc);
  std::cerr << render_table(result.table);
  with_output(g, [&](std::ostream& os) { emit_results(result, parse_format(g.format), os); });
  if (!a.table.empty()) emit_table(result.table, parse_format(g.format), a.table);
  return 0;
}

// ---------------------------------------------------------------- ablate-depth

struct AblateArgs {
  DataArgs data;
  ModelArgs model;
  TrainArgs train;
  std::vector<Index> depths{2, 4, 8, 16};
  std::vector<std::uint64_t> seeds{0};
  double dropout = 0.0;
  Index max_splits = 0;
  unsigned threads = 1;
  Index misscale_depth = 0;
  double misscale = 1e25;
};

int cmd_ablate(const Globals& g, const AblateArgs& a) {
  const DatasetBundle data = obtain_data(g, a.data);
  auto spec = make_spec(a.model, a.dropout);
  spec.seeds = a.seeds;
  std::vector<DepthSetting> settings;
  for (Index d : a.depths) settings.push_back({d, a.train.step_scale});
  if (a.misscale_depth > 0) settings.push_back({a.misscale_depth, a.misscale});
  RunConfig rc = make_run(g, a.train);
  rc.max_splits = a.max_splits;
  rc.threads = a.threads;
  const auto result = run_depth_ablation(spec, data, settings, rc);
  for (const auto& row : result.rows)
    std::cerr << "L=" << row.depth << " scale=" << row.step_scale << "  " << format_mean_std(row.mean_test, row.std_test)
              << "  nonfinite " << row.halt_count << "/" << row.runs << "\n";
  with_output(g, [&](std::ostream& os) { emit_ablation(result, parse_format(g.format), os); });
  return 0;
}

// ---------------------------------------------------------------- gen-synth / inspect-dataset

struct SynthArgs {
  Index n_per_block = 30;
  double p_intra = 0.1;
  double p_inter = 0.3;
  double noise = 0.5;
  Index distractors = 6;
  Index splits = 10;
};

int cmd_gen_synth(const Globals& g, const SynthArgs& a) {
  if (g.out.empty()) throw CLI::ValidationError("--out", "gen-synth needs an output directory");
  TwoBlockOptions opt;
  opt.feature_noise = a.noise;
  opt.distractors = a.distractors;
  opt.num_splits = a.splits;
  const auto synth = generate_two_block(a.n_per_block, a.p_intra, a.p_inter, g.seed, opt);
  write_dataset(synth.bundle, g.out);
  const Json manifest = manifest_to_json(synth.manifest);
  write_json_file(manifest, fs::path(g.out) / "manifest.json");
  std::cout << manifest.dump(2) << '\n';
  return 0;
}

struct InspectArgs {
  std::string dir;
};

int cmd_inspect(const Globals& g, const InspectArgs& a) {
  const DatasetBundle data = load_dataset(a.dir);
  const auto s = summarize(data);
  Json doc = {{"nodes", s.nodes},       {"edges", s.edges},   {"features", s.features},
              {"classes", s.classes},   {"splits", s.splits}, {"homophily", s.homophily}};
  const fs::path manifest_file = fs::path(a.dir) / "manifest.json";
  bool mismatch = false;
  if (fs::exists(manifest_file)) {
    const auto m = manifest_from_json(read_json_file(manifest_file), manifest_file.string());
    mismatch = m.nodes != s.nodes || m.edges != s.edges || m.features != s.features || m.classes != s.classes;
    doc["manifest_match"] = !mismatch;
  }
  if (parse_format(g.format) == OutputFormat::csv) {
    std::ostringstream os;
    os << "nodes,edges,features,classes,splits,homophily\n"
       << s.nodes << ',' << s.edges << ',' << s.features << ',' << s.classes << ',' << s.splits << ','
       << format_significant(s.homophily) << '\n';
    write_text(g, os.str());
  } else {
    write_text(g, doc.dump(2) + "\n");
  }
  if (mismatch) throw ParseError(manifest_file.string() + ": counts do not match the loaded dataset");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sheaf diffusion, quiver moment maps and stability diagnostics"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--out", g.out, "output file (directory for gen-synth); default stdout");
  app.add_option("--format", g.format, "json or csv")->capture_default_str()->check(CLI::IsMember({"json", "csv"}));

  VerifyArgs verify;
  auto* c_verify = app.add_subcommand("verify", "run the property suites");
  c_verify->add_option("--property", verify.properties, "suite names (default: all)")
      ->check(CLI::IsMember(property_names()));

  DiffuseArgs diffuse;
  auto* c_diffuse = app.add_subcommand("diffuse", "diffuse a signal with the sheaf Laplacian");
  c_diffuse->add_option("--sheaf", diffuse.sheaf, "sheaf JSON")->required()->check(CLI::ExistingFile);
  c_diffuse->add_option("--signal", diffuse.signal, "signal CSV (default: Gaussian from --seed)")
      ->check(CLI::ExistingFile);
  c_diffuse->add_option("--channels", diffuse.channels, "channels of the random signal")->capture_default_str();
  c_diffuse->add_option("--mode", diffuse.mode, "euler or spectral")
      ->capture_default_str()
      ->check(CLI::IsMember({"euler", "spectral"}));
  c_diffuse->add_option("--layers", diffuse.layers, "euler steps")->capture_default_str();
  c_diffuse->add_option("--step", diffuse.step, "euler step size (default 1/lambda_max)");
  c_diffuse->add_option("--time", diffuse.time, "spectral time")->capture_default_str();

  MomentArgs moment;
  auto* c_moment = app.add_subcommand("moment", "moment map, penalties and the stability wall");
  c_moment->add_option("--sheaf", moment.sheaf, "sheaf JSON")->required()->check(CLI::ExistingFile);
  c_moment->add_option("--theta", moment.theta, "raw theta, vertices then edges (projected before use)")
      ->delimiter(',');

  TrainCmdArgs tr;
  auto* c_train = app.add_subcommand("train", "train one model on one split");
  add_data_options(c_train, tr.data);
  add_model_options(c_train, tr.model);
  add_train_options(c_train, tr.train);
  c_train->add_option("--dropout", tr.dropout, "encoder dropout")->capture_default_str();
  c_train->add_option("--split", tr.split)->capture_default_str();
  c_train->add_option("--checkpoint", tr.checkpoint, "write the best model here");
  c_train->add_option("--history", tr.history, "write the per-epoch history CSV here");

  GridArgs grid;
  auto* c_grid = app.add_subcommand("grid", "architecture x regularizer grid");
  add_data_options(c_grid, grid.data);
  add_model_options(c_grid, grid.model);
  add_train_options(c_grid, grid.train);
  c_grid->add_option("--archs", grid.archs)->delimiter(',')->capture_default_str();
  c_grid->add_option("--regs", grid.regs)->delimiter(',')->capture_default_str();
  c_grid->add_option("--seeds", grid.seeds)->delimiter(',')->capture_default_str();
  c_grid->add_flag("--identity-baseline", grid.identity_baseline, "add the frozen identity-map spec");
  c_grid->add_flag("--matched-control", grid.matched_control, "add parameter-matched square controls");
  c_grid->add_option("--max-splits", grid.max_splits, "0 = all")->capture_default_str();
  c_grid->add_option("--threads", grid.threads)->capture_default_str();
  c_grid->add_option("--dropout", grid.dropout)->capture_default_str();
  c_grid->add_option("--table", grid.table, "also write the aggregate table here");

  AblateArgs ablate;
  auto* c_ablate = app.add_subcommand("ablate-depth", "depth sweep with non-finite detection");
  add_data_options(c_ablate, ablate.data);
  add_model_options(c_ablate, ablate.model);
  add_train_options(c_ablate, ablate.train);
  c_ablate->add_option("--depths", ablate.depths)->delimiter(',')->capture_default_str();
  c_ablate->add_option("--seeds", ablate.seeds)->delimiter(',')->capture_default_str();
  c_ablate->add_option("--max-splits", ablate.max_splits, "0 = all")->capture_default_str();
  c_ablate->add_option("--threads", ablate.threads)->capture_default_str();
  c_ablate->add_option("--dropout", ablate.dropout)->capture_default_str();
  c_ablate->add_option("--misscale-depth", ablate.misscale_depth, "append a run at this depth with a forced step scale");
  c_ablate->add_option("--misscale", ablate.misscale, "step scale of the forced run")->capture_default_str();

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("gen-synth", "write a two-block dataset directory and manifest.json");
  c_synth->add_option("--n-per-block", synth.n_per_block)->capture_default_str();
  c_synth->add_option("--p-intra", synth.p_intra)->capture_default_str();
  c_synth->add_option("--p-inter", synth.p_inter)->capture_default_str();
  c_synth->add_option("--noise", synth.noise)->capture_default_str();
  c_synth->add_option("--distractors", synth.distractors)->capture_default_str();
  c_synth->add_option("--num-splits", synth.splits)->capture_default_str();

  InspectArgs inspect;
  auto* c_inspect = app.add_subcommand("inspect-dataset", "counts and homophily of a dataset directory");
  c_inspect->add_option("dir", inspect.dir, "dataset directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParseExit;
  }

  try {
    if (*c_verify) return cmd_verify(g, verify);
    if (*c_diffuse) return cmd_diffuse(g, diffuse);
    if (*c_moment) return cmd_moment(g, moment);
    if (*c_train) return cmd_train(g, tr);
    if (*c_grid) return cmd_grid(g, grid);
    if (*c_ablate) return cmd_ablate(g, ablate);
    if (*c_synth) return cmd_gen_synth(g, synth);
    if (*c_inspect) return cmd_inspect(g, inspect);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParseExit;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParseExit;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
