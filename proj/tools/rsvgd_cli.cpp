#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "rsvgd/rsvgd.hpp"

namespace {

struct Settings {
  std::vector<std::pair<std::string, std::string>> values;
  std::vector<std::string> components;
  std::string config_path;
};

/// Registers every run option on `cmd`; parsed values land in `s.values` in
/// registration order, and only for options that were given.
void add_run_options(CLI::App* cmd, Settings& s) {
  const std::vector<std::pair<std::string, std::string>> valued{
      {"method", "svgd | rsvgd"},
      {"particles", "number of particles N"},
      {"iters", "number of iterations T"},
      {"seed", "random seed"},
      {"step", "step size"},
      {"kernel", "median | fixed:H | summed"},
      {"kappa", "vMF kernel concentration"},
      {"data", "sparse 'label idx:val' dataset (synthetic when omitted)"},
      {"split", "training fraction"},
      {"cadence", "record metrics every k iterations"},
      {"out", "CSV output path (stdout when omitted)"},
      {"threads", "worker threads for field evaluation"},
      {"alpha", "prior variance of the logistic regression weights"},
      {"inversion", "direct | sherman_morrison"},
      {"momentum", "AdaGrad momentum"},
      {"fuzz", "AdaGrad fuzz factor"},
      {"dim", "Euclidean dimension or sphere ambient dimension"},
      {"blocks", "number of sphere blocks (product-demo)"},
      {"synthetic-rows", "rows of the synthetic dataset"},
      {"synthetic-features", "features of the synthetic dataset"},
      {"init-mean", "initial particle mean (gaussian-sanity)"},
      {"init-std", "initial particle std (gaussian-sanity)"},
  };
  for (const auto& [name, help] : valued) {
    cmd->add_option_function<std::string>(
        "--" + name, [&s, key = name](const std::string& v) { s.values.emplace_back(key, v); }, help);
  }
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"standardize", "standardize features with training statistics"},
           {"freeze-bandwidth", "compute the median bandwidth once from the initial particles"},
           {"timing", "record wall-clock milliseconds (reports are then not reproducible)"},
           {"synthetic-noisy", "draw synthetic labels from the logistic model instead of thresholding"}}) {
    cmd->add_flag_callback(
        "--" + name,
        [&s, key = name]() {
          if (key == "synthetic-noisy") {
            s.values.emplace_back("synthetic-separable", "false");
          } else {
            s.values.emplace_back(key, "true");
          }
        },
        help);
  }
  cmd->add_option("--component", s.components, "vMF component '<mu csv>;<kappa>;<weight>' (repeatable)");
  cmd->add_option("--config", s.config_path, "key=value configuration file; flags override it");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stein variational gradient descent and its Riemannian variant"};
  app.set_version_flag("--version", std::string(rsvgd::kVersion));
  app.require_subcommand(1);

  std::vector<std::pair<std::string, Settings>> runs;
  runs.reserve(rsvgd::known_commands().size());
  for (const auto& name : rsvgd::known_commands()) {
    runs.emplace_back(name, Settings{});
  }
  const std::vector<std::string> descriptions{
      "Bayesian logistic regression benchmark (test accuracy along iterations)",
      "vMF mixture target on a hypersphere (RKSD along iterations)",
      "vMF targets on a product of hyperspheres (step norms along iterations)",
      "standard normal target (moments and KSD along iterations)"};
  std::vector<CLI::App*> commands;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto* cmd = app.add_subcommand(runs[i].first, descriptions[i]);
    add_run_options(cmd, runs[i].second);
    commands.push_back(cmd);
  }

  std::size_t rows = 200;
  std::size_t features = 5;
  std::uint64_t seed = 1;
  bool noisy = false;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth-data", "write a seeded synthetic logistic dataset in sparse format");
  synth->add_option("--rows", rows, "number of rows");
  synth->add_option("--features", features, "number of features");
  synth->add_option("--seed", seed, "random seed");
  synth->add_flag("--noisy", noisy, "draw labels from the logistic model instead of thresholding");
  synth->add_option("--out", synth_out, "output path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const auto data = rsvgd::make_synthetic_blr(rows, features, seed, !noisy).data;
      if (synth_out.empty()) {
        rsvgd::write_sparse_dataset(std::cout, data);
      } else {
        std::ofstream out(synth_out, std::ios::binary);
        if (!out) throw rsvgd::error("cannot write '" + synth_out + "'");
        rsvgd::write_sparse_dataset(out, data);
      }
      return 0;
    }
    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (!commands[i]->parsed()) continue;
      const Settings& s = runs[i].second;
      rsvgd::RunConfig config;
      if (!s.config_path.empty()) rsvgd::apply_config_file(config, s.config_path);
      config.command = runs[i].first;
      for (const auto& [k, v] : s.values) rsvgd::apply_setting(config, k, v);
      if (!s.components.empty()) config.components = s.components;
      const auto result = rsvgd::run_command(config);
      rsvgd::write_report(result, std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
