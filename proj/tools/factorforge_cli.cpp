#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "factorforge/error.hpp"
#include "factorforge/parallel.hpp"
#include "factorforge/pipeline.hpp"
#include "factorforge/synthgen.hpp"
#include "factorforge/text.hpp"

namespace ff = factorforge;

namespace {

int write_synth(const ff::SynthConfig& sc, const std::string& out_dir) {
  auto data = ff::generate(sc);
  const std::filesystem::path dir(out_dir);
  ff::write_file((dir / "prices.csv").string(), data.prices_csv);
  ff::write_file((dir / "membership.csv").string(), data.membership_csv);
  nlohmann::json config = {{"paths",
                            {{"prices", (dir / "prices.csv").string()},
                             {"membership", (dir / "membership.csv").string()},
                             {"out", (dir / "out").string()}}},
                           {"seed", sc.seed}};
  if (sc.leak_features) {
    ff::write_file((dir / "extra_features.csv").string(), data.extra_features_csv);
    config["paths"]["extra_features"] = (dir / "extra_features.csv").string();
  }
  ff::write_file((dir / "config.json").string(), config.dump(2) + "\n");
  std::cout << "synth: " << sc.n_stocks << " stocks x " << sc.n_months << " months ("
            << data.prices.rows.size() << " rows) written to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor selection, forecasting, attribution and backtesting for equity panels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ff::kVersion));

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  int threads = 0;
  app.add_option("--threads", threads, "Worker cap (default: FACTORFORGE_THREADS, else 1)")
      ->check(CLI::NonNegativeNumber);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Pipeline config JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--out", out_dir, "Override the output directory");
    sub->add_option("--threads", threads, "Worker cap (default: FACTORFORGE_THREADS, else 1)")
        ->check(CLI::NonNegativeNumber);
  };

  auto* ingest = app.add_subcommand("ingest", "Load, merge, filter and clean the input panel");
  auto* factors = app.add_subcommand("factors", "Compute the factor catalog");
  auto* select = app.add_subcommand("select", "Two-layer factor filter and subset search");
  auto* train = app.add_subcommand("train", "Fit OLS, ridge, random forest and gradient boosting");
  auto* explain = app.add_subcommand("explain", "Feature importance and SHAP attributions");
  auto* backtest = app.add_subcommand("backtest", "Rolling-window top-k backtest");
  auto* run_all = app.add_subcommand("run-all", "Run every stage in order");
  for (auto* sub : {ingest, factors, select, train, explain, backtest, run_all}) add_common(sub);
  std::string model_path;
  explain->add_option("--model", model_path, "Model JSON (default: the configured trained model)");

  ff::SynthConfig sc;
  std::string synth_out = "synth";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic price and membership panel");
  synth->add_option("--stocks", sc.n_stocks, "Number of stocks")->capture_default_str();
  synth->add_option("--months", sc.n_months, "Number of months")->capture_default_str();
  synth->add_option("--seed", sc.seed, "Generator seed")->capture_default_str();
  synth->add_option("--signal", sc.signal_strength, "Predictable share of returns in [0, 1]")
      ->capture_default_str();
  synth->add_flag("--leak", sc.leak_features, "Also write a LeakedReturn feature file");
  synth->add_option("--out", synth_out, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  ff::set_thread_count(threads);

  std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (synth->parsed()) return write_synth(sc, synth_out);
    auto cfg = ff::load_pipeline_config(config_path, seed, out_dir);
    if (ingest->parsed()) ff::cmd_ingest(cfg, std::cout);
    if (factors->parsed()) ff::cmd_factors(cfg, std::cout);
    if (select->parsed()) ff::cmd_select(cfg, std::cout);
    if (train->parsed()) ff::cmd_train(cfg, std::cout);
    if (explain->parsed()) ff::cmd_explain(cfg, model_path, std::cout);
    if (backtest->parsed()) ff::cmd_backtest(cfg, std::cout);
    if (run_all->parsed()) ff::cmd_run_all(cfg, std::cout);
  } catch (const ff::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: stage " << stage << ": " << e.what() << "\n";
    return 2;
  }
  return 0;
}
