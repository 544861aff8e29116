#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "gwr/commands.hpp"
#include "gwr/error.hpp"
#include "gwr/model_io.hpp"

namespace {

gwr::ModelKind kind_of(const std::string& s) { return gwr::parse_model_kind(s); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-to-Gaussian regression in the Wasserstein tangent space"};
  app.set_version_flag("--version", std::string(gwr::kVersion));
  app.require_subcommand(1);

  gwr::SimulateOptions sim;
  std::string sim_kind;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo comparison against the moment-regression baseline");
  simulate->add_option("--config", sim.config_path, "scenario JSON")->check(CLI::ExistingFile);
  simulate->add_option("--preset", sim.preset, "fig2-desk, fig3-desk or fig4-desk");
  simulate->add_option("--seed", sim.seed, "overrides the scenario seed");
  simulate->add_option("--kind", sim_kind, "basic|lowrank")->check(CLI::IsMember({"basic", "lowrank", "low-rank"}));
  simulate->add_option("--rank", sim.rank, "rank K for the low-rank model");
  simulate->add_option("--runs", sim.runs, "Monte Carlo repetitions");
  simulate->add_option("--out", sim.out_dir, "output directory")->capture_default_str();
  simulate->add_flag("--dataset", sim.dataset_only, "write one sampled dataset as long-format CSV instead");

  gwr::FitCommandOptions fit;
  std::string fit_kind = "basic";
  auto* fitc = app.add_subcommand("fit", "fit a model to long-format observations");
  fitc->add_option("data", fit.data_path, "long-format CSV")->required()->check(CLI::ExistingFile);
  fitc->add_option("--kind", fit_kind, "basic|lowrank")->check(CLI::IsMember({"basic", "lowrank", "low-rank"}));
  fitc->add_option("--rank", fit.rank, "rank K (required for lowrank)");
  fitc->add_option("--split", fit.split, "all | first:<k> | rest:<k> | max-id:<v> | min-id:<v>")->capture_default_str();
  fitc->add_option("--seed", fit.seed, "seed for low-rank restarts");
  fitc->add_option("--out", fit.out_dir, "output directory")->capture_default_str();
  fitc->add_flag("--standardize", fit.standardize, "standardize each coordinate before fitting");
  fitc->add_flag("--allow-single-unit", fit.allow_single_unit, "interpolate a single training unit");

  gwr::PredictOptions pred;
  auto* predictc = app.add_subcommand("predict", "predict response distributions");
  predictc->add_option("--model", pred.model_path, "model JSON")->required()->check(CLI::ExistingFile);
  predictc->add_option("data", pred.data_path, "long-format or measure CSV")->required()->check(CLI::ExistingFile);
  predictc->add_option("--split", pred.split, "unit selection rule")->capture_default_str();
  predictc->add_option("--out", pred.out_path, "prediction CSV")->capture_default_str();

  gwr::EvalOptions ev;
  auto* evalc = app.add_subcommand("eval", "summarize Wasserstein discrepancies between predictions and observations");
  evalc->add_option("predicted", ev.predicted_path, "prediction CSV")->required()->check(CLI::ExistingFile);
  evalc->add_option("observed", ev.observed_path, "measure or long-format CSV")->required()->check(CLI::ExistingFile);
  evalc->add_option("--out", ev.out_path, "summary CSV (stdout if omitted)");
  evalc->add_option("--label", ev.label, "row label")->capture_default_str();

  gwr::BarycenterOptions bary;
  auto* baryc = app.add_subcommand("barycenter", "empirical Frechet mean of per-unit Gaussians");
  baryc->add_option("data", bary.data_path, "long-format or measure CSV")->required()->check(CLI::ExistingFile);
  baryc->add_option("--role", bary.role, "predictor|response")->capture_default_str();
  baryc->add_option("--out", bary.out_path, "measure CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? gwr::kExitOk : gwr::kExitInput;
  }

  try {
    if (*simulate) {
      if (!sim_kind.empty()) sim.kind = kind_of(sim_kind);
      gwr::cmd_simulate(sim, std::cerr);
    } else if (*fitc) {
      fit.kind = kind_of(fit_kind);
      gwr::cmd_fit(fit, std::cerr);
    } else if (*predictc) {
      gwr::cmd_predict(pred, std::cerr);
    } else if (*evalc) {
      gwr::cmd_eval(ev, std::cout);
    } else if (*baryc) {
      gwr::cmd_barycenter(bary, std::cout);
    }
  } catch (const gwr::Error& e) {
    std::cerr << "gwr: " << e.what() << '\n';
    return e.numerical() ? gwr::kExitNumerical : gwr::kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "gwr: " << e.what() << '\n';
    return gwr::kExitInput;
  }
  return gwr::kExitOk;
}
