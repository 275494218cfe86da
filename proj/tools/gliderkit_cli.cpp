// gliderkit: tracker | visuals | evaluations | synth

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "gliderkit/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Evaluate and visualize GA-suggested glider paths"};
  app.require_subcommand(1);

  std::string params_file, scenario, out;
  auto add_common = [&](CLI::App* sub, bool needs_scenario) {
    sub->add_option("--params", params_file, "parameter file overlaid on <scenario>/input.prm");
    auto* s = sub->add_option("--scenario", scenario, "scenario directory");
    if (needs_scenario) s->required()->check(CLI::ExistingDirectory);
    sub->add_option("--out", out, "output directory")->required();
  };
  auto* tracker = app.add_subcommand("tracker", "track vs path and dead-reckoning prediction");
  auto* visuals = app.add_subcommand("visuals", "maps, waypoint file and forecast animation");
  auto* evaluations = app.add_subcommand("evaluations", "score histogram, top runs and confidence ellipses");
  auto* synth = app.add_subcommand("synth", "generate a seeded scenario with the built-in GA");
  add_common(tracker, true);
  add_common(visuals, true);
  add_common(evaluations, true);
  add_common(synth, false);
  synth->get_option("--params")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const std::optional<gliderkit::fs::path> overlay =
        params_file.empty() ? std::nullopt : std::optional<gliderkit::fs::path>(params_file);
    if (synth->parsed()) {
      const auto p = gliderkit::read_params(gliderkit::read_text_file(params_file, "synth parameters"));
      gliderkit::cmd_synth(p, out);
    } else {
      const auto p = gliderkit::load_params(scenario, overlay);
      if (tracker->parsed()) gliderkit::cmd_tracker(p, scenario, out);
      if (visuals->parsed()) gliderkit::cmd_visuals(p, scenario, out);
      if (evaluations->parsed()) gliderkit::cmd_evaluations(p, scenario, out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
