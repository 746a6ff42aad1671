// footseg: building-footprint segmentation toolkit.
//
// Exit codes: 0 success, 1 validation failure, 2 usage error.

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace footseg::cli;
  CLI::App app{"Building-footprint segmentation: rasterize, weight maps, tiling, splits, synthetic data, "
               "training and evaluation",
               "footseg"};
  app.require_subcommand(1);
  Registry registry;
  register_rasterize(app, registry);
  register_weightmap(app, registry);
  register_tile(app, registry);
  register_split(app, registry);
  register_combine(app, registry);
  register_synth(app, registry);
  register_train(app, registry);
  register_eval(app, registry);
  register_sweep_beta(app, registry);
  register_gradcheck(app, registry);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(args, app);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* selected = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << selected->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"status", "error"}, {"message", e.what()}}.dump() << "\n";
    return kExitValidation;
  }

  for (auto& [sub, run] : registry.commands) {
    if (!sub->parsed()) continue;
    std::string format = "json";
    if (const auto* opt = sub->get_option_no_throw("--format"); opt && opt->count() > 0) format = opt->as<std::string>();
    try {
      const Report report = run();
      print_report(report, format, std::cout);
      if (!report.passed) {
        std::cerr << nlohmann::json{{"command", report.command}, {"status", "failed"}, {"message", report.failure}}
                         .dump()
                  << "\n";
        return kExitValidation;
      }
      return kExitOk;
    } catch (const std::exception& e) {
      std::cerr << nlohmann::json{{"command", sub->get_name()}, {"status", "error"}, {"message", e.what()}}.dump()
                << "\n";
      return kExitValidation;
    }
  }
  return kExitUsage;
}
