#pragma once

#include "common.hpp"

namespace footseg::cli {

void register_rasterize(CLI::App& app, Registry& registry);
void register_weightmap(CLI::App& app, Registry& registry);
void register_tile(CLI::App& app, Registry& registry);
void register_split(CLI::App& app, Registry& registry);
void register_combine(CLI::App& app, Registry& registry);
void register_synth(CLI::App& app, Registry& registry);
void register_train(CLI::App& app, Registry& registry);
void register_eval(CLI::App& app, Registry& registry);
void register_sweep_beta(CLI::App& app, Registry& registry);
void register_gradcheck(CLI::App& app, Registry& registry);

}  // namespace footseg::cli
