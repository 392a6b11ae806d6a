// h2lab <subcommand> --config <file.json> --out <dir> [--seed N] [--workers N]
//
// Exit codes: 0 ok, 1 internal error, 2 config error, 3 budget exceeded.
#include "h2lab/experiments.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

int run(const std::string& command, const std::string& config_path, const std::string& out_dir,
        std::optional<std::uint64_t> seed, std::optional<int> workers) {
    std::string text;
    std::string base = ".";
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw h2lab::ConfigError("cannot open config file " + config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
        base = fs::path(config_path).parent_path().string();
        if (base.empty()) base = ".";
    }
    h2lab::ExperimentConfig cfg = h2lab::parse_config(command, text);
    cfg.base_dir = base;
    if (seed) cfg.seed = *seed;
    if (workers) {
        if (*workers < 1) throw h2lab::ConfigError("--workers must be >= 1");
        cfg.workers = *workers;
    }
    auto files = h2lab::run_experiment(cfg);
    fs::create_directories(out_dir);
    for (const auto& f : files) {
        std::ofstream out(fs::path(out_dir) / f.name, std::ios::binary);
        out << f.content;
        if (!out) throw std::runtime_error("cannot write " + (fs::path(out_dir) / f.name).string());
        std::cout << (fs::path(out_dir) / f.name).string() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"h2lab: experiments on pairs of lattices, splittings and H(2) surfaces"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    for (const auto& name : h2lab::kCommands) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "JSON settings file")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "seed (overrides the config)");
        sub->add_option("--workers", workers, "worker threads (overrides the config)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, config_path, out_dir, seed, workers);
    } catch (const h2lab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const h2lab::BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return kExitBudget;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
