// Experiment runner: `run`, `emit-config`, `validate`.
// Exit codes: 0 success, 1 config error, 2 runtime or solver error.
#include "adjopt/app/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace adjopt;

namespace {

app::Experiment load(const std::string& path)
{
    return app::build_experiment(app::Config::load(path));
}

int config_error(const std::exception& e)
{
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App cli{"adjoint-based optimization experiments for heat and 2D LES problems"};
    cli.require_subcommand(1);

    std::string run_path, validate_path, kind_name;
    auto* run = cli.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", run_path, "config file")->required();
    auto* emit = cli.add_subcommand("emit-config", "print a runnable config with built-in defaults");
    emit->add_option("kind", kind_name, "experiment kind")->required();
    auto* validate = cli.add_subcommand("validate", "parse and check a config without running it");
    validate->add_option("config", validate_path, "config file")->required();

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = cli.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (*emit) {
        try {
            std::cout << app::emit_config(app::parse_kind(kind_name));
        } catch (const std::exception& e) {
            return config_error(e);
        }
        return 0;
    }

    const std::string& path = *run ? run_path : validate_path;
    app::Experiment exp;
    try {
        exp = load(path);
    } catch (const InvalidInput& e) {
        return config_error(e);
    }
    if (*validate) {
        std::printf("ok: %s\n", app::kind_info(exp.kind).name);
        return 0;
    }

    try {
        const auto s = app::run_experiment(exp);
        std::printf("%s done in %.1f s, artifacts in %s\n", app::kind_info(exp.kind).name, s.wall_seconds,
                    exp.output_dir.c_str());
        if (app::is_opt(exp.kind))
            std::printf("J/J0 = %.6g  constraint ratio = %.12g  iterations = %zu (%s)\n", s.J_final / s.J0,
                        s.C_final / s.C0, s.iterations, s.stop_reason.c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 2;
    }
    return 0;
}
