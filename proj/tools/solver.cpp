#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "thermistor/config.hpp"
#include "thermistor/driver.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Finite element solver for the nonlocal parabolic thermistor problem"};
    std::string config_path;
    std::string output_dir;
    int threads = 1;
    std::string log_level = "info";
    app.add_option("config", config_path, "Run configuration file")->required();
    app.add_option("--output-dir", output_dir, "Output directory (overrides output.dir)");
    app.add_option("--threads", threads, "Worker threads for EOC studies")->check(CLI::PositiveNumber);
    app.add_option("--log-level", log_level, "info or debug")->check(CLI::IsMember({"info", "debug"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : thermistor::kExitConfigError;
    }

    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot read " << config_path << '\n';
        return thermistor::kExitConfigError;
    }
    std::ostringstream text;
    text << in.rdbuf();

    const auto parsed = thermistor::parse_config(text.str());
    if (!parsed.ok()) {
        std::cerr << config_path << ": invalid configuration\n" << parsed.error_text();
        return thermistor::kExitConfigError;
    }

    thermistor::ExecuteOptions opts;
    if (!output_dir.empty()) opts.output_dir = output_dir;
    opts.threads = threads;
    opts.log_level = log_level == "debug" ? thermistor::LogLevel::Debug : thermistor::LogLevel::Info;
    opts.echo = true;
    return thermistor::execute(*parsed.config, opts);
}
