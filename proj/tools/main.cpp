#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "scenario.hpp"

namespace cli = hydronls::cli;

namespace {

int fail(int code, const std::string& reason, const std::string& message,
         const std::filesystem::path& out_dir) {
  const nlohmann::json err{{"status", "error"}, {"exit_code", code}, {"reason", reason}, {"message", message}};
  std::cerr << err.dump() << '\n';
  std::error_code ec;
  if (std::filesystem::is_directory(out_dir, ec)) {
    std::ofstream os(out_dir / "error.json");
    if (os) os << err.dump(2) << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact self-similar solutions of the critical NLS and their numerical verification"};
  std::string command;
  std::string config_path;
  std::string out_dir = "out";
  int threads = 1;
  bool verbose = false;
  app.add_option("command", command, "profile | classify | construct | evolve | verify | sweep")
      ->required()
      ->check(CLI::IsMember(cli::commands()));
  app.add_option("--config", config_path, "scenario JSON")->required();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (sweep)")->check(CLI::Range(1, 1024))->capture_default_str();
  app.add_flag("--verbose", verbose, "progress on stderr");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(cli::config_error, "usage_error", e.what(), out_dir);
  }

  try {
    const auto cfg = cli::load_config(config_path);
    const auto result = cli::run_command(command, cfg, {out_dir, threads, verbose, &std::clog});
    nlohmann::json status = result.summary;
    status["status"] = result.exit_code == cli::ok ? "ok" : "verification_failed";
    status["exit_code"] = result.exit_code;
    std::cout << status.dump() << '\n';
    return result.exit_code;
  } catch (const std::exception& e) {
    const auto [code, reason] = cli::classify_error(e);
    return fail(code, reason, e.what(), out_dir);
  }
}
