#include "koopkern/cli/experiment.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>

namespace koopkern::cli {

namespace fs = std::filesystem;

namespace {

std::string write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << content;
  out.close();
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
  return path.string();
}

}  // namespace

std::vector<std::string> write_report(const Report& r) {
  const fs::path dir = r.config.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));

  const std::string& name = r.config.name;
  std::vector<std::string> written;
  for (const auto& t : r.tables)
    written.push_back(write_file(dir / fmt::format("{}_{}.csv", name, t.artifact), render_csv(t)));
  written.push_back(write_file(dir / fmt::format("{}_metrics.txt", name), render_metrics(r.metrics)));
  written.push_back(write_file(dir / fmt::format("{}_config.ini", name), to_ini(r.config)));
  return written;
}

}  // namespace koopkern::cli
