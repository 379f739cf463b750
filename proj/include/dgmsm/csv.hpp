#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dgmsm/errors.hpp"

namespace dgmsm {

/// Opens `path` for writing with 17 significant digits; each line of
/// `comment` becomes a "# " line ahead of the header.
inline std::ofstream open_csv(const std::filesystem::path& path, const std::string& comment,
                              const std::string& header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.precision(17);
  std::istringstream lines(comment);
  for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  out << header << '\n';
  return out;
}

}  // namespace dgmsm
