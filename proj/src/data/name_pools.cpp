#include <fstream>

#include "relprobe/data/dataset.hpp"
#include "relprobe/error.hpp"

namespace relprobe::data {

namespace {

std::vector<std::string> read_pool(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCategory::io, "cannot open name pool " + file.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  if (names.empty()) throw Error(ErrorCategory::format, "empty name pool " + file.string());
  return names;
}

}  // namespace

NamePools load_name_pools(const std::filesystem::path& dir) {
  NamePools p;
  p.female_first = read_pool(dir / "female_first.txt");
  p.male_first = read_pool(dir / "male_first.txt");
  p.middle = read_pool(dir / "middle.txt");
  p.last = read_pool(dir / "last.txt");
  return p;
}

}  // namespace relprobe::data
