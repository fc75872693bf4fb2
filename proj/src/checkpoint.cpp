#include "xtnet/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace xtnet {

void save_checkpoint(const std::string& path, const std::string& config_json,
                     const std::vector<ad::Parameter*>& params) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["config"] = config_json.empty() ? nlohmann::json(nullptr)
                                    : nlohmann::json::parse(config_json);
  auto& tensors = j["tensors"];
  for (const ad::Parameter* p : params) {
    if (tensors.contains(p->name))
      throw std::invalid_argument("save_checkpoint: duplicate parameter name " +
                                  p->name);
    tensors[p->name] = {{"rows", p->value.rows},
                        {"cols", p->value.cols},
                        {"data", p->value.data}};
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump();
}

std::string load_checkpoint(const std::string& path,
                            const std::vector<ad::Parameter*>& params) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("format_version", -1) != 1)
    throw std::runtime_error("load_checkpoint: unsupported format version in " +
                             path);
  const auto& tensors = j.at("tensors");
  for (ad::Parameter* p : params) {
    if (!tensors.contains(p->name))
      throw std::runtime_error("load_checkpoint: missing tensor " + p->name);
    const auto& t = tensors.at(p->name);
    if (t.at("rows") != p->value.rows || t.at("cols") != p->value.cols)
      throw std::runtime_error("load_checkpoint: shape mismatch for " + p->name);
    t.at("data").get_to(p->value.data);
    if (p->value.data.size() != p->value.rows * p->value.cols)
      throw std::runtime_error("load_checkpoint: bad data length for " + p->name);
  }
  return j.at("config").is_null() ? std::string() : j.at("config").dump();
}

}  // namespace xtnet
