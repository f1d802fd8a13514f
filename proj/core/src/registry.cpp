#include "advkit/registry.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "advkit/serialize.hpp"
#include "advkit/toy_models.hpp"

namespace fs = std::filesystem;

namespace advkit {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

std::shared_ptr<Model> resolve_builtin(const std::string& id) {
  std::vector<std::string> parts = split(id, ':');
  if (parts.size() >= 2 && parts[0] == "file")
    return load_model(id.substr(5));
  if (parts.size() < 3 || parts[0] != "toy") return nullptr;
  uint64_t seed = std::stoull(parts[2]);
  int width = parts.size() > 3 ? std::stoi(parts[3]) : 8;
  if (parts[1] == "cls") {
    int n_classes = parts.size() > 4 ? std::stoi(parts[4]) : 4;
    return make_toy_classifier(seed, width, n_classes);
  }
  if (parts[1] == "seg") {
    int n_classes = parts.size() > 4 ? std::stoi(parts[4]) : 6;
    return make_toy_segmenter(seed, width, n_classes);
  }
  return nullptr;
}

}  // namespace

ModelRegistry ModelRegistry::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("registry not found: " + path.string());
  ModelRegistry reg;
  reg.base_ = path.parent_path();
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string id;
    if (!(ss >> id)) continue;
    RegistryEntry e;
    if (!(ss >> e.arch >> e.weights >> e.tap >> e.input.height >> e.input.width >>
          e.input.channels))
      throw std::runtime_error("registry row " + std::to_string(row) +
                               ": expected 7 columns");
    reg.entries_[id] = std::move(e);
  }
  return reg;
}

void ModelRegistry::add(const std::string& id, RegistryEntry entry) {
  entries_[id] = std::move(entry);
}

std::shared_ptr<Model> ModelRegistry::resolve(const std::string& id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) {
    if (auto m = resolve_builtin(id)) return m;
    throw std::runtime_error("unknown model id: " + id);
  }
  const RegistryEntry& e = it->second;
  if (e.weights != "-") {
    fs::path p = e.weights;
    if (p.is_relative()) p = base_ / p;
    return load_model(p);
  }
  // fresh seeded builtin arch
  if (auto m = resolve_builtin(e.arch)) return m;
  throw std::runtime_error("registry model '" + id + "': unknown arch " + e.arch);
}

std::shared_ptr<Model> resolve_model(const std::string& id) {
  if (const char* reg_path = std::getenv("ADVKIT_MODEL_REGISTRY"))
    return ModelRegistry::load(reg_path).resolve(id);
  if (auto m = resolve_builtin(id)) return m;
  throw std::runtime_error("unknown model id: " + id);
}

}  // namespace advkit
