#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "advkit/model.hpp"

namespace advkit {

// One registry row: architecture name, weight file, tap layer, input
// spec. Registry files are whitespace-separated columns
//   id arch weights tap h w c
// with '#' comments; weights "-" means fresh seeded init.
struct RegistryEntry {
  std::string arch;
  std::string weights;
  std::string tap = "pool1";
  InputSpec input;
};

class ModelRegistry {
 public:
  ModelRegistry() = default;
  static ModelRegistry load(const std::filesystem::path& path);

  void add(const std::string& id, RegistryEntry entry);

  // Resolves an id to a model. Builtin ids work without a registry:
  //   toy:cls:<seed>[:<width>[:<classes>]]
  //   toy:seg:<seed>[:<width>[:<classes>]]
  //   file:<path>          (serialized weights)
  std::shared_ptr<Model> resolve(const std::string& id) const;

  bool contains(const std::string& id) const { return entries_.count(id) > 0; }

 private:
  std::map<std::string, RegistryEntry> entries_;
  std::filesystem::path base_;
};

// Resolves against the registry named by the ADVKIT_MODEL_REGISTRY
// environment variable when set, else builtin ids only.
std::shared_ptr<Model> resolve_model(const std::string& id);

}  // namespace advkit
