#pragma once

#include <filesystem>
#include <memory>

#include "advkit/toy_models.hpp"

namespace advkit {

// Versioned flat binary: magic, version, model kind, architecture
// header (widths, class count), then raw little-endian doubles.
void save_model(const std::filesystem::path& path, const ToyClassifier& model);
void save_model(const std::filesystem::path& path, const ToySegmenter& model);

std::shared_ptr<Model> load_model(const std::filesystem::path& path);

}  // namespace advkit
