#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "advkit/attack.hpp"
#include "advkit/dataset.hpp"
#include "advkit/tensor.hpp"

namespace advkit {

// 8-bit PNG decode to [0, 255] doubles (RGB; grayscale expands).
Tensor read_png(const std::filesystem::path& path);

// Rounds to 8 bits and writes RGB (or grayscale for 1-channel) PNG.
// Writes to a temp file first and renames into place.
void write_png(const std::filesystem::path& path, const Tensor& image);

// Manifest CSV with header `path,label` (classification) or
// `image,labelmap` (segmentation) plus a classes.json sidecar next to
// it. Label-map pixels >= n_v are treated as background and masked out.
Dataset load_dataset(const std::filesystem::path& manifest_path);

// Writes images, label maps, manifest.csv, and classes.json under dir.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

struct TilePlacement {
  int row = 0;
  int col = 0;
};

struct TileGeometry {
  int image_h = 0, image_w = 0;
  int tile = 0, overlap = 0;
  std::vector<TilePlacement> placements;
};

// Covers the image with tile x tile patches stepping tile - overlap;
// edge tiles are shifted flush to the border. A tile larger than the
// image degrades to one full-image tile.
std::vector<Tensor> tile_image(const Tensor& image, int tile, int overlap,
                               TileGeometry& geometry);

// Mosaic with overlap regions averaged; exact inverse of tile_image for
// untouched tiles.
Tensor reassemble(const std::vector<Tensor>& tiles, const TileGeometry& geometry);

struct ExportEntry {
  std::string name;
  double delta_linf = 0.0;
};

struct ExportBundle {
  std::filesystem::path dir;
  std::vector<ExportEntry> entries;
};

// UAE-style bundle: images/ (8-bit PNG, one per input with the same
// name), manifest.csv, classes.json, attack_config.json, delta_log.csv.
// Partial outputs are removed on failure.
ExportBundle export_adversarial_set(const std::vector<AttackResult>& results,
                                    const std::filesystem::path& out_dir,
                                    const Dataset& dataset);

std::string attack_config_to_json(const AttackConfig& config);
AttackConfig attack_config_from_json(const std::string& text);

}  // namespace advkit
