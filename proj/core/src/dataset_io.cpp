#include "advkit/dataset_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fs = std::filesystem;

namespace advkit {

Tensor read_png(const fs::path& path) {
  png_image im{};
  im.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&im, path.c_str()))
    throw std::runtime_error("failed to open PNG: " + path.string());
  im.format = PNG_FORMAT_RGB;
  std::vector<uint8_t> buf(PNG_IMAGE_SIZE(im));
  if (!png_image_finish_read(&im, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&im);
    throw std::runtime_error("failed to decode PNG: " + path.string());
  }
  Tensor out(static_cast<int>(im.height), static_cast<int>(im.width), 3);
  for (size_t i = 0; i < out.size(); ++i) out[i] = buf[i];
  return out;
}

void write_png(const fs::path& path, const Tensor& image) {
  if (image.channels() != 3 && image.channels() != 1)
    throw std::invalid_argument("write_png: need 1 or 3 channels");
  png_image im{};
  im.version = PNG_IMAGE_VERSION;
  im.width = image.width();
  im.height = image.height();
  im.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<uint8_t> buf(image.size());
  for (size_t i = 0; i < image.size(); ++i)
    buf[i] = static_cast<uint8_t>(std::lround(std::clamp(image[i], 0.0, 255.0)));
  fs::path tmp = path;
  tmp += ".tmp";
  if (!png_image_write_to_file(&im, tmp.c_str(), 0, buf.data(), 0, nullptr))
    throw std::runtime_error("failed to write PNG: " + path.string());
  fs::rename(tmp, path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
      field.pop_back();
    out.push_back(field);
  }
  return out;
}

Label label_map_from_png(const Tensor& gray, int n_classes) {
  std::vector<int> map(static_cast<size_t>(gray.height()) * gray.width());
  std::vector<uint8_t> valid(map.size(), 1);
  for (int r = 0; r < gray.height(); ++r)
    for (int c = 0; c < gray.width(); ++c) {
      size_t i = static_cast<size_t>(r) * gray.width() + c;
      int v = static_cast<int>(std::lround(gray.at(r, c, 0)));
      if (v >= n_classes) {
        valid[i] = 0;
        map[i] = 0;
      } else {
        map[i] = v;
      }
    }
  return Label::of_map(std::move(map), std::move(valid), gray.height(),
                       gray.width());
}

}  // namespace

Dataset load_dataset(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("manifest not found: " + manifest_path.string());

  fs::path base = manifest_path.parent_path();
  fs::path sidecar = base / "classes.json";
  std::ifstream side(sidecar);
  if (!side)
    throw std::runtime_error("class-map sidecar not found: " + sidecar.string());
  nlohmann::json meta = nlohmann::json::parse(side);

  Dataset ds;
  ds.class_names = meta.at("class_names").get<std::vector<std::string>>();
  std::string task = meta.value("task", "classification");
  ds.task = task == "segmentation" ? Task::kSegmentation : Task::kClassification;
  if (!std::is_sorted(ds.class_names.begin(), ds.class_names.end()))
    std::sort(ds.class_names.begin(), ds.class_names.end());

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("manifest empty: " + manifest_path.string());
  std::vector<std::string> header = split_csv_line(line);
  bool seg_header = header.size() == 2 && header[0] == "image" && header[1] == "labelmap";
  bool cls_header = header.size() == 2 && header[0] == "path" && header[1] == "label";
  if (!seg_header && !cls_header)
    throw std::runtime_error("manifest header must be 'path,label' or 'image,labelmap'");
  if (seg_header != (ds.task == Task::kSegmentation))
    throw std::runtime_error("manifest header does not match sidecar task");

  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 2)
      throw std::runtime_error("manifest row " + std::to_string(row) +
                               ": expected 2 fields");
    Sample s;
    fs::path img_path = base / fields[0];
    if (!fs::exists(img_path))
      throw std::runtime_error("manifest row " + std::to_string(row) +
                               ": missing file " + img_path.string());
    s.image = read_png(img_path);
    s.name = fs::path(fields[0]).stem().string();
    if (ds.task == Task::kClassification) {
      auto it = std::find(ds.class_names.begin(), ds.class_names.end(), fields[1]);
      if (it == ds.class_names.end())
        throw std::runtime_error("manifest row " + std::to_string(row) +
                                 ": unknown class '" + fields[1] + "'");
      s.label = Label::of_class(
          static_cast<int>(std::distance(ds.class_names.begin(), it)));
    } else {
      fs::path map_path = base / fields[1];
      if (!fs::exists(map_path))
        throw std::runtime_error("manifest row " + std::to_string(row) +
                                 ": missing label map " + map_path.string());
      s.label = label_map_from_png(read_png(map_path), ds.num_classes());
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

namespace {

Tensor label_map_to_gray(const Label& label) {
  Tensor gray(label.map_h, label.map_w, 1);
  for (size_t i = 0; i < label.map.size(); ++i)
    gray[i] = label.valid[i] ? label.map[i] : 255.0;
  return gray;
}

void write_classes_json(const Dataset& dataset, const fs::path& path) {
  nlohmann::json meta{
      {"task", dataset.task == Task::kSegmentation ? "segmentation"
                                                   : "classification"},
      {"class_names", dataset.class_names},
      {"pixel_range", {0, 255}}};
  std::ofstream out(path);
  out << meta.dump(2) << '\n';
}

}  // namespace

void save_dataset(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir / "images");
  if (dataset.task == Task::kSegmentation) fs::create_directories(dir / "labels");

  std::ofstream manifest(dir / "manifest.csv");
  manifest << (dataset.task == Task::kSegmentation ? "image,labelmap"
                                                   : "path,label")
           << '\n';
  for (const Sample& s : dataset.samples) {
    std::string file = s.name + ".png";
    write_png(dir / "images" / file, s.image);
    if (dataset.task == Task::kClassification) {
      manifest << "images/" << file << ',' << dataset.class_names[s.label.class_id]
               << '\n';
    } else {
      write_png(dir / "labels" / file, label_map_to_gray(s.label));
      manifest << "images/" << file << ",labels/" << file << '\n';
    }
  }
  write_classes_json(dataset, dir / "classes.json");
}

namespace {

std::vector<int> tile_starts(int dim, int tile, int overlap) {
  if (tile >= dim) return {0};
  std::vector<int> starts;
  int step = tile - overlap;
  for (int s = 0; s + tile < dim; s += step) starts.push_back(s);
  starts.push_back(dim - tile);  // flush to the far edge
  return starts;
}

}  // namespace

std::vector<Tensor> tile_image(const Tensor& image, int tile, int overlap,
                               TileGeometry& geometry) {
  if (tile <= overlap || overlap < 0)
    throw std::invalid_argument("tile_image: need tile > overlap >= 0");
  geometry = TileGeometry{image.height(), image.width(), tile, overlap, {}};
  int th = std::min(tile, image.height());
  int tw = std::min(tile, image.width());
  std::vector<Tensor> tiles;
  for (int r : tile_starts(image.height(), th, overlap))
    for (int c : tile_starts(image.width(), tw, overlap)) {
      Tensor t(th, tw, image.channels());
      for (int rr = 0; rr < th; ++rr)
        for (int cc = 0; cc < tw; ++cc)
          for (int k = 0; k < image.channels(); ++k)
            t.at(rr, cc, k) = image.at(r + rr, c + cc, k);
      tiles.push_back(std::move(t));
      geometry.placements.push_back({r, c});
    }
  return tiles;
}

Tensor reassemble(const std::vector<Tensor>& tiles, const TileGeometry& geometry) {
  if (tiles.size() != geometry.placements.size() || tiles.empty())
    throw std::invalid_argument("reassemble: geometry mismatch");
  int channels = tiles[0].channels();
  Tensor sum(geometry.image_h, geometry.image_w, channels);
  Tensor count(geometry.image_h, geometry.image_w, 1);
  for (size_t i = 0; i < tiles.size(); ++i) {
    const Tensor& t = tiles[i];
    const TilePlacement& p = geometry.placements[i];
    if (p.row + t.height() > geometry.image_h || p.col + t.width() > geometry.image_w)
      throw std::invalid_argument("reassemble: tile out of bounds");
    for (int r = 0; r < t.height(); ++r)
      for (int c = 0; c < t.width(); ++c) {
        count.at(p.row + r, p.col + c, 0) += 1.0;
        for (int k = 0; k < channels; ++k)
          sum.at(p.row + r, p.col + c, k) += t.at(r, c, k);
      }
  }
  for (int r = 0; r < sum.height(); ++r)
    for (int c = 0; c < sum.width(); ++c) {
      double n = count.at(r, c, 0);
      if (n == 0.0) throw std::invalid_argument("reassemble: uncovered pixel");
      for (int k = 0; k < channels; ++k) sum.at(r, c, k) /= n;
    }
  return sum;
}

std::string attack_config_to_json(const AttackConfig& config) {
  nlohmann::json j{{"method", to_string(config.method)},
                   {"epsilon", config.epsilon},
                   {"alpha", config.alpha},
                   {"iterations", config.iterations},
                   {"beta", config.beta},
                   {"n_mix", config.n_mix},
                   {"momentum", config.momentum},
                   {"scale_augment", config.scale_augment},
                   {"scale_copies", config.scale_copies},
                   {"mu", config.mu},
                   {"seed", config.seed}};
  return j.dump(2);
}

AttackConfig attack_config_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  AttackConfig c;
  c.method = attack_method_from_string(j.at("method").get<std::string>());
  c.epsilon = j.at("epsilon").get<double>();
  c.alpha = j.at("alpha").get<double>();
  c.iterations = j.at("iterations").get<int>();
  c.beta = j.at("beta").get<double>();
  c.n_mix = j.at("n_mix").get<int>();
  c.momentum = j.at("momentum").get<bool>();
  c.scale_augment = j.at("scale_augment").get<bool>();
  c.scale_copies = j.at("scale_copies").get<int>();
  c.mu = j.at("mu").get<double>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

ExportBundle export_adversarial_set(const std::vector<AttackResult>& results,
                                    const fs::path& out_dir,
                                    const Dataset& dataset) {
  if (results.size() != dataset.samples.size())
    throw std::invalid_argument("export: result/manifest count mismatch");

  std::vector<fs::path> written;
  auto cleanup = [&] {
    for (const fs::path& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  };

  try {
    fs::create_directories(out_dir / "images");
    if (dataset.task == Task::kSegmentation)
      fs::create_directories(out_dir / "labels");

    ExportBundle bundle;
    bundle.dir = out_dir;

    std::ostringstream manifest, delta_log;
    manifest << (dataset.task == Task::kSegmentation ? "image,labelmap"
                                                     : "path,label")
             << '\n';
    delta_log << "name,delta_linf\n";

    for (size_t i = 0; i < results.size(); ++i) {
      const Sample& s = dataset.samples[i];
      std::string file = s.name + ".png";
      const Tensor& img =
          results[i].failed ? s.image : results[i].adversarial;
      fs::path img_path = out_dir / "images" / file;
      write_png(img_path, img);
      written.push_back(img_path);
      double delta = results[i].failed ? 0.0 : linf_norm(results[i].perturbation);
      delta_log << s.name << ',' << delta << '\n';
      bundle.entries.push_back({s.name, delta});
      if (dataset.task == Task::kClassification) {
        manifest << "images/" << file << ','
                 << dataset.class_names[s.label.class_id] << '\n';
      } else {
        fs::path map_path = out_dir / "labels" / file;
        write_png(map_path, label_map_to_gray(s.label));
        written.push_back(map_path);
        manifest << "images/" << file << ",labels/" << file << '\n';
      }
    }

    auto write_text = [&](const fs::path& p, const std::string& text) {
      fs::path tmp = p;
      tmp += ".tmp";
      {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write " + p.string());
        out << text;
      }
      fs::rename(tmp, p);
      written.push_back(p);
    };

    write_text(out_dir / "manifest.csv", manifest.str());
    write_text(out_dir / "delta_log.csv", delta_log.str());
    if (!results.empty())
      write_text(out_dir / "attack_config.json",
                 attack_config_to_json(results[0].config) + "\n");
    write_classes_json(dataset, out_dir / "classes.json");
    written.push_back(out_dir / "classes.json");
    return bundle;
  } catch (...) {
    cleanup();
    throw;
  }
}

}  // namespace advkit
