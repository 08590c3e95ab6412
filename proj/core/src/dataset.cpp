/* Copyright 2026 The osrcnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "osrcnn/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "osrcnn/errors.hpp"

namespace osrcnn {
namespace {

using json = nlohmann::ordered_json;

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw SchemaError(where + ": missing field \"" + key + "\"");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(where + ": field \"" + key + "\" has the wrong type (" + e.what() + ")");
  }
}

const json& array_field(const json& root, const char* key, const std::string& source) {
  if (!root.contains(key) || !root.at(key).is_array()) {
    throw SchemaError(source + ": top-level \"" + key + "\" array is missing");
  }
  return root.at(key);
}

}  // namespace

void DatasetIndex::reindex() {
  std::set<std::int64_t> image_ids;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!image_ids.insert(images[i].id).second) {
      throw SchemaError("images[" + std::to_string(i) + "]: duplicate image id " +
                        std::to_string(images[i].id));
    }
  }
  std::set<std::int64_t> category_ids;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (!category_ids.insert(categories[i].id).second) {
      throw SchemaError("categories[" + std::to_string(i) + "]: duplicate category id " +
                        std::to_string(categories[i].id));
    }
  }
  std::set<std::int64_t> ann_ids;
  annotations_by_image.clear();
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& a = annotations[i];
    const std::string where =
        "annotations[" + std::to_string(i) + "] (id " + std::to_string(a.id) + ")";
    if (!ann_ids.insert(a.id).second) throw SchemaError(where + ": duplicate annotation id");
    if (!image_ids.count(a.image_id)) {
      throw SchemaError(where + ": image_id " + std::to_string(a.image_id) + " does not exist");
    }
    if (a.category_id != -1 && !category_ids.count(a.category_id)) {
      throw SchemaError(where + ": category_id " + std::to_string(a.category_id) +
                        " does not exist");
    }
    if (!a.box().is_valid()) throw SchemaError(where + ": bbox has negative size");
    annotations_by_image[a.image_id].push_back(i);
  }
}

const Category* DatasetIndex::find_category(std::int64_t id) const {
  for (const auto& c : categories)
    if (c.id == id) return &c;
  return nullptr;
}

bool DatasetIndex::has_image(std::int64_t id) const {
  for (const auto& im : images)
    if (im.id == id) return true;
  return false;
}

DatasetIndex parse_annotations(std::string_view text, const std::string& source) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SchemaError(source + ": malformed JSON at byte " + std::to_string(e.byte) + ": " +
                      e.what());
  }
  if (!root.is_object()) throw SchemaError(source + ": top level must be an object");

  DatasetIndex ds;
  const auto& images = array_field(root, "images", source);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string where = source + ": images[" + std::to_string(i) + "]";
    ds.images.push_back({field<std::int64_t>(images[i], "id", where),
                         field<int>(images[i], "width", where),
                         field<int>(images[i], "height", where),
                         field<std::string>(images[i], "file_name", where)});
  }
  const auto& cats = array_field(root, "categories", source);
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const std::string where = source + ": categories[" + std::to_string(i) + "]";
    ds.categories.push_back(
        {field<std::int64_t>(cats[i], "id", where), field<std::string>(cats[i], "name", where)});
  }
  const auto& anns = array_field(root, "annotations", source);
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const std::string where = source + ": annotations[" + std::to_string(i) + "]";
    Annotation a;
    a.id = field<std::int64_t>(anns[i], "id", where);
    a.image_id = field<std::int64_t>(anns[i], "image_id", where);
    a.category_id = field<std::int64_t>(anns[i], "category_id", where);
    const auto bbox = field<std::vector<double>>(anns[i], "bbox", where);
    if (bbox.size() != 4) throw SchemaError(where + ": bbox must have 4 numbers");
    std::copy(bbox.begin(), bbox.end(), a.bbox.begin());
    if (anns[i].contains("difficult")) a.difficult = field<bool>(anns[i], "difficult", where);
    ds.annotations.push_back(a);
  }
  try {
    ds.reindex();
  } catch (const SchemaError& e) {
    throw SchemaError(source + ": " + e.what());
  }
  return ds;
}

DatasetIndex load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path.string() + ": cannot open annotation file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_annotations(buf.str(), path.string());
}

std::string dump_annotations(const DatasetIndex& ds) {
  json root;
  root["images"] = json::array();
  for (const auto& im : ds.images) {
    root["images"].push_back(
        {{"id", im.id}, {"width", im.width}, {"height", im.height}, {"file_name", im.file_name}});
  }
  root["annotations"] = json::array();
  for (const auto& a : ds.annotations) {
    json j = {{"id", a.id},
              {"image_id", a.image_id},
              {"category_id", a.category_id},
              {"bbox", a.bbox}};
    if (a.difficult) j["difficult"] = true;
    root["annotations"].push_back(std::move(j));
  }
  root["categories"] = json::array();
  for (const auto& c : ds.categories) root["categories"].push_back({{"id", c.id}, {"name", c.name}});
  return root.dump(1) + "\n";
}

void save_annotations(const DatasetIndex& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError(path.string() + ": cannot write annotation file");
  out << dump_annotations(ds);
}

}  // namespace osrcnn
