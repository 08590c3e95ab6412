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
#include "osrcnn/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "osrcnn/errors.hpp"

namespace osrcnn {
namespace {

using json = nlohmann::ordered_json;

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(where + ": malformed JSON at byte " + std::to_string(e.byte));
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw SchemaError(where + ": missing field \"" + key + "\"");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(where + ": field \"" + key + "\" has the wrong type");
  }
}

json box_json(const Box& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

Box box_from(const json& obj, const char* key, const std::string& where) {
  const auto v = get<std::vector<double>>(obj, key, where);
  if (v.size() != 4) throw SchemaError(where + ": \"" + key + "\" must have 4 numbers");
  const Box b{v[0], v[1], v[2], v[3]};
  if (!b.is_valid()) throw SchemaError(where + ": \"" + key + "\" is not a valid box");
  return b;
}

json echo_json(const ConfigEcho& echo) {
  json j = json::object();
  for (const auto& [k, v] : echo) j[k] = v;
  return j;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from(const json& root, const char* key, Eigen::Index rows,
                            Eigen::Index cols, const std::string& where) {
  const json& m = root.contains(key) ? root.at(key) : throw SchemaError(where + ": missing \"" + key + "\"");
  const auto r = get<Eigen::Index>(m, "rows", where + "." + key);
  const auto c = get<Eigen::Index>(m, "cols", where + "." + key);
  if (r != rows || c != cols) {
    throw DimensionError(where + ": " + key + " is " + std::to_string(r) + "x" +
                         std::to_string(c) + ", dims say " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  const auto data = get<std::vector<double>>(m, "data", where + "." + key);
  if (data.size() != static_cast<std::size_t>(r * c)) {
    throw DimensionError(where + ": " + key + " holds " + std::to_string(data.size()) +
                         " values, expected " + std::to_string(r * c));
  }
  Eigen::MatrixXd out(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < c; ++k) out(i, k) = data[static_cast<std::size_t>(i * c + k)];
  return out;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json class_json(const ClassReport& c) {
  json pr = json::array();
  for (const auto& s : c.pr) pr.push_back(json::array({s.recall, s.precision}));
  return {{"label", c.label},
          {"name", c.name},
          {"num_gt", c.num_gt},
          {"num_detections", c.num_detections},
          {"ap", optional_json(c.ap)},
          {"pr_samples", std::move(pr)}};
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::vector<ImageProposals> read_proposal_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path.string() + ": cannot open proposal file");
  std::vector<ImageProposals> out;
  std::string line;
  std::size_t line_no = 0;
  long feature_dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const json j = parse(line, where);
    ImageProposals img;
    img.image_id = get<std::int64_t>(j, "image_id", where);
    const auto& props = j.contains("proposals") && j["proposals"].is_array()
                            ? j["proposals"]
                            : throw SchemaError(where + ": missing \"proposals\" array");
    for (std::size_t p = 0; p < props.size(); ++p) {
      const std::string pw = where + ": proposals[" + std::to_string(p) + "]";
      ProposalRecord rec;
      rec.initial_box = box_from(props[p], "box_init", pw);
      rec.refined_box = box_from(props[p], "box_refined", pw);
      rec.centerness = get<double>(props[p], "centerness", pw);
      rec.iou_score = get<double>(props[p], "iou_score", pw);
      const auto f = get<std::vector<double>>(props[p], "feature", pw);
      if (feature_dim < 0) feature_dim = static_cast<long>(f.size());
      if (static_cast<long>(f.size()) != feature_dim) {
        throw DimensionError(pw + ": feature has dimension " + std::to_string(f.size()) +
                             ", earlier records have " + std::to_string(feature_dim));
      }
      rec.feature = Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
      img.proposals.push_back(std::move(rec));
    }
    if (j.contains("gt")) {
      for (std::size_t g = 0; g < j["gt"].size(); ++g) {
        const std::string gw = where + ": gt[" + std::to_string(g) + "]";
        img.gt.push_back({box_from(j["gt"][g], "box", gw), get<int>(j["gt"][g], "category_id", gw)});
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

void write_proposal_file(const std::filesystem::path& path,
                         const std::vector<ImageProposals>& images) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError(path.string() + ": cannot write proposal file");
  for (const auto& img : images) {
    json props = json::array();
    for (const auto& p : img.proposals) {
      props.push_back({{"box_init", box_json(p.initial_box)},
                       {"centerness", p.centerness},
                       {"box_refined", box_json(p.refined_box)},
                       {"iou_score", p.iou_score},
                       {"feature", std::vector<double>(p.feature.data(),
                                                       p.feature.data() + p.feature.size())}});
    }
    json gt = json::array();
    for (const auto& g : img.gt) gt.push_back({{"box", box_json(g.box)}, {"category_id", g.category_id}});
    const json line = {{"image_id", img.image_id}, {"proposals", std::move(props)}, {"gt", std::move(gt)}};
    out << line.dump() << '\n';
  }
}

void write_detections(const std::filesystem::path& path, const std::vector<ImageDetections>& dets,
                      const ConfigEcho& config) {
  json arr = json::array();
  for (const auto& img : dets) {
    for (const auto& d : img.detections) {
      arr.push_back({{"image_id", img.image_id},
                     {"category_id", d.label},
                     {"box", box_json(d.box)},
                     {"objectness", d.score},
                     {"class_probability", d.class_probability}});
    }
  }
  const json root = {{"format", "osrcnn-detections"},
                     {"config", echo_json(config)},
                     {"detections", std::move(arr)}};
  write_text(path, root.dump(1) + "\n");
}

std::vector<EvalDetection> read_detections(const std::filesystem::path& path) {
  const json root = parse(read_all(path), path.string());
  if (!root.is_object() || !root.contains("detections") || !root["detections"].is_array()) {
    throw SchemaError(path.string() + ": missing \"detections\" array");
  }
  std::vector<EvalDetection> out;
  const auto& arr = root["detections"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = path.string() + ": detections[" + std::to_string(i) + "]";
    out.push_back({get<std::int64_t>(arr[i], "image_id", where), box_from(arr[i], "box", where),
                   get<int>(arr[i], "category_id", where), get<double>(arr[i], "objectness", where)});
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt,
                     const ConfigEcho& echo) {
  const auto& m = ckpt.model;
  const auto d = m.dims();
  const auto& c = ckpt.config;
  json trace = json::array();
  for (const auto& t : ckpt.trace) {
    trace.push_back({{"step", t.step}, {"pln", t.pln}, {"cls", t.cls}, {"total", t.total}});
  }
  const json root = {
      {"format", "osrcnn-prototype-model"},
      {"version", kCheckpointVersion},
      {"dims",
       {{"feature_dim", d.feature_dim},
        {"embedding_dim", d.embedding_dim},
        {"remap_dim", d.remap_dim},
        {"num_classes", d.num_classes}}},
      {"margins", {{"m_p", m.margins.positive}, {"m_n", m.margins.negative}}},
      {"t_u", m.unknown_threshold},
      {"encoder_weight", matrix_json(m.encoder_weight)},
      {"encoder_bias", matrix_json(m.encoder_bias)},
      {"prototypes", matrix_json(m.prototypes)},
      {"remap_weight", matrix_json(m.remap_weight)},
      {"remap_bias", matrix_json(m.remap_bias)},
      {"classifier_weight", matrix_json(m.classifier_weight)},
      {"classifier_bias", matrix_json(m.classifier_bias)},
      {"train_config",
       {{"learning_rate", c.learning_rate},
        {"momentum", c.momentum},
        {"steps", c.steps},
        {"batch_size", c.batch_size},
        {"t_iou", c.iou_threshold},
        {"alpha", c.weights.alpha},
        {"beta", c.weights.beta},
        {"gamma", c.weights.gamma},
        {"lambda", c.weights.lambda},
        {"trace_interval", c.trace_interval},
        {"seed", c.seed}}},
      {"config", echo_json(echo)},
      {"trace", std::move(trace)}};
  write_text(path, root.dump() + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string where = path.string();
  const json root = parse(read_all(path), where);
  if (get<std::string>(root, "format", where) != "osrcnn-prototype-model") {
    throw SchemaError(where + ": not a prototype model checkpoint");
  }
  const int version = get<int>(root, "version", where);
  if (version != kCheckpointVersion) {
    throw SchemaError(where + ": unsupported checkpoint version " + std::to_string(version));
  }
  const json& dims = root.contains("dims") ? root["dims"] : throw SchemaError(where + ": missing dims");
  const auto d_f = get<Eigen::Index>(dims, "feature_dim", where);
  const auto d_z = get<Eigen::Index>(dims, "embedding_dim", where);
  const auto d_r = get<Eigen::Index>(dims, "remap_dim", where);
  const auto k = get<Eigen::Index>(dims, "num_classes", where);

  Checkpoint ck;
  auto& m = ck.model;
  m.encoder_weight = matrix_from(root, "encoder_weight", d_z, d_f, where);
  m.encoder_bias = matrix_from(root, "encoder_bias", d_z, 1, where);
  m.prototypes = matrix_from(root, "prototypes", k, d_z, where);
  m.remap_weight = matrix_from(root, "remap_weight", d_r, d_z, where);
  m.remap_bias = matrix_from(root, "remap_bias", d_r, 1, where);
  m.classifier_weight = matrix_from(root, "classifier_weight", k, d_r, where);
  m.classifier_bias = matrix_from(root, "classifier_bias", k, 1, where);
  const json& margins = root.contains("margins") ? root["margins"] : throw SchemaError(where + ": missing margins");
  m.margins = {get<double>(margins, "m_p", where), get<double>(margins, "m_n", where)};
  m.unknown_threshold = get<double>(root, "t_u", where);
  m.validate();

  if (root.contains("train_config")) {
    const json& tc = root["train_config"];
    auto& c = ck.config;
    c.learning_rate = get<double>(tc, "learning_rate", where);
    c.momentum = get<double>(tc, "momentum", where);
    c.steps = get<int>(tc, "steps", where);
    c.batch_size = get<int>(tc, "batch_size", where);
    c.iou_threshold = get<double>(tc, "t_iou", where);
    c.weights.alpha = get<double>(tc, "alpha", where);
    c.weights.beta = get<double>(tc, "beta", where);
    c.weights.gamma = get<double>(tc, "gamma", where);
    c.weights.lambda = get<std::array<double, 4>>(tc, "lambda", where);
    c.trace_interval = get<int>(tc, "trace_interval", where);
    c.seed = get<std::uint64_t>(tc, "seed", where);
    c.margins = m.margins;
    c.unknown_threshold = m.unknown_threshold;
    c.embedding_dim = static_cast<int>(d_z);
    c.remap_dim = static_cast<int>(d_r);
  }
  if (root.contains("trace")) {
    for (const auto& t : root["trace"]) {
      ck.trace.push_back({get<int>(t, "step", where), get<double>(t, "pln", where),
                          get<double>(t, "cls", where), get<double>(t, "total", where)});
    }
  }
  return ck;
}

std::vector<GroundTruth> ground_truth_from(const DatasetIndex& ds) {
  std::vector<GroundTruth> out;
  for (const auto& a : ds.annotations) {
    out.push_back({a.image_id, a.box(), static_cast<int>(a.category_id), a.difficult});
  }
  return out;
}

std::string report_json(const EvalReport& r, const ConfigEcho& config) {
  json classes = json::array();
  for (const auto& c : r.classes) classes.push_back(class_json(c));
  json wi = nullptr;
  if (r.wi) {
    wi = {{"value", r.wi->value},
          {"threshold", r.wi->threshold},
          {"closeset_recall", r.wi->closeset_recall},
          {"closeset_precision", r.wi->closeset_precision},
          {"openset_precision", r.wi->openset_precision}};
  }
  const json root = {{"format", "osrcnn-eval-report"},
                     {"config", echo_json(config)},
                     {"map_known", r.map_known},
                     {"wi", std::move(wi)},
                     {"wi_error", r.wi_error},
                     {"max_closeset_recall", r.max_closeset_recall},
                     {"aose", r.aose},
                     {"unknown_recall", optional_json(r.unknown_recall)},
                     {"unknown_ap", optional_json(r.unknown_ap)},
                     {"counts",
                      {{"images", r.num_images},
                       {"closeset_images", r.num_closeset_images},
                       {"detections", r.num_detections},
                       {"unknown_gt", r.num_unknown_gt}}},
                     {"classes", std::move(classes)},
                     {"unknown", class_json(r.unknown)}};
  return root.dump(1) + "\n";
}

std::string report_table(const EvalReport& r) {
  std::ostringstream os;
  os << pad("class", 20) << pad("gt", 8) << pad("dets", 8) << "AP\n";
  auto row = [&](const ClassReport& c) {
    os << pad(c.name, 20) << pad(std::to_string(c.num_gt), 8)
       << pad(std::to_string(c.num_detections), 8) << (c.ap ? fixed(*c.ap * 100.0, 2) : "-")
       << '\n';
  };
  for (const auto& c : r.classes) row(c);
  row(r.unknown);
  os << '\n';
  os << pad("mAP_K", 20) << fixed(r.map_known * 100.0, 2) << '\n';
  os << pad("WI", 20) << (r.wi ? fixed(r.wi->value, 4) : "n/a (" + r.wi_error + ")") << '\n';
  os << pad("AOSE", 20) << r.aose << '\n';
  os << pad("R_U", 20) << (r.unknown_recall ? fixed(*r.unknown_recall * 100.0, 2) : "-") << '\n';
  os << pad("AP_U", 20) << (r.unknown_ap ? fixed(*r.unknown_ap * 100.0, 2) : "-") << '\n';
  return os.str();
}

std::string pr_curves_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "class,label,recall,precision\n";
  auto rows = [&](const ClassReport& c) {
    for (const auto& s : c.pr) {
      os << c.name << ',' << c.label << ',' << fixed(s.recall, 6) << ',' << fixed(s.precision, 6)
         << '\n';
    }
  };
  for (const auto& c : r.classes) rows(c);
  rows(r.unknown);
  return os.str();
}

std::string manifest_json(const SplitSpec& split, const DatasetIndex& ds,
                          const std::string& source_path, const std::string& source_hash,
                          const ConfigEcho& config) {
  auto name_of = [&](std::int64_t id) {
    const Category* c = ds.find_category(id);
    return c ? c->name : std::string();
  };
  json known = json::array();
  for (std::size_t k = 0; k < split.known_categories.size(); ++k) {
    known.push_back({{"id", split.known_categories[k]},
                     {"name", name_of(split.known_categories[k])},
                     {"label", k}});
  }
  json unknown = json::array();
  for (auto id : split.unknown_categories) unknown.push_back({{"id", id}, {"name", name_of(id)}});
  json label_map = json::array();
  for (const auto& [id, label] : split.label_map) label_map.push_back(json::array({id, label}));
  json settings = json::array();
  for (const auto& s : split.settings) {
    json js = {{"name", s.name},
               {"kind", s.kind == SettingKind::kClassSweep ? "class_sweep" : "wilderness_sweep"}};
    if (s.kind == SettingKind::kClassSweep) {
      js["unknown_classes"] = s.unknown_classes;
    } else {
      js["target_ratio"] = s.target_ratio;
    }
    js["wilderness_ratio"] = s.closeset_images.empty() ? 0.0 : wilderness_ratio(s);
    js["closeset_images"] = s.closeset_images;
    js["openset_images"] = s.openset_images;
    settings.push_back(std::move(js));
  }
  const json root = {{"format", "osrcnn-split-manifest"},
                     {"version", 1},
                     {"source", {{"path", source_path}, {"fnv1a64", source_hash}}},
                     {"config", echo_json(config)},
                     {"known_categories", std::move(known)},
                     {"unknown_categories", std::move(unknown)},
                     {"label_map", std::move(label_map)},
                     {"train_images", split.train_images},
                     {"closeset_images", split.closeset_images},
                     {"settings", std::move(settings)}};
  return root.dump(1) + "\n";
}

std::string fnv1a64_file(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError(path.string() + ": cannot write file");
  out << text;
}

}  // namespace osrcnn
