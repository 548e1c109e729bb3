#include "pchoice/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace pchoice {

using nlohmann::json;

std::string format_double(double value) {
  std::array<char, 64> buffer;
  auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char byte : bytes) {
    hash ^= byte;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

namespace {

std::string to_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

}  // namespace

std::string dataset_fingerprint(const Dataset& data) {
  return to_hex(fnv1a64(serialize_dataset(data)));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw DataFormatError("cannot open '" + tmp.string() + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw DataFormatError("short write to '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string serialize_dataset(const Dataset& data) {
  std::string out;
  json header;
  header["format"] = kDatasetFormatTag;
  header["version"] = kDatasetFormatVersion;
  header["problem"] = data.meta.problem;
  header["seed"] = data.meta.seed;
  header["m"] = data.samples.empty() ? 0 : static_cast<int>(data.samples.front().task.size());
  header["d"] = data.meta.feature_dim;
  header["tasks"] = data.samples.size();
  header["total_objects"] = data.meta.total_objects;
  header["total_chosen"] = data.meta.total_chosen;
  out += header.dump();
  out += '\n';
  for (const auto& sample : data.samples) {
    json line;
    line["task_id"] = sample.task.task_id;
    json features = json::array();
    for (Eigen::Index i = 0; i < sample.task.size(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < sample.task.feature_dim(); ++j) {
        row.push_back(sample.task.features(i, j));
      }
      features.push_back(std::move(row));
    }
    line["features"] = std::move(features);
    json choice = json::array();
    for (auto bit : sample.choice) choice.push_back(static_cast<int>(bit));
    line["choice"] = std::move(choice);
    out += line.dump();
    out += '\n';
  }
  return out;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  write_file_atomic(path, serialize_dataset(data));
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataFormatError("cannot open dataset '" + path.string() + "'");
  }
  std::string line;
  int line_no = 0;
  auto parse_line = [&](const std::string& text) {
    json parsed = json::parse(text, nullptr, false);
    if (parsed.is_discarded()) {
      throw DataFormatError("dataset '" + path.string() + "' line " + std::to_string(line_no) +
                            ": invalid JSON");
    }
    return parsed;
  };

  if (!std::getline(in, line)) {
    throw DataFormatError("dataset '" + path.string() + "' is empty");
  }
  ++line_no;
  const json header = parse_line(line);
  if (!header.contains("format") || header["format"] != kDatasetFormatTag) {
    throw DataFormatError("dataset '" + path.string() + "': missing or wrong format tag");
  }
  if (!header.contains("version") || header["version"] != kDatasetFormatVersion) {
    throw DataFormatError("dataset '" + path.string() + "': unsupported version");
  }

  Dataset data;
  data.meta.problem = header.value("problem", std::string{});
  data.meta.seed = header.value("seed", std::uint64_t{0});
  data.meta.feature_dim = header.value("d", 0);
  const int expected_m = header.value("m", 0);

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json parsed = parse_line(line);
    const char* complaint = nullptr;
    Sample sample;
    try {
      sample.task.task_id = parsed.at("task_id").get<std::string>();
      const auto& features = parsed.at("features");
      const auto rows = features.size();
      if (rows == 0) {
        complaint = "task has no objects";
      } else {
        const auto cols = features.at(0).size();
        sample.task.features.resize(static_cast<Eigen::Index>(rows),
                                    static_cast<Eigen::Index>(cols));
        for (std::size_t i = 0; i < rows && !complaint; ++i) {
          if (features.at(i).size() != cols) {
            complaint = "ragged feature rows";
            break;
          }
          for (std::size_t j = 0; j < cols; ++j) {
            sample.task.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                features.at(i).at(j).get<double>();
          }
        }
        const auto& choice = parsed.at("choice");
        if (!complaint && choice.size() != rows) {
          complaint = "choice length differs from object count";
        }
        if (!complaint) {
          sample.choice.resize(rows);
          for (std::size_t i = 0; i < rows; ++i) {
            const int bit = choice.at(i).get<int>();
            if (bit != 0 && bit != 1) {
              complaint = "choice entries must be 0 or 1";
              break;
            }
            sample.choice[i] = static_cast<std::uint8_t>(bit);
          }
        }
        if (!complaint && data.meta.feature_dim != 0 &&
            static_cast<int>(cols) != data.meta.feature_dim) {
          complaint = "feature dimension differs from header";
        }
        if (!complaint && expected_m != 0 && static_cast<int>(rows) != expected_m) {
          complaint = "task size differs from header";
        }
      }
    } catch (const json::exception&) {
      complaint = "missing or mistyped field";
    }
    if (complaint) {
      throw DataFormatError("dataset '" + path.string() + "' line " + std::to_string(line_no) +
                            ": " + complaint);
    }
    data.meta.total_objects += sample.task.size();
    for (auto bit : sample.choice) data.meta.total_chosen += bit;
    data.samples.push_back(std::move(sample));
  }
  if (data.samples.empty()) {
    throw DataFormatError("dataset '" + path.string() + "' has no tasks");
  }
  return data;
}

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json out;
  out["shape"] = {m.rows(), m.cols()};
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      data.push_back(m(i, j));
    }
  }
  out["data"] = std::move(data);
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("shape").at(0).get<Eigen::Index>();
  const auto cols = j.at("shape").at(1).get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw DataFormatError("model matrix shape does not match data length");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t at = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) {
      m(i, j2) = data.at(at++).get<double>();
    }
  }
  return m;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  }
  return v;
}

}  // namespace

std::string serialize_model(const ModelFile& model) {
  const ArchSpec& arch = model.params.arch;
  json doc;
  doc["format"] = kModelFormatTag;
  doc["version"] = kModelFormatVersion;
  doc["architecture"] = {
      {"input_dim", arch.input_dim},
      {"hidden_layers", arch.hidden_layers},
      {"hidden_units", arch.hidden_units},
      {"output_dim", arch.output_dim},
      {"bn_momentum", arch.bn_momentum},
      {"bn_epsilon", arch.bn_epsilon},
      {"bn_after_activation", arch.bn_placement == BatchNormPlacement::AfterActivation},
  };
  const TrainConfig& tc = model.train_config;
  doc["train_config"] = {
      {"epochs", tc.epochs},
      {"batch_size", tc.batch_size},
      {"max_lr", tc.max_lr},
      {"base_lr_fraction", tc.base_lr_fraction},
      {"cycle_length_steps", tc.cycle_length_steps},
      {"weights", {tc.weights.po, tc.weights.dom, tc.weights.mds, tc.weights.l2}},
      {"dom_restrict_to_chosen", tc.dom_neighborhood == DomNeighborhood::ChosenOnly},
      {"optimizer", tc.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
      {"seed", tc.seed},
  };
  doc["dataset_fingerprint"] = model.dataset_fingerprint;
  json layers = json::array();
  for (std::size_t l = 0; l < model.params.hidden.size(); ++l) {
    json layer;
    layer["weight"] = matrix_json(model.params.hidden[l].weight);
    layer["bias"] = vector_json(model.params.hidden[l].bias);
    layer["gamma"] = vector_json(model.params.norms[l].gamma);
    layer["beta"] = vector_json(model.params.norms[l].beta);
    layer["running_mean"] = vector_json(model.params.norms[l].running_mean);
    layer["running_var"] = vector_json(model.params.norms[l].running_var);
    layers.push_back(std::move(layer));
  }
  doc["layers"] = std::move(layers);
  doc["head"] = {{"weight", matrix_json(model.params.head.weight)},
                 {"bias", vector_json(model.params.head.bias)}};
  return doc.dump(2) + "\n";
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  write_file_atomic(path, serialize_model(model));
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataFormatError("cannot open model '" + path.string() + "'");
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw DataFormatError("model '" + path.string() + "' is not valid JSON");
  }
  try {
    if (doc.at("format") != kModelFormatTag) {
      throw DataFormatError("model '" + path.string() + "': wrong format tag");
    }
    if (doc.at("version") != kModelFormatVersion) {
      throw DataFormatError("model '" + path.string() + "': unsupported version");
    }
    ModelFile model;
    const json& arch = doc.at("architecture");
    model.params.arch.input_dim = arch.at("input_dim").get<int>();
    model.params.arch.hidden_layers = arch.at("hidden_layers").get<int>();
    model.params.arch.hidden_units = arch.at("hidden_units").get<int>();
    model.params.arch.output_dim = arch.at("output_dim").get<int>();
    model.params.arch.bn_momentum = arch.at("bn_momentum").get<double>();
    model.params.arch.bn_epsilon = arch.at("bn_epsilon").get<double>();
    model.params.arch.bn_placement = arch.at("bn_after_activation").get<bool>()
                                         ? BatchNormPlacement::AfterActivation
                                         : BatchNormPlacement::BeforeActivation;
    const json& tc = doc.at("train_config");
    model.train_config.epochs = tc.at("epochs").get<int>();
    model.train_config.batch_size = tc.at("batch_size").get<int>();
    model.train_config.max_lr = tc.at("max_lr").get<double>();
    model.train_config.base_lr_fraction = tc.at("base_lr_fraction").get<double>();
    model.train_config.cycle_length_steps = tc.at("cycle_length_steps").get<int>();
    model.train_config.weights = LossWeights{tc.at("weights").at(0).get<double>(),
                                             tc.at("weights").at(1).get<double>(),
                                             tc.at("weights").at(2).get<double>(),
                                             tc.at("weights").at(3).get<double>()};
    model.train_config.dom_neighborhood = tc.at("dom_restrict_to_chosen").get<bool>()
                                              ? DomNeighborhood::ChosenOnly
                                              : DomNeighborhood::AllOthers;
    model.train_config.optimizer =
        tc.at("optimizer").get<std::string>() == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;
    model.train_config.seed = tc.at("seed").get<std::uint64_t>();
    model.dataset_fingerprint = doc.at("dataset_fingerprint").get<std::string>();
    for (const json& layer : doc.at("layers")) {
      DenseLayer dl;
      dl.weight = matrix_from_json(layer.at("weight"));
      dl.bias = vector_from_json(layer.at("bias"));
      model.params.hidden.push_back(std::move(dl));
      BatchNormState bn;
      bn.gamma = vector_from_json(layer.at("gamma"));
      bn.beta = vector_from_json(layer.at("beta"));
      bn.running_mean = vector_from_json(layer.at("running_mean"));
      bn.running_var = vector_from_json(layer.at("running_var"));
      model.params.norms.push_back(std::move(bn));
    }
    model.params.head.weight = matrix_from_json(doc.at("head").at("weight"));
    model.params.head.bias = vector_from_json(doc.at("head").at("bias"));
    return model;
  } catch (const json::exception& e) {
    throw DataFormatError("model '" + path.string() + "': " + e.what());
  }
}

std::string training_log_csv(const TrainReport& report) {
  std::string out = "epoch,loss_total,loss_po,loss_dom,loss_mds,loss_l2,val_a_mean\n";
  for (const auto& record : report.epochs) {
    out += std::to_string(record.epoch);
    out += ',' + format_double(record.mean_loss.total);
    out += ',' + format_double(record.mean_loss.po);
    out += ',' + format_double(record.mean_loss.dom);
    out += ',' + format_double(record.mean_loss.mds);
    out += ',' + format_double(record.mean_loss.l2);
    out += ',';
    if (record.val_a_mean) out += format_double(*record.val_a_mean);
    out += '\n';
  }
  return out;
}

std::string eval_report_csv(const std::vector<EvalReport>& reports) {
  std::string out = std::string(kEvalCsvHeader) + "\n";
  for (const auto& r : reports) {
    out += r.problem;
    out += ',' + r.split;
    out += ',' + std::to_string(r.repetition);
    out += ',' + std::to_string(r.per_task.size());
    out += ',' + format_double(r.mean);
    out += ',' + format_double(r.stddev);
    out += ',' + std::to_string(r.confusion.tp);
    out += ',' + std::to_string(r.confusion.fp);
    out += ',' + std::to_string(r.confusion.tn);
    out += ',' + std::to_string(r.confusion.fn);
    out += '\n';
  }
  return out;
}

std::string render_bar_chart(const std::vector<BarItem>& items, const std::string& title,
                             const ChartLayout& layout) {
  // Group items by label, preserving first-seen order; each arm gets a bar.
  std::vector<std::string> labels;
  std::vector<std::string> arms;
  for (const auto& item : items) {
    if (std::find(labels.begin(), labels.end(), item.label) == labels.end()) {
      labels.push_back(item.label);
    }
    if (std::find(arms.begin(), arms.end(), item.arm) == arms.end()) {
      arms.push_back(item.arm);
    }
  }
  const std::size_t groups = labels.size();
  const std::size_t per_group = arms.size();
  const double group_width = layout.plot_width() / static_cast<double>(std::max<std::size_t>(1, groups));
  const double bar_width = group_width * 0.8 / static_cast<double>(std::max<std::size_t>(1, per_group));
  static const char* fills[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(layout.width)
      << "\" height=\"" << format_double(layout.height) << "\" viewBox=\"0 0 "
      << format_double(layout.width) << " " << format_double(layout.height) << "\">\n";
  svg << "  <style>text{font-family:sans-serif;font-size:11px}</style>\n";
  svg << "  <text x=\"" << format_double(layout.margin_left) << "\" y=\"14\">" << title
      << "</text>\n";

  // y axis with ticks every 0.25
  const double x0 = layout.margin_left;
  const double x1 = layout.width - layout.margin_right;
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = 0.25 * tick;
    const double y = layout.y_of(v);
    svg << "  <line x1=\"" << format_double(x0) << "\" y1=\"" << format_double(y) << "\" x2=\""
        << format_double(x1) << "\" y2=\"" << format_double(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "  <text x=\"4\" y=\"" << format_double(y + 4.0) << "\">" << format_double(v)
        << "</text>\n";
  }

  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t a = 0; a < per_group; ++a) {
      const BarItem* item = nullptr;
      for (const auto& candidate : items) {
        if (candidate.label == labels[g] && candidate.arm == arms[a]) {
          item = &candidate;
          break;
        }
      }
      if (!item) continue;
      const double gx = x0 + group_width * (static_cast<double>(g) + 0.1);
      const double bx = gx + bar_width * static_cast<double>(a);
      const double top = layout.y_of(item->mean);
      svg << "  <rect class=\"bar\" x=\"" << format_double(bx) << "\" y=\"" << format_double(top)
          << "\" width=\"" << format_double(bar_width * 0.92) << "\" height=\""
          << format_double(layout.y_of(0.0) - top) << "\" fill=\"" << fills[a % 4] << "\"/>\n";
      const double cx = bx + bar_width * 0.46;
      const double lo = layout.y_of(std::max(0.0, item->mean - item->stddev));
      const double hi = layout.y_of(std::min(1.0, item->mean + item->stddev));
      svg << "  <line class=\"errbar\" x1=\"" << format_double(cx) << "\" y1=\""
          << format_double(lo) << "\" x2=\"" << format_double(cx) << "\" y2=\""
          << format_double(hi) << "\" stroke=\"#222222\" stroke-width=\"1.5\"/>\n";
    }
    const double lx = x0 + group_width * (static_cast<double>(g) + 0.5);
    svg << "  <text x=\"" << format_double(lx) << "\" y=\""
        << format_double(layout.height - layout.margin_bottom + 16.0)
        << "\" text-anchor=\"middle\">" << labels[g] << "</text>\n";
  }

  // random-guessing reference
  const double y_half = layout.y_of(0.5);
  svg << "  <line class=\"baseline\" x1=\"" << format_double(x0) << "\" y1=\""
      << format_double(y_half) << "\" x2=\"" << format_double(x1) << "\" y2=\""
      << format_double(y_half)
      << "\" stroke=\"#cc3311\" stroke-width=\"1\" stroke-dasharray=\"5 4\"/>\n";

  if (per_group > 1) {
    double lx = x0;
    for (std::size_t a = 0; a < per_group; ++a) {
      svg << "  <rect x=\"" << format_double(lx) << "\" y=\""
          << format_double(layout.height - 14.0) << "\" width=\"10\" height=\"10\" fill=\""
          << fills[a % 4] << "\"/>\n";
      svg << "  <text x=\"" << format_double(lx + 14.0) << "\" y=\""
          << format_double(layout.height - 5.0) << "\">" << arms[a] << "</text>\n";
      lx += 90.0;
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace pchoice
