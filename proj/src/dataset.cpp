#include "gini/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "gini/error.hpp"
#include "gini/random.hpp"

namespace gini {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw DomainError("matrix value count does not match its shape");
  }
}

std::vector<double> Matrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

DataMatrix DataMatrix::select_rows(std::span<const std::size_t> indices) const {
  DataMatrix out;
  out.features = features.select_rows(indices);
  out.feature_names = feature_names;
  out.n_classes = n_classes;
  if (labels) {
    std::vector<int> sub(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) sub[r] = (*labels)[indices[r]];
    out.labels = std::move(sub);
  }
  return out;
}

DataMatrix make_labeled(Matrix features, std::vector<int> labels) {
  if (labels.size() != features.rows()) {
    throw DomainError("label count does not match row count");
  }
  DataMatrix out;
  out.features = std::move(features);
  int max_label = -1;
  for (const int l : labels) {
    if (l < 0) throw DomainError("labels must be non-negative");
    max_label = std::max(max_label, l);
  }
  out.n_classes = static_cast<std::size_t>(max_label + 1);
  out.labels = std::move(labels);
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

}  // namespace

DataMatrix parse_csv(std::string_view text, const CsvOptions& options) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    if (!is_blank(line)) lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty()) throw IngestError("empty CSV input");

  std::vector<std::string> header;
  std::size_t first_data = 0;
  if (options.has_header) {
    for (const auto cell : split_line(lines[0])) header.emplace_back(cell);
    first_data = 1;
  }
  if (first_data >= lines.size()) throw IngestError("CSV input has a header but no data rows");

  const std::size_t width = split_line(lines[first_data]).size();
  if (!header.empty() && header.size() != width) {
    throw IngestError("header has " + std::to_string(header.size()) + " columns but row 1 has " +
                      std::to_string(width));
  }

  std::optional<std::size_t> label_index;
  if (const auto* idx = std::get_if<std::size_t>(&options.label_col)) {
    label_index = *idx;
  } else if (const auto* name = std::get_if<std::string>(&options.label_col)) {
    if (header.empty()) throw IngestError("label column '" + *name + "' requires a header row");
    const auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) throw IngestError("label column '" + *name + "' not found in header");
    label_index = static_cast<std::size_t>(it - header.begin());
  }
  if (label_index && *label_index >= width) {
    throw IngestError("label column index " + std::to_string(*label_index) + " out of range");
  }
  const std::size_t n_features = width - (label_index ? 1 : 0);
  if (n_features == 0) throw IngestError("CSV input has no feature columns");

  const std::size_t n_rows = lines.size() - first_data;
  std::vector<std::vector<std::string_view>> cells;
  cells.reserve(n_rows);
  for (std::size_t r = first_data; r < lines.size(); ++r) {
    auto row = split_line(lines[r]);
    if (row.size() != width) {
      throw IngestError("row " + std::to_string(r - first_data + 1) + " has " + std::to_string(row.size()) +
                        " columns, expected " + std::to_string(width));
    }
    cells.push_back(std::move(row));
  }

  Matrix features(n_rows, n_features);
  std::vector<std::string> names;
  std::size_t out_col = 0;
  for (std::size_t c = 0; c < width; ++c) {
    if (label_index && c == *label_index) continue;
    if (!header.empty()) names.push_back(header[c]);
    const bool numeric = parse_number(cells[0][c]).has_value();
    std::unordered_map<std::string_view, double> codes;
    for (std::size_t r = 0; r < n_rows; ++r) {
      const std::string_view cell = cells[r][c];
      if (cell.empty()) {
        throw IngestError("missing value at row " + std::to_string(r + 1) + ", column " + std::to_string(c + 1));
      }
      if (numeric) {
        const auto v = parse_number(cell);
        if (!v) {
          throw IngestError("unparseable numeric cell '" + std::string(cell) + "' at row " + std::to_string(r + 1) +
                            ", column " + std::to_string(c + 1));
        }
        features(r, out_col) = *v;
      } else {
        const auto [it, inserted] = codes.try_emplace(cell, static_cast<double>(codes.size()));
        features(r, out_col) = it->second;
      }
    }
    ++out_col;
  }

  DataMatrix out;
  out.features = std::move(features);
  out.feature_names = std::move(names);
  if (label_index) {
    bool all_numeric = true;
    for (const auto& row : cells) {
      if (row[*label_index].empty()) throw IngestError("missing label value");
      if (!parse_number(row[*label_index])) all_numeric = false;
    }
    std::vector<int> labels(n_rows);
    if (all_numeric) {
      std::map<double, int> ids;
      for (const auto& row : cells) ids.emplace(*parse_number(row[*label_index]), 0);
      int next = 0;
      for (auto& [value, id] : ids) id = next++;
      for (std::size_t r = 0; r < n_rows; ++r) labels[r] = ids.at(*parse_number(cells[r][*label_index]));
      out.n_classes = ids.size();
    } else {
      std::unordered_map<std::string_view, int> ids;
      for (std::size_t r = 0; r < n_rows; ++r) {
        const auto [it, inserted] = ids.try_emplace(cells[r][*label_index], static_cast<int>(ids.size()));
        labels[r] = it->second;
      }
      out.n_classes = ids.size();
    }
    out.labels = std::move(labels);
  }
  return out;
}

DataMatrix load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_csv(buffer.str(), options);
  } catch (const IngestError& e) {
    throw IngestError(path.string() + ": " + e.what());
  }
}

namespace {

void append_double(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

std::string to_csv(const DataMatrix& data) {
  std::string out;
  for (std::size_t j = 0; j < data.cols(); ++j) {
    if (j) out += ',';
    out += data.feature_names.size() == data.cols() ? data.feature_names[j] : "x" + std::to_string(j + 1);
  }
  if (data.labels) out += ",class";
  out += '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      if (j) out += ',';
      append_double(out, data.features(i, j));
    }
    if (data.labels) {
      out += ',';
      out += std::to_string((*data.labels)[i]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const DataMatrix& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path.string());
  out << to_csv(data);
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(i);
  }
  return out;
}

std::size_t FoldPlan::fold_size(std::size_t fold) const {
  return static_cast<std::size_t>(std::count(assignments.begin(), assignments.end(), fold));
}

FoldPlan split_folds(std::size_t rows, std::size_t n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw ConfigError("n_folds must be at least 2");
  if (n_folds > rows) {
    throw ConfigError("n_folds (" + std::to_string(n_folds) + ") exceeds row count (" + std::to_string(rows) + ")");
  }
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = rows; i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
  FoldPlan plan{n_folds, seed, std::vector<std::size_t>(rows)};
  for (std::size_t pos = 0; pos < rows; ++pos) plan.assignments[order[pos]] = pos % n_folds;
  return plan;
}

FoldPlan split_folds(const DataMatrix& data, std::size_t n_folds, std::uint64_t seed) {
  return split_folds(data.rows(), n_folds, seed);
}

std::size_t noisy_row_count(double level, std::size_t rows) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("noise level must lie in (0, 1)");
  // The epsilon keeps products like 0.07 * 100 from rounding up past the integer.
  const double raw = std::ceil(level * static_cast<double>(rows) - 1e-9);
  return std::min(rows, static_cast<std::size_t>(std::max(raw, 0.0)));
}

namespace {

std::vector<std::size_t> draw_noisy_rows(std::size_t rows, std::size_t count, Rng& rng) {
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(order[i], order[i + rng.uniform_index(rows - i)]);
  }
  order.resize(count);
  return order;
}

}  // namespace

std::vector<std::size_t> noisy_rows(std::size_t rows, double level, std::uint64_t seed) {
  Rng rng(seed);
  auto picked = draw_noisy_rows(rows, noisy_row_count(level, rows), rng);
  std::sort(picked.begin(), picked.end());
  return picked;
}

DataMatrix inject_noise(const DataMatrix& data, double level, std::uint64_t seed) {
  const std::size_t count = noisy_row_count(level, data.rows());
  Rng rng(seed);
  const auto picked = draw_noisy_rows(data.rows(), count, rng);
  DataMatrix out = data;
  for (const std::size_t r : picked) {
    for (double& v : out.features.row(r)) v += rng.standard_normal();
  }
  return out;
}

std::vector<DatasetEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw IngestError("manifest must be a JSON object keyed by dataset name");
  const auto base = path.parent_path();
  std::vector<DatasetEntry> entries;
  for (const auto& [name, spec] : doc.items()) {
    DatasetEntry e;
    e.name = name;
    if (!spec.contains("path")) throw IngestError("manifest entry '" + name + "' has no path");
    e.path = spec.at("path").get<std::string>();
    if (e.path.is_relative()) e.path = base / e.path;
    if (spec.contains("label_col")) {
      const auto& lc = spec.at("label_col");
      if (lc.is_number_integer()) {
        e.label_col = lc.get<std::size_t>();
      } else if (lc.is_string()) {
        e.label_col = lc.get<std::string>();
      }
    }
    e.n_classes = spec.value("n_classes", std::size_t{0});
    e.has_header = spec.value("has_header", true);
    entries.push_back(std::move(e));
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return entries;
}

DataMatrix load_dataset(const DatasetEntry& entry) {
  auto data = load_csv(entry.path, CsvOptions{entry.label_col, entry.has_header});
  if (entry.n_classes != 0 && data.labels && data.n_classes != entry.n_classes) {
    throw IngestError("dataset '" + entry.name + "' has " + std::to_string(data.n_classes) +
                      " classes, manifest declares " + std::to_string(entry.n_classes));
  }
  return data;
}

}  // namespace gini
