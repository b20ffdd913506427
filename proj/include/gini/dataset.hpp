#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gini {

/// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  std::vector<double> column(std::size_t j) const;

  const std::vector<double>& values() const { return values_; }

  /// Rows selected by index, in the given order.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Feature matrix with optional class labels in [0, n_classes).
struct DataMatrix {
  Matrix features;
  std::optional<std::vector<int>> labels;
  std::vector<std::string> feature_names;
  std::size_t n_classes = 0;

  std::size_t rows() const { return features.rows(); }
  std::size_t cols() const { return features.cols(); }
  bool has_labels() const { return labels.has_value(); }

  DataMatrix select_rows(std::span<const std::size_t> indices) const;
};

/// Builds a labeled DataMatrix, checking the label range.
DataMatrix make_labeled(Matrix features, std::vector<int> labels);

/// No label column, a zero-based column index, or a header name.
using LabelColumn = std::variant<std::monostate, std::size_t, std::string>;

struct CsvOptions {
  LabelColumn label_col;
  bool has_header = false;
};

/// Parses CSV text. Non-numeric feature columns are encoded as ordinal ids in
/// order of first appearance; the column kind is fixed by its first data row.
/// Label tokens are encoded by ascending numeric value when every token is
/// numeric, otherwise by first appearance.
DataMatrix parse_csv(std::string_view text, const CsvOptions& options);
DataMatrix load_csv(const std::filesystem::path& path, const CsvOptions& options);

/// Writes a header (feature names, or x1..xd) and the features, plus labels as a
/// trailing "class" column, with shortest
/// round-trip formatting.
std::string to_csv(const DataMatrix& data);
void write_csv(const std::filesystem::path& path, const DataMatrix& data);

struct FoldPlan {
  std::size_t n_folds = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> assignments;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
  std::size_t fold_size(std::size_t fold) const;
};

/// Seeded Fisher-Yates shuffle followed by round-robin fold assignment.
FoldPlan split_folds(std::size_t rows, std::size_t n_folds, std::uint64_t seed);
FoldPlan split_folds(const DataMatrix& data, std::size_t n_folds, std::uint64_t seed);

/// Number of rows perturbed by inject_noise at the given level.
std::size_t noisy_row_count(double level, std::size_t rows);

/// Returns a copy where ceil(level * rows) uniformly chosen rows receive an
/// independent N(0, 1) draw on every feature. Labels are untouched.
DataMatrix inject_noise(const DataMatrix& data, double level, std::uint64_t seed);

/// Rows perturbed by inject_noise for these arguments, in ascending order.
std::vector<std::size_t> noisy_rows(std::size_t rows, double level, std::uint64_t seed);

struct DatasetEntry {
  std::string name;
  std::filesystem::path path;
  LabelColumn label_col;
  std::size_t n_classes = 0;
  bool has_header = true;
};

/// Reads a JSON manifest mapping dataset name to
/// {path, label_col, n_classes[, has_header]}. Relative paths resolve against
/// the manifest's directory. Entries are returned sorted by name.
std::vector<DatasetEntry> load_manifest(const std::filesystem::path& path);

DataMatrix load_dataset(const DatasetEntry& entry);

}  // namespace gini
